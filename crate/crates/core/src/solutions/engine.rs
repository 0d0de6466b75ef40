//! Depth-first enumeration of solutions to `Ax = 0` inside a list of elements.
//!
//! Columns are assigned in a chosen order. A row is checked at the depth of
//! its last nonzero column in that order; there the admissible values come
//! from a hash index keyed by `(a_ij * x)_i`, so the last column of each row
//! is solved for instead of searched.

use std::collections::HashMap;
use std::ops::ControlFlow;

use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::ground::Elements;
use crate::matrix::IntegerMatrix;

/// Default cap on search nodes for one enumeration.
pub const DEFAULT_NODE_LIMIT: u64 = 100_000_000;

pub(crate) fn small_entries(a: &IntegerMatrix) -> Result<Vec<Vec<i64>>> {
    (0..a.rows())
        .map(|i| {
            (0..a.cols())
                .map(|j| {
                    a.get(i, j)
                        .to_i64()
                        .filter(|x| x.unsigned_abs() < 1 << 31)
                        .ok_or_else(|| Error::Matrix("entries must be below 2^31 in absolute value".into()))
                })
                .collect()
        })
        .collect()
}

struct Level {
    column: usize,
    fixed: Option<u32>,
    check_rows: Vec<usize>,
    index: Option<HashMap<Box<[i64]>, Vec<u32>>>,
}

/// A column order with precomputed lookup indices.
pub struct Plan<'a> {
    a: Vec<Vec<i64>>,
    els: &'a Elements,
    levels: Vec<Level>,
    dim: usize,
    node_limit: u64,
}

pub struct State {
    /// Element index per column; meaningful for assigned columns only.
    pub assign: Vec<u32>,
    sums: Vec<Vec<i64>>,
    key: Vec<i64>,
    pub nodes: u64,
    exceeded: bool,
}

impl<'a> Plan<'a> {
    /// `order` lists every column once; `fixed[j]` pins column `j` to an element index.
    pub fn new(
        a: &IntegerMatrix,
        els: &'a Elements,
        order: &[usize],
        fixed: &[Option<u32>],
        node_limit: u64,
    ) -> Result<Self> {
        let entries = small_entries(a)?;
        let k = a.cols();
        debug_assert_eq!(order.len(), k);
        let dim = els.dim();
        let mut pos = vec![0usize; k];
        for (t, &c) in order.iter().enumerate() {
            pos[c] = t;
        }
        let mut check_at: Vec<Vec<usize>> = vec![Vec::new(); k];
        for (i, row) in entries.iter().enumerate() {
            if let Some(last) = (0..k).filter(|&j| row[j] != 0).map(|j| pos[j]).max() {
                check_at[last].push(i);
            }
        }
        let levels = order
            .iter()
            .zip(check_at)
            .map(|(&c, rows)| {
                let fixed = fixed[c];
                let index = (fixed.is_none() && !rows.is_empty()).then(|| {
                    let mut map: HashMap<Box<[i64]>, Vec<u32>> = HashMap::new();
                    let mut key = Vec::with_capacity(rows.len() * dim);
                    for (x, e) in els.iter().enumerate() {
                        key.clear();
                        for &i in &rows {
                            for (d, &v) in e.iter().enumerate() {
                                key.push(els.reduce(d, entries[i][c] as i128 * v as i128));
                            }
                        }
                        map.entry(key.clone().into_boxed_slice()).or_default().push(x as u32);
                    }
                    map
                });
                Level {
                    column: c,
                    fixed,
                    check_rows: rows,
                    index,
                }
            })
            .collect();
        Ok(Plan {
            a: entries,
            els,
            levels,
            dim,
            node_limit,
        })
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn columns(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.column).collect()
    }

    pub fn state(&self) -> State {
        State {
            assign: vec![u32::MAX; self.levels.len()],
            sums: vec![vec![0; self.a.len() * self.dim]; self.levels.len() + 1],
            key: Vec::new(),
            nodes: 0,
            exceeded: false,
        }
    }

    pub fn check(&self, st: &State) -> Result<()> {
        if st.exceeded {
            return Err(Error::LimitExceeded {
                needed: format!("more than {} search nodes", self.node_limit),
                limit: self.node_limit,
            });
        }
        Ok(())
    }

    /// Target key at level `t`: `-sum_i` over the rows checked there.
    fn target(&self, t: usize, st: &mut State) {
        st.key.clear();
        let sums = &st.sums[t];
        for &i in &self.levels[t].check_rows {
            for d in 0..self.dim {
                st.key.push(self.els.reduce(d, -(sums[i * self.dim + d] as i128)));
            }
        }
    }

    fn push(&self, t: usize, x: u32, st: &mut State) {
        let c = self.levels[t].column;
        let e = self.els.get(x as usize);
        let (lo, hi) = st.sums.split_at_mut(t + 1);
        let next = &mut hi[0];
        next.copy_from_slice(&lo[t]);
        for (i, row) in self.a.iter().enumerate() {
            if row[c] != 0 {
                for d in 0..self.dim {
                    let s = &mut next[i * self.dim + d];
                    *s = self.els.reduce(d, *s as i128 + row[c] as i128 * e[d] as i128);
                }
            }
        }
        st.assign[c] = x;
    }

    fn fixed_ok(&self, t: usize, x: u32, st: &State) -> bool {
        let c = self.levels[t].column;
        let e = self.els.get(x as usize);
        self.levels[t].check_rows.iter().all(|&i| {
            (0..self.dim).all(|d| {
                let v = st.sums[t][i * self.dim + d] as i128 + self.a[i][c] as i128 * e[d] as i128;
                self.els.reduce(d, v) == 0
            })
        })
    }

    fn distinct_ok(&self, t: usize, x: u32, st: &State) -> bool {
        self.levels[..t].iter().all(|l| st.assign[l.column] != x)
    }

    /// Enumerates assignments of levels `t..stop`, calling `reach` at `stop`.
    pub fn walk(
        &self,
        t: usize,
        stop: usize,
        distinct: bool,
        st: &mut State,
        reach: &mut dyn FnMut(&mut State) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        if t == stop {
            return reach(st);
        }
        st.nodes += 1;
        if st.nodes > self.node_limit {
            st.exceeded = true;
            return ControlFlow::Break(());
        }
        let level = &self.levels[t];
        if let Some(x) = level.fixed {
            if self.fixed_ok(t, x, st) && (!distinct || self.distinct_ok(t, x, st)) {
                self.push(t, x, st);
                return self.walk(t + 1, stop, distinct, st, reach);
            }
            return ControlFlow::Continue(());
        }
        match &level.index {
            Some(index) => {
                self.target(t, st);
                let Some(cands) = index.get(st.key.as_slice()) else {
                    return ControlFlow::Continue(());
                };
                for &x in cands {
                    if distinct && !self.distinct_ok(t, x, st) {
                        continue;
                    }
                    self.push(t, x, st);
                    self.walk(t + 1, stop, distinct, st, reach)?;
                }
            }
            None => {
                for x in 0..self.els.len() as u32 {
                    if distinct && !self.distinct_ok(t, x, st) {
                        continue;
                    }
                    self.push(t, x, st);
                    self.walk(t + 1, stop, distinct, st, reach)?;
                }
            }
        }
        ControlFlow::Continue(())
    }

    /// Counts completions of levels `t..depth`, summing the final candidate
    /// list instead of visiting it when distinctness is not required.
    pub fn count(&self, t: usize, distinct: bool, st: &mut State) -> u128 {
        let n = self.depth();
        if t + 1 == n && !distinct && self.levels[t].fixed.is_none() {
            st.nodes += 1;
            if st.nodes > self.node_limit {
                st.exceeded = true;
                return 0;
            }
            return match &self.levels[t].index {
                Some(index) => {
                    self.target(t, st);
                    index.get(st.key.as_slice()).map_or(0, |c| c.len() as u128)
                }
                None => self.els.len() as u128,
            };
        }
        let mut total = 0u128;
        let _ = self.walk(t, t + 1, distinct, st, &mut |st| {
            total += if t + 1 == n { 1 } else { self.count(t + 1, distinct, st) };
            if st.exceeded {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
        total
    }

    /// Whether levels `t..depth` admit a completion.
    pub fn exists(&self, t: usize, st: &mut State) -> bool {
        let n = self.depth();
        self.walk(t, n, false, st, &mut |_| ControlFlow::Break(())).is_break() && !st.exceeded
    }
}
