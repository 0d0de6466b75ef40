//! Ordered hypergraphs: edges are `k`-tuples of distinct vertices.

mod graph;
mod report;
mod structure;

pub use graph::{from_graph_copies, m2_density, SimpleGraph};
pub use report::{p_conditions_report, PConditionsReport, PConditionsRow};
pub use structure::{detect_structure, StructureKind, StructureWitness};

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use serde::Serialize;

use crate::coloring::{find_proper_coloring, SearchBudget, Verdict};
use crate::error::{Error, Result};
use crate::exact::PowerProduct;
use crate::ground::GroundSet;
use crate::matrix::IntegerMatrix;
use crate::solutions::{for_each_solution, DEFAULT_NODE_LIMIT};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderedHypergraph {
    k: usize,
    v: usize,
    /// Edges flattened with stride `k`, sorted and deduplicated.
    data: Vec<u32>,
    labels: Option<Vec<String>>,
}

fn has_repeat(e: &[u32]) -> bool {
    (1..e.len()).any(|i| e[..i].contains(&e[i]))
}

impl OrderedHypergraph {
    /// Builds from edge tuples, dropping duplicates. Vertices must be below `v`
    /// and pairwise distinct within an edge.
    pub fn new(k: usize, v: usize, edges: impl IntoIterator<Item = Vec<u32>>) -> Result<Self> {
        if k == 0 {
            return Err(Error::Invalid("uniformity must be at least 1".into()));
        }
        let mut list: Vec<Vec<u32>> = Vec::new();
        for e in edges {
            if e.len() != k {
                return Err(Error::Invalid(format!("edge {e:?} does not have {k} vertices")));
            }
            if e.iter().any(|&x| x as usize >= v) {
                return Err(Error::Invalid(format!("edge {e:?} has a vertex outside 0..{v}")));
            }
            if has_repeat(&e) {
                return Err(Error::Invalid(format!("edge {e:?} repeats a vertex")));
            }
            list.push(e);
        }
        Ok(Self::from_checked(k, v, list))
    }

    fn from_checked(k: usize, v: usize, mut list: Vec<Vec<u32>>) -> Self {
        list.sort_unstable();
        list.dedup();
        OrderedHypergraph {
            k,
            v,
            data: list.concat(),
            labels: None,
        }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.v {
            return Err(Error::Invalid(format!("{} labels for {} vertices", labels.len(), self.v)));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn empty(k: usize, v: usize) -> Self {
        OrderedHypergraph {
            k,
            v,
            data: Vec::new(),
            labels: None,
        }
    }

    pub fn uniformity(&self) -> usize {
        self.k
    }

    pub fn vertex_count(&self) -> usize {
        self.v
    }

    pub fn edge_count(&self) -> usize {
        self.data.len() / self.k
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = &[u32]> + '_ {
        self.data.chunks_exact(self.k)
    }

    pub fn edge(&self, i: usize) -> &[u32] {
        &self.data[i * self.k..(i + 1) * self.k]
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, x: u32) -> String {
        match &self.labels {
            Some(l) => l[x as usize].clone(),
            None => x.to_string(),
        }
    }

    /// Same vertices, keeping the edges at the given indices.
    pub fn sub_hypergraph(&self, keep: &[usize]) -> Self {
        let list = keep.iter().map(|&i| self.edge(i).to_vec()).collect();
        let mut h = Self::from_checked(self.k, self.v, list);
        h.labels = self.labels.clone();
        h
    }

    /// Underlying vertex sets, each sorted, deduplicated.
    pub fn edge_sets(&self) -> Vec<Vec<u32>> {
        let mut sets: Vec<Vec<u32>> = self
            .edges()
            .map(|e| {
                let mut s = e.to_vec();
                s.sort_unstable();
                s
            })
            .collect();
        sets.sort_unstable();
        sets.dedup();
        sets
    }

    fn check_positions(&self, w: &[usize]) -> Result<Vec<usize>> {
        let mut v = w.to_vec();
        v.sort_unstable();
        v.dedup();
        if v.is_empty() {
            return Err(Error::Invalid("position set must be nonempty".into()));
        }
        if v.len() != w.len() || v.iter().any(|&j| j >= self.k) {
            return Err(Error::Invalid(format!("bad position set {w:?} for uniformity {}", self.k)));
        }
        Ok(v)
    }

    /// `H_W`: projections of the edges onto the positions in `W` (0-based).
    pub fn restriction(&self, w: &[usize]) -> Result<Self> {
        let w = self.check_positions(w)?;
        let list = self
            .edges()
            .map(|e| w.iter().map(|&j| e[j]).collect::<Vec<u32>>())
            .filter(|e| !has_repeat(e))
            .collect();
        let mut h = Self::from_checked(w.len(), self.v, list);
        h.labels = self.labels.clone();
        Ok(h)
    }

    /// `Δ_W(H_Y)`: the most edges of `H_Y` that restrict to one edge of `H_W`.
    pub fn delta(&self, w: &[usize], y: &[usize]) -> Result<u64> {
        let w = self.check_positions(w)?;
        let y = self.check_positions(y)?;
        if w.iter().any(|j| !y.contains(j)) {
            return Err(Error::Invalid("W must be a subset of Y".into()));
        }
        let hy = self.restriction(&y)?;
        let pos: Vec<usize> = w.iter().map(|j| y.iter().position(|x| x == j).unwrap()).collect();
        Ok(max_fibre(&hy, &pos))
    }

    pub fn write_text(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "{} {} {}", self.k, self.v, self.edge_count())?;
        for e in self.edges() {
            let s: Vec<String> = e.iter().map(|x| x.to_string()).collect();
            writeln!(out, "{}", s.join(" "))?;
        }
        Ok(())
    }

    pub fn read_text(input: impl BufRead) -> Result<Self> {
        let mut lines = input
            .lines()
            .map(|l| l.map_err(Error::from))
            .filter(|l| l.as_ref().map_or(true, |l| !l.trim().is_empty() && !l.trim_start().starts_with('#')));
        let header = lines.next().ok_or_else(|| Error::Parse("empty hypergraph file".into()))??;
        let nums: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad header `{header}`"))))
            .collect::<Result<_>>()?;
        let [k, v, e] = nums[..] else {
            return Err(Error::Parse(format!("header must be `k v e`, got `{header}`")));
        };
        let mut edges = Vec::with_capacity(e);
        for line in lines {
            let line = line?;
            let edge: Vec<u32> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad edge line `{line}`"))))
                .collect::<Result<_>>()?;
            edges.push(edge);
        }
        if edges.len() != e {
            return Err(Error::Parse(format!("header promises {e} edges, found {}", edges.len())));
        }
        OrderedHypergraph::new(k, v, edges)
    }
}

impl fmt::Display for OrderedHypergraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-uniform, {} vertices, {} edges", self.k, self.v, self.edge_count())
    }
}

/// Largest group of edges sharing the same values at `pos`.
fn max_fibre(h: &OrderedHypergraph, pos: &[usize]) -> u64 {
    let mut fibres: HashMap<Vec<u32>, u64> = HashMap::new();
    for e in h.edges() {
        *fibres.entry(pos.iter().map(|&i| e[i]).collect()).or_default() += 1;
    }
    fibres.values().copied().max().unwrap_or(0)
}

pub(crate) fn subsets(k: usize, min: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (1usize..1 << k)
        .filter(|m| m.count_ones() as usize >= min)
        .map(|m| (0..k).filter(|j| m >> j & 1 == 1).collect())
        .collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct HypergraphThreshold {
    pub vertices: usize,
    /// `(W, e(H_W), f_W)`; `f_W` is `None` when `H_W` is edgeless.
    pub entries: Vec<(Vec<usize>, usize, Option<PowerProduct>)>,
    pub p_hat: PowerProduct,
    pub maximizers: Vec<Vec<usize>>,
}

impl HypergraphThreshold {
    pub fn f(&self, w: &[usize]) -> Option<&PowerProduct> {
        self.entries.iter().find(|e| e.0 == w).and_then(|e| e.2.as_ref())
    }
}

/// `f_W = (e(H_W)/v(H))^{-1/(|W|-1)}` for `|W| >= 2`, and their maximum.
pub fn hat_p_hypergraph(h: &OrderedHypergraph) -> Result<HypergraphThreshold> {
    let k = h.uniformity();
    if !(2..=20).contains(&k) {
        return Err(Error::Invalid(format!("uniformity {k} outside 2..=20")));
    }
    let v = BigInt::from(h.vertex_count());
    let mut entries = Vec::new();
    let mut best: Option<PowerProduct> = None;
    let mut maximizers = Vec::new();
    for w in subsets(k, 2) {
        let e = h.restriction(&w)?.edge_count();
        let f = (e > 0).then(|| {
            PowerProduct::power(
                BigRational::new(BigInt::from(e), v.clone()),
                Ratio::new(-1, w.len() as i64 - 1),
            )
        });
        if let Some(f) = &f {
            match best.as_ref().map(|b| f.cmp_exact(b)) {
                None | Some(Ordering::Greater) => {
                    best = Some(f.clone());
                    maximizers = vec![w.clone()];
                }
                Some(Ordering::Equal) => maximizers.push(w.clone()),
                Some(Ordering::Less) => {}
            }
        }
        entries.push((w, e, f));
    }
    let p_hat = best.ok_or_else(|| Error::Invalid("every restriction is edgeless".into()))?;
    Ok(HypergraphThreshold {
        vertices: h.vertex_count(),
        entries,
        p_hat,
        maximizers,
    })
}

/// Vertices are the elements of `S`, edges the `k`-distinct solutions.
pub fn from_solutions(a: &IntegerMatrix, s: &GroundSet) -> Result<OrderedHypergraph> {
    let els = s.elements()?;
    let mut edges = Vec::new();
    for_each_solution(a, &els, true, DEFAULT_NODE_LIMIT, |x| edges.push(x.to_vec()))?;
    let k = a.cols();
    if k == 0 {
        return Err(Error::Invalid("matrix has no columns".into()));
    }
    let labels = (0..els.len()).map(|i| els.format(i)).collect();
    OrderedHypergraph::from_checked(k, els.len(), edges).with_labels(labels)
}

/// Greedily deletes edges (in order) while the rest stays 2-Ramsey. Returns
/// the empty hypergraph when `h` is not 2-Ramsey.
pub fn rado_minimal_reduce(h: &OrderedHypergraph, budget: SearchBudget) -> Result<OrderedHypergraph> {
    let empty = OrderedHypergraph {
        labels: h.labels.clone(),
        ..OrderedHypergraph::empty(h.k, h.v)
    };
    match find_proper_coloring(h, 2, budget).verdict {
        Verdict::NotRamsey => return Ok(empty),
        Verdict::Unknown => return Err(Error::BudgetExceeded(budget.nodes)),
        Verdict::Ramsey => {}
    }
    let mut keep: Vec<usize> = (0..h.edge_count()).collect();
    let mut i = 0;
    while i < keep.len() {
        let mut trial = keep.clone();
        trial.remove(i);
        match find_proper_coloring(&h.sub_hypergraph(&trial), 2, budget).verdict {
            Verdict::Ramsey => keep = trial,
            Verdict::NotRamsey => i += 1,
            Verdict::Unknown => return Err(Error::BudgetExceeded(budget.nodes)),
        }
    }
    Ok(h.sub_hypergraph(&keep))
}
