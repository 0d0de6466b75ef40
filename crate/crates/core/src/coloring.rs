//! Exact search for proper colorings of hypergraphs and monochromatic
//! solution counts.
//!
//! The search works on the unordered edge sets. Vertices lying in a single
//! edge are peeled off first and components are solved separately. Whenever
//! an edge has every vertex but one colored `c`, `c` is removed from the last
//! vertex's domain. At each node the most constrained free vertices are probed
//! color by color; failing colors are dropped, and the search branches on the
//! vertex whose probes propagated furthest.

use std::fmt;
use std::io::{BufRead, Write};
use std::time::Instant;

use num_bigint::BigUint;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ground::{format_element, Elements, GroundSet};
use crate::hypergraph::{from_solutions, OrderedHypergraph};
use crate::matrix::IntegerMatrix;
use crate::solutions::{count_in, for_each_solution, DEFAULT_NODE_LIMIT};

/// Default cap on backtracking nodes.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    pub nodes: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { nodes: DEFAULT_BUDGET }
    }
}

/// A total map from vertices to colors `0..r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coloring {
    r: u32,
    colors: Vec<u32>,
}

impl Coloring {
    pub fn new(r: u32, colors: Vec<u32>) -> Result<Self> {
        if r == 0 {
            return Err(Error::Invalid("at least one color is needed".into()));
        }
        if let Some(c) = colors.iter().find(|&&c| c >= r) {
            return Err(Error::Invalid(format!("color {c} is not below {r}")));
        }
        Ok(Coloring { r, colors })
    }

    pub fn constant(r: u32, n: usize) -> Self {
        Coloring { r, colors: vec![0; n] }
    }

    pub fn colors(&self) -> &[u32] {
        &self.colors
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    /// One `element color` line per element, colors written 1-based.
    pub fn write_text(&self, els: &Elements, mut out: impl Write) -> Result<()> {
        for (i, &c) in self.colors.iter().enumerate() {
            writeln!(out, "{} {}", format_element(els.get(i)), c + 1)?;
        }
        Ok(())
    }

    pub fn read_text(els: &Elements, r: u32, input: impl BufRead) -> Result<Self> {
        let mut colors = vec![u32::MAX; els.len()];
        for line in input.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (x, c) = line
                .rsplit_once(char::is_whitespace)
                .ok_or_else(|| Error::Parse(format!("bad coloring line `{line}`")))?;
            let coords: Vec<i64> = x
                .trim()
                .trim_start_matches('(')
                .trim_end_matches(')')
                .split(',')
                .map(|t| t.trim().parse().map_err(|_| Error::Parse(format!("bad element `{x}`"))))
                .collect::<Result<_>>()?;
            let c: u32 = c.parse().map_err(|_| Error::Parse(format!("bad color in `{line}`")))?;
            if c == 0 || c > r {
                return Err(Error::Invalid(format!("color {c} outside 1..={r}")));
            }
            let i = els
                .position(&coords)
                .ok_or_else(|| Error::Invalid(format!("{x} is not in the ground set")))?;
            colors[i as usize] = c - 1;
        }
        if let Some(i) = colors.iter().position(|&c| c == u32::MAX) {
            return Err(Error::Invalid(format!("element {} has no color", els.format(i))));
        }
        Coloring::new(r, colors)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Ramsey,
    NotRamsey,
    Unknown,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Ramsey => "ramsey",
            Verdict::NotRamsey => "not-ramsey",
            Verdict::Unknown => "unknown",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RamseyVerdict {
    pub verdict: Verdict,
    /// A proper coloring when the verdict is `NotRamsey`.
    pub certificate: Option<Vec<u32>>,
    pub nodes: u64,
    pub millis: u128,
}

impl RamseyVerdict {
    pub fn is_ramsey(&self) -> Option<bool> {
        match self.verdict {
            Verdict::Ramsey => Some(true),
            Verdict::NotRamsey => Some(false),
            Verdict::Unknown => None,
        }
    }
}

/// Edges of `h` that are monochromatic under `c`, counted over the ordered edges.
pub fn count_monochromatic_edges(h: &OrderedHypergraph, c: &Coloring) -> usize {
    h.edges()
        .filter(|e| e.iter().all(|&x| c.colors[x as usize] == c.colors[e[0] as usize]))
        .count()
}

const FREE: u32 = u32::MAX;

/// Vertices probed per search node.
const PROBES: usize = 16;

struct Solver {
    r: u32,
    edges: Vec<Vec<u32>>,
    incident: Vec<Vec<u32>>,
    order: Vec<u32>,
    color: Vec<u32>,
    domain: Vec<u32>,
    /// Per edge: assigned vertices per color, then the free count.
    counts: Vec<u32>,
    /// Per edge: number of colors present.
    distinct: Vec<u32>,
    /// Per vertex: summed weight of its open edges (kept exact for free vertices).
    score: Vec<u64>,
    trail: Vec<Undo>,
    /// Vertices currently holding each color.
    used: Vec<u64>,
    nodes: u64,
    budget: u64,
}

enum Undo {
    Color(u32),
    Domain(u32, u32),
}

/// Weight of an open edge with `free` uncolored vertices.
fn weight(free: u32) -> u64 {
    1 << (20 - free.min(20))
}

impl Solver {
    fn new(edges: Vec<Vec<u32>>, n: usize, r: u32, budget: u64) -> Self {
        let mut incident: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut score = vec![0u64; n];
        for (i, e) in edges.iter().enumerate() {
            for &x in e {
                incident[x as usize].push(i as u32);
                score[x as usize] += weight(e.len() as u32);
            }
        }
        let mut order: Vec<u32> = (0..n as u32).filter(|&x| !incident[x as usize].is_empty()).collect();
        order.sort_by_key(|&x| (std::cmp::Reverse(incident[x as usize].len()), x));
        let stride = r as usize + 1;
        let mut counts = vec![0; edges.len() * stride];
        for (i, e) in edges.iter().enumerate() {
            counts[i * stride + r as usize] = e.len() as u32;
        }
        Solver {
            r,
            distinct: vec![0; edges.len()],
            edges,
            incident,
            order,
            color: vec![FREE; n],
            domain: vec![(1u64 << r).wrapping_sub(1) as u32; n],
            counts,
            score,
            trail: Vec::new(),
            used: vec![0; r as usize],
            nodes: 0,
            budget,
        }
    }

    fn stride(&self) -> usize {
        self.r as usize + 1
    }

    fn contribution(&self, e: usize) -> u64 {
        if self.distinct[e] >= 2 {
            0
        } else {
            weight(self.counts[e * self.stride() + self.r as usize])
        }
    }

    /// Moves `x` (color `c`) into or out of its edges, keeping the scores of
    /// the other free vertices in step.
    fn toggle(&mut self, x: u32, c: u32, add: bool) {
        let st = self.stride();
        let r = self.r as usize;
        for k in 0..self.incident[x as usize].len() {
            let e = self.incident[x as usize][k] as usize;
            let old = self.contribution(e);
            let base = e * st;
            if add {
                self.counts[base + c as usize] += 1;
                self.counts[base + r] -= 1;
                if self.counts[base + c as usize] == 1 {
                    self.distinct[e] += 1;
                }
            } else {
                self.counts[base + c as usize] -= 1;
                self.counts[base + r] += 1;
                if self.counts[base + c as usize] == 0 {
                    self.distinct[e] -= 1;
                }
            }
            let new = self.contribution(e);
            if new != old {
                for &u in &self.edges[e] {
                    if u != x && self.color[u as usize] == FREE {
                        self.score[u as usize] = self.score[u as usize] + new - old;
                    }
                }
            }
        }
    }

    /// Assigns `x := c` and propagates; false on a conflict.
    fn assign(&mut self, x: u32, c: u32) -> bool {
        let mut queue = vec![(x, c)];
        let st = self.stride();
        let r = self.r as usize;
        while let Some((x, c)) = queue.pop() {
            if self.color[x as usize] != FREE {
                if self.color[x as usize] != c {
                    return false;
                }
                continue;
            }
            if self.domain[x as usize] >> c & 1 == 0 {
                return false;
            }
            self.toggle(x, c, true);
            self.color[x as usize] = c;
            self.used[c as usize] += 1;
            self.trail.push(Undo::Color(x));
            for k in 0..self.incident[x as usize].len() {
                let e = self.incident[x as usize][k] as usize;
                let base = e * st;
                let len = self.edges[e].len() as u32;
                let same = self.counts[base + c as usize];
                if same == len {
                    return false;
                }
                if same == len - 1 && self.counts[base + r] == 1 {
                    let u = *self.edges[e].iter().find(|&&u| self.color[u as usize] == FREE).unwrap();
                    let d = self.domain[u as usize];
                    if d >> c & 1 == 1 {
                        self.trail.push(Undo::Domain(u, d));
                        let nd = d & !(1 << c);
                        self.domain[u as usize] = nd;
                        if nd == 0 {
                            return false;
                        }
                        if nd.count_ones() == 1 {
                            queue.push((u, nd.trailing_zeros()));
                        }
                    }
                }
            }
        }
        true
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            match self.trail.pop().unwrap() {
                Undo::Color(x) => {
                    let c = self.color[x as usize];
                    self.toggle(x, c, false);
                    self.used[c as usize] -= 1;
                    self.color[x as usize] = FREE;
                }
                Undo::Domain(x, old) => self.domain[x as usize] = old,
            }
        }
    }

    /// Up to `k` free vertices with the largest weight of open edges.
    fn candidates(&self, k: usize) -> Vec<u32> {
        let mut free: Vec<u32> = self.order.iter().copied().filter(|&x| self.color[x as usize] == FREE).collect();
        if free.len() > k {
            free.select_nth_unstable_by_key(k - 1, |&x| std::cmp::Reverse(self.score[x as usize]));
            free.truncate(k);
        }
        free.sort_by_key(|&x| (std::cmp::Reverse(self.score[x as usize]), x));
        free
    }

    /// Tries each remaining color on the candidates; a color whose propagation
    /// fails is removed. Returns false on a conflict, otherwise the vertex
    /// whose trial assignments propagated furthest.
    fn probe(&mut self) -> std::result::Result<Option<u32>, ()> {
        loop {
            let cands = self.candidates(PROBES);
            if cands.is_empty() {
                return Ok(None);
            }
            let mut changed = false;
            let mut best: Option<(u64, u32)> = None;
            for x in cands {
                if self.color[x as usize] != FREE {
                    continue;
                }
                let mut product = 1u64;
                for c in 0..self.r {
                    if self.domain[x as usize] >> c & 1 == 0 {
                        continue;
                    }
                    let mark = self.trail.len();
                    let ok = self.assign(x, c);
                    let gain = (self.trail.len() - mark) as u64;
                    self.undo(mark);
                    if ok {
                        product = product.saturating_mul(gain.max(1));
                        continue;
                    }
                    changed = true;
                    let d = self.domain[x as usize];
                    self.trail.push(Undo::Domain(x, d));
                    let nd = d & !(1 << c);
                    self.domain[x as usize] = nd;
                    if nd == 0 {
                        return Err(());
                    }
                    if nd.count_ones() == 1 {
                        if !self.assign(x, nd.trailing_zeros()) {
                            return Err(());
                        }
                        break;
                    }
                }
                if self.color[x as usize] == FREE && best.is_none_or(|(b, _)| product > b) {
                    best = Some((product, x));
                }
            }
            if !changed {
                return Ok(best.map(|(_, x)| x));
            }
        }
    }

    /// `Some(true)` when a proper coloring extends the current state.
    fn search(&mut self) -> Option<bool> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return None;
        }
        let x = match self.probe() {
            Err(()) => return Some(false),
            Ok(None) => return Some(true),
            Ok(Some(x)) => x,
        };
        let mut cs: Vec<u32> = (0..self.r).filter(|&c| self.domain[x as usize] >> c & 1 == 1).collect();
        // Colors not used yet are interchangeable; keep one of them.
        let mut fresh = false;
        cs.retain(|&c| {
            if self.used[c as usize] > 0 {
                return true;
            }
            !std::mem::replace(&mut fresh, true)
        });
        cs.sort_by_key(|&c| self.used[c as usize]);
        for c in cs {
            let mark = self.trail.len();
            if self.assign(x, c) {
                match self.search() {
                    Some(true) => return Some(true),
                    None => return None,
                    Some(false) => {}
                }
            }
            self.undo(mark);
        }
        Some(false)
    }
}

/// Decides whether `h` is `r`-Ramsey (every `r`-coloring of its vertices has a
/// monochromatic edge), within the node budget.
pub fn find_proper_coloring(h: &OrderedHypergraph, r: u32, budget: SearchBudget) -> RamseyVerdict {
    assert!((1..=32).contains(&r), "1 to 32 colors are supported");
    let start = Instant::now();
    let n = h.vertex_count();
    let done = |verdict, certificate: Option<Vec<u32>>, nodes| RamseyVerdict {
        verdict,
        certificate,
        nodes,
        millis: start.elapsed().as_millis(),
    };
    if h.is_empty() {
        return done(Verdict::NotRamsey, Some(vec![0; n]), 0);
    }
    if r == 1 || h.uniformity() == 1 {
        return done(Verdict::Ramsey, None, 0);
    }
    let (core, peeled) = peel(h.edge_sets(), n);
    let mut colors = vec![0u32; n];
    let mut nodes = 0;
    for (vertices, edges) in components(&core, n) {
        let mut local = vec![u32::MAX; n];
        for (i, &x) in vertices.iter().enumerate() {
            local[x as usize] = i as u32;
        }
        let edges = edges
            .into_iter()
            .map(|e| core[e].iter().map(|&x| local[x as usize]).collect())
            .collect();
        let mut s = Solver::new(edges, vertices.len(), r, budget.nodes - nodes);
        let outcome = s.search();
        nodes += s.nodes.min(budget.nodes - nodes);
        match outcome {
            Some(true) => {
                for (i, &x) in vertices.iter().enumerate() {
                    colors[x as usize] = s.color[i];
                }
            }
            Some(false) => return done(Verdict::Ramsey, None, nodes),
            None => return done(Verdict::Unknown, None, nodes),
        }
    }
    // A peeled vertex lies in no later edge, so it can break its own edge.
    for (u, e) in peeled.iter().rev() {
        let others: Vec<u32> = e.iter().filter(|&x| x != u).map(|&x| colors[x as usize]).collect();
        colors[*u as usize] = if others.iter().all(|&c| c == others[0]) { (others[0] + 1) % r } else { 0 };
    }
    debug_assert_eq!(count_monochromatic_edges(h, &Coloring::new(r, colors.clone()).unwrap()), 0);
    done(Verdict::NotRamsey, Some(colors), nodes)
}

/// Repeatedly removes a vertex lying in exactly one edge, together with that
/// edge. Returns the remaining edges and the removals in order.
fn peel(edges: Vec<Vec<u32>>, n: usize) -> (Vec<Vec<u32>>, Vec<(u32, Vec<u32>)>) {
    let mut incident: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (i, e) in edges.iter().enumerate() {
        for &x in e {
            incident[x as usize].push(i as u32);
        }
    }
    let mut degree: Vec<usize> = incident.iter().map(Vec::len).collect();
    let mut alive = vec![true; edges.len()];
    let mut stack: Vec<u32> = (0..n as u32).filter(|&x| degree[x as usize] == 1).collect();
    let mut peeled = Vec::new();
    while let Some(u) = stack.pop() {
        if degree[u as usize] != 1 {
            continue;
        }
        let e = *incident[u as usize].iter().find(|&&e| alive[e as usize]).unwrap() as usize;
        alive[e] = false;
        for &x in &edges[e] {
            degree[x as usize] -= 1;
            if degree[x as usize] == 1 {
                stack.push(x);
            }
        }
        peeled.push((u, edges[e].clone()));
    }
    let core = edges.into_iter().zip(alive).filter(|(_, a)| *a).map(|(e, _)| e).collect();
    (core, peeled)
}

/// Connected components as (vertices, edge indices), smallest first.
fn components(edges: &[Vec<u32>], n: usize) -> Vec<(Vec<u32>, Vec<usize>)> {
    fn find(parent: &mut [u32], x: u32) -> u32 {
        let mut root = x;
        while parent[root as usize] != root {
            root = parent[root as usize];
        }
        let mut x = x;
        while parent[x as usize] != root {
            let next = parent[x as usize];
            parent[x as usize] = root;
            x = next;
        }
        root
    }
    let mut parent: Vec<u32> = (0..n as u32).collect();
    for e in edges {
        for &x in &e[1..] {
            let (a, b) = (find(&mut parent, e[0]), find(&mut parent, x));
            parent[a as usize] = b;
        }
    }
    let mut groups: std::collections::BTreeMap<u32, (Vec<u32>, Vec<usize>)> = Default::default();
    for (i, e) in edges.iter().enumerate() {
        groups.entry(find(&mut parent, e[0])).or_default().1.push(i);
    }
    let mut seen = vec![false; n];
    for e in edges {
        for &x in e {
            if !seen[x as usize] {
                seen[x as usize] = true;
                let root = find(&mut parent, x);
                groups.get_mut(&root).unwrap().0.push(x);
            }
        }
    }
    let mut out: Vec<_> = groups.into_values().collect();
    out.sort_by_key(|g| (g.1.len(), g.0[0]));
    out
}

/// Whether every `r`-coloring of `S` has a monochromatic `k`-distinct solution.
pub fn is_a_r_rado(a: &IntegerMatrix, s: &GroundSet, r: u32, budget: SearchBudget) -> Result<RamseyVerdict> {
    let h = from_solutions(a, s)?;
    Ok(find_proper_coloring(&h, r, budget))
}

/// Number of monochromatic solutions under `c`, optionally `k`-distinct only.
pub fn monochromatic_count(a: &IntegerMatrix, s: &GroundSet, c: &Coloring, distinct: bool) -> Result<BigUint> {
    let els = s.elements()?;
    if c.len() != els.len() {
        return Err(Error::Invalid(format!("coloring has {} entries for {} elements", c.len(), els.len())));
    }
    let mut total = BigUint::zero();
    for color in 0..c.r {
        let class: Vec<u32> = (0..els.len() as u32).filter(|&i| c.colors[i as usize] == color).collect();
        if !class.is_empty() {
            total += count_in(a, &els.subset(&class), distinct)?;
        }
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MinMode {
    Exhaustive,
    Sampled { samples: usize, seed: u64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct MinMonochromatic {
    #[serde(serialize_with = "crate::util::ser_display")]
    pub count: BigUint,
    /// True for an exact minimum, false for an upper bound from sampling.
    pub exact: bool,
    pub coloring: Vec<u32>,
}

/// Solutions grouped by vertex set, with multiplicities.
fn solution_sets(a: &IntegerMatrix, els: &Elements, distinct: bool) -> Result<Vec<(Vec<u32>, u64)>> {
    let mut map: std::collections::HashMap<Vec<u32>, u64> = std::collections::HashMap::new();
    for_each_solution(a, els, distinct, DEFAULT_NODE_LIMIT, |x| {
        let mut v = x.to_vec();
        v.sort_unstable();
        v.dedup();
        *map.entry(v).or_default() += 1;
    })?;
    let mut list: Vec<(Vec<u32>, u64)> = map.into_iter().collect();
    list.sort_unstable();
    Ok(list)
}

/// Minimum number of monochromatic solutions over `r`-colorings of `S`.
/// Exhaustive mode is a branch and bound over all colorings (error when
/// `r^{|S|}` exceeds the budget); sampled mode takes the best of random
/// colorings improved by single-vertex recoloring.
pub fn min_monochromatic(
    a: &IntegerMatrix,
    s: &GroundSet,
    r: u32,
    mode: MinMode,
    distinct: bool,
    budget: SearchBudget,
) -> Result<MinMonochromatic> {
    if r == 0 || r > 32 {
        return Err(Error::Invalid("1 to 32 colors are supported".into()));
    }
    let els = s.elements()?;
    let n = els.len();
    let sets = solution_sets(a, &els, distinct)?;
    if r == 1 {
        let total: u64 = sets.iter().map(|s| s.1).sum();
        return Ok(MinMonochromatic {
            count: BigUint::from(total),
            exact: true,
            coloring: vec![0; n],
        });
    }
    match mode {
        MinMode::Exhaustive => {
            let space = (n as f64) * (r as f64).log2();
            if space > (budget.nodes as f64).log2() {
                return Err(Error::BudgetExceeded(budget.nodes));
            }
            let (count, coloring) = branch_and_bound(n, r, &sets);
            Ok(MinMonochromatic {
                count: BigUint::from(count),
                exact: true,
                coloring,
            })
        }
        MinMode::Sampled { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
            for (i, (v, _)) in sets.iter().enumerate() {
                for &x in v {
                    incident[x as usize].push(i);
                }
            }
            let mono = |col: &[u32], i: usize| {
                let v = &sets[i].0;
                v.iter().all(|&x| col[x as usize] == col[v[0] as usize])
            };
            let mut best: Option<(u64, Vec<u32>)> = None;
            for _ in 0..samples.max(1) {
                let mut col: Vec<u32> = (0..n).map(|_| rng.random_range(0..r)).collect();
                let mut cur: u64 = (0..sets.len()).filter(|&i| mono(&col, i)).map(|i| sets[i].1).sum();
                loop {
                    let mut improved = false;
                    for x in 0..n {
                        let old = col[x];
                        let before: u64 = incident[x].iter().filter(|&&i| mono(&col, i)).map(|&i| sets[i].1).sum();
                        let mut best_c = (before, old);
                        for c in (0..r).filter(|&c| c != old) {
                            col[x] = c;
                            let after: u64 = incident[x].iter().filter(|&&i| mono(&col, i)).map(|&i| sets[i].1).sum();
                            if after < best_c.0 {
                                best_c = (after, c);
                            }
                        }
                        col[x] = best_c.1;
                        if best_c.1 != old {
                            cur = cur - before + best_c.0;
                            improved = true;
                        }
                    }
                    if !improved {
                        break;
                    }
                }
                if best.as_ref().is_none_or(|b| cur < b.0) {
                    best = Some((cur, col));
                }
            }
            let (count, coloring) = best.unwrap();
            Ok(MinMonochromatic {
                count: BigUint::from(count),
                exact: false,
                coloring,
            })
        }
    }
}

fn branch_and_bound(n: usize, r: u32, sets: &[(Vec<u32>, u64)]) -> (u64, Vec<u32>) {
    // Each solution set is scored when its largest vertex gets a color.
    let mut closing: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, (v, _)) in sets.iter().enumerate() {
        closing[*v.iter().max().unwrap() as usize].push(i);
    }
    struct Bb<'a> {
        r: u32,
        sets: &'a [(Vec<u32>, u64)],
        closing: Vec<Vec<usize>>,
        col: Vec<u32>,
        best: u64,
        best_col: Vec<u32>,
    }
    impl Bb<'_> {
        fn go(&mut self, x: usize, acc: u64, max_used: u32) {
            if acc >= self.best {
                return;
            }
            if x == self.col.len() {
                self.best = acc;
                self.best_col = self.col.clone();
                return;
            }
            // Colors are interchangeable: a new color is always the next unused one.
            for c in 0..self.r.min(max_used + 1) {
                self.col[x] = c;
                let add: u64 = self.closing[x]
                    .iter()
                    .filter(|&&i| self.sets[i].0.iter().all(|&y| self.col[y as usize] == c))
                    .map(|&i| self.sets[i].1)
                    .sum();
                self.go(x + 1, acc + add, max_used.max(c + 1));
            }
        }
    }
    let total: u64 = sets.iter().map(|s| s.1).sum();
    let mut bb = Bb {
        r,
        sets,
        closing,
        col: vec![0; n],
        best: total + 1,
        best_col: vec![0; n],
    };
    bb.go(0, 0, 0);
    (bb.best, bb.best_col)
}
