use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::Zero;

use super::OrderedHypergraph;
use crate::error::{Error, Result};
use crate::exact::big_rational;

/// A simple graph on vertices `0..v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimpleGraph {
    v: usize,
    edges: Vec<(usize, usize)>,
}

impl SimpleGraph {
    pub fn new(v: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut list = Vec::new();
        for (a, b) in edges {
            if a == b || a >= v || b >= v {
                return Err(Error::Invalid(format!("bad edge {a}-{b} on {v} vertices")));
            }
            let e = (a.min(b), a.max(b));
            if !list.contains(&e) {
                list.push(e);
            }
        }
        Ok(SimpleGraph { v, edges: list })
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        SimpleGraph { v: n, edges }
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Invalid("cycles need at least 3 vertices".into()));
        }
        SimpleGraph::new(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    pub fn path(n: usize) -> Result<Self> {
        SimpleGraph::new(n, (1..n).map(|i| (i - 1, i)))
    }

    /// Vertex-disjoint union.
    pub fn union(&self, other: &SimpleGraph) -> SimpleGraph {
        let shift = self.v;
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().map(|&(a, b)| (a + shift, b + shift)));
        SimpleGraph {
            v: self.v + other.v,
            edges,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.v
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    fn has_isolated(&self) -> bool {
        (0..self.v).any(|x| !self.edges.iter().any(|&(a, b)| a == x || b == x))
    }
}

impl fmt::Display for SimpleGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.edges.iter().map(|(a, b)| format!("{a}-{b}")).collect();
        write!(f, "{}:{}", self.v, parts.join(","))
    }
}

/// `K<n>`, `C<n>`, `P<n>` (path on `n` vertices), an edge list `0-1,1-2`
/// (optionally prefixed by `v:`), or a `+`-separated disjoint union of these.
impl FromStr for SimpleGraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split('+').map(str::trim);
        let first = parse_one(parts.next().unwrap_or(""))?;
        parts.try_fold(first, |g, p| Ok(g.union(&parse_one(p)?)))
    }
}

fn parse_one(s: &str) -> Result<SimpleGraph> {
    let bad = || Error::Parse(format!("bad graph `{s}`"));
    let num = |t: &str| t.parse::<usize>().map_err(|_| bad());
    if let Some(n) = s.strip_prefix('K') {
        return Ok(SimpleGraph::complete(num(n)?));
    }
    if let Some(n) = s.strip_prefix('C') {
        return SimpleGraph::cycle(num(n)?);
    }
    if let Some(n) = s.strip_prefix('P') {
        return SimpleGraph::path(num(n)?);
    }
    let (v, list) = match s.split_once(':') {
        Some((v, l)) => (Some(num(v.trim())?), l),
        None => (None, s),
    };
    let mut edges = Vec::new();
    for e in list.split(',').map(str::trim).filter(|e| !e.is_empty()) {
        let (a, b) = e.split_once('-').ok_or_else(bad)?;
        edges.push((num(a.trim())?, num(b.trim())?));
    }
    let v = v.unwrap_or_else(|| edges.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0));
    SimpleGraph::new(v, edges)
}

fn pair_index(n: usize, a: usize, b: usize) -> u32 {
    let (a, b) = (a.min(b), a.max(b));
    (a * n - a * (a + 1) / 2 + (b - a - 1)) as u32
}

/// Vertices are the edges of `K_n` (pairs in lexicographic order); each
/// injective map `V(F) -> [n]` gives the edge `(φ(e_1), ..., φ(e_m))`.
pub fn from_graph_copies(f: &SimpleGraph, n: usize) -> Result<OrderedHypergraph> {
    if f.edges.is_empty() {
        return Err(Error::Invalid("graph has no edges".into()));
    }
    if f.has_isolated() {
        return Err(Error::Invalid("graph has an isolated vertex".into()));
    }
    if n < f.v {
        return Err(Error::Invalid(format!("n = {n} is below v(F) = {}", f.v)));
    }
    let mut edges = Vec::new();
    let mut phi = vec![usize::MAX; f.v];
    let mut used = vec![false; n];
    fn rec(
        i: usize,
        f: &SimpleGraph,
        n: usize,
        phi: &mut [usize],
        used: &mut [bool],
        out: &mut Vec<Vec<u32>>,
    ) {
        if i == f.v {
            out.push(f.edges.iter().map(|&(a, b)| pair_index(n, phi[a], phi[b])).collect());
            return;
        }
        for x in 0..n {
            if !used[x] {
                used[x] = true;
                phi[i] = x;
                rec(i + 1, f, n, phi, used, out);
                used[x] = false;
            }
        }
    }
    rec(0, f, n, &mut phi, &mut used, &mut edges);
    let labels = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| format!("{}-{}", a + 1, b + 1)))
        .collect();
    OrderedHypergraph::new(f.edges.len(), n * (n - 1) / 2, edges)?.with_labels(labels)
}

/// `m_2(F)`: the maximum over subgraphs of `(e - 1)/(v - 2)`, with `1/2` for a
/// single edge and `0` for an edgeless graph.
pub fn m2_density(f: &SimpleGraph) -> BigRational {
    let v = f.v;
    assert!(v <= 24, "m2 density by subset enumeration needs at most 24 vertices");
    let mut best = BigRational::zero();
    if !f.edges.is_empty() {
        best = big_rational(1, 2);
    }
    // Induced subgraphs suffice: adding edges on a fixed vertex set only helps.
    for mask in 0u32..1 << v {
        let nv = mask.count_ones() as i64;
        if nv < 3 {
            continue;
        }
        let ne = f
            .edges
            .iter()
            .filter(|&&(a, b)| mask >> a & 1 == 1 && mask >> b & 1 == 1)
            .count() as i64;
        if ne == 0 {
            continue;
        }
        let d = big_rational(ne - 1, nv - 2);
        if d > best {
            best = d;
        }
    }
    best
}
