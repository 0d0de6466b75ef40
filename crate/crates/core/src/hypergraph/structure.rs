//! Searches for the edge configurations used in the 0-statement argument.
//! Edges are treated as vertex sets here.

use std::fmt;
use std::ops::ControlFlow;
use std::str::FromStr;

use serde::Serialize;

use super::OrderedHypergraph;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StructureKind {
    SimplePath,
    SimpleCycle,
    FairlySimpleCycle,
    SpoiledPath,
    Handle,
    FaultySimplePath,
    BadTriple,
    BadTightPath,
    Pasch,
}

impl StructureKind {
    pub const ALL: [StructureKind; 9] = [
        StructureKind::SimplePath,
        StructureKind::SimpleCycle,
        StructureKind::FairlySimpleCycle,
        StructureKind::SpoiledPath,
        StructureKind::Handle,
        StructureKind::FaultySimplePath,
        StructureKind::BadTriple,
        StructureKind::BadTightPath,
        StructureKind::Pasch,
    ];

    fn name(self) -> &'static str {
        match self {
            StructureKind::SimplePath => "simple-path",
            StructureKind::SimpleCycle => "simple-cycle",
            StructureKind::FairlySimpleCycle => "fairly-simple-cycle",
            StructureKind::SpoiledPath => "spoiled-path",
            StructureKind::Handle => "handle",
            StructureKind::FaultySimplePath => "faulty-simple-path",
            StructureKind::BadTriple => "bad-triple",
            StructureKind::BadTightPath => "bad-tight-path",
            StructureKind::Pasch => "pasch",
        }
    }
}

impl fmt::Display for StructureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StructureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StructureKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown structure kind `{s}`")))
    }
}

/// Edges in role order:
/// - paths: `e_1..e_t`
/// - cycles: `e_1..e_t, e_0`
/// - spoiled paths: `e_1..e_t, e*`
/// - handles: the cycle, then `e*`
/// - faulty paths: `e_1..e_t, e_x, e_z`
/// - bad triples: `e_1, e_x, e_y`; bad tight paths `e_1, e_2, e_3`; Pasch `e_1..e_4`
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StructureWitness {
    pub kind: StructureKind,
    /// Path or cycle length `t` where it applies.
    pub length: Option<usize>,
    pub edges: Vec<Vec<u32>>,
    /// Union of all pairwise intersections.
    pub shared: Vec<u32>,
}

fn inter(a: &[u32], b: &[u32]) -> usize {
    a.iter().filter(|x| b.contains(x)).count()
}

fn common(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().copied().filter(|x| b.contains(x)).collect()
}

fn distinct_sets(edges: &[Vec<u32>]) -> bool {
    (0..edges.len()).all(|i| (0..i).all(|j| edges[i] != edges[j]))
}

/// `e_1..e_t` with consecutive edges meeting in one vertex and the rest disjoint.
fn is_simple_path(p: &[Vec<u32>]) -> bool {
    (0..p.len()).all(|i| {
        (i + 1..p.len()).all(|j| {
            let s = inter(&p[i], &p[j]);
            if j == i + 1 {
                s == 1
            } else {
                s == 0
            }
        })
    })
}

/// Returns `s = |e_0 ∩ e_t|` when `path + e_0` is a fairly simple cycle.
fn fairly_simple_cycle(path: &[Vec<u32>], e0: &[u32]) -> Option<usize> {
    let t = path.len();
    if t < 2 || !is_simple_path(path) || path.iter().any(|e| e == e0) {
        return None;
    }
    if inter(e0, &path[0]) != 1 || path[1..t - 1].iter().any(|e| inter(e0, e) != 0) {
        return None;
    }
    let s = inter(e0, &path[t - 1]);
    (s >= 1).then_some(s)
}

fn vertex_union(edges: &[Vec<u32>]) -> Vec<u32> {
    let mut v: Vec<u32> = edges.iter().flatten().copied().collect();
    v.sort_unstable();
    v.dedup();
    v
}

fn is_handle(e: &[u32], vertices: &[u32]) -> bool {
    let c = inter(e, vertices);
    e.len() > c && c >= 2
}

fn is_spoiler(path: &[Vec<u32>], e: &[u32]) -> bool {
    let vp = vertex_union(path);
    if path.iter().any(|f| f == e) || !e.iter().all(|x| vp.contains(x)) {
        return false;
    }
    let c = common(e, &path[0]);
    c.len() == 1 && path.get(1).is_none_or(|e2| !e2.contains(&c[0]))
}

/// `e_1, e_2, e_x` pairwise meeting in one vertex, `e_x` missing `e_3..`.
fn is_faulty_end(path: &[Vec<u32>], ex: &[u32]) -> bool {
    !path.iter().any(|e| e == ex)
        && inter(ex, &path[0]) == 1
        && inter(ex, &path[1]) == 1
        && path[2..].iter().all(|e| inter(ex, e) == 0)
}

impl StructureWitness {
    fn new(kind: StructureKind, length: Option<usize>, edges: Vec<Vec<u32>>) -> Self {
        let mut shared = Vec::new();
        for i in 0..edges.len() {
            for j in i + 1..edges.len() {
                shared.extend(common(&edges[i], &edges[j]));
            }
        }
        shared.sort_unstable();
        shared.dedup();
        StructureWitness {
            kind,
            length,
            edges,
            shared,
        }
    }

    /// Re-checks the intersection pattern of the stored edges.
    pub fn verify(&self) -> bool {
        let e = &self.edges;
        if e.is_empty() || !distinct_sets(e) {
            return false;
        }
        let size3 = |es: &[Vec<u32>]| es.iter().all(|x| x.len() == 3);
        match (self.kind, self.length) {
            (StructureKind::SimplePath, Some(t)) => e.len() == t && is_simple_path(e),
            (StructureKind::SimpleCycle, Some(t)) => {
                e.len() == t + 1 && fairly_simple_cycle(&e[..t], &e[t]) == Some(1)
            }
            (StructureKind::FairlySimpleCycle, Some(t)) => {
                e.len() == t + 1 && fairly_simple_cycle(&e[..t], &e[t]).is_some()
            }
            (StructureKind::SpoiledPath, Some(t)) => {
                e.len() == t + 1 && is_simple_path(&e[..t]) && is_spoiler(&e[..t], &e[t])
            }
            (StructureKind::Handle, Some(t)) => {
                e.len() == t + 2
                    && fairly_simple_cycle(&e[..t], &e[t]).is_some()
                    && is_handle(&e[t + 1], &vertex_union(&e[..=t]))
            }
            (StructureKind::FaultySimplePath, Some(t)) => {
                if t < 3 || e.len() != t + 2 || !size3(e) || !is_simple_path(&e[..t]) {
                    return false;
                }
                let rev: Vec<Vec<u32>> = e[..t].iter().rev().cloned().collect();
                is_faulty_end(&e[..t], &e[t]) && is_faulty_end(&rev, &e[t + 1])
            }
            (StructureKind::BadTriple, None) => {
                if e.len() != 3 {
                    return false;
                }
                let (x, y) = (common(&e[0], &e[1]), common(&e[0], &e[2]));
                x.len() == 1 && y.len() == 1 && x != y && inter(&e[1], &e[2]) >= 2
            }
            (StructureKind::BadTightPath, None) => {
                e.len() == 3
                    && size3(e)
                    && inter(&e[0], &e[1]) == 2
                    && inter(&e[0], &e[2]) == 1
                    && inter(&e[1], &e[2]) == 2
            }
            (StructureKind::Pasch, None) => {
                if e.len() != 4 || !size3(e) {
                    return false;
                }
                let mut v = Vec::new();
                for i in 0..4 {
                    for j in i + 1..4 {
                        let c = common(&e[i], &e[j]);
                        if c.len() != 1 {
                            return false;
                        }
                        v.push(c[0]);
                    }
                }
                v.sort_unstable();
                v.dedup();
                v.len() == 6
            }
            _ => false,
        }
    }

    /// `verify` plus membership of every edge in `h`.
    pub fn verify_in(&self, h: &OrderedHypergraph) -> bool {
        let sets = h.edge_sets();
        self.verify()
            && self.edges.iter().all(|e| {
                let mut s = e.clone();
                s.sort_unstable();
                sets.binary_search(&s).is_ok()
            })
    }
}

struct Search {
    sets: Vec<Vec<u32>>,
    /// Edges meeting each edge, with the intersection size.
    nbr: Vec<Vec<(usize, usize)>>,
    cover: Vec<u32>,
}

impl Search {
    fn new(h: &OrderedHypergraph) -> Self {
        let sets = h.edge_sets();
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); h.vertex_count()];
        for (i, e) in sets.iter().enumerate() {
            for &x in e {
                incident[x as usize].push(i);
            }
        }
        let nbr = sets
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let mut n: Vec<usize> = e.iter().flat_map(|&x| incident[x as usize].iter().copied()).collect();
                n.sort_unstable();
                n.dedup();
                n.into_iter()
                    .filter(|&j| j != i)
                    .map(|j| (j, inter(e, &sets[j])))
                    .collect()
            })
            .collect();
        Search {
            sets,
            nbr,
            cover: vec![0; h.vertex_count()],
        }
    }

    fn edges(&self, idx: &[usize]) -> Vec<Vec<u32>> {
        idx.iter().map(|&i| self.sets[i].clone()).collect()
    }

    fn add(&mut self, e: usize, d: i32) {
        for &x in &self.sets[e] {
            self.cover[x as usize] = (self.cover[x as usize] as i32 + d) as u32;
        }
    }

    /// Visits every simple path of length `1..=max` (both directions).
    fn paths(&mut self, max: usize, f: &mut dyn FnMut(&Search, &[usize]) -> ControlFlow<()>) -> ControlFlow<()> {
        let mut path = Vec::with_capacity(max);
        for start in 0..self.sets.len() {
            path.push(start);
            self.add(start, 1);
            let r = self.extend(&mut path, max, f);
            self.add(start, -1);
            path.pop();
            r?;
        }
        ControlFlow::Continue(())
    }

    fn extend(
        &mut self,
        path: &mut Vec<usize>,
        max: usize,
        f: &mut dyn FnMut(&Search, &[usize]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        f(self, path)?;
        if path.len() == max {
            return ControlFlow::Continue(());
        }
        let last = *path.last().unwrap();
        let cands: Vec<usize> = self.nbr[last].iter().filter(|n| n.1 == 1).map(|n| n.0).collect();
        for g in cands {
            let touched: Vec<u32> = self.sets[g].iter().map(|&x| self.cover[x as usize]).collect();
            // The only covered vertex of g is its vertex in `last`, covered once.
            if touched.iter().filter(|&&c| c > 0).count() != 1 || touched.iter().any(|&c| c > 1) {
                continue;
            }
            path.push(g);
            self.add(g, 1);
            let r = self.extend(path, max, f);
            self.add(g, -1);
            path.pop();
            r?;
        }
        ControlFlow::Continue(())
    }

    fn cycle_closers(&self, path: &[usize], simple: bool) -> Vec<usize> {
        let p = self.edges(path);
        self.nbr[path[0]]
            .iter()
            .filter(|n| n.1 == 1)
            .map(|n| n.0)
            .filter(|&g| match fairly_simple_cycle(&p, &self.sets[g]) {
                Some(s) => !simple || s == 1,
                None => false,
            })
            .collect()
    }
}

/// Exhaustive search for a structure of the given kind. Path and cycle kinds
/// look at lengths up to `max_length`; `SimplePath` asks for length exactly
/// `max_length`, which any longer simple path contains.
pub fn detect_structure(h: &OrderedHypergraph, kind: StructureKind, max_length: usize) -> Option<StructureWitness> {
    let mut s = Search::new(h);
    let mut found: Option<StructureWitness> = None;
    let mut hit = |w: StructureWitness| {
        debug_assert!(w.verify(), "{w:?}");
        found = Some(w);
        ControlFlow::Break(())
    };
    match kind {
        StructureKind::SimplePath => {
            if max_length == 0 {
                return None;
            }
            let _ = s.paths(max_length, &mut |s, p| {
                if p.len() == max_length {
                    hit(StructureWitness::new(kind, Some(p.len()), s.edges(p)))
                } else {
                    ControlFlow::Continue(())
                }
            });
        }
        StructureKind::SimpleCycle | StructureKind::FairlySimpleCycle => {
            let simple = kind == StructureKind::SimpleCycle;
            let _ = s.paths(max_length, &mut |s, p| {
                if p.len() < 2 {
                    return ControlFlow::Continue(());
                }
                match s.cycle_closers(p, simple).first() {
                    Some(&g) => {
                        let mut e = s.edges(p);
                        e.push(s.sets[g].clone());
                        hit(StructureWitness::new(kind, Some(p.len()), e))
                    }
                    None => ControlFlow::Continue(()),
                }
            });
        }
        StructureKind::Handle => {
            let _ = s.paths(max_length, &mut |s, p| {
                if p.len() < 2 {
                    return ControlFlow::Continue(());
                }
                for g in s.cycle_closers(p, false) {
                    let mut e = s.edges(p);
                    e.push(s.sets[g].clone());
                    let vc = vertex_union(&e);
                    if let Some(hd) = s.sets.iter().find(|x| is_handle(x, &vc)) {
                        e.push(hd.clone());
                        return hit(StructureWitness::new(kind, Some(p.len()), e));
                    }
                }
                ControlFlow::Continue(())
            });
        }
        StructureKind::SpoiledPath => {
            let _ = s.paths(max_length, &mut |s, p| {
                let e = s.edges(p);
                for &(g, _) in s.nbr[p[0]].iter().filter(|n| n.1 == 1) {
                    if is_spoiler(&e, &s.sets[g]) {
                        let mut w = e.clone();
                        w.push(s.sets[g].clone());
                        return hit(StructureWitness::new(kind, Some(p.len()), w));
                    }
                }
                ControlFlow::Continue(())
            });
        }
        StructureKind::FaultySimplePath => {
            let _ = s.paths(max_length, &mut |s, p| {
                if p.len() < 3 {
                    return ControlFlow::Continue(());
                }
                let e = s.edges(p);
                if e.iter().any(|x| x.len() != 3) {
                    return ControlFlow::Continue(());
                }
                let rev: Vec<Vec<u32>> = e.iter().rev().cloned().collect();
                let ends = |first: usize, path: &[Vec<u32>]| {
                    s.nbr[first]
                        .iter()
                        .filter(|n| n.1 == 1)
                        .map(|n| n.0)
                        .find(|&g| s.sets[g].len() == 3 && is_faulty_end(path, &s.sets[g]))
                };
                if let (Some(x), Some(z)) = (ends(p[0], &e), ends(p[p.len() - 1], &rev)) {
                    let mut w = e.clone();
                    w.push(s.sets[x].clone());
                    w.push(s.sets[z].clone());
                    return hit(StructureWitness::new(kind, Some(p.len()), w));
                }
                ControlFlow::Continue(())
            });
        }
        StructureKind::BadTriple => {
            'outer: for e1 in 0..s.sets.len() {
                let ones: Vec<usize> = s.nbr[e1].iter().filter(|n| n.1 == 1).map(|n| n.0).collect();
                for (i, &x) in ones.iter().enumerate() {
                    for &y in &ones[i + 1..] {
                        if common(&s.sets[e1], &s.sets[x]) != common(&s.sets[e1], &s.sets[y])
                            && inter(&s.sets[x], &s.sets[y]) >= 2
                        {
                            let _ = hit(StructureWitness::new(kind, None, s.edges(&[e1, x, y])));
                            break 'outer;
                        }
                    }
                }
            }
        }
        StructureKind::BadTightPath => {
            'outer: for e2 in (0..s.sets.len()).filter(|&i| s.sets[i].len() == 3) {
                let twos: Vec<usize> = s.nbr[e2]
                    .iter()
                    .filter(|n| n.1 == 2 && s.sets[n.0].len() == 3)
                    .map(|n| n.0)
                    .collect();
                for &a in &twos {
                    for &b in &twos {
                        if a != b && inter(&s.sets[a], &s.sets[b]) == 1 {
                            let _ = hit(StructureWitness::new(kind, None, s.edges(&[a, e2, b])));
                            break 'outer;
                        }
                    }
                }
            }
        }
        StructureKind::Pasch => {
            'outer: for e1 in (0..s.sets.len()).filter(|&i| s.sets[i].len() == 3) {
                let ones: Vec<usize> = s.nbr[e1]
                    .iter()
                    .filter(|n| n.1 == 1 && s.sets[n.0].len() == 3 && n.0 > e1)
                    .map(|n| n.0)
                    .collect();
                for (i, &a) in ones.iter().enumerate() {
                    for (j, &b) in ones.iter().enumerate().skip(i + 1) {
                        for &c in &ones[j + 1..] {
                            let w = StructureWitness::new(kind, None, s.edges(&[e1, a, b, c]));
                            if w.verify() {
                                let _ = hit(w);
                                break 'outer;
                            }
                        }
                    }
                }
            }
        }
    }
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::{find_proper_coloring, SearchBudget, Verdict};
    use crate::hypergraph::rado_minimal_reduce;
    use crate::hypergraph::tests::{check_rado_minimal, fano, pasch, schur4};
    use proptest::prelude::*;

    fn h3(v: usize, e: &[[u32; 3]]) -> OrderedHypergraph {
        OrderedHypergraph::new(3, v, e.iter().map(|x| x.to_vec())).unwrap()
    }

    /// Brute force over ordered tuples of distinct edge sets.
    fn brute(h: &OrderedHypergraph, kind: StructureKind) -> bool {
        let sets = h.edge_sets();
        let n = sets.len();
        let size = if kind == StructureKind::Pasch { 4 } else { 3 };
        let mut idx = vec![0usize; size];
        loop {
            let distinct = (0..size).all(|i| (0..i).all(|j| idx[i] != idx[j]));
            if distinct {
                let w = StructureWitness::new(kind, None, idx.iter().map(|&i| sets[i].clone()).collect());
                if w.verify() {
                    return true;
                }
            }
            let mut i = 0;
            loop {
                if i == size {
                    return false;
                }
                idx[i] += 1;
                if idx[i] < n {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn pasch_found() {
        let w = detect_structure(&pasch(), StructureKind::Pasch, 0).unwrap();
        assert!(w.verify_in(&pasch()));
        assert_eq!(w.shared.len(), 6);
    }

    #[test]
    fn bad_triple_found() {
        // e1 = {0,1,2}, ex ∩ e1 = {0}, ey ∩ e1 = {1}, ex ∩ ey = {3,4}.
        let h = h3(6, &[[0, 1, 2], [0, 3, 4], [1, 3, 4]]);
        let w = detect_structure(&h, StructureKind::BadTriple, 0).unwrap();
        assert!(w.verify_in(&h));
        assert!(detect_structure(&pasch(), StructureKind::BadTriple, 0).is_none());
    }

    #[test]
    fn bad_tight_path_found() {
        let h = h3(5, &[[0, 1, 2], [1, 2, 3], [2, 3, 4]]);
        assert!(detect_structure(&h, StructureKind::BadTightPath, 0).unwrap().verify_in(&h));
    }

    #[test]
    fn schur_paths_match_pair_scan() {
        let h = schur4();
        let sets = h.edge_sets();
        let pair = (0..sets.len()).any(|i| (0..sets.len()).any(|j| i != j && inter(&sets[i], &sets[j]) == 1));
        assert_eq!(detect_structure(&h, StructureKind::SimplePath, 2).is_some(), pair);
        // {1,2,3} and {1,3,4} share two vertices.
        assert!(!pair);
    }

    #[test]
    fn paths_and_cycles() {
        let h = h3(9, &[[0, 1, 2], [2, 3, 4], [4, 5, 6], [6, 7, 0]]);
        let w = detect_structure(&h, StructureKind::SimplePath, 3).unwrap();
        assert!(w.verify_in(&h) && w.edges.len() == 3);
        assert!(detect_structure(&h, StructureKind::SimplePath, 4).is_none());
        let c = detect_structure(&h, StructureKind::SimpleCycle, 3).unwrap();
        assert!(c.verify_in(&h) && c.length == Some(3));
        assert!(detect_structure(&h, StructureKind::SimpleCycle, 2).is_none());
        assert!(detect_structure(&h, StructureKind::Handle, 3).is_none());
        let mut e: Vec<[u32; 3]> = vec![[0, 1, 2], [2, 3, 4], [4, 5, 6], [6, 7, 0], [1, 5, 8]];
        let hh = h3(9, &e);
        let w = detect_structure(&hh, StructureKind::Handle, 3).unwrap();
        assert!(w.verify_in(&hh));
        e.pop();
        e.push([1, 3, 5]);
        let hs = h3(9, &e);
        assert!(detect_structure(&hs, StructureKind::SpoiledPath, 4).unwrap().verify_in(&hs));
    }

    #[test]
    fn faulty_path() {
        // Path {0,1,2},{2,3,4},{4,5,6}; e_x meets e_1 and e_2, e_z meets e_2 and e_3.
        let h = h3(11, &[[0, 1, 2], [2, 3, 4], [4, 5, 6], [1, 3, 7], [3, 5, 8]]);
        let w = detect_structure(&h, StructureKind::FaultySimplePath, 3).unwrap();
        assert!(w.verify_in(&h));
    }

    #[test]
    fn tampered_witness_fails() {
        let mut w = detect_structure(&pasch(), StructureKind::Pasch, 0).unwrap();
        w.edges[3] = vec![2, 4, 1];
        assert!(!w.verify());
        w.kind = StructureKind::BadTriple;
        assert!(!w.verify());
    }

    #[test]
    fn kind_names_round_trip() {
        for k in StructureKind::ALL {
            assert_eq!(k.to_string().parse::<StructureKind>().unwrap(), k);
        }
    }

    fn six_structures(h: &OrderedHypergraph) -> bool {
        let l = h.edge_count().max(1);
        [
            StructureKind::SimplePath,
            StructureKind::SpoiledPath,
            StructureKind::Handle,
            StructureKind::FaultySimplePath,
            StructureKind::BadTriple,
            StructureKind::BadTightPath,
        ]
        .iter()
        .any(|&k| detect_structure(h, k, l).is_some_and(|w| w.verify_in(h)))
    }

    #[test]
    fn fano_core_has_a_structure() {
        let core = rado_minimal_reduce(&fano(), SearchBudget::default()).unwrap();
        check_rado_minimal(&core);
        assert!(six_structures(&core));
    }

    fn random_3graph() -> impl Strategy<Value = OrderedHypergraph> {
        prop::collection::vec(prop::sample::subsequence((0u32..8).collect::<Vec<_>>(), 3), 1..=12)
            .prop_map(|es| OrderedHypergraph::new(3, 8, es).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn small_detectors_agree_with_brute_force(h in random_3graph()) {
            for kind in [StructureKind::BadTriple, StructureKind::BadTightPath, StructureKind::Pasch] {
                let found = detect_structure(&h, kind, 0);
                prop_assert_eq!(found.is_some(), brute(&h, kind), "{:?}", kind);
                if let Some(w) = found {
                    prop_assert!(w.verify_in(&h));
                }
            }
        }

        #[test]
        fn structure_free_is_colorable(h in random_3graph()) {
            let budget = SearchBudget::default();
            let core = rado_minimal_reduce(&h, budget).unwrap();
            if !core.is_empty() {
                prop_assert!(six_structures(&core));
            }
            if !six_structures(&h) {
                prop_assert_eq!(find_proper_coloring(&h, 2, budget).verdict, Verdict::NotRamsey);
            }
        }

        #[test]
        fn witnesses_verify(h in random_3graph(), len in 1usize..5) {
            for kind in StructureKind::ALL {
                if let Some(w) = detect_structure(&h, kind, len) {
                    prop_assert!(w.verify_in(&h), "{:?}", w);
                }
            }
        }
    }
}
