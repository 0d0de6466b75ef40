//! Counting solutions of `Ax = 0` in a ground set, projected solutions and
//! the threshold quantities built from them.

mod analysis;
pub mod engine;

pub use analysis::{
    compatibility_report, extendability, key_bounds_check, richness, threshold_table,
    CompatibilityEntry, CompatibilityReport, CompatibilityRow, Extendability, KeyBoundsReport,
    KeyBoundsViolation, Richness, ThresholdEntry, ThresholdTable, Trend,
};
pub use engine::DEFAULT_NODE_LIMIT;

use std::collections::HashSet;
use std::ops::ControlFlow;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ground::{Elements, GroundSet};
use crate::matrix::{image_size_in_group, IntegerMatrix};
use engine::Plan;

/// Default number of projected tuples returned by a listing.
pub const DEFAULT_LISTING_LIMIT: usize = 1_000_000;

fn complement(w: &[usize], k: usize) -> Vec<usize> {
    (0..k).filter(|j| !w.contains(j)).collect()
}

fn check_columns(cols: &[usize], k: usize) -> Result<Vec<usize>> {
    let mut v = cols.to_vec();
    v.sort_unstable();
    v.dedup();
    if v.len() != cols.len() || v.iter().any(|&j| j >= k) {
        return Err(Error::Invalid(format!("bad column set {cols:?} for {k} columns")));
    }
    Ok(v)
}

/// Calls `f` with the element index of every column, for every solution in `els`.
pub fn for_each_solution(
    a: &IntegerMatrix,
    els: &Elements,
    distinct: bool,
    node_limit: u64,
    mut f: impl FnMut(&[u32]),
) -> Result<()> {
    let k = a.cols();
    let order: Vec<usize> = (0..k).collect();
    let plan = Plan::new(a, els, &order, &vec![None; k], node_limit)?;
    let mut st = plan.state();
    let _ = plan.walk(0, k, distinct, &mut st, &mut |st| {
        f(&st.assign);
        ControlFlow::Continue(())
    });
    plan.check(&st)
}

/// Every solution as element indices per column.
pub fn list_solutions(a: &IntegerMatrix, els: &Elements, distinct: bool) -> Result<Vec<Vec<u32>>> {
    let mut out = Vec::new();
    for_each_solution(a, els, distinct, DEFAULT_NODE_LIMIT, |x| out.push(x.to_vec()))?;
    Ok(out)
}

/// Number of solutions in an element list, optionally requiring distinct coordinates.
pub fn count_in(a: &IntegerMatrix, els: &Elements, distinct: bool) -> Result<BigUint> {
    let k = a.cols();
    let order: Vec<usize> = (0..k).collect();
    let plan = Plan::new(a, els, &order, &vec![None; k], DEFAULT_NODE_LIMIT)?;
    let mut st = plan.state();
    let c = plan.count(0, distinct, &mut st);
    plan.check(&st)?;
    Ok(BigUint::from(c))
}

/// `|Sol_S^A([k])|`, by the closed form `|S|^k / |im A|` for whole groups.
pub fn count_solutions(a: &IntegerMatrix, s: &GroundSet) -> Result<BigUint> {
    sol_count(a, s, &(0..a.cols()).collect::<Vec<_>>())
}

/// `|Sol_S^A(Z)|`; closed form `|S|^{|Z|} |im A_{Z̄}| / |im A|` for whole groups.
pub fn sol_count(a: &IntegerMatrix, s: &GroundSet, z: &[usize]) -> Result<BigUint> {
    let z = check_columns(z, a.cols())?;
    if z.is_empty() {
        return Ok(BigUint::one());
    }
    if let (true, Some(g)) = (s.is_full_group(), s.ambient_group()) {
        let size = g.order();
        let num = size.pow(z.len() as u32) * image_size_in_group(&a.complement_columns(&z), &g);
        return Ok(num / image_size_in_group(a, &g));
    }
    let els = s.elements()?;
    projected_in(a, &els, &[], &[], &z, None).map(|(c, _)| c)
}

/// `|Sol(w0, W, Y)|` over an element list; `w0` holds element indices.
fn projected_in(
    a: &IntegerMatrix,
    els: &Elements,
    w: &[usize],
    w0: &[u32],
    y: &[usize],
    listing: Option<usize>,
) -> Result<(BigUint, Option<Vec<Vec<u32>>>)> {
    let k = a.cols();
    let mut order: Vec<usize> = w.to_vec();
    order.extend(y.iter().filter(|j| !w.contains(j)));
    order.extend(complement(y, k));
    let mut fixed = vec![None; k];
    for (&c, &x) in w.iter().zip(w0) {
        fixed[c] = Some(x);
    }
    let plan = Plan::new(a, els, &order, &fixed, DEFAULT_NODE_LIMIT)?;
    let mut st = plan.state();
    let mut list = listing.map(|_| Vec::new());
    let limit = listing.unwrap_or(0);
    let count: u128;
    if y.len() == k && list.is_none() {
        count = plan.count(0, false, &mut st);
    } else {
        let mut c = 0u128;
        let _ = plan.walk(0, y.len(), false, &mut st, &mut |st| {
            if y.len() == k || plan.exists(y.len(), st) {
                c += 1;
                if let Some(l) = list.as_mut() {
                    if l.len() < limit {
                        l.push(y.iter().map(|&j| st.assign[j]).collect());
                    }
                }
            }
            ControlFlow::Continue(())
        });
        count = c;
    }
    plan.check(&st)?;
    if let Some(l) = &list {
        if (l.len() as u128) < count {
            list = None;
        }
    }
    Ok((BigUint::from(count), list))
}

/// `W ⊆ Y ⊆ [k]` (0-based) and the fixed values on `W`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectedSolutionQuery {
    pub w: Vec<usize>,
    pub y: Vec<usize>,
    pub w0: Vec<Vec<i64>>,
}

impl ProjectedSolutionQuery {
    pub fn new(w: Vec<usize>, y: Vec<usize>, w0: Vec<Vec<i64>>) -> Self {
        ProjectedSolutionQuery { w, y, w0 }
    }

    /// `Sol(Y)`: nothing fixed.
    pub fn of(y: Vec<usize>) -> Self {
        ProjectedSolutionQuery {
            w: Vec::new(),
            y,
            w0: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProjectedSolutions {
    #[serde(serialize_with = "crate::util::ser_display")]
    pub count: BigUint,
    /// `Y`-tuples (in increasing column order) when the count is within the listing limit.
    pub listing: Option<Vec<Vec<Vec<i64>>>>,
}

pub fn projected_solutions(
    a: &IntegerMatrix,
    s: &GroundSet,
    q: &ProjectedSolutionQuery,
    listing_limit: usize,
) -> Result<ProjectedSolutions> {
    let k = a.cols();
    let y = check_columns(&q.y, k)?;
    if q.w.len() != q.w0.len() {
        return Err(Error::Invalid("w0 must have one element per column of W".into()));
    }
    let mut pairs: Vec<(usize, &Vec<i64>)> = q.w.iter().copied().zip(&q.w0).collect();
    pairs.sort_by_key(|p| p.0);
    let w: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    check_columns(&w, k)?;
    if w.iter().any(|j| !y.contains(j)) {
        return Err(Error::Invalid("W must be a subset of Y".into()));
    }
    let els = s.elements()?;
    let mut w0 = Vec::with_capacity(w.len());
    for (_, x) in &pairs {
        let reduced: Vec<i64> = x
            .iter()
            .enumerate()
            .map(|(d, &v)| els.reduce(d, v as i128))
            .collect();
        match els.position(&reduced) {
            Some(i) => w0.push(i),
            None => {
                return Err(Error::Invalid(format!(
                    "{} is not an element of {s}",
                    crate::ground::format_element(x)
                )))
            }
        }
    }
    let (count, list) = projected_in(a, &els, &w, &w0, &y, Some(listing_limit))?;
    let listing = list.map(|l| {
        l.into_iter()
            .map(|t| t.into_iter().map(|i| els.get(i as usize).to_vec()).collect())
            .collect()
    });
    Ok(ProjectedSolutions { count, listing })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KDistinctStats {
    #[serde(serialize_with = "crate::util::ser_display")]
    pub distinct: BigUint,
    #[serde(serialize_with = "crate::util::ser_display")]
    pub total: BigUint,
    /// `distinct / total`, `1` when there are no solutions.
    #[serde(serialize_with = "crate::util::ser_rational")]
    pub ratio: BigRational,
}

/// `|k-Sol(Y)|`, `|Sol(Y)|` and their ratio.
pub fn k_distinct_stats(a: &IntegerMatrix, s: &GroundSet, y: &[usize]) -> Result<KDistinctStats> {
    let k = a.cols();
    let y = check_columns(y, k)?;
    if y.is_empty() {
        return Err(Error::Invalid("Y must be nonempty".into()));
    }
    let els = s.elements()?;
    let (distinct, total) = if y.len() == k {
        (count_in(a, &els, true)?, count_in(a, &els, false)?)
    } else {
        let mut seen: HashSet<Vec<u32>> = HashSet::new();
        for_each_solution(a, &els, true, DEFAULT_NODE_LIMIT, |x| {
            seen.insert(y.iter().map(|&j| x[j]).collect());
        })?;
        let total = projected_in(a, &els, &[], &[], &y, None)?.0;
        (BigUint::from(seen.len()), total)
    };
    let ratio = if total.is_zero() {
        BigRational::one()
    } else {
        BigRational::new(BigInt::from(distinct.clone()), BigInt::from(total.clone()))
    };
    Ok(KDistinctStats { distinct, total, ratio })
}

/// Whether some solution has pairwise distinct coordinates.
pub fn is_irredundant(a: &IntegerMatrix, s: &GroundSet) -> Result<bool> {
    Ok(irredundancy_witness(a, s)?.is_some())
}

/// A solution with pairwise distinct coordinates, if one exists.
pub fn irredundancy_witness(a: &IntegerMatrix, s: &GroundSet) -> Result<Option<Vec<Vec<i64>>>> {
    let els = s.elements()?;
    let k = a.cols();
    let order: Vec<usize> = (0..k).collect();
    let plan = Plan::new(a, &els, &order, &vec![None; k], DEFAULT_NODE_LIMIT)?;
    let mut st = plan.state();
    let mut found = None;
    let _ = plan.walk(0, k, true, &mut st, &mut |st| {
        found = Some(st.assign.iter().map(|&i| els.get(i as usize).to_vec()).collect());
        ControlFlow::Break(())
    });
    if found.is_none() {
        plan.check(&st)?;
    }
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::big_rational;
    use crate::group::FiniteAbelianGroup;
    use crate::matrix::rank_group;
    use proptest::prelude::*;

    fn m(row: &[i64]) -> IntegerMatrix {
        IntegerMatrix::row(row).unwrap()
    }

    fn g(spec: &str) -> GroundSet {
        spec.parse().unwrap()
    }

    /// Brute force over `S^k`.
    fn brute(a: &IntegerMatrix, s: &GroundSet) -> Vec<Vec<u32>> {
        let els = s.elements().unwrap();
        let k = a.cols();
        let rows = a.to_i64_rows().unwrap();
        let n = els.len() as u32;
        let mut out = Vec::new();
        let mut x = vec![0u32; k];
        loop {
            let ok = rows.iter().all(|row| {
                (0..els.dim()).all(|d| {
                    let v: i128 = (0..k)
                        .map(|j| row[j] as i128 * els.get(x[j] as usize)[d] as i128)
                        .sum();
                    els.reduce(d, v) == 0
                })
            });
            if ok {
                out.push(x.clone());
            }
            let mut i = k;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                x[i] += 1;
                if x[i] < n {
                    break;
                }
                x[i] = 0;
            }
        }
    }

    #[test]
    fn count_examples() {
        assert_eq!(count_solutions(&m(&[2, 2, -2]), &g("cyclic:4")).unwrap(), BigUint::from(32u32));
        for n in [3u64, 7, 10] {
            let s = GroundSet::cyclic(n).unwrap();
            assert_eq!(count_solutions(&m(&[1, 1, -1]), &s).unwrap(), BigUint::from(n * n));
        }
        assert_eq!(count_solutions(&m(&[1, 1, -1]), &g("interval:4")).unwrap(), BigUint::from(6u32));
    }

    #[test]
    fn projected_examples() {
        let b = m(&[4, -4, 63, 65]);
        let r = projected_solutions(&b, &g("cyclic:128"), &ProjectedSolutionQuery::of(vec![2, 3]), 10)
            .unwrap();
        assert_eq!(r.count, BigUint::from(4096u32));
        assert!(r.listing.is_none());

        let ap = IntegerMatrix::ap_matrix(3).unwrap();
        let q = ProjectedSolutionQuery::new(vec![0], vec![0, 1, 2], vec![vec![1]]);
        let r = projected_solutions(&ap, &g("cyclic:5"), &q, 100).unwrap();
        assert_eq!(r.count, BigUint::from(5u32));
        for t in r.listing.unwrap() {
            assert_eq!(t[0], vec![1]);
            assert_eq!(t[2][0], (2 * t[1][0] - 1).rem_euclid(5));
        }

        let r = projected_solutions(&m(&[1, 1, -1]), &g("interval:4"), &ProjectedSolutionQuery::of(vec![0, 1]), 100)
            .unwrap();
        assert_eq!(r.count, BigUint::from(6u32));

        let bad = ProjectedSolutionQuery::new(vec![0], vec![1], vec![vec![1]]);
        assert!(projected_solutions(&ap, &g("cyclic:5"), &bad, 10).is_err());
    }

    #[test]
    fn k_distinct_examples() {
        let st = k_distinct_stats(&m(&[1, 1, -1]), &g("interval:4"), &[0, 1, 2]).unwrap();
        assert_eq!((st.distinct, st.total), (BigUint::from(4u32), BigUint::from(6u32)));
        assert_eq!(st.ratio, big_rational(2, 3));
        let st = k_distinct_stats(&m(&[1, -2, 1]), &g("cyclic:5"), &[0, 1, 2]).unwrap();
        assert_eq!(st.ratio, big_rational(4, 5));
        let st = k_distinct_stats(&m(&[1, 1, 1]), &g("interval:5"), &[0, 1, 2]).unwrap();
        assert_eq!(st.total, BigUint::zero());
        assert_eq!(st.ratio, BigRational::one());
        let st = k_distinct_stats(&m(&[1, 1, -1]), &g("interval:6"), &[0, 2]).unwrap();
        assert!(st.distinct <= st.total);
    }

    #[test]
    fn irredundancy_examples() {
        let w = irredundancy_witness(&m(&[1, 1, -1]), &g("interval:5")).unwrap().unwrap();
        assert_eq!(w, vec![vec![1], vec![2], vec![3]]);
        assert!(is_irredundant(&m(&[2, 2, 1, 1]), &g("cyclic:6")).unwrap());
        assert!(!is_irredundant(&m(&[1, -1]), &g("interval:10")).unwrap());
        // The (2,4,1,5) witness from the 6-columns discussion.
        let r = projected_solutions(
            &m(&[2, 2, 1, 1]),
            &g("cyclic:6"),
            &ProjectedSolutionQuery::new(vec![0, 1, 2, 3], vec![0, 1, 2, 3], vec![vec![2], vec![4], vec![1], vec![5]]),
            10,
        )
        .unwrap();
        assert_eq!(r.count, BigUint::one());
    }

    #[test]
    fn lattice_and_group_power_counts_match_brute_force() {
        let a = IntegerMatrix::from_rows(&[[1, 1, -1]]).unwrap();
        for s in ["lattice:3:2", "power:Z2xZ3:1", "power:Z4:2", "cyclic:6-0"] {
            let s = g(s);
            let els = s.elements().unwrap();
            assert_eq!(count_in(&a, &els, false).unwrap(), BigUint::from(brute(&a, &s).len()));
        }
    }

    proptest! {
        #[test]
        fn closed_form_matches_enumeration(
            rows in prop::collection::vec(prop::collection::vec(-5i64..6, 3), 1..3),
            moduli in prop::collection::vec(1u64..7, 1..3)
        ) {
            let a = IntegerMatrix::from_rows(&rows).unwrap();
            let grp = FiniteAbelianGroup::new(moduli.clone()).unwrap();
            let s = GroundSet::explicit(
                moduli.clone(),
                grp.enumerate_elements(1000).unwrap().map(|e| e.residues.iter().map(|&r| r as i64).collect()).collect(),
            ).unwrap();
            let full = GroundSet::group(&grp);
            let enumerated = count_in(&a, &s.elements().unwrap(), false).unwrap();
            prop_assert_eq!(&enumerated, &count_solutions(&a, &full).unwrap());
            let r = rank_group(&a, &grp);
            prop_assert_eq!(enumerated * r.image_size, grp.order().pow(3));
            for z in [vec![0], vec![0, 2], vec![1, 2]] {
                let e = projected_in(&a, &s.elements().unwrap(), &[], &[], &z, None).unwrap().0;
                prop_assert_eq!(e, sol_count(&a, &full, &z).unwrap());
            }
        }

        #[test]
        fn projected_counts_sum_to_total(
            row in prop::collection::vec(-4i64..5, 3), n in 3u64..9, wmask in 1usize..7
        ) {
            let a = IntegerMatrix::row(&row).unwrap();
            let s = GroundSet::interval(n).unwrap();
            let els = s.elements().unwrap();
            let w: Vec<usize> = (0..3).filter(|j| wmask >> j & 1 == 1).collect();
            let total = count_in(&a, &els, false).unwrap();
            let all = brute(&a, &s);
            prop_assert_eq!(&total, &BigUint::from(all.len()));
            let proj: HashSet<Vec<u32>> = all.iter().map(|x| w.iter().map(|&j| x[j]).collect()).collect();
            let mut sum = BigUint::zero();
            for y0 in &proj {
                sum += projected_in(&a, &els, &w, y0, &[0, 1, 2], None).unwrap().0;
            }
            prop_assert_eq!(sum, total);
            prop_assert_eq!(
                projected_in(&a, &els, &[], &[], &w, None).unwrap().0,
                BigUint::from(proj.len())
            );
        }
    }
}
