use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use super::rank::{solve_mod, solve_rational};
use super::IntegerMatrix;
use crate::exact::rational_string;

/// Coefficient ring of the columns condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Ring {
    Rational,
    /// `Z_s` with `s >= 2`.
    Modular(u64),
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ring::Rational => write!(f, "Q"),
            Ring::Modular(s) => write!(f, "Z{s}"),
        }
    }
}

/// A column partition `C_0, ..., C_m` with `s_0 = 0` and, for each `i >= 1`,
/// coefficients writing `s_i` over the columns of `C_0 ∪ ... ∪ C_{i-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ColumnsConditionCertificate {
    pub ring: Ring,
    /// Column indices, 0-based.
    pub parts: Vec<Vec<usize>>,
    /// `combinations[i-1]` lists `(column, coefficient)` for `s_i`.
    #[serde(serialize_with = "ser_combos")]
    pub combinations: Vec<Vec<(usize, BigRational)>>,
}

fn ser_combos<S: serde::Serializer>(
    c: &[Vec<(usize, BigRational)>],
    s: S,
) -> Result<S::Ok, S::Error> {
    let v: Vec<Vec<(usize, String)>> = c
        .iter()
        .map(|row| row.iter().map(|(j, x)| (*j, rational_string(x))).collect())
        .collect();
    v.serialize(s)
}

fn block_sum(a: &IntegerMatrix, cols: &[usize]) -> Vec<BigInt> {
    (0..a.rows())
        .map(|i| cols.iter().map(|&j| a.get(i, j)).sum())
        .collect()
}

fn is_zero_in(v: &[BigInt], ring: Ring) -> bool {
    match ring {
        Ring::Rational => v.iter().all(Zero::is_zero),
        Ring::Modular(s) => {
            let sb = BigInt::from(s);
            v.iter().all(|x| x.mod_floor(&sb).is_zero())
        }
    }
}

impl ColumnsConditionCertificate {
    /// Recomputes every block sum and checks each identity exactly.
    pub fn verify(&self, a: &IntegerMatrix) -> bool {
        let mut seen = vec![false; a.cols()];
        for part in &self.parts {
            if part.is_empty() {
                return false;
            }
            for &j in part {
                if j >= a.cols() || seen[j] {
                    return false;
                }
                seen[j] = true;
            }
        }
        if seen.iter().any(|&b| !b) || self.combinations.len() + 1 != self.parts.len() {
            return false;
        }
        if !is_zero_in(&block_sum(a, &self.parts[0]), self.ring) {
            return false;
        }
        let mut earlier: Vec<usize> = self.parts[0].clone();
        for (part, combo) in self.parts[1..].iter().zip(&self.combinations) {
            if combo.iter().any(|(j, _)| !earlier.contains(j)) {
                return false;
            }
            if let Ring::Modular(_) = self.ring {
                if combo.iter().any(|(_, c)| !c.is_integer()) {
                    return false;
                }
            }
            let s = block_sum(a, part);
            let diff: Vec<BigRational> = (0..a.rows())
                .map(|i| {
                    let lin: BigRational = combo
                        .iter()
                        .map(|(j, c)| c * BigRational::from(a.get(i, *j).clone()))
                        .sum();
                    BigRational::from(s[i].clone()) - lin
                })
                .collect();
            let ok = match self.ring {
                Ring::Rational => diff.iter().all(Zero::is_zero),
                Ring::Modular(_) => {
                    let ints: Vec<BigInt> = diff.iter().map(|d| d.to_integer()).collect();
                    is_zero_in(&ints, self.ring)
                }
            };
            if !ok {
                return false;
            }
            earlier.extend(part);
        }
        true
    }
}

fn mask_columns(mask: u64, k: usize) -> Vec<usize> {
    (0..k).filter(|j| mask >> j & 1 == 1).collect()
}

/// Nonempty subsets of `pool`, largest first, ties in increasing mask order.
fn subsets_largest_first(pool: u64) -> Vec<u64> {
    let mut subs = Vec::new();
    let mut sub = pool;
    while sub != 0 {
        subs.push(sub);
        sub = (sub - 1) & pool;
    }
    subs.sort_by_key(|&m| (std::cmp::Reverse(m.count_ones()), m));
    subs
}

fn express(a: &IntegerMatrix, basis: &[usize], target: &[BigInt], ring: Ring) -> Option<Vec<BigRational>> {
    let sub = a.select_columns(basis);
    match ring {
        Ring::Rational => solve_rational(&sub, target),
        Ring::Modular(s) => {
            solve_mod(&sub, target, s).map(|x| x.into_iter().map(BigRational::from).collect())
        }
    }
}

/// Searches for a columns-condition certificate over `ring`.
///
/// `C_0` is the first zero-sum subset in (size, mask) order. Each later block
/// is the largest remaining subset whose sum lies in the span of the columns
/// already used. If any certificate exists, every such partial chain can be
/// extended (the first block of a certificate not yet used, minus the used
/// columns, always qualifies), so a dead end proves that none exists.
pub fn columns_condition(a: &IntegerMatrix, ring: Ring) -> Option<ColumnsConditionCertificate> {
    let k = a.cols();
    assert!(k < 64, "columns condition search supports fewer than 64 columns");
    let all = (1u64 << k) - 1;
    let mut candidates: Vec<u64> = (1..=all).collect();
    candidates.sort_by_key(|&m| (m.count_ones(), m));
    let c0 = candidates
        .into_iter()
        .find(|&m| is_zero_in(&block_sum(a, &mask_columns(m, k)), ring))?;

    let mut parts = vec![mask_columns(c0, k)];
    let mut combinations = Vec::new();
    let mut used = c0;
    while used != all {
        let basis = mask_columns(used, k);
        let mut step = None;
        for t in subsets_largest_first(all & !used) {
            let cols = mask_columns(t, k);
            if let Some(coeffs) = express(a, &basis, &block_sum(a, &cols), ring) {
                step = Some((t, cols, coeffs));
                break;
            }
        }
        let (t, cols, coeffs) = step?;
        combinations.push(
            basis
                .iter()
                .copied()
                .zip(coeffs)
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        );
        parts.push(cols);
        used |= t;
    }
    let cert = ColumnsConditionCertificate { ring, parts, combinations };
    debug_assert!(cert.verify(a));
    Some(cert)
}

/// Rado's criterion: partition regular iff the columns condition holds over the rationals.
pub fn is_partition_regular(a: &IntegerMatrix) -> bool {
    columns_condition(a, Ring::Rational).is_some()
}
