use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::One;
use serde::{Serialize, Serializer};

use super::rank::{rank_group, rank_mod_p, rank_rational};
use super::IntegerMatrix;
use crate::error::{Error, Result};
use crate::exact::{rational_pow, rational_string, ExactLogValue, LogRatio};
use crate::group::FiniteAbelianGroup;

/// Which notion of rank the m-parameter is taken with respect to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RankProvider {
    Rational,
    /// The prime field `Z_p`; also covers powers of any field of characteristic `p`.
    ModP(u64),
    Group(FiniteAbelianGroup),
}

impl RankProvider {
    /// Rank as a logarithm. Field ranks `r` are stored as `base^r` with base
    /// `2` for the rationals and `p` for `Z_p`, so every rank from one
    /// provider shares a base.
    pub fn rank(&self, a: &IntegerMatrix) -> Result<ExactLogValue> {
        match self {
            RankProvider::Rational => {
                let r = if a.cols() == 0 { 0 } else { rank_rational(a) };
                Ok(ExactLogValue::integer(r as u32, BigUint::from(2u32)))
            }
            RankProvider::ModP(p) => {
                let r = if a.cols() == 0 { 0 } else { rank_mod_p(a, *p)? };
                Ok(ExactLogValue::integer(r as u32, BigUint::from(*p)))
            }
            RankProvider::Group(g) => Ok(rank_group(a, g)),
        }
    }

    /// The common base of this provider's ranks.
    pub fn base(&self) -> BigUint {
        match self {
            RankProvider::Rational => BigUint::from(2u32),
            RankProvider::ModP(p) => BigUint::from(*p),
            RankProvider::Group(g) => g.order(),
        }
    }
}

impl fmt::Display for RankProvider {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RankProvider::Rational => write!(f, "Q"),
            RankProvider::ModP(p) => write!(f, "F{p}"),
            RankProvider::Group(g) => write!(f, "{g}"),
        }
    }
}

/// `rank(A_{W̄})` for every `W ⊆ [k]`, indexed by the bitmask of `W`.
#[derive(Clone, Debug)]
pub struct RankProfile {
    pub k: usize,
    pub full: ExactLogValue,
    pub complement: Vec<ExactLogValue>,
}

impl RankProfile {
    pub fn of(&self, w: &[usize]) -> &ExactLogValue {
        &self.complement[mask_of(w)]
    }
}

fn mask_of(w: &[usize]) -> usize {
    w.iter().fold(0usize, |m, &j| m | 1 << j)
}

fn columns_of(mask: usize, k: usize) -> Vec<usize> {
    (0..k).filter(|j| mask >> j & 1 == 1).collect()
}

pub fn rank_profile(a: &IntegerMatrix, provider: &RankProvider) -> Result<RankProfile> {
    let k = a.cols();
    if k > 20 {
        return Err(Error::Invalid(format!("rank profile over {k} columns is too large")));
    }
    let complement = (0..1usize << k)
        .map(|m| {
            let rest: Vec<usize> = (0..k).filter(|j| m >> j & 1 == 0).collect();
            provider.rank(&a.select_columns(&rest))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RankProfile {
        k,
        full: complement[0].clone(),
        complement,
    })
}

/// One candidate `(w-1)/((w-1) + rank(A_{W̄}) - rank(A))`.
///
/// With `b` the rank base and `rho = |im A_{W̄}| / |im A|` the candidate equals
/// `log_q(b^{w-1})` where `q = b^{w-1} * rho`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MCandidate {
    /// 0-based column indices.
    pub w: Vec<usize>,
    pub rho: BigRational,
    pub value: LogRatio,
}

impl MCandidate {
    /// Exact comparison of two candidates: `rho_2^{w_1-1}` against `rho_1^{w_2-1}`.
    pub fn cmp_exact(&self, other: &Self) -> Ordering {
        let w1 = self.w.len() as i64 - 1;
        let w2 = other.w.len() as i64 - 1;
        rational_pow(&other.rho, w1).cmp(&rational_pow(&self.rho, w2))
    }
}

#[derive(Clone, Debug)]
pub struct MParameter {
    pub provider: String,
    pub value: LogRatio,
    /// Every maximizing `W`, 0-based, sorted.
    pub witnesses: Vec<Vec<usize>>,
    pub strictly_balanced: bool,
    pub candidates: Vec<MCandidate>,
}

impl MParameter {
    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        self.value.as_rational()
    }
}

impl Serialize for MParameter {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("MParameter", 5)?;
        st.serialize_field("provider", &self.provider)?;
        st.serialize_field("exact", &self.value.to_string())?;
        st.serialize_field("value", &self.to_f64())?;
        st.serialize_field("witnesses", &self.witnesses)?;
        st.serialize_field("strictly_balanced", &self.strictly_balanced)?;
        st.end()
    }
}

fn to_rational(x: &BigUint) -> BigRational {
    BigRational::from(BigInt::from(x.clone()))
}

/// Exact maximum over `W ⊆ [k]`, `|W| >= 2`, with all maximizers.
pub fn m_parameter(a: &IntegerMatrix, provider: &RankProvider) -> Result<MParameter> {
    let k = a.cols();
    if k < 2 {
        return Err(Error::Invalid("m-parameter needs at least two columns".into()));
    }
    let profile = rank_profile(a, provider)?;
    let trivial = profile.full.is_trivial_base();
    let b = if trivial {
        BigRational::from(BigInt::from(2))
    } else {
        to_rational(&profile.full.base)
    };
    let full = to_rational(&profile.full.image_size);

    let mut candidates = Vec::new();
    for mask in 0..1usize << k {
        let w = columns_of(mask, k);
        if w.len() < 2 {
            continue;
        }
        let rho = if trivial {
            BigRational::one()
        } else {
            to_rational(&profile.complement[mask].image_size) / &full
        };
        let num = rational_pow(&b, w.len() as i64 - 1);
        let q = &num * &rho;
        if q <= BigRational::one() {
            return Err(Error::UndefinedParameter {
                witness: w.iter().map(|j| j + 1).collect(),
                denominator: format!("log_{b}({})", rational_string(&q)),
            });
        }
        candidates.push(MCandidate {
            w,
            rho,
            value: LogRatio::new(num, q),
        });
    }

    let best = candidates
        .iter()
        .max_by(|x, y| x.cmp_exact(y))
        .expect("k >= 2 gives at least one candidate")
        .clone();
    let mut witnesses: Vec<Vec<usize>> = candidates
        .iter()
        .filter(|c| c.cmp_exact(&best) == Ordering::Equal)
        .map(|c| c.w.clone())
        .collect();
    witnesses.sort();
    let strictly_balanced = witnesses.len() == 1 && witnesses[0].len() == k;
    Ok(MParameter {
        provider: provider.to_string(),
        value: best.value,
        witnesses,
        strictly_balanced,
        candidates,
    })
}

/// Whether deleting any two columns leaves the rank unchanged.
pub fn is_abundant(a: &IntegerMatrix, provider: &RankProvider) -> Result<bool> {
    let full = provider.rank(a)?;
    let k = a.cols();
    for i in 0..k {
        for j in i + 1..k {
            let r = provider.rank(&a.complement_columns(&[i, j]))?;
            if r.cmp_same_base(&full) != Ordering::Equal {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::big_rational;
    use proptest::prelude::*;

    fn group(s: &str) -> RankProvider {
        RankProvider::Group(s.parse().unwrap())
    }

    #[test]
    fn schur_over_rationals() {
        let a = IntegerMatrix::row(&[1, 1, -1]).unwrap();
        let m = m_parameter(&a, &RankProvider::Rational).unwrap();
        assert_eq!(m.as_rational(), Some(big_rational(2, 1)));
        assert!(m.strictly_balanced);
        assert_eq!(m.witnesses, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn example_over_z4() {
        let a = IntegerMatrix::row(&[2, 2, -2]).unwrap();
        let m = m_parameter(&a, &group("Z4")).unwrap();
        assert_eq!(m.as_rational(), Some(big_rational(4, 3)));
        assert!(m.strictly_balanced);
    }

    #[test]
    fn example_over_z6_is_log2_6() {
        let a = IntegerMatrix::row(&[1, 3, 3]).unwrap();
        let m = m_parameter(&a, &group("Z6")).unwrap();
        assert!(m.value.equals_log(6, 2));
        assert_eq!(m.as_rational(), None);
        assert_eq!(m.witnesses, vec![vec![0, 1], vec![0, 2]]);
        assert!(!m.strictly_balanced);
        let m2 = m_parameter(&a, &group("Z2")).unwrap();
        assert_eq!(m2.as_rational(), Some(big_rational(2, 1)));
    }

    #[test]
    fn two_row_example_over_z6() {
        let a = IntegerMatrix::from_rows(&[[1, 1, 1, 0, 0], [0, 1, 1, 1, 1]]).unwrap();
        let m = m_parameter(&a, &group("Z6")).unwrap();
        assert_eq!(m.as_rational(), Some(big_rational(2, 1)));
    }

    #[test]
    fn field_provider() {
        let a = IntegerMatrix::row(&[3, 3, -3]).unwrap();
        // Over Z_3 the matrix vanishes and every candidate equals 1.
        let m3 = m_parameter(&a, &RankProvider::ModP(3)).unwrap();
        assert_eq!(m3.as_rational(), Some(big_rational(1, 1)));
        assert!(!m3.strictly_balanced);
        let m = m_parameter(&a, &RankProvider::ModP(5)).unwrap();
        assert_eq!(m.as_rational(), Some(big_rational(2, 1)));
    }

    #[test]
    fn undefined_parameter_reports_witness() {
        let a = IntegerMatrix::row(&[1, -1]).unwrap();
        match m_parameter(&a, &RankProvider::Rational) {
            Err(Error::UndefinedParameter { witness, .. }) => assert_eq!(witness, vec![1, 2]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn abundance_examples() {
        assert!(!is_abundant(&IntegerMatrix::row(&[2, 2, 1, 1]).unwrap(), &group("Z6")).unwrap());
        assert!(!is_abundant(&IntegerMatrix::row(&[2, -2, 63, 65]).unwrap(), &group("Z128")).unwrap());
        assert!(is_abundant(&IntegerMatrix::row(&[1, 1, -1, 1, 1]).unwrap(), &group("Z5")).unwrap());
        // With three columns removing two leaves one unit column: still surjective.
        assert!(is_abundant(&IntegerMatrix::row(&[1, 1, -1]).unwrap(), &group("Z5")).unwrap());
    }

    proptest! {
        #[test]
        fn invariant_under_permutations(
            seed in prop::collection::vec(1i64..7, 8),
            perm_seed in any::<u64>()
        ) {
            let a = IntegerMatrix::from_rows(&[&seed[0..4], &seed[4..8]]).unwrap();
            let provider = group("Z6");
            let Ok(m) = m_parameter(&a, &provider) else { return Ok(()); };
            let mut perm: Vec<usize> = (0..4).collect();
            let mut s = perm_seed;
            for i in (1..4).rev() {
                perm.swap(i, (s % (i as u64 + 1)) as usize);
                s /= 7;
            }
            let pa = a.permute_columns(&perm).permute_rows(&[1, 0]);
            let pm = m_parameter(&pa, &provider).unwrap();
            prop_assert_eq!(pm.value.to_string(), m.value.to_string());
            let mut mapped: Vec<Vec<usize>> = pm
                .witnesses
                .iter()
                .map(|w| {
                    let mut v: Vec<usize> = w.iter().map(|&j| perm[j]).collect();
                    v.sort();
                    v
                })
                .collect();
            mapped.sort();
            prop_assert_eq!(mapped, m.witnesses);
        }

        #[test]
        fn exact_order_agrees_with_floats(
            seed in prop::collection::vec(-6i64..7, 4), modulus in 2u64..40
        ) {
            let a = IntegerMatrix::row(&seed).unwrap();
            let Ok(m) = m_parameter(&a, &group(&format!("Z{modulus}"))) else { return Ok(()); };
            for x in &m.candidates {
                for y in &m.candidates {
                    let (fx, fy) = (x.value.to_f64(), y.value.to_f64());
                    if (fx - fy).abs() > 1e-9 {
                        prop_assert_eq!(x.cmp_exact(y), fx.partial_cmp(&fy).unwrap());
                    }
                }
            }
        }

        #[test]
        fn deleting_a_column_drops_rank_by_at_most_one(
            seed in prop::collection::vec(-9i64..10, 8), modulus in 2u64..50, del in 0usize..4
        ) {
            let a = IntegerMatrix::from_rows(&[&seed[0..4], &seed[4..8]]).unwrap();
            let g: FiniteAbelianGroup = format!("Z{modulus}").parse().unwrap();
            let full = rank_group(&a, &g);
            let less = rank_group(&a.complement_columns(&[del]), &g);
            prop_assert!(less.image_size <= full.image_size);
            prop_assert!(&less.image_size * g.order() >= full.image_size);
        }
    }
}
