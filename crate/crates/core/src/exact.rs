//! Exact values that are logarithms or rational powers of rationals.
//!
//! Group ranks such as `6/7` and thresholds such as `|S|^{5/21}` are kept in
//! these forms so that every comparison is decided with big-integer
//! arithmetic. Floats are only produced for display.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

/// Natural logarithm of a big unsigned integer, accurate for arbitrarily large values.
pub fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn ln_rational(x: &BigRational) -> f64 {
    let num = x.numer().magnitude();
    let den = x.denom().magnitude();
    ln_biguint(num) - ln_biguint(den)
}

/// Largest `e` with `x = r^e` for a natural number `r`; returns `(r, e)`.
/// `0` and `1` are returned with exponent 1.
pub fn perfect_power(x: &BigUint) -> (BigUint, u64) {
    if x <= &BigUint::one() {
        return (x.clone(), 1);
    }
    let bits = x.bits();
    for e in (2..=bits).rev() {
        let r = x.nth_root(e as u32);
        if r > BigUint::one() && r.pow(e as u32) == *x {
            return (r, e);
        }
    }
    (x.clone(), 1)
}

/// Writes a positive rational as `root^e` with the largest possible `e`.
fn rational_perfect_power(x: &BigRational) -> (BigRational, u64) {
    let num = x.numer().magnitude().clone();
    let den = x.denom().magnitude().clone();
    let (rn, en) = perfect_power(&num);
    let (rd, ed) = perfect_power(&den);
    let e = if den.is_one() {
        en
    } else if num.is_one() {
        ed
    } else {
        en.gcd(&ed)
    };
    let n = rn.pow((en / e) as u32);
    let d = rd.pow((ed / e) as u32);
    (
        BigRational::new(BigInt::from(n), BigInt::from(d)),
        e,
    )
}

pub fn rational_pow(x: &BigRational, e: i64) -> BigRational {
    if e >= 0 {
        Ratio::new(x.numer().pow(e as u32), x.denom().pow(e as u32))
    } else {
        let inv = x.recip();
        Ratio::new(inv.numer().pow((-e) as u32), inv.denom().pow((-e) as u32))
    }
}

/// `log_base(image_size)`; the rank of a matrix over a finite abelian group
/// (image size of `x -> Ax`) or, with `image_size = base^r`, an integer rank.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactLogValue {
    pub image_size: BigUint,
    /// `base <= 1` marks the trivial group, whose rank is 0 by convention.
    pub base: BigUint,
}

impl ExactLogValue {
    pub fn new(image_size: BigUint, base: BigUint) -> Self {
        ExactLogValue { image_size, base }
    }

    /// An integer rank `r` expressed with respect to `base`.
    pub fn integer(rank: u32, base: BigUint) -> Self {
        let image_size = if base <= BigUint::one() {
            BigUint::one()
        } else {
            base.pow(rank)
        };
        ExactLogValue { image_size, base }
    }

    pub fn is_trivial_base(&self) -> bool {
        self.base <= BigUint::one()
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_trivial_base() {
            return 0.0;
        }
        ln_biguint(&self.image_size) / ln_biguint(&self.base)
    }

    /// The value as a rational when `image_size` and `base` are powers of a common root.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.is_trivial_base() || self.image_size.is_one() {
            return Some(BigRational::zero());
        }
        LogRatio::new(
            BigRational::from(BigInt::from(self.image_size.clone())),
            BigRational::from(BigInt::from(self.base.clone())),
        )
        .as_rational()
    }

    /// Exact comparison; only meaningful for values with the same base.
    pub fn cmp_same_base(&self, other: &Self) -> Ordering {
        debug_assert_eq!(self.base, other.base);
        self.image_size.cmp(&other.image_size)
    }
}

impl fmt::Display for ExactLogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_rational() {
            Some(r) => write!(f, "{r}"),
            None => write!(f, "log_{}({})", self.base, self.image_size),
        }
    }
}

impl Serialize for ExactLogValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("ExactLogValue", 4)?;
        st.serialize_field("exact", &self.to_string())?;
        st.serialize_field("image_size", &self.image_size.to_string())?;
        st.serialize_field("base", &self.base.to_string())?;
        st.serialize_field("value", &self.to_f64())?;
        st.end()
    }
}

/// `log_base(arg)` for positive rationals with `base != 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogRatio {
    pub arg: BigRational,
    pub base: BigRational,
}

impl LogRatio {
    pub fn new(arg: BigRational, base: BigRational) -> Self {
        assert!(arg.is_positive() && base.is_positive() && !base.is_one());
        LogRatio { arg, base }
    }

    pub fn to_f64(&self) -> f64 {
        ln_rational(&self.arg) / ln_rational(&self.base)
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        if self.arg.is_one() {
            return Some(BigRational::zero());
        }
        let (ga, ea) = rational_perfect_power(&self.arg);
        let (gb, eb) = rational_perfect_power(&self.base);
        let ratio = BigRational::new(BigInt::from(ea), BigInt::from(eb));
        if ga == gb {
            Some(ratio)
        } else if ga == gb.recip() {
            Some(-ratio)
        } else {
            None
        }
    }

    /// Canonical `(arg, base)` with both reduced to their minimal roots and
    /// the common exponent ratio pulled out: `log_base(arg) = coeff * log_b(a)`.
    pub fn canonical(&self) -> (BigRational, BigRational, BigRational) {
        let (ga, ea) = rational_perfect_power(&self.arg);
        let (gb, eb) = rational_perfect_power(&self.base);
        (
            BigRational::new(BigInt::from(ea), BigInt::from(eb)),
            ga,
            gb,
        )
    }

    /// True when this equals `log_base(arg)` exactly, decided on canonical forms.
    pub fn equals_log(&self, arg: u64, base: u64) -> bool {
        let other = LogRatio::new(
            BigRational::from(BigInt::from(arg)),
            BigRational::from(BigInt::from(base)),
        );
        match (self.as_rational(), other.as_rational()) {
            (Some(a), Some(b)) => a == b,
            (None, None) => self.canonical() == other.canonical(),
            _ => false,
        }
    }
}

impl fmt::Display for LogRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_rational() {
            Some(r) => write!(f, "{r}"),
            None => {
                let (c, a, b) = self.canonical();
                if c.is_one() {
                    write!(f, "log_{b}({a})")
                } else {
                    write!(f, "{c}*log_{b}({a})")
                }
            }
        }
    }
}

/// A finite product `prod base_i^(exp_i)` with positive rational bases and
/// rational exponents.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PowerProduct {
    factors: Vec<(BigRational, Ratio<i64>)>,
}

impl PowerProduct {
    pub fn one() -> Self {
        PowerProduct::default()
    }

    pub fn rational(x: BigRational) -> Self {
        PowerProduct::power(x, Ratio::from_integer(1))
    }

    pub fn power(base: BigRational, exp: Ratio<i64>) -> Self {
        assert!(base.is_positive(), "power products need positive bases");
        let mut p = PowerProduct::default();
        p.push(base, exp);
        p
    }

    fn push(&mut self, base: BigRational, exp: Ratio<i64>) {
        if exp.is_zero() || base.is_one() {
            return;
        }
        if let Some(slot) = self.factors.iter_mut().find(|(b, _)| *b == base) {
            slot.1 += exp;
        } else {
            self.factors.push((base, exp));
        }
        self.factors.retain(|(_, e)| !e.is_zero());
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (b, e) in &other.factors {
            out.push(b.clone(), *e);
        }
        out
    }

    pub fn pow(&self, exp: Ratio<i64>) -> Self {
        let mut out = PowerProduct::default();
        for (b, e) in &self.factors {
            out.push(b.clone(), e * exp);
        }
        out
    }

    pub fn recip(&self) -> Self {
        self.pow(Ratio::from_integer(-1))
    }

    pub fn div(&self, other: &Self) -> Self {
        self.mul(&other.recip())
    }

    pub fn ln(&self) -> f64 {
        self.factors
            .iter()
            .map(|(b, e)| ln_rational(b) * (*e.numer() as f64 / *e.denom() as f64))
            .sum()
    }

    pub fn to_f64(&self) -> f64 {
        if self.exponent_lcm() == 1 {
            return rational_f64(&self.raised_to_common(1));
        }
        self.ln().exp()
    }

    /// `self^D` as an exact rational, where `D` clears every exponent denominator.
    fn raised_to_common(&self, d: i64) -> BigRational {
        let mut acc = BigRational::one();
        for (b, e) in &self.factors {
            let k = (e * d).to_integer();
            acc *= rational_pow(b, k);
        }
        acc
    }

    fn exponent_lcm(&self) -> i64 {
        self.factors.iter().fold(1i64, |acc, (_, e)| acc.lcm(e.denom()))
    }

    /// Exact value when every exponent is an integer after merging.
    pub fn as_rational(&self) -> Option<BigRational> {
        let d = self.exponent_lcm();
        if d == 1 {
            return Some(self.raised_to_common(1));
        }
        // Still rational if the D-th power is a perfect D-th power.
        let v = self.raised_to_common(d);
        let num = v.numer().magnitude();
        let den = v.denom().magnitude();
        let rn = num.nth_root(d as u32);
        let rd = den.nth_root(d as u32);
        if rn.pow(d as u32) == *num && rd.pow(d as u32) == *den {
            Some(BigRational::new(
                BigInt::from_biguint(Sign::Plus, rn),
                BigInt::from_biguint(Sign::Plus, rd),
            ))
        } else {
            None
        }
    }

    pub fn is_one(&self) -> bool {
        self.cmp_exact(&PowerProduct::one()) == Ordering::Equal
    }

    /// Exact comparison by raising both sides to a common integer power.
    pub fn cmp_exact(&self, other: &Self) -> Ordering {
        let q = self.div(other);
        let d = q.exponent_lcm();
        let v = q.raised_to_common(d);
        v.cmp(&BigRational::one())
    }
}

impl fmt::Display for PowerProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(r) = self.as_rational() {
            return write!(f, "{r}");
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|(b, e)| {
                if e.is_integer() {
                    format!("({b})^{e}")
                } else {
                    format!("({b})^({e})")
                }
            })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

impl Serialize for PowerProduct {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("PowerProduct", 2)?;
        st.serialize_field("exact", &self.to_string())?;
        st.serialize_field("value", &self.to_f64())?;
        st.end()
    }
}

/// `num/den` rendering used in CSV and JSON output.
pub fn rational_string(x: &BigRational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn rational_f64(x: &BigRational) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    if let Some(v) = x.to_f64().filter(|v| v.is_finite() && *v != 0.0) {
        return v;
    }
    let sign = if x.is_negative() { -1.0 } else { 1.0 };
    sign * ln_rational(&x.abs()).exp()
}

pub fn big_rational(num: impl Into<BigInt>, den: impl Into<BigInt>) -> BigRational {
    BigRational::new(num.into(), den.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        big_rational(n, d)
    }

    #[test]
    fn log_values() {
        let half = ExactLogValue::new(BigUint::from(2u32), BigUint::from(4u32));
        assert_eq!(half.as_rational(), Some(q(1, 2)));
        let six_sevenths = ExactLogValue::new(BigUint::from(64u32), BigUint::from(128u32));
        assert_eq!(six_sevenths.as_rational(), Some(q(6, 7)));
        assert_eq!(six_sevenths.to_string(), "6/7");
        let irr = ExactLogValue::new(BigUint::from(2u32), BigUint::from(6u32));
        assert_eq!(irr.as_rational(), None);
        assert!((irr.to_f64() - 2f64.ln() / 6f64.ln()).abs() < 1e-12);
        let trivial = ExactLogValue::new(BigUint::one(), BigUint::one());
        assert_eq!(trivial.as_rational(), Some(q(0, 1)));
    }

    #[test]
    fn log_ratio_rational_detection() {
        let m = LogRatio::new(q(16, 1), q(8, 1));
        assert_eq!(m.as_rational(), Some(q(4, 3)));
        let l = LogRatio::new(q(6, 1), q(2, 1));
        assert_eq!(l.as_rational(), None);
        assert!(l.equals_log(6, 2));
        assert!(LogRatio::new(q(36, 1), q(4, 1)).equals_log(6, 2));
        assert!(!l.equals_log(6, 3));
        assert_eq!(LogRatio::new(q(1, 4), q(2, 1)).as_rational(), Some(q(-2, 1)));
    }

    #[test]
    fn power_products() {
        // 128^(5/21) vs 128^(2/7) * 128^(-1/21)
        let s = q(128, 1);
        let a = PowerProduct::power(s.clone(), Ratio::new(5, 21));
        let b = PowerProduct::power(s.clone(), Ratio::new(2, 7))
            .mul(&PowerProduct::power(s.clone(), Ratio::new(-1, 21)));
        assert_eq!(a.cmp_exact(&b), Ordering::Equal);
        assert!((a.to_f64() - 128f64.powf(5.0 / 21.0)).abs() < 1e-9);
        let eight = PowerProduct::power(q(8, 1), Ratio::new(-1, 2));
        assert_eq!(eight.as_rational(), None);
        assert_eq!(eight.cmp_exact(&PowerProduct::rational(q(1, 3))), Ordering::Greater);
        let quarter = PowerProduct::power(q(16, 1), Ratio::new(-1, 2));
        assert_eq!(quarter.as_rational(), Some(q(1, 4)));
    }

    #[test]
    fn perfect_powers() {
        assert_eq!(perfect_power(&BigUint::from(64u32)), (BigUint::from(2u32), 6));
        assert_eq!(perfect_power(&BigUint::from(12u32)), (BigUint::from(12u32), 1));
        assert_eq!(perfect_power(&BigUint::from(36u32)), (BigUint::from(6u32), 2));
    }
}
