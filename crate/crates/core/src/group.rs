//! Finite abelian groups stored as explicit products of cyclic groups.
//!
//! A power `G^n` keeps the base moduli and the exponent separately so that
//! closed-form counts never need to materialise `|G|^n` elements.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of elements `enumerate_elements` will produce.
pub const DEFAULT_ENUMERATION_LIMIT: u64 = 10_000_000;

/// `Z_{m_1} x ... x Z_{m_t}`, optionally raised to a power.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FiniteAbelianGroup {
    base: Vec<u64>,
    power: u32,
}

/// An element of a [`FiniteAbelianGroup`]: one reduced residue per cyclic factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupElement {
    pub residues: Vec<u64>,
}

impl FiniteAbelianGroup {
    pub fn new(moduli: Vec<u64>) -> Result<Self> {
        Self::power_of(moduli, 1)
    }

    pub fn cyclic(m: u64) -> Result<Self> {
        Self::new(vec![m])
    }

    /// `G^n` where `G` has the given base moduli.
    pub fn power_of(base: Vec<u64>, n: u32) -> Result<Self> {
        if base.contains(&0) {
            return Err(Error::Invalid("every modulus must be at least 1".into()));
        }
        Ok(FiniteAbelianGroup { base, power: n })
    }

    /// Raises this group to the `n`th power.
    pub fn pow(&self, n: u32) -> Self {
        FiniteAbelianGroup {
            base: self.base.clone(),
            power: self.power * n,
        }
    }

    pub fn base_moduli(&self) -> &[u64] {
        &self.base
    }

    pub fn power(&self) -> u32 {
        self.power
    }

    /// All moduli, with the base repeated `power` times.
    pub fn moduli(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.base.len() * self.power as usize);
        for _ in 0..self.power {
            out.extend_from_slice(&self.base);
        }
        out
    }

    pub fn rank_count(&self) -> usize {
        self.base.len() * self.power as usize
    }

    pub fn order(&self) -> BigUint {
        let base: BigUint = self.base.iter().map(|&m| BigUint::from(m)).product();
        base.pow(self.power)
    }

    pub fn is_trivial(&self) -> bool {
        self.power == 0 || self.base.iter().all(|&m| m == 1)
    }

    /// Least common multiple of the moduli; 1 for the trivial group.
    pub fn exponent(&self) -> u64 {
        if self.power == 0 {
            return 1;
        }
        self.base.iter().fold(1u64, |acc, &m| acc.lcm(&m))
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement {
            residues: vec![0; self.rank_count()],
        }
    }

    pub fn element(&self, residues: &[i64]) -> Result<GroupElement> {
        let moduli = self.moduli();
        if residues.len() != moduli.len() {
            return Err(Error::ShapeMismatch(
                moduli,
                residues.iter().map(|&r| r as u64).collect(),
            ));
        }
        Ok(GroupElement {
            residues: residues
                .iter()
                .zip(&moduli)
                .map(|(&r, &m)| r.rem_euclid(m as i64) as u64)
                .collect(),
        })
    }

    fn check(&self, g: &GroupElement) -> Result<()> {
        if g.residues.len() != self.rank_count() {
            return Err(Error::ShapeMismatch(self.moduli(), g.residues.clone()));
        }
        Ok(())
    }

    pub fn add(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        self.check(g)?;
        self.check(h)?;
        let residues = self
            .moduli()
            .iter()
            .zip(g.residues.iter().zip(&h.residues))
            .map(|(&m, (&a, &b))| ((a as u128 + b as u128) % m as u128) as u64)
            .collect();
        Ok(GroupElement { residues })
    }

    pub fn neg(&self, g: &GroupElement) -> Result<GroupElement> {
        self.scalar_action(-1, g)
    }

    /// `n·g`; negative `n` acts through the inverse.
    pub fn scalar_action(&self, n: i64, g: &GroupElement) -> Result<GroupElement> {
        self.check(g)?;
        let residues = self
            .moduli()
            .iter()
            .zip(&g.residues)
            .map(|(&m, &a)| {
                let m = m as i128;
                ((n as i128 % m) * a as i128).rem_euclid(m) as u64
            })
            .collect();
        Ok(GroupElement { residues })
    }

    /// Every element exactly once, in lexicographic residue order.
    pub fn enumerate_elements(&self, limit: u64) -> Result<ElementIter> {
        let order = self.order();
        if order > BigUint::from(limit) {
            return Err(Error::LimitExceeded {
                needed: order.to_string(),
                limit,
            });
        }
        Ok(ElementIter {
            moduli: self.moduli(),
            next: Some(vec![0; self.rank_count()]),
        })
    }
}

/// Odometer over residue vectors.
pub struct ElementIter {
    moduli: Vec<u64>,
    next: Option<Vec<u64>>,
}

impl Iterator for ElementIter {
    type Item = GroupElement;

    fn next(&mut self) -> Option<GroupElement> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut i = succ.len();
        let mut carried_out = true;
        while i > 0 {
            i -= 1;
            succ[i] += 1;
            if succ[i] < self.moduli[i] {
                carried_out = false;
                break;
            }
            succ[i] = 0;
        }
        if !carried_out {
            self.next = Some(succ);
        }
        Some(GroupElement { residues: current })
    }
}

impl fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body = self
            .base
            .iter()
            .map(|m| format!("Z{m}"))
            .collect::<Vec<_>>()
            .join("x");
        if self.power == 1 {
            write!(f, "{body}")
        } else {
            write!(f, "{body}^{}", self.power)
        }
    }
}

/// Parses `Z6`, `Z2xZ3`, `Z4^3`. A trailing `^n` applies to the whole product.
impl FromStr for FiniteAbelianGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (body, power) = match s.split_once('^') {
            Some((b, p)) => (
                b,
                p.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::Parse(format!("bad group power in {s:?}")))?,
            ),
            None => (s, 1),
        };
        let mut base = Vec::new();
        for factor in body.split(['x', 'X', '*']) {
            let factor = factor.trim();
            let digits = factor
                .strip_prefix('Z')
                .or_else(|| factor.strip_prefix('z'))
                .ok_or_else(|| Error::Parse(format!("bad cyclic factor {factor:?} in {s:?}")))?;
            let m: u64 = digits
                .parse()
                .map_err(|_| Error::Parse(format!("bad modulus {digits:?} in {s:?}")))?;
            if m == 0 {
                return Err(Error::Parse(format!("modulus must be at least 1 in {s:?}")));
            }
            base.push(m);
        }
        FiniteAbelianGroup::power_of(base, power)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn g(s: &str) -> FiniteAbelianGroup {
        s.parse().unwrap()
    }

    #[test]
    fn addition_examples() {
        let z2z3 = g("Z2xZ3");
        let a = z2z3.element(&[1, 2]).unwrap();
        assert_eq!(z2z3.add(&a, &a).unwrap().residues, vec![0, 1]);
        let z4 = g("Z4");
        let three = z4.element(&[3]).unwrap();
        assert_eq!(z4.add(&three, &three).unwrap().residues, vec![2]);
        assert_eq!(z4.add(&three, &z4.zero()).unwrap(), three);
    }

    #[test]
    fn mismatched_shapes_fail() {
        let z4 = g("Z4");
        let other = g("Z2xZ2").zero();
        assert!(matches!(
            z4.add(&z4.zero(), &other),
            Err(Error::ShapeMismatch(..))
        ));
    }

    #[test]
    fn scalar_examples() {
        let z4 = g("Z4");
        let one = z4.element(&[1]).unwrap();
        assert_eq!(z4.scalar_action(3, &one).unwrap().residues, vec![3]);
        let three = z4.element(&[3]).unwrap();
        assert_eq!(z4.scalar_action(-2, &three).unwrap().residues, vec![2]);
        assert_eq!(z4.scalar_action(0, &three).unwrap(), z4.zero());
    }

    #[test]
    fn exponent_examples() {
        assert_eq!(g("Z6").exponent(), 6);
        assert_eq!(g("Z2xZ4").exponent(), 4);
        assert_eq!(g("Z4^3").exponent(), 4);
        assert_eq!(g("Z1").exponent(), 1);
    }

    #[test]
    fn power_groups() {
        let p = g("Z4^3");
        assert_eq!(p.moduli(), vec![4, 4, 4]);
        assert_eq!(p.order(), BigUint::from(64u32));
        assert_eq!(p.base_moduli(), &[4]);
        assert_eq!(p.power(), 3);
        assert_eq!(g("Z2xZ3^2").order(), BigUint::from(36u32));
    }

    #[test]
    fn enumeration_examples() {
        let all: Vec<_> = g("Z2xZ2")
            .enumerate_elements(DEFAULT_ENUMERATION_LIMIT)
            .unwrap()
            .map(|e| e.residues)
            .collect();
        assert_eq!(all, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        let trivial: Vec<_> = g("Z1xZ1").enumerate_elements(10).unwrap().collect();
        assert_eq!(trivial, vec![g("Z1xZ1").zero()]);
        let z4: Vec<_> = g("Z4")
            .enumerate_elements(10)
            .unwrap()
            .map(|e| e.residues[0])
            .collect();
        assert_eq!(z4, vec![0, 1, 2, 3]);
        assert!(g("Z10^8").enumerate_elements(1000).is_err());
    }

    #[test]
    fn parse_errors() {
        assert!("Z0".parse::<FiniteAbelianGroup>().is_err());
        assert!("Y4".parse::<FiniteAbelianGroup>().is_err());
        assert!("Z4^x".parse::<FiniteAbelianGroup>().is_err());
    }

    fn arb_group() -> impl Strategy<Value = FiniteAbelianGroup> {
        prop::collection::vec(1u64..12, 1..4).prop_map(|m| FiniteAbelianGroup::new(m).unwrap())
    }

    fn arb_elem(gr: &FiniteAbelianGroup) -> impl Strategy<Value = GroupElement> {
        let moduli = gr.moduli();
        moduli
            .into_iter()
            .map(|m| 0..m)
            .collect::<Vec<_>>()
            .prop_map(|residues| GroupElement { residues })
    }

    proptest! {
        #[test]
        fn group_laws(
            (gr, a, b, c) in arb_group().prop_flat_map(|gr| {
                let (a, b, c) = (arb_elem(&gr), arb_elem(&gr), arb_elem(&gr));
                (Just(gr), a, b, c)
            })
        ) {
            let ab = gr.add(&a, &b).unwrap();
            prop_assert_eq!(&ab, &gr.add(&b, &a).unwrap());
            let left = gr.add(&ab, &c).unwrap();
            let right = gr.add(&a, &gr.add(&b, &c).unwrap()).unwrap();
            prop_assert_eq!(left, right);
            let s = gr.exponent() as i64;
            prop_assert_eq!(gr.scalar_action(s, &a).unwrap(), gr.zero());
        }

        #[test]
        fn enumeration_is_exhaustive(gr in arb_group()) {
            let elems: Vec<_> = gr.enumerate_elements(DEFAULT_ENUMERATION_LIMIT).unwrap().collect();
            let distinct: std::collections::HashSet<_> = elems.iter().cloned().collect();
            prop_assert_eq!(BigUint::from(elems.len()), gr.order());
            prop_assert_eq!(distinct.len(), elems.len());
        }
    }
}
