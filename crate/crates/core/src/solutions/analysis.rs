use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{check_columns, projected_in, sol_count};
use crate::error::{Error, Result};
use crate::exact::{ln_biguint, rational_pow, ExactLogValue, PowerProduct};
use crate::ground::{GroundKind, GroundSet};
use crate::matrix::{image_size_in_group, IntegerMatrix, RankProvider};

fn big(x: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(x.clone()))
}

fn mask_cols(mask: usize, k: usize) -> Vec<usize> {
    (0..k).filter(|j| mask >> j & 1 == 1).collect()
}

fn check_k(a: &IntegerMatrix, max: usize) -> Result<usize> {
    let k = a.cols();
    if k > max {
        return Err(Error::LimitExceeded {
            needed: format!("{k} columns"),
            limit: max as u64,
        });
    }
    Ok(k)
}

/// How `|S|^{n - rank_S(C)}` is evaluated for a ground set.
enum Scale {
    /// Whole group: `|S|^{rank(C)} = |im C|`.
    Group(crate::group::FiniteAbelianGroup),
    /// Subset of `Z^d` with integer rational ranks.
    Field,
    /// Ambient group rank on a proper subset; only a float is available.
    Approx(RankProvider),
}

struct Sizer {
    size: BigUint,
    scale: Scale,
}

impl Sizer {
    fn new(s: &GroundSet) -> Result<Self> {
        let size = s.size()?;
        let scale = match s.ambient_group() {
            Some(g) if s.is_full_group() => Scale::Group(g),
            _ if s.is_integral() => Scale::Field,
            _ => Scale::Approx(s.rank_provider()?),
        };
        Ok(Sizer { size, scale })
    }

    fn rank(&self, c: &IntegerMatrix) -> Result<ExactLogValue> {
        match &self.scale {
            Scale::Group(g) => RankProvider::Group(g.clone()).rank(c),
            Scale::Field => RankProvider::Rational.rank(c),
            Scale::Approx(p) => p.rank(c),
        }
    }

    /// `|S|^{n - rank(C)}`: exact when possible, always as a float.
    fn pow_minus_rank(&self, n: i64, c: &IntegerMatrix) -> Result<(Option<PowerProduct>, f64)> {
        let ln_s = ln_biguint(&self.size);
        match &self.scale {
            Scale::Group(g) => {
                let v = rational_pow(&big(&self.size), n) / big(&image_size_in_group(c, g));
                let pp = PowerProduct::rational(v);
                let f = pp.to_f64();
                Ok((Some(pp), f))
            }
            Scale::Field => {
                let r = RankProvider::Rational.rank(c)?.to_f64().round() as i64;
                let pp = PowerProduct::rational(rational_pow(&big(&self.size), n - r));
                let f = pp.to_f64();
                Ok((Some(pp), f))
            }
            Scale::Approx(p) => {
                let r = p.rank(c)?.to_f64();
                Ok((None, ((n as f64 - r) * ln_s).exp()))
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ThresholdEntry {
    /// 0-based columns.
    pub w: Vec<usize>,
    #[serde(serialize_with = "crate::util::ser_display")]
    pub count: BigUint,
    /// `None` marks an infinite threshold (no solutions on `W`).
    pub p_w: Option<PowerProduct>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ThresholdTable {
    #[serde(serialize_with = "crate::util::ser_display")]
    pub size: BigUint,
    pub entries: Vec<ThresholdEntry>,
    pub p_hat: PowerProduct,
    pub maximizers: Vec<Vec<usize>>,
    pub warnings: Vec<String>,
}

impl ThresholdTable {
    pub fn entry(&self, w: &[usize]) -> Option<&ThresholdEntry> {
        let mut w = w.to_vec();
        w.sort_unstable();
        self.entries.iter().find(|e| e.w == w)
    }

    pub fn p(&self, w: &[usize]) -> Option<&PowerProduct> {
        self.entry(w).and_then(|e| e.p_w.as_ref())
    }
}

/// `p_W = (|Sol(W)| / |S|)^{-1/(|W|-1)}` for every `|W| >= 2` and their maximum.
pub fn threshold_table(a: &IntegerMatrix, s: &GroundSet) -> Result<ThresholdTable> {
    let k = check_k(a, 20)?;
    if k < 2 {
        return Err(Error::Invalid("threshold table needs at least two columns".into()));
    }
    let size = s.size()?;
    if size.is_zero() {
        return Err(Error::Invalid(format!("{s} is empty")));
    }
    let mut masks: Vec<usize> = (1usize..1 << k).filter(|m| m.count_ones() >= 2).collect();
    masks.sort_by_key(|&m| (m.count_ones(), mask_cols(m, k)));
    let mut entries = Vec::with_capacity(masks.len());
    let mut warnings = Vec::new();
    for m in masks {
        let w = mask_cols(m, k);
        let count = sol_count(a, s, &w)?;
        let p_w = (!count.is_zero()).then(|| {
            let ratio = big(&count) / big(&size);
            PowerProduct::power(ratio, Ratio::new(-1, w.len() as i64 - 1))
        });
        if p_w.is_none() {
            warnings.push(format!("no solutions on W = {}", one_based(&w)));
        }
        entries.push(ThresholdEntry { w, count, p_w });
    }
    let mut best: Option<PowerProduct> = None;
    let mut maximizers = Vec::new();
    for e in &entries {
        let Some(p) = &e.p_w else { continue };
        match best.as_ref().map(|b| p.cmp_exact(b)) {
            None | Some(Ordering::Greater) => {
                best = Some(p.clone());
                maximizers = vec![e.w.clone()];
            }
            Some(Ordering::Equal) => maximizers.push(e.w.clone()),
            Some(Ordering::Less) => {}
        }
    }
    let p_hat = best.ok_or(Error::NoSolutions)?;
    Ok(ThresholdTable {
        size,
        entries,
        p_hat,
        maximizers,
        warnings,
    })
}

pub(crate) fn one_based(w: &[usize]) -> String {
    let v: Vec<String> = w.iter().map(|j| (j + 1).to_string()).collect();
    format!("{{{}}}", v.join(","))
}

#[derive(Clone, Debug, Serialize)]
pub struct Richness {
    #[serde(serialize_with = "crate::util::ser_display")]
    pub count: BigUint,
    #[serde(serialize_with = "crate::util::ser_display")]
    pub size: BigUint,
    pub rank: ExactLogValue,
    /// `ε` exactly when `|S|^{k - rank}` is rational.
    #[serde(serialize_with = "crate::util::ser_opt_rational")]
    pub epsilon: Option<BigRational>,
    pub epsilon_f64: f64,
}

/// The largest `ε` with `|Sol([k])| >= ε |S|^{k - rank_S(A)}`.
pub fn richness(a: &IntegerMatrix, s: &GroundSet) -> Result<Richness> {
    let sizer = Sizer::new(s)?;
    let count = sol_count(a, s, &(0..a.cols()).collect::<Vec<_>>())?;
    let rank = sizer.rank(a)?;
    let (scale, scale_f) = sizer.pow_minus_rank(a.cols() as i64, a)?;
    let epsilon = scale.map(|d| big(&count) / d.as_rational().expect("integer exponent"));
    let epsilon_f64 = match &epsilon {
        Some(e) => crate::exact::rational_f64(e),
        None if count.is_zero() => 0.0,
        None => (ln_biguint(&count) - scale_f.ln()).exp(),
    };
    Ok(Richness {
        count,
        size: sizer.size,
        rank,
        epsilon,
        epsilon_f64,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Extendability {
    #[serde(serialize_with = "crate::util::ser_rational")]
    pub value: BigRational,
    /// Maximizing `(W, Y)`, 0-based; `None` when read off the group closed form.
    pub witness: Option<(Vec<usize>, Vec<usize>)>,
    pub closed_form: bool,
}

/// Least `B` making `(A, S)` `B`-extendable: the maximum over nonempty
/// `W ⊆ Y` and `w0` of `|Sol(w0, W, Y)| |Sol(W)| / |Sol(Y)|`. Whole groups give `1`.
pub fn extendability(a: &IntegerMatrix, s: &GroundSet) -> Result<Extendability> {
    if s.is_full_group() {
        return Ok(Extendability {
            value: BigRational::one(),
            witness: None,
            closed_form: true,
        });
    }
    extendability_by_enumeration(a, s)
}

pub(crate) fn extendability_by_enumeration(a: &IntegerMatrix, s: &GroundSet) -> Result<Extendability> {
    let k = check_k(a, 16)?;
    let els = s.elements()?;
    let mut sol_w: HashMap<usize, BigUint> = HashMap::new();
    let mut best = BigRational::zero();
    let mut witness = None;
    for ym in 1usize..1 << k {
        let y = mask_cols(ym, k);
        let (total, list) = projected_in(a, &els, &[], &[], &y, Some(usize::MAX))?;
        if total.is_zero() {
            continue;
        }
        let tuples = list.expect("unbounded listing");
        // Subsets of Y as positions inside the Y-tuple.
        for sub in 1usize..1 << y.len() {
            let pos = mask_cols(sub, y.len());
            let w: Vec<usize> = pos.iter().map(|&i| y[i]).collect();
            let wm: usize = w.iter().map(|&j| 1 << j).sum();
            let mut fibres: HashMap<Vec<u32>, u64> = HashMap::new();
            for t in &tuples {
                *fibres.entry(pos.iter().map(|&i| t[i]).collect()).or_default() += 1;
            }
            let max_fibre = fibres.values().copied().max().unwrap_or(0);
            let sw = match sol_w.get(&wm) {
                Some(c) => c.clone(),
                None => {
                    let c = if wm == ym {
                        total.clone()
                    } else {
                        projected_in(a, &els, &[], &[], &w, None)?.0
                    };
                    sol_w.insert(wm, c.clone());
                    c
                }
            };
            let v = BigRational::new(
                BigInt::from(max_fibre) * BigInt::from(sw),
                BigInt::from(total.clone()),
            );
            if v > best {
                best = v;
                witness = Some((w, y.clone()));
            }
        }
    }
    if witness.is_none() {
        return Err(Error::NoSolutions);
    }
    Ok(Extendability {
        value: best,
        witness,
        closed_form: false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    Increasing,
    Decreasing,
    Constant,
    Mixed,
    Single,
    /// Some value in the sequence is undefined.
    Undefined,
}

impl Trend {
    pub(crate) fn of_optional(values: &[Option<PowerProduct>]) -> Trend {
        match values.iter().cloned().collect::<Option<Vec<_>>>() {
            Some(v) => Trend::of(&v),
            None => Trend::Undefined,
        }
    }

    pub(crate) fn of(values: &[PowerProduct]) -> Trend {
        if values.len() < 2 {
            return Trend::Single;
        }
        let steps: Vec<Ordering> = values.windows(2).map(|w| w[1].cmp_exact(&w[0])).collect();
        if steps.iter().all(|&o| o == Ordering::Greater) {
            Trend::Increasing
        } else if steps.iter().all(|&o| o == Ordering::Less) {
            Trend::Decreasing
        } else if steps.iter().all(|&o| o == Ordering::Equal) {
            Trend::Constant
        } else {
            Trend::Mixed
        }
    }
}

impl std::fmt::Display for Trend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Trend::Increasing => "increasing",
            Trend::Decreasing => "decreasing",
            Trend::Constant => "constant",
            Trend::Mixed => "mixed",
            Trend::Single => "single",
            Trend::Undefined => "undefined",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CompatibilityEntry {
    pub w: Vec<usize>,
    pub w_prime: Vec<usize>,
    /// `(|S|^2/|Sol(W)|) (p_{W'}/p_X)^{|W'|-1}`.
    pub value: PowerProduct,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompatibilityRow {
    pub ground: String,
    #[serde(serialize_with = "crate::util::ser_display")]
    pub size: BigUint,
    pub x: Vec<usize>,
    /// The `X` the heuristic would pick for this member.
    pub heuristic_x: Vec<usize>,
    /// `p_X / p̂`.
    pub x_over_p_hat: PowerProduct,
    /// `(W, |S|^2/|Sol(W)|, |S|/|Sol(W)|)` for every `|W| = 2`.
    pub pairs: Vec<(Vec<usize>, PowerProduct, PowerProduct)>,
    pub entries: Vec<CompatibilityEntry>,
    pub max_entry: PowerProduct,
    pub max_weak: PowerProduct,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompatibilityReport {
    pub rows: Vec<CompatibilityRow>,
    /// Trend of each `(W, W')` product across the family, when present in every row.
    pub entry_trends: Vec<(Vec<usize>, Vec<usize>, Trend)>,
    /// Trend of each weak-compatibility ratio `|S|/|Sol(W)|`.
    pub weak_trends: Vec<(Vec<usize>, Trend)>,
    pub max_entry_trend: Trend,
    pub max_weak_trend: Trend,
}

/// Among the `p̂` candidates with `|W| >= 3`, the largest of minimal size.
fn heuristic_x(t: &ThresholdTable) -> Option<Vec<usize>> {
    let mut best: Option<(&PowerProduct, &Vec<usize>)> = None;
    for e in t.entries.iter().filter(|e| e.w.len() >= 3) {
        let Some(p) = &e.p_w else { continue };
        let better = match best {
            None => true,
            Some((bp, bw)) => match p.cmp_exact(bp) {
                Ordering::Greater => true,
                Ordering::Equal => e.w.len() < bw.len(),
                Ordering::Less => false,
            },
        };
        if better {
            best = Some((p, &e.w));
        }
    }
    best.map(|(_, w)| w.clone())
}

/// Finite-`n` values of the compatibility product and weak-compatibility
/// ratios for a family of ground sets. With `x_choice = None` each member uses
/// the heuristic `X`.
pub fn compatibility_report(
    a: &IntegerMatrix,
    family: &[GroundSet],
    x_choice: Option<&[usize]>,
) -> Result<CompatibilityReport> {
    if family.is_empty() {
        return Err(Error::Invalid("empty ground-set family".into()));
    }
    let k = a.cols();
    if k < 3 {
        return Err(Error::Invalid("compatibility needs at least three columns".into()));
    }
    let fixed_x = match x_choice {
        Some(x) => {
            let x = check_columns(x, k)?;
            if x.len() < 3 {
                return Err(Error::Invalid("X needs at least three columns".into()));
            }
            Some(x)
        }
        None => None,
    };
    let mut rows = Vec::with_capacity(family.len());
    for s in family {
        let t = threshold_table(a, s)?;
        let size = big(&t.size);
        let hx = heuristic_x(&t).ok_or(Error::NoSolutions)?;
        let x = fixed_x.clone().unwrap_or_else(|| hx.clone());
        let p_x = t
            .p(&x)
            .cloned()
            .ok_or_else(|| Error::Invalid(format!("no solutions on X = {}", one_based(&x))))?;
        let mut pairs = Vec::new();
        for e in t.entries.iter().filter(|e| e.w.len() == 2) {
            if e.count.is_zero() {
                continue;
            }
            let c = big(&e.count);
            pairs.push((
                e.w.clone(),
                PowerProduct::rational(&size * &size / &c),
                PowerProduct::rational(&size / c),
            ));
        }
        let mut entries = Vec::new();
        for (w, strong, _) in pairs.iter().filter(|p| p.0.iter().all(|j| x.contains(j))) {
            for e in t.entries.iter().filter(|e| e.w.iter().all(|j| x.contains(j))) {
                let Some(p) = &e.p_w else { continue };
                let factor = p.div(&p_x).pow(Ratio::from_integer(e.w.len() as i64 - 1));
                entries.push(CompatibilityEntry {
                    w: w.clone(),
                    w_prime: e.w.clone(),
                    value: strong.mul(&factor),
                });
            }
        }
        let max_of = |it: &mut dyn Iterator<Item = &PowerProduct>| {
            it.fold(None::<PowerProduct>, |m, v| match m {
                Some(m) if m.cmp_exact(v) != Ordering::Less => Some(m),
                _ => Some(v.clone()),
            })
            .unwrap_or_else(PowerProduct::one)
        };
        let max_entry = max_of(&mut entries.iter().map(|e| &e.value));
        let max_weak = max_of(&mut pairs.iter().map(|p| &p.2));
        rows.push(CompatibilityRow {
            ground: s.to_string(),
            size: t.size.clone(),
            x_over_p_hat: p_x.div(&t.p_hat),
            x,
            heuristic_x: hx,
            pairs,
            entries,
            max_entry,
            max_weak,
        });
    }
    let mut entry_trends = Vec::new();
    for e in &rows[0].entries {
        let series: Option<Vec<PowerProduct>> = rows
            .iter()
            .map(|r| {
                r.entries
                    .iter()
                    .find(|f| f.w == e.w && f.w_prime == e.w_prime)
                    .map(|f| f.value.clone())
            })
            .collect();
        if let Some(series) = series {
            entry_trends.push((e.w.clone(), e.w_prime.clone(), Trend::of(&series)));
        }
    }
    let mut weak_trends = Vec::new();
    for (w, _, _) in &rows[0].pairs {
        let series: Option<Vec<PowerProduct>> = rows
            .iter()
            .map(|r| r.pairs.iter().find(|p| &p.0 == w).map(|p| p.2.clone()))
            .collect();
        if let Some(series) = series {
            weak_trends.push((w.clone(), Trend::of(&series)));
        }
    }
    let max_entry_trend = Trend::of(&rows.iter().map(|r| r.max_entry.clone()).collect::<Vec<_>>());
    let max_weak_trend = Trend::of(&rows.iter().map(|r| r.max_weak.clone()).collect::<Vec<_>>());
    Ok(CompatibilityReport {
        rows,
        entry_trends,
        weak_trends,
        max_entry_trend,
        max_weak_trend,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct KeyBoundsViolation {
    pub check: String,
    pub w: Vec<usize>,
    pub y: Vec<usize>,
    pub w0: Vec<Vec<i64>>,
    #[serde(serialize_with = "crate::util::ser_display")]
    pub count: BigUint,
    pub bound: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct KeyBoundsReport {
    pub triples_checked: u64,
    pub subsets_checked: u64,
    /// Group case: nonzero projected counts that met the bound with equality.
    pub equality_cases: u64,
    pub group: bool,
    #[serde(serialize_with = "crate::util::ser_rational")]
    pub epsilon: BigRational,
    pub violations: Vec<KeyBoundsViolation>,
    pub pass: bool,
}

fn is_field_power(s: &GroundSet) -> bool {
    match s.kind() {
        GroundKind::Interval { .. } | GroundKind::Lattice { .. } | GroundKind::Primes { .. } => true,
        GroundKind::Explicit => s.is_integral() && s.moduli().len() == 1,
        _ => false,
    }
}

/// Checks the projected-solution upper bound over every `W ⊆ Y` with up to
/// `samples` choices of `w0` each (all of them when `|S|^{|W|}` is at most
/// `samples`), plus the two-sided richness bounds on every `|Sol(Z)|`. In the
/// group case nonzero counts must meet the upper bound exactly.
pub fn key_bounds_check(a: &IntegerMatrix, s: &GroundSet, samples: usize, seed: u64) -> Result<KeyBoundsReport> {
    let group = s.is_full_group();
    if !group && !is_field_power(s) {
        return Err(Error::Invalid(format!(
            "{s} is neither a whole finite abelian group nor a power of a subset of a field"
        )));
    }
    let k = check_k(a, 12)?;
    let sizer = Sizer::new(s)?;
    let els = s.elements()?;
    let n = els.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rich = richness(a, s)?;
    let epsilon = rich.epsilon.clone().expect("exact for groups and field powers");
    let mut violations = Vec::new();
    let (mut triples, mut equality_cases) = (0u64, 0u64);
    let full: Vec<usize> = (0..k).collect();
    let sol_list = projected_in(a, &els, &[], &[], &full, Some(100_000))?.1;

    for ym in 1usize..1 << k {
        let y = mask_cols(ym, k);
        let a_ybar = a.complement_columns(&y);
        for wm in (0..=ym).filter(|w| w & !ym == 0) {
            let w = mask_cols(wm, k);
            let a_wbar = a.complement_columns(&w);
            let (b1, _) = sizer.pow_minus_rank(y.len() as i64 - w.len() as i64, &a_wbar)?;
            let (b2, _) = sizer.pow_minus_rank(0, &a_ybar)?;
            let bound = b1.unwrap().div(&b2.unwrap());
            let exhaustive = (n as f64).powi(w.len() as i32) <= samples as f64;
            let mut picks: Vec<Vec<u32>> = Vec::new();
            if exhaustive {
                let total = n.pow(w.len() as u32);
                for mut idx in 0..total {
                    let mut t = Vec::with_capacity(w.len());
                    for _ in 0..w.len() {
                        t.push((idx % n) as u32);
                        idx /= n;
                    }
                    picks.push(t);
                }
            } else {
                for _ in 0..samples {
                    let from_sol = sol_list.as_ref().filter(|l| !l.is_empty() && rng.random_bool(0.5));
                    picks.push(match from_sol {
                        Some(l) => {
                            let x = &l[rng.random_range(0..l.len())];
                            w.iter().map(|&j| x[j]).collect()
                        }
                        None => (0..w.len()).map(|_| rng.random_range(0..n as u32)).collect(),
                    });
                }
            }
            for w0 in picks {
                triples += 1;
                let (count, _) = projected_in(a, &els, &w, &w0, &y, None)?;
                let ord = if count.is_zero() {
                    Ordering::Less
                } else {
                    PowerProduct::rational(big(&count)).cmp_exact(&bound)
                };
                let mut fail = |check: &str| {
                    violations.push(KeyBoundsViolation {
                        check: check.into(),
                        w: w.clone(),
                        y: y.clone(),
                        w0: w0.iter().map(|&i| els.get(i as usize).to_vec()).collect(),
                        count: count.clone(),
                        bound: bound.to_string(),
                    })
                };
                if ord == Ordering::Greater {
                    fail("upper");
                } else if group && !count.is_zero() {
                    if ord == Ordering::Equal {
                        equality_cases += 1;
                    } else {
                        fail("equality");
                    }
                }
            }
        }
    }

    let mut subsets = 0u64;
    for zm in 1usize..1 << k {
        subsets += 1;
        let z = mask_cols(zm, k);
        let count = projected_in(a, &els, &[], &[], &z, None)?.0;
        let (num, _) = sizer.pow_minus_rank(z.len() as i64, a)?;
        let (den, _) = sizer.pow_minus_rank(0, &a.complement_columns(&z))?;
        let upper = num.unwrap().div(&den.unwrap());
        let lower = (!epsilon.is_zero()).then(|| PowerProduct::rational(epsilon.clone()).mul(&upper));
        let c = (!count.is_zero()).then(|| PowerProduct::rational(big(&count)));
        let over = c.as_ref().is_some_and(|c| c.cmp_exact(&upper) == Ordering::Greater);
        let under = match (&c, &lower) {
            (_, None) => false,
            (None, Some(_)) => true,
            (Some(c), Some(l)) => c.cmp_exact(l) == Ordering::Less,
        };
        let lower_s = lower.as_ref().map_or("0".to_string(), |l| l.to_string());
        let upper_s = upper.to_string();
        for (check, bad, b) in [("rich-upper", over, &upper_s), ("rich-lower", under, &lower_s)] {
            if bad {
                violations.push(KeyBoundsViolation {
                    check: check.into(),
                    w: Vec::new(),
                    y: z.clone(),
                    w0: Vec::new(),
                    count: count.clone(),
                    bound: b.clone(),
                });
            }
        }
    }
    Ok(KeyBoundsReport {
        triples_checked: triples,
        subsets_checked: subsets,
        equality_cases,
        group,
        epsilon,
        pass: violations.is_empty(),
        violations,
    })
}
