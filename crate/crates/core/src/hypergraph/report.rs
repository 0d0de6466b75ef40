use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use serde::Serialize;

use super::{hat_p_hypergraph, max_fibre, subsets, OrderedHypergraph};
use crate::error::{Error, Result};
use crate::exact::PowerProduct;
use crate::solutions::Trend;

/// `Δ_W(H_Y)` and its normalized ratio; `value` is `None` when `H_Y` is edgeless.
#[derive(Clone, Debug, Serialize)]
pub struct DegreeRatio {
    pub w: Vec<usize>,
    pub y: Vec<usize>,
    pub delta: u64,
    #[serde(serialize_with = "crate::util::ser_opt_rational")]
    pub value: Option<BigRational>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TwoDegreeEntry {
    pub w: Vec<usize>,
    pub w_prime: Vec<usize>,
    pub value: PowerProduct,
}

#[derive(Clone, Debug, Serialize)]
pub struct PConditionsRow {
    pub vertices: usize,
    pub edges: usize,
    pub p_hat: Option<PowerProduct>,
    pub p_hat_times_v: Option<PowerProduct>,
    pub bounded_degree: Vec<DegreeRatio>,
    #[serde(serialize_with = "crate::util::ser_opt_rational")]
    pub bounded_degree_max: Option<BigRational>,
    pub one_degree: Vec<DegreeRatio>,
    #[serde(serialize_with = "crate::util::ser_opt_rational")]
    pub one_degree_max: Option<BigRational>,
    pub x: Option<Vec<usize>>,
    pub f_x_over_p_hat: Option<PowerProduct>,
    pub two_degree: Vec<TwoDegreeEntry>,
    pub two_degree_max: Option<PowerProduct>,
    /// Names of the quantities that are undefined for this member.
    pub undefined: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PConditionsReport {
    pub rows: Vec<PConditionsRow>,
    pub p_hat_trend: Trend,
    pub p_hat_times_v_trend: Trend,
    pub bounded_degree_trend: Trend,
    pub one_degree_trend: Trend,
    pub two_degree_trend: Trend,
}

fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn max_of(values: impl Iterator<Item = Option<BigRational>>) -> Option<BigRational> {
    values.flatten().max()
}

/// Finite-size degree and threshold diagnostics for each member of a family.
/// `x_choice` fixes the set `X` (0-based positions, at least three of them);
/// otherwise `X` is the largest `f_W` over `|W| >= 3`, smallest size first.
pub fn p_conditions_report(family: &[OrderedHypergraph], x_choice: Option<&[usize]>) -> Result<PConditionsReport> {
    if family.is_empty() {
        return Err(Error::Invalid("family is empty".into()));
    }
    let k = family[0].uniformity();
    if family.iter().any(|h| h.uniformity() != k) {
        return Err(Error::Invalid("family members differ in uniformity".into()));
    }
    if k > 16 {
        return Err(Error::Invalid(format!("uniformity {k} is too large")));
    }
    if let Some(x) = x_choice {
        let mut s = x.to_vec();
        s.sort_unstable();
        s.dedup();
        if s.len() != x.len() || s.len() < 3 || s.iter().any(|&j| j >= k) {
            return Err(Error::Invalid(format!("X = {x:?} must be at least three distinct positions below {k}")));
        }
    }
    let rows = family.iter().map(|h| row(h, x_choice)).collect::<Result<Vec<_>>>()?;
    let pick = |f: &dyn Fn(&PConditionsRow) -> Option<PowerProduct>| Trend::of_optional(&rows.iter().map(f).collect::<Vec<_>>());
    let rat = |x: &Option<BigRational>| x.clone().map(PowerProduct::rational);
    Ok(PConditionsReport {
        p_hat_trend: pick(&|r| r.p_hat.clone()),
        p_hat_times_v_trend: pick(&|r| r.p_hat_times_v.clone()),
        bounded_degree_trend: pick(&|r| rat(&r.bounded_degree_max)),
        one_degree_trend: pick(&|r| rat(&r.one_degree_max)),
        two_degree_trend: pick(&|r| r.two_degree_max.clone()),
        rows,
    })
}

fn row(h: &OrderedHypergraph, x_choice: Option<&[usize]>) -> Result<PConditionsRow> {
    let k = h.uniformity();
    let v = h.vertex_count();
    let mut undefined = Vec::new();
    let all = subsets(k, 1);
    let mut restricted: HashMap<Vec<usize>, OrderedHypergraph> = HashMap::new();
    for y in &all {
        restricted.insert(y.clone(), h.restriction(y)?);
    }
    let e = |w: &[usize]| restricted[w].edge_count() as u64;
    let delta = |w: &[usize], y: &[usize]| {
        let pos: Vec<usize> = w.iter().map(|j| y.iter().position(|x| x == j).unwrap()).collect();
        max_fibre(&restricted[y], &pos)
    };

    let mut bounded_degree = Vec::new();
    let mut one_degree = Vec::new();
    for y in &all {
        let ey = e(y);
        for w in all.iter().filter(|w| w.iter().all(|j| y.contains(j))) {
            let d = delta(w, y);
            bounded_degree.push(DegreeRatio {
                w: w.clone(),
                y: y.clone(),
                delta: d,
                value: (ey > 0).then(|| ratio(d * e(w), ey)),
            });
            if w.len() == 1 && w.len() < y.len() {
                one_degree.push(DegreeRatio {
                    w: w.clone(),
                    y: y.clone(),
                    delta: d,
                    value: (ey > 0 && v > 0).then(|| ratio(d * v as u64, ey)),
                });
            }
        }
    }
    if bounded_degree.iter().any(|r| r.value.is_none()) {
        undefined.push("bounded-degree".to_string());
    }
    if one_degree.iter().any(|r| r.value.is_none()) {
        undefined.push("one-degree".to_string());
    }
    let bounded_degree_max = max_of(bounded_degree.iter().map(|r| r.value.clone()));
    let one_degree_max = max_of(one_degree.iter().map(|r| r.value.clone()));

    let threshold = if k >= 2 { hat_p_hypergraph(h).ok() } else { None };
    let p_hat = threshold.as_ref().map(|t| t.p_hat.clone());
    if p_hat.is_none() {
        undefined.push("p-hat".to_string());
    }
    let p_hat_times_v = p_hat
        .as_ref()
        .filter(|_| v > 0)
        .map(|p| p.mul(&PowerProduct::rational(ratio(v as u64, 1))));

    let x = match (x_choice, &threshold) {
        (Some(x), _) => {
            let mut x = x.to_vec();
            x.sort_unstable();
            Some(x)
        }
        (None, Some(t)) => {
            let mut best: Option<(&Vec<usize>, &PowerProduct)> = None;
            for (w, _, f) in t.entries.iter().filter(|en| en.0.len() >= 3) {
                if let Some(f) = f {
                    if best.is_none_or(|(_, b)| f.cmp_exact(b) == Ordering::Greater) {
                        best = Some((w, f));
                    }
                }
            }
            best.map(|(w, _)| w.clone())
        }
        (None, None) => None,
    };
    let f_x = x.as_ref().zip(threshold.as_ref()).and_then(|(x, t)| t.f(x).cloned());
    let f_x_over_p_hat = f_x.as_ref().zip(p_hat.as_ref()).map(|(f, p)| f.div(p));

    let mut two_degree = Vec::new();
    if let (Some(x), Some(p)) = (&x, &p_hat) {
        let ex = e(x);
        if ex > 0 {
            let proper: Vec<&Vec<usize>> = all
                .iter()
                .filter(|w| w.len() >= 2 && w.len() < x.len() && w.iter().all(|j| x.contains(j)))
                .collect();
            for w in proper.iter().filter(|w| w.len() == 2) {
                let dw = delta(w, x);
                for wp in &proper {
                    let dwp = delta(wp, x);
                    let exp = 3 * x.len() as i64 - 2 - wp.len() as i64;
                    let value = p
                        .pow(Ratio::from_integer(exp))
                        .mul(&PowerProduct::rational(ratio(dw * dwp * ex, 1)));
                    two_degree.push(TwoDegreeEntry {
                        w: (*w).clone(),
                        w_prime: (*wp).clone(),
                        value,
                    });
                }
            }
        }
    }
    let two_degree_max = two_degree
        .iter()
        .map(|t| &t.value)
        .max_by(|a, b| a.cmp_exact(b))
        .cloned();
    if two_degree_max.is_none() {
        undefined.push("two-degree".to_string());
    }
    Ok(PConditionsRow {
        vertices: v,
        edges: h.edge_count(),
        p_hat,
        p_hat_times_v,
        bounded_degree,
        bounded_degree_max,
        one_degree,
        one_degree_max,
        x,
        f_x_over_p_hat,
        two_degree,
        two_degree_max,
        undefined,
    })
}
