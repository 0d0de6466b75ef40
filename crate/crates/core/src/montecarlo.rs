//! Random subsets, Rado-probability estimates, threshold location and the
//! second moment of progression counts in random sets of primes.
//!
//! Trial `i` under master seed `s` draws from the ChaCha8 stream `(s, i)`, so
//! results do not depend on scheduling, and the sample at a larger `p`
//! contains the sample at a smaller one.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::coloring::{find_proper_coloring, SearchBudget, Verdict};
use crate::error::{Error, Result};
use crate::ground::GroundSet;
use crate::hypergraph::from_solutions;
use crate::matrix::{m_parameter, IntegerMatrix};
use crate::primes::{list_k_aps, sieve_primes};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Points whose unknown rate exceeds this are not used for threshold location.
pub const MAX_UNKNOWN_RATE: f64 = 0.05;

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn keep_mask(len: usize, p: f64, seed: u64, trial: u64) -> Vec<bool> {
    let mut rng = trial_rng(seed, trial);
    (0..len).map(|_| rng.random::<f64>() < p).collect()
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Invalid(format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

/// `S_p`: each element kept independently with probability `p`.
pub fn sample_subset(s: &GroundSet, p: f64, seed: u64, trial: u64) -> Result<GroundSet> {
    check_p(p)?;
    let els = s.elements()?;
    let keep = keep_mask(els.len(), p, seed, trial);
    let idx: Vec<u32> = (0..els.len() as u32).filter(|&i| keep[i as usize]).collect();
    Ok(GroundSet::from_elements(els.subset(&idx)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialVerdict {
    Rado,
    NotRado,
    Unknown,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub trial: u64,
    pub p: f64,
    pub size: usize,
    pub verdict: TrialVerdict,
    pub millis: u128,
}

/// Wilson score interval at 95%.
pub fn wilson_interval(successes: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let phat = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (phat + z2 / (2.0 * n)) / denom;
    let half = Z95 * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes as f64 == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

#[derive(Clone, Debug, Serialize)]
pub struct Estimate {
    pub size: usize,
    pub p: f64,
    pub trials: u64,
    pub successes: u64,
    pub unknowns: u64,
    /// Successes over decided trials; unknowns are excluded.
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub unknown_rate: f64,
    pub seed: u64,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

impl Estimate {
    pub const CSV_HEADER: &'static str = "n,p,trials,successes,unknowns,ci_lo,ci_hi,seed";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.6},{:.6},{}",
            self.size, self.p, self.trials, self.successes, self.unknowns, self.ci_lo, self.ci_hi, self.seed
        )
    }
}

fn run_trial(a: &IntegerMatrix, s: &GroundSet, r: u32, p: f64, seed: u64, trial: u64, budget: SearchBudget) -> TrialRecord {
    let start = Instant::now();
    let outcome = sample_subset(s, p, seed, trial).and_then(|sub| {
        let size = sub.elements()?.len();
        let h = from_solutions(a, &sub)?;
        Ok((size, find_proper_coloring(&h, r, budget).verdict))
    });
    let (size, verdict) = match outcome {
        Ok((size, Verdict::Ramsey)) => (size, TrialVerdict::Rado),
        Ok((size, Verdict::NotRamsey)) => (size, TrialVerdict::NotRado),
        Ok((size, Verdict::Unknown)) => (size, TrialVerdict::Unknown),
        Err(_) => (0, TrialVerdict::Unknown),
    };
    TrialRecord {
        seed,
        trial,
        p,
        size,
        verdict,
        millis: start.elapsed().as_millis(),
    }
}

/// Fraction of `trials` random subsets `S_p` that are `(A, r)`-Rado.
pub fn estimate_rado_prob(
    a: &IntegerMatrix,
    s: &GroundSet,
    r: u32,
    p: f64,
    trials: u64,
    seed: u64,
    budget: SearchBudget,
) -> Result<Estimate> {
    check_p(p)?;
    if trials == 0 {
        return Err(Error::Invalid("at least one trial is needed".into()));
    }
    if r == 0 {
        return Err(Error::Invalid("at least one color is needed".into()));
    }
    let size = s.elements()?.len();
    let records: Vec<TrialRecord> = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(a, s, r, p, seed, t, budget))
        .collect();
    let successes = records.iter().filter(|t| t.verdict == TrialVerdict::Rado).count() as u64;
    let unknowns = records.iter().filter(|t| t.verdict == TrialVerdict::Unknown).count() as u64;
    let decided = trials - unknowns;
    let (ci_lo, ci_hi) = wilson_interval(successes, decided);
    Ok(Estimate {
        size,
        p,
        trials,
        successes,
        unknowns,
        estimate: if decided == 0 { f64::NAN } else { successes as f64 / decided as f64 },
        ci_lo,
        ci_hi,
        unknown_rate: unknowns as f64 / trials as f64,
        seed,
        records,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ThresholdPoint {
    pub size: usize,
    /// Crossing of one half, interpolated in `log p` between the final bracket.
    pub p_half: Option<f64>,
    /// Largest evaluated `p` whose interval lies below one half (0 if none)
    /// and smallest whose interval lies above (1 if none).
    pub ci: (f64, f64),
    pub reference: Option<f64>,
    pub evaluations: Vec<Estimate>,
    pub error: Option<String>,
}

impl ThresholdPoint {
    /// Usable for the slope: located, and its interval excludes 0 and 1.
    pub fn usable(&self) -> bool {
        self.p_half.is_some() && self.ci.0 > 0.0 && self.ci.1 < 1.0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ThresholdFit {
    pub points: Vec<ThresholdPoint>,
    pub slope: Option<f64>,
    pub slope_se: Option<f64>,
    pub intercept: Option<f64>,
    /// `-1/m_S(A)` for the first member.
    pub reference_slope: Option<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct BisectionOptions {
    /// Stop once the bracket ratio is at most this.
    pub ratio: f64,
    pub max_evaluations: usize,
}

impl Default for BisectionOptions {
    fn default() -> Self {
        BisectionOptions {
            ratio: 1.2,
            max_evaluations: 40,
        }
    }
}

struct Bisection<'a> {
    member: usize,
    a: &'a IntegerMatrix,
    s: &'a GroundSet,
    r: u32,
    trials: u64,
    seed: u64,
    budget: SearchBudget,
    evaluations: Vec<Estimate>,
    max: usize,
}

impl Bisection<'_> {
    fn eval(&mut self, p: f64) -> Result<f64> {
        if let Some(e) = self.evaluations.iter().find(|e| e.p == p) {
            return Ok(e.estimate);
        }
        if self.evaluations.len() >= self.max {
            return Err(Error::Bisection {
                member: self.member,
                reason: format!("no bracket within {} evaluations", self.max),
            });
        }
        let e = estimate_rado_prob(self.a, self.s, self.r, p, self.trials, self.seed, self.budget)?;
        if e.unknown_rate > MAX_UNKNOWN_RATE {
            return Err(Error::Bisection {
                member: self.member,
                reason: format!("unknown rate {:.3} at p = {p}", e.unknown_rate),
            });
        }
        let est = e.estimate;
        self.evaluations.push(e);
        Ok(est)
    }

    fn ci(&self) -> (f64, f64) {
        let lo = self
            .evaluations
            .iter()
            .filter(|e| e.ci_hi < 0.5)
            .map(|e| e.p)
            .fold(0.0, f64::max);
        let hi = self
            .evaluations
            .iter()
            .filter(|e| e.ci_lo > 0.5)
            .map(|e| e.p)
            .fold(1.0, f64::min);
        (lo, hi)
    }
}

fn locate(b: &mut Bisection<'_>, guess: f64, opts: BisectionOptions) -> Result<(f64, (f64, f64))> {
    let n = b.s.elements()?.len().max(1) as f64;
    let floor = 1.0 / (16.0 * n);
    let (mut lo, mut hi);
    let mut p = guess.clamp(floor, 1.0);
    if b.eval(p)? >= 0.5 {
        hi = p;
        loop {
            p /= 2.0;
            if p < floor {
                return Err(Error::Bisection {
                    member: b.member,
                    reason: "estimate stays at least 1/2 for tiny p".into(),
                });
            }
            if b.eval(p)? < 0.5 {
                lo = p;
                break;
            }
            hi = p;
        }
    } else {
        lo = p;
        loop {
            if p >= 1.0 {
                return Err(Error::Bisection {
                    member: b.member,
                    reason: "estimate stays below 1/2 up to p = 1".into(),
                });
            }
            p = (p * 2.0).min(1.0);
            if b.eval(p)? >= 0.5 {
                hi = p;
                break;
            }
            lo = p;
        }
    }
    while hi / lo > opts.ratio {
        let mid = (lo * hi).sqrt();
        if b.eval(mid)? >= 0.5 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // Widen until the evaluated points bound the crossing on both sides.
    let (mut down, mut up) = (lo, hi);
    for _ in 0..6 {
        let (cl, ch) = b.ci();
        if cl > 0.0 && ch < 1.0 {
            break;
        }
        if cl == 0.0 {
            down /= opts.ratio;
            b.eval(down)?;
        }
        if ch == 1.0 && up < 1.0 {
            up = (up * opts.ratio).min(1.0);
            b.eval(up)?;
        }
    }
    let est = |p: f64| b.evaluations.iter().find(|e| e.p == p).unwrap().estimate;
    let (el, eh) = (est(lo), est(hi));
    let t = if eh > el { (0.5 - el) / (eh - el) } else { 0.5 };
    let p_half = (lo.ln() + t * (hi.ln() - lo.ln())).exp();
    Ok((p_half, b.ci()))
}

/// `p_half` for each member by bisection in `log p`, and the least-squares
/// slope of `log p_half` against `log |S|`.
pub fn threshold_fit(
    a: &IntegerMatrix,
    family: &[GroundSet],
    r: u32,
    trials: u64,
    seed: u64,
    budget: SearchBudget,
    opts: BisectionOptions,
) -> Result<ThresholdFit> {
    if family.len() < 3 {
        return Err(Error::Invalid(format!(
            "a threshold fit needs at least 3 ground sets, got {}",
            family.len()
        )));
    }
    let mut points = Vec::new();
    for (member, s) in family.iter().enumerate() {
        let size = s.elements()?.len();
        let reference = s
            .rank_provider()
            .and_then(|rp| m_parameter(a, &rp))
            .ok()
            .map(|m| m.to_f64())
            .filter(|m| m.is_finite() && *m > 0.0)
            .map(|m| -1.0 / m);
        let guess = (size.max(2) as f64).powf(reference.unwrap_or(-0.5));
        let mut b = Bisection {
            member,
            a,
            s,
            r,
            trials,
            seed,
            budget,
            evaluations: Vec::new(),
            max: opts.max_evaluations,
        };
        let (p_half, ci, error) = match locate(&mut b, guess, opts) {
            Ok((p, ci)) => (Some(p), ci, None),
            Err(e) => (None, b.ci(), Some(e.to_string())),
        };
        let mut evaluations = b.evaluations;
        evaluations.sort_by(|x, y| x.p.total_cmp(&y.p));
        points.push(ThresholdPoint {
            size,
            p_half,
            ci,
            reference,
            evaluations,
            error,
        });
    }
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter(|pt| pt.usable())
        .map(|pt| ((pt.size as f64).ln(), pt.p_half.unwrap().ln()))
        .collect();
    let (slope, intercept, slope_se) = match least_squares(&xy) {
        Some((b, c, se)) => (Some(b), Some(c), se),
        None => (None, None, None),
    };
    Ok(ThresholdFit {
        reference_slope: points[0].reference,
        points,
        slope,
        slope_se,
        intercept,
    })
}

/// Slope, intercept and the slope's standard error (when there are at least three points).
pub fn least_squares(xy: &[(f64, f64)]) -> Option<(f64, f64, Option<f64>)> {
    let n = xy.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let b = sxy / sxx;
    let c = my - b * mx;
    let se = (n > 2).then(|| {
        let ssr: f64 = xy.iter().map(|p| (p.1 - c - b * p.0).powi(2)).sum();
        (ssr / (nf - 2.0) / sxx).sqrt()
    });
    Some((b, c, se))
}

#[derive(Clone, Debug, Serialize)]
pub struct SecondMoment {
    pub n: u64,
    pub k: usize,
    pub p: f64,
    pub aps: u64,
    /// `#k-APs · p^k`.
    pub expectation: f64,
    /// `shared[t]`: unordered pairs of distinct APs with exactly `t` common
    /// elements, for `t` in `0..k` (entry 0 is unused and left at 0).
    pub shared: Vec<u64>,
    /// Pairs sharing exactly one element, and at least two.
    pub pairs_one: u64,
    pub pairs_two_plus: u64,
    /// `Σ E[X_i X_j]` over intersecting ordered pairs, including `i = j`.
    pub variance_bound: f64,
    pub trials: u64,
    pub seed: u64,
    pub simulated_mean: f64,
    pub simulated_variance: f64,
    pub standard_error: f64,
}

/// Exact mean, overlap counts and simulated mean of the number of `k`-APs in
/// a `p`-random subset of the primes up to `n`.
pub fn ap_second_moment(n: u64, k: usize, p: f64, trials: u64, seed: u64) -> Result<SecondMoment> {
    check_p(p)?;
    if k < 3 {
        return Err(Error::Invalid("progressions need k >= 3".into()));
    }
    let table = sieve_primes(n)?;
    let aps = list_k_aps(&table, k)?;
    let primes = table.primes();
    let mut index = vec![u32::MAX; n as usize + 1];
    for (i, &q) in primes.iter().enumerate() {
        index[q as usize] = i as u32;
    }
    let members: Vec<Vec<u32>> = aps
        .iter()
        .map(|&(a, d)| (0..k as u64).map(|i| index[(a + i * d) as usize]).collect())
        .collect();
    let mut through: Vec<Vec<u32>> = vec![Vec::new(); primes.len()];
    for (i, m) in members.iter().enumerate() {
        for &x in m {
            through[x as usize].push(i as u32);
        }
    }
    // Each pair is counted at its smallest common element.
    let shared = members
        .par_iter()
        .enumerate()
        .map(|(i, m)| {
            let mut local = vec![0u64; k];
            for &x in m {
                for &j in &through[x as usize] {
                    if j as usize <= i {
                        continue;
                    }
                    let other = &members[j as usize];
                    let common: Vec<u32> = m.iter().copied().filter(|y| other.contains(y)).collect();
                    if common.iter().min() == Some(&x) {
                        local[common.len()] += 1;
                    }
                }
            }
            local
        })
        .reduce(|| vec![0u64; k], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect());
    let count = aps.len() as u64;
    let expectation = count as f64 * p.powi(k as i32);
    let mut variance_bound = expectation;
    for (t, &c) in shared.iter().enumerate().skip(1) {
        variance_bound += 2.0 * c as f64 * p.powi(2 * k as i32 - t as i32);
    }
    let counts: Vec<u64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let keep = keep_mask(primes.len(), p, seed, t);
            members
                .iter()
                .filter(|m| m.iter().all(|&x| keep[x as usize]))
                .count() as u64
        })
        .collect();
    let tf = trials.max(1) as f64;
    let mean = counts.iter().sum::<u64>() as f64 / tf;
    let var = if trials > 1 {
        counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (tf - 1.0)
    } else {
        0.0
    };
    Ok(SecondMoment {
        n,
        k,
        p,
        aps: count,
        expectation,
        pairs_one: shared[1],
        pairs_two_plus: shared[2..].iter().sum(),
        shared,
        variance_bound,
        trials,
        seed,
        simulated_mean: if trials == 0 { f64::NAN } else { mean },
        simulated_variance: var,
        standard_error: (var / tf).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primes::count_k_aps;

    fn schur() -> IntegerMatrix {
        IntegerMatrix::row(&[1, 1, -1]).unwrap()
    }

    #[test]
    fn sampling_edges() {
        let s = GroundSet::interval(50).unwrap();
        assert_eq!(sample_subset(&s, 0.0, 1, 0).unwrap().elements().unwrap().len(), 0);
        assert_eq!(sample_subset(&s, 1.0, 1, 0).unwrap().elements().unwrap().len(), 50);
        let a = sample_subset(&s, 0.3, 9, 4).unwrap().elements().unwrap();
        let b = sample_subset(&s, 0.3, 9, 4).unwrap().elements().unwrap();
        assert_eq!(a.iter().collect::<Vec<_>>(), b.iter().collect::<Vec<_>>());
        let c = sample_subset(&s, 0.3, 9, 5).unwrap().elements().unwrap();
        assert_ne!(a.iter().collect::<Vec<_>>(), c.iter().collect::<Vec<_>>());
        assert!(sample_subset(&s, 1.5, 0, 0).is_err());
    }

    #[test]
    fn samples_are_nested_in_p() {
        let s = GroundSet::interval(200).unwrap();
        for t in 0..5 {
            let small = sample_subset(&s, 0.2, 3, t).unwrap().elements().unwrap();
            let big = sample_subset(&s, 0.5, 3, t).unwrap().elements().unwrap();
            assert!(small.iter().all(|x| big.position(x).is_some()));
        }
    }

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3);
        assert_eq!(wilson_interval(0, 10).0, 0.0);
        assert_eq!(wilson_interval(10, 10).1, 1.0);
    }

    #[test]
    fn estimate_examples() {
        let b = SearchBudget::default();
        let s9 = GroundSet::interval(9).unwrap();
        let e = estimate_rado_prob(&schur(), &s9, 2, 1.0, 20, 7, b).unwrap();
        assert_eq!((e.estimate, e.unknowns), (1.0, 0));
        let e = estimate_rado_prob(&schur(), &s9, 2, 0.0, 20, 7, b).unwrap();
        assert_eq!(e.estimate, 0.0);
        let s = GroundSet::interval(40).unwrap();
        let x = estimate_rado_prob(&schur(), &s, 2, 0.5, 64, 11, b).unwrap();
        let y = estimate_rado_prob(&schur(), &s, 2, 0.5, 64, 11, b).unwrap();
        assert_eq!(x.csv_row(), y.csv_row());
        let verdicts = |e: &Estimate| e.records.iter().map(|t| t.verdict).collect::<Vec<_>>();
        assert_eq!(verdicts(&x), verdicts(&y));
    }

    #[test]
    fn estimates_are_monotone_under_common_numbers() {
        let b = SearchBudget::default();
        let s = GroundSet::interval(60).unwrap();
        let ps = [0.1, 0.2, 0.3, 0.45, 0.6];
        let est: Vec<u64> = ps
            .iter()
            .map(|&p| estimate_rado_prob(&schur(), &s, 2, p, 50, 5, b).unwrap().successes)
            .collect();
        assert!(est.windows(2).all(|w| w[0] <= w[1]), "{est:?}");
    }

    #[test]
    fn fit_needs_three_members() {
        let f = vec![GroundSet::interval(30).unwrap()];
        let e = threshold_fit(&schur(), &f, 2, 10, 1, SearchBudget::default(), BisectionOptions::default());
        assert!(e.is_err());
    }

    #[test]
    fn small_fit_runs() {
        let f: Vec<GroundSet> = [64, 128, 256].iter().map(|&n| GroundSet::interval(n).unwrap()).collect();
        let fit = threshold_fit(&schur(), &f, 2, 60, 3, SearchBudget::default(), BisectionOptions::default()).unwrap();
        for pt in &fit.points {
            assert!(pt.error.is_none(), "{:?}", pt.error);
            let p = pt.p_half.unwrap();
            assert!(pt.ci.0 <= p && p <= pt.ci.1);
        }
        assert_eq!(fit.reference_slope, Some(-0.5));
        assert!(fit.slope.unwrap() < 0.0);
    }

    #[test]
    fn least_squares_line() {
        let (b, c, se) = least_squares(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)]).unwrap();
        assert!((b - 2.0).abs() < 1e-12 && (c - 1.0).abs() < 1e-12 && se.unwrap() < 1e-9);
        assert!(least_squares(&[(1.0, 1.0)]).is_none());
    }

    /// Overlap counts against a plain double loop over all pairs.
    #[test]
    fn second_moment_small() {
        let m = ap_second_moment(20, 3, 1.0, 5, 1).unwrap();
        assert_eq!((m.aps, m.expectation, m.simulated_mean), (5, 5.0, 5.0));
        let z = ap_second_moment(20, 3, 0.0, 5, 1).unwrap();
        assert_eq!(z.expectation, 0.0);
        for (n, k) in [(200u64, 3usize), (300, 4)] {
            let t = sieve_primes(n).unwrap();
            let aps = list_k_aps(&t, k).unwrap();
            let sets: Vec<Vec<u64>> = aps.iter().map(|&(a, d)| (0..k as u64).map(|i| a + i * d).collect()).collect();
            let mut shared = vec![0u64; k];
            for i in 0..sets.len() {
                for j in i + 1..sets.len() {
                    let c = sets[i].iter().filter(|x| sets[j].contains(x)).count();
                    if c > 0 {
                        shared[c] += 1;
                    }
                }
            }
            let m = ap_second_moment(n, k, 0.5, 0, 0).unwrap();
            assert_eq!(m.shared, shared);
            assert_eq!(m.aps, count_k_aps(&t, k).unwrap());
            assert_eq!(m.expectation, m.aps as f64 * 0.5f64.powi(k as i32));
        }
    }
}
