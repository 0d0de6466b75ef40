//! Prime sieve and counts of arithmetic progressions inside the primes.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Default largest sieve bound.
pub const DEFAULT_SIEVE_LIMIT: u64 = 100_000_000;

/// Primality bitset for `0..=limit`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeTable {
    limit: u64,
    bits: Vec<u64>,
    count: usize,
}

impl PrimeTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn is_prime(&self, x: u64) -> bool {
        x <= self.limit && self.bits[(x / 64) as usize] >> (x % 64) & 1 == 1
    }

    /// Membership test for signed values, false outside `[0, limit]`.
    pub fn contains(&self, x: i64) -> bool {
        x >= 0 && self.is_prime(x as u64)
    }

    pub fn primes(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.count);
        for (w, &word) in self.bits.iter().enumerate() {
            let mut word = word;
            while word != 0 {
                let b = word.trailing_zeros() as u64;
                out.push(w as u64 * 64 + b);
                word &= word - 1;
            }
        }
        out
    }

    /// Writes the bitset as a little-endian `u64` limit followed by packed words.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(&self.limit.to_le_bytes())?;
        for word in &self.bits {
            w.write_all(&word.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let mut buf = [0u8; 8];
        r.read_exact(&mut buf)?;
        let limit = u64::from_le_bytes(buf);
        let words = (limit / 64 + 1) as usize;
        let mut bits = Vec::with_capacity(words);
        for _ in 0..words {
            r.read_exact(&mut buf)
                .map_err(|_| Error::Parse(format!("{}: truncated sieve cache", path.display())))?;
            bits.push(u64::from_le_bytes(buf));
        }
        let count = bits.iter().map(|w| w.count_ones() as usize).sum();
        Ok(PrimeTable { limit, bits, count })
    }
}

/// Sieve of Eratosthenes up to `n` inclusive.
pub fn sieve_primes(n: u64) -> Result<PrimeTable> {
    sieve_primes_with_limit(n, DEFAULT_SIEVE_LIMIT)
}

pub fn sieve_primes_with_limit(n: u64, max: u64) -> Result<PrimeTable> {
    if n < 2 {
        return Err(Error::Invalid(format!("sieve bound must be at least 2, got {n}")));
    }
    if n > max {
        return Err(Error::LimitExceeded {
            needed: n.to_string(),
            limit: max,
        });
    }
    let words = (n / 64 + 1) as usize;
    let mut bits = vec![u64::MAX; words];
    bits[0] &= !0b11;
    let tail = (n % 64) + 1;
    if tail < 64 {
        bits[words - 1] &= (1u64 << tail) - 1;
    }
    let mut i = 2u64;
    while i * i <= n {
        if bits[(i / 64) as usize] >> (i % 64) & 1 == 1 {
            let mut j = i * i;
            while j <= n {
                bits[(j / 64) as usize] &= !(1u64 << (j % 64));
                j += i;
            }
        }
        i += 1;
    }
    let count = bits.iter().map(|w| w.count_ones() as usize).sum();
    Ok(PrimeTable { limit: n, bits, count })
}

fn check_k(k: usize) -> Result<()> {
    if k < 3 {
        return Err(Error::Invalid(format!("progressions need k >= 3, got {k}")));
    }
    Ok(())
}

/// Calls `f` on every increasing `k`-AP of primes, given as `(first, difference)`,
/// grouped by first term. Pairs of primes fix the first two terms.
fn aps_from<F: FnMut(u64, u64)>(p: &PrimeTable, primes: &[u64], idx: usize, k: usize, mut f: F) {
    let a = primes[idx];
    for &b in &primes[idx + 1..] {
        let d = b - a;
        let last = a + (k as u64 - 1) * d;
        if last > p.limit {
            break;
        }
        if (2..k as u64).all(|i| p.is_prime(a + i * d)) {
            f(a, d);
        }
    }
}

/// Every increasing `k`-AP of primes as `(first, difference)`, sorted.
pub fn list_k_aps(p: &PrimeTable, k: usize) -> Result<Vec<(u64, u64)>> {
    check_k(k)?;
    let primes = p.primes();
    Ok((0..primes.len())
        .into_par_iter()
        .map(|i| {
            let mut v = Vec::new();
            aps_from(p, &primes, i, k, |a, d| v.push((a, d)));
            v
        })
        .flatten()
        .collect())
}

/// Number of increasing `k`-term progressions (difference at least 1) in the table.
pub fn count_k_aps(p: &PrimeTable, k: usize) -> Result<u64> {
    check_k(k)?;
    let primes = p.primes();
    Ok((0..primes.len())
        .into_par_iter()
        .map(|i| {
            let mut c = 0u64;
            aps_from(p, &primes, i, k, |_, _| c += 1);
            c
        })
        .sum())
}

/// Number of increasing `k`-APs whose `l`-th term (1-based) is `q`.
pub fn count_k_aps_through(p: &PrimeTable, q: u64, l: usize, k: usize) -> Result<u64> {
    check_k(k)?;
    if l == 0 || l > k {
        return Err(Error::Invalid(format!("position {l} outside 1..={k}")));
    }
    if !p.is_prime(q) {
        return Err(Error::Invalid(format!("{q} is not a prime at most {}", p.limit)));
    }
    let before = l as u64 - 1;
    let after = (k - l) as u64;
    let mut count = 0;
    let mut d = 1u64;
    // Every term is at least 2, so the first term bounds d from one side and the last from the other.
    while before * d + 2 <= q && q + after * d <= p.limit {
        let first = q - before * d;
        if (0..k as u64).all(|i| p.is_prime(first + i * d)) {
            count += 1;
        }
        d += 1;
    }
    Ok(count)
}

/// For each position `l` in `1..=k`, the number of `k`-APs through each integer at that position.
pub fn through_counts(p: &PrimeTable, k: usize) -> Result<Vec<Vec<u32>>> {
    let aps = list_k_aps(p, k)?;
    let n = p.limit as usize + 1;
    let mut counts = vec![vec![0u32; n]; k];
    for (a, d) in aps {
        for (i, row) in counts.iter_mut().enumerate() {
            row[(a + i as u64 * d) as usize] += 1;
        }
    }
    Ok(counts)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApDensityRow {
    pub n: u64,
    pub count: u64,
    /// `count * ln(n)^k / n^2`.
    pub count_ratio: f64,
    pub max_through: u64,
    pub max_through_prime: u64,
    pub max_through_position: usize,
    /// `max_through * ln(n)^(k-1) / n`.
    pub through_ratio: f64,
}

/// Raw AP counts and the two normalized ratios for each `n`.
pub fn ap_density_report(k: usize, n_values: &[u64]) -> Result<Vec<ApDensityRow>> {
    check_k(k)?;
    n_values
        .iter()
        .map(|&n| {
            let p = sieve_primes(n)?;
            let counts = through_counts(&p, k)?;
            let count = counts[0].iter().map(|&c| c as u64).sum::<u64>();
            let (mut best, mut best_q, mut best_l) = (0u64, 0u64, 1usize);
            for (l, row) in counts.iter().enumerate() {
                for (q, &c) in row.iter().enumerate() {
                    if c as u64 > best {
                        (best, best_q, best_l) = (c as u64, q as u64, l + 1);
                    }
                }
            }
            let ln = (n as f64).ln();
            Ok(ApDensityRow {
                n,
                count,
                count_ratio: count as f64 * ln.powi(k as i32) / (n as f64).powi(2),
                max_through: best,
                max_through_prime: best_q,
                max_through_position: best_l,
                through_ratio: best as f64 * ln.powi(k as i32 - 1) / n as f64,
            })
        })
        .collect()
}
