use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::IntegerMatrix;
use crate::error::{Error, Result};
use crate::exact::ExactLogValue;
use crate::group::FiniteAbelianGroup;

fn to_dense(a: &IntegerMatrix) -> Vec<Vec<BigInt>> {
    (0..a.rows()).map(|i| a.row_vec(i)).collect()
}

/// Rank over the rationals by fraction-free (Bareiss) elimination.
pub fn rank_rational(a: &IntegerMatrix) -> usize {
    if a.cols() == 0 {
        return 0;
    }
    let mut m = to_dense(a);
    let (rows, cols) = (a.rows(), a.cols());
    let mut prev = BigInt::one();
    let mut rank = 0;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let Some(piv) = (rank..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(rank, piv);
        for i in rank + 1..rows {
            for j in c + 1..cols {
                let v = (&m[rank][c] * &m[i][j] - &m[i][c] * &m[rank][j]) / &prev;
                m[i][j] = v;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[rank][c].clone();
        rank += 1;
    }
    rank
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Rank over the field `Z_p`.
pub fn rank_mod_p(a: &IntegerMatrix, p: u64) -> Result<usize> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let pb = BigInt::from(p);
    let mut m: Vec<Vec<u64>> = (0..a.rows())
        .map(|i| {
            (0..a.cols())
                .map(|j| a.get(i, j).mod_floor(&pb).to_u64().unwrap())
                .collect()
        })
        .collect();
    let (rows, cols) = (a.rows(), a.cols());
    let mut rank = 0;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let Some(piv) = (rank..rows).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = pow_mod(m[rank][c], p - 2, p);
        for j in c..cols {
            m[rank][j] = mul_mod(m[rank][j], inv, p);
        }
        for i in rank + 1..rows {
            let f = m[i][c];
            if f == 0 {
                continue;
            }
            for j in c..cols {
                let sub = mul_mod(f, m[rank][j], p);
                m[i][j] = (m[i][j] + p - sub) % p;
            }
        }
        rank += 1;
    }
    Ok(rank)
}

/// `P * A * Q = D` with `P`, `Q` unimodular and `D` in Smith normal form.
#[derive(Clone, Debug)]
pub struct SmithDecomposition {
    /// Diagonal of `D`, length `min(rows, cols)`, nonnegative, each dividing the next.
    pub diagonal: Vec<BigInt>,
    pub p: Vec<Vec<BigInt>>,
    pub q: Vec<Vec<BigInt>>,
}

fn identity(n: usize) -> Vec<Vec<BigInt>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect()
}

fn row_axpy(m: &mut [Vec<BigInt>], dst: usize, src: usize, f: &BigInt) {
    if f.is_zero() {
        return;
    }
    let (s, d) = if src < dst {
        let (lo, hi) = m.split_at_mut(dst);
        (&lo[src], &mut hi[0])
    } else {
        let (lo, hi) = m.split_at_mut(src);
        (&hi[0], &mut lo[dst])
    };
    for (x, y) in d.iter_mut().zip(s.iter()) {
        *x -= f * y;
    }
}

fn col_axpy(m: &mut [Vec<BigInt>], dst: usize, src: usize, f: &BigInt) {
    if f.is_zero() {
        return;
    }
    for row in m.iter_mut() {
        let v = f * &row[src];
        row[dst] -= v;
    }
}

fn col_swap(m: &mut [Vec<BigInt>], a: usize, b: usize) {
    for row in m.iter_mut() {
        row.swap(a, b);
    }
}

pub fn smith_decomposition(a: &IntegerMatrix) -> SmithDecomposition {
    let (rows, cols) = (a.rows(), a.cols());
    let mut d = to_dense(a);
    let mut p = identity(rows);
    let mut q = identity(cols);
    let n = rows.min(cols);
    for t in 0..n {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if !d[i][j].is_zero()
                        && best.is_none_or(|(bi, bj)| d[i][j].abs() < d[bi][bj].abs())
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else {
                return finish(d, p, q, n);
            };
            d.swap(t, bi);
            p.swap(t, bi);
            col_swap(&mut d, t, bj);
            col_swap(&mut q, t, bj);

            let mut clean = true;
            for i in t + 1..rows {
                let f = d[i][t].div_floor(&d[t][t]);
                row_axpy(&mut d, i, t, &f);
                row_axpy(&mut p, i, t, &f);
                clean &= d[i][t].is_zero();
            }
            for j in t + 1..cols {
                let f = d[t][j].div_floor(&d[t][t]);
                col_axpy(&mut d, j, t, &f);
                col_axpy(&mut q, j, t, &f);
                clean &= d[t][j].is_zero();
            }
            if !clean {
                continue;
            }
            let bad = (t + 1..rows).find(|&i| {
                (t + 1..cols).any(|j| !d[i][j].mod_floor(&d[t][t]).is_zero())
            });
            match bad {
                Some(i) => {
                    let m1 = -BigInt::one();
                    row_axpy(&mut d, t, i, &m1);
                    row_axpy(&mut p, t, i, &m1);
                }
                None => break,
            }
        }
        if d[t][t].is_negative() {
            for x in d[t].iter_mut() {
                *x = -&*x;
            }
            for x in p[t].iter_mut() {
                *x = -&*x;
            }
        }
    }
    finish(d, p, q, n)
}

fn finish(
    d: Vec<Vec<BigInt>>,
    p: Vec<Vec<BigInt>>,
    q: Vec<Vec<BigInt>>,
    n: usize,
) -> SmithDecomposition {
    let diagonal = (0..n).map(|i| d[i][i].abs()).collect();
    SmithDecomposition { diagonal, p, q }
}

/// Elementary divisors of `A`, padded with zeros to `min(rows, cols)`.
pub fn smith_diagonal(a: &IntegerMatrix) -> Vec<BigInt> {
    smith_decomposition(a).diagonal
}

/// `|im(x -> Ax)|` for `x` ranging over `G^k`.
pub fn image_size_in_group(a: &IntegerMatrix, group: &FiniteAbelianGroup) -> BigUint {
    if a.cols() == 0 {
        return BigUint::one();
    }
    let diag = smith_diagonal(a);
    let mut base = BigUint::one();
    for &m in group.base_moduli() {
        let mb = BigInt::from(m);
        for d in &diag {
            let g = d.gcd(&mb);
            base *= (&mb / g).magnitude();
        }
    }
    base.pow(group.power())
}

/// `rank_G(A) = log_{|G|} |im f_A|`; zero for the trivial group.
pub fn rank_group(a: &IntegerMatrix, group: &FiniteAbelianGroup) -> ExactLogValue {
    ExactLogValue::new(image_size_in_group(a, group), group.order())
}

/// Solves `Ax = b` over the rationals; returns one solution if the system is consistent.
pub fn solve_rational(a: &IntegerMatrix, b: &[BigInt]) -> Option<Vec<BigRational>> {
    let (rows, cols) = (a.rows(), a.cols());
    let mut m: Vec<Vec<BigRational>> = (0..rows)
        .map(|i| {
            let mut r: Vec<BigRational> = (0..cols)
                .map(|j| BigRational::from(a.get(i, j).clone()))
                .collect();
            r.push(BigRational::from(b[i].clone()));
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = m[rank][c].recip();
        for x in m[rank].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != rank && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..=cols {
                    let v = &f * &m[rank][j];
                    m[i][j] -= v;
                }
            }
        }
        pivots.push(c);
        rank += 1;
        if rank == rows {
            break;
        }
    }
    if (rank..rows).any(|i| !m[i][cols].is_zero()) {
        return None;
    }
    let mut x = vec![BigRational::zero(); cols];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = m[r][cols].clone();
    }
    Some(x)
}

/// Solves `Ax = b` over `Z_s`; returns a solution with entries in `[0, s)`.
pub fn solve_mod(a: &IntegerMatrix, b: &[BigInt], s: u64) -> Option<Vec<BigInt>> {
    let (rows, cols) = (a.rows(), a.cols());
    let sb = BigInt::from(s);
    // [A | sI] z = b over the integers.
    let mut entries = Vec::with_capacity(rows * (cols + rows));
    for i in 0..rows {
        for j in 0..cols {
            entries.push(a.get(i, j).clone());
        }
        for j in 0..rows {
            entries.push(if i == j { sb.clone() } else { BigInt::zero() });
        }
    }
    let ext = IntegerMatrix::from_raw(rows, cols + rows, entries);
    let sd = smith_decomposition(&ext);
    let pb: Vec<BigInt> = sd
        .p
        .iter()
        .map(|row| row.iter().zip(b).map(|(x, y)| x * y).sum())
        .collect();
    let mut y = vec![BigInt::zero(); cols + rows];
    for i in 0..rows {
        let d = sd.diagonal.get(i).cloned().unwrap_or_default();
        if d.is_zero() {
            if !pb[i].is_zero() {
                return None;
            }
        } else {
            let (qt, r) = pb[i].div_rem(&d);
            if !r.is_zero() {
                return None;
            }
            y[i] = qt;
        }
    }
    let x = (0..cols)
        .map(|i| {
            let v: BigInt = sd.q[i].iter().zip(&y).map(|(q, y)| q * y).sum();
            v.mod_floor(&sb)
        })
        .collect();
    Some(x)
}
