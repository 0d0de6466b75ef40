//! Exact integer matrices and everything computed from their column structure.

mod columns;
mod mparam;
mod rank;

pub use columns::{columns_condition, is_partition_regular, ColumnsConditionCertificate, Ring};
pub use mparam::{
    is_abundant, m_parameter, rank_profile, MCandidate, MParameter, RankProfile, RankProvider,
};
pub use rank::{
    image_size_in_group, is_prime, rank_group, rank_mod_p, rank_rational, smith_decomposition,
    smith_diagonal, solve_mod, solve_rational, SmithDecomposition,
};

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::group::FiniteAbelianGroup;

/// An exact `rows x cols` integer matrix; the system `Ax = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntegerMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntegerMatrix {
    pub fn new(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return Err(Error::Matrix("matrix needs at least one row".into()));
        }
        let c = rows[0].len();
        if c == 0 {
            return Err(Error::Matrix("matrix needs at least one column".into()));
        }
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != c) {
            return Err(Error::Matrix(format!(
                "row {} has {} entries, expected {c}",
                i + 1,
                row.len()
            )));
        }
        Ok(IntegerMatrix {
            rows: r,
            cols: c,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        Self::new(
            rows.iter()
                .map(|r| r.as_ref().iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
    }

    /// Single-row matrix, the common case of one linear equation.
    pub fn row(entries: &[i64]) -> Result<Self> {
        Self::from_rows(&[entries])
    }

    /// A matrix that may have zero columns; only used internally for `A_{W̄}`.
    pub(crate) fn from_raw(rows: usize, cols: usize, entries: Vec<BigInt>) -> Self {
        debug_assert_eq!(entries.len(), rows * cols);
        IntegerMatrix { rows, cols, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.cols + j]
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn row_vec(&self, i: usize) -> Vec<BigInt> {
        self.entries[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    /// Entries as `i64`; errors if any entry does not fit.
    pub fn to_i64_rows(&self) -> Result<Vec<Vec<i64>>> {
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| {
                        self.get(i, j)
                            .to_i64()
                            .ok_or_else(|| Error::Matrix("entry does not fit in 64 bits".into()))
                    })
                    .collect()
            })
            .collect()
    }

    /// `A_C`: the submatrix on the given column indices (0-based, in the given order).
    pub fn select_columns(&self, cols: &[usize]) -> IntegerMatrix {
        let mut entries = Vec::with_capacity(self.rows * cols.len());
        for i in 0..self.rows {
            for &j in cols {
                entries.push(self.get(i, j).clone());
            }
        }
        IntegerMatrix::from_raw(self.rows, cols.len(), entries)
    }

    /// `A_{W̄}`: the columns not in `w`.
    pub fn complement_columns(&self, w: &[usize]) -> IntegerMatrix {
        let rest: Vec<usize> = (0..self.cols).filter(|j| !w.contains(j)).collect();
        self.select_columns(&rest)
    }

    pub fn permute_columns(&self, perm: &[usize]) -> IntegerMatrix {
        self.select_columns(perm)
    }

    pub fn permute_rows(&self, perm: &[usize]) -> IntegerMatrix {
        let mut entries = Vec::with_capacity(self.entries.len());
        for &i in perm {
            entries.extend(self.row_vec(i));
        }
        IntegerMatrix::from_raw(self.rows, self.cols, entries)
    }

    pub fn row_sums(&self) -> Vec<BigInt> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j)).sum())
            .collect()
    }

    /// Whether `A(g,...,g)^T = 0` for every `g` in the group: each row sum is a
    /// multiple of the group's exponent.
    pub fn is_translation_invariant(&self, group: &FiniteAbelianGroup) -> bool {
        let s = BigInt::from(group.exponent());
        self.row_sums().iter().all(|r| r.mod_floor(&s).is_zero())
    }

    /// The `(k-2) x k` matrix whose `k`-distinct solutions are the `k`-term APs.
    pub fn ap_matrix(k: usize) -> Result<Self> {
        if k < 3 {
            return Err(Error::Invalid(format!("AP matrix needs k >= 3, got {k}")));
        }
        let rows: Vec<Vec<i64>> = (0..k - 2)
            .map(|i| {
                let mut row = vec![0i64; k];
                row[i] = 1;
                row[i + 1] = -2;
                row[i + 2] = 1;
                row
            })
            .collect();
        Self::from_rows(&rows)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }
}

impl fmt::Display for IntegerMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| self.get(i, j).to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        write!(f, "[{}]", rows.join("; "))
    }
}

impl Serialize for IntegerMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).to_string()).collect())
            .collect();
        rows.serialize(s)
    }
}

/// Text format: one row per line, whitespace-separated signed integers.
/// Blank lines and lines starting with `#` are ignored; `;` also separates rows.
impl FromStr for IntegerMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in s.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            for part in line.split(';') {
                let part = part.trim();
                if part.is_empty() {
                    continue;
                }
                let row = part
                    .split(|c: char| c.is_whitespace() || c == ',')
                    .filter(|t| !t.is_empty())
                    .map(|t| {
                        t.parse::<BigInt>().map_err(|_| {
                            Error::Parse(format!("line {}: bad integer {t:?}", lineno + 1))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                rows.push(row);
            }
        }
        IntegerMatrix::new(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_text_format() {
        let m: IntegerMatrix = "1 -2 1 0\n0 1 -2 1\n".parse().unwrap();
        assert_eq!(m, IntegerMatrix::ap_matrix(4).unwrap());
        let inline: IntegerMatrix = "1 1 -1".parse().unwrap();
        assert_eq!(inline.cols(), 3);
        assert!("1 2\n3".parse::<IntegerMatrix>().is_err());
        assert!("1 x".parse::<IntegerMatrix>().is_err());
        assert!("".parse::<IntegerMatrix>().is_err());
    }

    #[test]
    fn ap_matrix_examples() {
        assert_eq!(
            IntegerMatrix::ap_matrix(3).unwrap(),
            IntegerMatrix::row(&[1, -2, 1]).unwrap()
        );
        assert_eq!(
            IntegerMatrix::ap_matrix(4).unwrap(),
            IntegerMatrix::from_rows(&[[1, -2, 1, 0], [0, 1, -2, 1]]).unwrap()
        );
        assert!(IntegerMatrix::ap_matrix(2).is_err());
    }

    #[test]
    fn translation_invariance_examples() {
        let z2: FiniteAbelianGroup = "Z2".parse().unwrap();
        let z7: FiniteAbelianGroup = "Z7".parse().unwrap();
        let ap = IntegerMatrix::row(&[1, -2, 1]).unwrap();
        assert!(ap.is_translation_invariant(&z2));
        assert!(ap.is_translation_invariant(&z7));
        assert!(!IntegerMatrix::row(&[1, 1, -1]).unwrap().is_translation_invariant(&z2));
        assert!(IntegerMatrix::row(&[2, 2, -2]).unwrap().is_translation_invariant(&z2));
    }

    #[test]
    fn column_selection() {
        let m = IntegerMatrix::row(&[2, -2, 63, 65]).unwrap();
        assert_eq!(m.complement_columns(&[2, 3]), IntegerMatrix::row(&[2, -2]).unwrap());
        assert_eq!(m.complement_columns(&[0, 1, 2, 3]).cols(), 0);
    }
}
