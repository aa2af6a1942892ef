use nalgebra::DMatrix;
use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// JSON form of a transition matrix: `{"dim": d, "rows": [[0|1, ...], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    pub dim: usize,
    pub rows: Vec<Vec<u8>>,
}

/// A primitive square {0,1} matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionMatrix {
    dim: usize,
    entries: Vec<u8>,
    successors: Vec<Vec<usize>>,
    predecessors: Vec<Vec<usize>>,
    primitivity_exponent: usize,
}

impl TransitionMatrix {
    pub fn new(rows: Vec<Vec<u8>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::InvalidMatrix("empty matrix".into()));
        }
        if dim > 256 {
            return Err(Error::InvalidMatrix(format!("dimension {} exceeds 256", dim)));
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::InvalidMatrix(format!(
                    "row {} has length {}, expected {}",
                    i + 1,
                    row.len(),
                    dim
                )));
            }
            for (j, &e) in row.iter().enumerate() {
                if e > 1 {
                    return Err(Error::InvalidMatrix(format!(
                        "entry ({}, {}) is {}, expected 0 or 1",
                        i + 1,
                        j + 1,
                        e
                    )));
                }
                entries.push(e);
            }
        }
        let successors: Vec<Vec<usize>> = (0..dim)
            .map(|i| (0..dim).filter(|&j| entries[i * dim + j] == 1).collect())
            .collect();
        let predecessors: Vec<Vec<usize>> = (0..dim)
            .map(|j| (0..dim).filter(|&i| entries[i * dim + j] == 1).collect())
            .collect();
        if let Some(i) = successors.iter().position(|s| s.is_empty()) {
            return Err(Error::InvalidMatrix(format!("row {} is zero", i + 1)));
        }
        if let Some(j) = predecessors.iter().position(|p| p.is_empty()) {
            return Err(Error::InvalidMatrix(format!("column {} is zero", j + 1)));
        }
        let primitivity_exponent = primitivity_exponent(dim, &entries)?;
        Ok(TransitionMatrix {
            dim,
            entries,
            successors,
            predecessors,
            primitivity_exponent,
        })
    }

    pub fn from_spec(spec: &MatrixSpec) -> Result<Self> {
        if spec.rows.len() != spec.dim {
            return Err(Error::InvalidMatrix(format!(
                "dim is {} but {} rows given",
                spec.dim,
                spec.rows.len()
            )));
        }
        Self::new(spec.rows.clone())
    }

    pub fn to_spec(&self) -> MatrixSpec {
        MatrixSpec {
            dim: self.dim,
            rows: self.rows(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Entry in 0-based row `i`, column `j`.
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.entries[i * self.dim + j] == 1
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        self.entries.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    /// Allowed successors of `i`, ascending.
    pub fn successors(&self, i: usize) -> &[usize] {
        &self.successors[i]
    }

    pub fn predecessors(&self, j: usize) -> &[usize] {
        &self.predecessors[j]
    }

    pub fn max_out_degree(&self) -> usize {
        self.successors.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn max_in_degree(&self) -> usize {
        self.predecessors.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Smallest n with every entry of Aⁿ positive.
    pub fn primitivity_exponent(&self) -> usize {
        self.primitivity_exponent
    }

    pub fn to_real(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| f64::from(self.entries[i * self.dim + j]))
    }

    pub fn to_complex(&self) -> DMatrix<Complex64> {
        self.to_real().map(|x| Complex64::new(x, 0.0))
    }

    pub fn to_i64_rows(&self) -> Vec<Vec<i64>> {
        self.entries
            .chunks(self.dim)
            .map(|r| r.iter().map(|&e| i64::from(e)).collect())
            .collect()
    }

    /// Exact Aⁿ.
    pub fn int_power(&self, n: usize) -> Vec<Vec<BigInt>> {
        let d = self.dim;
        let mut p: Vec<Vec<BigInt>> = (0..d)
            .map(|i| (0..d).map(|j| BigInt::from(u8::from(i == j))).collect())
            .collect();
        for _ in 0..n {
            let mut next = vec![vec![BigInt::zero(); d]; d];
            for (i, row) in p.iter().enumerate() {
                for (k, pik) in row.iter().enumerate() {
                    if pik.is_zero() {
                        continue;
                    }
                    for &j in &self.successors[k] {
                        next[i][j] += pik;
                    }
                }
            }
            p = next;
        }
        p
    }

    /// Column sums of Aⁿ: the number of length-(n+1) blocks ending in each symbol.
    pub fn column_sum_counts(&self, n: usize) -> Vec<BigUint> {
        let mut counts = vec![BigUint::from(1u8); self.dim];
        for _ in 0..n {
            let mut next = vec![BigUint::zero(); self.dim];
            for (i, c) in counts.iter().enumerate() {
                for &j in &self.successors[i] {
                    next[j] += c;
                }
            }
            counts = next;
        }
        counts
    }

    /// Column sums of Aⁿ as floats, for every n in `0..=max_n`.
    pub fn column_sum_table(&self, max_n: usize) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(max_n + 1);
        let mut counts = vec![BigUint::from(1u8); self.dim];
        for n in 0..=max_n {
            out.push(counts.iter().map(|c| c.to_f64().unwrap_or(f64::INFINITY)).collect());
            if n < max_n {
                let mut next = vec![BigUint::zero(); self.dim];
                for (i, c) in counts.iter().enumerate() {
                    for &j in &self.successors[i] {
                        next[j] += c;
                    }
                }
                counts = next;
            }
        }
        out
    }
}

fn primitivity_exponent(dim: usize, entries: &[u8]) -> Result<usize> {
    let bound = (dim - 1) * (dim - 1) + 1;
    let a: Vec<bool> = entries.iter().map(|&e| e == 1).collect();
    let mut p = a.clone();
    for n in 1..=bound {
        if p.iter().all(|&x| x) {
            return Ok(n);
        }
        let mut next = vec![false; dim * dim];
        for i in 0..dim {
            for k in 0..dim {
                if p[i * dim + k] {
                    for j in 0..dim {
                        if a[k * dim + j] {
                            next[i * dim + j] = true;
                        }
                    }
                }
            }
        }
        p = next;
    }
    Err(Error::NonPrimitive { bound })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_is_primitive_with_exponent_two() {
        let a = TransitionMatrix::new(vec![vec![1, 1], vec![1, 0]]).unwrap();
        assert_eq!(a.primitivity_exponent(), 2);
        assert_eq!(a.successors(1), &[0]);
        assert_eq!(a.predecessors(0), &[0, 1]);
    }

    #[test]
    fn rejects_permutation_and_bad_entries() {
        assert_eq!(
            TransitionMatrix::new(vec![vec![0, 1], vec![1, 0]]),
            Err(Error::NonPrimitive { bound: 2 })
        );
        assert!(matches!(
            TransitionMatrix::new(vec![vec![2, 1], vec![1, 0]]),
            Err(Error::InvalidMatrix(_))
        ));
        assert!(matches!(
            TransitionMatrix::new(vec![vec![1, 1], vec![0, 0]]),
            Err(Error::InvalidMatrix(_))
        ));
        assert!(matches!(
            TransitionMatrix::new(vec![vec![1, 0], vec![1, 0]]),
            Err(Error::InvalidMatrix(_))
        ));
    }

    #[test]
    fn wielandt_extremal_matrix_is_accepted() {
        // Wielandt's matrix attains the bound (d-1)^2 + 1.
        let a = TransitionMatrix::new(vec![
            vec![0, 1, 0, 0],
            vec![0, 0, 1, 0],
            vec![0, 0, 0, 1],
            vec![1, 1, 0, 0],
        ])
        .unwrap();
        assert_eq!(a.primitivity_exponent(), 10);
    }

    #[test]
    fn golden_powers_are_fibonacci() {
        let a = TransitionMatrix::new(vec![vec![1, 1], vec![1, 0]]).unwrap();
        let p = a.int_power(5);
        assert_eq!(p[0][0], BigInt::from(8));
        assert_eq!(p[0][1], BigInt::from(5));
        assert_eq!(p[1][1], BigInt::from(3));
        let c = a.column_sum_counts(5);
        assert_eq!(c, vec![BigUint::from(13u8), BigUint::from(8u8)]);
    }
}
