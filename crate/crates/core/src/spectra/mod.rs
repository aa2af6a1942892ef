//! Characteristic polynomials, eigenvalues with Jordan chains, Perron–Frobenius data and the
//! stable/central/unstable/nilpotent splitting of a transition matrix.
//!
//! The characteristic polynomial is exact. Roots are found in double precision on the
//! squarefree factors of that polynomial, so multiplicities are exact too.

mod linalg;
mod matrix;
mod poly;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

pub use matrix::{MatrixSpec, TransitionMatrix};
pub use poly::{char_polynomial_raw, CharPoly};

pub(crate) use linalg::kernel;

/// Default rank and snapping tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Unstable,
    Central,
    Stable,
    Nilpotent,
}

impl Stability {
    pub fn of(mu: Complex64, tol: f64) -> Stability {
        let m = mu.norm();
        if m == 0.0 {
            Stability::Nilpotent
        } else if (m - 1.0).abs() < tol {
            Stability::Central
        } else if m > 1.0 {
            Stability::Unstable
        } else {
            Stability::Stable
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenvalue {
    pub value: Complex64,
    pub multiplicity: usize,
    pub stability: Stability,
}

/// `vectors[0]` is an eigenvector and `(A − μ)vectors[i+1] = vectors[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenChain {
    pub eigenvalue: Complex64,
    pub vectors: Vec<DVector<Complex64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerronFrobenius {
    pub lambda: f64,
    /// Positive, ‖·‖₁ = 1.
    pub right: DVector<f64>,
    /// Positive, `left · right = 1`.
    pub left: DVector<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct SpectralData {
    matrix: TransitionMatrix,
    tol: f64,
    char_poly: CharPoly,
    eigenvalues: Vec<Eigenvalue>,
    chains: Vec<EigenChain>,
    pf: PerronFrobenius,
    basis: DMatrix<Complex64>,
    basis_inv: DMatrix<Complex64>,
    column_chain: Vec<usize>,
    restricted_inverse: DMatrix<Complex64>,
    projector: DMatrix<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceSplit {
    pub unstable_basis: Vec<DVector<Complex64>>,
    pub central_basis: Vec<DVector<Complex64>>,
    pub stable_basis: Vec<DVector<Complex64>>,
    pub nilpotent_basis: Vec<DVector<Complex64>>,
}

impl SubspaceSplit {
    pub fn nonnilpotent_basis(&self) -> Vec<DVector<Complex64>> {
        self.unstable_basis
            .iter()
            .chain(&self.central_basis)
            .chain(&self.stable_basis)
            .cloned()
            .collect()
    }
}

pub fn char_polynomial(a: &TransitionMatrix) -> CharPoly {
    char_polynomial_raw(&a.to_i64_rows())
}

fn order_key(mu: Complex64) -> (i64, i64, i64) {
    let q = |x: f64| -(x * 1e10).round() as i64;
    (q(mu.norm()), q(mu.re), q(mu.im))
}

fn normalize_chain(chain: &mut [DVector<Complex64>]) {
    let v1 = &chain[0];
    let norm1: f64 = v1.iter().map(|z| z.norm()).sum();
    let maxabs = v1.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let pivot = v1
        .iter()
        .position(|z| z.norm() >= maxabs * (1.0 - 1e-12))
        .unwrap_or(0);
    let phase = v1[pivot].conj() / v1[pivot].norm();
    let scale = phase / norm1;
    for v in chain.iter_mut() {
        *v *= scale;
    }
}

pub fn compute_spectrum(a: &TransitionMatrix, tol: f64) -> Result<SpectralData> {
    let d = a.dim();
    let char_poly = char_polynomial(a);
    let mut roots = poly::roots_with_multiplicity(&char_poly, tol);
    roots.sort_by_key(|(mu, _)| order_key(*mu));
    let eigenvalues: Vec<Eigenvalue> = roots
        .iter()
        .map(|&(value, multiplicity)| Eigenvalue {
            value,
            multiplicity,
            stability: Stability::of(value, tol),
        })
        .collect();

    let (right, iterations) = linalg::power_iteration(&a.to_real(), tol).ok_or(Error::NotConverged {
        iterations: 1_000_000,
        last: f64::NAN,
    })?;
    let (mut left, _) = linalg::power_iteration(&a.to_real().transpose(), tol).ok_or(
        Error::NotConverged {
            iterations: 1_000_000,
            last: f64::NAN,
        },
    )?;
    left /= left.dot(&right);
    let lambda = eigenvalues[0].value.re;
    let pf = PerronFrobenius {
        lambda,
        right,
        left,
        iterations,
    };

    let real_a = a.to_real();
    let complex_a = a.to_complex();
    let mut chains: Vec<EigenChain> = Vec::new();
    for (idx, ev) in eigenvalues.iter().enumerate() {
        let mu = ev.value;
        let degenerate = |reason: String| Error::DegenerateChain {
            mu: format!("{}", mu),
            reason,
        };
        let mut found: Vec<Vec<DVector<Complex64>>> = if mu.im == 0.0 {
            linalg::jordan_chains(&real_a, mu.re, ev.multiplicity, tol)
                .map_err(degenerate)?
                .into_iter()
                .map(|c| c.into_iter().map(|v| v.map(|x| Complex64::new(x, 0.0))).collect())
                .collect()
        } else if mu.im < 0.0 && idx > 0 && eigenvalues[idx - 1].value == mu.conj() {
            chains
                .iter()
                .filter(|c| c.eigenvalue == mu.conj())
                .map(|c| c.vectors.iter().map(|v| v.map(|z| z.conj())).collect())
                .collect()
        } else {
            linalg::jordan_chains(&complex_a, mu, ev.multiplicity, tol).map_err(degenerate)?
        };
        for c in found.iter_mut() {
            if !(mu.im < 0.0 && idx > 0 && eigenvalues[idx - 1].value == mu.conj()) {
                normalize_chain(c);
            }
        }
        if idx == 0 && found.len() == 1 && found[0].len() == 1 {
            found[0][0] = pf.right.map(|x| Complex64::new(x, 0.0));
        }
        chains.extend(found.into_iter().map(|vectors| EigenChain {
            eigenvalue: mu,
            vectors,
        }));
    }

    let mut columns = Vec::with_capacity(d);
    let mut column_chain = Vec::with_capacity(d);
    for (ci, c) in chains.iter().enumerate() {
        for v in &c.vectors {
            columns.push(v.clone());
            column_chain.push(ci);
        }
    }
    if columns.len() != d {
        return Err(Error::DegenerateChain {
            mu: "all".into(),
            reason: format!("chains supply {} vectors for dimension {}", columns.len(), d),
        });
    }
    let basis = DMatrix::from_columns(&columns);
    let basis_inv = basis.clone().try_inverse().ok_or_else(|| Error::DegenerateChain {
        mu: "all".into(),
        reason: "chain vectors are not independent".into(),
    })?;
    if linalg::rank(&basis, tol) != d {
        return Err(Error::DegenerateChain {
            mu: "all".into(),
            reason: "chain vectors do not span".into(),
        });
    }

    // In chain coordinates A is block bidiagonal; invert each nonnilpotent block.
    let mut jinv = DMatrix::<Complex64>::zeros(d, d);
    let mut diag = DMatrix::<Complex64>::zeros(d, d);
    let mut start = 0;
    for c in &chains {
        let k = c.vectors.len();
        if c.eigenvalue != Complex64::new(0.0, 0.0) {
            let inv = Complex64::new(1.0, 0.0) / c.eigenvalue;
            for i in 0..k {
                diag[(start + i, start + i)] = Complex64::new(1.0, 0.0);
                for j in i..k {
                    let sign = if (j - i) % 2 == 0 { 1.0 } else { -1.0 };
                    jinv[(start + i, start + j)] = inv.powu((j - i + 1) as u32) * sign;
                }
            }
        }
        start += k;
    }
    let restricted_inverse = &basis * jinv * &basis_inv;
    let projector = &basis * diag * &basis_inv;

    Ok(SpectralData {
        matrix: a.clone(),
        tol,
        char_poly,
        eigenvalues,
        chains,
        pf,
        basis,
        basis_inv,
        column_chain,
        restricted_inverse,
        projector,
    })
}

impl SpectralData {
    pub fn matrix(&self) -> &TransitionMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn char_poly(&self) -> &CharPoly {
        &self.char_poly
    }

    /// Sorted by modulus, then real part, then imaginary part, all descending.
    pub fn eigenvalues(&self) -> &[Eigenvalue] {
        &self.eigenvalues
    }

    pub fn chains(&self) -> &[EigenChain] {
        &self.chains
    }

    pub fn pf(&self) -> &PerronFrobenius {
        &self.pf
    }

    pub fn lambda(&self) -> f64 {
        self.pf.lambda
    }

    /// Chain vectors as columns, in chain order.
    pub fn basis(&self) -> &DMatrix<Complex64> {
        &self.basis
    }

    /// Index into [`chains`](Self::chains) of each basis column.
    pub fn column_chain(&self) -> &[usize] {
        &self.column_chain
    }

    pub fn coordinates(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        &self.basis_inv * v
    }

    /// Inverse of A on the nonnilpotent subspace, zero on the nilpotent one.
    pub fn restricted_inverse(&self) -> &DMatrix<Complex64> {
        &self.restricted_inverse
    }

    pub fn nonnilpotent_projector(&self) -> &DMatrix<Complex64> {
        &self.projector
    }

    pub fn project_nonnilpotent(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        &self.projector * v
    }

    /// Index of the eigenvalue within `tol·max(1, |μ|)` of `mu`.
    pub fn find_eigenvalue(&self, mu: Complex64) -> Option<usize> {
        let scale = mu.norm().max(1.0);
        self.eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, e)| (e.value - mu).norm() <= 1e3 * self.tol * scale)
            .min_by(|(_, x), (_, y)| (x.value - mu).norm().total_cmp(&(y.value - mu).norm()))
            .map(|(i, _)| i)
    }

    pub fn chains_for(&self, mu: Complex64) -> Vec<&EigenChain> {
        self.chains.iter().filter(|c| c.eigenvalue == mu).collect()
    }

    /// Right and left eigenvectors of a simple nonzero eigenvalue with `left · right = 1`.
    /// For the Perron–Frobenius eigenvalue these are the positive vectors of [`pf`](Self::pf).
    pub fn eigen_pair(&self, mu: Complex64) -> Result<(Complex64, DVector<Complex64>, DVector<Complex64>)> {
        let idx = self
            .find_eigenvalue(mu)
            .filter(|&i| self.eigenvalues[i].value != Complex64::new(0.0, 0.0))
            .ok_or_else(|| Error::NotAnEigenvalue(format!("{}", mu)))?;
        let ev = &self.eigenvalues[idx];
        if ev.multiplicity != 1 {
            return Err(Error::EigenvalueNotSimple(format!("{}", ev.value)));
        }
        if idx == 0 {
            let r = self.pf.right.map(|x| Complex64::new(x, 0.0));
            let l = self.pf.left.map(|x| Complex64::new(x, 0.0));
            return Ok((ev.value, r, l));
        }
        let right = self.chains_for(ev.value)[0].vectors[0].clone();
        let d = self.dim();
        let m = self.matrix.to_complex().transpose()
            - DMatrix::<Complex64>::identity(d, d) * ev.value;
        let k = kernel(&m, self.tol);
        if k.ncols() != 1 {
            return Err(Error::DegenerateChain {
                mu: format!("{}", ev.value),
                reason: format!("left eigenspace has dimension {}", k.ncols()),
            });
        }
        let mut left: DVector<Complex64> = k.column(0).into_owned();
        let pairing = left.transpose() * &right;
        left /= pairing[(0, 0)];
        Ok((ev.value, right, left))
    }
}

pub fn classify_spectrum(s: &SpectralData, tol: f64) -> SubspaceSplit {
    let mut split = SubspaceSplit {
        unstable_basis: Vec::new(),
        central_basis: Vec::new(),
        stable_basis: Vec::new(),
        nilpotent_basis: Vec::new(),
    };
    for c in s.chains() {
        let target = match Stability::of(c.eigenvalue, tol) {
            Stability::Unstable => &mut split.unstable_basis,
            Stability::Central => &mut split.central_basis,
            Stability::Stable => &mut split.stable_basis,
            Stability::Nilpotent => &mut split.nilpotent_basis,
        };
        target.extend(c.vectors.iter().cloned());
    }
    split
}

pub fn project_nonnilpotent(s: &SpectralData, v: &DVector<Complex64>) -> DVector<Complex64> {
    s.project_nonnilpotent(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> TransitionMatrix {
        TransitionMatrix::new(vec![vec![1, 1], vec![1, 0]]).unwrap()
    }

    #[test]
    fn golden_spectrum() {
        let s = compute_spectrum(&golden(), DEFAULT_TOL).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert_eq!(s.eigenvalues().len(), 2);
        assert!((s.eigenvalues()[0].value.re - phi).abs() < 1e-14);
        assert!((s.eigenvalues()[1].value.re - (1.0 - phi)).abs() < 1e-14);
        assert_eq!(s.eigenvalues()[1].stability, Stability::Stable);
        assert!((s.pf().right[0] - phi / (1.0 + phi)).abs() < 1e-15);
        assert!((s.pf().left.dot(&s.pf().right) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn all_ones_projection() {
        let a = TransitionMatrix::new(vec![vec![1, 1], vec![1, 1]]).unwrap();
        let s = compute_spectrum(&a, DEFAULT_TOL).unwrap();
        assert_eq!(s.eigenvalues()[1].stability, Stability::Nilpotent);
        let v = DVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        let p = project_nonnilpotent(&s, &v);
        assert!((p[0] - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((p[1] - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        let split = classify_spectrum(&s, DEFAULT_TOL);
        assert_eq!(split.unstable_basis.len(), 1);
        assert_eq!(split.nilpotent_basis.len(), 1);
    }

    #[test]
    fn central_pair_is_conjugate() {
        let a = TransitionMatrix::new(vec![vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]]).unwrap();
        let s = compute_spectrum(&a, DEFAULT_TOL).unwrap();
        let ev = s.eigenvalues();
        assert!((ev[0].value.re - 2.0).abs() < 1e-14);
        assert_eq!(ev[1].value, ev[2].value.conj());
        assert!(ev[1].value.im > 0.0);
        assert_eq!(ev[1].stability, Stability::Central);
        assert_eq!(s.chains()[2].vectors[0], s.chains()[1].vectors[0].map(|z| z.conj()));
        for x in s.pf().right.iter() {
            assert!((x - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn eigen_pair_is_biorthonormal() {
        let s = compute_spectrum(&golden(), DEFAULT_TOL).unwrap();
        let mu = s.eigenvalues()[1].value;
        let (_, r, l) = s.eigen_pair(mu).unwrap();
        let a = s.matrix().to_complex();
        assert!((&a * &r - &r * mu).norm() < 1e-14);
        assert!((a.transpose() * &l - &l * mu).norm() < 1e-14);
        assert!(((l.transpose() * &r)[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(matches!(s.eigen_pair(Complex64::new(0.3, 0.0)), Err(Error::NotAnEigenvalue(_))));
    }
}
