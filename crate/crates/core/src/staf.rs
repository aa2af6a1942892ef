//! Symbolic transverse arc functions stored as threads, eigen-stafs and the invariant set
//! functions J_μ.
//!
//! A staf is determined by its levels `K⁽ⁿ⁾`, with `K(s₀…s_{n−1} j) = (K⁽ⁿ⁾)_j` and
//! `A·K⁽ⁿ⁺¹⁾ = K⁽ⁿ⁾`. Levels are precomputed up to a depth cap when the staf is built.

use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sft::Block;
use crate::spectra::{MatrixSpec, SpectralData};

pub const DEFAULT_MAX_DEPTH: usize = 60;

/// Levels whose sup norm passes this are treated as overflowed.
const MAGNITUDE_LIMIT: f64 = 1e250;

/// JSON description of a staf: `{"matrix": ..., "kind": "eigen"|"seed", "mu": [re, im], "chain_index": k, "seed": [...]}`.
/// An eigen spec without `mu` selects the Perron-Frobenius eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StafSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixSpec>,
    pub kind: StafSpecKind,
    #[serde(default)]
    pub mu: Option<[f64; 2]>,
    #[serde(default)]
    pub chain_index: usize,
    /// Entries are `[re, im]` pairs.
    #[serde(default)]
    pub seed: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StafSpecKind {
    Eigen,
    Seed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StafKind {
    Seed,
    Eigen { mu: Complex64, chain_index: usize },
    Derived,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpBound {
    pub c: f64,
    pub r: f64,
    pub is_unstable: bool,
}

#[derive(Debug, Clone)]
pub struct Staf {
    spectrum: Arc<SpectralData>,
    levels: Vec<DVector<Complex64>>,
    max_depth: usize,
    kind: StafKind,
}

/// Result of building a staf from a seed.
#[derive(Debug, Clone)]
pub struct SeededStaf {
    pub staf: Staf,
    /// True if the seed had a nilpotent component that was removed.
    pub projected: bool,
    pub residual: f64,
}

fn sup_norm(v: &DVector<Complex64>) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn truncate_overflow(levels: &mut Vec<DVector<Complex64>>) {
    if let Some(bad) = levels
        .iter()
        .position(|v| v.iter().any(|z| !z.is_finite()) || sup_norm(v) > MAGNITUDE_LIMIT)
    {
        levels.truncate(bad);
    }
}

impl Staf {
    pub fn from_seed(spectrum: &Arc<SpectralData>, seed: DVector<Complex64>) -> Result<SeededStaf> {
        Self::from_seed_with_depth(spectrum, seed, DEFAULT_MAX_DEPTH)
    }

    pub fn from_seed_with_depth(
        spectrum: &Arc<SpectralData>,
        seed: DVector<Complex64>,
        max_depth: usize,
    ) -> Result<SeededStaf> {
        if seed.len() != spectrum.dim() {
            return Err(Error::InvalidMatrix(format!(
                "seed has length {}, expected {}",
                seed.len(),
                spectrum.dim()
            )));
        }
        let projected_seed = spectrum.project_nonnilpotent(&seed);
        let scale = sup_norm(&seed);
        let residual = if scale == 0.0 {
            0.0
        } else {
            sup_norm(&(&seed - &projected_seed)) / scale
        };
        if residual > spectrum.tol() {
            return Err(Error::SeedNotNonNilpotent { residual });
        }
        let b = spectrum.restricted_inverse();
        let mut levels = Vec::with_capacity(max_depth + 1);
        levels.push(projected_seed);
        for n in 0..max_depth {
            let next = b * &levels[n];
            levels.push(next);
        }
        truncate_overflow(&mut levels);
        Ok(SeededStaf {
            staf: Staf {
                spectrum: Arc::clone(spectrum),
                levels,
                max_depth,
                kind: StafKind::Seed,
            },
            projected: residual > 1e-13,
            residual,
        })
    }

    pub fn zero(spectrum: &Arc<SpectralData>) -> Staf {
        let d = spectrum.dim();
        Staf {
            spectrum: Arc::clone(spectrum),
            levels: vec![DVector::zeros(d); DEFAULT_MAX_DEPTH + 1],
            max_depth: DEFAULT_MAX_DEPTH,
            kind: StafKind::Seed,
        }
    }

    /// The eigen-staf of `mu` (`chain_index = 0`) or a generalized eigen-staf along the first
    /// (longest) chain of `mu`.
    pub fn eigen(spectrum: &Arc<SpectralData>, mu: Complex64, chain_index: usize) -> Result<Staf> {
        Self::eigen_with_depth(spectrum, mu, chain_index, DEFAULT_MAX_DEPTH)
    }

    pub fn eigen_with_depth(
        spectrum: &Arc<SpectralData>,
        mu: Complex64,
        chain_index: usize,
        max_depth: usize,
    ) -> Result<Staf> {
        let idx = spectrum
            .find_eigenvalue(mu)
            .ok_or_else(|| Error::NotAnEigenvalue(format!("{}", mu)))?;
        let value = spectrum.eigenvalues()[idx].value;
        if value == Complex64::new(0.0, 0.0) {
            return Err(Error::NotAnEigenvalue(format!("{}", mu)));
        }
        let chain = spectrum.chains_for(value)[0];
        Self::from_chain_vectors(spectrum, value, &chain.vectors, chain_index, max_depth)
    }

    fn from_chain_vectors(
        spectrum: &Arc<SpectralData>,
        mu: Complex64,
        chain: &[DVector<Complex64>],
        chain_index: usize,
        max_depth: usize,
    ) -> Result<Staf> {
        if chain_index >= chain.len() {
            return Err(Error::IndexExceedsChain {
                index: chain_index,
                len: chain.len(),
            });
        }
        let inv = Complex64::new(1.0, 0.0) / mu;
        let mut levels = Vec::with_capacity(max_depth + 1);
        let mut inv_pow = Complex64::new(1.0, 0.0);
        for n in 0..=max_depth {
            // Bⁿ w_i = Σ_m (−1)^m C(n+m−1, m) μ^{−n−m} w_{i−m}
            let mut level = chain[chain_index].clone() * inv_pow;
            let mut binom = 1.0f64;
            let mut factor = inv_pow;
            for m in 1..=chain_index {
                binom *= (n + m - 1) as f64 / m as f64;
                factor *= -inv;
                if binom == 0.0 {
                    break;
                }
                level += &chain[chain_index - m] * (factor * binom);
            }
            levels.push(level);
            inv_pow *= inv;
        }
        truncate_overflow(&mut levels);
        Ok(Staf {
            spectrum: Arc::clone(spectrum),
            levels,
            max_depth,
            kind: StafKind::Eigen { mu, chain_index },
        })
    }

    /// Real and imaginary parts, levelwise. Both are stafs since A is real.
    pub fn real_parts(&self) -> (Staf, Staf) {
        let re = self.levels.iter().map(|v| v.map(|z| Complex64::new(z.re, 0.0))).collect();
        let im = self.levels.iter().map(|v| v.map(|z| Complex64::new(z.im, 0.0))).collect();
        (self.derived(re), self.derived(im))
    }

    fn derived(&self, levels: Vec<DVector<Complex64>>) -> Staf {
        Staf {
            spectrum: Arc::clone(&self.spectrum),
            levels,
            max_depth: self.max_depth,
            kind: StafKind::Derived,
        }
    }

    /// Σ cᵢ Kᵢ over stafs of one matrix. Depth is the smallest among the terms.
    pub fn linear_combination(terms: &[(Complex64, &Staf)]) -> Result<Staf> {
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidMatrix("empty combination".into()))?
            .1;
        if terms
            .iter()
            .any(|(_, k)| k.spectrum.matrix() != first.spectrum.matrix())
        {
            return Err(Error::InvalidMatrix("stafs over different matrices".into()));
        }
        let depth = terms.iter().map(|(_, k)| k.levels.len()).min().unwrap_or(0);
        let levels = (0..depth)
            .map(|n| {
                terms
                    .iter()
                    .fold(DVector::zeros(first.dim()), |acc: DVector<Complex64>, (c, k)| {
                        acc + &k.levels[n] * *c
                    })
            })
            .collect();
        let mut out = first.derived(levels);
        out.max_depth = terms.iter().map(|(_, k)| k.max_depth).min().unwrap_or(0);
        Ok(out)
    }

    pub fn spectrum(&self) -> &Arc<SpectralData> {
        &self.spectrum
    }

    pub fn dim(&self) -> usize {
        self.spectrum.dim()
    }

    pub fn kind(&self) -> StafKind {
        self.kind
    }

    pub fn seed(&self) -> &DVector<Complex64> {
        &self.levels[0]
    }

    /// Number of levels available, i.e. the largest evaluable block length.
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn levels(&self) -> &[DVector<Complex64>] {
        &self.levels
    }

    pub fn level(&self, n: usize) -> Result<&DVector<Complex64>> {
        self.levels.get(n).ok_or(Error::DepthOverflow {
            depth: n,
            cap: self.levels.len().saturating_sub(1),
        })
    }

    /// `K(b)` for a block of length `len` ending in `last`.
    pub fn value(&self, len: usize, last: usize) -> Result<Complex64> {
        Ok(self.level(len - 1)?[last])
    }

    pub fn evaluate(&self, b: &Block) -> Result<Complex64> {
        let m = self.spectrum.matrix();
        if let Some(&s) = b.symbols().iter().find(|&&s| s >= m.dim()) {
            return Err(Error::SymbolOutOfRange {
                symbol: s + 1,
                dim: m.dim(),
            });
        }
        if !b.symbols().windows(2).all(|w| m.get(w[0], w[1])) {
            return Err(Error::NotAllowable(b.to_string()));
        }
        self.value(b.len(), b.last())
    }

    /// σ*K: seed A·K⁽⁰⁾, with the old levels shifted down by one.
    pub fn sigma_pullback(&self) -> Staf {
        let a = self.spectrum.matrix().to_complex();
        let mut levels = Vec::with_capacity(self.levels.len() + 1);
        levels.push(&a * &self.levels[0]);
        levels.extend(self.levels.iter().take(self.max_depth).cloned());
        truncate_overflow(&mut levels);
        self.derived(levels)
    }

    /// Coordinates of the seed along the chain basis, with the modulus of each column's eigenvalue.
    fn active_moduli(&self) -> Vec<f64> {
        let coords = self.spectrum.coordinates(self.seed());
        let cmax = coords.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let chains = self.spectrum.chains();
        coords
            .iter()
            .zip(self.spectrum.column_chain())
            .filter(|(c, _)| cmax > 0.0 && c.norm() > 1e-10 * cmax)
            .map(|(_, &ci)| chains[ci].eigenvalue.norm())
            .filter(|&m| m > 0.0)
            .collect()
    }

    /// `(C, r)` with `|K(b)| ≤ C r^{−ℓ(b)}` over the cached levels; `r` is the least modulus of
    /// an eigenvalue whose chain component in the seed is nonzero.
    pub fn exponential_bound(&self) -> ExpBound {
        let r = self
            .active_moduli()
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if !r.is_finite() {
            return ExpBound {
                c: 0.0,
                r,
                is_unstable: true,
            };
        }
        let c = self
            .levels
            .iter()
            .enumerate()
            .map(|(n, v)| sup_norm(v) * r.powi(n as i32 + 1))
            .fold(0.0, f64::max)
            * (1.0 + 1e-12);
        ExpBound {
            c,
            r,
            is_unstable: r > 1.0 + self.spectrum.tol(),
        }
    }

    /// Whether values decay below `tol` times the initial scale along every greedy nested chain
    /// of length `max_depth` (each step takes the child of largest modulus).
    pub fn atom_test(&self, max_depth: usize, tol: f64) -> bool {
        let scale = sup_norm(self.seed());
        if scale == 0.0 {
            return true;
        }
        let depth = max_depth.min(self.levels.len() - 1);
        if depth < max_depth.min(self.max_depth) {
            return false;
        }
        let m = self.spectrum.matrix();
        (0..self.dim()).all(|j| {
            let mut last = j;
            for n in 1..=depth {
                let level = &self.levels[n];
                last = *m
                    .successors(last)
                    .iter()
                    .max_by(|&&x, &&y| level[x].norm().total_cmp(&level[y].norm()))
                    .expect("nonempty successors");
            }
            self.levels[depth][last].norm() < tol * scale
        })
    }
}

/// The σ-invariant set function `J_μ([s₀…s_n]) = μ⁻ⁿ ℓ_{s₀} r_{s_n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantSetFn {
    mu: Complex64,
    left: DVector<Complex64>,
    right: DVector<Complex64>,
}

impl InvariantSetFn {
    pub fn new(spectrum: &SpectralData, mu: Complex64) -> Result<InvariantSetFn> {
        let (mu, right, left) = spectrum.eigen_pair(mu)?;
        Ok(InvariantSetFn { mu, left, right })
    }

    pub fn mu(&self) -> Complex64 {
        self.mu
    }

    pub fn left(&self) -> &DVector<Complex64> {
        &self.left
    }

    pub fn right(&self) -> &DVector<Complex64> {
        &self.right
    }

    fn scale(&self, n: usize) -> Complex64 {
        (Complex64::new(1.0, 0.0) / self.mu).powu(n as u32)
    }

    pub fn j_evaluate(&self, b: &Block) -> Complex64 {
        self.scale(b.len() - 1) * self.left[b.first()] * self.right[b.last()]
    }

    /// `K_μ(b) = μ^{1−ℓ} r_{last}`, the eigen-staf built from the same right vector.
    pub fn k_plus(&self, b: &Block) -> Complex64 {
        self.scale(b.len() - 1) * self.right[b.last()]
    }

    /// `K⁻_μ(s₋ₙ…s₀) = μ⁻ⁿ ℓ_{s₋ₙ}` on blocks read from place −n to place 0.
    pub fn k_minus(&self, b: &Block) -> Complex64 {
        self.scale(b.len() - 1) * self.left[b.first()]
    }

    /// Ĵ_μ on a two-sided block whose place-0 symbol sits at index `zero`.
    pub fn j_hat(&self, b: &Block, zero: usize) -> Complex64 {
        assert!(zero < b.len());
        self.j_evaluate(b)
    }

    /// Split a two-sided block at place 0 into its past part (ending at place 0) and its future
    /// part (starting at place 0).
    pub fn split(b: &Block, zero: usize) -> (Block, Block) {
        let s = b.symbols();
        (Block::new(s[..=zero].to_vec()), Block::new(s[zero..].to_vec()))
    }
}

impl StafSpec {
    pub fn build(&self, spectrum: &Arc<SpectralData>, max_depth: usize) -> Result<SeededStaf> {
        match self.kind {
            StafSpecKind::Eigen => {
                let [re, im] = self.mu.unwrap_or([spectrum.lambda(), 0.0]);
                let staf =
                    Staf::eigen_with_depth(spectrum, Complex64::new(re, im), self.chain_index, max_depth)?;
                Ok(SeededStaf {
                    staf,
                    projected: false,
                    residual: 0.0,
                })
            }
            StafSpecKind::Seed => {
                let seed = self
                    .seed
                    .as_ref()
                    .ok_or_else(|| Error::InvalidMatrix("missing seed".into()))?;
                let v = DVector::from_iterator(seed.len(), seed.iter().map(|&[re, im]| Complex64::new(re, im)));
                Staf::from_seed_with_depth(spectrum, v, max_depth)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{compute_spectrum, TransitionMatrix, DEFAULT_TOL};

    fn golden() -> Arc<SpectralData> {
        let a = TransitionMatrix::new(vec![vec![1, 1], vec![1, 0]]).unwrap();
        Arc::new(compute_spectrum(&a, DEFAULT_TOL).unwrap())
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn b(s: &str) -> Block {
        s.parse().unwrap()
    }

    #[test]
    fn pf_staf_values() {
        let s = golden();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let k = Staf::eigen(&s, c(phi), 0).unwrap();
        let v1 = phi / (1.0 + phi);
        assert!((k.evaluate(&b("1")).unwrap() - c(v1)).norm() < 1e-15);
        assert!((k.evaluate(&b("1,1")).unwrap() - c(v1 / phi)).norm() < 1e-15);
        let sum = k.evaluate(&b("1,1")).unwrap() + k.evaluate(&b("1,2")).unwrap();
        assert!((sum - k.evaluate(&b("1")).unwrap()).norm() < 1e-15);
        assert_eq!(k.exponential_bound().r, s.lambda());
        assert!(k.exponential_bound().is_unstable);
        assert!(k.atom_test(60, 1e-6));
    }

    #[test]
    fn stable_staf_alternates_and_is_not_atomless() {
        let s = golden();
        let mu = s.eigenvalues()[1].value;
        let k = Staf::eigen(&s, mu, 0).unwrap();
        let v = &s.chains_for(mu)[0].vectors[0];
        let expected = v[0] / (mu * mu);
        assert!((k.evaluate(&b("2,1,1")).unwrap() - expected).norm() < 1e-14);
        let bound = k.exponential_bound();
        assert!((bound.r - mu.norm()).abs() < 1e-14);
        assert!(!bound.is_unstable);
        assert!(!k.atom_test(60, 1e-6));
        assert!(matches!(Staf::eigen(&s, mu, 1), Err(Error::IndexExceedsChain { index: 1, len: 1 })));
    }

    #[test]
    fn zero_staf() {
        let s = golden();
        let z = Staf::from_seed(&s, DVector::zeros(2)).unwrap().staf;
        assert_eq!(z.evaluate(&b("1,2,1")).unwrap(), c(0.0));
        assert!(z.atom_test(60, 1e-6));
        assert_eq!(z.exponential_bound().c, 0.0);
    }

    #[test]
    fn depth_overflow_beyond_cap() {
        let s = golden();
        let k = Staf::eigen_with_depth(&s, c(s.lambda()), 0, 5).unwrap();
        assert!(k.value(6, 0).is_ok());
        assert!(matches!(k.value(7, 0), Err(Error::DepthOverflow { .. })));
    }

    #[test]
    fn sigma_pullback_of_unit_seed() {
        let s = golden();
        let seed = DVector::from_vec(vec![c(1.0), c(0.0)]);
        let k = Staf::from_seed(&s, seed).unwrap().staf;
        let p = k.sigma_pullback();
        let expected = k.evaluate(&b("1")).unwrap() + k.evaluate(&b("2")).unwrap();
        assert!((p.evaluate(&b("1")).unwrap() - expected).norm() < 1e-15);
    }

    #[test]
    fn nilpotent_seed_is_rejected() {
        let a = TransitionMatrix::new(vec![vec![1, 1], vec![1, 1]]).unwrap();
        let s = Arc::new(compute_spectrum(&a, DEFAULT_TOL).unwrap());
        let seed = DVector::from_vec(vec![c(1.0), c(0.0)]);
        assert!(matches!(Staf::from_seed(&s, seed), Err(Error::SeedNotNonNilpotent { .. })));
    }

    #[test]
    fn parry_weights_sum_to_one() {
        let s = golden();
        let j = InvariantSetFn::new(&s, c(s.lambda())).unwrap();
        let total = j.j_evaluate(&b("1")) + j.j_evaluate(&b("2"));
        assert!((total - c(1.0)).norm() < 1e-15);
        let pre = j.j_evaluate(&b("1,1")) + j.j_evaluate(&b("2,1"));
        assert!((pre - j.j_evaluate(&b("1"))).norm() < 1e-15);
    }
}
