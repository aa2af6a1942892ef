//! Eigen c-maps of perturbed linear maps of the 2-torus, solved on a lattice by contraction or
//! by the geometric series, and a series solver for `h∘f − μh = −χ` on tori of any dimension.
//!
//! A c-map is stored as `σ(x) = Φ·x + h(x mod 1)` with `h` sampled on an `N × N` lattice and
//! read back by bilinear interpolation.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regularity::SampledFunction;

pub const MAX_ITERATIONS: usize = 10_000;

type C64 = Complex64;

/// One term `coeff·sin(2π freq·x + phase)` of a vector-valued perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigTerm {
    pub coeff: [f64; 2],
    pub freq: [i64; 2],
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerturbationKind {
    Trig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    pub kind: PerturbationKind,
    #[serde(default)]
    pub terms: Vec<TrigTerm>,
}

/// `{"linear": [[a, b], [c, d]], "perturbation": {"kind": "trig", "terms": [...]}, "grid": N}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub linear: Vec<Vec<i64>>,
    #[serde(default)]
    pub perturbation: Option<PerturbationSpec>,
    pub grid: usize,
}

/// `F(x) = A·x + p(x)` on the plane, `p` periodic.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusMapLift {
    linear: [[i64; 2]; 2],
    terms: Vec<TrigTerm>,
    grid: usize,
}

impl TorusMapLift {
    pub fn new(linear: [[i64; 2]; 2], terms: Vec<TrigTerm>, grid: usize) -> Result<TorusMapLift> {
        if grid < 2 {
            return Err(Error::InvalidMap(format!("grid resolution {} is below 2", grid)));
        }
        if terms.iter().any(|t| !t.coeff.iter().all(|c| c.is_finite()) || !t.phase.is_finite()) {
            return Err(Error::InvalidMap("non-finite perturbation term".into()));
        }
        let m = TorusMapLift { linear, terms, grid };
        if let Some(ev) = m.linear_eigenvalues().iter().find(|z| (z.norm() - 1.0).abs() < 1e-12) {
            return Err(Error::InvalidMap(format!("linear part has eigenvalue {} on the unit circle", ev)));
        }
        Ok(m)
    }

    pub fn from_spec(spec: &MapSpec) -> Result<TorusMapLift> {
        if spec.linear.len() != 2 || spec.linear.iter().any(|r| r.len() != 2) {
            return Err(Error::InvalidMap("only 2×2 linear parts are supported".into()));
        }
        let linear = [
            [spec.linear[0][0], spec.linear[0][1]],
            [spec.linear[1][0], spec.linear[1][1]],
        ];
        let terms = spec.perturbation.as_ref().map(|p| p.terms.clone()).unwrap_or_default();
        Self::new(linear, terms, spec.grid)
    }

    pub fn linear(&self) -> [[i64; 2]; 2] {
        self.linear
    }

    pub fn terms(&self) -> &[TrigTerm] {
        &self.terms
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn with_grid(&self, grid: usize) -> Result<TorusMapLift> {
        Self::new(self.linear, self.terms.clone(), grid)
    }

    pub fn linear_eigenvalues(&self) -> [C64; 2] {
        let [[a, b], [c, d]] = self.linear;
        let tr = (a + d) as f64;
        let det = (a * d - b * c) as f64;
        let disc = C64::new(tr * tr - 4.0 * det, 0.0).sqrt();
        let r1 = (tr + disc) / 2.0;
        let r2 = (tr - disc) / 2.0;
        if r1.norm() >= r2.norm() {
            [r1, r2]
        } else {
            [r2, r1]
        }
    }

    /// Row vector `Φ` with `Φ·A = μΦ`, scaled so its largest entry is 1.
    pub fn left_eigenvector(&self, mu: C64) -> Result<[C64; 2]> {
        let [[a, b], [c, d]] = self.linear.map(|r| r.map(|x| C64::new(x as f64, 0.0)));
        // Columns of A − μI give Φ₁(a−μ) + Φ₂c = 0 and Φ₁b + Φ₂(d−μ) = 0.
        let cands = [[c, mu - a], [d - mu, -b]];
        let phi = cands
            .iter()
            .max_by(|p, q| {
                let np = p[0].norm().max(p[1].norm());
                let nq = q[0].norm().max(q[1].norm());
                np.total_cmp(&nq)
            })
            .copied()
            .expect("two candidates");
        let scale = phi[0].norm().max(phi[1].norm());
        if scale == 0.0 {
            return Err(Error::NotAnEigenvalue(mu.to_string()));
        }
        let big = if phi[0].norm() >= phi[1].norm() { phi[0] } else { phi[1] };
        let unit = big.conj() / (big.norm() * scale);
        let phi = [phi[0] * unit, phi[1] * unit];
        if class_defect(self, mu, &phi, None) > 1e-9 * (1.0 + mu.norm()) {
            return Err(Error::NotAnEigenvalue(mu.to_string()));
        }
        Ok(phi)
    }

    /// Unit vector `u` with `A·u = μu`, for real `μ`.
    pub fn unstable_direction(&self, mu: f64) -> [f64; 2] {
        let [[a, b], [c, d]] = self.linear.map(|r| r.map(|x| x as f64));
        let cands = [[b, mu - a], [mu - d, c]];
        let u = if cands[0][0].hypot(cands[0][1]) >= cands[1][0].hypot(cands[1][1]) {
            cands[0]
        } else {
            cands[1]
        };
        let n = u[0].hypot(u[1]);
        [u[0] / n, u[1] / n]
    }

    pub fn perturbation(&self, x: [f64; 2]) -> [f64; 2] {
        let mut out = [0.0, 0.0];
        for t in &self.terms {
            let s = (TAU * (t.freq[0] as f64 * x[0] + t.freq[1] as f64 * x[1]) + t.phase).sin();
            out[0] += t.coeff[0] * s;
            out[1] += t.coeff[1] * s;
        }
        out
    }

    /// `F(x)` on the plane.
    pub fn lift(&self, x: [f64; 2]) -> [f64; 2] {
        let p = self.perturbation(x);
        let a = self.linear;
        [
            a[0][0] as f64 * x[0] + a[0][1] as f64 * x[1] + p[0],
            a[1][0] as f64 * x[0] + a[1][1] as f64 * x[1] + p[1],
        ]
    }

    /// `F(x) mod 1`.
    pub fn apply(&self, x: [f64; 2]) -> [f64; 2] {
        let y = self.lift(x);
        [wrap(y[0]), wrap(y[1])]
    }

    /// `sup |Φ·p|` bound from the term coefficients.
    pub fn defect_sup_bound(&self, phi: &[C64; 2]) -> f64 {
        self.terms
            .iter()
            .map(|t| (phi[0] * t.coeff[0] + phi[1] * t.coeff[1]).norm())
            .sum()
    }

    fn lattice_point(&self, idx: usize) -> [f64; 2] {
        let n = self.grid;
        [(idx / n) as f64 / n as f64, (idx % n) as f64 / n as f64]
    }

    fn stencils(&self) -> Vec<Stencil> {
        let n = self.grid;
        (0..n * n)
            .into_par_iter()
            .map(|idx| Stencil::at(self.apply(self.lattice_point(idx)), n))
            .collect()
    }
}

fn wrap(x: f64) -> f64 {
    let w = x.rem_euclid(1.0);
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

/// Bilinear read position on an `N × N` lattice.
#[derive(Debug, Clone, Copy)]
struct Stencil {
    i0: usize,
    j0: usize,
    i1: usize,
    j1: usize,
    fx: f64,
    fy: f64,
}

impl Stencil {
    fn at(x: [f64; 2], n: usize) -> Stencil {
        let sx = wrap(x[0]) * n as f64;
        let sy = wrap(x[1]) * n as f64;
        let fi = sx.floor();
        let fj = sy.floor();
        let i0 = (fi as usize) % n;
        let j0 = (fj as usize) % n;
        Stencil {
            i0,
            j0,
            i1: (i0 + 1) % n,
            j1: (j0 + 1) % n,
            fx: sx - fi,
            fy: sy - fj,
        }
    }

    fn read(&self, h: &[C64], n: usize) -> C64 {
        let (fx, fy) = (self.fx, self.fy);
        h[self.i0 * n + self.j0] * ((1.0 - fx) * (1.0 - fy))
            + h[self.i1 * n + self.j0] * (fx * (1.0 - fy))
            + h[self.i0 * n + self.j1] * ((1.0 - fx) * fy)
            + h[self.i1 * n + self.j1] * (fx * fy)
    }
}

/// `σ(x) = Φ·x + h(x mod 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CMap {
    phi: [C64; 2],
    grid: usize,
    h: Vec<C64>,
}

impl CMap {
    pub fn linear(phi: [C64; 2], grid: usize) -> CMap {
        CMap {
            phi,
            grid,
            h: vec![C64::new(0.0, 0.0); grid * grid],
        }
    }

    pub fn phi(&self) -> [C64; 2] {
        self.phi
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    /// Lattice values of the periodic part, row-major in the first coordinate.
    pub fn values(&self) -> &[C64] {
        &self.h
    }

    pub fn periodic(&self, x: [f64; 2]) -> C64 {
        Stencil::at(x, self.grid).read(&self.h, self.grid)
    }

    pub fn eval(&self, x: [f64; 2]) -> C64 {
        self.phi[0] * x[0] + self.phi[1] * x[1] + self.periodic(x)
    }

    pub fn sup_norm(&self) -> f64 {
        self.h.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn sup_distance(&self, other: &CMap) -> f64 {
        self.h
            .iter()
            .zip(&other.h)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// `‖Φ·A − μΦ − Φ_prev‖∞`.
pub fn class_defect(map: &TorusMapLift, mu: C64, phi: &[C64; 2], prev: Option<&[C64; 2]>) -> f64 {
    let a = map.linear;
    let zero = [C64::new(0.0, 0.0); 2];
    let prev = prev.unwrap_or(&zero);
    (0..2)
        .map(|j| (phi[0] * a[0][j] as f64 + phi[1] * a[1][j] as f64 - mu * phi[j] - prev[j]).norm())
        .fold(0.0, f64::max)
}

fn check_class(map: &TorusMapLift, mu: C64, phi: &[C64; 2], prev: Option<&[C64; 2]>, tol: f64) -> Result<()> {
    if mu.norm() <= 1.0 {
        return Err(Error::NotExpanding { modulus: mu.norm() });
    }
    let scale = phi[0].norm().max(phi[1].norm()).max(1.0) * (1.0 + mu.norm());
    let defect = class_defect(map, mu, phi, prev);
    if defect > tol.max(1e-10) * scale {
        return Err(Error::ClassNotEigen { defect });
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct ContractionReport {
    pub cmap: CMap,
    pub iterations: usize,
    /// `sup |h_{k+1} − h_k|` for each iteration.
    pub steps: Vec<f64>,
}

/// Iterates `h ↦ (source + h∘F)/μ` on the lattice until the step falls below `tol·(1 − 1/|μ|)`.
fn contract(map: &TorusMapLift, mu: C64, source: &[C64], tol: f64, start: Vec<C64>) -> Result<(Vec<C64>, Vec<f64>)> {
    let n = map.grid;
    let stencils = map.stencils();
    let threshold = tol * (1.0 - 1.0 / mu.norm());
    let mut h = start;
    let mut next = vec![C64::new(0.0, 0.0); n * n];
    let mut steps = Vec::new();
    for _ in 0..MAX_ITERATIONS {
        next.par_iter_mut()
            .zip(stencils.par_iter())
            .zip(source.par_iter())
            .for_each(|((out, st), s)| *out = (s + st.read(&h, n)) / mu);
        let step = next
            .par_iter()
            .zip(h.par_iter())
            .map(|(a, b)| (a - b).norm())
            .reduce(|| 0.0, f64::max);
        std::mem::swap(&mut h, &mut next);
        steps.push(step);
        if step < threshold {
            return Ok((h, steps));
        }
    }
    Err(Error::NotConverged {
        iterations: MAX_ITERATIONS,
        last: *steps.last().unwrap_or(&f64::NAN),
    })
}

/// `Φ·p` on the lattice.
fn defect_grid(map: &TorusMapLift, phi: &[C64; 2]) -> Vec<C64> {
    let n = map.grid;
    (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let p = map.perturbation(map.lattice_point(idx));
            phi[0] * p[0] + phi[1] * p[1]
        })
        .collect()
}

pub fn solve_cmap_contraction(map: &TorusMapLift, mu: C64, phi: [C64; 2], tol: f64) -> Result<ContractionReport> {
    check_class(map, mu, &phi, None, tol)?;
    let n = map.grid;
    let source = defect_grid(map, &phi);
    let (h, steps) = contract(map, mu, &source, tol, vec![C64::new(0.0, 0.0); n * n])?;
    Ok(ContractionReport {
        cmap: CMap { phi, grid: n, h },
        iterations: steps.len(),
        steps,
    })
}

/// How the series terms `χ∘F^{j−1}/μ^j` are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesMode {
    /// Compositions through the lattice interpolant, the same discretization as the contraction.
    Grid,
    /// Exact orbits of every lattice point.
    ExactOrbit,
}

pub fn solve_cmap_series(map: &TorusMapLift, mu: C64, phi: [C64; 2], n_terms: usize, mode: SeriesMode) -> Result<CMap> {
    check_class(map, mu, &phi, None, 1e-9)?;
    let n = map.grid;
    let h = match mode {
        SeriesMode::Grid => {
            let stencils = map.stencils();
            let mut term: Vec<C64> = defect_grid(map, &phi).into_iter().map(|c| c / mu).collect();
            let mut h = vec![C64::new(0.0, 0.0); n * n];
            for j in 0..n_terms {
                h.par_iter_mut().zip(term.par_iter()).for_each(|(a, t)| *a += t);
                if j + 1 < n_terms {
                    term = stencils.par_iter().map(|st| st.read(&term, n) / mu).collect();
                }
            }
            h
        }
        SeriesMode::ExactOrbit => (0..n * n)
            .into_par_iter()
            .map(|idx| {
                let mut x = map.lattice_point(idx);
                let mut acc = C64::new(0.0, 0.0);
                let mut w = C64::new(1.0, 0.0) / mu;
                for _ in 0..n_terms {
                    let p = map.perturbation(x);
                    acc += (phi[0] * p[0] + phi[1] * p[1]) * w;
                    x = map.apply(x);
                    w /= mu;
                }
                acc
            })
            .collect(),
    };
    Ok(CMap { phi, grid: n, h })
}

/// `|μ|^{−n}·sup|χ|/(1 − 1/|μ|)`.
pub fn series_tail_bound(mu: C64, chi_sup: f64, n_terms: usize) -> f64 {
    let m = mu.norm();
    m.powi(-(n_terms as i32)) * chi_sup / (1.0 - 1.0 / m)
}

/// `sup |Φ·p(x) + h(F(x)) − μ·h(x)|` over lattice points: `σ∘F − μσ` once the class term
/// `(Φ·A − μΦ)·x` is removed (see [`class_defect`]).
pub fn semiconjugacy_residual(sigma: &CMap, map: &TorusMapLift, mu: C64) -> Result<f64> {
    chain_residual(sigma, None, map, mu)
}

/// `sup |α_{i+1}∘F − μα_{i+1} − α_i|` over lattice points, periodic parts only.
pub fn chain_residual(next: &CMap, prev: Option<&CMap>, map: &TorusMapLift, mu: C64) -> Result<f64> {
    if next.grid != map.grid || prev.is_some_and(|p| p.grid != map.grid) {
        return Err(Error::InvalidMap("c-map and map use different grids".into()));
    }
    let n = map.grid;
    let phi = next.phi;
    Ok((0..n * n)
        .into_par_iter()
        .map(|idx| {
            let x = map.lattice_point(idx);
            let p = map.perturbation(x);
            let st = Stencil::at(map.apply(x), n);
            let mut r = phi[0] * p[0] + phi[1] * p[1] + st.read(&next.h, n) - mu * next.h[idx];
            if let Some(prev) = prev {
                r -= prev.h[idx];
            }
            r.norm()
        })
        .reduce(|| 0.0, f64::max))
}

/// `sup |σ(x + m) − σ(x) − Φ·m|` over the given points and integer shifts.
pub fn equivariance_defect(sigma: &CMap, points: &[[f64; 2]], shifts: &[[i64; 2]]) -> f64 {
    let mut worst = 0.0f64;
    for x in points {
        let base = sigma.eval(*x);
        for m in shifts {
            let y = [x[0] + m[0] as f64, x[1] + m[1] as f64];
            let lin = sigma.phi[0] * m[0] as f64 + sigma.phi[1] * m[1] as f64;
            worst = worst.max((sigma.eval(y) - base - lin).norm());
        }
    }
    worst
}

/// Solves `α_{i+1}∘F = μα_{i+1} + α_i` for the c-map with class `phi_next`, given `α_i = prev`.
pub fn eigenchain_extend(
    map: &TorusMapLift,
    mu: C64,
    prev: &CMap,
    phi_next: [C64; 2],
    tol: f64,
) -> Result<ContractionReport> {
    let ev = map.linear_eigenvalues();
    let repeated = (ev[0] - ev[1]).norm() <= 1e-12 * (1.0 + ev[0].norm());
    let a = map.linear;
    let scalar = a[0][1] == 0 && a[1][0] == 0 && a[0][0] == a[1][1];
    if !repeated || scalar {
        return Err(Error::NoGeneralizedClass(format!(
            "the linear part has no Jordan chain at {}",
            mu
        )));
    }
    check_class(map, mu, &prev.phi, None, tol)?;
    check_class(map, mu, &phi_next, Some(&prev.phi), tol)?;
    if prev.grid != map.grid {
        return Err(Error::InvalidMap("c-map and map use different grids".into()));
    }
    let n = map.grid;
    let source: Vec<C64> = defect_grid(map, &phi_next)
        .into_iter()
        .zip(&prev.h)
        .map(|(c, h)| c - h)
        .collect();
    let (h, steps) = contract(map, mu, &source, tol, vec![C64::new(0.0, 0.0); n * n])?;
    let cmap = CMap { phi: phi_next, grid: n, h };
    let residual = chain_residual(&cmap, Some(prev), map, mu)?;
    if residual > tol.max(1e-12) * (1.0 + mu.norm()) {
        return Err(Error::NotConverged {
            iterations: steps.len(),
            last: residual,
        });
    }
    Ok(ContractionReport {
        cmap,
        iterations: steps.len(),
        steps,
    })
}

/// A map of `ℝⁿ/ℤⁿ`, acting on representatives in `[0, 1)ⁿ`.
pub trait TorusMap: Sync {
    fn dim(&self) -> usize;
    fn step(&self, x: &mut [f64]);
}

/// `x ↦ M·x mod 1` for an integer matrix `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearEndomorphism {
    matrix: Vec<Vec<i64>>,
}

impl LinearEndomorphism {
    pub fn new(matrix: Vec<Vec<i64>>) -> Result<LinearEndomorphism> {
        let d = matrix.len();
        if d == 0 || matrix.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidMap("matrix must be square and nonempty".into()));
        }
        Ok(LinearEndomorphism { matrix })
    }
}

impl TorusMap for LinearEndomorphism {
    fn dim(&self) -> usize {
        self.matrix.len()
    }

    fn step(&self, x: &mut [f64]) {
        let y: Vec<f64> = self
            .matrix
            .iter()
            .map(|row| row.iter().zip(x.iter()).map(|(&a, &b)| a as f64 * b).sum())
            .collect();
        for (xi, yi) in x.iter_mut().zip(y) {
            *xi = wrap(yi);
        }
    }
}

impl TorusMap for TorusMapLift {
    fn dim(&self) -> usize {
        2
    }

    fn step(&self, x: &mut [f64]) {
        let y = self.apply([x[0], x[1]]);
        x[0] = y[0];
        x[1] = y[1];
    }
}

/// A continuous `ℤⁿ`-periodic function with a known sup bound.
pub trait PeriodicFunction: Sync {
    fn eval(&self, x: &[f64]) -> C64;
    fn sup_bound(&self) -> f64;
}

/// One term `coeff·cos(2π freq·x + phase)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CosTerm {
    pub coeff: C64,
    pub freq: Vec<i64>,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrigPolynomial {
    pub terms: Vec<CosTerm>,
}

impl PeriodicFunction for TrigPolynomial {
    fn eval(&self, x: &[f64]) -> C64 {
        self.terms
            .iter()
            .map(|t| {
                let arg: f64 = t.freq.iter().zip(x).map(|(&k, &xi)| k as f64 * xi).sum();
                t.coeff * (TAU * arg + t.phase).cos()
            })
            .sum()
    }

    fn sup_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).sum()
    }
}

/// `χ = Φ·p` for a perturbed torus map.
#[derive(Debug, Clone)]
pub struct CMapDefect<'a> {
    pub map: &'a TorusMapLift,
    pub phi: [C64; 2],
}

impl PeriodicFunction for CMapDefect<'_> {
    fn eval(&self, x: &[f64]) -> C64 {
        let p = self.map.perturbation([x[0], x[1]]);
        self.phi[0] * p[0] + self.phi[1] * p[1]
    }

    fn sup_bound(&self) -> f64 {
        self.map.defect_sup_bound(&self.phi)
    }
}

/// The truncated series `h = Σ_{j=1}^{n} χ∘f^{j−1}/μ^j`.
pub struct CocycleSolution<'a> {
    map: &'a dyn TorusMap,
    chi: &'a dyn PeriodicFunction,
    mu: C64,
    n_terms: usize,
}

pub fn solve_cocycle_equation<'a>(
    map: &'a dyn TorusMap,
    chi: &'a dyn PeriodicFunction,
    mu: C64,
    n_terms: usize,
) -> Result<CocycleSolution<'a>> {
    if mu.norm() <= 1.0 {
        return Err(Error::NotExpanding { modulus: mu.norm() });
    }
    Ok(CocycleSolution { map, chi, mu, n_terms })
}

impl CocycleSolution<'_> {
    pub fn mu(&self) -> C64 {
        self.mu
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    pub fn eval(&self, x: &[f64]) -> C64 {
        let mut y: Vec<f64> = x.iter().map(|&t| wrap(t)).collect();
        let mut acc = C64::new(0.0, 0.0);
        let mut w = C64::new(1.0, 0.0) / self.mu;
        for _ in 0..self.n_terms {
            acc += self.chi.eval(&y) * w;
            self.map.step(&mut y);
            w /= self.mu;
        }
        acc
    }

    /// Distance from the exact solution: `sup|χ|·|μ|^{−n}/(|μ| − 1)`.
    pub fn truncation_bound(&self) -> f64 {
        let m = self.mu.norm();
        self.chi.sup_bound() * m.powi(-(self.n_terms as i32)) / (m - 1.0)
    }

    /// Bound on `|h∘f − μh + χ|` for the truncated series: `sup|χ|·|μ|^{−n}`.
    pub fn residual_bound(&self) -> f64 {
        self.chi.sup_bound() * self.mu.norm().powi(-(self.n_terms as i32))
    }

    pub fn residual_at(&self, x: &[f64]) -> f64 {
        let mut fx: Vec<f64> = x.iter().map(|&t| wrap(t)).collect();
        self.map.step(&mut fx);
        (self.eval(&fx) - self.mu * self.eval(x) + self.chi.eval(x)).norm()
    }
}

/// Samples of the series solution `h` for `χ = Φ·p` along the segment `base + t·u`, `t ∈ [0, length]`,
/// with `u` the unstable direction of the linear part.
pub fn unstable_line_samples(
    map: &TorusMapLift,
    mu: f64,
    phi: [C64; 2],
    base: [f64; 2],
    length: f64,
    points: usize,
    n_terms: usize,
) -> Result<SampledFunction> {
    let chi = CMapDefect { map, phi };
    let sol = solve_cocycle_equation(map, &chi, C64::new(mu, 0.0), n_terms)?;
    let u = map.unstable_direction(mu);
    let xs: Vec<f64> = (0..points)
        .map(|i| if i + 1 == points { length } else { length * i as f64 / (points - 1) as f64 })
        .collect();
    let ys: Vec<C64> = xs
        .par_iter()
        .map(|&t| sol.eval(&[base[0] + t * u[0], base[1] + t * u[1]]))
        .collect();
    SampledFunction::new(xs, ys, "cocycle solution along the unstable direction")
}
