//! Regularity diagnostics for sampled functions: steepness, empirical Hölder exponents,
//! variation growth and the scaling law `f(λt) = μ f(t)`.

use std::collections::VecDeque;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functional::ols;

#[derive(Debug, Clone)]
pub struct SampledFunction {
    xs: Vec<f64>,
    ys: Vec<Complex64>,
    provenance: String,
}

impl SampledFunction {
    pub fn new(xs: Vec<f64>, ys: Vec<Complex64>, provenance: impl Into<String>) -> Result<SampledFunction> {
        if xs.len() != ys.len() {
            return Err(Error::InvalidSamples(format!(
                "{} abscissae but {} values",
                xs.len(),
                ys.len()
            )));
        }
        if xs.len() < 3 {
            return Err(Error::InvalidSamples("need at least 3 samples".into()));
        }
        if xs.iter().any(|x| !x.is_finite()) || ys.iter().any(|y| !y.is_finite()) {
            return Err(Error::InvalidSamples("non-finite sample".into()));
        }
        if let Some(i) = xs.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSamples(format!("abscissae not increasing at index {}", i + 1)));
        }
        Ok(SampledFunction {
            xs,
            ys,
            provenance: provenance.into(),
        })
    }

    /// `n` equally spaced samples of `f` on `[a, b]`.
    pub fn uniform<F: Fn(f64) -> Complex64>(a: f64, b: f64, n: usize, f: F, provenance: &str) -> Result<SampledFunction> {
        if n < 3 {
            return Err(Error::InvalidSamples("need at least 3 samples".into()));
        }
        let xs: Vec<f64> = (0..n)
            .map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 })
            .collect();
        let ys = xs.iter().map(|&x| f(x)).collect();
        Self::new(xs, ys, provenance)
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[Complex64] {
        &self.ys
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn scaled(&self, c: Complex64) -> SampledFunction {
        SampledFunction {
            xs: self.xs.clone(),
            ys: self.ys.iter().map(|y| y * c).collect(),
            provenance: self.provenance.clone(),
        }
    }

    /// Linear interpolation, `None` outside the sampled range.
    pub fn interpolate(&self, x: f64) -> Option<Complex64> {
        let n = self.xs.len();
        if x < self.xs[0] || x > self.xs[n - 1] {
            return None;
        }
        let i = self.xs.partition_point(|&t| t <= x);
        if i == n {
            return Some(self.ys[n - 1]);
        }
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let t = (x - x0) / (x1 - x0);
        Some(self.ys[i - 1] * (1.0 - t) + self.ys[i] * t)
    }

    fn nearest_index(&self, p: f64) -> Option<usize> {
        let n = self.xs.len();
        if p < self.xs[0] || p > self.xs[n - 1] {
            return None;
        }
        let i = self.xs.partition_point(|&t| t < p);
        if i == 0 {
            return Some(0);
        }
        if i == n || (p - self.xs[i - 1]) <= (self.xs[i] - p) {
            Some(i - 1)
        } else {
            Some(i)
        }
    }

    fn max_gap(&self) -> f64 {
        self.xs.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }
}

/// Directional steepness at sample `ip`: the largest `C` with
/// `max_{0<|t−p|≤|p′−p|} |f(t) − f(p)| ≥ C·|p′−p|^ν` for every sampled `p′` in the window.
fn directional_steepness(f: &SampledFunction, ip: usize, nu: f64, window: f64, right: bool) -> Option<f64> {
    let p = f.xs[ip];
    let fp = f.ys[ip];
    let mut running = 0.0f64;
    let mut best: Option<f64> = None;
    let mut step = |i: usize| -> bool {
        let dist = (f.xs[i] - p).abs();
        if dist > window {
            return false;
        }
        running = running.max((f.ys[i] - fp).norm());
        let c = running / dist.powf(nu);
        best = Some(best.map_or(c, |b: f64| b.min(c)));
        true
    };
    if right {
        for i in ip + 1..f.len() {
            if !step(i) {
                break;
            }
        }
    } else {
        for i in (0..ip).rev() {
            if !step(i) {
                break;
            }
        }
    }
    best
}

/// Minimum of the left and right steepness constants at `p` over `window`.
pub fn steepness_constant(f: &SampledFunction, p: f64, nu: f64, window: f64) -> Result<f64> {
    let ip = f.nearest_index(p).ok_or(Error::WindowEmpty)?;
    steepness_at(f, ip, nu, window)
}

pub fn steepness_at(f: &SampledFunction, ip: usize, nu: f64, window: f64) -> Result<f64> {
    let r = directional_steepness(f, ip, nu, window, true);
    let l = directional_steepness(f, ip, nu, window, false);
    match (l, r) {
        (Some(a), Some(b)) => Ok(a.min(b)),
        (Some(a), None) | (None, Some(a)) => Ok(a),
        (None, None) => Err(Error::WindowEmpty),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteepnessSummary {
    pub points: usize,
    pub windows: Vec<f64>,
    /// Per point, the minimum constant over all windows.
    pub constants: Vec<f64>,
    pub median_c: f64,
    /// Fraction of points whose constant exceeds `floor`.
    pub fraction_positive: f64,
    pub floor: f64,
}

/// Steepness at each sample index in `points`, minimized over `windows`.
pub fn steepness_scan(
    f: &SampledFunction,
    points: &[usize],
    nu: f64,
    windows: &[f64],
    floor: f64,
) -> Result<SteepnessSummary> {
    if windows.is_empty() || points.is_empty() {
        return Err(Error::WindowEmpty);
    }
    let constants: Vec<f64> = points
        .par_iter()
        .map(|&ip| {
            windows
                .iter()
                .map(|&w| steepness_at(f, ip, nu, w))
                .try_fold(f64::INFINITY, |acc, c| c.map(|c| acc.min(c)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sorted = constants.clone();
    sorted.sort_by(f64::total_cmp);
    let median_c = sorted[sorted.len() / 2];
    let positive = constants.iter().filter(|&&c| c > floor).count();
    Ok(SteepnessSummary {
        points: points.len(),
        windows: windows.to_vec(),
        median_c,
        fraction_positive: positive as f64 / points.len() as f64,
        floor,
        constants,
    })
}

struct MonotoneDeque {
    q: VecDeque<(usize, f64)>,
    max: bool,
}

impl MonotoneDeque {
    fn new(max: bool) -> Self {
        MonotoneDeque { q: VecDeque::new(), max }
    }

    fn push(&mut self, i: usize, v: f64) {
        while let Some(&(_, b)) = self.q.back() {
            if (self.max && b <= v) || (!self.max && b >= v) {
                self.q.pop_back();
            } else {
                break;
            }
        }
        self.q.push_back((i, v));
    }

    fn evict_before(&mut self, i: usize) {
        while self.q.front().is_some_and(|&(j, _)| j < i) {
            self.q.pop_front();
        }
    }

    fn front(&self) -> f64 {
        self.q.front().map_or(0.0, |&(_, v)| v)
    }
}

/// Largest oscillation over windows `[x, x + w]`, measured as the diagonal of the value range.
pub fn max_oscillation(f: &SampledFunction, w: f64) -> f64 {
    let n = f.len();
    let mut deques = [
        MonotoneDeque::new(true),
        MonotoneDeque::new(false),
        MonotoneDeque::new(true),
        MonotoneDeque::new(false),
    ];
    let mut j = 0usize;
    let mut best = 0.0f64;
    for i in 0..n {
        while j < n && f.xs[j] <= f.xs[i] + w {
            let y = f.ys[j];
            deques[0].push(j, y.re);
            deques[1].push(j, y.re);
            deques[2].push(j, y.im);
            deques[3].push(j, y.im);
            j += 1;
        }
        for d in deques.iter_mut() {
            d.evict_before(i);
        }
        let dre = deques[0].front() - deques[1].front();
        let dim = deques[2].front() - deques[3].front();
        best = best.max(dre.hypot(dim));
        if j == n {
            break;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderEstimate {
    pub nu_hat: f64,
    /// Two standard errors of the slope.
    pub band: f64,
    pub scales: Vec<f64>,
    pub oscillations: Vec<f64>,
    pub samples: usize,
}

/// Least-squares slope of log max-oscillation against log window size.
pub fn holder_exponent_estimate(f: &SampledFunction, scales: &[f64]) -> Result<HolderEstimate> {
    if scales.len() < 4 {
        return Err(Error::InsufficientScales(format!("{} scales given, need 4", scales.len())));
    }
    let lo = scales.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = scales.iter().cloned().fold(0.0, f64::max);
    if !(lo > 0.0) || hi / lo < 100.0 * (1.0 - 1e-9) {
        return Err(Error::InsufficientScales(format!(
            "scales span [{}, {}], need two decades",
            lo, hi
        )));
    }
    if lo < f.max_gap() {
        return Err(Error::InsufficientScales(format!(
            "smallest scale {} is below the sample spacing {}",
            lo,
            f.max_gap()
        )));
    }
    let oscillations: Vec<f64> = scales.iter().map(|&w| max_oscillation(f, w)).collect();
    if oscillations.iter().any(|&o| o <= 0.0) {
        return Err(Error::InvalidSamples("zero oscillation at some scale".into()));
    }
    let xs: Vec<f64> = scales.iter().map(|w| w.ln()).collect();
    let ys: Vec<f64> = oscillations.iter().map(|o| o.ln()).collect();
    let (slope, _, se) = ols(&xs, &ys);
    Ok(HolderEstimate {
        nu_hat: slope,
        band: 2.0 * se,
        scales: scales.to_vec(),
        oscillations,
        samples: f.len(),
    })
}

/// `count` scales `largest·2^{−k}`.
pub fn dyadic_scales(largest: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| largest * 0.5f64.powi(k as i32)).collect()
}

/// `count` scales `largest·λ^{−k}`.
pub fn adic_scales(largest: f64, lambda: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| largest * lambda.powi(-(k as i32))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationGrowth {
    pub depths: Vec<usize>,
    pub values: Vec<f64>,
    /// Least-squares slope of log variation against log depth.
    pub fitted_rate: f64,
}

/// Variation over uniform `n`-part subdivisions of `[c, d]`, values interpolated.
pub fn subdivision_variation(f: &SampledFunction, c: f64, d: f64, n: usize) -> Result<f64> {
    let mut prev = f
        .interpolate(c)
        .ok_or_else(|| Error::InvalidSamples(format!("{} outside the sampled range", c)))?;
    let mut total = 0.0;
    for i in 1..=n {
        let t = if i == n { d } else { c + (d - c) * i as f64 / n as f64 };
        let y = f
            .interpolate(t)
            .ok_or_else(|| Error::InvalidSamples(format!("{} outside the sampled range", t)))?;
        total += (y - prev).norm();
        prev = y;
    }
    Ok(total)
}

pub fn variation_growth(f: &SampledFunction, c: f64, d: f64, depths: &[usize]) -> Result<VariationGrowth> {
    let inside = f.xs.iter().filter(|&&x| x >= c && x <= d).count();
    if let Some(&n) = depths.iter().find(|&&n| n == 0 || n + 1 > inside) {
        return Err(Error::InvalidSamples(format!(
            "subdivision into {} parts needs more than {} samples",
            n, inside
        )));
    }
    let values = depths
        .iter()
        .map(|&n| subdivision_variation(f, c, d, n))
        .collect::<Result<Vec<_>>>()?;
    let fitted_rate = if depths.len() >= 2 && values.iter().all(|&v| v > 0.0) {
        let xs: Vec<f64> = depths.iter().map(|&n| (n as f64).ln()).collect();
        let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
        ols(&xs, &ys).0
    } else {
        0.0
    };
    Ok(VariationGrowth {
        depths: depths.to_vec(),
        values,
        fitted_rate,
    })
}

/// `sup |f(λt) − μ·f(t)|` over samples `t` with `λt` in the sampled range.
pub fn scaling_residual(f: &SampledFunction, lambda: f64, mu: Complex64) -> f64 {
    f.xs
        .iter()
        .zip(&f.ys)
        .filter_map(|(&t, &y)| f.interpolate(lambda * t).map(|z| (z - mu * y).norm()))
        .fold(0.0, f64::max)
}

/// Consecutive sample triples whose real parts are not monotone.
pub fn non_monotone_triples(f: &SampledFunction) -> usize {
    f.ys
        .windows(3)
        .filter(|w| (w[1].re - w[0].re) * (w[2].re - w[1].re) < 0.0)
        .count()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    pub provenance: String,
    pub samples: usize,
    pub nu_hat: f64,
    pub band: f64,
    pub holder: HolderEstimate,
    pub steepness_summary: SteepnessSummary,
    pub variation: VariationGrowth,
    pub non_monotone_triples: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn linear_function() {
        let f = SampledFunction::uniform(0.0, 1.0, 100_001, re, "line").unwrap();
        assert!((steepness_constant(&f, 0.3, 1.0, 0.1).unwrap() - 1.0).abs() < 1e-9);
        let est = holder_exponent_estimate(&f, &dyadic_scales(0.5, 8)).unwrap();
        assert!((est.nu_hat - 1.0).abs() < 0.02);
        let v = variation_growth(&f, 0.0, 1.0, &[4, 16, 64]).unwrap();
        assert!(v.values.iter().all(|x| (x - 1.0).abs() < 1e-12));
        assert!(scaling_residual(&f, 2.0, re(2.0)) < 1e-12);
    }

    #[test]
    fn square_root_has_exponent_one_half() {
        let f = SampledFunction::uniform(0.0, 1.0, 100_001, |x| re(x.sqrt()), "sqrt").unwrap();
        let est = holder_exponent_estimate(&f, &dyadic_scales(0.25, 10)).unwrap();
        assert!((est.nu_hat - 0.5).abs() < 0.05, "{:?}", est);
    }

    #[test]
    fn constant_has_zero_steepness_and_rejects_fits() {
        let f = SampledFunction::uniform(0.0, 1.0, 101, |_| re(3.0), "const").unwrap();
        assert_eq!(steepness_constant(&f, 0.5, 0.5, 0.2).unwrap(), 0.0);
        assert!(holder_exponent_estimate(&f, &dyadic_scales(0.5, 3)).is_err());
        assert_eq!(scaling_residual(&f, 2.0, re(1.0)), 0.0);
    }

    #[test]
    fn rejects_bad_samples() {
        assert!(SampledFunction::new(vec![0.0, 1.0], vec![re(0.0); 2], "").is_err());
        assert!(SampledFunction::new(vec![0.0, 2.0, 1.0], vec![re(0.0); 3], "").is_err());
    }
}
