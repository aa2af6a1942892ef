//! Interval charts: blocks starting with a base symbol laid out as nested sub-intervals of
//! `[0, a]` with widths from the Perron-Frobenius eigenvector, and the cumulative function of an
//! unstable staf on such a chart.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::{pair, HolderBound, PairingIntegrand, PairingResult};
use crate::sft::{Block, ShiftSpace};
use crate::spectra::{MatrixSpec, SpectralData};
use crate::staf::{ExpBound, Staf};

/// Points this close to a sub-interval boundary, relative to `a`, are moved onto it.
const SNAP: f64 = 1e-14;

/// JSON chart description; symbols are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixSpec>,
    pub base_symbol: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ordering: Option<BTreeMap<String, Vec<usize>>>,
}

impl ChartSpec {
    pub fn build(&self, spectrum: &SpectralData) -> Result<LeafChart> {
        let d = spectrum.dim();
        if self.base_symbol == 0 || self.base_symbol > d {
            return Err(Error::SymbolOutOfRange {
                symbol: self.base_symbol,
                dim: d,
            });
        }
        let mut order: Vec<Vec<usize>> = (0..d).map(|k| spectrum.matrix().successors(k).to_vec()).collect();
        if let Some(map) = &self.ordering {
            for (key, succ) in map {
                let k: usize = key
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidMatrix(format!("bad ordering key {:?}", key)))?;
                if k == 0 || k > d {
                    return Err(Error::SymbolOutOfRange { symbol: k, dim: d });
                }
                if let Some(&s) = succ.iter().find(|&&s| s == 0 || s > d) {
                    return Err(Error::SymbolOutOfRange { symbol: s, dim: d });
                }
                order[k - 1] = succ.iter().map(|s| s - 1).collect();
            }
        }
        LeafChart::with_order(spectrum, self.base_symbol - 1, order)
    }
}

/// Interval model of the cylinder of a base symbol.
#[derive(Debug, Clone)]
pub struct LeafChart {
    space: ShiftSpace,
    base: usize,
    v: Vec<f64>,
    lambda: f64,
}

impl LeafChart {
    /// Chart on 0-based `base` with ascending successor order.
    pub fn new(spectrum: &SpectralData, base: usize) -> Result<LeafChart> {
        let order = (0..spectrum.dim())
            .map(|k| spectrum.matrix().successors(k).to_vec())
            .collect();
        Self::with_order(spectrum, base, order)
    }

    pub fn with_order(spectrum: &SpectralData, base: usize, order: Vec<Vec<usize>>) -> Result<LeafChart> {
        let d = spectrum.dim();
        if base >= d {
            return Err(Error::SymbolOutOfRange { symbol: base + 1, dim: d });
        }
        let space = ShiftSpace::new(spectrum.matrix().clone(), 2.0)?.with_order(order)?;
        let right = &spectrum.pf().right;
        let norm: f64 = right.iter().map(|x| x.abs()).sum();
        Ok(LeafChart {
            space,
            base,
            v: right.iter().map(|x| x.abs() / norm).collect(),
            lambda: spectrum.lambda(),
        })
    }

    pub fn space(&self) -> &ShiftSpace {
        &self.space
    }

    pub fn base_symbol(&self) -> usize {
        self.base
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Normalized Perron-Frobenius eigenvector.
    pub fn widths(&self) -> &[f64] {
        &self.v
    }

    pub fn total_length(&self) -> f64 {
        self.v[self.base]
    }

    /// Width of a length-`len` block ending in `last`.
    pub fn width(&self, len: usize, last: usize) -> f64 {
        self.v[last] * self.lambda.powi(-(len as i32 - 1))
    }

    fn check_base(&self, b: &[usize]) -> Result<()> {
        if b.first() != Some(&self.base) {
            return Err(Error::WrongBaseSymbol { base: self.base + 1 });
        }
        Ok(())
    }

    /// Left endpoint of the length-`(i+1)` child `c` of a block ending in `p` with left end `left`.
    fn child_left(&self, left: f64, i: usize, p: usize, c: usize) -> f64 {
        let scale = self.lambda.powi(-(i as i32));
        let mut l = left;
        for &k in self.space.ordered_successors(p) {
            if k == c {
                break;
            }
            l += self.v[k] * scale;
        }
        l
    }

    pub fn block_interval(&self, b: &Block) -> Result<(f64, f64)> {
        self.space.check(b)?;
        let s = b.symbols();
        self.check_base(s)?;
        let mut left = 0.0;
        for i in 1..s.len() {
            left = self.child_left(left, i, s[i - 1], s[i]);
        }
        Ok((left, left + self.width(s.len(), b.last())))
    }

    fn check_point(&self, x: f64) -> Result<f64> {
        let a = self.total_length();
        if !x.is_finite() || x < -SNAP * a || x > a * (1.0 + SNAP) {
            return Err(Error::BadPoint { x, a });
        }
        Ok(x.clamp(0.0, a))
    }

    /// One descent step: the child of a block (length `i`, ending in `p`, left end `left`)
    /// containing `x`, its left end, and whether `x` sits on that left end.
    fn descend(&self, x: f64, left: f64, i: usize, p: usize) -> (usize, f64, bool) {
        let a = self.total_length();
        let scale = self.lambda.powi(-(i as i32));
        let succ = self.space.ordered_successors(p);
        let mut l = left;
        for (idx, &k) in succ.iter().enumerate() {
            let r = l + self.v[k] * scale;
            if idx + 1 == succ.len() || x < r - SNAP * a {
                return (k, l, (x - l).abs() <= SNAP * a);
            }
            l = r;
        }
        unreachable!("successor lists are nonempty")
    }

    /// The length-`n` block whose interval `[l, r)` contains `x`; `x = a` gives the last block.
    pub fn locate(&self, x: f64, n: usize) -> Result<Block> {
        let x = self.check_point(x)?;
        if n == 0 {
            return Err(Error::DepthMismatch("locate needs n ≥ 1".into()));
        }
        let mut s = vec![self.base];
        let mut left = 0.0;
        for i in 1..n {
            let (k, l, _) = self.descend(x, left, i, s[i - 1]);
            s.push(k);
            left = l;
        }
        Ok(Block::new(s))
    }
}

/// `H(x) = G([0, x])` for the taf `G` of an unstable staf on a chart.
#[derive(Debug, Clone)]
pub struct CumulativeFunction {
    chart: LeafChart,
    staf: Staf,
    bound: ExpBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderCertificate {
    /// `max |K(b)| / width(b)^ν` over tested blocks.
    pub c_fit: f64,
    /// `log r / log λ`.
    pub nu: f64,
    /// Constant valid for arbitrary subintervals: `|G(J)| ≤ C·|J|^ν`.
    pub interval_constant: f64,
    pub depth: usize,
}

impl CumulativeFunction {
    pub fn new(chart: LeafChart, staf: Staf) -> Result<CumulativeFunction> {
        if chart.space.matrix() != staf.spectrum().matrix() {
            return Err(Error::InvalidMatrix("chart and staf live on different matrices".into()));
        }
        let bound = staf.exponential_bound();
        if !bound.is_unstable {
            return Err(Error::StafNotUnstable { r: bound.r });
        }
        Ok(CumulativeFunction { chart, staf, bound })
    }

    pub fn chart(&self) -> &LeafChart {
        &self.chart
    }

    pub fn staf(&self) -> &Staf {
        &self.staf
    }

    pub fn bound(&self) -> ExpBound {
        self.bound
    }

    pub fn spectrum(&self) -> &Arc<SpectralData> {
        self.staf.spectrum()
    }

    /// `(D − 1)·C·r^{−(n+2)}/(1 − 1/r)`: mass left of `x` inside its length-`(n+1)` block.
    fn remainder(&self, n: usize) -> f64 {
        let d = self.chart.space.matrix().max_out_degree() as f64;
        let r = self.bound.r;
        (d - 1.0) * self.bound.c * r.powi(-(n as i32 + 2)) / (1.0 - 1.0 / r)
    }

    /// `H(x)` with truncation error below `target_error`, and the bound actually achieved.
    pub fn cdf_eval_with_bound(&self, x: f64, target_error: f64) -> Result<(Complex64, f64)> {
        let x = self.chart.check_point(x)?;
        let a = self.chart.total_length();
        let base = self.chart.base;
        if self.bound.c == 0.0 || !self.bound.r.is_finite() {
            return Ok((Complex64::new(0.0, 0.0), 0.0));
        }
        if x >= a * (1.0 - SNAP) {
            return Ok((self.staf.value(1, base)?, 0.0));
        }
        let mut h = Complex64::new(0.0, 0.0);
        let mut last = base;
        let mut left = 0.0;
        let mut n = 1usize;
        loop {
            let (k, l, exact) = self.chart.descend(x, left, n, last);
            let level = self.staf.level(n)?;
            for &s in self.chart.space.ordered_successors(last) {
                if s == k {
                    break;
                }
                h += level[s];
            }
            if exact {
                return Ok((h, 0.0));
            }
            let rem = self.remainder(n);
            if rem < target_error {
                return Ok((h, rem));
            }
            last = k;
            left = l;
            n += 1;
            if n >= self.staf.depth() {
                return Err(Error::DepthOverflow {
                    depth: n,
                    cap: self.staf.depth() - 1,
                });
            }
        }
    }

    pub fn cdf_eval(&self, x: f64, target_error: f64) -> Result<Complex64> {
        self.cdf_eval_with_bound(x, target_error).map(|r| r.0)
    }

    /// `G([c, d]) = H(d) − H(c)`.
    pub fn taf_eval(&self, c: f64, d: f64, target_error: f64) -> Result<Complex64> {
        let c = self.chart.check_point(c)?;
        let d = self.chart.check_point(d)?;
        if c > d {
            return Err(Error::BadPoint { x: c, a: d });
        }
        Ok(self.cdf_eval(d, target_error)? - self.cdf_eval(c, target_error)?)
    }

    /// `(x, H(x))` on `points` equally spaced points of `[0, a]`.
    pub fn cdf_grid(&self, points: usize, target_error: f64) -> Result<Vec<(f64, Complex64)>> {
        let a = self.chart.total_length();
        let m = points.max(2) - 1;
        (0..=m)
            .into_par_iter()
            .map(|i| {
                let x = if i == m { a } else { a * i as f64 / m as f64 };
                Ok((x, self.cdf_eval(x, target_error)?))
            })
            .collect()
    }

    /// `(x, H(x))` at every endpoint of the length-`depth` chart blocks, by exact prefix sums.
    pub fn boundary_samples(&self, depth: usize) -> Result<(Vec<f64>, Vec<Complex64>)> {
        if depth == 0 {
            return Err(Error::DepthMismatch("boundary samples need depth ≥ 1".into()));
        }
        let level = self.staf.level(depth - 1)?;
        let mut xs = vec![0.0];
        let mut hs = vec![Complex64::new(0.0, 0.0)];
        let (mut x, mut h) = (0.0, Complex64::new(0.0, 0.0));
        self.chart.space.visit_extensions(&[self.chart.base], depth, &mut |b: &[usize]| {
            let last = b[b.len() - 1];
            x += self.chart.width(depth, last);
            h += level[last];
            xs.push(x);
            hs.push(h);
        })?;
        Ok((xs, hs))
    }

    pub fn holder_exponent(&self) -> f64 {
        if self.bound.c == 0.0 || !self.bound.r.is_finite() {
            return 1.0;
        }
        (self.bound.r.ln() / self.chart.lambda.ln()).min(1.0)
    }

    /// Checks `|K(b)| ≤ C·width(b)^ν` over all chart blocks of length ≤ `depth`.
    pub fn holder_certificate(&self, depth: usize) -> Result<HolderCertificate> {
        let nu = self.holder_exponent();
        let m = self.chart.space.matrix();
        let d = m.dim();
        let mut reach = vec![false; d];
        reach[self.chart.base] = true;
        let mut c_fit = 0.0f64;
        for len in 1..=depth {
            let level = self.staf.level(len - 1)?;
            for k in (0..d).filter(|&k| reach[k]) {
                let w = self.chart.width(len, k);
                c_fit = c_fit.max(level[k].norm() / w.powf(nu));
            }
            let mut next = vec![false; d];
            for k in (0..d).filter(|&k| reach[k]) {
                for &s in m.successors(k) {
                    next[s] = true;
                }
            }
            reach = next;
        }
        let big_d = m.max_out_degree() as f64;
        let v_min = self.chart.v.iter().cloned().fold(f64::INFINITY, f64::min);
        let r = self.bound.r;
        let interval_constant = if self.bound.c == 0.0 || !r.is_finite() {
            0.0
        } else {
            2.0 * (big_d - 1.0).max(1.0) * self.bound.c / (r * (1.0 - 1.0 / r) * v_min.powf(nu))
        };
        Ok(HolderCertificate {
            c_fit,
            nu,
            interval_constant,
            depth,
        })
    }

    /// `L_G(f) = L_K(f∘ω)` for `f` on `[0, a]` with `|f(x) − f(y)| ≤ c_f·|x − y|^ν₁`.
    pub fn taf_pair<F>(&self, f: F, c_f: f64, nu1: f64, target_error: f64) -> Result<PairingResult>
    where
        F: Fn(f64) -> Complex64 + Sync,
    {
        let nu2 = self.holder_exponent();
        if self.bound.c > 0.0 && nu1 + nu2 <= 1.0 {
            return Err(Error::ExponentSumTooSmall { sum: nu1 + nu2 });
        }
        let integrand = PulledBack {
            chart: &self.chart,
            f,
            c_f,
            nu1,
        };
        pair(&self.staf, &integrand, target_error)
    }
}

/// `f∘ω`, sampled at left endpoints of block intervals.
struct PulledBack<'a, F> {
    chart: &'a LeafChart,
    f: F,
    c_f: f64,
    nu1: f64,
}

impl<F: Fn(f64) -> Complex64 + Sync> PairingIntegrand for PulledBack<'_, F> {
    fn space(&self) -> &ShiftSpace {
        &self.chart.space
    }

    fn native_depth(&self) -> Option<usize> {
        None
    }

    fn root(&self) -> Option<usize> {
        Some(self.chart.base)
    }

    fn holder_bound(&self, _r2: f64, lambda: f64) -> Result<HolderBound> {
        let r1 = lambda.powf(self.nu1);
        let v_max = self.chart.v.iter().cloned().fold(0.0, f64::max);
        Ok(HolderBound {
            c1: self.c_f * v_max.powf(self.nu1) * r1,
            r1,
        })
    }

    fn value_at(&self, b: &[usize]) -> Complex64 {
        let mut left = 0.0;
        for i in 1..b.len() {
            left = self.chart.child_left(left, i, b[i - 1], b[i]);
        }
        (self.f)(left)
    }
}
