//! Functions on the shift space, the transfer operator, the distribution pairing of a staf with
//! a Hölder function, and the variation of stafs.

use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sft::{rank_with_table, Block, ShiftSpace};
use crate::staf::Staf;

/// Exponential bound on oscillation: `max_{s,s′∈[b]} |f(s) − f(s′)| ≤ c1·r1^{−ℓ(b)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderBound {
    pub c1: f64,
    pub r1: f64,
}

/// A function on the shift space that is constant on cylinders of length `depth`.
#[derive(Debug, Clone)]
pub struct GridFunction {
    space: ShiftSpace,
    depth: usize,
    values: Vec<Complex64>,
    declared: Option<HolderBound>,
    table: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, Default)]
struct BoundingBox {
    re_min: f64,
    re_max: f64,
    im_min: f64,
    im_max: f64,
}

impl BoundingBox {
    fn point(z: Complex64) -> Self {
        BoundingBox {
            re_min: z.re,
            re_max: z.re,
            im_min: z.im,
            im_max: z.im,
        }
    }

    fn union(self, o: BoundingBox) -> Self {
        BoundingBox {
            re_min: self.re_min.min(o.re_min),
            re_max: self.re_max.max(o.re_max),
            im_min: self.im_min.min(o.im_min),
            im_max: self.im_max.max(o.im_max),
        }
    }

    /// Lower and upper estimates of the diameter of the enclosed set.
    fn diameter_range(&self) -> (f64, f64) {
        let dx = self.re_max - self.re_min;
        let dy = self.im_max - self.im_min;
        (dx.max(dy), dx.hypot(dy))
    }
}

impl GridFunction {
    /// Values from a closure on the length-`depth` blocks, visited in enumeration order.
    pub fn from_fn<F: FnMut(&[usize]) -> Complex64>(
        space: &ShiftSpace,
        depth: usize,
        declared: Option<HolderBound>,
        mut f: F,
    ) -> Result<GridFunction> {
        if depth == 0 {
            return Err(Error::DepthMismatch("grid functions need depth at least 1".into()));
        }
        let mut values = Vec::new();
        space.visit_extensions(&[], depth, &mut |b: &[usize]| values.push(f(b)))?;
        let g = GridFunction {
            space: space.clone(),
            depth,
            values,
            declared,
            table: space.words_from_table(depth),
        };
        if let Some(bound) = declared {
            g.check_bound(bound)?;
        }
        Ok(g)
    }

    pub fn constant(space: &ShiftSpace, depth: usize, c: Complex64) -> Result<GridFunction> {
        Self::from_fn(space, depth, None, |_| c)
    }

    /// 𝟙_{[b]} at its natural depth ℓ(b).
    pub fn indicator(space: &ShiftSpace, b: &Block) -> Result<GridFunction> {
        Self::indicator_at_depth(space, b, b.len())
    }

    pub fn indicator_at_depth(space: &ShiftSpace, b: &Block, depth: usize) -> Result<GridFunction> {
        space.check(b)?;
        if depth < b.len() {
            return Err(Error::DepthMismatch(format!(
                "indicator of a length-{} block needs depth at least {}",
                b.len(),
                b.len()
            )));
        }
        let s = b.symbols();
        Self::from_fn(space, depth, None, |x| {
            Complex64::new(f64::from(u8::from(&x[..s.len()] == s)), 0.0)
        })
    }

    /// `f(s) = Σ_{i<depth} a_{i,sᵢ} ρ^{−i}` with `a` uniform in [−1, 1]; declared bound
    /// `(2/(1 − 1/ρ), ρ)`.
    pub fn random_holder<R: Rng>(space: &ShiftSpace, depth: usize, rho: f64, rng: &mut R) -> Result<GridFunction> {
        let d = space.dim();
        let coeffs: Vec<Vec<f64>> = (0..depth)
            .map(|_| (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect())
            .collect();
        let bound = HolderBound {
            c1: 2.0 / (1.0 - 1.0 / rho),
            r1: rho,
        };
        Self::from_fn(space, depth, Some(bound), |b| {
            let mut w = 1.0;
            let mut acc = 0.0;
            for (i, &s) in b.iter().enumerate() {
                acc += coeffs[i][s] * w;
                w /= rho;
            }
            Complex64::new(acc, 0.0)
        })
    }

    pub fn space(&self) -> &ShiftSpace {
        &self.space
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn declared(&self) -> Option<HolderBound> {
        self.declared
    }

    /// Value on a length-`depth` block.
    pub fn value(&self, b: &[usize]) -> Complex64 {
        self.values[rank_with_table(self.space.order(), &self.table, b)]
    }

    /// Value at the first-successor point of a block of any length.
    pub fn value_at_point(&self, b: &[usize]) -> Complex64 {
        if b.len() >= self.depth {
            return self.value(&b[..self.depth]);
        }
        let mut buf = b.to_vec();
        while buf.len() < self.depth {
            let last = buf[buf.len() - 1];
            buf.push(self.space.ordered_successors(last)[0]);
        }
        self.value(&buf)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Bounding boxes of values over every cylinder of length `1..depth`, visited bottom-up.
    fn visit_boxes<F: FnMut(&[usize], usize, usize, BoundingBox)>(&self, f: &mut F) {
        let mut idx = 0usize;
        let mut buf = Vec::with_capacity(self.depth);
        for j in 0..self.space.dim() {
            buf.push(j);
            self.box_rec(&mut buf, &mut idx, f);
            buf.pop();
        }
    }

    fn box_rec<F: FnMut(&[usize], usize, usize, BoundingBox)>(
        &self,
        buf: &mut Vec<usize>,
        idx: &mut usize,
        f: &mut F,
    ) -> BoundingBox {
        if buf.len() == self.depth {
            let bb = BoundingBox::point(self.values[*idx]);
            *idx += 1;
            return bb;
        }
        let start = *idx;
        let last = buf[buf.len() - 1];
        let mut acc: Option<BoundingBox> = None;
        for &k in self.space.ordered_successors(last) {
            buf.push(k);
            let bb = self.box_rec(buf, idx, f);
            buf.pop();
            acc = Some(acc.map_or(bb, |a| a.union(bb)));
        }
        let bb = acc.expect("every symbol has a successor");
        f(buf, start, *idx, bb);
        bb
    }

    fn exact_diameter(values: &[Complex64]) -> f64 {
        let mut best = 0.0f64;
        for (i, a) in values.iter().enumerate() {
            for b in &values[i + 1..] {
                best = best.max((a - b).norm());
            }
        }
        best
    }

    fn check_bound(&self, bound: HolderBound) -> Result<()> {
        let mut violation: Option<Error> = None;
        self.visit_boxes(&mut |b, start, end, bb| {
            if violation.is_some() {
                return;
            }
            let allowed = bound.c1 * bound.r1.powi(-(b.len() as i32));
            let (lo, hi) = bb.diameter_range();
            let osc = if hi <= allowed {
                hi
            } else if lo > allowed || end - start > 4096 {
                lo.max(hi)
            } else {
                Self::exact_diameter(&self.values[start..end])
            };
            if osc > allowed * (1.0 + 1e-12) {
                violation = Some(Error::BoundViolated {
                    block: Block::new(b.to_vec()).to_string(),
                    oscillation: osc,
                    bound: allowed,
                });
            }
        });
        violation.map_or(Ok(()), Err)
    }

    /// `|f|_{r1} = max_b osc([b])·r1^{ℓ(b)}` over blocks of length ≥ 1, from the data.
    /// Complex oscillations use the bounding-box diagonal, an upper bound.
    pub fn seminorm(&self, r1: f64) -> f64 {
        let mut best = 0.0f64;
        self.visit_boxes(&mut |b, _, _, bb| {
            best = best.max(bb.diameter_range().1 * r1.powi(b.len() as i32));
        });
        best
    }

    /// ℒf(b) = Σ_{j→b₀} f(j·b), at depth one less.
    pub fn transfer_apply(&self) -> Result<GridFunction> {
        if self.depth < 2 {
            return Err(Error::DepthUnderflow);
        }
        let m = self.space.matrix();
        let mut buf = vec![0usize; self.depth];
        let declared = self.declared.map(|h| HolderBound {
            c1: h.c1 * m.max_in_degree() as f64,
            r1: h.r1,
        });
        Self::from_fn(&self.space, self.depth - 1, declared, |b| {
            buf[1..].copy_from_slice(b);
            m.predecessors(b[0])
                .iter()
                .map(|&j| {
                    buf[0] = j;
                    self.value(&buf)
                })
                .sum()
        })
    }

    pub fn scale(&self, c: Complex64) -> GridFunction {
        let mut g = self.clone();
        for v in g.values.iter_mut() {
            *v *= c;
        }
        g.declared = self.declared.map(|h| HolderBound {
            c1: h.c1 * c.norm(),
            r1: h.r1,
        });
        g
    }
}

/// Anything that can be paired with a staf by Riemann sums over cylinders.
pub trait PairingIntegrand: Sync {
    fn space(&self) -> &ShiftSpace;
    /// Depth beyond which the function is constant on cylinders, if any.
    fn native_depth(&self) -> Option<usize>;
    /// Restrict sums to blocks starting with this symbol.
    fn root(&self) -> Option<usize> {
        None
    }
    /// `(c1, r1)` used for the tail estimate; `c1` should come from the data.
    fn holder_bound(&self, r2: f64, lambda: f64) -> Result<HolderBound>;
    /// Value at the first-successor point of `b`.
    fn value_at(&self, b: &[usize]) -> Complex64;
    /// Whether the bound comes from the caller rather than being chosen freely.
    fn declares_bound(&self) -> bool {
        true
    }
}

impl PairingIntegrand for GridFunction {
    fn space(&self) -> &ShiftSpace {
        &self.space
    }

    fn native_depth(&self) -> Option<usize> {
        Some(self.depth)
    }

    fn holder_bound(&self, r2: f64, lambda: f64) -> Result<HolderBound> {
        let r1 = match self.declared {
            Some(h) => h.r1,
            // Locally constant: any r1 works; pick one that converges.
            None => (2.0 * lambda / r2).max(2.0),
        };
        Ok(HolderBound {
            c1: self.seminorm(r1),
            r1,
        })
    }

    fn value_at(&self, b: &[usize]) -> Complex64 {
        self.value_at_point(b)
    }

    fn declares_bound(&self) -> bool {
        self.declared.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairingConstants {
    pub c1: f64,
    pub r1: f64,
    pub c2: f64,
    pub r2: f64,
    pub c3: f64,
    pub lambda: f64,
    pub d: usize,
}

impl PairingConstants {
    pub fn ratio(&self) -> f64 {
        self.lambda / (self.r1 * self.r2)
    }

    /// `Σ_{m≥n} d·c1·c2·c3·r2⁻¹·qᵐ` with `q = λ/(r1·r2)`.
    pub fn tail(&self, n: usize) -> f64 {
        let q = self.ratio();
        if self.c1 == 0.0 || self.c2 == 0.0 {
            return 0.0;
        }
        self.d as f64 * self.c1 * self.c2 * self.c3 / self.r2 * q.powi(n as i32) / (1.0 - q)
    }

    /// `C′` with `|L_K(f)| ≤ C′·(‖f‖∞ + |f|_{r1})`.
    pub fn continuity_constant(&self) -> f64 {
        let q = self.ratio();
        self.d as f64 * self.c2 / self.r2 * (self.c3 * q / (1.0 - q)).max(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairingResult {
    pub value: Complex64,
    /// Truncation bound from the Cauchy estimate; zero once the sum is exact.
    pub error_bound: f64,
    /// Floating-point rounding estimate for the finite sum.
    pub rounding_bound: f64,
    pub depth_used: usize,
    pub constants: PairingConstants,
}

impl PairingResult {
    pub fn total_bound(&self) -> f64 {
        self.error_bound + self.rounding_bound
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PairOptions {
    pub parallel: bool,
}

/// `c3 = max_{1≤m≤depth} N(m)/λᵐ` from exact block counts.
fn block_count_constant(space: &ShiftSpace, lambda: f64, depth: usize) -> f64 {
    let table = space.matrix().column_sum_table(depth.max(1));
    (1..=depth.max(1))
        .map(|m| table[m - 1].iter().sum::<f64>() / lambda.powi(m as i32))
        .fold(0.0, f64::max)
}

const C3_DEPTH: usize = 64;

pub fn pair(k: &Staf, f: &dyn PairingIntegrand, target_error: f64) -> Result<PairingResult> {
    pair_with(k, f, target_error, PairOptions::default())
}

pub fn pair_with(
    k: &Staf,
    f: &dyn PairingIntegrand,
    target_error: f64,
    opts: PairOptions,
) -> Result<PairingResult> {
    let space = f.space();
    if space.matrix() != k.spectrum().matrix() {
        return Err(Error::InvalidMatrix("staf and function live on different matrices".into()));
    }
    let lambda = k.spectrum().lambda();
    let eb = k.exponential_bound();
    let (c2, r2) = if eb.r.is_finite() { (eb.c, eb.r) } else { (0.0, lambda) };
    let hb = f.holder_bound(r2, lambda)?;
    let native = f.native_depth();
    let consts = PairingConstants {
        c1: hb.c1,
        r1: hb.r1,
        c2,
        r2,
        c3: block_count_constant(space, lambda, C3_DEPTH.max(native.unwrap_or(0))),
        lambda,
        d: space.dim(),
    };
    let q = consts.ratio();
    if q >= 1.0 && (native.is_none() || f.declares_bound()) {
        return Err(Error::NonConvergent { ratio: q });
    }
    let mut n = 1usize;
    let mut tail = consts.tail(n);
    loop {
        if let Some(nd) = native {
            if n >= nd {
                n = nd;
                tail = 0.0;
                break;
            }
        }
        if consts.c1 == 0.0 || c2 == 0.0 {
            // Constant on depth-n cylinders: any depth is exact, the native one avoids resummation.
            if let Some(nd) = native.filter(|&nd| nd <= k.depth()) {
                n = nd;
            }
            tail = 0.0;
            break;
        }
        if tail < target_error {
            break;
        }
        n += 1;
        tail = consts.tail(n);
        if n > k.depth() {
            return Err(Error::DepthOverflow {
                depth: n,
                cap: k.depth(),
            });
        }
    }
    if n > k.depth() {
        return Err(Error::DepthOverflow {
            depth: n,
            cap: k.depth(),
        });
    }
    let level = k.level(n - 1)?;
    let prefixes: Vec<Vec<usize>> = match f.root() {
        Some(j) => vec![vec![j]],
        None => (0..space.dim()).map(|j| vec![j]).collect(),
    };
    let partial = |prefix: &Vec<usize>| -> Result<(Complex64, f64, u64)> {
        let mut sum = Complex64::new(0.0, 0.0);
        let mut abs = 0.0f64;
        let mut count = 0u64;
        space.visit_extensions(prefix, n, &mut |b: &[usize]| {
            let term = f.value_at(b) * level[b[b.len() - 1]];
            sum += term;
            abs += term.norm();
            count += 1;
        })?;
        Ok((sum, abs, count))
    };
    let parts: Vec<(Complex64, f64, u64)> = if opts.parallel {
        prefixes.par_iter().map(partial).collect::<Result<Vec<_>>>()?
    } else {
        prefixes.iter().map(partial).collect::<Result<Vec<_>>>()?
    };
    let value: Complex64 = parts.iter().map(|p| p.0).sum();
    let abs: f64 = parts.iter().map(|p| p.1).sum();
    let count: u64 = parts.iter().map(|p| p.2).sum();
    let rounding_bound = (count as f64 + 4.0 * n as f64 + 16.0) * f64::EPSILON * abs;
    Ok(PairingResult {
        value,
        error_bound: tail,
        rounding_bound,
        depth_used: n,
        constants: consts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
    /// `(e₁ + ρ₁) + |μ|·(e₂ + ρ₂)` from the two pairings.
    pub combined_bound: f64,
    pub lhs_result: PairingResult,
    pub rhs_result: PairingResult,
}

impl EigenCheck {
    pub fn passes(&self) -> bool {
        self.residual <= self.combined_bound
    }
}

/// Compares `L_K(ℒf)` with `μ·L_K(f)`.
pub fn eigen_distribution_check(k: &Staf, mu: Complex64, f: &GridFunction, target_error: f64) -> Result<EigenCheck> {
    let lf = f.transfer_apply()?;
    let lhs_result = pair(k, &lf, target_error)?;
    let rhs_result = pair(k, f, target_error)?;
    let lhs = lhs_result.value;
    let rhs = mu * rhs_result.value;
    Ok(EigenCheck {
        lhs,
        rhs,
        residual: (lhs - rhs).norm(),
        combined_bound: lhs_result.total_bound() + mu.norm() * rhs_result.total_bound(),
        lhs_result,
        rhs_result,
    })
}

/// `Σ_j N⁽ⁿ⁾_j·|(K⁽ⁿ⁾)_j|`.
pub fn variation(k: &Staf, n: usize) -> Result<f64> {
    let counts = k.spectrum().matrix().column_sum_counts(n);
    let level = k.level(n)?;
    Ok(counts
        .iter()
        .zip(level.iter())
        .map(|(c, v)| c.to_f64().unwrap_or(f64::INFINITY) * v.norm())
        .sum())
}

/// Variations for `n = 0..=max_n`.
pub fn variation_scan(k: &Staf, max_n: usize) -> Result<Vec<f64>> {
    let table = k.spectrum().matrix().column_sum_table(max_n);
    (0..=max_n)
        .map(|n| {
            let level = k.level(n)?;
            Ok(table[n].iter().zip(level.iter()).map(|(c, v)| c * v.norm()).sum())
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "verdict", content = "rate")]
pub enum Verdict {
    Bounded,
    DivergesAtRate(f64),
}

/// Least-squares slope and intercept of `ys` against `xs`, with the slope's standard error.
pub(crate) fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - intercept - slope * x;
            e * e
        })
        .sum();
    let se = if xs.len() > 2 {
        (sse / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    (slope, intercept, se)
}

/// Bounded iff relative increments stay below `tol` over the last five depths; otherwise the
/// exponential rate from a least-squares fit of log-variation over the top half of `0..=max_n`.
pub fn bounded_variation_verdict(k: &Staf, max_n: usize, tol: f64) -> Result<Verdict> {
    if max_n < 10 {
        return Err(Error::DepthMismatch("variation verdict needs max_n ≥ 10".into()));
    }
    let v = variation_scan(k, max_n)?;
    let flat = (max_n - 4..=max_n).all(|n| {
        let prev = v[n - 1];
        if prev == 0.0 {
            v[n] == 0.0
        } else {
            ((v[n] - prev) / prev).abs() < tol
        }
    });
    if flat {
        return Ok(Verdict::Bounded);
    }
    let lo = max_n / 2;
    let xs: Vec<f64> = (lo..=max_n).map(|n| n as f64).collect();
    let ys: Vec<f64> = (lo..=max_n).map(|n| v[n].ln()).collect();
    let (slope, _, _) = ols(&xs, &ys);
    Ok(Verdict::DivergesAtRate(slope.exp()))
}
