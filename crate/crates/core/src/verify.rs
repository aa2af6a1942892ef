//! The invariant suite run by `eigenstaf verify` and by the acceptance tests.

use std::f64::consts::TAU;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::DVector;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::bundled::{self, BundledMatrix};
use crate::cocycle::{
    equivariance_defect, semiconjugacy_residual, solve_cmap_contraction, solve_cmap_series,
    unstable_line_samples, SeriesMode, TorusMapLift, TrigTerm,
};
use crate::error::Result;
use crate::functional::{bounded_variation_verdict, eigen_distribution_check, pair, variation_scan, GridFunction, Verdict};
use crate::leaf::{CumulativeFunction, LeafChart};
use crate::regularity::{
    adic_scales, holder_exponent_estimate, steepness_scan, variation_growth, SampledFunction,
};
use crate::sft::{Block, ShiftSpace};
use crate::spectra::{compute_spectrum, SpectralData, Stability, DEFAULT_TOL};
use crate::staf::Staf;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub id: usize,
    pub name: String,
    pub passed: bool,
    pub details: Vec<String>,
    #[serde(skip)]
    pub seconds: f64,
}

impl CheckResult {
    pub fn line(&self) -> String {
        format!(
            "{} [{}] {} ({:.2} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds
        )
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Lattice size for the cocycle checks.
    pub cocycle_grid: usize,
    /// Random test functions per eigen-staf in the pairing check.
    pub random_functions: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            seed: 20240607,
            cocycle_grid: 1024,
            random_functions: 50,
        }
    }
}

struct Check {
    ok: bool,
    details: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Check {
            ok: true,
            details: Vec::new(),
        }
    }

    fn require(&mut self, ok: bool, detail: String) {
        self.ok &= ok;
        self.details.push(format!("{} {}", if ok { "ok" } else { "FAILED" }, detail));
    }

    fn note(&mut self, detail: String) {
        self.details.push(format!("info {}", detail));
    }

    fn fail(&mut self, detail: String) {
        self.require(false, detail);
    }
}

fn timed<F: FnOnce(&mut Check) -> Result<()>>(id: usize, name: &str, f: F) -> CheckResult {
    let start = Instant::now();
    let mut c = Check::new();
    if let Err(e) = f(&mut c) {
        c.fail(format!("error {}: {}", e.name(), e));
    }
    CheckResult {
        id,
        name: name.to_string(),
        passed: c.ok,
        details: c.details,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn spectrum(b: &BundledMatrix) -> Result<Arc<SpectralData>> {
    Ok(Arc::new(compute_spectrum(&b.matrix(), DEFAULT_TOL)?))
}

/// Eigen-stafs for every nonzero eigenvalue, one per chain vector.
fn eigen_stafs(s: &Arc<SpectralData>) -> Result<Vec<(Complex64, Staf)>> {
    let mut out = Vec::new();
    for e in s.eigenvalues() {
        if e.stability == Stability::Nilpotent {
            continue;
        }
        let len = s.chains_for(e.value)[0].vectors.len();
        for i in 0..len {
            out.push((e.value, Staf::eigen(s, e.value, i)?));
        }
    }
    Ok(out)
}

fn blocks_up_to(space: &ShiftSpace, max_len: usize) -> Result<Vec<Block>> {
    let mut out = Vec::new();
    for n in 1..=max_len {
        out.extend(space.enumerate_blocks(n)?);
    }
    Ok(out)
}

fn fmt_mu(mu: Complex64) -> String {
    if mu.im == 0.0 {
        format!("{:.6}", mu.re)
    } else {
        format!("{:.6}{:+.6}i", mu.re, mu.im)
    }
}

/// Additivity and coherence of stafs for blocks of length ≤ 8.
pub fn staf_algebra(bundles: &[BundledMatrix], seed: u64) -> CheckResult {
    timed(1, "staf additivity and coherence", |c| {
        let mut rng = StdRng::seed_from_u64(seed);
        for b in bundles {
            let s = spectrum(b)?;
            let space = ShiftSpace::new(b.matrix(), 2.0)?;
            let mut stafs: Vec<(String, Staf)> = eigen_stafs(&s)?
                .into_iter()
                .map(|(mu, k)| (format!("K_{}", fmt_mu(mu)), k))
                .collect();
            let raw = DVector::from_fn(s.dim(), |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let seeded = Staf::from_seed(&s, s.project_nonnilpotent(&raw))?;
            stafs.push(("random seed".into(), seeded.staf));
            let blocks = blocks_up_to(&space, 8)?;
            for (label, k) in &stafs {
                let mut worst_add = 0.0f64;
                let mut coherent = true;
                for blk in &blocks {
                    let v = k.evaluate(blk)?;
                    coherent &= v == k.levels()[blk.len() - 1][blk.last()];
                    if blk.len() == 8 {
                        continue;
                    }
                    let mut sum = Complex64::new(0.0, 0.0);
                    let mut abs = 0.0;
                    for ch in space.children(blk) {
                        let w = k.evaluate(&ch)?;
                        sum += w;
                        abs += w.norm();
                    }
                    let scale = v.norm().max(abs);
                    if scale > 0.0 {
                        worst_add = worst_add.max((v - sum).norm() / scale);
                    }
                }
                c.require(
                    worst_add < 1e-12 && coherent,
                    format!(
                        "{} {}: additivity rel err {:.2e} over {} blocks, coherent {}",
                        b.name,
                        label,
                        worst_add,
                        blocks.len(),
                        coherent
                    ),
                );
            }
        }
        Ok(())
    })
}

/// `σ*K_μ = μK_μ` blockwise to length 8.
pub fn eigen_action(bundles: &[BundledMatrix]) -> CheckResult {
    timed(2, "eigen action of the shift", |c| {
        for b in bundles {
            let s = spectrum(b)?;
            let space = ShiftSpace::new(b.matrix(), 2.0)?;
            let blocks = blocks_up_to(&space, 8)?;
            for (mu, k) in eigen_stafs(&s)? {
                if s.chains_for(mu)[0].vectors.len() > 1 {
                    continue;
                }
                let pulled = k.sigma_pullback();
                let mut worst = 0.0f64;
                for blk in &blocks {
                    let lhs = pulled.evaluate(blk)?;
                    let rhs = mu * k.evaluate(blk)?;
                    let scale = lhs.norm().max(rhs.norm());
                    if scale > 0.0 {
                        worst = worst.max((lhs - rhs).norm() / scale);
                    }
                }
                c.require(
                    worst < 1e-10,
                    format!("{} μ = {}: rel err {:.2e}", b.name, fmt_mu(mu), worst),
                );
            }
            if let Some(e) = s.eigenvalues().iter().find(|e| e.stability == Stability::Nilpotent) {
                c.note(format!("{} μ = {} has no staf (nilpotent)", b.name, fmt_mu(e.value)));
            }
        }
        Ok(())
    })
}

/// Flat variation for the PF staf, divergence at rate `λ/|μ|` for the others.
pub fn variation_dichotomy(bundles: &[BundledMatrix]) -> CheckResult {
    timed(3, "bounded variation dichotomy", |c| {
        for b in bundles {
            let s = spectrum(b)?;
            let lambda = s.lambda();
            for (mu, k) in eigen_stafs(&s)? {
                if (mu - Complex64::new(lambda, 0.0)).norm() < 1e-9 {
                    let v = variation_scan(&k, 25)?;
                    let drift = (15..=25).map(|n| (v[n] / v[15] - 1.0).abs()).fold(0.0, f64::max);
                    c.require(drift < 0.01, format!("{} K_λ: drift over 15..25 is {:.2e}", b.name, drift));
                    continue;
                }
                let expected = lambda / mu.norm();
                match bounded_variation_verdict(&k, 30, 1e-6)? {
                    Verdict::DivergesAtRate(rate) => {
                        let rel = (rate / expected - 1.0).abs();
                        c.require(
                            rel < 0.05,
                            format!(
                                "{} μ = {}: rate {:.6} vs λ/|μ| = {:.6} (rel {:.2e})",
                                b.name,
                                fmt_mu(mu),
                                rate,
                                expected,
                                rel
                            ),
                        );
                    }
                    Verdict::Bounded => c.fail(format!("{} μ = {}: variation stayed bounded", b.name, fmt_mu(mu))),
                }
            }
        }
        Ok(())
    })
}

/// Indicator pairings and the eigen-distribution relation on random Hölder functions.
pub fn distribution_pairing(bundles: &[BundledMatrix], seed: u64, functions: usize) -> CheckResult {
    timed(4, "distribution pairing", |c| {
        let mut rng = StdRng::seed_from_u64(seed);
        for b in bundles {
            let s = spectrum(b)?;
            let space = ShiftSpace::new(b.matrix(), 2.0)?;
            let blocks = blocks_up_to(&space, 6)?;
            for (mu, k) in eigen_stafs(&s)? {
                let mut exact = true;
                for blk in &blocks {
                    let f = GridFunction::indicator(&space, blk)?;
                    exact &= pair(&k, &f, 1e-12)?.value == k.evaluate(blk)?;
                }
                c.require(
                    exact,
                    format!("{} μ = {}: indicator pairings exact on {} blocks", b.name, fmt_mu(mu), blocks.len()),
                );
                if s.chains_for(mu)[0].vectors.len() > 1 {
                    continue;
                }
                let r2 = k.exponential_bound().r;
                let rho = (2.0 * s.lambda() / r2).max(2.0);
                let mut worst_ratio = 0.0f64;
                let mut passed = 0;
                for _ in 0..functions {
                    let f = GridFunction::random_holder(&space, 9, rho, &mut rng)?;
                    let check = eigen_distribution_check(&k, mu, &f, 1e-10)?;
                    if check.passes() {
                        passed += 1;
                    }
                    if check.combined_bound > 0.0 {
                        worst_ratio = worst_ratio.max(check.residual / check.combined_bound);
                    } else if check.residual > 0.0 {
                        worst_ratio = f64::INFINITY;
                    }
                }
                c.require(
                    passed == functions,
                    format!(
                        "{} μ = {}: {}/{} eigen-distribution residuals within bound (worst residual/bound {:.3})",
                        b.name,
                        fmt_mu(mu),
                        passed,
                        functions,
                        worst_ratio
                    ),
                );
            }
        }
        Ok(())
    })
}

/// `ℒ𝟙_[b] = 𝟙_[σb]` on the golden matrix for `2 ≤ ℓ(b) ≤ 6`.
pub fn transfer_indicators() -> CheckResult {
    timed(5, "transfer operator on indicators", |c| {
        let space = ShiftSpace::new(bundled::golden().matrix(), 2.0)?;
        let mut count = 0;
        let mut ok = true;
        for n in 2..=6 {
            for blk in space.enumerate_blocks(n)? {
                let l = GridFunction::indicator(&space, &blk)?.transfer_apply()?;
                let shifted = blk.shift().expect("length at least 2");
                let expected = GridFunction::indicator(&space, &shifted)?;
                ok &= l.values() == expected.values();
                count += 1;
            }
        }
        c.require(ok, format!("golden: {} blocks checked", count));
        Ok(())
    })
}

fn unstable_cdfs(b: &BundledMatrix, s: &Arc<SpectralData>) -> Result<Vec<(Complex64, CumulativeFunction)>> {
    let chart = LeafChart::new(s, b.fixed_symbol)?;
    let mut out = Vec::new();
    for e in s.eigenvalues() {
        if e.stability == Stability::Unstable && s.chains_for(e.value)[0].vectors.len() == 1 {
            out.push((e.value, CumulativeFunction::new(chart.clone(), Staf::eigen(s, e.value, 0)?)?));
        }
    }
    Ok(out)
}

/// Interval partitions, `H_{K_λ}(x) = x` and CDF increments.
pub fn leaf_geometry(bundles: &[BundledMatrix]) -> CheckResult {
    timed(6, "leaf geometry", |c| {
        for b in bundles {
            let s = spectrum(b)?;
            let chart = LeafChart::new(&s, b.fixed_symbol)?;
            let space = chart.space().clone();
            let root = Block::new(vec![b.fixed_symbol]);
            let mut worst = 0.0f64;
            let mut nodes = 0;
            for n in 1..10 {
                for blk in space.enumerate_extensions(&root, n)? {
                    let (l, r) = chart.block_interval(&blk)?;
                    let w = r - l;
                    let mut cursor = l;
                    for ch in space.children(&blk) {
                        let (cl, cr) = chart.block_interval(&ch)?;
                        worst = worst.max((cl - cursor).abs() / w);
                        cursor = cr;
                    }
                    worst = worst.max((cursor - r).abs() / w);
                    nodes += 1;
                }
            }
            c.require(
                worst < 1e-12,
                format!("{}: partition rel err {:.2e} over {} nodes", b.name, worst, nodes),
            );
            let pf = CumulativeFunction::new(chart.clone(), Staf::eigen(&s, Complex64::new(s.lambda(), 0.0), 0)?)?;
            let dev = pf
                .cdf_grid(10_000, 1e-12)?
                .iter()
                .map(|(x, h)| (h - Complex64::new(*x, 0.0)).norm())
                .fold(0.0, f64::max);
            c.require(dev < 1e-10, format!("{}: max |H_λ(x) − x| = {:.2e} on 10^4 points", b.name, dev));
            let target = 1e-10;
            for (mu, h) in unstable_cdfs(b, &s)? {
                let mut worst = 0.0f64;
                let mut count = 0;
                for n in 1..=8 {
                    for blk in space.enumerate_extensions(&root, n)? {
                        let (l, r) = chart.block_interval(&blk)?;
                        let g = h.taf_eval(l, r, target)?;
                        worst = worst.max((g - h.staf().evaluate(&blk)?).norm());
                        count += 1;
                    }
                }
                c.require(
                    worst <= 2.0 * target,
                    format!(
                        "{} μ = {}: |G(I_b) − K(b)| ≤ {:.2e} over {} blocks (allowed {:.0e})",
                        b.name,
                        fmt_mu(mu),
                        worst,
                        count,
                        2.0 * target
                    ),
                );
            }
        }
        Ok(())
    })
}

/// `G(I_n)/G(I_0) = μ^{−n}` and `m^u(I_n)/m^u(I_0) = λ^{−n}` on the blocks `jⁿ⁺¹`.
pub fn self_similarity(bundles: &[BundledMatrix]) -> CheckResult {
    timed(7, "self-similarity at fixed points", |c| {
        for b in bundles {
            let s = spectrum(b)?;
            let j = b.fixed_symbol;
            let lambda = s.lambda();
            for (mu, h) in unstable_cdfs(b, &s)? {
                let chart = h.chart();
                let (l0, r0) = chart.block_interval(&Block::new(vec![j]))?;
                let g0 = h.taf_eval(l0, r0, 1e-15)?;
                let mut worst_g = 0.0f64;
                let mut worst_m = 0.0f64;
                for n in 0..=12 {
                    let blk = Block::new(vec![j; n + 1]);
                    let (l, r) = chart.block_interval(&blk)?;
                    let expected_g = mu.powi(-(n as i32));
                    let g = h.taf_eval(l, r, 1e-15 * expected_g.norm() * g0.norm())?;
                    worst_g = worst_g.max((g / g0 - expected_g).norm() / expected_g.norm());
                    let expected_m = lambda.powi(-(n as i32));
                    worst_m = worst_m.max(((r - l) / (r0 - l0) - expected_m).abs() / expected_m);
                }
                c.require(
                    worst_g < 1e-10 && worst_m < 1e-10,
                    format!(
                        "{} μ = {}: rel err {:.2e} (taf), {:.2e} (length) for n ≤ 12",
                        b.name,
                        fmt_mu(mu),
                        worst_g,
                        worst_m
                    ),
                );
            }
        }
        Ok(())
    })
}

/// Samples of `H_{K_μ}` at all length-`depth` block endpoints of the chart on the fixed symbol.
pub fn cdf_samples(b: &BundledMatrix, mu: Complex64, depth: usize) -> Result<(SampledFunction, f64, f64)> {
    let s = spectrum(b)?;
    let chart = LeafChart::new(&s, b.fixed_symbol)?;
    let h = CumulativeFunction::new(chart, Staf::eigen(&s, mu, 0)?)?;
    let (xs, ys) = h.boundary_samples(depth)?;
    let nu = h.holder_exponent();
    Ok((SampledFunction::new(xs, ys, format!("H for μ = {} on {}", fmt_mu(mu), b.name))?, nu, s.lambda()))
}

/// Hölder exponent, steepness and variation growth of `H_{K_μ}` on the split-spectrum matrix.
pub fn regularity(seed: u64) -> CheckResult {
    timed(8, "regularity of the cumulative function", |c| {
        let b = bundled::split5();
        let s = spectrum(&b)?;
        let mu = s
            .eigenvalues()
            .iter()
            .find(|e| e.stability == Stability::Unstable && (e.value.norm() - s.lambda()).abs() > 1e-9)
            .map(|e| e.value)
            .expect("split5 has a second unstable eigenvalue");
        let (f, nu, lambda) = cdf_samples(&b, mu, 16)?;
        let a = *f.xs().last().expect("nonempty");
        c.note(format!("{} samples, ν = log|μ|/log λ = {:.6}", f.len(), nu));
        let est = holder_exponent_estimate(&f, &adic_scales(a * lambda.powi(-2), lambda, 8))?;
        c.require(
            (est.nu_hat - nu).abs() < 0.05,
            format!("Hölder estimate {:.4} ± {:.4} vs ν = {:.4}", est.nu_hat, est.band, nu),
        );
        let mut rng = StdRng::seed_from_u64(seed);
        let n = f.len();
        let points: Vec<usize> = (0..1000).map(|_| rng.gen_range(1..n - 1)).collect();
        let windows = adic_scales(a * lambda.powi(-3), lambda, 5);
        let probe = steepness_scan(&f, &points, nu, &windows, 0.0)?;
        let floor = 0.01 * probe.median_c;
        let st = steepness_scan(&f, &points, nu, &windows, floor)?;
        c.require(
            st.fraction_positive >= 0.95,
            format!(
                "steepness above {:.3e} at {:.1}% of {} points over {} scales (median {:.4})",
                floor,
                100.0 * st.fraction_positive,
                st.points,
                windows.len(),
                st.median_c
            ),
        );
        let depths: Vec<usize> = (4..=12).map(|i| 1usize << i).collect();
        let v = variation_growth(&f, 0.0, a, &depths)?;
        c.require(
            v.fitted_rate >= 0.85 * (1.0 - nu),
            format!("variation growth exponent {:.4} vs required {:.4}", v.fitted_rate, 0.85 * (1.0 - nu)),
        );
        Ok(())
    })
}

/// The perturbed cat map `[[2,1],[1,1]] + 0.01·(sin 2πy, sin 2πx)`.
pub fn perturbed_cat_map(amplitude: f64, grid: usize) -> Result<TorusMapLift> {
    let terms = if amplitude == 0.0 {
        vec![]
    } else {
        vec![
            TrigTerm {
                coeff: [amplitude, 0.0],
                freq: [0, 1],
                phase: 0.0,
            },
            TrigTerm {
                coeff: [0.0, amplitude],
                freq: [1, 0],
                phase: 0.0,
            },
        ]
    };
    TorusMapLift::new([[2, 1], [1, 1]], terms, grid)
}

/// Contraction and series solutions for eigen c-maps of the cat map.
pub fn cocycle(grid: usize, seed: u64) -> CheckResult {
    timed(9, "cocycle solver", |c| {
        let linear = perturbed_cat_map(0.0, grid)?;
        let mu = linear.linear_eigenvalues()[0];
        let phi = linear.left_eigenvector(mu)?;
        let r = solve_cmap_contraction(&linear, mu, phi, 1e-10)?;
        let res0 = semiconjugacy_residual(&r.cmap, &linear, mu)?;
        c.require(
            r.cmap.sup_norm() == 0.0 && res0 == 0.0,
            format!("linear map: sup|h| = {:e}, residual {:e}", r.cmap.sup_norm(), res0),
        );
        let map = perturbed_cat_map(0.01, grid)?;
        let r = solve_cmap_contraction(&map, mu, phi, 1e-10)?;
        let res = semiconjugacy_residual(&r.cmap, &map, mu)?;
        c.require(
            res < 1e-8,
            format!("perturbed map, {}² grid: residual {:.2e} after {} iterations", grid, res, r.iterations),
        );
        let series = solve_cmap_series(&map, mu, phi, 40, SeriesMode::Grid)?;
        let diff = series.sup_distance(&r.cmap);
        c.require(diff < 1e-7, format!("contraction vs 40-term series: {:.2e}", diff));
        let exact = solve_cmap_series(&map, mu, phi, 40, SeriesMode::ExactOrbit)?;
        c.note(format!(
            "contraction vs exact-orbit series: {:.2e} (interpolation error)",
            exact.sup_distance(&r.cmap)
        ));
        let mut rng = StdRng::seed_from_u64(seed);
        let points: Vec<[f64; 2]> = (0..200).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect();
        let shifts: Vec<[i64; 2]> = (0..20).map(|_| [rng.gen_range(-3..=3), rng.gen_range(-3..=3)]).collect();
        let eq = equivariance_defect(&r.cmap, &points, &shifts);
        c.require(eq < 1e-12, format!("equivariance defect {:.2e}", eq));
        let line = unstable_line_samples(&map, mu.re, phi, [0.1, 0.23], 1e-3, (1 << 18) + 1, 44)?;
        let dx = 1e-3 / (1 << 18) as f64;
        let scales: Vec<f64> = (1..=8).map(|i| dx * (1u64 << i) as f64).collect();
        let est = holder_exponent_estimate(&line, &scales)?;
        let m = mu.re;
        let model = SampledFunction::uniform(
            0.1,
            0.1 + 1e-3,
            (1 << 18) + 1,
            |t| Complex64::new((0..60).map(|j| m.powi(-j) * (TAU * m.powi(j) * t + 0.7 * j as f64).cos()).sum(), 0.0),
            "exponent-one lacunary series",
        )?;
        let reference = holder_exponent_estimate(&model, &scales)?;
        c.note(format!(
            "Hölder estimate along the unstable line {:.4} ± {:.4} (ν = 1; an exponent-one lacunary series reads {:.4} on the same windows)",
            est.nu_hat, est.band, reference.nu_hat
        ));
        Ok(())
    })
}

/// Exact characteristic polynomials, PF convergence and the lower bound for restricted inverses.
pub fn spectra(bundles: &[BundledMatrix]) -> CheckResult {
    timed(10, "spectra", |c| {
        for b in bundles {
            let s = spectrum(b)?;
            let got: Vec<String> = s.char_poly().descending_strings();
            let want: Vec<String> = b.char_poly.iter().map(|x| x.to_string()).collect();
            c.require(got == want, format!("{}: char poly {}", b.name, s.char_poly()));
            let lambda = s.lambda();
            let (_, right, left) = s.eigen_pair(Complex64::new(lambda, 0.0))?;
            let p = b.matrix().int_power(60);
            let l60 = lambda.powi(60);
            let mut dev = 0.0f64;
            for (i, row) in p.iter().enumerate() {
                for (j, x) in row.iter().enumerate() {
                    let v = x.to_f64().unwrap_or(f64::INFINITY) / l60;
                    dev = dev.max((v - (right[i] * left[j]).re).abs());
                }
            }
            c.require(dev < 1e-8, format!("{}: ‖A⁶⁰/λ⁶⁰ − v_r v_ℓ‖∞ = {:.2e}", b.name, dev));
            let others: Vec<&crate::spectra::EigenChain> = s
                .chains()
                .iter()
                .filter(|ch| ch.eigenvalue.norm() > 0.0 && (ch.eigenvalue - Complex64::new(lambda, 0.0)).norm() > 1e-9)
                .collect();
            if others.is_empty() {
                continue;
            }
            let second = others.iter().map(|ch| ch.eigenvalue.norm()).fold(0.0, f64::max);
            let r = 0.5 * (lambda + second);
            let mut v = DVector::from_element(s.dim(), Complex64::new(0.0, 0.0));
            for ch in &others {
                v += &ch.vectors[0];
            }
            let binv = s.restricted_inverse();
            let a = b.matrix().to_complex();
            let mut w = v.clone();
            let mut lower = f64::INFINITY;
            let mut worst_solve = 0.0f64;
            for n in 1..=30 {
                let prev = w.clone();
                w = binv * &w;
                worst_solve = worst_solve.max((&a * &w - &prev).camax() / prev.camax());
                lower = lower.min(w.lp_norm(1) * r.powi(n) / v.lp_norm(1));
            }
            c.require(
                lower > 0.1 && worst_solve < 1e-8,
                format!(
                    "{}: min ‖w_n‖₁ rⁿ/‖v‖₁ = {:.4} for n ≤ 30 with r = {:.4} (A·w_n = w_(n−1) residual {:.1e})",
                    b.name, lower, r, worst_solve
                ),
            );
        }
        Ok(())
    })
}

/// All ten checks over the bundled matrices.
pub fn run_suite(opts: SuiteOptions) -> Vec<CheckResult> {
    run_checks(&bundled::all(), opts)
}

/// All ten checks, with the matrix-generic ones restricted to `bundles`.
pub fn run_checks(bundles: &[BundledMatrix], opts: SuiteOptions) -> Vec<CheckResult> {
    vec![
        staf_algebra(bundles, opts.seed),
        eigen_action(bundles),
        variation_dichotomy(bundles),
        distribution_pairing(bundles, opts.seed, opts.random_functions),
        transfer_indicators(),
        leaf_geometry(bundles),
        self_similarity(bundles),
        regularity(opts.seed),
        cocycle(opts.cocycle_grid, opts.seed),
        spectra(bundles),
    ]
}
