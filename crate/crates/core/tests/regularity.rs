use std::f64::consts::TAU;

use eigenstaf::bundled;
use eigenstaf::regularity::{
    adic_scales, dyadic_scales, holder_exponent_estimate, steepness_constant, variation_growth, SampledFunction,
};
use eigenstaf::spectra::{compute_spectrum, Stability, DEFAULT_TOL};
use eigenstaf::verify::cdf_samples;
use num_complex::Complex64;
use proptest::prelude::*;

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `Σ 2^{−kν} cos(2π 2^k x)`, Hölder of order exactly `ν` at every point.
fn weierstrass(nu: f64, points: usize) -> SampledFunction {
    SampledFunction::uniform(
        0.0,
        1.0,
        points,
        |x| re((0..30).map(|k| 2f64.powf(-nu * k as f64) * (TAU * 2f64.powi(k) * x).cos()).sum()),
        "weierstrass",
    )
    .unwrap()
}

#[test]
fn weierstrass_exponent_is_recovered() {
    for nu in [0.3, 0.5] {
        let f = weierstrass(nu, (1 << 18) + 1);
        let est = holder_exponent_estimate(&f, &dyadic_scales(1.0 / 32.0, 9)).unwrap();
        assert!((est.nu_hat - nu).abs() < 0.05, "{nu}: {}", est.nu_hat);
    }
}

#[test]
fn split_spectrum_cdf_is_not_holder_above_nu() {
    let b = bundled::split5();
    let s = compute_spectrum(&b.matrix(), DEFAULT_TOL).unwrap();
    let mu = s
        .eigenvalues()
        .iter()
        .find(|e| e.stability == Stability::Unstable && (e.value.norm() - s.lambda()).abs() > 1e-9)
        .unwrap()
        .value;
    let (f, nu, lambda) = cdf_samples(&b, mu, 14).unwrap();
    let gap = f.xs().windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    // Windows start a few gaps above the sample spacing, where the oscillation is resolved.
    let scales = adic_scales(gap * lambda.powi(9), lambda, 7);
    let est = holder_exponent_estimate(&f, &scales).unwrap();
    assert!(est.nu_hat <= nu + 0.05, "{} vs {}", est.nu_hat, nu);
}

#[test]
fn monotone_variation_telescopes() {
    let f = SampledFunction::uniform(0.0, 2.0, 4001, |x| re(x.exp() + x.powi(3)), "monotone").unwrap();
    let (c, d) = (0.25, 1.75);
    let total = (f.interpolate(d).unwrap() - f.interpolate(c).unwrap()).norm();
    let v = variation_growth(&f, c, d, &[1, 3, 16, 100, 1000]).unwrap();
    for value in v.values {
        assert!((value - total).abs() < 1e-12 * total);
    }
    assert!(v.fitted_rate.abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shrinking_the_window_never_lowers_steepness(
        p in 0.05f64..0.95,
        nu in 0.2f64..1.0,
        w in 0.01f64..0.3,
        shrink in 0.1f64..1.0,
        kind in 0usize..3,
    ) {
        let f = SampledFunction::uniform(0.0, 1.0, 20001, |x| match kind {
            0 => re((x - 0.5).abs().sqrt()),
            1 => re((9.0 * x).sin() + x),
            _ => Complex64::new((5.0 * x).cos(), x * x),
        }, "synthetic").unwrap();
        let wide = steepness_constant(&f, p, nu, w).unwrap();
        let narrow = steepness_constant(&f, p, nu, w * shrink).unwrap();
        prop_assert!(narrow >= wide - 1e-6);
    }

    #[test]
    fn vertical_scaling_leaves_the_exponent(scale_re in -5.0f64..5.0, scale_im in -5.0f64..5.0) {
        prop_assume!(scale_re.hypot(scale_im) > 1e-3);
        let f = weierstrass(0.5, 8193);
        let scales = dyadic_scales(1.0 / 16.0, 8);
        let base = holder_exponent_estimate(&f, &scales).unwrap();
        let scaled = holder_exponent_estimate(&f.scaled(Complex64::new(scale_re, scale_im)), &scales).unwrap();
        prop_assert!((base.nu_hat - scaled.nu_hat).abs() < 1e-9);
    }
}
