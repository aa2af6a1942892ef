use std::sync::Arc;

use eigenstaf::bundled;
use eigenstaf::functional::{
    bounded_variation_verdict, eigen_distribution_check, pair, pair_with, variation_scan, GridFunction, PairOptions,
    Verdict,
};
use eigenstaf::sft::ShiftSpace;
use eigenstaf::spectra::{compute_spectrum, SpectralData, DEFAULT_TOL};
use eigenstaf::staf::Staf;
use eigenstaf::Error;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn setup(m: usize) -> (Arc<SpectralData>, ShiftSpace) {
    let b = &bundled::all()[m];
    let s = Arc::new(compute_spectrum(&b.matrix(), DEFAULT_TOL).unwrap());
    let space = ShiftSpace::new(b.matrix(), 2.0).unwrap();
    (s, space)
}

fn eigen_stafs(s: &Arc<SpectralData>) -> Vec<(Complex64, Staf)> {
    s.eigenvalues()
        .iter()
        .filter(|e| e.value.norm() > 0.0)
        .map(|e| (e.value, Staf::eigen(s, e.value, 0).unwrap()))
        .collect()
}

#[test]
fn transfer_of_indicators_is_indicator_of_shift() {
    let (_, space) = setup(0);
    for n in 2..=6 {
        for b in space.enumerate_blocks(n).unwrap() {
            let lf = GridFunction::indicator(&space, &b).unwrap().transfer_apply().unwrap();
            let want = GridFunction::indicator(&space, &b.shift().unwrap()).unwrap();
            assert_eq!(lf.depth(), want.depth());
            assert_eq!(lf.values(), want.values());
        }
    }
}

#[test]
fn indicator_pairings_are_exact() {
    for m in 0..3 {
        let (s, space) = setup(m);
        for (_, k) in eigen_stafs(&s) {
            for n in 1..=6 {
                for b in space.enumerate_blocks(n).unwrap() {
                    let f = GridFunction::indicator(&space, &b).unwrap();
                    assert_eq!(pair(&k, &f, 1e-12).unwrap().value, k.evaluate(&b).unwrap());
                }
            }
        }
    }
}

#[test]
fn parallel_pairing_agrees() {
    let (s, space) = setup(2);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let k = Staf::eigen(&s, Complex64::new(s.lambda(), 0.0), 0).unwrap();
    let f = GridFunction::random_holder(&space, 8, 4.0, &mut rng).unwrap();
    let serial = pair(&k, &f, 1e-10).unwrap();
    let par = pair_with(&k, &f, 1e-10, PairOptions { parallel: true }).unwrap();
    assert!((serial.value - par.value).norm() <= serial.rounding_bound + par.rounding_bound);
    assert_eq!(serial.depth_used, par.depth_used);
}

#[test]
fn eigen_distributions() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for m in 0..3 {
        let (s, space) = setup(m);
        for (mu, k) in eigen_stafs(&s) {
            let rho = (2.0 * s.lambda() / k.exponential_bound().r).max(2.0);
            for _ in 0..10 {
                let f = GridFunction::random_holder(&space, 9, rho, &mut rng).unwrap();
                let check = eigen_distribution_check(&k, mu, &f, 1e-10).unwrap();
                assert!(check.passes(), "{mu}: {} > {}", check.residual, check.combined_bound);
            }
        }
    }
}

#[test]
fn variation_dichotomy() {
    for m in 0..3 {
        let (s, _) = setup(m);
        let lambda = s.lambda();
        for (mu, k) in eigen_stafs(&s) {
            let v = bounded_variation_verdict(&k, 30, 1e-6).unwrap();
            if (mu - lambda).norm() < 1e-9 {
                assert!(matches!(v, Verdict::Bounded), "{mu}: {v:?}");
            } else {
                match v {
                    Verdict::DivergesAtRate(rate) => {
                        assert!((rate / (lambda / mu.norm()) - 1.0).abs() < 0.05, "{mu}: {rate}")
                    }
                    other => panic!("{mu}: {other:?}"),
                }
            }
        }
    }
    let (s, _) = setup(0);
    let k = Staf::eigen(&s, Complex64::new(s.lambda(), 0.0), 0).unwrap();
    let scan = variation_scan(&k, 25).unwrap();
    assert!(scan[15..].iter().all(|v| (v / scan[15] - 1.0).abs() < 0.01));
}

#[test]
fn divergent_pairing_is_refused() {
    let (s, space) = setup(0);
    let k = Staf::eigen(&s, s.eigenvalues()[1].value, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let f = GridFunction::random_holder(&space, 6, 1.1, &mut rng).unwrap();
    assert!(matches!(pair(&k, &f, 1e-10), Err(Error::NonConvergent { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn finite_sum_oracle(
        m in 0usize..3,
        depth in 1usize..=4,
        which in 0usize..5,
        vals in proptest::collection::vec(-1.0f64..1.0, 1024),
    ) {
        let (s, space) = setup(m);
        let stafs = eigen_stafs(&s);
        let (_, k) = &stafs[which % stafs.len()];
        let blocks: Vec<_> = space.enumerate_blocks(depth).unwrap().collect();
        let mut i = 0;
        let f = GridFunction::from_fn(&space, depth, None, |_| {
            i += 1;
            Complex64::new(vals[(i - 1) % vals.len()], 0.0)
        })
        .unwrap();
        let mut oracle = Complex64::new(0.0, 0.0);
        let mut mass = 0.0;
        for (j, b) in blocks.iter().enumerate() {
            let kb = k.evaluate(b).unwrap();
            oracle += kb * vals[j % vals.len()];
            mass += kb.norm();
        }
        let got = pair(k, &f, 1e-12).unwrap();
        prop_assert_eq!(got.error_bound, 0.0);
        prop_assert!((got.value - oracle).norm() <= 1e-13 * mass.max(1.0));
    }

    #[test]
    fn pairing_is_continuous(m in 0usize..3, seed in any::<u64>()) {
        let (s, space) = setup(m);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (_, k) in eigen_stafs(&s) {
            let rho = (2.0 * s.lambda() / k.exponential_bound().r).max(2.0);
            let f = GridFunction::random_holder(&space, 8, rho, &mut rng).unwrap();
            let res = pair(&k, &f, 1e-10).unwrap();
            let norm = f.sup_norm() + f.seminorm(res.constants.r1);
            let bound = res.constants.continuity_constant() * norm;
            prop_assert!(res.value.norm() <= bound + res.total_bound());
        }
    }
}
