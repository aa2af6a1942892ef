use std::sync::Arc;

use eigenstaf::bundled;
use eigenstaf::sft::{Block, ShiftSpace};
use eigenstaf::spectra::{classify_spectrum, compute_spectrum, SpectralData, TransitionMatrix, DEFAULT_TOL};
use eigenstaf::staf::{InvariantSetFn, Staf, StafSpec};
use eigenstaf::Error;
use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;

const JORDAN5: [[u8; 5]; 5] = [
    [0, 1, 1, 1, 0],
    [0, 1, 0, 0, 1],
    [1, 1, 1, 1, 0],
    [1, 0, 0, 1, 0],
    [0, 1, 0, 1, 0],
];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn spectra() -> Vec<Arc<SpectralData>> {
    let mut mats: Vec<TransitionMatrix> = bundled::all().iter().map(|b| b.matrix()).collect();
    mats.push(TransitionMatrix::new(JORDAN5.iter().map(|r| r.to_vec()).collect()).unwrap());
    mats.into_iter()
        .map(|a| Arc::new(compute_spectrum(&a, DEFAULT_TOL).unwrap()))
        .collect()
}

fn blocks(s: &SpectralData, max_len: usize) -> (ShiftSpace, Vec<Block>) {
    let space = ShiftSpace::new(s.matrix().clone(), 2.0).unwrap();
    let all = (1..=max_len)
        .flat_map(|n| space.enumerate_blocks(n).unwrap().collect::<Vec<_>>())
        .collect();
    (space, all)
}

fn seed_in_nonn(s: &SpectralData, coeffs: &[(f64, f64)]) -> DVector<Complex64> {
    let basis = classify_spectrum(s, DEFAULT_TOL).nonnilpotent_basis();
    basis
        .iter()
        .zip(coeffs.iter().cycle())
        .fold(DVector::zeros(s.dim()), |acc, (v, &(re, im))| acc + v * c(re, im))
}

/// `σ*K(b) = K(σb)`; a single symbol pulls back to the union of its successors' cylinders.
fn pullback_oracle(space: &ShiftSpace, k: &Staf, b: &Block) -> Complex64 {
    match b.shift() {
        Some(t) if !t.is_empty() => k.evaluate(&t).unwrap(),
        _ => space
            .matrix()
            .successors(b.first())
            .iter()
            .map(|&j| k.evaluate(&Block::new(vec![j])).unwrap())
            .sum(),
    }
}

fn additivity_error(space: &ShiftSpace, k: &Staf, bs: &[Block]) -> f64 {
    let scale = k.seed().iter().map(|z| z.norm()).fold(0.0, f64::max);
    bs.iter()
        .filter(|b| b.len() < 8)
        .map(|b| {
            let sum: Complex64 = space.children(b).iter().map(|ch| k.evaluate(ch).unwrap()).sum();
            (sum - k.evaluate(b).unwrap()).norm() / scale
        })
        .fold(0.0, f64::max)
}

#[test]
fn eigen_stafs_are_additive_and_shift_eigen() {
    for s in spectra() {
        let (space, bs) = blocks(&s, 8);
        for e in s.eigenvalues().iter().filter(|e| e.value.norm() > 0.0) {
            let k = Staf::eigen(&s, e.value, 0).unwrap();
            assert!(additivity_error(&space, &k, &bs) < 1e-12);
            let mut worst = 0.0f64;
            let mut scale = 0.0f64;
            for b in &bs {
                let lhs = pullback_oracle(&space, &k, b);
                let rhs = e.value * k.evaluate(b).unwrap();
                worst = worst.max((lhs - rhs).norm());
                scale = scale.max(rhs.norm());
                assert_eq!(k.sigma_pullback().evaluate(b).unwrap(), lhs);
            }
            assert!(worst < 1e-10 * scale, "{}: {worst}", e.value);
        }
    }
}

#[test]
fn generalized_chain_relation() {
    let s = &spectra()[3];
    let chain = s.chains().iter().find(|ch| ch.vectors.len() >= 2).expect("Jordan block");
    let mu = chain.eigenvalue;
    let (space, bs) = blocks(s, 8);
    for i in 0..chain.vectors.len() - 1 {
        let lower = Staf::eigen(s, mu, i).unwrap();
        let upper = Staf::eigen(s, mu, i + 1).unwrap();
        assert!(additivity_error(&space, &upper, &bs) < 1e-12);
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for b in &bs {
            let lhs = pullback_oracle(&space, &upper, b);
            let rhs = mu * upper.evaluate(b).unwrap() + lower.evaluate(b).unwrap();
            worst = worst.max((lhs - rhs).norm());
            scale = scale.max(rhs.norm());
        }
        assert!(worst < 1e-10 * scale, "chain {i}: {worst}");
    }
    assert!(matches!(
        Staf::eigen(s, mu, chain.vectors.len()),
        Err(Error::IndexExceedsChain { .. })
    ));
}

#[test]
fn invariant_set_function_is_a_probability() {
    for s in spectra() {
        let j = InvariantSetFn::new(&s, c(s.lambda(), 0.0)).unwrap();
        let (space, _) = blocks(&s, 1);
        for n in 1..=8 {
            let total: Complex64 = space.enumerate_blocks(n).unwrap().map(|b| j.j_evaluate(&b)).sum();
            assert!((total - 1.0).norm() < 1e-12, "n = {n}: {total}");
        }
        for b in space.enumerate_blocks(5).unwrap() {
            let pre: Complex64 = space
                .matrix()
                .predecessors(b.first())
                .iter()
                .map(|&i| j.j_evaluate(&b.prepend(i)))
                .sum();
            assert!((pre - j.j_evaluate(&b)).norm() < 1e-14);
        }
    }
}

#[test]
fn spec_round_trip() {
    let json = r#"{"matrix": {"dim": 2, "rows": [[1, 1], [1, 0]]}, "kind": "eigen", "mu": [-0.6180339887498949, 0.0]}"#;
    let spec: StafSpec = serde_json::from_str(json).unwrap();
    let s = Arc::new(compute_spectrum(&bundled::golden().matrix(), DEFAULT_TOL).unwrap());
    let k = spec.build(&s, 20).unwrap().staf;
    assert_eq!(k.depth(), 21);
    let direct = Staf::eigen(&s, s.eigenvalues()[1].value, 0).unwrap();
    assert_eq!(k.levels()[..21], direct.levels()[..21]);
    assert!(serde_json::from_str::<StafSpec>(r#"{"kind": "eigen", "extra": 1}"#).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn seeded_stafs_are_additive_and_coherent(
        m in 0usize..4,
        coeffs in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 5),
    ) {
        let s = &spectra()[m];
        let seed = seed_in_nonn(s, &coeffs);
        prop_assume!(seed.iter().any(|z| z.norm() > 1e-3));
        let built = Staf::from_seed_with_depth(s, seed.clone(), 8).unwrap();
        let k = built.staf;
        prop_assert!((k.seed() - &seed).iter().all(|z| z.norm() < 1e-9));
        let (space, bs) = blocks(s, 8);
        prop_assert!(additivity_error(&space, &k, &bs) < 1e-12);
        let mut by_end = std::collections::HashMap::new();
        for b in &bs {
            let v = k.evaluate(b).unwrap();
            let prev = *by_end.entry((b.len(), b.last())).or_insert(v);
            prop_assert_eq!(prev, v);
        }
    }

    #[test]
    fn seeding_is_linear(
        m in 0usize..4,
        x in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 5),
        y in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 5),
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
    ) {
        let s = &spectra()[m];
        let (sx, sy) = (seed_in_nonn(s, &x), seed_in_nonn(s, &y));
        let kx = Staf::from_seed_with_depth(s, sx.clone(), 10).unwrap().staf;
        let ky = Staf::from_seed_with_depth(s, sy.clone(), 10).unwrap().staf;
        let kxy = Staf::from_seed_with_depth(s, &sx * c(a, 0.0) + &sy * c(b, 0.0), 10).unwrap().staf;
        let combo = Staf::linear_combination(&[(c(a, 0.0), &kx), (c(b, 0.0), &ky)]).unwrap();
        for n in 0..=10 {
            let scale = 1.0 + combo.levels()[n].iter().map(|z| z.norm()).fold(0.0, f64::max);
            let diff = (&kxy.levels()[n] - &combo.levels()[n]).iter().map(|z| z.norm()).fold(0.0, f64::max);
            prop_assert!(diff < 1e-10 * scale);
        }
    }
}

#[test]
fn nilpotent_seeds_are_rejected() {
    let a = TransitionMatrix::new(vec![
        vec![0, 1, 0, 0, 1],
        vec![0, 0, 0, 1, 0],
        vec![0, 1, 0, 0, 1],
        vec![1, 1, 1, 0, 1],
        vec![1, 1, 0, 0, 1],
    ])
    .unwrap();
    let s = Arc::new(compute_spectrum(&a, DEFAULT_TOL).unwrap());
    let nil = classify_spectrum(&s, DEFAULT_TOL).nilpotent_basis;
    assert!(!nil.is_empty());
    assert!(matches!(
        Staf::from_seed(&s, nil[0].clone()),
        Err(Error::SeedNotNonNilpotent { .. })
    ));
}
