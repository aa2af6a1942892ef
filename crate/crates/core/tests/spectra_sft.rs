use eigenstaf::bundled;
use eigenstaf::sft::{count_to_u64, Block, ShiftSpace};
use eigenstaf::spectra::{char_polynomial, compute_spectrum, SpectralData, TransitionMatrix, DEFAULT_TOL};
use nalgebra::DVector;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use proptest::prelude::*;

const JORDAN5: [[u8; 5]; 5] = [
    [0, 1, 1, 1, 0],
    [0, 1, 0, 0, 1],
    [1, 1, 1, 1, 0],
    [1, 0, 0, 1, 0],
    [0, 1, 0, 1, 0],
];

const NILPOTENT5: [[u8; 5]; 5] = [
    [0, 1, 0, 0, 1],
    [0, 0, 0, 1, 0],
    [0, 1, 0, 0, 1],
    [1, 1, 1, 0, 1],
    [1, 1, 0, 0, 1],
];

fn rows<const D: usize>(m: [[u8; D]; D]) -> Vec<Vec<u8>> {
    m.iter().map(|r| r.to_vec()).collect()
}

fn test_matrices() -> Vec<TransitionMatrix> {
    let mut out: Vec<TransitionMatrix> = bundled::all().iter().map(|b| b.matrix()).collect();
    out.push(TransitionMatrix::new(rows(JORDAN5)).unwrap());
    out.push(TransitionMatrix::new(rows(NILPOTENT5)).unwrap());
    out
}

fn sup(v: &DVector<Complex64>) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn chain_residuals(s: &SpectralData) -> f64 {
    let a = s.matrix().to_complex();
    let mut worst = 0.0f64;
    for ch in s.chains() {
        let shifted = &a - nalgebra::DMatrix::identity(s.dim(), s.dim()) * ch.eigenvalue;
        for (i, v) in ch.vectors.iter().enumerate() {
            let r = if i == 0 { &shifted * v } else { &shifted * v - &ch.vectors[i - 1] };
            worst = worst.max(sup(&r));
        }
    }
    worst
}

/// Roots of a monic real cubic `x³ + a x² + b x + c` by Cardano's formula.
fn cubic_roots(a: f64, b: f64, c: f64) -> Vec<Complex64> {
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = Complex64::new(q * q / 4.0 + p * p * p / 27.0, 0.0).sqrt();
    let mut u = (Complex64::new(-q / 2.0, 0.0) + disc).cbrt();
    if u.norm() < 1e-12 {
        u = (Complex64::new(-q / 2.0, 0.0) - disc).cbrt();
    }
    let w = Complex64::new(-0.5, 3f64.sqrt() / 2.0);
    (0..3)
        .map(|k| {
            let uk = u * w.powu(k);
            let t = if uk.norm() < 1e-12 { Complex64::new(0.0, 0.0) } else { uk - p / (3.0 * uk) };
            t - a / 3.0
        })
        .collect()
}

fn computed_roots(s: &SpectralData) -> Vec<Complex64> {
    s.eigenvalues()
        .iter()
        .flat_map(|e| std::iter::repeat_n(e.value, e.multiplicity))
        .collect()
}

fn matched(mut got: Vec<Complex64>, want: &[Complex64], tol: f64) -> bool {
    if got.len() != want.len() {
        return false;
    }
    for w in want {
        match got.iter().position(|g| (g - w).norm() < tol) {
            Some(i) => {
                got.swap_remove(i);
            }
            None => return false,
        }
    }
    true
}

#[test]
fn chains_satisfy_the_jordan_relations() {
    for a in test_matrices() {
        let s = compute_spectrum(&a, DEFAULT_TOL).unwrap();
        assert!(chain_residuals(&s) < 10.0 * DEFAULT_TOL);
    }
}

#[test]
fn jordan_example_has_a_generalized_chain() {
    let s = compute_spectrum(&TransitionMatrix::new(rows(JORDAN5)).unwrap(), DEFAULT_TOL).unwrap();
    assert!(s.chains().iter().any(|c| c.vectors.len() >= 2));
    let n = compute_spectrum(&TransitionMatrix::new(rows(NILPOTENT5)).unwrap(), DEFAULT_TOL).unwrap();
    assert!(n.char_poly().zero_multiplicity() >= 2);
}

#[test]
fn pf_limit_at_sixty() {
    for a in test_matrices() {
        let s = compute_spectrum(&a, DEFAULT_TOL).unwrap();
        let l60 = s.lambda().powi(60);
        let pf = s.pf();
        for (i, row) in a.int_power(60).iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                let v = x.to_f64().unwrap() / l60;
                assert!((v - pf.right[i] * pf.left[j]).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn char_poly_matches_the_eigenvalue_product() {
    for a in test_matrices() {
        let s = compute_spectrum(&a, DEFAULT_TOL).unwrap();
        let mut prod = vec![Complex64::new(1.0, 0.0)];
        for mu in computed_roots(&s) {
            let mut next = vec![Complex64::new(0.0, 0.0); prod.len() + 1];
            for (k, c) in prod.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * mu;
            }
            prod = next;
        }
        let exact = s.char_poly().ascending();
        assert_eq!(prod.len(), exact.len());
        for (p, e) in prod.iter().zip(exact) {
            assert!((p - Complex64::new(e.to_f64().unwrap(), 0.0)).norm() < 1e-6);
        }
    }
}

#[test]
fn closed_forms_for_small_bundled_matrices() {
    let s = compute_spectrum(&bundled::golden().matrix(), DEFAULT_TOL).unwrap();
    let r5 = 5f64.sqrt();
    let want = [Complex64::new((1.0 + r5) / 2.0, 0.0), Complex64::new((1.0 - r5) / 2.0, 0.0)];
    assert!(matched(computed_roots(&s), &want, 1e-10));
    let s = compute_spectrum(&bundled::central3().matrix(), DEFAULT_TOL).unwrap();
    let h = 3f64.sqrt() / 2.0;
    let want = [Complex64::new(2.0, 0.0), Complex64::new(0.5, h), Complex64::new(0.5, -h)];
    assert!(matched(computed_roots(&s), &want, 1e-10));
}

fn primitive(d: usize) -> impl Strategy<Value = TransitionMatrix> {
    proptest::collection::vec(0u8..=1, d * d).prop_filter_map("not primitive", move |e| {
        TransitionMatrix::new(e.chunks(d).map(|r| r.to_vec()).collect()).ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quadratic_formula_oracle(a in primitive(2)) {
        let s = compute_spectrum(&a, DEFAULT_TOL).unwrap();
        let m = a.to_real();
        let tr = m[(0, 0)] + m[(1, 1)];
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        let disc = Complex64::new(tr * tr - 4.0 * det, 0.0).sqrt();
        let want = [(tr + disc) / 2.0, (tr - disc) / 2.0];
        prop_assert!(matched(computed_roots(&s), &want, 1e-10));
    }

    #[test]
    fn cubic_formula_oracle(a in primitive(3)) {
        let s = compute_spectrum(&a, DEFAULT_TOL).unwrap();
        let p = char_polynomial(&a);
        let c: Vec<f64> = p.ascending().iter().map(|x| x.to_f64().unwrap()).collect();
        let want = cubic_roots(c[2], c[1], c[0]);
        // Repeated roots are only accurate to the cube root of machine precision.
        let tol = if s.eigenvalues().iter().any(|e| e.multiplicity > 1) { 1e-4 } else { 1e-10 };
        prop_assert!(matched(computed_roots(&s), &want, tol));
        prop_assert!(chain_residuals(&s) < 10.0 * DEFAULT_TOL);
    }

    #[test]
    fn four_by_four_chains(a in primitive(4)) {
        let s = compute_spectrum(&a, DEFAULT_TOL).unwrap();
        prop_assert!(chain_residuals(&s) < 10.0 * DEFAULT_TOL);
        let pf = s.pf();
        prop_assert!(pf.right.iter().all(|&x| x > 0.0));
        prop_assert!((pf.left.dot(&pf.right) - 1.0).abs() < 1e-12);
    }
}

fn spaces() -> Vec<ShiftSpace> {
    test_matrices().into_iter().map(|a| ShiftSpace::new(a, 2.0).unwrap()).collect()
}

#[test]
fn enumeration_matches_counts() {
    for space in spaces() {
        for n in 1..=12 {
            let listed = space.enumerate_blocks(n).unwrap().count() as u64;
            let by_last: u64 = (0..space.dim())
                .map(|j| count_to_u64(&space.count_blocks_ending_in(n - 1, j)))
                .sum();
            assert_eq!(listed, by_last);
            assert_eq!(listed, count_to_u64(&space.count_blocks(n)));
        }
    }
}

#[test]
fn children_partition_their_parent() {
    for space in spaces() {
        for n in 1..=7 {
            let parents: Vec<Block> = space.enumerate_blocks(n).unwrap().collect();
            let mut kids: Vec<Block> = parents.iter().flat_map(|b| space.children(b)).collect();
            let total = kids.len();
            assert_eq!(total as u64, count_to_u64(&space.count_blocks(n + 1)));
            kids.sort_by(|a, b| a.symbols().cmp(b.symbols()));
            kids.dedup();
            assert_eq!(kids.len(), total);
            for b in &parents {
                for c in space.children(b) {
                    assert_eq!(c.prefix(n), *b);
                }
            }
        }
    }
}

#[test]
fn block_growth_settles() {
    for space in spaces() {
        let s = compute_spectrum(space.matrix(), DEFAULT_TOL).unwrap();
        let ratio = |n: usize| space.count_blocks(n).to_f64().unwrap() / s.lambda().powi(n as i32);
        assert!((ratio(25) / ratio(30) - 1.0).abs() < 0.02);
    }
}

#[test]
fn metric_respects_diameter_bounds() {
    let space = ShiftSpace::new(bundled::golden().matrix(), 2.0).unwrap();
    for l in 1..=8 {
        for b in space.enumerate_blocks(l).unwrap() {
            let ext: Vec<Block> = space.enumerate_extensions(&b, l + 6).unwrap().collect();
            let mut widest = 0.0f64;
            for s in &ext {
                for t in &ext {
                    widest = widest.max(space.distance(s.symbols(), t.symbols()));
                }
            }
            let (lo, hi) = space.cylinder_diameter_bounds(&b);
            assert!(widest <= hi && widest >= lo, "{b}: {widest} not in [{lo}, {hi}]");
            let exact = space.cylinder_diameter(&b);
            assert!(exact >= widest - 1e-15 && exact <= hi + 1e-15);
        }
    }
}
