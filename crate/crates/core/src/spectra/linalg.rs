use nalgebra::{ComplexField, DMatrix, DVector};

/// Orthonormal basis (as columns) of the kernel of a square matrix; singular values at or below
/// `tol` times the largest count as zero.
pub(crate) fn kernel<T: ComplexField<RealField = f64>>(m: &DMatrix<T>, tol: f64) -> DMatrix<T> {
    let n = m.ncols();
    let svd = m.clone().svd(false, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let vt = svd.v_t.expect("v_t requested");
    let cols: Vec<DVector<T>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| smax == 0.0 || s <= tol * smax)
        .map(|(i, _)| vt.row(i).adjoint())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Orthonormal basis of the column space.
pub(crate) fn range_basis<T: ComplexField<RealField = f64>>(m: &DMatrix<T>, tol: f64) -> DMatrix<T> {
    if m.ncols() == 0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let u = svd.u.expect("u requested");
    let cols: Vec<DVector<T>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| smax > 0.0 && s > tol * smax)
        .map(|(i, _)| u.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(m.nrows(), 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

pub(crate) fn rank<T: ComplexField<RealField = f64>>(m: &DMatrix<T>, tol: f64) -> usize {
    range_basis(m, tol).ncols()
}

/// Jordan chains `[v₁, …, v_t]` with `(A − μ)v₁ = 0` and `(A − μ)v_{i+1} = v_i`, longest first.
pub(crate) fn jordan_chains<T: ComplexField<RealField = f64>>(
    a: &DMatrix<T>,
    mu: T,
    multiplicity: usize,
    tol: f64,
) -> Result<Vec<Vec<DVector<T>>>, String> {
    let d = a.nrows();
    let n = a - DMatrix::<T>::identity(d, d) * mu;
    let mut kernels = vec![DMatrix::<T>::zeros(d, 0)];
    let mut power = DMatrix::<T>::identity(d, d);
    while kernels.last().map(|k| k.ncols()).unwrap_or(0) < multiplicity {
        if kernels.len() > multiplicity {
            return Err(format!(
                "kernel dimensions {:?} never reach multiplicity {}",
                kernels.iter().map(|k| k.ncols()).collect::<Vec<_>>(),
                multiplicity
            ));
        }
        power = &n * &power;
        let k = kernel(&power, tol);
        if k.ncols() <= kernels.last().map(|k| k.ncols()).unwrap_or(0) {
            return Err(format!("kernel stopped growing at dimension {}", k.ncols()));
        }
        kernels.push(k);
    }
    let top = kernels.len() - 1;
    if kernels[top].ncols() != multiplicity {
        return Err(format!(
            "generalized eigenspace has dimension {} but multiplicity is {}",
            kernels[top].ncols(),
            multiplicity
        ));
    }
    let dims: Vec<usize> = kernels.iter().map(|k| k.ncols()).collect();
    let count_at_least = |k: usize| -> usize {
        if k > top {
            0
        } else {
            dims[k] - dims[k - 1]
        }
    };
    let n_pow = |v: &DVector<T>, e: usize| -> DVector<T> {
        let mut w = v.clone();
        for _ in 0..e {
            w = &n * w;
        }
        w
    };
    let mut heads: Vec<(DVector<T>, usize)> = Vec::new();
    for k in (1..=top).rev() {
        let (hi, lo) = (count_at_least(k), count_at_least(k + 1));
        if hi < lo {
            return Err(format!("kernel growth is not monotone: {:?}", dims));
        }
        let need = hi - lo;
        if need == 0 {
            continue;
        }
        let mut low: Vec<DVector<T>> = kernels[k - 1].column_iter().map(|c| c.into_owned()).collect();
        for (h, t) in &heads {
            low.push(n_pow(h, t - k));
        }
        let kk = &kernels[k];
        let residual = if low.is_empty() {
            kk.clone()
        } else {
            let q = range_basis(&DMatrix::from_columns(&low), tol);
            kk - &q * (q.adjoint() * kk)
        };
        let svd = residual.svd(true, false);
        let u = svd.u.expect("u requested");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
        for &i in order.iter().take(need) {
            let s = svd.singular_values[i];
            if s <= tol.sqrt() {
                return Err(format!("no independent chain head at level {} (singular value {:.3e})", k, s));
            }
            heads.push((u.column(i).into_owned(), k));
        }
    }
    Ok(heads
        .into_iter()
        .map(|(h, t)| (0..t).rev().map(|e| n_pow(&h, e)).collect())
        .collect())
}

/// Power iteration with ‖·‖₁ normalization, continued past `tol` until the iterates stop changing.
pub(crate) fn power_iteration(m: &DMatrix<f64>, tol: f64) -> Option<(DVector<f64>, usize)> {
    let d = m.nrows();
    let mut v = DVector::from_element(d, 1.0 / d as f64);
    let mut best = f64::INFINITY;
    let mut stale = 0;
    let mut reached_tol = false;
    for it in 1..=1_000_000 {
        let mut w = m * &v;
        let s = w.iter().map(|x| x.abs()).sum::<f64>();
        if s == 0.0 || !s.is_finite() {
            return None;
        }
        w /= s;
        let diff = (&w - &v).iter().map(|x| x.abs()).sum::<f64>();
        v = w;
        if diff < tol {
            reached_tol = true;
        }
        if diff < best {
            best = diff;
            stale = 0;
        } else {
            stale += 1;
        }
        if reached_tol && (diff <= 1e-16 || stale >= 20) {
            return Some((v, it));
        }
    }
    reached_tol.then_some((v, 1_000_000))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn kernel_of_rank_one() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let k = kernel(&m, 1e-9);
        assert_eq!(k.ncols(), 1);
        assert!((k[(0, 0)] + k[(1, 0)]).abs() < 1e-14);
    }

    #[test]
    fn nilpotent_jordan_block_gives_one_chain() {
        let a = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        let chains = jordan_chains(&a, 0.0, 3, 1e-9).unwrap();
        assert_eq!(chains.len(), 1);
        let c = &chains[0];
        assert_eq!(c.len(), 3);
        assert!((&a * &c[0]).norm() < 1e-14);
        assert!((&a * &c[1] - &c[0]).norm() < 1e-14);
        assert!((&a * &c[2] - &c[1]).norm() < 1e-14);
    }

    #[test]
    fn mixed_block_sizes() {
        // J_2(2) ⊕ [2] ⊕ [5]
        let a = DMatrix::from_row_slice(
            4,
            4,
            &[2.0, 1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 5.0],
        )
        .map(|x| Complex64::new(x, 0.0));
        let chains = jordan_chains(&a, Complex64::new(2.0, 0.0), 3, 1e-9).unwrap();
        let lens: Vec<usize> = chains.iter().map(Vec::len).collect();
        assert_eq!(lens, vec![2, 1]);
    }

    #[test]
    fn power_iteration_all_ones() {
        let m = DMatrix::from_element(2, 2, 1.0);
        let (v, _) = power_iteration(&m, 1e-12).unwrap();
        assert!((v[0] - 0.5).abs() < 1e-15 && (v[1] - 0.5).abs() < 1e-15);
    }
}
