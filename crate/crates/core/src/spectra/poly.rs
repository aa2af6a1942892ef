//! Exact integer and rational polynomials, plus a floating root finder.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Monic characteristic polynomial with exact integer coefficients.
/// `coeffs[k]` is the coefficient of `x^k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharPoly {
    coeffs: Vec<BigInt>,
}

impl CharPoly {
    pub fn from_ascending(coeffs: Vec<BigInt>) -> Self {
        CharPoly { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn ascending(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Coefficients from the leading term down, as decimal strings.
    pub fn descending_strings(&self) -> Vec<String> {
        self.coeffs.iter().rev().map(|c| c.to_string()).collect()
    }

    pub fn to_f64_ascending(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN))
            .collect()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        horner(&self.to_f64_ascending(), z)
    }

    /// Number of trailing zero coefficients, i.e. the multiplicity of the root 0.
    pub fn zero_multiplicity(&self) -> usize {
        self.coeffs.iter().take_while(|c| c.is_zero()).count()
    }
}

impl fmt::Display for CharPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", sign)?;
            }
            let show_mag = k == 0 || !mag.is_one();
            if show_mag {
                write!(f, "{}", mag)?;
            }
            match k {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{}", k)?,
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// det(xI − M) for an arbitrary integer square matrix, by Faddeev–LeVerrier in exact arithmetic.
pub fn char_polynomial_raw(rows: &[Vec<i64>]) -> CharPoly {
    let d = rows.len();
    let a: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let mut coeffs = vec![BigInt::zero(); d + 1];
    coeffs[d] = BigInt::one();
    let mut m = vec![vec![BigInt::zero(); d]; d];
    for k in 1..=d {
        // M_k = A M_{k-1} + c_{d-k+1} I
        let mut next = mat_mul(&a, &m);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += &coeffs[d - k + 1];
        }
        m = next;
        let am = mat_mul(&a, &m);
        let trace: BigInt = (0..d).map(|i| am[i][i].clone()).sum();
        coeffs[d - k] = -trace / BigInt::from(k);
    }
    CharPoly { coeffs }
}

fn mat_mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let d = a.len();
    let mut out = vec![vec![BigInt::zero(); d]; d];
    for i in 0..d {
        for k in 0..d {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..d {
                out[i][j] += &a[i][k] * &b[k][j];
            }
        }
    }
    out
}

pub(crate) fn horner(asc: &[f64], z: Complex64) -> Complex64 {
    asc.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

fn horner_with_derivative(asc: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in asc.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

type RatPoly = Vec<BigRational>;

fn trim(p: &mut RatPoly) {
    while p.len() > 1 && p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

fn deg(p: &RatPoly) -> usize {
    p.len() - 1
}

fn is_constant(p: &RatPoly) -> bool {
    p.len() == 1
}

fn derivative(p: &RatPoly) -> RatPoly {
    if p.len() == 1 {
        return vec![BigRational::zero()];
    }
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * BigRational::from_integer(BigInt::from(k)))
        .collect()
}

fn sub(a: &RatPoly, b: &RatPoly) -> RatPoly {
    let n = a.len().max(b.len());
    let mut out: RatPoly = (0..n)
        .map(|k| {
            let x = a.get(k).cloned().unwrap_or_else(BigRational::zero);
            let y = b.get(k).cloned().unwrap_or_else(BigRational::zero);
            x - y
        })
        .collect();
    trim(&mut out);
    out
}

fn div_rem(a: &RatPoly, b: &RatPoly) -> (RatPoly, RatPoly) {
    let db = deg(b);
    let lead = b[db].clone();
    let mut r = a.clone();
    if a.len() < b.len() {
        return (vec![BigRational::zero()], r);
    }
    let mut q = vec![BigRational::zero(); a.len() - b.len() + 1];
    for k in (0..q.len()).rev() {
        let c = &r[k + db] / &lead;
        for (j, bj) in b.iter().enumerate() {
            let t = &c * bj;
            r[k + j] -= t;
        }
        q[k] = c;
    }
    r.truncate(db.max(1));
    trim(&mut r);
    trim(&mut q);
    (q, r)
}

fn monic(p: &RatPoly) -> RatPoly {
    let lead = p[deg(p)].clone();
    p.iter().map(|c| c / &lead).collect()
}

fn gcd(a: &RatPoly, b: &RatPoly) -> RatPoly {
    let mut x = a.clone();
    let mut y = b.clone();
    while !(y.len() == 1 && y[0].is_zero()) {
        let (_, r) = div_rem(&x, &y);
        x = y;
        y = r;
    }
    monic(&x)
}

/// Squarefree decomposition `p = Π fᵢ^i` of a nonzero rational polynomial (Yun).
/// Returns pairs `(fᵢ, i)` with monic nonconstant `fᵢ`.
fn squarefree_decomposition(p: &RatPoly) -> Vec<(RatPoly, usize)> {
    let mut out = Vec::new();
    if is_constant(p) {
        return out;
    }
    let dp = derivative(p);
    let a0 = gcd(p, &dp);
    let (mut b, _) = div_rem(p, &a0);
    let (mut c, _) = div_rem(&dp, &a0);
    let mut d = sub(&c, &derivative(&b));
    let mut i = 1;
    while !is_constant(&b) {
        let a = gcd(&b, &d);
        if !is_constant(&a) {
            out.push((a.clone(), i));
        }
        let (nb, _) = div_rem(&b, &a);
        let (nc, _) = div_rem(&d, &a);
        b = nb;
        c = nc;
        d = sub(&c, &derivative(&b));
        i += 1;
    }
    out
}

/// Roots of a squarefree real polynomial by Aberth–Ehrlich iteration with Newton polishing.
fn aberth_roots(asc: &[f64]) -> Vec<Complex64> {
    let n = asc.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![Complex64::new(-asc[0] / asc[1], 0.0)];
    }
    let lead = asc[n];
    let p: Vec<f64> = asc.iter().map(|c| c / lead).collect();
    let radius = 1.0 + p[..n].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            Complex64::from_polar(0.5 * radius, t)
        })
        .collect();
    for _ in 0..1000 {
        let mut max_step = 0.0f64;
        for k in 0..n {
            let (pv, dpv) = horner_with_derivative(&p, z[k]);
            if pv == Complex64::new(0.0, 0.0) {
                continue;
            }
            let ratio = pv / dpv;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| Complex64::new(1.0, 0.0) / (z[k] - z[j]))
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                z[k] -= step;
                max_step = max_step.max(step.norm() / z[k].norm().max(1e-300));
            }
        }
        if max_step < 1e-15 {
            break;
        }
    }
    for zk in z.iter_mut() {
        for _ in 0..3 {
            let (pv, dpv) = horner_with_derivative(&p, *zk);
            if dpv.norm() == 0.0 {
                break;
            }
            let step = pv / dpv;
            if step.is_finite() {
                *zk -= step;
            }
        }
    }
    z
}

fn newton_real(asc: &[f64], mut x: f64) -> f64 {
    for _ in 0..4 {
        let (p, dp) = horner_with_derivative(asc, Complex64::new(x, 0.0));
        if dp.re == 0.0 {
            break;
        }
        let step = p.re / dp.re;
        if !step.is_finite() {
            break;
        }
        x -= step;
    }
    x
}

/// Roots with exact multiplicities. Values with |Im| ≤ `snap_tol` are snapped to the real line,
/// and nonreal roots come in exactly conjugate pairs.
pub fn roots_with_multiplicity(poly: &CharPoly, snap_tol: f64) -> Vec<(Complex64, usize)> {
    let zeros = poly.zero_multiplicity();
    let mut out = Vec::new();
    if zeros > 0 {
        out.push((Complex64::new(0.0, 0.0), zeros));
    }
    let rest: RatPoly = poly.ascending()[zeros..]
        .iter()
        .map(|c| BigRational::from_integer(c.clone()))
        .collect();
    for (factor, mult) in squarefree_decomposition(&rest) {
        let asc: Vec<f64> = factor.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect();
        let roots = symmetrize(aberth_roots(&asc), &asc, snap_tol);
        out.extend(roots.into_iter().map(|r| (r, mult)));
    }
    out
}

fn symmetrize(roots: Vec<Complex64>, asc: &[f64], snap_tol: f64) -> Vec<Complex64> {
    let mut reals = Vec::new();
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for r in roots {
        if r.im.abs() <= snap_tol {
            reals.push(Complex64::new(newton_real(asc, r.re), 0.0));
        } else if r.im > 0.0 {
            upper.push(r);
        } else {
            lower.push(r);
        }
    }
    let mut out = reals;
    for u in &upper {
        out.push(*u);
        out.push(u.conj());
    }
    // Unpaired lower roots (numerical asymmetry) keep their own conjugate partner.
    for l in lower.iter().skip(upper.len()) {
        out.push(l.conj());
        out.push(*l);
    }
    out
}
