//! Matrix exponential by scaling and squaring with diagonal Padé approximants
//! of degree 3, 5, 7, 9 or 13, chosen from the 1-norm of the input.

use nalgebra::LU;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{matmul, one_norm};
use crate::scalar::{CMatrix, Real};

const DEGREES: [(usize, f64); 5] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068),
    (13, 5.371920351148152),
];

/// Normalized coefficients `b_j = (2m−j)! m! / ((2m)! j! (m−j)!)`.
fn pade_coefficients(m: usize) -> Vec<f64> {
    let mut b = vec![1.0; m + 1];
    for j in 1..=m {
        b[j] = b[j - 1] * (m - j + 1) as f64 / (j * (2 * m - j + 1)) as f64;
    }
    b
}

fn scaled_identity<T: Real>(n: usize, c: f64) -> CMatrix<T> {
    CMatrix::from_diagonal_element(n, n, Complex::new(T::lit(c), T::zero()))
}

fn axpy<T: Real>(acc: &mut CMatrix<T>, c: f64, x: &CMatrix<T>) {
    let c = T::lit(c);
    acc.zip_apply(x, |a, b| *a += b.scale(c));
}

/// `(U, V)` with `r_m(A) = (V − U)⁻¹ (V + U)`.
fn pade_parts<T: Real>(a: &CMatrix<T>, m: usize) -> (CMatrix<T>, CMatrix<T>) {
    let n = a.nrows();
    let b = pade_coefficients(m);
    let a2 = matmul(a, a);
    if m == 13 {
        let a4 = matmul(&a2, &a2);
        let a6 = matmul(&a4, &a2);
        let mut inner_u = a6.map(|z| z.scale(T::lit(b[13])));
        axpy(&mut inner_u, b[11], &a4);
        axpy(&mut inner_u, b[9], &a2);
        let mut u = matmul(&a6, &inner_u);
        axpy(&mut u, b[7], &a6);
        axpy(&mut u, b[5], &a4);
        axpy(&mut u, b[3], &a2);
        u += scaled_identity::<T>(n, b[1]);
        let u = matmul(a, &u);

        let mut inner_v = a6.map(|z| z.scale(T::lit(b[12])));
        axpy(&mut inner_v, b[10], &a4);
        axpy(&mut inner_v, b[8], &a2);
        let mut v = matmul(&a6, &inner_v);
        axpy(&mut v, b[6], &a6);
        axpy(&mut v, b[4], &a4);
        axpy(&mut v, b[2], &a2);
        v += scaled_identity::<T>(n, b[0]);
        return (u, v);
    }
    // Even powers A^0, A^2, ..., A^(m-1).
    let mut powers = vec![scaled_identity::<T>(n, 1.0), a2.clone()];
    while powers.len() < m.div_ceil(2) {
        let next = matmul(powers.last().expect("nonempty"), &a2);
        powers.push(next);
    }
    let mut u = CMatrix::zeros(n, n);
    let mut v = CMatrix::zeros(n, n);
    for (k, pk) in powers.iter().enumerate() {
        axpy(&mut v, b[2 * k], pk);
        axpy(&mut u, b[2 * k + 1], pk);
    }
    (matmul(a, &u), v)
}

pub fn expm<T: Real>(a: &CMatrix<T>) -> Result<CMatrix<T>> {
    if !a.is_square() {
        return Err(Error::NonSquare { rows: a.nrows(), cols: a.ncols() });
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidArgument("exp of a matrix with non-finite entries".into()));
    }
    let norm = one_norm(a).to_f64_lossy();
    for &(m, theta) in &DEGREES[..4] {
        if norm <= theta {
            let (u, v) = pade_parts(a, m);
            return pade_solve(&u, &v);
        }
    }
    let theta13 = DEGREES[4].1;
    let s = if norm > theta13 { (norm / theta13).log2().ceil().max(0.0) as i32 } else { 0 };
    let scale = T::lit(2f64.powi(-s));
    let scaled = a.map(|z| z.scale(scale));
    let (u, v) = pade_parts(&scaled, 13);
    let mut r = pade_solve(&u, &v)?;
    for _ in 0..s {
        r = matmul(&r, &r);
    }
    Ok(r)
}

fn pade_solve<T: Real>(u: &CMatrix<T>, v: &CMatrix<T>) -> Result<CMatrix<T>> {
    let q = v - u;
    let p = v + u;
    LU::new(q)
        .solve(&p)
        .ok_or_else(|| Error::Singular { context: "Padé denominator".into(), condition: f64::INFINITY })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::relative_distance;
    use crate::random::{random_complex_matrix, seeded};

    #[test]
    fn coefficients_match_closed_form() {
        // m = 3: 1, 1/2, 1/10, 1/120.
        let b = pade_coefficients(3);
        let expected = [1.0, 0.5, 0.1, 1.0 / 120.0];
        for (x, y) in b.iter().zip(expected) {
            assert!((x - y).abs() < 1e-16);
        }
        // m = 13 normalized by the leading term in the standard integer table.
        let b13 = pade_coefficients(13);
        assert!((b13[13] - 1.0 / 64764752532480000.0).abs() < 1e-30);
    }

    #[test]
    fn each_degree_matches_taylor() {
        let mut rng = seeded(3);
        let base = random_complex_matrix::<f64>(5, 5, &mut rng);
        let base = base.map(|z| z / one_norm(&base));
        for target in [0.01, 0.2, 0.9, 2.0, 5.0, 40.0] {
            let a = base.map(|z| z * target);
            let taylor = taylor_exp(&a);
            assert!(relative_distance(&expm(&a).unwrap(), &taylor) < 1e-12, "norm {target}");
        }
    }

    fn taylor_exp(a: &CMatrix<f64>) -> CMatrix<f64> {
        let s = (one_norm(a).log2().ceil().max(0.0) + 1.0) as i32;
        let scaled = a / Complex::new(2f64.powi(s), 0.0);
        let n = a.nrows();
        let mut term = CMatrix::<f64>::identity(n, n);
        let mut sum = term.clone();
        for k in 1..60 {
            term = &term * &scaled / Complex::new(k as f64, 0.0);
            sum += &term;
        }
        for _ in 0..s {
            sum = &sum * &sum;
        }
        sum
    }
}
