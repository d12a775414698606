//! Dense complex linear algebra used by the matrix-function kernel and the
//! solvers: products, norms, inverses with conditioning, eigendecompositions.

use nalgebra::{ComplexField, Schur, SymmetricEigen, LU};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{CMatrix, Real};

pub fn matmul<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    T::gemm(a, b)
}

pub fn identity<T: Real>(n: usize) -> CMatrix<T> {
    CMatrix::identity(n, n)
}

pub fn frobenius<T: Real>(a: &CMatrix<T>) -> T {
    a.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}

/// Maximum absolute column sum.
pub fn one_norm<T: Real>(a: &CMatrix<T>) -> T {
    a.column_iter()
        .map(|c| c.iter().fold(T::zero(), |acc, z| acc + z.modulus()))
        .fold(T::zero(), |m, s| if s > m { s } else { m })
}

/// `‖a − b‖_F / ‖b‖_F`, falling back to the absolute distance when `b = 0`.
pub fn relative_distance<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    let diff = frobenius(&(a - b));
    let scale = frobenius(b);
    if scale > T::zero() {
        diff / scale
    } else {
        diff
    }
}

pub fn is_hermitian<T: Real>(a: &CMatrix<T>) -> bool {
    if !a.is_square() {
        return false;
    }
    let scale = frobenius(a);
    frobenius(&(a - a.adjoint())) <= T::lit(1e-12) * scale
}

/// `[[a11, m], [0, a22]]`.
pub fn block_upper<T: Real>(a11: &CMatrix<T>, m: &CMatrix<T>, a22: &CMatrix<T>) -> CMatrix<T> {
    let (r1, r2) = (a11.nrows(), a22.nrows());
    let mut out = CMatrix::zeros(r1 + r2, r1 + r2);
    out.view_mut((0, 0), (r1, r1)).copy_from(a11);
    out.view_mut((0, r1), (r1, r2)).copy_from(m);
    out.view_mut((r1, r1), (r2, r2)).copy_from(a22);
    out
}

/// Threshold on the 1-norm condition number above which a matrix is treated
/// as numerically singular: `1 / (100 eps)`.
pub fn singular_threshold<T: Real>() -> T {
    T::one() / (T::lit(100.0) * T::machine_eps())
}

/// Inverse together with its 1-norm condition number. Fails when the matrix
/// is singular or its condition exceeds [`singular_threshold`].
pub fn inverse<T: Real>(a: &CMatrix<T>, context: &str) -> Result<(CMatrix<T>, T)> {
    if !a.is_square() {
        return Err(Error::NonSquare { rows: a.nrows(), cols: a.ncols() });
    }
    let n = a.nrows();
    if n == 0 {
        return Ok((CMatrix::zeros(0, 0), T::one()));
    }
    let inv = LU::new(a.clone()).try_inverse().ok_or_else(|| Error::Singular {
        context: context.to_string(),
        condition: f64::INFINITY,
    })?;
    let cond = one_norm(a) * one_norm(&inv);
    if !cond.is_finite() || cond > singular_threshold::<T>() {
        return Err(Error::Singular { context: context.to_string(), condition: cond.to_f64_lossy() });
    }
    Ok((inv, cond))
}

pub fn spectral_norm<T: Real>(a: &CMatrix<T>) -> T {
    if a.is_empty() {
        return T::zero();
    }
    a.singular_values().iter().fold(T::zero(), |m, &s| if s > m { s } else { m })
}

/// Eigendecomposition `A = X diag(values) X⁻¹`.
#[derive(Debug, Clone)]
pub struct Eigen<T: Real> {
    pub values: Vec<Complex<T>>,
    pub vectors: CMatrix<T>,
    pub inverse: CMatrix<T>,
    /// 1-norm condition number of `vectors` (exactly 1 on the Hermitian path).
    pub condition: T,
    pub hermitian: bool,
}

impl<T: Real> Eigen<T> {
    /// `X diag(g(λ)) X⁻¹`.
    pub fn reconstruct(&self, g: impl Fn(Complex<T>) -> Complex<T>) -> CMatrix<T> {
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            let gj = g(self.values[j]);
            col.iter_mut().for_each(|z| *z *= gj);
        }
        matmul(&scaled, &self.inverse)
    }
}

/// Eigenvector conditioning limit for the eigendecomposition path,
/// `eps^(-2/3)` (about 2.7e10 in double precision).
pub fn eigvec_condition_limit<T: Real>() -> T {
    T::machine_eps().powf(T::lit(-2.0 / 3.0))
}

/// Hermitian inputs use the Hermitian eigensolver; everything else goes
/// through a complex Schur form and triangular back-substitution.
pub fn eigen<T: Real>(a: &CMatrix<T>) -> Result<Eigen<T>> {
    if !a.is_square() {
        return Err(Error::NonSquare { rows: a.nrows(), cols: a.ncols() });
    }
    if is_hermitian(a) {
        let sym = (a + a.adjoint()).map(|z| z * T::lit(0.5));
        let eig = SymmetricEigen::try_new(sym, T::machine_eps(), 0).ok_or(Error::EigenFailure)?;
        let values = eig.eigenvalues.iter().map(|&l| Complex::new(l, T::zero())).collect();
        let inverse = eig.eigenvectors.adjoint();
        return Ok(Eigen { values, vectors: eig.eigenvectors, inverse, condition: T::one(), hermitian: true });
    }
    general_eigen(a)
}

fn general_eigen<T: Real>(a: &CMatrix<T>) -> Result<Eigen<T>> {
    let n = a.nrows();
    let schur = Schur::try_new(a.clone(), T::machine_eps(), 0).ok_or(Error::EigenFailure)?;
    let (q, t) = schur.unpack();
    let values: Vec<Complex<T>> = (0..n).map(|i| t[(i, i)]).collect();
    let smin = {
        let s = T::machine_eps() * frobenius(&t);
        if s > T::zero() { s } else { T::lit(1e-30) }
    };

    let mut y = CMatrix::<T>::zeros(n, n);
    for k in 0..n {
        let lambda = values[k];
        y[(k, k)] = Complex::new(T::one(), T::zero());
        for i in (0..k).rev() {
            let mut s = Complex::new(T::zero(), T::zero());
            for j in (i + 1)..=k {
                s += t[(i, j)] * y[(j, k)];
            }
            let mut denom = t[(i, i)] - lambda;
            if denom.modulus() < smin {
                denom = Complex::new(smin, T::zero());
            }
            y[(i, k)] = -s / denom;
        }
    }
    let mut x = matmul(&q, &y);
    for mut col in x.column_iter_mut() {
        let nrm = col.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt();
        if nrm > T::zero() {
            col.iter_mut().for_each(|z| *z = z.unscale(nrm));
        }
    }
    let inverse = LU::new(x.clone())
        .try_inverse()
        .ok_or(Error::IllConditionedEigenvectors(f64::INFINITY))?;
    let condition = one_norm(&x) * one_norm(&inverse);
    if !condition.is_finite() || condition > eigvec_condition_limit::<T>() {
        return Err(Error::IllConditionedEigenvectors(condition.to_f64_lossy()));
    }
    Ok(Eigen { values, vectors: x, inverse, condition, hermitian: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, seed: u64) -> CMatrix<f64> {
        let mut state = seed;
        CMatrix::from_fn(n, n, |_, _| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let a = ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let b = ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
            Complex::new(a, b)
        })
    }

    #[test]
    fn general_eigen_reconstructs_matrix() {
        let a = sample(6, 3);
        let eig = eigen(&a).unwrap();
        assert!(!eig.hermitian);
        let back = eig.reconstruct(|z| z);
        assert!(relative_distance(&back, &a) < 1e-12);
    }

    #[test]
    fn hermitian_path_is_unitary() {
        let b = sample(5, 9);
        let h = &b + b.adjoint();
        let eig = eigen(&h).unwrap();
        assert!(eig.hermitian);
        assert!(eig.values.iter().all(|z| z.im == 0.0));
        assert!(relative_distance(&eig.reconstruct(|z| z), &h) < 1e-12);
    }

    #[test]
    fn jordan_block_is_rejected() {
        let mut a = CMatrix::<f64>::identity(2, 2);
        a[(0, 1)] = Complex::new(1.0, 0.0);
        assert!(matches!(eigen(&a), Err(Error::IllConditionedEigenvectors(_))));
    }

    #[test]
    fn inverse_reports_singularity() {
        let a = CMatrix::<f64>::from_element(3, 3, Complex::new(1.0, 0.0));
        assert!(matches!(inverse(&a, "test"), Err(Error::Singular { .. })));
        let b = sample(4, 1);
        let (inv, cond) = inverse(&b, "test").unwrap();
        assert!(cond >= 1.0);
        assert!(relative_distance(&matmul(&b, &inv), &identity(4)) < 1e-12);
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let mut d = CMatrix::<f64>::zeros(3, 3);
        d[(0, 0)] = Complex::new(1.0, 0.0);
        d[(1, 1)] = Complex::new(0.0, -4.0);
        d[(2, 2)] = Complex::new(2.0, 0.0);
        assert!((spectral_norm(&d) - 4.0).abs() < 1e-14);
    }
}
