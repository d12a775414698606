//! Dense matrix functions and their Fréchet derivatives.
//!
//! `exp` uses scaling and squaring, polynomials use Horner's rule and `inv`
//! an LU factorization. Everything else goes through an eigendecomposition
//! with a conditioning guard. Fréchet derivatives are the top-right block of
//! `f([[A₁₁, M], [0, A₂₂]])`, evaluated either literally or through the
//! sum, product and chain rules and, for eigendecomposition kinds, divided
//! differences on the two spectra.

mod expm;
mod function;

pub use expm::expm;
pub use function::{CustomFunction, ScalarCallable, ScalarFunction};

use nalgebra::ComplexField;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{self, block_upper, eigen, matmul, Eigen};
use crate::scalar::{CMatrix, Real};

fn require_square<T: Real>(a: &CMatrix<T>) -> Result<()> {
    if a.is_square() { Ok(()) } else { Err(Error::NonSquare { rows: a.nrows(), cols: a.ncols() }) }
}

fn horner<T: Real>(a: &CMatrix<T>, coefficients: &[Complex<T>]) -> CMatrix<T> {
    let n = a.nrows();
    let mut iter = coefficients.iter().rev();
    let Some(&lead) = iter.next() else {
        return CMatrix::zeros(n, n);
    };
    let mut p = CMatrix::from_diagonal_element(n, n, lead);
    for &c in iter {
        p = matmul(&p, a);
        for i in 0..n {
            p[(i, i)] += c;
        }
    }
    p
}

/// `f(A)`.
pub fn matfun<T: Real>(a: &CMatrix<T>, f: &ScalarFunction<T>) -> Result<CMatrix<T>> {
    require_square(a)?;
    match f {
        ScalarFunction::Exp => expm(a),
        ScalarFunction::Polynomial(c) => Ok(horner(a, c)),
        ScalarFunction::Inv => Ok(linalg::inverse(a, "matrix")?.0),
        ScalarFunction::Scaled(alpha, g) => Ok(matfun(a, g)? * *alpha),
        ScalarFunction::Sum(g, h) => Ok(matfun(a, g)? + matfun(a, h)?),
        ScalarFunction::Product(g, h) => Ok(matmul(&matfun(a, g)?, &matfun(a, h)?)),
        ScalarFunction::Compose { outer, inner } => matfun(&matfun(a, inner)?, outer),
        ScalarFunction::Sqrt | ScalarFunction::InvSqrt | ScalarFunction::Log | ScalarFunction::Custom(_) => {
            let eig = eigen(a)?;
            let values = spectral_values(f, &eig)?;
            Ok(eig.reconstruct_values(&values))
        }
    }
}

/// `f(A) B`, computed as `matfun(A, f) · B`.
pub fn matfun_action<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>, f: &ScalarFunction<T>) -> Result<CMatrix<T>> {
    if b.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!("f(A) is {}x{}, B has {} rows", a.nrows(), a.ncols(), b.nrows())));
    }
    Ok(matmul(&matfun(a, f)?, b))
}

/// The conjugate function `f̄(z) = conj(f(conj(z)))`.
pub fn conj_function<T: Real>(f: &ScalarFunction<T>) -> ScalarFunction<T> {
    f.conj()
}

fn spectral_scale<T: Real>(values: &[Complex<T>]) -> T {
    let s = values.iter().fold(T::zero(), |m, z| if z.modulus() > m { z.modulus() } else { m });
    if s > T::zero() { s } else { T::one() }
}

/// Validates an eigenvalue against the domain of an atomic
/// eigendecomposition kind, clamping tiny negative Hermitian eigenvalues.
fn admissible<T: Real>(f: &ScalarFunction<T>, lambda: Complex<T>, hermitian: bool, scale: T) -> Result<Complex<T>> {
    let kind = match f {
        ScalarFunction::Sqrt | ScalarFunction::InvSqrt | ScalarFunction::Log => f.name(),
        _ => return Ok(lambda),
    };
    let branch_cut = || Error::BranchCut { function: kind.clone(), value: format!("{lambda}") };
    if hermitian {
        let x = lambda.re;
        if matches!(f, ScalarFunction::Log) {
            return if x > T::zero() { Ok(Complex::new(x, T::zero())) } else { Err(branch_cut()) };
        }
        if x < -T::lit(1e-10) * scale {
            return Err(Error::NotPositiveSemidefinite(x.to_f64_lossy()));
        }
        let x = if x > T::zero() { x } else { T::zero() };
        if matches!(f, ScalarFunction::InvSqrt) && x * linalg::singular_threshold::<T>() <= scale {
            return Err(Error::Singular { context: "invsqrt argument".into(), condition: (scale / x).to_f64_lossy() });
        }
        return Ok(Complex::new(x, T::zero()));
    }
    let on_cut = lambda.re <= T::zero() && lambda.im.abs() <= T::lit(100.0) * T::machine_eps() * scale;
    if on_cut { Err(branch_cut()) } else { Ok(lambda) }
}

fn spectral_values<T: Real>(f: &ScalarFunction<T>, eig: &Eigen<T>) -> Result<Vec<Complex<T>>> {
    let scale = spectral_scale(&eig.values);
    eig.values
        .iter()
        .map(|&l| {
            let v = f.eval(admissible(f, l, eig.hermitian, scale)?);
            if v.re.is_finite() && v.im.is_finite() {
                Ok(v)
            } else {
                Err(Error::InvalidArgument(format!("{} is not finite at eigenvalue {l}", f.name())))
            }
        })
        .collect()
}

impl<T: Real> Eigen<T> {
    fn reconstruct_values(&self, values: &[Complex<T>]) -> CMatrix<T> {
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col.iter_mut().for_each(|z| *z *= values[j]);
        }
        matmul(&scaled, &self.inverse)
    }
}

fn top_right<T: Real>(full: &CMatrix<T>, r1: usize, r2: usize) -> CMatrix<T> {
    full.view((0, r1), (r1, r2)).into_owned()
}

/// Top-right block of `f([[A₁₁, M], [0, A₂₂]])`, evaluated literally on the
/// assembled block matrix.
pub fn frechet_block_literal<T: Real>(
    a11: &CMatrix<T>,
    a22: &CMatrix<T>,
    m: &CMatrix<T>,
    f: &ScalarFunction<T>,
) -> Result<CMatrix<T>> {
    check_coupled(a11, a22, m)?;
    let full = matfun(&block_upper(a11, m, a22), f)?;
    Ok(top_right(&full, a11.nrows(), a22.nrows()))
}

fn check_coupled<T: Real>(a11: &CMatrix<T>, a22: &CMatrix<T>, m: &CMatrix<T>) -> Result<()> {
    require_square(a11)?;
    require_square(a22)?;
    if m.shape() != (a11.nrows(), a22.nrows()) {
        return Err(Error::DimensionMismatch(format!(
            "coupling block is {:?}, expected {:?}",
            m.shape(),
            (a11.nrows(), a22.nrows())
        )));
    }
    Ok(())
}

/// Top-right block of `f([[A₁₁, M], [0, A₂₂]])`.
///
/// With `A₁₁ = A₂₂ = A` this is the Fréchet derivative `L_f(A, M)`.
/// Exponentials and polynomials are evaluated on the block matrix itself,
/// the inverse in closed form, combinators through the sum, product and
/// chain rules, and the remaining kinds by divided differences.
pub fn frechet_coupled<T: Real>(
    a11: &CMatrix<T>,
    a22: &CMatrix<T>,
    m: &CMatrix<T>,
    f: &ScalarFunction<T>,
) -> Result<CMatrix<T>> {
    check_coupled(a11, a22, m)?;
    match f {
        ScalarFunction::Exp | ScalarFunction::Polynomial(_) => frechet_block_literal(a11, a22, m, f),
        ScalarFunction::Inv => {
            let (i11, _) = linalg::inverse(a11, "matrix")?;
            let (i22, _) = linalg::inverse(a22, "matrix")?;
            Ok(-matmul(&matmul(&i11, m), &i22))
        }
        ScalarFunction::Scaled(alpha, g) => Ok(frechet_coupled(a11, a22, m, g)? * *alpha),
        ScalarFunction::Sum(g, h) => Ok(frechet_coupled(a11, a22, m, g)? + frechet_coupled(a11, a22, m, h)?),
        ScalarFunction::Product(g, h) => {
            let lg = frechet_coupled(a11, a22, m, g)?;
            let lh = frechet_coupled(a11, a22, m, h)?;
            Ok(matmul(&matfun(a11, g)?, &lh) + matmul(&lg, &matfun(a22, h)?))
        }
        ScalarFunction::Compose { outer, inner } => {
            let lg = frechet_coupled(a11, a22, m, inner)?;
            let g11 = matfun(a11, inner)?;
            let g22 = if a11 == a22 { g11.clone() } else { matfun(a22, inner)? };
            frechet_coupled(&g11, &g22, &lg, outer)
        }
        ScalarFunction::Sqrt | ScalarFunction::InvSqrt | ScalarFunction::Log | ScalarFunction::Custom(_) => {
            divided_differences(a11, a22, m, f)
        }
    }
}

/// Relative gap below which two eigenvalues are treated as coincident and
/// the divided difference is replaced by `f′` at their midpoint.
fn coincidence_gap<T: Real>() -> T {
    T::machine_eps().powf(T::lit(1.0 / 3.0))
}

fn divided_differences<T: Real>(
    a11: &CMatrix<T>,
    a22: &CMatrix<T>,
    m: &CMatrix<T>,
    f: &ScalarFunction<T>,
) -> Result<CMatrix<T>> {
    let e1 = eigen(a11)?;
    let e2 = if a11 == a22 { e1.clone() } else { eigen(a22)? };
    let scale = {
        let (s1, s2) = (spectral_scale(&e1.values), spectral_scale(&e2.values));
        if s1 > s2 { s1 } else { s2 }
    };
    let l1: Vec<Complex<T>> =
        e1.values.iter().map(|&l| admissible(f, l, e1.hermitian, scale)).collect::<Result<_>>()?;
    let l2: Vec<Complex<T>> =
        e2.values.iter().map(|&l| admissible(f, l, e2.hermitian, scale)).collect::<Result<_>>()?;
    let f1: Vec<Complex<T>> = l1.iter().map(|&z| f.eval(z)).collect();
    let f2: Vec<Complex<T>> = l2.iter().map(|&z| f.eval(z)).collect();
    let mut derivative: Option<ScalarFunction<T>> = None;

    let mut mt = matmul(&matmul(&e1.inverse, m), &e2.vectors);
    let gap = coincidence_gap::<T>();
    let half = T::lit(0.5);
    for j in 0..l2.len() {
        for i in 0..l1.len() {
            let (a, b) = (l1[i], l2[j]);
            let size = T::one().max(a.modulus()).max(b.modulus());
            let dd = if (a - b).modulus() > gap * size {
                (f1[i] - f2[j]) / (a - b)
            } else {
                if derivative.is_none() {
                    derivative = Some(f.derivative()?);
                }
                derivative.as_ref().expect("just set").eval((a + b).scale(half))
            };
            mt[(i, j)] *= dd;
        }
    }
    let out = matmul(&matmul(&e1.vectors, &mt), &e2.inverse);
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidArgument(format!("Fréchet derivative of {} is not finite", f.name())));
    }
    Ok(out)
}

/// `L_f(A, C)`, the top-right block of `f([[A, C], [0, A]])`.
pub fn matfun_frechet_2x2<T: Real>(a: &CMatrix<T>, c: &CMatrix<T>, f: &ScalarFunction<T>) -> Result<CMatrix<T>> {
    frechet_coupled(a, a, c, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius, relative_distance};
    use crate::random::{random_complex_matrix, random_matrix, seeded};

    type F = ScalarFunction<f64>;
    type M = CMatrix<f64>;

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    fn diag(values: &[f64]) -> M {
        let n = values.len();
        M::from_fn(n, n, |i, j| if i == j { c(values[i]) } else { c(0.0) })
    }

    fn central_difference(a: &M, e: &M, f: &F) -> M {
        let h = 1e-5 * frobenius(a) / frobenius(e);
        (matfun(&(a + e * c(h)), f).unwrap() - matfun(&(a - e * c(h)), f).unwrap()) / c(2.0 * h)
    }

    /// Well-conditioned matrix with spectrum in the right half plane.
    fn shifted(n: usize, seed: u64, shift: f64) -> M {
        let mut rng = seeded(seed);
        random_complex_matrix::<f64>(n, n, &mut rng) * c(0.3) + M::identity(n, n) * c(shift)
    }

    #[test]
    fn exp_basic_cases() {
        assert_eq!(matfun(&M::zeros(3, 3), &F::Exp).unwrap(), M::identity(3, 3));
        let e = matfun(&diag(&[1.0, 2.0]), &F::Exp).unwrap();
        assert!(relative_distance(&e, &diag(&[1f64.exp(), 2f64.exp()])) <= 1e-14);
        assert!(matches!(matfun(&M::zeros(2, 3), &F::Exp), Err(Error::NonSquare { .. })));
    }

    #[test]
    fn exp_matches_taylor_series_oracle() {
        let mut rng = seeded(21);
        let a = random_complex_matrix::<f64>(5, 5, &mut rng) * c(1.5);
        // Scale to norm 1/2, sum 60 Taylor terms, square back.
        let s = (linalg::one_norm(&a) * 2.0).log2().ceil().max(0.0) as i32;
        let scaled = &a * c(2f64.powi(-s));
        let mut term = M::identity(5, 5);
        let mut sum = term.clone();
        for k in 1..60 {
            term = &term * &scaled * c(1.0 / k as f64);
            sum += &term;
        }
        for _ in 0..s {
            sum = &sum * &sum;
        }
        assert!(relative_distance(&matfun(&a, &F::Exp).unwrap(), &sum) <= 1e-12);
    }

    #[test]
    fn polynomial_square_is_a_times_a() {
        let a = random_complex_matrix::<f64>(3, 3, &mut seeded(22));
        let sq = matfun(&a, &F::square()).unwrap();
        assert!(relative_distance(&sq, &(&a * &a)) <= 1e-14);
    }

    #[test]
    fn eigen_kinds_invert_each_other() {
        let a = shifted(5, 23, 3.0);
        let s = matfun(&a, &F::Sqrt).unwrap();
        assert!(relative_distance(&(&s * &s), &a) <= 1e-12);
        let is = matfun(&a, &F::InvSqrt).unwrap();
        assert!(relative_distance(&(&is * &s), &M::identity(5, 5)) <= 1e-12);
        let l = matfun(&a, &F::Log).unwrap();
        assert!(relative_distance(&matfun(&l, &F::Exp).unwrap(), &a) <= 1e-12);
        let inv = matfun(&a, &F::Inv).unwrap();
        assert!(relative_distance(&(&inv * &a), &M::identity(5, 5)) <= 1e-12);
    }

    #[test]
    fn hermitian_sqrt_is_hermitian_and_clamps() {
        let b = random_complex_matrix::<f64>(4, 3, &mut seeded(24));
        // Rank-deficient PSD matrix: eigenvalue zero up to rounding.
        let h = &b * b.adjoint();
        let s = matfun(&h, &F::Sqrt).unwrap();
        assert!(relative_distance(&(&s * &s), &h) <= 1e-10);
        assert!(relative_distance(&s, &s.adjoint()) <= 1e-12);
        assert!(matches!(matfun(&h, &F::InvSqrt), Err(Error::Singular { .. })));
    }

    #[test]
    fn domain_errors() {
        let neg = diag(&[-1.0, 2.0]);
        assert!(matches!(matfun(&neg, &F::Sqrt), Err(Error::NotPositiveSemidefinite(_))));
        assert!(matches!(matfun(&neg, &F::Log), Err(Error::BranchCut { .. })));
        let mut nonsym = diag(&[-1.0, 2.0]);
        nonsym[(0, 1)] = c(1.0);
        assert!(matches!(matfun(&nonsym, &F::Sqrt), Err(Error::BranchCut { .. })));
        assert!(matches!(matfun(&nonsym, &F::Log), Err(Error::BranchCut { .. })));
        assert!(matches!(matfun(&diag(&[1.0, 0.0]), &F::Inv), Err(Error::Singular { .. })));
        let mut jordan = M::identity(2, 2);
        jordan[(0, 1)] = c(1.0);
        assert!(matches!(matfun(&jordan, &F::Sqrt), Err(Error::IllConditionedEigenvectors(_))));
    }

    #[test]
    fn similarity_invariance() {
        let mut rng = seeded(25);
        let a = random_matrix::<f64>(4, 4, &mut rng);
        let x = random_matrix::<f64>(4, 4, &mut rng) + M::identity(4, 4) * c(4.0);
        let xinv = x.clone().try_inverse().unwrap();
        let conj = &x * &a * &xinv;
        for f in [F::Exp, F::square(), F::Sqrt.compose(F::Exp)] {
            let lhs = matfun(&conj, &f).unwrap();
            let rhs = &x * matfun(&a, &f).unwrap() * &xinv;
            assert!(relative_distance(&lhs, &rhs) <= 1e-10, "{f}");
        }
    }

    #[test]
    fn conjugate_function_evaluation() {
        let a = shifted(4, 26, 2.0);
        let p = F::polynomial(vec![Complex::new(0.0, 1.0), c(1.0), Complex::new(0.5, -0.25)]).unwrap();
        let custom = F::custom("twist", |z: Complex<f64>| z * z * Complex::new(1.0, 2.0), None);
        for f in [p, custom, F::Sqrt, F::Exp] {
            let lhs = matfun(&a, &conj_function(&f)).unwrap();
            let rhs = matfun(&a.map(|z| z.conj()), &f).unwrap().map(|z| z.conj());
            assert!(relative_distance(&lhs, &rhs) <= 1e-12, "{f}");
        }
    }

    #[test]
    fn action_cases() {
        let mut rng = seeded(27);
        let a = random_complex_matrix::<f64>(6, 6, &mut rng);
        let b = random_complex_matrix::<f64>(6, 2, &mut rng);
        let fa = matfun(&a, &F::Exp).unwrap();
        assert_eq!(matfun_action(&a, &M::identity(6, 6), &F::Exp).unwrap(), fa);
        assert!(relative_distance(&matfun_action(&a, &b, &F::identity()).unwrap(), &(&a * &b)) <= 1e-15);
        assert!(relative_distance(&matfun_action(&a, &b, &F::Exp).unwrap(), &(&fa * &b)) <= 1e-14);
        assert!(matfun_action(&a, &M::zeros(5, 1), &F::Exp).is_err());
    }

    #[test]
    fn frechet_polynomials_are_exact() {
        let mut rng = seeded(28);
        let a = random_complex_matrix::<f64>(4, 4, &mut rng);
        let e = random_complex_matrix::<f64>(4, 4, &mut rng);
        assert!(relative_distance(&matfun_frechet_2x2(&a, &e, &F::identity()).unwrap(), &e) <= 1e-15);
        let l2 = matfun_frechet_2x2(&a, &e, &F::square()).unwrap();
        assert!(relative_distance(&l2, &(&a * &e + &e * &a)) <= 1e-13);
    }

    #[test]
    fn frechet_matches_finite_differences() {
        let mut rng = seeded(29);
        let a = random_complex_matrix::<f64>(4, 4, &mut rng);
        let e = random_complex_matrix::<f64>(4, 4, &mut rng);
        let l = matfun_frechet_2x2(&a, &e, &F::Exp).unwrap();
        assert!(relative_distance(&l, &central_difference(&a, &e, &F::Exp)) <= 1e-6);

        let b = shifted(5, 30, 3.0);
        let e5 = random_complex_matrix::<f64>(5, 5, &mut rng);
        let cubic = F::real_polynomial(&[1.0, -1.0, 0.5, 0.25]).unwrap();
        for f in [F::Exp, cubic, F::Sqrt, F::InvSqrt, F::Log, F::Inv] {
            let l = matfun_frechet_2x2(&b, &e5, &f).unwrap();
            assert!(relative_distance(&l, &central_difference(&b, &e5, &f)) <= 1e-6, "{f}");
        }
    }

    #[test]
    fn frechet_linearity_and_sum_rule() {
        let mut rng = seeded(31);
        let a = random_complex_matrix::<f64>(4, 4, &mut rng);
        let c1 = random_complex_matrix::<f64>(4, 4, &mut rng);
        let c2 = random_complex_matrix::<f64>(4, 4, &mut rng);
        let (alpha, beta) = (Complex::new(0.5, -1.0), Complex::new(2.0, 0.25));
        let lhs = matfun_frechet_2x2(&a, &(&c1 * alpha + &c2 * beta), &F::Exp).unwrap();
        let rhs = matfun_frechet_2x2(&a, &c1, &F::Exp).unwrap() * alpha
            + matfun_frechet_2x2(&a, &c2, &F::Exp).unwrap() * beta;
        assert!(relative_distance(&lhs, &rhs) <= 1e-12);

        let g1 = F::real_polynomial(&[0.0, 1.0, 2.0]).unwrap();
        let g2 = F::real_polynomial(&[1.0, 0.0, -1.0, 0.5]).unwrap();
        let sum_poly = F::polynomial(vec![
            alpha * 0.0 + beta * 1.0,
            alpha * 1.0 + beta * 0.0,
            alpha * 2.0 + beta * -1.0,
            beta * 0.5,
        ])
        .unwrap();
        let lhs = matfun_frechet_2x2(&a, &c1, &sum_poly).unwrap();
        let rhs = matfun_frechet_2x2(&a, &c1, &g1).unwrap() * alpha + matfun_frechet_2x2(&a, &c1, &g2).unwrap() * beta;
        assert!(relative_distance(&lhs, &rhs) <= 1e-12);
    }

    #[test]
    fn rules_agree_with_literal_block_evaluation() {
        let mut rng = seeded(32);
        let a = random_complex_matrix::<f64>(4, 4, &mut rng) * c(0.5);
        let e = random_complex_matrix::<f64>(4, 4, &mut rng);
        let chain = F::Exp.compose(F::square());
        let product = F::Exp.times(F::real_polynomial(&[1.0, 2.0, 0.0, -1.0]).unwrap());
        let mixed = F::Exp.scaled(Complex::new(0.0, 1.5)).plus(F::square());
        for f in [chain, product, mixed] {
            let rule = frechet_coupled(&a, &a, &e, &f).unwrap();
            let literal = frechet_block_literal(&a, &a, &e, &f).unwrap();
            assert!(relative_distance(&rule, &literal) <= 1e-12, "{f}");
        }
    }

    #[test]
    fn divided_differences_with_distinct_blocks() {
        // Distinct spectra keep the assembled block matrix diagonalizable,
        // so the literal eigendecomposition route is a valid oracle.
        let a11 = shifted(3, 33, 2.0);
        let a22 = shifted(4, 34, 6.0);
        let m = random_complex_matrix::<f64>(3, 4, &mut seeded(35));
        for f in [F::Sqrt, F::Log, F::InvSqrt] {
            let dd = frechet_coupled(&a11, &a22, &m, &f).unwrap();
            let literal = frechet_block_literal(&a11, &a22, &m, &f).unwrap();
            assert!(relative_distance(&dd, &literal) <= 1e-10, "{f}");
        }
        assert!(frechet_coupled(&a11, &a22, &M::zeros(4, 3), &F::Exp).is_err());
    }

    #[test]
    fn custom_function_needs_derivative_for_coincident_spectra() {
        let a = shifted(3, 36, 2.0);
        let e = random_complex_matrix::<f64>(3, 3, &mut seeded(37));
        let no_d = F::custom("cube", |z: Complex<f64>| z * z * z, None);
        assert!(matches!(matfun_frechet_2x2(&a, &e, &no_d), Err(Error::NoDerivative(_))));
        let with_d = F::custom(
            "cube",
            |z: Complex<f64>| z * z * z,
            Some(std::sync::Arc::new(|z: Complex<f64>| z * z * 3.0)),
        );
        let l = matfun_frechet_2x2(&a, &e, &with_d).unwrap();
        let oracle = matfun_frechet_2x2(&a, &e, &F::real_polynomial(&[0.0, 0.0, 0.0, 1.0]).unwrap()).unwrap();
        assert!(relative_distance(&l, &oracle) <= 1e-9);
    }
}
