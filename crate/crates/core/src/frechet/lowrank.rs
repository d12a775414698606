use num_complex::Complex;

use super::arnoldi::BlockArnoldi;
use super::{FrechetResult, Method};
use crate::error::{Error, Result};
use crate::linalg::{frobenius, matmul};
use crate::matfun::{frechet_coupled, ScalarFunction};
use crate::scalar::{CMatrix, Real};
use crate::tensor::Tensor3;

/// `bcirc(𝒞) ≈ C₁ C₂ᴴ` with `C₁, C₂ ∈ ℂ^{np×r}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankFactors<T: Real> {
    pub c1: CMatrix<T>,
    pub c2: CMatrix<T>,
    pub n: usize,
    pub p: usize,
}

impl<T: Real> LowRankFactors<T> {
    pub fn new(c1: CMatrix<T>, c2: CMatrix<T>, n: usize, p: usize) -> Result<Self> {
        if c1.shape() != c2.shape() || c1.nrows() != n * p || c1.ncols() > n * p {
            return Err(Error::DimensionMismatch(format!(
                "factors {:?} and {:?} do not fit n = {n}, p = {p}",
                c1.shape(),
                c2.shape()
            )));
        }
        Ok(Self { c1, c2, n, p })
    }

    pub fn rank(&self) -> usize {
        self.c1.ncols()
    }

    /// `C₁ C₂ᴴ`.
    pub fn product(&self) -> CMatrix<T> {
        matmul(&self.c1, &self.c2.adjoint())
    }
}

/// Factors of `bcirc(𝒞)` for `𝒞(i, j, k) = u(i) v(j) w(k)`:
/// `C₁ = W ⊗ u` with `W` the circulant matrix of `w`, `C₂ = I_p ⊗ v̄`.
pub fn cp_rank_one_factors<T: Real>(u: &[Complex<T>], v: &[Complex<T>], w: &[Complex<T>]) -> Result<LowRankFactors<T>> {
    let (n, p) = (u.len(), w.len());
    if n == 0 || p == 0 || v.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "rank-one factors need |u| = |v| > 0 and |w| > 0, got {}, {}, {p}",
            n,
            v.len()
        )));
    }
    let c1 = CMatrix::from_fn(n * p, p, |row, b| {
        let (a, i) = (row / n, row % n);
        w[(a + p - b) % p] * u[i]
    });
    let c2 = CMatrix::from_fn(n * p, p, |row, b| {
        if row / n == b { v[row % n].conj() } else { Complex::new(T::zero(), T::zero()) }
    });
    LowRankFactors::new(c1, c2, n, p)
}

/// Truncated SVD of `bcirc(𝒞)`: the smallest rank `r` whose discarded
/// singular values satisfy `‖tail‖ ≤ tol · ‖bcirc(𝒞)‖_F`.
pub fn lowrank_factorize<T: Real>(c: &Tensor3<T>, tol: f64) -> Result<LowRankFactors<T>> {
    c.require_square()?;
    let (n, _, p) = c.dims();
    let b = c.bcirc();
    let norm = frobenius(&b);
    if norm == T::zero() {
        return LowRankFactors::new(CMatrix::zeros(n * p, 0), CMatrix::zeros(n * p, 0), n, p);
    }
    let svd = b.svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let vt = svd.v_t.expect("right singular vectors requested");
    let sigma = &svd.singular_values;
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).unwrap_or(std::cmp::Ordering::Equal));

    let budget = (T::lit(tol) * norm).powi(2);
    let mut tail = T::zero();
    let mut r = order.len();
    while r > 0 {
        let next = tail + sigma[order[r - 1]].powi(2);
        if next > budget {
            break;
        }
        tail = next;
        r -= 1;
    }
    let kept = &order[..r];
    let c1 = CMatrix::from_fn(n * p, r, |i, j| u[(i, kept[j])].scale(sigma[kept[j]]));
    let c2 = CMatrix::from_fn(n * p, r, |i, j| vt[(kept[j], i)].conj());
    LowRankFactors::new(c1, c2, n, p)
}

/// Block Krylov solver. Builds block Arnoldi decompositions of `bcirc(𝒜)`
/// from `C₁` and of `bcirc(𝒜)ᴴ` from `C₂`, and at block iteration `d` takes
/// `X_d` as the top-right block of `f([[𝒢_d, (𝒱_dᴴC₁)(𝒲_dᴴC₂)ᴴ], [0, ℋ_dᴴ]])`.
/// The iterate is the first block column of `𝒱_d X_d 𝒲_dᴴ`. Iteration stops
/// when successive iterates differ by at most `tol` relatively, or when both
/// Krylov spaces are invariant (the projection is then exact).
pub fn tfrechet_lowrank<T: Real>(
    a: &Tensor3<T>,
    factors: &LowRankFactors<T>,
    f: &ScalarFunction<T>,
    max_d: usize,
    tol: f64,
) -> Result<FrechetResult<T>> {
    a.require_square()?;
    let (n, _, p) = a.dims();
    if factors.n != n || factors.p != p || factors.c1.nrows() != n * p {
        return Err(Error::DimensionMismatch(format!(
            "factors for n = {}, p = {} used with {:?}",
            factors.n,
            factors.p,
            a.dims()
        )));
    }
    let mut result = FrechetResult {
        value: Tensor3::zeros(n, n, p),
        method: Method::LowRank,
        iterations: 0,
        history: Vec::new(),
        operator_applications: 0,
        converged: true,
    };
    if factors.rank() == 0 {
        return Ok(result);
    }
    let at = a.t_transpose();
    let mut left = BlockArnoldi::new(|x: &CMatrix<T>| a.bcirc_apply(x), &factors.c1)?;
    let mut right = BlockArnoldi::new(|x: &CMatrix<T>| at.bcirc_apply(x), &factors.c2)?;
    let mut previous = CMatrix::<T>::zeros(n * p, n);
    result.converged = false;

    for d in 1..=max_d.max(1) {
        left.step()?;
        right.step()?;
        let v = left.basis();
        let w = right.basis();
        let m = matmul(&matmul(&v.adjoint(), &factors.c1), &matmul(&w.adjoint(), &factors.c2).adjoint());
        let x = frechet_coupled(left.hessenberg(), &right.hessenberg().adjoint(), &m, f)?;
        let w_top = w.rows(0, n).adjoint();
        let current = matmul(&matmul(v, &x), &w_top);
        if current.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::KrylovBreakdown { achieved_d: d - 1, reason: "non-finite iterate".into() });
        }
        let change = frobenius(&(&current - &previous));
        let scale = frobenius(&current);
        let rel = if scale > T::zero() { change / scale } else { change };
        result.history.push(rel.to_f64_lossy());
        result.iterations = d;
        previous = current;
        let exact = left.exhausted() && right.exhausted();
        if exact || (d >= 2 && rel.to_f64_lossy() <= tol) {
            result.converged = true;
            break;
        }
    }
    result.operator_applications = left.applications + right.applications;
    result.value = Tensor3::fold(previous, n, n, p)?;
    Ok(result)
}
