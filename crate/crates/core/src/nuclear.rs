//! Tensor nuclear norm `‖𝒜‖⋆ = trace₁(√(𝒜ᴴ ∗ 𝒜))`, its gradient
//! `𝒜 ∗ (𝒜ᴴ ∗ 𝒜)^{-1/2}` and gradient descent with backtracking.
//!
//! Both are evaluated on the transform-domain faces `D_i` of `𝒜`, where
//! `𝒜ᴴ ∗ 𝒜` has the Hermitian positive semidefinite faces `D_iᴴ D_i`.

use nalgebra::ComplexField;
use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frechet::{tfrechet, FrechetOptions, Method};
use crate::linalg::{eigen, matmul};
use crate::matfun::{matfun, ScalarFunction};
use crate::scalar::{CMatrix, Real};
use crate::tensor::Tensor3;
use crate::tfun::t_function;

/// Eigenvalue ratio `λ_min / λ_max` of `𝒜ᴴ ∗ 𝒜` below which the gradient is
/// treated as undefined.
pub const SINGULARITY_GUARD: f64 = 1e-10;

fn gram_faces<T: Real>(a: &Tensor3<T>) -> Result<(Vec<CMatrix<T>>, Vec<CMatrix<T>>)> {
    a.require_square()?;
    let faces = a.dft_faces();
    let grams = faces.iter().map(|d| matmul(&d.adjoint(), d)).collect();
    Ok((faces, grams))
}

pub fn nuclear_norm<T: Real>(a: &Tensor3<T>) -> Result<T> {
    let (_, grams) = gram_faces(a)?;
    let roots: Vec<CMatrix<T>> = grams.par_iter().map(|g| matfun(g, &ScalarFunction::Sqrt)).collect::<Result<_>>()?;
    let tr = Tensor3::idft_faces(&roots)?.trace1()?;
    let tol = T::lit(1e-12) * T::one().max(tr.re.abs());
    if tr.im.abs() > tol {
        return Err(Error::InvalidArgument(format!("nuclear norm has imaginary part {}", tr.im.to_f64_lossy())));
    }
    Ok(tr.re)
}

/// `∇‖𝒜‖⋆ = 𝒜 ∗ (𝒜ᴴ ∗ 𝒜)^{-1/2}`. Fails with [`Error::NonDifferentiable`]
/// when the smallest eigenvalue of `𝒜ᴴ ∗ 𝒜` over all transform-domain faces
/// is below [`SINGULARITY_GUARD`] times the largest.
pub fn nuclear_gradient<T: Real>(a: &Tensor3<T>) -> Result<Tensor3<T>> {
    let (faces, grams) = gram_faces(a)?;
    let eigs = grams.par_iter().map(eigen).collect::<Result<Vec<_>>>()?;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for e in &eigs {
        for l in &e.values {
            let x = l.re.to_f64_lossy();
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    if hi <= 0.0 || lo < SINGULARITY_GUARD * hi {
        return Err(Error::NonDifferentiable(if hi > 0.0 { lo / hi } else { 0.0 }));
    }
    let blocks: Vec<CMatrix<T>> = faces
        .iter()
        .zip(&eigs)
        .map(|(d, e)| {
            let inv_sqrt: Vec<Complex<T>> =
                e.values.iter().map(|l| Complex::new(T::one() / l.re.sqrt(), T::zero())).collect();
            let mut scaled = e.vectors.clone();
            for (j, mut col) in scaled.column_iter_mut().enumerate() {
                col.iter_mut().for_each(|z| *z *= inv_sqrt[j]);
            }
            matmul(d, &matmul(&scaled, &e.inverse))
        })
        .collect();
    Tensor3::idft_faces(&blocks)
}

/// `|trace₁(L_f(𝒜, 𝒞)) − trace₁(f′(𝒜) ∗ 𝒞)|`.
pub fn trace1_frechet_check<T: Real>(
    a: &Tensor3<T>,
    c: &Tensor3<T>,
    f: &ScalarFunction<T>,
    method: Method,
) -> Result<f64> {
    let l = tfrechet(a, c, f, method, &FrechetOptions::default())?.value;
    let fprime = t_function(a, &f.derivative()?)?;
    let rhs = fprime.t_product(c)?.trace1()?;
    Ok((l.trace1()? - rhs).modulus().to_f64_lossy())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmijoParams {
    pub t0: f64,
    pub beta: f64,
    pub c: f64,
    pub max_shrinks: usize,
}

impl Default for ArmijoParams {
    fn default() -> Self {
        Self { t0: 1.0, beta: 0.5, c: 1e-4, max_shrinks: 50 }
    }
}

/// One row per iterate; row 0 is the starting point with step size 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentStep {
    pub step: usize,
    pub nuclear_norm: f64,
    pub step_size: f64,
    /// `‖∇‖_F` at this iterate, `NaN` when the gradient is undefined there.
    pub grad_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    StepBudget,
    /// The iterate reached the non-differentiable locus.
    Singular,
    LineSearchFailed,
}

#[derive(Debug, Clone)]
pub struct Trajectory<T: Real> {
    pub steps: Vec<DescentStep>,
    pub stop: StopReason,
    pub last: Tensor3<T>,
}

/// Gradient descent `𝒜 ← 𝒜 − t ∇‖𝒜‖⋆` with Armijo backtracking:
/// accept `t` once `‖𝒜 − t∇‖⋆ ≤ ‖𝒜‖⋆ − c t ‖∇‖_F²`, else `t ← β t`.
/// Stops early when the gradient guard fires or the iterate vanishes.
pub fn nucmin_descent<T: Real>(a0: &Tensor3<T>, steps: usize, params: &ArmijoParams) -> Result<Trajectory<T>> {
    let mut current = a0.clone();
    let mut value = nuclear_norm(&current)?.to_f64_lossy();
    let mut grad = match nuclear_gradient(&current) {
        Ok(g) => Some(g),
        Err(Error::NonDifferentiable(_)) => None,
        Err(e) => return Err(e),
    };
    let grad_norm = |g: &Option<Tensor3<T>>| g.as_ref().map_or(f64::NAN, |g| g.frobenius_norm().to_f64_lossy());
    // An iterate at rounding level relative to the start is numerically zero.
    let vanishing = 100.0 * f64::EPSILON * value;
    let mut rows = vec![DescentStep { step: 0, nuclear_norm: value, step_size: 0.0, grad_norm: grad_norm(&grad) }];

    for step in 1..=steps {
        let Some(g) = grad.take() else {
            return Ok(Trajectory { steps: rows, stop: StopReason::Singular, last: current });
        };
        let g2 = g.frobenius_norm().to_f64_lossy().powi(2);
        let mut t = params.t0;
        let mut accepted = None;
        for _ in 0..=params.max_shrinks {
            let candidate = current.try_sub(&g.scale_real(T::lit(t)))?;
            let v = nuclear_norm(&candidate)?.to_f64_lossy();
            if v <= value - params.c * t * g2 {
                accepted = Some((candidate, v));
                break;
            }
            t *= params.beta;
        }
        let Some((next, v)) = accepted else {
            return Ok(Trajectory { steps: rows, stop: StopReason::LineSearchFailed, last: current });
        };
        current = next;
        value = v;
        grad = if value <= vanishing {
            None
        } else {
            match nuclear_gradient(&current) {
                Ok(g) => Some(g),
                Err(Error::NonDifferentiable(_)) => None,
                Err(e) => return Err(e),
            }
        };
        rows.push(DescentStep { step, nuclear_norm: value, step_size: t, grad_norm: grad_norm(&grad) });
    }
    let stop = if grad.is_some() { StopReason::StepBudget } else { StopReason::Singular };
    Ok(Trajectory { steps: rows, stop, last: current })
}
