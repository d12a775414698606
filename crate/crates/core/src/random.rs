//! Seeded random inputs.
//!
//! All randomness goes through [`ChaCha8Rng`] seeded from a `u64`, so integer
//! draws are portable across implementations of the same generator. Normal
//! deviates are drawn in f64 and then converted to the working precision.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::scalar::{CMatrix, Real};
use crate::tensor::Tensor3;

pub type Rng64 = ChaCha8Rng;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Standard complex normal: real and imaginary parts independent `N(0, 1/2)`.
pub fn complex_normal<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (re, im) = (normal(rng) * s, normal(rng) * s);
    Complex::new(T::lit(re), T::lit(im))
}

pub fn random_matrix<T: Real>(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix<T> {
    CMatrix::from_fn(rows, cols, |_, _| Complex::new(T::lit(normal(rng)), T::zero()))
}

pub fn random_complex_matrix<T: Real>(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix<T> {
    CMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Real tensor with independent standard normal entries.
pub fn random_tensor<T: Real>(n: usize, m: usize, p: usize, rng: &mut impl Rng) -> Tensor3<T> {
    Tensor3::fold(random_matrix(n * p, m, rng), n, m, p).expect("consistent dimensions")
}

pub fn random_complex_tensor<T: Real>(n: usize, m: usize, p: usize, rng: &mut impl Rng) -> Tensor3<T> {
    Tensor3::fold(random_complex_matrix(n * p, m, rng), n, m, p).expect("consistent dimensions")
}

pub fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..=hi)
}
