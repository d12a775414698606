//! Tensor t-product calculus and Fréchet derivatives of tensor t-functions.
//!
//! Third-order tensors multiply through block circulant matrices: for
//! `𝒜 ∈ ℂ^{n×m×p}` and `ℬ ∈ ℂ^{m×s×p}`, `𝒜 ∗ ℬ = fold(bcirc(𝒜) · unfold(ℬ))`.
//! A scalar function `f` lifts to square tensors as
//! `f(𝒜) = fold(f(bcirc(𝒜)) · E₁)`, and this crate computes its Fréchet
//! derivative `L_f(𝒜, 𝒞)` with several interchangeable solvers, together with
//! Kronecker forms, condition numbers and the nuclear-norm gradient.
//!
//! Everything is generic over the real scalar type through [`Real`]
//! (implemented for `f32` and `f64`); entries are always complex.

pub mod bench;
pub mod conditioning;
pub mod error;
pub mod frechet;
pub mod io;
pub mod kron;
pub mod linalg;
pub mod matfun;
pub mod nuclear;
pub mod random;
pub mod scalar;
pub mod tensor;
pub mod tfun;

pub use error::{Error, Result};
pub use matfun::{ScalarFunction, CustomFunction};
pub use scalar::{CMatrix, Real};
pub use tensor::{shift_apply, Tensor3};

/// Dense complex block matrix; the block size is passed alongside where it matters.
pub type BlockMatrix<T> = CMatrix<T>;

pub type Tensor3f64 = Tensor3<f64>;
pub type Tensor3f32 = Tensor3<f32>;
pub type ScalarFunctionF64 = ScalarFunction<f64>;
