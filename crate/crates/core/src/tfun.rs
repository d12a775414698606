//! The tensor t-function `f(𝒜) = fold(f(bcirc(𝒜)) · E₁)` and its action
//! `f(𝒜) ∗ ℬ`.
//!
//! The default path works on the `p` transform-domain faces, which are
//! independent `n × n` problems evaluated in parallel. The `_bcirc` variants
//! materialize the block circulant matrix and serve as reference oracles.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::matmul;
use crate::matfun::{matfun, matfun_action, ScalarFunction};
use crate::scalar::{CMatrix, Real};
use crate::tensor::Tensor3;

pub fn t_function<T: Real>(a: &Tensor3<T>, f: &ScalarFunction<T>) -> Result<Tensor3<T>> {
    a.require_square()?;
    let blocks = a.dft_faces();
    let mapped: Vec<CMatrix<T>> = blocks.par_iter().map(|d| matfun(d, f)).collect::<Result<_>>()?;
    Tensor3::idft_faces(&mapped)
}

pub fn t_function_bcirc<T: Real>(a: &Tensor3<T>, f: &ScalarFunction<T>) -> Result<Tensor3<T>> {
    a.require_square()?;
    let (n, _, p) = a.dims();
    let e1 = Tensor3::<T>::identity(n, p).into_unfolded();
    Tensor3::fold(matfun_action(&a.bcirc(), &e1, f)?, n, n, p)
}

fn check_action<T: Real>(a: &Tensor3<T>, b: &Tensor3<T>) -> Result<()> {
    a.require_square()?;
    if b.n() != a.n() || b.p() != a.p() {
        return Err(Error::DimensionMismatch(format!(
            "f(A) * B with A {:?} and B {:?}",
            a.dims(),
            b.dims()
        )));
    }
    Ok(())
}

/// `f(𝒜) ∗ ℬ`, formed face by face in the transform domain.
pub fn t_function_action<T: Real>(a: &Tensor3<T>, b: &Tensor3<T>, f: &ScalarFunction<T>) -> Result<Tensor3<T>> {
    check_action(a, b)?;
    let da = a.dft_faces();
    let db = b.dft_faces();
    let mapped: Vec<CMatrix<T>> = da
        .par_iter()
        .zip(db.par_iter())
        .map(|(x, y)| Ok(matmul(&matfun(x, f)?, y)))
        .collect::<Result<_>>()?;
    Tensor3::idft_faces(&mapped)
}

pub fn t_function_action_bcirc<T: Real>(
    a: &Tensor3<T>,
    b: &Tensor3<T>,
    f: &ScalarFunction<T>,
) -> Result<Tensor3<T>> {
    check_action(a, b)?;
    let (n, s, p) = b.dims();
    Tensor3::fold(matfun_action(&a.bcirc(), b.unfolded(), f)?, n, s, p)
}
