use super::{check_pair, FrechetOptions, FrechetResult, Method};
use crate::error::{Error, Result};
use crate::matfun::{frechet_block_literal, frechet_coupled, ScalarFunction};
use crate::scalar::Real;
use crate::tensor::Tensor3;

/// Reference solver: evaluates `f` on `[[bcirc(𝒜), bcirc(𝒞)], [0, bcirc(𝒜)]]`
/// and folds the first block column of the top-right block.
///
/// Functions without an eigendecomposition (exp, polynomials, inverse and
/// their combinations) are applied to the assembled block matrix directly.
/// Other kinds cannot be, since that matrix is not diagonalizable, and go
/// through divided differences on the spectrum of `bcirc(𝒜)` instead.
pub fn tfrechet_bcirc<T: Real>(
    a: &Tensor3<T>,
    c: &Tensor3<T>,
    f: &ScalarFunction<T>,
    options: &FrechetOptions,
) -> Result<FrechetResult<T>> {
    check_pair(a, c)?;
    let (n, _, p) = a.dims();
    let size = 2 * n * p;
    if size > options.dense_limit {
        return Err(Error::DenseLimit { what: "block Fréchet evaluation", size, limit: options.dense_limit });
    }
    let ba = a.bcirc();
    let bc = c.bcirc();
    let top_right = if f.is_structural() {
        frechet_block_literal(&ba, &ba, &bc, f)?
    } else {
        frechet_coupled(&ba, &ba, &bc, f)?
    };
    let first = top_right.columns(0, n).into_owned();
    Ok(FrechetResult::direct(Tensor3::fold(first, n, n, p)?, Method::Bcirc, 1))
}
