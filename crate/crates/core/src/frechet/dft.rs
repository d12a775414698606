use rayon::prelude::*;

use super::{check_pair, FrechetResult, Method};
use crate::error::{Error, Result};
use crate::matfun::{matfun_frechet_2x2, ScalarFunction};
use crate::scalar::{CMatrix, Real};
use crate::tensor::Tensor3;

/// Transform-domain solver: `L_f` of each pair of DFT faces, transformed back.
/// Errors carry the zero-based index of the failing face.
pub fn tfrechet_dft<T: Real>(a: &Tensor3<T>, c: &Tensor3<T>, f: &ScalarFunction<T>) -> Result<FrechetResult<T>> {
    check_pair(a, c)?;
    let da = a.dft_faces();
    let dc = c.dft_faces();
    let blocks: Vec<CMatrix<T>> = da
        .par_iter()
        .zip(dc.par_iter())
        .enumerate()
        .map(|(index, (x, y))| {
            matfun_frechet_2x2(x, y, f).map_err(|e| Error::Subproblem { index, source: Box::new(e) })
        })
        .collect::<Result<_>>()?;
    Ok(FrechetResult::direct(Tensor3::idft_faces(&blocks)?, Method::Dft, a.p()))
}
