//! Block Arnoldi with block modified Gram–Schmidt, one conditional
//! reorthogonalization pass and rank-revealing deflation of each new block.

use crate::error::{Error, Result};
use crate::linalg::{frobenius, matmul};
use crate::scalar::{CMatrix, Real};
use crate::tensor::Tensor3;

/// `A · basis = basis · hessenberg + next_block · coupling · E_lastᴴ`, where
/// `E_last` selects the columns of the most recent block.
#[derive(Debug, Clone)]
pub struct BlockArnoldiDecomposition<T: Real> {
    pub basis: CMatrix<T>,
    pub hessenberg: CMatrix<T>,
    pub next_block: CMatrix<T>,
    pub coupling: CMatrix<T>,
    /// First column of each block in `basis`; widths shrink under deflation.
    pub block_starts: Vec<usize>,
    /// `R` with `start = basis[:, first block] · R` (up to deflated columns).
    pub start_coefficients: CMatrix<T>,
}

impl<T: Real> BlockArnoldiDecomposition<T> {
    /// Columns of the most recent block inside `basis`.
    pub fn last_block(&self) -> std::ops::Range<usize> {
        let start = self.block_starts.last().copied().unwrap_or(0);
        start..self.basis.ncols()
    }
}

const DEFLATION: f64 = 1e-12;
const REORTHOGONALIZE: f64 = 1e-8;

/// Orthonormal basis of the numerical range of `w` together with the
/// coefficients expressing `w` in it. Singular values at or below
/// `threshold` are dropped.
fn deflate<T: Real>(w: &CMatrix<T>, threshold: T) -> (CMatrix<T>, CMatrix<T>) {
    let (rows, cols) = w.shape();
    if cols == 0 || rows == 0 {
        return (CMatrix::zeros(rows, 0), CMatrix::zeros(0, cols));
    }
    let svd = w.clone().svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let vt = svd.v_t.expect("right singular vectors requested");
    let keep: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > threshold).collect();
    let q = CMatrix::from_fn(rows, keep.len(), |i, j| u[(i, keep[j])]);
    let coefficients = CMatrix::from_fn(keep.len(), cols, |i, j| vt[(keep[i], j)].scale(svd.singular_values[keep[i]]));
    (q, coefficients)
}

fn finite<T: Real>(m: &CMatrix<T>) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub(crate) struct BlockArnoldi<T: Real, Op> {
    op: Op,
    basis: CMatrix<T>,
    h: CMatrix<T>,
    block_starts: Vec<usize>,
    next: CMatrix<T>,
    coupling: CMatrix<T>,
    start_coefficients: CMatrix<T>,
    pub(crate) applications: usize,
}

impl<T: Real, Op: FnMut(&CMatrix<T>) -> Result<CMatrix<T>>> BlockArnoldi<T, Op> {
    pub(crate) fn new(op: Op, start: &CMatrix<T>) -> Result<Self> {
        if !finite(start) {
            return Err(Error::KrylovBreakdown { achieved_d: 0, reason: "non-finite start block".into() });
        }
        let threshold = T::lit(DEFLATION) * frobenius(start);
        let (q, r) = deflate(start, threshold);
        Ok(Self {
            op,
            basis: CMatrix::zeros(start.nrows(), 0),
            h: CMatrix::zeros(0, 0),
            block_starts: Vec::new(),
            coupling: r.clone(),
            start_coefficients: r,
            next: q,
            applications: 0,
        })
    }

    /// True once the space is invariant: the pending block is empty.
    pub(crate) fn exhausted(&self) -> bool {
        self.next.ncols() == 0
    }

    pub(crate) fn basis(&self) -> &CMatrix<T> {
        &self.basis
    }

    pub(crate) fn hessenberg(&self) -> &CMatrix<T> {
        &self.h
    }

    /// Moves the pending block into the basis and computes the next one.
    /// Returns `false` without touching the operator when already exhausted.
    pub(crate) fn step(&mut self) -> Result<bool> {
        if self.exhausted() {
            return Ok(false);
        }
        let old_k = self.basis.ncols();
        let r = self.next.ncols();
        let k = old_k + r;

        let mut basis = CMatrix::zeros(self.basis.nrows(), k);
        basis.columns_mut(0, old_k).copy_from(&self.basis);
        basis.columns_mut(old_k, r).copy_from(&self.next);
        let mut h = CMatrix::zeros(k, k);
        h.view_mut((0, 0), (old_k, old_k)).copy_from(&self.h);
        if let Some(&last) = self.block_starts.last() {
            h.view_mut((old_k, last), (r, old_k - last)).copy_from(&self.coupling);
        }
        self.basis = basis;
        self.h = h;
        self.block_starts.push(old_k);

        let block = self.basis.columns(old_k, r).into_owned();
        let mut w = (self.op)(&block)?;
        self.applications += 1;
        let pre_norm = frobenius(&w);

        let blocks: Vec<(usize, usize)> = self
            .block_starts
            .iter()
            .enumerate()
            .map(|(i, &s)| (s, self.block_starts.get(i + 1).copied().unwrap_or(k) - s))
            .collect();
        for pass in 0..2 {
            for &(s, width) in &blocks {
                let vj = self.basis.columns(s, width).into_owned();
                let coef = matmul(&vj.adjoint(), &w);
                w -= matmul(&vj, &coef);
                let mut target = self.h.view_mut((s, old_k), (width, r));
                target += &coef;
            }
            if pass == 0 {
                let loss = frobenius(&matmul(&self.basis.adjoint(), &w));
                if loss <= T::lit(REORTHOGONALIZE) * frobenius(&w) {
                    break;
                }
            }
        }
        if !finite(&w) || !finite(&self.h) {
            return Err(Error::KrylovBreakdown {
                achieved_d: self.block_starts.len() - 1,
                reason: "non-finite values in the Krylov block".into(),
            });
        }
        let (q, coupling) = deflate(&w, T::lit(DEFLATION) * pre_norm);
        self.next = q;
        self.coupling = coupling;
        Ok(true)
    }

    pub(crate) fn decomposition(&self) -> BlockArnoldiDecomposition<T> {
        BlockArnoldiDecomposition {
            basis: self.basis.clone(),
            hessenberg: self.h.clone(),
            next_block: self.next.clone(),
            coupling: self.coupling.clone(),
            block_starts: self.block_starts.clone(),
            start_coefficients: self.start_coefficients.clone(),
        }
    }
}

/// Runs `d` block Arnoldi steps on `bcirc(𝒜)` (or `bcirc(𝒜)ᴴ` when
/// `adjoint` is set) from `start`, stopping early on an invariant subspace.
pub fn block_arnoldi<T: Real>(
    a: &Tensor3<T>,
    start: &CMatrix<T>,
    d: usize,
    adjoint: bool,
) -> Result<BlockArnoldiDecomposition<T>> {
    a.require_square()?;
    let (n, _, p) = a.dims();
    if start.nrows() != n * p {
        return Err(Error::DimensionMismatch(format!("start block has {} rows, expected {}", start.nrows(), n * p)));
    }
    let op_tensor = if adjoint { a.t_transpose() } else { a.clone() };
    let mut arnoldi = BlockArnoldi::new(|x: &CMatrix<T>| op_tensor.bcirc_apply(x), start)?;
    for _ in 0..d {
        if !arnoldi.step()? {
            break;
        }
    }
    Ok(arnoldi.decomposition())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::relative_distance;
    use crate::random::{random_complex_matrix, random_complex_tensor, seeded};

    fn arnoldi_residual(a: &CMatrix<f64>, dec: &BlockArnoldiDecomposition<f64>) -> f64 {
        let k = dec.basis.ncols();
        let last = dec.last_block();
        let mut rhs = &dec.basis * &dec.hessenberg;
        let tail = &dec.next_block * &dec.coupling;
        let mut cols = rhs.columns_mut(last.start, last.len());
        cols += &tail;
        let lhs = a * &dec.basis;
        assert_eq!(lhs.shape(), (a.nrows(), k));
        frobenius(&(lhs - rhs)) / frobenius(a)
    }

    #[test]
    fn orthonormal_basis_and_arnoldi_relation() {
        let mut rng = seeded(61);
        let t = random_complex_tensor::<f64>(3, 3, 4, &mut rng);
        let start = random_complex_matrix::<f64>(12, 2, &mut rng);
        for adjoint in [false, true] {
            let dec = block_arnoldi(&t, &start, 3, adjoint).unwrap();
            let k = dec.basis.ncols();
            assert_eq!(k, 6);
            let gram = dec.basis.adjoint() * &dec.basis;
            assert!(relative_distance(&gram, &CMatrix::identity(k, k)) <= 1e-10);
            let op = if adjoint { t.bcirc().adjoint() } else { t.bcirc() };
            assert!(arnoldi_residual(&op, &dec) <= 1e-10);
            // Block upper Hessenberg: nothing below the first subdiagonal block.
            for i in 4..k {
                for j in 0..2 {
                    assert_eq!(dec.hessenberg[(i, j)].norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn rank_deficient_start_is_deflated() {
        let mut rng = seeded(62);
        let t = random_complex_tensor::<f64>(2, 2, 3, &mut rng);
        let col = random_complex_matrix::<f64>(6, 1, &mut rng);
        let mut start = CMatrix::zeros(6, 2);
        start.column_mut(0).copy_from(&col.column(0));
        start.column_mut(1).copy_from(&(col.column(0) * num_complex::Complex::new(2.0, -1.0)));
        let dec = block_arnoldi(&t, &start, 1, false).unwrap();
        assert_eq!(dec.basis.ncols(), 1);
        let v1 = dec.basis.columns(0, 1).into_owned();
        assert!(relative_distance(&(v1 * &dec.start_coefficients), &start) <= 1e-14);
    }

    #[test]
    fn full_space_is_invariant() {
        let mut rng = seeded(63);
        let t = random_complex_tensor::<f64>(2, 2, 2, &mut rng);
        let start = random_complex_matrix::<f64>(4, 4, &mut rng);
        let dec = block_arnoldi(&t, &start, 5, false).unwrap();
        assert_eq!(dec.basis.ncols(), 4);
        assert_eq!(dec.next_block.ncols(), 0);
        assert!(relative_distance(&(&dec.basis * &dec.hessenberg * dec.basis.adjoint()), &t.bcirc()) <= 1e-13);
    }
}
