//! Third-order tensors under the t-product.
//!
//! A [`Tensor3`] of size `n × m × p` is stored as its unfolding: an `np × m`
//! column-major block column whose `k`-th `n × m` block is frontal face `k`.
//! Block circulant matrices are only materialized when asked for.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::linalg::{self, matmul};
use crate::scalar::{CMatrix, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3<T: Real> {
    n: usize,
    m: usize,
    p: usize,
    data: CMatrix<T>,
}

fn check_positive(n: usize, m: usize, p: usize) -> Result<()> {
    if n == 0 || m == 0 || p == 0 {
        return Err(Error::InvalidArgument(format!("tensor dimensions must be positive, got {n}x{m}x{p}")));
    }
    Ok(())
}

impl<T: Real> Tensor3<T> {
    pub fn zeros(n: usize, m: usize, p: usize) -> Self {
        Self { n, m, p, data: CMatrix::zeros(n * p, m) }
    }

    /// Builds a tensor from entry `(i, j, k)` (zero based).
    pub fn from_fn(n: usize, m: usize, p: usize, mut f: impl FnMut(usize, usize, usize) -> Complex<T>) -> Self {
        let data = CMatrix::from_fn(n * p, m, |row, j| f(row % n, j, row / n));
        Self { n, m, p, data }
    }

    pub fn from_faces(faces: &[CMatrix<T>]) -> Result<Self> {
        let first = faces.first().ok_or_else(|| Error::InvalidArgument("no faces given".into()))?;
        let (n, m) = first.shape();
        check_positive(n, m, faces.len())?;
        let mut data = CMatrix::zeros(n * faces.len(), m);
        for (k, face) in faces.iter().enumerate() {
            if face.shape() != (n, m) {
                return Err(Error::DimensionMismatch(format!(
                    "face {k} is {:?}, expected {:?}",
                    face.shape(),
                    (n, m)
                )));
            }
            data.view_mut((k * n, 0), (n, m)).copy_from(face);
        }
        Ok(Self { n, m, p: faces.len(), data })
    }

    /// Rebuilds a tensor from its unfolding.
    pub fn fold(unfolded: CMatrix<T>, n: usize, m: usize, p: usize) -> Result<Self> {
        check_positive(n, m, p)?;
        if unfolded.shape() != (n * p, m) {
            return Err(Error::DimensionMismatch(format!(
                "cannot fold a {:?} block column into {n}x{m}x{p}",
                unfolded.shape()
            )));
        }
        Ok(Self { n, m, p, data: unfolded })
    }

    pub fn unfold(&self) -> CMatrix<T> {
        self.data.clone()
    }

    pub fn into_unfolded(self) -> CMatrix<T> {
        self.data
    }

    pub fn unfolded(&self) -> &CMatrix<T> {
        &self.data
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.n, self.m, self.p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> Complex<T> {
        self.data[(k * self.n + i, j)]
    }

    pub fn face(&self, k: usize) -> CMatrix<T> {
        self.data.view((k * self.n, 0), (self.n, self.m)).into_owned()
    }

    pub fn faces(&self) -> Vec<CMatrix<T>> {
        (0..self.p).map(|k| self.face(k)).collect()
    }

    pub fn is_square(&self) -> bool {
        self.n == self.m
    }

    pub fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::NonSquare { rows: self.n, cols: self.m })
        }
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == T::zero())
    }

    /// Entries stacked in unfolding column-major order; entry `(i, j, k)`
    /// lands at `i + k n + j n p`.
    pub fn vec(&self) -> Vec<Complex<T>> {
        self.data.as_slice().to_vec()
    }

    pub fn unvec(values: &[Complex<T>], n: usize, m: usize, p: usize) -> Result<Self> {
        check_positive(n, m, p)?;
        if values.len() != n * m * p {
            return Err(Error::DimensionMismatch(format!(
                "{} values cannot fill {n}x{m}x{p}",
                values.len()
            )));
        }
        Ok(Self { n, m, p, data: CMatrix::from_column_slice(n * p, m, values) })
    }

    pub fn map(&self, f: impl FnMut(Complex<T>) -> Complex<T>) -> Self {
        Self { n: self.n, m: self.m, p: self.p, data: self.data.map(f) }
    }

    pub fn scale(&self, alpha: Complex<T>) -> Self {
        self.map(|z| z * alpha)
    }

    pub fn scale_real(&self, alpha: T) -> Self {
        self.map(|z| z.scale(alpha))
    }

    fn same_dims(&self, other: &Self, op: &str) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch(format!(
                "{op}: {:?} vs {:?}",
                self.dims(),
                other.dims()
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.same_dims(other, "add")?;
        Ok(Self { data: &self.data + &other.data, ..*self })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.same_dims(other, "sub")?;
        Ok(Self { data: &self.data - &other.data, ..*self })
    }

    /// The `np × mp` block circulant matrix with first block column `unfold(self)`.
    pub fn bcirc(&self) -> CMatrix<T> {
        let (n, m, p) = self.dims();
        let mut out = CMatrix::zeros(n * p, m * p);
        for col_block in 0..p {
            for row_block in 0..p {
                let k = (row_block + p - col_block) % p;
                out.view_mut((row_block * n, col_block * m), (n, m))
                    .copy_from(&self.data.view((k * n, 0), (n, m)));
            }
        }
        out
    }

    /// `bcirc(self) · b` without forming the block circulant matrix.
    pub fn bcirc_apply(&self, b: &CMatrix<T>) -> Result<CMatrix<T>> {
        let (n, m, p) = self.dims();
        if b.nrows() != m * p {
            return Err(Error::DimensionMismatch(format!(
                "bcirc of {n}x{m}x{p} applied to {} rows",
                b.nrows()
            )));
        }
        let cols = b.ncols();
        let faces = self.faces();
        let blocks: Vec<CMatrix<T>> = (0..p).map(|k| b.view((k * m, 0), (m, cols)).into_owned()).collect();
        let mut out = CMatrix::zeros(n * p, cols);
        for r in 0..p {
            let mut acc = CMatrix::zeros(n, cols);
            for (k, block) in blocks.iter().enumerate() {
                let face = &faces[(r + p - k) % p];
                if face.iter().all(|z| *z == Complex::new(T::zero(), T::zero())) {
                    continue;
                }
                acc += matmul(face, block);
            }
            out.view_mut((r * n, 0), (n, cols)).copy_from(&acc);
        }
        Ok(out)
    }

    /// `bcirc(self)ᴴ · b`, using `bcirc(A)ᴴ = bcirc(Aᴴ)`.
    pub fn bcirc_adjoint_apply(&self, b: &CMatrix<T>) -> Result<CMatrix<T>> {
        self.t_transpose().bcirc_apply(b)
    }

    pub fn t_product(&self, other: &Self) -> Result<Self> {
        if self.m != other.n || self.p != other.p {
            return Err(Error::DimensionMismatch(format!(
                "t-product of {:?} and {:?}",
                self.dims(),
                other.dims()
            )));
        }
        let data = self.bcirc_apply(&other.data)?;
        Ok(Self { n: self.n, m: other.m, p: self.p, data })
    }

    /// Conjugate t-transpose: conjugate-transpose every face and reverse
    /// the order of faces 2 through p.
    pub fn t_transpose(&self) -> Self {
        let (n, m, p) = self.dims();
        let mut data = CMatrix::zeros(m * p, n);
        for k in 0..p {
            let src = (p - k) % p;
            data.view_mut((k * m, 0), (m, n))
                .copy_from(&self.data.view((src * n, 0), (n, m)).adjoint());
        }
        Self { n: m, m: n, p, data }
    }

    pub fn identity(n: usize, p: usize) -> Self {
        let mut t = Self::zeros(n, n, p);
        for i in 0..n {
            t.data[(i, i)] = Complex::new(T::one(), T::zero());
        }
        t
    }

    /// Inverse under the t-product, computed face by face in the Fourier
    /// domain. Any transform-domain face whose 1-norm condition exceeds
    /// `1/(100 eps)` is reported as singular.
    pub fn t_inverse(&self) -> Result<Self> {
        self.require_square()?;
        let blocks = self.dft_faces();
        let mut inverted = Vec::with_capacity(blocks.len());
        for (i, d) in blocks.iter().enumerate() {
            let (inv, _) = linalg::inverse(d, &format!("transform-domain face {i}"))?;
            inverted.push(inv);
        }
        Self::idft_faces(&inverted)
    }

    pub fn frobenius_norm(&self) -> T {
        linalg::frobenius(&self.data)
    }

    /// Trace of the first frontal face.
    pub fn trace1(&self) -> Result<Complex<T>> {
        self.require_square()?;
        Ok((0..self.n).fold(Complex::new(T::zero(), T::zero()), |acc, i| acc + self.data[(i, i)]))
    }

    /// `⟨self, other⟩ = trace1(otherᴴ ∗ self)`, the Euclidean inner product
    /// of the vectorized tensors (conjugate-linear in `other`).
    pub fn inner_product(&self, other: &Self) -> Result<Complex<T>> {
        self.same_dims(other, "inner product")?;
        let (_, m, p) = self.dims();
        // trace1(Bᴴ ∗ A) = Σ_k tr(B⁽ᵏ⁾ᴴ A⁽ᵏ⁾); the m × m first face need not be formed.
        let mut acc = Complex::new(T::zero(), T::zero());
        for k in 0..p {
            let a = self.data.view((k * self.n, 0), (self.n, m));
            let b = other.data.view((k * self.n, 0), (self.n, m));
            acc += b.dotc(&a);
        }
        Ok(acc)
    }

    /// Unnormalized DFT along the face index:
    /// `D_i = Σ_k A⁽ᵏ⁾ ω^{ik}` with `ω = exp(−2πi/p)`.
    pub fn dft_faces(&self) -> Vec<CMatrix<T>> {
        transform_faces(&self.data, self.n, self.m, self.p, false)
    }

    /// Inverse of [`Tensor3::dft_faces`] (backward transform scaled by `1/p`).
    pub fn idft_faces(blocks: &[CMatrix<T>]) -> Result<Self> {
        let stacked = Self::from_faces(blocks)?;
        let (n, m, p) = stacked.dims();
        let faces = transform_faces(&stacked.data, n, m, p, true);
        Self::from_faces(&faces)
    }
}

fn transform_faces<T: Real>(data: &CMatrix<T>, n: usize, m: usize, p: usize, inverse: bool) -> Vec<CMatrix<T>> {
    let mut planner = FftPlanner::<T>::new();
    let fft = if inverse { planner.plan_fft_inverse(p) } else { planner.plan_fft_forward(p) };
    // One length-p sequence per face entry, laid out contiguously.
    let mut buffer = vec![Complex::new(T::zero(), T::zero()); n * m * p];
    for j in 0..m {
        for i in 0..n {
            let base = (j * n + i) * p;
            for k in 0..p {
                buffer[base + k] = data[(k * n + i, j)];
            }
        }
    }
    fft.process(&mut buffer);
    let scale = if inverse { T::one() / T::lit(p as f64) } else { T::one() };
    (0..p)
        .map(|k| {
            CMatrix::from_fn(n, m, |i, j| {
                let z = buffer[(j * n + i) * p + k];
                if inverse { z.scale(scale) } else { z }
            })
        })
        .collect()
}

/// Row/column index moved by `l` block positions (cyclic) in a dimension of `dim`.
pub fn shift_index(index: usize, l: i64, block: usize, dim: usize) -> usize {
    let shifted = index as i64 + l * block as i64;
    shifted.rem_euclid(dim as i64) as usize
}

/// `S^{l1} · M · (Sᵀ)^{l2}` for the block cyclic down-shift `S` with `n × n`
/// identity blocks. Implemented as an index permutation.
pub fn shift_apply<T: Real>(mat: &CMatrix<T>, l1: i64, l2: i64, n: usize) -> Result<CMatrix<T>> {
    let dim = mat.nrows();
    if !mat.is_square() || n == 0 || dim % n != 0 {
        return Err(Error::DimensionMismatch(format!(
            "shift needs a square matrix with dimension divisible by {n}, got {:?}",
            mat.shape()
        )));
    }
    let mut out = CMatrix::zeros(dim, dim);
    for j in 0..dim {
        let jj = shift_index(j, l2, n, dim);
        for i in 0..dim {
            out[(shift_index(i, l1, n, dim), jj)] = mat[(i, j)];
        }
    }
    Ok(out)
}

/// `𝒮^l(M) = S^l M (Sᵀ)^l`; fixed points are exactly the block circulants.
pub fn circulant_shift<T: Real>(mat: &CMatrix<T>, l: i64, n: usize) -> Result<CMatrix<T>> {
    shift_apply(mat, l, l, n)
}

impl<T: Real> Add for &Tensor3<T> {
    type Output = Tensor3<T>;
    fn add(self, rhs: Self) -> Tensor3<T> {
        self.try_add(rhs).expect("tensor add: dimension mismatch")
    }
}

impl<T: Real> Sub for &Tensor3<T> {
    type Output = Tensor3<T>;
    fn sub(self, rhs: Self) -> Tensor3<T> {
        self.try_sub(rhs).expect("tensor sub: dimension mismatch")
    }
}

impl<T: Real> Neg for &Tensor3<T> {
    type Output = Tensor3<T>;
    fn neg(self) -> Tensor3<T> {
        self.map(|z| -z)
    }
}

impl<T: Real> Mul<Complex<T>> for &Tensor3<T> {
    type Output = Tensor3<T>;
    fn mul(self, rhs: Complex<T>) -> Tensor3<T> {
        self.scale(rhs)
    }
}
