//! Kronecker forms `K_f(𝒜)`, the `n²p × n²p` matrices with
//! `vec(L_f(𝒜, 𝒞)) = K_f(𝒜) vec(𝒞)`.
//!
//! Column `c = i + k n + j n p` (zero based) holds `vec(L_f(𝒜, 𝓔_ijk))`.
//! [`kron_full`] makes one t-Fréchet solve per column. [`kron_efficient`]
//! makes only `n²` matrix-level solves `Y_ij = L_f(bcirc(𝒜), E_ij)` and
//! recovers every column from block cyclic shifts of them, since
//! `bcirc(𝓔_ijk) = Σ_ℓ 𝒮^ℓ(E_IJ)` and `L_f(bcirc(𝒜), ·)` commutes with `𝒮`.

use rayon::prelude::*;

use nalgebra::ComplexField;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::frechet::{tfrechet, FrechetOptions, Method};
use crate::linalg::{matmul, spectral_norm};
use crate::matfun::{frechet_block_literal, frechet_coupled, ScalarFunction};
use crate::scalar::{CMatrix, Real};
use crate::tensor::{shift_index, Tensor3};

#[derive(Debug, Clone)]
pub struct KroneckerForm<T: Real> {
    pub matrix: CMatrix<T>,
    pub n: usize,
    pub p: usize,
    pub function: String,
    /// Fréchet solves spent building the form.
    pub solver_calls: usize,
}

impl<T: Real> KroneckerForm<T> {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `unvec(K vec(𝒞))`.
    pub fn apply(&self, c: &Tensor3<T>) -> Result<Tensor3<T>> {
        if c.dims() != (self.n, self.n, self.p) {
            return Err(Error::DimensionMismatch(format!(
                "Kronecker form for {}x{}x{} applied to {:?}",
                self.n,
                self.n,
                self.p,
                c.dims()
            )));
        }
        let x = CMatrix::from_column_slice(self.dim(), 1, &c.vec());
        Tensor3::unvec(matmul(&self.matrix, &x).as_slice(), self.n, self.n, self.p)
    }

    pub fn spectral_norm(&self) -> T {
        spectral_norm(&self.matrix)
    }
}

#[derive(Debug, Clone)]
pub struct KronOptions {
    /// Largest admissible `n²p`.
    pub cap: usize,
    /// Largest admissible `n²p²` for matrix-level Kronecker forms of `bcirc(𝒜)`.
    pub bcirc_cap: usize,
    pub frechet: FrechetOptions,
}

impl Default for KronOptions {
    fn default() -> Self {
        Self { cap: 2500, bcirc_cap: 4096, frechet: FrechetOptions::default() }
    }
}

/// How matrix-level derivatives `L_f(bcirc(𝒜), E)` are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatrixRoute {
    /// `f` on the dense `2np × 2np` block matrix.
    Dense,
    /// `p²` coupled `2n × 2n` problems between transform-domain faces,
    /// using `bcirc(𝒜) = Φᴴ blkdiag(D) Φ` with `Φ = F_p ⊗ I_n`.
    #[default]
    Fourier,
}

fn check_index(i: usize, j: usize, k: usize, n: usize, p: usize) -> Result<()> {
    if i >= n || j >= n || k >= p {
        return Err(Error::IndexOutOfRange(format!("({i}, {j}, {k}) outside {n}x{n}x{p}")));
    }
    Ok(())
}

fn one<T: Real>() -> Complex<T> {
    Complex::new(T::one(), T::zero())
}

/// `𝓔_ijk`: a single one at `(i, j, k)` (zero based).
pub fn unit_tensor<T: Real>(i: usize, j: usize, k: usize, n: usize, p: usize) -> Result<Tensor3<T>> {
    check_index(i, j, k, n, p)?;
    let mut data = CMatrix::zeros(n * p, n);
    data[(k * n + i, j)] = one();
    Tensor3::fold(data, n, n, p)
}

/// `bcirc(𝓔_ijk)` assembled as `Σ_ℓ 𝒮^ℓ(E_IJ)` with `I = i + k n`, `J = j`.
pub fn bcirc_of_unit<T: Real>(i: usize, j: usize, k: usize, n: usize, p: usize) -> Result<CMatrix<T>> {
    check_index(i, j, k, n, p)?;
    let dim = n * p;
    let mut out = CMatrix::zeros(dim, dim);
    for l in 0..p as i64 {
        out[(shift_index(i + k * n, l, n, dim), shift_index(j, l, n, dim))] = one();
    }
    Ok(out)
}

/// Column of `K_f(𝒜)` holding the response to `𝓔_ijk`.
pub fn column_index(i: usize, j: usize, k: usize, n: usize, p: usize) -> usize {
    i + k * n + j * n * p
}

fn check_cap<T: Real>(a: &Tensor3<T>, cap: usize) -> Result<()> {
    a.require_square()?;
    let (n, _, p) = a.dims();
    let size = n * n * p;
    if size > cap {
        return Err(Error::DenseLimit { what: "Kronecker form", size, limit: cap });
    }
    Ok(())
}

/// Brute-force construction: one t-Fréchet solve per unit tensor.
pub fn kron_full<T: Real>(
    a: &Tensor3<T>,
    f: &ScalarFunction<T>,
    method: Method,
    options: &KronOptions,
) -> Result<KroneckerForm<T>> {
    check_cap(a, options.cap)?;
    let (n, _, p) = a.dims();
    let dim = n * n * p;
    let columns: Vec<Vec<Complex<T>>> = (0..dim)
        .into_par_iter()
        .map(|c| {
            let (i, k, j) = (c % n, (c / n) % p, c / (n * p));
            let e = unit_tensor(i, j, k, n, p)?;
            Ok(tfrechet(a, &e, f, method, &options.frechet)?.value.vec())
        })
        .collect::<Result<_>>()?;
    let mut matrix = CMatrix::zeros(dim, dim);
    for (c, col) in columns.iter().enumerate() {
        matrix.column_mut(c).copy_from_slice(col);
    }
    Ok(KroneckerForm { matrix, n, p, function: f.name(), solver_calls: dim })
}

/// Evaluator for `L_f(bcirc(𝒜), E)` with arbitrary `np × np` directions `E`.
pub struct BcircFrechet<T: Real> {
    n: usize,
    p: usize,
    f: ScalarFunction<T>,
    route: MatrixRoute,
    bcirc: CMatrix<T>,
    faces: Vec<CMatrix<T>>,
    phi: CMatrix<T>,
}

/// `F_p ⊗ I_n` with the unitary DFT matrix `F_p[a, b] = ω^{ab}/√p`, `ω = exp(−2πi/p)`.
pub fn fourier_block_matrix<T: Real>(n: usize, p: usize) -> CMatrix<T> {
    let scale = 1.0 / (p as f64).sqrt();
    CMatrix::from_fn(n * p, n * p, |r, c| {
        if r % n != c % n {
            return Complex::new(T::zero(), T::zero());
        }
        let (a, b) = ((r / n) as f64, (c / n) as f64);
        let angle = -2.0 * std::f64::consts::PI * ((a * b) % p as f64) / p as f64;
        Complex::new(T::lit(angle.cos() * scale), T::lit(angle.sin() * scale))
    })
}

impl<T: Real> BcircFrechet<T> {
    pub fn new(a: &Tensor3<T>, f: &ScalarFunction<T>, route: MatrixRoute) -> Result<Self> {
        a.require_square()?;
        let (n, _, p) = a.dims();
        let (faces, phi) = match route {
            MatrixRoute::Fourier => (a.dft_faces(), fourier_block_matrix(n, p)),
            MatrixRoute::Dense => (Vec::new(), CMatrix::zeros(0, 0)),
        };
        Ok(Self { n, p, f: f.clone(), route, bcirc: a.bcirc(), faces, phi })
    }

    pub fn apply(&self, e: &CMatrix<T>) -> Result<CMatrix<T>> {
        let (n, p) = (self.n, self.p);
        if e.shape() != (n * p, n * p) {
            return Err(Error::DimensionMismatch(format!("direction {:?}, expected {}x{}", e.shape(), n * p, n * p)));
        }
        match self.route {
            MatrixRoute::Dense => {
                if self.f.is_structural() {
                    frechet_block_literal(&self.bcirc, &self.bcirc, e, &self.f)
                } else {
                    frechet_coupled(&self.bcirc, &self.bcirc, e, &self.f)
                }
            }
            MatrixRoute::Fourier => {
                let et = matmul(&matmul(&self.phi, e), &self.phi.adjoint());
                let blocks: Vec<((usize, usize), CMatrix<T>)> = (0..p * p)
                    .into_par_iter()
                    .map(|idx| {
                        let (x, y) = (idx % p, idx / p);
                        let m = et.view((x * n, y * n), (n, n)).into_owned();
                        Ok(((x, y), frechet_coupled(&self.faces[x], &self.faces[y], &m, &self.f)?))
                    })
                    .collect::<Result<_>>()?;
                let mut lt = CMatrix::zeros(n * p, n * p);
                for ((x, y), block) in blocks {
                    lt.view_mut((x * n, y * n), (n, n)).copy_from(&block);
                }
                Ok(matmul(&matmul(&self.phi.adjoint(), &lt), &self.phi))
            }
        }
    }
}

/// Shift-exploiting construction with exactly `n²` matrix-level solves.
pub fn kron_efficient<T: Real>(
    a: &Tensor3<T>,
    f: &ScalarFunction<T>,
    route: MatrixRoute,
    options: &KronOptions,
) -> Result<KroneckerForm<T>> {
    check_cap(a, options.cap)?;
    let (n, _, p) = a.dims();
    let big = n * p;
    let dim = n * n * p;
    let solver = BcircFrechet::new(a, f, route)?;
    let base: Vec<CMatrix<T>> = (0..n * n)
        .map(|idx| {
            let (i, j) = (idx % n, idx / n);
            let mut e = CMatrix::zeros(big, big);
            e[(i, j)] = one();
            solver.apply(&e)
        })
        .collect::<Result<_>>()?;

    let mut matrix = CMatrix::zeros(dim, dim);
    for j in 0..n {
        for i in 0..n {
            let y = &base[i + j * n];
            for k in 0..p {
                // First block column of Σ_ℓ S^{k+ℓ} Y (Sᵀ)^ℓ.
                let mut col = matrix.column_mut(column_index(i, j, k, n, p));
                for c in 0..n {
                    for r in 0..big {
                        let mut acc = Complex::new(T::zero(), T::zero());
                        for l in 0..p as i64 {
                            let src_r = shift_index(r, -(k as i64 + l), n, big);
                            let src_c = shift_index(c, -l, n, big);
                            acc += y[(src_r, src_c)];
                        }
                        col[r + c * big] = acc;
                    }
                }
            }
        }
    }
    Ok(KroneckerForm { matrix, n, p, function: f.name(), solver_calls: n * n })
}

/// Matrix-level Kronecker form `K_f(bcirc(𝒜))` of size `n²p² × n²p²`, one
/// dense solve per unit matrix `E_IJ` (column `I + J np`).
pub fn kron_bcirc<T: Real>(a: &Tensor3<T>, f: &ScalarFunction<T>, options: &KronOptions) -> Result<CMatrix<T>> {
    a.require_square()?;
    let (n, _, p) = a.dims();
    let big = n * p;
    let size = big * big;
    if size > options.bcirc_cap {
        return Err(Error::DenseLimit { what: "matrix-level Kronecker form", size, limit: options.bcirc_cap });
    }
    let solver = BcircFrechet::new(a, f, MatrixRoute::Dense)?;
    let columns: Vec<CMatrix<T>> = (0..size)
        .into_par_iter()
        .map(|col| {
            let mut e = CMatrix::zeros(big, big);
            e[(col % big, col / big)] = one();
            solver.apply(&e)
        })
        .collect::<Result<_>>()?;
    let mut k2 = CMatrix::zeros(size, size);
    for (col, l) in columns.iter().enumerate() {
        k2.column_mut(col).copy_from_slice(l.as_slice());
    }
    Ok(k2)
}

#[derive(Debug, Clone)]
pub struct ColumnRelationReport {
    /// Largest entrywise deviation per column of `K_f(𝒜)`.
    pub per_column: Vec<f64>,
    pub max_deviation: f64,
}

impl ColumnRelationReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.max_deviation <= tol
    }
}

/// Offsets `s_α` relating column `c` of `K_f(𝒜)` (for `𝓔_ijk`) to the columns
/// of `K_f(bcirc(𝒜))`: `s₀ = 0`, each step adds `n²p + n`, and the step that
/// wraps the block row past `p` also subtracts `np`.
pub fn relation_offsets(k: usize, n: usize, p: usize) -> Vec<i64> {
    let (n, p) = (n as i64, p as i64);
    let mut offsets = vec![0i64];
    for alpha in 1..p {
        let mut s = offsets[(alpha - 1) as usize] + n * n * p + n;
        if k as i64 + alpha == p {
            s -= n * p;
        }
        offsets.push(s);
    }
    offsets
}

/// Checks `K_f(𝒜)[:, c] = Σ_α K_f(bcirc(𝒜))[0..n²p, c + s_α]` for every column,
/// with both forms built by brute force.
pub fn column_relation_check<T: Real>(
    a: &Tensor3<T>,
    f: &ScalarFunction<T>,
    options: &KronOptions,
) -> Result<ColumnRelationReport> {
    let (n, _, p) = a.dims();
    let k2 = kron_bcirc(a, f, options)?;
    let k1 = kron_full(a, f, Method::Bcirc, options)?.matrix;
    let dim = n * n * p;
    let mut per_column = Vec::with_capacity(dim);
    for c in 0..dim {
        let k = (c / n) % p;
        let mut sum = vec![Complex::new(T::zero(), T::zero()); dim];
        for s in relation_offsets(k, n, p) {
            let col = (c as i64 + s) as usize;
            for (r, acc) in sum.iter_mut().enumerate() {
                *acc += k2[(r, col)];
            }
        }
        let dev = (0..dim).map(|r| (k1[(r, c)] - sum[r]).modulus().to_f64_lossy()).fold(0.0, f64::max);
        per_column.push(dev);
    }
    let max_deviation = per_column.iter().copied().fold(0.0, f64::max);
    Ok(ColumnRelationReport { per_column, max_deviation })
}
