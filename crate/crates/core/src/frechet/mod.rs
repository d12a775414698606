//! Solvers for the t-Fréchet derivative `L_f(𝒜, 𝒞)`.
//!
//! * [`tfrechet_bcirc`]: `f` on the `2np × 2np` block matrix
//!   `[[bcirc(𝒜), bcirc(𝒞)], [0, bcirc(𝒜)]]`, the exact reference.
//! * [`tfrechet_dft`]: `p` decoupled `n × n` derivatives in the transform domain.
//! * [`tfrechet_lowrank`]: block Krylov projection driven by a low-rank
//!   factorization `bcirc(𝒞) = C₁ C₂ᴴ`.
//! * [`gateaux_fd_oracle`]: central finite differences of the t-function.

mod arnoldi;
mod bcirc;
mod dft;
mod fd;
mod lowrank;

pub use arnoldi::{block_arnoldi, BlockArnoldiDecomposition};
pub use bcirc::tfrechet_bcirc;
pub use dft::tfrechet_dft;
pub use fd::{default_fd_step, gateaux_fd_oracle};
pub use lowrank::{cp_rank_one_factors, lowrank_factorize, tfrechet_lowrank, LowRankFactors};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matfun::ScalarFunction;
use crate::scalar::Real;
use crate::tensor::Tensor3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Bcirc,
    Dft,
    LowRank,
    FdOracle,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Bcirc => "bcirc",
            Method::Dft => "dft",
            Method::LowRank => "lowrank",
            Method::FdOracle => "fd",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "bcirc" => Ok(Method::Bcirc),
            "dft" => Ok(Method::Dft),
            "lowrank" => Ok(Method::LowRank),
            "fd" | "fd-oracle" => Ok(Method::FdOracle),
            other => Err(Error::InvalidArgument(format!("unknown solver '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FrechetResult<T: Real> {
    pub value: Tensor3<T>,
    pub method: Method,
    /// Block Krylov iterations (zero for the direct solvers).
    pub iterations: usize,
    /// Relative change of the iterate per Krylov iteration.
    pub history: Vec<f64>,
    /// Operator applications: one dense evaluation for `bcirc`, `p` face
    /// problems for `dft`, two products with `bcirc(𝒜)` or its adjoint per
    /// Krylov iteration, two t-function evaluations for the oracle.
    pub operator_applications: usize,
    pub converged: bool,
}

impl<T: Real> FrechetResult<T> {
    fn direct(value: Tensor3<T>, method: Method, operator_applications: usize) -> Self {
        Self { value, method, iterations: 0, history: Vec::new(), operator_applications, converged: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrechetOptions {
    /// Largest dimension `2np` evaluated densely by [`tfrechet_bcirc`].
    pub dense_limit: usize,
    pub max_d: usize,
    /// Krylov stopping tolerance on the relative change between iterates.
    pub tol: f64,
    /// Relative truncation used when [`tfrechet`] factorizes `𝒞` itself.
    pub factor_tol: f64,
    /// Finite-difference step; `None` uses [`default_fd_step`].
    pub fd_step: Option<f64>,
}

impl Default for FrechetOptions {
    fn default() -> Self {
        Self { dense_limit: 4000, max_d: 30, tol: 1e-8, factor_tol: 0.0, fd_step: None }
    }
}

pub(crate) fn check_pair<T: Real>(a: &Tensor3<T>, c: &Tensor3<T>) -> Result<()> {
    a.require_square()?;
    if a.dims() != c.dims() {
        return Err(Error::DimensionMismatch(format!(
            "direction {:?} does not match argument {:?}",
            c.dims(),
            a.dims()
        )));
    }
    Ok(())
}

/// `L_f(𝒜, 𝒞)` with the chosen solver. The low-rank solver factorizes `𝒞`
/// with [`lowrank_factorize`] at `options.factor_tol`.
pub fn tfrechet<T: Real>(
    a: &Tensor3<T>,
    c: &Tensor3<T>,
    f: &ScalarFunction<T>,
    method: Method,
    options: &FrechetOptions,
) -> Result<FrechetResult<T>> {
    match method {
        Method::Bcirc => tfrechet_bcirc(a, c, f, options),
        Method::Dft => tfrechet_dft(a, c, f),
        Method::LowRank => {
            check_pair(a, c)?;
            let factors = lowrank_factorize(c, options.factor_tol)?;
            tfrechet_lowrank(a, &factors, f, options.max_d, options.tol)
        }
        Method::FdOracle => gateaux_fd_oracle(a, c, f, options.fd_step),
    }
}
