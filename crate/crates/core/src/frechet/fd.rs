use super::{check_pair, FrechetResult, Method};
use crate::error::Result;
use crate::matfun::ScalarFunction;
use crate::scalar::Real;
use crate::tensor::Tensor3;
use crate::tfun::t_function;

/// `h = 1e-5 ‖𝒜‖_F / ‖𝒞‖_F` (or `1e-5` when either norm vanishes).
pub fn default_fd_step<T: Real>(a: &Tensor3<T>, c: &Tensor3<T>) -> f64 {
    let (na, nc) = (a.frobenius_norm().to_f64_lossy(), c.frobenius_norm().to_f64_lossy());
    if na > 0.0 && nc > 0.0 { 1e-5 * na / nc } else { 1e-5 }
}

/// Central difference `(f(𝒜 + h𝒞) − f(𝒜 − h𝒞)) / 2h`.
pub fn gateaux_fd_oracle<T: Real>(
    a: &Tensor3<T>,
    c: &Tensor3<T>,
    f: &ScalarFunction<T>,
    h: Option<f64>,
) -> Result<FrechetResult<T>> {
    check_pair(a, c)?;
    let h = h.unwrap_or_else(|| default_fd_step(a, c));
    let step = c.scale_real(T::lit(h));
    let plus = t_function(&a.try_add(&step)?, f)?;
    let minus = t_function(&a.try_sub(&step)?, f)?;
    let value = plus.try_sub(&minus)?.scale_real(T::lit(0.5 / h));
    Ok(FrechetResult::direct(value, Method::FdOracle, 2))
}
