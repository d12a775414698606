//! Symbolic descriptions of scalar functions `f`, with derivative and
//! conjugate-function access.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::ComplexField;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

pub type ScalarCallable<T> = Arc<dyn Fn(Complex<T>) -> Complex<T> + Send + Sync>;

/// A user supplied function evaluated through an eigendecomposition.
#[derive(Clone)]
pub struct CustomFunction<T: Real> {
    pub name: String,
    pub value: ScalarCallable<T>,
    pub derivative: Option<ScalarCallable<T>>,
}

#[derive(Clone)]
pub enum ScalarFunction<T: Real> {
    Exp,
    Sqrt,
    InvSqrt,
    Inv,
    Log,
    /// Coefficients in ascending powers.
    Polynomial(Vec<Complex<T>>),
    Custom(CustomFunction<T>),
    Scaled(Complex<T>, Box<ScalarFunction<T>>),
    Sum(Box<ScalarFunction<T>>, Box<ScalarFunction<T>>),
    Product(Box<ScalarFunction<T>>, Box<ScalarFunction<T>>),
    /// `outer ∘ inner`.
    Compose { outer: Box<ScalarFunction<T>>, inner: Box<ScalarFunction<T>> },
}

impl<T: Real> ScalarFunction<T> {
    pub fn polynomial(coefficients: Vec<Complex<T>>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidArgument("polynomial needs at least one coefficient".into()));
        }
        Ok(Self::Polynomial(coefficients))
    }

    pub fn real_polynomial(coefficients: &[f64]) -> Result<Self> {
        Self::polynomial(coefficients.iter().map(|&c| Complex::new(T::lit(c), T::zero())).collect())
    }

    /// `f(z) = z`.
    pub fn identity() -> Self {
        Self::Polynomial(vec![Complex::new(T::zero(), T::zero()), Complex::new(T::one(), T::zero())])
    }

    /// `f(z) = z²`.
    pub fn square() -> Self {
        let (zero, one) = (Complex::new(T::zero(), T::zero()), Complex::new(T::one(), T::zero()));
        Self::Polynomial(vec![zero, zero, one])
    }

    pub fn custom(
        name: impl Into<String>,
        value: impl Fn(Complex<T>) -> Complex<T> + Send + Sync + 'static,
        derivative: Option<ScalarCallable<T>>,
    ) -> Self {
        Self::Custom(CustomFunction { name: name.into(), value: Arc::new(value), derivative })
    }

    pub fn scaled(self, alpha: Complex<T>) -> Self {
        Self::Scaled(alpha, Box::new(self))
    }

    pub fn plus(self, other: Self) -> Self {
        Self::Sum(Box::new(self), Box::new(other))
    }

    pub fn times(self, other: Self) -> Self {
        Self::Product(Box::new(self), Box::new(other))
    }

    /// `self ∘ inner`.
    pub fn compose(self, inner: Self) -> Self {
        Self::Compose { outer: Box::new(self), inner: Box::new(inner) }
    }

    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        let one = Complex::new(T::one(), T::zero());
        match self {
            Self::Exp => ComplexField::exp(z),
            Self::Sqrt => ComplexField::sqrt(z),
            Self::InvSqrt => one / ComplexField::sqrt(z),
            Self::Inv => one / z,
            Self::Log => ComplexField::ln(z),
            Self::Polynomial(c) => c.iter().rev().fold(Complex::new(T::zero(), T::zero()), |acc, &ck| acc * z + ck),
            Self::Custom(c) => (c.value)(z),
            Self::Scaled(alpha, g) => *alpha * g.eval(z),
            Self::Sum(g, h) => g.eval(z) + h.eval(z),
            Self::Product(g, h) => g.eval(z) * h.eval(z),
            Self::Compose { outer, inner } => outer.eval(inner.eval(z)),
        }
    }

    /// `f′`, assembled symbolically.
    pub fn derivative(&self) -> Result<Self> {
        let half = Complex::new(T::lit(0.5), T::zero());
        let minus = |x: f64| Complex::new(T::lit(-x), T::zero());
        Ok(match self {
            Self::Exp => Self::Exp,
            Self::Sqrt => Self::InvSqrt.scaled(half),
            Self::InvSqrt => Self::Inv.times(Self::InvSqrt).scaled(minus(0.5)),
            Self::Inv => Self::Inv.times(Self::Inv).scaled(minus(1.0)),
            Self::Log => Self::Inv,
            Self::Polynomial(c) => {
                let d: Vec<Complex<T>> =
                    c.iter().enumerate().skip(1).map(|(k, &ck)| ck * T::lit(k as f64)).collect();
                if d.is_empty() { Self::Polynomial(vec![Complex::new(T::zero(), T::zero())]) } else { Self::Polynomial(d) }
            }
            Self::Custom(c) => {
                let d = c.derivative.clone().ok_or_else(|| Error::NoDerivative(c.name.clone()))?;
                Self::Custom(CustomFunction { name: format!("{}'", c.name), value: d, derivative: None })
            }
            Self::Scaled(alpha, g) => g.derivative()?.scaled(*alpha),
            Self::Sum(g, h) => g.derivative()?.plus(h.derivative()?),
            Self::Product(g, h) => {
                let left = g.derivative()?.times((**h).clone());
                let right = (**g).clone().times(h.derivative()?);
                left.plus(right)
            }
            Self::Compose { outer, inner } => {
                outer.derivative()?.compose((**inner).clone()).times(inner.derivative()?)
            }
        })
    }

    /// `f̄(z) = conj(f(conj(z)))`. Functions with real power series (and
    /// the principal branches of sqrt and log) are their own conjugates.
    pub fn conj(&self) -> Self {
        match self {
            Self::Exp | Self::Sqrt | Self::InvSqrt | Self::Inv | Self::Log => self.clone(),
            Self::Polynomial(c) => Self::Polynomial(c.iter().map(|z| z.conj()).collect()),
            Self::Custom(c) => {
                let f = c.value.clone();
                let value: ScalarCallable<T> = Arc::new(move |z: Complex<T>| f(z.conj()).conj());
                let derivative = c.derivative.clone().map(|d| -> ScalarCallable<T> {
                    Arc::new(move |z: Complex<T>| d(z.conj()).conj())
                });
                Self::Custom(CustomFunction { name: format!("conj({})", c.name), value, derivative })
            }
            Self::Scaled(alpha, g) => g.conj().scaled(alpha.conj()),
            Self::Sum(g, h) => g.conj().plus(h.conj()),
            Self::Product(g, h) => g.conj().times(h.conj()),
            Self::Compose { outer, inner } => outer.conj().compose(inner.conj()),
        }
    }

    /// True when `f` of a block upper triangular matrix can be evaluated
    /// directly, without an eigendecomposition.
    pub fn is_structural(&self) -> bool {
        match self {
            Self::Exp | Self::Inv | Self::Polynomial(_) => true,
            Self::Sqrt | Self::InvSqrt | Self::Log | Self::Custom(_) => false,
            Self::Scaled(_, g) => g.is_structural(),
            Self::Sum(g, h) | Self::Product(g, h) => g.is_structural() && h.is_structural(),
            Self::Compose { outer, inner } => outer.is_structural() && inner.is_structural(),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Exp => "exp".into(),
            Self::Sqrt => "sqrt".into(),
            Self::InvSqrt => "invsqrt".into(),
            Self::Inv => "inv".into(),
            Self::Log => "log".into(),
            Self::Polynomial(c) => {
                let parts: Vec<String> = c.iter().map(|z| fmt_complex(*z)).collect();
                format!("poly:{}", parts.join(","))
            }
            Self::Custom(c) => c.name.clone(),
            Self::Scaled(alpha, g) => format!("{}*{}", fmt_complex(*alpha), g.name()),
            Self::Sum(g, h) => format!("({}+{})", g.name(), h.name()),
            Self::Product(g, h) => format!("({}*{})", g.name(), h.name()),
            Self::Compose { outer, inner } => format!("{}({})", outer.name(), inner.name()),
        }
    }
}

fn fmt_complex<T: Real>(z: Complex<T>) -> String {
    let (re, im) = (z.re.to_f64_lossy(), z.im.to_f64_lossy());
    if im == 0.0 { format!("{re}") } else { format!("{re}{im:+}i") }
}

impl<T: Real> fmt::Debug for ScalarFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl<T: Real> fmt::Display for ScalarFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Parses `exp`, `sqrt`, `invsqrt`, `inv`, `log` or `poly:c0,c1,...`
/// (real coefficients, ascending powers).
impl<T: Real> FromStr for ScalarFunction<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "exp" => Ok(Self::Exp),
            "sqrt" => Ok(Self::Sqrt),
            "invsqrt" => Ok(Self::InvSqrt),
            "inv" => Ok(Self::Inv),
            "log" => Ok(Self::Log),
            other => {
                let coeffs = other
                    .strip_prefix("poly:")
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown function '{other}'")))?;
                let values = coeffs
                    .split(',')
                    .map(|c| c.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| Error::InvalidArgument(format!("bad polynomial coefficient in '{other}': {e}")))?;
                Self::real_polynomial(&values)
            }
        }
    }
}
