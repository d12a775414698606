//! Real scalar abstraction.
//!
//! Every routine in the crate is generic over a real floating point type `T`
//! and stores entries as `Complex<T>`. The trait bundles what nalgebra's
//! decompositions, rustfft and num-traits conversions need, plus a dense
//! complex GEMM hook so that f32 and f64 can dispatch to SIMD kernels.

use nalgebra::{DMatrix, RealField};
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Column-major dense complex matrix.
pub type CMatrix<T> = DMatrix<Complex<T>>;

pub trait Real: RealField + Copy + FftNum + ToPrimitive + Send + Sync + 'static {
    /// `a * b` for dense column-major complex matrices.
    fn gemm(a: &CMatrix<Self>, b: &CMatrix<Self>) -> CMatrix<Self>;

    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 literal representable")
    }

    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    fn machine_eps() -> Self {
        Self::default_epsilon()
    }
}

macro_rules! impl_real {
    ($t:ty, $kernel:ident, $pair:ty) => {
        impl Real for $t {
            fn gemm(a: &CMatrix<Self>, b: &CMatrix<Self>) -> CMatrix<Self> {
                assert_eq!(a.ncols(), b.nrows(), "gemm: inner dimension mismatch");
                let (m, k, n) = (a.nrows(), a.ncols(), b.ncols());
                let mut c = CMatrix::<Self>::zeros(m, n);
                if m == 0 || n == 0 || k == 0 {
                    return c;
                }
                // SAFETY: `Complex<T>` is `repr(C)` with layout `[re, im]`, which is
                // exactly the pair type matrixmultiply expects. All three buffers are
                // contiguous column-major with the strides given below.
                unsafe {
                    matrixmultiply::$kernel(
                        matrixmultiply::CGemmOption::Standard,
                        matrixmultiply::CGemmOption::Standard,
                        m,
                        k,
                        n,
                        [1.0, 0.0],
                        a.as_ptr() as *const $pair,
                        1,
                        m as isize,
                        b.as_ptr() as *const $pair,
                        1,
                        k as isize,
                        [0.0, 0.0],
                        c.as_mut_ptr() as *mut $pair,
                        1,
                        m as isize,
                    );
                }
                c
            }
        }
    };
}

impl_real!(f32, cgemm, [f32; 2]);
impl_real!(f64, zgemm, [f64; 2]);

/// Complex number with zero imaginary part.
pub fn cplx<T: Real>(re: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::zero())
}
