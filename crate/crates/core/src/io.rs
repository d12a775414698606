//! `.t3json` tensor files and JSON matrix dumps.
//!
//! A tensor file is `{"n", "m", "p", "real": [...], "imag": [...]}` with
//! entries in unfolding column-major order; `imag` may be omitted for real
//! tensors. Matrices use `{"rows", "cols", "real", "imag"}`, column-major.

use std::fs;
use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{CMatrix, Real};
use crate::tensor::Tensor3;

#[derive(Debug, Serialize, Deserialize)]
struct TensorFile {
    n: usize,
    m: usize,
    p: usize,
    real: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    imag: Option<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct MatrixFile {
    rows: usize,
    cols: usize,
    real: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    imag: Option<Vec<f64>>,
}

fn split<T: Real>(values: &[Complex<T>]) -> (Vec<f64>, Option<Vec<f64>>) {
    let real = values.iter().map(|z| z.re.to_f64_lossy()).collect();
    let imag: Vec<f64> = values.iter().map(|z| z.im.to_f64_lossy()).collect();
    let any_imag = imag.iter().any(|&x| x != 0.0);
    (real, any_imag.then_some(imag))
}

fn join<T: Real>(real: &[f64], imag: Option<&[f64]>, expected: usize) -> Result<Vec<Complex<T>>> {
    if real.len() != expected {
        return Err(Error::Format(format!("expected {expected} real entries, found {}", real.len())));
    }
    if let Some(im) = imag {
        if im.len() != expected {
            return Err(Error::Format(format!("expected {expected} imaginary entries, found {}", im.len())));
        }
    }
    Ok(real
        .iter()
        .enumerate()
        .map(|(i, &re)| Complex::new(T::lit(re), T::lit(imag.map_or(0.0, |im| im[i]))))
        .collect())
}

pub fn tensor_to_json<T: Real>(t: &Tensor3<T>) -> Result<String> {
    let (n, m, p) = t.dims();
    let (real, imag) = split(&t.vec());
    Ok(serde_json::to_string(&TensorFile { n, m, p, real, imag })?)
}

pub fn tensor_from_json<T: Real>(text: &str) -> Result<Tensor3<T>> {
    let file: TensorFile = serde_json::from_str(text)?;
    let values = join(&file.real, file.imag.as_deref(), file.n * file.m * file.p)?;
    Tensor3::unvec(&values, file.n, file.m, file.p)
}

pub fn write_tensor<T: Real>(path: impl AsRef<Path>, t: &Tensor3<T>) -> Result<()> {
    fs::write(path, tensor_to_json(t)?)?;
    Ok(())
}

pub fn read_tensor<T: Real>(path: impl AsRef<Path>) -> Result<Tensor3<T>> {
    tensor_from_json(&fs::read_to_string(path)?)
}

pub fn matrix_to_json<T: Real>(a: &CMatrix<T>) -> Result<String> {
    let (real, imag) = split(a.as_slice());
    Ok(serde_json::to_string(&MatrixFile { rows: a.nrows(), cols: a.ncols(), real, imag })?)
}

pub fn matrix_from_json<T: Real>(text: &str) -> Result<CMatrix<T>> {
    let file: MatrixFile = serde_json::from_str(text)?;
    let values = join(&file.real, file.imag.as_deref(), file.rows * file.cols)?;
    Ok(CMatrix::from_column_slice(file.rows, file.cols, &values))
}

pub fn write_matrix<T: Real>(path: impl AsRef<Path>, a: &CMatrix<T>) -> Result<()> {
    fs::write(path, matrix_to_json(a)?)?;
    Ok(())
}
