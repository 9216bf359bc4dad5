//! Orthonormal shifted Legendre polynomials on `[0, 1]`.
//!
//! `Q_m(x) = sqrt(2m + 1) L_m(2x - 1)` where `L_m` is the classical Legendre
//! polynomial, evaluated with the three-term recurrence in `t = 2x - 1`.

use crate::coefficients::MultiIndex;
use crate::error::{check_unit, Error, Result};

/// Largest polynomial degree accepted anywhere in the crate.
pub const MAX_DEGREE: usize = 64;

pub(crate) fn check_degree(degree: usize) -> Result<()> {
    if degree > MAX_DEGREE {
        Err(Error::DegreeTooLarge {
            degree,
            max: MAX_DEGREE,
        })
    } else {
        Ok(())
    }
}

/// Classical Legendre values `L_0(t), ..., L_{max_degree}(t)` written into `out`.
pub(crate) fn fill_legendre(t: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() == 1 {
        return;
    }
    out[1] = t;
    for m in 1..out.len() - 1 {
        let mf = m as f64;
        out[m + 1] = ((2.0 * mf + 1.0) * t * out[m] - mf * out[m - 1]) / (mf + 1.0);
    }
}

/// Writes `Q_0(x), ..., Q_{out.len()-1}(x)` into `out`. No domain check.
pub(crate) fn fill_basis(x: f64, out: &mut [f64]) {
    fill_legendre(2.0 * x - 1.0, out);
    for (m, v) in out.iter_mut().enumerate().skip(1) {
        *v *= ((2 * m + 1) as f64).sqrt();
    }
}

/// Writes `int_0^u Q_m` for `m = 0..out.len()` into `out`. No domain check.
pub(crate) fn fill_antiderivative(u: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    let mut legendre = vec![0.0; out.len() + 1];
    fill_legendre(2.0 * u - 1.0, &mut legendre);
    out[0] = u;
    for m in 1..out.len() {
        out[m] = (legendre[m + 1] - legendre[m - 1]) / (2.0 * ((2 * m + 1) as f64).sqrt());
    }
}

/// `Q_m(x)` for a single degree.
pub fn eval_shifted_legendre(m: usize, x: f64) -> Result<f64> {
    check_degree(m)?;
    check_unit(x)?;
    let mut row = vec![0.0; m + 1];
    fill_basis(x, &mut row);
    Ok(row[m])
}

/// All basis values up to a maximum degree at one abscissa.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisValueRow {
    max_degree: usize,
    values: Vec<f64>,
}

impl BasisValueRow {
    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, m: usize) -> Option<f64> {
        self.values.get(m).copied()
    }
}

/// `Q_0(x), ..., Q_{max_degree}(x)` in one recurrence pass.
pub fn eval_basis_row(max_degree: usize, x: f64) -> Result<BasisValueRow> {
    check_degree(max_degree)?;
    check_unit(x)?;
    let mut values = vec![0.0; max_degree + 1];
    fill_basis(x, &mut values);
    Ok(BasisValueRow { max_degree, values })
}

/// `int_0^u Q_m(x) dx`, using `(2m+1) L_m = (L_{m+1} - L_{m-1})'` for `m >= 1`.
pub fn antiderivative(m: usize, u: f64) -> Result<f64> {
    check_degree(m)?;
    check_unit(u)?;
    let mut row = vec![0.0; m + 1];
    fill_antiderivative(u, &mut row);
    Ok(row[m])
}

/// Antiderivatives `int_0^u Q_m` for every `m <= max_degree`.
pub fn antiderivative_row(max_degree: usize, u: f64) -> Result<Vec<f64>> {
    check_degree(max_degree)?;
    check_unit(u)?;
    let mut row = vec![0.0; max_degree + 1];
    fill_antiderivative(u, &mut row);
    Ok(row)
}

/// Tensor-product basis function `prod_j Q_{m_j}(x_j)`.
pub fn tensor_eval(indices: &MultiIndex, point: &[f64]) -> Result<f64> {
    if indices.dim() != point.len() {
        return Err(Error::DimensionMismatch {
            expected: indices.dim(),
            got: point.len(),
        });
    }
    let mut product = 1.0;
    for (&m, &x) in indices.components().iter().zip(point) {
        product *= eval_shifted_legendre(m, x)?;
    }
    Ok(product)
}
