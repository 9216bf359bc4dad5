//! Projection estimators of the copula density and the copula.

use crate::coefficients::{estimate_coefficients, CoefficientTensor, DegreeVector};
use crate::error::{check_unit, Error, Result};
use crate::grid::{Grid, GridValues};
use crate::legendre::{fill_antiderivative, fill_basis};
use crate::pseudo::PseudoSample;

/// Multiplies a tensor of shape `widths` by one matrix per axis.
///
/// `mats[j]` is row-major with shape `out_sizes[j] x widths[j]`; the result
/// has shape `out_sizes`.
pub(crate) fn contract(
    values: &[f64],
    widths: &[usize],
    mats: &[Vec<f64>],
    out_sizes: &[usize],
) -> Vec<f64> {
    let d = widths.len();
    let mut shape = widths.to_vec();
    let mut current = values.to_vec();
    for j in (0..d).rev() {
        let outer: usize = shape[..j].iter().product();
        let inner: usize = shape[j + 1..].iter().product();
        let (mid, rows) = (shape[j], out_sizes[j]);
        let mat = &mats[j];
        let mut next = vec![0.0; outer * rows * inner];
        for o in 0..outer {
            for g in 0..rows {
                let mrow = &mat[g * mid..(g + 1) * mid];
                let dst = &mut next[(o * rows + g) * inner..(o * rows + g + 1) * inner];
                for (m, &coef) in mrow.iter().enumerate() {
                    if coef == 0.0 {
                        continue;
                    }
                    let src = &current[(o * mid + m) * inner..(o * mid + m + 1) * inner];
                    for (dv, sv) in dst.iter_mut().zip(src) {
                        *dv += coef * sv;
                    }
                }
            }
        }
        shape[j] = rows;
        current = next;
    }
    current
}

/// Basis (or antiderivative) matrices for every grid axis.
fn axis_matrices(axes: &[Vec<f64>], widths: &[usize], antiderivative: bool) -> Vec<Vec<f64>> {
    axes.iter()
        .zip(widths)
        .map(|(axis, &w)| {
            let mut mat = vec![0.0; axis.len() * w];
            for (row, &x) in mat.chunks_exact_mut(w).zip(axis) {
                if antiderivative {
                    fill_antiderivative(x, row);
                } else {
                    fill_basis(x, row);
                }
            }
            mat
        })
        .collect()
}

/// The truncated series `c^[N]` and its integral `C^[N]` for a fixed
/// coefficient tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedEstimator {
    coefficients: CoefficientTensor,
}

impl FittedEstimator {
    pub fn new(coefficients: CoefficientTensor) -> Self {
        FittedEstimator { coefficients }
    }

    /// Estimates the coefficients from ranks and wraps them.
    pub fn fit(pseudo: &PseudoSample, degree: &DegreeVector) -> Result<Self> {
        Ok(FittedEstimator::new(estimate_coefficients(pseudo, degree)?))
    }

    pub fn coefficients(&self) -> &CoefficientTensor {
        &self.coefficients
    }

    pub fn dim(&self) -> usize {
        self.coefficients.dim()
    }

    pub fn degree(&self) -> &DegreeVector {
        self.coefficients.degree()
    }

    fn check_point(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: u.len(),
            });
        }
        u.iter().try_for_each(|&x| check_unit(x))
    }

    fn check_grid(&self, grid: &Grid) -> Result<()> {
        if grid.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: grid.dim(),
            });
        }
        Ok(())
    }

    fn evaluate(&self, axes: &[Vec<f64>], antiderivative: bool) -> Vec<f64> {
        let widths = self.degree().widths();
        let mats = axis_matrices(axes, &widths, antiderivative);
        let sizes: Vec<usize> = axes.iter().map(Vec::len).collect();
        contract(self.coefficients.values(), &widths, &mats, &sizes)
    }

    /// `sum_{m <= N} rho_m prod_j Q_{m_j}(u_j)`. Negative values are returned
    /// as they are.
    pub fn density_at(&self, u: &[f64]) -> Result<f64> {
        self.check_point(u)?;
        let axes: Vec<Vec<f64>> = u.iter().map(|&x| vec![x]).collect();
        Ok(self.evaluate(&axes, false)[0])
    }

    /// `sum_{m <= N} rho_m prod_j int_0^{u_j} Q_{m_j}`.
    pub fn copula_at(&self, u: &[f64]) -> Result<f64> {
        self.check_point(u)?;
        let axes: Vec<Vec<f64>> = u.iter().map(|&x| vec![x]).collect();
        Ok(self.evaluate(&axes, true)[0])
    }

    pub fn density_grid(&self, grid: &Grid) -> Result<GridValues> {
        self.check_grid(grid)?;
        GridValues::new(grid.shape(), self.evaluate(grid.axes(), false))
    }

    pub fn copula_grid(&self, grid: &Grid) -> Result<GridValues> {
        self.check_grid(grid)?;
        GridValues::new(grid.shape(), self.evaluate(grid.axes(), true))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tensor_with_rho11(rho: f64) -> FittedEstimator {
        let deg = DegreeVector::uniform(1, 2).unwrap();
        let t =
            CoefficientTensor::from_fn(deg, |m| if m.components() == [1, 1] { rho } else { 0.0 });
        FittedEstimator::new(t)
    }

    fn degree_zero(d: usize) -> FittedEstimator {
        FittedEstimator::new(CoefficientTensor::from_fn(
            DegreeVector::uniform(0, d).unwrap(),
            |_| 0.0,
        ))
    }

    #[test]
    fn density_examples() {
        let fit = degree_zero(2);
        assert_eq!(fit.density_at(&[0.3, 0.9]).unwrap(), 1.0);
        let fit = tensor_with_rho11(0.5);
        assert!((fit.density_at(&[0.5, 0.5]).unwrap() - 1.0).abs() < 1e-15);
        assert!((fit.density_at(&[1.0, 1.0]).unwrap() - 2.5).abs() < 1e-14);
    }

    #[test]
    fn copula_examples() {
        let fit = tensor_with_rho11(0.4);
        assert_eq!(fit.copula_at(&[0.0, 0.7]).unwrap(), 0.0);
        assert!((fit.copula_at(&[1.0, 0.37]).unwrap() - 0.37).abs() < 1e-15);
        assert!((degree_zero(2).copula_at(&[0.3, 0.4]).unwrap() - 0.12).abs() < 1e-16);
    }

    #[test]
    fn point_errors() {
        let fit = degree_zero(2);
        assert!(matches!(
            fit.density_at(&[0.5]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            fit.copula_at(&[0.5, -0.1]),
            Err(Error::Domain { .. })
        ));
        let g = Grid::regular(4, 3).unwrap();
        assert!(fit.density_grid(&g).is_err());
    }

    #[test]
    fn grids_agree_with_points() {
        let deg = DegreeVector::new(vec![3, 2]).unwrap();
        let fit = FittedEstimator::new(CoefficientTensor::from_fn(deg, |m| {
            let c = m.components();
            0.1 * c[0] as f64 - 0.07 * c[1] as f64
        }));
        let g = Grid::regular(4, 2).unwrap();
        let dens = fit.density_grid(&g).unwrap();
        let cop = fit.copula_grid(&g).unwrap();
        assert_eq!(dens.len(), 9);
        for (k, p) in g.nodes().enumerate() {
            assert!((dens.values()[k] - fit.density_at(&p).unwrap()).abs() <= 1e-14);
            assert!((cop.values()[k] - fit.copula_at(&p).unwrap()).abs() <= 1e-14);
        }
    }

    #[test]
    fn degree_zero_grids() {
        let fit = degree_zero(2);
        let g = Grid::regular(4, 2).unwrap();
        assert!(fit
            .density_grid(&g)
            .unwrap()
            .values()
            .iter()
            .all(|&v| v == 1.0));
        let cop = fit.copula_grid(&g).unwrap();
        let center = g.nodes().position(|p| p == [0.5, 0.5]).unwrap();
        assert_eq!(cop.values()[center], 0.25);
        let g = Grid::from_axes(vec![vec![0.25, 0.5, 0.75], vec![1.0]], 4).unwrap();
        let fit = tensor_with_rho11(0.3);
        let cop = fit.copula_grid(&g).unwrap();
        for (v, j) in cop.values().iter().zip([0.25, 0.5, 0.75]) {
            assert!((v - j).abs() < 1e-15);
        }
    }
}
