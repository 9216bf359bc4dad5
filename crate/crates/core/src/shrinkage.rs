//! Tilted estimation for copula densities that are not square integrable.
//!
//! The density is multiplied by a known factor `s(theta, u) <= 1` that tames
//! its boundary singularities, the product is expanded in the Legendre basis,
//! and the fitted series is divided by `s` again.

use serde::{Deserialize, Serialize};

use crate::coefficients::{sample_means, CoefficientTensor, DegreeVector};
use crate::error::{Error, Result};
use crate::estimator::FittedEstimator;
use crate::grid::{Grid, GridValues};
use crate::legendre::check_degree;
use crate::pseudo::PseudoSample;

pub const DEFAULT_THETA: f64 = 0.001;
pub const DEFAULT_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShrinkageKind {
    /// `exp(-sum theta_j / u_j)`
    ExponentialTilt,
    /// `prod u_j^theta_j`
    Power,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShrinkageSpec {
    kind: ShrinkageKind,
    thetas: Vec<f64>,
    epsilon_clamp: f64,
}

impl ShrinkageSpec {
    pub fn new(kind: ShrinkageKind, thetas: Vec<f64>, epsilon_clamp: f64) -> Result<Self> {
        if thetas.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one theta is required".into(),
            ));
        }
        if let Some(&t) = thetas.iter().find(|&&t| !(t > 0.0 && t.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "theta must be positive, got {t}"
            )));
        }
        if !(epsilon_clamp > 0.0 && epsilon_clamp < 0.1) {
            return Err(Error::InvalidParameter(format!(
                "clamp must lie in (0, 0.1), got {epsilon_clamp}"
            )));
        }
        Ok(ShrinkageSpec {
            kind,
            thetas,
            epsilon_clamp,
        })
    }

    pub fn exponential(thetas: Vec<f64>) -> Result<Self> {
        Self::new(ShrinkageKind::ExponentialTilt, thetas, DEFAULT_EPSILON)
    }

    pub fn power(thetas: Vec<f64>) -> Result<Self> {
        Self::new(ShrinkageKind::Power, thetas, DEFAULT_EPSILON)
    }

    pub fn kind(&self) -> ShrinkageKind {
        self.kind
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn epsilon_clamp(&self) -> f64 {
        self.epsilon_clamp
    }

    pub fn dim(&self) -> usize {
        self.thetas.len()
    }

    fn clamp(&self, x: f64) -> f64 {
        x.max(self.epsilon_clamp)
    }

    /// Factor of coordinate `j` at an already clamped value.
    fn component(&self, j: usize, x: f64) -> f64 {
        match self.kind {
            ShrinkageKind::ExponentialTilt => (-self.thetas[j] / x).exp(),
            ShrinkageKind::Power => x.powf(self.thetas[j]),
        }
    }

    fn check_point(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: u.len(),
            });
        }
        if let Some(&x) = u.iter().find(|&&x| !(0.0..=1.0).contains(&x)) {
            return Err(Error::Domain { value: x });
        }
        if u.iter().any(|&x| x < self.epsilon_clamp) {
            log::warn!(
                "coordinates of {u:?} below {} were clamped before dividing by the shrinkage factor",
                self.epsilon_clamp
            );
        }
        Ok(())
    }
}

/// `s(theta, u)` after raising coordinates below the clamp to the clamp.
pub fn shrink_factor(spec: &ShrinkageSpec, u: &[f64]) -> Result<f64> {
    spec.check_point(u)?;
    Ok(u.iter()
        .enumerate()
        .map(|(j, &x)| spec.component(j, spec.clamp(x)))
        .product())
}

/// Sample means of `prod_j s_j(U_ij) Q_{m_j}(U_ij)`. No structural rules are
/// applied: the tilted function is not a copula density.
pub fn estimate_coefficients_shrunk(
    pseudo: &PseudoSample,
    degree: &DegreeVector,
    spec: &ShrinkageSpec,
) -> Result<CoefficientTensor> {
    for expected in [degree.dim(), spec.dim()] {
        if pseudo.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: pseudo.dim(),
            });
        }
    }
    for &c in degree.components() {
        check_degree(c)?;
    }
    let values = sample_means(pseudo.as_slice(), pseudo.n(), degree, |j, x| {
        spec.component(j, spec.clamp(x))
    });
    CoefficientTensor::from_values(degree.clone(), values, pseudo.n())
}

/// The tilted series and the factor that undoes the tilt.
#[derive(Debug, Clone, PartialEq)]
pub struct ShrunkEstimator {
    series: FittedEstimator,
    spec: ShrinkageSpec,
}

impl ShrunkEstimator {
    pub fn fit(pseudo: &PseudoSample, degree: &DegreeVector, spec: &ShrinkageSpec) -> Result<Self> {
        let tensor = estimate_coefficients_shrunk(pseudo, degree, spec)?;
        Ok(ShrunkEstimator {
            series: FittedEstimator::new(tensor),
            spec: spec.clone(),
        })
    }

    pub fn coefficients(&self) -> &CoefficientTensor {
        self.series.coefficients()
    }

    pub fn spec(&self) -> &ShrinkageSpec {
        &self.spec
    }

    /// `s^-1(theta, u) sum rho_theta,m prod Q_{m_j}(u_j)`.
    pub fn density_at(&self, u: &[f64]) -> Result<f64> {
        let s = shrink_factor(&self.spec, u)?;
        Ok(self.series.density_at(u)? / s)
    }

    pub fn density_grid(&self, grid: &Grid) -> Result<GridValues> {
        if let Some(&x) = grid
            .axes()
            .iter()
            .flatten()
            .find(|&&x| x < self.spec.epsilon_clamp)
        {
            log::warn!("grid node {x} is below the shrinkage clamp");
        }
        let tilted = self.series.density_grid(grid)?;
        let values = grid
            .nodes()
            .zip(tilted.values())
            .map(|(u, v)| {
                let s: f64 = u
                    .iter()
                    .enumerate()
                    .map(|(j, &x)| self.spec.component(j, self.spec.clamp(x)))
                    .product();
                v / s
            })
            .collect();
        GridValues::new(grid.shape(), values)
    }
}

/// One-shot evaluation of the untilted density estimate at `u`.
pub fn density_at_shrunk(
    pseudo: &PseudoSample,
    degree: &DegreeVector,
    spec: &ShrinkageSpec,
    u: &[f64],
) -> Result<f64> {
    ShrunkEstimator::fit(pseudo, degree, spec)?.density_at(u)
}
