//! Parametric reference copulas: sampling, distribution function and density.
//!
//! Bivariate Archimedean samples come from conditional inversion and
//! trivariate ones from the Marshall–Olkin frailty construction. Elliptical
//! samples use the Cholesky factor of an equicorrelation matrix.

mod archimedean;
mod elliptical;
pub(crate) mod special;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardUniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_unit, Error, Result};
use crate::grid::{Grid, GridValues};
use crate::pseudo::Sample;
use archimedean::{Archimedean, Kind};
use elliptical::Elliptical;

/// Degrees of freedom used for the Student family unless overridden.
pub const DEFAULT_DOF: u32 = 17;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Clayton,
    Frank,
    Gaussian,
    Gumbel,
    Independence,
    Joe,
    Student,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::Clayton,
        Family::Frank,
        Family::Gaussian,
        Family::Gumbel,
        Family::Independence,
        Family::Joe,
        Family::Student,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Clayton => "clayton",
            Family::Frank => "frank",
            Family::Gaussian => "gaussian",
            Family::Gumbel => "gumbel",
            Family::Independence => "independence",
            Family::Joe => "joe",
            Family::Student => "student",
        }
    }

    fn archimedean_kind(self) -> Option<Kind> {
        match self {
            Family::Clayton => Some(Kind::Clayton),
            Family::Frank => Some(Kind::Frank),
            Family::Gumbel => Some(Kind::Gumbel),
            Family::Joe => Some(Kind::Joe),
            _ => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "clayton" => Ok(Family::Clayton),
            "frank" => Ok(Family::Frank),
            "gaussian" | "normal" => Ok(Family::Gaussian),
            "gumbel" => Ok(Family::Gumbel),
            "independence" | "independent" | "product" => Ok(Family::Independence),
            "joe" => Ok(Family::Joe),
            "student" | "student_t" | "student-t" | "t" => Ok(Family::Student),
            other => Err(Error::InvalidParameter(format!("unknown family `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Inner {
    Independence,
    Archimedean(Archimedean),
    Elliptical(Elliptical),
}

/// A parametric copula in dimension 2 or 3.
#[derive(Debug, Clone, Copy)]
pub struct CopulaModel {
    family: Family,
    parameter: f64,
    dim: usize,
    dof: u32,
    inner: Inner,
}

impl CopulaModel {
    /// `parameter` is θ for Archimedean families, ρ for elliptical ones and
    /// ignored for independence.
    pub fn new(family: Family, parameter: f64, dim: usize) -> Result<Self> {
        Self::with_dof(family, parameter, dim, DEFAULT_DOF)
    }

    pub fn with_dof(family: Family, parameter: f64, dim: usize, dof: u32) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::Unsupported(format!(
                "reference copulas are available in dimension 2 or 3, got {dim}"
            )));
        }
        let inner = match family {
            Family::Independence => Inner::Independence,
            Family::Gaussian => Inner::Elliptical(Elliptical {
                rho: parameter,
                dof: None,
            }),
            Family::Student => {
                if dof == 0 {
                    return Err(Error::InvalidParameter(
                        "degrees of freedom must be positive".into(),
                    ));
                }
                Inner::Elliptical(Elliptical {
                    rho: parameter,
                    dof: Some(dof as f64),
                })
            }
            _ => Inner::Archimedean(Archimedean {
                kind: family.archimedean_kind().expect("archimedean family"),
                theta: parameter,
            }),
        };
        match &inner {
            Inner::Independence => {}
            Inner::Archimedean(a) => a.validate(dim)?,
            Inner::Elliptical(e) => e.validate(dim)?,
        }
        let parameter = if family == Family::Independence {
            0.0
        } else {
            parameter
        };
        Ok(CopulaModel {
            family,
            parameter,
            dim,
            dof,
            inner,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn parameter(&self) -> f64 {
        self.parameter
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dof(&self) -> u32 {
        self.dof
    }

    /// Population Kendall's τ of any bivariate margin.
    pub fn kendall_tau(&self) -> f64 {
        match &self.inner {
            Inner::Independence => 0.0,
            Inner::Archimedean(a) => a.kendall_tau(),
            Inner::Elliptical(e) => 2.0 * e.rho.asin() / std::f64::consts::PI,
        }
    }

    fn check_point(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: u.len(),
            });
        }
        u.iter().try_for_each(|&x| check_unit(x))
    }

    /// `n` i.i.d. draws, reproducible from `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Sample> {
        if n == 0 {
            return Err(Error::SampleTooSmall { min: 1, got: 0 });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = Vec::with_capacity(n * self.dim);
        for _ in 0..n {
            match &self.inner {
                Inner::Independence => {
                    for _ in 0..self.dim {
                        data.push(StandardUniform.sample(&mut rng));
                    }
                }
                Inner::Archimedean(a) => a.sample(&mut rng, self.dim, &mut data),
                Inner::Elliptical(e) => e.sample(&mut rng, self.dim, &mut data),
            }
        }
        Sample::new(n, self.dim, data)
    }

    pub fn cdf(&self, u: &[f64]) -> Result<f64> {
        self.check_point(u)?;
        let v = match &self.inner {
            Inner::Independence => u.iter().product(),
            Inner::Archimedean(a) => a.cdf(u),
            Inner::Elliptical(e) => e.cdf(u),
        };
        Ok(v.clamp(0.0, 1.0))
    }

    /// Density at an interior point.
    pub fn density(&self, u: &[f64]) -> Result<f64> {
        self.check_point(u)?;
        if let Some(&x) = u.iter().find(|&&x| x <= 0.0 || x >= 1.0) {
            return Err(Error::Domain { value: x });
        }
        Ok(match &self.inner {
            Inner::Independence => 1.0,
            Inner::Archimedean(a) => a.density(u),
            Inner::Elliptical(e) => e.density(u),
        })
    }

    /// Distribution function on every grid node, evaluated in parallel.
    pub fn cdf_grid(&self, grid: &Grid) -> Result<GridValues> {
        self.on_grid(grid, |u| self.cdf(u))
    }

    pub fn density_grid(&self, grid: &Grid) -> Result<GridValues> {
        self.on_grid(grid, |u| self.density(u))
    }

    fn on_grid<F>(&self, grid: &Grid, f: F) -> Result<GridValues>
    where
        F: Fn(&[f64]) -> Result<f64> + Sync,
    {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|k| f(&grid.node(k)))
            .collect::<Result<Vec<f64>>>()?;
        GridValues::new(grid.shape(), values)
    }
}

/// Model whose bivariate margins have Kendall's τ equal to `tau`.
pub fn from_kendall_tau(family: Family, tau: f64, dim: usize) -> Result<CopulaModel> {
    from_kendall_tau_with_dof(family, tau, dim, DEFAULT_DOF)
}

pub fn from_kendall_tau_with_dof(
    family: Family,
    tau: f64,
    dim: usize,
    dof: u32,
) -> Result<CopulaModel> {
    if !(tau > -1.0 && tau < 1.0) {
        return Err(Error::Domain { value: tau });
    }
    let parameter = match family {
        Family::Independence => {
            if tau != 0.0 {
                return Err(Error::Domain { value: tau });
            }
            0.0
        }
        Family::Gaussian | Family::Student => {
            if tau == 0.0 {
                return Err(Error::Domain { value: tau });
            }
            (std::f64::consts::FRAC_PI_2 * tau).sin()
        }
        _ => archimedean::theta_from_tau(family.archimedean_kind().expect("archimedean"), tau)?,
    };
    CopulaModel::with_dof(family, parameter, dim, dof)
}

/// Sample Kendall's τ between two columns (τ-a, quadratic time).
pub fn sample_kendall_tau(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::SampleTooSmall { min: 2, got: n });
    }
    let score: i64 = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut s = 0i64;
            for j in i + 1..n {
                let p = (x[i] - x[j]) * (y[i] - y[j]);
                s += (p > 0.0) as i64 - (p < 0.0) as i64;
            }
            s
        })
        .sum();
    Ok(score as f64 / (n * (n - 1) / 2) as f64)
}
