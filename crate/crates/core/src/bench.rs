//! Monte Carlo comparison of the Legendre estimators with the empirical and
//! Bernstein copulas.

use std::collections::BTreeMap;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::DegreeVector;
use crate::error::{Error, Result};
use crate::estimator::FittedEstimator;
use crate::fmt_f64;
use crate::grid::{Grid, GridValues};
use crate::lscv::{select_degree, LscvMode};
use crate::metrics::{bernstein_copula_grid, empirical_copula_grid, ErrorSet};
use crate::reference::{from_kendall_tau_with_dof, CopulaModel, Family, DEFAULT_DOF};
use crate::shrinkage::{ShrinkageSpec, ShrunkEstimator};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub families: Vec<Family>,
    pub taus: Vec<f64>,
    pub ns: Vec<usize>,
    pub reps: usize,
    /// `T` of the copula grid in dimension 2. Trivariate copula scenarios
    /// and all density scenarios use [`Grid::coarse`].
    pub grid_t: usize,
    pub dim: usize,
    pub seed: u64,
    pub max_degree: usize,
    /// Skip selection and use this degree in every replication.
    pub fixed_degree: Option<usize>,
    pub lscv_mode: LscvMode,
    pub dof: u32,
    pub bernstein_ks: Vec<usize>,
    pub copula: bool,
    pub density: bool,
    /// Exponential tilt for an extra shrunk density estimator.
    pub shrink_thetas: Option<Vec<f64>>,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            families: vec![Family::Frank],
            taus: vec![0.3],
            ns: vec![500],
            reps: 100,
            grid_t: 100,
            dim: 2,
            seed: 0,
            max_degree: 20,
            fixed_degree: None,
            lscv_mode: LscvMode::Literal,
            dof: DEFAULT_DOF,
            bernstein_ks: vec![10, 25],
            copula: true,
            density: false,
            shrink_thetas: None,
        }
    }
}

impl BenchmarkConfig {
    fn validate(&self) -> Result<()> {
        if self.families.is_empty() || self.taus.is_empty() || self.ns.is_empty() {
            return Err(Error::InvalidParameter(
                "families, taus and sample sizes must be non-empty".into(),
            ));
        }
        if self.reps == 0 {
            return Err(Error::InvalidParameter(
                "at least one replication is required".into(),
            ));
        }
        if let Some(&n) = self.ns.iter().find(|&&n| n < 3) {
            return Err(Error::SampleTooSmall { min: 3, got: n });
        }
        if !self.copula && !self.density {
            return Err(Error::InvalidParameter("nothing to benchmark".into()));
        }
        if let Some(t) = &self.shrink_thetas {
            ShrinkageSpec::exponential(t.clone())?;
            if t.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    got: t.len(),
                });
            }
        }
        Ok(())
    }

    /// Scenario list in report order. Independence ignores `taus` and
    /// appears once per sample size with `tau = 0`.
    fn scenarios(&self) -> Vec<(Family, f64, usize)> {
        let mut out = Vec::new();
        for &family in &self.families {
            let taus: &[f64] = if family == Family::Independence {
                &[0.0]
            } else {
                &self.taus
            };
            for &tau in taus {
                for &n in &self.ns {
                    out.push((family, tau, n));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub metric: String,
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    /// `CN`, `Emp`, `Berns<k>`, `cN` or `cN_shrunk`.
    pub estimator: String,
    pub metrics: Vec<MetricSummary>,
    /// Modal selected degree, for the Legendre estimators only.
    pub n_opt_mode: Option<usize>,
}

impl EstimatorSummary {
    pub fn metric(&self, name: &str) -> Option<&MetricSummary> {
        self.metrics.iter().find(|m| m.metric == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub family: Family,
    pub tau: f64,
    pub n: usize,
    pub reps: usize,
    /// Selected degree of every replication, in replication order.
    pub selected_degrees: Vec<usize>,
    pub estimators: Vec<EstimatorSummary>,
}

impl ScenarioReport {
    pub fn estimator(&self, name: &str) -> Option<&EstimatorSummary> {
        self.estimators.iter().find(|e| e.estimator == name)
    }

    /// Count of each selected degree.
    pub fn degree_histogram(&self) -> BTreeMap<usize, usize> {
        let mut h = BTreeMap::new();
        for &d in &self.selected_degrees {
            *h.entry(d).or_insert(0) += 1;
        }
        h
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub schema_version: u32,
    pub config: BenchmarkConfig,
    pub scenarios: Vec<ScenarioReport>,
}

impl ErrorReport {
    pub fn scenario(&self, family: Family, tau: f64, n: usize) -> Option<&ScenarioReport> {
        self.scenarios
            .iter()
            .find(|s| s.family == family && s.tau == tau && s.n == n)
    }

    /// Columns `family,tau,n,estimator,metric,mean,sd,n_opt_mode`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "family,tau,n,estimator,metric,mean,sd,n_opt_mode")?;
        for s in &self.scenarios {
            for e in &s.estimators {
                let mode = e.n_opt_mode.map(|m| m.to_string()).unwrap_or_default();
                for m in &e.metrics {
                    writeln!(
                        out,
                        "{},{},{},{},{},{},{},{}",
                        s.family,
                        s.tau,
                        s.n,
                        e.estimator,
                        m.metric,
                        fmt_f64(m.mean),
                        fmt_f64(m.sd),
                        mode
                    )?;
                }
            }
        }
        Ok(())
    }

    pub fn write_json<W: Write>(&self, out: W) -> io::Result<()> {
        serde_json::to_writer_pretty(out, self).map_err(io::Error::other)
    }
}

/// Smallest most frequent value.
fn mode(values: &[usize]) -> Option<usize> {
    let mut counts = BTreeMap::new();
    for &v in values {
        *counts.entry(v).or_insert(0usize) += 1;
    }
    let best = counts.values().copied().max()?;
    counts.into_iter().find(|&(_, c)| c == best).map(|(v, _)| v)
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, var.sqrt())
}

struct Truth {
    model: CopulaModel,
    copula: Option<(Grid, GridValues)>,
    density: Option<(Grid, GridValues)>,
}

struct Replication {
    degree: usize,
    errors: Vec<(String, ErrorSet)>,
}

fn replicate(cfg: &BenchmarkConfig, truth: &Truth, n: usize, seed: u64) -> Result<Replication> {
    let pseudo = truth.model.sample(n, seed)?.to_pseudo()?;
    let degree = match cfg.fixed_degree {
        Some(d) => d,
        None => select_degree(&pseudo, cfg.max_degree, cfg.lscv_mode)?.selected(),
    };
    let dv = DegreeVector::uniform(degree, cfg.dim)?;
    let fit = FittedEstimator::fit(&pseudo, &dv)?;
    let mut errors = Vec::new();
    if let Some((grid, c)) = &truth.copula {
        errors.push((
            "CN".to_string(),
            ErrorSet::compute(&fit.copula_grid(grid)?, c, grid)?,
        ));
        errors.push((
            "Emp".to_string(),
            ErrorSet::compute(&empirical_copula_grid(&pseudo, grid)?, c, grid)?,
        ));
        for &k in &cfg.bernstein_ks {
            let b = bernstein_copula_grid(&pseudo, grid, k)?;
            errors.push((format!("Berns{k}"), ErrorSet::compute(&b, c, grid)?));
        }
    }
    if let Some((grid, c)) = &truth.density {
        errors.push((
            "cN".to_string(),
            ErrorSet::compute(&fit.density_grid(grid)?, c, grid)?,
        ));
        if let Some(thetas) = &cfg.shrink_thetas {
            let spec = ShrinkageSpec::exponential(thetas.clone())?;
            let shrunk = ShrunkEstimator::fit(&pseudo, &dv, &spec)?;
            errors.push((
                "cN_shrunk".to_string(),
                ErrorSet::compute(&shrunk.density_grid(grid)?, c, grid)?,
            ));
        }
    }
    Ok(Replication { degree, errors })
}

fn run_scenario(
    cfg: &BenchmarkConfig,
    family: Family,
    tau: f64,
    n: usize,
) -> Result<ScenarioReport> {
    let model = from_kendall_tau_with_dof(family, tau, cfg.dim, cfg.dof)?;
    let copula = if cfg.copula {
        let grid = if cfg.dim == 2 {
            Grid::regular(cfg.grid_t, 2)?
        } else {
            Grid::coarse(cfg.dim)?
        };
        let values = model.cdf_grid(&grid)?;
        Some((grid, values))
    } else {
        None
    };
    let density = if cfg.density {
        let grid = Grid::coarse(cfg.dim)?;
        let values = model.density_grid(&grid)?;
        Some((grid, values))
    } else {
        None
    };
    let truth = Truth {
        model,
        copula,
        density,
    };

    let reps = (0..cfg.reps)
        .into_par_iter()
        .map(|r| replicate(cfg, &truth, n, cfg.seed.wrapping_add(r as u64)))
        .collect::<Result<Vec<_>>>()?;

    let selected: Vec<usize> = reps.iter().map(|r| r.degree).collect();
    let n_mode = mode(&selected);
    let estimators = reps[0]
        .errors
        .iter()
        .enumerate()
        .map(|(e, (name, _))| {
            let metrics = ErrorSet::NAMES
                .iter()
                .enumerate()
                .map(|(k, metric)| {
                    let xs: Vec<f64> = reps.iter().map(|r| r.errors[e].1.values()[k]).collect();
                    let (mean, sd) = mean_sd(&xs);
                    MetricSummary {
                        metric: metric.to_string(),
                        mean,
                        sd,
                    }
                })
                .collect();
            let legendre = name == "CN" || name.starts_with("cN");
            EstimatorSummary {
                estimator: name.clone(),
                metrics,
                n_opt_mode: if legendre { n_mode } else { None },
            }
        })
        .collect();

    Ok(ScenarioReport {
        family,
        tau,
        n,
        reps: cfg.reps,
        selected_degrees: selected,
        estimators,
    })
}

/// Runs every scenario of `cfg`. Replication `r` draws its sample with seed
/// `cfg.seed + r`, so reruns with the same configuration are identical.
pub fn run_benchmark(cfg: &BenchmarkConfig) -> Result<ErrorReport> {
    cfg.validate()?;
    let scenarios = cfg
        .scenarios()
        .into_iter()
        .map(|(family, tau, n)| {
            log::info!("benchmark scenario {family} tau={tau} n={n}");
            run_scenario(cfg, family, tau, n)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ErrorReport {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        scenarios,
    })
}
