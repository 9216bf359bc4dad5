//! Nonparametric copula and copula-density estimation by projection onto
//! shifted Legendre polynomials.
//!
//! The usual pipeline is `Sample -> PseudoSample -> select_degree ->
//! FittedEstimator`, with [`reference`] providing parametric copulas to
//! simulate from and compare against.

pub mod bench;
pub mod coefficients;
pub mod error;
pub mod estimator;
pub mod grid;
pub mod legendre;
pub mod lscv;
pub mod metrics;
pub mod pseudo;
pub mod quadrature;
pub mod reference;
pub mod shrinkage;

pub use bench::{
    run_benchmark, BenchmarkConfig, ErrorReport, EstimatorSummary, MetricSummary, ScenarioReport,
};
pub use coefficients::{
    coefficients_known_margins, estimate_coefficients, spearman_rho, CoefficientTensor,
    DegreeVector, MultiIndex,
};
pub use error::{Error, Result};
pub use estimator::FittedEstimator;
pub use grid::{Grid, GridValues};
pub use legendre::{
    antiderivative, eval_basis_row, eval_shifted_legendre, tensor_eval, BasisValueRow, MAX_DEGREE,
};
pub use lscv::{lscv, plug_in_degree, select_degree, LscvMode, LscvScan};
pub use metrics::{
    bernstein_copula_at, bernstein_copula_grid, empirical_copula_at, empirical_copula_grid, miae,
    mise, mkse, ErrorSet,
};
pub use pseudo::{ecdf_at, to_pseudo, PseudoSample, Sample};
pub use reference::{from_kendall_tau, CopulaModel, Family};
pub use shrinkage::{
    density_at_shrunk, estimate_coefficients_shrunk, shrink_factor, ShrinkageKind, ShrinkageSpec,
    ShrunkEstimator,
};

/// Formats a float with 17 significant digits so output round-trips.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
