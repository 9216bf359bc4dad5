//! Grid error metrics and the baseline copula estimators.

use serde::{Deserialize, Serialize};

use crate::error::{check_unit, Error, Result};
use crate::estimator::contract;
use crate::grid::{Grid, GridValues};
use crate::pseudo::PseudoSample;

fn check_shapes(estimate: &GridValues, truth: &GridValues, grid: &Grid) -> Result<()> {
    let shape = grid.shape();
    for v in [estimate, truth] {
        if v.shape() != shape.as_slice() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: v.len(),
            });
        }
    }
    Ok(())
}

/// `(1/T^d) sum |estimate - truth|`.
pub fn miae(estimate: &GridValues, truth: &GridValues, grid: &Grid) -> Result<f64> {
    check_shapes(estimate, truth, grid)?;
    let sum: f64 = estimate
        .values()
        .iter()
        .zip(truth.values())
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(sum / grid.normalizer())
}

/// `(1/T^d) sum (estimate - truth)^2`.
pub fn mise(estimate: &GridValues, truth: &GridValues, grid: &Grid) -> Result<f64> {
    check_shapes(estimate, truth, grid)?;
    let sum: f64 = estimate
        .values()
        .iter()
        .zip(truth.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sum / grid.normalizer())
}

/// `max |estimate - truth|` over the nodes.
pub fn mkse(estimate: &GridValues, truth: &GridValues, grid: &Grid) -> Result<f64> {
    check_shapes(estimate, truth, grid)?;
    Ok(estimate
        .values()
        .iter()
        .zip(truth.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, nan_max))
}

/// Like `f64::max`, but a NaN wins.
fn nan_max(m: f64, e: f64) -> f64 {
    if e.is_nan() || e > m {
        e
    } else {
        m
    }
}

/// The three errors of one fit, absolute and relative to the truth.
///
/// Relative versions divide by the same functional of the truth:
/// `sum |e| / sum |c|`, `sum e^2 / sum c^2` and `max |e| / max |c|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorSet {
    pub miae: f64,
    pub mise: f64,
    pub mkse: f64,
    pub rel_miae: f64,
    pub rel_mise: f64,
    pub rel_mkse: f64,
}

impl ErrorSet {
    pub const NAMES: [&'static str; 6] =
        ["miae", "mise", "mkse", "rel_miae", "rel_mise", "rel_mkse"];

    pub fn compute(estimate: &GridValues, truth: &GridValues, grid: &Grid) -> Result<Self> {
        let miae = miae(estimate, truth, grid)?;
        let mise = mise(estimate, truth, grid)?;
        let mkse = mkse(estimate, truth, grid)?;
        let t = truth.values();
        let abs: f64 = t.iter().map(|v| v.abs()).sum::<f64>() / grid.normalizer();
        let sq: f64 = t.iter().map(|v| v * v).sum::<f64>() / grid.normalizer();
        let sup = t.iter().map(|v| v.abs()).fold(0.0, nan_max);
        Ok(ErrorSet {
            miae,
            mise,
            mkse,
            rel_miae: miae / abs,
            rel_mise: mise / sq,
            rel_mkse: mkse / sup,
        })
    }

    pub fn values(&self) -> [f64; 6] {
        [
            self.miae,
            self.mise,
            self.mkse,
            self.rel_miae,
            self.rel_mise,
            self.rel_mkse,
        ]
    }
}

fn check_point(pseudo: &PseudoSample, u: &[f64]) -> Result<()> {
    if u.len() != pseudo.dim() {
        return Err(Error::DimensionMismatch {
            expected: pseudo.dim(),
            got: u.len(),
        });
    }
    u.iter().try_for_each(|&x| check_unit(x))
}

/// `(1/n) sum_i prod_j 1(U_ij <= u_j)`.
pub fn empirical_copula_at(pseudo: &PseudoSample, u: &[f64]) -> Result<f64> {
    check_point(pseudo, u)?;
    let count = pseudo
        .rows()
        .filter(|row| row.iter().zip(u).all(|(a, b)| a <= b))
        .count();
    Ok(count as f64 / pseudo.n() as f64)
}

/// Empirical copula at every node of a tensor grid with sorted axes, by
/// counting observations into cells and taking prefix sums along each axis.
pub fn empirical_copula_grid(pseudo: &PseudoSample, grid: &Grid) -> Result<GridValues> {
    if grid.dim() != pseudo.dim() {
        return Err(Error::DimensionMismatch {
            expected: pseudo.dim(),
            got: grid.dim(),
        });
    }
    let axes = grid.axes();
    if axes.iter().any(|a| a.windows(2).any(|w| w[0] > w[1])) {
        return Err(Error::InvalidParameter("grid axes must be sorted".into()));
    }
    GridValues::new(grid.shape(), cumulative_counts(pseudo, axes))
}

fn cumulative_counts(pseudo: &PseudoSample, axes: &[Vec<f64>]) -> Vec<f64> {
    let shape: Vec<usize> = axes.iter().map(Vec::len).collect();
    let mut counts = vec![0.0; shape.iter().product()];
    'rows: for row in pseudo.rows() {
        let mut idx = 0;
        for (axis, &x) in axes.iter().zip(row) {
            // first node with x <= node
            let k = axis.partition_point(|&node| node < x);
            if k == axis.len() {
                continue 'rows;
            }
            idx = idx * axis.len() + k;
        }
        counts[idx] += 1.0;
    }
    let mut stride = 1;
    for &len in shape.iter().rev() {
        for i in 0..counts.len() {
            if (i / stride) % len != 0 {
                counts[i] += counts[i - stride];
            }
        }
        stride *= len;
    }
    let n = pseudo.n() as f64;
    counts.iter_mut().for_each(|c| *c /= n);
    counts
}

fn check_order(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter(
            "Bernstein order must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Binomial masses `C(k, i) x^i (1-x)^(k-i)`, `i = 0..=k`, in log space so
/// large orders neither underflow nor overflow.
fn binomial_row(k: usize, x: f64, out: &mut [f64]) {
    if x <= 0.0 || x >= 1.0 {
        out.iter_mut().for_each(|o| *o = 0.0);
        out[if x <= 0.0 { 0 } else { k }] = 1.0;
        return;
    }
    let (lx, l1x) = (x.ln(), (-x).ln_1p());
    let mut ln_coef = 0.0;
    for (i, o) in out.iter_mut().enumerate().take(k + 1) {
        *o = (ln_coef + i as f64 * lx + (k - i) as f64 * l1x).exp();
        ln_coef += ((k - i) as f64 / (i + 1) as f64).ln();
    }
}

fn bernstein_knots(pseudo: &PseudoSample, k: usize) -> Vec<f64> {
    let axis: Vec<f64> = (0..=k).map(|i| i as f64 / k as f64).collect();
    cumulative_counts(pseudo, &vec![axis; pseudo.dim()])
}

/// Empirical Bernstein copula of order `k`: empirical copula values on the
/// lattice `{0, 1/k, ..., 1}^d` weighted by binomial masses at `u`.
pub fn bernstein_copula_at(pseudo: &PseudoSample, u: &[f64], k: usize) -> Result<f64> {
    check_order(k)?;
    check_point(pseudo, u)?;
    let knots = bernstein_knots(pseudo, k);
    let mats: Vec<Vec<f64>> = u
        .iter()
        .map(|&x| {
            let mut row = vec![0.0; k + 1];
            binomial_row(k, x, &mut row);
            row
        })
        .collect();
    let d = pseudo.dim();
    Ok(contract(&knots, &vec![k + 1; d], &mats, &vec![1; d])[0])
}

/// Empirical Bernstein copula on every node of `grid`.
pub fn bernstein_copula_grid(pseudo: &PseudoSample, grid: &Grid, k: usize) -> Result<GridValues> {
    check_order(k)?;
    if grid.dim() != pseudo.dim() {
        return Err(Error::DimensionMismatch {
            expected: pseudo.dim(),
            got: grid.dim(),
        });
    }
    let knots = bernstein_knots(pseudo, k);
    let mats: Vec<Vec<f64>> = grid
        .axes()
        .iter()
        .map(|axis| {
            let mut mat = vec![0.0; axis.len() * (k + 1)];
            for (row, &x) in mat.chunks_exact_mut(k + 1).zip(axis) {
                binomial_row(k, x, row);
            }
            mat
        })
        .collect();
    let d = pseudo.dim();
    let values = contract(&knots, &vec![k + 1; d], &mats, &grid.shape());
    GridValues::new(grid.shape(), values)
}
