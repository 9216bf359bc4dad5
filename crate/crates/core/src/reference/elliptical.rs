//! Gaussian and Student-t copulas with an equicorrelation matrix.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal, StandardUniform};
use statrs::function::gamma::ln_gamma;

use super::special::{norm_cdf, norm_pdf, norm_quantile, t_cdf, t_pdf, t_quantile};
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// Quasi-Monte-Carlo settings for the trivariate distribution function.
const QMC_POINTS: usize = 2048;
const QMC_SHIFTS: usize = 10;
const QMC_SEED: u64 = 0x5eed_c0b1;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Elliptical {
    pub rho: f64,
    /// `None` for the Gaussian copula.
    pub dof: Option<f64>,
}

impl Elliptical {
    pub fn validate(&self, dim: usize) -> Result<()> {
        let lower = -1.0 / (dim as f64 - 1.0);
        if !(self.rho > lower && self.rho < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "correlation {} is not positive definite in dimension {dim}",
                self.rho
            )));
        }
        if let Some(nu) = self.dof {
            if !(nu > 0.0 && nu.is_finite()) {
                return Err(Error::InvalidParameter(format!("degrees of freedom {nu}")));
            }
        }
        Ok(())
    }

    fn quantile(&self, p: f64) -> f64 {
        match self.dof {
            None => norm_quantile(p),
            Some(nu) => t_quantile(p, nu),
        }
    }

    fn margin_cdf(&self, x: f64) -> f64 {
        match self.dof {
            None => norm_cdf(x),
            Some(nu) => t_cdf(x, nu),
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R, dim: usize, out: &mut Vec<f64>) {
        let l = cholesky(dim, self.rho);
        let z: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let scale = match self.dof {
            None => 1.0,
            Some(nu) => {
                let w: f64 = ChiSquared::new(nu).expect("dof is positive").sample(rng);
                (w / nu).sqrt()
            }
        };
        for i in 0..dim {
            let x: f64 = (0..=i).map(|k| l[i * dim + k] * z[k]).sum();
            out.push(self.margin_cdf(x / scale));
        }
    }

    pub fn density(&self, u: &[f64]) -> f64 {
        let d = u.len() as f64;
        let rho = self.rho;
        let det = (1.0 - rho).powf(d - 1.0) * (1.0 + (d - 1.0) * rho);
        let x: Vec<f64> = u.iter().map(|&p| self.quantile(p)).collect();
        let sum: f64 = x.iter().sum();
        let sq: f64 = x.iter().map(|v| v * v).sum();
        // x' R^-1 x for R = (1 - rho) I + rho 11'
        let quad = (sq - rho / (1.0 + (d - 1.0) * rho) * sum * sum) / (1.0 - rho);
        match self.dof {
            None => det.powf(-0.5) * (-0.5 * (quad - sq)).exp(),
            Some(nu) => {
                let joint = ln_gamma(0.5 * (nu + d))
                    - ln_gamma(0.5 * nu)
                    - 0.5 * d * (nu * std::f64::consts::PI).ln()
                    - 0.5 * det.ln()
                    - 0.5 * (nu + d) * (quad / nu).ln_1p();
                let margins: f64 = x.iter().map(|&v| t_pdf(v, nu).ln()).sum();
                (joint - margins).exp()
            }
        }
    }

    pub fn cdf(&self, u: &[f64]) -> f64 {
        if u.contains(&0.0) {
            return 0.0;
        }
        let free: Vec<f64> = u.iter().copied().filter(|&p| p < 1.0).collect();
        match free.len() {
            0 => 1.0,
            1 => free[0],
            2 => {
                let x = self.quantile(free[0]);
                let y = self.quantile(free[1]);
                self.bivariate(x, y)
            }
            _ => self.qmc(&free).0,
        }
    }

    /// Integrates the conditional form `int_{-inf}^x f(s) P(Y <= y | s) ds`.
    fn bivariate(&self, x: f64, y: f64) -> f64 {
        let rho = self.rho;
        let tail = match self.dof {
            None => -9.0,
            Some(nu) => t_quantile(1e-16, nu),
        };
        if x <= tail {
            return 0.0;
        }
        let integrand = |s: f64| match self.dof {
            None => norm_pdf(s) * norm_cdf((y - rho * s) / (1.0 - rho * rho).sqrt()),
            Some(nu) => {
                let scale = ((1.0 - rho * rho) * (nu + s * s) / (nu + 1.0)).sqrt();
                t_pdf(s, nu) * t_cdf((y - rho * s) / scale, nu + 1.0)
            }
        };
        let rule = GaussLegendre::new(16);
        panel_breaks(tail, x)
            .windows(2)
            .map(|w| rule.integrate(integrand, w[0], w[1]))
            .sum()
    }

    /// Separation-of-variables integral with randomly shifted lattice rules.
    /// Returns the estimate and three standard errors across shifts.
    pub fn qmc(&self, u: &[f64]) -> (f64, f64) {
        let dim = u.len();
        let l = cholesky(dim, self.rho);
        let b: Vec<f64> = u.iter().map(|&p| self.quantile(p)).collect();
        let generators: Vec<f64> = [2.0f64, 3.0, 5.0, 7.0, 11.0, 13.0]
            .iter()
            .take(dim - 1)
            .map(|p| p.sqrt().fract())
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(QMC_SEED);
        let mut estimates = Vec::with_capacity(QMC_SHIFTS);
        let mut y = vec![0.0; dim];
        for _ in 0..QMC_SHIFTS {
            let shift: Vec<f64> = (0..dim - 1)
                .map(|_| StandardUniform.sample(&mut rng))
                .collect();
            let mut acc = 0.0;
            for k in 1..=QMC_POINTS {
                let mut f = 1.0;
                let mut radial = 0.0;
                for i in 0..dim {
                    let partial: f64 = (0..i).map(|j| l[i * dim + j] * y[j]).sum();
                    let limit = (b[i] - partial) / l[i * dim + i];
                    let (e, scale, nu_i) = match self.dof {
                        None => (norm_cdf(limit), 1.0, 0.0),
                        Some(nu) => {
                            let nu_i = nu + i as f64;
                            let scale = ((nu + radial) / nu_i).sqrt();
                            (t_cdf(limit / scale, nu_i), scale, nu_i)
                        }
                    };
                    f *= e;
                    if i + 1 == dim || f == 0.0 {
                        break;
                    }
                    // tent-periodized lattice coordinate
                    let w = (k as f64 * generators[i] + shift[i]).fract();
                    let w = (2.0 * w - 1.0).abs();
                    let p = (w * e).max(f64::MIN_POSITIVE);
                    y[i] = match self.dof {
                        None => norm_quantile(p),
                        Some(_) => scale * t_quantile(p, nu_i),
                    };
                    radial += y[i] * y[i];
                }
                acc += f;
            }
            estimates.push(acc / QMC_POINTS as f64);
        }
        let m = estimates.len() as f64;
        let mean = estimates.iter().sum::<f64>() / m;
        let var = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (m - 1.0);
        (mean, 3.0 * (var / m).sqrt())
    }
}

/// Uniform panels near the bulk and geometrically growing ones in the left tail.
fn panel_breaks(tail: f64, x: f64) -> Vec<f64> {
    const BULK: f64 = -4.0;
    const STEP: f64 = 0.25;
    const GROWTH: f64 = 1.25;
    let mut breaks = vec![x];
    let mut s = x;
    while s > BULK && s > tail {
        s = (s - STEP).max(tail);
        breaks.push(s);
    }
    while s > tail {
        s = (s * GROWTH).max(tail);
        breaks.push(s);
    }
    breaks.reverse();
    breaks
}

/// Lower Cholesky factor of the equicorrelation matrix, row-major.
pub(crate) fn cholesky(dim: usize, rho: f64) -> Vec<f64> {
    let mut l = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let a = if i == j { 1.0 } else { rho };
            let s: f64 = (0..j).map(|k| l[i * dim + k] * l[j * dim + k]).sum();
            l[i * dim + j] = if i == j {
                (a - s).sqrt()
            } else {
                (a - s) / l[j * dim + j]
            };
        }
    }
    l
}
