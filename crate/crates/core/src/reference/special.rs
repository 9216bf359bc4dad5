//! Scalar distribution functions used by the reference families.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use statrs::function::beta::{beta_reg, inv_beta_reg};
use statrs::function::erf::erfc_inv;
use statrs::function::gamma::ln_gamma;

use crate::quadrature::GaussLegendre;

pub(crate) fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

pub(crate) fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

pub(crate) fn norm_quantile(p: f64) -> f64 {
    let x = -SQRT_2 * erfc_inv(2.0 * p);
    if !x.is_finite() {
        return x;
    }
    // one Newton step on the tail-accurate side
    if x < 0.0 {
        x - (norm_cdf(x) - p) / norm_pdf(x)
    } else {
        x + (norm_cdf(-x) - (1.0 - p)) / norm_pdf(x)
    }
}

pub(crate) fn t_pdf(x: f64, nu: f64) -> f64 {
    (ln_gamma(0.5 * (nu + 1.0))
        - ln_gamma(0.5 * nu)
        - 0.5 * (nu * PI).ln()
        - 0.5 * (nu + 1.0) * (x * x / nu).ln_1p())
    .exp()
}

pub(crate) fn t_cdf(x: f64, nu: f64) -> f64 {
    if x.is_infinite() {
        return if x > 0.0 { 1.0 } else { 0.0 };
    }
    let x2 = x * x;
    if x2 < nu {
        // near the centre nu / (nu + x^2) rounds to 1, use the other tail
        let half = 0.5 * beta_reg(0.5, 0.5 * nu, x2 / (nu + x2));
        return if x < 0.0 { 0.5 - half } else { 0.5 + half };
    }
    let tail = 0.5 * beta_reg(0.5 * nu, 0.5, nu / (nu + x2));
    if x < 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

pub(crate) fn t_quantile(p: f64, nu: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    if p == 0.5 {
        return 0.0;
    }
    let tail = p.min(1.0 - p);
    let z = inv_beta_reg(0.5 * nu, 0.5, 2.0 * tail);
    let x = (nu * (1.0 / z - 1.0)).sqrt();
    if p < 0.5 {
        -x
    } else {
        x
    }
}

/// Debye function of order one, `(1/x) int_0^x t / (e^t - 1) dt`.
pub(crate) fn debye1(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let integrand = |t: f64| if t == 0.0 { 1.0 } else { t / t.exp_m1() };
    let rule = GaussLegendre::new(32);
    rule.integrate_composite(integrand, 0.0, x, 8) / x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_round_trip() {
        for &p in &[1e-10, 0.01, 0.3, 0.5, 0.9, 1.0 - 1e-9] {
            let err = (norm_cdf(norm_quantile(p)) - p).abs() / p.min(1.0 - p);
            assert!(err <= 1e-12, "p={p} err={err}");
        }
        let e = (norm_cdf(1.959963984540054) - 0.975).abs();
        assert!(e < 1e-14, "{e}");
    }

    #[test]
    fn student_values() {
        // t_1 is Cauchy
        assert!((t_cdf(1.0, 1.0) - 0.75).abs() < 1e-14);
        assert!((t_cdf(1e-9, 5.0) - 0.5 - 1e-9 * t_pdf(0.0, 5.0)).abs() < 1e-16);
        assert!((t_cdf(2.0, 4.0) - t_cdf(2.0 + 1e-15, 4.0)).abs() < 1e-14);
        assert!((t_pdf(0.0, 1.0) - 1.0 / PI).abs() < 1e-14);
        for &nu in &[3.0, 17.0, 18.0] {
            for &p in &[1e-8, 0.02, 0.4, 0.5, 0.77, 0.999] {
                let x = t_quantile(p, nu);
                assert!(
                    (t_cdf(x, nu) - p).abs() <= 1e-10 * p.max(1e-2),
                    "nu={nu} p={p}"
                );
            }
        }
    }

    #[test]
    fn debye_values() {
        // series 1 - x/4 + x^2/36 near zero
        let x = 1e-3;
        assert!((debye1(x) - (1.0 - x / 4.0 + x * x / 36.0)).abs() < 1e-12);
        // int_0^inf t/(e^t-1) = pi^2/6
        assert!((debye1(60.0) * 60.0 - PI * PI / 6.0).abs() < 1e-10);
    }
}
