//! Clayton, Frank, Gumbel and Joe copulas.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardUniform};
use statrs::function::gamma::ln_gamma;

use super::special::debye1;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Kind {
    Clayton,
    Frank,
    Gumbel,
    Joe,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Archimedean {
    pub kind: Kind,
    pub theta: f64,
}

const BISECTION_STEPS: usize = 200;

fn bisect<F: Fn(f64) -> f64>(f: F, target: f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    // f increasing on [lo, hi]
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        let v = f(mid);
        if (v - target).abs() <= tol {
            return mid;
        }
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub(crate) fn frank_tau(theta: f64) -> f64 {
    if theta < 0.0 {
        return -frank_tau(-theta);
    }
    1.0 - 4.0 / theta + 4.0 * debye1(theta) / theta
}

pub(crate) fn joe_tau(theta: f64) -> f64 {
    const TERMS: usize = 4000;
    let mut sum = 0.0;
    for k in (1..=TERMS).rev() {
        let k = k as f64;
        sum += 1.0 / (k * (theta * k + 2.0) * (theta * (k - 1.0) + 2.0));
    }
    // remaining terms behave like 1 / (theta^2 k^3)
    let tail = 1.0 / (2.0 * theta * theta * (TERMS as f64 + 0.5).powi(2));
    1.0 - 4.0 * (sum + tail)
}

const FRANK_BRACKET: (f64, f64) = (1e-6, 100.0);
const JOE_BRACKET: (f64, f64) = (1.0 + 1e-6, 100.0);
const TAU_TOL: f64 = 1e-10;

pub(crate) fn theta_from_tau(kind: Kind, tau: f64) -> Result<f64> {
    let unattainable = || Error::Domain { value: tau };
    match kind {
        Kind::Clayton => {
            if tau <= 0.0 || tau >= 1.0 {
                return Err(unattainable());
            }
            Ok(2.0 * tau / (1.0 - tau))
        }
        Kind::Gumbel => {
            if tau <= 0.0 || tau >= 1.0 {
                return Err(unattainable());
            }
            Ok(1.0 / (1.0 - tau))
        }
        Kind::Frank => {
            let a = tau.abs();
            let (lo, hi) = FRANK_BRACKET;
            if a == 0.0 || a < frank_tau(lo) || a > frank_tau(hi) || a.is_nan() {
                return Err(unattainable());
            }
            let theta = bisect(frank_tau, a, lo, hi, TAU_TOL);
            Ok(theta.copysign(tau))
        }
        Kind::Joe => {
            let (lo, hi) = JOE_BRACKET;
            if !(tau >= joe_tau(lo) && tau <= joe_tau(hi)) {
                return Err(unattainable());
            }
            Ok(bisect(joe_tau, tau, lo, hi, TAU_TOL))
        }
    }
}

impl Archimedean {
    pub fn validate(&self, dim: usize) -> Result<()> {
        let t = self.theta;
        let ok = match self.kind {
            Kind::Clayton => t > 0.0,
            Kind::Frank => t != 0.0 && (dim == 2 || t > 0.0),
            Kind::Gumbel | Kind::Joe => t >= 1.0,
        };
        if ok && t.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "{:?} parameter {t} is not valid in dimension {dim}",
                self.kind
            )))
        }
    }

    pub fn kendall_tau(&self) -> f64 {
        let t = self.theta;
        match self.kind {
            Kind::Clayton => t / (t + 2.0),
            Kind::Gumbel => 1.0 - 1.0 / t,
            Kind::Frank => frank_tau(t),
            Kind::Joe => joe_tau(t),
        }
    }

    /// Generator `psi`, with `C(u) = psi(sum phi(u_j))`.
    fn psi(&self, s: f64) -> f64 {
        let t = self.theta;
        match self.kind {
            Kind::Clayton => (1.0 + s).powf(-1.0 / t),
            Kind::Gumbel => (-s.powf(1.0 / t)).exp(),
            Kind::Frank => -((-t).exp_m1() * (-s).exp()).ln_1p() / t,
            Kind::Joe => 1.0 - (-(-s).exp_m1()).powf(1.0 / t),
        }
    }

    /// Inverse generator.
    fn phi(&self, u: f64) -> f64 {
        let t = self.theta;
        match self.kind {
            Kind::Clayton => u.powf(-t) - 1.0,
            Kind::Gumbel => (-u.ln()).powf(t),
            Kind::Frank => -((-t * u).exp_m1() / (-t).exp_m1()).ln(),
            Kind::Joe => -(-(1.0 - u).powf(t)).ln_1p(),
        }
    }

    fn phi_prime(&self, u: f64) -> f64 {
        let t = self.theta;
        match self.kind {
            Kind::Clayton => -t * u.powf(-t - 1.0),
            Kind::Gumbel => -t * (-u.ln()).powf(t - 1.0) / u,
            Kind::Frank => t * (-t * u).exp() / (-t * u).exp_m1(),
            Kind::Joe => {
                let a = (1.0 - u).powf(t);
                -t * (1.0 - u).powf(t - 1.0) / (1.0 - a)
            }
        }
    }

    /// k-th derivative of the generator.
    fn psi_derivative(&self, k: usize, s: f64) -> f64 {
        let t = self.theta;
        match self.kind {
            Kind::Clayton => {
                let mut c = 1.0;
                for i in 0..k {
                    c *= -(1.0 / t + i as f64);
                }
                c * (1.0 + s).powf(-1.0 / t - k as f64)
            }
            Kind::Frank => {
                // psi = Li_1(z) / theta with z = (1 - e^-theta) e^-s, dz/ds = -z
                let z = -(-t).exp_m1() * (-s).exp();
                let li = match k {
                    0 => -(-z).ln_1p(),
                    1 => z / (1.0 - z),
                    2 => z / (1.0 - z).powi(2),
                    3 => z * (1.0 + z) / (1.0 - z).powi(3),
                    _ => unreachable!("densities are only needed up to d = 3"),
                };
                let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
                sign * li / t
            }
            Kind::Gumbel => {
                // psi^(k) = psi * sum c s^e; d/ds (psi s^e) = psi (e s^(e-1) - alpha s^(e + alpha - 1))
                let alpha = 1.0 / t;
                let mut terms = vec![(1.0, 0.0)];
                for _ in 0..k {
                    let mut next = Vec::with_capacity(2 * terms.len());
                    for &(c, e) in &terms {
                        if e != 0.0 {
                            next.push((c * e, e - 1.0));
                        }
                        next.push((-c * alpha, e + alpha - 1.0));
                    }
                    terms = next;
                }
                self.psi(s) * terms.iter().map(|&(c, e)| c * s.powf(e)).sum::<f64>()
            }
            Kind::Joe => {
                // psi = 1 - w^alpha with w = 1 - e^-s and dw/ds = 1 - w
                let alpha = 1.0 / t;
                let w = -(-s).exp_m1();
                if k == 0 {
                    return self.psi(s);
                }
                let mut terms = vec![(-1.0, alpha)];
                for _ in 0..k {
                    let mut next = Vec::with_capacity(2 * terms.len());
                    for &(c, e) in &terms {
                        next.push((c * e, e - 1.0));
                        next.push((-c * e, e));
                    }
                    terms = next;
                }
                terms.iter().map(|&(c, e)| c * w.powf(e)).sum()
            }
        }
    }

    pub fn cdf(&self, u: &[f64]) -> f64 {
        if u.contains(&0.0) {
            return 0.0;
        }
        let t = self.theta;
        let d = u.len() as f64;
        match self.kind {
            Kind::Clayton => {
                let s: f64 = u.iter().map(|x| x.powf(-t)).sum::<f64>() - d + 1.0;
                s.powf(-1.0 / t)
            }
            Kind::Gumbel => (-u
                .iter()
                .map(|x| (-x.ln()).powf(t))
                .sum::<f64>()
                .powf(1.0 / t))
            .exp(),
            Kind::Frank => {
                let num: f64 = u.iter().map(|x| (-t * x).exp_m1()).product();
                let den = (-t).exp_m1().powi(u.len() as i32 - 1);
                -(num / den).ln_1p() / t
            }
            Kind::Joe => {
                // 1 - prod(1 - a_j) without cancellation
                let log_p: f64 = u.iter().map(|x| (-(1.0 - x).powf(t)).ln_1p()).sum();
                1.0 - (-log_p.exp_m1()).powf(1.0 / t)
            }
        }
    }

    pub fn density(&self, u: &[f64]) -> f64 {
        let t = self.theta;
        if u.len() == 2 {
            let (u1, u2) = (u[0], u[1]);
            match self.kind {
                Kind::Clayton => {
                    return (t + 1.0)
                        * (u1 * u2).powf(-(t + 1.0))
                        * (u1.powf(-t) + u2.powf(-t) - 1.0).powf(-(2.0 * t + 1.0) / t);
                }
                Kind::Gumbel => {
                    let l = |x: f64, b: f64| (-x.ln()).powf(b);
                    let s = l(u1, t) + l(u2, t);
                    let c = (-s.powf(1.0 / t)).exp();
                    return c / (u1 * u2)
                        * s.powf(-2.0 + 2.0 / t)
                        * l(u1, t - 1.0)
                        * l(u2, t - 1.0)
                        * (1.0 + (t - 1.0) * s.powf(-1.0 / t));
                }
                _ => {}
            }
        }
        let s: f64 = u.iter().map(|&x| self.phi(x)).sum();
        let jac: f64 = u.iter().map(|&x| self.phi_prime(x)).product();
        self.psi_derivative(u.len(), s) * jac
    }

    /// `dC/du_1` at `(u, v)`, increasing in `v`.
    fn h_function(&self, u: f64, v: f64) -> f64 {
        self.psi_derivative(1, self.phi(u) + self.phi(v)) * self.phi_prime(u)
    }

    pub fn sample<R: Rng>(&self, rng: &mut R, dim: usize, out: &mut Vec<f64>) {
        if dim == 2 {
            let u: f64 = open_uniform(rng);
            let w: f64 = open_uniform(rng);
            out.push(u);
            out.push(self.conditional_inverse(u, w));
        } else {
            let v = self.frailty(rng);
            for _ in 0..dim {
                let e: f64 = Exp1.sample(rng);
                out.push(self.psi(e / v));
            }
        }
    }

    fn conditional_inverse(&self, u: f64, w: f64) -> f64 {
        let t = self.theta;
        match self.kind {
            Kind::Clayton => ((w.powf(-t / (1.0 + t)) - 1.0) * u.powf(-t) + 1.0).powf(-1.0 / t),
            Kind::Frank => {
                let a = (-t * u).exp();
                let g = (-t).exp_m1();
                -(w * g / (a + w * (1.0 - a))).ln_1p() / t
            }
            Kind::Gumbel | Kind::Joe => {
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                for _ in 0..64 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= 0.0 || mid >= 1.0 || self.h_function(u, mid) < w {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }

    /// Mixing variable whose Laplace transform is the generator.
    fn frailty<R: Rng>(&self, rng: &mut R) -> f64 {
        let t = self.theta;
        match self.kind {
            Kind::Clayton => Gamma::new(1.0 / t, 1.0)
                .expect("shape is positive")
                .sample(rng),
            Kind::Gumbel => {
                let alpha = 1.0 / t;
                if alpha == 1.0 {
                    return 1.0;
                }
                let theta = std::f64::consts::PI * open_uniform(rng);
                let w: f64 = Exp1.sample(rng);
                (alpha * theta).sin() / theta.sin().powf(1.0 / alpha)
                    * (((1.0 - alpha) * theta).sin() / w).powf((1.0 - alpha) / alpha)
            }
            Kind::Frank => logarithmic(rng, t),
            Kind::Joe => sibuya(rng, 1.0 / t),
        }
    }
}

fn open_uniform<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = StandardUniform.sample(rng);
        if u > 0.0 {
            return u;
        }
    }
}

/// Logarithmic law with `p = 1 - e^-theta`, by Kemp's LK method.
fn logarithmic<R: Rng>(rng: &mut R, theta: f64) -> f64 {
    let p = -(-theta).exp_m1();
    let v = open_uniform(rng);
    if v >= p {
        return 1.0;
    }
    let q = -(-theta * open_uniform(rng)).exp_m1();
    if v <= q * q {
        (1.0 + v.ln() / q.ln()).floor()
    } else if v > q {
        1.0
    } else {
        2.0
    }
}

/// Sibuya law with survival `Gamma(k + 1 - a) / (Gamma(k + 1) Gamma(1 - a))`.
fn sibuya<R: Rng>(rng: &mut R, a: f64) -> f64 {
    if a == 1.0 {
        return 1.0;
    }
    let r = open_uniform(rng);
    let lg = ln_gamma(1.0 - a);
    let ln_survival = |k: f64| ln_gamma(k + 1.0 - a) - ln_gamma(k + 1.0) - lg;
    let target = r.ln();
    if target >= ln_survival(1.0) {
        return 1.0;
    }
    // survival ~ k^-a / Gamma(1 - a)
    let guess = (-(target + lg) / a).exp().floor().max(1.0);
    if guess > 1e7 {
        return guess;
    }
    let mut k = guess;
    while k > 1.0 && ln_survival(k - 1.0) <= target {
        k -= 1.0;
    }
    while ln_survival(k) > target {
        k += 1.0;
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tau_maps() {
        assert!((frank_tau(5.736283) - 0.5).abs() < 1e-6);
        assert!((frank_tau(-5.736283) + 0.5).abs() < 1e-6);
        // Joe at theta = 2: tau = 1 - 4 sum 1/(k(2k+2)(2k)) = 1 - (pi^2/6 - 1) ... via trigamma
        let direct = 1.0
            - 4.0
                * (1..200_000)
                    .map(|k| {
                        let k = k as f64;
                        1.0 / (k * (2.0 * k + 2.0) * (2.0 * k))
                    })
                    .sum::<f64>();
        assert!((joe_tau(2.0) - direct).abs() < 1e-9);
        for &tau in &[0.1, 0.3, 0.55, 0.8, 0.9] {
            let th = theta_from_tau(Kind::Frank, tau).unwrap();
            assert!((frank_tau(th) - tau).abs() <= 1e-10);
            let th = theta_from_tau(Kind::Joe, tau).unwrap();
            assert!((joe_tau(th) - tau).abs() <= 1e-10);
        }
        assert!(theta_from_tau(Kind::Joe, 0.99).is_err());
        assert!(theta_from_tau(Kind::Clayton, -0.1).is_err());
    }

    fn models() -> Vec<Archimedean> {
        vec![
            Archimedean {
                kind: Kind::Clayton,
                theta: 2.0,
            },
            Archimedean {
                kind: Kind::Frank,
                theta: 5.0,
            },
            Archimedean {
                kind: Kind::Frank,
                theta: -3.0,
            },
            Archimedean {
                kind: Kind::Gumbel,
                theta: 2.5,
            },
            Archimedean {
                kind: Kind::Joe,
                theta: 3.0,
            },
        ]
    }

    #[test]
    fn generator_round_trip() {
        for m in models() {
            for &u in &[0.05, 0.3, 0.7, 0.95] {
                assert!((m.psi(m.phi(u)) - u).abs() < 1e-12, "{m:?}");
                let h = 1e-6;
                let fd = (m.phi(u + h) - m.phi(u - h)) / (2.0 * h);
                assert!(
                    (fd - m.phi_prime(u)).abs() < 1e-6 * fd.abs().max(1.0),
                    "{m:?}"
                );
            }
        }
    }

    #[test]
    fn generator_derivatives_by_differences() {
        for m in models() {
            for &s in &[0.2, 1.0, 2.5] {
                for k in 1..=3 {
                    let h = 1e-4;
                    let fd = (m.psi_derivative(k - 1, s + h) - m.psi_derivative(k - 1, s - h))
                        / (2.0 * h);
                    let exact = m.psi_derivative(k, s);
                    assert!(
                        (fd - exact).abs() <= 1e-6 * exact.abs().max(1.0),
                        "{m:?} k={k} s={s}"
                    );
                }
            }
        }
    }

    #[test]
    fn bivariate_density_matches_general_formula() {
        for m in models() {
            for &(a, b) in &[(0.2, 0.3), (0.5, 0.5), (0.9, 0.15)] {
                let s = m.phi(a) + m.phi(b);
                let general = m.psi_derivative(2, s) * m.phi_prime(a) * m.phi_prime(b);
                assert!(
                    (m.density(&[a, b]) - general).abs() < 1e-9 * general,
                    "{m:?}"
                );
            }
        }
    }

    #[test]
    fn conditional_inverse_inverts_h() {
        for m in models() {
            for &u in &[0.1, 0.5, 0.8] {
                for &w in &[0.05, 0.5, 0.93] {
                    let v = m.conditional_inverse(u, w);
                    assert!((m.h_function(u, v) - w).abs() < 1e-8, "{m:?} u={u} w={w}");
                }
            }
        }
    }

    #[test]
    fn frailty_means() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        // logarithmic mean p / (-(1-p) ln(1-p)) ... mean = -p / ((1-p) ln(1-p))
        let theta: f64 = 2.0;
        let p = 1.0 - (-theta).exp();
        let mean = p / ((1.0 - p) * theta);
        let n = 200_000;
        let est: f64 = (0..n).map(|_| logarithmic(&mut rng, theta)).sum::<f64>() / n as f64;
        assert!((est - mean).abs() < 0.02, "{est} vs {mean}");
        // Sibuya(a): P(V = 1) = a
        let a = 0.4;
        let ones = (0..n).filter(|_| sibuya(&mut rng, a) == 1.0).count() as f64 / n as f64;
        assert!((ones - a).abs() < 0.005);
        // P(V = 2) = a (1 - a) / 2
        let twos = (0..n).filter(|_| sibuya(&mut rng, a) == 2.0).count() as f64 / n as f64;
        assert!((twos - a * (1.0 - a) / 2.0).abs() < 0.005);
    }
}
