//! Closed-form constants, error bounds, stepsize caps and mixing times.
//!
//! All functions are pure. Symbols follow their role:
//!
//! | field            | meaning                                             |
//! |------------------|-----------------------------------------------------|
//! | `m1_1`           | uniform second-moment constant of the diffusion     |
//! | `m2`             | uniform second-moment constant of RLMC              |
//! | `k1`, `k2`       | finite-time mean-square error constants of RLMC     |
//! | `cal_k`, `eta`   | W2 contraction prefactor and rate of the diffusion  |
//! | `theta_cap`      | restart horizon used to glue finite-time estimates  |
//! | `lambda`         | exponential rate of the RLMC bound                  |
//! | `lambda1`        | exponential rate of the pRLMC bound                 |
//! | `c1`, `c2`       | prefactors of the RLMC W2 bound                     |
//! | `sigma`          | initial second moment per dimension                 |

use log::warn;

use crate::error::{Error, Result};
use crate::potential::{AssumptionConstants, PotentialSpec, Regime};
use crate::samplers::SamplerKind;

/// `2 (2p - 1 + mu')^p / (c p) * ((2p - 2) / ((2 mu - c) p))^(p - 1)`, with
/// the second factor equal to one at `p = 1`.
pub fn m1(p: f64, mu: f64, mu_prime: f64, c: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("p must be >= 1, got {p}")));
    }
    if !(c > 0.0 && c < 2.0 * mu) {
        return Err(Error::InvalidParameter(format!(
            "c = {c} outside (0, 2 mu) = (0, {})",
            2.0 * mu
        )));
    }
    let lead = 2.0 * (2.0 * p - 1.0 + mu_prime).powf(p) / (c * p);
    // 0^0 = 1: at p = 1 the base 2p - 2 vanishes and must not be evaluated.
    let tail = if p == 1.0 {
        1.0
    } else {
        ((2.0 * p - 2.0) / ((2.0 * mu - c) * p)).powf(p - 1.0)
    };
    Ok(lead * tail)
}

/// RLMC stepsize cap `1 ^ 1/mu ^ 1/L1 ^ 1/L1' ^ mu/(21 L1^2)`.
fn rlmc_cap(mu: f64, l1: f64, l1_prime: f64) -> f64 {
    1.0_f64
        .min(recip(mu))
        .min(recip(l1))
        .min(recip(l1_prime))
        .min(mu / (21.0 * l1 * l1))
}

fn recip(v: f64) -> f64 {
    if v == 0.0 {
        f64::INFINITY
    } else {
        1.0 / v
    }
}

/// `(20 + 20 L1'^2 h + 2 mu') / mu`. Warns when `h` exceeds the parts of the
/// RLMC stepsize cap that these arguments determine.
pub fn m2(mu: f64, mu_prime: f64, l1_prime: f64, h: f64) -> f64 {
    let partial_cap = 1.0_f64.min(recip(mu)).min(recip(l1_prime));
    if h > partial_cap {
        warn!("m2 evaluated at h = {h} beyond the stepsize cap {partial_cap}");
    }
    (20.0 + 20.0 * l1_prime * l1_prime * h + 2.0 * mu_prime) / mu
}

/// Finite-time error constants `(K1, K2)`.
pub fn k1_k2(l1: f64, l1_prime: f64, m1_1: f64, m2: f64) -> (f64, f64) {
    let l1_2 = l1 * l1;
    let l1_3 = l1_2 * l1;
    let k1 = 4.0 * (14.0 + 15.0 * l1_2) * (l1_2 * l1_prime + m1_1 * l1_2 + m2 * l1_3 + l1_2);
    let k2 = 4.0 * (10.0 + 11.0 * l1_2) * l1_3;
    (k1, k2)
}

/// W2 contraction prefactor and rate of the diffusion under a log-Sobolev
/// inequality with constant `rho` and one-sided Lipschitz constant `l`.
pub fn ergodicity_constants(rho: f64, l: f64) -> Result<(f64, f64)> {
    if !(rho > 0.0 && l > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "rho and L must be positive (got {rho}, {l})"
        )));
    }
    // 2 rho L / (1 - e^{-2L}) with expm1 so small L stays accurate.
    let ratio = 2.0 * rho * l / -(-2.0 * l).exp_m1();
    let first = ratio.sqrt() * (4.0 / rho).exp();
    let second = (2.0 * l + 2.0 / rho).exp();
    Ok((first.max(second), 2.0 / rho))
}

/// Inputs of the RLMC constant chain beyond the potential's constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryInputs {
    pub h: f64,
    /// `E|x0|^2 <= sigma d`.
    pub sigma: f64,
    /// Free parameter in `(0, 2 mu)`; `None` means `mu`.
    pub c: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryConstants {
    pub m1_1: f64,
    pub c: f64,
    pub m2: f64,
    pub k1: f64,
    pub k2: f64,
    pub cal_k: f64,
    pub eta: f64,
    pub theta_cap: f64,
    pub lambda: f64,
    pub lambda1: f64,
    pub c1: f64,
    pub c2: f64,
    pub sigma: f64,
    pub l1: f64,
}

impl TheoryConstants {
    /// Evaluates the full constant chain for a Lipschitz-regime potential.
    pub fn rlmc(constants: &AssumptionConstants, inputs: TheoryInputs) -> Result<Self> {
        let (l1, l1_prime) = constants.lipschitz().ok_or_else(|| {
            Error::MissingConstants("the RLMC constants need the Lipschitz regime".into())
        })?;
        let rho = constants.lsi_rho.ok_or_else(|| {
            Error::MissingConstants("log-Sobolev constant rho not declared".into())
        })?;
        let mu = constants.mu;
        let c = inputs.c.unwrap_or(mu);
        let m1_1 = m1(1.0, mu, constants.mu_prime, c)?;
        let m2 = m2(mu, constants.mu_prime, l1_prime, inputs.h);
        let (k1, k2) = k1_k2(l1, l1_prime, m1_1, m2);
        let (cal_k, eta) = ergodicity_constants(rho, constants.one_sided_l)?;
        let log_k = cal_k.ln();
        let theta_cap = (log_k + 1.0) / eta + 1.0 / l1;
        let lambda = eta / (log_k + 1.0 + eta / l1);
        let lambda1 = eta / (log_k + 1.0 + eta / (2.0 * constants.one_sided_l));
        let sigma = inputs.sigma;
        let c1 = (1.0 + 12.0 * l1 * theta_cap).exp() * (k1 + k2 * m2 + k2 * sigma).sqrt();
        let c2 = 2f64.sqrt() * std::f64::consts::E * (m1_1 + m2 + 4.0 * sigma).sqrt();
        Ok(Self {
            m1_1,
            c,
            m2,
            k1,
            k2,
            cal_k,
            eta,
            theta_cap,
            lambda,
            lambda1,
            c1,
            c2,
            sigma,
            l1,
        })
    }

    /// `(name, value)` rows in a fixed order.
    pub fn rows(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("m1_1", self.m1_1),
            ("c", self.c),
            ("m2", self.m2),
            ("k1", self.k1),
            ("k2", self.k2),
            ("cal_k", self.cal_k),
            ("eta", self.eta),
            ("theta_cap", self.theta_cap),
            ("lambda", self.lambda),
            ("lambda1", self.lambda1),
            ("c1", self.c1),
            ("c2", self.c2),
            ("sigma", self.sigma),
        ]
    }
}

/// The two addends of the RLMC W2 bound and their sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MainBound {
    pub discretization: f64,
    pub contraction: f64,
    pub total: f64,
}

/// `C1 sqrt(d) h + C2 sqrt(d) exp(-lambda n h)`.
pub fn main_bound(d: usize, h: f64, n: u64, k: &TheoryConstants) -> Result<MainBound> {
    if n == 0 {
        return Err(Error::InvalidParameter("main bound needs n >= 1".into()));
    }
    let sd = (d as f64).sqrt();
    let discretization = k.c1 * sd * h;
    let contraction = k.c2 * sd * (-k.lambda * n as f64 * h).exp();
    Ok(MainBound {
        discretization,
        contraction,
        total: discretization + contraction,
    })
}

/// Shape of the pRLMC bound with unit prefactors:
/// `d^((11 gamma + 2)/4) h + sqrt(d) exp(-lambda1 n h)`.
pub fn prlmc_bound_shape(d: usize, h: f64, n: u64, gamma: f64, lambda1: f64) -> MainBound {
    let dn = d as f64;
    let discretization = dn.powf((11.0 * gamma + 2.0) / 4.0) * h;
    let contraction = dn.sqrt() * (-lambda1 * n as f64 * h).exp();
    MainBound {
        discretization,
        contraction,
        total: discretization + contraction,
    }
}

/// Largest stepsize covered by the convergence theory of `kind` on `spec`.
///
/// LMC and RLMC share the Lipschitz-regime cap; with a superlinear gradient
/// no stepsize is covered and the cap is zero. pRLMC needs the
/// polynomial-growth constants.
pub fn stepsize_guard(kind: SamplerKind, spec: &PotentialSpec) -> Result<f64> {
    let c = spec.constants();
    match (kind, c.regime) {
        (SamplerKind::Lmc | SamplerKind::Rlmc, Regime::Lipschitz { l1, l1_prime }) => {
            Ok(rlmc_cap(c.mu, l1, l1_prime))
        }
        (SamplerKind::Lmc | SamplerKind::Rlmc, Regime::PolynomialGrowth { .. }) => Ok(0.0),
        (SamplerKind::Prlmc, Regime::PolynomialGrowth { gamma, .. }) => Ok(1.0_f64
            .min(1.0 / (2.0 * c.one_sided_l))
            .min(recip(c.mu))
            .min((spec.dim() as f64).powf(-gamma))),
        (SamplerKind::Prlmc, Regime::Lipschitz { .. }) => Err(Error::MissingConstants(
            "pRLMC needs the polynomial-growth exponent".into(),
        )),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingTime {
    /// Integral but kept as `f64`: with realistic `C1` the count is far
    /// beyond `u64`.
    pub iterations: f64,
    pub h: f64,
}

/// Iterations for W2 accuracy `eps`: `h = eps / (2 C1 sqrt d)` and
/// `k = ceil(log(2 C2 sqrt d / eps) / (lambda h))`, at least one.
pub fn mixing_time(eps: f64, d: usize, k: &TheoryConstants) -> Result<MixingTime> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "eps must be positive, got {eps}"
        )));
    }
    let sd = (d as f64).sqrt();
    let h = eps / (2.0 * k.c1 * sd);
    let raw = (2.0 * k.c1 * sd / eps) * (2.0 * k.c2 * sd / eps).ln() / k.lambda;
    if raw.is_nan() {
        return Err(Error::NonFinite);
    }
    let iterations = raw.ceil().max(1.0);
    Ok(MixingTime { iterations, h })
}

/// Constant `C` of the mean-square Hölder bound `E|X_{t+theta} - X_t|^2 <= C theta`
/// for the diffusion started at `x` (Lipschitz regime, second moments).
pub fn holder_constant(constants: &AssumptionConstants, d: usize, x_norm_sq: f64) -> Result<f64> {
    let (l1, l1_prime) = constants.lipschitz().ok_or_else(|| {
        Error::MissingConstants("the Hölder constant needs the Lipschitz regime".into())
    })?;
    let m1_1 = m1(1.0, constants.mu, constants.mu_prime, constants.mu)?;
    Ok((4.0 * l1_prime + 4.0 * m1_1 + 4.0) * d as f64 + 4.0 * l1 * x_norm_sq)
}

/// Stationary variance per coordinate of LMC on `U = |x|^2 / 2`.
pub fn lmc_ou_stationary_variance(h: f64) -> f64 {
    1.0 / (1.0 - h / 2.0)
}

/// Stationary variance per coordinate of RLMC on `U = |x|^2 / 2` when the
/// intermediate time has moments `E tau = tau_mean`, `E tau^2 = tau_sq_mean`.
///
/// One step is `x' = (1 - h + tau h^2) x - sqrt(2) h W_tau + sqrt(2) dW`, so
/// the fixed point of the second-moment recursion is
/// `(2h - 4h^2 E tau + 2h^3 E tau) / (1 - E (1 - h + tau h^2)^2)`.
pub fn rlmc_ou_stationary_variance(h: f64, tau_mean: f64, tau_sq_mean: f64) -> f64 {
    let noise = 2.0 * h - 4.0 * h * h * tau_mean + 2.0 * h * h * h * tau_mean;
    let one_minus_h = 1.0 - h;
    let gain =
        one_minus_h * one_minus_h + 2.0 * one_minus_h * h * h * tau_mean + h.powi(4) * tau_sq_mean;
    noise / (1.0 - gain)
}

/// A-priori uniform second-moment bound of pRLMC iterates for `n >= 1`:
/// `|Y_{n+1}| <= R + h B + sqrt 2 |dW|` with `R` the projection radius and
/// `B = L2' sqrt d + 2 L2 theta^(gamma+1) sqrt(d / h)` bounding the projected
/// drift, hence `E|Y_n|^2 <= 2 (R + h B)^2 + 4 d h`.
pub fn prlmc_second_moment_cap(
    constants: &AssumptionConstants,
    d: usize,
    h: f64,
    theta: f64,
) -> Result<f64> {
    let Regime::PolynomialGrowth {
        l2,
        l2_prime,
        gamma,
    } = constants.regime
    else {
        return Err(Error::MissingConstants(
            "pRLMC moment cap needs the polynomial-growth regime".into(),
        ));
    };
    let dn = d as f64;
    let radius = theta * (dn / h).powf(1.0 / (2.0 * gamma + 2.0));
    let drift = l2_prime * dn.sqrt() + 2.0 * l2 * theta.powf(gamma + 1.0) * (dn / h).sqrt();
    let step = radius + h * drift;
    Ok(2.0 * step * step + 4.0 * dn * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn m1_examples() {
        assert_eq!(m1(1.0, 1.0, 1.0, 1.0).unwrap(), 4.0);
        for (mu, c) in [(1.0, 0.5), (2.0, 3.0), (0.3, 0.1)] {
            assert!(rel(m1(1.0, mu, 0.0, c).unwrap(), 2.0 / c) < 1e-15);
        }
        assert_eq!(m1(2.0, 1.0, 0.0, 1.0).unwrap(), 9.0);
    }

    #[test]
    fn m1_rejects_bad_c() {
        assert!(m1(1.0, 1.0, 0.0, 0.0).is_err());
        assert!(m1(1.0, 1.0, 0.0, 2.0).is_err());
        assert!(m1(0.5, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn m2_examples() {
        assert_eq!(m2(1.0, 0.0, 0.0, 0.01), 20.0);
        assert_eq!(m2(2.0, 1.0, 0.0, 0.01), 11.0);
        assert_eq!(m2(1.0, 0.0, 1.0, 1.0), 40.0);
    }

    #[test]
    fn k1_k2_examples() {
        assert_eq!(k1_k2(1.0, 0.0, 2.0, 20.0), (2668.0, 84.0));
        let (_, k2) = k1_k2(1e-9, 0.0, 2.0, 20.0);
        assert!(k2 < 1e-25);
        let (a, _) = k1_k2(1.7, 0.3, 2.0, 20.0);
        let (b, _) = k1_k2(1.7, 0.3, 2.0, 40.0);
        let slope = 4.0 * (14.0 + 15.0 * 1.7f64.powi(2)) * 1.7f64.powi(3) * 20.0;
        assert!(rel(b - a, slope) < 1e-12);
    }

    #[test]
    fn ergodicity_examples() {
        let (k, eta) = ergodicity_constants(2.0, 1.0).unwrap();
        assert_eq!(eta, 1.0);
        assert!(rel(k, 3f64.exp()) < 1e-15);
        let first = (4.0 / (1.0 - (-2.0f64).exp())).sqrt() * 2f64.exp();
        assert!((first - 15.8926).abs() < 1e-4);
        assert!(ergodicity_constants(1e12, 1.0).unwrap().1 < 1e-11);
        // L -> 0: the first branch tends to sqrt(rho) e^{4/rho}.
        let rho = 0.5;
        let (k, _) = ergodicity_constants(rho, 1e-6).unwrap();
        assert!(rel(k, rho.sqrt() * (4.0 / rho).exp()) < 1e-5);
    }

    fn gaussian_constants() -> TheoryConstants {
        let spec = PotentialSpec::gaussian(10).unwrap();
        TheoryConstants::rlmc(
            spec.constants(),
            TheoryInputs {
                h: 0.04,
                sigma: 0.0,
                c: None,
            },
        )
        .unwrap()
    }

    #[test]
    fn constant_chain_invariants() {
        let k = gaussian_constants();
        for (name, v) in k.rows() {
            if name != "sigma" {
                assert!(v > 0.0, "{name} = {v}");
            }
        }
        assert!(k.lambda <= k.eta);
        assert!(k.theta_cap >= 1.0 / k.l1);
        let lhs = k.lambda * (k.cal_k.ln() + 1.0 + k.eta / k.l1);
        assert!((lhs - k.eta).abs() < 1e-12);
        assert_eq!(k, gaussian_constants());
    }

    #[test]
    fn missing_rho_is_reported() {
        let spec = PotentialSpec::gaussian_mixture(10, 2.0).unwrap();
        let err = TheoryConstants::rlmc(
            spec.constants(),
            TheoryInputs {
                h: 0.01,
                sigma: 0.0,
                c: None,
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::MissingConstants(_)));
        let spec = spec.with_lsi_rho(4.0).unwrap();
        assert!(TheoryConstants::rlmc(
            spec.constants(),
            TheoryInputs {
                h: 0.01,
                sigma: 0.0,
                c: None
            }
        )
        .is_ok());
    }

    #[test]
    fn main_bound_limits_and_scaling() {
        let k = gaussian_constants();
        let far = main_bound(10, 0.04, 1_000_000, &k).unwrap();
        assert_eq!(far.total, far.discretization);
        let a = main_bound(10, 0.04, 100, &k).unwrap();
        let b = main_bound(40, 0.04, 100, &k).unwrap();
        assert!(rel(b.discretization, 2.0 * a.discretization) < 1e-15);
        assert!(main_bound(10, 0.04, 0, &k).is_err());
    }

    #[test]
    fn stepsize_guard_examples() {
        let g = PotentialSpec::gaussian(3).unwrap();
        assert!(rel(stepsize_guard(SamplerKind::Rlmc, &g).unwrap(), 1.0 / 21.0) < 1e-15);
        let w = PotentialSpec::double_well(4, 1.0, 1.0).unwrap();
        assert_eq!(stepsize_guard(SamplerKind::Prlmc, &w).unwrap(), 1.0 / 16.0);
        assert_eq!(stepsize_guard(SamplerKind::Lmc, &w).unwrap(), 0.0);
        assert!(stepsize_guard(SamplerKind::Prlmc, &g).is_err());
        let mut big_mu = *g.constants();
        big_mu.mu = 1e9;
        assert!(rlmc_cap(big_mu.mu, 1.0, 0.0) <= 1.0);
    }

    #[test]
    fn mixing_time_shape() {
        let k = gaussian_constants();
        let a = mixing_time(0.1, 10, &k).unwrap();
        let b = mixing_time(0.05, 10, &k).unwrap();
        assert!(b.iterations > 2.0 * a.iterations);
        let c = mixing_time(0.1, 40, &k).unwrap();
        assert!(rel(c.h, a.h / 2.0) < 1e-15);
        assert_eq!(mixing_time(1e300, 10, &k).unwrap().iterations, 1.0);
        assert!(mixing_time(0.0, 10, &k).is_err());
    }

    #[test]
    fn stationary_variances() {
        assert!(rel(lmc_ou_stationary_variance(0.04), 1.0 / 0.98) < 1e-15);
        // h = 0 limit of both recursions is the target variance.
        assert!((rlmc_ou_stationary_variance(1e-4, 0.5, 1.0 / 3.0) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn holder_constant_value() {
        let g = PotentialSpec::gaussian(2).unwrap();
        // (0 + 4*2 + 4) * 2 + 4 * 1 * 3
        assert_eq!(holder_constant(g.constants(), 2, 3.0).unwrap(), 36.0);
    }
}
