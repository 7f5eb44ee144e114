//! Target potentials `U` (the sampled law is proportional to `exp(-U)`), their
//! declared structural constants, and a numerical falsification probe for
//! those constants.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::noise::{Purpose, StreamKey};

/// Value and gradient of a smooth potential on `R^d`.
pub trait Landscape: Send + Sync + fmt::Debug {
    fn value(&self, x: &[f64]) -> f64;
    fn grad_into(&self, x: &[f64], out: &mut [f64]);
}

/// `|x|^2 / 2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Quadratic;

impl Landscape for Quadratic {
    fn value(&self, x: &[f64]) -> f64 {
        0.5 * norm_sq(x)
    }

    fn grad_into(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(x);
    }
}

/// `alpha/4 |x|^4 - beta/2 |x|^2`.
#[derive(Debug, Clone, Copy)]
pub struct DoubleWell {
    pub alpha: f64,
    pub beta: f64,
}

impl Landscape for DoubleWell {
    fn value(&self, x: &[f64]) -> f64 {
        let r2 = norm_sq(x);
        0.25 * self.alpha * r2 * r2 - 0.5 * self.beta * r2
    }

    fn grad_into(&self, x: &[f64], out: &mut [f64]) {
        let s = self.alpha * norm_sq(x) - self.beta;
        for (o, v) in out.iter_mut().zip(x) {
            *o = s * v;
        }
    }
}

/// `|x - a|^2 / 2 - log(1 + exp(-2<x, a>))`, the equal-weight mixture of
/// `N(a, I)` and `N(-a, I)` up to an additive constant.
#[derive(Debug, Clone)]
pub struct GaussianMixture {
    pub a: Vec<f64>,
}

impl Landscape for GaussianMixture {
    fn value(&self, x: &[f64]) -> f64 {
        let dist: f64 = x.iter().zip(&self.a).map(|(v, a)| (v - a) * (v - a)).sum();
        0.5 * dist - softplus(-2.0 * dot(x, &self.a))
    }

    fn grad_into(&self, x: &[f64], out: &mut [f64]) {
        let w = 2.0 * logistic(-2.0 * dot(x, &self.a));
        for ((o, v), a) in out.iter_mut().zip(x).zip(&self.a) {
            *o = v - a + w * a;
        }
    }
}

/// `U = 0`: pure diffusion. Used to check that couplings cancel the noise.
#[derive(Debug, Clone, Copy, Default)]
pub struct Flat;

impl Landscape for Flat {
    fn value(&self, _x: &[f64]) -> f64 {
        0.0
    }

    fn grad_into(&self, _x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }
}

/// Growth regime of the gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    /// `|grad U(x) - grad U(y)| <= l1 |x - y|`, `|grad U(0)| = l1_prime * sqrt(d)`.
    Lipschitz { l1: f64, l1_prime: f64 },
    /// `|F(x) - F(y)| <= l2 (1 + |x|^gamma + |y|^gamma) |x - y|` with
    /// `l2_prime * sqrt(d) = |F(0)| + gamma * l2`.
    PolynomialGrowth { l2: f64, l2_prime: f64, gamma: f64 },
}

/// Declared constants of the structural assumptions on `U`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssumptionConstants {
    /// Dissipativity: `<x, grad U(x)> >= mu |x|^2 - mu_prime d`.
    pub mu: f64,
    pub mu_prime: f64,
    /// One-sided Lipschitz: `<x - y, grad U(x) - grad U(y)> >= -L |x - y|^2`.
    pub one_sided_l: f64,
    pub regime: Regime,
    /// Log-Sobolev constant. Declared, never verified.
    pub lsi_rho: Option<f64>,
}

impl AssumptionConstants {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        let nonneg = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "{name} must be non-negative, got {v}"
                )))
            }
        };
        positive("mu", self.mu)?;
        nonneg("mu_prime", self.mu_prime)?;
        positive("one_sided_l", self.one_sided_l)?;
        match self.regime {
            Regime::Lipschitz { l1, l1_prime } => {
                positive("l1", l1)?;
                nonneg("l1_prime", l1_prime)?;
            }
            Regime::PolynomialGrowth {
                l2,
                l2_prime,
                gamma,
            } => {
                positive("l2", l2)?;
                nonneg("l2_prime", l2_prime)?;
                positive("gamma", gamma)?;
            }
        }
        if let Some(rho) = self.lsi_rho {
            positive("lsi_rho", rho)?;
        }
        Ok(())
    }

    pub fn lipschitz(&self) -> Option<(f64, f64)> {
        match self.regime {
            Regime::Lipschitz { l1, l1_prime } => Some((l1, l1_prime)),
            Regime::PolynomialGrowth { .. } => None,
        }
    }

    /// Growth exponent; zero in the Lipschitz regime.
    pub fn gamma(&self) -> f64 {
        match self.regime {
            Regime::Lipschitz { .. } => 0.0,
            Regime::PolynomialGrowth { gamma, .. } => gamma,
        }
    }
}

/// A target potential together with its declared constants.
#[derive(Clone)]
pub struct PotentialSpec {
    name: String,
    dim: usize,
    landscape: Arc<dyn Landscape>,
    constants: AssumptionConstants,
}

impl fmt::Debug for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PotentialSpec")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("constants", &self.constants)
            .finish()
    }
}

impl PotentialSpec {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        landscape: Arc<dyn Landscape>,
        constants: AssumptionConstants,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        constants.validate()?;
        Ok(Self {
            name: name.into(),
            dim,
            landscape,
            constants,
        })
    }

    /// Standard Gaussian target.
    pub fn gaussian(dim: usize) -> Result<Self> {
        Self::new(
            "gaussian",
            dim,
            Arc::new(Quadratic),
            AssumptionConstants {
                mu: 1.0,
                mu_prime: 0.0,
                one_sided_l: 1.0,
                regime: Regime::Lipschitz {
                    l1: 1.0,
                    l1_prime: 0.0,
                },
                lsi_rho: Some(2.0),
            },
        )
    }

    /// Double well with superlinear (cubic) gradient growth.
    ///
    /// Constants: `mu = beta`, `mu' = beta^2 / alpha`, `L = beta`, `gamma = 2`,
    /// `L2 = max(beta, 3 alpha / 2)` from
    /// `||x|^2 x - |y|^2 y| <= (|x|^2 + |x||y| + |y|^2) |x - y|`.
    pub fn double_well(dim: usize, alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "double well needs alpha, beta > 0 (got {alpha}, {beta})"
            )));
        }
        let gamma = 2.0;
        let l2 = beta.max(1.5 * alpha);
        Self::new(
            "double_well",
            dim,
            Arc::new(DoubleWell { alpha, beta }),
            AssumptionConstants {
                mu: beta,
                mu_prime: beta * beta / alpha,
                one_sided_l: beta,
                regime: Regime::PolynomialGrowth {
                    l2,
                    l2_prime: gamma * l2 / (dim as f64).sqrt(),
                    gamma,
                },
                lsi_rho: None,
            },
        )
    }

    /// Symmetric two-mode Gaussian mixture with all components of `a` equal
    /// and `|a| = a_norm`.
    pub fn gaussian_mixture(dim: usize, a_norm: f64) -> Result<Self> {
        if !(a_norm > 0.0 && a_norm.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "mixture needs a positive |a| (got {a_norm})"
            )));
        }
        let d = dim.max(1) as f64;
        let a = vec![a_norm / d.sqrt(); dim];
        let a2 = a_norm * a_norm;
        let l1 = 1.0 + 4.0 * a2;
        Self::new(
            "gaussian_mixture",
            dim,
            Arc::new(GaussianMixture { a }),
            AssumptionConstants {
                mu: 0.5,
                mu_prime: 2.0 * a2 / d,
                one_sided_l: l1,
                regime: Regime::Lipschitz { l1, l1_prime: 0.0 },
                lsi_rho: None,
            },
        )
    }

    /// `U = 0`. The declared constants are those of the Gaussian so the
    /// spec is usable by the samplers; dissipativity does not actually hold.
    pub fn flat(dim: usize) -> Result<Self> {
        let mut spec = Self::gaussian(dim)?;
        spec.name = "zero".into();
        spec.landscape = Arc::new(Flat);
        spec.constants.lsi_rho = None;
        Ok(spec)
    }

    pub fn with_lsi_rho(mut self, rho: f64) -> Result<Self> {
        self.constants.lsi_rho = Some(rho);
        self.constants.validate()?;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constants(&self) -> &AssumptionConstants {
        &self.constants
    }

    pub fn landscape(&self) -> &dyn Landscape {
        self.landscape.as_ref()
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(())
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        Ok(self.landscape.value(x))
    }

    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        let mut out = vec![0.0; self.dim];
        self.landscape.grad_into(x, &mut out);
        Ok(out)
    }

    /// Unchecked gradient for the inner loops.
    #[inline]
    pub fn grad_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        self.landscape.grad_into(x, out);
    }
}

pub fn eval_value(spec: &PotentialSpec, x: &[f64]) -> Result<f64> {
    spec.value(x)
}

pub fn eval_grad(spec: &PotentialSpec, x: &[f64]) -> Result<Vec<f64>> {
    spec.grad(x)
}

/// Named potential with parameters, as selected on the command line:
/// `gaussian`, `double_well{alpha=1,beta=1}`, `gaussian_mixture{a_norm=2}`, `zero`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialChoice {
    Gaussian,
    DoubleWell { alpha: f64, beta: f64 },
    GaussianMixture { a_norm: f64 },
    Zero,
}

impl PotentialChoice {
    pub fn build(&self, dim: usize) -> Result<PotentialSpec> {
        match *self {
            Self::Gaussian => PotentialSpec::gaussian(dim),
            Self::DoubleWell { alpha, beta } => PotentialSpec::double_well(dim, alpha, beta),
            Self::GaussianMixture { a_norm } => PotentialSpec::gaussian_mixture(dim, a_norm),
            Self::Zero => PotentialSpec::flat(dim),
        }
    }
}

impl fmt::Display for PotentialChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Gaussian => write!(f, "gaussian"),
            Self::DoubleWell { alpha, beta } => {
                write!(f, "double_well{{alpha={alpha},beta={beta}}}")
            }
            Self::GaussianMixture { a_norm } => write!(f, "gaussian_mixture{{a_norm={a_norm}}}"),
            Self::Zero => write!(f, "zero"),
        }
    }
}

impl FromStr for PotentialChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.find('{') {
            Some(i) => {
                let inner = s[i + 1..].strip_suffix('}').ok_or_else(|| {
                    Error::InvalidParameter(format!("unbalanced braces in '{s}'"))
                })?;
                (&s[..i], inner)
            }
            None => (s, ""),
        };
        let mut params = Vec::new();
        for part in args.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| {
                Error::InvalidParameter(format!("expected key=value, got '{part}'"))
            })?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad number in '{part}'")))?;
            params.push((k.trim().to_string(), v));
        }
        let take = |key: &str, default: f64| -> f64 {
            params
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| *v)
                .unwrap_or(default)
        };
        let allowed: &[&str] = match name {
            "gaussian" | "zero" => &[],
            "double_well" => &["alpha", "beta"],
            "gaussian_mixture" => &["a_norm"],
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown potential '{other}'"
                )));
            }
        };
        if let Some((k, _)) = params.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return Err(Error::InvalidParameter(format!(
                "'{name}' has no parameter '{k}'"
            )));
        }
        Ok(match name {
            "gaussian" => Self::Gaussian,
            "zero" => Self::Zero,
            "double_well" => Self::DoubleWell {
                alpha: take("alpha", 1.0),
                beta: take("beta", 1.0),
            },
            _ => Self::GaussianMixture {
                a_norm: take("a_norm", 2.0),
            },
        })
    }
}

/// Worst-case margins found by [`probe_assumptions`]. A negative margin
/// falsifies the corresponding declared constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeReport {
    pub pairs: usize,
    pub dissipativity: f64,
    pub one_sided_lipschitz: f64,
    pub growth: f64,
}

impl ProbeReport {
    pub fn worst(&self) -> f64 {
        self.dissipativity
            .min(self.one_sided_lipschitz)
            .min(self.growth)
    }

    pub fn consistent(&self) -> bool {
        self.worst() >= 0.0
    }
}

/// `lhs - rhs`, snapped to zero when within rounding of the operands.
fn margin(lhs: f64, rhs: f64, scale: f64) -> f64 {
    let m = lhs - rhs;
    if m.abs() <= 1e-12 * (1.0 + scale) {
        0.0
    } else {
        m
    }
}

/// Samples `n_pairs` pairs uniformly in the ball of the given radius and
/// reports the worst margins of the declared dissipativity, one-sided
/// Lipschitz and growth inequalities.
pub fn probe_assumptions(
    spec: &PotentialSpec,
    n_pairs: usize,
    radius: f64,
    seed: u64,
) -> Result<ProbeReport> {
    if n_pairs == 0 {
        return Err(Error::InvalidParameter("n_pairs must be at least 1".into()));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "radius must be positive, got {radius}"
        )));
    }
    let d = spec.dim();
    let c = spec.constants();
    let key = StreamKey::new(seed, 0, Purpose::Probe);
    let blocks_per_point = d.div_ceil(2) as u64 + 1;
    let point = |index: u64, out: &mut [f64]| {
        let base = index * blocks_per_point;
        key.fill_normals(base + 1, out);
        let n = norm_sq(out).sqrt();
        let (u, _) = key.uniform_pair(base);
        let r = radius * u.powf(1.0 / d as f64);
        for v in out.iter_mut() {
            *v *= r / n;
        }
    };

    let mut x = vec![0.0; d];
    let mut y = vec![0.0; d];
    let mut gx = vec![0.0; d];
    let mut gy = vec![0.0; d];
    let mut report = ProbeReport {
        pairs: n_pairs,
        dissipativity: f64::INFINITY,
        one_sided_lipschitz: f64::INFINITY,
        growth: f64::INFINITY,
    };
    let dn = d as f64;
    for i in 0..n_pairs as u64 {
        point(2 * i, &mut x);
        point(2 * i + 1, &mut y);
        spec.grad_into(&x, &mut gx);
        spec.grad_into(&y, &mut gy);

        for (p, g) in [(&x, &gx), (&y, &gy)] {
            let lhs = dot(p, g);
            let rhs = c.mu * norm_sq(p) - c.mu_prime * dn;
            let m = margin(lhs, rhs, lhs.abs() + rhs.abs());
            report.dissipativity = report.dissipativity.min(m);
        }

        let diff: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        let gdiff: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| a - b).collect();
        let dist_sq = norm_sq(&diff);
        let lhs = dot(&diff, &gdiff);
        let rhs = -c.one_sided_l * dist_sq;
        report.one_sided_lipschitz =
            report
                .one_sided_lipschitz
                .min(margin(lhs, rhs, lhs.abs() + rhs.abs()));

        let gnorm = norm_sq(&gdiff).sqrt();
        let bound = match c.regime {
            Regime::Lipschitz { l1, .. } => l1 * dist_sq.sqrt(),
            Regime::PolynomialGrowth { l2, gamma, .. } => {
                l2 * (1.0 + norm_sq(&x).sqrt().powf(gamma) + norm_sq(&y).sqrt().powf(gamma))
                    * dist_sq.sqrt()
            }
        };
        report.growth = report.growth.min(margin(bound, gnorm, bound + gnorm));
    }
    Ok(report)
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm_sq(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum()
}

fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{Purpose, StreamKey};

    fn builtins(dim: usize) -> Vec<PotentialSpec> {
        vec![
            PotentialSpec::gaussian(dim).unwrap(),
            PotentialSpec::double_well(dim, 1.0, 1.0).unwrap(),
            PotentialSpec::gaussian_mixture(dim, 2.0).unwrap(),
        ]
    }

    #[test]
    fn value_examples() {
        let g = PotentialSpec::gaussian(2).unwrap();
        assert_eq!(eval_value(&g, &[3.0, 4.0]).unwrap(), 12.5);
        let w = PotentialSpec::double_well(2, 1.0, 1.0).unwrap();
        assert_eq!(eval_value(&w, &[1.0, 0.0]).unwrap(), -0.25);
        // x = a with |a|^2 = 4.
        let m = PotentialSpec::gaussian_mixture(4, 2.0).unwrap();
        let a = vec![1.0; 4];
        let expected = -(1.0 + (-8.0f64).exp()).ln();
        assert!((eval_value(&m, &a).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn grad_examples() {
        let g = PotentialSpec::gaussian(2).unwrap();
        assert_eq!(eval_grad(&g, &[1.0, -2.0]).unwrap(), vec![1.0, -2.0]);
        let w = PotentialSpec::double_well(2, 1.0, 1.0).unwrap();
        assert_eq!(eval_grad(&w, &[2.0, 0.0]).unwrap(), vec![6.0, 0.0]);
        let m = PotentialSpec::gaussian_mixture(3, 2.0).unwrap();
        for v in eval_grad(&m, &[0.0; 3]).unwrap() {
            assert!(v.abs() < 1e-15);
        }
    }

    #[test]
    fn input_validation() {
        let g = PotentialSpec::gaussian(2).unwrap();
        assert_eq!(
            g.value(&[1.0]).unwrap_err(),
            Error::DimensionMismatch {
                expected: 2,
                got: 1
            }
        );
        assert_eq!(g.grad(&[1.0, f64::NAN]).unwrap_err(), Error::NonFinite);
        assert!(PotentialSpec::double_well(2, -1.0, 1.0).is_err());
        assert!(PotentialSpec::gaussian(0).is_err());
    }

    #[test]
    fn gradient_matches_central_differences() {
        for dim in [1, 3, 10] {
            for spec in builtins(dim) {
                let key = StreamKey::new(99, dim as u64, Purpose::Auxiliary);
                let mut x = vec![0.0; dim];
                let mut v = vec![0.0; dim];
                for i in 0..100u64 {
                    key.fill_normals(2 * i * dim as u64, &mut x);
                    key.fill_normals((2 * i + 1) * dim as u64, &mut v);
                    let step = 1e-6;
                    let plus: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + step * b).collect();
                    let minus: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a - step * b).collect();
                    let fd =
                        (spec.value(&plus).unwrap() - spec.value(&minus).unwrap()) / (2.0 * step);
                    let exact = dot(&spec.grad(&x).unwrap(), &v);
                    let scale = exact.abs().max(1.0);
                    assert!(
                        (fd - exact).abs() <= 1e-5 * scale,
                        "{}: fd {fd} vs grad {exact}",
                        spec.name()
                    );
                }
            }
        }
    }

    #[test]
    fn mixture_gradient_tends_to_nearest_mode() {
        let m = PotentialSpec::gaussian_mixture(5, 2.0).unwrap();
        let a = [2.0 / 5f64.sqrt(); 5];
        for t in [20.0, 50.0, -20.0, -50.0] {
            let x: Vec<f64> = a.iter().map(|v| t * v).collect();
            let g = m.grad(&x).unwrap();
            let sign = if t > 0.0 { -1.0 } else { 1.0 };
            for j in 0..5 {
                assert!((g[j] - (x[j] + sign * a[j])).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn builtin_constants_survive_the_probe() {
        for dim in [1, 2, 10] {
            for spec in builtins(dim) {
                let r = probe_assumptions(&spec, 10_000, 10.0, 3).unwrap();
                assert!(r.consistent(), "{} d={dim}: {r:?}", spec.name());
            }
        }
    }

    #[test]
    fn false_dissipativity_is_caught() {
        let mut spec = PotentialSpec::gaussian(3).unwrap();
        spec.constants.mu = 2.0;
        let r = probe_assumptions(&spec, 100, 5.0, 1).unwrap();
        assert!(r.dissipativity < 0.0);
        assert!(!r.consistent());
    }

    #[test]
    fn probe_rejects_bad_arguments() {
        let g = PotentialSpec::gaussian(2).unwrap();
        assert!(probe_assumptions(&g, 0, 1.0, 0).is_err());
        assert!(probe_assumptions(&g, 1, 0.0, 0).is_err());
    }

    #[test]
    fn regime_is_exclusive() {
        let w = PotentialSpec::double_well(4, 1.0, 1.0).unwrap();
        assert!(w.constants().lipschitz().is_none());
        assert_eq!(w.constants().gamma(), 2.0);
        let g = PotentialSpec::gaussian(4).unwrap();
        assert_eq!(g.constants().lipschitz(), Some((1.0, 0.0)));
        assert_eq!(g.constants().gamma(), 0.0);
    }

    #[test]
    fn choice_parsing() {
        assert_eq!(
            "gaussian".parse::<PotentialChoice>().unwrap(),
            PotentialChoice::Gaussian
        );
        assert_eq!(
            "double_well{alpha=2,beta=0.5}"
                .parse::<PotentialChoice>()
                .unwrap(),
            PotentialChoice::DoubleWell {
                alpha: 2.0,
                beta: 0.5
            }
        );
        assert_eq!(
            "gaussian_mixture{a_norm=3}"
                .parse::<PotentialChoice>()
                .unwrap(),
            PotentialChoice::GaussianMixture { a_norm: 3.0 }
        );
        assert!("rosenbrock".parse::<PotentialChoice>().is_err());
        assert!("gaussian{a_norm=1}".parse::<PotentialChoice>().is_err());
        let c = PotentialChoice::DoubleWell {
            alpha: 1.0,
            beta: 1.0,
        };
        assert_eq!(c.to_string().parse::<PotentialChoice>().unwrap(), c);
    }
}
