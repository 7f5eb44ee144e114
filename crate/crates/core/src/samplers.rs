//! LMC, randomized LMC and projected randomized LMC kernels, the projection
//! onto the stepsize-dependent ball, and a chain driver over a shared
//! Brownian path.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::str::FromStr;

use log::warn;

use crate::error::{Error, Result};
use crate::noise::{grid_ratio, BrownianPath, Purpose, StreamKey, TauStream, MIN_SUBSTEP_RATIO};
use crate::potential::{norm_sq, PotentialSpec};
use crate::theory::stepsize_guard;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SamplerKind {
    Lmc,
    Rlmc,
    Prlmc,
}

impl SamplerKind {
    pub fn uses_tau(self) -> bool {
        !matches!(self, Self::Lmc)
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Lmc => "lmc",
            Self::Rlmc => "rlmc",
            Self::Prlmc => "prlmc",
        })
    }
}

impl FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lmc" | "ula" => Ok(Self::Lmc),
            "rlmc" => Ok(Self::Rlmc),
            "prlmc" => Ok(Self::Prlmc),
            other => Err(Error::InvalidParameter(format!(
                "unknown sampler '{other}'"
            ))),
        }
    }
}

/// Iterate of a chain. Elapsed time is `n h`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub x: Vec<f64>,
    pub n: u64,
    pub h: f64,
    pub diverged: bool,
}

impl ChainState {
    pub fn new(x: Vec<f64>, h: f64) -> Self {
        let diverged = x.iter().any(|v| !v.is_finite());
        Self {
            x,
            n: 0,
            h,
            diverged,
        }
    }

    pub fn t(&self) -> f64 {
        self.n as f64 * self.h
    }

    fn advanced(&self, x: Vec<f64>) -> Self {
        let diverged = self.diverged || x.iter().any(|v| !v.is_finite());
        Self {
            x,
            n: self.n + 1,
            h: self.h,
            diverged,
        }
    }
}

/// Projection `x -> min(1, R/|x|) x` with `R = theta d^(1/(2g+2)) h^(-1/(2g+2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionParams {
    theta: f64,
    gamma: f64,
    dim: usize,
    h: f64,
    radius: f64,
}

impl ProjectionParams {
    pub fn new(theta: f64, gamma: f64, dim: usize, h: f64) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "theta must be positive, got {theta}"
            )));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gamma must be positive, got {gamma}"
            )));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "projection radius undefined for h = {h}"
            )));
        }
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        let e = 1.0 / (2.0 * gamma + 2.0);
        let radius = theta * (dim as f64).powf(e) * h.powf(-e);
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "projection radius {radius} degenerate"
            )));
        }
        Ok(Self {
            theta,
            gamma,
            dim,
            h,
            radius,
        })
    }

    pub fn for_spec(spec: &PotentialSpec, theta: f64, h: f64) -> Result<Self> {
        let gamma = spec.constants().gamma();
        if gamma <= 0.0 {
            return Err(Error::MissingConstants(format!(
                "'{}' has no polynomial-growth exponent",
                spec.name()
            )));
        }
        Self::new(theta, gamma, spec.dim(), h)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn h(&self) -> f64 {
        self.h
    }

    #[inline]
    pub fn project_into(&self, x: &[f64], out: &mut [f64]) {
        let n = norm_sq(x).sqrt();
        if n <= self.radius {
            out.copy_from_slice(x);
        } else {
            let s = self.radius / n;
            for (o, v) in out.iter_mut().zip(x) {
                *o = s * v;
            }
        }
    }
}

pub fn project(x: &[f64], p: &ProjectionParams) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    p.project_into(x, &mut out);
    out
}

/// One sampler bound to a potential and a stepsize, with its scratch space.
#[derive(Debug)]
pub struct Kernel<'a> {
    kind: SamplerKind,
    spec: &'a PotentialSpec,
    h: f64,
    projection: Option<ProjectionParams>,
    grad: Vec<f64>,
    mid: Vec<f64>,
    proj: Vec<f64>,
    proj_mid: Vec<f64>,
}

impl<'a> Kernel<'a> {
    pub fn new(
        kind: SamplerKind,
        spec: &'a PotentialSpec,
        h: f64,
        projection: Option<ProjectionParams>,
    ) -> Result<Self> {
        if !(h >= 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "stepsize must be >= 0, got {h}"
            )));
        }
        if kind == SamplerKind::Prlmc {
            let p = projection.ok_or_else(|| {
                Error::InvalidParameter("pRLMC needs projection parameters".into())
            })?;
            if p.h != h {
                return Err(Error::InvalidParameter(format!(
                    "projection built for h = {} used with h = {h}",
                    p.h
                )));
            }
            if p.dim != spec.dim() {
                return Err(Error::DimensionMismatch {
                    expected: spec.dim(),
                    got: p.dim,
                });
            }
        }
        let d = spec.dim();
        Ok(Self {
            kind,
            spec,
            h,
            projection,
            grad: vec![0.0; d],
            mid: vec![0.0; d],
            proj: vec![0.0; d],
            proj_mid: vec![0.0; d],
        })
    }

    pub fn kind(&self) -> SamplerKind {
        self.kind
    }

    /// Advances `x` by one step. `dw_tau` and `tau` are ignored by LMC.
    #[inline]
    pub fn advance(&mut self, x: &mut [f64], tau: f64, dw_tau: &[f64], dw: &[f64]) {
        let h = self.h;
        match self.kind {
            SamplerKind::Lmc => {
                self.spec.grad_into(x, &mut self.grad);
                for ((xi, g), w) in x.iter_mut().zip(&self.grad).zip(dw) {
                    *xi = *xi - h * g + SQRT_2 * w;
                }
            }
            SamplerKind::Rlmc => {
                let th = tau * h;
                self.spec.grad_into(x, &mut self.grad);
                for (((m, xi), g), w) in self
                    .mid
                    .iter_mut()
                    .zip(x.iter())
                    .zip(&self.grad)
                    .zip(dw_tau)
                {
                    *m = xi - th * g + SQRT_2 * w;
                }
                self.spec.grad_into(&self.mid, &mut self.grad);
                for ((xi, g), w) in x.iter_mut().zip(&self.grad).zip(dw) {
                    *xi = *xi - h * g + SQRT_2 * w;
                }
            }
            SamplerKind::Prlmc => {
                let p = self.projection.expect("checked at construction");
                let th = tau * h;
                p.project_into(x, &mut self.proj);
                self.spec.grad_into(&self.proj, &mut self.grad);
                for (((m, xi), g), w) in self
                    .mid
                    .iter_mut()
                    .zip(x.iter())
                    .zip(&self.grad)
                    .zip(dw_tau)
                {
                    *m = xi - th * g + SQRT_2 * w;
                }
                p.project_into(&self.mid, &mut self.proj_mid);
                self.spec.grad_into(&self.proj_mid, &mut self.grad);
                for (((xi, px), g), w) in x.iter_mut().zip(&self.proj).zip(&self.grad).zip(dw) {
                    *xi = px - h * g + SQRT_2 * w;
                }
            }
        }
    }
}

fn check_len(spec: &PotentialSpec, v: &[f64]) -> Result<()> {
    if v.len() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: v.len(),
        });
    }
    Ok(())
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "tau = {tau} outside (0, 1)"
        )))
    }
}

/// `x' = x - grad U(x) h + sqrt(2) dW`.
pub fn lmc_step(spec: &PotentialSpec, state: &ChainState, dw: &[f64]) -> Result<ChainState> {
    check_len(spec, &state.x)?;
    check_len(spec, dw)?;
    let mut x = state.x.clone();
    Kernel::new(SamplerKind::Lmc, spec, state.h, None)?.advance(&mut x, 0.0, &[], dw);
    Ok(state.advanced(x))
}

/// Randomized step: gradient evaluated at the predictor
/// `x - grad U(x) tau h + sqrt(2) dW_tau`.
pub fn rlmc_step(
    spec: &PotentialSpec,
    state: &ChainState,
    tau: f64,
    dw_tau: &[f64],
    dw: &[f64],
) -> Result<ChainState> {
    check_len(spec, &state.x)?;
    check_len(spec, dw_tau)?;
    check_len(spec, dw)?;
    check_tau(tau)?;
    let mut x = state.x.clone();
    Kernel::new(SamplerKind::Rlmc, spec, state.h, None)?.advance(&mut x, tau, dw_tau, dw);
    Ok(state.advanced(x))
}

/// Randomized step with every gradient argument projected.
pub fn prlmc_step(
    spec: &PotentialSpec,
    state: &ChainState,
    tau: f64,
    dw_tau: &[f64],
    dw: &[f64],
    p: &ProjectionParams,
) -> Result<ChainState> {
    check_len(spec, &state.x)?;
    check_len(spec, dw_tau)?;
    check_len(spec, dw)?;
    check_tau(tau)?;
    let mut x = state.x.clone();
    Kernel::new(SamplerKind::Prlmc, spec, state.h, Some(*p))?.advance(&mut x, tau, dw_tau, dw);
    Ok(state.advanced(x))
}

/// Law of the initial point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialLaw {
    Zero,
    StandardGaussian,
    /// Every coordinate equal to the value.
    Constant(f64),
}

impl InitialLaw {
    pub fn sample(&self, seed: u64, sample_index: u64, dim: usize) -> Vec<f64> {
        match *self {
            Self::Zero => vec![0.0; dim],
            Self::Constant(v) => vec![v; dim],
            Self::StandardGaussian => {
                let mut x = vec![0.0; dim];
                StreamKey::new(seed, sample_index, Purpose::InitialState).fill_normals(0, &mut x);
                x
            }
        }
    }

    /// `E|x0|^2 / d`.
    pub fn sigma(&self) -> f64 {
        match *self {
            Self::Zero => 0.0,
            Self::StandardGaussian => 1.0,
            Self::Constant(v) => v * v,
        }
    }
}

impl fmt::Display for InitialLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "zero"),
            Self::StandardGaussian => write!(f, "gauss"),
            Self::Constant(v) => write!(f, "const:{v}"),
        }
    }
}

impl FromStr for InitialLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(Self::Zero),
            "gauss" => Ok(Self::StandardGaussian),
            _ => s
                .strip_prefix("const:")
                .and_then(|v| v.parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .map(Self::Constant)
                .ok_or_else(|| Error::InvalidParameter(format!("unknown initial law '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RecordPolicy {
    /// Every `ceil(n_steps / 100)` steps.
    #[default]
    Default,
    Every(u64),
    FinalOnly,
    Full,
}

impl RecordPolicy {
    fn stride(self, n_steps: u64) -> Option<u64> {
        match self {
            Self::Default => Some(n_steps.div_ceil(100).max(1)),
            Self::Every(k) => Some(k.max(1)),
            Self::Full => Some(1),
            Self::FinalOnly => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainOptions {
    pub record: RecordPolicy,
    pub blowup_threshold: f64,
    /// Skip the stepsize-cap check. Callers that force are expected to have
    /// warned once via [`check_stepsize`] rather than once per chain.
    pub force: bool,
    /// Projection scale for pRLMC.
    pub theta: f64,
    /// Smallest admissible number of fine steps per coarse step for the
    /// randomized schemes.
    pub min_substep_ratio: u64,
}

impl Default for ChainOptions {
    fn default() -> Self {
        Self {
            record: RecordPolicy::Default,
            blowup_threshold: 1e6,
            force: false,
            theta: 1.0,
            min_substep_ratio: MIN_SUBSTEP_RATIO,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub n: u64,
    pub t: f64,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub final_state: ChainState,
    pub snapshots: Vec<Snapshot>,
    /// Step at which `|x|` first exceeded the blow-up threshold.
    pub diverged_at: Option<u64>,
}

/// Checks the stepsize cap for `kind`; with `force` a violation only warns.
pub fn check_stepsize(kind: SamplerKind, spec: &PotentialSpec, h: f64, force: bool) -> Result<()> {
    let cap = stepsize_guard(kind, spec)?;
    if h > cap {
        if force {
            warn!(
                "{kind} on {} with h = {h} beyond the admissible cap {cap}",
                spec.name()
            );
        } else {
            return Err(Error::StepsizeGuard { h, cap });
        }
    }
    Ok(())
}

/// Runs `n_steps` of `kind` from `x0` on `path`, drawing `tau_{n+1}` for step
/// `n` from `taus`.
#[allow(clippy::too_many_arguments)]
pub fn run_chain(
    kind: SamplerKind,
    spec: &PotentialSpec,
    x0: &[f64],
    h: f64,
    n_steps: u64,
    path: &BrownianPath,
    taus: &TauStream,
    opts: &ChainOptions,
) -> Result<Trajectory> {
    check_len(spec, x0)?;
    if path.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: path.dim(),
        });
    }
    if !opts.force {
        check_stepsize(kind, spec, h, false)?;
    }
    let ratio = grid_ratio(h, path.h_ref())?;
    if kind.uses_tau() && ratio < opts.min_substep_ratio.max(2) {
        return Err(Error::QuantizationGuard {
            ratio,
            min: opts.min_substep_ratio.max(2),
        });
    }
    let needed = n_steps * ratio;
    if needed > path.n_fine() {
        return Err(Error::NoiseExhausted {
            needed,
            available: path.n_fine(),
        });
    }
    let projection = match kind {
        SamplerKind::Prlmc => Some(ProjectionParams::for_spec(spec, opts.theta, h)?),
        _ => None,
    };
    let mut kernel = Kernel::new(kind, spec, h, projection)?;
    let d = spec.dim();
    let mut x = x0.to_vec();
    let mut dw = vec![0.0; d];
    let mut dw_tau = vec![0.0; d];
    let stride = opts.record.stride(n_steps);
    let mut snapshots = Vec::new();
    if stride.is_some() {
        snapshots.push(Snapshot {
            n: 0,
            t: 0.0,
            x: x.clone(),
        });
    }
    let threshold_sq = opts.blowup_threshold * opts.blowup_threshold;
    let mut diverged_at = None;
    let mut steps_done = 0;
    for n in 0..n_steps {
        let tau = if kind.uses_tau() {
            let q = path.split_increment_into(n, ratio, taus.draw(n + 1), &mut dw_tau, &mut dw);
            q.tau
        } else {
            path.coarse_increment_into(n, ratio, &mut dw);
            0.0
        };
        kernel.advance(&mut x, tau, &dw_tau, &dw);
        steps_done = n + 1;
        let r2 = norm_sq(&x);
        if !(r2 <= threshold_sq) {
            diverged_at = Some(steps_done);
            break;
        }
        if let Some(k) = stride {
            if steps_done % k == 0 || steps_done == n_steps {
                snapshots.push(Snapshot {
                    n: steps_done,
                    t: steps_done as f64 * h,
                    x: x.clone(),
                });
            }
        }
    }
    let final_state = ChainState {
        x,
        n: steps_done,
        h,
        diverged: diverged_at.is_some(),
    };
    Ok(Trajectory {
        final_state,
        snapshots,
        diverged_at,
    })
}
