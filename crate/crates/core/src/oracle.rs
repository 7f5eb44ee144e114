//! Fine-grid reference solutions and coupled error estimation.
//!
//! The coarse scheme and the reference are driven by the same Brownian
//! path, so their difference isolates the discretization error. The
//! reference is Euler at `h_ref` for Lipschitz gradients and pRLMC at `h_ref`
//! for superlinear ones; in the latter case its intermediate points inside a
//! fine step come from a Brownian bridge on the same path.
//!
//! Samples are independent and processed in parallel; aggregation always
//! runs in ascending sample order, so results do not depend on the number
//! of worker threads.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::Z95;
use crate::noise::{dyadic_ratio, grid_ratio, BrownianPath, PathOptions, TauStream};
use crate::potential::{norm_sq, PotentialSpec, Regime};
use crate::samplers::{
    check_stepsize, run_chain, ChainOptions, InitialLaw, Kernel, ProjectionParams, RecordPolicy,
    SamplerKind,
};
use crate::theory::holder_constant;

/// Fine steps per coarse step in [`one_step_error`].
pub const ONE_STEP_REFINEMENT: u64 = 1024;

/// Minimum number of draws accepted by [`one_step_error`].
pub const ONE_STEP_MIN_SAMPLES: usize = 10_000;

/// Integrates the Langevin SDE at the path's fine resolution.
pub struct ReferenceSolver<'a> {
    kernel: Kernel<'a>,
    projected: bool,
    blowup_threshold: f64,
    dw: Vec<f64>,
    dw_tau: Vec<f64>,
}

impl<'a> ReferenceSolver<'a> {
    pub fn new(spec: &'a PotentialSpec, h_ref: f64, theta: f64) -> Result<Self> {
        let (kind, projection) = match spec.constants().regime {
            Regime::Lipschitz { .. } => (SamplerKind::Lmc, None),
            Regime::PolynomialGrowth { .. } => (
                SamplerKind::Prlmc,
                Some(ProjectionParams::for_spec(spec, theta, h_ref)?),
            ),
        };
        let d = spec.dim();
        Ok(Self {
            kernel: Kernel::new(kind, spec, h_ref, projection)?,
            projected: projection.is_some(),
            blowup_threshold: 1e6,
            dw: vec![0.0; d],
            dw_tau: vec![0.0; d],
        })
    }

    /// Advances `x` over fine steps `start..end` of `path`.
    pub fn advance(
        &mut self,
        path: &BrownianPath,
        x: &mut [f64],
        start: u64,
        end: u64,
    ) -> Result<()> {
        if end > path.n_fine() {
            return Err(Error::NoiseExhausted {
                needed: end,
                available: path.n_fine(),
            });
        }
        let key = path.key();
        let taus = TauStream::reference(key.seed, key.sample_index);
        let limit = self.blowup_threshold * self.blowup_threshold;
        for k in start..end {
            path.coarse_increment_into(k, 1, &mut self.dw);
            let tau = if self.projected {
                let tau = taus.draw(k + 1);
                path.bridge_point_into(k, tau, &self.dw, &mut self.dw_tau);
                tau
            } else {
                0.0
            };
            self.kernel.advance(x, tau, &self.dw_tau, &self.dw);
            if !(norm_sq(x) <= limit) {
                return Err(Error::ReferenceDiverged {
                    sample_index: key.sample_index,
                });
            }
        }
        Ok(())
    }
}

/// Reference endpoint `X_T` started from `x0` on `path`.
pub fn reference_solve(
    spec: &PotentialSpec,
    path: &BrownianPath,
    x0: &[f64],
    horizon: f64,
) -> Result<Vec<f64>> {
    if x0.len() != spec.dim() || path.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: if x0.len() != spec.dim() {
                x0.len()
            } else {
                path.dim()
            },
        });
    }
    let steps = grid_ratio(horizon, path.h_ref())?;
    let mut x = x0.to_vec();
    ReferenceSolver::new(spec, path.h_ref(), 1.0)?.advance(path, &mut x, 0, steps)?;
    Ok(x)
}

/// Configuration shared by every stepsize of a coupled error study.
#[derive(Debug, Clone)]
pub struct CoupledSetup {
    pub kind: SamplerKind,
    pub spec: PotentialSpec,
    pub h_ref: f64,
    pub horizon: f64,
    pub samples: usize,
    pub seed: u64,
    pub x0: InitialLaw,
    pub theta: f64,
    pub force: bool,
    pub path_options: PathOptions,
}

impl CoupledSetup {
    pub fn new(
        kind: SamplerKind,
        spec: PotentialSpec,
        h_ref: f64,
        horizon: f64,
        samples: usize,
        seed: u64,
    ) -> Self {
        Self {
            kind,
            spec,
            h_ref,
            horizon,
            samples,
            seed,
            x0: InitialLaw::Zero,
            theta: 1.0,
            force: false,
            path_options: PathOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoupledErrorEstimate {
    pub kind: SamplerKind,
    pub h: f64,
    pub h_ref: f64,
    pub horizon: f64,
    pub dim: usize,
    /// Samples entering the estimate (diverged coarse chains excluded).
    pub samples: usize,
    pub mse: f64,
    pub ci_half_width: f64,
    pub weak_bias: f64,
    pub weak_ci: f64,
    pub diverged: usize,
}

impl CoupledErrorEstimate {
    pub fn rmse(&self) -> f64 {
        self.mse.sqrt()
    }
}

/// Mean of `|d|^2` and of `d` over difference vectors.
struct DiffSummary {
    count: usize,
    mse: f64,
    mse_ci: f64,
    bias: f64,
    bias_ci: f64,
}

fn summarize<'v>(diffs: impl Iterator<Item = &'v [f64]> + Clone, dim: usize) -> DiffSummary {
    let count = diffs.clone().count();
    if count == 0 {
        return DiffSummary {
            count,
            mse: f64::NAN,
            mse_ci: f64::NAN,
            bias: f64::NAN,
            bias_ci: f64::NAN,
        };
    }
    let m = count as f64;
    let mut mean = vec![0.0; dim];
    let mut mse = 0.0;
    for d in diffs.clone() {
        mse += norm_sq(d);
        for (a, v) in mean.iter_mut().zip(d) {
            *a += v;
        }
    }
    mse /= m;
    for a in mean.iter_mut() {
        *a /= m;
    }
    let (mut var_sq, mut var_sum) = (0.0, 0.0);
    for d in diffs {
        let e = norm_sq(d) - mse;
        var_sq += e * e;
        var_sum += d
            .iter()
            .zip(&mean)
            .map(|(v, a)| (v - a) * (v - a))
            .sum::<f64>();
    }
    let denom = (m - 1.0).max(1.0);
    DiffSummary {
        count,
        mse,
        mse_ci: Z95 * (var_sq / denom / m).sqrt(),
        bias: norm_sq(&mean).sqrt(),
        bias_ci: Z95 * (var_sum / denom / m).sqrt(),
    }
}

/// Coupled strong and weak error of `setup.kind` at stepsize `h`.
pub fn coupled_error(setup: &CoupledSetup, h: f64) -> Result<CoupledErrorEstimate> {
    Ok(coupled_error_ladder(setup, &[h])?.remove(0))
}

/// [`coupled_error`] for several stepsizes, sharing one path and one
/// reference solution per sample across the whole ladder.
pub fn coupled_error_ladder(
    setup: &CoupledSetup,
    h_list: &[f64],
) -> Result<Vec<CoupledErrorEstimate>> {
    if h_list.is_empty() {
        return Err(Error::EmptyInput);
    }
    if setup.samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let spec = &setup.spec;
    let d = spec.dim();
    let mut steps = Vec::with_capacity(h_list.len());
    for &h in h_list {
        dyadic_ratio(h, setup.h_ref)?;
        steps.push(grid_ratio(setup.horizon, h)?);
        check_stepsize(setup.kind, spec, h, setup.force)?;
    }
    let chain_opts = ChainOptions {
        record: RecordPolicy::FinalOnly,
        force: true,
        theta: setup.theta,
        ..ChainOptions::default()
    };

    let per_sample: Vec<Vec<Option<Vec<f64>>>> = (0..setup.samples as u64)
        .into_par_iter()
        .map(|i| -> Result<Vec<Option<Vec<f64>>>> {
            let path = BrownianPath::new(
                setup.seed,
                i,
                d,
                setup.horizon,
                setup.h_ref,
                &setup.path_options,
            )?;
            let x0 = setup.x0.sample(setup.seed, i, d);
            let mut reference = x0.clone();
            ReferenceSolver::new(spec, setup.h_ref, setup.theta)?.advance(
                &path,
                &mut reference,
                0,
                path.n_fine(),
            )?;
            let taus = TauStream::new(setup.seed, i);
            h_list
                .iter()
                .zip(&steps)
                .map(|(&h, &n)| {
                    let t = run_chain(setup.kind, spec, &x0, h, n, &path, &taus, &chain_opts)?;
                    Ok(if t.final_state.diverged {
                        None
                    } else {
                        Some(
                            reference
                                .iter()
                                .zip(&t.final_state.x)
                                .map(|(a, b)| a - b)
                                .collect(),
                        )
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    Ok(h_list
        .iter()
        .enumerate()
        .map(|(j, &h)| {
            let diffs = per_sample.iter().filter_map(|s| s[j].as_deref());
            let s = summarize(diffs, d);
            CoupledErrorEstimate {
                kind: setup.kind,
                h,
                h_ref: setup.h_ref,
                horizon: setup.horizon,
                dim: d,
                samples: s.count,
                mse: s.mse,
                ci_half_width: s.mse_ci,
                weak_bias: s.bias,
                weak_ci: s.bias_ci,
                diverged: setup.samples - s.count,
            }
        })
        .collect())
}

/// Strong and weak error of a single step from a fixed point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneStepEstimate {
    pub h: f64,
    pub samples: usize,
    /// `(E|X - Y|^2)^(1/2)`.
    pub strong_rms: f64,
    pub strong_ci: f64,
    /// `|E[X - Y]|`.
    pub weak_bias: f64,
    pub weak_ci: f64,
}

/// One-step errors of `kind` started at `x`, against a reference at
/// `h / 1024` on the same path.
///
/// Draws come in antithetic quadruples `(W, tau)`, `(-W, tau)`,
/// `(W, 1 - tau)`, `(-W, 1 - tau)`; `samples` is rounded up to a multiple of
/// four and confidence intervals are computed from quadruple averages.
pub fn one_step_error(
    kind: SamplerKind,
    spec: &PotentialSpec,
    x: &[f64],
    h: f64,
    samples: usize,
    seed: u64,
) -> Result<OneStepEstimate> {
    if samples < ONE_STEP_MIN_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "one-step estimates need at least {ONE_STEP_MIN_SAMPLES} draws, got {samples}"
        )));
    }
    if x.len() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: x.len(),
        });
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "stepsize must be positive, got {h}"
        )));
    }
    let d = spec.dim();
    let h_ref = h / ONE_STEP_REFINEMENT as f64;
    let ratio = ONE_STEP_REFINEMENT;
    let projection = match kind {
        SamplerKind::Prlmc => Some(ProjectionParams::for_spec(spec, 1.0, h)?),
        _ => None,
    };
    let groups = samples.div_ceil(4);

    // (group mean of |d|^2, group mean of d)
    let per_group: Vec<(f64, Vec<f64>)> = (0..groups as u64)
        .into_par_iter()
        .map(|g| -> Result<(f64, Vec<f64>)> {
            let base = BrownianPath::new(seed, g, d, h, h_ref, &PathOptions::default())?;
            let tau = TauStream::new(seed, g).draw(1);
            let mut kernel = Kernel::new(kind, spec, h, projection)?;
            let mut solver = ReferenceSolver::new(spec, h_ref, 1.0)?;
            let mut dw = vec![0.0; d];
            let mut dw_tau = vec![0.0; d];
            let mut sq = 0.0;
            let mut mean = vec![0.0; d];
            for path in [base.clone(), base.mirrored()] {
                let mut reference = x.to_vec();
                solver.advance(&path, &mut reference, 0, ratio)?;
                for t in [tau, 1.0 - tau] {
                    let mut y = x.to_vec();
                    let q = path.split_increment_into(0, ratio, t, &mut dw_tau, &mut dw);
                    kernel.advance(&mut y, q.tau, &dw_tau, &dw);
                    for ((m, r), v) in mean.iter_mut().zip(&reference).zip(&y) {
                        let e = r - v;
                        sq += e * e;
                        *m += e;
                    }
                }
            }
            for m in mean.iter_mut() {
                *m /= 4.0;
            }
            Ok((sq / 4.0, mean))
        })
        .collect::<Result<_>>()?;

    let g = groups as f64;
    let ms = per_group.iter().map(|p| p.0).sum::<f64>() / g;
    let mut mean = vec![0.0; d];
    for (_, m) in &per_group {
        for (a, v) in mean.iter_mut().zip(m) {
            *a += v / g;
        }
    }
    let denom = (g - 1.0).max(1.0);
    let var_ms = per_group
        .iter()
        .map(|p| (p.0 - ms) * (p.0 - ms))
        .sum::<f64>()
        / denom;
    let var_mean = per_group
        .iter()
        .map(|(_, m)| {
            m.iter()
                .zip(&mean)
                .map(|(v, a)| (v - a) * (v - a))
                .sum::<f64>()
        })
        .sum::<f64>()
        / denom;
    let strong_rms = ms.sqrt();
    let ms_ci = Z95 * (var_ms / g).sqrt();
    Ok(OneStepEstimate {
        h,
        samples: 4 * groups,
        strong_rms,
        strong_ci: if strong_rms > 0.0 {
            ms_ci / (2.0 * strong_rms)
        } else {
            0.0
        },
        weak_bias: norm_sq(&mean).sqrt(),
        weak_ci: Z95 * (var_mean / g).sqrt(),
    })
}

/// One row of [`holder_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderRow {
    pub theta: f64,
    pub mean_sq: f64,
    pub ci: f64,
    /// `C theta` with the explicit constant; `None` outside the Lipschitz regime.
    pub bound: Option<f64>,
}

/// Empirical `E|X_{T+theta} - X_T|^2` of the reference solution started at `x0`.
pub fn holder_check(
    spec: &PotentialSpec,
    thetas: &[f64],
    horizon: f64,
    h_ref: f64,
    samples: usize,
    seed: u64,
    x0: &[f64],
) -> Result<Vec<HolderRow>> {
    if samples < 2 {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    if x0.len() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: x0.len(),
        });
    }
    let d = spec.dim();
    let start = grid_ratio(horizon, h_ref)?;
    let offsets = thetas
        .iter()
        .map(|&t| {
            if t == 0.0 {
                Ok(0)
            } else {
                grid_ratio(t, h_ref)
            }
        })
        .collect::<Result<Vec<u64>>>()?;
    let last = offsets.iter().copied().max().unwrap_or(0);
    let span = (start + last) as f64 * h_ref;
    let c = match spec.constants().regime {
        Regime::Lipschitz { .. } => Some(holder_constant(spec.constants(), d, norm_sq(x0))?),
        Regime::PolynomialGrowth { .. } => None,
    };

    let mut order: Vec<usize> = (0..offsets.len()).collect();
    order.sort_by_key(|&i| offsets[i]);
    let per_sample: Vec<Vec<f64>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| -> Result<Vec<f64>> {
            let path = BrownianPath::new(seed, i, d, span, h_ref, &PathOptions::default())?;
            let mut solver = ReferenceSolver::new(spec, h_ref, 1.0)?;
            let mut x = x0.to_vec();
            solver.advance(&path, &mut x, 0, start)?;
            let anchor = x.clone();
            let mut out = vec![0.0; offsets.len()];
            let mut at = start;
            for &j in &order {
                solver.advance(&path, &mut x, at, start + offsets[j])?;
                at = start + offsets[j];
                out[j] = x.iter().zip(&anchor).map(|(a, b)| (a - b) * (a - b)).sum();
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    Ok(thetas
        .iter()
        .enumerate()
        .map(|(j, &theta)| {
            let col: Vec<f64> = per_sample.iter().map(|r| r[j]).collect();
            let s = crate::metrics::MeanCi::from_slice(&col).expect("samples >= 2");
            HolderRow {
                theta,
                mean_sq: s.mean,
                ci: s.ci,
                bound: c.map(|c| c * theta),
            }
        })
        .collect())
}
