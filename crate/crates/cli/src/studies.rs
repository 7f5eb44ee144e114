//! The five studies. Each validates its inputs, simulates, then writes its
//! tables; nothing is written when validation fails.

use std::fmt;
use std::io;

use log::{info, warn};
use rayon::prelude::*;

use langevin_core::metrics::{fit_order, second_moment_trace, OrderFit};
use langevin_core::noise::{grid_ratio, BrownianPath, PathOptions, TauStream};
use langevin_core::oracle::{coupled_error_ladder, one_step_error, CoupledSetup};
use langevin_core::potential::{norm_sq, PotentialSpec, Regime};
use langevin_core::samplers::check_stepsize;
use langevin_core::theory::{
    m2, main_bound, mixing_time, prlmc_second_moment_cap, stepsize_guard, TheoryConstants,
    TheoryInputs,
};
use langevin_core::{run_chain, ChainOptions, Error, RecordPolicy, SamplerKind, Trajectory};

use crate::config::{ExperimentConfig, Study};
use crate::output::{num, Sink, Table};

#[derive(Debug)]
pub enum StudyError {
    Core(Error),
    Io(io::Error),
    /// The study ran and wrote its output but a checked threshold failed.
    Threshold(String),
}

impl fmt::Display for StudyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Core(e) => write!(f, "{e}"),
            Self::Io(e) => write!(f, "i/o error: {e}"),
            Self::Threshold(s) => write!(f, "threshold not met: {s}"),
        }
    }
}

impl std::error::Error for StudyError {}

impl From<Error> for StudyError {
    fn from(e: Error) -> Self {
        Self::Core(e)
    }
}

impl From<io::Error> for StudyError {
    fn from(e: io::Error) -> Self {
        Self::Io(e)
    }
}

pub type StudyResult = Result<(), StudyError>;

pub fn run_study(cfg: &ExperimentConfig) -> StudyResult {
    let sink = Sink::new(
        cfg.out.clone(),
        format!(
            "langevin-bench {} {}",
            env!("CARGO_PKG_VERSION"),
            cfg.describe()
        ),
    );
    match cfg.study {
        Study::Converge => run_converge(cfg, &sink),
        Study::Moments => run_moments(cfg, &sink),
        Study::Stability => run_stability(cfg, &sink),
        Study::Onestep => run_onestep(cfg, &sink),
        Study::Constants => run_constants(cfg, &sink),
    }
}

fn build_spec(cfg: &ExperimentConfig) -> Result<PotentialSpec, Error> {
    let spec = cfg.potential.build(cfg.dim)?;
    match cfg.rho {
        Some(rho) => spec.with_lsi_rho(rho),
        None => Ok(spec),
    }
}

fn fit_row(quantity: &str, fit: &OrderFit) -> Vec<String> {
    vec![
        quantity.to_string(),
        num(fit.slope),
        num(fit.intercept),
        num(fit.r2),
    ]
}

/// Fits when there are enough strictly positive points; logs why not otherwise.
fn try_fit(quantity: &str, points: &[(f64, f64)]) -> Option<OrderFit> {
    match fit_order(points) {
        Ok(f) => {
            info!(
                "{quantity}: slope={} intercept={} r2={}",
                f.slope, f.intercept, f.r2
            );
            Some(f)
        }
        Err(e) => {
            warn!("{quantity}: no order fit ({e})");
            None
        }
    }
}

pub fn run_converge(cfg: &ExperimentConfig, sink: &Sink) -> StudyResult {
    let spec = build_spec(cfg)?;
    let setup = CoupledSetup {
        x0: cfg.x0,
        theta: cfg.theta,
        force: cfg.force,
        ..CoupledSetup::new(
            cfg.sampler,
            spec,
            cfg.h_ref,
            cfg.horizon,
            cfg.samples,
            cfg.seed,
        )
    };
    // All grid and guard checks happen before the first path is drawn.
    let rows = coupled_error_ladder(&setup, &cfg.h_list)?;
    let mut table = Table::new(&[
        "kind",
        "h",
        "href",
        "T",
        "d",
        "M",
        "mse",
        "ci",
        "weak_bias",
        "weak_ci",
        "diverged",
    ]);
    for r in &rows {
        table.push(vec![
            r.kind.to_string(),
            num(r.h),
            num(r.h_ref),
            num(r.horizon),
            r.dim.to_string(),
            r.samples.to_string(),
            num(r.mse),
            num(r.ci_half_width),
            num(r.weak_bias),
            num(r.weak_ci),
            r.diverged.to_string(),
        ]);
    }
    sink.primary(&table)?;

    // Reference and scheme sum the same increments in a different order, so
    // a vanishing error shows up as round-off rather than an exact zero.
    let roundoff = 1e-12 * (2.0 * cfg.dim as f64 * cfg.horizon).sqrt().max(1.0);
    let points: Vec<_> = rows
        .iter()
        .map(|r| (r.h, if r.rmse() <= roundoff { 0.0 } else { r.rmse() }))
        .collect();
    let fit = try_fit("rmse", &points);
    if let Some(f) = &fit {
        let mut t = Table::new(&["quantity", "slope", "intercept", "r2"]);
        t.push(fit_row("rmse", f));
        sink.secondary("fit", &t)?;
    }
    if let Some((lo, hi)) = cfg.expect_slope {
        match &fit {
            Some(f) if (lo..=hi).contains(&f.slope) => {}
            Some(f) => {
                return Err(StudyError::Threshold(format!(
                    "slope {} outside [{lo}, {hi}]",
                    f.slope
                )))
            }
            None => return Err(StudyError::Threshold("no slope could be fitted".into())),
        }
    }
    Ok(())
}

fn run_chains(
    kind: SamplerKind,
    spec: &PotentialSpec,
    cfg: &ExperimentConfig,
    n_steps: u64,
    opts: &ChainOptions,
) -> Result<Vec<Trajectory>, Error> {
    let d = spec.dim();
    (0..cfg.samples as u64)
        .into_par_iter()
        .map(|i| {
            let path = BrownianPath::new(
                cfg.seed,
                i,
                d,
                cfg.horizon,
                cfg.h_ref,
                &PathOptions::default(),
            )?;
            let x0 = cfg.x0.sample(cfg.seed, i, d);
            run_chain(
                kind,
                spec,
                &x0,
                cfg.h,
                n_steps,
                &path,
                &TauStream::new(cfg.seed, i),
                opts,
            )
        })
        .collect()
}

/// `e^{-mu t} E|x0|^2 + M2 d` in the Lipschitz regime; the a-priori pRLMC cap
/// in the polynomial regime (from the first step on).
/// Bound on `E|X_n|^2` as a function of `(n, t)`.
type MomentBound = Box<dyn Fn(u64, f64) -> f64>;

fn moment_bound(
    cfg: &ExperimentConfig,
    spec: &PotentialSpec,
) -> Result<Option<MomentBound>, Error> {
    let c = *spec.constants();
    let d = cfg.dim as f64;
    let start = cfg.x0.sigma() * d;
    Ok(match (c.regime, cfg.sampler) {
        (Regime::Lipschitz { l1_prime, .. }, SamplerKind::Lmc | SamplerKind::Rlmc) => {
            let tail = m2(c.mu, c.mu_prime, l1_prime, cfg.h) * d;
            Some(Box::new(move |_, t| (-c.mu * t).exp() * start + tail))
        }
        (Regime::PolynomialGrowth { .. }, SamplerKind::Prlmc) => {
            let cap = prlmc_second_moment_cap(&c, cfg.dim, cfg.h, cfg.theta)?;
            Some(Box::new(move |n, _| if n == 0 { start } else { cap }))
        }
        _ => None,
    })
}

pub fn run_moments(cfg: &ExperimentConfig, sink: &Sink) -> StudyResult {
    let spec = build_spec(cfg)?;
    check_stepsize(cfg.sampler, &spec, cfg.h, cfg.force)?;
    let n_steps = grid_ratio(cfg.horizon, cfg.h)?;
    let bound = moment_bound(cfg, &spec)?;
    let opts = ChainOptions {
        record: RecordPolicy::Default,
        force: true,
        theta: cfg.theta,
        ..ChainOptions::default()
    };
    let runs = run_chains(cfg.sampler, &spec, cfg, n_steps, &opts)?;
    let kept: Vec<_> = runs
        .iter()
        .filter(|t| !t.final_state.diverged)
        .map(|t| &t.snapshots)
        .collect();
    let diverged = runs.len() - kept.len();
    if diverged > 0 {
        warn!(
            "{diverged} of {} chains diverged and are excluded from the trace",
            runs.len()
        );
    }
    if kept.len() < 2 {
        return Err(Error::InvalidParameter("fewer than two chains survived".into()).into());
    }
    let trace = second_moment_trace(&kept)?;
    let mut table = Table::new(&["t", "mean_sq", "ci", "bound"]);
    let mut violations = 0;
    for p in &trace {
        let b = bound.as_ref().map(|f| f(p.n, p.t));
        if let Some(b) = b {
            violations += usize::from(p.mean_sq - p.ci > b);
        }
        table.push(vec![
            num(p.t),
            num(p.mean_sq),
            num(p.ci),
            b.map(num).unwrap_or_default(),
        ]);
    }
    sink.primary(&table)?;
    if bound.is_none() {
        warn!(
            "no closed-form moment bound for {} on {}",
            cfg.sampler,
            spec.name()
        );
    }
    if violations > 0 {
        return Err(StudyError::Threshold(format!(
            "moment bound exceeded at {violations} recorded times"
        )));
    }
    if diverged > 0 {
        return Err(StudyError::Threshold(format!("{diverged} chains diverged")));
    }
    Ok(())
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Per-step diverged fraction and median `|Y_n|` (diverged chains count as
/// `inf` from the step they crossed the threshold).
fn divergence_profile(runs: &[Trajectory], n: u64) -> (f64, f64) {
    let norms: Vec<f64> = runs
        .iter()
        .map(|t| match t.diverged_at {
            Some(k) if n >= k => f64::INFINITY,
            _ => norm_sq(&t.snapshots[n as usize].x).sqrt(),
        })
        .collect();
    let frac = norms.iter().filter(|v| v.is_infinite()).count() as f64 / runs.len() as f64;
    (frac, median(norms))
}

pub fn run_stability(cfg: &ExperimentConfig, sink: &Sink) -> StudyResult {
    let spec = build_spec(cfg)?;
    let n_steps = grid_ratio(cfg.horizon, cfg.h)?;
    // The point of the study is to run past the guard; say so once.
    for kind in [SamplerKind::Lmc, SamplerKind::Prlmc] {
        if let Err(e) = check_stepsize(kind, &spec, cfg.h, false) {
            warn!("{kind}: {e}; running anyway");
        }
    }
    let opts = ChainOptions {
        record: RecordPolicy::Full,
        force: true,
        theta: cfg.theta,
        ..ChainOptions::default()
    };
    let lmc = run_chains(SamplerKind::Lmc, &spec, cfg, n_steps, &opts)?;
    let prlmc = run_chains(SamplerKind::Prlmc, &spec, cfg, n_steps, &opts)?;
    let mut table = Table::new(&[
        "n",
        "t",
        "lmc_diverged",
        "prlmc_diverged",
        "lmc_median_norm",
        "prlmc_median_norm",
    ]);
    for n in 0..=n_steps {
        let (lf, lm) = divergence_profile(&lmc, n);
        let (pf, pm) = divergence_profile(&prlmc, n);
        table.push(vec![
            n.to_string(),
            num(n as f64 * cfg.h),
            num(lf),
            num(pf),
            num(lm),
            num(pm),
        ]);
    }
    sink.primary(&table)?;
    let count = |r: &[Trajectory]| r.iter().filter(|t| t.final_state.diverged).count();
    info!(
        "diverged: lmc {}/{}, prlmc {}/{}",
        count(&lmc),
        lmc.len(),
        count(&prlmc),
        prlmc.len()
    );
    Ok(())
}

pub fn run_onestep(cfg: &ExperimentConfig, sink: &Sink) -> StudyResult {
    let spec = build_spec(cfg)?;
    let x = cfg.x0.sample(cfg.seed, 0, cfg.dim);
    for &h in &cfg.h_list {
        check_stepsize(cfg.sampler, &spec, h, cfg.force)?;
    }
    let mut table = Table::new(&["h", "M", "strong", "strong_ci", "weak", "weak_ci"]);
    let mut strong = Vec::new();
    let mut weak = Vec::new();
    for &h in &cfg.h_list {
        let e = one_step_error(cfg.sampler, &spec, &x, h, cfg.samples, cfg.seed)?;
        table.push(vec![
            num(h),
            e.samples.to_string(),
            num(e.strong_rms),
            num(e.strong_ci),
            num(e.weak_bias),
            num(e.weak_ci),
        ]);
        strong.push((h, e.strong_rms));
        weak.push((h, e.weak_bias));
    }
    sink.primary(&table)?;
    let mut fits = Table::new(&["quantity", "slope", "intercept", "r2"]);
    for (name, pts) in [("strong", &strong), ("weak", &weak)] {
        if let Some(f) = try_fit(name, pts) {
            fits.push(fit_row(name, &f));
        }
    }
    if !fits.rows.is_empty() {
        sink.secondary("fit", &fits)?;
    }
    Ok(())
}

/// `(name, value)` rows of the constants table.
pub fn constants_rows(cfg: &ExperimentConfig) -> Result<Vec<(String, f64)>, Error> {
    let spec = build_spec(cfg)?;
    let mut rows = Vec::new();
    for kind in [SamplerKind::Lmc, SamplerKind::Rlmc, SamplerKind::Prlmc] {
        match stepsize_guard(kind, &spec) {
            Ok(cap) => rows.push((format!("guard_{kind}"), cap)),
            Err(e) => info!("no stepsize guard for {kind}: {e}"),
        }
    }
    let k = TheoryConstants::rlmc(
        spec.constants(),
        TheoryInputs {
            h: cfg.h,
            sigma: cfg.x0.sigma(),
            c: None,
        },
    )?;
    rows.extend(k.rows().into_iter().map(|(n, v)| (n.to_string(), v)));
    let n = (cfg.horizon / cfg.h).ceil().max(1.0) as u64;
    let b = main_bound(cfg.dim, cfg.h, n, &k)?;
    rows.push(("main_bound_n".into(), n as f64));
    rows.push(("main_bound_discretization".into(), b.discretization));
    rows.push(("main_bound_contraction".into(), b.contraction));
    rows.push(("main_bound_total".into(), b.total));
    for &eps in &cfg.eps {
        let m = mixing_time(eps, cfg.dim, &k)?;
        rows.push((format!("mixing_h[eps={eps}]"), m.h));
        rows.push((format!("mixing_iterations[eps={eps}]"), m.iterations));
    }
    Ok(rows)
}

pub fn run_constants(cfg: &ExperimentConfig, sink: &Sink) -> StudyResult {
    let rows = constants_rows(cfg)?;
    let mut table = Table::new(&["name", "value"]);
    for (n, v) in &rows {
        table.push(vec![n.clone(), num(*v)]);
    }
    sink.primary(&table)?;
    if !sink.to_stdout() {
        let width = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0);
        for (n, v) in &rows {
            println!("{n:<width$}  {v}");
        }
    }
    Ok(())
}
