//! Experiment configuration: command-line flags layered over an optional
//! `key = value` file, layered over per-study defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};

use langevin_core::noise::dyadic_ratio;
use langevin_core::{InitialLaw, PotentialChoice, SamplerKind};

/// Seed fallback when neither a flag nor the config file sets one.
pub const SEED_ENV: &str = "LANGEVIN_BENCH_SEED";
pub const DEFAULT_SEED: u64 = 20240601;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Study {
    Converge,
    Moments,
    Stability,
    Onestep,
    Constants,
}

impl Study {
    pub fn name(self) -> &'static str {
        match self {
            Self::Converge => "converge",
            Self::Moments => "moments",
            Self::Stability => "stability",
            Self::Onestep => "onestep",
            Self::Constants => "constants",
        }
    }
}

/// Raw flags as typed on the command line. Values stay strings until they
/// are merged with the config file so both sources share one parser.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// `key = value` file; flags given on the command line override it.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// gaussian | double_well{alpha=..,beta=..} | gaussian_mixture{a_norm=..} | zero
    #[arg(long)]
    pub potential: Option<String>,
    /// lmc | rlmc | prlmc
    #[arg(long)]
    pub sampler: Option<String>,
    /// Dimension.
    #[arg(long = "d")]
    pub dim: Option<String>,
    /// Time horizon.
    #[arg(long = "T")]
    pub horizon: Option<String>,
    /// Single stepsize (accepts `2^-k`).
    #[arg(long)]
    pub h: Option<String>,
    /// Comma-separated, strictly decreasing stepsizes.
    #[arg(long = "h-list")]
    pub h_list: Option<String>,
    /// Fine grid of the Brownian paths.
    #[arg(long)]
    pub href: Option<String>,
    /// Number of independent samples / chains.
    #[arg(long)]
    pub samples: Option<String>,
    /// Master seed (falls back to LANGEVIN_BENCH_SEED).
    #[arg(long)]
    pub seed: Option<String>,
    /// Projection scale of pRLMC.
    #[arg(long)]
    pub theta: Option<String>,
    /// Initial law: zero | gauss | const:<v>
    #[arg(long)]
    pub x0: Option<String>,
    /// Output CSV path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Run even beyond the theoretical stepsize cap.
    #[arg(long)]
    pub force: bool,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    pub jobs: Option<String>,
    /// Log-Sobolev constant for potentials that do not declare one.
    #[arg(long)]
    pub rho: Option<String>,
    /// Comma-separated accuracies for the mixing-time table.
    #[arg(long)]
    pub eps: Option<String>,
    /// `lo:hi`; converge exits with status 1 when the fitted slope is outside.
    #[arg(long = "expect-slope")]
    pub expect_slope: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Fully resolved configuration of one study.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub study: Study,
    pub potential: PotentialChoice,
    pub sampler: SamplerKind,
    pub dim: usize,
    pub horizon: f64,
    pub h: f64,
    pub h_list: Vec<f64>,
    pub h_ref: f64,
    pub samples: usize,
    pub seed: u64,
    pub theta: f64,
    pub x0: InitialLaw,
    pub out: Option<PathBuf>,
    pub force: bool,
    pub jobs: usize,
    pub rho: Option<f64>,
    pub eps: Vec<f64>,
    pub expect_slope: Option<(f64, f64)>,
}

const KEYS: &[&str] = &[
    "potential",
    "sampler",
    "d",
    "T",
    "h",
    "h-list",
    "href",
    "samples",
    "seed",
    "theta",
    "x0",
    "out",
    "force",
    "jobs",
    "rho",
    "eps",
    "expect-slope",
];

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return err(format!("line {}: expected key = value", i + 1));
        };
        let (k, v) = (k.trim().trim_start_matches("--"), v.trim());
        if !KEYS.contains(&k) {
            return err(format!("line {}: unknown key '{k}'", i + 1));
        }
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return err(format!("line {}: duplicate key '{k}'", i + 1));
        }
    }
    Ok(map)
}

/// Reads `2^-k`, `2^k` or a plain decimal.
pub fn parse_real(s: &str) -> Result<f64, ConfigError> {
    let s = s.trim();
    let v = match s.strip_prefix("2^") {
        Some(e) => e.parse::<i32>().map(|e| 2f64.powi(e)).ok(),
        None => s.parse::<f64>().ok(),
    };
    match v {
        Some(v) if v.is_finite() => Ok(v),
        _ => err(format!("'{s}' is not a finite number")),
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>, ConfigError> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(parse_real)
        .collect()
}

fn parse_int<T: FromStr>(key: &str, s: &str) -> Result<T, ConfigError> {
    s.trim()
        .parse()
        .map_err(|_| ConfigError(format!("--{key}: '{s}' is not a valid integer")))
}

fn parse_bool(s: &str) -> Result<bool, ConfigError> {
    match s.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => err(format!("--force: '{other}' is not a boolean")),
    }
}

struct Defaults {
    potential: PotentialChoice,
    sampler: SamplerKind,
    dim: usize,
    horizon: f64,
    h: f64,
    h_list: Vec<f64>,
    h_ref: Option<f64>,
    samples: usize,
    x0: InitialLaw,
}

fn ladder(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|k| 2f64.powi(-k)).collect()
}

fn defaults(study: Study) -> Defaults {
    match study {
        Study::Converge => Defaults {
            potential: PotentialChoice::GaussianMixture { a_norm: 2.0 },
            sampler: SamplerKind::Rlmc,
            dim: 10,
            horizon: 5.0,
            h: 2f64.powi(-4),
            h_list: ladder(4, 8),
            h_ref: Some(2f64.powi(-12)),
            samples: 2000,
            x0: InitialLaw::Zero,
        },
        Study::Moments => Defaults {
            potential: PotentialChoice::Gaussian,
            sampler: SamplerKind::Rlmc,
            dim: 10,
            horizon: 50.0,
            h: 0.04,
            h_list: vec![0.04],
            h_ref: None,
            samples: 2000,
            x0: InitialLaw::Zero,
        },
        Study::Stability => Defaults {
            potential: PotentialChoice::DoubleWell {
                alpha: 1.0,
                beta: 1.0,
            },
            sampler: SamplerKind::Prlmc,
            dim: 2,
            horizon: 50.0,
            h: 0.5,
            h_list: vec![0.5],
            h_ref: None,
            samples: 200,
            x0: InitialLaw::Constant(10.0),
        },
        Study::Onestep => Defaults {
            potential: PotentialChoice::Gaussian,
            sampler: SamplerKind::Rlmc,
            dim: 2,
            horizon: 0.0,
            h: 2f64.powi(-5),
            h_list: ladder(5, 9),
            h_ref: None,
            samples: 200_000,
            x0: InitialLaw::Constant(1.0),
        },
        Study::Constants => Defaults {
            potential: PotentialChoice::Gaussian,
            sampler: SamplerKind::Rlmc,
            dim: 10,
            horizon: 40.0,
            h: 0.04,
            h_list: vec![0.04],
            h_ref: None,
            samples: 2,
            x0: InitialLaw::Zero,
        },
    }
}

impl ExperimentConfig {
    /// Merges `flags` over the file named by `--config` (if any) over the
    /// study defaults. `env_seed` is consulted only when neither source sets
    /// a seed.
    pub fn resolve(
        study: Study,
        flags: &Flags,
        env_seed: Option<&str>,
    ) -> Result<Self, ConfigError> {
        let file = match &flags.config {
            Some(path) => load_file(path)?,
            None => BTreeMap::new(),
        };
        Self::resolve_with(study, flags, &file, env_seed)
    }

    pub fn resolve_with(
        study: Study,
        flags: &Flags,
        file: &BTreeMap<String, String>,
        env_seed: Option<&str>,
    ) -> Result<Self, ConfigError> {
        let pick = |flag: &Option<String>, key: &str| -> Option<String> {
            flag.clone().or_else(|| file.get(key).cloned())
        };
        let d = defaults(study);
        let core = |e: langevin_core::Error| ConfigError(e.to_string());

        let potential = match pick(&flags.potential, "potential") {
            Some(s) => s.parse().map_err(core)?,
            None => d.potential,
        };
        let sampler = match pick(&flags.sampler, "sampler") {
            Some(s) => s.parse().map_err(core)?,
            None => d.sampler,
        };
        let dim = match pick(&flags.dim, "d") {
            Some(s) => parse_int("d", &s)?,
            None => d.dim,
        };
        let horizon = match pick(&flags.horizon, "T") {
            Some(s) => parse_real(&s)?,
            None => d.horizon,
        };
        let h_flag = pick(&flags.h, "h").map(|s| parse_real(&s)).transpose()?;
        let h_list = match pick(&flags.h_list, "h-list") {
            Some(s) => parse_list(&s)?,
            None => match h_flag {
                Some(h) => vec![h],
                None => d.h_list,
            },
        };
        let h = h_flag.unwrap_or(match study {
            Study::Converge | Study::Onestep => h_list[0],
            _ => d.h,
        });
        let h_ref = match pick(&flags.href, "href") {
            Some(s) => parse_real(&s)?,
            None => d.h_ref.unwrap_or(h / 16.0),
        };
        let samples = match pick(&flags.samples, "samples") {
            Some(s) => parse_int("samples", &s)?,
            None => d.samples,
        };
        let seed = match pick(&flags.seed, "seed") {
            Some(s) => parse_int("seed", &s)?,
            None => match env_seed {
                Some(s) => parse_int(SEED_ENV, s)?,
                None => DEFAULT_SEED,
            },
        };
        let theta = match pick(&flags.theta, "theta") {
            Some(s) => parse_real(&s)?,
            None => 1.0,
        };
        let x0 = match pick(&flags.x0, "x0") {
            Some(s) => s.parse().map_err(core)?,
            None => d.x0,
        };
        let out = flags
            .out
            .clone()
            .or_else(|| file.get("out").map(PathBuf::from));
        let force = flags.force
            || file
                .get("force")
                .map(|s| parse_bool(s))
                .transpose()?
                .unwrap_or(false);
        let jobs = match pick(&flags.jobs, "jobs") {
            Some(s) => parse_int("jobs", &s)?,
            None => 0,
        };
        let rho = pick(&flags.rho, "rho")
            .map(|s| parse_real(&s))
            .transpose()?;
        let eps = match pick(&flags.eps, "eps") {
            Some(s) => parse_list(&s)?,
            None => vec![0.1],
        };
        let expect_slope = match pick(&flags.expect_slope, "expect-slope") {
            Some(s) => {
                let Some((lo, hi)) = s.split_once(':') else {
                    return err("--expect-slope takes lo:hi");
                };
                Some((parse_real(lo)?, parse_real(hi)?))
            }
            None => None,
        };

        let cfg = Self {
            study,
            potential,
            sampler,
            dim,
            horizon,
            h,
            h_list,
            h_ref,
            samples,
            seed,
            theta,
            x0,
            out,
            force,
            jobs,
            rho,
            eps,
            expect_slope,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.dim == 0 {
            return err("--d must be positive");
        }
        if self.h_list.is_empty() {
            return err("--h-list is empty");
        }
        if self.h_list.iter().chain([&self.h]).any(|&h| h <= 0.0) {
            return err("stepsizes must be positive");
        }
        if self.h_list.windows(2).any(|w| w[1] >= w[0]) {
            return err("--h-list must be strictly decreasing");
        }
        if !(self.theta > 0.0) {
            return err("--theta must be positive");
        }
        if self.eps.iter().any(|&e| e <= 0.0) {
            return err("--eps values must be positive");
        }
        if let Some(r) = self.rho {
            if r <= 0.0 {
                return err("--rho must be positive");
            }
        }
        let needs_ci = !matches!(self.study, Study::Constants);
        if needs_ci && self.samples < 2 {
            return err("--samples must be at least 2");
        }
        match self.study {
            Study::Converge => {
                if !(self.h_ref > 0.0) {
                    return err("--href must be positive");
                }
                for &h in &self.h_list {
                    dyadic_ratio(h, self.h_ref)
                        .map_err(|e| ConfigError(format!("--h-list: {e}")))?;
                }
            }
            Study::Moments | Study::Stability => {
                if !(self.horizon > 0.0) {
                    return err("--T must be positive");
                }
                dyadic_ratio(self.h, self.h_ref).map_err(|e| ConfigError(format!("--h: {e}")))?;
            }
            Study::Onestep => {
                if matches!(self.x0, InitialLaw::StandardGaussian) {
                    return err("onestep needs a deterministic start (--x0 zero or const:<v>)");
                }
            }
            Study::Constants => {}
        }
        Ok(())
    }

    /// One-line description embedded in every CSV. Output path and thread
    /// count are left out: they do not affect the numbers.
    pub fn describe(&self) -> String {
        let list = |v: &[f64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(";")
        };
        let mut s = format!(
            "study={} potential={} sampler={} d={} T={} h={} h_list={} href={} samples={} seed={} theta={} x0={} force={}",
            self.study.name(),
            self.potential,
            self.sampler,
            self.dim,
            self.horizon,
            self.h,
            list(&self.h_list),
            self.h_ref,
            self.samples,
            self.seed,
            self.theta,
            self.x0,
            self.force,
        );
        if let Some(r) = self.rho {
            s.push_str(&format!(" rho={r}"));
        }
        if self.study == Study::Constants {
            s.push_str(&format!(" eps={}", list(&self.eps)));
        }
        if let Some((lo, hi)) = self.expect_slope {
            s.push_str(&format!(" expect_slope={lo}:{hi}"));
        }
        s
    }
}

fn load_file(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    parse_config_file(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
}
