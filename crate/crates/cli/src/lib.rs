//! Command-line driver for Langevin sampler experiments.
//!
//! `langevin-bench <study> [flags]` where the study is one of `converge`,
//! `moments`, `stability`, `onestep`, `constants`. Every study writes CSV
//! with a leading `#` line that records the configuration.

// `!(x > 0.0)` style checks are meant to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod studies;

use std::ffi::OsString;

use clap::Parser;
use log::error;

use config::{ExperimentConfig, Flags, Study, SEED_ENV};
use langevin_core::Error;
use studies::{run_study, StudyError};

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Threshold = 1,
    Usage = 2,
    Divergence = 3,
}

#[derive(Debug, Parser)]
#[command(
    name = "langevin-bench",
    version,
    about = "Convergence experiments for LMC, RLMC and pRLMC"
)]
pub struct Cli {
    #[arg(value_enum)]
    pub study: Study,
    #[command(flatten)]
    pub flags: Flags,
}

pub fn exit_status(e: &StudyError) -> ExitStatus {
    match e {
        StudyError::Threshold(_) => ExitStatus::Threshold,
        StudyError::Core(Error::ReferenceDiverged { .. } | Error::NonFinite) => {
            ExitStatus::Divergence
        }
        StudyError::Core(_) | StudyError::Io(_) => ExitStatus::Usage,
    }
}

/// Parses `args` (including the program name), runs the study and returns
/// the exit status. Usage errors are reported on stderr.
pub fn run<I, T>(args: I) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitStatus::Usage
            } else {
                ExitStatus::Success
            };
        }
    };
    let env_seed = std::env::var(SEED_ENV).ok();
    let cfg = match ExperimentConfig::resolve(cli.study, &cli.flags, env_seed.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            return ExitStatus::Usage;
        }
    };
    if cfg.jobs > 0 {
        // Fails only if a pool already exists, e.g. when called twice in one process.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build_global();
    }
    match run_study(&cfg) {
        Ok(()) => ExitStatus::Success,
        Err(e) => {
            eprintln!("error: {e}");
            exit_status(&e)
        }
    }
}
