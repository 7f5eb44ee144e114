//! Langevin Monte Carlo samplers (LMC, randomized midpoint RLMC and its
//! projected variant pRLMC) together with the machinery to measure their
//! strong discretization error against a fine-grid reference driven by the
//! same Brownian path.
//!
//! Randomness is counter based: every Gaussian increment and every midpoint
//! draw is a pure function of `(seed, sample_index, purpose, counter)`, so
//! runs are reproducible regardless of threading.

// `!(x > 0.0)` style checks are meant to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod metrics;
pub mod noise;
pub mod oracle;
pub mod potential;
pub mod samplers;
pub mod theory;

pub use error::{Error, Result};
pub use metrics::{fit_order, w2_1d, MeanCi, OrderFit};
pub use noise::{BrownianPath, PathOptions, TauStream};
pub use oracle::{coupled_error, coupled_error_ladder, CoupledErrorEstimate, CoupledSetup};
pub use potential::{AssumptionConstants, PotentialChoice, PotentialSpec, Regime};
pub use samplers::{run_chain, ChainOptions, InitialLaw, RecordPolicy, SamplerKind, Trajectory};
pub use theory::{TheoryConstants, TheoryInputs};
