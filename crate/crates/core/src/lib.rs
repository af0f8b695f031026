//! Generalized exponential (GE) lifetime estimation from progressively
//! type-I interval-censored data.
//!
//! The crate is `no_std` (it needs `alloc`) and covers:
//!
//! * [`dist`]: the GE law `F(x) = (1 - e^{-λx})^α` with density, quantile,
//!   sampling and moments.
//! * [`censoring`]: inspection schedules, removal plans, observed interval
//!   counts and the sequential conditional-binomial generator.
//! * [`estep`]: truncated conditional expectations used by the EM updates.
//! * [`likelihood`], [`em`] and [`ml`]: the observed-data log-likelihood,
//!   the EM iteration (plus the Chen–Lio variant) and Newton–Raphson ML.
//!
//! IO, the Monte Carlo study harness and the CLI live in `gecens-cli`.

#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod censoring;
pub mod dist;
pub mod em;
mod error;
pub mod estep;
pub mod likelihood;
pub mod ml;
pub mod quad;
pub mod special;

pub use censoring::{generate, InspectionSchedule, IntervalDataset, RemovalPlan};
pub use dist::GeParams;
pub use em::{
    chen_step, em_step, fit_em, fit_em_chen, q_value, EStepSums, EmConfig, FitFailure, FitResult,
    Method,
};
pub use error::{Error, TruncationError};
pub use estep::{expectation_table, ExpectationRow};
pub use likelihood::{log_likelihood, score};
pub use ml::fit_ml;

pub type Result<T, E = Error> = core::result::Result<T, E>;
