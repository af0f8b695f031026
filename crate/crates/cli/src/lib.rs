//! File formats, the Monte Carlo study harness and shared CLI plumbing for
//! the `gecens` estimators.

pub mod io;
pub mod study;
