//! Truncated conditional expectations of the GE law.
//!
//! For `T ~ GE(α, λ)` and `w(u) = 1 - e^{-λu}`:
//!
//! | name | quantity                       | conditioning set |
//! |------|--------------------------------|------------------|
//! | `e1` | `E[T]`                         | `(a, b]`         |
//! | `e2` | `E[ln w(T)]`                   | `(a, b]`         |
//! | `e3` | `E[T]`                         | `[a, inf)`       |
//! | `e4` | `E[ln w(T)]`                   | `[a, inf)`       |
//! | `e5` | `E[T (1 - w(T)) / w(T)]`       | `(a, b]`         |
//! | `e6` | `E[T (1 - w(T)) / w(T)]`       | `[a, inf)`       |
//!
//! The log moments have closed forms. Since `w(T)^α` is uniform, the
//! antiderivative of `ln w · α w^{α-1}` is `G(w) = w^α (ln w - 1/α)`, and
//! the tail form reduces to `S(a) e4(a) = h(α ln w(a)) / α` with
//! `h(x) = expm1(x) - x e^x`. The time moments go through
//! [`crate::quad::truncated_means`].
//!
//! `e5`/`e6` are only needed by the Chen–Lio λ update.

use alloc::vec::Vec;

use crate::censoring::InspectionSchedule;
use crate::dist::GeParams;
use crate::quad::{truncated_means, MIN_MASS};
use crate::{Error, Result, TruncationError};

/// The four expectations for interval `(t_{i-1}, t_i]` and tail `[t_i, inf)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectationRow {
    /// 1-based interval index.
    pub interval: usize,
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    pub e4: f64,
}

/// `h(x) = expm1(x) - x e^x` for `x <= 0`, with `h(-inf) = -1`.
fn h(x: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return -1.0;
    }
    if x > -0.5 {
        // -Σ_{k>=2} (k-1) x^k / k!
        let mut term = x;
        let mut sum = 0.0;
        for k in 2..40 {
            term *= x / k as f64;
            let add = (k - 1) as f64 * term;
            sum -= add;
            if add.abs() <= 1e-17 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        libm::expm1(x) - x * libm::exp(x)
    }
}

fn finite_interval(params: &GeParams, a: f64, b: f64) -> Result<(), TruncationError> {
    if a >= 0.0 && b > a && b.is_finite() {
        Ok(())
    } else {
        Err(TruncationError::EmptyInterval { lower: a, upper: b })
    }
    .and_then(|()| {
        if params.interval_mass(a, b) >= MIN_MASS {
            Ok(())
        } else {
            Err(TruncationError::EmptyInterval { lower: a, upper: b })
        }
    })
}

/// `E[T | a < T <= b]`.
pub fn e1(params: &GeParams, a: f64, b: f64) -> Result<f64, TruncationError> {
    finite_interval(params, a, b)?;
    let ([mean], _) = truncated_means(params, a, b, |p| [p.time])?;
    Ok(mean.clamp(a, b))
}

/// `E[ln(1 - e^{-λT}) | a < T <= b]`, closed form.
pub fn e2(params: &GeParams, a: f64, b: f64) -> Result<f64, TruncationError> {
    finite_interval(params, a, b)?;
    let alpha = params.alpha();
    let (lw_a, lw_b) = (params.log_base(a), params.log_base(b));
    let (f_a, f_b) = (params.cdf(a), params.cdf(b));
    let value = if f_b <= 0.5 {
        let lower = if f_a == 0.0 { 0.0 } else { f_a * lw_a };
        (f_b * lw_b - lower) / (f_b - f_a) - 1.0 / alpha
    } else {
        (h(alpha * lw_a) - h(alpha * lw_b)) / (alpha * (params.sf(a) - params.sf(b)))
    };
    Ok(value.clamp(lw_a, lw_b))
}

/// `E[T | T >= a]`.
pub fn e3(params: &GeParams, a: f64) -> Result<f64, TruncationError> {
    let ([mean], _) = truncated_means(params, a, f64::INFINITY, |p| [p.time])?;
    Ok(mean.max(a))
}

/// `E[ln(1 - e^{-λT}) | T >= a]`, closed form.
pub fn e4(params: &GeParams, a: f64) -> Result<f64, TruncationError> {
    let alpha = params.alpha();
    let x = alpha * params.log_base(a);
    let survival = -libm::expm1(x);
    if !(a >= 0.0) || !(survival >= MIN_MASS) {
        return Err(TruncationError::EmptyTail { lower: a });
    }
    Ok((h(x) / (alpha * survival)).min(0.0))
}

#[inline]
fn odds_weighted_time(p: &crate::quad::LawPoint, lambda: f64) -> f64 {
    // u (1 - w) / w, with u / w -> 1/λ as w -> 0
    if p.base < 1e-8 {
        p.base_complement * (1.0 + 0.5 * p.base) / lambda
    } else {
        p.time * p.base_complement / p.base
    }
}

/// `E[T e^{-λT} / (1 - e^{-λT}) | a < T <= b]`.
pub fn e5(params: &GeParams, a: f64, b: f64) -> Result<f64, TruncationError> {
    finite_interval(params, a, b)?;
    let lambda = params.lambda();
    let ([v], _) = truncated_means(params, a, b, |p| [odds_weighted_time(p, lambda)])?;
    Ok(v)
}

/// `E[T e^{-λT} / (1 - e^{-λT}) | T >= a]`.
pub fn e6(params: &GeParams, a: f64) -> Result<f64, TruncationError> {
    let lambda = params.lambda();
    let ([v], _) = truncated_means(params, a, f64::INFINITY, |p| {
        [odds_weighted_time(p, lambda)]
    })?;
    Ok(v)
}

/// `(e1, e5)` on `(a, b]` from one set of quadrature nodes.
pub(crate) fn interval_time_moments(
    params: &GeParams,
    a: f64,
    b: f64,
) -> Result<(f64, f64), TruncationError> {
    finite_interval(params, a, b)?;
    let lambda = params.lambda();
    let ([t, odds], _) =
        truncated_means(params, a, b, |p| [p.time, odds_weighted_time(p, lambda)])?;
    Ok((t.clamp(a, b), odds))
}

/// `(e3, e6)` on `[a, inf)`.
pub(crate) fn tail_time_moments(params: &GeParams, a: f64) -> Result<(f64, f64), TruncationError> {
    let lambda = params.lambda();
    let ([t, odds], _) = truncated_means(params, a, f64::INFINITY, |p| {
        [p.time, odds_weighted_time(p, lambda)]
    })?;
    Ok((t.max(a), odds))
}

/// One row per inspection, `t_0 = 0`.
pub fn expectation_table(
    params: &GeParams,
    schedule: &InspectionSchedule,
) -> Result<Vec<ExpectationRow>> {
    schedule
        .intervals()
        .enumerate()
        .map(|(i, (lower, upper))| {
            let at = |source| Error::Truncation {
                interval: i + 1,
                source,
            };
            Ok(ExpectationRow {
                interval: i + 1,
                e1: e1(params, lower, upper).map_err(at)?,
                e2: e2(params, lower, upper).map_err(at)?,
                e3: e3(params, upper).map_err(at)?,
                e4: e4(params, upper).map_err(at)?,
            })
        })
        .collect()
}
