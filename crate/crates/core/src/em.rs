//! EM iteration for GE parameters under progressive interval censoring.
//!
//! The E-step evaluates, at the current iterate `θ_t`, the sums
//!
//! ```text
//! A = Σ x_i E1_i + r_i E3_i        (expected total lifetime)
//! B = Σ x_i E2_i + r_i E4_i        (expected total of ln(1 - e^{-λT}))
//! ```
//!
//! so that `Q(θ | θ_t) = n(ln α + ln λ) - λA + (α - 1)B`, maximized by
//! `α = -n / B` and `λ = n / A`.
//!
//! [`fit_em_chen`] is the variant obtained by taking expectations of the
//! complete-data score equations instead. Its α update coincides with the
//! one above; its λ update keeps the `(α - 1) T e^{-λT} / (1 - e^{-λT})`
//! term of the λ score, evaluated at `θ_t`.

use alloc::vec::Vec;

use crate::censoring::{InspectionSchedule, IntervalDataset};
use crate::dist::GeParams;
use crate::estep::{e2, e4, interval_time_moments, tail_time_moments};
use crate::likelihood::log_likelihood;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Method {
    Em,
    Ml,
    EmChen,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Em => "em",
            Method::Ml => "ml",
            Method::EmChen => "em-chen",
        }
    }
}

impl core::fmt::Display for Method {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// Starting point and stopping rule shared by all fitters.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EmConfig {
    pub start: GeParams,
    /// Stop once `max(|Δα|, |Δλ|) <= tol`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            start: GeParams::new(1.0, 0.5).expect("valid start"),
            tol: 1e-6,
            max_iter: 101,
        }
    }
}

impl EmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidConfig("tolerance must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1"));
        }
        Ok(())
    }
}

/// Why a fit stopped without converging.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FitFailure {
    MaxIterations,
    /// The Chen–Lio λ update had denominator `<= 0`.
    NonPositiveDenominator(f64),
    /// Newton–Raphson could not improve the likelihood.
    Stalled,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct FitResult {
    pub method: Method,
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub params: GeParams,
    pub iterations: usize,
    pub converged: bool,
    pub loglik: f64,
    /// `(α, λ)` per iterate, starting point first.
    pub trace: Vec<(f64, f64)>,
    #[cfg_attr(feature = "serde", serde(skip))]
    pub failure: Option<FitFailure>,
}

/// E-step sufficient statistics at `θ_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EStepSums {
    pub n: f64,
    /// `Σ x_i E1_i + r_i E3_i`
    pub time: f64,
    /// `Σ x_i E2_i + r_i E4_i`
    pub log_base: f64,
    /// `Σ x_i E5_i + r_i E6_i`, only filled for the Chen–Lio update.
    pub odds_time: Option<f64>,
}

impl EStepSums {
    pub fn compute(
        theta_t: &GeParams,
        data: &IntervalDataset,
        schedule: &InspectionSchedule,
    ) -> Result<Self> {
        Self::compute_with(theta_t, data, schedule, false)
    }

    fn compute_with(
        theta_t: &GeParams,
        data: &IntervalDataset,
        schedule: &InspectionSchedule,
        with_odds: bool,
    ) -> Result<Self> {
        data.check_against(schedule)?;
        let mut time = 0.0;
        let mut log_base = 0.0;
        let mut odds = 0.0;
        for (i, ((lower, upper), (x, r))) in schedule.intervals().zip(data.counts()).enumerate() {
            let at = |source| Error::Truncation {
                interval: i + 1,
                source,
            };
            if x > 0 {
                let x = x as f64;
                let (t, o) = interval_time_moments(theta_t, lower, upper).map_err(at)?;
                time += x * t;
                odds += x * o;
                log_base += x * e2(theta_t, lower, upper).map_err(at)?;
            }
            if r > 0 {
                let r = r as f64;
                let (t, o) = tail_time_moments(theta_t, upper).map_err(at)?;
                time += r * t;
                odds += r * o;
                log_base += r * e4(theta_t, upper).map_err(at)?;
            }
        }
        Ok(Self {
            n: data.n() as f64,
            time,
            log_base,
            odds_time: with_odds.then_some(odds),
        })
    }

    /// `Q(θ | θ_t)` without the constant.
    pub fn q(&self, theta: &GeParams) -> f64 {
        let (a, l) = (theta.alpha(), theta.lambda());
        self.n * (libm::log(a) + libm::log(l)) - l * self.time + (a - 1.0) * self.log_base
    }

    /// `(∂Q/∂α, ∂Q/∂λ)`.
    pub fn gradient(&self, theta: &GeParams) -> [f64; 2] {
        [
            self.n / theta.alpha() + self.log_base,
            self.n / theta.lambda() - self.time,
        ]
    }

    /// The root of [`Self::gradient`].
    pub fn maximizer(&self) -> Result<GeParams> {
        if !(self.log_base < 0.0) {
            return Err(Error::NonPositiveDenominator(-self.log_base));
        }
        if !(self.time > 0.0) {
            return Err(Error::NonPositiveDenominator(self.time));
        }
        GeParams::new(-self.n / self.log_base, self.n / self.time)
    }
}

/// `Q(θ | θ_t)` with E-step constants evaluated at `θ_t`.
pub fn q_value(
    theta: &GeParams,
    theta_t: &GeParams,
    data: &IntervalDataset,
    schedule: &InspectionSchedule,
) -> Result<f64> {
    Ok(EStepSums::compute(theta_t, data, schedule)?.q(theta))
}

/// One EM update `θ_t -> θ_{t+1}`.
pub fn em_step(
    theta_t: &GeParams,
    data: &IntervalDataset,
    schedule: &InspectionSchedule,
) -> Result<GeParams> {
    EStepSums::compute(theta_t, data, schedule)?.maximizer()
}

/// One Chen–Lio update. Fails with [`Error::NonPositiveDenominator`] when
/// the λ denominator is not positive.
pub fn chen_step(
    theta_t: &GeParams,
    data: &IntervalDataset,
    schedule: &InspectionSchedule,
) -> Result<GeParams> {
    let sums = EStepSums::compute_with(theta_t, data, schedule, true)?;
    let alpha = sums.maximizer()?.alpha();
    let odds = sums.odds_time.unwrap_or(0.0);
    let denom = sums.time - (theta_t.alpha() - 1.0) * odds;
    if !(denom > 0.0) {
        return Err(Error::NonPositiveDenominator(denom));
    }
    GeParams::new(alpha, sums.n / denom)
}

fn iterate<S>(
    method: Method,
    data: &IntervalDataset,
    schedule: &InspectionSchedule,
    config: &EmConfig,
    mut step: S,
) -> Result<FitResult>
where
    S: FnMut(&GeParams) -> Result<GeParams>,
{
    config.validate()?;
    data.check_against(schedule)?;
    let mut theta = config.start;
    let mut trace = alloc::vec![(theta.alpha(), theta.lambda())];
    let mut failure = Some(FitFailure::MaxIterations);
    for _ in 0..config.max_iter {
        let next = match step(&theta) {
            Ok(next) => next,
            Err(Error::NonPositiveDenominator(d)) => {
                failure = Some(FitFailure::NonPositiveDenominator(d));
                break;
            }
            Err(e) => return Err(e),
        };
        let change = (next.alpha() - theta.alpha())
            .abs()
            .max((next.lambda() - theta.lambda()).abs());
        theta = next;
        trace.push((theta.alpha(), theta.lambda()));
        if change <= config.tol {
            failure = None;
            break;
        }
    }
    Ok(FitResult {
        method,
        params: theta,
        iterations: trace.len() - 1,
        converged: failure.is_none(),
        loglik: log_likelihood(&theta, data, schedule)?,
        trace,
        failure,
    })
}

/// Iterate [`em_step`] from `config.start` until the stopping rule holds.
pub fn fit_em(
    data: &IntervalDataset,
    schedule: &InspectionSchedule,
    config: &EmConfig,
) -> Result<FitResult> {
    iterate(Method::Em, data, schedule, config, |t| {
        em_step(t, data, schedule)
    })
}

/// Iterate [`chen_step`]. A non-positive λ denominator ends the fit with
/// `converged = false` rather than an error.
pub fn fit_em_chen(
    data: &IntervalDataset,
    schedule: &InspectionSchedule,
    config: &EmConfig,
) -> Result<FitResult> {
    iterate(Method::EmChen, data, schedule, config, |t| {
        chen_step(t, data, schedule)
    })
}
