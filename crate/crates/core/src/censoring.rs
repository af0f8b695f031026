//! Progressive type-I interval censoring.
//!
//! `n` units start at time 0 and are inspected at `t_1 < ... < t_m`. At
//! inspection `i` the failures in `(t_{i-1}, t_i]` are counted and
//! `floor(p_i * survivors)` of the remaining units are withdrawn. With
//! `p_m = 1` every unit is accounted for at `t_m`.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::dist::GeParams;
use crate::{Error, Result};

/// Strictly increasing, positive, finite inspection times. `t_0 = 0` is implicit.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "Vec<f64>", into = "Vec<f64>"))]
pub struct InspectionSchedule {
    times: Vec<f64>,
}

impl InspectionSchedule {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidSchedule(
                "at least one inspection time is required",
            ));
        }
        if !times.iter().all(|t| t.is_finite() && *t > 0.0) {
            return Err(Error::InvalidSchedule("times must be finite and positive"));
        }
        if !times.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidSchedule("times must be strictly increasing"));
        }
        Ok(Self { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `(t_{i-1}, t_i]` for 0-based `i`.
    pub fn interval(&self, i: usize) -> (f64, f64) {
        let lower = if i == 0 { 0.0 } else { self.times[i - 1] };
        (lower, self.times[i])
    }

    pub fn intervals(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.times.len()).map(move |i| self.interval(i))
    }

    /// Every time multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.times.iter().map(|t| t * factor).collect())
    }
}

impl TryFrom<Vec<f64>> for InspectionSchedule {
    type Error = Error;

    fn try_from(times: Vec<f64>) -> Result<Self> {
        Self::new(times)
    }
}

impl From<InspectionSchedule> for Vec<f64> {
    fn from(s: InspectionSchedule) -> Self {
        s.times
    }
}

/// Fractions of the survivors withdrawn at each inspection; the last is 1.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "Vec<f64>", into = "Vec<f64>"))]
pub struct RemovalPlan {
    percentages: Vec<f64>,
}

impl RemovalPlan {
    pub fn new(percentages: Vec<f64>) -> Result<Self> {
        match percentages.last() {
            None => return Err(Error::InvalidPlan("at least one percentage is required")),
            Some(&last) if last != 1.0 => {
                return Err(Error::InvalidPlan("the final percentage must be 1"))
            }
            _ => {}
        }
        if !percentages.iter().all(|p| (0.0..=1.0).contains(p)) {
            return Err(Error::InvalidPlan("percentages must lie in [0, 1]"));
        }
        Ok(Self { percentages })
    }

    pub fn percentages(&self) -> &[f64] {
        &self.percentages
    }

    pub fn len(&self) -> usize {
        self.percentages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.percentages.is_empty()
    }
}

impl TryFrom<Vec<f64>> for RemovalPlan {
    type Error = Error;

    fn try_from(p: Vec<f64>) -> Result<Self> {
        Self::new(p)
    }
}

impl From<RemovalPlan> for Vec<f64> {
    fn from(p: RemovalPlan) -> Self {
        p.percentages
    }
}

/// Observed failures `x_i` and removals `r_i` per interval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalDataset {
    failures: Vec<u64>,
    removals: Vec<u64>,
    n: u64,
}

impl IntervalDataset {
    /// The sample size is `Σ (x_i + r_i)` and must be positive.
    pub fn new(failures: Vec<u64>, removals: Vec<u64>) -> Result<Self> {
        if failures.is_empty() {
            return Err(Error::InvalidDataset("at least one interval is required"));
        }
        if failures.len() != removals.len() {
            return Err(Error::InvalidDataset(
                "failure and removal columns differ in length",
            ));
        }
        let n = failures
            .iter()
            .chain(removals.iter())
            .try_fold(0u64, |acc, &c| acc.checked_add(c))
            .ok_or(Error::InvalidDataset("counts overflow"))?;
        if n == 0 {
            return Err(Error::InvalidDataset("sample size must be positive"));
        }
        Ok(Self {
            failures,
            removals,
            n,
        })
    }

    pub fn failures(&self) -> &[u64] {
        &self.failures
    }

    pub fn removals(&self) -> &[u64] {
        &self.removals
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.failures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.failures.is_empty()
    }

    /// `(x_i, r_i)` pairs.
    pub fn counts(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.failures
            .iter()
            .copied()
            .zip(self.removals.iter().copied())
    }

    pub(crate) fn check_against(&self, schedule: &InspectionSchedule) -> Result<()> {
        if self.len() != schedule.len() {
            return Err(Error::LengthMismatch {
                schedule: schedule.len(),
                other: self.len(),
            });
        }
        Ok(())
    }
}

/// Simulate one progressively censored life test.
///
/// Survivors `s` start at `n`. At inspection `i` the failures are
/// `Binomial(s, q_i)` with `q_i` the conditional failure probability of
/// `(t_{i-1}, t_i]` given survival to `t_{i-1}`; then `floor(p_i * s)` of
/// the remaining survivors are removed.
pub fn generate<R: Rng + ?Sized>(
    n: u64,
    params: &GeParams,
    schedule: &InspectionSchedule,
    plan: &RemovalPlan,
    rng: &mut R,
) -> Result<IntervalDataset> {
    if n == 0 {
        return Err(Error::InvalidDataset("sample size must be positive"));
    }
    if plan.len() != schedule.len() {
        return Err(Error::LengthMismatch {
            schedule: schedule.len(),
            other: plan.len(),
        });
    }
    let m = schedule.len();
    let mut failures = Vec::with_capacity(m);
    let mut removals = Vec::with_capacity(m);
    let mut survivors = n;
    for (i, (lower, upper)) in schedule.intervals().enumerate() {
        let at_risk = params.sf(lower);
        let q = if at_risk > 0.0 {
            (params.interval_mass(lower, upper) / at_risk).clamp(0.0, 1.0)
        } else {
            1.0
        };
        assert!(
            q.is_finite(),
            "conditional failure probability is not finite"
        );
        let x = if survivors == 0 {
            0
        } else {
            Binomial::new(survivors, q)
                .expect("q lies in [0, 1]")
                .sample(rng)
        };
        survivors -= x;
        let r = libm::floor(plan.percentages()[i] * survivors as f64) as u64;
        survivors -= r.min(survivors);
        failures.push(x);
        removals.push(r);
    }
    debug_assert_eq!(survivors, 0);
    IntervalDataset::new(failures, removals)
}
