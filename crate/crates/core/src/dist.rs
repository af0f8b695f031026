//! The generalized exponential distribution.
//!
//! With shape `α > 0` and rate `λ > 0`:
//!
//! ```text
//! F(x) = (1 - e^{-λx})^α
//! f(x) = αλ (1 - e^{-λx})^{α-1} e^{-λx}
//! ```
//!
//! Internally most quantities are carried as `ln w(x)` with
//! `w(x) = 1 - e^{-λx}`, so that both `F = e^{α ln w}` and
//! `1 - F = -expm1(α ln w)` stay accurate in either tail.

use alloc::vec::Vec;

use rand::distr::Open01;
use rand::Rng;

use crate::special::{digamma, trigamma, DIGAMMA_ONE, TRIGAMMA_ONE};
use crate::{Error, Result};

/// Shape `alpha` and rate `lambda` of a GE law.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "RawParams"))]
pub struct GeParams {
    alpha: f64,
    lambda: f64,
}

#[cfg(feature = "serde")]
#[derive(serde::Deserialize)]
struct RawParams {
    alpha: f64,
    lambda: f64,
}

#[cfg(feature = "serde")]
impl TryFrom<RawParams> for GeParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        GeParams::new(raw.alpha, raw.lambda)
    }
}

/// `ln(1 - e^{-x})` for `x > 0`, switching branches at `ln 2`.
pub(crate) fn log1mexp(x: f64) -> f64 {
    if x <= core::f64::consts::LN_2 {
        libm::log(-libm::expm1(-x))
    } else {
        libm::log1p(-libm::exp(-x))
    }
}

impl GeParams {
    pub fn new(alpha: f64, lambda: f64) -> Result<Self> {
        if alpha.is_finite() && lambda.is_finite() && alpha > 0.0 && lambda > 0.0 {
            Ok(Self { alpha, lambda })
        } else {
            Err(Error::InvalidParams { alpha, lambda })
        }
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `ln w(x) = ln(1 - e^{-λx})`; `-inf` at `x = 0`.
    #[inline]
    pub fn log_base(&self, x: f64) -> f64 {
        if x <= 0.0 {
            f64::NEG_INFINITY
        } else {
            log1mexp(self.lambda * x)
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        libm::exp(self.alpha * self.log_base(x))
    }

    /// Survival function `1 - F(x)`.
    pub fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        -libm::expm1(self.alpha * self.log_base(x))
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        libm::exp(self.log_pdf(x))
    }

    pub fn log_pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        libm::log(self.alpha) + libm::log(self.lambda) + (self.alpha - 1.0) * self.log_base(x)
            - self.lambda * x
    }

    /// Inverse cdf, `-ln(1 - v^{1/α}) / λ`.
    pub fn quantile(&self, v: f64) -> Result<f64> {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::InvalidProbability(v));
        }
        Ok(self.time_at_log_base(libm::log(v) / self.alpha))
    }

    /// The time `x` with `ln w(x) = log_base`, for `log_base < 0`.
    #[inline]
    pub(crate) fn time_at_log_base(&self, log_base: f64) -> f64 {
        // -ln(1 - w) with ln w given
        -log1mexp(-log_base) / self.lambda
    }

    /// Probability mass of `(a, b]`, `0 <= a < b <= inf`, computed from
    /// whichever of `F` or `1 - F` is less prone to cancellation.
    pub fn interval_mass(&self, a: f64, b: f64) -> f64 {
        let fb = self.cdf(b);
        if fb <= 0.5 {
            fb - self.cdf(a)
        } else {
            self.sf(a) - self.sf(b)
        }
    }

    /// Inverse-transform draws.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<f64> {
        (0..count).map(|_| self.sample_one(rng)).collect()
    }

    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.sample(Open01);
        self.time_at_log_base(libm::log(u) / self.alpha)
    }

    /// `(ψ(α+1) - ψ(1)) / λ`
    pub fn mean(&self) -> f64 {
        (digamma(self.alpha + 1.0) - DIGAMMA_ONE) / self.lambda
    }

    /// `(ψ'(1) - ψ'(α+1)) / λ²`
    pub fn variance(&self) -> f64 {
        (TRIGAMMA_ONE - trigamma(self.alpha + 1.0)) / (self.lambda * self.lambda)
    }
}
