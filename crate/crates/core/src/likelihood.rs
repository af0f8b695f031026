//! Observed-data log-likelihood of interval counts:
//!
//! ```text
//! ℓ(α, λ) = Σ_i x_i ln[F(t_i) - F(t_{i-1})] + r_i ln[1 - F(t_i)]
//! ```
//!
//! together with its analytic gradient and Hessian in `(α, λ)`.

use crate::censoring::{InspectionSchedule, IntervalDataset};
use crate::dist::GeParams;
use crate::Result;

/// Log-likelihood; `-inf` when a positive count falls on a set of zero mass.
pub fn log_likelihood(
    params: &GeParams,
    data: &IntervalDataset,
    schedule: &InspectionSchedule,
) -> Result<f64> {
    data.check_against(schedule)?;
    let mut ll = 0.0;
    for ((lower, upper), (x, r)) in schedule.intervals().zip(data.counts()) {
        if x > 0 {
            ll += x as f64 * libm::log(params.interval_mass(lower, upper));
        }
        if r > 0 {
            ll += r as f64 * libm::log(params.sf(upper));
        }
    }
    Ok(ll)
}

/// `F(t)` and its first and second partial derivatives in `(α, λ)`.
#[derive(Debug, Clone, Copy, Default)]
struct CdfJet {
    value: f64,
    survival: f64,
    grad: [f64; 2],
    hess: [[f64; 2]; 2],
}

impl CdfJet {
    fn at(params: &GeParams, t: f64) -> Self {
        if t <= 0.0 {
            return Self {
                survival: 1.0,
                ..Self::default()
            };
        }
        let (alpha, lambda) = (params.alpha(), params.lambda());
        let lw = params.log_base(t);
        let value = libm::exp(alpha * lw);
        let survival = -libm::expm1(alpha * lw);
        // k = t e^{-λt} / (1 - e^{-λt})
        let k = t / libm::expm1(lambda * t);
        let d_alpha = value * lw;
        let d_lambda = alpha * value * k;
        Self {
            value,
            survival,
            grad: [d_alpha, d_lambda],
            hess: [
                [value * lw * lw, d_lambda * (lw + 1.0 / alpha)],
                [
                    d_lambda * (lw + 1.0 / alpha),
                    alpha * value * k * ((alpha - 1.0) * k - t),
                ],
            ],
        }
    }
}

/// Log-likelihood, gradient and Hessian at `params`, natural parameters.
pub(crate) fn derivatives(
    params: &GeParams,
    data: &IntervalDataset,
    schedule: &InspectionSchedule,
) -> (f64, [f64; 2], [[f64; 2]; 2]) {
    let mut ll = 0.0;
    let mut g = [0.0; 2];
    let mut hs = [[0.0; 2]; 2];
    let mut prev = CdfJet::at(params, 0.0);
    for (t, (x, r)) in schedule.times().iter().zip(data.counts()) {
        let cur = CdfJet::at(params, *t);
        if x > 0 {
            let x = x as f64;
            let mass = if cur.value <= 0.5 {
                cur.value - prev.value
            } else {
                prev.survival - cur.survival
            };
            ll += x * libm::log(mass);
            let dm = [cur.grad[0] - prev.grad[0], cur.grad[1] - prev.grad[1]];
            for j in 0..2 {
                g[j] += x * dm[j] / mass;
                for k in 0..2 {
                    let d2 = cur.hess[j][k] - prev.hess[j][k];
                    hs[j][k] += x * (d2 / mass - dm[j] * dm[k] / (mass * mass));
                }
            }
        }
        if r > 0 {
            let r = r as f64;
            let s = cur.survival;
            ll += r * libm::log(s);
            for j in 0..2 {
                g[j] -= r * cur.grad[j] / s;
                for k in 0..2 {
                    hs[j][k] -= r * (cur.hess[j][k] / s + cur.grad[j] * cur.grad[k] / (s * s));
                }
            }
        }
        prev = cur;
    }
    (ll, g, hs)
}

/// Score vector `∂ℓ/∂(α, λ)`.
pub fn score(
    params: &GeParams,
    data: &IntervalDataset,
    schedule: &InspectionSchedule,
) -> Result<[f64; 2]> {
    data.check_against(schedule)?;
    Ok(derivatives(params, data, schedule).1)
}
