//! Maximum likelihood by Newton–Raphson on `(ln α, ln λ)`.

use alloc::vec;

use crate::censoring::{InspectionSchedule, IntervalDataset};
use crate::dist::GeParams;
use crate::em::{em_step, EmConfig, FitFailure, FitResult, Method};
use crate::likelihood::{derivatives, log_likelihood};
use crate::{Error, Result};

/// EM steps taken before Newton–Raphson starts.
pub const WARM_START_STEPS: usize = 5;

/// Score norm (natural parameters) accepted as stationary.
pub const SCORE_TOL: f64 = 1e-8;

// Newton stops early once the score is this small.
const SCORE_TARGET: f64 = 1e-11;
// Minimum curvature of the log-space Hessian at an accepted maximum; the
// likelihood flattens out along boundary rays such as λ -> inf.
const MIN_CURVATURE: f64 = 1e-6;
// Largest log-space move per iteration.
const MAX_STEP: f64 = 2.0;

fn score_norm(g: [f64; 2]) -> f64 {
    libm::hypot(g[0], g[1])
}

/// Gradient and Hessian `[h_αα, h_αλ, h_λλ]` with respect to `(ln α, ln λ)`.
fn log_space(theta: &GeParams, g: [f64; 2], hs: [[f64; 2]; 2]) -> ([f64; 2], [f64; 3]) {
    let (a, l) = (theta.alpha(), theta.lambda());
    (
        [a * g[0], l * g[1]],
        [
            a * a * hs[0][0] + a * g[0],
            a * l * hs[0][1],
            l * l * hs[1][1] + l * g[1],
        ],
    )
}

fn is_peak(h00: f64, h11: f64, det: f64) -> bool {
    -h00 > MIN_CURVATURE && -h11 > MIN_CURVATURE && det > MIN_CURVATURE * MIN_CURVATURE
}

/// Maximize the observed-data log-likelihood.
///
/// Starts from `config.start`, takes [`WARM_START_STEPS`] EM steps, then
/// runs Newton–Raphson with a halving line search for at most
/// `config.max_iter` iterations. When the log-space Hessian is not negative
/// definite a gradient step is used instead. Converged means the score norm
/// is below [`SCORE_TOL`].
pub fn fit_ml(
    data: &IntervalDataset,
    schedule: &InspectionSchedule,
    config: &EmConfig,
) -> Result<FitResult> {
    config.validate()?;
    data.check_against(schedule)?;
    if data.failures().iter().all(|&x| x == 0) {
        return Err(Error::InvalidDataset(
            "maximum likelihood needs at least one observed failure",
        ));
    }

    let mut theta = config.start;
    let mut trace = vec![(theta.alpha(), theta.lambda())];
    for _ in 0..WARM_START_STEPS {
        match em_step(&theta, data, schedule) {
            Ok(next) => {
                theta = next;
                trace.push((theta.alpha(), theta.lambda()));
            }
            Err(_) => break,
        }
    }

    let mut failure = Some(FitFailure::MaxIterations);
    let (mut ll, mut g, mut hs) = derivatives(&theta, data, schedule);
    for _ in 0..config.max_iter {
        let (a, l) = (theta.alpha(), theta.lambda());
        let (grad, [h00, h01, h11]) = log_space(&theta, g, hs);
        let det = h00 * h11 - h01 * h01;
        let newton = h00 < 0.0 && det > 0.0;
        if score_norm(g) < SCORE_TARGET && is_peak(h00, h11, det) {
            failure = None;
            break;
        }
        let mut dir = if newton {
            [
                -(h11 * grad[0] - h01 * grad[1]) / det,
                -(h00 * grad[1] - h01 * grad[0]) / det,
            ]
        } else {
            grad
        };
        let len = dir[0].abs().max(dir[1].abs());
        if len > MAX_STEP {
            dir = [dir[0] * MAX_STEP / len, dir[1] * MAX_STEP / len];
        }

        let mut accepted = None;
        let mut scale = 1.0;
        for _ in 0..60 {
            let cand = GeParams::new(a * libm::exp(scale * dir[0]), l * libm::exp(scale * dir[1]));
            if let Ok(cand) = cand {
                let cand_ll = log_likelihood(&cand, data, schedule)?;
                // a full Newton step may lose a few ulps at the optimum
                let slack = if newton && scale == 1.0 {
                    64.0 * f64::EPSILON * ll.abs()
                } else {
                    0.0
                };
                if cand_ll.is_finite() && cand_ll >= ll - slack {
                    accepted = Some(cand);
                    break;
                }
            }
            scale *= 0.5;
        }
        let Some(next) = accepted else {
            failure = Some(FitFailure::Stalled);
            break;
        };
        let moved = (scale * dir[0]).abs().max((scale * dir[1]).abs());
        theta = next;
        trace.push((theta.alpha(), theta.lambda()));
        (ll, g, hs) = derivatives(&theta, data, schedule);
        if moved < 1e-15 {
            failure = Some(FitFailure::Stalled);
            break;
        }
    }
    if failure.is_some() && score_norm(g) < SCORE_TOL {
        let (_, [h00, h01, h11]) = log_space(&theta, g, hs);
        if is_peak(h00, h11, h00 * h11 - h01 * h01) {
            failure = None;
        }
    }

    Ok(FitResult {
        method: Method::Ml,
        params: theta,
        iterations: trace.len() - 1,
        converged: failure.is_none(),
        loglik: ll,
        trace,
        failure,
    })
}
