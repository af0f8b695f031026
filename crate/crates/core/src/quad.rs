//! Gauss–Legendre quadrature and truncated expectations of the GE law.
//!
//! Truncated means `E[g(T) | a < T <= b]` are integrated in probability
//! coordinates: with `z = F(u)` the measure `f(u) du` becomes `dz`, so the
//! tail `[a, inf)` maps onto a finite range without any cutoff. The lower
//! half `z <= 1/2` is parameterized by `z` and the upper half by the
//! survival `s = 1 - z`. The integrand is singular only where the
//! coordinate reaches 0 (`z^{1/α}` at the origin, `-ln s` in the tail), so
//! each half is split into panels graded geometrically toward 0 until the
//! panel length drops below its distance from the singular point.

use crate::dist::{log1mexp, GeParams};
use crate::TruncationError;

/// Number of Gauss–Legendre points per panel.
pub const ORDER: usize = 64;

/// Smallest conditioning mass accepted by [`truncated_means`].
pub const MIN_MASS: f64 = 1e-300;

// Geometric grading ratio of consecutive panel lengths.
const GRADING: f64 = 1.0 / 32.0;
// Panels shorter than this fraction of the range are not split further.
const MIN_PANEL: f64 = 1e-18;

// Positive roots of P_64 and their weights (the rule is symmetric).
const NODES: [f64; 32] = [
    0.024350292663424433,
    0.07299312178779904,
    0.12146281929612056,
    0.16964442042399283,
    0.21742364374000708,
    0.2646871622087674,
    0.31132287199021097,
    0.3572201583376681,
    0.4022701579639916,
    0.4463660172534641,
    0.48940314570705296,
    0.5312794640198946,
    0.571895646202634,
    0.6111553551723933,
    0.6489654712546573,
    0.6852363130542333,
    0.7198818501716109,
    0.7528199072605319,
    0.7839723589433414,
    0.8132653151227975,
    0.8406292962525803,
    0.8659993981540928,
    0.8893154459951141,
    0.9105221370785028,
    0.9295691721319396,
    0.9464113748584028,
    0.9610087996520538,
    0.973326827789911,
    0.983336253884626,
    0.9910133714767443,
    0.9963401167719553,
    0.9993050417357722,
];

const WEIGHTS: [f64; 32] = [
    0.048690957009139724,
    0.04857546744150343,
    0.048344762234802954,
    0.04799938859645831,
    0.04754016571483031,
    0.04696818281621002,
    0.046284796581314416,
    0.04549162792741814,
    0.044590558163756566,
    0.04358372452932345,
    0.04247351512365359,
    0.04126256324262353,
    0.03995374113272034,
    0.038550153178615626,
    0.03705512854024005,
    0.035472213256882386,
    0.033805161837141606,
    0.03205792835485155,
    0.030234657072402478,
    0.028339672614259483,
    0.02637746971505466,
    0.024352702568710874,
    0.022270173808383253,
    0.02013482315353021,
    0.017951715775697343,
    0.015726030476024718,
    0.013463047896718643,
    0.011168139460131128,
    0.008846759826363947,
    0.006504457968978363,
    0.004147033260562468,
    0.001783280721696433,
];

/// `∫_a^b f` with the 64-point Gauss–Legendre rule, for `N` integrands at once.
pub fn gauss_legendre<const N: usize, F>(a: f64, b: f64, mut f: F) -> [f64; N]
where
    F: FnMut(f64) -> [f64; N],
{
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = [0.0; N];
    for (&x, &w) in NODES.iter().zip(WEIGHTS.iter()) {
        let lo = f(mid - half * x);
        let hi = f(mid + half * x);
        for k in 0..N {
            acc[k] += w * (lo[k] + hi[k]);
        }
    }
    acc.map(|v| v * half)
}

/// A time `u` together with `w = 1 - e^{-λu}` in the forms the integrands need.
#[derive(Debug, Clone, Copy)]
pub struct LawPoint {
    pub time: f64,
    /// `ln w`
    pub log_base: f64,
    /// `w`
    pub base: f64,
    /// `1 - w = e^{-λu}`
    pub base_complement: f64,
}

impl LawPoint {
    #[inline]
    fn from_log_base(params: &GeParams, log_base: f64) -> Self {
        let base_complement = -libm::expm1(log_base);
        Self {
            time: -log1mexp(-log_base) / params.lambda(),
            log_base,
            base: libm::exp(log_base),
            base_complement,
        }
    }
}

/// `∫_lo^hi g` over a coordinate whose integrand may be singular at 0,
/// `0 <= lo < hi`.
fn graded<const N: usize, G>(lo: f64, hi: f64, g: &mut G) -> [f64; N]
where
    G: FnMut(f64) -> [f64; N],
{
    let floor = (hi - lo) * MIN_PANEL;
    let mut acc = [0.0; N];
    let mut upper = hi;
    loop {
        let len = upper - lo;
        if len <= lo.max(floor) {
            let part = gauss_legendre(lo, upper, &mut *g);
            for k in 0..N {
                acc[k] += part[k];
            }
            return acc;
        }
        let cut = lo + len * GRADING;
        let part = gauss_legendre(cut, upper, &mut *g);
        for k in 0..N {
            acc[k] += part[k];
        }
        upper = cut;
    }
}

/// `E[g(T) | a < T <= b]` for `T ~ GE(params)`, `0 <= a < b <= inf`.
///
/// Returns the conditional means together with the conditioning mass.
pub fn truncated_means<const N: usize, G>(
    params: &GeParams,
    a: f64,
    b: f64,
    mut g: G,
) -> Result<([f64; N], f64), TruncationError>
where
    G: FnMut(&LawPoint) -> [f64; N],
{
    let empty = || {
        if b.is_infinite() {
            TruncationError::EmptyTail { lower: a }
        } else {
            TruncationError::EmptyInterval { lower: a, upper: b }
        }
    };
    if !(a >= 0.0 && b > a) {
        return Err(empty());
    }
    let alpha = params.alpha();
    let mut acc = [0.0; N];
    let mut mass = 0.0;

    let z_lo = params.cdf(a);
    let z_hi = if b.is_infinite() { 1.0 } else { params.cdf(b) };
    if z_lo < 0.5 {
        let top = z_hi.min(0.5);
        if top > z_lo {
            let mut by_z = |z: f64| g(&LawPoint::from_log_base(params, libm::log(z) / alpha));
            let part = graded(z_lo, top, &mut by_z);
            for k in 0..N {
                acc[k] += part[k];
            }
            mass += top - z_lo;
        }
    }
    if z_hi > 0.5 {
        let s_lo = if b.is_infinite() { 0.0 } else { params.sf(b) };
        let s_hi = params.sf(a).min(0.5);
        if s_hi > s_lo {
            let mut by_s = |s: f64| g(&LawPoint::from_log_base(params, libm::log1p(-s) / alpha));
            let part = graded(s_lo, s_hi, &mut by_s);
            for k in 0..N {
                acc[k] += part[k];
            }
            mass += s_hi - s_lo;
        }
    }
    if !(mass >= MIN_MASS) {
        return Err(empty());
    }
    Ok((acc.map(|v| v / mass), mass))
}
