//! Acceptance suite. Each `criterion_N_*` test prints one PASS/FAIL line and
//! asserts the same condition. The full Monte Carlo study is run once and
//! shared between criteria 1, 2, 6 and 7.

use std::sync::OnceLock;

use gecens::estep::{e1, e2, e3, e4};
use gecens::{
    chen_step, em_step, expectation_table, fit_ml, generate, q_value, score, EStepSums, EmConfig,
    GeParams, InspectionSchedule, IntervalDataset, Method, RemovalPlan,
};
use gecens_cli::study::{
    paper_config, run_study, summary_csv, write_outputs, StudyOutput, ESTIMATORS,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 1;

fn study() -> &'static StudyOutput {
    static OUT: OnceLock<StudyOutput> = OnceLock::new();
    OUT.get_or_init(|| run_study(&paper_config(SEED), None).expect("study runs"))
}

fn report(criterion: u32, title: &str, ok: bool, detail: &str) {
    println!(
        "criterion {criterion} [{}] {title}: {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
}

fn p(a: f64, l: f64) -> GeParams {
    GeParams::new(a, l).unwrap()
}

fn schedule() -> InspectionSchedule {
    paper_config(SEED).schedule
}

fn plan(i: usize) -> RemovalPlan {
    paper_config(SEED).plans[i].percentages.clone()
}

/// (bias α, MSE α, bias λ, MSE λ)
fn table(scenario: &str, m: Method) -> [f64; 4] {
    match (scenario, m) {
        ("p1", Method::Em) => [-0.03470, 0.03709, 0.01747, 0.00033],
        ("p1", Method::Ml) => [0.05680, 0.10186, 0.00119, 0.00012],
        ("p1", Method::EmChen) => [-0.03470, 0.03709, 0.04212, 0.00203],
        ("p2", Method::Em) => [0.10301, 0.05822, 0.03990, 0.00162],
        ("p2", Method::Ml) => [0.07546, 0.16765, 0.00222, 0.00027],
        ("p2", Method::EmChen) => [0.10301, 0.05822, 0.08084, 0.00701],
        ("p3", Method::Em) => [-0.21885, 0.05793, -0.00581, 0.00005],
        ("p3", Method::Ml) => [0.05504, 0.06842, 0.00140, 0.00006],
        ("p3", Method::EmChen) => [-0.21885, 0.05793, 0.00518, 0.00007],
        ("p4", Method::Em) => [-0.23154, 0.06314, 0.00364, 0.00003],
        ("p4", Method::Ml) => [0.05017, 0.06794, 0.00101, 0.00007],
        ("p4", Method::EmChen) => [-0.23154, 0.06314, 0.01484, 0.00027],
        _ => unreachable!(),
    }
}

#[test]
fn criterion_1_table_reproduction() {
    let summary = &study().summary;
    let mut all = true;
    for scenario in ["p1", "p2", "p3", "p4"] {
        for m in ESTIMATORS {
            let c = summary.cell(scenario, m).unwrap();
            let [ba, ma, bl, ml] = table(scenario, m);
            let tol_a = 0.03f64.max(3.0 * c.se_bias_alpha);
            let tol_l = 0.006f64.max(3.0 * c.se_bias_lambda);
            let within = |ours: f64, paper: f64| (ours - paper).abs() <= 0.35 * paper.abs();
            let ok = (c.bias_alpha - ba).abs() <= tol_a
                && (c.bias_lambda - bl).abs() <= tol_l
                && within(c.mse_alpha, ma)
                && within(c.mse_lambda, ml);
            all &= ok;
            println!(
                "  {scenario} {m:<7} {} bias_a {:+.5} ({ba:+.5}) mse_a {:.5} ({ma:.5}) bias_l {:+.5} ({bl:+.5}) mse_l {:.5} ({ml:.5}) used {}",
                if ok { "ok  " } else { "MISS" },
                c.bias_alpha,
                c.mse_alpha,
                c.bias_lambda,
                c.mse_lambda,
                c.used
            );
        }
    }
    let cell = |s, m| summary.cell(s, m).unwrap();
    let signs = ["p3", "p4"]
        .iter()
        .all(|s| cell(s, Method::Em).bias_alpha < 0.0)
        && ["p1", "p2", "p3", "p4"]
            .iter()
            .all(|s| cell(s, Method::Ml).bias_alpha > 0.0)
        && ["p1", "p2", "p4"].iter().all(|s| {
            cell(s, Method::Em).bias_lambda.abs() < cell(s, Method::EmChen).bias_lambda.abs()
        });
    println!(
        "  sign pattern {}",
        if signs {
            "reproduced"
        } else {
            "not reproduced"
        }
    );
    let ok = all && signs;
    report(
        1,
        "Table 1 bias/MSE reproduction",
        ok,
        "see cell lines above",
    );
    assert!(ok);
}

#[test]
fn criterion_2_convergence_speed() {
    let summary = &study().summary;
    let mut ok = true;
    let mut detail = Vec::new();
    for scenario in ["p1", "p2", "p3", "p4"] {
        for m in [Method::Em, Method::EmChen] {
            let c = summary.cell(scenario, m).unwrap();
            ok &= c.median_iterations < 20.0;
            detail.push(format!("{scenario}/{m}={}", c.median_iterations));
        }
    }
    report(
        2,
        "median EM and EM-Chen iterations < 20",
        ok,
        &detail.join(" "),
    );
    assert!(ok);
}

/// Double-exponential quadrature of `g(u) f(u) / mass` over `(a, b]`.
fn quadrature_mean(params: &GeParams, a: f64, b: f64, g: impl Fn(f64) -> f64) -> f64 {
    use quadrature::double_exponential::integrate;
    let num = if b.is_finite() {
        integrate(|u| g(u) * params.pdf(u), a, b, 1e-14).integral
    } else {
        integrate(
            |y| {
                let u = a + y / (1.0 - y);
                g(u) * params.pdf(u) / ((1.0 - y) * (1.0 - y))
            },
            0.0,
            1.0,
            1e-14,
        )
        .integral
    };
    num / params.interval_mass(a, b)
}

/// Mean and standard error of `draws` lifetimes conditioned on `(a, b]`.
fn conditioned_mean(
    params: &GeParams,
    a: f64,
    b: f64,
    draws: usize,
    rng: &mut ChaCha8Rng,
) -> (f64, f64) {
    let (fa, fb) = (
        params.cdf(a),
        if b.is_finite() { params.cdf(b) } else { 1.0 },
    );
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..draws {
        let v = fa + (fb - fa) * rng.random::<f64>();
        let t = params
            .quantile(v.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON))
            .unwrap();
        sum += t;
        sq += t * t;
    }
    let n = draws as f64;
    let mean = sum / n;
    (mean, ((sq / n - mean * mean) / (n - 1.0)).sqrt())
}

#[test]
fn criterion_3_estep_correctness() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);

    let mut worst_closed = 0.0f64;
    for _ in 0..100 {
        let g = p(rng.random_range(0.2..6.0), rng.random_range(0.01..1.0));
        let scale = 1.0 / g.lambda();
        let a = rng.random_range(0.0..3.0) * scale;
        let b = a + rng.random_range(0.05..3.0) * scale;
        let lw = |u: f64| g.log_base(u);
        let q2 = quadrature_mean(&g, a, b, lw);
        let q4 = quadrature_mean(&g, a, f64::INFINITY, lw);
        worst_closed = worst_closed
            .max((e2(&g, a, b).unwrap() - q2).abs() / q2.abs())
            .max((e4(&g, a).unwrap() - q4).abs() / q4.abs());
    }

    let truth = p(1.5, 0.06);
    let mut worst_z = 0.0f64;
    for (a, b) in [(0.0, 5.5), (20.5, 25.5), (50.5, 60.5)] {
        let (m, se) = conditioned_mean(&truth, a, b, 10_000_000, &mut rng);
        worst_z = worst_z.max((e1(&truth, a, b).unwrap() - m).abs() / se);
    }
    for a in [5.5, 60.5] {
        let (m, se) = conditioned_mean(&truth, a, f64::INFINITY, 10_000_000, &mut rng);
        worst_z = worst_z.max((e3(&truth, a).unwrap() - m).abs() / se);
    }

    let mut worst_total = 0.0f64;
    for _ in 0..50 {
        let g = p(rng.random_range(0.3..5.0), rng.random_range(0.02..0.5));
        let s = schedule();
        let rows = expectation_table(&g, &s).unwrap();
        let mut total = 0.0;
        for (row, (lo, hi)) in rows.iter().zip(s.intervals()) {
            total += g.interval_mass(lo, hi) * row.e1;
        }
        let last = rows.last().unwrap();
        total += g.sf(s.times()[s.len() - 1]) * last.e3;
        worst_total = worst_total.max((total - g.mean()).abs() / g.mean());
    }

    let ok = worst_closed <= 1e-10 && worst_z <= 3.0 && worst_total <= 1e-6;
    report(
        3,
        "E-step correctness",
        ok,
        &format!("closed-form rel err {worst_closed:.2e}, MC max |z| {worst_z:.2}, total expectation rel err {worst_total:.2e}"),
    );
    assert!(ok);
}

/// Random valid `(data, schedule, θ_t)` of moderate size.
fn fuzz_state(rng: &mut ChaCha8Rng) -> (IntervalDataset, InspectionSchedule, GeParams) {
    loop {
        let m = rng.random_range(1..8);
        let mut t = 0.0;
        let times: Vec<f64> = (0..m)
            .map(|_| {
                t += rng.random_range(0.5..15.0);
                t
            })
            .collect();
        let failures: Vec<u64> = (0..m).map(|_| rng.random_range(0..30)).collect();
        let removals: Vec<u64> = (0..m)
            .map(|_| {
                if rng.random_bool(0.4) {
                    rng.random_range(0..20)
                } else {
                    0
                }
            })
            .collect();
        let Ok(d) = IntervalDataset::new(failures, removals) else {
            continue;
        };
        let theta = p(
            libm::exp(rng.random_range(-1.5..2.0)),
            libm::exp(rng.random_range(-4.0..0.0)),
        );
        return (d, InspectionSchedule::new(times).unwrap(), theta);
    }
}

/// Central secant slopes of `θ -> Q(θ | θ_t)` with step `1e-8` relative.
/// `Q = n ln α + n ln λ - λ T + (α - 1) L` is differenced term by term, the
/// log terms through `ln_1p`, so the slope carries no cancellation error.
fn q_gradient(
    theta: &GeParams,
    theta_t: &GeParams,
    d: &IntervalDataset,
    s: &InspectionSchedule,
) -> [f64; 2] {
    let sums = EStepSums::compute(theta_t, d, s).unwrap();
    assert_eq!(sums.q(theta), q_value(theta, theta_t, d, s).unwrap());
    let (a, l) = (theta.alpha(), theta.lambda());
    let log_diff = |x: f64, h: f64| (h / x).ln_1p() - (-h / x).ln_1p();
    let (ha, hl) = (1e-8 * a, 1e-8 * l);
    [
        (sums.n * log_diff(a, ha) + 2.0 * ha * sums.log_base) / (2.0 * ha),
        (sums.n * log_diff(l, hl) - 2.0 * hl * sums.time) / (2.0 * hl),
    ]
}

#[test]
fn criterion_4_mstep_correctness() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let s = schedule();
    let mut worst_grad = 0.0f64;
    for k in 0..50 {
        let d = generate(112, &p(1.5, 0.06), &s, &plan(k % 4), &mut rng).unwrap();
        let theta_t = p(rng.random_range(0.5..3.0), rng.random_range(0.02..0.2));
        let next = em_step(&theta_t, &d, &s).unwrap();
        let g = q_gradient(&next, &theta_t, &d, &s);
        worst_grad = worst_grad.max(g[0].abs()).max(g[1].abs());
    }
    let mut decreases = 0;
    let mut tried = 0;
    while tried < 1000 {
        let (d, s, theta_t) = fuzz_state(&mut rng);
        let Ok(next) = em_step(&theta_t, &d, &s) else {
            continue;
        };
        tried += 1;
        let before = q_value(&theta_t, &theta_t, &d, &s).unwrap();
        let after = q_value(&next, &theta_t, &d, &s).unwrap();
        if after < before - 1e-12 * before.abs().max(1.0) {
            decreases += 1;
        }
    }
    let ok = worst_grad < 1e-8 && decreases == 0;
    report(
        4,
        "M-step correctness",
        ok,
        &format!("max |∇Q| at update {worst_grad:.2e}, Q decreases {decreases}/{tried}"),
    );
    assert!(ok);
}

/// Grid search on `(ln α, ln λ)` followed by shrinking local grids.
fn grid_oracle(d: &IntervalDataset, s: &InspectionSchedule) -> (f64, f64) {
    let ll = |x: f64, y: f64| gecens::log_likelihood(&p(libm::exp(x), libm::exp(y)), d, s).unwrap();
    let mut best = (0.0, -3.0, f64::NEG_INFINITY);
    for i in 0..=120 {
        for j in 0..=120 {
            let (x, y) = (-2.5 + 5.5 * i as f64 / 120.0, -6.0 + 5.0 * j as f64 / 120.0);
            let v = ll(x, y);
            if v > best.2 {
                best = (x, y, v);
            }
        }
    }
    let mut w = 0.05;
    while w > 1e-11 {
        let (cx, cy, _) = best;
        for i in -5..=5 {
            for j in -5..=5 {
                let (x, y) = (cx + w * i as f64 / 5.0, cy + w * j as f64 / 5.0);
                let v = ll(x, y);
                if v > best.2 {
                    best = (x, y, v);
                }
            }
        }
        if (best.0, best.1) == (cx, cy) {
            w *= 0.5;
        }
    }
    (libm::exp(best.0), libm::exp(best.1))
}

#[test]
fn criterion_5_ml_correctness() {
    let s = schedule();
    let truth = p(1.5, 0.06);
    let config = EmConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);

    let mut worst_score = 0.0f64;
    let mut worst_oracle = 0.0f64;
    let mut checked = 0;
    while checked < 20 {
        let d = generate(30, &truth, &s, &plan(checked % 4), &mut rng).unwrap();
        let Ok(fit) = fit_ml(&d, &s, &config) else {
            continue;
        };
        if !fit.converged {
            continue;
        }
        checked += 1;
        let sc = score(&fit.params, &d, &s).unwrap();
        worst_score = worst_score.max(libm::hypot(sc[0], sc[1]));
        let (a, l) = grid_oracle(&d, &s);
        worst_oracle = worst_oracle
            .max((fit.params.alpha() - a).abs())
            .max((fit.params.lambda() - l).abs());
    }

    let big = generate(100_000, &truth, &s, &plan(0), &mut rng).unwrap();
    let fit = fit_ml(&big, &s, &config).unwrap();
    let (da, dl) = (
        fit.params.alpha() - truth.alpha(),
        fit.params.lambda() - truth.lambda(),
    );

    let ok = worst_score < 1e-8
        && worst_oracle <= 1e-4
        && fit.converged
        && da.abs() <= 0.1
        && dl.abs() <= 0.005;
    report(
        5,
        "ML correctness",
        ok,
        &format!("max score {worst_score:.2e}, max oracle gap {worst_oracle:.2e}, n=1e5 error ({da:+.4}, {dl:+.5})"),
    );
    assert!(ok);
}

#[test]
fn criterion_6_structural_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut accounting_failures = 0;
    for _ in 0..10_000 {
        let m = rng.random_range(1..10);
        let mut t = 0.0;
        let times: Vec<f64> = (0..m)
            .map(|_| {
                t += rng.random_range(0.1..20.0);
                t
            })
            .collect();
        let mut pct: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0)).collect();
        pct[m - 1] = 1.0;
        let n = rng.random_range(1..500);
        let g = p(
            libm::exp(rng.random_range(-2.0..2.5)),
            libm::exp(rng.random_range(-5.0..1.0)),
        );
        let s = InspectionSchedule::new(times).unwrap();
        let d = generate(n, &g, &s, &RemovalPlan::new(pct).unwrap(), &mut rng).unwrap();
        let total: u64 = d.failures().iter().sum::<u64>() + d.removals().iter().sum::<u64>();
        if total != n || d.n() != n || d.len() != m {
            accounting_failures += 1;
        }
    }

    let mut worst_alpha = 0.0f64;
    let mut compared = 0;
    while compared < 1000 {
        let (d, s, theta_t) = fuzz_state(&mut rng);
        let (Ok(em), Ok(chen)) = (em_step(&theta_t, &d, &s), chen_step(&theta_t, &d, &s)) else {
            continue;
        };
        compared += 1;
        worst_alpha = worst_alpha.max((em.alpha() - chen.alpha()).abs() / em.alpha());
    }
    for run in &study().runs {
        for r in &run.replications {
            if let (Some(a), Some(b)) = (r.estimates[0].first_alpha, r.estimates[2].first_alpha) {
                worst_alpha = worst_alpha.max((a - b).abs() / a);
            }
        }
    }

    let s = schedule();
    let config = EmConfig::default();
    let mut worst_scale = 0.0f64;
    let mut scale_mismatch = 0;
    for seed in 0..20 {
        let truth = p(1.5, 0.06);
        let base = generate(
            112,
            &truth,
            &s,
            &plan(seed % 4),
            &mut ChaCha8Rng::seed_from_u64(seed as u64),
        )
        .unwrap();
        let Ok(fit) = fit_ml(&base, &s, &config) else {
            continue;
        };
        if !fit.converged {
            continue;
        }
        for c in [0.5, 2.0, 4.0] {
            let sc = s.scaled(c).unwrap();
            let g = p(1.5, 0.06 / c);
            let d = generate(
                112,
                &g,
                &sc,
                &plan(seed % 4),
                &mut ChaCha8Rng::seed_from_u64(seed as u64),
            )
            .unwrap();
            if d != base {
                scale_mismatch += 1;
                continue;
            }
            let f = fit_ml(&d, &sc, &config).unwrap();
            worst_scale = worst_scale
                .max((f.params.alpha() - fit.params.alpha()).abs() / fit.params.alpha())
                .max((f.params.lambda() * c - fit.params.lambda()).abs() / fit.params.lambda());
        }
    }

    let ok = accounting_failures == 0
        && worst_alpha <= 1e-12
        && scale_mismatch == 0
        && worst_scale <= 1e-6;
    report(
        6,
        "structural invariants",
        ok,
        &format!(
            "accounting failures {accounting_failures}/10000, EM vs EM-Chen one-step α rel gap {worst_alpha:.1e}, \
             scaled datasets differing {scale_mismatch}, ML scale equivariance rel err {worst_scale:.1e}"
        ),
    );
    assert!(ok);
}

fn files(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().into_string().unwrap(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

#[test]
fn criterion_7_determinism() {
    let first = study();
    let second = run_study(&paper_config(SEED), Some(3)).unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    write_outputs(first, a.path()).unwrap();
    write_outputs(&second, b.path()).unwrap();
    let (fa, fb) = (files(a.path()), files(b.path()));
    let ok =
        fa == fb && fa.len() == 13 && summary_csv(&first.summary) == summary_csv(&second.summary);
    report(
        7,
        "determinism across runs and thread counts",
        ok,
        &format!(
            "{} files compared byte for byte (default pool vs 3 threads)",
            fa.len()
        ),
    );
    assert!(ok);
}
