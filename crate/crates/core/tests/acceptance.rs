//! Acceptance suite: one PASS/FAIL line per criterion, each checked against
//! its tolerance and wall-clock budget.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use asep_core::distribution::{cdf_contour, cdf_residue, cdf_series_partial, limit_cdf, limit_trace, CdfOptions, SeriesOptions};
use asep_core::engine::{fredholm_det, k0_eigensystem, nystrom_k, nystrom_k0, nystrom_k1, trace_power, K1Config, Precision};
use asep_core::identities::{cauchy_report, check_gen_function, det_identity_report, eigenfunction_residual};
use asep_core::model::scaled_site;
use asep_core::simulator::{empirical_cdf, SimConfig};
use asep_core::{Complex64, ModelParams, Result, ScalingQuery};

const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn params(p: f64) -> ModelParams {
    ModelParams::new(p).expect("valid p")
}

fn c1_det_identity() -> Result<Outcome> {
    let mut worst = 0.0f64;
    for p in [0.2, 0.45] {
        for k in 1..=5 {
            let r = det_identity_report(&params(p), k, 100, SEED)?;
            worst = worst.max(r.max_relative_error);
        }
    }
    outcome(worst < 1e-10, format!("max rel err {worst:.3e}"))
}

fn c2_cauchy() -> Result<Outcome> {
    let mut worst = 0.0f64;
    for k in 1..=6 {
        worst = worst.max(cauchy_report(k, 0.5, 100, SEED)?.max_relative_error);
    }
    outcome(worst < 1e-10, format!("max rel err {worst:.3e}"))
}

fn c3_gen_function() -> Result<Outcome> {
    let mut worst = 0.0f64;
    for m in 1..=4 {
        let g = check_gen_function(m, 0.5, Complex64::new(0.1, 0.0), 60)?;
        worst = worst.max((g.lhs_partial - g.rhs).norm());
    }
    outcome(worst < 1e-12, format!("max |lhs - rhs| {worst:.3e}"))
}

fn c4_engine_consistency() -> Result<Outcome> {
    let m = params(0.3);
    let q = Complex64::new(m.q(), 0.0);
    let (mut radius_delta, mut doubling_delta) = (0.0f64, 0.0f64);
    for t in [0.5, 1.0, 2.0, 3.0, 5.0] {
        for x in -6..=6 {
            let base = fredholm_det(&nystrom_k(&m, x, t, None, 128, Precision::Double)?, q)?;
            let wide = fredholm_det(&nystrom_k(&m, x, t, Some(1.3 * m.auto_radius(t)), 128, Precision::Double)?, q)?;
            let fine = fredholm_det(&nystrom_k(&m, x, t, None, 256, Precision::Double)?, q)?;
            radius_delta = radius_delta.max((base - wide).norm());
            doubling_delta = doubling_delta.max((base - fine).norm());
        }
    }
    outcome(
        radius_delta < 1e-8 && doubling_delta < 1e-8,
        format!("radius delta {radius_delta:.3e}, doubling delta {doubling_delta:.3e}"),
    )
}

const GRID_P: [f64; 3] = [0.2, 0.3, 0.45];
const GRID_T: [f64; 3] = [0.5, 2.0, 5.0];

fn c5_method_agreement() -> Result<Outcome> {
    let opts = CdfOptions::default();
    let (mut worst, mut worst_m1) = (0.0f64, 0.0f64);
    for p in GRID_P {
        let params = params(p);
        let q = Complex64::new(params.q(), 0.0);
        for t in GRID_T {
            for x in -8..=8 {
                for m in 1..=3 {
                    let a = cdf_contour(&params, m, x, t, &opts)?.value;
                    let b = cdf_residue(&params, m, x, t, &opts)?.value;
                    worst = worst.max((a - b).abs());
                    if m == 1 {
                        // Reference determinant in double-double.
                        let op = nystrom_k(&params, x, t, None, opts.n_xi, Precision::Extended)?;
                        let det = 1.0 - fredholm_det(&op, q)?.re;
                        worst_m1 = worst_m1.max((a - det).abs()).max((b - det).abs());
                    }
                }
            }
        }
    }
    outcome(
        worst < 1e-8 && worst_m1 < 1e-10,
        format!("max |contour - residue| {worst:.3e}, m=1 vs 1-det {worst_m1:.3e}"),
    )
}

fn c6_series() -> Result<Outcome> {
    let m = params(0.3);
    let mut pass = true;
    let mut detail = Vec::new();
    for x in 0..=2 {
        let exact = cdf_contour(&m, 1, x, 0.3, &CdfOptions::default())?.value;
        let errs: Vec<f64> = (1..=3)
            .map(|k| cdf_series_partial(&m, 1, x, 0.3, k, &SeriesOptions::default()).map(|r| (r.value - exact).abs()))
            .collect::<Result<_>>()?;
        pass &= errs.windows(2).all(|w| w[1] < w[0]) && errs[2] < 1e-3;
        detail.push(format!("x={x}: {:.2e} > {:.2e} > {:.2e}", errs[0], errs[1], errs[2]));
    }
    outcome(pass, detail.join("; "))
}

fn c7_monte_carlo() -> Result<Outcome> {
    let m = params(0.3);
    let xs: Vec<i64> = (-4..=6).collect();
    let opts = CdfOptions::default();
    let mut misses = Vec::new();
    let mut worst_sigma = 0.0f64;
    for rank in 1..=3 {
        let cfg = SimConfig::new(m, rank, 2.0, 200_000, SEED + rank as u64)?;
        let emp = empirical_cdf(&cfg, &xs)?;
        for (i, &x) in xs.iter().enumerate() {
            let r = cdf_contour(&m, rank, x, 2.0, &opts)?;
            let exact = r.value;
            if emp.halfwidth[i] > 0.0 {
                worst_sigma = worst_sigma.max((emp.p_hat[i] - exact).abs() / emp.halfwidth[i] * emp.z_star);
            }
            // The exact value carries its own numerical error bar.
            let inside = emp.wilson_lower[i] - r.err_estimate <= exact && exact <= emp.wilson_upper[i] + r.err_estimate;
            if !inside {
                misses.push(format!("m={rank},x={x}"));
            }
        }
    }
    outcome(
        misses.is_empty(),
        format!("{} misses {:?}, worst deviation {worst_sigma:.2} sigma", misses.len(), misses),
    )
}

fn c8_mehler() -> Result<Outcome> {
    let m = params(0.3);
    let op = nystrom_k0(&m, None, 200)?;
    let spectrum = k0_eigensystem(&op)?;
    let eig = (0..=6)
        .map(|i| {
            let exact = m.tau().powi(i) / m.q();
            (spectrum.values[i as usize] - exact).abs() / exact
        })
        .fold(0.0f64, f64::max);
    let mut resid = 0.0f64;
    for i in 0..=5 {
        resid = resid.max(eigenfunction_residual(&m, i, 200)?);
    }
    let mut det = 0.0f64;
    for i in 0..=3 {
        let mu = Complex64::new(m.q() * m.tau().powi(-i), 0.0);
        det = det.max(fredholm_det(&op, mu)?.norm());
    }
    outcome(
        eig < 1e-6 && resid < 1e-5 && det < 1e-6,
        format!("eigenvalue rel err {eig:.3e}, residual {resid:.3e}, |det| {det:.3e}"),
    )
}

const SCALING_T: [f64; 3] = [10.0, 25.0, 50.0];

fn scaled(m: &ModelParams, y: f64, t: f64) -> Result<i64> {
    Ok(scaled_site(m, &ScalingQuery::new(y, t)?))
}

fn c9_scaling() -> Result<Outcome> {
    let m = params(0.3);
    let opts = CdfOptions { n_xi: 192, ..CdfOptions::default() };
    let mut pass = true;
    let mut detail = Vec::new();
    for rank in 1..=2 {
        for y in [-1.0, 0.0, 1.0] {
            let limit = limit_cdf(&m, rank, y, &opts)?.value;
            let devs: Vec<f64> = SCALING_T
                .iter()
                .map(|&t| Ok((cdf_contour(&m, rank, scaled(&m, y, t)?, t, &opts)?.value - limit).abs()))
                .collect::<Result<_>>()?;
            pass &= devs.windows(2).all(|w| w[1] < w[0]);
            detail.push(format!("m={rank},y={y}: {:.2e} {:.2e} {:.2e}", devs[0], devs[1], devs[2]));
        }
    }
    outcome(pass, detail.join("; "))
}

fn c10_traces() -> Result<Outcome> {
    let m = params(0.3);
    let mut pass = true;
    let mut detail = Vec::new();
    for n in 1..=3 {
        for y in [-1.0, 0.0, 1.0] {
            let limit = limit_trace(&m, n, y, 200)?;
            let devs: Vec<f64> = SCALING_T
                .iter()
                .map(|&t| {
                    let op = nystrom_k(&m, scaled(&m, y, t)?, t, None, 192, Precision::Double)?;
                    Ok((trace_power(&op, n)?.re - limit).abs())
                })
                .collect::<Result<_>>()?;
            pass &= devs.windows(2).all(|w| w[1] < w[0]);
            detail.push(format!("n={n},y={y}: {:.2e} {:.2e} {:.2e}", devs[0], devs[1], devs[2]));
        }
    }
    let closed = limit_trace(&m, 1, 0.0, 200)?;
    pass &= closed == 1.25;
    detail.push(format!("limit_trace(1, 0) = {closed}"));
    outcome(pass, detail.join("; "))
}

fn c11_k1() -> Result<Outcome> {
    let m = params(0.3);
    let t = 5.0;
    let x = scaled(&m, 0.0, t)?;
    let q = Complex64::new(m.q(), 0.0);
    let k = fredholm_det(&nystrom_k(&m, x, t, None, 128, Precision::Double)?, q)?;
    let k1 = fredholm_det(&nystrom_k1(&m, x, t, K1Config::defaults(&m, x, t))?, q)?;
    let d = (k - k1).norm();
    outcome(d < 1e-4, format!("|det K1 - det K| {d:.3e} at x={x}"))
}

fn c12_axioms() -> Result<Outcome> {
    let opts = CdfOptions::default();
    let (mut mono, mut range, mut left, mut right) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for p in GRID_P {
        let params = params(p);
        for t in GRID_T {
            for m in 1..=3 {
                let values: Vec<f64> = (-8..=8)
                    .map(|x| cdf_contour(&params, m, x, t, &opts).map(|r| r.value))
                    .collect::<Result<_>>()?;
                for w in values.windows(2) {
                    mono = mono.max(w[0] - w[1]);
                }
                for &v in &values {
                    range = range.max(-v).max(v - 1.0);
                }
                let lx = -((m as f64 + 10.0 * t + 50.0).ceil() as i64);
                let rx = (m as f64 + t + 10.0 * t.sqrt() + 50.0).ceil() as i64;
                left = left.max(cdf_contour(&params, m, lx, t, &opts)?.value.abs());
                right = right.max(1.0 - cdf_contour(&params, m, rx, t, &opts)?.value);
            }
        }
    }
    outcome(
        mono <= 1e-9 && range <= 1e-6 && left < 1e-8 && right < 1e-6,
        format!("monotonicity violation {mono:.2e}, range excess {range:.2e}, left tail {left:.2e}, right deficit {right:.2e}"),
    )
}

fn main() -> ExitCode {
    type Criterion = (u32, &'static str, u64, fn() -> Result<Outcome>);
    let criteria: [Criterion; 12] = [
        (1, "determinant identity", 5, c1_det_identity),
        (2, "Cauchy determinant", 2, c2_cauchy),
        (3, "generating function", 1, c3_gen_function),
        (4, "engine self-consistency", 30, c4_engine_consistency),
        (5, "contour vs residue", 300, c5_method_agreement),
        (6, "series partial sums", 120, c6_series),
        (7, "Monte Carlo oracle", 120, c7_monte_carlo),
        (8, "Mehler spectrum", 30, c8_mehler),
        (9, "scaling trend", 600, c9_scaling),
        (10, "trace limits", 120, c10_traces),
        (11, "K1 equivalence", 60, c11_k1),
        (12, "CDF axioms", 300, c12_axioms),
    ];
    let mut failures = 0;
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(budget);
        let (pass, detail) = match result {
            Ok(o) => (o.pass && in_time, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {id:>2} {:<4} {name}: {detail} [{:.2}s / {budget}s]",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    println!("{} of 12 criteria passed", 12 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
