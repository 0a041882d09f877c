//! Engine-independent checks of the algebraic identities behind the
//! determinant formulas, plus seeded suites that aggregate them.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distribution::{cdf_contour, cdf_residue, CdfOptions};
use crate::engine::{fredholm_det, k0_eigensystem, nystrom_k, nystrom_k0, Discretization, Precision};
use crate::exec;
use crate::model::ModelParams;
use crate::numerics::dd::{CDd, Dd};
use crate::numerics::linalg::lu_det_in_place;
use crate::numerics::{hermite_poly, tau_binomial};
use crate::{Error, Result};

/// Minimum pairwise distance accepted by the samplers.
pub const SAMPLE_SEPARATION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub rel_err: f64,
}

impl IdentityCheck {
    fn new(lhs: Complex64, rhs: Complex64) -> Self {
        let scale = lhs.norm() + rhs.norm();
        let rel_err = if scale == 0.0 { 0.0 } else { (lhs - rhs).norm() / scale };
        Self { lhs, rhs, rel_err }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub identity_name: String,
    pub sample_count: usize,
    pub max_relative_error: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub worst_case_input: String,
}

impl IdentityReport {
    fn from_samples(name: impl Into<String>, tolerance: f64, samples: Vec<(f64, String)>) -> Self {
        let sample_count = samples.len();
        let (max_relative_error, worst_case_input) = samples
            .into_iter()
            .fold((0.0, String::new()), |best, s| if s.0 > best.0 || s.0.is_nan() { s } else { best });
        Self {
            identity_name: name.into(),
            sample_count,
            max_relative_error,
            tolerance,
            pass: max_relative_error < tolerance,
            worst_case_input,
        }
    }
}

fn format_points(v: &[Complex64]) -> String {
    let parts: Vec<String> = v.iter().map(|z| format!("{:.17e}{:+.17e}i", z.re, z.im)).collect();
    format!("[{}]", parts.join(", "))
}

fn check_distinct(v: &[Complex64], min_gap: f64) -> Result<()> {
    for i in 0..v.len() {
        for j in 0..i {
            if (v[i] - v[j]).norm() < min_gap {
                return Err(Error::DegenerateSample("points are not distinct"));
            }
        }
    }
    Ok(())
}

fn nonzero(d: Complex64, what: &'static str) -> Result<Complex64> {
    if d.norm() < 1e-300 || !d.is_finite() {
        Err(Error::DegenerateSample(what))
    } else {
        Ok(d)
    }
}

/// Pivoted LU in double-double. The matrices here are nearly singular when
/// sample points cluster, so binary64 elimination loses the relative accuracy
/// the comparison needs.
fn det_extended(k: usize, entry: impl Fn(usize, usize) -> CDd) -> Result<Complex64> {
    let mut a: Vec<CDd> = (0..k * k).map(|idx| entry(idx / k, idx % k)).collect();
    Ok(lu_det_in_place(&mut a, k)?.to_c64())
}

/// `det(1/(p+qξ_iξ_j−ξ_i))` against
/// `(−1)^k (pq)^{k(k−1)/2} Π_{i≠j}(ξ_j−ξ_i)/(p+qξ_iξ_j−ξ_i) Π_i 1/((1−ξ_i)(qξ_i−p))`.
pub fn check_det_identity(params: &ModelParams, xi: &[Complex64]) -> Result<IdentityCheck> {
    let k = xi.len();
    if k == 0 {
        return Err(Error::DegenerateSample("empty sample"));
    }
    check_distinct(xi, 1e-12)?;
    let (p, q) = (params.p(), params.q());
    let denom = |i: usize, j: usize| p + q * xi[i] * xi[j] - xi[i];
    let mut entries = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            entries.push((i, j, nonzero(denom(i, j), "vanishing kernel denominator")?));
        }
    }
    let p_dd = Dd::from(p);
    let q_dd = Dd::ONE - p_dd;
    let xi_dd: Vec<CDd> = xi.iter().map(|&x| CDd::from(x)).collect();
    let lhs = det_extended(k, |i, j| {
        CDd::ONE / (CDd::from(p_dd) + (xi_dd[i] * xi_dd[j]).scale(q_dd) - xi_dd[i])
    })?;
    let mut rhs = Complex64::new(if k.is_multiple_of(2) { 1.0 } else { -1.0 }, 0.0) * (p * q).powi((k * (k - 1) / 2) as i32);
    for &(i, j, d) in &entries {
        if i != j {
            rhs *= (xi[j] - xi[i]) / d;
        }
    }
    for &x in xi {
        rhs /= nonzero((1.0 - x) * (q * x - p), "point at 1 or p/q")?;
    }
    Ok(IdentityCheck::new(lhs, rhs))
}

/// `det(1/(η_i − τη_j))` against `Π_{i<j}(η_i−η_j)(τη_j−τη_i) / Π_{i,j}(η_i−τη_j)`.
pub fn cauchy_closed_form(eta: &[Complex64], tau: f64) -> Result<IdentityCheck> {
    let k = eta.len();
    if k == 0 {
        return Err(Error::DegenerateSample("empty sample"));
    }
    check_distinct(eta, 1e-12)?;
    let mut denominator = Complex64::new(1.0, 0.0);
    for i in 0..k {
        for j in 0..k {
            denominator *= nonzero(eta[i] - tau * eta[j], "η_i = τη_j")?;
        }
    }
    let eta_dd: Vec<CDd> = eta.iter().map(|&e| CDd::from(e)).collect();
    let tau_dd = Dd::from(tau);
    let lhs = det_extended(k, |i, j| CDd::ONE / (eta_dd[i] - eta_dd[j].scale(tau_dd)))?;
    let mut numerator = Complex64::new(1.0, 0.0);
    for i in 0..k {
        for j in i + 1..k {
            numerator *= (eta[i] - eta[j]) * (tau * eta[j] - tau * eta[i]);
        }
    }
    Ok(IdentityCheck::new(lhs, numerator / denominator))
}

/// `η = (1 − ξ/τ)/(ξ − 1)`, the inverse of `ξ = (η + 1)/(η + 1/τ)`.
pub fn xi_to_eta(xi: Complex64, tau: f64) -> Complex64 {
    (1.0 - xi / tau) / (xi - 1.0)
}

pub fn eta_to_xi(eta: Complex64, tau: f64) -> Complex64 {
    (eta + 1.0) / (eta + 1.0 / tau)
}

/// Right side of the determinant identity computed directly in ξ and again
/// through the η-variables:
/// `(−1)^k τ^{k(k−1)/2}/(p^k(1−τ)^{2k}) Π_i (1+τη_i)²/η_i Π_{i≠j}(η_i−η_j)/(η_i−τη_j)`.
pub fn check_eta_chain(params: &ModelParams, xi: &[Complex64]) -> Result<IdentityCheck> {
    let tau = params.tau();
    if (tau - 1.0).abs() < 1e-8 {
        return Err(Error::DegenerateTau("η-substitution needs τ ≠ 1"));
    }
    let direct = check_det_identity(params, xi)?.rhs;
    let k = xi.len();
    let eta: Vec<Complex64> = xi.iter().map(|&x| xi_to_eta(x, tau)).collect();
    let p = params.p();
    let mut v = Complex64::new(if k.is_multiple_of(2) { 1.0 } else { -1.0 }, 0.0) * tau.powi((k * (k - 1) / 2) as i32)
        / (p.powi(k as i32) * (1.0 - tau).powi(2 * k as i32));
    for &e in &eta {
        v *= (1.0 + tau * e).powi(2) / nonzero(e, "η = 0")?;
    }
    for i in 0..k {
        for j in 0..k {
            if i != j {
                v *= (eta[i] - eta[j]) / nonzero(eta[i] - tau * eta[j], "η_i = τη_j")?;
            }
        }
    }
    Ok(IdentityCheck::new(direct, v))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenFunctionCheck {
    pub lhs_partial: Complex64,
    pub rhs: Complex64,
    /// Bound on the omitted tail `Σ_{k>K}`.
    pub bound: f64,
}

/// `Σ_{k=m}^{K} [k−1, k−m]_τ z^k` against `Π_{j=1}^m z/(1 − τ^{m−j} z)`.
pub fn check_gen_function(m: usize, tau: f64, z: Complex64, k_trunc: usize) -> Result<GenFunctionCheck> {
    if m == 0 {
        return Err(Error::InvalidParameter("m starts at 1".into()));
    }
    if k_trunc < m {
        return Err(Error::EmptySum { m, k_max: k_trunc });
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidParameter(format!("τ must be positive, got {tau}")));
    }
    // Poles of the product sit at τ^{−(m−j)}, j = 1..m.
    let limit = tau.powi(1 - m as i32).min(1.0) / 2.0;
    if z.norm() >= limit {
        return Err(Error::OutsideConvergenceDisk { modulus: z.norm(), limit });
    }
    let mut lhs = Complex64::new(0.0, 0.0);
    for k in m..=k_trunc {
        lhs += tau_binomial(k as i64 - 1, (k - m) as i64, tau)? * z.powi(k as i32);
    }
    let rhs = (1..=m).fold(Complex64::new(1.0, 0.0), |acc, j| acc * z / (1.0 - tau.powi((m - j) as i32) * z));
    // [k−1, k−m]_τ ≤ max(1, τ^{(k−m)(m−1)})/(τ′;τ′)_{m−1} with τ′ = min(τ, 1/τ).
    let tp = tau.min(1.0 / tau);
    let c: f64 = (1..m).map(|i| 1.0 - tp.powi(i as i32)).product::<f64>().recip();
    let r = z.norm() * tau.powi(m as i32 - 1).max(1.0);
    let bound = c * z.norm().powi(m as i32) * r.powi((k_trunc + 1 - m) as i32) / (1.0 - r);
    Ok(GenFunctionCheck { lhs_partial: lhs, rhs, bound })
}

/// `e^{−(q²−p²)z²/4} H_i(√((q²−p²)/2)·z)`.
pub fn k0_eigenfunction(params: &ModelParams, i: usize, z: f64) -> f64 {
    let c = params.q() * params.q() - params.p() * params.p();
    (-c * z * z / 4.0).exp() * hermite_poly(i, (c / 2.0).sqrt() * z)
}

/// `‖K₀f_i − (τ^i/q)f_i‖₂/‖f_i‖₂` with the full-line Nyström rule.
pub fn eigenfunction_residual(params: &ModelParams, i: usize, n_nodes: usize) -> Result<f64> {
    params.require_left_drift()?;
    if i > 8 {
        return Err(Error::InvalidParameter(format!("eigenfunction index {i} exceeds 8")));
    }
    let op = nystrom_k0(params, None, n_nodes)?;
    let Discretization::Interval(rule) = op.rule() else {
        unreachable!("K₀ is discretized on an interval")
    };
    let f: Vec<f64> = rule.nodes().iter().map(|&z| k0_eigenfunction(params, i, z)).collect();
    let lambda = params.tau().powi(i as i32) / params.q();
    let a = op.matrix();
    let (mut num, mut den) = (0.0, 0.0);
    for (j, &w) in rule.weights().iter().enumerate() {
        let applied: f64 = (0..f.len()).map(|k| a[(j, k)].re * f[k]).sum();
        num += w * (applied - lambda * f[j]).powi(2);
        den += w * f[j] * f[j];
    }
    Ok((num / den).sqrt())
}

/// `k` points uniform on the admissible circle of radius `1.25R*`,
/// resampled until pairwise separated.
pub fn sample_xi<R: Rng>(params: &ModelParams, k: usize, rng: &mut R) -> Vec<Complex64> {
    let r = params.default_radius();
    resample(k, rng, |rng| Complex64::from_polar(r, TAU * rng.random::<f64>()))
}

/// `k` points uniform in area on the annulus `0.5 ≤ |η| ≤ 2`.
pub fn sample_eta<R: Rng>(k: usize, rng: &mut R) -> Vec<Complex64> {
    resample(k, rng, |rng| {
        let rho = (0.25 + 3.75 * rng.random::<f64>()).sqrt();
        Complex64::from_polar(rho, TAU * rng.random::<f64>())
    })
}

fn resample<R: Rng>(k: usize, rng: &mut R, mut draw: impl FnMut(&mut R) -> Complex64) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..k).map(|_| draw(rng)).collect();
        if check_distinct(&v, SAMPLE_SEPARATION).is_ok() {
            return v;
        }
    }
}

fn sample_rng(seed: u64, stream: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(1 << 20 | (index as u128) << 32);
    rng
}

fn name_stream(name: &str) -> u64 {
    name.bytes().fold(0xcbf29ce484222325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100000001b3))
}

/// Seeded sweep of one identity over `samples` draws. Each draw uses its own
/// RNG position so the report does not depend on scheduling.
fn sweep<F>(name: String, tolerance: f64, samples: usize, seed: u64, f: F) -> Result<IdentityReport>
where
    F: Fn(&mut ChaCha8Rng) -> Result<(f64, String)> + Sync,
{
    let stream = name_stream(&name);
    let rows = exec::try_map_range(samples, |s| f(&mut sample_rng(seed, stream, s)))?;
    Ok(IdentityReport::from_samples(name, tolerance, rows))
}

pub fn det_identity_report(params: &ModelParams, k: usize, samples: usize, seed: u64) -> Result<IdentityReport> {
    let name = format!("det_identity(k={k},p={})", params.p());
    sweep(name, 1e-10, samples, seed, |rng| {
        let xi = sample_xi(params, k, rng);
        Ok((check_det_identity(params, &xi)?.rel_err, format_points(&xi)))
    })
}

pub fn cauchy_report(k: usize, tau: f64, samples: usize, seed: u64) -> Result<IdentityReport> {
    sweep(format!("cauchy(k={k},tau={tau})"), 1e-10, samples, seed, |rng| {
        let eta = sample_eta(k, rng);
        Ok((cauchy_closed_form(&eta, tau)?.rel_err, format_points(&eta)))
    })
}

pub fn eta_chain_report(params: &ModelParams, k: usize, samples: usize, seed: u64) -> Result<IdentityReport> {
    let name = format!("eta_chain(k={k},p={})", params.p());
    sweep(name, 1e-10, samples, seed, |rng| {
        let xi = sample_xi(params, k, rng);
        Ok((check_eta_chain(params, &xi)?.rel_err, format_points(&xi)))
    })
}

/// Passes when the truncation error is within `max(bound, 1e-12)`; the
/// reported error is `|lhs − rhs|`.
pub fn gen_function_report(m: usize, tau: f64, z: Complex64, k_trunc: usize) -> Result<IdentityReport> {
    let c = check_gen_function(m, tau, z, k_trunc)?;
    let err = (c.lhs_partial - c.rhs).norm();
    let tolerance = c.bound.max(1e-12);
    Ok(IdentityReport::from_samples(
        format!("gen_function(m={m},tau={tau},z={z},K={k_trunc})"),
        tolerance,
        vec![(err, format!("bound={:.17e}", c.bound))],
    ))
}

pub fn eigenfunction_report(params: &ModelParams, i: usize, n_nodes: usize) -> Result<IdentityReport> {
    let tolerance = match i {
        0 => 1e-8,
        1 => 1e-7,
        _ => 1e-5,
    };
    let r = eigenfunction_residual(params, i, n_nodes)?;
    Ok(IdentityReport::from_samples(
        format!("eigenfunction(i={i},p={},n={n_nodes})", params.p()),
        tolerance,
        vec![(r, format!("i={i}"))],
    ))
}

/// Identity suite: determinant identity (k ≤ 5, p ∈ {0.2, 0.45}), Cauchy
/// determinant (k ≤ 6), η-chain, generating function and eigenfunctions.
pub fn identity_suite(seed: u64) -> Result<Vec<IdentityReport>> {
    let mut out = Vec::new();
    for p in [0.2, 0.45] {
        let params = ModelParams::new(p)?;
        for k in 1..=5 {
            out.push(det_identity_report(&params, k, 100, seed)?);
            out.push(eta_chain_report(&params, k, 100, seed)?);
        }
    }
    for k in 1..=6 {
        out.push(cauchy_report(k, 0.5, 100, seed)?);
    }
    for m in 1..=4 {
        out.push(gen_function_report(m, 0.5, Complex64::new(0.1, 0.0), 60)?);
    }
    out.push(gen_function_report(3, 0.5, Complex64::new(0.2, 0.0), 80)?);
    let params = ModelParams::new(0.3)?;
    for i in 0..=5 {
        out.push(eigenfunction_report(&params, i, 200)?);
    }
    Ok(out)
}

/// Engine invariants at `p = 0.3`: radius independence and node doubling of
/// `det(I − qK)`, contour against residue, and the `K₀` spectrum.
pub fn engine_suite() -> Result<Vec<IdentityReport>> {
    let params = ModelParams::new(0.3)?;
    let q = Complex64::new(params.q(), 0.0);
    let grid: Vec<(i64, f64)> = [1.0, 5.0].iter().flat_map(|&t| (-6..=6).step_by(3).map(move |x| (x, t))).collect();
    let mut radius_rows = Vec::new();
    let mut doubling_rows = Vec::new();
    for &(x, t) in &grid {
        let base = fredholm_det(&nystrom_k(&params, x, t, None, 128, Precision::Double)?, q)?;
        let wide_radius = 1.3 * params.auto_radius(t);
        let wide = fredholm_det(&nystrom_k(&params, x, t, Some(wide_radius), 128, Precision::Double)?, q)?;
        let doubled = fredholm_det(&nystrom_k(&params, x, t, None, 256, Precision::Double)?, q)?;
        radius_rows.push(((base - wide).norm(), format!("x={x},t={t}")));
        doubling_rows.push(((base - doubled).norm(), format!("x={x},t={t}")));
    }
    let mut out = vec![
        IdentityReport::from_samples("det_radius_independence", 1e-8, radius_rows),
        IdentityReport::from_samples("det_node_doubling", 1e-8, doubling_rows),
    ];
    let opts = CdfOptions::default();
    let mut agree = Vec::new();
    for m in 1..=3 {
        for x in [-4, 0, 4] {
            let a = cdf_contour(&params, m, x, 2.0, &opts)?.value;
            let b = cdf_residue(&params, m, x, 2.0, &opts)?.value;
            agree.push(((a - b).abs(), format!("m={m},x={x},t=2")));
        }
    }
    out.push(IdentityReport::from_samples("contour_vs_residue", 1e-8, agree));
    let spectrum = k0_eigensystem(&nystrom_k0(&params, None, 200)?)?;
    let rows = (0..=6)
        .map(|i| {
            let exact = params.tau().powi(i) / params.q();
            ((spectrum.values[i as usize] - exact).abs() / exact, format!("i={i}"))
        })
        .collect();
    out.push(IdentityReport::from_samples("k0_spectrum", 1e-6, rows));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_point_identity_is_the_quadratic_factorization() {
        let params = ModelParams::new(0.3).unwrap();
        let xi = c(1.7, -0.4);
        let r = check_det_identity(&params, &[xi]).unwrap();
        let direct = 1.0 / ((params.q() * xi - params.p()) * (xi - 1.0));
        assert!(r.rel_err < 1e-15);
        assert!((r.lhs - direct).norm() / direct.norm() < 1e-15);
    }

    #[test]
    fn two_point_identity() {
        let params = ModelParams::new(0.3).unwrap();
        let r = check_det_identity(&params, &[c(2.0, 1.0), c(-1.5, 0.5)]).unwrap();
        assert!(r.rel_err < 1e-12, "{r:?}");
        assert!(matches!(
            check_det_identity(&params, &[c(2.0, 0.0), c(2.0, 0.0)]),
            Err(Error::DegenerateSample(_))
        ));
    }

    #[test]
    fn seeded_identity_sweeps() {
        let params = ModelParams::new(0.45).unwrap();
        let r = det_identity_report(&params, 5, 100, 11).unwrap();
        assert!(r.pass && r.sample_count == 100, "{r:?}");
        let again = det_identity_report(&params, 5, 100, 11).unwrap();
        assert_eq!(r, again);
        assert!(eta_chain_report(&params, 4, 50, 3).unwrap().pass);
    }

    #[test]
    fn cauchy_examples() {
        let one = cauchy_closed_form(&[c(0.7, 0.2)], 0.5).unwrap();
        let direct = 1.0 / (c(0.7, 0.2) * 0.5);
        assert!((one.lhs - direct).norm() < 1e-15 && one.rel_err < 1e-15);
        assert!(cauchy_closed_form(&[c(1.0, 0.0), c(0.0, 2.0)], 0.5).unwrap().rel_err < 1e-13);
        assert!(cauchy_report(6, 0.5, 100, 5).unwrap().pass);
        assert!(cauchy_closed_form(&[c(1.0, 0.0), c(0.5, 0.0)], 0.5).is_err());
    }

    #[test]
    fn eta_substitution_round_trip() {
        let tau = 0.3 / 0.7;
        for xi in [c(2.0, 1.0), c(-1.0, 0.3), c(0.2, -3.0)] {
            assert!((eta_to_xi(xi_to_eta(xi, tau), tau) - xi).norm() < 1e-14);
        }
    }

    #[test]
    fn generating_function() {
        let z = c(0.1, 0.0);
        let g = check_gen_function(1, 0.5, z, 60).unwrap();
        assert!((g.rhs - z / (1.0 - z)).norm() < 1e-16);
        let g = check_gen_function(2, 0.5, z, 60).unwrap();
        assert!((g.lhs_partial - g.rhs).norm() < 1e-12);
        let g = check_gen_function(3, 0.5, c(0.2, 0.0), 80).unwrap();
        assert!((g.lhs_partial - g.rhs).norm() <= g.bound.max(1e-15));
        // A short truncation leaves an error that the bound must still cover.
        let g = check_gen_function(3, 2.0, c(0.05, 0.05), 8).unwrap();
        let err = (g.lhs_partial - g.rhs).norm();
        assert!(err > 0.0 && err <= g.bound, "{err} {}", g.bound);
        assert!(matches!(
            check_gen_function(2, 0.5, c(0.6, 0.0), 60),
            Err(Error::OutsideConvergenceDisk { .. })
        ));
    }

    #[test]
    fn eigenfunction_residuals() {
        let params = ModelParams::new(0.3).unwrap();
        assert!(eigenfunction_residual(&params, 0, 200).unwrap() < 1e-8);
        assert!(eigenfunction_residual(&params, 1, 200).unwrap() < 1e-7);
        for i in 2..=5 {
            let coarse = eigenfunction_residual(&params, i, 100).unwrap();
            let fine = eigenfunction_residual(&params, i, 200).unwrap();
            assert!(fine < 1e-5 && fine <= coarse.max(1e-13), "{i} {coarse} {fine}");
        }
    }
}
