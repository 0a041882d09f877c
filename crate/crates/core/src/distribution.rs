//! Probability formulas built on the engine.
//!
//! `P(x_m(t) ≤ x) = (1/2πi)∮ det(I − λqK) / ((λ;τ)_m λ) dλ` over a circle
//! enclosing the poles `λ = τ^{−j}`, `j < m`, and `λ = 0`; the residue form
//! of the same integral; the multiple-integral series; and the `t → ∞`
//! scaling limit with `K₀χ_{(−y,∞)}` in place of `K`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::engine::{self, det_values_scaled, fredholm_det_scaled, nystrom_k, nystrom_k0, trace_power, NystromOperator, Precision};
use crate::exec;
use crate::model::{check_time, ModelParams};
use crate::numerics::quadrature::compensated_sum;
use crate::numerics::{circle_rule, tau_binomial, tau_pochhammer};
use crate::{Error, Result};

/// Contour for the λ-integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaContour {
    pub radius: f64,
    pub n: usize,
}

impl LambdaContour {
    /// Radius `1.5·max(1, τ^{−(m−1)})` with 256 nodes.
    pub fn for_rank(tau: f64, m: usize) -> Self {
        Self {
            radius: Self::min_radius(tau, m),
            n: 256,
        }
    }

    fn min_radius(tau: f64, m: usize) -> f64 {
        1.5 * tau.powi(1 - m as i32).max(1.0)
    }

    fn validate(&self, tau: f64, m: usize) -> Result<()> {
        if self.n < 64 || !self.n.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "λ-contour needs an even node count ≥ 64, got {}",
                self.n
            )));
        }
        if self.radius < Self::min_radius(tau, m) * (1.0 - 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "λ-contour radius {} does not clear the poles (need ≥ {})",
                self.radius,
                Self::min_radius(tau, m)
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Contour,
    Residue,
    SeriesPartial,
    Limit,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Contour => "contour",
            Method::Residue => "residue",
            Method::SeriesPartial => "series_partial",
            Method::Limit => "limit",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CdfResult {
    /// Unclamped.
    pub value: f64,
    pub method: Method,
    pub err_estimate: f64,
    /// `value` clamped to `[0, 1]`, for display only.
    pub presentation: f64,
    pub diagnostics: BTreeMap<String, f64>,
}

impl CdfResult {
    fn new(value: f64, method: Method, err_estimate: f64, diagnostics: BTreeMap<String, f64>) -> Self {
        Self {
            value,
            method,
            err_estimate,
            presentation: value.clamp(0.0, 1.0),
            diagnostics,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfOptions {
    /// Nodes on the ξ-circle.
    pub n_xi: usize,
    /// ξ-circle radius; `None` uses [`ModelParams::auto_radius`].
    pub radius: Option<f64>,
    /// λ-contour; `None` uses [`LambdaContour::for_rank`].
    pub lambda: Option<LambdaContour>,
    pub precision: Precision,
    /// Return 1 for `x ≥ m` when the formula cannot be evaluated accurately.
    pub support_bound: bool,
    /// Redo a binary64 evaluation in double-double when its error estimate
    /// exceeds `1e-12`.
    pub auto_extend: bool,
    /// Gauss–Legendre nodes for `K₀`.
    pub k0_nodes: usize,
}

impl Default for CdfOptions {
    fn default() -> Self {
        Self {
            n_xi: 128,
            radius: None,
            lambda: None,
            precision: Precision::Double,
            support_bound: true,
            auto_extend: true,
            k0_nodes: 200,
        }
    }
}

/// Error level above which the support bound replaces a computed value.
const SUPPORT_TOLERANCE: f64 = 1e-6;

fn check_rank(m: usize) -> Result<()> {
    if m == 0 {
        Err(Error::InvalidParameter("particle rank m starts at 1".into()))
    } else {
        Ok(())
    }
}

/// Rough roundoff level of `det(I − μA)`: `u·√n·max|A|²`.
fn roundoff_estimate(op: &NystromOperator) -> f64 {
    let u = match op.precision() {
        Precision::Double => f64::EPSILON / 2.0,
        Precision::Extended => 1e-32,
    };
    u * (op.dim() as f64).sqrt() * op.max_entry().powi(2)
}

/// `x_m(t) ≤ m` almost surely: no particle passes its starting site.
fn support_result(method: Method, m: usize, x: i64, reason: f64) -> CdfResult {
    let mut d = BTreeMap::new();
    d.insert("support_bound".into(), 1.0);
    d.insert("rejected_err_estimate".into(), reason);
    d.insert("m".into(), m as f64);
    d.insert("x".into(), x as f64);
    CdfResult::new(1.0, method, 0.0, d)
}

fn support_applies(opts: &CdfOptions, m: usize, x: i64) -> bool {
    opts.support_bound && x >= m as i64
}

struct ContourSum {
    value: Complex64,
    halved: Complex64,
    /// Propagated rounding error of the determinants.
    roundoff: f64,
}

/// `(1/2πi)∮ det(I − λqA)/((λ;τ)_m λ) dλ`, plus the same sum on every other
/// node for an error estimate.
fn lambda_integral(op: &NystromOperator, m: usize, lc: &LambdaContour) -> Result<ContourSum> {
    let params = op.params();
    let tau = params.tau();
    lc.validate(tau, m)?;
    let rule = circle_rule(lc.radius, lc.n)?;
    let mus: Vec<Complex64> = rule.nodes().iter().map(|l| l * params.q()).collect();
    let dets = det_values_scaled(op, &mus)?;
    let factors: Vec<Complex64> = rule
        .nodes()
        .iter()
        .zip(rule.weights())
        .map(|(&l, &w)| w / (tau_pochhammer(l, tau, m) * l))
        .collect();
    let terms: Vec<Complex64> = factors.iter().zip(&dets).map(|(f, (d, _))| f * d).collect();
    let roundoff = factors.iter().zip(&dets).map(|(f, (_, e))| f.norm() * e).sum();
    let value = compensated_sum(terms.iter().copied());
    let halved = compensated_sum(terms.iter().step_by(2).map(|v| 2.0 * v));
    Ok(ContourSum { value, halved, roundoff })
}

fn build_k(params: &ModelParams, x: i64, t: f64, opts: &CdfOptions) -> Result<NystromOperator> {
    nystrom_k(params, x, t, opts.radius, opts.n_xi, opts.precision)
}

fn operator_diagnostics(op: &NystromOperator) -> BTreeMap<String, f64> {
    let mut d = BTreeMap::new();
    d.insert("n_xi".into(), op.dim() as f64);
    if let Some(r) = op.meta().radius {
        d.insert("xi_radius".into(), r);
    }
    d.insert("max_entry".into(), op.max_entry());
    d.insert("roundoff_estimate".into(), roundoff_estimate(op));
    d.insert("extended".into(), (op.precision() == Precision::Extended) as u8 as f64);
    d
}

/// Error level above which a binary64 result is recomputed in double-double.
const ESCALATE_TOLERANCE: f64 = 1e-12;

struct Evaluation {
    value: f64,
    err: f64,
    diagnostics: BTreeMap<String, f64>,
}

/// Builds `K`, evaluates, escalates precision if needed, and applies the
/// support bound as a last resort.
fn evaluate_k<F>(params: &ModelParams, m: usize, x: i64, t: f64, opts: &CdfOptions, method: Method, eval: F) -> Result<CdfResult>
where
    F: Fn(&NystromOperator) -> Result<Evaluation>,
{
    check_rank(m)?;
    check_time(t)?;
    let run = |precision: Precision| -> Result<Evaluation> {
        let op = build_k(params, x, t, &CdfOptions { precision, ..*opts })?;
        let mut e = eval(&op)?;
        e.diagnostics.extend(operator_diagnostics(&op));
        Ok(e)
    };
    let mut result = match run(opts.precision) {
        Err(Error::PrecisionRegime { max_entry, .. }) if support_applies(opts, m, x) => {
            return Ok(support_result(method, m, x, max_entry));
        }
        other => other?,
    };
    let mut escalated = 0.0;
    if opts.auto_extend && opts.precision == Precision::Double && result.err > ESCALATE_TOLERANCE {
        match run(Precision::Extended) {
            Ok(e) if e.err < result.err => {
                result = e;
                escalated = 1.0;
            }
            Ok(_) | Err(Error::PrecisionRegime { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    if result.err > SUPPORT_TOLERANCE && support_applies(opts, m, x) {
        return Ok(support_result(method, m, x, result.err));
    }
    result.diagnostics.insert("escalated".into(), escalated);
    result.diagnostics.insert("support_bound".into(), 0.0);
    Ok(CdfResult::new(result.value, method, result.err, result.diagnostics))
}

/// `P(x_m(t) ≤ x)` from the λ-contour integral.
pub fn cdf_contour(params: &ModelParams, m: usize, x: i64, t: f64, opts: &CdfOptions) -> Result<CdfResult> {
    let lc = opts.lambda.unwrap_or_else(|| LambdaContour::for_rank(params.tau(), m));
    evaluate_k(params, m, x, t, opts, Method::Contour, |op| {
        let sum = lambda_integral(op, m, &lc)?;
        let doubling = (sum.value - sum.halved).norm();
        let imag = sum.value.im.abs();
        let mut d = BTreeMap::new();
        d.insert("lambda_radius".into(), lc.radius);
        d.insert("n_lambda".into(), lc.n as f64);
        d.insert("imag_residue".into(), imag);
        d.insert("doubling_delta".into(), doubling);
        d.insert("det_roundoff".into(), sum.roundoff);
        Ok(Evaluation {
            value: sum.value.re,
            err: doubling.max(imag).max(sum.roundoff).max(roundoff_estimate(op)),
            diagnostics: d,
        })
    })
}

/// `1/Π_{j≠i, j<m}(1 − τ^{j−i})`, the residue weights.
pub fn residue_weights(tau: f64, m: usize) -> Vec<f64> {
    (0..m)
        .map(|i| {
            let prod: f64 = (0..m)
                .filter(|&j| j != i)
                .map(|j| 1.0 - tau.powi(j as i32 - i as i32))
                .product();
            1.0 / prod
        })
        .collect()
}

fn check_residue_tau(tau: f64) -> Result<()> {
    if (tau - 1.0).abs() <= 1e-8 {
        Err(Error::DegenerateTau("residue sum is not available at τ = 1; use the contour method"))
    } else {
        Ok(())
    }
}

/// `P(x_m(t) ≤ x) = 1 − Σ_{i<m} det(I − qτ^{−i}K)/Π_{j≠i}(1 − τ^{j−i})`.
pub fn cdf_residue(params: &ModelParams, m: usize, x: i64, t: f64, opts: &CdfOptions) -> Result<CdfResult> {
    let tau = params.tau();
    check_residue_tau(tau)?;
    let weights = residue_weights(tau, m.max(1));
    evaluate_k(params, m, x, t, opts, Method::Residue, |op| {
        let mus: Vec<Complex64> = (0..m).map(|i| Complex64::new(params.q() * tau.powi(-(i as i32)), 0.0)).collect();
        let dets = if m == 1 { vec![fredholm_det_scaled(op, mus[0])?] } else { det_values_scaled(op, &mus)? };
        let tail = compensated_sum(dets.iter().zip(&weights).map(|((d, _), w)| d * *w));
        let roundoff: f64 = dets.iter().zip(&weights).map(|((_, e), w)| e * w.abs()).sum();
        let imag = tail.im.abs();
        let mut d = BTreeMap::new();
        d.insert("imag_residue".into(), imag);
        d.insert("weight_sum".into(), weights.iter().sum());
        d.insert("det_roundoff".into(), roundoff);
        Ok(Evaluation {
            value: 1.0 - tail.re,
            err: imag.max(roundoff).max(roundoff_estimate(op)),
            diagnostics: d,
        })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SeriesOptions {
    /// Nodes per dimension; `None` uses 48 for `k ≤ 3` and 32 for `k = 4`.
    pub nodes_per_dim: Option<usize>,
    /// ξ-circle radius; `None` uses `2R*`.
    pub radius: Option<f64>,
}

/// Partial sum over `k = m..k_max` of the multiple-integral series, each
/// `k`-fold integral by tensor-product trapezoid rules on the ξ-circle.
pub fn cdf_series_partial(
    params: &ModelParams,
    m: usize,
    x: i64,
    t: f64,
    k_max: usize,
    opts: &SeriesOptions,
) -> Result<CdfResult> {
    check_rank(m)?;
    check_time(t)?;
    if k_max < m {
        return Err(Error::EmptySum { m, k_max });
    }
    if k_max > 4 {
        return Err(Error::InvalidParameter(format!("series is limited to k_max ≤ 4, got {k_max}")));
    }
    let radius = opts.radius.unwrap_or(2.0 * params.critical_radius());
    params.check_radius(radius)?;
    let (p, q, tau) = (params.p(), params.q(), params.tau());
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut total = Complex64::new(0.0, 0.0);
    let mut total_half = Complex64::new(0.0, 0.0);
    let mut d = BTreeMap::new();
    for k in m..=k_max {
        let n = opts.nodes_per_dim.unwrap_or(if k <= 3 { 48 } else { 32 });
        let (ik, ik_half) = k_fold_integral(params, x, t, radius, n, k)?;
        let (ki, mi) = (k as i32, m as i32);
        let factorial: f64 = (1..=k).map(|v| v as f64).product();
        let coeff = sign / factorial
            * tau_binomial(k as i64 - 1, (k - m) as i64, tau)?
            * p.powi((ki - mi) * (ki - mi + 1) / 2)
            * q.powi(ki * mi + (ki - mi) * (ki + mi - 1) / 2);
        total += coeff * ik;
        total_half += coeff * ik_half;
        d.insert(format!("term_{k}"), (coeff * ik).re);
        d.insert(format!("nodes_k{k}"), n as f64);
    }
    d.insert("k_max".into(), k_max as f64);
    d.insert("xi_radius".into(), radius);
    let imag = total.im.abs();
    let doubling = (total - total_half).norm();
    d.insert("imag_residue".into(), imag);
    d.insert("doubling_delta".into(), doubling);
    Ok(CdfResult::new(total.re, Method::SeriesPartial, imag.max(doubling), d))
}

/// `∮⋯∮ Π_{i≠j}(ξ_j−ξ_i)/(p+qξ_iξ_j−ξ_i) · Π_i ξ_i^x e^{ε(ξ_i)t}/((1−ξ_i)(qξ_i−p))`
/// on `n` nodes per dimension, and on every other node.
fn k_fold_integral(
    params: &ModelParams,
    x: i64,
    t: f64,
    radius: f64,
    n: usize,
    k: usize,
) -> Result<(Complex64, Complex64)> {
    let rule = circle_rule(radius, n)?;
    let (p, q) = (params.p(), params.q());
    let nodes = rule.nodes();
    let single: Vec<Complex64> = nodes
        .iter()
        .zip(rule.weights())
        .map(|(&xi, &w)| {
            let eps = p / xi + q * xi - 1.0;
            w * xi.powi(x as i32) * (eps * t).exp() / ((1.0 - xi) * (q * xi - p))
        })
        .collect();
    // pair[i][j]·pair[j][i], zero on the diagonal.
    let mut pair = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let a = (nodes[j] - nodes[i]) / (p + q * nodes[i] * nodes[j] - nodes[i]);
                let b = (nodes[i] - nodes[j]) / (p + q * nodes[j] * nodes[i] - nodes[j]);
                pair[i * n + j] = a * b;
            }
        }
    }
    let full = tensor_sum(&single, &pair, n, k, 1);
    // Every other node with doubled weights: the n/2-point rule.
    let half_single: Vec<Complex64> = single.iter().map(|s| 2.0 * s).collect();
    let half = tensor_sum(&half_single, &pair, n, k, 2);
    Ok((full, half))
}

fn tensor_sum(single: &[Complex64], pair: &[Complex64], n: usize, k: usize, stride: usize) -> Complex64 {
    let firsts: Vec<usize> = (0..n).step_by(stride).collect();
    let partials = exec::map_slice(&firsts, |&i0| {
        let mut idx = vec![i0];
        let mut acc = Vec::new();
        descend(single, pair, n, k, stride, &mut idx, single[i0], &mut acc);
        compensated_sum(acc)
    });
    compensated_sum(partials)
}

#[allow(clippy::too_many_arguments)]
fn descend(
    single: &[Complex64],
    pair: &[Complex64],
    n: usize,
    k: usize,
    stride: usize,
    idx: &mut Vec<usize>,
    prod: Complex64,
    out: &mut Vec<Complex64>,
) {
    if idx.len() == k {
        out.push(prod);
        return;
    }
    for j in (0..n).step_by(stride) {
        let mut v = prod * single[j];
        for &i in idx.iter() {
            v *= pair[i * n + j];
        }
        if v == Complex64::new(0.0, 0.0) {
            continue;
        }
        idx.push(j);
        descend(single, pair, n, k, stride, idx, v, out);
        idx.pop();
    }
}

/// Right side of the scaling conjecture:
/// `(1/2πi)∮ det(I − λqK₀χ_{(−y,∞)})/((λ;τ)_m λ) dλ`.
pub fn limit_cdf(params: &ModelParams, m: usize, y: f64, opts: &CdfOptions) -> Result<CdfResult> {
    check_rank(m)?;
    params.require_left_drift()?;
    let op = nystrom_k0(params, Some(y), opts.k0_nodes)?;
    let lc = opts.lambda.unwrap_or_else(|| LambdaContour::for_rank(params.tau(), m));
    let sum = lambda_integral(&op, m, &lc)?;
    let doubling = (sum.value - sum.halved).norm();
    let imag = sum.value.im.abs();
    let mut d = BTreeMap::new();
    d.insert("k0_nodes".into(), opts.k0_nodes as f64);
    if let Some((a, b)) = op.meta().bounds {
        d.insert("interval_a".into(), a);
        d.insert("interval_b".into(), b);
    }
    d.insert("lambda_radius".into(), lc.radius);
    d.insert("n_lambda".into(), lc.n as f64);
    d.insert("imag_residue".into(), imag);
    d.insert("doubling_delta".into(), doubling);
    d.insert("det_roundoff".into(), sum.roundoff);
    Ok(CdfResult::new(sum.value.re, Method::Limit, doubling.max(imag).max(sum.roundoff), d))
}

/// `tr (K₀χ_{(−y,∞)})ⁿ`; closed form `Φ((q−p)y)/(q−p)` for `n = 1`.
pub fn limit_trace(params: &ModelParams, n: usize, y: f64, k0_nodes: usize) -> Result<f64> {
    params.require_left_drift()?;
    if n == 0 {
        return Err(Error::InvalidParameter("trace power starts at n = 1".into()));
    }
    let drift = params.q() - params.p();
    if n == 1 {
        let phi = Normal::standard().cdf(drift * y);
        return Ok(phi / drift);
    }
    let op = nystrom_k0(params, Some(y), k0_nodes)?;
    Ok(trace_power(&op, n)?.re)
}

/// `tr Kⁿ` at the scaled site for `y` and `t`.
pub fn finite_trace(params: &ModelParams, n: usize, x: i64, t: f64, opts: &CdfOptions) -> Result<f64> {
    let op = build_k(params, x, t, opts)?;
    Ok(engine::trace_power(&op, n)?.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::fredholm_det;
    use crate::numerics::legendre_rule;
    use crate::model::kernel_k0;

    fn params(p: f64) -> ModelParams {
        ModelParams::new(p).unwrap()
    }

    #[test]
    fn tails_and_initial_condition() {
        let m = params(0.3);
        let o = CdfOptions::default();
        let left = cdf_contour(&m, 1, -40, 1.0, &o).unwrap();
        assert!(left.value.abs() < 1e-8, "{}", left.value);
        let start = cdf_contour(&m, 1, 1, 1e-9, &o).unwrap();
        assert!((start.value - 1.0).abs() < 1e-6, "{}", start.value);
        assert_eq!(start.diagnostics["support_bound"], 0.0);
    }

    #[test]
    fn residue_weights_sum_to_one() {
        for m in 2..=4 {
            let s: f64 = residue_weights(0.5, m).iter().sum();
            assert!((s - 1.0).abs() < 1e-12, "{m} {s}");
        }
    }

    #[test]
    fn contour_and_residue_agree() {
        let m = params(0.3);
        let o = CdfOptions::default();
        let a = cdf_contour(&m, 3, -1, 2.0, &o).unwrap();
        let b = cdf_residue(&m, 3, -1, 2.0, &o).unwrap();
        assert!((a.value - b.value).abs() < 1e-8, "{} {}", a.value, b.value);
        let c = cdf_residue(&m, 1, -2, 1.0, &o).unwrap();
        let op = nystrom_k(&m, -2, 1.0, None, 128, Precision::Double).unwrap();
        let det = fredholm_det(&op, Complex64::new(m.q(), 0.0)).unwrap();
        assert!((c.value - (1.0 - det.re)).abs() < 1e-14);
    }

    #[test]
    fn symmetric_hopping_uses_contour_only() {
        let m = params(0.5);
        let o = CdfOptions::default();
        assert!(matches!(cdf_residue(&m, 2, 0, 1.0, &o), Err(Error::DegenerateTau(_))));
        let v = cdf_contour(&m, 2, 0, 1.0, &o).unwrap();
        assert!(v.value > 0.0 && v.value < 1.0 && v.err_estimate < 1e-8, "{v:?}");
    }

    #[test]
    fn lambda_radius_doubling() {
        let m = params(0.3);
        let base = CdfOptions::default();
        let wide = CdfOptions {
            lambda: Some(LambdaContour {
                radius: 2.0 * LambdaContour::for_rank(m.tau(), 2).radius,
                n: 256,
            }),
            ..base
        };
        let a = cdf_contour(&m, 2, 0, 2.0, &base).unwrap();
        let b = cdf_contour(&m, 2, 0, 2.0, &wide).unwrap();
        assert!((a.value - b.value).abs() < 1e-8);
        let tight = CdfOptions {
            lambda: Some(LambdaContour { radius: 1.0, n: 256 }),
            ..base
        };
        assert!(cdf_contour(&m, 2, 0, 2.0, &tight).is_err());
    }

    #[test]
    fn support_bound_in_the_right_tail() {
        let m = params(0.3);
        let o = CdfOptions::default();
        let r = cdf_contour(&m, 2, 80, 5.0, &o).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.diagnostics["support_bound"], 1.0);
        let off = CdfOptions { support_bound: false, ..o };
        assert!(matches!(cdf_contour(&m, 2, 80, 5.0, &off), Err(Error::PrecisionRegime { .. })));
    }

    #[test]
    fn series_first_term_is_scaled_trace() {
        let m = params(0.3);
        let r = 2.0 * m.critical_radius();
        let s = cdf_series_partial(&m, 1, 1, 0.3, 1, &SeriesOptions { nodes_per_dim: Some(48), radius: Some(r) }).unwrap();
        let op = nystrom_k(&m, 1, 0.3, Some(r), 48, Precision::Double).unwrap();
        let tr = trace_power(&op, 1).unwrap();
        assert!((s.value - m.q() * tr.re).abs() < 1e-14, "{} {}", s.value, tr);
        assert!(matches!(
            cdf_series_partial(&m, 2, 0, 1.0, 1, &SeriesOptions::default()),
            Err(Error::EmptySum { m: 2, k_max: 1 })
        ));
    }

    #[test]
    fn series_converges_to_contour_value() {
        let m = params(0.3);
        let exact = cdf_contour(&m, 1, 0, 0.3, &CdfOptions::default()).unwrap().value;
        let errs: Vec<f64> = (1..=3)
            .map(|k| (cdf_series_partial(&m, 1, 0, 0.3, k, &SeriesOptions::default()).unwrap().value - exact).abs())
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
        assert!(errs[2] < 1e-3);
    }

    #[test]
    fn limit_cdf_tails_and_reduction() {
        let m = params(0.3);
        let o = CdfOptions::default();
        assert!(limit_cdf(&m, 1, -30.0, &o).unwrap().value.abs() < 1e-8);
        assert!((limit_cdf(&m, 1, 30.0, &o).unwrap().value - 1.0).abs() < 1e-6);
        let v = limit_cdf(&m, 1, 0.0, &o).unwrap().value;
        let op = nystrom_k0(&m, Some(0.0), 200).unwrap();
        let det = fredholm_det(&op, Complex64::new(m.q(), 0.0)).unwrap();
        assert!((v - (1.0 - det.re)).abs() < 1e-8);
        assert!(matches!(limit_cdf(&params(0.6), 1, 0.0, &o), Err(Error::NoLeftDrift)));
    }

    #[test]
    fn limit_trace_values() {
        let m = params(0.3);
        assert_eq!(limit_trace(&m, 1, 0.0, 200).unwrap(), 1.25);
        assert!((limit_trace(&m, 1, 40.0, 200).unwrap() - 2.5).abs() < 1e-12);
        // Two-dimensional Gauss–Legendre oracle on (−1, 20)².
        let rule = legendre_rule(-1.0, 20.0, 200).unwrap();
        let (z, w) = (rule.nodes(), rule.weights());
        let mut oracle = 0.0;
        for i in 0..z.len() {
            for j in 0..z.len() {
                oracle += w[i] * w[j] * kernel_k0(&m, z[i], z[j]) * kernel_k0(&m, z[j], z[i]);
            }
        }
        assert!((limit_trace(&m, 2, 1.0, 200).unwrap() - oracle).abs() < 1e-8);
        // Trace of the restricted operator agrees with the closed form.
        let op = nystrom_k0(&m, Some(0.7), 200).unwrap();
        assert!((trace_power(&op, 1).unwrap().re - limit_trace(&m, 1, 0.7, 200).unwrap()).abs() < 1e-10);
    }
}
