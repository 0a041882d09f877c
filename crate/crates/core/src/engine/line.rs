use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{check_entries, Discretization, KernelTag, NystromOperator, OperatorMeta, Precision};
use crate::model::ModelParams;
use crate::numerics::legendre_rule;
use crate::{Error, Result};

/// Truncations and node counts for [`nystrom_k1`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct K1Config {
    pub z_max: f64,
    pub n: usize,
    pub s_max: f64,
    pub n_inner: usize,
}

impl K1Config {
    /// Outer interval `[0, |x + (q−p)t| + 20√t]`, 120 outer and 400 inner
    /// nodes, and an inner cutoff where the integrand is below `e^{−40}`.
    pub fn defaults(params: &ModelParams, x: i64, t: f64) -> Self {
        let (p, q) = (params.p(), params.q());
        let z_max = (x as f64 + (q - p) * t).abs() + 20.0 * t.sqrt();
        Self {
            z_max,
            n: 120,
            s_max: Self::cutoff(params, t, z_max),
            n_inner: 400,
        }
    }

    fn cutoff(params: &ModelParams, t: f64, z_max: f64) -> f64 {
        let (p, q) = (params.p(), params.q());
        ((40.0 + q * t + p * z_max / q) / (q * t * curvature(params))).sqrt()
    }

    /// Same configuration with a different outer truncation.
    pub fn with_z_max(self, params: &ModelParams, t: f64, z_max: f64) -> Self {
        Self {
            z_max,
            s_max: Self::cutoff(params, t, z_max),
            ..self
        }
    }
}

/// Parabola `ξ(s) = 1 + is − αs²` replacing the line `Re ξ = 1`: both pass
/// through `ξ = 1` and enclose the same singularities, and on the parabola
/// `e^{ε(ξ)t}` decays like a Gaussian in `s`.
fn curvature(params: &ModelParams) -> f64 {
    0.5 / (1.0 - params.tau())
}

/// `K₁` on `[0, z_max]`:
/// `K₁(z, z′) = (q−p)/(2πi) ∫ ξ^x e^{ε(ξ)t}/(qξ−p)² · e^{(qz−pz′)(1−ξ)/(qξ−p)} dξ`.
///
/// Requires `p < q`, `x < 0` and `t > 0`. Every entry is recomputed with
/// twice the inner nodes; a relative change above `1e-8` is an error.
pub fn nystrom_k1(params: &ModelParams, x: i64, t: f64, cfg: K1Config) -> Result<NystromOperator> {
    params.require_left_drift()?;
    if x >= 0 {
        return Err(Error::InvalidParameter(format!(
            "K1 is evaluated on a line contour only for x < 0, got x = {x}"
        )));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("K1 needs t > 0, got {t}")));
    }
    if !(cfg.z_max > 0.0 && cfg.s_max > 0.0) {
        return Err(Error::InvalidParameter("K1 truncations must be positive".into()));
    }
    let rule = legendre_rule(0.0, cfg.z_max, cfg.n)?;
    let coarse = kernel_matrix(params, x, t, rule.nodes(), cfg.s_max, cfg.n_inner)?;
    let fine = kernel_matrix(params, x, t, rule.nodes(), cfg.s_max, 2 * cfg.n_inner)?;
    let delta = coarse
        .iter()
        .zip(fine.iter())
        .map(|(a, b)| (a - b).norm() / (1.0 + b.norm()))
        .fold(0.0, f64::max);
    if delta > 1e-8 {
        return Err(Error::InnerQuadratureFailure { delta });
    }
    let v = rule.weights();
    let matrix = DMatrix::from_fn(cfg.n, cfg.n, |j, k| fine[(j, k)] * v[k]);
    check_entries(matrix.iter().map(|z| z.norm()).fold(0.0, f64::max), Precision::Double)?;
    let meta = OperatorMeta {
        x: Some(x),
        t: Some(t),
        bounds: Some((0.0, cfg.z_max)),
        ..Default::default()
    };
    NystromOperator::from_parts(KernelTag::K1, *params, Discretization::Interval(rule), matrix, meta)
}

/// Kernel values `K₁(z_j, z_k)`. The exponential factorizes as
/// `e^{qz_j W}·e^{−pz_k W}` with `W = (1−ξ)/(qξ−p)`, so the inner sum is a
/// product of an `n × n_inner` and an `n_inner × n` matrix.
fn kernel_matrix(
    params: &ModelParams,
    x: i64,
    t: f64,
    z: &[f64],
    s_max: f64,
    n_inner: usize,
) -> Result<DMatrix<Complex64>> {
    let (p, q) = (params.p(), params.q());
    let alpha = curvature(params);
    let inner = legendre_rule(-s_max, s_max, n_inner)?;
    let n = z.len();
    let mut left = DMatrix::<Complex64>::zeros(n, n_inner);
    let mut right = DMatrix::<Complex64>::zeros(n_inner, n);
    for (i, (&s, &u)) in inner.nodes().iter().zip(inner.weights()).enumerate() {
        let xi = Complex64::new(1.0 - alpha * s * s, s);
        let dxi_over_i = Complex64::new(1.0, 2.0 * alpha * s);
        let d = q * xi - p;
        let w = (1.0 - xi) / d;
        let eps = p / xi + q * xi - 1.0;
        let g = (q - p) / (2.0 * PI) * u * dxi_over_i * xi.powi(x as i32) * (eps * t).exp() / (d * d);
        for j in 0..n {
            left[(j, i)] = g * (q * z[j] * w).exp();
            right[(i, j)] = (-p * z[j] * w).exp();
        }
    }
    Ok(left * right)
}
