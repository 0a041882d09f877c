use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::{Discretization, KernelTag, NystromOperator, OperatorMeta};
use crate::model::{kernel_k0, ModelParams};
use crate::numerics::legendre_rule;
use crate::{Error, Result};

/// Integration interval for `K₀`, or `K₀χ_{(−y,∞)}` when `y` is given.
///
/// The full line is cut at `±L` with `L = √(160/(q² − p²))`, where the
/// eigenfunction envelope `e^{−(q²−p²)z²/4}` is below `1e-17`. The restricted
/// interval starts at `−y` but never below `−L`, and is at least `L` long.
pub fn k0_interval(params: &ModelParams, y: Option<f64>) -> Result<(f64, f64)> {
    params.require_left_drift()?;
    let (p, q) = (params.p(), params.q());
    let half = (160.0 / (q * q - p * p)).sqrt();
    Ok(match y {
        None => (-half, half),
        Some(y) => {
            if !y.is_finite() {
                return Err(Error::InvalidParameter(format!("y must be finite, got {y}")));
            }
            let a = (-y).max(-half);
            (a, half.max(a + half))
        }
    })
}

/// `K₀` (or `K₀χ_{(−y,∞)}`) with an `n`-node Gauss–Legendre rule.
pub fn nystrom_k0(params: &ModelParams, y: Option<f64>, n: usize) -> Result<NystromOperator> {
    let (a, b) = k0_interval(params, y)?;
    let rule = legendre_rule(a, b, n)?;
    let z = rule.nodes();
    let v = rule.weights();
    let matrix = DMatrix::from_fn(n, n, |j, k| Complex64::new(kernel_k0(params, z[j], z[k]) * v[k], 0.0));
    let tag = if y.is_some() {
        KernelTag::K0Restricted
    } else {
        KernelTag::K0
    };
    let meta = OperatorMeta {
        y,
        bounds: Some((a, b)),
        ..Default::default()
    };
    NystromOperator::from_parts(tag, *params, Discretization::Interval(rule), matrix, meta)
}

/// Eigenvalues (descending) with eigenfunctions sampled at the nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct K0Spectrum {
    pub values: Vec<f64>,
    /// Unit quadrature norm; the largest-magnitude sample is positive.
    pub vectors: Vec<Vec<f64>>,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// `D·A·D⁻¹` with `D = diag(√weight)`: real symmetric for `K₀`.
pub(crate) fn symmetrized(op: &NystromOperator) -> Result<DMatrix<f64>> {
    let Discretization::Interval(rule) = op.rule() else {
        return Err(Error::InvalidParameter("symmetrization needs an interval rule".into()));
    };
    let s: Vec<f64> = rule.weights().iter().map(|w| w.sqrt()).collect();
    let a = op.matrix();
    Ok(DMatrix::from_fn(op.dim(), op.dim(), |j, k| a[(j, k)].re * s[j] / s[k]))
}

pub fn k0_eigensystem(op: &NystromOperator) -> Result<K0Spectrum> {
    if !matches!(op.tag(), KernelTag::K0 | KernelTag::K0Restricted) {
        return Err(Error::InvalidParameter(format!(
            "eigensystem is defined for K0 operators, got {}",
            op.tag().as_str()
        )));
    }
    let Discretization::Interval(rule) = op.rule() else {
        unreachable!("K0 operators live on intervals");
    };
    let sym = symmetrized(op)?;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..op.dim()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let sqrt_w: Vec<f64> = rule.weights().iter().map(|w| w.sqrt()).collect();
    let vectors = order
        .iter()
        .map(|&i| {
            let mut f: Vec<f64> = eig.eigenvectors.column(i).iter().zip(&sqrt_w).map(|(u, s)| u / s).collect();
            let norm = f
                .iter()
                .zip(rule.weights())
                .map(|(v, w)| w * v * v)
                .sum::<f64>()
                .sqrt();
            let peak = f.iter().copied().fold(0.0, |m: f64, v| if v.abs() > m.abs() { v } else { m });
            let scale = if peak < 0.0 { -1.0 / norm } else { 1.0 / norm };
            f.iter_mut().for_each(|v| *v *= scale);
            f
        })
        .collect();
    Ok(K0Spectrum {
        values: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        vectors,
        nodes: rule.nodes().to_vec(),
        weights: rule.weights().to_vec(),
    })
}
