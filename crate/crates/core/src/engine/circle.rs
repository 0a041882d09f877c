use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{check_entries, Discretization, KernelTag, NystromOperator, OperatorMeta, Precision};
use crate::exec;
use crate::model::{check_time, kernel_k, kernel_k_dd, ModelParams};
use crate::numerics::circle_rule;
use crate::numerics::dd::{CDd, Dd};
use crate::Result;

/// `K` on the circle of radius `radius` (or [`ModelParams::auto_radius`])
/// with `n` trapezoid nodes.
pub fn nystrom_k(
    params: &ModelParams,
    x: i64,
    t: f64,
    radius: Option<f64>,
    n: usize,
    precision: Precision,
) -> Result<NystromOperator> {
    check_time(t)?;
    let radius = radius.unwrap_or_else(|| params.auto_radius(t));
    params.check_radius(radius)?;
    let rule = circle_rule(radius, n)?;
    let meta = OperatorMeta {
        x: Some(x),
        t: Some(t),
        radius: Some(radius),
        ..Default::default()
    };
    match precision {
        Precision::Double => {
            let nodes = rule.nodes();
            let weights = rule.weights();
            let rows = exec::try_map_range(n, |j| {
                (0..n)
                    .map(|k| Ok(kernel_k(params, x, t, nodes[j], nodes[k])? * weights[k]))
                    .collect::<Result<Vec<Complex64>>>()
            })?;
            let max = rows.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
            check_entries(max, precision)?;
            let matrix = DMatrix::from_fn(n, n, |j, k| rows[j][k]);
            NystromOperator::from_parts(KernelTag::K, *params, Discretization::Circle(rule), matrix, meta)
        }
        Precision::Extended => {
            // Nodes and weights are recomputed at full double-double accuracy.
            let r = Dd::from(radius);
            let nodes: Vec<CDd> = (0..n)
                .map(|j| CDd::from_polar(r, Dd::PI * Dd::from(2.0 * j as f64) / Dd::from(n as f64)))
                .collect();
            let inv_n = Dd::ONE / Dd::from(n as f64);
            let weights: Vec<CDd> = nodes.iter().map(|xi| xi.scale(inv_n)).collect();
            // The binary64 build doubles as the singularity check.
            let singular = (0..n).try_for_each(|j| {
                let angle = 2.0 * PI * j as f64 / n as f64;
                let xi = Complex64::from_polar(radius, angle);
                kernel_k(params, x, t, xi, xi).map(|_| ())
            });
            singular?;
            let rows = exec::map_range(n, |j| {
                (0..n)
                    .map(|k| kernel_k_dd(params, x, t, nodes[j], nodes[k]) * weights[k])
                    .collect::<Vec<CDd>>()
            });
            let entries: Vec<CDd> = rows.into_iter().flatten().collect();
            let max = entries
                .iter()
                .map(|z| if z.is_finite() { z.norm() } else { f64::INFINITY })
                .fold(0.0, f64::max);
            check_entries(max, precision)?;
            let matrix = DMatrix::from_fn(n, n, |j, k| entries[j * n + k].to_c64());
            Ok(NystromOperator::from_parts(KernelTag::K, *params, Discretization::Circle(rule), matrix, meta)?
                .with_extended(entries))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{fredholm_det, trace_power};
    use crate::Error;

    fn params(p: f64) -> ModelParams {
        ModelParams::new(p).unwrap()
    }

    #[test]
    fn trace_at_time_zero_is_residue_sum() {
        // Both roots ξ = 1 and ξ = τ of qξ² − ξ + p lie inside the contour;
        // their residues 1/(q − p) and 1/(p − q) cancel.
        let op = nystrom_k(&params(0.3), 0, 0.0, None, 64, Precision::Double).unwrap();
        let tr = trace_power(&op, 1).unwrap();
        assert!(tr.norm() < 1e-10, "{tr}");
    }

    #[test]
    fn determinant_at_zero_is_one() {
        let op = nystrom_k(&params(0.3), -3, 2.0, None, 64, Precision::Double).unwrap();
        assert_eq!(fredholm_det(&op, Complex64::new(0.0, 0.0)).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn node_doubling_and_radius_independence() {
        let m = params(0.3);
        let q = Complex64::new(m.q(), 0.0);
        for &(x, t) in &[(-2, 1.0), (-6, 5.0), (0, 2.0), (6, 5.0), (3, 0.5)] {
            let d64 = fredholm_det(&nystrom_k(&m, x, t, None, 64, Precision::Double).unwrap(), q).unwrap();
            let d128 = fredholm_det(&nystrom_k(&m, x, t, None, 128, Precision::Double).unwrap(), q).unwrap();
            let r2 = 1.3 * m.default_radius();
            let d_r2 = fredholm_det(&nystrom_k(&m, x, t, Some(r2), 128, Precision::Double).unwrap(), q).unwrap();
            assert!((d64 - d128).norm() < 1e-9, "{x} {t}: {}", (d64 - d128).norm());
            assert!((d128 - d_r2).norm() < 1e-8, "{x} {t}: {}", (d128 - d_r2).norm());
        }
    }

    #[test]
    fn inadmissible_radius() {
        let m = params(0.3);
        assert!(matches!(
            nystrom_k(&m, 0, 1.0, Some(1.0), 64, Precision::Double),
            Err(Error::BadContour { .. })
        ));
        assert!(nystrom_k(&m, 0, -1.0, None, 64, Precision::Double).is_err());
    }

    #[test]
    fn precision_regime_guard() {
        let m = params(0.3);
        let err = nystrom_k(&m, 0, 500.0, None, 128, Precision::Double).unwrap_err();
        assert!(matches!(err, Error::PrecisionRegime { limit, .. } if limit == 1e12));
        let err = nystrom_k(&m, 0, 5000.0, None, 32, Precision::Extended).unwrap_err();
        assert!(matches!(err, Error::PrecisionRegime { limit, .. } if limit == 1e280));
    }

    #[test]
    fn extended_agrees_in_the_binary64_regime() {
        let m = params(0.3);
        let q = Complex64::new(m.q(), 0.0);
        let a = nystrom_k(&m, -2, 3.0, None, 64, Precision::Double).unwrap();
        let b = nystrom_k(&m, -2, 3.0, None, 64, Precision::Extended).unwrap();
        assert_eq!(b.precision(), Precision::Extended);
        let (da, db) = (fredholm_det(&a, q).unwrap(), fredholm_det(&b, q).unwrap());
        assert!((da - db).norm() < 1e-12, "{da} {db}");
        let pb = b.pencil().det(q).unwrap();
        assert!((pb - db).norm() < 1e-12);
    }

    #[test]
    fn extended_removes_roundoff() {
        // t = 70 at the default radius: entries near 3e7 pass the binary64
        // guard, yet binary64 elimination loses the determinant entirely.
        // Double-double on the same grid matches a tight-radius reference.
        let m = params(0.3);
        let q = Complex64::new(m.q(), 0.0);
        let (x, t) = (-28, 70.0);
        let r = m.default_radius();
        let dbl = fredholm_det(&nystrom_k(&m, x, t, Some(r), 256, Precision::Double).unwrap(), q).unwrap();
        let ext = fredholm_det(&nystrom_k(&m, x, t, Some(r), 256, Precision::Extended).unwrap(), q).unwrap();
        let tight = nystrom_k(&m, x, t, Some(1.1 * m.critical_radius()), 256, Precision::Extended).unwrap();
        let reference = fredholm_det(&tight, q).unwrap();
        assert!((ext - reference).norm() < 1e-9, "{ext} {reference}");
        assert!((dbl - reference).norm() > 1e-3, "{dbl}");
    }

    #[test]
    fn trace_series_matches_log_determinant() {
        let m = params(0.3);
        let op = nystrom_k(&m, -1, 1.0, None, 128, Precision::Double).unwrap();
        let frob = op.matrix().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for mu in [Complex64::new(0.1 / frob, 0.0), Complex64::new(0.0, 0.1 / frob)] {
            let lhs = fredholm_det(&op, mu).unwrap().ln();
            let rhs: Complex64 = (1..=12)
                .map(|n| -mu.powi(n as i32) * trace_power(&op, n).unwrap() / n as f64)
                .sum();
            assert!((lhs - rhs).norm() < 1e-10, "{}", (lhs - rhs).norm());
        }
    }

    #[test]
    fn bitwise_deterministic() {
        let m = params(0.45);
        let a = nystrom_k(&m, 2, 1.5, None, 64, Precision::Double).unwrap();
        let b = nystrom_k(&m, 2, 1.5, None, 64, Precision::Double).unwrap();
        assert_eq!(a.matrix(), b.matrix());
    }
}
