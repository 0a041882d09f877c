//! Model parameters and the scalar kernels.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::numerics::dd::{CDd, Dd};
use crate::{Error, Result};

/// Hop probabilities: right with `p`, left with `q = 1 − p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    p: f64,
    q: f64,
}

impl ModelParams {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "p must lie strictly inside (0, 1), got {p}"
            )));
        }
        Ok(Self { p, q: 1.0 - p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn tau(&self) -> f64 {
        self.p / self.q
    }

    /// Same model with the hop directions exchanged.
    pub fn reflected(&self) -> Self {
        Self {
            p: self.q,
            q: self.p,
        }
    }

    pub fn require_left_drift(&self) -> Result<()> {
        if self.p < self.q {
            Ok(())
        } else {
            Err(Error::NoLeftDrift)
        }
    }

    /// Larger root of `qR² − R − p`; admissible radii lie strictly above it.
    pub fn critical_radius(&self) -> f64 {
        (1.0 + (1.0 + 4.0 * self.p * self.q).sqrt()) / (2.0 * self.q)
    }

    pub fn default_radius(&self) -> f64 {
        1.25 * self.critical_radius()
    }

    /// Radius used when none is given: the default margin up to `t = 10`,
    /// then a margin shrinking like `1/t`, since kernel entries grow like
    /// `e^{ε(R)t}`.
    pub fn auto_radius(&self, t: f64) -> f64 {
        let margin = if t > 10.0 { 10.0 / t } else { 1.0 };
        self.critical_radius() * (1.0 + 0.25 * margin)
    }

    pub fn check_radius(&self, radius: f64) -> Result<()> {
        let gap = self.q * radius * radius - radius - self.p;
        if radius > 1.0 && gap > 0.0 && radius.is_finite() {
            Ok(())
        } else {
            Err(Error::BadContour { radius })
        }
    }
}

/// Rank `m ≥ 1`, site `x` and time `t ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationPoint {
    pub m: usize,
    pub x: i64,
    pub t: f64,
}

impl ObservationPoint {
    pub fn new(m: usize, x: i64, t: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("particle rank m starts at 1".into()));
        }
        check_time(t)?;
        Ok(Self { m, x, t })
    }
}

/// Scaled position `y` at time `t > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingQuery {
    pub y: f64,
    pub t: f64,
}

impl ScalingQuery {
    pub fn new(y: f64, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) || !y.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "scaling query needs finite y and t > 0, got y = {y}, t = {t}"
            )));
        }
        Ok(Self { y, t })
    }
}

pub(crate) fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("t must be finite and ≥ 0, got {t}")))
    }
}

/// `ε(ξ) = p/ξ + qξ − 1`.
pub fn epsilon(params: &ModelParams, xi: Complex64) -> Result<Complex64> {
    if xi == Complex64::new(0.0, 0.0) {
        return Err(Error::PoleAtOrigin);
    }
    Ok(params.p / xi + params.q * xi - 1.0)
}

/// `K(ξ, ξ′) = ξ^x e^{ε(ξ)t} / (p + qξξ′ − ξ)`.
pub fn kernel_k(
    params: &ModelParams,
    x: i64,
    t: f64,
    xi: Complex64,
    xi2: Complex64,
) -> Result<Complex64> {
    let den = params.p + params.q * xi * xi2 - xi;
    if den.norm() < 1e-13 * (1.0 + (params.q * xi * xi2).norm()) {
        return Err(Error::KernelSingularity {
            modulus: den.norm(),
        });
    }
    let zero = Complex64::new(0.0, 0.0);
    if xi == zero && (x < 0 || t > 0.0) {
        return Err(Error::PoleAtOrigin);
    }
    let growth = if t == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        (epsilon(params, xi)? * t).exp()
    };
    Ok(xi.powi(x as i32) * growth / den)
}

/// [`kernel_k`] in double-double arithmetic. Callers guarantee an admissible
/// contour, so no singularity test is made.
pub fn kernel_k_dd(params: &ModelParams, x: i64, t: f64, xi: CDd, xi2: CDd) -> CDd {
    let p = Dd::from(params.p);
    let q = Dd::ONE - p;
    let one = CDd::ONE;
    let den = CDd::from(p) + (xi * xi2).scale(q) - xi;
    let eps = CDd::from(p) / xi + xi.scale(q) - one;
    let growth = if t == 0.0 {
        one
    } else {
        eps.scale(Dd::from(t)).exp()
    };
    xi.powi(x as i32) * growth / den
}

/// `K₀(z, z′) = (1/√2π) exp(−(p² + q²)(z² + z′²)/4 + pq·zz′)`.
pub fn kernel_k0(params: &ModelParams, z: f64, z2: f64) -> f64 {
    let (p, q) = (params.p, params.q);
    let e = -(p * p + q * q) * (z * z + z2 * z2) / 4.0 + p * q * z * z2;
    e.exp() / (2.0 * PI).sqrt()
}

/// `K₃(z, z′) = (1/√2π) exp(−(qz − pz′)²/2)`.
///
/// Related to [`kernel_k0`] by
/// `K₀(z, z′) = e^{(q²−p²)z²/4} K₃(z, z′) e^{−(q²−p²)z′²/4}`. Because
/// `p + q = 1`, the exponent `(q²−p²)/4` is the same number as `(q−p)/4`.
pub fn kernel_k3(params: &ModelParams, z: f64, z2: f64) -> f64 {
    let d = params.q * z - params.p * z2;
    (-d * d / 2.0).exp() / (2.0 * PI).sqrt()
}

/// Nearest lattice site to `(p − q)t + (q − p)y√t`, ties away from zero.
pub fn scaled_site(params: &ModelParams, sq: &ScalingQuery) -> i64 {
    let (p, q) = (params.p, params.q);
    ((p - q) * sq.t + (q - p) * sq.y * sq.t.sqrt()).round() as i64
}
