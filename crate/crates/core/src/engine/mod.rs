//! Nyström discretizations of the kernels and the quantities computed from
//! them: Fredholm determinants, traces of powers and spectra.

mod circle;
mod line;
mod mehler;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::exec;
use crate::model::ModelParams;
use crate::numerics::dd::CDd;
use crate::numerics::linalg::{lu_det_scaled_in_place, HessenbergPencil};
use crate::numerics::{CircleRule, IntervalRule};
use crate::{Error, Result};

pub use circle::nystrom_k;
pub use line::{nystrom_k1, K1Config};
pub use mehler::{k0_eigensystem, k0_interval, nystrom_k0, K0Spectrum};

/// Largest entry magnitude accepted in binary64.
pub const DOUBLE_ENTRY_LIMIT: f64 = 1e12;
/// Largest entry magnitude accepted in any precision.
pub const OVERFLOW_LIMIT: f64 = 1e280;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Precision {
    #[default]
    Double,
    /// Double-double kernel entries and eliminations, about 32 digits.
    Extended,
}

impl FromStr for Precision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "double" => Ok(Precision::Double),
            "extended" => Ok(Precision::Extended),
            other => Err(Error::InvalidParameter(format!(
                "precision must be `double` or `extended`, got `{other}`"
            ))),
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Precision::Double => "double",
            Precision::Extended => "extended",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelTag {
    K,
    K0,
    K0Restricted,
    K1,
}

impl KernelTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            KernelTag::K => "K",
            KernelTag::K0 => "K0",
            KernelTag::K0Restricted => "K0_restricted",
            KernelTag::K1 => "K1",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Discretization {
    Circle(CircleRule),
    Interval(IntervalRule),
}

impl Discretization {
    pub fn len(&self) -> usize {
        match self {
            Discretization::Circle(r) => r.len(),
            Discretization::Interval(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Parameters an operator was built from, where they apply.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OperatorMeta {
    pub x: Option<i64>,
    pub t: Option<f64>,
    pub y: Option<f64>,
    pub radius: Option<f64>,
    pub bounds: Option<(f64, f64)>,
}

/// A kernel discretized on a rule: `A[j][k] = kernel(node_j, node_k)·weight_k`.
#[derive(Debug, Clone)]
pub struct NystromOperator {
    tag: KernelTag,
    params: ModelParams,
    rule: Discretization,
    matrix: DMatrix<Complex64>,
    extended: Option<Vec<CDd>>,
    meta: OperatorMeta,
}

impl NystromOperator {
    /// Wraps an arbitrary matrix; checks shape and finiteness.
    pub fn from_parts(
        tag: KernelTag,
        params: ModelParams,
        rule: Discretization,
        matrix: DMatrix<Complex64>,
        meta: OperatorMeta,
    ) -> Result<Self> {
        if matrix.nrows() != rule.len() || matrix.ncols() != rule.len() {
            return Err(Error::InvalidParameter(format!(
                "matrix is {}×{} but the rule has {} nodes",
                matrix.nrows(),
                matrix.ncols(),
                rule.len()
            )));
        }
        if let Some(bad) = matrix.iter().find(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::PrecisionRegime {
                max_entry: bad.norm(),
                limit: OVERFLOW_LIMIT,
            });
        }
        Ok(Self {
            tag,
            params,
            rule,
            matrix,
            extended: None,
            meta,
        })
    }

    pub(crate) fn with_extended(mut self, entries: Vec<CDd>) -> Self {
        debug_assert_eq!(entries.len(), self.dim() * self.dim());
        self.extended = Some(entries);
        self
    }

    pub fn tag(&self) -> KernelTag {
        self.tag
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn rule(&self) -> &Discretization {
        &self.rule
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn meta(&self) -> &OperatorMeta {
        &self.meta
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn precision(&self) -> Precision {
        if self.extended.is_some() {
            Precision::Extended
        } else {
            Precision::Double
        }
    }

    pub fn max_entry(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Hessenberg form for repeated `det(I − μA)` evaluations.
    pub fn pencil(&self) -> DetPencil {
        match &self.extended {
            None => DetPencil::Double(HessenbergPencil::new(&self.matrix)),
            Some(e) => DetPencil::Extended(HessenbergPencil::by_elimination(e.clone(), self.dim())),
        }
    }
}

/// `det(I − μA)` at `O(n²)` per shift after one reduction.
#[derive(Debug, Clone)]
pub enum DetPencil {
    Double(HessenbergPencil<Complex64>),
    Extended(HessenbergPencil<CDd>),
}

impl DetPencil {
    pub fn det(&self, mu: Complex64) -> Result<Complex64> {
        self.det_scaled(mu).map(|(d, _)| d)
    }

    /// The determinant and its rounding-error scale; see [`fredholm_det_scaled`].
    pub fn det_scaled(&self, mu: Complex64) -> Result<(Complex64, f64)> {
        match self {
            DetPencil::Double(h) => h.det_shifted_scaled(mu),
            DetPencil::Extended(h) => h.det_shifted_scaled(CDd::from(mu)).map(|(d, s)| (d.to_c64(), s)),
        }
    }
}

/// Unit roundoff of the arithmetic behind `precision`.
pub fn unit_roundoff(precision: Precision) -> f64 {
    match precision {
        Precision::Double => f64::EPSILON / 2.0,
        Precision::Extended => 2f64.powi(-104),
    }
}

/// `det(I − μA)` by pivoted LU in the operator's precision.
pub fn fredholm_det(op: &NystromOperator, mu: Complex64) -> Result<Complex64> {
    fredholm_det_scaled(op, mu).map(|(d, _)| d)
}

/// `det(I − μA)` together with an absolute rounding-error estimate
/// `u·n^{3/2}·Π max(1, |u_kk|)` taken from the LU pivots.
pub fn fredholm_det_scaled(op: &NystromOperator, mu: Complex64) -> Result<(Complex64, f64)> {
    let n = op.dim();
    let u = unit_roundoff(op.precision()) * (n as f64).powf(1.5);
    match &op.extended {
        None => {
            let mut buf: Vec<Complex64> = (0..n * n)
                .map(|idx| {
                    let (i, j) = (idx / n, idx % n);
                    let diag = if i == j { 1.0 } else { 0.0 };
                    diag - mu * op.matrix[(i, j)]
                })
                .collect();
            lu_det_scaled_in_place(&mut buf, n).map(|(d, s)| (d, u * s))
        }
        Some(e) => {
            let mu = CDd::from(mu);
            let mut buf: Vec<CDd> = e.iter().map(|&a| -(mu * a)).collect();
            for i in 0..n {
                buf[i * n + i] += CDd::ONE;
            }
            lu_det_scaled_in_place(&mut buf, n).map(|(d, s)| (d.to_c64(), u * s))
        }
    }
}

/// `det(I − μA)` along `mus` with per-value rounding-error estimates.
pub fn det_values_scaled(op: &NystromOperator, mus: &[Complex64]) -> Result<Vec<(Complex64, f64)>> {
    let pencil = op.pencil();
    let u = unit_roundoff(op.precision()) * (op.dim() as f64).powf(1.5);
    exec::try_map_range(mus.len(), |i| pencil.det_scaled(mus[i]).map(|(d, s)| (d, u * s)))
}

/// Determinant values along a list of `μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DetCurve {
    pub mus: Vec<Complex64>,
    pub values: Vec<Complex64>,
    pub tag: KernelTag,
    /// Node-doubling delta, when the caller measured one.
    pub convergence: Option<f64>,
}

pub fn det_curve(op: &NystromOperator, mus: &[Complex64]) -> Result<DetCurve> {
    let pencil = op.pencil();
    let values = exec::try_map_range(mus.len(), |i| pencil.det(mus[i]))?;
    Ok(DetCurve {
        mus: mus.to_vec(),
        values,
        tag: op.tag,
        convergence: None,
    })
}

/// `tr(Aⁿ)`; `n = 1` is the weighted diagonal sum.
pub fn trace_power(op: &NystromOperator, n: usize) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::InvalidParameter("trace power starts at n = 1".into()));
    }
    let a = &op.matrix;
    let dim = op.dim();
    if n == 1 {
        return Ok((0..dim).fold(Complex64::new(0.0, 0.0), |acc, j| acc + a[(j, j)]));
    }
    let mut power = a.clone();
    for _ in 2..n {
        power = &power * a;
    }
    // tr(P·A) = Σ_j Σ_k P[j][k]·A[k][j], rows in order.
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..dim {
        for k in 0..dim {
            acc += power[(j, k)] * a[(k, j)];
        }
    }
    Ok(acc)
}

pub(crate) fn check_entries(max_entry: f64, precision: Precision) -> Result<()> {
    if !max_entry.is_finite() || max_entry > OVERFLOW_LIMIT {
        return Err(Error::PrecisionRegime {
            max_entry,
            limit: OVERFLOW_LIMIT,
        });
    }
    if precision == Precision::Double && max_entry > DOUBLE_ENTRY_LIMIT {
        return Err(Error::PrecisionRegime {
            max_entry,
            limit: DOUBLE_ENTRY_LIMIT,
        });
    }
    Ok(())
}
