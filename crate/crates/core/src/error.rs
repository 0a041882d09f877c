use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate-tau: {0}")]
    DegenerateTau(&'static str),

    #[error("pole-at-origin: ξ = 0 is a singular point of the kernel")]
    PoleAtOrigin,

    #[error("kernel-singularity: denominator |p + qξξ' − ξ| = {modulus:e} at an inadmissible contour point")]
    KernelSingularity { modulus: f64 },

    #[error("bad-contour: radius {radius} is not admissible (need R > 1 and qR² − R − p > 0)")]
    BadContour { radius: f64 },

    #[error("precision-regime: Nyström entry magnitude {max_entry:e} exceeds {limit:e}; use extended precision or a smaller t")]
    PrecisionRegime { max_entry: f64, limit: f64 },

    #[error("no-left-drift: the limit kernels require p < q")]
    NoLeftDrift,

    #[error("singular-to-working-precision: exact zero pivot column at step {column}")]
    Singular { column: usize },

    #[error("inner-quadrature-failure: doubling the inner nodes changed an entry by {delta:e}")]
    InnerQuadratureFailure { delta: f64 },

    #[error("empty-sum: the series starts at k = m = {m} but k_max = {k_max}")]
    EmptySum { m: usize, k_max: usize },

    #[error("degenerate-sample: {0}")]
    DegenerateSample(&'static str),

    #[error("outside-convergence-disk: |z| = {modulus} must be below {limit}")]
    OutsideConvergenceDisk { modulus: f64, limit: f64 },
}

impl Error {
    /// Errors that come from numerics running out of accuracy rather than
    /// from bad arguments.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::PrecisionRegime { .. }
                | Error::Singular { .. }
                | Error::InnerQuadratureFailure { .. }
                | Error::KernelSingularity { .. }
        )
    }
}
