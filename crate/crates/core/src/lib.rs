//! Exact finite-time distribution of the m-th left-most particle in the
//! asymmetric simple exclusion process (ASEP) with step initial condition.
//!
//! The distribution is written as a contour integral whose integrand is a
//! Fredholm determinant of an operator on a circle `C_R`. This crate
//! discretizes that operator with Nyström quadrature, evaluates the
//! determinant, and provides independent routes (residue sums, the
//! multiple-integral series, closed-form algebraic identities, Monte Carlo
//! simulation of the particle system, and the Mehler-kernel scaling limit)
//! used to cross-check every number it produces.
//!
//! Module map:
//!
//! - [`numerics`]: quadrature rules, complex determinants, τ-series, Hermite
//!   polynomials, double-double arithmetic.
//! - [`model`]: model parameters and the scalar kernels.
//! - [`engine`]: Nyström operators, Fredholm determinants, traces, spectra.
//! - [`distribution`]: probability formulas built on the engine.
//! - [`identities`]: engine-independent checks of the algebraic identities.
//! - [`simulator`]: continuous-time Monte Carlo of the particle system.

pub mod distribution;
pub mod engine;
mod error;
pub mod exec;
pub mod identities;
pub mod model;
pub mod numerics;
pub mod simulator;

pub use error::{Error, Result};
pub use model::{ModelParams, ObservationPoint, ScalingQuery};
pub use num_complex::Complex64;
