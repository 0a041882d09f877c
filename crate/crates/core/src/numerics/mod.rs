//! Numerical primitives shared by every other module.

pub mod dd;
pub mod hermite;
pub mod linalg;
pub mod qseries;
pub mod quadrature;

pub use hermite::hermite_poly;
pub use linalg::{det_complex, HessenbergPencil};
pub use qseries::{tau_binomial, tau_pochhammer, QCoefficients};
pub use quadrature::{circle_rule, legendre_rule, CircleRule, IntervalRule};
