//! τ-deformed products and binomial coefficients.

use num_complex::Complex64;

use crate::{Error, Result};

/// `(λ; τ)_m = (1 − λ)(1 − λτ)⋯(1 − λτ^{m−1})`; the empty product for `m = 0`.
pub fn tau_pochhammer(lambda: Complex64, tau: f64, m: usize) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    let mut power = 1.0;
    for _ in 0..m {
        acc *= Complex64::new(1.0, 0.0) - lambda * power;
        power *= tau;
    }
    acc
}

/// `1 − τ^k` without cancellation for τ close to 1.
fn one_minus_pow(tau: f64, k: i64) -> f64 {
    -((k as f64) * tau.ln()).exp_m1()
}

fn check_tau(tau: f64) -> Result<()> {
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    let bad = !(tau > 0.0) || !tau.is_finite();
    if bad {
        return Err(Error::InvalidParameter(format!("τ must be positive, got {tau}")));
    }
    if (tau - 1.0).abs() < 1e-12 {
        return Err(Error::DegenerateTau("τ-binomial is undefined at τ = 1"));
    }
    Ok(())
}

/// τ-binomial coefficient `[N n]_τ`, as a product of ratios
/// `(1 − τ^{N−n+i}) / (1 − τ^i)`, `i = 1..n`.
///
/// Returns 0 when `n < 0` or `n > N`.
pub fn tau_binomial(big_n: i64, n: i64, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    if n < 0 || n > big_n {
        return Ok(0.0);
    }
    let n = n.min(big_n - n);
    Ok((1..=n)
        .map(|i| one_minus_pow(tau, big_n - n + i) / one_minus_pow(tau, i))
        .product())
}

/// Cached powers `τ^0 … τ^K` built by repeated multiplication.
#[derive(Debug, Clone, PartialEq)]
pub struct QCoefficients {
    tau: f64,
    powers: Vec<f64>,
}

impl QCoefficients {
    pub fn new(tau: f64, max_power: usize) -> Result<Self> {
        check_tau(tau)?;
        let mut powers = Vec::with_capacity(max_power + 1);
        let mut v = 1.0;
        for _ in 0..=max_power {
            powers.push(v);
            v *= tau;
        }
        Ok(Self { tau, powers })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn max_power(&self) -> usize {
        self.powers.len() - 1
    }

    /// `τ^k` from the cache, falling back to `powi` beyond it.
    pub fn pow(&self, k: usize) -> f64 {
        self.powers
            .get(k)
            .copied()
            .unwrap_or_else(|| self.tau.powi(k as i32))
    }

    pub fn binomial(&self, big_n: i64, n: i64) -> f64 {
        tau_binomial(big_n, n, self.tau).expect("τ validated at construction")
    }
}
