//! Continuous-time Monte Carlo of ASEP with step initial data.
//!
//! Particles start on `1, …, N`. Each carries a rate-one clock; when it rings
//! the particle tries to jump right with probability `p` and left with
//! probability `q`, and the jump happens only if the target site is empty.
//! The simulation uses a single rate-`N` clock and picks the ringing
//! particle uniformly. Blocked attempts are no-ops, which is exact because
//! the clocks are memoryless.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::exec;
use crate::model::{check_time, ModelParams};
use crate::{Error, Result};

/// What sits to the right of the last simulated particle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Site `N + 1` is permanently occupied, standing in for the frozen
    /// remainder of the step.
    #[default]
    Packed,
    /// Nothing: the last particle moves freely to the right.
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub params: ModelParams,
    pub m: usize,
    pub t: f64,
    pub trials: usize,
    pub seed: u64,
    /// `None` uses [`particle_count_heuristic`].
    pub particles: Option<usize>,
    pub boundary: Boundary,
    /// Two-sided confidence level of the reported intervals.
    pub confidence: f64,
}

impl SimConfig {
    pub fn new(params: ModelParams, m: usize, t: f64, trials: usize, seed: u64) -> Result<Self> {
        let cfg = Self {
            params,
            m,
            t,
            trials,
            seed,
            particles: None,
            boundary: Boundary::Packed,
            confidence: 0.9999,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_particles(mut self, n: usize) -> Result<Self> {
        self.particles = Some(n);
        self.validate()?;
        Ok(self)
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_confidence(mut self, confidence: f64) -> Result<Self> {
        self.confidence = confidence;
        self.validate()?;
        Ok(self)
    }

    pub fn particle_count(&self) -> usize {
        self.particles.unwrap_or_else(|| particle_count_heuristic(self.m, self.t))
    }

    fn validate(&self) -> Result<()> {
        check_time(self.t)?;
        if self.m == 0 {
            return Err(Error::InvalidParameter("particle rank m starts at 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("at least one trial is required".into()));
        }
        if self.particle_count() < self.m {
            return Err(Error::InvalidParameter(format!(
                "particle count {} is below the rank m = {}",
                self.particle_count(),
                self.m
            )));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::InvalidParameter(format!("confidence must lie in (0, 1), got {}", self.confidence)));
        }
        Ok(())
    }
}

/// `N = m + ⌈3t⌉ + 20`.
pub fn particle_count_heuristic(m: usize, t: f64) -> usize {
    m + (3.0 * t).ceil() as usize + 20
}

/// RNG for one trial: ChaCha8 keyed by `seed`, stream `trial_index`.
pub fn trial_rng(seed: u64, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial_index);
    rng
}

/// `x_m(t)` for one trial.
pub fn run_trial(cfg: &SimConfig, trial_index: u64) -> i64 {
    run_trial_traced(cfg, trial_index, |_| {})
}

/// Like [`run_trial`], calling `observe` with the positions after every
/// clock ring.
pub fn run_trial_traced(cfg: &SimConfig, trial_index: u64, mut observe: impl FnMut(&[i64])) -> i64 {
    let n = cfg.particle_count();
    let mut x: Vec<i64> = (1..=n as i64).collect();
    let mut rng = trial_rng(cfg.seed, trial_index);
    let clock = Exp::new(n as f64).expect("positive rate");
    let p = cfg.params.p();
    let mut now = clock.sample(&mut rng);
    while now <= cfg.t {
        let i = rng.random_range(0..n);
        if rng.random::<f64>() < p {
            let target = x[i] + 1;
            let blocked = match x.get(i + 1) {
                Some(&next) => next == target,
                None => cfg.boundary == Boundary::Packed && target == n as i64 + 1,
            };
            if !blocked {
                x[i] = target;
            }
        } else {
            let target = x[i] - 1;
            if i == 0 || x[i - 1] != target {
                x[i] = target;
            }
        }
        observe(&x);
        now += clock.sample(&mut rng);
    }
    x[cfg.m - 1]
}

/// `x_m(t)` for every trial, in trial order.
pub fn sample_positions(cfg: &SimConfig) -> Vec<i64> {
    exec::map_range(cfg.trials, |i| run_trial(cfg, i as u64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    pub x_values: Vec<i64>,
    pub p_hat: Vec<f64>,
    /// Normal-approximation halfwidth `z*·√(p̂(1−p̂)/trials)`.
    pub halfwidth: Vec<f64>,
    /// Wilson score interval, which stays informative when `p̂` is 0 or 1.
    pub wilson_lower: Vec<f64>,
    pub wilson_upper: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub confidence: f64,
    pub z_star: f64,
}

impl EmpiricalCdf {
    /// Whether `value` lies in the Wilson interval at index `i`.
    pub fn wilson_contains(&self, i: usize, value: f64) -> bool {
        self.wilson_lower[i] <= value && value <= self.wilson_upper[i]
    }
}

/// Two-sided normal quantile for `confidence`.
pub fn z_star(confidence: f64) -> f64 {
    Normal::standard().inverse_cdf(0.5 + confidence / 2.0)
}

/// `p̂(x) = #{trials with x_m(t) ≤ x}/trials` at each `x`.
pub fn empirical_cdf(cfg: &SimConfig, x_values: &[i64]) -> Result<EmpiricalCdf> {
    cfg.validate()?;
    if x_values.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter("x values must be sorted".into()));
    }
    let mut samples = sample_positions(cfg);
    samples.sort_unstable();
    Ok(summarize(cfg, x_values, &samples))
}

fn summarize(cfg: &SimConfig, x_values: &[i64], sorted: &[i64]) -> EmpiricalCdf {
    let n = sorted.len() as f64;
    let z = z_star(cfg.confidence);
    let mut out = EmpiricalCdf {
        x_values: x_values.to_vec(),
        p_hat: Vec::with_capacity(x_values.len()),
        halfwidth: Vec::with_capacity(x_values.len()),
        wilson_lower: Vec::with_capacity(x_values.len()),
        wilson_upper: Vec::with_capacity(x_values.len()),
        trials: sorted.len(),
        seed: cfg.seed,
        confidence: cfg.confidence,
        z_star: z,
    };
    for &x in x_values {
        let count = sorted.partition_point(|&v| v <= x) as f64;
        let ph = count / n;
        let spread = ph * (1.0 - ph) / n;
        let denom = 1.0 + z * z / n;
        let center = (ph + z * z / (2.0 * n)) / denom;
        let half = z / denom * (spread + z * z / (4.0 * n * n)).sqrt();
        out.p_hat.push(ph);
        out.halfwidth.push(z * spread.sqrt());
        out.wilson_lower.push((center - half).max(0.0));
        out.wilson_upper.push((center + half).min(1.0));
    }
    out
}
