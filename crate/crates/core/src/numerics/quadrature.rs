use std::f64::consts::PI;

use num_complex::Complex64;

use crate::{Error, Result};

/// Trapezoid rule on the circle `|ξ| = R`.
///
/// Nodes are `ξ_j = R e^{2πij/n}` and weights `w_j = ξ_j / n`, so
/// `Σ w_j f(ξ_j)` approximates `(1/2πi) ∮ f(ξ) dξ` taken counterclockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleRule {
    radius: f64,
    nodes: Vec<Complex64>,
    weights: Vec<Complex64>,
}

impl CircleRule {
    pub fn new(radius: f64, n: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "circle radius must be positive, got {radius}"
            )));
        }
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "circle node count must be even and at least 8, got {n}"
            )));
        }
        let nodes: Vec<Complex64> = (0..n)
            .map(|j| Complex64::from_polar(radius, 2.0 * PI * j as f64 / n as f64))
            .collect();
        let weights = nodes.iter().map(|xi| xi / n as f64).collect();
        Ok(Self {
            radius,
            nodes,
            weights,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    /// `(1/2πi) ∮ f`, accumulated in node order with compensation.
    pub fn integrate<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Complex64 {
        let terms = self.nodes.iter().zip(&self.weights).map(|(&xi, &w)| w * f(xi));
        compensated_sum(terms)
    }
}

/// Neumaier summation, componentwise.
pub fn compensated_sum<I: IntoIterator<Item = Complex64>>(terms: I) -> Complex64 {
    let (mut re, mut im) = (Neumaier::default(), Neumaier::default());
    for z in terms {
        re.add(z.re);
        im.add(z.im);
    }
    Complex64::new(re.total(), im.total())
}

#[derive(Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, v: f64) {
        let s = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - s) + v;
        } else {
            self.comp += (v - s) + self.sum;
        }
        self.sum = s;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn circle_rule(radius: f64, n: usize) -> Result<CircleRule> {
    CircleRule::new(radius, n)
}

/// Gauss–Legendre rule mapped to `[a, b]`; exact for polynomials of degree
/// at most `2n − 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalRule {
    a: f64,
    b: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl IntervalRule {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        let bad = !(a < b) || !a.is_finite() || !b.is_finite();
        if bad {
            return Err(Error::InvalidParameter(format!(
                "interval must satisfy a < b, got [{a}, {b}]"
            )));
        }
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "Gauss–Legendre needs at least 2 nodes, got {n}"
            )));
        }
        let (x, w) = gauss_legendre_unit(n);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        Ok(Self {
            a,
            b,
            nodes: x.iter().map(|&t| mid + half * t).collect(),
            weights: w.iter().map(|&v| half * v).collect(),
        })
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(0.0, |acc, (&z, &v)| acc + v * f(z))
    }
}

pub fn legendre_rule(a: f64, b: f64, n: usize) -> Result<IntervalRule> {
    IntervalRule::new(a, b, n)
}

/// Nodes (ascending) and weights on `[-1, 1]` by Newton iteration on the
/// three-term recurrence.
fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton to convergence.
        let theta = PI * (i as f64 + 0.75) / (nf + 0.5);
        let mut z = theta.cos() * (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() <= 1e-16 * z.abs().max(1e-300) {
                break;
            }
        }
        let (_, d) = legendre_and_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        // z is decreasing in i: place it from both ends, ascending order.
        x[n - 1 - i] = z;
        x[i] = -z;
        w[n - 1 - i] = weight;
        w[i] = weight;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_and_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = nf * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}
