//! Complex determinants by row-pivoted elimination, generic over the
//! working precision.

use std::ops::{Add, Div, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::dd::CDd;
use crate::{Error, Result};

/// Field operations needed by the eliminations below.
pub trait Scalar:
    Copy
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    /// Pivot magnitude; any norm works.
    fn magnitude(&self) -> f64;
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.l1_norm()
    }
}

impl Scalar for CDd {
    fn zero() -> Self {
        CDd::ZERO
    }
    fn one() -> Self {
        CDd::ONE
    }
    fn magnitude(&self) -> f64 {
        self.l1()
    }
}

/// Determinant of the row-major `n × n` matrix in `a`, destroying it.
///
/// Partial pivoting by rows. Fails only when a pivot column is exactly zero.
pub fn lu_det_in_place<T: Scalar>(a: &mut [T], n: usize) -> Result<T> {
    lu_det_scaled_in_place(a, n).map(|(det, _)| det)
}

/// [`lu_det_in_place`] plus `Π max(1, |u_kk|)` over the pivots. When the
/// determinant is small but some pivots are large, its absolute rounding
/// error is of order unit roundoff times a low power of `n` times this product.
pub fn lu_det_scaled_in_place<T: Scalar>(a: &mut [T], n: usize) -> Result<(T, f64)> {
    assert_eq!(a.len(), n * n, "buffer is not n × n");
    let mut det = T::one();
    let mut scale = 1.0f64;
    for k in 0..n {
        let (piv, best) = (k..n)
            .map(|i| (i, a[i * n + k].magnitude()))
            .fold((k, -1.0), |acc, c| if c.1 > acc.1 { c } else { acc });
        if best == 0.0 {
            return Err(Error::Singular { column: k });
        }
        if piv != k {
            for j in 0..n {
                a.swap(k * n + j, piv * n + j);
            }
            det = -det;
        }
        let pivot = a[k * n + k];
        det = det * pivot;
        scale *= pivot.magnitude().max(1.0);
        for i in k + 1..n {
            let l = a[i * n + k] / pivot;
            if l.magnitude() == 0.0 {
                continue;
            }
            for j in k + 1..n {
                let u = a[k * n + j];
                a[i * n + j] = a[i * n + j] - l * u;
            }
        }
    }
    Ok((det, scale))
}

/// Determinant of a square complex matrix.
pub fn det_complex(m: &DMatrix<Complex64>) -> Result<Complex64> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidParameter(format!(
            "determinant of a {}×{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    let n = m.nrows();
    let mut buf: Vec<Complex64> = (0..n * n).map(|idx| m[(idx / n, idx % n)]).collect();
    lu_det_in_place(&mut buf, n)
}

/// An upper Hessenberg matrix `H` similar to a given `A`, so that
/// `det(I − μA) = det(I − μH)` costs `O(n²)` per shift.
#[derive(Debug, Clone)]
pub struct HessenbergPencil<T> {
    n: usize,
    h: Vec<T>,
}

impl HessenbergPencil<Complex64> {
    /// Householder reduction.
    pub fn new(a: &DMatrix<Complex64>) -> Self {
        let n = a.nrows();
        let h = nalgebra::linalg::Hessenberg::new(a.clone()).h();
        let h = (0..n * n).map(|idx| h[(idx / n, idx % n)]).collect();
        Self { n, h }
    }
}

impl<T: Scalar> HessenbergPencil<T> {
    /// Reduction by stabilized elimination; used for scalar types without
    /// a Householder implementation.
    pub fn by_elimination(mut a: Vec<T>, n: usize) -> Self {
        assert_eq!(a.len(), n * n, "buffer is not n × n");
        for k in 0..n.saturating_sub(2) {
            let (piv, best) = (k + 1..n)
                .map(|i| (i, a[i * n + k].magnitude()))
                .fold((k + 1, -1.0), |acc, c| if c.1 > acc.1 { c } else { acc });
            if best == 0.0 {
                continue;
            }
            if piv != k + 1 {
                for j in 0..n {
                    a.swap(piv * n + j, (k + 1) * n + j);
                }
                for i in 0..n {
                    a.swap(i * n + piv, i * n + k + 1);
                }
            }
            let pivot = a[(k + 1) * n + k];
            for i in k + 2..n {
                let l = a[i * n + k] / pivot;
                if l.magnitude() == 0.0 {
                    continue;
                }
                for j in k..n {
                    let u = a[(k + 1) * n + j];
                    a[i * n + j] = a[i * n + j] - l * u;
                }
                for r in 0..n {
                    let u = a[r * n + i];
                    a[r * n + k + 1] = a[r * n + k + 1] + l * u;
                }
                a[i * n + k] = T::zero();
            }
        }
        Self { n, h: a }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> T {
        self.h[i * self.n + j]
    }

    /// `det(I − μH)` by pivoted elimination of the single subdiagonal.
    pub fn det_shifted(&self, mu: T) -> Result<T> {
        self.det_shifted_scaled(mu).map(|(det, _)| det)
    }

    /// [`Self::det_shifted`] plus the pivot product `Π max(1, |u_kk|)`.
    pub fn det_shifted_scaled(&self, mu: T) -> Result<(T, f64)> {
        let n = self.n;
        let mut b: Vec<T> = self.h.iter().map(|&v| -(mu * v)).collect();
        for i in 0..n {
            b[i * n + i] = b[i * n + i] + T::one();
        }
        let mut det = T::one();
        let mut scale = 1.0f64;
        for k in 0..n {
            if k + 1 < n && b[(k + 1) * n + k].magnitude() > b[k * n + k].magnitude() {
                for j in k..n {
                    b.swap(k * n + j, (k + 1) * n + j);
                }
                det = -det;
            }
            let pivot = b[k * n + k];
            if pivot.magnitude() == 0.0 {
                return Err(Error::Singular { column: k });
            }
            det = det * pivot;
            scale *= pivot.magnitude().max(1.0);
            if k + 1 < n {
                let l = b[(k + 1) * n + k] / pivot;
                if l.magnitude() != 0.0 {
                    for j in k + 1..n {
                        let u = b[k * n + j];
                        b[(k + 1) * n + j] = b[(k + 1) * n + j] - l * u;
                    }
                }
            }
        }
        Ok((det, scale))
    }
}
