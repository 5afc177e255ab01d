//! Minimal 2×2 complex matrix algebra for jump data.

use num_complex::Complex64;
use serde::Serialize;
use std::ops::Mul;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

const fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]);
    pub const SIGMA1: Mat2 = Mat2([[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]);
    pub const SIGMA3: Mat2 = Mat2([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]]);

    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn diag(a: Complex64, d: Complex64) -> Self {
        Self::new(a, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), d)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let m = self.0;
        Self::new(m[0][0] * s, m[0][1] * s, m[1][0] * s, m[1][1] * s)
    }

    pub fn det(&self) -> Complex64 {
        let m = self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    /// Inverse; `None` for a singular matrix.
    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == Complex64::new(0.0, 0.0) {
            return None;
        }
        let m = self.0;
        Some(Self::new(m[1][1] / d, -m[0][1] / d, -m[1][0] / d, m[0][0] / d))
    }

    /// Max-entry distance to another matrix.
    pub fn distance(&self, other: &Mat2) -> f64 {
        let (a, b) = (self.0, other.0);
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((a[i][j] - b[i][j]).norm());
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.is_finite())
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (self.0, rhs.0);
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}
