//! Periodic grids and FFT-based differentiation.

use super::SpectralError;
use crate::diffpoly::Differentiator;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Nodes `x_j = -L + 2 L j / n`, `j = 0..n`, on the periodic interval `[-L, L)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodicGrid {
    pub half_width: f64,
    pub n: usize,
    /// Zero the top third of the spectrum in nonlinear terms.
    pub dealias: bool,
}

impl PeriodicGrid {
    pub fn new(half_width: f64, n: usize) -> Result<Self, SpectralError> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(SpectralError::Grid(format!("half width must be positive, got {half_width}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(SpectralError::Grid(format!("n must be a power of two >= 8, got {n}")));
        }
        Ok(Self {
            half_width,
            n,
            dealias: true,
        })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -self.half_width + self.spacing() * j as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Integer mode index of FFT slot `j`: `0, 1, ..., n/2, -n/2+1, ..., -1`.
    pub fn mode_index(&self, j: usize) -> i64 {
        if j <= self.n / 2 {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }

    /// Physical wavenumber `π ξ / L` of slot `j`; the Nyquist slot maps to 0.
    pub fn wavenumber(&self, j: usize) -> f64 {
        if j == self.n / 2 {
            0.0
        } else {
            std::f64::consts::PI * self.mode_index(j) as f64 / self.half_width
        }
    }
}

/// Grid plus cached FFT plans, wavenumbers and the de-aliasing mask.
#[derive(Clone)]
pub struct Spectral {
    pub grid: PeriodicGrid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    k: Vec<f64>,
    mask: Vec<f64>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl Spectral {
    pub fn new(grid: PeriodicGrid) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.n);
        let inverse = planner.plan_fft_inverse(grid.n);
        let k = (0..grid.n).map(|j| grid.wavenumber(j)).collect();
        let cutoff = grid.n as i64 / 3;
        let mask = (0..grid.n)
            .map(|j| {
                if !grid.dealias || grid.mode_index(j).abs() < cutoff {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        Self {
            grid,
            forward,
            inverse,
            k,
            mask,
        }
    }

    pub fn n(&self) -> usize {
        self.grid.n
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.k
    }

    pub fn mask(&self) -> &[f64] {
        &self.mask
    }

    pub fn forward_complex(&self, data: &[Complex64]) -> Vec<Complex64> {
        let mut buf = data.to_vec();
        self.forward.process(&mut buf);
        buf
    }

    pub fn forward_real(&self, data: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    /// Normalised inverse transform.
    pub fn inverse_complex(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let mut buf = coeffs.to_vec();
        self.inverse.process(&mut buf);
        let s = 1.0 / self.n() as f64;
        buf.iter_mut().for_each(|v| *v *= s);
        buf
    }

    pub fn inverse_real(&self, coeffs: &[Complex64]) -> Vec<f64> {
        self.inverse_complex(coeffs).into_iter().map(|v| v.re).collect()
    }

    /// Multiplies coefficients by `(ik)^order`.
    pub fn apply_derivative(&self, coeffs: &[Complex64], order: usize) -> Vec<Complex64> {
        coeffs
            .iter()
            .zip(&self.k)
            .map(|(c, &k)| c * Complex64::new(0.0, k).powu(order as u32))
            .collect()
    }

    pub fn derivative_real(&self, u: &[f64], order: usize) -> Vec<f64> {
        if order == 0 {
            return u.to_vec();
        }
        let c = self.forward_real(u);
        self.inverse_real(&self.apply_derivative(&c, order))
    }

    pub fn derivative_complex(&self, u: &[Complex64], order: usize) -> Vec<Complex64> {
        let c = self.forward_complex(u);
        self.inverse_complex(&self.apply_derivative(&c, order))
    }

    /// Applies the de-aliasing mask in place.
    pub fn dealias(&self, coeffs: &mut [Complex64]) {
        for (c, m) in coeffs.iter_mut().zip(&self.mask) {
            *c *= *m;
        }
    }

    /// `∫ f dx` over one period (exact for trigonometric polynomials).
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.grid.spacing() * f.iter().sum::<f64>()
    }

    /// Largest coefficient magnitude among the top retained modes relative to
    /// the largest overall; a resolution indicator.
    pub fn tail_ratio(&self, coeffs: &[Complex64]) -> f64 {
        let n = self.n() as i64;
        let top = if self.grid.dealias { n / 3 } else { n / 2 };
        let band = (top - top / 8).max(1);
        let mut peak: f64 = 0.0;
        let mut tail: f64 = 0.0;
        for (j, c) in coeffs.iter().enumerate() {
            let m = self.grid.mode_index(j).abs();
            let a = c.norm();
            peak = peak.max(a);
            if m >= band && m < top {
                tail = tail.max(a);
            }
        }
        if peak == 0.0 {
            0.0
        } else {
            tail / peak
        }
    }
}

impl Differentiator for Spectral {
    fn derivatives(&self, samples: &[f64], max_order: usize) -> Vec<Vec<f64>> {
        let c = self.forward_real(samples);
        let mut out = vec![samples.to_vec()];
        for order in 1..=max_order {
            out.push(self.inverse_real(&self.apply_derivative(&c, order)));
        }
        out
    }
}
