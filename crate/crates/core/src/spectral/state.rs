//! Field samples on a periodic grid at a given time.

use super::grid::{PeriodicGrid, Spectral};
use super::SpectralError;
use num_complex::Complex64;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Field {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

impl Field {
    pub fn len(&self) -> usize {
        match self {
            Field::Real(v) => v.len(),
            Field::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Field::Real(v) => v.iter().all(|x| x.is_finite()),
            Field::Complex(v) => v.iter().all(|z| z.re.is_finite() && z.im.is_finite()),
        }
    }

    pub fn max_abs(&self) -> f64 {
        match self {
            Field::Real(v) => v.iter().fold(0.0, |m, x| m.max(x.abs())),
            Field::Complex(v) => v.iter().fold(0.0, |m, z| m.max(z.norm())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldState {
    pub grid: PeriodicGrid,
    pub samples: Field,
    pub eps: f64,
    pub time: f64,
}

impl FieldState {
    pub fn real(grid: PeriodicGrid, samples: Vec<f64>, eps: f64, time: f64) -> Result<Self, SpectralError> {
        Self::checked(grid, Field::Real(samples), eps, time)
    }

    pub fn complex(grid: PeriodicGrid, samples: Vec<Complex64>, eps: f64, time: f64) -> Result<Self, SpectralError> {
        Self::checked(grid, Field::Complex(samples), eps, time)
    }

    /// Samples `f` at the grid nodes.
    pub fn from_fn(grid: PeriodicGrid, eps: f64, f: impl Fn(f64) -> f64) -> Result<Self, SpectralError> {
        Self::real(grid, grid.nodes().into_iter().map(f).collect(), eps, 0.0)
    }

    fn checked(grid: PeriodicGrid, samples: Field, eps: f64, time: f64) -> Result<Self, SpectralError> {
        if samples.len() != grid.n {
            return Err(SpectralError::Grid(format!(
                "{} samples for a grid of {} nodes",
                samples.len(),
                grid.n
            )));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(SpectralError::Grid(format!("eps must be positive, got {eps}")));
        }
        Ok(Self {
            grid,
            samples,
            eps,
            time,
        })
    }

    pub fn real_samples(&self) -> Option<&[f64]> {
        match &self.samples {
            Field::Real(v) => Some(v),
            Field::Complex(_) => None,
        }
    }

    pub fn complex_samples(&self) -> Option<&[Complex64]> {
        match &self.samples {
            Field::Complex(v) => Some(v),
            Field::Real(_) => None,
        }
    }

    /// Relative size of the top retained Fourier band (should stay below 1e-8).
    pub fn resolution_ratio(&self, sp: &Spectral) -> f64 {
        let c = match &self.samples {
            Field::Real(v) => sp.forward_real(v),
            Field::Complex(v) => sp.forward_complex(v),
        };
        sp.tail_ratio(&c)
    }
}
