//! Periodic pseudospectral evolution of the small-dispersion equations:
//! KdV and its hierarchy, the general second/fourth-order family, Kawahara,
//! generalised KdV and the semiclassical cubic NLS.
//!
//! Real equations are advanced with ETDRK4 in Fourier space; NLS uses a
//! fourth-order split step with the nonlinear phase applied exactly.

pub mod etdrk4;
pub mod evolve;
pub mod grid;
pub mod nls;
pub mod spec;
pub mod state;

pub use evolve::{evolve, step, Diagnostics, EvolveError, EvolveOptions, Observer, Trajectory};
pub use grid::{PeriodicGrid, Spectral};
pub use nls::{classify_system, madelung, Classification, Madelung, SystemType};
pub use spec::{hampert_rhs, hampert_spec, Equation, EvolutionSpec, HampertCoefficients, NonlinearPart};
pub use state::{Field, FieldState};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectralError {
    #[error("invalid grid or state: {0}")]
    Grid(String),
    #[error("unknown equation `{0}`")]
    UnknownEquation(String),
    #[error("linear symbol of `{label}` has a real part at k = {k}")]
    NonConservative { label: String, k: f64 },
    #[error("{0}")]
    FieldKind(&'static str),
    #[error("time step must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("end time {t_end} does not exceed current time {time}")]
    BadEndTime { time: f64, t_end: f64 },
    #[error("dt * max|u| = {product} exceeds 1 (dt = {dt})")]
    StepTooLarge { dt: f64, product: f64 },
    #[error("solution blew up after t = {time}")]
    BlowUp { time: f64 },
    #[error("|psi| below vacuum threshold at x = {x}")]
    Vacuum { x: f64 },
}
