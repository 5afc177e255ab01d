//! Riemann–Hilbert jump data as validated structures: ray contours, jump
//! matrices with their time-evolved reflection coefficients, the explicit
//! phase functions, and the outer parametrix. Nothing here solves an RH
//! problem; the checks are algebraic (unimodularity, cyclic consistency at
//! the node, jump relations of closed-form functions).

pub mod descriptor;
pub mod matrix;
pub mod phases;
pub mod wkb;

pub use descriptor::{
    builtin_descriptor, consistent_inversion_patterns, cyclic_consistency, cyclic_product, det_check,
    DescriptorName, DescriptorSummary, JumpDescriptor, Orientation, Parameters, Ray, RayContour, RayJump,
    Reflection, Shape,
};
pub use matrix::Mat2;
pub use phases::{phase_eval, Phase};
pub use wkb::{
    global_parametrix, parametrix_boundary_values, parametrix_jump_residual, phi_eval, phi_eval_at, phi_exponent,
    rho_wkb, rho_wkb_with, PhiFit, BOUNDARY_OFFSET, RHO_NODES,
};

use crate::hopf::HopfError;
use crate::initial_data::{InitialDataError, InitialDatum};
use num_complex::Complex64;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RhError {
    #[error("unknown descriptor '{0}'")]
    UnknownDescriptor(String),
    #[error("descriptor {0} needs an initial reflection coefficient")]
    MissingReflection(String),
    #[error("missing parameter '{0}'")]
    MissingParameter(String),
    #[error("invalid contour: {0}")]
    Contour(String),
    #[error("{kind} evaluated on its branch cut at {re} + {im}i")]
    OnCut { kind: &'static str, re: f64, im: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("{0}")]
    Domain(String),
    #[error(transparent)]
    Datum(#[from] InitialDataError),
    #[error(transparent)]
    Hopf(#[from] HopfError),
}

/// The leading-order reflection coefficient `r0(λ) = i e^{-2iρ(λ)/ε}` on
/// `(u_min, 0)`, and zero elsewhere (where `r0` is exponentially small).
pub fn wkb_reflection(datum: InitialDatum) -> Reflection {
    let u_min = datum.minimum_value();
    Arc::new(move |lambda: f64, eps: f64| {
        if lambda > u_min && lambda < 0.0 {
            match rho_wkb(&datum, lambda) {
                Ok(rho) => Complex64::new(0.0, 1.0) * Complex64::from_polar(1.0, -2.0 * rho / eps),
                Err(_) => Complex64::new(f64::NAN, f64::NAN),
            }
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}
