//! The two special transcendents: the real pole-free solution `U(X, T)` of
//! the second member of the Painlevé I hierarchy and the tritronquée
//! solution `Q(Z)` of Painlevé I.

pub mod p1;
pub mod p12;
mod stencil;

pub use p1::{
    anchor, continue_and_detect_poles, solve_tritronquee, tritronquee_asymptotic, P1Options, P1Trajectory, PoleEstimate,
    RaySegment,
};
pub use p12::{
    asymptote, asymptote_fit, kdv_consistency, solve_p12, solve_p12_family, solve_p12_seeded, P12Options,
    P12Solution,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PainleveError {
    #[error("invalid input: {0}")]
    Domain(String),
    #[error("Newton did not converge after {iterations} iterations (residual {residual:e})")]
    NewtonFailed { iterations: usize, residual: f64 },
    #[error("singular Newton matrix at row {0}")]
    Singular(usize),
    #[error("solution approaches a pole near Z = {re} + {im}i")]
    PoleProximity { re: f64, im: f64 },
    #[error("X = {x} lies outside [-{x_max}, {x_max}]")]
    OutOfDomain { x: f64, x_max: f64 },
}
