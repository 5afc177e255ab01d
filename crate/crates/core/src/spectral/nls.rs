//! Split-step integration of the semiclassical cubic NLS
//! `iεψ_t + (ε²/2)ψ_xx ± |ψ|²ψ = 0`, the Madelung variables and the
//! type of the dispersionless system.

use super::grid::Spectral;
use super::spec::{EvolutionSpec, NonlinearPart};
use super::state::{Field, FieldState};
use super::SpectralError;
use num_complex::Complex64;
use serde::Serialize;

/// Fourth-order Yoshida weights for composing Strang steps.
fn yoshida_weights() -> (f64, f64) {
    let c = 2f64.cbrt();
    let w1 = 1.0 / (2.0 - c);
    (w1, -c * w1)
}

/// Cached exponentials for one step size.
#[derive(Debug, Clone)]
pub struct NlsStepper {
    pub h: f64,
    pub eps: f64,
    focusing: bool,
    /// `exp(L w h / 2)` for the outer and inner Yoshida weights.
    half_outer: Vec<Complex64>,
    half_inner: Vec<Complex64>,
    w: (f64, f64),
}

impl NlsStepper {
    pub fn new(spec: &EvolutionSpec, sp: &Spectral, eps: f64, h: f64) -> Self {
        let NonlinearPart::Nls { focusing } = *spec.nonlinear() else {
            panic!("split step is used for NLS specs only");
        };
        let w = yoshida_weights();
        let factors = |weight: f64| -> Vec<Complex64> {
            sp.wavenumbers()
                .iter()
                .map(|&k| (spec.symbol(k, eps) * (0.5 * weight * h)).exp())
                .collect()
        };
        Self {
            h,
            eps,
            focusing,
            half_outer: factors(w.0),
            half_inner: factors(w.1),
            w,
        }
    }

    fn linear(&self, psi: &mut Vec<Complex64>, sp: &Spectral, factors: &[Complex64]) {
        let mut c = sp.forward_complex(psi);
        for (v, f) in c.iter_mut().zip(factors) {
            *v *= f;
        }
        *psi = sp.inverse_complex(&c);
    }

    fn nonlinear(&self, psi: &mut [Complex64], tau: f64) {
        let sign = if self.focusing { 1.0 } else { -1.0 };
        for z in psi.iter_mut() {
            let phase = sign * z.norm_sqr() * tau / self.eps;
            *z *= Complex64::from_polar(1.0, phase);
        }
    }

    fn strang(&self, psi: &mut Vec<Complex64>, sp: &Spectral, weight: f64, half: &[Complex64]) {
        self.linear(psi, sp, half);
        self.nonlinear(psi, weight * self.h);
        self.linear(psi, sp, half);
    }

    pub fn step(&self, psi: &mut Vec<Complex64>, sp: &Spectral) {
        let (w1, w0) = self.w;
        self.strang(psi, sp, w1, &self.half_outer);
        self.strang(psi, sp, w0, &self.half_inner);
        self.strang(psi, sp, w1, &self.half_outer);
    }
}

/// Hydrodynamic variables of a wave function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Madelung {
    /// `u = -|ψ|²` (defocusing convention).
    pub u_defocusing: Vec<f64>,
    /// `u = |ψ|²` (focusing convention).
    pub u_focusing: Vec<f64>,
    /// `v = (ε/2i)(ψ_x/ψ - ψ*_x/ψ*) = ε Im(ψ_x/ψ)`.
    pub v: Vec<f64>,
}

/// Modulus below which the phase velocity is undefined.
pub const VACUUM_THRESHOLD: f64 = 1e-8;

pub fn madelung(state: &FieldState) -> Result<Madelung, SpectralError> {
    let Field::Complex(psi) = &state.samples else {
        return Err(SpectralError::FieldKind("madelung needs a complex field"));
    };
    if let Some((j, _)) = psi.iter().enumerate().find(|(_, z)| z.norm() < VACUUM_THRESHOLD) {
        return Err(SpectralError::Vacuum { x: state.grid.node(j) });
    }
    let sp = Spectral::new(state.grid);
    let psi_x = sp.derivative_complex(psi, 1);
    let v = psi
        .iter()
        .zip(&psi_x)
        .map(|(p, px)| state.eps * (px / p).im)
        .collect();
    let rho: Vec<f64> = psi.iter().map(|z| z.norm_sqr()).collect();
    Ok(Madelung {
        u_defocusing: rho.iter().map(|r| -r).collect(),
        u_focusing: rho,
        v,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemType {
    Hyperbolic,
    Elliptic,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Classification {
    pub kind: SystemType,
    pub eigenvalues: [Complex64; 2],
}

/// Type of `u_t + (uv)_x = 0, v_t + v v_x - u_x = 0`-like systems with
/// characteristic speeds `v ± √(-u)`.
pub fn classify_system(u: f64, v: f64) -> Classification {
    if u < 0.0 {
        let r = (-u).sqrt();
        Classification {
            kind: SystemType::Hyperbolic,
            eigenvalues: [Complex64::new(v + r, 0.0), Complex64::new(v - r, 0.0)],
        }
    } else if u > 0.0 {
        let r = u.sqrt();
        Classification {
            kind: SystemType::Elliptic,
            eigenvalues: [Complex64::new(v, r), Complex64::new(v, -r)],
        }
    } else {
        Classification {
            kind: SystemType::Degenerate,
            eigenvalues: [Complex64::new(v, 0.0); 2],
        }
    }
}
