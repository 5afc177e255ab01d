//! Explicit phase functions with fixed principal branches.
//!
//! `θ` and `α̃` use `ζ^{1/2}` cut along the negative real axis, `α` uses
//! `(-λ)^{1/2}` cut along the positive real axis, and `β` is rational with
//! poles at `z = ±i/2`.

use super::RhError;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Phase {
    /// `ζ^{7/2}/105 - T ζ^{3/2}/3 + X ζ^{1/2}`.
    Theta { x: f64, t: f64 },
    /// `4 ζ^{5/2}/5 - Z ζ^{1/2}`.
    TildeAlpha { z: f64 },
    /// `x (-λ)^{1/2} + 4t (-λ)^{3/2}`.
    Alpha { x: f64, t: f64 },
    /// `-z (y - 2t/(1 + 4z²))`.
    Beta { y: f64, t: f64 },
}

fn on_cut(kind: &'static str, w: Complex64) -> RhError {
    RhError::OnCut { kind, re: w.re, im: w.im }
}

/// Principal square root, rejecting points on the negative real axis.
fn root(kind: &'static str, w: Complex64, at: Complex64) -> Result<Complex64, RhError> {
    if w.im == 0.0 && w.re < 0.0 {
        return Err(on_cut(kind, at));
    }
    Ok(w.sqrt())
}

pub fn phase_eval(phase: Phase, w: Complex64) -> Result<Complex64, RhError> {
    match phase {
        Phase::Theta { x, t } => {
            let s = root("theta", w, w)?;
            let s3 = s * s * s;
            Ok(s3 * s3 * s / 105.0 - s3 * (t / 3.0) + s * x)
        }
        Phase::TildeAlpha { z } => {
            let s = root("tilde_alpha", w, w)?;
            let s2 = s * s;
            Ok(s2 * s2 * s * 0.8 - s * z)
        }
        Phase::Alpha { x, t } => {
            let s = root("alpha", -w, w)?;
            Ok(s * x + s * s * s * (4.0 * t))
        }
        Phase::Beta { y, t } => {
            let den = w * w * 4.0 + 1.0;
            if den.norm() < 1e-300 {
                return Err(on_cut("beta", w));
            }
            Ok(-w * (y - 2.0 * t / den))
        }
    }
}
