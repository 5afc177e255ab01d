//! Semiclassical phases built from the initial datum: the reflection phase
//! `ρ`, the lens phase `φ` near an edge, and the explicit outer parametrix.

use super::matrix::Mat2;
use super::RhError;
use crate::hopf::CatastrophePoint;
use crate::initial_data::InitialDatum;
use crate::numerics::fit::{fit_power_law, PowerFit};
use crate::numerics::quad::{adaptive, graded_toward_end, GlRule};
use num_complex::Complex64;
use serde::Serialize;

/// Gauss–Legendre nodes per panel in [`rho_wkb`].
pub const RHO_NODES: usize = 16;
/// Geometric panel levels toward each end of the `ρ` integral.
const RHO_LEVELS: usize = 44;

/// `ρ(λ) = ½ ∫_λ^0 f_L(ξ) / √(ξ - λ) dξ` for `u_min < λ <= 0`.
pub fn rho_wkb(datum: &InitialDatum, lambda: f64) -> Result<f64, RhError> {
    rho_wkb_with(datum, lambda, RHO_NODES)
}

/// [`rho_wkb`] with an explicit node count per panel.
///
/// With `ξ = λ + s²` the integral is `∫_0^S f_L(λ + s²) ds`, `S = √(-λ)`.
/// Writing `d = S - s` keeps `ξ = -d (2S - d)` accurate near `ξ = 0`, where
/// `f_L` has a logarithmic singularity; panels are graded toward both ends
/// (the lower end is nearly singular when `λ` approaches `u_min`).
pub fn rho_wkb_with(datum: &InitialDatum, lambda: f64, nodes: usize) -> Result<f64, RhError> {
    let u_min = datum.minimum_value();
    if !(lambda > u_min && lambda <= 0.0) {
        return Err(RhError::Domain(format!("λ = {lambda} outside ({u_min}, 0]")));
    }
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let big_s = (-lambda).sqrt();
    let f = |d: f64| -> Result<f64, RhError> {
        let xi = (-d * (2.0 * big_s - d)).min(-f64::MIN_POSITIVE).max(lambda);
        if xi <= u_min {
            return Ok(datum.minimum_location());
        }
        Ok(datum.invert_decreasing(xi)?)
    };
    let rule = GlRule::new(nodes);
    let half = 0.5 * big_s;
    let near_zero = -graded_toward_end(&rule, half, 0.0, RHO_LEVELS, f)?;
    let near_lambda = graded_toward_end(&rule, half, big_s, RHO_LEVELS, f)?;
    Ok(near_zero + near_lambda)
}

/// `F(λ; x, t) = -x + 6λt + f_L(λ)` and its first three λ-derivatives.
fn f_jet(datum: &InitialDatum, lambda: f64, x: f64, t: f64) -> Result<[f64; 4], RhError> {
    let [fl, f1, f2, f3] = datum.fl_jet(lambda)?;
    Ok([-x + 6.0 * lambda * t + fl, 6.0 * t + f1, f2, f3])
}

/// `φ(λ; x, t)` expanded about `cp.u_c`.
pub fn phi_eval(datum: &InitialDatum, cp: &CatastrophePoint, lambda: f64, x: f64, t: f64) -> Result<f64, RhError> {
    phi_eval_at(datum, cp.u_c, lambda, x, t)
}

/// `φ(λ; x, t)` expanded about the edge `e`:
/// `-√(e-λ) F(e) + ⅔(e-λ)^{3/2} F'(e) - (4/15)(e-λ)^{5/2} F''(e)
///  - (4/15) ∫_e^λ F'''(ξ)(ξ-λ)^{5/2} dξ`,
/// evaluated on the real side `u_min < λ <= e`.
pub fn phi_eval_at(datum: &InitialDatum, edge: f64, lambda: f64, x: f64, t: f64) -> Result<f64, RhError> {
    let u_min = datum.minimum_value();
    if !(edge > u_min && edge < 0.0) {
        return Err(RhError::Domain(format!("edge {edge} outside ({u_min}, 0)")));
    }
    if !(lambda > u_min && lambda <= edge) {
        return Err(RhError::Domain(format!(
            "λ = {lambda} must lie in ({u_min}, {edge}] where φ is real"
        )));
    }
    let [f0, f1, f2, f3] = f_jet(datum, edge, x, t)?;
    let w = edge - lambda;
    if w == 0.0 {
        return Ok(0.0);
    }
    let sw = w.sqrt();
    let poly = -sw * f0 + (2.0 / 3.0) * w * sw * f1 - (4.0 / 15.0) * w * w * sw * f2;
    // -(4/15) ∫_e^λ = (4/15) ∫_λ^e; F''' = f_L'''
    let scale = w.powf(3.5) * f3.abs().max(1.0);
    let mut failure = None;
    let integral = adaptive(lambda, edge, 1e-13 * scale, |xi| match datum.fl_derivative(xi, 3) {
        Ok(v) => v * (xi - lambda).powf(2.5),
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    });
    if let Some(e) = failure {
        return Err(e.into());
    }
    Ok(poly + (4.0 / 15.0) * integral)
}

#[derive(Debug, Clone, Serialize)]
pub struct PhiFit {
    pub fit: PowerFit,
    /// Sign of `φ` on the sampled side.
    pub sign: f64,
}

/// Power-law fit of `|φ(edge - δ)|` over the offsets `δ`.
pub fn phi_exponent(
    datum: &InitialDatum,
    edge: f64,
    x: f64,
    t: f64,
    offsets: &[f64],
) -> Result<PhiFit, RhError> {
    let mut ys = Vec::with_capacity(offsets.len());
    let mut sign = 0.0;
    for &d in offsets {
        let v = phi_eval_at(datum, edge, edge - d, x, t)?;
        if sign == 0.0 {
            sign = v.signum();
        } else if v.signum() != sign {
            return Err(RhError::Domain(format!("φ changes sign at offset {d}")));
        }
        ys.push(v.abs());
    }
    let fit = fit_power_law(offsets, &ys).map_err(|e| RhError::Domain(e.to_string()))?;
    Ok(PhiFit { fit, sign })
}

/// `P(λ) = (-λ)^{1/4} (u_c - λ)^{-σ₃/4} ((1, 1), (i, -i))`, principal
/// branches, defined off `[u_c, ∞)`.
pub fn global_parametrix(lambda: Complex64, u_c: f64) -> Result<Mat2, RhError> {
    if !(u_c < 0.0) {
        return Err(RhError::Domain(format!("u_c = {u_c} must be negative")));
    }
    if lambda.im == 0.0 && lambda.re >= u_c {
        return Err(RhError::OnCut {
            kind: "global_parametrix",
            re: lambda.re,
            im: lambda.im,
        });
    }
    let a = (-lambda).powf(0.25);
    let b = (Complex64::new(u_c, 0.0) - lambda).powf(0.25);
    let i = Complex64::new(0.0, 1.0);
    let one = Complex64::new(1.0, 0.0);
    let e = Mat2::new(one, one, i, -i);
    Ok(Mat2::diag(a / b, a * b) * e)
}

/// Offset for boundary values on the cut.
pub const BOUNDARY_OFFSET: f64 = 1e-8;

/// Boundary values `(P₊, P₋)` at a real `λ > u_c` from above and below,
/// each extrapolated from offsets `δ` and `2δ` (error `O(δ²)`).
pub fn parametrix_boundary_values(lambda: f64, u_c: f64) -> Result<(Mat2, Mat2), RhError> {
    let side = |sign: f64| -> Result<Mat2, RhError> {
        let d = sign * BOUNDARY_OFFSET;
        let p1 = global_parametrix(Complex64::new(lambda, d), u_c)?;
        let p2 = global_parametrix(Complex64::new(lambda, 2.0 * d), u_c)?;
        let mut out = p1;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] = p1.0[i][j] * 2.0 - p2.0[i][j];
            }
        }
        Ok(out)
    };
    Ok((side(1.0)?, side(-1.0)?))
}

/// Max relative residual of `P₊ = P₋ J` over the sample points, with
/// `J = iσ₁` on `(u_c, 0)` and `J = σ₁` on `(0, ∞)`.
pub fn parametrix_jump_residual(u_c: f64, lambdas: &[f64]) -> Result<f64, RhError> {
    let i = Complex64::new(0.0, 1.0);
    let mut worst: f64 = 0.0;
    for &l in lambdas {
        if !(l > u_c) || l == 0.0 {
            return Err(RhError::Domain(format!("jump sample {l} not in (u_c, 0) ∪ (0, ∞)")));
        }
        let j = if l < 0.0 { Mat2::SIGMA1.scale(i) } else { Mat2::SIGMA1 };
        let (plus, minus) = parametrix_boundary_values(l, u_c)?;
        let scale = plus.0.iter().flatten().fold(0.0f64, |m, z| m.max(z.norm()));
        worst = worst.max(plus.distance(&(minus * j)) / scale);
    }
    Ok(worst)
}
