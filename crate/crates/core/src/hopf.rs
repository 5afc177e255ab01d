//! Characteristic solution of the Hopf equation `u_t + 6 u u_x = 0` and the
//! point of gradient catastrophe.

use crate::initial_data::{InitialDataError, InitialDatum};
use crate::numerics::fit::{fit_power_law, FitError, PowerFit};
use crate::numerics::roots::{golden_max, newton_bisect};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Grid used to look for several characteristic roots past breaking.
const ROOT_SCAN_POINTS: usize = 4096;
/// `k` below this is treated as a degenerate (non-generic) maximum.
pub const GENERICITY_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HopfError {
    #[error(transparent)]
    Datum(#[from] InitialDataError),
    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error("solution is multivalued at x = {x}, t = {t}: characteristic feet {roots:?}")]
    Multivalued { x: f64, t: f64, roots: Vec<f64> },
    #[error("characteristic equation did not converge at x = {x}, t = {t}")]
    NoConvergence { x: f64, t: f64 },
    #[error("degenerate catastrophe: k = {k} (f_L''' vanishes at u_c)")]
    Genericity { k: f64 },
    #[error("-u0' has competing maxima at {first} and {second}")]
    TiedMaxima { first: f64, second: f64 },
    #[error("offsets must be nonzero with both signs and |offset| > 1e-8")]
    BadOffsets,
    #[error("exponent fit residual {residual} exceeds 0.05")]
    PoorFit { residual: f64, fit: PowerFit },
    #[error(transparent)]
    Fit(#[from] FitError),
}

/// Point of gradient catastrophe `(x_c, t_c)` with critical value `u_c`,
/// characteristic foot `xi_c` and `k = -f_L'''(u_c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatastrophePoint {
    pub x_c: f64,
    pub t_c: f64,
    pub u_c: f64,
    pub xi_c: f64,
    pub k: f64,
}

impl CatastrophePoint {
    pub fn translated(&self, shift: f64) -> Self {
        Self {
            x_c: self.x_c + shift,
            xi_c: self.xi_c + shift,
            ..*self
        }
    }
}

fn characteristic(datum: &InitialDatum, x: f64, t: f64, xi: f64) -> (f64, f64) {
    (xi + 6.0 * t * datum.value(xi) - x, 1.0 + 6.0 * t * datum.derivative(xi, 1))
}

fn solve_on(datum: &InitialDatum, x: f64, t: f64, a: f64, b: f64) -> Option<f64> {
    let scale = x.abs().max(1.0);
    newton_bisect(|xi| characteristic(datum, x, t, xi), a, b, 1e-16, 1e-14 * scale)
}

/// All feet `xi` with `x = xi + 6 t u0(xi)`, in increasing order.
pub fn characteristic_roots(datum: &InitialDatum, x: f64, t: f64) -> Result<Vec<f64>, HopfError> {
    if t < 0.0 {
        return Err(HopfError::NegativeTime(t));
    }
    let a = x;
    let b = x - 6.0 * t * datum.minimum_value();
    if t == 0.0 || a == b {
        return Ok(vec![x]);
    }
    if 6.0 * t * datum.steepest_descent().1 < 1.0 {
        return solve_on(datum, x, t, a, b)
            .map(|r| vec![r])
            .ok_or(HopfError::NoConvergence { x, t });
    }
    let n = ROOT_SCAN_POINTS;
    let mut roots = Vec::new();
    let mut prev_xi = a;
    let mut prev_g = characteristic(datum, x, t, a).0;
    if prev_g == 0.0 {
        roots.push(a);
    }
    for j in 1..=n {
        let xi = a + (b - a) * j as f64 / n as f64;
        let g = characteristic(datum, x, t, xi).0;
        if g == 0.0 {
            roots.push(xi);
        } else if prev_g != 0.0 && prev_g.signum() != g.signum() {
            roots.push(solve_on(datum, x, t, prev_xi, xi).ok_or(HopfError::NoConvergence { x, t })?);
        }
        prev_xi = xi;
        prev_g = g;
    }
    if roots.is_empty() {
        return Err(HopfError::NoConvergence { x, t });
    }
    Ok(roots)
}

/// `u(x, t) = u0(xi)` on the characteristic through `(x, t)`.
pub fn hopf_evaluate(datum: &InitialDatum, x: f64, t: f64) -> Result<f64, HopfError> {
    let roots = characteristic_roots(datum, x, t)?;
    if roots.len() > 1 {
        return Err(HopfError::Multivalued { x, t, roots });
    }
    Ok(datum.value(roots[0]))
}

/// Parallel evaluation on a grid; output order follows `xs`.
pub fn hopf_profile(datum: &InitialDatum, xs: &[f64], t: f64) -> Result<Vec<f64>, HopfError> {
    xs.par_iter().map(|&x| hopf_evaluate(datum, x, t)).collect()
}

/// `max_x |u_x(x, t)|` for `t < t_c`, from `u_x = u0'(xi)/(1 + 6 t u0'(xi))`.
pub fn max_gradient(datum: &InitialDatum, t: f64) -> f64 {
    let grad = |xi: f64| {
        let d = datum.derivative(xi, 1);
        -d / (1.0 + 6.0 * t * d)
    };
    let a = -datum.decay_scale();
    let b = datum.minimum_location();
    let n = 4096;
    let h = (b - a) / n as f64;
    let (x0, _) = (0..=n)
        .map(|j| a + h * j as f64)
        .map(|xi| (xi, grad(xi)))
        .fold((a, f64::NEG_INFINITY), |best, c| if c.1 > best.1 { c } else { best });
    let xi = golden_max(grad, (x0 - h).max(a), (x0 + h).min(b), 1e-13);
    grad(xi).max(grad(x0))
}

/// Locates the breaking point without the genericity requirement on `k`.
pub fn locate_breaking(datum: &InitialDatum) -> Result<CatastrophePoint, HopfError> {
    let (xi_c, slope) = datum.steepest_descent();
    // competing maxima on the decreasing branch
    let a = -datum.decay_scale();
    let b = datum.minimum_location();
    let n = 4096;
    let h = (b - a) / n as f64;
    let vals: Vec<f64> = (0..=n).map(|j| -datum.derivative(a + h * j as f64, 1)).collect();
    for j in 1..n {
        if vals[j] >= vals[j - 1] && vals[j] >= vals[j + 1] {
            let xj = a + h * j as f64;
            if (xj - xi_c).abs() > 4.0 * h && vals[j] >= slope * (1.0 - 1e-8) {
                return Err(HopfError::TiedMaxima { first: xi_c, second: xj });
            }
        }
    }
    let t_c = 1.0 / (6.0 * slope);
    let u_c = datum.value(xi_c);
    let f1 = datum.derivative(xi_c, 1);
    let f2 = datum.derivative(xi_c, 2);
    let f3 = datum.derivative(xi_c, 3);
    let k = -(3.0 * f2 * f2 - f1 * f3) / f1.powi(5);
    Ok(CatastrophePoint {
        x_c: 6.0 * t_c * u_c + xi_c,
        t_c,
        u_c,
        xi_c,
        k,
    })
}

/// The gradient catastrophe of the Hopf solution; rejects non-generic data.
pub fn find_catastrophe(datum: &InitialDatum) -> Result<CatastrophePoint, HopfError> {
    let cp = locate_breaking(datum)?;
    if !(cp.k > GENERICITY_THRESHOLD) {
        return Err(HopfError::Genericity { k: cp.k });
    }
    Ok(cp)
}

/// Fits the exponent of `|u(x_c + d, t_c) - u_c|` against `|d|`.
pub fn local_exponent(datum: &InitialDatum, cp: &CatastrophePoint, offsets: &[f64]) -> Result<PowerFit, HopfError> {
    let has_pos = offsets.iter().any(|&d| d > 0.0);
    let has_neg = offsets.iter().any(|&d| d < 0.0);
    if !has_pos || !has_neg || offsets.iter().any(|d| d.abs() <= 1e-8) {
        return Err(HopfError::BadOffsets);
    }
    let mut xs = Vec::with_capacity(offsets.len());
    let mut ys = Vec::with_capacity(offsets.len());
    for &d in offsets {
        let roots = characteristic_roots(datum, cp.x_c + d, cp.t_c)?;
        // at t_c the fold has not opened yet: take the foot nearest xi_c
        let xi = roots
            .iter()
            .copied()
            .min_by(|a, b| (a - cp.xi_c).abs().total_cmp(&(b - cp.xi_c).abs()))
            .ok_or(HopfError::NoConvergence { x: cp.x_c + d, t: cp.t_c })?;
        xs.push(d.abs());
        ys.push((datum.value(xi) - cp.u_c).abs());
    }
    let fit = fit_power_law(&xs, &ys)?;
    if fit.max_residual > 0.05 {
        return Err(HopfError::PoorFit {
            residual: fit.max_residual,
            fit,
        });
    }
    Ok(fit)
}

/// `(F, dF/dlambda, d^2F/dlambda^2)` for `F(lambda; x, t) = -x + 6 lambda t + f_L(lambda)`.
pub fn critical_residual(datum: &InitialDatum, x: f64, t: f64, lambda: f64) -> Result<[f64; 3], HopfError> {
    let [fl, fl1, fl2, _] = datum.fl_jet(lambda)?;
    Ok([-x + 6.0 * lambda * t + fl, 6.0 * t + fl1, fl2])
}
