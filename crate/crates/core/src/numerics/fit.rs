//! Least-squares power-law fits in log-log coordinates.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerFit {
    /// Fitted exponent `p` in `y ≈ C x^p`.
    pub slope: f64,
    /// `ln C`.
    pub intercept: f64,
    pub r_squared: f64,
    /// Largest absolute residual in log space.
    pub max_residual: f64,
}

impl PowerFit {
    pub fn prefactor(&self) -> f64 {
        self.intercept.exp()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FitError {
    #[error("need at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("non-positive or non-finite sample ({x}, {y})")]
    BadSample { x: f64, y: f64 },
    #[error("abscissae are all equal")]
    Degenerate,
}

/// Fits `ln y = intercept + slope ln x` by ordinary least squares.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<PowerFit, FitError> {
    assert_eq!(xs.len(), ys.len());
    if xs.len() < 2 {
        return Err(FitError::TooFewPoints(xs.len()));
    }
    let mut lx = Vec::with_capacity(xs.len());
    let mut ly = Vec::with_capacity(xs.len());
    for (&x, &y) in xs.iter().zip(ys) {
        if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
            return Err(FitError::BadSample { x, y });
        }
        lx.push(x.ln());
        ly.push(y.ln());
    }
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = ly.iter().map(|b| (b - my) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(FitError::Degenerate);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| (b - intercept - slope * a).abs())
        .fold(0.0, f64::max);
    let ss_res: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(PowerFit {
        slope,
        intercept,
        r_squared,
        max_residual,
    })
}
