//! Admissible initial data: negative single-hump profiles with rapid decay,
//! plus the inverse `f_L` of the decreasing branch and its derivatives.
//!
//! Three profile kinds are supported. The `sech2` family has closed-form
//! derivatives (computed as polynomials in `tanh x`), tabulated data is
//! interpolated by a natural cubic spline, and user closures get derivatives
//! from 8th-order central differences with step `1e-3 * decay_scale`.

use crate::numerics::fd::uniform_weights;
use crate::numerics::roots::{golden_max, newton_bisect};
use crate::numerics::spline::{CubicSpline, SplineError};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// Magnitude below which the profile counts as decayed.
pub const DECAY_THRESHOLD: f64 = 1e-12;
/// Number of entries in the monotone table seeding branch inversion.
pub const INVERSION_TABLE_SIZE: usize = 4096;
const VALIDATION_SAMPLES: usize = 8192;
/// Highest derivative order available from every profile.
pub const MAX_DERIVATIVE: usize = 5;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InitialDataError {
    #[error("amplitude must be positive, got {0}")]
    NonPositiveAmplitude(f64),
    #[error("profile is positive at x = {x} (u = {u})")]
    NotNegative { x: f64, u: f64 },
    #[error("profile is not single-humped near x = {x}")]
    NotSingleHump { x: f64 },
    #[error("profile does not decay below {DECAY_THRESHOLD:e}")]
    NoDecay,
    #[error("u = {u} outside the branch domain ({lo}, {hi})")]
    Domain { u: f64, lo: f64, hi: f64 },
    #[error("inverse branch is singular at u = {u} (u0' vanishes)")]
    Singular { u: f64 },
    #[error("derivative order {0} not supported")]
    Order(usize),
    #[error("inversion failed to converge at u = {u}")]
    Inversion { u: f64 },
    #[error(transparent)]
    Spline(#[from] SplineError),
    #[error("cannot read table {path}: {reason}")]
    Table { path: PathBuf, reason: String },
}

/// Config-level description of a datum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DatumSpec {
    Sech2 { amplitude: f64 },
    Table { samples: PathBuf },
}

impl DatumSpec {
    /// Parses the `sech2:A` / `table:path` shorthand.
    pub fn parse_shorthand(s: &str) -> Option<Self> {
        let (kind, arg) = s.split_once(':')?;
        match kind {
            "sech2" => arg.parse().ok().map(|amplitude| DatumSpec::Sech2 { amplitude }),
            "table" if !arg.is_empty() => Some(DatumSpec::Table { samples: arg.into() }),
            _ => None,
        }
    }

    /// Builds the datum; relative table paths are resolved against `base`.
    pub fn build(&self, base: Option<&Path>) -> Result<InitialDatum, InitialDataError> {
        match self {
            DatumSpec::Sech2 { amplitude } => InitialDatum::sech2(*amplitude),
            DatumSpec::Table { samples } => {
                let path = match base {
                    Some(b) if samples.is_relative() => b.join(samples),
                    _ => samples.clone(),
                };
                InitialDatum::from_table_file(&path)
            }
        }
    }
}

impl fmt::Display for DatumSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatumSpec::Sech2 { amplitude } => write!(f, "sech2:{amplitude}"),
            DatumSpec::Table { samples } => write!(f, "table:{}", samples.display()),
        }
    }
}

type DerivFn = Arc<dyn Fn(f64, usize) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Profile {
    /// `-A sech^2 x`; `u0^{(j)} = sech^2 x * Q_j(tanh x)` with `polys[j] = Q_j`.
    Sech2 { polys: Vec<Vec<f64>> },
    Table(CubicSpline),
    /// `analytic` closures return every derivative order themselves.
    Custom { f: DerivFn, analytic: bool },
}

fn poly_eval(coeffs: &[f64], s: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c)
}

/// `d/dx [sech^2 x Q(tanh x)] = sech^2 x [Q'(s)(1 - s^2) - 2 s Q(s)]`.
fn sech2_derivative(q: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; q.len() + 1];
    for (k, &c) in q.iter().enumerate() {
        if k > 0 {
            let d = k as f64 * c;
            out[k - 1] += d;
            out[k + 1] -= d;
        }
        out[k + 1] -= 2.0 * c;
    }
    out
}

fn sech_squared(x: f64) -> f64 {
    let c = x.cosh();
    1.0 / (c * c)
}

/// An admissible initial datum with cached geometry.
#[derive(Clone)]
pub struct InitialDatum {
    label: String,
    profile: Profile,
    x_min: f64,
    u_min: f64,
    decay_scale: f64,
    fd_step: f64,
    /// Point of steepest descent on the decreasing branch and `-u0'` there.
    steepest: (f64, f64),
    /// `(xi, u0(xi))`, xi increasing from the left decay point to `x_min`.
    table: Vec<(f64, f64)>,
}

impl fmt::Debug for InitialDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InitialDatum")
            .field("label", &self.label)
            .field("x_min", &self.x_min)
            .field("u_min", &self.u_min)
            .field("decay_scale", &self.decay_scale)
            .finish()
    }
}

impl InitialDatum {
    /// `u0(x) = -amplitude * sech^2(x)`.
    pub fn sech2(amplitude: f64) -> Result<Self, InitialDataError> {
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(InitialDataError::NonPositiveAmplitude(amplitude));
        }
        let mut polys = vec![vec![-amplitude]];
        for j in 1..=MAX_DERIVATIVE {
            let next = sech2_derivative(&polys[j - 1]);
            polys.push(next);
        }
        // A sech^2 x = threshold
        let decay = (1.0 / (DECAY_THRESHOLD / amplitude).sqrt()).acosh();
        Self::build(format!("sech2:{amplitude}"), Profile::Sech2 { polys }, Some(decay), 1.0)
    }

    /// Tabulated samples `(x, u)`; the profile is taken as zero outside the
    /// table range, so the end samples must already be decayed.
    pub fn from_table(label: impl Into<String>, xs: Vec<f64>, us: Vec<f64>) -> Result<Self, InitialDataError> {
        let spline = CubicSpline::natural(xs, us)?;
        let (a, b) = spline.domain();
        let (_, ys) = spline.knots();
        let scale = ys.iter().fold(0.0f64, |m, y| m.max(y.abs()));
        for &end in &[ys[0], ys[ys.len() - 1]] {
            if end.abs() > 1e-8 * scale.max(1.0) {
                return Err(InitialDataError::NoDecay);
            }
        }
        Self::build(label.into(), Profile::Table(spline), None, 0.5 * (b - a).abs().max(1e-3))
    }

    /// Reads a two-column CSV table `x,u` (an optional header row is skipped).
    pub fn from_table_file(path: &Path) -> Result<Self, InitialDataError> {
        let table_err = |reason: String| InitialDataError::Table {
            path: path.to_path_buf(),
            reason,
        };
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_path(path)
            .map_err(|e| table_err(e.to_string()))?;
        let mut xs = Vec::new();
        let mut us = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| table_err(e.to_string()))?;
            if rec.len() < 2 {
                return Err(table_err(format!("row {} has fewer than two columns", i + 1)));
            }
            match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
                (Ok(x), Ok(u)) => {
                    xs.push(x);
                    us.push(u);
                }
                _ if i == 0 => continue,
                _ => return Err(table_err(format!("row {} is not numeric", i + 1))),
            }
        }
        Self::from_table(format!("table:{}", path.display()), xs, us)
    }

    /// A profile given by a closure; derivatives by central differences.
    /// `window` is a rough half-width containing the hump.
    pub fn from_fn<F>(label: impl Into<String>, f: F, window: f64) -> Result<Self, InitialDataError>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let g: DerivFn = Arc::new(move |x, _| f(x));
        Self::build(label.into(), Profile::Custom { f: g, analytic: false }, None, window)
    }

    /// A profile whose closure returns `u0^{(order)}(x)` for `order <= 5`.
    pub fn from_fn_with_derivatives<F>(label: impl Into<String>, f: F, window: f64) -> Result<Self, InitialDataError>
    where
        F: Fn(f64, usize) -> f64 + Send + Sync + 'static,
    {
        let g: DerivFn = Arc::new(f);
        Self::build(label.into(), Profile::Custom { f: g, analytic: true }, None, window)
    }

    fn build(label: String, profile: Profile, decay: Option<f64>, window: f64) -> Result<Self, InitialDataError> {
        let mut d = InitialDatum {
            label,
            profile,
            x_min: 0.0,
            u_min: 0.0,
            decay_scale: decay.unwrap_or(window),
            fd_step: f64::NAN,
            steepest: (0.0, 0.0),
            table: Vec::new(),
        };
        if decay.is_none() {
            d.decay_scale = d.find_decay_scale(window)?;
        }
        d.fd_step = 1e-3 * d.decay_scale;
        d.locate_minimum()?;
        d.validate()?;
        d.locate_steepest();
        d.fill_table();
        Ok(d)
    }

    fn find_decay_scale(&self, window: f64) -> Result<f64, InitialDataError> {
        let mut w = window.abs().max(1e-3);
        for _ in 0..60 {
            let far = (1..=64).all(|j| {
                let x = w * (1.0 + j as f64 / 64.0);
                self.value(x).abs() < DECAY_THRESHOLD && self.value(-x).abs() < DECAY_THRESHOLD
            });
            if far {
                // Largest sampled |x| in [-w, w] where the profile is still visible.
                let n = VALIDATION_SAMPLES;
                let mut outer: f64 = 0.0;
                for j in 0..=n {
                    let x = -w + 2.0 * w * j as f64 / n as f64;
                    if self.value(x).abs() >= DECAY_THRESHOLD {
                        outer = outer.max(x.abs());
                    }
                }
                let step = 2.0 * w / n as f64;
                return Ok((outer + step).min(w).max(step));
            }
            w *= 2.0;
        }
        Err(InitialDataError::NoDecay)
    }

    fn sample_grid(&self) -> impl Iterator<Item = f64> + '_ {
        let d = self.decay_scale;
        (0..=VALIDATION_SAMPLES).map(move |j| -d + 2.0 * d * j as f64 / VALIDATION_SAMPLES as f64)
    }

    fn locate_minimum(&mut self) -> Result<(), InitialDataError> {
        let d = self.decay_scale;
        let step = 2.0 * d / VALIDATION_SAMPLES as f64;
        let (x0, _) = self
            .sample_grid()
            .map(|x| (x, self.value(x)))
            .fold((0.0, f64::INFINITY), |best, (x, u)| if u < best.1 { (x, u) } else { best });
        let mut x = golden_max(|x| -self.value(x), x0 - step, x0 + step, 1e-9 * d.max(1.0));
        // polish on u0' = 0
        if let Some(r) = newton_bisect(
            |s| (self.derivative(s, 1), self.derivative(s, 2)),
            x - 1e-6 * d.max(1.0),
            x + 1e-6 * d.max(1.0),
            1e-15,
            0.0,
        ) {
            x = r;
        }
        self.x_min = x;
        self.u_min = self.value(x);
        if self.u_min >= -DECAY_THRESHOLD {
            return Err(InitialDataError::NotNegative { x, u: self.u_min });
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), InitialDataError> {
        let mut prev: Option<(f64, f64)> = None;
        for x in self.sample_grid() {
            let u = self.value(x);
            if u > DECAY_THRESHOLD {
                return Err(InitialDataError::NotNegative { x, u });
            }
            if let Some((xp, up)) = prev {
                if up.abs() > DECAY_THRESHOLD && u.abs() > DECAY_THRESHOLD {
                    let ok = if x <= self.x_min { u < up } else if xp >= self.x_min { u > up } else { true };
                    if !ok {
                        return Err(InitialDataError::NotSingleHump { x });
                    }
                }
            }
            prev = Some((x, u));
        }
        Ok(())
    }

    fn locate_steepest(&mut self) {
        let a = -self.decay_scale;
        let b = self.x_min;
        let n = VALIDATION_SAMPLES / 2;
        let step = (b - a) / n as f64;
        let (x0, _) = (0..=n)
            .map(|j| a + step * j as f64)
            .map(|x| (x, -self.derivative(x, 1)))
            .fold((a, f64::NEG_INFINITY), |best, c| if c.1 > best.1 { c } else { best });
        let lo = (x0 - step).max(a);
        let hi = (x0 + step).min(b);
        let mut x = golden_max(|x| -self.derivative(x, 1), lo, hi, 1e-10 * self.decay_scale.max(1.0));
        // polish on u0'' = 0
        if let Some(r) = newton_bisect(|s| (self.derivative(s, 2), self.derivative(s, 3)), lo, hi, 1e-16, 0.0) {
            x = r;
        }
        self.steepest = (x, -self.derivative(x, 1));
    }

    fn fill_table(&mut self) {
        let a = -self.decay_scale;
        let b = self.x_min;
        let n = INVERSION_TABLE_SIZE;
        self.table = (0..n)
            .map(|j| {
                let x = a + (b - a) * j as f64 / (n - 1) as f64;
                (x, self.value(x))
            })
            .collect();
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn minimum_location(&self) -> f64 {
        self.x_min
    }

    pub fn minimum_value(&self) -> f64 {
        self.u_min
    }

    pub fn decay_scale(&self) -> f64 {
        self.decay_scale
    }

    /// Approximate location and value of `max(-u0')` on the decreasing branch.
    pub fn steepest_descent(&self) -> (f64, f64) {
        self.steepest
    }

    pub fn value(&self, x: f64) -> f64 {
        match &self.profile {
            Profile::Sech2 { polys } => polys[0][0] * sech_squared(x),
            Profile::Table(s) => {
                let (a, b) = s.domain();
                if x < a || x > b {
                    0.0
                } else {
                    s.eval(x, 0)
                }
            }
            Profile::Custom { f, .. } => f(x, 0),
        }
    }

    /// `u0^{(order)}(x)` for `order <= 5`. Spline derivatives above the third
    /// vanish identically.
    pub fn derivative(&self, x: f64, order: usize) -> f64 {
        assert!(order <= MAX_DERIVATIVE, "derivative order {order} > {MAX_DERIVATIVE}");
        if order == 0 {
            return self.value(x);
        }
        match &self.profile {
            Profile::Sech2 { polys } => sech_squared(x) * poly_eval(&polys[order], x.tanh()),
            Profile::Table(s) => {
                let (a, b) = s.domain();
                if x < a || x > b {
                    0.0
                } else {
                    s.eval(x, order)
                }
            }
            Profile::Custom { f, analytic: true } => f(x, order),
            Profile::Custom { f, analytic: false } => {
                let h = if self.fd_step.is_nan() { 1e-3 } else { self.fd_step };
                let p = (order as i64 + 1) / 2 + 3;
                let offsets: Vec<i64> = (-p..=p).collect();
                let w = uniform_weights(&offsets, order, h);
                offsets.iter().zip(&w).map(|(&o, wj)| wj * f(x + o as f64 * h, 0)).sum()
            }
        }
    }

    fn check_domain(&self, u: f64) -> Result<(), InitialDataError> {
        if u > self.u_min && u < 0.0 {
            Ok(())
        } else {
            Err(InitialDataError::Domain {
                u,
                lo: self.u_min,
                hi: 0.0,
            })
        }
    }

    /// `f_L(u)`: the point `xi <= x_min` with `u0(xi) = u`.
    pub fn invert_decreasing(&self, u: f64) -> Result<f64, InitialDataError> {
        self.check_domain(u)?;
        let t = &self.table;
        // u0 decreases along the table; first index with u0 <= u
        let j = t.partition_point(|&(_, v)| v > u);
        let (mut lo, hi) = if j == 0 {
            // beyond the table: walk left until the bracket closes
            let mut lo = t[0].0;
            let mut width = self.decay_scale.max(1.0);
            while self.value(lo) <= u {
                lo -= width;
                width *= 2.0;
                if !lo.is_finite() {
                    return Err(InitialDataError::Inversion { u });
                }
            }
            (lo, t[0].0)
        } else if j >= t.len() {
            (t[t.len() - 1].0, self.x_min)
        } else {
            (t[j - 1].0, t[j].0)
        };
        if lo > hi {
            lo = hi;
        }
        let root = newton_bisect(
            |x| (self.value(x) - u, self.derivative(x, 1)),
            lo,
            hi,
            1e-16,
            1e-14 * u.abs().max(1e-300),
        )
        .ok_or(InitialDataError::Inversion { u })?;
        Ok(root.min(self.x_min))
    }

    /// `f_L^{(order)}(u)` for `order` in 1..=3 via inverse-function identities.
    pub fn fl_derivative(&self, u: f64, order: usize) -> Result<f64, InitialDataError> {
        if !(1..=3).contains(&order) {
            return Err(InitialDataError::Order(order));
        }
        let xi = self.invert_decreasing(u)?;
        let f1 = self.derivative(xi, 1);
        if f1.abs() < 1e-14 {
            return Err(InitialDataError::Singular { u });
        }
        let f2 = self.derivative(xi, 2);
        Ok(match order {
            1 => 1.0 / f1,
            2 => -f2 / f1.powi(3),
            _ => {
                let f3 = self.derivative(xi, 3);
                (3.0 * f2 * f2 - f1 * f3) / f1.powi(5)
            }
        })
    }

    /// `(f_L, f_L', f_L'', f_L''')` at `u` with a single inversion.
    pub fn fl_jet(&self, u: f64) -> Result<[f64; 4], InitialDataError> {
        let xi = self.invert_decreasing(u)?;
        let f1 = self.derivative(xi, 1);
        if f1.abs() < 1e-14 {
            return Err(InitialDataError::Singular { u });
        }
        let f2 = self.derivative(xi, 2);
        let f3 = self.derivative(xi, 3);
        Ok([
            xi,
            1.0 / f1,
            -f2 / f1.powi(3),
            (3.0 * f2 * f2 - f1 * f3) / f1.powi(5),
        ])
    }

    pub fn sample(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.value(x)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sech2_derivative_recursion() {
        // d/dx (-sech^2) = 2 sech^2 tanh
        assert_eq!(sech2_derivative(&[-1.0]), vec![0.0, 2.0]);
        // d/dx (2 sech^2 tanh) = sech^2 (2 - 6 tanh^2)
        assert_eq!(sech2_derivative(&[0.0, 2.0]), vec![2.0, 0.0, -6.0]);
    }

    #[test]
    fn shorthand_round_trip() {
        let s = DatumSpec::parse_shorthand("sech2:1.5").unwrap();
        assert_eq!(s, DatumSpec::Sech2 { amplitude: 1.5 });
        assert_eq!(DatumSpec::parse_shorthand(&s.to_string()).unwrap(), s);
        assert!(DatumSpec::parse_shorthand("gauss:1").is_none());
    }
}
