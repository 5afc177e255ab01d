//! Double-scaling prediction near the point of gradient catastrophe and its
//! comparison with small-ε KdV runs.
//!
//! Near `(x_c, t_c)` the KdV solution is approximated by
//! `u_c + c1 ε^{2/7} U(X, T)` with
//! `X = c2 (x - x_c - c3 (t - t_c)) / ε^{6/7}` and `T = c4 (t - t_c) / ε^{4/7}`,
//! where `U` is the real pole-free P_I² solution. With these constants the
//! substitution turns `u_t + 6 u u_x + ε² u_xxx = 0` into
//! `U_T + U U_X + U_XXX / 12 = 0` exactly.

use crate::hopf::{hopf_profile, CatastrophePoint, HopfError, GENERICITY_THRESHOLD};
use crate::initial_data::{InitialDataError, InitialDatum};
use crate::numerics::fit::{fit_power_law, PowerFit};
use crate::numerics::interp::lagrange_uniform;
use crate::painleve::{solve_p12_family, P12Options, P12Solution, PainleveError};
use crate::spectral::{
    evolve, Equation, EvolutionSpec, EvolveOptions, FieldState, PeriodicGrid, Spectral, SpectralError,
};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum UniversalityError {
    #[error("degenerate catastrophe: k = {0} must be positive")]
    Genericity(f64),
    #[error("invalid input: {0}")]
    Domain(String),
    #[error("insufficient coverage: {0}")]
    Coverage(String),
    #[error(transparent)]
    Painleve(#[from] PainleveError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Hopf(#[from] HopfError),
    #[error(transparent)]
    Datum(#[from] InitialDataError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub k: f64,
    pub cp: CatastrophePoint,
}

pub fn compute_constants(cp: &CatastrophePoint) -> Result<ScalingConstants, UniversalityError> {
    if !(cp.k > 0.0 && cp.k.is_finite()) || cp.k < GENERICITY_THRESHOLD {
        return Err(UniversalityError::Genericity(cp.k));
    }
    let q = 8.0 * cp.k;
    Ok(ScalingConstants {
        c1: 2.0 / q.powf(2.0 / 7.0),
        c2: 1.0 / q.powf(1.0 / 7.0),
        c3: 6.0 * cp.u_c,
        c4: 12.0 / q.powf(3.0 / 7.0),
        k: cp.k,
        cp: *cp,
    })
}

/// `(X, T)` of the point `(x, t)` at dispersion `eps`.
pub fn double_scaling_coords(x: f64, t: f64, eps: f64, sc: &ScalingConstants) -> (f64, f64) {
    let dt = t - sc.cp.t_c;
    let big_x = sc.c2 * (x - sc.cp.x_c - sc.c3 * dt) / eps.powf(6.0 / 7.0);
    let big_t = sc.c4 * dt / eps.powf(4.0 / 7.0);
    (big_x, big_t)
}

/// Inverse of [`double_scaling_coords`].
pub fn physical_coords(big_x: f64, big_t: f64, eps: f64, sc: &ScalingConstants) -> (f64, f64) {
    let dt = big_t * eps.powf(4.0 / 7.0) / sc.c4;
    let x = sc.cp.x_c + sc.c3 * dt + big_x * eps.powf(6.0 / 7.0) / sc.c2;
    (x, sc.cp.t_c + dt)
}

/// `U(X, T)` on a uniform `T` grid, quintic in `X` and in `T`.
#[derive(Debug, Clone)]
pub struct PainleveTable {
    t_min: f64,
    t_step: f64,
    solutions: Vec<P12Solution>,
}

impl PainleveTable {
    /// Solves at `points` equally spaced `T` in `[-t_max, t_max]`.
    pub fn solve(t_max: f64, points: usize, opts: &P12Options) -> Result<Self, UniversalityError> {
        if !(t_max > 0.0 && t_max.is_finite()) || points < 6 {
            return Err(UniversalityError::Domain(format!(
                "table needs t_max > 0 and at least 6 points, got {t_max}, {points}"
            )));
        }
        let t_step = 2.0 * t_max / (points - 1) as f64;
        let ts: Vec<f64> = (0..points).map(|j| -t_max + t_step * j as f64).collect();
        let solutions = solve_p12_family(&ts, opts)?;
        Ok(Self {
            t_min: -t_max,
            t_step,
            solutions,
        })
    }

    pub fn t_range(&self) -> (f64, f64) {
        (self.t_min, self.t_min + self.t_step * (self.solutions.len() - 1) as f64)
    }

    pub fn x_max(&self) -> f64 {
        self.solutions[0].x_max
    }

    pub fn solutions(&self) -> &[P12Solution] {
        &self.solutions
    }

    pub fn evaluate(&self, big_x: f64, big_t: f64) -> Result<f64, UniversalityError> {
        let (lo, hi) = self.t_range();
        let slack = 1e-12 * (1.0 + hi.abs());
        if !(big_t >= lo - slack && big_t <= hi + slack) {
            return Err(UniversalityError::Domain(format!("T = {big_t} outside [{lo}, {hi}]")));
        }
        let values = self
            .solutions
            .iter()
            .map(|s| s.evaluate_u(big_x))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(lagrange_uniform(self.t_min, self.t_step, &values, big_t.clamp(lo, hi), 6))
    }
}

/// `u_c + c1 ε^{2/7} U(X, T)`.
pub fn predict(x: f64, t: f64, eps: f64, sc: &ScalingConstants, table: &PainleveTable) -> Result<f64, UniversalityError> {
    check_eps(eps)?;
    let (big_x, big_t) = double_scaling_coords(x, t, eps, sc);
    Ok(sc.cp.u_c + sc.c1 * eps.powf(2.0 / 7.0) * table.evaluate(big_x, big_t)?)
}

fn check_eps(eps: f64) -> Result<(), UniversalityError> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(UniversalityError::Domain(format!("ε must be positive, got {eps}")))
    }
}

/// Box `|X| <= x_half`, `|T| <= t_half` in scaled coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub x_half: f64,
    pub t_half: f64,
}

impl Default for Window {
    fn default() -> Self {
        Self { x_half: 1.0, t_half: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub eps: f64,
    pub window: Window,
    pub sup: f64,
    pub rms: f64,
    /// Grid points compared, summed over snapshots.
    pub points: usize,
    /// `(t, T, sup error)` for every snapshot inside the window.
    pub per_time: Vec<[f64; 3]>,
}

/// Compares the snapshots of a KdV run with the prediction over the grid
/// points whose image lies in `window`.
pub fn compare_run(
    states: &[FieldState],
    sc: &ScalingConstants,
    table: &PainleveTable,
    window: Window,
    eps: f64,
) -> Result<ErrorReport, UniversalityError> {
    check_eps(eps)?;
    let (lo, hi) = table.t_range();
    if window.t_half > hi.min(-lo) + 1e-12 || window.x_half > table.x_max() {
        return Err(UniversalityError::Domain(format!(
            "window {window:?} exceeds the table range T in [{lo}, {hi}], |X| <= {}",
            table.x_max()
        )));
    }
    let mut sup: f64 = 0.0;
    let mut sq = 0.0;
    let mut points = 0;
    let mut per_time = Vec::new();
    for s in states {
        let (_, big_t) = double_scaling_coords(sc.cp.x_c, s.time, eps, sc);
        if big_t.abs() > window.t_half * (1.0 + 1e-9) {
            continue;
        }
        let u = s
            .real_samples()
            .ok_or_else(|| UniversalityError::Domain("comparison needs a real field".into()))?;
        // the window's preimage must sit inside the periodic cell
        for bx in [-window.x_half, window.x_half] {
            let (x, _) = physical_coords(bx, big_t, eps, sc);
            if x.abs() >= s.grid.half_width {
                return Err(UniversalityError::Coverage(format!("X = {bx} maps to x = {x} outside the grid")));
            }
        }
        let before = points;
        let mut local: f64 = 0.0;
        for (j, &v) in u.iter().enumerate() {
            let x = s.grid.node(j);
            let (big_x, _) = double_scaling_coords(x, s.time, eps, sc);
            if big_x.abs() <= window.x_half {
                let e = (v - predict(x, s.time, eps, sc, table)?).abs();
                local = local.max(e);
                sq += e * e;
                points += 1;
            }
        }
        if points > before {
            sup = sup.max(local);
            per_time.push([s.time, big_t, local]);
        }
    }
    if points == 0 {
        return Err(UniversalityError::Coverage(format!(
            "no grid point of the {} states maps into {window:?}",
            states.len()
        )));
    }
    Ok(ErrorReport {
        eps,
        window,
        sup,
        rms: (sq / points as f64).sqrt(),
        points,
        per_time,
    })
}

/// Trigonometric interpolant of a real periodic state at `x`.
pub fn spectral_value(state: &FieldState, x: f64) -> Result<f64, UniversalityError> {
    let u = state
        .real_samples()
        .ok_or_else(|| UniversalityError::Domain("interpolation needs a real field".into()))?;
    let g = state.grid;
    let c = Spectral::new(g).forward_real(u);
    let s = x + g.half_width;
    let mut acc = c[0].re;
    for j in 1..g.n / 2 {
        let k = std::f64::consts::PI * j as f64 / g.half_width;
        acc += 2.0 * (c[j] * Complex64::from_polar(1.0, k * s)).re;
    }
    // Nyquist mode, split evenly between ±n/2
    acc += c[g.n / 2].re * (std::f64::consts::PI * (g.n / 2) as f64 * s / g.half_width).cos();
    Ok(acc / g.n as f64)
}

/// One small-ε run summarised for rate fitting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateSample {
    pub eps: f64,
    /// `|u(x_c, t_c, ε) - u_c|`.
    pub amplitude: f64,
    /// Sup of `|u - prediction|` over the window.
    pub correction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub amplitude_exponent: Option<f64>,
    pub correction_exponent: Option<f64>,
    pub amplitude_fit: Option<PowerFit>,
    pub correction_fit: Option<PowerFit>,
    /// Monotonicity and fit problems; empty when the data are clean.
    pub diagnostics: Vec<String>,
}

pub const AMPLITUDE_TARGET: f64 = 2.0 / 7.0;
pub const CORRECTION_TARGET: f64 = 4.0 / 7.0;

/// Log-log least squares of amplitude and correction against ε.
/// Non-monotone data yield diagnostics, not errors.
pub fn fit_rates(samples: &[RateSample]) -> Result<RateFit, UniversalityError> {
    if samples.len() < 3 {
        return Err(UniversalityError::Domain(format!("need at least 3 ε values, got {}", samples.len())));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.eps.total_cmp(&b.eps));
    let (lo, hi) = (sorted[0].eps, sorted[sorted.len() - 1].eps);
    if !(lo > 0.0 && hi >= 2.0 * lo) {
        return Err(UniversalityError::Domain(format!("ε range [{lo}, {hi}] spans less than a factor 2")));
    }
    let eps: Vec<f64> = sorted.iter().map(|s| s.eps).collect();
    let mut diagnostics = Vec::new();
    let mut fit = |name: &str, ys: Vec<f64>| -> Option<PowerFit> {
        if ys.windows(2).any(|w| w[1] <= w[0]) {
            diagnostics.push(format!("{name} is not increasing in ε: {ys:?}"));
        }
        match fit_power_law(&eps, &ys) {
            Ok(f) => Some(f),
            Err(e) => {
                diagnostics.push(format!("{name} fit failed: {e}"));
                None
            }
        }
    };
    let amplitude_fit = fit("amplitude", sorted.iter().map(|s| s.amplitude).collect());
    let correction_fit = fit("correction", sorted.iter().map(|s| s.correction).collect());
    Ok(RateFit {
        amplitude_exponent: amplitude_fit.map(|f| f.slope),
        correction_exponent: correction_fit.map(|f| f.slope),
        amplitude_fit,
        correction_fit,
        diagnostics,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOptions {
    pub eps: Vec<f64>,
    /// Half width of the periodic cell.
    pub half_width: f64,
    pub n: usize,
    pub dt: f64,
    pub window: Window,
    /// `T` nodes in the P_I² table spanning `[-window.t_half, window.t_half]`.
    pub table_points: usize,
    pub p12: P12Options,
    /// The Hopf control is taken at `t_c - control_offset`.
    pub control_offset: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            eps: vec![0.1, 0.07, 0.05],
            half_width: 20.0,
            n: 1 << 13,
            dt: 5e-6,
            window: Window::default(),
            table_points: 21,
            p12: P12Options {
                x_max: 100.0,
                n: 4000,
                tol: 1e-10,
            },
            control_offset: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRun {
    pub eps: f64,
    /// `u(x_c, t_c, ε)`.
    pub u_critical: f64,
    pub predicted_critical: f64,
    pub report: ErrorReport,
    /// Sup over the grid of `|u - u_Hopf|` at the control time.
    pub control: f64,
    pub steps: usize,
    pub warnings: Vec<String>,
    /// `(x, u, prediction)` over the window at `t = t_c`.
    pub overlay: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub constants: ScalingConstants,
    pub runs: Vec<SweepRun>,
    pub rates: RateFit,
    pub control_fit: Option<PowerFit>,
}

/// Runs KdV for every ε (in parallel) and fits the rates. Runs are reported
/// in the order of `opts.eps`.
pub fn eps_sweep(
    datum: &InitialDatum,
    cp: &CatastrophePoint,
    opts: &SweepOptions,
) -> Result<SweepReport, UniversalityError> {
    let sc = compute_constants(cp)?;
    if opts.eps.is_empty() {
        return Err(UniversalityError::Domain("empty ε list".into()));
    }
    for &e in &opts.eps {
        check_eps(e)?;
    }
    if !(opts.control_offset > 0.0 && opts.control_offset < cp.t_c) {
        return Err(UniversalityError::Domain(format!(
            "control offset {} must lie in (0, t_c)",
            opts.control_offset
        )));
    }
    let table = PainleveTable::solve(opts.window.t_half, opts.table_points, &opts.p12)?;
    let runs = opts
        .eps
        .par_iter()
        .map(|&eps| single_run(datum, &sc, &table, opts, eps))
        .collect::<Result<Vec<_>, _>>()?;
    let samples: Vec<RateSample> = runs
        .iter()
        .map(|r| RateSample {
            eps: r.eps,
            amplitude: (r.u_critical - cp.u_c).abs(),
            correction: r.report.sup,
        })
        .collect();
    let rates = if samples.len() >= 3 {
        fit_rates(&samples)?
    } else {
        RateFit {
            amplitude_exponent: None,
            correction_exponent: None,
            amplitude_fit: None,
            correction_fit: None,
            diagnostics: vec![format!("{} ε values; rates need at least 3", samples.len())],
        }
    };
    let (eps, control): (Vec<f64>, Vec<f64>) = runs.iter().map(|r| (r.eps, r.control)).unzip();
    let control_fit = if runs.len() >= 2 { fit_power_law(&eps, &control).ok() } else { None };
    Ok(SweepReport {
        constants: sc,
        runs,
        rates,
        control_fit,
    })
}

fn single_run(
    datum: &InitialDatum,
    sc: &ScalingConstants,
    table: &PainleveTable,
    opts: &SweepOptions,
    eps: f64,
) -> Result<SweepRun, UniversalityError> {
    let cp = &sc.cp;
    let grid = PeriodicGrid::new(opts.half_width, opts.n)?;
    let state = FieldState::from_fn(grid, eps, |x| datum.value(x))?;
    let spec = EvolutionSpec::builtin(Equation::Kdv);
    let (lo, hi) = table.t_range();
    let big_ts: Vec<f64> = (0..table.solutions().len())
        .map(|j| lo + (hi - lo) * j as f64 / (table.solutions().len() - 1) as f64)
        .filter(|t| t.abs() <= opts.window.t_half + 1e-12)
        .collect();
    let t_control = cp.t_c - opts.control_offset;
    let mut snapshot_times: Vec<f64> = big_ts.iter().map(|&bt| physical_coords(0.0, bt, eps, sc).1).collect();
    snapshot_times.push(cp.t_c);
    snapshot_times.push(t_control);
    let t_end = snapshot_times.iter().copied().fold(f64::MIN, f64::max);
    let evolve_opts = EvolveOptions {
        dt: opts.dt,
        snapshot_times: snapshot_times.clone(),
        diagnostics_every: 1000,
    };
    let traj = evolve(&state, &spec, t_end, &evolve_opts, &mut []).map_err(|e| e.source)?;

    let at = |t: f64| -> Result<&FieldState, UniversalityError> {
        traj.snapshots
            .iter()
            .find(|s| s.time == t)
            .ok_or_else(|| UniversalityError::Coverage(format!("no snapshot at t = {t}")))
    };
    let critical = at(cp.t_c)?;
    let u_critical = spectral_value(critical, cp.x_c)?;
    let predicted_critical = predict(cp.x_c, cp.t_c, eps, sc, table)?;
    let report = compare_run(&traj.snapshots, sc, table, opts.window, eps)?;

    let control_state = at(t_control)?;
    let xs = control_state.grid.nodes();
    let hopf = hopf_profile(datum, &xs, t_control)?;
    let u = control_state.real_samples().expect("KdV state is real");
    let control = u.iter().zip(&hopf).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let u_c = critical.real_samples().expect("KdV state is real");
    let mut overlay = Vec::new();
    for (j, &v) in u_c.iter().enumerate() {
        let x = critical.grid.node(j);
        let (big_x, _) = double_scaling_coords(x, cp.t_c, eps, sc);
        if big_x.abs() <= opts.window.x_half {
            overlay.push([x, v, predict(x, cp.t_c, eps, sc, table)?]);
        }
    }
    Ok(SweepRun {
        eps,
        u_critical,
        predicted_critical,
        report,
        control,
        steps: traj.steps,
        warnings: traj.warnings,
        overlay,
    })
}
