//! Fixed-step time marching with diagnostics, snapshots and observers.

use super::etdrk4::{etdrk4_step, Etdrk4Coefficients};
use super::grid::Spectral;
use super::nls::NlsStepper;
use super::spec::EvolutionSpec;
use super::state::{Field, FieldState};
use super::SpectralError;
use num_complex::Complex64;
use serde::Serialize;
use std::collections::HashMap;

/// Magnitude treated as overflow.
const OVERFLOW: f64 = 1e12;

/// Conserved quantities and shape indicators at one time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub time: f64,
    /// `∫u` (real) or `∫|ψ|²` (NLS).
    pub mass: f64,
    /// `∫u²` (real) or `Im ∫ψ* ψ_x` (NLS).
    pub momentum: f64,
    /// `∫(u³ - ε²u_x²/2)` for real fields.
    pub hamiltonian: Option<f64>,
    /// `max |∂_x u|` or `max |ψ_x|`.
    pub max_slope: f64,
    pub max_abs: f64,
    pub resolution: f64,
}

impl Diagnostics {
    pub fn of(state: &FieldState, sp: &Spectral) -> Self {
        match &state.samples {
            Field::Real(u) => {
                let c = sp.forward_real(u);
                let ux = sp.inverse_real(&sp.apply_derivative(&c, 1));
                let e2 = state.eps * state.eps;
                Self {
                    time: state.time,
                    mass: sp.integrate(u),
                    momentum: sp.integrate(&u.iter().map(|v| v * v).collect::<Vec<_>>()),
                    hamiltonian: Some(
                        sp.integrate(&u.iter().zip(&ux).map(|(v, d)| v * v * v - 0.5 * e2 * d * d).collect::<Vec<_>>()),
                    ),
                    max_slope: ux.iter().fold(0.0, |m, d| m.max(d.abs())),
                    max_abs: state.samples.max_abs(),
                    resolution: sp.tail_ratio(&c),
                }
            }
            Field::Complex(psi) => {
                let c = sp.forward_complex(psi);
                let px = sp.inverse_complex(&sp.apply_derivative(&c, 1));
                Self {
                    time: state.time,
                    mass: sp.integrate(&psi.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>()),
                    momentum: sp.integrate(&psi.iter().zip(&px).map(|(p, d)| (p.conj() * d).im).collect::<Vec<_>>()),
                    hamiltonian: None,
                    max_slope: px.iter().fold(0.0, |m, d| m.max(d.norm())),
                    max_abs: state.samples.max_abs(),
                    resolution: sp.tail_ratio(&c),
                }
            }
        }
    }
}

/// Callback invoked on the diagnostic schedule.
pub trait Observer {
    fn observe(&mut self, state: &FieldState, sp: &Spectral);
}

impl<F: FnMut(&FieldState, &Spectral)> Observer for F {
    fn observe(&mut self, state: &FieldState, sp: &Spectral) {
        self(state, sp)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolveOptions {
    pub dt: f64,
    /// Times at which full states are stored; steps are shortened to land on them.
    pub snapshot_times: Vec<f64>,
    /// Diagnostics and observers run every this many steps (plus start and end).
    pub diagnostics_every: usize,
}

impl EvolveOptions {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            snapshot_times: Vec::new(),
            diagnostics_every: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub label: String,
    pub final_state: FieldState,
    pub snapshots: Vec<FieldState>,
    pub diagnostics: Vec<Diagnostics>,
    pub steps: usize,
    /// Resolution warnings (top retained band above `1e-8`).
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{source}")]
pub struct EvolveError {
    pub source: SpectralError,
    pub partial: Box<Trajectory>,
}

enum Stepper {
    Etd(Etdrk4Coefficients),
    Nls(NlsStepper),
}

/// Internal representation: Fourier coefficients for real fields, samples for NLS.
enum Working {
    Real(Vec<Complex64>),
    Complex(Vec<Complex64>),
}

struct Marcher<'a> {
    spec: &'a EvolutionSpec,
    sp: Spectral,
    eps: f64,
    cache: HashMap<u64, Stepper>,
}

impl<'a> Marcher<'a> {
    fn new(spec: &'a EvolutionSpec, state: &FieldState) -> Result<Self, SpectralError> {
        match (&state.samples, spec.is_nls()) {
            (Field::Real(_), true) => return Err(SpectralError::FieldKind("NLS needs a complex field")),
            (Field::Complex(_), false) => return Err(SpectralError::FieldKind("real equation needs a real field")),
            _ => {}
        }
        Ok(Self {
            spec,
            sp: Spectral::new(state.grid),
            eps: state.eps,
            cache: HashMap::new(),
        })
    }

    fn load(&self, state: &FieldState) -> Working {
        match &state.samples {
            Field::Real(u) => Working::Real(self.sp.forward_real(u)),
            Field::Complex(p) => Working::Complex(p.clone()),
        }
    }

    fn store(&self, w: &Working, template: &FieldState, time: f64) -> FieldState {
        let samples = match w {
            Working::Real(v) => Field::Real(self.sp.inverse_real(v)),
            Working::Complex(p) => Field::Complex(p.clone()),
        };
        FieldState {
            grid: template.grid,
            samples,
            eps: self.eps,
            time,
        }
    }

    fn advance(&mut self, w: &mut Working, h: f64) -> Result<(), SpectralError> {
        let (spec, sp, eps) = (self.spec, &self.sp, self.eps);
        let stepper = self.cache.entry(h.to_bits()).or_insert_with(|| {
            if spec.is_nls() {
                Stepper::Nls(NlsStepper::new(spec, sp, eps, h))
            } else {
                Stepper::Etd(Etdrk4Coefficients::new(spec, sp, eps, h))
            }
        });
        match (stepper, w) {
            (Stepper::Etd(c), Working::Real(v)) => {
                let u = sp.inverse_real(v);
                let product = h * u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                if product > 1.0 {
                    return Err(SpectralError::StepTooLarge { dt: h, product });
                }
                etdrk4_step(v, spec, sp, c);
                if v.iter().any(|z| !(z.norm() < OVERFLOW * sp.n() as f64)) {
                    return Err(SpectralError::BlowUp { time: f64::NAN });
                }
            }
            (Stepper::Nls(s), Working::Complex(p)) => {
                s.step(p, sp);
                if p.iter().any(|z| !(z.norm() < OVERFLOW)) {
                    return Err(SpectralError::BlowUp { time: f64::NAN });
                }
            }
            _ => unreachable!("stepper matches field kind"),
        }
        Ok(())
    }
}

/// One step of size `dt`.
pub fn step(state: &FieldState, spec: &EvolutionSpec, dt: f64) -> Result<FieldState, SpectralError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(SpectralError::BadStep(dt));
    }
    let mut m = Marcher::new(spec, state)?;
    let mut w = m.load(state);
    m.advance(&mut w, dt).map_err(|e| match e {
        SpectralError::BlowUp { .. } => SpectralError::BlowUp { time: state.time },
        e => e,
    })?;
    Ok(m.store(&w, state, state.time + dt))
}

/// Marches from `state.time` to `t_end` with step `opts.dt`, shortening the
/// steps that would overshoot a snapshot time or `t_end`.
pub fn evolve(
    state: &FieldState,
    spec: &EvolutionSpec,
    t_end: f64,
    opts: &EvolveOptions,
    observers: &mut [&mut dyn Observer],
) -> Result<Trajectory, EvolveError> {
    let fail = |source, partial: Trajectory| EvolveError {
        source,
        partial: Box::new(partial),
    };
    let mut traj = Trajectory {
        label: spec.label().to_string(),
        final_state: state.clone(),
        snapshots: Vec::new(),
        diagnostics: Vec::new(),
        steps: 0,
        warnings: Vec::new(),
    };
    if !(opts.dt > 0.0 && opts.dt.is_finite()) {
        return Err(fail(SpectralError::BadStep(opts.dt), traj));
    }
    if !(t_end > state.time) {
        return Err(fail(
            SpectralError::BadEndTime {
                time: state.time,
                t_end,
            },
            traj,
        ));
    }
    let mut m = match Marcher::new(spec, state) {
        Ok(m) => m,
        Err(e) => return Err(fail(e, traj)),
    };
    let mut stops: Vec<f64> = opts
        .snapshot_times
        .iter()
        .copied()
        .filter(|&t| t > state.time && t <= t_end)
        .collect();
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    if opts.snapshot_times.iter().any(|&t| t == state.time) {
        traj.snapshots.push(state.clone());
    }
    let every = opts.diagnostics_every.max(1);
    let record = |traj: &mut Trajectory, s: &FieldState, sp: &Spectral, obs: &mut [&mut dyn Observer]| {
        let d = Diagnostics::of(s, sp);
        if d.resolution > 1e-8 && traj.warnings.len() < 16 {
            traj.warnings.push(format!("t = {}: top-band ratio {:.2e}", d.time, d.resolution));
        }
        traj.diagnostics.push(d);
        for o in obs.iter_mut() {
            o.observe(s, sp);
        }
    };
    record(&mut traj, state, &m.sp, observers);

    let mut w = m.load(state);
    let mut time = state.time;
    // tolerance for landing on a stop time
    let slack = 1e-9 * opts.dt;
    let mut next_stop = 0;
    loop {
        let target = stops.get(next_stop).copied().unwrap_or(t_end).min(t_end);
        let lands = target - time <= opts.dt + slack;
        let h = if lands { target - time } else { opts.dt };
        if let Err(e) = m.advance(&mut w, h) {
            let e = match e {
                SpectralError::BlowUp { .. } => SpectralError::BlowUp { time },
                e => e,
            };
            traj.final_state = m.store(&w, state, time);
            return Err(fail(e, traj));
        }
        traj.steps += 1;
        time = if lands { target } else { time + h };
        let at_stop = next_stop < stops.len() && time == stops[next_stop];
        let done = time >= t_end;
        if at_stop || done || traj.steps % every == 0 {
            let s = m.store(&w, state, time);
            if !s.samples.is_finite() {
                traj.final_state = s;
                return Err(fail(SpectralError::BlowUp { time: time - h }, traj));
            }
            if at_stop {
                traj.snapshots.push(s.clone());
                next_stop += 1;
            }
            if traj.steps % every == 0 || done {
                record(&mut traj, &s, &m.sp, observers);
            }
            if done {
                traj.final_state = s;
                return Ok(traj);
            }
        }
    }
}
