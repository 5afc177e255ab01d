//! One function per subcommand. Each takes resolved options, computes
//! everything in memory and returns the files to write, so a failure
//! leaves no partial output behind.

use crate::config::*;
use crate::error::CliError;
use crate::output::Outputs;
use critlab::diffpoly::{hierarchy_flow, lenard};
use critlab::hopf::{find_catastrophe, hopf_profile};
use critlab::initial_data::{DatumSpec, InitialDatum};
use critlab::painleve::{
    asymptote_fit, continue_and_detect_poles, solve_p12, solve_tritronquee, P12Options, P1Options, RaySegment,
};
use critlab::rh::{
    builtin_descriptor, consistent_inversion_patterns, cyclic_consistency, det_check, phi_eval_at, phi_exponent,
    wkb_reflection, DescriptorName, Parameters, Reflection, RhError,
};
use critlab::spectral::{
    evolve, hampert_spec, Equation, EvolutionSpec, EvolveOptions, Field, FieldState, HampertCoefficients,
    PeriodicGrid,
};
use critlab::universality::{eps_sweep, SweepOptions, Window};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use std::sync::Arc;

/// A finished command: its final options, files and manifest diagnostics.
pub struct Run<A> {
    pub config: A,
    pub outputs: Outputs,
    pub diagnostics: Value,
}

fn get<T: Clone>(o: &Option<T>) -> T {
    o.clone().expect("options are resolved before dispatch")
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(config_err(format!("{name} must be positive, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(config_err(format!("{name} must be finite, got {v}")))
    }
}

pub fn build_datum(spec: &str) -> Result<InitialDatum, CliError> {
    let parsed = DatumSpec::parse_shorthand(spec)
        .ok_or_else(|| config_err(format!("datum `{spec}` is not `sech2:A` or `table:path`")))?;
    Ok(parsed.build(None)?)
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|j| lo + (hi - lo) * j as f64 / (n - 1) as f64).collect()
}

pub fn hopf(a: HopfArgs) -> Result<Run<HopfArgs>, CliError> {
    let datum = build_datum(&get(&a.datum))?;
    let t = get(&a.t);
    let (lo, hi, n) = (finite("xmin", get(&a.xmin))?, finite("xmax", get(&a.xmax))?, get(&a.n));
    if !(lo < hi) || n < 2 {
        return Err(config_err(format!("need xmin < xmax and n >= 2, got {lo}, {hi}, {n}")));
    }
    let xs = linspace(lo, hi, n);
    let us = hopf_profile(&datum, &xs, t)?;
    let mut outputs = Outputs::default();
    outputs.csv("hopf.csv", ["x", "u"], xs.iter().zip(&us).map(|(&x, &u)| [x, u]));
    Ok(Run {
        config: a,
        outputs,
        diagnostics: json!({ "points": n, "t": t }),
    })
}

pub fn catastrophe(a: CatastropheArgs) -> Result<Run<CatastropheArgs>, CliError> {
    let datum = build_datum(&get(&a.datum))?;
    let cp = find_catastrophe(&datum)?;
    let mut outputs = Outputs::default();
    outputs.json("catastrophe.json", &cp);
    outputs.stdout = serde_json::to_string_pretty(&cp).expect("serialisable");
    Ok(Run {
        config: a,
        outputs,
        diagnostics: json!({}),
    })
}

pub fn hierarchy(a: HierarchyArgs) -> Result<Run<HierarchyArgs>, CliError> {
    let m = get(&a.m);
    let flow = hierarchy_flow(m)?;
    let l = lenard(m)?;
    let text = format!("L_{m} = {l}\nu_t = {flow}\n");
    let mut outputs = Outputs::default();
    outputs.text("hierarchy.txt", text.clone());
    outputs.json(
        "hierarchy.json",
        &json!({ "m": m, "lenard": l.to_terms(), "flow": flow.to_terms() }),
    );
    outputs.stdout = text.trim_end().to_string();
    Ok(Run {
        config: a,
        outputs,
        diagnostics: json!({ "lenard_terms": l.len(), "flow_terms": flow.len() }),
    })
}

fn relative_drift(values: impl Iterator<Item = f64>) -> Option<f64> {
    let v: Vec<f64> = values.collect();
    let first = *v.first()?;
    let worst = v.iter().map(|x| (x - first).abs()).fold(0.0, f64::max);
    Some(if first != 0.0 { worst / first.abs() } else { worst })
}

pub fn evolve_cmd(a: EvolveArgs) -> Result<Run<EvolveArgs>, CliError> {
    let eq = get(&a.eq);
    let spec = if eq == "hampert" {
        let preset = get(&a.preset);
        let coeffs = HampertCoefficients::preset(&preset)
            .ok_or_else(|| config_err(format!("unknown hampert preset `{preset}`")))?;
        hampert_spec(coeffs)
    } else {
        EvolutionSpec::builtin(Equation::parse(&eq)?)
    };
    let datum = build_datum(&get(&a.datum))?;
    let eps = positive("eps", get(&a.eps))?;
    let dt = positive("dt", get(&a.dt))?;
    let t_end = positive("t-end", get(&a.t_end))?;
    let snap = positive("snap", get(&a.snap))?;
    let every = get(&a.diag_every);
    if every == 0 {
        return Err(config_err("diag-every must be at least 1"));
    }
    let grid = PeriodicGrid::new(positive("L", get(&a.l))?, get(&a.n))?;
    let state = if spec.is_nls() {
        // amplitude √(-u0), zero phase
        let psi = grid
            .nodes()
            .iter()
            .map(|&x| Complex64::new((-datum.value(x)).max(0.0).sqrt(), 0.0))
            .collect();
        FieldState::complex(grid, psi, eps, 0.0)?
    } else {
        FieldState::from_fn(grid, eps, |x| datum.value(x))?
    };
    let count = (t_end / snap + 1e-9).floor() as usize;
    let mut times: Vec<f64> = (0..=count).map(|k| k as f64 * snap).collect();
    if times.last().is_some_and(|&t| t < t_end * (1.0 - 1e-12)) {
        times.push(t_end);
    }
    let opts = EvolveOptions {
        dt,
        snapshot_times: times,
        diagnostics_every: every,
    };
    let traj = evolve(&state, &spec, t_end, &opts, &mut []).map_err(|e| CliError::from(e.source))?;

    let mut outputs = Outputs::default();
    let xs = grid.nodes();
    for (k, s) in traj.snapshots.iter().enumerate() {
        let name = format!("snap_{k:04}.csv");
        match &s.samples {
            Field::Real(u) => outputs.csv(&name, ["x", "u"], xs.iter().zip(u).map(|(&x, &u)| [x, u])),
            Field::Complex(p) => outputs.csv(
                &name,
                ["x", "re_psi", "im_psi"],
                xs.iter().zip(p).map(|(&x, z)| [x, z.re, z.im]),
            ),
        }
    }
    let d = &traj.diagnostics;
    outputs.csv(
        "diagnostics.csv",
        ["time", "mass", "momentum", "hamiltonian", "max_slope", "max_abs", "resolution"],
        d.iter().map(|r| {
            [
                r.time,
                r.mass,
                r.momentum,
                r.hamiltonian.unwrap_or(f64::NAN),
                r.max_slope,
                r.max_abs,
                r.resolution,
            ]
        }),
    );
    let snapshot_times: Vec<f64> = traj.snapshots.iter().map(|s| s.time).collect();
    let diagnostics = json!({
        "label": traj.label,
        "steps": traj.steps,
        "snapshot_times": snapshot_times,
        "drift": {
            "mass": relative_drift(d.iter().map(|r| r.mass)),
            "momentum": relative_drift(d.iter().map(|r| r.momentum)),
            "hamiltonian": relative_drift(d.iter().filter_map(|r| r.hamiltonian)),
        },
        "warnings": traj.warnings,
    });
    Ok(Run {
        config: a,
        outputs,
        diagnostics,
    })
}

pub fn painleve_u(a: PainleveUArgs) -> Result<Run<PainleveUArgs>, CliError> {
    let opts = P12Options {
        x_max: get(&a.xmax),
        n: get(&a.n),
        tol: get(&a.tol),
    };
    let t = finite("T", get(&a.t))?;
    let sol = solve_p12(t, &opts)?;
    let mut outputs = Outputs::default();
    outputs.csv("painleve_u.csv", ["X", "U"], sol.xs().into_iter().zip(&sol.u).map(|(x, &u)| [x, u]));
    let fit = asymptote_fit(&sol, opts.x_max / 8.0, opts.x_max / 2.0).ok();
    let diagnostics = json!({
        "T": sol.t,
        "h": sol.h,
        "residual_norm": sol.residual_norm,
        "boundary_error": sol.boundary_error,
        "newton_iterations": sol.newton_iterations,
        "u_at_origin": sol.evaluate_u(0.0)?,
        "asymptote_fit": fit,
    });
    outputs.json("diagnostics.json", &diagnostics);
    Ok(Run {
        config: a,
        outputs,
        diagnostics,
    })
}

#[derive(Serialize)]
struct PoleRecord {
    re: f64,
    im: f64,
    fit_error: f64,
}

pub fn painleve_q(a: PainleveQArgs) -> Result<Run<PainleveQArgs>, CliError> {
    let seg = RaySegment {
        angle: finite("ray-angle", get(&a.ray_angle))?,
        r_near: get(&a.znear),
        r_far: get(&a.zfar),
    };
    let defaults = P1Options::default();
    let opts = P1Options {
        tol: positive("tol", get(&a.tol))?,
        spacing: positive("spacing", get(&a.spacing))?,
        ..defaults
    };
    let traj = solve_tritronquee(&seg, &opts)?;
    let mut outputs = Outputs::default();
    let rows = |t: &critlab::painleve::P1Trajectory| -> Vec<[f64; 4]> {
        t.path.iter().zip(&t.q).map(|(z, q)| [z.re, z.im, q.re, q.im]).collect()
    };
    outputs.csv("painleve_q.csv", ["re_z", "im_z", "re_q", "im_q"], rows(&traj));
    let length = get(&a.continue_length);
    let mut poles = traj.poles.clone();
    if length > 0.0 {
        let dir = Complex64::from_polar(1.0, finite("continue-angle", get(&a.continue_angle))?);
        let cont = continue_and_detect_poles(&traj, 0, dir, length, opts.tol)?;
        outputs.csv("continuation.csv", ["re_z", "im_z", "re_q", "im_q"], rows(&cont));
        poles = cont.poles;
    } else if length < 0.0 || !length.is_finite() {
        return Err(config_err(format!("continue-length must be non-negative, got {length}")));
    }
    let records: Vec<PoleRecord> = poles
        .iter()
        .map(|p| PoleRecord {
            re: p.z.re,
            im: p.z.im,
            fit_error: p.fit_error,
        })
        .collect();
    outputs.json("poles.json", &records);
    let first = traj.q.first().copied().unwrap_or_default();
    let diagnostics = json!({
        "points": traj.path.len(),
        "poles": records.len(),
        "q_near": [first.re, first.im],
    });
    Ok(Run {
        config: a,
        outputs,
        diagnostics,
    })
}

fn reflection_for(name: DescriptorName, choice: &str, datum: &str) -> Result<Option<Reflection>, CliError> {
    if matches!(name, DescriptorName::PsiP12 | DescriptorName::PhiP1) {
        return Ok(None);
    }
    let kdv_like = matches!(name, DescriptorName::KdvM | DescriptorName::KdvHierarchyM(_));
    let choice = match choice {
        "auto" if kdv_like => "wkb",
        "auto" => "gauss:0.5",
        c => c,
    };
    if choice == "wkb" {
        return Ok(Some(wkb_reflection(build_datum(datum)?)));
    }
    if let Some(a) = choice.strip_prefix("gauss:") {
        let a: f64 = a.parse().map_err(|_| config_err(format!("bad gauss amplitude `{a}`")))?;
        finite("gauss amplitude", a)?;
        let r: Reflection = Arc::new(move |l: f64, _eps: f64| Complex64::new(a * (-l * l).exp(), 0.0));
        return Ok(Some(r));
    }
    Err(config_err(format!("reflection `{choice}` is not `wkb`, `gauss:<a>` or `auto`")))
}

pub fn rh_check(a: RhCheckArgs) -> Result<Run<RhCheckArgs>, CliError> {
    let problem = get(&a.problem);
    let name: DescriptorName = problem.parse()?;
    let r0 = reflection_for(name, &get(&a.reflection), &get(&a.datum))?;
    let d = builtin_descriptor(name, r0)?;
    let params = Parameters::new()
        .with("x", finite("x", get(&a.x))?)
        .with("y", finite("y", get(&a.y))?)
        .with("t", finite("t", get(&a.t))?)
        .with("eps", positive("eps", get(&a.eps))?);
    let radii = get(&a.radii);
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(config_err(format!("radii must be positive, got {radii:?}")));
    }
    let det = det_check(&d, &radii, std::slice::from_ref(&params))?;
    let (cyclic, patterns, note) = match cyclic_consistency(&d) {
        Ok(v) => (Some(v), Some(consistent_inversion_patterns(&d)?), None),
        Err(RhError::Unsupported(msg)) => (None, None, Some(msg)),
        Err(e) => return Err(e.into()),
    };
    let report = json!({
        "problem": name.to_string(),
        "summary": d.summary(),
        "radii": radii,
        "det_deviation": det,
        "cyclic_deviation": cyclic,
        "consistent_inversion_patterns": patterns,
        "cyclic_note": note,
    });
    let mut outputs = Outputs::default();
    outputs.json("rh_check.json", &report);
    outputs.stdout = serde_json::to_string_pretty(&report).expect("serialisable");
    Ok(Run {
        config: a,
        outputs,
        diagnostics: json!({ "det_deviation": det, "cyclic_deviation": cyclic }),
    })
}

pub fn phi(mut a: PhiArgs) -> Result<Run<PhiArgs>, CliError> {
    let datum = build_datum(&get(&a.datum))?;
    let needs_cp = [a.x, a.t, a.edge].iter().any(|v| v.is_none_or(f64::is_nan));
    if needs_cp {
        let cp = find_catastrophe(&datum)?;
        for (slot, v) in [(&mut a.x, cp.x_c), (&mut a.t, cp.t_c), (&mut a.edge, cp.u_c)] {
            if slot.is_none_or(f64::is_nan) {
                *slot = Some(v);
            }
        }
    }
    let (x, t, edge) = (get(&a.x), get(&a.t), get(&a.edge));
    let grid = get(&a.lambda_grid);
    let grid = if grid.is_empty() {
        vec![(edge - 0.3).max(datum.minimum_value() + 1e-6), edge, 61.0]
    } else {
        grid
    };
    a.lambda_grid = Some(grid.clone());
    let [lo, hi, count] = grid[..] else {
        return Err(config_err(format!("lambda-grid needs lo,hi,count, got {grid:?}")));
    };
    if !(lo <= hi) || count < 1.0 || count.fract() != 0.0 {
        return Err(config_err(format!("bad lambda-grid {grid:?}")));
    }
    let lambdas = linspace(lo, hi, count as usize);
    let values = lambdas
        .iter()
        .map(|&l| phi_eval_at(&datum, edge, l, x, t))
        .collect::<Result<Vec<_>, _>>()?;
    let mut outputs = Outputs::default();
    outputs.csv("phi.csv", ["lambda", "phi"], lambdas.iter().zip(&values).map(|(&l, &p)| [l, p]));
    let offsets: Vec<f64> = (0..=8).map(|k| 10f64.powf(-4.0 + k as f64 / 4.0)).collect();
    let fit = phi_exponent(&datum, edge, x, t, &offsets);
    let diagnostics = json!({
        "x": x,
        "t": t,
        "edge": edge,
        "exponent": fit.as_ref().ok().map(|f| f.fit.slope),
        "sign": fit.as_ref().ok().map(|f| f.sign),
        "exponent_error": fit.as_ref().err().map(|e| e.to_string()),
    });
    Ok(Run {
        config: a,
        outputs,
        diagnostics,
    })
}

pub fn universality(a: UniversalityArgs) -> Result<Run<UniversalityArgs>, CliError> {
    let datum = build_datum(&get(&a.datum))?;
    let cp = find_catastrophe(&datum)?;
    let window = get(&a.window);
    let [x_half, t_half] = window[..] else {
        return Err(config_err(format!("window needs X,T, got {window:?}")));
    };
    let opts = SweepOptions {
        eps: get(&a.eps),
        half_width: positive("L", get(&a.l))?,
        n: get(&a.n),
        dt: positive("dt", get(&a.dt))?,
        window: Window {
            x_half: positive("window X", x_half)?,
            t_half: positive("window T", t_half)?,
        },
        table_points: get(&a.table_points),
        p12: P12Options {
            x_max: get(&a.p12_xmax),
            n: get(&a.p12_n),
            tol: 1e-10,
        },
        control_offset: get(&a.control_offset),
    };
    let report = eps_sweep(&datum, &cp, &opts)?;
    let mut outputs = Outputs::default();
    let runs: Vec<Value> = report
        .runs
        .iter()
        .map(|r| {
            outputs.csv(
                &format!("overlay_eps_{}.csv", r.eps),
                ["x", "u_numeric", "u_predicted"],
                r.overlay.iter().copied(),
            );
            json!({
                "eps": r.eps,
                "u_critical": r.u_critical,
                "predicted_critical": r.predicted_critical,
                "errors": r.report,
                "control": r.control,
                "steps": r.steps,
                "warnings": r.warnings,
            })
        })
        .collect();
    let body = json!({
        "constants": report.constants,
        "runs": runs,
        "rates": report.rates,
        "control_fit": report.control_fit,
    });
    outputs.json("universality.json", &body);
    outputs.stdout = format!(
        "amplitude exponent {:?}, correction exponent {:?}, control exponent {:?}",
        report.rates.amplitude_exponent,
        report.rates.correction_exponent,
        report.control_fit.map(|f| f.slope)
    );
    Ok(Run {
        config: a,
        outputs,
        diagnostics: json!({ "rates": report.rates }),
    })
}
