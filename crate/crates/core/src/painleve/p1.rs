//! Tritronquée solution of Painlevé I, `Q'' = 6Q² - Z`, with
//! `Q ~ -√(Z/6)` in the sector `|arg Z| < 4π/5`.
//!
//! The solution is anchored by a boundary value problem on the imaginary
//! segment `[-iR, iR]`, whose endpoints lie deep in the asymptotic sector and
//! where the linearisation has an exponential dichotomy. From `Q(0), Q'(0)`:
//! the positive real ray (neutrally stable) is marched with Dormand–Prince;
//! complex rays are solved as boundary value problems between `0` and the
//! far end, where the asymptotic series supplies the data.

use super::stencil::{Stencils, WIDTH};
use super::PainleveError;
use crate::numerics::banded::BandMatrix;
use crate::numerics::interp::lagrange_uniform;
use crate::numerics::ode::{DormandPrince, MarchEnd};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;
use std::ops::ControlFlow;

/// `|Q|` at which a march switches to pole localisation.
const PROXIMITY: f64 = 1e2;
/// `|Q|` treated as reaching the pole.
const BLOW_UP: f64 = 1e6;
const MAX_NEWTON: usize = 60;
const MAX_HALVINGS: usize = 30;
const SERIES_TERMS: usize = 12;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct P1Options {
    /// Dormand–Prince local error per unit length.
    pub tol: f64,
    /// Spacing of the stored path samples.
    pub spacing: f64,
    /// Half-length `R` of the imaginary anchor segment.
    pub anchor_radius: f64,
    /// Grid intervals per unit length in boundary value solves.
    pub density: usize,
}

impl Default for P1Options {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            spacing: 0.25,
            anchor_radius: 30.0,
            density: 64,
        }
    }
}

/// Ray `Z = r e^{iθ}` for `r_near <= r <= r_far`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RaySegment {
    pub angle: f64,
    pub r_near: f64,
    pub r_far: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoleEstimate {
    pub z: Complex64,
    /// Max of `|Q (Z - Z_p)² - 1|` over the last decade `|Q| ∈ [1e5, 1e6]`.
    pub fit_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct P1Trajectory {
    pub path: Vec<Complex64>,
    pub q: Vec<Complex64>,
    pub dq: Vec<Complex64>,
    pub poles: Vec<PoleEstimate>,
}

/// Coefficients `a_n` of `Q ~ -√(Z/6) Σ a_n Z^{-5n/2}`.
fn series_coefficients() -> Vec<f64> {
    let mut a = vec![1.0];
    let s6 = 6f64.sqrt();
    for m in 1..SERIES_TERMS {
        let prev = (m - 1) as f64;
        let cm = (25.0 * prev * prev - 1.0) / 4.0;
        let conv: f64 = (1..m).map(|j| a[j] * a[m - j]).sum();
        a.push((-cm * a[m - 1] / s6 - conv) / 2.0);
    }
    a
}

/// Optimally truncated asymptotic series and its derivative at `z`.
pub fn tritronquee_asymptotic(z: Complex64) -> (Complex64, Complex64) {
    let a = series_coefficients();
    let w = z.powf(-2.5);
    let root = (z / 6.0).sqrt();
    let mut s = c(0.0);
    let mut ds = c(0.0);
    let mut wn = c(1.0);
    let mut last = f64::INFINITY;
    for (n, &an) in a.iter().enumerate() {
        let term = wn * an;
        if n > 1 && term.norm() > last {
            break;
        }
        last = term.norm();
        s += term;
        // d/dz Z^{-5n/2} = -5n/2 Z^{-5n/2 - 1}
        ds += term * (-2.5 * n as f64) / z;
        wn *= w;
    }
    let q = -root * s;
    let dq = -(root / (z * 2.0)) * s - root * ds;
    (q, dq)
}

/// Solves `d²Q/ds² = e^{2iθ}(6Q² - Z(s))` on `Z(s) = a + s e^{iθ}`,
/// `s ∈ [0, len]`, with Dirichlet data. Returns samples and `dQ/dZ`.
fn solve_segment(
    a: Complex64,
    dir: Complex64,
    len: f64,
    qa: Complex64,
    qb: Complex64,
    density: usize,
    seed: impl Fn(Complex64) -> Complex64,
) -> Result<(Vec<Complex64>, Vec<Complex64>, Vec<Complex64>, f64), PainleveError> {
    let n = ((len * density as f64).ceil() as usize).max(2 * WIDTH);
    let h = len / n as f64;
    let nodes = n + 1;
    let st = Stencils::new(nodes, h, 2);
    let zs: Vec<Complex64> = (0..nodes).map(|j| a + dir * (h * j as f64)).collect();
    let rot = dir * dir;
    let residual = |q: &[Complex64]| -> Vec<Complex64> {
        (0..nodes)
            .map(|j| {
                if j == 0 {
                    q[0] - qa
                } else if j == n {
                    q[n] - qb
                } else {
                    let (s, w) = st.weights(j, 2);
                    let d2: Complex64 = w.iter().zip(&q[s..s + WIDTH]).map(|(wm, v)| v * wm).sum();
                    d2 - rot * (q[j] * q[j] * 6.0 - zs[j])
                }
            })
            .collect()
    };
    let norm = |r: &[Complex64]| r.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    let mut q: Vec<Complex64> = zs.iter().map(|&z| seed(z)).collect();
    q[0] = qa;
    q[n] = qb;
    let mut res = residual(&q);
    let mut rn = norm(&res);
    let tol = 1e-11;
    let mut converged = false;
    for _ in 0..MAX_NEWTON {
        if rn < tol {
            converged = true;
            break;
        }
        let mut jac: BandMatrix<Complex64> = BandMatrix::zeros(nodes, WIDTH - 1, WIDTH - 1);
        jac.add(0, 0, c(1.0));
        jac.add(n, n, c(1.0));
        for j in 1..n {
            let (s, w) = st.weights(j, 2);
            for (m, &wm) in w.iter().enumerate() {
                jac.add(j, s + m, c(wm));
            }
            jac.add(j, j, -rot * q[j] * 12.0);
        }
        jac.factor().map_err(|e| PainleveError::Singular(e.0))?;
        let mut delta: Vec<Complex64> = res.iter().map(|r| -r).collect();
        jac.solve_in_place(&mut delta);
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<Complex64> = q.iter().zip(&delta).map(|(v, d)| v + d * lambda).collect();
            let tr = residual(&trial);
            let tn = norm(&tr);
            if tn.is_finite() && tn < rn {
                q = trial;
                res = tr;
                rn = tn;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            converged = rn < 1e3 * tol;
            break;
        }
    }
    if !converged {
        // the failed iterate is largest where a pole is closest
        let j = (0..nodes).max_by(|&i, &k| q[i].norm().total_cmp(&q[k].norm())).unwrap_or(0);
        if q[j].norm() > PROXIMITY || rn > 1.0 {
            return Err(PainleveError::PoleProximity {
                re: zs[j].re,
                im: zs[j].im,
            });
        }
        return Err(PainleveError::NewtonFailed {
            iterations: MAX_NEWTON,
            residual: rn,
        });
    }
    let re: Vec<f64> = q.iter().map(|v| v.re).collect();
    let im: Vec<f64> = q.iter().map(|v| v.im).collect();
    let dq: Vec<Complex64> = (0..nodes)
        .map(|j| Complex64::new(st.apply(&re, j, 1), st.apply(&im, j, 1)) / dir)
        .collect();
    Ok((zs, q, dq, h))
}

/// `(Q(0), Q'(0))` from the imaginary-axis boundary value problem.
pub fn anchor(opts: &P1Options) -> Result<(Complex64, Complex64), PainleveError> {
    let r = opts.anchor_radius;
    if !(r >= 10.0 && r.is_finite()) {
        return Err(PainleveError::Domain(format!("anchor radius must be >= 10, got {r}")));
    }
    let a = Complex64::new(0.0, -r);
    let b = Complex64::new(0.0, r);
    let seed = |z: Complex64| if z.norm() < 1.0 { c(-0.2) } else { tritronquee_asymptotic(z).0 };
    let (zs, q, dq, _) = solve_segment(
        a,
        Complex64::i(),
        2.0 * r,
        tritronquee_asymptotic(a).0,
        tritronquee_asymptotic(b).0,
        opts.density,
        seed,
    )?;
    let mid = zs.len() / 2;
    debug_assert!(zs[mid].norm() < 1e-9);
    Ok((q[mid], dq[mid]))
}

fn rhs(dir: Complex64, z0: Complex64) -> impl Fn(f64, &[Complex64]) -> Vec<Complex64> {
    move |s, y| vec![dir * y[1], dir * (y[0] * y[0] * 6.0 - (z0 + dir * s))]
}

struct Sample {
    z: Complex64,
    q: Complex64,
    dq: Complex64,
}

/// Marches along `z0 + s dir` for `s ∈ [0, len]`, recording each accepted
/// step; stops early once `|Q| > stop_at`.
fn march(
    z0: Complex64,
    y0: [Complex64; 2],
    dir: Complex64,
    len: f64,
    tol: f64,
    stop_at: f64,
) -> (Vec<Sample>, MarchEnd, [Complex64; 2]) {
    let dp = DormandPrince {
        tol_per_length: tol,
        h_init: 1e-3,
        h_min: 1e-15,
        h_max: 0.05,
    };
    let mut samples = Vec::new();
    let (end, _, y) = dp.integrate(rhs(dir, z0), 0.0, &y0, len, |s, y, _| {
        samples.push(Sample {
            z: z0 + dir * s,
            q: y[0],
            dq: y[1],
        });
        if y[0].norm() > stop_at {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    (samples, end, [y[0], y[1]])
}

/// Computes `Q` along the ray segment, sampled every `opts.spacing`.
pub fn solve_tritronquee(seg: &RaySegment, opts: &P1Options) -> Result<P1Trajectory, PainleveError> {
    if !(seg.angle.abs() < 4.0 * PI / 5.0) {
        return Err(PainleveError::Domain(format!(
            "ray angle {} is outside |arg Z| < 4π/5",
            seg.angle
        )));
    }
    if !(seg.r_near >= 0.0 && seg.r_far > seg.r_near && seg.r_far.is_finite()) {
        return Err(PainleveError::Domain(format!(
            "need 0 <= r_near < r_far, got [{}, {}]",
            seg.r_near, seg.r_far
        )));
    }
    let (q0, dq0) = anchor(opts)?;
    let dir = Complex64::from_polar(1.0, seg.angle);
    let count = ((seg.r_far - seg.r_near) / opts.spacing).round() as usize;
    let radii: Vec<f64> = (0..=count)
        .map(|k| {
            if k == count {
                seg.r_far
            } else {
                seg.r_near + opts.spacing * k as f64
            }
        })
        .collect();
    let mut traj = P1Trajectory {
        path: Vec::with_capacity(radii.len()),
        q: Vec::with_capacity(radii.len()),
        dq: Vec::with_capacity(radii.len()),
        poles: Vec::new(),
    };
    if seg.angle == 0.0 {
        let mut y = [q0, dq0];
        let mut r = 0.0;
        for &target in &radii {
            if target > r {
                let (_, end, y1) = march(c(r), y, c(1.0), target - r, opts.tol, PROXIMITY);
                if end != MarchEnd::Completed {
                    return Err(PainleveError::PoleProximity { re: target, im: 0.0 });
                }
                y = y1;
                r = target;
            }
            traj.path.push(c(target));
            // real on the real axis: drop the roundoff imaginary part
            traj.q.push(c(y[0].re));
            traj.dq.push(c(y[1].re));
        }
    } else {
        let far = dir * seg.r_far;
        let seed = |z: Complex64| if z.norm() < 1.0 { q0 } else { tritronquee_asymptotic(z).0 };
        let (_, q, dq, h) = solve_segment(c(0.0), dir, seg.r_far, q0, tritronquee_asymptotic(far).0, opts.density, seed)?;
        let parts = |v: &[Complex64], r: f64| {
            let re: Vec<f64> = v.iter().map(|x| x.re).collect();
            let im: Vec<f64> = v.iter().map(|x| x.im).collect();
            Complex64::new(lagrange_uniform(0.0, h, &re, r, 8), lagrange_uniform(0.0, h, &im, r, 8))
        };
        for &r in &radii {
            traj.path.push(dir * r);
            traj.q.push(parts(&q, r));
            traj.dq.push(parts(&dq, r));
        }
    }
    Ok(traj)
}

impl P1Trajectory {
    /// Max relative change of `Q` on the path when the solve is repeated
    /// with halved steps (tolerance / 32, doubled grid density).
    pub fn step_doubling_deviation(&self, seg: &RaySegment, opts: &P1Options) -> Result<f64, PainleveError> {
        let fine = P1Options {
            tol: opts.tol / 32.0,
            density: opts.density * 2,
            ..*opts
        };
        let other = solve_tritronquee(seg, &fine)?;
        Ok(self
            .q
            .iter()
            .zip(&other.q)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm() / b.norm().max(1e-300))))
    }

}

/// Locates the pole approached from `(z, q, dq)` by marching straight at the
/// double-pole estimate `Z + 2Q/Q'` until `|Q| > 1e6`.
fn localise_pole(z: Complex64, q: Complex64, dq: Complex64, tol: f64) -> Option<PoleEstimate> {
    let mut state = (z, [q, dq]);
    let mut decade: Vec<Sample> = Vec::new();
    for _ in 0..8 {
        let (z, y) = state;
        let target = z + y[0] * 2.0 / y[1];
        let dist = (target - z).norm();
        let dir = (target - z) / dist;
        let (samples, _, _) = march(z, y, dir, 1.5 * dist, tol, BLOW_UP);
        let last = samples.last()?;
        decade.extend(samples.iter().filter(|s| s.q.norm() >= BLOW_UP / 10.0).map(|s| Sample { ..*s }));
        if last.q.norm() > BLOW_UP {
            let zp = last.z + last.q * 2.0 / last.dq;
            let fit_error = decade
                .iter()
                .map(|s| (s.q * (s.z - zp) * (s.z - zp) - 1.0).norm())
                .fold(0.0, f64::max);
            return Some(PoleEstimate { z: zp, fit_error });
        }
        // passed beside the pole: re-aim from the closest approach
        let best = samples.iter().max_by(|a, b| a.q.norm().total_cmp(&b.q.norm()))?;
        state = (best.z, [best.q, best.dq]);
    }
    None
}

/// Marches from trajectory point `from` along `direction` for length
/// `max_len`, detecting poles and stepping around them on half circles.
pub fn continue_and_detect_poles(
    traj: &P1Trajectory,
    from: usize,
    direction: Complex64,
    max_len: f64,
    tol: f64,
) -> Result<P1Trajectory, PainleveError> {
    if from >= traj.path.len() || !(direction.norm() > 0.0) || !(max_len > 0.0) {
        return Err(PainleveError::Domain("bad continuation request".into()));
    }
    let dir = direction / direction.norm();
    let origin = traj.path[from];
    let mut out = P1Trajectory {
        path: vec![origin],
        q: vec![traj.q[from]],
        dq: vec![traj.dq[from]],
        poles: traj.poles.clone(),
    };
    let mut z = origin;
    let mut y = [traj.q[from], traj.dq[from]];
    loop {
        let travelled = ((z - origin) * dir.conj()).re;
        let remaining = max_len - travelled;
        if remaining <= 1e-12 {
            return Ok(out);
        }
        let (samples, end, _) = march(z, y, dir, remaining, tol, PROXIMITY);
        for s in &samples {
            out.path.push(s.z);
            out.q.push(s.q);
            out.dq.push(s.dq);
        }
        match end {
            MarchEnd::Completed => return Ok(out),
            MarchEnd::Stopped | MarchEnd::StepCollapse { .. } | MarchEnd::NonFinite { .. } => {
                let last = samples.last().map(|s| (s.z, s.q, s.dq)).unwrap_or((z, y[0], y[1]));
                let pole = localise_pole(last.0, last.1, last.2, tol).ok_or(PainleveError::PoleProximity {
                    re: last.0.re,
                    im: last.0.im,
                })?;
                out.poles.push(pole);
                // half circle around the pole, outside the proximity radius
                let radius = 2.0 * (last.0 - pole.z).norm().max(0.05);
                let start_angle = (last.0 - pole.z).arg();
                let p0 = pole.z + Complex64::from_polar(radius, start_angle);
                // move radially out to the circle
                let (_, _, y0) = march(last.0, [last.1, last.2], unit(p0 - last.0), (p0 - last.0).norm(), tol, f64::INFINITY);
                let (zc, yc) = circle(pole.z, radius, start_angle, y0, tol)?;
                z = zc;
                y = yc;
            }
        }
    }
}

fn unit(v: Complex64) -> Complex64 {
    if v.norm() == 0.0 {
        c(1.0)
    } else {
        v / v.norm()
    }
}

/// Integrates counter-clockwise around half a circle to the antipode.
fn circle(
    center: Complex64,
    radius: f64,
    start: f64,
    y0: [Complex64; 2],
    tol: f64,
) -> Result<(Complex64, [Complex64; 2]), PainleveError> {
    let dp = DormandPrince {
        tol_per_length: tol,
        h_init: 1e-3,
        h_min: 1e-15,
        h_max: 0.05,
    };
    let f = move |phi: f64, y: &[Complex64]| {
        let z = center + Complex64::from_polar(radius, start + phi);
        let dz = Complex64::i() * (z - center);
        vec![dz * y[1], dz * (y[0] * y[0] * 6.0 - z)]
    };
    let (end, _, y) = dp.integrate(f, 0.0, &y0, PI, |_, _, _| ControlFlow::Continue(()));
    if end != MarchEnd::Completed {
        return Err(PainleveError::PoleProximity {
            re: center.re,
            im: center.im,
        });
    }
    Ok((center + Complex64::from_polar(radius, start + PI), [y[0], y[1]]))
}
