//! Real pole-free solution of
//! `X = T U - (U³/6 + (U_X² + 2 U U_XX)/24 + U_XXXX/240)`
//! as a two-point boundary value problem on `[-X_max, X_max]`.
//!
//! Discretisation: nine-point stencils (sixth order for `U_XXXX`, eighth for
//! the lower derivatives), one-sided near the ends. Boundary data: `U` is
//! the branch of the reduced cubic `X = T U - U³/6` that continues the
//! asymptote `∓(6|X|)^{1/3}`, and `U_X = 1/(T - U²/2)` is its slope.

use super::stencil::{Stencils, WIDTH};
use super::PainleveError;
use crate::numerics::banded::BandMatrix;
use crate::numerics::fit::{fit_power_law, PowerFit};
use crate::numerics::interp::lagrange_uniform;
use serde::Serialize;

const MAX_NEWTON: usize = 60;
const MAX_HALVINGS: usize = 30;
/// Relative Newton update below which the iterate is converged.
const STEP_FLOOR: f64 = 1e-13;
/// Smallest continuation increment in `T`.
const T_STEP_MIN: f64 = T_STEP / 256.0;
/// Largest continuation increment in `T`.
const T_STEP: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct P12Options {
    pub x_max: f64,
    /// Number of intervals; the grid has `n + 1` nodes.
    pub n: usize,
    /// Newton stops once the max-norm residual is below this.
    pub tol: f64,
}

impl Default for P12Options {
    fn default() -> Self {
        Self {
            x_max: 200.0,
            n: 8000,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct P12Solution {
    pub t: f64,
    pub x_max: f64,
    pub h: f64,
    pub u: Vec<f64>,
    /// Max residual of the equation over the nodes where it is imposed.
    pub residual_norm: f64,
    /// Max deviation of the boundary values from `∓(6 X_max)^{1/3}`.
    pub boundary_error: f64,
    pub newton_iterations: usize,
}

/// Leading asymptote `-sign(X) (6|X|)^{1/3}`.
pub fn asymptote(x: f64) -> f64 {
    -x.signum() * (6.0 * x.abs()).cbrt()
}

/// Real roots of `U³/6 - T U + X = 0` in increasing order.
fn cubic_roots(x: f64, t: f64) -> Vec<f64> {
    // depressed form U³ + pU + q = 0
    let p = -6.0 * t;
    let q = 6.0 * x;
    let disc = q * q / 4.0 + p * p * p / 27.0;
    let mut roots = if disc > 0.0 {
        let s = disc.sqrt();
        vec![(-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt()]
    } else if p == 0.0 {
        vec![0.0]
    } else {
        let r = 2.0 * (-p / 3.0).sqrt();
        let arg = ((3.0 * q) / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        (0..3)
            .map(|k| r * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos())
            .collect()
    };
    for u in roots.iter_mut() {
        for _ in 0..3 {
            let g = *u * *u * *u / 6.0 - t * *u + x;
            let d = *u * *u / 2.0 - t;
            if d != 0.0 {
                *u -= g / d;
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots
}

/// Root of the reduced cubic continuous with the large-|X| branch: the
/// smallest root for `X >= 0`, the largest for `X < 0`.
fn cubic_branch(x: f64, t: f64) -> f64 {
    let r = cubic_roots(x, t);
    if x >= 0.0 {
        r[0]
    } else {
        r[r.len() - 1]
    }
}

struct Problem {
    t: f64,
    x_max: f64,
    h: f64,
    nodes: usize,
    st: Stencils,
    bc: [(f64, f64); 2],
}

impl Problem {
    fn new(t: f64, opts: &P12Options) -> Self {
        let nodes = opts.n + 1;
        let h = 2.0 * opts.x_max / opts.n as f64;
        let bc = [-opts.x_max, opts.x_max].map(|x| {
            let u = cubic_branch(x, t);
            (u, 1.0 / (t - u * u / 2.0))
        });
        Self {
            t,
            x_max: opts.x_max,
            h,
            nodes,
            st: Stencils::new(nodes, h, 4),
            bc,
        }
    }

    fn x(&self, j: usize) -> f64 {
        if j == self.nodes - 1 {
            self.x_max
        } else {
            -self.x_max + self.h * j as f64
        }
    }

    fn is_equation_row(&self, j: usize) -> bool {
        j >= 2 && j + 2 < self.nodes
    }

    fn equation(&self, u: &[f64], j: usize) -> f64 {
        let v = u[j];
        let d1 = self.st.apply(u, j, 1);
        let d2 = self.st.apply(u, j, 2);
        let d4 = self.st.apply(u, j, 4);
        self.t * v - (v * v * v / 6.0 + (d1 * d1 + 2.0 * v * d2) / 24.0 + d4 / 240.0) - self.x(j)
    }

    fn residual(&self, u: &[f64]) -> Vec<f64> {
        let last = self.nodes - 1;
        (0..self.nodes)
            .map(|j| match j {
                0 => u[0] - self.bc[0].0,
                1 => self.st.apply(u, 0, 1) - self.bc[0].1,
                _ if j == last => u[last] - self.bc[1].0,
                _ if j == last - 1 => self.st.apply(u, last, 1) - self.bc[1].1,
                _ => self.equation(u, j),
            })
            .collect()
    }

    fn jacobian(&self, u: &[f64]) -> BandMatrix<f64> {
        let n = self.nodes;
        let last = n - 1;
        let mut jac = BandMatrix::zeros(n, WIDTH - 1, WIDTH - 1);
        jac.add(0, 0, 1.0);
        jac.add(last, last, 1.0);
        for (row, node) in [(1, 0), (last - 1, last)] {
            let (s, w) = self.st.weights(node, 1);
            for (m, &wm) in w.iter().enumerate() {
                jac.add(row, s + m, wm);
            }
        }
        for j in (0..n).filter(|&j| self.is_equation_row(j)) {
            let v = u[j];
            let d1 = self.st.apply(u, j, 1);
            let d2 = self.st.apply(u, j, 2);
            jac.add(j, j, self.t - v * v / 2.0 - d2 / 12.0);
            let (s, w1) = self.st.weights(j, 1);
            let (_, w2) = self.st.weights(j, 2);
            let (_, w4) = self.st.weights(j, 4);
            for m in 0..WIDTH {
                jac.add(j, s + m, -(d1 * w1[m] + v * w2[m]) / 12.0 - w4[m] / 240.0);
            }
        }
        jac
    }

    fn equation_norm(&self, res: &[f64]) -> f64 {
        res.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    /// Residual level set by roundoff in the `U_XXXX/240` term.
    fn roundoff_floor(&self, u: &[f64]) -> f64 {
        let scale = u.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let (_, w4) = self.st.weights(self.nodes / 2, 4);
        let weight: f64 = w4.iter().map(|w| w.abs()).sum();
        8.0 * f64::EPSILON * scale * weight / 240.0
    }

    /// Damped Newton from `u`; returns the iteration count.
    fn newton(&self, u: &mut Vec<f64>, tol: f64) -> Result<usize, PainleveError> {
        let mut res = self.residual(u);
        let mut norm = self.equation_norm(&res);
        for it in 0..MAX_NEWTON {
            if norm < tol {
                return Ok(it);
            }
            let mut jac = self.jacobian(u);
            jac.factor().map_err(|e| PainleveError::Singular(e.0))?;
            let mut delta: Vec<f64> = res.iter().map(|r| -r).collect();
            jac.solve_in_place(&mut delta);
            // on fine grids the residual floor from roundoff in U_XXXX can
            // exceed `tol`; a negligible update means we are on that floor
            let scale = u.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            if delta.iter().all(|d| d.abs() < STEP_FLOOR * scale) {
                for (a, d) in u.iter_mut().zip(&delta) {
                    *a += d;
                }
                return Ok(it + 1);
            }
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..=MAX_HALVINGS {
                let trial: Vec<f64> = u.iter().zip(&delta).map(|(a, d)| a + lambda * d).collect();
                let tres = self.residual(&trial);
                let tnorm = self.equation_norm(&tres);
                if tnorm.is_finite() && tnorm < norm {
                    *u = trial;
                    res = tres;
                    norm = tnorm;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            if !accepted {
                // stagnation on the roundoff floor counts as convergence
                if norm < self.roundoff_floor(u) {
                    return Ok(it);
                }
                return Err(PainleveError::NewtonFailed {
                    iterations: it,
                    residual: norm,
                });
            }
        }
        if norm < tol {
            Ok(MAX_NEWTON)
        } else {
            Err(PainleveError::NewtonFailed {
                iterations: MAX_NEWTON,
                residual: norm,
            })
        }
    }

    fn finish(&self, u: Vec<f64>, iterations: usize) -> P12Solution {
        let res = self.residual(&u);
        let residual_norm = (0..self.nodes)
            .filter(|&j| self.is_equation_row(j))
            .fold(0.0f64, |m, j| m.max(res[j].abs()));
        let last = self.nodes - 1;
        let boundary_error = (u[0] - asymptote(-self.x_max))
            .abs()
            .max((u[last] - asymptote(self.x_max)).abs());
        P12Solution {
            t: self.t,
            x_max: self.x_max,
            h: self.h,
            u,
            residual_norm,
            boundary_error,
            newton_iterations: iterations,
        }
    }
}

fn validate(opts: &P12Options, t: f64) -> Result<(), PainleveError> {
    if !t.is_finite() {
        return Err(PainleveError::Domain(format!("T must be finite, got {t}")));
    }
    if !(opts.x_max > 0.0 && opts.x_max.is_finite()) {
        return Err(PainleveError::Domain(format!("X_max must be positive, got {}", opts.x_max)));
    }
    if opts.n < 2 * WIDTH {
        return Err(PainleveError::Domain(format!("n = {} is too small", opts.n)));
    }
    Ok(())
}

/// Newton solve from an explicit initial iterate (same grid).
pub fn solve_p12_seeded(t: f64, opts: &P12Options, seed: &[f64]) -> Result<P12Solution, PainleveError> {
    validate(opts, t)?;
    let p = Problem::new(t, opts);
    if seed.len() != p.nodes {
        return Err(PainleveError::Domain(format!(
            "seed has {} samples, grid has {}",
            seed.len(),
            p.nodes
        )));
    }
    let mut u = seed.to_vec();
    let it = p.newton(&mut u, opts.tol)?;
    Ok(p.finish(u, it))
}

/// Solves at one `T`, seeding Newton with the cubic branch. If that fails
/// the solution is continued from `T = 0` in steps of at most 0.25,
/// halved on failure.
pub fn solve_p12(t: f64, opts: &P12Options) -> Result<P12Solution, PainleveError> {
    validate(opts, t)?;
    let p = Problem::new(t, opts);
    let mut u: Vec<f64> = (0..p.nodes).map(|j| cubic_branch(p.x(j), t)).collect();
    match p.newton(&mut u, opts.tol) {
        Ok(it) => Ok(p.finish(u, it)),
        Err(e) if t == 0.0 => Err(e),
        Err(_) => continue_to(solve_p12(0.0, opts)?, t, opts),
    }
}

fn continue_to(mut from: P12Solution, t: f64, opts: &P12Options) -> Result<P12Solution, PainleveError> {
    let mut step = T_STEP;
    while from.t != t {
        let next = if (t - from.t).abs() <= step {
            t
        } else {
            from.t + step * (t - from.t).signum()
        };
        match solve_p12_seeded(next, opts, &from.u) {
            Ok(s) => {
                from = s;
                step = (2.0 * step).min(T_STEP);
            }
            Err(e) if step <= T_STEP_MIN => return Err(e),
            Err(_) => step /= 2.0,
        }
    }
    Ok(from)
}

/// Solutions for several `T` by continuation from `T = 0`; output order
/// follows `ts`.
pub fn solve_p12_family(ts: &[f64], opts: &P12Options) -> Result<Vec<P12Solution>, PainleveError> {
    let base = solve_p12(0.0, opts)?;
    let mut out: Vec<Option<P12Solution>> = vec![None; ts.len()];
    for sign in [1.0, -1.0] {
        let mut idx: Vec<usize> = (0..ts.len())
            .filter(|&i| if sign > 0.0 { ts[i] >= 0.0 } else { ts[i] < 0.0 })
            .collect();
        idx.sort_by(|&a, &b| ts[a].abs().total_cmp(&ts[b].abs()));
        let mut cur = base.clone();
        for i in idx {
            validate(opts, ts[i])?;
            cur = continue_to(cur, ts[i], opts)?;
            out[i] = Some(cur.clone());
        }
    }
    Ok(out.into_iter().map(|s| s.expect("every T assigned")).collect())
}

impl P12Solution {
    pub fn nodes(&self) -> usize {
        self.u.len()
    }

    pub fn x(&self, j: usize) -> f64 {
        if j + 1 == self.u.len() {
            self.x_max
        } else {
            -self.x_max + self.h * j as f64
        }
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.u.len()).map(|j| self.x(j)).collect()
    }

    /// Quintic (six-point) local interpolation; error `O(h⁶ U⁽⁶⁾)`.
    pub fn evaluate_u(&self, x: f64) -> Result<f64, PainleveError> {
        let slack = 1e-12 * self.x_max;
        if !(x.abs() <= self.x_max + slack) {
            return Err(PainleveError::OutOfDomain { x, x_max: self.x_max });
        }
        Ok(lagrange_uniform(-self.x_max, self.h, &self.u, x.clamp(-self.x_max, self.x_max), 6))
    }

    /// `∂_X^order U` at every node from the nine-point stencils.
    pub fn derivative(&self, order: usize) -> Vec<f64> {
        let st = Stencils::new(self.u.len(), self.h, order.max(1));
        (0..self.u.len()).map(|j| st.apply(&self.u, j, order)).collect()
    }
}

/// Power-law fit of `|U(X) - asymptote(X)|` against `|X|` over nodes with
/// `lo <= |X| <= hi`.
pub fn asymptote_fit(sol: &P12Solution, lo: f64, hi: f64) -> Result<PowerFit, PainleveError> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (j, &u) in sol.u.iter().enumerate() {
        let x = sol.x(j);
        let dev = (u - asymptote(x)).abs();
        if x.abs() >= lo && x.abs() <= hi && dev > 0.0 {
            xs.push(x.abs());
            ys.push(dev);
        }
    }
    fit_power_law(&xs, &ys).map_err(|e| PainleveError::Domain(e.to_string()))
}

/// Max of `|U_T + U U_X + U_XXX/12|` at `T = t` over `|X| <= window`, with
/// `U_T` from fourth-order central differences of solves at `t ± dt, t ± 2dt`.
pub fn kdv_consistency(center: &P12Solution, dt: f64, window: f64, opts: &P12Options) -> Result<f64, PainleveError> {
    let solve = |k: f64| solve_p12_seeded(center.t + k * dt, opts, &center.u);
    let (m2, m1, p1, p2) = (solve(-2.0)?, solve(-1.0)?, solve(1.0)?, solve(2.0)?);
    let ux = center.derivative(1);
    let uxxx = center.derivative(3);
    let mut worst: f64 = 0.0;
    for j in 0..center.u.len() {
        if center.x(j).abs() <= window {
            let ut = (m2.u[j] - 8.0 * m1.u[j] + 8.0 * p1.u[j] - p2.u[j]) / (12.0 * dt);
            worst = worst.max((ut + center.u[j] * ux[j] + uxxx[j] / 12.0).abs());
        }
    }
    Ok(worst)
}
