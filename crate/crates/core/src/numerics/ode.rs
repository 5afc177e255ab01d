//! Adaptive Dormand–Prince 5(4) integration of complex first-order systems
//! in a real marching parameter.

use num_complex::Complex64;
use std::ops::ControlFlow;

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct DormandPrince {
    /// Local error allowed per unit of marching length (mixed abs/rel).
    pub tol_per_length: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
}

impl Default for DormandPrince {
    fn default() -> Self {
        Self {
            tol_per_length: 1e-10,
            h_init: 1e-3,
            h_min: 1e-14,
            h_max: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MarchEnd {
    /// Reached the requested end of the interval.
    Completed,
    /// The step callback asked to stop.
    Stopped,
    /// Step size collapsed below `h_min` (typically a singularity).
    StepCollapse { s: f64 },
    /// Non-finite values appeared.
    NonFinite { s: f64 },
}

impl DormandPrince {
    /// Marches `y' = f(s, y)` from `s0` to `s_end`. `on_step` is invoked
    /// after every accepted step with `(s, y, h)`.
    pub fn integrate<F, G>(
        &self,
        mut f: F,
        s0: f64,
        y0: &[Complex64],
        s_end: f64,
        mut on_step: G,
    ) -> (MarchEnd, f64, Vec<Complex64>)
    where
        F: FnMut(f64, &[Complex64]) -> Vec<Complex64>,
        G: FnMut(f64, &[Complex64], f64) -> ControlFlow<()>,
    {
        let dim = y0.len();
        let mut s = s0;
        let mut y = y0.to_vec();
        let mut h = self.h_init.min(self.h_max).min(s_end - s0);
        let mut k: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); dim]; 7];
        k[0] = f(s, &y);
        let mut tmp = vec![Complex64::new(0.0, 0.0); dim];
        while s < s_end {
            if s + h > s_end {
                h = s_end - s;
            }
            for stage in 1..7 {
                for i in 0..dim {
                    let mut acc = y[i];
                    for (j, a) in A[stage].iter().enumerate().take(stage) {
                        acc += k[j][i] * (h * a);
                    }
                    tmp[i] = acc;
                }
                k[stage] = f(s + C[stage] * h, &tmp);
            }
            let mut y5 = vec![Complex64::new(0.0, 0.0); dim];
            let mut err: f64 = 0.0;
            for i in 0..dim {
                let mut hi = y[i];
                let mut lo = y[i];
                for j in 0..7 {
                    hi += k[j][i] * (h * B5[j]);
                    lo += k[j][i] * (h * B4[j]);
                }
                y5[i] = hi;
                let scale = 1.0 + y[i].norm().max(hi.norm());
                err = err.max((hi - lo).norm() / scale);
            }
            if !err.is_finite() || y5.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
                if h <= self.h_min {
                    return (MarchEnd::NonFinite { s }, s, y);
                }
                h *= 0.25;
                continue;
            }
            // floor at a few ulps so tiny steps are not rejected on roundoff alone
            let allowed = (self.tol_per_length * h).max(64.0 * f64::EPSILON);
            if err <= allowed || h <= self.h_min {
                if err > allowed {
                    return (MarchEnd::StepCollapse { s }, s, y);
                }
                s += h;
                y = y5;
                // FSAL: the last stage was evaluated at the accepted point
                k[0] = std::mem::take(&mut k[6]);
                k[6] = vec![Complex64::new(0.0, 0.0); dim];
                if let ControlFlow::Break(()) = on_step(s, &y, h) {
                    return (MarchEnd::Stopped, s, y);
                }
                let fac = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * (allowed / err).powf(0.2)).clamp(0.2, 5.0)
                };
                h = (h * fac).min(self.h_max);
            } else {
                let fac = (0.9 * (allowed / err).powf(0.25)).clamp(0.1, 0.9);
                h *= fac;
                if h < self.h_min {
                    h = self.h_min;
                }
            }
        }
        (MarchEnd::Completed, s, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_complex_oscillator() {
        // y' = i y, y(0) = 1  ->  y(s) = e^{is}
        let dp = DormandPrince {
            tol_per_length: 1e-12,
            ..Default::default()
        };
        let (end, s, y) = dp.integrate(
            |_, y| vec![Complex64::i() * y[0]],
            0.0,
            &[Complex64::new(1.0, 0.0)],
            3.0,
            |_, _, _| ControlFlow::Continue(()),
        );
        assert_eq!(end, MarchEnd::Completed);
        assert!((s - 3.0).abs() < 1e-14);
        let exact = Complex64::new(3.0f64.cos(), 3.0f64.sin());
        assert!((y[0] - exact).norm() < 1e-10);
    }

    #[test]
    fn detects_finite_time_blow_up() {
        // y' = y^2, y(0) = 1 blows up at s = 1
        let dp = DormandPrince::default();
        let (end, s, _) = dp.integrate(
            |_, y| vec![y[0] * y[0]],
            0.0,
            &[Complex64::new(1.0, 0.0)],
            2.0,
            |_, y, _| {
                if y[0].norm() > 1e8 {
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            },
        );
        assert_eq!(end, MarchEnd::Stopped);
        assert!((s - 1.0).abs() < 1e-6);
    }
}
