//! Local Lagrange interpolation on uniform grids.

/// Evaluates the degree-`points-1` Lagrange interpolant of `values`
/// (sampled at `x0 + j h`) at `x`, using the `points` nodes centred on `x`.
/// Near the ends the stencil is shifted inward.
pub fn lagrange_uniform(x0: f64, h: f64, values: &[f64], x: f64, points: usize) -> f64 {
    let n = values.len();
    assert!(n >= points && points >= 2);
    let s = (x - x0) / h;
    let nearest = s.round();
    if (s - nearest).abs() < 1e-12 && nearest >= 0.0 && (nearest as usize) < n {
        return values[nearest as usize];
    }
    let base = s.floor() as i64 - (points as i64 / 2 - 1);
    let start = base.clamp(0, (n - points) as i64) as usize;
    let mut acc = 0.0;
    for j in 0..points {
        let mut w = 1.0;
        let sj = (start + j) as f64;
        for m in 0..points {
            if m != j {
                let sm = (start + m) as f64;
                w *= (s - sm) / (sj - sm);
            }
        }
        acc += w * values[start + j];
    }
    acc
}
