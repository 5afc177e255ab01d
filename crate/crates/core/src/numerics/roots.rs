//! Scalar root finding and maximisation.

/// Safeguarded Newton iteration on a bracket `[a, b]` with `f(a) f(b) <= 0`
/// (the classic `rtsafe` scheme). `fdf` returns `(f, f')`; a bisection step
/// is taken whenever Newton would leave the bracket or converge too slowly.
pub fn newton_bisect<F>(mut fdf: F, a: f64, b: f64, xtol: f64, ftol: f64) -> Option<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (fa, _) = fdf(a);
    let (fb, _) = fdf(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return None;
    }
    // f(lo) < 0 < f(hi)
    let (mut lo, mut hi) = if fa < 0.0 { (a, b) } else { (b, a) };
    let mut x = 0.5 * (a + b);
    let mut dx_old = (b - a).abs();
    let mut dx = dx_old;
    let (mut f, mut df) = fdf(x);
    for _ in 0..500 {
        let newton_out = ((x - hi) * df - f) * ((x - lo) * df - f) > 0.0;
        let too_slow = (2.0 * f).abs() > (dx_old * df).abs();
        if newton_out || too_slow || df == 0.0 {
            dx_old = dx;
            dx = 0.5 * (hi - lo);
            x = lo + dx;
        } else {
            dx_old = dx;
            dx = f / df;
            x -= dx;
        }
        if dx.abs() <= xtol * (1.0 + x.abs()) {
            return Some(x);
        }
        (f, df) = fdf(x);
        if f == 0.0 || f.abs() < ftol {
            return Some(x);
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
    }
    Some(x)
}

/// Golden-section search for a maximum of `f` on `[a, b]`.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
