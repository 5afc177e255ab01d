//! Fourth-order exponential time differencing Runge–Kutta (Cox–Matthews)
//! for `v_t = L v + N(v)` with diagonal `L` in Fourier space.

use super::grid::Spectral;
use super::spec::{EvolutionSpec, NonlinearPart, RealNonlinear};
use num_complex::Complex64;

/// `(φ1, φ2, φ3)(z)`, by Taylor series for small `|z|`.
pub fn phi_functions(z: Complex64) -> (Complex64, Complex64, Complex64) {
    if z.norm() < 1.0 {
        let mut p = [Complex64::new(0.0, 0.0); 3];
        // φ_k(z) = Σ_j z^j / (j+k)!
        for (k, slot) in p.iter_mut().enumerate() {
            let mut term = Complex64::new(1.0 / factorial(k + 1), 0.0);
            let mut sum = term;
            for j in 1..30 {
                term = term * z / (j + k + 1) as f64;
                sum += term;
            }
            *slot = sum;
        }
        (p[0], p[1], p[2])
    } else {
        let ez = z.exp();
        let p1 = (ez - 1.0) / z;
        let p2 = (p1 - 1.0) / z;
        let p3 = (p2 - 0.5) / z;
        (p1, p2, p3)
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

#[derive(Debug, Clone)]
pub struct Etdrk4Coefficients {
    pub h: f64,
    pub eps: f64,
    e: Vec<Complex64>,
    e2: Vec<Complex64>,
    q: Vec<Complex64>,
    f1: Vec<Complex64>,
    f2: Vec<Complex64>,
    f3: Vec<Complex64>,
}

impl Etdrk4Coefficients {
    pub fn new(spec: &EvolutionSpec, sp: &Spectral, eps: f64, h: f64) -> Self {
        let n = sp.n();
        let mut c = Self {
            h,
            eps,
            e: Vec::with_capacity(n),
            e2: Vec::with_capacity(n),
            q: Vec::with_capacity(n),
            f1: Vec::with_capacity(n),
            f2: Vec::with_capacity(n),
            f3: Vec::with_capacity(n),
        };
        for &k in sp.wavenumbers() {
            let l = spec.symbol(k, eps);
            let z = l * h;
            let (p1, p2, p3) = phi_functions(z);
            let (h1, _, _) = phi_functions(z * 0.5);
            c.e.push(z.exp());
            c.e2.push((z * 0.5).exp());
            c.q.push(h1 * (0.5 * h));
            c.f1.push((p1 - p2 * 3.0 + p3 * 4.0) * h);
            c.f2.push((p2 - p3 * 2.0) * h);
            c.f3.push((p3 * 4.0 - p2) * h);
        }
        c
    }
}

fn eval_nonlinear(nl: &RealNonlinear, v: &[Complex64], sp: &Spectral, eps: f64) -> Vec<Complex64> {
    let u = sp.inverse_real(v);
    let mut out = nl(&u, sp, eps);
    sp.dealias(&mut out);
    out
}

/// Advances Fourier coefficients `v` by one step of size `coeffs.h`.
pub fn etdrk4_step(v: &mut [Complex64], spec: &EvolutionSpec, sp: &Spectral, coeffs: &Etdrk4Coefficients) {
    let NonlinearPart::Real(nl) = spec.nonlinear() else {
        panic!("ETDRK4 is used for real equations only");
    };
    let eps = coeffs.eps;
    let n = v.len();
    let nv = eval_nonlinear(nl, v, sp, eps);
    let a: Vec<Complex64> = (0..n).map(|i| coeffs.e2[i] * v[i] + coeffs.q[i] * nv[i]).collect();
    let na = eval_nonlinear(nl, &a, sp, eps);
    let b: Vec<Complex64> = (0..n).map(|i| coeffs.e2[i] * v[i] + coeffs.q[i] * na[i]).collect();
    let nb = eval_nonlinear(nl, &b, sp, eps);
    let c: Vec<Complex64> = (0..n)
        .map(|i| coeffs.e2[i] * a[i] + coeffs.q[i] * (nb[i] * 2.0 - nv[i]))
        .collect();
    let nc = eval_nonlinear(nl, &c, sp, eps);
    for i in 0..n {
        v[i] = coeffs.e[i] * v[i] + coeffs.f1[i] * nv[i] + coeffs.f2[i] * (na[i] + nb[i]) * 2.0 + coeffs.f3[i] * nc[i];
    }
}
