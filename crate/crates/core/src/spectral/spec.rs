//! Equation specifications: a diagonal linear part (Fourier multiplier) and
//! a nonlinear remainder.
//!
//! Fourier convention: `u(x) = Σ û_ξ exp(iπξx/L)`, so `∂_x` acts as `ik`
//! with `k = πξ/L`. Linear symbols:
//!
//! | equation | `u_t =` | symbol |
//! |---|---|---|
//! | KdV | `-6uu_x - ε²u_xxx` | `iε²k³` |
//! | Kawahara | `-6uu_x - ε²u_xxx + ε⁴u_5x` | `iε²k³ + iε⁴k⁵` |
//! | gKdV n | `-6uⁿu_x - ε²u_xxx` | `iε²k³` |
//! | flow m | `(-1)^m ∂L_m` | `iε^{2m}k^{2m+1}` |
//! | NLS | `(iε/2)ψ_xx ± (i/ε)|ψ|²ψ` | `-iεk²/2` |

use super::grid::Spectral;
use super::SpectralError;
use crate::diffpoly::{compile_evaluator, hierarchy_flow, DiffPoly, MAX_LENARD};
use num_complex::Complex64;
use num_traits::ToPrimitive;
use std::fmt;
use std::sync::Arc;

/// `(k, eps) -> growth rate` of a Fourier mode.
pub type SymbolFn = Arc<dyn Fn(f64, f64) -> Complex64 + Send + Sync>;
/// `(samples, spectral, eps) -> Fourier coefficients of the nonlinear term`.
pub type RealNonlinear = Arc<dyn Fn(&[f64], &Spectral, f64) -> Vec<Complex64> + Send + Sync>;

#[derive(Clone)]
pub enum NonlinearPart {
    Real(RealNonlinear),
    /// Cubic NLS phase `±(i/ε)|ψ|²ψ`, applied exactly by splitting.
    Nls { focusing: bool },
}

#[derive(Clone)]
pub struct EvolutionSpec {
    label: String,
    symbol: SymbolFn,
    nonlinear: NonlinearPart,
}

impl fmt::Debug for EvolutionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EvolutionSpec").field("label", &self.label).finish()
    }
}

/// Built-in equation names.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equation {
    Kdv,
    Hierarchy(usize),
    Kawahara,
    Gkdv(u32),
    NlsFocusing,
    NlsDefocusing,
}

impl Equation {
    /// Accepts `kdv`, `kdv_hierarchy_<m>`, `kawahara`, `gkdv_<n>`,
    /// `nls_focusing`, `nls_defocusing`.
    pub fn parse(name: &str) -> Result<Self, SpectralError> {
        let unknown = || SpectralError::UnknownEquation(name.to_string());
        match name {
            "kdv" => Ok(Equation::Kdv),
            "kawahara" => Ok(Equation::Kawahara),
            "nls_focusing" => Ok(Equation::NlsFocusing),
            "nls_defocusing" => Ok(Equation::NlsDefocusing),
            _ => {
                if let Some(m) = name.strip_prefix("kdv_hierarchy_") {
                    let m: usize = m.parse().map_err(|_| unknown())?;
                    if (1..=MAX_LENARD).contains(&m) {
                        return Ok(Equation::Hierarchy(m));
                    }
                } else if let Some(n) = name.strip_prefix("gkdv_") {
                    let n: u32 = n.parse().map_err(|_| unknown())?;
                    if n >= 1 {
                        return Ok(Equation::Gkdv(n));
                    }
                }
                Err(unknown())
            }
        }
    }

    pub fn is_nls(&self) -> bool {
        matches!(self, Equation::NlsFocusing | Equation::NlsDefocusing)
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Equation::Kdv => write!(f, "kdv"),
            Equation::Hierarchy(m) => write!(f, "kdv_hierarchy_{m}"),
            Equation::Kawahara => write!(f, "kawahara"),
            Equation::Gkdv(n) => write!(f, "gkdv_{n}"),
            Equation::NlsFocusing => write!(f, "nls_focusing"),
            Equation::NlsDefocusing => write!(f, "nls_defocusing"),
        }
    }
}

fn ik_pow(k: f64, j: u32) -> Complex64 {
    Complex64::new(0.0, k).powu(j)
}

impl EvolutionSpec {
    /// Rejects symbols with a real part (non-conservative linear parts).
    pub fn new(label: impl Into<String>, symbol: SymbolFn, nonlinear: NonlinearPart) -> Result<Self, SpectralError> {
        let label = label.into();
        for &k in &[0.0, 0.37, -1.9, 3.1, 12.5, -40.0] {
            for &eps in &[0.05, 0.3, 1.0] {
                let s = symbol(k, eps);
                if s.re.abs() > 1e-12 * s.norm().max(1.0) {
                    return Err(SpectralError::NonConservative { label, k });
                }
            }
        }
        Ok(Self {
            label,
            symbol,
            nonlinear,
        })
    }

    pub fn builtin(eq: Equation) -> Self {
        let kdv_symbol: SymbolFn = Arc::new(|k, eps| Complex64::new(0.0, eps * eps * k * k * k));
        let (symbol, nonlinear): (SymbolFn, NonlinearPart) = match eq {
            Equation::Kdv => (kdv_symbol, NonlinearPart::Real(Arc::new(kdv_flux))),
            Equation::Kawahara => (
                Arc::new(|k, eps| Complex64::new(0.0, eps * eps * k.powi(3) + eps.powi(4) * k.powi(5))),
                NonlinearPart::Real(Arc::new(kdv_flux)),
            ),
            Equation::Gkdv(n) => (
                kdv_symbol,
                NonlinearPart::Real(Arc::new(move |u, sp, _| {
                    // -6 u^n u_x = -6/(n+1) ∂(u^{n+1})
                    let w: Vec<f64> = u.iter().map(|v| v.powi(n as i32 + 1)).collect();
                    let c = sp.forward_real(&w);
                    let s = -6.0 / (n as f64 + 1.0);
                    sp.apply_derivative(&c, 1).into_iter().map(|z| z * s).collect()
                })),
            ),
            Equation::Hierarchy(m) => {
                let flow = hierarchy_flow(m).expect("index validated by Equation::parse");
                return Self::from_diffpoly(format!("{eq}"), &flow);
            }
            Equation::NlsFocusing | Equation::NlsDefocusing => (
                Arc::new(|k, eps| Complex64::new(0.0, -0.5 * eps * k * k)),
                NonlinearPart::Nls {
                    focusing: eq == Equation::NlsFocusing,
                },
            ),
        };
        Self::new(eq.to_string(), symbol, nonlinear).expect("built-in symbols are conservative")
    }

    /// Splits `u_t = p` into its linear monomials (the symbol) and the rest.
    pub fn from_diffpoly(label: impl Into<String>, p: &DiffPoly) -> Self {
        let mut linear: Vec<(f64, i32, u32)> = Vec::new();
        let mut rest = DiffPoly::zero();
        for m in p.monomials() {
            if m.degree() == 1 {
                linear.push((m.coeff.to_f64().unwrap_or(f64::NAN), m.eps_power as i32, m.factors[0]));
            } else {
                rest = rest.add(&DiffPoly::from_monomials([m]));
            }
        }
        let symbol: SymbolFn = Arc::new(move |k, eps| {
            linear
                .iter()
                .map(|&(c, e, j)| ik_pow(k, j) * (c * eps.powi(e)))
                .sum()
        });
        let compiled = compile_evaluator(&rest);
        let nonlinear: RealNonlinear = Arc::new(move |u, sp, eps| sp.forward_real(&compiled.evaluate(u, sp, eps)));
        Self {
            label: label.into(),
            symbol,
            nonlinear: NonlinearPart::Real(nonlinear),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn symbol(&self, k: f64, eps: f64) -> Complex64 {
        (self.symbol)(k, eps)
    }

    pub fn nonlinear(&self) -> &NonlinearPart {
        &self.nonlinear
    }

    pub fn is_nls(&self) -> bool {
        matches!(self.nonlinear, NonlinearPart::Nls { .. })
    }

    /// Full right-hand side `u_t` on the grid (real equations only).
    pub fn rhs(&self, u: &[f64], sp: &Spectral, eps: f64) -> Option<Vec<f64>> {
        let NonlinearPart::Real(nl) = &self.nonlinear else {
            return None;
        };
        let c = sp.forward_real(u);
        let mut total = nl(u, sp, eps);
        for ((t, ch), &k) in total.iter_mut().zip(&c).zip(sp.wavenumbers()) {
            *t += self.symbol(k, eps) * ch;
        }
        Some(sp.inverse_real(&total))
    }
}

/// `-6uu_x` in conservative form `-3∂(u²)`.
fn kdv_flux(u: &[f64], sp: &Spectral, _eps: f64) -> Vec<Complex64> {
    let sq: Vec<f64> = u.iter().map(|v| v * v).collect();
    let c = sp.forward_real(&sq);
    sp.apply_derivative(&c, 1).into_iter().map(|z| z * -3.0).collect()
}

/// Pointwise coefficient functions `c(u)` (with `c', c''`) and `p(u)` (with
/// `p', p'', p'''`) of the general dispersive family.
#[derive(Clone)]
pub struct HampertCoefficients {
    pub c: Arc<dyn Fn(f64) -> [f64; 3] + Send + Sync>,
    pub p: Arc<dyn Fn(f64) -> [f64; 4] + Send + Sync>,
}

impl fmt::Debug for HampertCoefficients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("HampertCoefficients")
    }
}

impl HampertCoefficients {
    pub fn constant(c: f64, p: f64) -> Self {
        Self {
            c: Arc::new(move |_| [c, 0.0, 0.0]),
            p: Arc::new(move |_| [p, 0.0, 0.0, 0.0]),
        }
    }

    /// `c ≡ 12, p ≡ 0` gives KdV.
    pub fn kdv() -> Self {
        Self::constant(12.0, 0.0)
    }

    /// Named presets: `kdv`, `const:<c>,<p>`, `linear_c:<a>` (`c = 12 + a u`).
    pub fn preset(name: &str) -> Option<Self> {
        if name == "kdv" {
            return Some(Self::kdv());
        }
        if let Some(args) = name.strip_prefix("const:") {
            let (c, p) = args.split_once(',')?;
            return Some(Self::constant(c.trim().parse().ok()?, p.trim().parse().ok()?));
        }
        if let Some(a) = name.strip_prefix("linear_c:") {
            let a: f64 = a.trim().parse().ok()?;
            return Some(Self {
                c: Arc::new(move |u| [12.0 + a * u, a, 0.0]),
                p: Arc::new(|_| [0.0; 4]),
            });
        }
        None
    }
}

/// `u_t` of the general family, from precomputed derivatives `d[j] = ∂^j u`.
pub fn hampert_rhs_from_derivatives(d: &[Vec<f64>], eps: f64, coeffs: &HampertCoefficients) -> Vec<f64> {
    let e2 = eps * eps;
    let e4 = e2 * e2;
    (0..d[0].len())
        .map(|i| {
            let (u, u1, u2, u3, u4, u5) = (d[0][i], d[1][i], d[2][i], d[3][i], d[4][i], d[5][i]);
            let [c, c1, c2] = (coeffs.c)(u);
            let [p, p1, p2, p3] = (coeffs.p)(u);
            let second = 2.0 * c * u3 + 4.0 * c1 * u1 * u2 + c2 * u1 * u1 * u1;
            let fourth = 2.0 * p * u5
                + 2.0 * p1 * (5.0 * u2 * u3 + 3.0 * u1 * u4)
                + p2 * (7.0 * u1 * u2 * u2 + 6.0 * u1 * u1 * u3)
                + 2.0 * p3 * u1 * u1 * u1 * u2;
            -6.0 * u * u1 - e2 / 24.0 * second - e4 * fourth
        })
        .collect()
}

/// `u_t` of the general family with spectral derivatives.
pub fn hampert_rhs(u: &[f64], sp: &Spectral, eps: f64, coeffs: &HampertCoefficients) -> Vec<f64> {
    use crate::diffpoly::Differentiator;
    hampert_rhs_from_derivatives(&sp.derivatives(u, 5), eps, coeffs)
}

/// Evolution spec for the general family; the linear part is frozen at `u = 0`.
pub fn hampert_spec(coeffs: HampertCoefficients) -> EvolutionSpec {
    let c0 = (coeffs.c)(0.0)[0];
    let p0 = (coeffs.p)(0.0)[0];
    let symbol: SymbolFn = Arc::new(move |k, eps| {
        Complex64::new(0.0, eps * eps * c0 / 12.0 * k.powi(3) - 2.0 * eps.powi(4) * p0 * k.powi(5))
    });
    let sym = symbol.clone();
    let nonlinear: RealNonlinear = Arc::new(move |u, sp, eps| {
        let full = sp.forward_real(&hampert_rhs(u, sp, eps, &coeffs));
        let c = sp.forward_real(u);
        full.iter()
            .zip(&c)
            .zip(sp.wavenumbers())
            .map(|((f, ch), &k)| f - sym(k, eps) * ch)
            .collect()
    });
    EvolutionSpec {
        label: "hampert".into(),
        symbol,
        nonlinear: NonlinearPart::Real(nonlinear),
    }
}
