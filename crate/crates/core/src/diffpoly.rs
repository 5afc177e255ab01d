//! Differential polynomials in `u, u_x, u_{2x}, ...` with exact rational
//! coefficients and an even power of `ε` per term.
//!
//! The Lenard recursion `∂L_m = (ε²∂³ + 4u∂ + 2u_x) L_{m-1}` with `L_0 = u`
//! is run exactly, inverting `∂` by [`formal_antiderivative`]; the flows of
//! the KdV hierarchy are `u_t = (-1)^m ∂L_m`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

/// Highest Lenard index supported by [`lenard`].
pub const MAX_LENARD: usize = 6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DiffPolyError {
    #[error("not a total x-derivative; remainder {remainder}")]
    NotExact { remainder: String },
    #[error("index {m} outside the supported range {lo}..={hi}")]
    Index { m: usize, lo: usize, hi: usize },
}

/// `(eps_power, sorted factor orders)`.
type Key = (u32, Vec<u32>);

/// One term `coeff * ε^eps_power * Π u_{j x}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffMonomial {
    pub coeff: BigRational,
    pub eps_power: u32,
    pub factors: Vec<u32>,
}

impl DiffMonomial {
    pub fn max_order(&self) -> Option<u32> {
        self.factors.last().copied()
    }

    pub fn degree(&self) -> usize {
        self.factors.len()
    }
}

/// A differential polynomial in canonical form: terms keyed by
/// `(eps_power, factors)` with no zero coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DiffPoly {
    terms: BTreeMap<Key, BigRational>,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl DiffPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: i64) -> Self {
        let mut p = Self::zero();
        p.add_term(rat(c), 0, Vec::new());
        p
    }

    /// The single factor `u_{j x}`.
    pub fn u(j: u32) -> Self {
        let mut p = Self::zero();
        p.add_term(rat(1), 0, vec![j]);
        p
    }

    pub fn from_monomials(monomials: impl IntoIterator<Item = DiffMonomial>) -> Self {
        let mut p = Self::zero();
        for m in monomials {
            p.add_term(m.coeff, m.eps_power, m.factors);
        }
        p
    }

    /// Builds from `(numerator, eps_power, factors)` triples with integer coefficients.
    pub fn from_integer_terms(terms: &[(i64, u32, &[u32])]) -> Self {
        let mut p = Self::zero();
        for &(c, e, f) in terms {
            p.add_term(rat(c), e, f.to_vec());
        }
        p
    }

    fn add_term(&mut self, coeff: BigRational, eps_power: u32, mut factors: Vec<u32>) {
        if coeff.is_zero() {
            return;
        }
        factors.sort_unstable();
        let key = (eps_power, factors);
        let entry = self.terms.entry(key.clone()).or_insert_with(BigRational::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical order (by ε power, then factor list).
    pub fn monomials(&self) -> impl Iterator<Item = DiffMonomial> + '_ {
        self.terms.iter().map(|((e, f), c)| DiffMonomial {
            coeff: c.clone(),
            eps_power: *e,
            factors: f.clone(),
        })
    }

    pub fn coefficient(&self, eps_power: u32, factors: &[u32]) -> BigRational {
        let mut f = factors.to_vec();
        f.sort_unstable();
        self.terms.get(&(eps_power, f)).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn max_order(&self) -> Option<u32> {
        self.terms.keys().filter_map(|(_, f)| f.last().copied()).max()
    }

    /// Whether `eps_power + Σ orders` has the same parity in every term.
    pub fn uniform_parity(&self) -> Option<u32> {
        let mut parity = None;
        for (e, f) in self.terms.keys() {
            let p = (e + f.iter().sum::<u32>()) % 2;
            match parity {
                None => parity = Some(p),
                Some(q) if q != p => return None,
                _ => {}
            }
        }
        parity.or(Some(0))
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut p = Self::zero();
        for ((e, f), k) in &self.terms {
            p.add_term(k * c, *e, f.clone());
        }
        p
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut p = self.clone();
        for ((e, f), k) in &other.terms {
            p.add_term(k.clone(), *e, f.clone());
        }
        p
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&rat(-1)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut p = Self::zero();
        for ((e1, f1), k1) in &self.terms {
            for ((e2, f2), k2) in &other.terms {
                let mut f = f1.clone();
                f.extend_from_slice(f2);
                p.add_term(k1 * k2, e1 + e2, f);
            }
        }
        p
    }

    /// Multiplies by `ε^k`.
    pub fn shift_eps(&self, k: u32) -> Self {
        let mut p = Self::zero();
        for ((e, f), c) in &self.terms {
            p.add_term(c.clone(), e + k, f.clone());
        }
        p
    }

    /// Evaluates at `u ≡ 0` (the constant term).
    pub fn constant_term(&self) -> BigRational {
        self.terms
            .iter()
            .filter(|((_, f), _)| f.is_empty())
            .map(|(_, c)| c.clone())
            .fold(BigRational::zero(), |a, b| a + b)
    }

    /// Text form `c * eps^k * u * u_{jx}^p ...`, one term per summand.
    pub fn to_text(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, m) in self.monomials().enumerate() {
            let neg = m.coeff.is_negative();
            let mag = m.coeff.abs();
            match (i, neg) {
                (0, true) => out.push('-'),
                (0, false) => {}
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            out.push_str(&mag.to_string());
            if m.eps_power > 0 {
                out.push_str(&format!(" * eps^{}", m.eps_power));
            }
            let mut j = 0;
            while j < m.factors.len() {
                let order = m.factors[j];
                let mut power = 1;
                while j + power < m.factors.len() && m.factors[j + power] == order {
                    power += 1;
                }
                out.push_str(" * ");
                if order == 0 {
                    out.push('u');
                } else {
                    out.push_str(&format!("u_{{{order}x}}"));
                }
                if power > 1 {
                    out.push_str(&format!("^{power}"));
                }
                j += power;
            }
        }
        out
    }

    /// Machine-readable term list.
    pub fn to_terms(&self) -> Vec<TermRecord> {
        self.monomials()
            .map(|m| TermRecord {
                coeff: m.coeff.to_string(),
                eps_power: m.eps_power,
                factors: m.factors,
            })
            .collect()
    }
}

impl fmt::Display for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TermRecord {
    /// Exact rational as `p` or `p/q`.
    pub coeff: String,
    pub eps_power: u32,
    pub factors: Vec<u32>,
}

/// Total x-derivative by the Leibniz rule.
pub fn total_x_derivative(p: &DiffPoly) -> DiffPoly {
    let mut out = DiffPoly::zero();
    for ((e, f), c) in &p.terms {
        for i in 0..f.len() {
            if i > 0 && f[i] == f[i - 1] {
                continue;
            }
            let mult = f.iter().filter(|&&o| o == f[i]).count() as i64;
            let mut g = f.clone();
            g[i] += 1;
            out.add_term(c * rat(mult), *e, g);
        }
    }
    out
}

/// `ε² ∂³p + 4u ∂p + 2u_x p`.
pub fn lenard_apply(p: &DiffPoly) -> DiffPoly {
    let d1 = total_x_derivative(p);
    let d3 = total_x_derivative(&total_x_derivative(&d1));
    let four_u = DiffPoly::u(0).scale(&rat(4));
    let two_ux = DiffPoly::u(1).scale(&rat(2));
    d3.shift_eps(2).add(&four_u.mul(&d1)).add(&two_ux.mul(p))
}

/// `q` with `∂q = p` and no constant term.
pub fn formal_antiderivative(p: &DiffPoly) -> Result<DiffPoly, DiffPolyError> {
    let mut rest = p.clone();
    let mut q = DiffPoly::zero();
    let not_exact = |r: &DiffPoly| DiffPolyError::NotExact { remainder: r.to_text() };
    while let Some(top) = rest.max_order() {
        if top == 0 {
            return Err(not_exact(&rest));
        }
        let ((e, f), c) = rest
            .terms
            .iter()
            .find(|((_, f), _)| f.last() == Some(&top))
            .map(|(k, c)| (k.clone(), c.clone()))
            .expect("a term attains the maximal order");
        if f.iter().filter(|&&o| o == top).count() != 1 {
            return Err(not_exact(&rest));
        }
        // c * R * u_{J-1}^s * u_J  ->  c/(s+1) * R * u_{J-1}^{s+1}
        let s = f.iter().filter(|&&o| o == top - 1).count() as i64;
        let mut g: Vec<u32> = f.iter().copied().filter(|&o| o != top && o != top - 1).collect();
        g.extend(std::iter::repeat(top - 1).take(s as usize + 1));
        let mut candidate = DiffPoly::zero();
        candidate.add_term(c / rat(s + 1), e, g);
        rest = rest.sub(&total_x_derivative(&candidate));
        q = q.add(&candidate);
    }
    if !rest.is_zero() {
        return Err(not_exact(&rest));
    }
    Ok(q)
}

/// The Lenard iterate `L_m`, `0 <= m <= MAX_LENARD`.
pub fn lenard(m: usize) -> Result<DiffPoly, DiffPolyError> {
    if m > MAX_LENARD {
        return Err(DiffPolyError::Index {
            m,
            lo: 0,
            hi: MAX_LENARD,
        });
    }
    let mut l = DiffPoly::u(0);
    for _ in 0..m {
        l = formal_antiderivative(&lenard_apply(&l))?;
    }
    Ok(l)
}

/// Right-hand side `R_m = (-1)^m ∂L_m` of the m-th flow `u_t = R_m`.
pub fn hierarchy_flow(m: usize) -> Result<DiffPoly, DiffPolyError> {
    if m == 0 || m > MAX_LENARD {
        return Err(DiffPolyError::Index {
            m,
            lo: 1,
            hi: MAX_LENARD,
        });
    }
    let d = total_x_derivative(&lenard(m)?);
    Ok(if m % 2 == 0 { d } else { d.scale(&rat(-1)) })
}

/// Source of x-derivatives of grid samples, `out[j]` being `∂^j u`.
pub trait Differentiator {
    fn derivatives(&self, samples: &[f64], max_order: usize) -> Vec<Vec<f64>>;
}

/// Floating-point form of a [`DiffPoly`] for pointwise grid evaluation.
#[derive(Debug, Clone)]
pub struct CompiledPoly {
    /// `(coeff, eps_power, [(order, power)])`
    terms: Vec<(f64, i32, Vec<(usize, i32)>)>,
    max_order: usize,
}

pub fn compile_evaluator(p: &DiffPoly) -> CompiledPoly {
    let mut terms = Vec::new();
    for m in p.monomials() {
        let mut grouped: Vec<(usize, i32)> = Vec::new();
        for &o in &m.factors {
            match grouped.last_mut() {
                Some((last, pow)) if *last == o as usize => *pow += 1,
                _ => grouped.push((o as usize, 1)),
            }
        }
        terms.push((m.coeff.to_f64().unwrap_or(f64::NAN), m.eps_power as i32, grouped));
    }
    CompiledPoly {
        terms,
        max_order: p.max_order().unwrap_or(0) as usize,
    }
}

impl CompiledPoly {
    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// Evaluates from precomputed derivatives `derivs[j] = ∂^j u`.
    pub fn evaluate_with(&self, derivs: &[Vec<f64>], n: usize, eps: f64) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (c, e, factors) in &self.terms {
            let w = c * eps.powi(*e);
            for (i, o) in out.iter_mut().enumerate() {
                let mut v = w;
                for &(order, pow) in factors {
                    v *= derivs[order][i].powi(pow);
                }
                *o += v;
            }
        }
        out
    }

    pub fn evaluate<D: Differentiator + ?Sized>(&self, samples: &[f64], diff: &D, eps: f64) -> Vec<f64> {
        if self.terms.is_empty() {
            return vec![0.0; samples.len()];
        }
        let derivs = diff.derivatives(samples, self.max_order);
        self.evaluate_with(&derivs, samples.len(), eps)
    }
}
