//! Gauss–Legendre based quadrature helpers.

use gauss_quad::legendre::GaussLegendre;
use std::num::NonZeroUsize;

/// A Gauss–Legendre rule of fixed degree.
#[derive(Debug, Clone)]
pub struct GlRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GlRule {
    pub fn new(degree: usize) -> Self {
        let rule = GaussLegendre::new(NonZeroUsize::new(degree).expect("degree must be positive"));
        let (nodes, weights) = rule.as_node_weight_pairs().iter().copied().unzip();
        Self { nodes, weights }
    }

    pub fn degree(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        half * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
    }

    /// Like [`integrate`](Self::integrate) but stops at the first error.
    pub fn try_integrate<F, E>(&self, a: f64, b: f64, mut f: F) -> Result<f64, E>
    where
        F: FnMut(f64) -> Result<f64, E>,
    {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x)?;
        }
        Ok(half * acc)
    }
}

/// Composite rule on panels that shrink geometrically (ratio 1/2) toward
/// `b`, for integrands with a weak (e.g. logarithmic) singularity at `b`.
/// The last `levels` panels cover `[b - (b-a) 2^{-levels}, b]` except for a
/// final sliver of that width, which is dropped.
pub fn graded_toward_end<F, E>(rule: &GlRule, a: f64, b: f64, levels: usize, mut f: F) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let len = b - a;
    let mut acc = 0.0;
    let mut left = a;
    for j in 1..=levels {
        let right = b - len * 0.5f64.powi(j as i32);
        acc += rule.try_integrate(left, right, &mut f)?;
        left = right;
    }
    Ok(acc)
}

/// Adaptive bisection with a pair of Gauss–Legendre rules: an interval is
/// accepted when the `n`-point and `2n`-point results agree to `tol`.
pub fn adaptive<F: FnMut(f64) -> f64>(a: f64, b: f64, tol: f64, mut f: F) -> f64 {
    let coarse = GlRule::new(10);
    let fine = GlRule::new(20);
    let mut stack = vec![(a, b, tol, 0usize)];
    let mut total = 0.0;
    while let Some((lo, hi, t, depth)) = stack.pop() {
        let c = coarse.integrate(lo, hi, &mut f);
        let fv = fine.integrate(lo, hi, &mut f);
        if (c - fv).abs() <= t || depth >= 40 {
            total += fv;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, 0.5 * t, depth + 1));
            stack.push((mid, hi, 0.5 * t, depth + 1));
        }
    }
    total
}
