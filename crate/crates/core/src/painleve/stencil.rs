//! Nine-point finite-difference stencils on a uniform grid, shifted
//! one-sided near the ends.

use crate::numerics::fd::uniform_weights;

pub(crate) const WIDTH: usize = 9;
const HALF: usize = WIDTH / 2;

/// Weights for derivative orders `0..=max_order` on every window position.
pub(crate) struct Stencils {
    /// `weights[shift][order]`, where `shift = j - start` is the position of
    /// the evaluation node inside the window.
    weights: Vec<Vec<Vec<f64>>>,
    nodes: usize,
}

impl Stencils {
    pub(crate) fn new(nodes: usize, h: f64, max_order: usize) -> Self {
        assert!(nodes >= WIDTH);
        let weights = (0..WIDTH)
            .map(|shift| {
                let offsets: Vec<i64> = (0..WIDTH as i64).map(|m| m - shift as i64).collect();
                (0..=max_order).map(|o| uniform_weights(&offsets, o, h)).collect()
            })
            .collect();
        Self { weights, nodes }
    }

    /// First node of the window used at node `j`.
    pub(crate) fn start(&self, j: usize) -> usize {
        j.saturating_sub(HALF).min(self.nodes - WIDTH)
    }

    pub(crate) fn weights(&self, j: usize, order: usize) -> (usize, &[f64]) {
        let s = self.start(j);
        (s, &self.weights[j - s][order])
    }

    pub(crate) fn apply(&self, v: &[f64], j: usize, order: usize) -> f64 {
        let (s, w) = self.weights(j, order);
        w.iter().zip(&v[s..s + WIDTH]).map(|(a, b)| a * b).sum()
    }
}
