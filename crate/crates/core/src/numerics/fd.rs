//! Finite-difference weights on arbitrary stencils (Fornberg's recursion).

/// Weights `w[j]` such that `f^{(order)}(x0) ≈ Σ w[j] f(nodes[j])`.
pub fn fornberg_weights(x0: f64, nodes: &[f64], order: usize) -> Vec<f64> {
    let n = nodes.len();
    assert!(n > order, "stencil too small for derivative order");
    // c[j][k]: weight of node j for derivative k
    let mut c = vec![vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// Weights on the integer offsets `offsets` (grid spacing `h`) for the
/// derivative of the given order evaluated at offset 0.
pub fn uniform_weights(offsets: &[i64], order: usize, h: f64) -> Vec<f64> {
    let nodes: Vec<f64> = offsets.iter().map(|&o| o as f64).collect();
    let scale = h.powi(order as i32);
    fornberg_weights(0.0, &nodes, order)
        .into_iter()
        .map(|w| w / scale)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_central_stencils() {
        let w = uniform_weights(&[-1, 0, 1], 2, 1.0);
        assert_eq!(w, vec![1.0, -2.0, 1.0]);
        let w = uniform_weights(&[-2, -1, 0, 1, 2], 4, 1.0);
        for (a, b) in w.iter().zip([1.0, -4.0, 6.0, -4.0, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let w = uniform_weights(&[-2, -1, 0, 1, 2], 1, 1.0);
        for (a, b) in w.iter().zip([1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn one_sided_stencil_is_exact_on_polynomials() {
        let offs: Vec<i64> = (0..7).collect();
        let w = uniform_weights(&offs, 1, 0.1);
        // d/dx x^5 at x = 0.3 with nodes 0.3 + 0.1 j
        let d: f64 = offs
            .iter()
            .zip(&w)
            .map(|(&o, wi)| wi * (0.3 + 0.1 * o as f64).powi(5))
            .sum();
        assert!((d - 5.0 * 0.3f64.powi(4)).abs() < 1e-10);
    }
}
