//! Cumulative quadrature on uniform lines.
//!
//! Each cell `[x_i, x_{i+1}]` is integrated exactly for the degree-5
//! interpolant through six neighbouring samples, so running integrals are
//! sixth-order accurate and Volterra operators built from them compose to
//! high accuracy.

use nalgebra::{DMatrix, DVector};

use crate::C64;

const NODES: usize = 6;

/// Weights integrating the interpolant through nodes `0..NODES` over `[a, a + 1]`.
fn cell_weights(a: f64) -> [f64; NODES] {
    let v = DMatrix::from_fn(NODES, NODES, |j, k| (k as f64).powi(j as i32));
    let rhs = DVector::from_fn(NODES, |j, _| {
        let p = j as i32 + 1;
        ((a + 1.0).powi(p) - a.powi(p)) / p as f64
    });
    let w = v.lu().solve(&rhs).expect("Vandermonde on distinct nodes is invertible");
    let mut out = [0.0; NODES];
    out.copy_from_slice(w.as_slice());
    out
}

/// Integral of each cell `[x_i, x_{i+1}]`, `i = 0..n-1`.
fn cell_integrals(values: &[C64], h: f64) -> Vec<C64> {
    let n = values.len();
    if n < NODES {
        return values.windows(2).map(|w| (w[0] + w[1]) * (0.5 * h)).collect();
    }
    let weights: Vec<[f64; NODES]> = (0..NODES - 1).map(|s| cell_weights(s as f64)).collect();
    (0..n - 1)
        .map(|i| {
            let start = i.saturating_sub(2).min(n - NODES);
            let w = &weights[i - start];
            let s: C64 = (0..NODES).map(|k| values[start + k] * w[k]).sum();
            s * h
        })
        .collect()
}

/// Running integral `I_i = int_{x_anchor}^{x_i} f`, negative to the left of the anchor.
pub fn cumulative(values: &[C64], h: f64, anchor: usize) -> Vec<C64> {
    let n = values.len();
    assert!(anchor < n, "anchor outside line");
    let cells = cell_integrals(values, h);
    let mut out = vec![C64::new(0.0, 0.0); n];
    for i in anchor + 1..n {
        out[i] = out[i - 1] + cells[i - 1];
    }
    for i in (0..anchor).rev() {
        out[i] = out[i + 1] - cells[i];
    }
    out
}

/// Integral between two sample indices (`a <= b` or reversed).
pub fn definite(values: &[C64], h: f64, a: usize, b: usize) -> C64 {
    cumulative(values, h, a)[b]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_quintics() {
        let h = 0.1;
        let f: Vec<C64> = (0..20)
            .map(|i| {
                let x = i as f64 * h;
                C64::new(x.powi(5) - 2.0 * x * x, 0.0)
            })
            .collect();
        let i = cumulative(&f, h, 3);
        let prim = |x: f64| x.powi(6) / 6.0 - 2.0 * x.powi(3) / 3.0;
        for (k, v) in i.iter().enumerate() {
            let exact = prim(k as f64 * h) - prim(3.0 * h);
            assert!((v.re - exact).abs() < 1e-12, "{k}: {} vs {exact}", v.re);
        }
    }

    #[test]
    fn sixth_order_convergence() {
        let err = |n: usize| {
            let h = 2.0 / n as f64;
            let f: Vec<C64> = (0..=n).map(|i| C64::new((-1.0 + i as f64 * h).exp(), 0.0)).collect();
            let total = definite(&f, h, 0, n);
            (total.re - (1f64.exp() - (-1f64).exp())).abs()
        };
        let rate = (err(20) / err(40)).log2();
        assert!(rate > 5.5, "rate {rate}");
    }
}
