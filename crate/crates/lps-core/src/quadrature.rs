//! Gauss-Legendre quadrature.
//!
//! Nodes and weights are computed by Newton iteration on the Legendre
//! polynomial, with the usual asymptotic initial guess. Accuracy is at
//! machine-precision level for the node counts used here (<= 256).

use alloc::vec::Vec;

use crate::poly_approx::{legendre_eval_unchecked, legendre_deriv};

/// Gauss-Legendre rule on [-1, 1]: `n` nodes and weights.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one node");
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        // Tricomi-style initial guess for the i-th root.
        let mut x = libm::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        for _ in 0..100 {
            let p = legendre_eval_unchecked(n, x);
            let dp = legendre_deriv(n, x);
            let dx = p / dp;
            x -= dx;
            if libm::fabs(dx) < 1e-15 {
                break;
            }
        }
        let dp = legendre_deriv(n, x);
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    nodes.reverse();
    weights.reverse();
    (nodes, weights)
}

/// Integrate `f` over [a, b] with an n-point Gauss-Legendre rule.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut sum = 0.0;
    for (x, w) in nodes.iter().zip(weights.iter()) {
        sum += w * f(mid + half * x);
    }
    sum * half
}

/// Integrate over [-1, 1] split at 0, so piecewise-smooth integrands with a
/// kink at the origin (ReLU and friends) keep spectral accuracy.
pub fn integrate_split<F: Fn(f64) -> f64>(f: &F, n: usize) -> f64 {
    integrate(f, -1.0, 0.0, n) + integrate(f, 0.0, 1.0, n)
}
