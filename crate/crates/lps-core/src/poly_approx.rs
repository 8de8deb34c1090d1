//! Legendre polynomials and L2-optimal polynomial approximation of
//! activation functions on [-1, 1].
//!
//! The closed-form ReLU coefficients and the quadrature projection are two
//! independent routes to the same numbers; tests hold them against each other.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::quadrature::integrate_split;

/// Highest Legendre degree supported by the public entry points.
pub const MAX_DEGREE: usize = 64;

/// Coefficients of a degree-d polynomial in both the Legendre and the
/// monomial basis. The two expansions describe the same polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyCoeffs {
    pub degree: usize,
    /// alpha_0..alpha_d in the Legendre basis.
    pub legendre_coeffs: Vec<f64>,
    /// c_0..c_d, the same polynomial as sum c_j x^j.
    pub monomial_coeffs: Vec<f64>,
}

impl PolyCoeffs {
    /// Build from Legendre coefficients; the monomial expansion is derived.
    pub fn from_legendre(legendre_coeffs: Vec<f64>) -> Self {
        assert!(!legendre_coeffs.is_empty());
        let degree = legendre_coeffs.len() - 1;
        let monomial_coeffs = legendre_to_monomial(&legendre_coeffs);
        PolyCoeffs {
            degree,
            legendre_coeffs,
            monomial_coeffs,
        }
    }

    /// Evaluate through the Legendre expansion.
    pub fn eval_legendre(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for (k, a) in self.legendre_coeffs.iter().enumerate() {
            acc += a * legendre_eval_unchecked(k, x);
        }
        acc
    }

    /// Evaluate through the monomial expansion (Horner).
    pub fn eval_monomial(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.monomial_coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Derivative of the monomial expansion at x.
    pub fn eval_monomial_deriv(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for (j, c) in self.monomial_coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * x + j as f64 * c;
        }
        acc
    }
}

/// L_k(x) by the three-term recurrence, no degree cap (internal use).
pub fn legendre_eval_unchecked(k: usize, x: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = x;
    for j in 1..k {
        let next = ((2 * j + 1) as f64 * x * cur - j as f64 * prev) / (j + 1) as f64;
        prev = cur;
        cur = next;
    }
    cur
}

/// Derivative L_k'(x), used for quadrature node refinement.
pub fn legendre_deriv(k: usize, x: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let denom = x * x - 1.0;
    if libm::fabs(denom) < 1e-12 {
        // L_k'(+-1) = (+-1)^{k+1} k(k+1)/2
        let sign = if x > 0.0 || k % 2 == 1 { 1.0 } else { -1.0 };
        return sign * (k * (k + 1)) as f64 / 2.0;
    }
    let pk = legendre_eval_unchecked(k, x);
    let pk1 = legendre_eval_unchecked(k - 1, x);
    k as f64 * (x * pk - pk1) / denom
}

/// Legendre polynomial L_k(x) for x in [-1, 1], k <= 64.
pub fn legendre_eval(k: usize, x: f64) -> Result<f64, CoreError> {
    if k > MAX_DEGREE {
        return Err(CoreError::Range("legendre degree above 64"));
    }
    if !x.is_finite() {
        return Err(CoreError::Range("non-finite evaluation point"));
    }
    Ok(legendre_eval_unchecked(k, x))
}

/// Closed-form Legendre coefficient alpha_k of the L2([-1,1]) projection of
/// ReLU. alpha_0 and alpha_1 come from the direct inner-product integrals;
/// even k = 2m >= 2 uses the (-1)^m (2k+1) / (2 (2 - k(k+1)) 4^m) C(2m, m)
/// closed form; odd k >= 3 vanishes.
pub fn relu_legendre_coeff(k: usize) -> f64 {
    match k {
        0 => 0.25,
        1 => 0.5,
        _ if k % 2 == 1 => 0.0,
        _ => {
            let m = k / 2;
            // C(2m, m) / 4^m = prod_{i=1..m} (2i - 1) / (2i), stays bounded.
            let mut central = 1.0;
            for i in 1..=m {
                central *= (2 * i - 1) as f64 / (2 * i) as f64;
            }
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            let kk = k as f64;
            sign * (2.0 * kk + 1.0) / (2.0 * (2.0 - kk * (kk + 1.0))) * central
        }
    }
}

/// ReLU on scalars.
pub fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

fn projection_coeffs<F: Fn(f64) -> f64>(f: &F, d: usize, nodes: usize) -> Vec<f64> {
    (0..=d)
        .map(|k| {
            let inner = integrate_split(&|x| f(x) * legendre_eval_unchecked(k, x), nodes);
            (2.0 * k as f64 + 1.0) / 2.0 * inner
        })
        .collect()
}

/// Project `f` onto Legendre polynomials of degree <= d by Gauss quadrature,
/// split at x = 0 so the ReLU kink does not spoil the rule.
pub fn project_activation<F: Fn(f64) -> f64>(f: &F, d: usize) -> Result<PolyCoeffs, CoreError> {
    if d > MAX_DEGREE {
        return Err(CoreError::Range("projection degree above 64"));
    }
    let n = core::cmp::max(96, d + 16);
    let coarse = projection_coeffs(f, d, n);
    let fine = projection_coeffs(f, d, n + n / 2);
    let mut residual = 0.0f64;
    for (a, b) in coarse.iter().zip(fine.iter()) {
        residual = residual.max(libm::fabs(a - b));
    }
    if residual > 1e-7 {
        return Err(CoreError::Numerical("quadrature did not converge", residual));
    }
    Ok(PolyCoeffs::from_legendre(fine))
}

/// L2([-1,1]) distance between `f` and its degree-d Legendre projection.
pub fn l2_error<F: Fn(f64) -> f64>(f: &F, d: usize) -> Result<f64, CoreError> {
    let p = project_activation(f, d)?;
    let nodes = core::cmp::max(128, 2 * d + 16);
    let sq = integrate_split(
        &|x| {
            let r = f(x) - p.eval_legendre(x);
            r * r
        },
        nodes,
    );
    Ok(libm::sqrt(sq.max(0.0)))
}

/// Convert Legendre coefficients to monomial coefficients.
///
/// Builds the monomial expansion of each L_k by the three-term recurrence and
/// accumulates with Neumaier-compensated sums; the conversion is
/// ill-conditioned at high degree, and the compensation keeps the error in
/// the accumulation rather than adding to it.
pub fn legendre_to_monomial(alpha: &[f64]) -> Vec<f64> {
    let d = alpha.len() - 1;
    let mut sum = vec![0.0f64; d + 1];
    let mut comp = vec![0.0f64; d + 1];
    let add = |sum: &mut [f64], comp: &mut [f64], j: usize, v: f64| {
        let t = sum[j] + v;
        if libm::fabs(sum[j]) >= libm::fabs(v) {
            comp[j] += (sum[j] - t) + v;
        } else {
            comp[j] += (v - t) + sum[j];
        }
        sum[j] = t;
    };

    // prev/cur hold the monomial coefficients of L_{k-1} and L_k.
    let mut prev = vec![0.0f64; d + 1];
    let mut cur = vec![0.0f64; d + 1];
    prev[0] = 1.0;
    add(&mut sum, &mut comp, 0, alpha[0]);
    if d >= 1 {
        cur[1] = 1.0;
        add(&mut sum, &mut comp, 1, alpha[1]);
    }
    for k in 1..d {
        // L_{k+1} = ((2k+1) x L_k - k L_{k-1}) / (k+1)
        let mut next = vec![0.0f64; d + 1];
        for j in 0..=k {
            if cur[j] != 0.0 {
                next[j + 1] += (2 * k + 1) as f64 * cur[j];
            }
        }
        for j in 0..=k {
            if prev[j] != 0.0 {
                next[j] -= k as f64 * prev[j];
            }
        }
        for v in next.iter_mut() {
            *v /= (k + 1) as f64;
        }
        for (j, v) in next.iter().enumerate() {
            if *v != 0.0 {
                add(&mut sum, &mut comp, j, alpha[k + 1] * v);
            }
        }
        prev = cur;
        cur = next;
    }
    for j in 0..=d {
        sum[j] += comp[j];
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_normalization_at_one() {
        for k in [0, 1, 2, 5, 17, 64] {
            assert!((legendre_eval(k, 1.0).unwrap() - 1.0).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn legendre_known_values() {
        assert_eq!(legendre_eval(0, 0.3).unwrap(), 1.0);
        // L_2(0.5) = (3 * 0.25 - 1) / 2
        assert!((legendre_eval(2, 0.5).unwrap() - (-0.125)).abs() < 1e-15);
        assert!(legendre_eval(65, 0.0).is_err());
        assert!(legendre_eval(3, f64::NAN).is_err());
    }

    #[test]
    fn relu_coeff_low_orders() {
        assert!((relu_legendre_coeff(0) - 0.25).abs() < 1e-15);
        assert!((relu_legendre_coeff(1) - 0.5).abs() < 1e-15);
        assert!((relu_legendre_coeff(2) - 0.3125).abs() < 1e-15);
        assert!((relu_legendre_coeff(4) - (-0.09375)).abs() < 1e-15);
        for k in [3, 5, 7, 21] {
            assert_eq!(relu_legendre_coeff(k), 0.0);
        }
    }

    #[test]
    fn projection_matches_closed_form() {
        let p = project_activation(&relu, 20).unwrap();
        for k in 0..=20 {
            assert!(
                (p.legendre_coeffs[k] - relu_legendre_coeff(k)).abs() < 1e-10,
                "k={k}"
            );
        }
    }

    #[test]
    fn p2_monomial_coefficients() {
        let p = project_activation(&relu, 2).unwrap();
        let expect = [3.0 / 32.0, 0.5, 15.0 / 32.0];
        for (c, e) in p.monomial_coeffs.iter().zip(expect.iter()) {
            assert!((c - e).abs() < 1e-12);
        }
    }

    #[test]
    fn p4_monomial_coefficients() {
        let p = project_activation(&relu, 4).unwrap();
        let expect = [15.0 / 256.0, 0.5, 105.0 / 128.0, 0.0, -105.0 / 256.0];
        for (c, e) in p.monomial_coeffs.iter().zip(expect.iter()) {
            assert!((c - e).abs() < 1e-12);
        }
    }

    #[test]
    fn projecting_a_polynomial_recovers_it() {
        let p = project_activation(&|x| x * x, 4).unwrap();
        assert!((p.monomial_coeffs[2] - 1.0).abs() < 1e-12);
        for j in [0, 1, 3, 4] {
            assert!(p.monomial_coeffs[j].abs() < 1e-12, "j={j}");
        }
    }

    #[test]
    fn l2_error_zero_for_representable() {
        let e = l2_error(&|x| 0.5 * x + 0.25, 3).unwrap();
        assert!(e < 1e-10);
    }

    #[test]
    fn l2_error_golden_value_d2() {
        // ||ReLU - P_2 ReLU||^2 = 1/3 - (1/8 + 1/6 + 2/5 * (5/16)^2) = 1/384,
        // confirmed by the composite-quadrature oracle in tests/oracles.rs.
        let e = l2_error(&relu, 2).unwrap();
        assert!((e - 1.0 / libm::sqrt(384.0)).abs() < 1e-12, "e={e}");
    }

    #[test]
    fn error_decreasing_and_rate_bounded() {
        let errs: alloc::vec::Vec<f64> = [2usize, 4, 8, 16, 32]
            .iter()
            .map(|&d| l2_error(&relu, d).unwrap())
            .collect();
        for w in errs.windows(2) {
            assert!(w[1] < w[0]);
        }
        let base = 2.0 * errs[0];
        for (d, e) in [2usize, 4, 8, 16, 32].iter().zip(errs.iter()) {
            assert!(*d as f64 * e <= 2.0 * base, "d={d}");
        }
    }

    #[test]
    fn parseval_consistency() {
        let p = project_activation(&relu, 12).unwrap();
        let direct = integrate_split(
            &|x| {
                let v = p.eval_legendre(x);
                v * v
            },
            96,
        );
        let by_coeffs: f64 = p
            .legendre_coeffs
            .iter()
            .enumerate()
            .map(|(k, a)| a * a * 2.0 / (2.0 * k as f64 + 1.0))
            .sum();
        assert!((direct - by_coeffs).abs() < 1e-9);
    }

    use crate::quadrature::integrate_split;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn basis_expansions_agree(x in -1.0f64..1.0) {
            let p = project_activation(&relu, 16).unwrap();
            let a = p.eval_legendre(x);
            let b = p.eval_monomial(x);
            let scale = a.abs().max(1.0);
            prop_assert!((a - b).abs() / scale < 1e-12);
        }

        #[test]
        fn legendre_bounded_on_interval(k in 0usize..64, x in -1.0f64..1.0) {
            let v = legendre_eval(k, x).unwrap();
            prop_assert!(v.abs() <= 1.0 + 1e-12);
        }
    }
}
