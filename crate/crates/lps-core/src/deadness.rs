//! Born-dead detection, Monte-Carlo dying-ReLU probability estimation, and
//! the closed-form probability bounds for one and N re-initializations.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::init::{self, InitScheme};
use crate::net::{output_variance, NetSpec, ParamSet};
use crate::quadrature::integrate;
use crate::rng;

/// Output-variance threshold below which a network counts as born dead.
pub const DEAD_VARIANCE_THRESHOLD: f64 = 1e-10;

/// Cap on the number of evaluation grid points.
pub const MAX_GRID_POINTS: usize = 1_000_000;

/// Monte-Carlo born-dead estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct DeadnessReport {
    pub trials: usize,
    pub dead_count: usize,
    /// dead_count / trials.
    pub estimate: f64,
    /// Normal-approximation 95% half-width.
    pub ci95_halfwidth: f64,
    pub scheme: InitScheme,
    pub spec: NetSpec,
}

/// Inputs to the closed-form bounds: widths m_0..m_{n-1}, per-hidden-layer
/// selection probabilities, the delta constant, and the reinit count N.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundParams {
    /// m_0, m_1, ..., m_{n-1}; hidden layers are indices 1..n-1.
    pub widths: Vec<usize>,
    /// p_1..p_{n-1}, each in [0, 1].
    pub p: Vec<f64>,
    /// delta in [0, 1/2].
    pub delta: f64,
    /// Number of re-initializations (used by the N-reinit bound only).
    pub n_reinit: u32,
}

impl BoundParams {
    pub fn validate(&self) -> Result<(), CoreError> {
        if self.widths.len() < 2 || self.p.len() != self.widths.len() - 1 {
            return Err(CoreError::ShapeMismatch("widths/p length"));
        }
        if self.p.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(CoreError::Range("p outside [0,1]"));
        }
        if !(0.0..=0.5).contains(&self.delta) {
            return Err(CoreError::Range("delta outside [0, 1/2]"));
        }
        Ok(())
    }

    /// Widths with p_l = 2^l / (2^(n+1) - 1) filled in.
    /// `widths` is m_0..m_{n-1}; the network depth is n = widths.len().
    pub fn with_auto_p(widths: Vec<usize>, delta: f64, n_reinit: u32) -> Self {
        let n = widths.len();
        let p = (1..n).map(|l| init::selection_probability(n, l)).collect();
        BoundParams {
            widths,
            p,
            delta,
            n_reinit,
        }
    }

    /// Widths with p identically zero (no re-initialization).
    pub fn with_zero_p(widths: Vec<usize>) -> Self {
        let p = vec![0.0; widths.len() - 1];
        BoundParams {
            widths,
            p,
            delta: 0.0,
            n_reinit: 0,
        }
    }

    /// M_l = m_l * (m_{l-1} + 1) for hidden layer l (1-based).
    pub fn m_cap(&self, l: usize) -> usize {
        self.widths[l] * (self.widths[l - 1] + 1)
    }
}

/// Axis-aligned grid on [-1, 1]^dim with the given step.
pub fn grid_points(dim: usize, step: f64) -> Result<Vec<Vec<f64>>, CoreError> {
    if !(step > 0.0) {
        return Err(CoreError::Range("grid step must be positive"));
    }
    let per_axis = libm::floor(2.0 / step + 0.5) as usize + 1;
    let total = per_axis.checked_pow(dim as u32).unwrap_or(usize::MAX);
    if dim > 3 || total > MAX_GRID_POINTS {
        return Err(CoreError::TooLarge(
            "evaluation grid too large; supply a coarser step",
        ));
    }
    let axis: Vec<f64> = (0..per_axis).map(|i| -1.0 + step * i as f64).collect();
    let mut points = vec![vec![]];
    for _ in 0..dim {
        let mut next = Vec::with_capacity(points.len() * per_axis);
        for p in &points {
            for &x in &axis {
                let mut q = p.clone();
                q.push(x);
                next.push(q);
            }
        }
        points = next;
    }
    Ok(points)
}

/// True iff the output variance over the full evaluation grid is below the
/// dead threshold. This detects constant output, which includes but is not
/// limited to every hidden unit being off.
pub fn is_born_dead(spec: &NetSpec, params: &ParamSet, grid_step: f64) -> Result<bool, CoreError> {
    if !params.all_finite() {
        return Err(CoreError::Range("non-finite parameters"));
    }
    let grid = grid_points(spec.input_dim(), grid_step)?;
    let var = output_variance(spec, params, &grid)?;
    Ok(var < DEAD_VARIANCE_THRESHOLD)
}

/// Monte-Carlo estimate of the born-dead probability under `scheme`.
///
/// Trials use independent derived seeds, so the report is reproducible and
/// trial order is irrelevant.
pub fn estimate_dead_prob(
    spec: &NetSpec,
    scheme: &InitScheme,
    trials: usize,
    seed: u64,
) -> Result<DeadnessReport, CoreError> {
    if trials == 0 {
        return Err(CoreError::Range("at least one trial required"));
    }
    let mut dead_count = 0;
    for trial in 0..trials {
        let trial_seed = rng::derive_seed(seed, &[3, trial as u64]);
        let params = init::init_params(spec, scheme, trial_seed)?;
        if is_born_dead(spec, &params, 0.1)? {
            dead_count += 1;
        }
    }
    let estimate = dead_count as f64 / trials as f64;
    let ci95_halfwidth = 1.96 * libm::sqrt(estimate * (1.0 - estimate) / trials as f64);
    Ok(DeadnessReport {
        trials,
        dead_count,
        estimate,
        ci95_halfwidth,
        scheme: *scheme,
        spec: spec.clone(),
    })
}

/// Upper bound on the born-dead probability after one re-initialization:
/// 1 - prod_l (1 - 2^{-m_l} ((1 - p_l) + p_l (1 - delta/2)^{m_l})).
pub fn bound_one_reinit(bp: &BoundParams) -> Result<f64, CoreError> {
    bp.validate()?;
    let mut prod = 1.0;
    for l in 1..bp.widths.len() {
        let m = bp.widths[l] as f64;
        let p = bp.p[l - 1];
        let inner = (1.0 - p) + p * libm::pow(1.0 - bp.delta / 2.0, m);
        prod *= 1.0 - libm::exp2(-m) * inner;
    }
    Ok((1.0 - prod).clamp(0.0, 1.0))
}

/// Upper bound after N re-initializations:
/// 1 - prod_l (1 - (M_l / 2)(1 - p_l / 4)^N), clamped to [0, 1].
pub fn bound_n_reinit(bp: &BoundParams) -> Result<f64, CoreError> {
    bp.validate()?;
    let mut prod = 1.0;
    for l in 1..bp.widths.len() {
        let m_cap = bp.m_cap(l) as f64;
        let factor = 1.0 - 0.5 * m_cap * libm::pow(1.0 - bp.p[l - 1] / 4.0, bp.n_reinit as f64);
        prod *= factor.max(0.0);
    }
    Ok((1.0 - prod).clamp(0.0, 1.0))
}

/// The delta constant: with W ~ N(0, v^2) and X ~ N(0, v_tilde^2)
/// independent, delta = 1/2 - P(X <= -W c | W > 0), computed by Gaussian
/// quadrature of the erf integrand.
pub fn delta_estimate(v: f64, v_tilde: f64, c: f64) -> Result<f64, CoreError> {
    if !(v > 0.0) || !(v_tilde > 0.0) || !(c >= 0.0) || !c.is_finite() {
        return Err(CoreError::Range("delta_estimate needs v, v_tilde > 0 and c >= 0"));
    }
    // Substituting w = v u turns the integral into
    // int_0^inf phi(u) erf(u v c / (sqrt(2) v_tilde)) du with phi the
    // standard normal density; the tail beyond u = 12 is below 1e-30.
    let a = v * c / (core::f64::consts::SQRT_2 * v_tilde);
    let inv_sqrt_2pi = 1.0 / libm::sqrt(2.0 * core::f64::consts::PI);
    let delta = integrate(
        &|u| inv_sqrt_2pi * libm::exp(-0.5 * u * u) * libm::erf(a * u),
        0.0,
        12.0,
        160,
    );
    if !delta.is_finite() {
        return Err(CoreError::Numerical("delta quadrature failed", delta));
    }
    Ok(delta.clamp(0.0, 0.5))
}
