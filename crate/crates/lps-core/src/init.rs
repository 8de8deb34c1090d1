//! Parameter initialization: He, Xavier, and the layer-selective
//! re-initialization scheme with its tanh variant.
//!
//! Step 1 samples every layer from a zero-mean Gaussian whose variance
//! depends on the scheme. Step 2 (repeated `reinit_count` times) selects
//! layers and redraws each currently non-positive entry of a selected layer
//! with probability 1/2 from that layer's Step-1 distribution.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::rand_core::RngCore;

use crate::error::CoreError;
use crate::net::{NetSpec, ParamSet};
use crate::rng::{self, normal, uniform01};

/// Which distribution family to sample from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitKind {
    He,
    Xavier,
    Lps,
    LpsTanh,
}

/// How Step 2 selects layers.
///
/// `BernoulliP` picks hidden layer l independently with probability
/// p_l = 2^l / (2^(n+1) - 1) and matches the probabilistic analysis;
/// `BitDecode` draws one integer uniformly in [1, 2^(n+1) - 2] and decodes
/// its low n bits over layers n..1, which is the literal algorithm. The two
/// disagree; `BernoulliP` is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionMode {
    BernoulliP,
    BitDecode,
}

/// Bias handling after Step 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BiasMode {
    Sampled,
    Zero,
}

/// Full initialization configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InitScheme {
    pub kind: InitKind,
    pub reinit_count: u32,
    pub selection_mode: SelectionMode,
    pub bias_mode: BiasMode,
}

impl InitScheme {
    pub fn he() -> Self {
        InitScheme {
            kind: InitKind::He,
            reinit_count: 0,
            selection_mode: SelectionMode::BernoulliP,
            bias_mode: BiasMode::Sampled,
        }
    }

    pub fn xavier() -> Self {
        InitScheme {
            kind: InitKind::Xavier,
            ..Self::he()
        }
    }

    pub fn lps(reinit_count: u32) -> Self {
        InitScheme {
            kind: InitKind::Lps,
            reinit_count,
            ..Self::he()
        }
    }

    pub fn lps_tanh(reinit_count: u32) -> Self {
        InitScheme {
            kind: InitKind::LpsTanh,
            reinit_count,
            ..Self::lps(reinit_count)
        }
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if self.reinit_count > 0 && !matches!(self.kind, InitKind::Lps | InitKind::LpsTanh) {
            return Err(CoreError::Range(
                "reinit_count must be 0 unless the scheme is LPS or LPS-tanh",
            ));
        }
        Ok(())
    }
}

/// Which layers one Step-2 round selects; index 0 is weight layer 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerMask {
    pub chosen: Vec<bool>,
}

/// Step-1 sampling variance for weight layer `l` (1-based) of `spec`.
pub fn layer_variance(spec: &NetSpec, kind: InitKind, l: usize) -> f64 {
    let fan_in = spec.widths[l - 1] as f64;
    let width = spec.widths[l] as f64;
    let n = spec.depth();
    match kind {
        InitKind::He => 2.0 / fan_in,
        InitKind::Xavier => 1.0 / fan_in,
        InitKind::Lps => {
            if l == n {
                1.0 / (fan_in + 1.0)
            } else {
                2.0 / (width * (fan_in + 1.0))
            }
        }
        InitKind::LpsTanh => {
            if l == n {
                1.0 / (fan_in + 1.0)
            } else {
                1.0 / (width * (fan_in + 1.0))
            }
        }
    }
}

/// Layer-selection probability p_l = 2^l / (2^(n+1) - 1).
pub fn selection_probability(n: usize, l: usize) -> f64 {
    libm::exp2(l as f64) / (libm::exp2((n + 1) as f64) - 1.0)
}

fn sample_layer(params: &mut ParamSet, l: usize, variance: f64, rng: &mut impl RngCore) {
    let layer = &mut params.layers[l - 1];
    for w in &mut layer.weights {
        *w = normal(rng, variance);
    }
    for b in &mut layer.bias {
        *b = normal(rng, variance);
    }
}

/// Draw a full parameter set for `spec` under `scheme`.
///
/// Each layer gets its own RNG stream derived from (seed, layer), and each
/// re-initialization round gets streams derived from (seed, round), so the
/// result is bit-reproducible and independent of evaluation order.
pub fn init_params(spec: &NetSpec, scheme: &InitScheme, seed: u64) -> Result<ParamSet, CoreError> {
    scheme.validate()?;
    let mut params = ParamSet::zeros(spec);
    for l in 1..=spec.depth() {
        let mut rng = rng::stream(seed, &[0, l as u64]);
        sample_layer(&mut params, l, layer_variance(spec, scheme.kind, l), &mut rng);
    }
    for round in 0..scheme.reinit_count {
        let mut sel_rng = rng::stream(seed, &[1, round as u64]);
        let mask = layer_selection(spec.depth(), scheme.selection_mode, &mut sel_rng)?;
        let mut pass_rng = rng::stream(seed, &[2, round as u64]);
        reinit_pass(&mut params, &mask, spec, scheme.kind, &mut pass_rng)?;
    }
    if scheme.bias_mode == BiasMode::Zero {
        for layer in &mut params.layers {
            for b in &mut layer.bias {
                *b = 0.0;
            }
        }
    }
    Ok(params)
}

/// One Step-2 layer selection for a depth-n network.
pub fn layer_selection(
    n: usize,
    mode: SelectionMode,
    rng: &mut impl RngCore,
) -> Result<LayerMask, CoreError> {
    if n < 2 {
        return Err(CoreError::Range("layer selection needs depth >= 2"));
    }
    let mut chosen = vec![false; n];
    match mode {
        SelectionMode::BernoulliP => {
            // Hidden layers only, each chosen independently with probability p_l.
            for l in 1..n {
                chosen[l - 1] = uniform01(rng) < selection_probability(n, l);
            }
        }
        SelectionMode::BitDecode => {
            let span = (1u128 << (n + 1)) - 2;
            let d = 1 + (rng.next_u64() as u128 % span);
            decode_bits(&mut chosen, d);
        }
    }
    Ok(LayerMask { chosen })
}

/// Literal bit decode of `d` over layers n..1; bits beyond the loop are
/// discarded.
pub fn decode_bits(chosen: &mut [bool], mut d: u128) {
    for l in (1..=chosen.len()).rev() {
        chosen[l - 1] = d % 2 == 1;
        d /= 2;
    }
}

/// One re-initialization pass: in each selected layer, every entry that is
/// currently <= 0 is redrawn with probability 1/2 from the layer's Step-1
/// distribution; positive entries and unselected layers are untouched.
pub fn reinit_pass(
    params: &mut ParamSet,
    mask: &LayerMask,
    spec: &NetSpec,
    kind: InitKind,
    rng: &mut impl RngCore,
) -> Result<(), CoreError> {
    if mask.chosen.len() != params.layers.len() || !params.matches(spec) {
        return Err(CoreError::ShapeMismatch("mask/parameter layer count"));
    }
    for l in 1..=params.layers.len() {
        if !mask.chosen[l - 1] {
            continue;
        }
        let variance = layer_variance(spec, kind, l);
        let layer = &mut params.layers[l - 1];
        for v in layer.weights.iter_mut().chain(layer.bias.iter_mut()) {
            if *v <= 0.0 && uniform01(rng) < 0.5 {
                *v = normal(rng, variance);
            }
        }
    }
    Ok(())
}
