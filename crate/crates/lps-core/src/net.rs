//! Dense feed-forward networks: forward evaluation, reverse-mode gradients
//! of the mean-square error, Adam, and the collapse-detecting training loop.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::poly_approx::PolyCoeffs;

/// Hidden-layer activation. The output layer is always affine.
#[derive(Debug, Clone, PartialEq)]
pub enum Activation {
    ReLU,
    Tanh,
    Poly(PolyCoeffs),
}

impl Activation {
    pub fn apply(&self, x: f64) -> f64 {
        match self {
            Activation::ReLU => {
                if x > 0.0 {
                    x
                } else {
                    0.0
                }
            }
            Activation::Tanh => libm::tanh(x),
            Activation::Poly(p) => p.eval_monomial(x),
        }
    }

    /// Derivative; the ReLU subgradient at exactly 0 is 0.
    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            Activation::ReLU => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => {
                let t = libm::tanh(x);
                1.0 - t * t
            }
            Activation::Poly(p) => p.eval_monomial_deriv(x),
        }
    }
}

/// Layer widths (m_0, ..., m_n) and the hidden activation.
#[derive(Debug, Clone, PartialEq)]
pub struct NetSpec {
    pub widths: Vec<usize>,
    pub activation: Activation,
}

impl NetSpec {
    pub fn new(widths: Vec<usize>, activation: Activation) -> Result<Self, CoreError> {
        if widths.len() < 2 {
            return Err(CoreError::Range("a network needs at least two layers"));
        }
        if widths.iter().any(|&w| w == 0) {
            return Err(CoreError::Range("zero-width layer"));
        }
        Ok(NetSpec { widths, activation })
    }

    /// Number of weight layers (n).
    pub fn depth(&self) -> usize {
        self.widths.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.widths.last().unwrap()
    }
}

/// One weight layer: row-major `rows x cols` matrix plus a bias vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub rows: usize,
    pub cols: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Layer {
            rows,
            cols,
            weights: vec![0.0; rows * cols],
            bias: vec![0.0; rows],
        }
    }

    pub fn weight(&self, r: usize, c: usize) -> f64 {
        self.weights[r * self.cols + c]
    }
}

/// All weights and biases of a network, layer 1..n.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    pub layers: Vec<Layer>,
}

impl ParamSet {
    pub fn zeros(spec: &NetSpec) -> Self {
        let layers = (1..spec.widths.len())
            .map(|l| Layer::zeros(spec.widths[l], spec.widths[l - 1]))
            .collect();
        ParamSet { layers }
    }

    pub fn matches(&self, spec: &NetSpec) -> bool {
        self.layers.len() == spec.depth()
            && self
                .layers
                .iter()
                .enumerate()
                .all(|(i, l)| l.rows == spec.widths[i + 1] && l.cols == spec.widths[i])
    }

    pub fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(l.bias.iter()).all(|v| v.is_finite()))
    }

    /// Visit every parameter entry of every layer, weights then bias.
    pub fn for_each_mut<F: FnMut(&mut f64)>(&mut self, mut f: F) {
        for l in &mut self.layers {
            for w in &mut l.weights {
                f(w);
            }
            for b in &mut l.bias {
                f(b);
            }
        }
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }
}

fn affine(layer: &Layer, input: &[f64]) -> Vec<f64> {
    let mut out = layer.bias.clone();
    for r in 0..layer.rows {
        let row = &layer.weights[r * layer.cols..(r + 1) * layer.cols];
        let mut acc = 0.0;
        for (w, x) in row.iter().zip(input.iter()) {
            acc += w * x;
        }
        out[r] += acc;
    }
    out
}

/// Forward pass; hidden layers apply the activation, the last layer is affine.
pub fn forward(spec: &NetSpec, params: &ParamSet, x: &[f64]) -> Result<Vec<f64>, CoreError> {
    if x.len() != spec.input_dim() || !params.matches(spec) {
        return Err(CoreError::ShapeMismatch("forward input/parameter shapes"));
    }
    let n = spec.depth();
    let mut act = x.to_vec();
    for (l, layer) in params.layers.iter().enumerate() {
        let mut z = affine(layer, &act);
        if l + 1 < n {
            for v in &mut z {
                *v = spec.activation.apply(*v);
            }
        }
        act = z;
    }
    Ok(act)
}

/// Forward pass keeping pre-activations for backpropagation.
fn forward_cached(
    spec: &NetSpec,
    params: &ParamSet,
    x: &[f64],
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = spec.depth();
    let mut activations = Vec::with_capacity(n + 1);
    let mut preacts = Vec::with_capacity(n);
    activations.push(x.to_vec());
    for (l, layer) in params.layers.iter().enumerate() {
        let z = affine(layer, activations.last().unwrap());
        preacts.push(z.clone());
        let mut a = z;
        if l + 1 < n {
            for v in &mut a {
                *v = spec.activation.apply(*v);
            }
        }
        activations.push(a);
    }
    (activations, preacts)
}

/// Mean square error over a full sample set: (1/N) sum_i ||f(x_i) - y_i||^2.
pub fn mse_loss(
    spec: &NetSpec,
    params: &ParamSet,
    inputs: &[Vec<f64>],
    targets: &[Vec<f64>],
) -> Result<f64, CoreError> {
    if inputs.is_empty() || inputs.len() != targets.len() {
        return Err(CoreError::ShapeMismatch("empty or unequal sample lists"));
    }
    let mut total = 0.0;
    for (x, y) in inputs.iter().zip(targets.iter()) {
        let out = forward(spec, params, x)?;
        if out.len() != y.len() {
            return Err(CoreError::ShapeMismatch("target dimension"));
        }
        total += out
            .iter()
            .zip(y.iter())
            .map(|(o, t)| (o - t) * (o - t))
            .sum::<f64>();
    }
    Ok(total / inputs.len() as f64)
}

/// Exact reverse-mode gradient of `mse_loss` with respect to every parameter.
pub fn gradient(
    spec: &NetSpec,
    params: &ParamSet,
    inputs: &[Vec<f64>],
    targets: &[Vec<f64>],
) -> Result<ParamSet, CoreError> {
    if inputs.is_empty() || inputs.len() != targets.len() {
        return Err(CoreError::ShapeMismatch("empty or unequal sample lists"));
    }
    if !params.matches(spec) {
        return Err(CoreError::ShapeMismatch("gradient parameter shapes"));
    }
    let n = spec.depth();
    let mut grad = ParamSet::zeros(spec);
    let scale = 2.0 / inputs.len() as f64;
    for (x, y) in inputs.iter().zip(targets.iter()) {
        if x.len() != spec.input_dim() || y.len() != spec.output_dim() {
            return Err(CoreError::ShapeMismatch("sample dimension"));
        }
        let (acts, pres) = forward_cached(spec, params, x);
        // delta = dL/dz for the current layer, starting from the output.
        let mut delta: Vec<f64> = acts[n]
            .iter()
            .zip(y.iter())
            .map(|(o, t)| scale * (o - t))
            .collect();
        for l in (0..n).rev() {
            if l + 1 < n {
                for (d, z) in delta.iter_mut().zip(pres[l].iter()) {
                    *d *= spec.activation.derivative(*z);
                }
            }
            let layer = &params.layers[l];
            let gl = &mut grad.layers[l];
            for r in 0..layer.rows {
                gl.bias[r] += delta[r];
                let grow = &mut gl.weights[r * layer.cols..(r + 1) * layer.cols];
                for (c, g) in grow.iter_mut().enumerate() {
                    *g += delta[r] * acts[l][c];
                }
            }
            if l > 0 {
                let mut prev = vec![0.0; layer.cols];
                for r in 0..layer.rows {
                    let row = &layer.weights[r * layer.cols..(r + 1) * layer.cols];
                    for (c, w) in row.iter().enumerate() {
                        prev[c] += w * delta[r];
                    }
                }
                delta = prev;
            }
        }
    }
    Ok(grad)
}

/// Adam hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamHyper {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamHyper {
    fn default() -> Self {
        AdamHyper {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First/second moment estimates, one slot per parameter.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub fn new(params: &ParamSet) -> Self {
        let n = params.num_params();
        AdamState {
            m: vec![0.0; n],
            v: vec![0.0; n],
            step: 0,
        }
    }
}

/// One bias-corrected Adam update, in place.
pub fn adam_step(
    state: &mut AdamState,
    params: &mut ParamSet,
    grad: &ParamSet,
    hyper: &AdamHyper,
) -> Result<(), CoreError> {
    if state.m.len() != params.num_params() || grad.num_params() != params.num_params() {
        return Err(CoreError::ShapeMismatch("adam state/gradient size"));
    }
    if !grad.all_finite() {
        return Err(CoreError::Numerical("non-finite gradient", f64::NAN));
    }
    state.step += 1;
    let t = state.step as f64;
    let bc1 = 1.0 - libm::pow(hyper.beta1, t);
    let bc2 = 1.0 - libm::pow(hyper.beta2, t);
    let mut idx = 0;
    let m = &mut state.m;
    let v = &mut state.v;
    for (pl, gl) in params.layers.iter_mut().zip(grad.layers.iter()) {
        for (p, g) in pl
            .weights
            .iter_mut()
            .chain(pl.bias.iter_mut())
            .zip(gl.weights.iter().chain(gl.bias.iter()))
        {
            m[idx] = hyper.beta1 * m[idx] + (1.0 - hyper.beta1) * g;
            v[idx] = hyper.beta2 * v[idx] + (1.0 - hyper.beta2) * g * g;
            let mhat = m[idx] / bc1;
            let vhat = v[idx] / bc2;
            *p -= hyper.lr * mhat / (libm::sqrt(vhat) + hyper.eps);
            idx += 1;
        }
    }
    Ok(())
}

/// Training configuration for one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainHyper {
    pub adam: AdamHyper,
    pub steps: usize,
    pub collapse_threshold: f64,
    /// Keep every k-th loss in the history (1 = all).
    pub history_stride: usize,
}

impl TrainHyper {
    pub fn new(steps: usize, collapse_threshold: f64) -> Self {
        TrainHyper {
            adam: AdamHyper::default(),
            steps,
            collapse_threshold,
            history_stride: 1,
        }
    }
}

/// Outcome of one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub final_loss: f64,
    pub loss_history: Vec<f64>,
    pub collapsed: bool,
    pub diverged: bool,
    pub steps: usize,
    pub seed: u64,
    /// Variance of network outputs over the training inputs at the end.
    pub output_variance: f64,
}

/// Full-batch Adam for a fixed number of steps; a run whose final loss is at
/// or above the collapse threshold (or that diverges) counts as collapsed.
pub fn train_run(
    spec: &NetSpec,
    init_params: &ParamSet,
    inputs: &[Vec<f64>],
    targets: &[Vec<f64>],
    hyper: &TrainHyper,
    seed: u64,
) -> Result<TrainReport, CoreError> {
    if hyper.steps == 0 {
        return Err(CoreError::Range("steps must be at least 1"));
    }
    let mut params = init_params.clone();
    let mut state = AdamState::new(&params);
    let mut history = Vec::new();
    let mut diverged = false;
    let mut steps_done = 0;
    let mut loss = mse_loss(spec, &params, inputs, targets)?;
    for step in 0..hyper.steps {
        let grad = gradient(spec, &params, inputs, targets)?;
        if adam_step(&mut state, &mut params, &grad, &hyper.adam).is_err() {
            diverged = true;
            break;
        }
        loss = mse_loss(spec, &params, inputs, targets)?;
        steps_done = step + 1;
        if step % hyper.history_stride == 0 {
            history.push(loss);
        }
        if !loss.is_finite() {
            diverged = true;
            break;
        }
    }
    let final_loss = loss;
    let collapsed = diverged || !final_loss.is_finite() || final_loss >= hyper.collapse_threshold;
    let output_variance = output_variance(spec, &params, inputs).unwrap_or(f64::NAN);
    Ok(TrainReport {
        final_loss,
        loss_history: history,
        collapsed,
        diverged,
        steps: steps_done,
        seed,
        output_variance,
    })
}

/// Variance of the network output over a sample set, summed over output
/// components.
pub fn output_variance(
    spec: &NetSpec,
    params: &ParamSet,
    inputs: &[Vec<f64>],
) -> Result<f64, CoreError> {
    if inputs.is_empty() {
        return Err(CoreError::ShapeMismatch("empty input set"));
    }
    let dim = spec.output_dim();
    let n = inputs.len() as f64;
    let mut outputs = Vec::with_capacity(inputs.len());
    let mut sum = vec![0.0; dim];
    for x in inputs {
        let out = forward(spec, params, x)?;
        for (j, v) in out.iter().enumerate() {
            sum[j] += v;
        }
        outputs.push(out);
    }
    // Two-pass so a constant output reports exactly zero variance instead of
    // cancellation noise near the dead threshold.
    let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let mut total = 0.0;
    for out in &outputs {
        for (j, v) in out.iter().enumerate() {
            let d = v - mean[j];
            total += d * d;
        }
    }
    Ok(total / n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abs_net() -> (NetSpec, ParamSet) {
        // One hidden layer of width 2 reproducing |x| exactly:
        // w1 = (1, -1)^T, b1 = 0, w2 = (1, 1), b2 = 0.
        let spec = NetSpec::new(vec![1, 2, 1], Activation::ReLU).unwrap();
        let mut p = ParamSet::zeros(&spec);
        p.layers[0].weights = vec![1.0, -1.0];
        p.layers[1].weights = vec![1.0, 1.0];
        (spec, p)
    }

    #[test]
    fn abs_solution_reproduces_abs() {
        let (spec, p) = abs_net();
        let y = forward(&spec, &p, &[0.7]).unwrap();
        assert!((y[0] - 0.7).abs() < 1e-15);
        let y = forward(&spec, &p, &[-0.4]).unwrap();
        assert!((y[0] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn zero_params_zero_output() {
        let spec = NetSpec::new(vec![2, 3, 3, 2], Activation::ReLU).unwrap();
        let p = ParamSet::zeros(&spec);
        let y = forward(&spec, &p, &[0.3, -0.9]).unwrap();
        assert_eq!(y, vec![0.0, 0.0]);
    }

    #[test]
    fn forward_shape_errors() {
        let (spec, p) = abs_net();
        assert!(forward(&spec, &p, &[0.1, 0.2]).is_err());
    }

    fn f1_grid() -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let xs: Vec<Vec<f64>> = (0..21).map(|i| vec![-1.0 + 0.1 * i as f64]).collect();
        let ys: Vec<Vec<f64>> = xs.iter().map(|x| vec![x[0].abs()]).collect();
        (xs, ys)
    }

    #[test]
    fn mse_perfect_fit_is_zero() {
        let (spec, p) = abs_net();
        let (xs, ys) = f1_grid();
        let loss = mse_loss(&spec, &p, &xs, &ys).unwrap();
        assert!(loss < 1e-20);
    }

    #[test]
    fn mse_zero_network_matches_direct_sum() {
        let (spec, _) = abs_net();
        let p = ParamSet::zeros(&spec);
        let (xs, ys) = f1_grid();
        let loss = mse_loss(&spec, &p, &xs, &ys).unwrap();
        // Direct-summation oracle over the grid.
        let oracle: f64 =
            xs.iter().map(|x| x[0] * x[0]).sum::<f64>() / xs.len() as f64;
        assert!((loss - oracle).abs() < 1e-15);
        assert!((oracle - 0.36666666666666666).abs() < 1e-12);
    }

    #[test]
    fn mse_order_invariant() {
        let (spec, p) = abs_net();
        let (mut xs, mut ys) = f1_grid();
        let a = mse_loss(&spec, &p, &xs, &ys).unwrap();
        xs.reverse();
        ys.reverse();
        let b = mse_loss(&spec, &p, &xs, &ys).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gradient_zero_at_exact_fit() {
        let (spec, p) = abs_net();
        let (xs, ys) = f1_grid();
        let g = gradient(&spec, &p, &xs, &ys).unwrap();
        let mut max = 0.0f64;
        let mut gm = g.clone();
        gm.for_each_mut(|v| max = max.max(v.abs()));
        assert!(max < 1e-15);
    }

    #[test]
    fn adam_noop_on_zero_gradient() {
        let (spec, p) = abs_net();
        let mut params = p.clone();
        let grad = ParamSet::zeros(&spec);
        let mut state = AdamState::new(&params);
        adam_step(&mut state, &mut params, &grad, &AdamHyper::default()).unwrap();
        assert_eq!(params, p);
    }

    #[test]
    fn adam_first_step_is_signed_lr() {
        let spec = NetSpec::new(vec![1, 2, 1], Activation::ReLU).unwrap();
        let mut params = ParamSet::zeros(&spec);
        let mut grad = ParamSet::zeros(&spec);
        let mut sign = 1.0;
        grad.for_each_mut(|v| {
            *v = sign * 0.3;
            sign = -sign;
        });
        let hyper = AdamHyper::default();
        let mut state = AdamState::new(&params);
        adam_step(&mut state, &mut params, &grad, &hyper).unwrap();
        let mut idx = 0;
        let mut sign = 1.0;
        // Exactly -lr * g / (|g| + eps) after bias correction; the epsilon
        // pulls it off -lr * sign(g) by lr * eps / (|g| + eps) ~ 3e-11.
        let magnitude = hyper.lr * 0.3 / (0.3 + hyper.eps);
        params.clone().for_each_mut(|v| {
            assert!((*v + sign * magnitude).abs() < 1e-15, "idx={idx}");
            assert!((*v + sign * hyper.lr).abs() < 1e-9, "idx={idx}");
            sign = -sign;
            idx += 1;
        });
    }

    #[test]
    fn adam_rejects_nonfinite_gradient() {
        let (spec, p) = abs_net();
        let mut params = p.clone();
        let mut grad = ParamSet::zeros(&spec);
        grad.layers[0].weights[0] = f64::NAN;
        let mut state = AdamState::new(&params);
        assert!(adam_step(&mut state, &mut params, &grad, &AdamHyper::default()).is_err());
    }

    #[test]
    fn train_perfect_start_stays_perfect() {
        let (spec, p) = abs_net();
        let (xs, ys) = f1_grid();
        let hyper = TrainHyper::new(50, 0.09);
        let r = train_run(&spec, &p, &xs, &ys, &hyper, 0).unwrap();
        assert!(r.final_loss < 1e-12);
        assert!(!r.collapsed);
    }

    #[test]
    fn train_born_dead_flatlines_at_target_second_moment() {
        // All hidden units off on the whole grid: output is the constant b2.
        let spec = NetSpec::new(vec![1, 2, 1], Activation::ReLU).unwrap();
        let mut p = ParamSet::zeros(&spec);
        p.layers[0].weights = vec![1.0, 1.0];
        p.layers[0].bias = vec![-1e3, -1e3];
        let (xs, ys) = f1_grid();
        let hyper = TrainHyper::new(200, 0.09);
        let r = train_run(&spec, &p, &xs, &ys, &hyper, 0).unwrap();
        assert!(r.collapsed);
        // Adam drives b2 toward the target mean; the loss can never go below
        // the variance of the targets, which exceeds the 0.09 threshold.
        let mean: f64 = ys.iter().map(|y| y[0]).sum::<f64>() / ys.len() as f64;
        let var: f64 =
            ys.iter().map(|y| (y[0] - mean) * (y[0] - mean)).sum::<f64>() / ys.len() as f64;
        assert!(var > 0.09);
        assert!(r.final_loss >= var - 1e-9);
    }

    #[test]
    fn train_is_deterministic() {
        let spec = NetSpec::new(vec![1, 2, 2, 1], Activation::ReLU).unwrap();
        let mut p = ParamSet::zeros(&spec);
        let mut c = 0.1;
        p.for_each_mut(|v| {
            *v = c;
            c = -c * 0.9;
        });
        let (xs, ys) = f1_grid();
        let hyper = TrainHyper::new(100, 0.09);
        let a = train_run(&spec, &p, &xs, &ys, &hyper, 5).unwrap();
        let b = train_run(&spec, &p, &xs, &ys, &hyper, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn positive_homogeneity_without_bias() {
        let spec = NetSpec::new(vec![2, 3, 2], Activation::ReLU).unwrap();
        let mut p = ParamSet::zeros(&spec);
        let vals = [0.4, -0.7, 1.2, 0.3, -0.2, 0.8, 0.5, -1.1, 0.9, 0.2, -0.6, 1.3];
        let mut it = vals.iter();
        for l in &mut p.layers {
            for w in &mut l.weights {
                *w = *it.next().unwrap();
            }
        }
        let x = [0.3, -0.5];
        let y1 = forward(&spec, &p, &x).unwrap();
        let c = 2.5;
        let y2 = forward(&spec, &p, &[c * x[0], c * x[1]]).unwrap();
        for (a, b) in y1.iter().zip(y2.iter()) {
            assert!((c * a - b).abs() < 1e-12);
        }
    }
}
