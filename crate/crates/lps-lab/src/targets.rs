//! The four benchmark target functions and their sample grids.

use lps_core::error::CoreError;
use lps_core::net::{Activation, NetSpec};

/// Benchmark target: f1(x) = |x|, f2(x) = x sin(5x),
/// f3(x) = 1_{x>0} + 0.2 sin(5x), f4(x1,x2) = (|x1+x2|, |x1-x2|).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetFunction {
    F1,
    F2,
    F3,
    F4,
}

impl TargetFunction {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "f1" => Ok(TargetFunction::F1),
            "f2" => Ok(TargetFunction::F2),
            "f3" => Ok(TargetFunction::F3),
            "f4" => Ok(TargetFunction::F4),
            other => Err(format!("unknown target function '{other}'")),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TargetFunction::F1 => "f1",
            TargetFunction::F2 => "f2",
            TargetFunction::F3 => "f3",
            TargetFunction::F4 => "f4",
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            TargetFunction::F4 => 2,
            _ => 1,
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            TargetFunction::F4 => 2,
            _ => 1,
        }
    }

    pub fn sample_count(&self) -> usize {
        match self {
            TargetFunction::F1 | TargetFunction::F2 => 21,
            TargetFunction::F3 => 100,
            TargetFunction::F4 => 441,
        }
    }

    pub fn collapse_threshold(&self) -> f64 {
        match self {
            TargetFunction::F1 => 0.09,
            _ => 0.2,
        }
    }

    /// The architecture the benchmarks use: 10 hidden layers of width 2 for
    /// the 1D targets, 20 hidden layers of width 4 for the 2D target.
    pub fn default_widths(&self) -> Vec<usize> {
        match self {
            TargetFunction::F4 => {
                let mut w = vec![2];
                w.extend(std::iter::repeat(4).take(20));
                w.push(2);
                w
            }
            _ => {
                let mut w = vec![1];
                w.extend(std::iter::repeat(2).take(10));
                w.push(1);
                w
            }
        }
    }

    pub fn default_spec(&self) -> NetSpec {
        NetSpec::new(self.default_widths(), Activation::ReLU).expect("static widths")
    }
}

/// Evaluate the target at `x`. The f3 indicator uses strict inequality:
/// 1 for x > 0, 0 for x <= 0.
pub fn eval_target(t: TargetFunction, x: &[f64]) -> Result<Vec<f64>, CoreError> {
    if x.len() != t.input_dim() {
        return Err(CoreError::ShapeMismatch("target input dimension"));
    }
    Ok(match t {
        TargetFunction::F1 => vec![x[0].abs()],
        TargetFunction::F2 => vec![x[0] * (5.0 * x[0]).sin()],
        TargetFunction::F3 => {
            let ind = if x[0] > 0.0 { 1.0 } else { 0.0 };
            vec![ind + 0.2 * (5.0 * x[0]).sin()]
        }
        TargetFunction::F4 => vec![(x[0] + x[1]).abs(), (x[0] - x[1]).abs()],
    })
}

fn linspace(count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| -1.0 + 2.0 * i as f64 / (count - 1) as f64)
        .collect()
}

/// Endpoint-inclusive uniform grid on [-1,1]^dim with the target's declared
/// sample count, plus targets.
pub fn make_dataset(t: TargetFunction) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let inputs: Vec<Vec<f64>> = match t {
        TargetFunction::F4 => {
            let axis = linspace(21);
            let mut pts = Vec::with_capacity(441);
            for &a in &axis {
                for &b in &axis {
                    pts.push(vec![a, b]);
                }
            }
            pts
        }
        _ => linspace(t.sample_count()).into_iter().map(|x| vec![x]).collect(),
    };
    let targets = inputs
        .iter()
        .map(|x| eval_target(t, x).expect("grid matches dimension"))
        .collect();
    (inputs, targets)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f1_and_f4_values() {
        assert_eq!(eval_target(TargetFunction::F1, &[0.5]).unwrap(), vec![0.5]);
        assert_eq!(
            eval_target(TargetFunction::F4, &[1.0, -1.0]).unwrap(),
            vec![0.0, 2.0]
        );
    }

    #[test]
    fn f3_strict_indicator_at_zero() {
        assert_eq!(eval_target(TargetFunction::F3, &[0.0]).unwrap(), vec![0.0]);
        assert!(eval_target(TargetFunction::F3, &[1e-9]).unwrap()[0] > 0.9);
    }

    #[test]
    fn dataset_grids() {
        let (xs, _) = make_dataset(TargetFunction::F1);
        assert_eq!(xs.len(), 21);
        assert_eq!(xs[0], vec![-1.0]);
        assert_eq!(*xs.last().unwrap(), vec![1.0]);
        assert!((xs[1][0] - (-0.9)).abs() < 1e-12);

        let (xs, _) = make_dataset(TargetFunction::F3);
        assert_eq!(xs.len(), 100);
        assert!((xs[1][0] - xs[0][0] - 2.0 / 99.0).abs() < 1e-12);

        let (xs, ys) = make_dataset(TargetFunction::F4);
        assert_eq!(xs.len(), 441);
        assert_eq!(ys[0].len(), 2);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        assert!(eval_target(TargetFunction::F4, &[0.1]).is_err());
    }
}
