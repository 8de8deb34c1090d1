//! Run configuration: defaults from the benchmark tables, a line-oriented
//! `key = value` file format, and validation.

use std::fmt::Write as _;
use std::path::Path;

use lps_core::init::{BiasMode, InitKind, InitScheme, SelectionMode};
use lps_core::net::{Activation, NetSpec};

use crate::targets::TargetFunction;

/// Configuration of one training campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub target: TargetFunction,
    pub widths: Vec<usize>,
    pub scheme: InitScheme,
    pub runs: usize,
    pub base_seed: u64,
    pub lr: f64,
    pub steps: usize,
    pub collapse_threshold: f64,
}

/// Configuration errors carry the offending key and line number.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: usize,
    pub key: String,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "config error at line {} (key '{}'): {}",
            self.line, self.key, self.message
        )
    }
}

impl std::error::Error for ConfigError {}

impl RunConfig {
    /// Table defaults for a target: its architecture, 1e-3 Adam, 4000 steps,
    /// and the per-target collapse threshold.
    pub fn defaults(target: TargetFunction, scheme: InitScheme) -> Self {
        RunConfig {
            target,
            widths: target.default_widths(),
            scheme,
            runs: 100,
            base_seed: 0,
            lr: 1e-3,
            steps: 4000,
            collapse_threshold: target.collapse_threshold(),
        }
    }

    pub fn spec(&self) -> NetSpec {
        let activation = if self.scheme.kind == InitKind::LpsTanh {
            Activation::Tanh
        } else {
            Activation::ReLU
        };
        NetSpec::new(self.widths.clone(), activation).expect("validated widths")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let err = |key: &str, message: String| ConfigError {
            line: 0,
            key: key.into(),
            message,
        };
        if self.widths.len() < 2 || self.widths.iter().any(|&w| w == 0) {
            return Err(err("widths", "need at least two positive widths".into()));
        }
        if self.widths[0] != self.target.input_dim() {
            return Err(err(
                "widths",
                format!(
                    "first width {} does not match {} input dimension {}",
                    self.widths[0],
                    self.target.name(),
                    self.target.input_dim()
                ),
            ));
        }
        if *self.widths.last().unwrap() != self.target.output_dim() {
            return Err(err(
                "widths",
                format!(
                    "last width {} does not match {} output dimension {}",
                    self.widths.last().unwrap(),
                    self.target.name(),
                    self.target.output_dim()
                ),
            ));
        }
        if self.runs == 0 {
            return Err(err("runs", "at least one run required".into()));
        }
        if self.steps == 0 {
            return Err(err("steps", "at least one step required".into()));
        }
        if !(self.lr > 0.0) {
            return Err(err("lr", "learning rate must be positive".into()));
        }
        if self.scheme.validate().is_err() {
            return Err(err(
                "reinit",
                "reinit must be 0 unless scheme is lps or lps-tanh".into(),
            ));
        }
        Ok(())
    }
}

pub fn parse_scheme_kind(s: &str) -> Result<InitKind, String> {
    match s.to_ascii_lowercase().as_str() {
        "he" => Ok(InitKind::He),
        "xavier" => Ok(InitKind::Xavier),
        "lps" => Ok(InitKind::Lps),
        "lps-tanh" | "lpstanh" => Ok(InitKind::LpsTanh),
        other => Err(format!("unknown scheme '{other}'")),
    }
}

pub fn scheme_kind_name(kind: InitKind) -> &'static str {
    match kind {
        InitKind::He => "he",
        InitKind::Xavier => "xavier",
        InitKind::Lps => "lps",
        InitKind::LpsTanh => "lps-tanh",
    }
}

pub fn parse_selection(s: &str) -> Result<SelectionMode, String> {
    match s.to_ascii_lowercase().as_str() {
        "bernoulli" => Ok(SelectionMode::BernoulliP),
        "bits" => Ok(SelectionMode::BitDecode),
        other => Err(format!("unknown selection mode '{other}'")),
    }
}

pub fn selection_name(mode: SelectionMode) -> &'static str {
    match mode {
        SelectionMode::BernoulliP => "bernoulli",
        SelectionMode::BitDecode => "bits",
    }
}

pub fn parse_widths(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|w| {
            w.trim()
                .parse::<usize>()
                .map_err(|_| format!("bad width '{}'", w.trim()))
        })
        .collect()
}

/// Parse a `key = value` config file. Unknown keys are rejected with the
/// offending key and line; omitted keys take the benchmark-table defaults.
pub fn load_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let mut target = None;
    let mut scheme_kind = None;
    let mut reinit = None;
    let mut selection = None;
    let mut bias = None;
    let mut widths = None;
    let mut runs = None;
    let mut base_seed = None;
    let mut lr = None;
    let mut steps = None;
    let mut collapse_threshold = None;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError {
                line: lineno,
                key: line.to_string(),
                message: "expected 'key = value'".into(),
            });
        };
        let key = key.trim();
        let value = value.trim();
        let bad = |message: String| ConfigError {
            line: lineno,
            key: key.to_string(),
            message,
        };
        match key {
            "target" => target = Some(TargetFunction::parse(value).map_err(bad)?),
            "scheme" => scheme_kind = Some(parse_scheme_kind(value).map_err(bad)?),
            "reinit" => {
                reinit = Some(value.parse::<u32>().map_err(|e| bad(e.to_string()))?)
            }
            "selection" => selection = Some(parse_selection(value).map_err(bad)?),
            "bias" => {
                bias = Some(match value {
                    "sampled" => BiasMode::Sampled,
                    "zero" => BiasMode::Zero,
                    other => return Err(bad(format!("unknown bias mode '{other}'"))),
                })
            }
            "widths" => widths = Some(parse_widths(value).map_err(bad)?),
            "runs" => runs = Some(value.parse::<usize>().map_err(|e| bad(e.to_string()))?),
            "seed" => base_seed = Some(value.parse::<u64>().map_err(|e| bad(e.to_string()))?),
            "lr" => lr = Some(value.parse::<f64>().map_err(|e| bad(e.to_string()))?),
            "steps" => steps = Some(value.parse::<usize>().map_err(|e| bad(e.to_string()))?),
            "collapse_threshold" => {
                collapse_threshold = Some(value.parse::<f64>().map_err(|e| bad(e.to_string()))?)
            }
            other => {
                return Err(ConfigError {
                    line: lineno,
                    key: other.to_string(),
                    message: "unknown key".into(),
                })
            }
        }
    }

    let target = target.ok_or(ConfigError {
        line: 0,
        key: "target".into(),
        message: "missing required key".into(),
    })?;
    let scheme = InitScheme {
        kind: scheme_kind.unwrap_or(InitKind::He),
        reinit_count: reinit.unwrap_or(0),
        selection_mode: selection.unwrap_or(SelectionMode::BernoulliP),
        bias_mode: bias.unwrap_or(BiasMode::Sampled),
    };
    let defaults = RunConfig::defaults(target, scheme);
    let config = RunConfig {
        widths: widths.unwrap_or(defaults.widths),
        runs: runs.unwrap_or(defaults.runs),
        base_seed: base_seed.unwrap_or(defaults.base_seed),
        lr: lr.unwrap_or(defaults.lr),
        steps: steps.unwrap_or(defaults.steps),
        collapse_threshold: collapse_threshold.unwrap_or(defaults.collapse_threshold),
        ..defaults
    };
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        line: 0,
        key: path.display().to_string(),
        message: e.to_string(),
    })?;
    load_config_str(&text)
}

/// Serialize a config; `load_config_str(emit_config(c)) == c`.
pub fn emit_config(config: &RunConfig) -> String {
    let widths: Vec<String> = config.widths.iter().map(|w| w.to_string()).collect();
    let mut out = String::new();
    let _ = writeln!(out, "target = {}", config.target.name());
    let _ = writeln!(out, "scheme = {}", scheme_kind_name(config.scheme.kind));
    let _ = writeln!(out, "reinit = {}", config.scheme.reinit_count);
    let _ = writeln!(out, "selection = {}", selection_name(config.scheme.selection_mode));
    let _ = writeln!(
        out,
        "bias = {}",
        match config.scheme.bias_mode {
            BiasMode::Sampled => "sampled",
            BiasMode::Zero => "zero",
        }
    );
    let _ = writeln!(out, "widths = {}", widths.join(","));
    let _ = writeln!(out, "runs = {}", config.runs);
    let _ = writeln!(out, "seed = {}", config.base_seed);
    let _ = writeln!(out, "lr = {}", config.lr);
    let _ = writeln!(out, "steps = {}", config.steps);
    let _ = writeln!(out, "collapse_threshold = {}", config.collapse_threshold);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let c = load_config_str("target = f1\nscheme = he\n").unwrap();
        assert_eq!(c.target, TargetFunction::F1);
        assert_eq!(c.widths, TargetFunction::F1.default_widths());
        assert_eq!(c.steps, 4000);
        assert!((c.lr - 1e-3).abs() < 1e-15);
        assert!((c.collapse_threshold - 0.09).abs() < 1e-15);
    }

    #[test]
    fn unknown_key_names_line() {
        let err = load_config_str("target = f1\nbogus = 3\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert_eq!(err.key, "bogus");
    }

    #[test]
    fn inconsistent_widths_rejected() {
        let err = load_config_str("target = f4\nwidths = 1,2,1\n").unwrap_err();
        assert_eq!(err.key, "widths");
    }

    #[test]
    fn reinit_without_lps_rejected() {
        assert!(load_config_str("target = f1\nscheme = he\nreinit = 2\n").is_err());
    }

    #[test]
    fn round_trip_identity() {
        let c = load_config_str(
            "target = f2\nscheme = lps\nreinit = 3\nruns = 7\nseed = 42\nlr = 0.002\n",
        )
        .unwrap();
        let c2 = load_config_str(&emit_config(&c)).unwrap();
        assert_eq!(c, c2);
    }
}
