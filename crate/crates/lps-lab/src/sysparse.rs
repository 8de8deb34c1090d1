//! Text format for polynomial systems: one equation per line, terms joined
//! by `+`/`-`, each term `coeff * x1^e1 * ... * xk^ek` (coefficient and
//! exponents optional). `#` starts a comment.

use lps_core::homotopy::{PolySystem, Term};
use lps_core::CoreError;

#[derive(Debug, Clone, PartialEq)]
pub struct SysParseError {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for SysParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "system parse error at line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for SysParseError {}

/// Split an equation into signed term strings at top-level `+`/`-`
/// (a sign directly after `^`, `e`, or `E` belongs to a number).
fn split_terms(line: &str) -> Vec<(f64, String)> {
    let mut terms = Vec::new();
    let mut current = String::new();
    let mut sign = 1.0;
    let mut prev: Option<char> = None;
    for ch in line.chars() {
        let in_number_exponent = matches!(prev, Some('e') | Some('E') | Some('^'));
        if (ch == '+' || ch == '-') && !in_number_exponent {
            if !current.trim().is_empty() {
                terms.push((sign, current.trim().to_string()));
            }
            current = String::new();
            sign = if ch == '-' { -1.0 } else { 1.0 };
        } else {
            current.push(ch);
        }
        if !ch.is_whitespace() {
            prev = Some(ch);
        }
    }
    if !current.trim().is_empty() {
        terms.push((sign, current.trim().to_string()));
    }
    terms
}

/// Parse one factor: either a numeric coefficient or `x<idx>[^<exp>]`.
/// Returns (coeff multiplier, optional (var index, exponent)).
fn parse_factor(factor: &str) -> Result<(f64, Option<(usize, u32)>), String> {
    let f = factor.trim();
    if f.is_empty() {
        return Err("empty factor".into());
    }
    if let Some(rest) = f.strip_prefix('x') {
        let (var, exp) = match rest.split_once('^') {
            Some((v, e)) => (v, e),
            None => (rest, "1"),
        };
        let idx: usize = var
            .trim()
            .parse()
            .map_err(|_| format!("bad variable '{f}'"))?;
        if idx == 0 {
            return Err(format!("variables are numbered from x1, got '{f}'"));
        }
        let exp: u32 = exp
            .trim()
            .parse()
            .map_err(|_| format!("bad exponent in '{f}'"))?;
        Ok((1.0, Some((idx - 1, exp))))
    } else {
        let c: f64 = f.parse().map_err(|_| format!("bad coefficient '{f}'"))?;
        Ok((c, None))
    }
}

struct SparseTerm {
    coeff: f64,
    powers: Vec<(usize, u32)>,
}

fn parse_term(sign: f64, body: &str, num_vars: &mut usize) -> Result<SparseTerm, String> {
    let mut coeff = sign;
    let mut powers: Vec<(usize, u32)> = Vec::new();
    for factor in body.split('*') {
        let (c, var) = parse_factor(factor)?;
        coeff *= c;
        if let Some((idx, exp)) = var {
            *num_vars = (*num_vars).max(idx + 1);
            if let Some(p) = powers.iter_mut().find(|p| p.0 == idx) {
                p.1 += exp;
            } else {
                powers.push((idx, exp));
            }
        }
    }
    Ok(SparseTerm { coeff, powers })
}

/// Parse a whole system. The variable count is the highest index that
/// appears; every equation shares it.
pub fn parse_system(text: &str) -> Result<PolySystem, SysParseError> {
    let mut sparse_eqs: Vec<Vec<SparseTerm>> = Vec::new();
    let mut num_vars = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw.split_once('#') {
            Some((before, _)) => before.trim(),
            None => raw.trim(),
        };
        if line.is_empty() {
            continue;
        }
        let mut terms = Vec::new();
        let split = split_terms(line);
        if split.is_empty() {
            return Err(SysParseError {
                line: lineno,
                message: "no terms".into(),
            });
        }
        for (sign, body) in split {
            terms.push(parse_term(sign, &body, &mut num_vars).map_err(|message| {
                SysParseError {
                    line: lineno,
                    message,
                }
            })?);
        }
        sparse_eqs.push(terms);
    }
    if sparse_eqs.is_empty() {
        return Err(SysParseError {
            line: 0,
            message: "empty system".into(),
        });
    }
    let equations: Vec<Vec<Term>> = sparse_eqs
        .into_iter()
        .map(|eq| {
            eq.into_iter()
                .map(|t| {
                    let mut exponents = vec![0u32; num_vars];
                    for (idx, exp) in t.powers {
                        exponents[idx] += exp;
                    }
                    Term {
                        coeff: num_complex::Complex64::new(t.coeff, 0.0),
                        exponents,
                    }
                })
                .collect()
        })
        .collect();
    PolySystem::new(num_vars, equations).map_err(|e: CoreError| SysParseError {
        line: 0,
        message: e.to_string(),
    })
}
