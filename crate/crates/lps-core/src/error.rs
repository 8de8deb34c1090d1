use core::fmt;

/// Error type shared by all core modules.
#[derive(Debug, Clone, PartialEq)]
pub enum CoreError {
    /// An argument was outside the supported range.
    Range(&'static str),
    /// Shapes of interacting values are inconsistent.
    ShapeMismatch(&'static str),
    /// A numerical procedure failed; carries a residual/diagnostic value.
    Numerical(&'static str, f64),
    /// The requested computation exceeds the configured size cap.
    TooLarge(&'static str),
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::Range(msg) => write!(f, "range error: {msg}"),
            CoreError::ShapeMismatch(msg) => write!(f, "shape mismatch: {msg}"),
            CoreError::Numerical(msg, r) => write!(f, "numerical error: {msg} (residual {r:e})"),
            CoreError::TooLarge(msg) => write!(f, "size cap exceeded: {msg}"),
        }
    }
}

impl core::error::Error for CoreError {}
