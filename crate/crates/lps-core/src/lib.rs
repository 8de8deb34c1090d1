//! Core numerics for a small weight-initialization laboratory: Legendre
//! approximation of activation functions, dense feed-forward networks with
//! reverse-mode gradients and Adam, layer-selective re-initialization schemes,
//! dying-ReLU probability estimators and bounds, and a predictor-corrector
//! homotopy continuation solver for polynomial-activation fitting systems.
//!
//! The crate is `no_std` (with `alloc`); all IO, file formats, and the CLI
//! live in the companion `lps-lab` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod deadness;
pub mod error;
pub mod homotopy;
pub mod init;
pub mod net;
pub mod poly_approx;
pub mod quadrature;
pub mod rng;

pub use error::CoreError;
