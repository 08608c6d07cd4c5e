//! Time-harmonic elastic (Navier) wave scattering from finitely many
//! point-like scatterers and a rigid extended obstacle, together with
//! factorization-method imaging from far-field data.
//!
//! The crate is organised bottom-up:
//!
//! * [`special`]: Bessel/Hankel functions of orders 0 and 1.
//! * [`greens`]: elastic medium, Kupradze Green's tensors (dynamic, static,
//!   static inverse), the renormalisation constant, far-field kernels and
//!   plane waves, in 2D and 3D.
//! * [`foldy`]: point-interaction forward solver (interaction matrix,
//!   scattered/far fields, boundary-condition residuals).
//! * [`bie`]: 2D Nyström single-layer solver for a rigid obstacle.
//! * [`multiscale`]: combined solver for an obstacle plus point scatterers.
//! * [`farfield`]: discrete far-field operators over direction grids.
//! * [`imaging`]: `F_#`, its eigensystem, and the Picard indicator.
//! * [`io`]: CSV / PGM serialisation of far-field data and indicator grids.
//! * [`scenario`]: declarative scene descriptions used by the CLI.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bie;
pub mod farfield;
pub mod foldy;
pub mod greens;
pub mod imaging;
pub mod io;
pub mod linalg;
pub mod multiscale;
pub mod scenario;
pub mod special;

#[cfg(doctest)]
mod book;

pub use num_complex::Complex64;

/// Errors produced by the numerical routines and file formats.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singular kernel evaluation: {0}")]
    Singularity(String),
    #[error("singular matrix: {0}")]
    SingularMatrix(String),
    #[error("resonance at omega = {omega}: condition estimate {condition:e}")]
    Resonance { omega: f64, condition: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
