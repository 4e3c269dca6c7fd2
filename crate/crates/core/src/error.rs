// Copyright 2026 The chaintransport Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("disorder vector has length {got}, expected {expected}")]
    DisorderLength { expected: usize, got: usize },

    #[error("invalid initial state: {0}")]
    InvalidState(String),

    #[error("eigendecomposition failed: {0}")]
    Decomposition(String),

    /// Biorthogonality residual above tolerance, typically near an exceptional point.
    #[error("near-defective decomposition (biorthogonality residual {residual:.3e})")]
    Defective { residual: f64 },

    #[error("mode {index} does not decay (Im E = {imag:.3e}); transfer time diverges")]
    NonDecayingMode { index: usize, imag: f64 },

    #[error("superoperator dimension {dimension} exceeds the dense cap {cap}")]
    SizeLimit { dimension: usize, cap: usize },

    #[error("eigenvector matrix is ill-conditioned (condition estimate {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("time integration unconverged: partial tau {partial:.6e}, sink population {sink_population:.6e}, bound {bound:.6e}")]
    Unconverged {
        partial: f64,
        sink_population: f64,
        bound: f64,
    },

    #[error("rate has a pole: {0}")]
    Pole(String),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable tag, stable across releases.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::DisorderLength { .. } => "disorder_length",
            Error::InvalidState(_) => "invalid_state",
            Error::Decomposition(_) => "decomposition",
            Error::Defective { .. } => "defective",
            Error::NonDecayingMode { .. } => "non_decaying_mode",
            Error::SizeLimit { .. } => "size_limit",
            Error::IllConditioned { .. } => "ill_conditioned",
            Error::Consistency(_) => "consistency",
            Error::Unconverged { .. } => "unconverged",
            Error::Pole(_) => "pole",
            Error::InvalidSweep(_) => "invalid_sweep",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
