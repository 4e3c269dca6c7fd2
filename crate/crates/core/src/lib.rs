// Copyright 2026 The chaintransport Authors
// SPDX-License-Identifier: Apache-2.0

//! Single-excitation transport through a tilted, dephased tight-binding chain
//! terminated by an irreversible sink.
//!
//! Energies and rates are in units of the hopping Ω, times in ħ/Ω.

pub mod analytics;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod liouvillian;
pub mod model;
pub mod nonhermitian;
pub mod ode;

pub use error::{Error, Result};
pub use model::{ChainParams, Disorder, InitialState};
