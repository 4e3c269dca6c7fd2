// Copyright 2026 The chaintransport Authors
// SPDX-License-Identifier: Apache-2.0

//! Parameter sweeps, ensembles and the derived transport studies.

pub mod current;
pub mod optimal;
pub mod presets;
pub mod scaling;
pub mod sweep;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::liouvillian::{self, DEFAULT_DIMENSION_CAP};
use crate::model::ChainParams;
use crate::nonhermitian;

pub use current::{conductance_vs_dephasing, current_and_conductance, log_log_slope, CurrentResult};
pub use optimal::{optimal_field_search, OptimalFieldResult};
pub use scaling::{n_scaling_comparison, ScalingRow};
pub use sweep::{disorder_study, run_sweep, Axis, Ensemble, Observable, Parameter, Scale, SweepResult, SweepSpec};

/// τ by the cheapest exact route: the Liouvillian spectrum (with time
/// stepping behind it) while the superoperator fits under the dimension cap,
/// otherwise the non-Hermitian spectrum when there is no dephasing.
///
/// Without dephasing the non-Hermitian route also takes over when the
/// Liouvillian cannot meet its accuracy checks, which happens when nearly
/// dark modes crowd the steady state.
pub fn transfer_time(params: &ChainParams, disorder: Option<&[f64]>, psi0: &[Complex64]) -> Result<f64> {
    params.validate()?;
    let dimension = (params.n_sites + 1).pow(2);
    if dimension <= DEFAULT_DIMENSION_CAP {
        match liouvillian::transfer_time_liouville(params, disorder, psi0) {
            Ok(t) => return Ok(t.tau),
            Err(Error::Consistency(_) | Error::Unconverged { .. }) if params.dephasing_rate == 0.0 => {}
            Err(e) => return Err(e),
        }
    }
    if params.dephasing_rate == 0.0 {
        let spec = nonhermitian::effective_spectrum(params, disorder)?;
        return nonhermitian::transfer_time_spectral(&spec, psi0, params.sink_rate);
    }
    Err(Error::SizeLimit {
        dimension,
        cap: DEFAULT_DIMENSION_CAP,
    })
}

/// Nine significant digits; fixed notation for moderate magnitudes.
pub fn format_value(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..9).contains(&mag) {
        let decimals = (8 - mag).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.8e}")
    }
}
