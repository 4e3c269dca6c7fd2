// Copyright 2026 The chaintransport Authors
// SPDX-License-Identifier: Apache-2.0

//! Grid search for the transfer-time-minimizing field.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::transfer_time;
use crate::analytics::optimal_field_estimate;
use crate::error::{Error, Result};
use crate::model::ChainParams;

/// Relative τ tolerance defining the plateau around the optimum.
pub const PLATEAU_TOLERANCE: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalFieldResult {
    pub e0_opt: f64,
    pub tau_min: f64,
    /// Contiguous grid range around `e0_opt` where τ ≤ 1.1·τ_min.
    pub plateau: (f64, f64),
    /// Spectral estimator with right eigenvectors.
    pub estimator_e0: f64,
    /// Spectral estimator with left eigenvectors.
    pub estimator_e0_left: Option<f64>,
    /// Minimizer sits on the first or last grid point.
    pub unbracketed: bool,
    /// τ along the grid; `None` where the solver failed.
    pub taus: Vec<(f64, Option<f64>)>,
    /// Estimator objective along the grid: (E₀, right, left).
    pub estimator_objective: Vec<(f64, f64, f64)>,
}

impl OptimalFieldResult {
    pub fn estimator_in_plateau(&self) -> bool {
        self.plateau.0 <= self.estimator_e0 && self.estimator_e0 <= self.plateau.1
    }
}

/// τ over a sorted field grid, its minimizer and the 10% plateau.
pub fn optimal_field_search(params: &ChainParams, psi0: &[Complex64], grid: &[f64]) -> Result<OptimalFieldResult> {
    params.validate()?;
    if grid.is_empty() || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("field grid must be non-empty and strictly increasing".into()));
    }
    let taus: Vec<(f64, Option<f64>)> = grid
        .par_iter()
        .map(|&e0| (e0, transfer_time(&params.clone().with_field(e0), None, psi0).ok()))
        .collect();
    let (best, tau_min) = taus
        .iter()
        .enumerate()
        .filter_map(|(i, (_, t))| t.map(|t| (i, t)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::Consistency("transfer time failed at every grid point".into()))?;

    let within = |i: usize| taus[i].1.is_some_and(|t| t <= (1.0 + PLATEAU_TOLERANCE) * tau_min);
    let mut lo = best;
    while lo > 0 && within(lo - 1) {
        lo -= 1;
    }
    let mut hi = best;
    while hi + 1 < taus.len() && within(hi + 1) {
        hi += 1;
    }
    let estimate = optimal_field_estimate(psi0, params, grid)?;
    Ok(OptimalFieldResult {
        e0_opt: grid[best],
        tau_min,
        plateau: (grid[lo], grid[hi]),
        estimator_e0: estimate.e0_opt,
        estimator_e0_left: estimate.e0_opt_left,
        unbracketed: best == 0 || best + 1 == grid.len(),
        taus,
        estimator_objective: estimate.objective,
    })
}
