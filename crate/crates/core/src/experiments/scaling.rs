// Copyright 2026 The chaintransport Authors
// SPDX-License-Identifier: Apache-2.0

//! Minimal transfer time against chain length for several initial states.

use serde::Serialize;

use super::optimal::optimal_field_search;
use super::transfer_time;
use crate::analytics::{critical_field, tau_heuristic};
use crate::error::{Error, Result};
use crate::model::{build_initial_state, ChainParams, InitialState};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n_sites: usize,
    /// State actually used; localized sites beyond the chain end are clamped to N.
    pub state: InitialState,
    pub e0: f64,
    pub tau_min: f64,
    /// Heuristic τ̃ + τ_L* for localized states.
    pub heuristic: Option<f64>,
}

/// Gaussian states use the grid-search optimal field (`grid_points` over
/// [−2Ẽ₀, 2Ẽ₀]); localized and flat states are evaluated at E₀ = 0.
pub fn n_scaling_comparison(
    base: &ChainParams,
    sizes: &[usize],
    states: &[InitialState],
    grid_points: usize,
) -> Result<Vec<ScalingRow>> {
    if grid_points < 3 {
        return Err(Error::InvalidParameter("need at least 3 field grid points".into()));
    }
    let mut rows = Vec::with_capacity(sizes.len() * states.len());
    for &n in sizes {
        let params = ChainParams {
            n_sites: n,
            ..base.clone()
        }
        .with_field(0.0);
        params.validate()?;
        for state in states {
            let state = match *state {
                InitialState::Localized { site } => InitialState::localized(site.min(n)),
                s => s,
            };
            let psi = build_initial_state(&state, n)?;
            let (e0, tau_min) = match state {
                InitialState::Gaussian { .. } => {
                    let ec = critical_field(n, params.hopping);
                    let grid: Vec<f64> = (0..grid_points)
                        .map(|i| -2.0 * ec + 4.0 * ec * i as f64 / (grid_points - 1) as f64)
                        .collect();
                    let r = optimal_field_search(&params, &psi, &grid)?;
                    (r.e0_opt, r.tau_min)
                }
                _ => (0.0, transfer_time(&params, None, &psi)?),
            };
            let heuristic = match state {
                InitialState::Localized { site } => tau_heuristic(
                    site,
                    n,
                    params.hopping,
                    params.dephasing_rate,
                    params.sink_rate,
                    0.0,
                )
                .ok()
                .map(|h| h.tau),
                _ => None,
            };
            rows.push(ScalingRow {
                n_sites: n,
                state,
                e0,
                tau_min,
                heuristic,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_chain_handles_every_family() {
        let base = ChainParams::new(2).with_sink_rate(2.0).with_dephasing(1e-6);
        let states = [InitialState::localized(3), InitialState::reference_gaussian(), InitialState::Flat];
        let rows = n_scaling_comparison(&base, &[2], &states, 5).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].state, InitialState::localized(2));
        assert!(rows.iter().all(|r| r.tau_min > 0.0));
        assert!(rows[0].heuristic.is_some());
    }
}
