// Copyright 2026 The chaintransport Authors
// SPDX-License-Identifier: Apache-2.0

//! Charge current I(E₀) = 1/τ(−E₀) − 1/τ(E₀) and the linear-response
//! conductance I = g·V with V = N·E₀ (e = ħ = 1).

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::transfer_time;
use crate::analytics::critical_field;
use crate::error::{Error, Result};
use crate::model::ChainParams;

/// Default fit window as a fraction of the critical field.
pub const DEFAULT_FIT_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurrentResult {
    pub e0_grid: Vec<f64>,
    /// `None` where τ failed at either sign.
    pub current: Vec<Option<f64>>,
    /// Least-squares slope of I against V over |E₀| ≤ `fit_window`.
    pub conductance: f64,
    pub fit_window: f64,
    /// RMS deviation of the fitted points from I = g·V.
    pub residual: f64,
    pub fit_points: usize,
}

/// Orders f64 keys by bit pattern so that ±E₀ pairs share τ evaluations.
fn key(x: f64) -> i64 {
    let b = x.to_bits() as i64;
    if b < 0 {
        i64::MIN - b
    } else {
        b
    }
}

pub fn current_and_conductance(
    params: &ChainParams,
    psi0: &[Complex64],
    e0_grid: &[f64],
    fit_window: Option<f64>,
) -> Result<CurrentResult> {
    params.validate()?;
    if e0_grid.is_empty() || e0_grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("field grid must be non-empty and finite".into()));
    }
    let window = fit_window.unwrap_or(DEFAULT_FIT_FRACTION * critical_field(params.n_sites, params.hopping));
    if !(window > 0.0) {
        return Err(Error::InvalidParameter(format!("fit window must be > 0, got {window}")));
    }

    let mut fields: BTreeMap<i64, f64> = BTreeMap::new();
    for &e in e0_grid {
        fields.insert(key(e), e);
        fields.insert(key(-e), -e);
    }
    let fields: Vec<f64> = fields.into_values().collect();
    let taus: Vec<Option<f64>> = fields
        .par_iter()
        .map(|&e| transfer_time(&params.clone().with_field(e), None, psi0).ok())
        .collect();
    let lookup: BTreeMap<i64, Option<f64>> = fields.iter().zip(&taus).map(|(e, t)| (key(*e), *t)).collect();

    let current: Vec<Option<f64>> = e0_grid
        .iter()
        .map(|&e| {
            let minus = lookup[&key(-e)]?;
            let plus = lookup[&key(e)]?;
            if e == 0.0 {
                return Some(0.0);
            }
            Some(1.0 / minus - 1.0 / plus)
        })
        .collect();

    let n = params.n_sites as f64;
    let pts: Vec<(f64, f64)> = e0_grid
        .iter()
        .zip(&current)
        .filter(|(e, i)| e.abs() <= window && **e != 0.0 && i.is_some())
        .map(|(e, i)| (n * e, i.unwrap()))
        .collect();
    if pts.is_empty() {
        return Err(Error::InvalidParameter(format!("no nonzero grid field within the fit window {window}")));
    }
    let sxy: f64 = pts.iter().map(|(v, i)| v * i).sum();
    let sxx: f64 = pts.iter().map(|(v, _)| v * v).sum();
    let g = sxy / sxx;
    let residual = (pts.iter().map(|(v, i)| (i - g * v).powi(2)).sum::<f64>() / pts.len() as f64).sqrt();
    Ok(CurrentResult {
        e0_grid: e0_grid.to_vec(),
        current,
        conductance: g,
        fit_window: window,
        residual,
        fit_points: pts.len(),
    })
}

/// Conductance at each dephasing rate, fitted on the same field grid.
pub fn conductance_vs_dephasing(
    params: &ChainParams,
    psi0: &[Complex64],
    dephasing: &[f64],
    e0_grid: &[f64],
    fit_window: Option<f64>,
) -> Result<Vec<(f64, f64)>> {
    dephasing
        .iter()
        .map(|&gp| {
            let r = current_and_conductance(&params.clone().with_dephasing(gp), psi0, e0_grid, fit_window)?;
            Ok((gp, r.conductance))
        })
        .collect()
}

/// Least-squares slope of ln y against ln x over points with x in [lo, hi].
pub fn log_log_slope(points: &[(f64, f64)], lo: f64, hi: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x >= lo && *x <= hi && *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InvalidParameter("slope needs at least two positive points in range".into()));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_initial_state, InitialState};

    #[test]
    fn current_vanishes_at_zero_and_is_odd() {
        let p = ChainParams::new(5).with_sink_rate(2.0).with_dephasing(0.01);
        let psi = build_initial_state(&InitialState::centered_gaussian(5), 5).unwrap();
        let grid = [-0.2, -0.1, 0.0, 0.1, 0.2];
        let r = current_and_conductance(&p, &psi, &grid, None).unwrap();
        assert_eq!(r.current[2], Some(0.0));
        assert_eq!(r.current[0].unwrap(), -r.current[4].unwrap());
        assert_eq!(r.fit_points, 4);
        assert!(r.conductance.is_finite());
    }

    #[test]
    fn empty_fit_window_is_an_error() {
        let p = ChainParams::new(4);
        let psi = build_initial_state(&InitialState::localized(1), 4).unwrap();
        assert!(current_and_conductance(&p, &psi, &[0.0, 5.0], None).is_err());
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = (1..20).map(|i| (i as f64, 3.0 * (i as f64).powf(-2.5))).collect();
        assert!((log_log_slope(&pts, 2.0, 15.0).unwrap() + 2.5).abs() < 1e-12);
        assert!(log_log_slope(&pts, 100.0, 200.0).is_err());
    }

    #[test]
    fn field_keys_are_ordered() {
        let xs = [-2.0, -0.5, 0.0, 1e-300, 3.0];
        assert_eq!(key(-0.0), key(0.0));
        for w in xs.windows(2) {
            assert!(key(w[0]) < key(w[1]));
        }
    }
}
