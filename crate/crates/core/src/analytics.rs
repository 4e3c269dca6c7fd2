// Copyright 2026 The chaintransport Authors
// SPDX-License-Identifier: Apache-2.0

//! Closed-form and heuristic transfer-time estimates, crossover scales and
//! the spectral optimal-field estimator.
//!
//! Site indices `n` are 1-based, counted from the far end of the chain; site
//! N touches the sink.

use std::f64::consts::PI;

use faer::MatRef;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::ChainParams;
use crate::nonhermitian::{effective_hamiltonian, EffectiveSpectrum};

fn check_site(n: usize, n_sites: usize) -> Result<()> {
    if n == 0 || n > n_sites {
        return Err(Error::InvalidParameter(format!("site {n} outside 1..={n_sites}")));
    }
    Ok(())
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidParameter(format!("{name} must be > 0, got {x}")));
    }
    Ok(())
}

/// Weak-coupling transfer time for an arbitrary chain density matrix, E₀ = γ_φ = 0:
/// τ̃ = (1/γ_out) Σ_jk ρ_jk Σ_α sin(παj/(N+1)) sin(παk/(N+1)) / sin²(παN/(N+1)).
pub fn tau_perturbative_general(rho: MatRef<'_, Complex64>, gamma_out: f64) -> Result<f64> {
    check_positive("gamma_out", gamma_out)?;
    let n = rho.nrows();
    if n == 0 || rho.ncols() != n {
        return Err(Error::InvalidState("density matrix must be square and non-empty".into()));
    }
    let mut trace = 0.0;
    for j in 0..n {
        if rho[(j, j)].re < -1e-12 {
            return Err(Error::InvalidState(format!("negative population at site {}", j + 1)));
        }
        trace += rho[(j, j)].re;
        for k in 0..n {
            if (rho[(j, k)] - rho[(k, j)].conj()).norm() > 1e-10 {
                return Err(Error::InvalidState("density matrix is not Hermitian".into()));
            }
        }
    }
    if (trace - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidState(format!("trace {trace} != 1")));
    }

    let m = (n + 1) as f64;
    let s = |alpha: usize, j: usize| (PI * (alpha * j) as f64 / m).sin();
    let mut kernel = vec![0.0; n * n];
    for alpha in 1..=n {
        let edge = s(alpha, n).powi(2);
        for j in 1..=n {
            for k in 1..=n {
                kernel[(j - 1) + (k - 1) * n] += s(alpha, j) * s(alpha, k) / edge;
            }
        }
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for j in 0..n {
        for k in 0..n {
            sum += rho[(j, k)] * kernel[j + k * n];
        }
    }
    Ok(sum.re / gamma_out)
}

/// τ̃ for a pure chain state.
pub fn tau_perturbative_state(psi: &[Complex64], gamma_out: f64) -> Result<f64> {
    let rho = linalg::outer(psi, psi);
    tau_perturbative_general(rho.as_ref(), gamma_out)
}

/// τ̃ = n(N−n+1)/γ_out for ψ₀ = |n⟩.
pub fn tau_perturbative_localized(n: usize, n_sites: usize, gamma_out: f64) -> Result<f64> {
    check_site(n, n_sites)?;
    check_positive("gamma_out", gamma_out)?;
    Ok((n * (n_sites - n + 1)) as f64 / gamma_out)
}

/// Exact τ for ψ₀ = |n⟩ at E₀ = γ_φ = 0:
/// τ = n(N−n+1)/γ_out + γ_out n(N−n)/(4Ω²).
pub fn tau_localized_closed_form(n: usize, n_sites: usize, gamma_out: f64, hopping: f64) -> Result<f64> {
    check_site(n, n_sites)?;
    check_positive("gamma_out", gamma_out)?;
    check_positive("hopping", hopping)?;
    let (n, nn) = (n as f64, n_sites as f64);
    Ok(n * (nn - n + 1.0) / gamma_out + gamma_out * n * (nn - n) / (4.0 * hopping * hopping))
}

/// γ_out minimizing [`tau_localized_closed_form`], 2Ω√((N−n+1)/(N−n)).
/// `None` for n = N, where τ decreases monotonically in γ_out.
pub fn optimal_sink_rate_localized(n: usize, n_sites: usize, hopping: f64) -> Result<Option<f64>> {
    check_site(n, n_sites)?;
    if n == n_sites {
        return Ok(None);
    }
    let r = (n_sites - n + 1) as f64 / (n_sites - n) as f64;
    Ok(Some(2.0 * hopping * r.sqrt()))
}

/// Förster rate Γ_F = 2Ω²γ_φ/(γ_φ² + E₀²).
pub fn forster_rate(hopping: f64, gamma_phi: f64, e0: f64) -> Result<f64> {
    if !(gamma_phi > 0.0) {
        return Err(Error::Pole(format!("Forster rate needs gamma_phi > 0, got {gamma_phi}")));
    }
    Ok(2.0 * hopping * hopping * gamma_phi / (gamma_phi * gamma_phi + e0 * e0))
}

/// Leegwater rate Γ_L = 2Ω²(γ_φ+γ_out/2)/((γ_φ+γ_out/2)² + E₀²).
pub fn leegwater_rate(hopping: f64, gamma_phi: f64, gamma_out: f64, e0: f64) -> Result<f64> {
    let g = gamma_phi + 0.5 * gamma_out;
    if !(g > 0.0) || gamma_phi < 0.0 || gamma_out < 0.0 {
        return Err(Error::Pole(format!(
            "Leegwater rate needs gamma_phi + gamma_out/2 > 0, got {g}"
        )));
    }
    Ok(2.0 * hopping * hopping * g / (g * g + e0 * e0))
}

/// (Γ_F, Γ_L).
pub fn leegwater_rates(hopping: f64, gamma_phi: f64, gamma_out: f64, e0: f64) -> Result<(f64, f64)> {
    Ok((forster_rate(hopping, gamma_phi, e0)?, leegwater_rate(hopping, gamma_phi, gamma_out, e0)?))
}

/// τ_L* = (N−n)(N−n−1)/(2Γ_F) + n(N−n)/Γ_L.
pub fn tau_leegwater_star(n: usize, n_sites: usize, hopping: f64, gamma_phi: f64, gamma_out: f64, e0: f64) -> Result<f64> {
    check_site(n, n_sites)?;
    let (a, b) = leegwater_weights(n, n_sites);
    let mut tau = 0.0;
    if a > 0.0 {
        tau += a / (2.0 * forster_rate(hopping, gamma_phi, e0)?);
    }
    if b > 0.0 {
        tau += b / leegwater_rate(hopping, gamma_phi, gamma_out, e0)?;
    }
    Ok(tau)
}

/// τ_L* multiplied out:
/// n(N−n)γ_out/(4Ω²) + (N−n)(N+n−1)γ_φ/(4Ω²) + E₀²(N−n)/Ω² [n/(2γ_φ+γ_out) + (N−n−1)/(4γ_φ)].
///
/// Field terms with E₀ = 0 are dropped before division, so γ_φ = 0 is
/// admissible at zero field (the limit taken with E₀/γ_φ → 0).
pub fn tau_leegwater_star_expanded(
    n: usize,
    n_sites: usize,
    hopping: f64,
    gamma_phi: f64,
    gamma_out: f64,
    e0: f64,
) -> Result<f64> {
    check_site(n, n_sites)?;
    let (nf, nn) = (n as f64, n_sites as f64);
    let w2 = hopping * hopping;
    let mut tau = nf * (nn - nf) * gamma_out / (4.0 * w2) + (nn - nf) * (nn + nf - 1.0) * gamma_phi / (4.0 * w2);
    if e0 != 0.0 && n < n_sites {
        let mut bracket = 0.0;
        let lead = 2.0 * gamma_phi + gamma_out;
        if !(lead > 0.0) {
            return Err(Error::Pole("2 gamma_phi + gamma_out must be > 0 at nonzero field".into()));
        }
        bracket += nf / lead;
        if n + 1 < n_sites {
            if !(gamma_phi > 0.0) {
                return Err(Error::Pole("gamma_phi must be > 0 at nonzero field".into()));
            }
            bracket += (nn - nf - 1.0) / (4.0 * gamma_phi);
        }
        tau += e0 * e0 * (nn - nf) / w2 * bracket;
    }
    Ok(tau)
}

fn leegwater_weights(n: usize, n_sites: usize) -> (f64, f64) {
    let r = (n_sites - n) as f64;
    (r * (r - 1.0).max(0.0), n as f64 * r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeuristicEstimate {
    /// τ = τ̃ + τ_L*.
    pub tau: f64,
    pub tau_perturbative: f64,
    pub tau_leegwater: f64,
    /// γ_φ > γ̃_φ(n) or |E₀| > Ẽ₀: the regime where the estimate is meant to hold.
    pub in_validity_domain: bool,
}

/// Heuristic τ for ψ₀ = |n⟩.
pub fn tau_heuristic(n: usize, n_sites: usize, hopping: f64, gamma_phi: f64, gamma_out: f64, e0: f64) -> Result<HeuristicEstimate> {
    let tau_perturbative = tau_perturbative_localized(n, n_sites, gamma_out)?;
    let tau_leegwater = tau_leegwater_star_expanded(n, n_sites, hopping, gamma_phi, gamma_out, e0)?;
    let crit = critical_dephasing(n, n_sites, hopping)?;
    let in_validity_domain = gamma_phi > crit.value || e0.abs() > critical_field(n_sites, hopping);
    Ok(HeuristicEstimate {
        tau: tau_perturbative + tau_leegwater,
        tau_perturbative,
        tau_leegwater,
        in_validity_domain,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalDephasing {
    /// 4Ωn/(N+n).
    pub value: f64,
    /// 4Ω/N, the n-independent rule of thumb.
    pub coarse: f64,
}

pub fn critical_dephasing(n: usize, n_sites: usize, hopping: f64) -> Result<CriticalDephasing> {
    check_site(n, n_sites)?;
    Ok(CriticalDephasing {
        value: 4.0 * hopping * n as f64 / (n_sites + n) as f64,
        coarse: 4.0 * hopping / n_sites as f64,
    })
}

/// Ẽ₀ = 4√2 Ω/N.
pub fn critical_field(n_sites: usize, hopping: f64) -> f64 {
    4.0 * std::f64::consts::SQRT_2 * hopping / n_sites as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalFieldEstimate {
    /// Grid minimizer of Σ_k Im E_k |⟨ψ₀|E_k⟩| with unit right eigenvectors.
    pub e0_opt: f64,
    /// Same objective with biorthogonal left-vector overlaps |⟪E_k|ψ₀⟩|;
    /// `None` if every grid point was defective.
    pub e0_opt_left: Option<f64>,
    /// (E₀, right objective, left objective); the left value is NaN where
    /// the spectrum is defective.
    pub objective: Vec<(f64, f64, f64)>,
    /// Right objective varies by less than 1e−12 over the grid; `e0_opt` is 0.
    pub flat: bool,
}

/// Spectral estimate of the τ-minimizing field. `params.field_step` and
/// `params.dephasing_rate` are ignored.
pub fn optimal_field_estimate(psi0: &[Complex64], params: &ChainParams, grid: &[f64]) -> Result<OptimalFieldEstimate> {
    params.validate()?;
    if psi0.len() != params.n_sites {
        return Err(Error::InvalidState(format!(
            "state has {} sites, chain has {}",
            psi0.len(),
            params.n_sites
        )));
    }
    if grid.is_empty() || grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("field grid must be non-empty and finite".into()));
    }
    let ec = critical_field(params.n_sites, params.hopping);
    let lo = grid.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo > -ec * (1.0 - 1e-9) || hi < ec * (1.0 - 1e-9) {
        return Err(Error::InvalidParameter(format!(
            "field grid [{lo}, {hi}] must span [-{ec:.6}, {ec:.6}]"
        )));
    }

    let mut objective = Vec::with_capacity(grid.len());
    for &e0 in grid {
        let p = params.clone().with_field(e0).with_dephasing(0.0);
        let h = effective_hamiltonian(&p, None)?;
        let (values, vectors) = linalg::eigen(h.as_ref())?;
        let n = values.len();
        let mut right = 0.0;
        for (k, e) in values.iter().enumerate() {
            let col = vectors.col(k);
            let norm = (0..n).map(|i| col[i].norm_sqr()).sum::<f64>().sqrt();
            let overlap: Complex64 = (0..n).map(|i| psi0[i].conj() * col[i]).sum::<Complex64>() / norm;
            right += e.im * overlap.norm();
        }
        let left = match EffectiveSpectrum::from_hamiltonian(h.as_ref()) {
            Ok(spec) => (0..spec.len())
                .map(|k| spec.eigenvalues[k].im * spec.left_overlap(k, psi0).norm())
                .sum(),
            Err(Error::Defective { .. }) => f64::NAN,
            Err(e) => return Err(e),
        };
        objective.push((e0, right, left));
    }

    let argmin = |f: &dyn Fn(&(f64, f64, f64)) -> f64| {
        objective
            .iter()
            .filter(|o| f(o).is_finite())
            .min_by(|a, b| f(a).total_cmp(&f(b)))
            .map(|o| o.0)
    };
    let max = objective.iter().map(|o| o.1).fold(f64::NEG_INFINITY, f64::max);
    let min = objective.iter().map(|o| o.1).fold(f64::INFINITY, f64::min);
    let flat = max - min < 1e-12;
    let e0_opt = if flat { 0.0 } else { argmin(&|o| o.1).unwrap_or(0.0) };
    let e0_opt_left = argmin(&|o| o.2);
    Ok(OptimalFieldEstimate {
        e0_opt,
        e0_opt_left,
        objective,
        flat,
    })
}

/// Every closed-form quantity for ψ₀ = |n⟩ at the given parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticEstimates {
    pub tau_perturbative: f64,
    /// `None` at a pole (γ_φ = 0 with a diffusive leg, or zero total rate).
    pub tau_leegwater: Option<f64>,
    pub tau_heuristic: Option<f64>,
    pub gamma_f: Option<f64>,
    pub gamma_l: Option<f64>,
    pub critical_dephasing: CriticalDephasing,
    pub critical_field: f64,
    /// Estimator on 201 points over [−2Ẽ₀, 2Ẽ₀].
    pub optimal_field: f64,
}

impl AnalyticEstimates {
    pub fn for_localized(n: usize, params: &ChainParams) -> Result<Self> {
        params.validate()?;
        let p = params;
        let nn = p.n_sites;
        let (w, gp, g, e0) = (p.hopping, p.dephasing_rate, p.sink_rate, p.field_step);
        let tau_perturbative = tau_perturbative_localized(n, nn, g)?;
        let tau_leegwater = tau_leegwater_star_expanded(n, nn, w, gp, g, e0).ok();
        let ec = critical_field(nn, w);
        let grid: Vec<f64> = (0..201).map(|i| -2.0 * ec + 4.0 * ec * i as f64 / 200.0).collect();
        let mut psi = vec![Complex64::new(0.0, 0.0); nn];
        psi[n - 1] = Complex64::new(1.0, 0.0);
        Ok(Self {
            tau_perturbative,
            tau_leegwater,
            tau_heuristic: tau_leegwater.map(|t| t + tau_perturbative),
            gamma_f: forster_rate(w, gp, e0).ok(),
            gamma_l: leegwater_rate(w, gp, g, e0).ok(),
            critical_dephasing: critical_dephasing(n, nn, w)?,
            critical_field: ec,
            optimal_field: optimal_field_estimate(&psi, p, &grid)?.e0_opt,
        })
    }
}
