// Copyright 2026 The chaintransport Authors
// SPDX-License-Identifier: Apache-2.0

//! Effective non-Hermitian Hamiltonian 𝓗 = H − (iγ_out/2)|N⟩⟨N| of the open
//! chain without dephasing.
//!
//! The complex spectrum E_α = 𝓔_α − iΓ_α/2 carries the decay widths Γ_α.
//! Right eigenvectors are stored with unit 2-norm; left eigenvectors are
//! scaled so that ⟪E_α|E_β⟩ = δ_αβ. Participation ratios are computed on the
//! unit-norm right eigenvectors.

use faer::{Mat, MatRef};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, I, ZERO};
use crate::model::{build_hamiltonian, ChainParams};
use crate::ode::{self, Stop, Tolerances};

/// Residual above which a decomposition is treated as defective.
pub const BIORTHOGONALITY_TOL: f64 = 1e-8;

/// Conventional location of the superradiant transition, γ_out ≈ 2Ω.
pub const REFERENCE_ST_RATE: f64 = 2.0;

#[derive(Debug, Clone)]
pub struct EffectiveSpectrum {
    pub eigenvalues: Vec<Complex64>,
    /// Right eigenvectors |E_α⟩ as unit-norm columns.
    pub right: CMat,
    /// Left eigenvectors as columns l_α with l_α† r_β = δ_αβ.
    pub left: CMat,
    /// Γ_α = −2 Im E_α.
    pub widths: Vec<f64>,
    pub participation: Vec<f64>,
    pub biorthogonality_residual: f64,
    pub completeness_residual: f64,
}

impl EffectiveSpectrum {
    /// Decomposes an arbitrary square effective Hamiltonian.
    pub fn from_hamiltonian(h: MatRef<'_, Complex64>) -> Result<Self> {
        let n = h.nrows();
        let (values, vectors) = linalg::eigen(h)?;

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            values[a]
                .re
                .total_cmp(&values[b].re)
                .then(values[a].im.total_cmp(&values[b].im))
        });

        let eigenvalues: Vec<Complex64> = order.iter().map(|&k| values[k]).collect();
        let mut right = Mat::from_fn(n, n, |i, j| vectors[(i, order[j])]);
        for j in 0..n {
            let norm = (0..n).map(|i| right[(i, j)].norm_sqr()).sum::<f64>().sqrt();
            if !(norm > 0.0) {
                return Err(Error::Decomposition("zero eigenvector".into()));
            }
            for i in 0..n {
                right[(i, j)] /= norm;
            }
        }

        let inv = linalg::inverse(right.as_ref());
        let left = linalg::adjoint(inv.as_ref());

        let eye = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
        let bi = &inv * &right;
        let co = &right * &inv;
        let mut biorthogonality_residual = 0.0f64;
        let mut completeness_residual = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                biorthogonality_residual = biorthogonality_residual.max((bi[(i, j)] - eye(i, j)).norm());
                completeness_residual = completeness_residual.max((co[(i, j)] - eye(i, j)).norm());
            }
        }
        if !biorthogonality_residual.is_finite()
            || biorthogonality_residual.max(completeness_residual) > BIORTHOGONALITY_TOL
        {
            return Err(Error::Defective {
                residual: biorthogonality_residual.max(completeness_residual),
            });
        }

        let widths = eigenvalues.iter().map(|e| -2.0 * e.im).collect();
        let participation = (0..n)
            .map(|j| {
                let col: Vec<Complex64> = (0..n).map(|i| right[(i, j)]).collect();
                participation_ratio(&col)
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(Self {
            eigenvalues,
            right,
            left,
            widths,
            participation,
            biorthogonality_residual,
            completeness_residual,
        })
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn right_vector(&self, alpha: usize) -> Vec<Complex64> {
        self.right.col(alpha).iter().copied().collect()
    }

    pub fn left_vector(&self, alpha: usize) -> Vec<Complex64> {
        self.left.col(alpha).iter().copied().collect()
    }

    /// ⟪E_α|ψ⟩, the expansion coefficient of ψ on mode α.
    pub fn left_overlap(&self, alpha: usize, psi: &[Complex64]) -> Complex64 {
        self.left.col(alpha).iter().zip(psi).map(|(l, p)| l.conj() * p).sum()
    }

    /// Index of the largest width (ties resolved towards the lower index).
    pub fn superradiant_index(&self) -> usize {
        let mut best = 0;
        for (k, w) in self.widths.iter().enumerate() {
            if *w > self.widths[best] {
                best = k;
            }
        }
        best
    }
}

/// 𝓗 = H − (iγ_out/2)|N⟩⟨N| on the chain sites.
pub fn effective_hamiltonian(params: &ChainParams, disorder: Option<&[f64]>) -> Result<CMat> {
    let mut h = build_hamiltonian(params, disorder)?;
    let n = params.n_sites;
    h[(n - 1, n - 1)] -= I * (0.5 * params.sink_rate);
    Ok(h)
}

pub fn effective_spectrum(params: &ChainParams, disorder: Option<&[f64]>) -> Result<EffectiveSpectrum> {
    let h = effective_hamiltonian(params, disorder)?;
    EffectiveSpectrum::from_hamiltonian(h.as_ref())
}

/// Widths only; cheaper and well-defined even where eigenvectors are defective.
pub fn widths(params: &ChainParams, disorder: Option<&[f64]>) -> Result<Vec<f64>> {
    let h = effective_hamiltonian(params, disorder)?;
    Ok(linalg::eigenvalues(h.as_ref())?.iter().map(|e| -2.0 * e.im).collect())
}

/// PR = 1/Σ_k |c_k|⁴ after normalizing `v` to unit 2-norm.
pub fn participation_ratio(v: &[Complex64]) -> Result<f64> {
    let norm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    if !(norm_sq > 0.0) || !norm_sq.is_finite() {
        return Err(Error::InvalidParameter("participation ratio of a zero vector".into()));
    }
    let quartic: f64 = v.iter().map(|z| (z.norm_sqr() / norm_sq).powi(2)).sum();
    Ok(1.0 / quartic)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperradianceDiagnostics {
    pub gamma_max: f64,
    /// Mean width of all states except the superradiant one.
    pub gamma_avg_sub: f64,
    /// δγ = (Γ_max − ⟨Γ⟩)/γ_out; `None` when γ_out = 0, where it is undefined.
    pub normalized_gap: Option<f64>,
    pub pr_super: f64,
    pub pr_sub_avg: f64,
}

pub fn superradiance_diagnostics(spec: &EffectiveSpectrum, gamma_out: f64) -> Result<SuperradianceDiagnostics> {
    if spec.len() < 2 {
        return Err(Error::InvalidParameter("diagnostics need at least two states".into()));
    }
    if !(gamma_out >= 0.0) {
        return Err(Error::InvalidParameter(format!("gamma_out must be >= 0, got {gamma_out}")));
    }
    let k = spec.superradiant_index();
    let rest = (spec.len() - 1) as f64;
    let gamma_max = spec.widths[k];
    let gamma_avg_sub = spec
        .widths
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != k)
        .map(|(_, w)| w)
        .sum::<f64>()
        / rest;
    let pr_sub_avg = spec
        .participation
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != k)
        .map(|(_, p)| p)
        .sum::<f64>()
        / rest;
    let normalized_gap = (gamma_out > 0.0).then(|| (gamma_max - gamma_avg_sub) / gamma_out);
    Ok(SuperradianceDiagnostics {
        gamma_max,
        gamma_avg_sub,
        normalized_gap,
        pr_super: spec.participation[k],
        pr_sub_avg,
    })
}

/// Widths-only variant of the gap: (Γ_max, ⟨Γ⟩_sub).
fn width_split(widths: &[f64]) -> (f64, f64) {
    let (k, max) = widths
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, w)| if w > acc.1 { (i, w) } else { acc });
    let rest: f64 = widths.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, w)| w).sum();
    (max, rest / (widths.len() - 1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StWarning {
    /// Grid has a single point; it is returned as is.
    DegenerateGrid,
    /// ⟨Γ⟩_sub has more than one local maximum; the global one is returned.
    NotUnimodal,
    /// Maximum sits on the grid edge.
    Unbracketed,
}

#[derive(Debug, Clone)]
pub struct StLocation {
    /// γ_out maximizing the subradiant mean width.
    pub gamma_st: f64,
    /// The conventional 2Ω, for comparison.
    pub reference: f64,
    pub warning: Option<StWarning>,
    /// (γ_out, ⟨Γ⟩_sub) along the grid.
    pub profile: Vec<(f64, f64)>,
}

/// Locates the superradiant transition as the γ_out maximizing the mean
/// subradiant width. `params.sink_rate` is ignored.
pub fn locate_st(params: &ChainParams, disorder: Option<&[f64]>, grid: &[f64]) -> Result<StLocation> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty gamma_out grid".into()));
    }
    let mut profile = Vec::with_capacity(grid.len());
    for &g in grid {
        let p = params.clone().with_sink_rate(g);
        let w = widths(&p, disorder)?;
        profile.push((g, width_split(&w).1));
    }
    let reference = REFERENCE_ST_RATE * params.hopping;
    if grid.len() == 1 {
        return Ok(StLocation {
            gamma_st: grid[0],
            reference,
            warning: Some(StWarning::DegenerateGrid),
            profile,
        });
    }
    let best = profile
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(i, _)| i)
        .unwrap();
    let vals: Vec<f64> = profile.iter().map(|p| p.1).collect();
    let local_maxima = (1..vals.len() - 1)
        .filter(|&i| vals[i] > vals[i - 1] && vals[i] >= vals[i + 1])
        .count();
    let warning = if best == 0 || best == vals.len() - 1 {
        Some(StWarning::Unbracketed)
    } else if local_maxima > 1 {
        Some(StWarning::NotUnimodal)
    } else {
        None
    };
    Ok(StLocation {
        gamma_st: grid[best],
        reference,
        warning,
        profile,
    })
}

/// Log-spaced grid of `n` points on [lo, hi].
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// [`locate_st`] on 401 log-spaced points over [0.1, 10]·Ω.
pub fn locate_st_default(params: &ChainParams, disorder: Option<&[f64]>) -> Result<StLocation> {
    let grid = log_grid(0.1 * params.hopping, 10.0 * params.hopping, 401);
    locate_st(params, disorder, &grid)
}

/// τ from the biorthogonal expansion of |ψ(t)⟩:
/// τ = γ_out Σ_αβ ⟨N|E_α⟩⟨N|E_β⟩* ⟪E_α|ψ₀⟩⟪E_β|ψ₀⟩* · (−1/(E_α − E_β*)²).
pub fn transfer_time_spectral(spec: &EffectiveSpectrum, psi0: &[Complex64], gamma_out: f64) -> Result<f64> {
    let n = spec.len();
    if psi0.len() != n {
        return Err(Error::InvalidState(format!("state has {} sites, spectrum {n}", psi0.len())));
    }
    if !(gamma_out > 0.0) {
        return Err(Error::InvalidParameter("transfer time needs gamma_out > 0".into()));
    }
    for (index, e) in spec.eigenvalues.iter().enumerate() {
        if !(e.im < 0.0) {
            return Err(Error::NonDecayingMode { index, imag: e.im });
        }
    }
    let amp: Vec<Complex64> = (0..n)
        .map(|a| spec.right[(n - 1, a)] * spec.left_overlap(a, psi0))
        .collect();
    let mut sum = ZERO;
    let mut scale = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            let d = spec.eigenvalues[a] - spec.eigenvalues[b].conj();
            let term = -(amp[a] * amp[b].conj()) / (d * d);
            scale += term.norm();
            sum += term;
        }
    }
    let tau = gamma_out * sum.re;
    let residue = gamma_out * sum.im.abs();
    if residue > 1e-8 * tau.abs().max(f64::MIN_POSITIVE) && residue > 1e-13 * gamma_out * scale {
        return Err(Error::Consistency(format!(
            "imaginary residue {residue:.3e} of the spectral sum exceeds 1e-8 tau (tau = {tau:.6e})"
        )));
    }
    Ok(tau)
}

#[derive(Debug, Clone, Copy)]
pub struct SchrodingerTau {
    pub tau: f64,
    /// Survival probability ‖ψ‖² when integration stopped.
    pub remaining: f64,
    pub t_final: f64,
    pub tail_correction: f64,
}

/// Brute-force τ = γ_out ∫ t |⟨N|ψ(t)⟩|² dt with ψ' = −i𝓗ψ, integrated
/// adaptively until the survival probability drops below `survival_tol`.
/// The remainder is closed with an exponential tail whose rate is read off
/// the trajectory at the final time.
pub fn transfer_time_schrodinger(
    params: &ChainParams,
    disorder: Option<&[f64]>,
    psi0: &[Complex64],
    survival_tol: f64,
    t_max: f64,
    tol: Tolerances,
) -> Result<SchrodingerTau> {
    let h = effective_hamiltonian(params, disorder)?;
    let n = params.n_sites;
    if psi0.len() != n {
        return Err(Error::InvalidState(format!("state has {} sites, chain {n}", psi0.len())));
    }
    let gamma = params.sink_rate;
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter("transfer time needs gamma_out > 0".into()));
    }
    let mut y: Vec<Complex64> = psi0.to_vec();
    y.push(ZERO);
    let rhs = |t: f64, y: &[Complex64], dy: &mut [Complex64]| {
        for i in 0..n {
            let mut acc = ZERO;
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(n - 1);
            for j in lo..=hi {
                acc += h[(i, j)] * y[j];
            }
            dy[i] = -I * acc;
        }
        dy[n] = Complex64::new(t * gamma * y[n - 1].norm_sqr(), 0.0);
    };
    let survival = |y: &[Complex64]| y[..n].iter().map(|z| z.norm_sqr()).sum::<f64>();
    let (t_final, stop) = ode::integrate(rhs, 0.0, &mut y, t_max, tol, |_, y| survival(y) < survival_tol);
    let remaining = survival(&y);
    if stop != Stop::Condition && remaining > 1e-3 {
        return Err(Error::Unconverged {
            partial: y[n].re,
            sink_population: 1.0 - remaining,
            bound: t_max,
        });
    }
    let flux = gamma * y[n - 1].norm_sqr();
    let rate = if flux > 0.0 { flux / remaining } else { 0.0 };
    let tail_correction = if rate > 0.0 { remaining * (t_final + 1.0 / rate) } else { 0.0 };
    Ok(SchrodingerTau {
        tau: y[n].re + tail_correction,
        remaining,
        t_final,
        tail_correction,
    })
}
