// Copyright 2026 The chaintransport Authors
// SPDX-License-Identifier: Apache-2.0

//! Full master-equation solver on the (N+1)-dimensional chain+sink space.
//!
//! # Vectorization convention
//!
//! Density matrices are vectorized by stacking columns,
//! `vec(ρ)[i + j·d] = ρ[i, j]`, so that `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`. The
//! generator is then
//!
//! ```text
//! 𝓛 = −i(I⊗H − Hᵀ⊗I) + Σ_k γ_k [L̄_k⊗L_k − ½(I⊗L_k†L_k + (L_k†L_k)ᵀ⊗I)]
//! ```
//!
//! The sink is basis state 0; the steady state of any γ_out > 0 chain is
//! |0⟩⟨0|. The transfer time is
//! τ = γ_out ∫ t ρ_NN(t) dt = γ_out Σ_n c_n d_n / E_n², where
//! `d = V⁻¹ vec(ρ₀)` and `c` is the row of V selecting ρ_NN. The zero mode is
//! excluded only after checking that its weight on ρ_NN vanishes.

use faer::{Mat, MatRef};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, I, ONE, ZERO};
use crate::model::{build_operator_set, ChainParams, OperatorSet};
use crate::ode::{self, Stop, Tolerances};

/// Default cap on the superoperator dimension (N+1)².
pub const DEFAULT_DIMENSION_CAP: usize = 4096;
/// Above this condition estimate the spectral route hands over to time stepping.
pub const CONDITION_LIMIT: f64 = 1e12;
/// |E| below which an eigenvalue counts as the steady state.
pub const ZERO_MODE_TOL: f64 = 1e-10;
/// Largest accepted deviation of the computed zero modes from the sink
/// projector and the identity.
pub const STEADY_STATE_TOL: f64 = 1e-6;
/// Largest accepted relative error estimate for a spectral τ.
pub const SPECTRAL_REL_TOL: f64 = 1e-6;

pub fn build_liouvillian(params: &ChainParams, disorder: Option<&[f64]>) -> Result<CMat> {
    build_liouvillian_capped(params, disorder, DEFAULT_DIMENSION_CAP)
}

pub fn build_liouvillian_capped(params: &ChainParams, disorder: Option<&[f64]>, cap: usize) -> Result<CMat> {
    let dimension = (params.n_sites + 1).pow(2);
    if dimension > cap {
        return Err(Error::SizeLimit { dimension, cap });
    }
    let ops = build_operator_set(params, disorder)?;
    Ok(liouvillian_from_operators(&ops))
}

/// Column-stacked superoperator of an arbitrary operator set.
pub fn liouvillian_from_operators(ops: &OperatorSet) -> CMat {
    let d = ops.dimension();
    let eye = Mat::<Complex64>::identity(d, d);
    let h = ops.hamiltonian.as_ref();
    let ht = h.transpose().to_owned();
    let mut l = Mat::zeros(d * d, d * d);
    linalg::add_kron(&mut l, -I, eye.as_ref(), h);
    linalg::add_kron(&mut l, I, ht.as_ref(), eye.as_ref());
    for (rate, op) in &ops.jump_ops {
        if *rate == 0.0 {
            continue;
        }
        let g = Complex64::new(*rate, 0.0);
        let conj = Mat::from_fn(d, d, |i, j| op[(i, j)].conj());
        let ldl = linalg::adjoint(op.as_ref()) * op;
        let ldl_t = ldl.transpose().to_owned();
        linalg::add_kron(&mut l, g, conj.as_ref(), op.as_ref());
        linalg::add_kron(&mut l, -0.5 * g, eye.as_ref(), ldl.as_ref());
        linalg::add_kron(&mut l, -0.5 * g, ldl_t.as_ref(), eye.as_ref());
    }
    l
}

type Triplets = Vec<(usize, usize, Complex64)>;

fn triplets(m: MatRef<'_, Complex64>) -> Triplets {
    let mut t = Vec::new();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if m[(i, j)] != ZERO {
                t.push((i, j, m[(i, j)]));
            }
        }
    }
    t
}

/// Right-hand side of the master equation evaluated term by term on ρ,
/// exploiting the sparsity of H and of the jump operators.
#[derive(Debug, Clone)]
pub struct LindbladGenerator {
    d: usize,
    h: Triplets,
    jumps: Vec<(f64, Triplets, Triplets)>,
}

impl LindbladGenerator {
    pub fn new(ops: &OperatorSet) -> Self {
        let jumps = ops
            .jump_ops
            .iter()
            .filter(|(rate, _)| *rate != 0.0)
            .map(|(rate, op)| {
                let ldl = linalg::adjoint(op.as_ref()) * op;
                (*rate, triplets(op.as_ref()), triplets(ldl.as_ref()))
            })
            .collect();
        Self {
            d: ops.dimension(),
            h: triplets(ops.hamiltonian.as_ref()),
            jumps,
        }
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    /// `out = dρ/dt` with ρ and `out` column-major d×d.
    pub fn apply(&self, rho: &[Complex64], out: &mut [Complex64]) {
        let d = self.d;
        out[..d * d].fill(ZERO);
        // −i[H, ρ]
        for &(i, k, hv) in &self.h {
            for j in 0..d {
                out[i + j * d] += -I * hv * rho[k + j * d];
                out[j + k * d] += I * rho[j + i * d] * hv;
            }
        }
        for (rate, l, ldl) in &self.jumps {
            let g = *rate;
            // L ρ L†
            for &(i, j, a) in l {
                for &(k, m, b) in l {
                    out[i + k * d] += g * a * rho[j + m * d] * b.conj();
                }
            }
            // −½ {L†L, ρ}
            for &(i, k, a) in ldl {
                for j in 0..d {
                    out[i + j * d] -= 0.5 * g * a * rho[k + j * d];
                    out[j + k * d] -= 0.5 * g * rho[j + i * d] * a;
                }
            }
        }
    }
}

/// dρ/dt for a single density matrix.
pub fn lindblad_rhs(ops: &OperatorSet, rho: MatRef<'_, Complex64>) -> CMat {
    let d = ops.dimension();
    let gen = LindbladGenerator::new(ops);
    let v = linalg::vectorize(rho);
    let mut out = vec![ZERO; d * d];
    gen.apply(&v, &mut out);
    linalg::unvectorize(&out, d)
}

/// Eigendecomposition 𝓛 = V D V⁻¹.
#[derive(Debug, Clone)]
pub struct LiouvillianSpectrum {
    /// Hilbert-space dimension N+1.
    pub hilbert_dim: usize,
    pub eigenvalues: Vec<Complex64>,
    /// Right modes as columns.
    pub modes: CMat,
    /// V⁻¹; its rows are the left modes.
    pub modes_inv: CMat,
    /// Index of the eigenvalue of smallest modulus.
    pub zero_mode_index: usize,
    /// ‖V‖₁‖V⁻¹‖₁ with unit-norm columns of V.
    pub condition: f64,
}

impl LiouvillianSpectrum {
    pub fn new(params: &ChainParams, disorder: Option<&[f64]>) -> Result<Self> {
        let l = build_liouvillian(params, disorder)?;
        Self::from_superoperator(l.as_ref(), params.n_sites + 1)
    }

    pub fn from_superoperator(l: MatRef<'_, Complex64>, hilbert_dim: usize) -> Result<Self> {
        let (eigenvalues, mut modes) = linalg::eigen(l)?;
        let dim = eigenvalues.len();
        for j in 0..dim {
            let norm = (0..dim).map(|i| modes[(i, j)].norm_sqr()).sum::<f64>().sqrt();
            for i in 0..dim {
                modes[(i, j)] /= norm;
            }
        }
        let modes_inv = linalg::inverse(modes.as_ref());
        let condition = linalg::norm_one(modes.as_ref()) * linalg::norm_one(modes_inv.as_ref());
        let zero_mode_index = eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        Ok(Self {
            hilbert_dim,
            eigenvalues,
            modes,
            modes_inv,
            zero_mode_index,
            condition: if condition.is_finite() { condition } else { f64::INFINITY },
        })
    }

    pub fn dimension(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Right zero mode reshaped to a matrix and scaled to unit trace.
    pub fn steady_state(&self) -> CMat {
        let d = self.hilbert_dim;
        let v: Vec<Complex64> = self.modes.col(self.zero_mode_index).iter().copied().collect();
        let mut m = linalg::unvectorize(&v, d);
        let tr: Complex64 = (0..d).map(|i| m[(i, i)]).sum();
        for j in 0..d {
            for i in 0..d {
                m[(i, j)] /= tr;
            }
        }
        m
    }

    /// Left zero mode reshaped to a matrix and scaled so that its (0,0) entry is 1.
    pub fn conserved_functional(&self) -> CMat {
        let d = self.hilbert_dim;
        let row: Vec<Complex64> = self.modes_inv.row(self.zero_mode_index).iter().copied().collect();
        let mut m = linalg::unvectorize(&row, d);
        let s = m[(0, 0)];
        for j in 0..d {
            for i in 0..d {
                m[(i, j)] /= s;
            }
        }
        m
    }

    /// Slowest nonzero relaxation rate, min |Re E_n| over non-steady modes.
    pub fn slowest_rate(&self) -> f64 {
        self.eigenvalues
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != self.zero_mode_index)
            .map(|(_, e)| -e.re)
            .fold(f64::INFINITY, f64::min)
    }

    /// Checks that the sink projector is the unique steady state, every other
    /// mode decays, and the left zero mode is the trace functional. Returns
    /// the largest deviation of either zero mode from its exact form, which
    /// grows when slow modes crowd the origin.
    pub fn check_steady_state(&self) -> Result<f64> {
        let near_zero = self.eigenvalues.iter().filter(|e| e.norm() < ZERO_MODE_TOL).count();
        if near_zero != 1 {
            return Err(Error::Consistency(format!("{near_zero} eigenvalues within {ZERO_MODE_TOL:e} of zero")));
        }
        for (i, e) in self.eigenvalues.iter().enumerate() {
            if i != self.zero_mode_index && !(e.re < 0.0) {
                return Err(Error::NonDecayingMode { index: i, imag: e.re });
            }
        }
        let d = self.hilbert_dim;
        let ss = self.steady_state();
        let left = self.conserved_functional();
        let mut deviation = 0.0f64;
        for j in 0..d {
            for i in 0..d {
                let target = if i == 0 && j == 0 { ONE } else { ZERO };
                let eye = if i == j { ONE } else { ZERO };
                deviation = deviation.max((ss[(i, j)] - target).norm()).max((left[(i, j)] - eye).norm());
            }
        }
        if deviation > STEADY_STATE_TOL {
            return Err(Error::Consistency(format!(
                "zero modes deviate by {deviation:.3e} from the sink projector and identity"
            )));
        }
        Ok(deviation)
    }

    /// Mode amplitudes d = V⁻¹ vec(|ψ⟩⟨ψ|) for a chain state ψ (length N).
    pub fn mode_amplitudes(&self, psi0: &[Complex64]) -> Result<Vec<Complex64>> {
        let rho0 = chain_density_matrix(psi0, self.hilbert_dim)?;
        Ok(linalg::matvec(self.modes_inv.as_ref(), &linalg::vectorize(rho0.as_ref())))
    }

    /// τ for initial state ψ₀, given γ_out, with an error estimate built
    /// from the imaginary residue of the mode sum and the zero-mode deviation.
    pub fn transfer_time(&self, psi0: &[Complex64], gamma_out: f64) -> Result<(f64, f64)> {
        if !(gamma_out > 0.0) {
            return Err(Error::InvalidParameter("transfer time needs gamma_out > 0".into()));
        }
        if self.condition > CONDITION_LIMIT {
            return Err(Error::IllConditioned { condition: self.condition });
        }
        let deviation = self.check_steady_state()?;
        let d = self.hilbert_dim;
        let n = d - 1;
        let amps = self.mode_amplitudes(psi0)?;
        let z = self.zero_mode_index;

        // η: asymptotic sink population carried by the zero mode.
        let eta = (self.modes[(0, z)] * amps[z]).re;
        if (eta - 1.0).abs() > 1e-8 {
            return Err(Error::Consistency(format!("asymptotic sink population {eta:.12} != 1")));
        }
        let row = n + n * d;
        let zero_weight = (self.modes[(row, z)] * amps[z]).norm();
        if zero_weight > 1e-10 {
            return Err(Error::Consistency(format!("zero mode weight {zero_weight:.3e} on rho_NN")));
        }
        let mut sum = ZERO;
        for (k, e) in self.eigenvalues.iter().enumerate() {
            if k == z {
                continue;
            }
            sum += self.modes[(row, k)] * amps[k] / (e * e);
        }
        let tau = gamma_out * sum.re / eta;
        let error = gamma_out * sum.im.abs() + deviation * tau.abs();
        Ok((tau, error))
    }

    /// Full density matrix at time t.
    pub fn density_matrix_at(&self, amps: &[Complex64], t: f64) -> CMat {
        let weights: Vec<Complex64> = self.eigenvalues.iter().zip(amps).map(|(e, a)| (e * t).exp() * a).collect();
        linalg::unvectorize(&linalg::matvec(self.modes.as_ref(), &weights), self.hilbert_dim)
    }

    /// Site populations (sink first) at time t.
    pub fn populations_at(&self, amps: &[Complex64], t: f64) -> Vec<f64> {
        let d = self.hilbert_dim;
        let weights: Vec<Complex64> = self
            .eigenvalues
            .iter()
            .zip(amps)
            .map(|(e, a)| (e * t).exp() * a)
            .collect();
        (0..d)
            .map(|j| {
                let row = j + j * d;
                (0..weights.len()).map(|k| self.modes[(row, k)] * weights[k]).sum::<Complex64>().re
            })
            .collect()
    }
}

/// |ψ⟩⟨ψ| embedded in the chain+sink space (sink population zero).
pub fn chain_density_matrix(psi0: &[Complex64], hilbert_dim: usize) -> Result<CMat> {
    if psi0.len() + 1 != hilbert_dim {
        return Err(Error::InvalidState(format!(
            "state has {} sites, chain has {}",
            psi0.len(),
            hilbert_dim - 1
        )));
    }
    let mut full = vec![ZERO];
    full.extend_from_slice(psi0);
    Ok(linalg::outer(&full, &full))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Spectral,
    Integrated,
}

#[derive(Debug, Clone, Copy)]
pub struct TransferTime {
    pub tau: f64,
    pub method: Method,
    /// Spectral route: imaginary residue plus zero-mode deviation. Integrated
    /// route: tail correction plus integrator tolerance.
    pub error_estimate: f64,
}

/// τ via the Liouvillian spectrum, falling back to time integration when the
/// mode matrix is ill-conditioned.
pub fn transfer_time_liouville(params: &ChainParams, disorder: Option<&[f64]>, psi0: &[Complex64]) -> Result<TransferTime> {
    let spectrum = LiouvillianSpectrum::new(params, disorder)?;
    match spectrum.transfer_time(psi0, params.sink_rate) {
        Ok((tau, error)) => {
            if error > SPECTRAL_REL_TOL * tau.abs() {
                return Err(Error::Consistency(format!("spectral error estimate {error:.3e} for tau {tau:.6e}")));
            }
            Ok(TransferTime {
                tau,
                method: Method::Spectral,
                error_estimate: error,
            })
        }
        Err(Error::IllConditioned { .. }) => {
            let r = transfer_time_integrate(params, disorder, psi0, &IntegrateOptions::default())?;
            Ok(TransferTime {
                tau: r.tau,
                method: Method::Integrated,
                error_estimate: r.error_estimate,
            })
        }
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IntegrateOptions {
    pub t_max: f64,
    /// Stop once the population left on the chain falls to this value.
    pub remaining_target: f64,
    /// Largest accepted tail bound relative to τ.
    pub tail_tolerance: f64,
    pub tolerances: Tolerances,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            t_max: 1e7,
            remaining_target: 1e-10,
            tail_tolerance: 1e-6,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IntegratedTau {
    pub tau: f64,
    pub error_estimate: f64,
    pub sink_population: f64,
    pub t_final: f64,
    /// False when the step budget or t_max ran out before `remaining_target`.
    pub converged: bool,
}

/// Brute-force τ: steps the master equation and accumulates
/// ∫ t γ_out ρ_NN dt as an extra ODE component, then closes the remaining
/// population with an exponential tail at the slowest relaxation rate.
///
/// The tail is an upper bound on the remaining contribution; the result is
/// accepted only when it is below `tail_tolerance` relative to τ, so nearly
/// dark modes yield [`Error::Unconverged`] rather than a biased τ.
pub fn transfer_time_integrate(
    params: &ChainParams,
    disorder: Option<&[f64]>,
    psi0: &[Complex64],
    opts: &IntegrateOptions,
) -> Result<IntegratedTau> {
    let gamma = params.sink_rate;
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter("transfer time needs gamma_out > 0".into()));
    }
    let ops = build_operator_set(params, disorder)?;
    let gen = LindbladGenerator::new(&ops);
    let d = gen.dimension();
    let n = d - 1;
    let rho0 = chain_density_matrix(psi0, d)?;
    let dd = d * d;
    let nn = n + n * d;

    let mut y = linalg::vectorize(rho0.as_ref());
    y.push(ZERO);
    let rhs = |t: f64, y: &[Complex64], dy: &mut [Complex64]| {
        gen.apply(&y[..dd], &mut dy[..dd]);
        dy[dd] = Complex64::new(t * gamma * y[nn].re, 0.0);
    };
    let chain_population = |y: &[Complex64]| (1..d).map(|j| y[j + j * d].re).sum::<f64>();
    let target = opts.remaining_target;
    let (t_final, stop) = ode::integrate(rhs, 0.0, &mut y, opts.t_max, opts.tolerances, |_, y| {
        chain_population(y) <= target
    });
    let sink = y[0].re;
    let partial = y[dd].re;
    let remaining = chain_population(&y).max(0.0);

    let rate = slowest_rate_estimate(params, disorder).unwrap_or_else(|| {
        let flux = gamma * y[nn].re;
        if remaining > 0.0 {
            flux / remaining
        } else {
            0.0
        }
    });
    let tail = if rate > 0.0 { remaining * (t_final + 1.0 / rate) } else { f64::INFINITY };

    if sink < 0.999 || !(tail <= opts.tail_tolerance * (partial + tail)) {
        return Err(Error::Unconverged {
            partial,
            sink_population: sink,
            bound: partial + tail,
        });
    }
    let converged = stop == Stop::Condition;
    Ok(IntegratedTau {
        tau: partial + tail,
        error_estimate: tail + opts.tolerances.rtol * partial.abs(),
        sink_population: sink,
        t_final,
        converged,
    })
}

fn slowest_rate_estimate(params: &ChainParams, disorder: Option<&[f64]>) -> Option<f64> {
    let l = build_liouvillian(params, disorder).ok()?;
    let ev = linalg::eigenvalues(l.as_ref()).ok()?;
    let mut rates: Vec<f64> = ev.iter().map(|e| -e.re).collect();
    rates.sort_by(f64::total_cmp);
    // rates[0] is the steady state.
    rates.get(1).copied().filter(|r| *r > 0.0)
}

#[derive(Debug, Clone)]
pub struct TrajectorySample {
    pub times: Vec<f64>,
    /// One row per time, N+1 populations with the sink at index 0.
    pub populations: Vec<Vec<f64>>,
    pub method: Method,
    /// Transfer time, when γ_out > 0 and it could be computed.
    pub tau: Option<f64>,
}

/// Site populations along a sorted, nonnegative time grid.
pub fn propagate_populations(
    params: &ChainParams,
    disorder: Option<&[f64]>,
    psi0: &[Complex64],
    times: &[f64],
) -> Result<TrajectorySample> {
    if times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
        return Err(Error::InvalidParameter("times must be finite and nonnegative".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("times must be sorted".into()));
    }
    let spectrum = LiouvillianSpectrum::new(params, disorder)?;
    let tau = if params.sink_rate > 0.0 {
        match spectrum.transfer_time(psi0, params.sink_rate) {
            Ok((tau, _)) => Some(tau),
            Err(Error::IllConditioned { .. }) => {
                transfer_time_integrate(params, disorder, psi0, &IntegrateOptions::default())
                    .ok()
                    .map(|r| r.tau)
            }
            Err(e) => return Err(e),
        }
    } else {
        None
    };

    if spectrum.condition <= CONDITION_LIMIT {
        let amps = spectrum.mode_amplitudes(psi0)?;
        let populations = times.iter().map(|&t| spectrum.populations_at(&amps, t)).collect();
        return Ok(TrajectorySample {
            times: times.to_vec(),
            populations,
            method: Method::Spectral,
            tau,
        });
    }

    let ops = build_operator_set(params, disorder)?;
    let gen = LindbladGenerator::new(&ops);
    let d = gen.dimension();
    let rho0 = chain_density_matrix(psi0, d)?;
    let mut y = linalg::vectorize(rho0.as_ref());
    let mut t = 0.0;
    let mut populations = Vec::with_capacity(times.len());
    for &target in times {
        if target > t {
            let (reached, stop) = ode::integrate(|_, y, dy| gen.apply(y, dy), t, &mut y, target, Tolerances::default(), |_, _| false);
            if stop != Stop::EndTime {
                return Err(Error::Consistency(format!("time stepping stalled at t = {reached}")));
            }
            t = target;
        }
        populations.push((0..d).map(|j| y[j + j * d].re).collect());
    }
    Ok(TrajectorySample {
        times: times.to_vec(),
        populations,
        method: Method::Integrated,
        tau,
    })
}
