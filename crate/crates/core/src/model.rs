// Copyright 2026 The chaintransport Authors
// SPDX-License-Identifier: Apache-2.0

//! Chain model: parameters, Hamiltonian, jump operators, initial states and
//! disorder realizations.
//!
//! Units: ħ = e = 1. Energies and rates are expressed in the same unit as the
//! hopping Ω; [`ChainParams::normalized`] rescales everything to Ω = 1 so
//! that transfer times come out in units of ħ/Ω.
//!
//! Site labels follow the physics convention: chain sites are `1..=N`, site
//! `N` couples to the sink. In the (N+1)-dimensional chain+sink space the sink
//! is basis index 0 and chain site `j` is index `j`.

use std::fmt;
use std::str::FromStr;

use faer::Mat;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMat, ONE, ZERO};

/// Uniform on-site disorder: ε_j drawn from [−W/2, W/2].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Disorder {
    pub width: f64,
    pub seed: u64,
}

/// Physical parameters of one chain instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainParams {
    pub n_sites: usize,
    /// Nearest-neighbour hopping Ω (> 0).
    pub hopping: f64,
    /// Potential step E₀ per site; negative values tilt the chain towards the sink.
    pub field_step: f64,
    /// γ_out, rate of the L = |0⟩⟨N| channel.
    pub sink_rate: f64,
    /// γ_φ, rate of the on-site dephasing channels.
    pub dephasing_rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disorder: Option<Disorder>,
}

impl ChainParams {
    pub fn new(n_sites: usize) -> Self {
        Self {
            n_sites,
            hopping: 1.0,
            field_step: 0.0,
            sink_rate: 2.0,
            dephasing_rate: 0.0,
            disorder: None,
        }
    }

    pub fn with_field(mut self, e0: f64) -> Self {
        self.field_step = e0;
        self
    }

    pub fn with_sink_rate(mut self, gamma_out: f64) -> Self {
        self.sink_rate = gamma_out;
        self
    }

    pub fn with_dephasing(mut self, gamma_phi: f64) -> Self {
        self.dephasing_rate = gamma_phi;
        self
    }

    pub fn with_hopping(mut self, omega: f64) -> Self {
        self.hopping = omega;
        self
    }

    pub fn with_disorder(mut self, width: f64, seed: u64) -> Self {
        self.disorder = Some(Disorder { width, seed });
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.n_sites < 2 {
            return bad(format!("n_sites must be >= 2, got {}", self.n_sites));
        }
        if !(self.hopping > 0.0) || !self.hopping.is_finite() {
            return bad(format!("hopping must be > 0, got {}", self.hopping));
        }
        if !self.field_step.is_finite() {
            return bad("field_step must be finite".into());
        }
        if !(self.sink_rate >= 0.0) || !self.sink_rate.is_finite() {
            return bad(format!("sink_rate must be >= 0, got {}", self.sink_rate));
        }
        if !(self.dephasing_rate >= 0.0) || !self.dephasing_rate.is_finite() {
            return bad(format!("dephasing_rate must be >= 0, got {}", self.dephasing_rate));
        }
        if let Some(d) = self.disorder {
            if !(d.width >= 0.0) || !d.width.is_finite() {
                return bad(format!("disorder width must be >= 0, got {}", d.width));
            }
        }
        Ok(())
    }

    /// Copy with every energy and rate divided by Ω, so that Ω = 1.
    pub fn normalized(&self) -> Self {
        let s = self.hopping;
        Self {
            n_sites: self.n_sites,
            hopping: 1.0,
            field_step: self.field_step / s,
            sink_rate: self.sink_rate / s,
            dephasing_rate: self.dephasing_rate / s,
            disorder: self.disorder.map(|d| Disorder {
                width: d.width / s,
                seed: d.seed,
            }),
        }
    }

    pub fn disorder_width(&self) -> f64 {
        self.disorder.map_or(0.0, |d| d.width)
    }
}

/// Initial wavefunction on the chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    /// Σ_n e^{−i k₀ n} e^{−(n−n₀)²/(4Δ₀²)} |n⟩, normalized on the finite chain.
    Gaussian { center: f64, width: f64, momentum: f64 },
    /// |n⟩ with 1 ≤ n ≤ N.
    Localized { site: usize },
    /// Equal weight on sites 1..N−1, nothing on the sink-coupled site.
    Flat,
}

impl InitialState {
    pub fn gaussian(center: f64, width: f64, momentum: f64) -> Self {
        InitialState::Gaussian { center, width, momentum }
    }

    pub fn localized(site: usize) -> Self {
        InitialState::Localized { site }
    }

    /// The reference wavepacket used throughout: n₀ = 3, Δ₀ = 1, k₀ = 0.
    pub fn reference_gaussian() -> Self {
        Self::gaussian(3.0, 1.0, 0.0)
    }

    /// Zero-momentum, unit-width packet centred at (N+1)/2.
    pub fn centered_gaussian(n_sites: usize) -> Self {
        Self::gaussian((n_sites as f64 + 1.0) / 2.0, 1.0, 0.0)
    }
}

impl fmt::Display for InitialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            InitialState::Gaussian { center, width, momentum } => {
                write!(f, "gaussian:{center},{width},{momentum}")
            }
            InitialState::Localized { site } => write!(f, "localized:{site}"),
            InitialState::Flat => write!(f, "flat"),
        }
    }
}

impl FromStr for InitialState {
    type Err = Error;

    /// `localized:<site>`, `flat`, or `gaussian:<center>[,<width>[,<momentum>]]`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        let bad = || Error::InvalidState(format!("cannot parse initial state '{s}'"));
        match kind.to_ascii_lowercase().as_str() {
            "flat" if args.is_empty() => Ok(InitialState::Flat),
            "localized" | "site" => {
                let site = args.trim().parse::<usize>().map_err(|_| bad())?;
                Ok(InitialState::Localized { site })
            }
            "gaussian" => {
                let nums = args
                    .split(',')
                    .map(|a| a.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| bad())?;
                match nums.as_slice() {
                    [c] => Ok(Self::gaussian(*c, 1.0, 0.0)),
                    [c, w] => Ok(Self::gaussian(*c, *w, 0.0)),
                    [c, w, k] => Ok(Self::gaussian(*c, *w, *k)),
                    _ => Err(bad()),
                }
            }
            _ => Err(bad()),
        }
    }
}

/// Hamiltonian plus the jump operators of the master equation.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    pub hamiltonian: CMat,
    /// (rate, operator) pairs.
    pub jump_ops: Vec<(f64, CMat)>,
}

impl OperatorSet {
    pub fn dimension(&self) -> usize {
        self.hamiltonian.nrows()
    }
}

fn check_disorder(params: &ChainParams, disorder: Option<&[f64]>) -> Result<()> {
    if let Some(eps) = disorder {
        if eps.len() != params.n_sites {
            return Err(Error::DisorderLength {
                expected: params.n_sites,
                got: eps.len(),
            });
        }
        if eps.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidParameter("non-finite site energy".into()));
        }
    }
    Ok(())
}

/// Site energies j·E₀ + ε_j for j = 1..N.
pub fn site_energies(params: &ChainParams, disorder: Option<&[f64]>) -> Result<Vec<f64>> {
    params.validate()?;
    check_disorder(params, disorder)?;
    Ok((1..=params.n_sites)
        .map(|j| {
            let eps = disorder.map_or(0.0, |d| d[j - 1]);
            j as f64 * params.field_step + eps
        })
        .collect())
}

/// Chain-only tight-binding Hamiltonian (N×N, real tridiagonal).
pub fn build_hamiltonian(params: &ChainParams, disorder: Option<&[f64]>) -> Result<CMat> {
    let diag = site_energies(params, disorder)?;
    let n = params.n_sites;
    let t = -params.hopping;
    Ok(Mat::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(diag[i], 0.0)
        } else if i.abs_diff(j) == 1 {
            Complex64::new(t, 0.0)
        } else {
            ZERO
        }
    }))
}

/// Hamiltonian embedded in the chain+sink space with the sink channel first
/// and one dephasing projector per chain site.
pub fn build_operator_set(params: &ChainParams, disorder: Option<&[f64]>) -> Result<OperatorSet> {
    let h = build_hamiltonian(params, disorder)?;
    let n = params.n_sites;
    let d = n + 1;
    let hamiltonian = Mat::from_fn(d, d, |i, j| if i == 0 || j == 0 { ZERO } else { h[(i - 1, j - 1)] });

    let mut jump_ops = Vec::with_capacity(n + 1);
    let mut sink = Mat::zeros(d, d);
    sink[(0, n)] = ONE;
    jump_ops.push((params.sink_rate, sink));
    for j in 1..=n {
        let mut p = Mat::zeros(d, d);
        p[(j, j)] = ONE;
        jump_ops.push((params.dephasing_rate, p));
    }
    Ok(OperatorSet { hamiltonian, jump_ops })
}

/// Normalized amplitude vector over sites 1..N.
pub fn build_initial_state(spec: &InitialState, n_sites: usize) -> Result<Vec<Complex64>> {
    let mut psi = match *spec {
        InitialState::Gaussian { center, width, momentum } => {
            if !(width > 0.0) || !width.is_finite() {
                return Err(Error::InvalidState(format!("gaussian width must be > 0, got {width}")));
            }
            if !center.is_finite() || !momentum.is_finite() {
                return Err(Error::InvalidState("gaussian center and momentum must be finite".into()));
            }
            (1..=n_sites)
                .map(|n| {
                    let x = n as f64;
                    let envelope = (-(x - center).powi(2) / (4.0 * width * width)).exp();
                    Complex64::from_polar(envelope, -momentum * x)
                })
                .collect::<Vec<_>>()
        }
        InitialState::Localized { site } => {
            if site == 0 || site > n_sites {
                return Err(Error::InvalidState(format!(
                    "localized site {site} outside 1..={n_sites}"
                )));
            }
            let mut v = vec![ZERO; n_sites];
            v[site - 1] = ONE;
            v
        }
        InitialState::Flat => {
            if n_sites < 2 {
                return Err(Error::InvalidState("flat state needs at least 2 sites".into()));
            }
            let mut v = vec![ONE; n_sites];
            v[n_sites - 1] = ZERO;
            v
        }
    };
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::InvalidState(format!(
            "state {spec} has vanishing weight on a {n_sites}-site chain"
        )));
    }
    for z in &mut psi {
        *z /= norm;
    }
    Ok(psi)
}

/// Site energies of disorder realization `index` of the ensemble `seed`.
///
/// Realizations are keyed by `(seed, index)` through independent ChaCha
/// streams, so any subset can be regenerated in any order.
pub fn sample_disorder(width: f64, seed: u64, index: u64, n_sites: usize) -> Vec<f64> {
    if width == 0.0 {
        return vec![0.0; n_sites];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let half = 0.5 * width;
    (0..n_sites).map(|_| rng.gen_range(-half..=half)).collect()
}

/// Realization 0 of `params.disorder`, if any.
pub fn default_realization(params: &ChainParams) -> Option<Vec<f64>> {
    params
        .disorder
        .map(|d| sample_disorder(d.width, d.seed, 0, params.n_sites))
}
