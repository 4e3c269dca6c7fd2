// Copyright 2026 The chaintransport Authors
// SPDX-License-Identifier: Apache-2.0

//! C ABI for the chaintransport solvers.
//!
//! Every entry point returns a [`CtStatus`]; on failure a description is
//! available from [`ct_last_error_message`] on the same thread. Handles are
//! opaque and must be released with the matching `*_free` function. Panics
//! never cross the boundary: they are reported as [`CtStatus::Panic`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use chaintransport::analytics::{critical_field, tau_heuristic, tau_localized_closed_form, tau_perturbative_localized};
use chaintransport::experiments::transfer_time;
use chaintransport::liouvillian::{propagate_populations, transfer_time_integrate, IntegrateOptions};
use chaintransport::model::{build_initial_state, sample_disorder};
use chaintransport::nonhermitian::{effective_spectrum, locate_st_default, superradiance_diagnostics, EffectiveSpectrum};
use chaintransport::{ChainParams, Error, InitialState};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidState = 3,
    /// Output buffer shorter than required.
    BufferTooSmall = 4,
    SizeLimit = 5,
    IllConditioned = 6,
    /// Decomposition failure, defective spectrum, non-decaying mode or failed
    /// internal check.
    Numerical = 7,
    Unconverged = 8,
    /// Rate formula evaluated at its pole.
    Pole = 9,
    Panic = 10,
}

/// Initial-state family.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtStateKind {
    Gaussian = 0,
    Localized = 1,
    /// Uniform over sites 1..N−1.
    Flat = 2,
}

/// Initial chain state. `center`, `width` and `momentum` are read for
/// Gaussians, `site` (1-based, site N touches the sink) for localized states.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CtInitialState {
    pub kind: CtStateKind,
    pub center: f64,
    pub width: f64,
    pub momentum: f64,
    pub site: u32,
}

/// Superradiance diagnostics of an effective spectrum.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CtSuperradiance {
    pub gamma_max: f64,
    pub gamma_avg_sub: f64,
    /// NaN when the sink rate is zero.
    pub normalized_gap: f64,
    pub pr_super: f64,
    pub pr_sub_avg: f64,
}

/// Opaque chain description.
pub struct CtChain {
    params: ChainParams,
    disorder: Option<Vec<f64>>,
}

/// Opaque effective-Hamiltonian spectrum.
pub struct CtSpectrum {
    spectrum: EffectiveSpectrum,
    sink_rate: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> CtStatus {
    match e {
        Error::InvalidParameter(_) | Error::DisorderLength { .. } | Error::InvalidSweep(_) => CtStatus::InvalidArgument,
        Error::InvalidState(_) => CtStatus::InvalidState,
        Error::SizeLimit { .. } => CtStatus::SizeLimit,
        Error::IllConditioned { .. } => CtStatus::IllConditioned,
        Error::Unconverged { .. } => CtStatus::Unconverged,
        Error::Pole(_) => CtStatus::Pole,
        Error::Decomposition(_)
        | Error::Defective { .. }
        | Error::NonDecayingMode { .. }
        | Error::Consistency(_)
        | Error::Io(_) => CtStatus::Numerical,
    }
}

struct Fail(CtStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(CtStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, records any failure and converts panics.
fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> CtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            CtStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("internal panic: {msg}"));
            CtStatus::Panic
        }
    }
}

unsafe fn chain_ref<'a>(chain: *const CtChain) -> Result<&'a CtChain, Fail> {
    chain.as_ref().ok_or_else(|| null("chain"))
}

unsafe fn out_ref<'a, T>(out: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    out.as_mut().ok_or_else(|| null(what))
}

unsafe fn state_vector(chain: &CtChain, state: *const CtInitialState) -> Result<Vec<num_complex::Complex64>, Fail> {
    let s = state.as_ref().ok_or_else(|| null("state"))?;
    let spec = match s.kind {
        CtStateKind::Gaussian => InitialState::gaussian(s.center, s.width, s.momentum),
        CtStateKind::Localized => InitialState::localized(s.site as usize),
        CtStateKind::Flat => InitialState::Flat,
    };
    Ok(build_initial_state(&spec, chain.params.n_sites)?)
}

unsafe fn out_slice<'a>(buf: *mut f64, len: usize, needed: usize, what: &str) -> Result<&'a mut [f64], Fail> {
    if buf.is_null() {
        return Err(null(what));
    }
    if len < needed {
        return Err(Fail(CtStatus::BufferTooSmall, format!("{what} holds {len} values, {needed} needed")));
    }
    Ok(slice::from_raw_parts_mut(buf, needed))
}

/// Creates a clean chain (no disorder). Energies and rates are in units of
/// an arbitrary energy scale; `hopping` is usually 1.
#[no_mangle]
pub unsafe extern "C" fn ct_chain_new(
    n_sites: usize,
    hopping: f64,
    field_step: f64,
    sink_rate: f64,
    dephasing_rate: f64,
    out: *mut *mut CtChain,
) -> CtStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let params = ChainParams {
            hopping,
            field_step,
            sink_rate,
            dephasing_rate,
            ..ChainParams::new(n_sites)
        };
        params.validate()?;
        *out = Box::into_raw(Box::new(CtChain { params, disorder: None }));
        Ok(())
    })
}

/// Releases a chain; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ct_chain_free(chain: *mut CtChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}

/// Draws realization `index` of the box disorder ensemble (width `width`,
/// seed `seed`). A zero width removes disorder.
#[no_mangle]
pub unsafe extern "C" fn ct_chain_set_disorder(chain: *mut CtChain, width: f64, seed: u64, index: u64) -> CtStatus {
    guard(|| {
        let chain = chain.as_mut().ok_or_else(|| null("chain"))?;
        if !(width >= 0.0) || !width.is_finite() {
            return Err(Fail(CtStatus::InvalidArgument, format!("disorder width must be >= 0, got {width}")));
        }
        chain.disorder = (width > 0.0).then(|| sample_disorder(width, seed, index, chain.params.n_sites));
        Ok(())
    })
}

/// Sets explicit site-energy offsets (length N); null clears them.
#[no_mangle]
pub unsafe extern "C" fn ct_chain_set_site_offsets(chain: *mut CtChain, offsets: *const f64, len: usize) -> CtStatus {
    guard(|| {
        let chain = chain.as_mut().ok_or_else(|| null("chain"))?;
        if offsets.is_null() {
            chain.disorder = None;
            return Ok(());
        }
        let n = chain.params.n_sites;
        if len != n {
            return Err(Error::DisorderLength { expected: n, got: len }.into());
        }
        let v = slice::from_raw_parts(offsets, len).to_vec();
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Fail(CtStatus::InvalidArgument, "site offsets must be finite".into()));
        }
        chain.disorder = Some(v);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ct_chain_n_sites(chain: *const CtChain, out: *mut usize) -> CtStatus {
    guard(|| {
        *out_ref(out, "out")? = chain_ref(chain)?.params.n_sites;
        Ok(())
    })
}

/// Average transfer time into the sink.
#[no_mangle]
pub unsafe extern "C" fn ct_transfer_time(chain: *const CtChain, state: *const CtInitialState, tau: *mut f64) -> CtStatus {
    guard(|| {
        let chain = chain_ref(chain)?;
        let out = out_ref(tau, "tau")?;
        let psi = state_vector(chain, state)?;
        *out = transfer_time(&chain.params, chain.disorder.as_deref(), &psi)?;
        Ok(())
    })
}

/// Transfer time by direct time integration up to `t_max` (≤ 0 selects the
/// default). `error_estimate` may be null.
#[no_mangle]
pub unsafe extern "C" fn ct_transfer_time_integrated(
    chain: *const CtChain,
    state: *const CtInitialState,
    t_max: f64,
    tau: *mut f64,
    error_estimate: *mut f64,
) -> CtStatus {
    guard(|| {
        let chain = chain_ref(chain)?;
        let out = out_ref(tau, "tau")?;
        let psi = state_vector(chain, state)?;
        let mut opts = IntegrateOptions::default();
        if t_max > 0.0 {
            opts.t_max = t_max;
        }
        let r = transfer_time_integrate(&chain.params, chain.disorder.as_deref(), &psi, &opts)?;
        *out = r.tau;
        if let Some(e) = error_estimate.as_mut() {
            *e = r.error_estimate;
        }
        Ok(())
    })
}

/// Populations at each of `n_times` sorted times, written row by row into
/// `out` (N+1 values per row, sink first). `out_len` must be at least
/// `n_times * (N + 1)`.
#[no_mangle]
pub unsafe extern "C" fn ct_propagate_populations(
    chain: *const CtChain,
    state: *const CtInitialState,
    times: *const f64,
    n_times: usize,
    out: *mut f64,
    out_len: usize,
) -> CtStatus {
    guard(|| {
        let chain = chain_ref(chain)?;
        if times.is_null() {
            return Err(null("times"));
        }
        let d = chain.params.n_sites + 1;
        let needed = n_times.checked_mul(d).ok_or_else(|| Fail(CtStatus::InvalidArgument, "n_times too large".into()))?;
        let out = out_slice(out, out_len, needed, "out")?;
        let psi = state_vector(chain, state)?;
        let times = slice::from_raw_parts(times, n_times);
        let sample = propagate_populations(&chain.params, chain.disorder.as_deref(), &psi, times)?;
        for (row, pops) in out.chunks_mut(d).zip(&sample.populations) {
            row.copy_from_slice(pops);
        }
        Ok(())
    })
}

/// Sink coupling at the superradiant transition of this chain (its own
/// sink rate is ignored).
#[no_mangle]
pub unsafe extern "C" fn ct_locate_st(chain: *const CtChain, gamma_st: *mut f64) -> CtStatus {
    guard(|| {
        let chain = chain_ref(chain)?;
        let out = out_ref(gamma_st, "gamma_st")?;
        *out = locate_st_default(&chain.params, chain.disorder.as_deref())?.gamma_st;
        Ok(())
    })
}

/// Diagonalizes the effective non-Hermitian Hamiltonian.
#[no_mangle]
pub unsafe extern "C" fn ct_spectrum_new(chain: *const CtChain, out: *mut *mut CtSpectrum) -> CtStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let chain = chain_ref(chain)?;
        let spectrum = effective_spectrum(&chain.params, chain.disorder.as_deref())?;
        *out = Box::into_raw(Box::new(CtSpectrum {
            spectrum,
            sink_rate: chain.params.sink_rate,
        }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ct_spectrum_free(spectrum: *mut CtSpectrum) {
    if !spectrum.is_null() {
        drop(Box::from_raw(spectrum));
    }
}

/// Number of eigenstates (N); 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn ct_spectrum_len(spectrum: *const CtSpectrum) -> usize {
    spectrum.as_ref().map_or(0, |s| s.spectrum.len())
}

/// Complex eigenvalues E − iΓ/2 as separate real and imaginary arrays.
#[no_mangle]
pub unsafe extern "C" fn ct_spectrum_eigenvalues(spectrum: *const CtSpectrum, re: *mut f64, im: *mut f64, len: usize) -> CtStatus {
    guard(|| {
        let s = spectrum.as_ref().ok_or_else(|| null("spectrum"))?;
        let n = s.spectrum.len();
        let re = out_slice(re, len, n, "re")?;
        let im = out_slice(im, len, n, "im")?;
        for (k, e) in s.spectrum.eigenvalues.iter().enumerate() {
            re[k] = e.re;
            im[k] = e.im;
        }
        Ok(())
    })
}

/// Decay widths Γ = −2 Im E.
#[no_mangle]
pub unsafe extern "C" fn ct_spectrum_widths(spectrum: *const CtSpectrum, out: *mut f64, len: usize) -> CtStatus {
    guard(|| {
        let s = spectrum.as_ref().ok_or_else(|| null("spectrum"))?;
        out_slice(out, len, s.spectrum.len(), "out")?.copy_from_slice(&s.spectrum.widths);
        Ok(())
    })
}

/// Participation ratios of the normalized right eigenvectors.
#[no_mangle]
pub unsafe extern "C" fn ct_spectrum_participation(spectrum: *const CtSpectrum, out: *mut f64, len: usize) -> CtStatus {
    guard(|| {
        let s = spectrum.as_ref().ok_or_else(|| null("spectrum"))?;
        out_slice(out, len, s.spectrum.len(), "out")?.copy_from_slice(&s.spectrum.participation);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ct_spectrum_superradiance(spectrum: *const CtSpectrum, out: *mut CtSuperradiance) -> CtStatus {
    guard(|| {
        let s = spectrum.as_ref().ok_or_else(|| null("spectrum"))?;
        let out = out_ref(out, "out")?;
        let d = superradiance_diagnostics(&s.spectrum, s.sink_rate)?;
        *out = CtSuperradiance {
            gamma_max: d.gamma_max,
            gamma_avg_sub: d.gamma_avg_sub,
            normalized_gap: d.normalized_gap.unwrap_or(f64::NAN),
            pr_super: d.pr_super,
            pr_sub_avg: d.pr_sub_avg,
        };
        Ok(())
    })
}

/// Exact τ for a localized start at zero field and dephasing.
#[no_mangle]
pub unsafe extern "C" fn ct_tau_localized_closed_form(site: usize, n_sites: usize, sink_rate: f64, hopping: f64, out: *mut f64) -> CtStatus {
    guard(|| {
        *out_ref(out, "out")? = tau_localized_closed_form(site, n_sites, sink_rate, hopping)?;
        Ok(())
    })
}

/// Weak-coupling τ for a localized start.
#[no_mangle]
pub unsafe extern "C" fn ct_tau_perturbative_localized(site: usize, n_sites: usize, sink_rate: f64, out: *mut f64) -> CtStatus {
    guard(|| {
        *out_ref(out, "out")? = tau_perturbative_localized(site, n_sites, sink_rate)?;
        Ok(())
    })
}

/// Diffusive-regime heuristic τ for a localized start.
#[no_mangle]
pub unsafe extern "C" fn ct_tau_heuristic(
    site: usize,
    n_sites: usize,
    hopping: f64,
    dephasing_rate: f64,
    sink_rate: f64,
    field_step: f64,
    out: *mut f64,
) -> CtStatus {
    guard(|| {
        *out_ref(out, "out")? = tau_heuristic(site, n_sites, hopping, dephasing_rate, sink_rate, field_step)?.tau;
        Ok(())
    })
}

/// Field above which the chain eigenstates localize, 4√2·hopping/N.
#[no_mangle]
pub extern "C" fn ct_critical_field(n_sites: usize, hopping: f64) -> f64 {
    if n_sites == 0 {
        return f64::NAN;
    }
    critical_field(n_sites, hopping)
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ct_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ct_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
