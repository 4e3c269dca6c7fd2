// Copyright 2026 The chaintransport Authors
// SPDX-License-Identifier: Apache-2.0

use std::ffi::CStr;
use std::ptr;

use chaintransport_ffi::*;

fn localized(site: u32) -> CtInitialState {
    CtInitialState { kind: CtStateKind::Localized, center: 0.0, width: 0.0, momentum: 0.0, site }
}

fn gaussian() -> CtInitialState {
    CtInitialState { kind: CtStateKind::Gaussian, center: 3.0, width: 1.0, momentum: 0.0, site: 0 }
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(ct_last_error_message()) }.to_string_lossy().into_owned()
}

fn chain(n: usize, e0: f64, g: f64, gphi: f64) -> *mut CtChain {
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { ct_chain_new(n, 1.0, e0, g, gphi, &mut c) }, CtStatus::Ok);
    assert!(!c.is_null());
    c
}

#[test]
fn two_site_transfer_time() {
    let c = chain(2, 0.0, 2.0, 0.0);
    let mut tau = 0.0;
    unsafe {
        assert_eq!(ct_transfer_time(c, &localized(1), &mut tau), CtStatus::Ok);
        assert!((tau - 1.5).abs() < 1e-10, "{tau}");
        let (mut t2, mut err) = (0.0, 0.0);
        assert_eq!(ct_transfer_time_integrated(c, &localized(1), 0.0, &mut t2, &mut err), CtStatus::Ok);
        assert!((t2 - 1.5).abs() < 1e-6 && err >= 0.0);
        ct_chain_free(c);
    }
    assert_eq!(last_error(), "");
}

#[test]
fn closed_form_matches_solver() {
    let c = chain(10, 0.0, 2.0, 0.0);
    let (mut tau, mut cf) = (0.0, 0.0);
    unsafe {
        assert_eq!(ct_transfer_time(c, &localized(5), &mut tau), CtStatus::Ok);
        assert_eq!(ct_tau_localized_closed_form(5, 10, 2.0, 1.0, &mut cf), CtStatus::Ok);
        ct_chain_free(c);
    }
    assert!((tau - cf).abs() / cf < 0.02, "{tau} vs {cf}");
}

#[test]
fn invalid_arguments_report_codes_and_messages() {
    let mut c = ptr::null_mut();
    unsafe {
        assert_eq!(ct_chain_new(0, 1.0, 0.0, 1.0, 0.0, &mut c), CtStatus::InvalidArgument);
        assert!(c.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(ct_chain_new(4, 1.0, 0.0, -1.0, 0.0, &mut c), CtStatus::InvalidArgument);
        assert_eq!(ct_chain_new(4, 1.0, 0.0, 1.0, 0.0, ptr::null_mut()), CtStatus::NullPointer);

        let c = chain(4, 0.0, 1.0, 0.0);
        let mut tau = 0.0;
        assert_eq!(ct_transfer_time(c, &localized(9), &mut tau), CtStatus::InvalidState);
        assert_eq!(ct_transfer_time(c, ptr::null(), &mut tau), CtStatus::NullPointer);
        assert_eq!(ct_transfer_time(ptr::null(), &localized(1), &mut tau), CtStatus::NullPointer);
        assert_eq!(ct_chain_set_site_offsets(c, [0.0; 3].as_ptr(), 3), CtStatus::InvalidArgument);
        assert_eq!(ct_chain_set_disorder(c, -1.0, 1, 0), CtStatus::InvalidArgument);
        ct_chain_free(c);
        ct_chain_free(ptr::null_mut());
    }
}

#[test]
fn size_limit_is_reported() {
    let c = chain(80, 0.0, 1.0, 0.5);
    let mut tau = 0.0;
    unsafe {
        assert_eq!(ct_transfer_time(c, &gaussian(), &mut tau), CtStatus::SizeLimit);
        ct_chain_free(c);
    }
}

#[test]
fn spectrum_handle() {
    let c = chain(10, 0.0, 2.0, 0.0);
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(ct_spectrum_new(c, &mut s), CtStatus::Ok);
        let n = ct_spectrum_len(s);
        assert_eq!(n, 10);
        let mut w = vec![0.0; n];
        assert_eq!(ct_spectrum_widths(s, w.as_mut_ptr(), n - 1), CtStatus::BufferTooSmall);
        assert_eq!(ct_spectrum_widths(s, w.as_mut_ptr(), n), CtStatus::Ok);
        // Widths sum to the sink rate.
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-10);
        let (mut re, mut im) = (vec![0.0; n], vec![0.0; n]);
        assert_eq!(ct_spectrum_eigenvalues(s, re.as_mut_ptr(), im.as_mut_ptr(), n), CtStatus::Ok);
        for k in 0..n {
            assert!((im[k] + w[k] / 2.0).abs() < 1e-12);
        }
        let mut pr = vec![0.0; n];
        assert_eq!(ct_spectrum_participation(s, pr.as_mut_ptr(), n), CtStatus::Ok);
        assert!(pr.iter().all(|&p| p >= 1.0 - 1e-9 && p <= 10.0 + 1e-9));
        let mut d = CtSuperradiance::default();
        assert_eq!(ct_spectrum_superradiance(s, &mut d), CtStatus::Ok);
        assert!(d.gamma_max > d.gamma_avg_sub && d.normalized_gap.is_finite());
        ct_spectrum_free(s);
        assert_eq!(ct_spectrum_len(ptr::null()), 0);
        ct_chain_free(c);
    }
}

#[test]
fn populations_are_probabilities() {
    let c = chain(5, 0.1, 1.0, 0.3);
    let times = [0.0, 0.5, 2.0, 10.0];
    let d = 6;
    let mut out = vec![0.0; times.len() * d];
    unsafe {
        assert_eq!(
            ct_propagate_populations(c, &localized(1), times.as_ptr(), times.len(), out.as_mut_ptr(), out.len() - 1),
            CtStatus::BufferTooSmall
        );
        assert_eq!(
            ct_propagate_populations(c, &localized(1), times.as_ptr(), times.len(), out.as_mut_ptr(), out.len()),
            CtStatus::Ok
        );
        ct_chain_free(c);
    }
    for row in out.chunks(d) {
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(row.iter().all(|&p| p > -1e-12));
    }
    assert!((out[1] - 1.0).abs() < 1e-12);
    assert!(out[d..].chunks(d).map(|r| r[0]).collect::<Vec<_>>().windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn disorder_is_reproducible() {
    let taus: Vec<f64> = (0..2)
        .map(|_| {
            let c = chain(8, 0.0, 1.0, 0.2);
            let mut tau = 0.0;
            unsafe {
                assert_eq!(ct_chain_set_disorder(c, 1.5, 42, 3), CtStatus::Ok);
                assert_eq!(ct_transfer_time(c, &gaussian(), &mut tau), CtStatus::Ok);
                ct_chain_free(c);
            }
            tau
        })
        .collect();
    assert_eq!(taus[0], taus[1]);

    let c = chain(8, 0.0, 1.0, 0.2);
    let mut clean = 0.0;
    let mut n = 0;
    unsafe {
        assert_eq!(ct_transfer_time(c, &gaussian(), &mut clean), CtStatus::Ok);
        assert_eq!(ct_chain_set_site_offsets(c, [0.0; 8].as_ptr(), 8), CtStatus::Ok);
        let mut zero = 0.0;
        assert_eq!(ct_transfer_time(c, &gaussian(), &mut zero), CtStatus::Ok);
        assert!((zero - clean).abs() < 1e-12 * clean);
        assert_eq!(ct_chain_n_sites(c, &mut n), CtStatus::Ok);
        ct_chain_free(c);
    }
    assert_eq!(n, 8);
    assert_ne!(taus[0], clean);
}

#[test]
fn analytic_helpers() {
    assert!((ct_critical_field(10, 1.0) - 4.0 * 2f64.sqrt() / 10.0).abs() < 1e-15);
    assert!(ct_critical_field(0, 1.0).is_nan());
    let mut tau = 0.0;
    unsafe {
        assert_eq!(ct_tau_perturbative_localized(1, 10, 0.01, &mut tau), CtStatus::Ok);
        assert!(tau > 0.0);
        assert_eq!(ct_tau_heuristic(1, 10, 1.0, 2.0, 1.0, 0.0, &mut tau), CtStatus::Ok);
        assert!(tau > 0.0);
    }
    let c = chain(10, 0.0, 1.0, 0.0);
    let mut gst = 0.0;
    unsafe {
        assert_eq!(ct_locate_st(c, &mut gst), CtStatus::Ok);
        ct_chain_free(c);
    }
    assert!(gst > 0.5 && gst < 4.0, "{gst}");
    let v = unsafe { CStr::from_ptr(ct_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_entry_point() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/chaintransport.h")).unwrap();
    for f in [
        "ct_chain_new", "ct_chain_free", "ct_chain_set_disorder", "ct_chain_set_site_offsets", "ct_transfer_time",
        "ct_transfer_time_integrated", "ct_propagate_populations", "ct_spectrum_new", "ct_spectrum_widths",
        "ct_spectrum_superradiance", "ct_locate_st", "ct_last_error_message", "ct_version",
    ] {
        assert!(h.contains(&format!("{f}(")), "{f} missing");
    }
    assert!(h.contains("typedef struct CtChain CtChain;"));
}
