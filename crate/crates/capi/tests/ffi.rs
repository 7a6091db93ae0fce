//! Exercises the C ABI exactly as a foreign caller would: raw pointers,
//! status codes, manual frees.

use std::ffi::{CStr, CString};
use std::ptr;

use oam_capi::*;

fn last_error() -> String {
    let mut buf = vec![0i8; 256];
    unsafe { oam_last_error_message(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn version_is_a_static_string() {
    let v = unsafe { CStr::from_ptr(oam_version()) };
    assert!(!v.to_str().unwrap().is_empty());
}

#[test]
fn build_query_and_free_a_pancake() {
    let mut p: *mut OamPancake = ptr::null_mut();
    unsafe {
        assert_eq!(oam_pancake_new(1.0, 1.0, 0.0, &mut p), OamStatus::Ok);
        assert_eq!(oam_pancake_vortex_count(p), 0);
        assert_eq!(oam_pancake_add_vortex(p, 0.5f64.sqrt(), 0.0), OamStatus::Ok);
        assert_eq!(oam_pancake_vortex_count(p), 1);

        let mut cn = [0.0f64; 2];
        let mut pn = [0.0f64; 2];
        let mut len = 0usize;
        let mut mean = 0.0f64;
        let status = oam_pancake_spectrum(
            p,
            cn.as_mut_ptr(),
            pn.as_mut_ptr(),
            cn.len(),
            &mut len,
            &mut mean,
        );
        assert_eq!(status, OamStatus::Ok);
        assert_eq!(len, 2);
        // the half-hbar point: equal split between |0> and |1>
        assert!((pn[0] - 0.5).abs() < 1e-12);
        assert!((pn[1] - 0.5).abs() < 1e-12);
        assert!((mean - 0.5).abs() < 1e-12);
        oam_pancake_free(p);
    }
}

#[test]
fn spectrum_reports_required_capacity() {
    let mut p: *mut OamPancake = ptr::null_mut();
    unsafe {
        assert_eq!(oam_pancake_new(1.0, 1.0, 0.0, &mut p), OamStatus::Ok);
        oam_pancake_add_vortex(p, 0.3, 0.0);
        oam_pancake_add_vortex(p, 0.7, 1.0);
        let mut len = 0usize;
        let status = oam_pancake_spectrum(p, ptr::null_mut(), ptr::null_mut(), 1, &mut len, ptr::null_mut());
        assert_eq!(status, OamStatus::BufferTooSmall);
        assert_eq!(len, 3);
        oam_pancake_free(p);
    }
}

#[test]
fn null_handles_are_reported() {
    unsafe {
        assert_eq!(oam_pancake_add_vortex(ptr::null_mut(), 0.1, 0.0), OamStatus::NullPointer);
        assert_eq!(oam_pancake_vortex_count(ptr::null()), 0);
        let mut len = 0usize;
        assert_eq!(
            oam_pancake_spectrum(ptr::null(), ptr::null_mut(), ptr::null_mut(), 0, &mut len, ptr::null_mut()),
            OamStatus::NullPointer
        );
        assert!(!last_error().is_empty());
        // freeing NULL is a no-op
        oam_pancake_free(ptr::null_mut());
        oam_string_free(ptr::null_mut());
    }
}

#[test]
fn invalid_arguments_set_an_error_message() {
    let mut p: *mut OamPancake = ptr::null_mut();
    let status = unsafe { oam_pancake_new(-1.0, 1.0, 0.0, &mut p) };
    assert_eq!(status, OamStatus::InvalidArgument);
    assert!(last_error().contains("waist"));
}

#[test]
fn json_round_trip_through_the_abi() {
    let json = CString::new(
        r#"{"w0": 1.0, "a0": [1.0, 0.0], "vortices": [[0.5, 0.25], [1.5, 3.0]]}"#,
    )
    .unwrap();
    let mut p: *mut OamPancake = ptr::null_mut();
    unsafe {
        assert_eq!(oam_pancake_from_json(json.as_ptr(), &mut p), OamStatus::Ok);
        assert_eq!(oam_pancake_vortex_count(p), 2);
        let mut text: *mut libc::c_char = ptr::null_mut();
        assert_eq!(oam_pancake_to_json(p, &mut text), OamStatus::Ok);
        let round = CStr::from_ptr(text).to_str().unwrap().to_owned();
        assert!(round.contains("vortices"));
        oam_string_free(text);
        oam_pancake_free(p);
    }
}

#[test]
fn malformed_json_is_an_io_failure() {
    let json = CString::new("{not json").unwrap();
    let mut p: *mut OamPancake = ptr::null_mut();
    assert_eq!(
        unsafe { oam_pancake_from_json(json.as_ptr(), &mut p) },
        OamStatus::IoFailure
    );
}

#[test]
fn closed_form_designers_match_their_recipes() {
    unsafe {
        let mut p: *mut OamPancake = ptr::null_mut();
        assert_eq!(oam_design_suppress_p0(1.0, 0.5, &mut p), OamStatus::Ok);
        let mut pn = [0.0f64; 3];
        let mut len = 0usize;
        oam_pancake_spectrum(p, ptr::null_mut(), pn.as_mut_ptr(), 3, &mut len, ptr::null_mut());
        assert_eq!(pn[0], 0.0);
        assert!((pn[1] - 0.5).abs() < 1e-12);
        oam_pancake_free(p);

        let mut q: *mut OamPancake = ptr::null_mut();
        assert_eq!(oam_design_suppress_p1(1.0, 0.5, &mut q), OamStatus::Ok);
        let mut qn = [0.0f64; 3];
        oam_pancake_spectrum(q, ptr::null_mut(), qn.as_mut_ptr(), 3, &mut len, ptr::null_mut());
        assert!(qn[1] < 1e-30);
        oam_pancake_free(q);

        let mut r: *mut OamPancake = ptr::null_mut();
        let mut leak = 1.0f64;
        assert_eq!(oam_design_suppress_p2(1.0, 0.5, 20.0, &mut r, &mut leak), OamStatus::Ok);
        assert!(leak < 2e-3);
        oam_pancake_free(r);

        let mut s: *mut OamPancake = ptr::null_mut();
        assert_eq!(oam_design_equal_populations_n2(1.0, 0.8409, &mut s), OamStatus::Ok);
        let mut sn = [0.0f64; 3];
        oam_pancake_spectrum(s, ptr::null_mut(), sn.as_mut_ptr(), 3, &mut len, ptr::null_mut());
        for w in sn {
            assert!((w - 1.0 / 3.0).abs() < 1e-12);
        }
        oam_pancake_free(s);

        // infeasible point reports through the status
        let mut t: *mut OamPancake = ptr::null_mut();
        assert_eq!(oam_design_equal_populations_n2(1.0, 0.05, &mut t), OamStatus::Infeasible);
    }
}

#[test]
fn sidebands_through_the_abi() {
    unsafe {
        let mut p: *mut OamPancake = ptr::null_mut();
        oam_design_suppress_p0(1.0, 0.5, &mut p);
        let mut n = [0i64; 4];
        let mut dw = [0.0f64; 4];
        let mut w = [0.0f64; 4];
        let mut len = 0usize;
        let status =
            oam_pancake_sidebands(p, 1.0, n.as_mut_ptr(), dw.as_mut_ptr(), w.as_mut_ptr(), 4, &mut len);
        assert_eq!(status, OamStatus::Ok);
        assert_eq!(len, 2);
        assert_eq!(&n[..2], &[1, 2]);
        assert_eq!(dw[0], 2.0);
        assert_eq!(dw[1], 4.0);
        assert!((w[0] - 0.5).abs() < 1e-12);
        oam_pancake_free(p);
    }
}

#[test]
fn general_design_over_json() {
    let target = CString::new(
        r#"{"N": 2, "tolerance": 1e-6, "weights": {"0": 0.3333333333333333, "1": 0.3333333333333333, "2": 0.3333333333333334}}"#,
    )
    .unwrap();
    let mut result: *mut libc::c_char = ptr::null_mut();
    unsafe {
        let status = oam_design_general_json(target.as_ptr(), 8, 1, 8000, &mut result);
        assert_eq!(status, OamStatus::Ok);
        let text = CStr::from_ptr(result).to_str().unwrap();
        assert!(text.contains("\"converged\": true"), "{text}");
        oam_string_free(result);
    }
}

#[test]
fn generated_header_declares_the_api() {
    let header = std::fs::read_to_string(
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/oam.h"),
    )
    .expect("header generated at build time");
    for symbol in [
        "OamStatus",
        "OamPancake",
        "oam_pancake_new",
        "oam_pancake_spectrum",
        "oam_design_general_json",
        "oam_string_free",
        "oam_last_error_message",
    ] {
        assert!(header.contains(symbol), "missing {symbol}");
    }
}
