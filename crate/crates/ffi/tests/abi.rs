//! Exercises the C surface the way a foreign binding would: raw pointers,
//! NUL-terminated strings, status codes.

use std::ffi::{CStr, CString};
use std::ptr;

use cloakwave_ffi::*;

fn json_suite<F>(config_json: &str, run: F) -> (serde_json::Value, bool)
where
    F: FnOnce(
        *const CwScenario,
        *mut *mut libc::c_char,
        *mut bool,
    ) -> CwStatus,
{
    let cfg = CString::new(config_json).unwrap();
    let mut scenario: *mut CwScenario = ptr::null_mut();
    let status = unsafe { cw_scenario_new_from_json(cfg.as_ptr(), &mut scenario) };
    assert_eq!(status, CwStatus::CwOk);
    let mut out: *mut libc::c_char = ptr::null_mut();
    let mut pass = false;
    let status = run(scenario, &mut out, &mut pass);
    assert_eq!(status, CwStatus::CwOk);
    let text = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_string();
    unsafe {
        cw_string_free(out);
        cw_scenario_free(scenario);
    }
    (serde_json::from_str(&text).unwrap(), pass)
}

#[test]
fn causality_suite_through_the_c_surface() {
    let (value, pass) = json_suite(
        r#"{"scenario": "hyperboloid", "rays": 64, "seed": 7}"#,
        |sc, out, pass| unsafe { cw_run_causality(sc, out, pass) },
    );
    assert!(pass);
    assert_eq!(value["pass"], serde_json::Value::Bool(true));
    let reports = value["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 2);
    for r in reports {
        assert_eq!(r["rays_hit_boundary"], 0);
    }
}

#[test]
fn witness_suite_through_the_c_surface() {
    let (value, pass) = json_suite(r#"{"scenario": "hyperboloid"}"#, |sc, out, pass| unsafe {
        cw_run_witness(sc, out, pass)
    });
    assert!(pass);
    let c = value["verdict"]["c"].as_f64().unwrap();
    assert!((c - 2.0).abs() < 1e-3);
}

#[test]
fn compare_suites_through_the_c_surface() {
    let cfg = r#"{"scenario": "hyperboloid", "grid": {"levels": [64, 128]}}"#;
    let (value, pass) = json_suite(cfg, |sc, out, pass| unsafe {
        cw_run_compare_dn(sc, out, pass)
    });
    assert!(pass);
    assert!(value["report"]["d_int"].as_f64().unwrap() > 0.0);
    let (value, pass) = json_suite(cfg, |sc, out, pass| unsafe {
        cw_run_compare_sts(sc, out, pass)
    });
    assert!(pass);
    assert!(value["report"]["d_ext_case1_max"].as_f64().unwrap() <= 1e-13);
}

#[test]
fn curvature_probe_and_helpers() {
    let cfg = CString::new(r#"{"scenario": "hyperboloid"}"#).unwrap();
    let mut scenario: *mut CwScenario = ptr::null_mut();
    assert_eq!(
        unsafe { cw_scenario_new_from_json(cfg.as_ptr(), &mut scenario) },
        CwStatus::CwOk
    );
    // Base metric is flat at the bump center, the blend carries the patch
    // curvature 2/Rc^2 = 2.
    let p = [0.0_f64, 0.0];
    let mut s = f64::NAN;
    let status =
        unsafe { cw_scalar_curvature(scenario, false, p.as_ptr(), 2, 1e-3, &mut s) };
    assert_eq!(status, CwStatus::CwOk);
    assert!(s.abs() < 1e-8);
    let status = unsafe { cw_scalar_curvature(scenario, true, p.as_ptr(), 2, 1e-3, &mut s) };
    assert_eq!(status, CwStatus::CwOk);
    assert!((s - 2.0).abs() < 1e-4);
    unsafe { cw_scenario_free(scenario) };
    // Stateless helpers.
    let eta = cw_conformal_time(1.0, 0.0);
    assert!((eta - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    let mut r = f64::NAN;
    assert_eq!(unsafe { cw_kruskal_r(0.0, 0.0, 1.0, &mut r) }, CwStatus::CwOk);
    assert!((r - 1.0).abs() < 1e-12);
    // Beyond the singularity: a domain error, with a readable message.
    assert_eq!(
        unsafe { cw_kruskal_r(2.0, 0.0, 1.0, &mut r) },
        CwStatus::CwDomainError
    );
    let msg = cw_last_error_message();
    assert!(!msg.is_null());
    let text = unsafe { CStr::from_ptr(msg) }.to_str().unwrap();
    assert!(text.contains("singularity"));
}

#[test]
fn error_paths_and_null_safety() {
    let mut scenario: *mut CwScenario = ptr::null_mut();
    // Invalid configurations surface as config errors.
    let bad = CString::new(r#"{"scenario": "nonsense"}"#).unwrap();
    assert_eq!(
        unsafe { cw_scenario_new_from_json(bad.as_ptr(), &mut scenario) },
        CwStatus::CwConfigError
    );
    let bad = CString::new(r#"{"scenario": "kruskal", "kruskal": {"r_s": 2.0, "r0": 1.0}}"#)
        .unwrap();
    assert_eq!(
        unsafe { cw_scenario_new_from_json(bad.as_ptr(), &mut scenario) },
        CwStatus::CwConfigError
    );
    // Null pointers are rejected, not dereferenced.
    assert_eq!(
        unsafe { cw_scenario_new_from_json(ptr::null(), &mut scenario) },
        CwStatus::CwNullPointer
    );
    assert_eq!(
        unsafe { cw_run_causality(ptr::null(), ptr::null_mut(), ptr::null_mut()) },
        CwStatus::CwNullPointer
    );
    unsafe {
        cw_scenario_free(ptr::null_mut());
        cw_string_free(ptr::null_mut());
    }
    // Version string is static and NUL-terminated.
    let v = unsafe { CStr::from_ptr(cw_version()) };
    assert!(!v.to_str().unwrap().is_empty());
}

#[test]
fn generated_header_exists_and_declares_the_surface() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/cloakwave.h");
    let text = std::fs::read_to_string(&header).expect("cbindgen header");
    for symbol in [
        "cw_scenario_new_from_json",
        "cw_scenario_free",
        "cw_run_causality",
        "cw_run_compare_dn",
        "cw_run_compare_sts",
        "cw_run_witness",
        "cw_scalar_curvature",
        "cw_string_free",
        "CwStatus",
        "CwScenario",
    ] {
        assert!(text.contains(symbol), "header missing {symbol}");
    }
}
