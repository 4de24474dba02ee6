//! Exercises the C ABI from Rust: status codes, out-pointer contracts, and
//! agreement with the running-example values.

use std::ffi::{c_char, CStr, CString};
use std::ptr;

use optrec_capi::{
    optrec_gwce_upper_bound, optrec_last_error, optrec_problem_free, optrec_problem_parse,
    optrec_solve_global, optrec_solve_local, optrec_string_free, optrec_version, OptrecProblem,
    OptrecStatus,
};

const D1_JSON: &str = r#"{
    "lambda": [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    "v_basis": [[1.0, 1.0, 0.0]],
    "epsilon": 1.0,
    "eta": 0.5,
    "y": [1.0, 0.3]
}"#;

fn parse(json: &str) -> *mut OptrecProblem {
    let c = CString::new(json).unwrap();
    let mut p: *mut OptrecProblem = ptr::null_mut();
    let status = unsafe { optrec_problem_parse(c.as_ptr(), &mut p) };
    assert_eq!(status, OptrecStatus::Ok, "{}", last_error());
    assert!(!p.is_null());
    p
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(optrec_last_error()) }
        .to_str()
        .unwrap()
        .to_owned()
}

/// Takes ownership of an out-string, frees it, and returns the parsed JSON.
fn consume_json(s: *mut c_char) -> serde_json::Value {
    assert!(!s.is_null());
    let text = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { optrec_string_free(s) };
    serde_json::from_str(&text).unwrap()
}

#[test]
fn version_is_a_static_semver_string() {
    let v = unsafe { CStr::from_ptr(optrec_version()) }
        .to_str()
        .unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn local_solve_reproduces_the_running_example() {
    let p = parse(D1_JSON);
    let mut out: *mut c_char = ptr::null_mut();
    let status = unsafe { optrec_solve_local(p, ptr::null(), 1e-10, &mut out) };
    assert_eq!(status, OptrecStatus::Ok, "{}", last_error());

    let v = consume_json(out);
    assert_eq!(v["route"], "eigen_equation");
    let radius = v["radius"].as_f64().unwrap();
    assert!(
        (radius - 1.9385779115930444).abs() < 1e-9,
        "radius {radius}"
    );

    // An explicit method string routes the same instance through the
    // semidefinite formulation and must land on the same answer.
    let method = CString::new("sdp").unwrap();
    let mut out2: *mut c_char = ptr::null_mut();
    let status = unsafe { optrec_solve_local(p, method.as_ptr(), 1e-10, &mut out2) };
    assert_eq!(status, OptrecStatus::Ok, "{}", last_error());
    let v2 = consume_json(out2);
    assert_eq!(v2["route"], "reduced_sdp");
    let radius2 = v2["radius"].as_f64().unwrap();
    assert!((radius2 - radius).abs() < 1e-7, "{radius2} vs {radius}");

    unsafe { optrec_problem_free(p) };
}

#[test]
fn global_solve_and_the_map_bound_agree() {
    let p = parse(D1_JSON);
    let mut out: *mut c_char = ptr::null_mut();
    let status = unsafe { optrec_solve_global(p, ptr::null(), 1e-10, &mut out) };
    assert_eq!(status, OptrecStatus::Ok, "{}", last_error());

    let v = consume_json(out);
    let lb = v["lb"].as_f64().unwrap();
    assert!((lb - 1.9784371514842458).abs() < 1e-8, "lb {lb}");

    // Feed the reported map back through the evaluation entry point; its
    // certified worst-case error must match the certified optimum.
    let flat: Vec<f64> = v["map"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|row| row.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()))
        .collect();
    assert_eq!(flat.len(), 6);
    let mut bound = f64::NAN;
    let status = unsafe { optrec_gwce_upper_bound(p, flat.as_ptr(), &mut bound) };
    assert_eq!(status, OptrecStatus::Ok, "{}", last_error());
    assert!((bound - lb).abs() <= 1e-8 * lb, "bound {bound} vs lb {lb}");

    // Pinning the trade-off weight away from the optimum gives a strictly
    // worse certified bound.
    let tau = 0.3;
    let mut out2: *mut c_char = ptr::null_mut();
    let status = unsafe { optrec_solve_global(p, &tau, 1e-10, &mut out2) };
    assert_eq!(status, OptrecStatus::Ok, "{}", last_error());
    let v2 = consume_json(out2);
    assert_eq!(v2["route"], "gwce_upper_bound");
    assert!(v2["lb"].as_f64().unwrap() > lb + 1e-3);

    unsafe { optrec_problem_free(p) };
}

#[test]
fn the_zero_map_has_an_unbounded_worst_case() {
    let p = parse(D1_JSON);
    let zero = [0.0; 6];
    let mut bound = f64::NAN;
    let status = unsafe { optrec_gwce_upper_bound(p, zero.as_ptr(), &mut bound) };
    assert_eq!(status, OptrecStatus::SolveError);
    assert!(!last_error().is_empty());
    unsafe { optrec_problem_free(p) };
}

#[test]
fn null_arguments_are_rejected_not_dereferenced() {
    let mut p: *mut OptrecProblem = ptr::null_mut();
    let mut out: *mut c_char = ptr::null_mut();
    let mut value = f64::NAN;
    let json = CString::new(D1_JSON).unwrap();

    unsafe {
        assert_eq!(
            optrec_problem_parse(ptr::null(), &mut p),
            OptrecStatus::NullArgument
        );
        assert_eq!(
            optrec_problem_parse(json.as_ptr(), ptr::null_mut()),
            OptrecStatus::NullArgument
        );
        assert_eq!(
            optrec_solve_local(ptr::null(), ptr::null(), 1e-10, &mut out),
            OptrecStatus::NullArgument
        );
        assert_eq!(
            optrec_solve_global(ptr::null(), ptr::null(), 1e-10, &mut out),
            OptrecStatus::NullArgument
        );
        assert_eq!(
            optrec_gwce_upper_bound(ptr::null(), ptr::null(), &mut value),
            OptrecStatus::NullArgument
        );
        // Free functions accept null as a no-op.
        optrec_problem_free(ptr::null_mut());
        optrec_string_free(ptr::null_mut());
    }
    assert!(!last_error().is_empty());
}

#[test]
fn parse_failures_report_the_right_status() {
    let mut p: *mut OptrecProblem = ptr::null_mut();

    let garbled = CString::new("{\"lambda\": [[1, 2,").unwrap();
    let status = unsafe { optrec_problem_parse(garbled.as_ptr(), &mut p) };
    assert_eq!(status, OptrecStatus::ParseError);
    assert!(!last_error().is_empty());

    // Valid JSON, invalid geometry: a basis vector of the wrong length.
    let bad_shape = r#"{
        "lambda": [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        "v_basis": [[1.0, 1.0]],
        "epsilon": 1.0,
        "eta": 0.5,
        "y": [1.0, 0.3]
    }"#;
    let bad = CString::new(bad_shape).unwrap();
    let status = unsafe { optrec_problem_parse(bad.as_ptr(), &mut p) };
    assert!(
        status == OptrecStatus::ParseError || status == OptrecStatus::InvalidInstance,
        "{status:?}"
    );

    let not_utf8 = unsafe { CString::from_vec_unchecked(vec![0xff, 0xfe, 0x7b]) };
    let status = unsafe { optrec_problem_parse(not_utf8.as_ptr(), &mut p) };
    assert_eq!(status, OptrecStatus::InvalidUtf8);
}

#[test]
fn infeasible_data_maps_to_the_infeasible_status() {
    // Data misfit floor 2 exceeds the combined budget 1.5: the instance is
    // well-formed, so parsing succeeds and solving reports infeasibility.
    let empty = r#"{
        "lambda": [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        "v_basis": [[1.0, 1.0, 0.0]],
        "epsilon": 1.0,
        "eta": 0.5,
        "y": [1.0, 2.0]
    }"#;
    let p = parse(empty);
    let mut out: *mut c_char = ptr::null_mut();
    let status = unsafe { optrec_solve_local(p, ptr::null(), 1e-10, &mut out) };
    assert_eq!(status, OptrecStatus::Infeasible);
    assert!(last_error().contains("exceeds the combined budget"));
    unsafe { optrec_problem_free(p) };
}

#[test]
fn unknown_method_strings_are_invalid_instances() {
    let p = parse(D1_JSON);
    let method = CString::new("bogus").unwrap();
    let mut out: *mut c_char = ptr::null_mut();
    let status = unsafe { optrec_solve_local(p, method.as_ptr(), 1e-10, &mut out) };
    assert_eq!(status, OptrecStatus::InvalidInstance);
    assert!(last_error().contains("bogus"));
    unsafe { optrec_problem_free(p) };
}

#[test]
fn the_generated_header_declares_the_api() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/optrec.h");
    let text = std::fs::read_to_string(&header).expect("header was not generated");
    for needle in [
        "OPTREC_STATUS_OK",
        "OPTREC_STATUS_INFEASIBLE",
        "optrec_problem_parse",
        "optrec_solve_local",
        "optrec_solve_global",
        "optrec_gwce_upper_bound",
        "optrec_string_free",
        "optrec_last_error",
    ] {
        assert!(text.contains(needle), "header is missing {needle}");
    }
}
