use std::ffi::{c_char, CStr, CString};
use std::ptr;

use fhshare_ffi::*;

const TWO_USER: &str = r#"{"u": 2, "users": [{"v": 1}, {"v": 1}], "gains": [[1, 1], [1, 1]], "P": 100, "sigma2": 1}"#;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    unsafe { fh_last_error(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn scenario(json: &str) -> *mut FhScenario {
    let json = CString::new(json).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { fh_scenario_from_json(json.as_ptr(), &mut s) }, FhStatus::Ok);
    s
}

#[test]
fn scenario_queries() {
    let s = scenario(TWO_USER);
    let (mut n, mut u) = (0usize, 0usize);
    assert_eq!(unsafe { fh_scenario_shape(s, &mut n, &mut u) }, FhStatus::Ok);
    assert_eq!((n, u), (2, 2));

    let mut len = 0usize;
    assert_eq!(unsafe { fh_spectrum_levels(s, 0, ptr::null_mut(), 0, &mut len) }, FhStatus::Ok);
    assert_eq!(len, 2);
    let mut levels = vec![FhLevel { prob: 0.0, c: 0.0, sigma2: 0.0 }; 1];
    assert_eq!(unsafe { fh_spectrum_levels(s, 0, levels.as_mut_ptr(), 1, &mut len) }, FhStatus::BufferTooSmall);
    levels.resize(len, levels[0]);
    assert_eq!(unsafe { fh_spectrum_levels(s, 0, levels.as_mut_ptr(), len, &mut len) }, FhStatus::Ok);
    assert_eq!(levels[1], FhLevel { prob: 0.5, c: 1.0, sigma2: 101.0 });

    let mut ub = FhRateBound { value_bits: 0.0, slope: 0.0, residual_bits: 0.0 };
    let mut lb = ub;
    assert_eq!(unsafe { fh_upper_bound(s, 0, &mut ub) }, FhStatus::Ok);
    assert_eq!(unsafe { fh_lower_bound(s, 0, &mut lb) }, FhStatus::Ok);
    let expect = 0.25 * 101f64.log2() + 0.25 * (1.0 + 100.0 / 101.0f64).log2();
    assert!((ub.value_bits - expect).abs() < 1e-12);
    assert!(lb.value_bits < ub.value_bits);
    assert_eq!(ub.slope, 0.25);

    let mut free = 0.0;
    assert_eq!(unsafe { fh_expected_free_subbands(s, 1, &mut free) }, FhStatus::Ok);
    assert_eq!(free, 0.5);

    let mut est = FhMcEstimate { bits: 0.0, std_error: 0.0 };
    assert_eq!(unsafe { fh_mc_mutual_information(s, 0, 20_000, 3, &mut est) }, FhStatus::Ok);
    assert!(est.bits > lb.value_bits - 4.0 * est.std_error && est.bits < ub.value_bits + 4.0 * est.std_error);

    let mut r = 0.0;
    assert_eq!(unsafe { fh_regulated_rate(s, 0, 2, 1.0, &mut r) }, FhStatus::Ok);
    assert!(r.is_finite());

    assert_eq!(unsafe { fh_upper_bound(s, 5, &mut ub) }, FhStatus::InvalidArgument);
    assert!(last_error().contains("out of range"));
    unsafe { fh_scenario_free(s) };
}

#[test]
fn errors_are_reported() {
    let mut s = ptr::null_mut();
    let bad = CString::new("{not json").unwrap();
    assert_eq!(unsafe { fh_scenario_from_json(bad.as_ptr(), &mut s) }, FhStatus::Parse);
    assert!(s.is_null());
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { fh_scenario_from_json(ptr::null(), &mut s) }, FhStatus::NullPointer);
    let mut out = FhRateBound { value_bits: 0.0, slope: 0.0, residual_bits: 0.0 };
    assert_eq!(unsafe { fh_upper_bound(ptr::null(), 0, &mut out) }, FhStatus::NullPointer);
    let s = scenario(TWO_USER);
    assert_eq!(unsafe { fh_upper_bound(s, 0, ptr::null_mut()) }, FhStatus::NullPointer);
    unsafe { fh_scenario_free(s) };
    unsafe { fh_scenario_free(ptr::null_mut()) };

    let big = format!(
        r#"{{"u": 2, "users": [{}], "gains": [{}], "P": 1, "sigma2": 1}}"#,
        vec![r#"{"v": 1}"#; 22].join(","),
        vec![format!("[{}]", vec!["1"; 22].join(",")); 22].join(",")
    );
    let s = scenario(&big);
    let mut len = 0usize;
    assert_eq!(unsafe { fh_spectrum_levels(s, 0, ptr::null_mut(), 0, &mut len) }, FhStatus::TooLarge);
    unsafe { fh_scenario_free(s) };
    assert_eq!(last_error_len_after_success(), 0);
}

fn last_error_len_after_success() -> usize {
    let mut v = 0.0;
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { fh_pmf_poisson(2.0, &mut p) }, FhStatus::Ok);
    assert_eq!(unsafe { fh_pmf_mean(p, &mut v) }, FhStatus::Ok);
    unsafe { fh_pmf_free(p) };
    unsafe { fh_last_error(ptr::null_mut(), 0) }
}

#[test]
fn measures() {
    let q = [0.0, 0.4, 0.6];
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { fh_pmf_finite(q.as_ptr(), q.len(), &mut p) }, FhStatus::Ok);
    let mut m = FhMaximum { value: 0.0, argmax: 0.0 };
    assert_eq!(unsafe { fh_eta1_fh(p, 3, &mut m) }, FhStatus::Ok);
    assert!((m.argmax - 2.0).abs() < 1e-6);
    assert!((m.value - 1.6f64.powi(2) * 3.0 / 9.6).abs() < 1e-12);
    assert_eq!(unsafe { fh_eta2_fh(p, 7, &mut m) }, FhStatus::Ok);
    assert!((m.argmax - 7.0 / 1.2).abs() < 1e-6);
    let mut x = 0.0;
    assert_eq!(unsafe { fh_eta1_fd(p, 4, 0, &mut x) }, FhStatus::Ok);
    assert!((x - 1.6).abs() < 1e-12);
    assert_eq!(unsafe { fh_eta2_fd(p, 4, 2, &mut x) }, FhStatus::Ok);
    assert_eq!(x, 1.0);
    assert_eq!(unsafe { fh_eta4_fd(p, 4, 2, &mut x) }, FhStatus::Ok);
    assert_eq!(x, 1.0);
    assert_eq!(unsafe { fh_eta_afh(p, 4, 1, &mut x) }, FhStatus::Ok);
    assert!((x - (0.4 * 2.0 + 0.6 * 1.0)).abs() < 1e-12);
    assert_eq!(unsafe { fh_eta_afh(p, 4, 3, &mut x) }, FhStatus::InvalidArgument);
    assert_eq!(unsafe { fh_eta1_fd(p, 0, 0, &mut x) }, FhStatus::InvalidArgument);
    unsafe { fh_pmf_free(p) };

    let bad = [0.0, 0.5];
    assert_eq!(unsafe { fh_pmf_finite(bad.as_ptr(), 2, &mut p) }, FhStatus::InvalidArgument);

    let json = CString::new(r#"{"poisson": 5}"#).unwrap();
    assert_eq!(unsafe { fh_pmf_from_json(json.as_ptr(), &mut p) }, FhStatus::Ok);
    assert_eq!(unsafe { fh_eta2_fh(p, 1, &mut m) }, FhStatus::Ok);
    let (mut value, mut omega) = (0.0, 0.0);
    assert_eq!(unsafe { fh_eta2_fh_poisson_closed(5.0, 1, &mut value, &mut omega) }, FhStatus::Ok);
    assert!((value - m.value).abs() < 1e-4);
    assert!((omega - 0.7347).abs() < 5e-4);
    unsafe { fh_pmf_free(p) };

    assert_eq!(fh_smg_fair(1.0, 2, 2), 0.5);
    assert_eq!(unsafe { CStr::from_ptr(fh_version()) }.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
