use std::ffi::CStr;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use qtazrp_ffi::*;

const CANONICAL: f64 = 2.194_342_759_061_487_7;

fn canonical() -> *mut QtzParams {
    let mut p = ptr::null_mut();
    let s = unsafe { qtz_params_new(0.5, 1, 1, 0, 1, 2, 3, 1.0, &mut p) };
    assert_eq!(s, QtzStatus::Ok);
    p
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(qtz_last_error()) }.to_str().unwrap().to_string()
}

#[test]
fn two_point_value_round_trip() {
    let p = canonical();
    let mut out = QtzSixTerms::default();
    assert_eq!(unsafe { qtz_two_point_value(p, ptr::null(), &mut out) }, QtzStatus::Ok);
    assert!((out.total - CANONICAL).abs() < 1e-12);
    assert!((out.ps.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(out.imag_max < 1e-9);
    unsafe { qtz_params_free(p) };
}

#[test]
fn options_change_the_reading() {
    let p = canonical();
    let opts = qtz_options_new();
    let (mut a, mut b) = (QtzSixTerms::default(), QtzSixTerms::default());
    unsafe {
        assert_eq!(qtz_two_point_value(p, opts, &mut a), QtzStatus::Ok);
        assert_eq!(qtz_options_set_conventions(opts, QtzConventions::Printed), QtzStatus::Ok);
        assert_eq!(qtz_two_point_value(p, opts, &mut b), QtzStatus::Ok);
        assert_eq!(qtz_options_set_max_nodes(opts, 8), QtzStatus::Precondition);
        qtz_options_free(opts);
        qtz_params_free(p);
    }
    assert!((a.total - CANONICAL).abs() < 1e-12);
    assert!((a.qs[0] - b.qs[0]).abs() > 1e-3);
}

#[test]
fn invalid_params_report_precondition() {
    let mut p = ptr::null_mut();
    let s = unsafe { qtz_params_new(0.5, 1, 1, 3, 1, 2, 3, 1.0, &mut p) };
    assert_eq!(s, QtzStatus::Precondition);
    assert!(p.is_null());
    assert!(last_error().contains("x1 < x2"));
    let s = unsafe { qtz_params_new(1.5, 1, 1, 0, 1, 2, 3, 1.0, &mut p) };
    assert_eq!(s, QtzStatus::Domain);
}

#[test]
fn null_pointers_are_rejected() {
    let mut out = QtzSixTerms::default();
    assert_eq!(unsafe { qtz_two_point_value(ptr::null(), ptr::null(), &mut out) }, QtzStatus::NullPointer);
    assert_eq!(last_error(), "params is null");
    let p = canonical();
    assert_eq!(unsafe { qtz_two_point_value(p, ptr::null(), ptr::null_mut()) }, QtzStatus::NullPointer);
    assert_eq!(unsafe { qtz_gamma_q(1.0, 1.0, ptr::null_mut()) }, QtzStatus::NullPointer);
    unsafe {
        qtz_params_free(p);
        qtz_params_free(ptr::null_mut());
        qtz_options_free(ptr::null_mut());
    }
}

#[test]
fn mc_estimate_matches_exact() {
    let p = canonical();
    let mut m = QtzMcEstimate::default();
    assert_eq!(unsafe { qtz_mc_estimate(p, 20_000, 11, &mut m) }, QtzStatus::Ok);
    assert_eq!((m.samples, m.seed), (20_000, 11));
    assert!(((m.mean - CANONICAL) / m.std_error).abs() < 4.0);
    assert_eq!(unsafe { qtz_mc_estimate(p, 10, 11, &mut m) }, QtzStatus::Precondition);
    unsafe { qtz_params_free(p) };
}

#[test]
fn asym_terms_and_gamma() {
    let mut v = [0.0; 5];
    let s = unsafe { qtz_asym_terms(0.5, 400.0, 0.5, 0.3, 0.0, 0, QtzConventions::Printed, v.as_mut_ptr()) };
    assert_eq!(s, QtzStatus::Ok);
    assert!(v.iter().all(|x| x.is_finite()));
    let s = unsafe { qtz_asym_terms(0.5, 400.0, 0.0, 0.3, 0.5, 0, QtzConventions::Printed, v.as_mut_ptr()) };
    assert_eq!(s, QtzStatus::Precondition);
    let mut g = 0.0;
    assert_eq!(unsafe { qtz_gamma_q(1.0, 2.0, &mut g) }, QtzStatus::Ok);
    assert!((g - (-2.0f64).exp()).abs() < 1e-15);
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/qtazrp.h");
    for name in [
        "qtz_last_error",
        "qtz_version",
        "qtz_params_new",
        "qtz_params_free",
        "qtz_options_new",
        "qtz_options_free",
        "qtz_options_set_conventions",
        "qtz_options_set_max_nodes",
        "qtz_two_point_value",
        "qtz_mc_estimate",
        "qtz_asym_terms",
        "qtz_gamma_q",
        "typedef struct QtzParams QtzParams;",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

/// Directory holding the library artifacts of this build.
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let dir = artifact_dir();
    if !dir.join("libqtazrp_ffi.so").exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or shared library in {}", dir.display());
        return;
    }
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let exe = dir.join("qtazrp_smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg("-L")
        .arg(&dir)
        .arg(format!("-Wl,-rpath,{}", dir.display()))
        .args(["-lqtazrp_ffi", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("2.19434275906148"), "{text}");
}
