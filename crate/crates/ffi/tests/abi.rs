use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

use afdm_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    let n = unsafe { afdm_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(n > 0);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn reference(ratio: f64) -> *mut AfdmSystem {
    let mut sys = ptr::null_mut();
    assert_eq!(unsafe { afdm_system_new_reference(ratio, &mut sys) }, AfdmStatus::Ok);
    assert!(!sys.is_null());
    sys
}

#[test]
fn version_is_cargo_version() {
    let v = unsafe { CStr::from_ptr(afdm_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn reference_dims() {
    let sys = reference(0.25);
    let (mut n, mut lp, mut r) = (0, 0, 0);
    assert_eq!(unsafe { afdm_system_dims(sys, &mut n, &mut lp, &mut r) }, AfdmStatus::Ok);
    assert_eq!((n, lp, r), (128, 4, 32));
    unsafe { afdm_system_free(sys) };
}

#[test]
fn null_arguments_are_rejected() {
    assert_eq!(unsafe { afdm_system_new_reference(0.2, ptr::null_mut()) }, AfdmStatus::NullPointer);
    assert!(last_error().contains("null"));
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { afdm_design_conventional(ptr::null(), 1, &mut out) }, AfdmStatus::NullPointer);
    assert!(out.is_null());
    unsafe {
        afdm_system_free(ptr::null_mut());
        afdm_design_free(ptr::null_mut());
    }
}

#[test]
fn bad_configuration_maps_to_config_status() {
    let mut sys = ptr::null_mut();
    assert_eq!(unsafe { afdm_system_new_reference(1.5, &mut sys) }, AfdmStatus::Config);
    assert!(sys.is_null());
    assert!(!last_error().is_empty());
    let reserved = [200usize];
    let st = unsafe { afdm_system_new(128, 1.0 / 256.0, 4, reserved.as_ptr(), 1, &mut sys) };
    assert_ne!(st, AfdmStatus::Ok);
    assert!(sys.is_null());
}

#[test]
fn buffer_too_small_reports_needed_size() {
    let sys = reference(0.2);
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { afdm_design_conventional(sys, 3, &mut d) }, AfdmStatus::Ok);
    let mut need = 0;
    let mut small = vec![0.0; 10];
    let st = unsafe { afdm_design_samples(d, true, small.as_mut_ptr(), 5, &mut need) };
    assert_eq!(st, AfdmStatus::BufferTooSmall);
    assert_eq!(need, 512);
    let mut buf = vec![0.0; 2 * need];
    assert_eq!(unsafe { afdm_design_samples(d, true, buf.as_mut_ptr(), need, &mut need) }, AfdmStatus::Ok);
    let energy: f64 = buf.iter().map(|x| x * x).sum();
    assert!(energy > 0.0);
    unsafe {
        afdm_design_free(d);
        afdm_system_free(sys);
    }
}

#[test]
fn papr_matches_design_metrics() {
    let sys = reference(0.2);
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { afdm_design_gps(sys, 5, &mut d) }, AfdmStatus::Ok);
    let (mut isl, mut papr) = (0.0, 0.0);
    assert_eq!(unsafe { afdm_design_metrics(d, &mut isl, &mut papr) }, AfdmStatus::Ok);
    assert!(isl > 0.0);
    let mut need = 0;
    unsafe { afdm_design_samples(d, true, ptr::null_mut(), 0, &mut need) };
    let mut buf = vec![0.0; 2 * need];
    unsafe { afdm_design_samples(d, true, buf.as_mut_ptr(), need, ptr::null_mut()) };
    let mut direct = 0.0;
    assert_eq!(unsafe { afdm_papr_db(buf.as_ptr(), need, &mut direct) }, AfdmStatus::Ok);
    assert!((direct - papr).abs() < 1e-9);
    assert_eq!(unsafe { afdm_papr_db(buf.as_ptr(), 0, &mut direct) }, AfdmStatus::InvalidArgument);
    unsafe {
        afdm_design_free(d);
        afdm_system_free(sys);
    }
}

#[test]
fn optimized_design_lowers_isl() {
    let sys = reference(0.2);
    let (mut conv, mut opt) = (ptr::null_mut(), ptr::null_mut());
    unsafe {
        assert_eq!(afdm_design_conventional(sys, 9, &mut conv), AfdmStatus::Ok);
        let st = afdm_design_optimize(sys, 9, AfdmMode::AfShape, AfdmVariables::RcsPlusPrechirp, 5.0, 200, &mut opt);
        assert_eq!(st, AfdmStatus::Ok);
    }
    let (mut i0, mut i1) = (0.0, 0.0);
    unsafe {
        afdm_design_metrics(conv, &mut i0, ptr::null_mut());
        afdm_design_metrics(opt, &mut i1, ptr::null_mut());
    }
    assert!(i1 < i0, "{i1} !< {i0}");
    let (mut iters, mut feasible) = (0, false);
    assert_eq!(unsafe { afdm_design_status(opt, &mut iters, &mut feasible) }, AfdmStatus::Ok);
    assert!(iters > 0 && iters <= 200);
    assert!(feasible);
    let mut u = vec![0.0; 256];
    let mut n = 0;
    assert_eq!(unsafe { afdm_design_vector(opt, u.as_mut_ptr(), 128, &mut n) }, AfdmStatus::Ok);
    assert_eq!(n, 128);
    let energy: f64 = u.iter().map(|x| x * x).sum();
    assert!((energy - 128.0).abs() < 1e-6);
    unsafe {
        afdm_design_free(conv);
        afdm_design_free(opt);
        afdm_system_free(sys);
    }
}

#[test]
fn status_names_are_distinct() {
    let all = [
        AfdmStatus::Ok,
        AfdmStatus::NullPointer,
        AfdmStatus::InvalidArgument,
        AfdmStatus::Config,
        AfdmStatus::Dimension,
        AfdmStatus::BufferTooSmall,
        AfdmStatus::Runtime,
        AfdmStatus::Panic,
    ];
    let names: std::collections::HashSet<_> =
        all.iter().map(|s| unsafe { CStr::from_ptr(afdm_status_name(*s)) }.to_owned()).collect();
    assert_eq!(names.len(), all.len());
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/afdm.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in ["afdm_system_new_reference", "afdm_design_optimize", "afdm_last_error_message", "AFDM_STATUS_BUFFER_TOO_SMALL"] {
        assert!(text.contains(f), "header lacks {f}");
    }
    for (compiler, lang) in [("cc", "c"), ("c++", "c++")] {
        let Ok(out) = Command::new(compiler)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang])
            .arg(&header)
            .output()
        else {
            eprintln!("{compiler} not available, skipping");
            continue;
        };
        assert!(out.status.success(), "{compiler}: {}", String::from_utf8_lossy(&out.stderr));
    }
}
