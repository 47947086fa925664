use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use trimmed_nw_ffi::*;

fn sample(xs: &[f64], ys: &[f64]) -> *mut TnwSample {
    let mut h = ptr::null_mut();
    let st = unsafe { tnw_sample_new(xs.as_ptr(), ys.as_ptr(), xs.len(), &mut h) };
    assert_eq!(st, TnwStatus::Ok);
    h
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(tnw_last_error_message()) }.to_string_lossy().into_owned()
}

#[test]
fn five_point_estimate() {
    let h = sample(&[0.1, 0.2, 0.3, 0.4, 0.5], &[1.0, 2.0, 3.0, 4.0, 5.0]);
    assert_eq!(unsafe { tnw_sample_len(h) }, 5);
    let mut e = TnwEstimate::default();
    let st = unsafe { tnw_trimmed_nw(h, 0.3, 0.2, TnwKernel::Epanechnikov, 1.0, 0.15, &mut e) };
    assert_eq!(st, TnwStatus::Ok);
    assert!((e.value - 3.0).abs() < 1e-12);
    assert_eq!(e.n_retained, 3);
    assert_eq!(e.bandwidth, 0.15);
    assert_eq!(last_error(), "");
    unsafe { tnw_sample_free(h) };
}

#[test]
fn error_codes_and_messages() {
    let h = sample(&[0.1, 0.2, 0.3, 0.4, 0.5], &[1.0, 2.0, 3.0, 4.0, 5.0]);
    let mut e = TnwEstimate::default();
    let st = unsafe { tnw_trimmed_nw(h, 0.9, 0.2, TnwKernel::Epanechnikov, 1.0, 0.05, &mut e) };
    assert_eq!(st, TnwStatus::EmptyKernelWindow);
    assert!(last_error().contains("kernel weight"));

    let st = unsafe { tnw_trimmed_nw(h, 0.3, 0.6, TnwKernel::Uniform, 1.0, 0.1, &mut e) };
    assert_eq!(st, TnwStatus::InvalidArgument);
    let st = unsafe { tnw_trimmed_nw(h, 0.3, 0.1, TnwKernel::Uniform, 1.0, -1.0, &mut e) };
    assert_eq!(st, TnwStatus::InvalidArgument);
    let st = unsafe { tnw_trimmed_nw(ptr::null(), 0.3, 0.1, TnwKernel::Uniform, 1.0, 0.1, &mut e) };
    assert_eq!(st, TnwStatus::NullPointer);
    let st = unsafe { tnw_trimmed_nw(h, 0.3, 0.1, TnwKernel::Uniform, 1.0, 0.1, ptr::null_mut()) };
    assert_eq!(st, TnwStatus::NullPointer);
    unsafe { tnw_sample_free(h) };

    let mut out = ptr::null_mut();
    let nan = [f64::NAN];
    assert_eq!(unsafe { tnw_sample_new(nan.as_ptr(), nan.as_ptr(), 1, &mut out) }, TnwStatus::InvalidArgument);
    assert_eq!(unsafe { tnw_sample_new(ptr::null(), ptr::null(), 0, &mut out) }, TnwStatus::InvalidArgument);
    assert!(out.is_null());
    assert_eq!(unsafe { tnw_sample_len(ptr::null()) }, 0);
    unsafe { tnw_sample_free(ptr::null_mut()) };
}

#[test]
fn efficiency_functions() {
    let mut v = 0.0;
    assert_eq!(unsafe { tnw_asymptotic_efficiency(TnwCovariate::Uniform01, 50, 0.05, 0.5, &mut v) }, TnwStatus::Ok);
    assert!((v - 45.0 / 46.0).abs() < 1e-6);
    assert_eq!(unsafe { tnw_t_alpha(TnwCovariate::Beta22, 20, 0.0, 0.3, &mut v) }, TnwStatus::Ok);
    assert!((v - 6.0 * 0.3 * 0.7).abs() < 1e-10);
    assert_eq!(unsafe { tnw_t_alpha(TnwCovariate::Beta22, 0, 0.0, 0.3, &mut v) }, TnwStatus::InvalidArgument);
}

#[test]
fn breakdown_through_the_abi() {
    let n = 50;
    let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|x| 5.0 * x).collect();
    let h = sample(&xs, &ys);
    let mut m = 0usize;
    let st = unsafe {
        tnw_breakdown_point(
            h,
            0.5,
            0.2,
            TnwKernel::Epanechnikov,
            1.0,
            0.0,
            1e9,
            1e2,
            TnwPlacement::KernelWindow,
            &mut m,
        )
    };
    assert_eq!(st, TnwStatus::Ok);
    assert_eq!(m, 1);
    unsafe { tnw_sample_free(h) };
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(tnw_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

const C_PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "trimmed_nw.h"

int main(void) {
    double xs[5] = {0.1, 0.2, 0.3, 0.4, 0.5};
    double ys[5] = {1.0, 2.0, 3.0, 4.0, 5.0};
    TnwSample *s = NULL;
    if (tnw_sample_new(xs, ys, 5, &s) != TNW_STATUS_OK) return 1;
    TnwEstimate e;
    if (tnw_trimmed_nw(s, 0.3, 0.2, TNW_KERNEL_EPANECHNIKOV, 1.0, 0.15, &e) != TNW_STATUS_OK) return 2;
    if (fabs(e.value - 3.0) > 1e-12 || e.n_retained != 3) return 3;
    if (tnw_trimmed_nw(s, 0.9, 0.2, TNW_KERNEL_EPANECHNIKOV, 1.0, 0.05, &e) != TNW_STATUS_EMPTY_KERNEL_WINDOW) return 4;
    printf("%s\n", tnw_last_error_message());
    tnw_sample_free(s);
    return 0;
}
"#;

#[test]
fn header_compiles_and_links_from_c() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found, skipping");
        return;
    };
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/c_abi-<hash>
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libtrimmed_nw_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built, skipping", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let exe = dir.path().join("main");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let status = Command::new(cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "C program exited with {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).contains("kernel weight"));
}

fn which_cc() -> Result<String, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc).arg("--version").output().is_ok_and(|o| o.status.success()) {
            return Ok(cc.to_string());
        }
    }
    Err(())
}
