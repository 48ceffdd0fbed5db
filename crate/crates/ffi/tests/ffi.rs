use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

use ilis_lab_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(ilis_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

unsafe fn take_string(p: *mut std::ffi::c_char) -> String {
    let s = CStr::from_ptr(p).to_string_lossy().into_owned();
    ilis_string_free(p);
    s
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(ilis_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn worked_example_through_abi() {
    let image = [1u32, 3, 5, 4, 7, 6, 2];
    let mut st = IlisPermStats::default();
    let status = unsafe { ilis_perm_stats(image.as_ptr(), image.len(), &mut st) };
    assert_eq!(status, IlisStatus::Ok);
    assert_eq!(
        st,
        IlisPermStats {
            ilis: 3,
            s: 7,
            max_ilis: 4,
            lis: 4,
            cycle_count: 4
        }
    );
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { ilis_perm_cycles(image.as_ptr(), image.len(), &mut out) }, IlisStatus::Ok);
    assert_eq!(unsafe { take_string(out) }, "(1)(2 3 5 7)(4)(6)");
}

#[test]
fn invalid_permutation_sets_message() {
    let image = [1u32, 1, 2];
    let mut st = IlisPermStats::default();
    let status = unsafe { ilis_perm_stats(image.as_ptr(), 3, &mut st) };
    assert_eq!(status, IlisStatus::InvalidInput);
    assert!(!last_error().is_empty());
}

#[test]
fn null_pointers_are_rejected() {
    let mut st = IlisPermStats::default();
    assert_eq!(unsafe { ilis_perm_stats(ptr::null(), 3, &mut st) }, IlisStatus::NullPointer);
    let image = [1u32];
    assert_eq!(unsafe { ilis_perm_stats(image.as_ptr(), 1, ptr::null_mut()) }, IlisStatus::NullPointer);
    assert_eq!(unsafe { ilis_gamma(2.0, ptr::null_mut()) }, IlisStatus::NullPointer);
    assert!(last_error().contains("null"));
    unsafe {
        ilis_distribution_free(ptr::null_mut());
        ilis_series_free(ptr::null_mut());
        ilis_report_free(ptr::null_mut());
        ilis_string_free(ptr::null_mut());
    }
}

#[test]
fn distribution_handle() {
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { ilis_enumerate(4, 2, &mut d) }, IlisStatus::Ok);
    let counts: Vec<u64> = (0..=5)
        .map(|j| {
            let mut c = 0;
            assert_eq!(unsafe { ilis_distribution_count(d, j, &mut c) }, IlisStatus::Ok);
            c
        })
        .collect();
    assert_eq!(counts.iter().sum::<u64>(), 24);
    assert_eq!(counts[0] + counts[1], 0);
    let mut e = 0.0;
    assert_eq!(unsafe { ilis_distribution_expected_y_power(d, 1.0, &mut e) }, IlisStatus::Ok);
    assert!((e - 1.0).abs() < 1e-15);
    let (mut mean, mut var) = (0.0, 0.0);
    assert_eq!(unsafe { ilis_distribution_moments(d, &mut mean, &mut var) }, IlisStatus::Ok);
    let direct: f64 = counts.iter().enumerate().map(|(j, &c)| j as f64 * c as f64).sum::<f64>() / 24.0;
    assert!((mean - direct).abs() < 1e-12);
    assert!(var > 0.0);
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { ilis_distribution_to_json(d, &mut json) }, IlisStatus::Ok);
    let json = unsafe { take_string(json) };
    assert!(json.contains("\"24\""), "{json}");
    unsafe { ilis_distribution_free(d) };
}

#[test]
fn enumeration_cap_maps_to_capacity() {
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { ilis_enumerate(99, 1, &mut d) }, IlisStatus::Capacity);
    assert!(d.is_null());
    assert!(last_error().contains("99"));
}

#[test]
fn series_handle() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { ilis_h_series(1.0, 16, false, &mut s) }, IlisStatus::Ok);
    let order = unsafe { ilis_series_order(s) };
    assert_eq!(order, 16);
    let mut buf = vec![0.0; order + 1];
    assert_eq!(unsafe { ilis_series_coeffs(s, buf.as_mut_ptr(), buf.len()) }, IlisStatus::Ok);
    assert!(buf.iter().all(|c| (c - 1.0).abs() < 1e-12));
    assert_eq!(unsafe { ilis_series_coeffs(s, buf.as_mut_ptr(), 3) }, IlisStatus::InvalidInput);
    unsafe { ilis_series_free(s) };

    let mut s = ptr::null_mut();
    assert_eq!(unsafe { ilis_h_series(1.5, 16, false, &mut s) }, IlisStatus::Domain);
    assert!(s.is_null());
    assert_eq!(unsafe { ilis_h_series(1.5, 16, true, &mut s) }, IlisStatus::Ok);
    unsafe { ilis_series_free(s) };
}

#[test]
fn scalar_functions() {
    let mut g = 0.0;
    assert_eq!(unsafe { ilis_gamma(5.0, &mut g) }, IlisStatus::Ok);
    assert_eq!(g, 24.0);
    assert_eq!(unsafe { ilis_gamma(-2.0, &mut g) }, IlisStatus::Domain);
    assert!((ilis_normal_cdf(0.0) - 0.5).abs() < 1e-16);
    assert!((ilis_h(1.0, 1e-14) - 0.796_599_599_297_053).abs() < 1e-12);

    let mut d = 0.0;
    assert_eq!(unsafe { ilis_darboux_expectation(1.0, 1000, &mut d) }, IlisStatus::Ok);
    assert_eq!(d, 1.0);
    for source in [IlisMgfSource::Enumeration, IlisMgfSource::Series, IlisMgfSource::Darboux] {
        let mut m = 0.0;
        assert_eq!(unsafe { ilis_mgf_normalized(6, 0.0, source, &mut m) }, IlisStatus::Ok);
        assert!((m - 1.0).abs() <= 1e-12);
    }
    let mut m = 0.0;
    assert_eq!(
        unsafe { ilis_mgf_normalized(1000, 0.0, IlisMgfSource::Enumeration, &mut m) },
        IlisStatus::Capacity
    );
}

#[test]
fn report_handle_matches_core() {
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { ilis_simulate(50, 2000, 7, 3, &mut r) }, IlisStatus::Ok);
    let mut sum = IlisReportSummary::default();
    assert_eq!(unsafe { ilis_report_summary(r, &mut sum) }, IlisStatus::Ok);
    assert_eq!((sum.n, sum.samples, sum.seed), (50, 2000, 7));
    assert!(sum.empirical_mean > 2.0);
    assert!(sum.ks_distance.is_finite());
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { ilis_report_to_json(r, &mut json) }, IlisStatus::Ok);
    let json = unsafe { take_string(json) };
    unsafe { ilis_report_free(r) };

    let core = ilis_lab::montecarlo::run_simulation(&ilis_lab::montecarlo::SimulationConfig {
        n: 50,
        samples: 2000,
        seed: 7,
        workers: 1,
    })
    .unwrap()
    .to_json()
    .unwrap();
    assert_eq!(json, core);
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/ilis_lab.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in ["ilis_perm_stats", "ilis_enumerate", "ilis_h_series", "ilis_simulate", "ILIS_STATUS_OK"] {
        assert!(text.contains(sym), "{sym} missing from header");
    }
    let Ok(out) = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c"])
        .arg(&header)
        .output()
    else {
        eprintln!("no C compiler; skipping syntax check");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn last_error_cleared_on_success() {
    let mut g = 0.0;
    assert_eq!(unsafe { ilis_gamma(0.0, &mut g) }, IlisStatus::Domain);
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { ilis_gamma(1.0, &mut g) }, IlisStatus::Ok);
    assert!(last_error().is_empty());
}
