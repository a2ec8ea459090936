use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use slitwall_ffi::*;

const LENGTH: f64 = 402.1238596594935;
const N: usize = 32768;

fn example() -> CString {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/examples/paper_default.json");
    CString::new(path.to_str().unwrap()).unwrap()
}

fn last_error() -> String {
    let p = sw_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn version_matches_the_crate() {
    let v = unsafe { CStr::from_ptr(sw_version()) };
    assert_eq!(v.to_str().unwrap(), slitwall::VERSION);
}

#[test]
fn gaussian_visibility_and_kennard() {
    unsafe {
        let mut wf = ptr::null_mut();
        assert_eq!(sw_wavefunction_gaussian(LENGTH, N, 0.0, 0.5, 0.0, &mut wf), SwStatus::Ok);
        assert_eq!(sw_wavefunction_len(wf), N);
        let mut v = SwVisibility::default();
        assert_eq!(sw_wavefunction_visibility(wf, 1.0, &mut v), SwStatus::Ok);
        assert!((v.visibility - (-0.5f64).exp()).abs() < 1e-10);
        let mut k = SwKennard::default();
        assert_eq!(sw_wavefunction_kennard(wf, &mut k), SwStatus::Ok);
        assert!((k.product - 0.5).abs() < 1e-10);
        assert_eq!(k.status, 0);
        sw_wavefunction_free(wf);
    }
}

#[test]
fn state_from_json_and_errors() {
    unsafe {
        let mut wf = ptr::null_mut();
        let spec = CString::new(r#"{"kind": "top_hat_momentum", "width": 1.9}"#).unwrap();
        assert_eq!(sw_wavefunction_from_json(LENGTH, N, spec.as_ptr(), &mut wf), SwStatus::Ok);
        let mut v = SwVisibility::default();
        assert_eq!(sw_wavefunction_visibility(wf, 1.0, &mut v), SwStatus::Ok);
        assert!(v.visibility < 1e-12);
        assert_eq!(sw_wavefunction_visibility(wf, -1.0, &mut v), SwStatus::InvalidArgument);
        assert!(last_error().contains("kick"));
        sw_wavefunction_free(wf);

        let mut out = ptr::null_mut();
        assert_eq!(sw_wavefunction_gaussian(LENGTH, N, 0.0, 0.001, 0.0, &mut out), SwStatus::GridTooCoarse);
        assert!(out.is_null());
        assert_eq!(sw_wavefunction_gaussian(LENGTH, N, 0.0, 0.5, 0.0, ptr::null_mut()), SwStatus::NullPointer);
        assert_eq!(sw_wavefunction_visibility(ptr::null(), 1.0, &mut v), SwStatus::NullPointer);
        let bad = CString::new(r#"{"kind": "nope"}"#).unwrap();
        assert_eq!(sw_wavefunction_from_json(LENGTH, N, bad.as_ptr(), &mut out), SwStatus::Config);
    }
}

#[test]
fn errors_are_cleared_by_the_next_call() {
    unsafe {
        let mut v = SwVisibility::default();
        assert_eq!(sw_wavefunction_visibility(ptr::null(), 1.0, &mut v), SwStatus::NullPointer);
        assert!(!sw_last_error_message().is_null());
        let mut wf = ptr::null_mut();
        assert_eq!(sw_wavefunction_gaussian(LENGTH, N, 0.0, 0.5, 0.0, &mut wf), SwStatus::Ok);
        assert!(sw_last_error_message().is_null());
        sw_wavefunction_free(wf);
    }
}

#[test]
fn scenario_pipeline_matches_the_library() {
    let scenario = slitwall::load_config(example().to_str().unwrap()).unwrap();
    let pair = slitwall::run_pipeline(&scenario).unwrap();
    let screen = slitwall::screen_distribution(&pair).unwrap();
    let conditional = slitwall::conditional_momentum(&pair, 1.0).unwrap();
    unsafe {
        let mut sc = ptr::null_mut();
        assert_eq!(sw_scenario_load(example().as_ptr(), &mut sc), SwStatus::Ok);
        let mut bp = ptr::null_mut();
        assert_eq!(sw_scenario_run(sc, &mut bp), SwStatus::Ok);

        let mut needed = 0usize;
        assert_eq!(sw_branch_pair_screen(bp, ptr::null_mut(), 0, &mut needed), SwStatus::BufferTooSmall);
        assert_eq!(needed, N);
        let mut buf = vec![0.0; needed];
        assert_eq!(sw_branch_pair_screen(bp, buf.as_mut_ptr(), buf.len(), &mut needed), SwStatus::Ok);
        assert_eq!(buf, screen);
        assert_eq!(sw_branch_pair_conditional(bp, 1.0, buf.as_mut_ptr(), buf.len(), ptr::null_mut()), SwStatus::Ok);
        assert_eq!(buf, conditional);
        let mut short = vec![0.0; 10];
        assert_eq!(sw_branch_pair_screen(bp, short.as_mut_ptr(), 10, &mut needed), SwStatus::BufferTooSmall);
        assert!(last_error().contains("needed"));

        let mut v = SwVisibility::default();
        assert_eq!(sw_branch_pair_visibility(bp, &mut v), SwStatus::Ok);
        assert!((v.visibility - (-0.5f64).exp()).abs() < 1e-10);
        sw_branch_pair_free(bp);
        sw_scenario_free(sc);
    }
}

#[test]
fn scenario_json_validation() {
    unsafe {
        let mut sc = ptr::null_mut();
        let text = std::fs::read_to_string(example().to_str().unwrap()).unwrap();
        let bad = CString::new(text.replace("\"k\": 1.0", "\"k\": -1.0")).unwrap();
        assert_eq!(sw_scenario_from_json(bad.as_ptr(), &mut sc), SwStatus::Config);
        assert!(last_error().contains("k: must be finite"), "{}", last_error());
        let good = CString::new(text).unwrap();
        assert_eq!(sw_scenario_from_json(good.as_ptr(), &mut sc), SwStatus::Ok);
        assert_eq!(sw_scenario_set_seed(sc, 9), SwStatus::Ok);
        sw_scenario_free(sc);
    }
}

#[test]
fn sweep_rows_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(example().to_str().unwrap())
        .unwrap()
        .replace("\"points\": 25", "\"points\": 4");
    unsafe {
        let mut sc = ptr::null_mut();
        let json = CString::new(text).unwrap();
        assert_eq!(sw_scenario_from_json(json.as_ptr(), &mut sc), SwStatus::Ok);
        let mut res = ptr::null_mut();
        assert_eq!(sw_sweep_run(sc, &mut res), SwStatus::Ok);
        assert_eq!(sw_sweep_len(res), 4);
        let mut row = SwSweepRow::default();
        let mut last_v = f64::INFINITY;
        for i in 0..4 {
            assert_eq!(sw_sweep_row(res, i, &mut row), SwStatus::Ok);
            assert_eq!(row.status, 0);
            assert!(row.visibility < last_v);
            last_v = row.visibility;
        }
        assert_eq!(sw_sweep_row(res, 4, &mut row), SwStatus::InvalidArgument);
        let d = CString::new(dir.path().to_str().unwrap()).unwrap();
        assert_eq!(sw_sweep_write_csv(res, d.as_ptr()), SwStatus::Ok);
        let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
        assert!(csv.starts_with("# slitwall v"));
        assert_eq!(csv.lines().count(), 6);
        sw_sweep_free(res);
        sw_scenario_free(sc);
    }
}

#[test]
fn recoil_speed() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(sw_recoil_velocity(5e-7, 1e-25, &mut v), SwStatus::Ok);
        assert_eq!(sw_recoil_velocity(-1.0, 1e-25, &mut v), SwStatus::InvalidArgument);
    }
    // a reflected photon transfers 2h/λ
    assert!((v - 2.0 * 6.62607015e-34 / 5e-7 / 1e-25).abs() < 1e-12);
}

#[test]
fn freeing_null_handles_is_a_no_op() {
    unsafe {
        sw_wavefunction_free(ptr::null_mut());
        sw_scenario_free(ptr::null_mut());
        sw_branch_pair_free(ptr::null_mut());
        sw_sweep_free(ptr::null_mut());
    }
}

fn target_dir() -> PathBuf {
    // integration test binaries live in target/<profile>/deps
    std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_the_header() {
    let lib = target_dir().join("libslitwall_ffi.a");
    if !lib.exists() {
        panic!("static library not found at {}", lib.display());
    }
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl"])
        .arg("-o")
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).arg(example().to_str().unwrap()).output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout.contains(&format!("version {}", slitwall::VERSION)));
    assert!(stdout.contains("sum"), "{stdout}");
}
