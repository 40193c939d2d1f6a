use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use pseudoinv_ffi::*;

fn reference() -> *mut PseudoinvSolution {
    let mut handle = ptr::null_mut();
    let status = unsafe { pseudoinv_solution_new_reference(&mut handle) };
    assert_eq!(status, PseudoinvStatus::Ok);
    assert!(!handle.is_null());
    handle
}

fn last_error() -> String {
    let p = pseudoinv_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn reference_moments_at_unit_time() {
    let s = reference();
    let mut m = PseudoinvMoments::default();
    assert_eq!(unsafe { pseudoinv_solution_moments(s, 1.0, &mut m) }, PseudoinvStatus::Ok);
    assert!((m.dx - 17f64.sqrt() / 4.0).abs() < 1e-10);
    assert!((m.product - 1.0625).abs() < 1e-10);
    assert!((m.x_re - 2.0).abs() < 1e-12);
    assert!((m.norm - 1.0).abs() < 1e-12);
    let mut horizon = 0.0;
    assert_eq!(unsafe { pseudoinv_solution_horizon(s, &mut horizon) }, PseudoinvStatus::Ok);
    assert_eq!(horizon, 1.8);
    unsafe { pseudoinv_solution_free(s) };
}

#[test]
fn packet_and_density_are_consistent_at_start() {
    let s = reference();
    let mut psi = PseudoinvComplex::default();
    let mut rho = 0.0;
    unsafe {
        assert_eq!(pseudoinv_solution_packet(s, 0.4, 0.0, &mut psi), PseudoinvStatus::Ok);
        assert_eq!(pseudoinv_solution_density(s, 0.4, 0.0, &mut rho), PseudoinvStatus::Ok);
        pseudoinv_solution_free(s);
    }
    // metric seeds vanish at t = 0 in the reference scenario
    assert!((psi.re * psi.re + psi.im * psi.im - rho).abs() < 1e-14);
}

#[test]
fn pt_overlap_magnitude() {
    let s = reference();
    let mut v = PseudoinvComplex::default();
    assert_eq!(unsafe { pseudoinv_solution_pt_inner_product(s, 0.0, 0.0, 0.0, &mut v) }, PseudoinvStatus::Ok);
    let modulus = (v.re * v.re + v.im * v.im).sqrt();
    assert!((modulus - (1.0 / (8.0 * std::f64::consts::PI)).sqrt()).abs() < 1e-12);
    unsafe { pseudoinv_solution_free(s) };
}

#[test]
fn config_text_builds_a_solution() {
    let text = CString::new("[scenario]\ndrive = \"constant:0\"\nt_max = 1.0\n").unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { pseudoinv_solution_new_from_config(text.as_ptr(), &mut s) }, PseudoinvStatus::Ok);
    let mut m = PseudoinvMoments::default();
    assert_eq!(unsafe { pseudoinv_solution_moments(s, 0.5, &mut m) }, PseudoinvStatus::Ok);
    assert_eq!((m.x_im, m.p_im), (0.0, 0.0));
    unsafe { pseudoinv_solution_free(s) };
}

#[test]
fn errors_map_to_status_codes() {
    let mut s = ptr::null_mut();
    let bad = CString::new("[scenario]\nunknown = 1\n").unwrap();
    assert_eq!(unsafe { pseudoinv_solution_new_from_config(bad.as_ptr(), &mut s) }, PseudoinvStatus::Config);
    assert!(s.is_null());
    assert!(!last_error().is_empty());

    let past = CString::new("[scenario]\nt_max = 3.0\n").unwrap();
    assert_eq!(
        unsafe { pseudoinv_solution_new_from_config(past.as_ptr(), &mut s) },
        PseudoinvStatus::ValidityWindow
    );
    assert!(last_error().contains('2'));

    let mut out = 0.0;
    assert_eq!(unsafe { pseudoinv_solution_density(ptr::null(), 0.0, 0.0, &mut out) }, PseudoinvStatus::NullPointer);
    assert_eq!(unsafe { pseudoinv_solution_new_reference(ptr::null_mut()) }, PseudoinvStatus::NullPointer);

    let r = reference();
    assert_ne!(unsafe { pseudoinv_solution_density(r, 0.0, 5.0, &mut out) }, PseudoinvStatus::Ok);
    assert_eq!(
        unsafe { pseudoinv_solution_density(r, f64::NAN, 0.5, &mut out) },
        PseudoinvStatus::InvalidArgument
    );
    assert!(last_error().contains("x is not finite"));
    unsafe {
        pseudoinv_solution_free(r);
        pseudoinv_solution_free(ptr::null_mut());
    }
}

#[test]
fn header_compiles_and_links_from_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/pseudoinv.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for symbol in ["pseudoinv_solution_new_reference", "pseudoinv_solution_free", "PSEUDOINV_STATUS_VALIDITY_WINDOW"] {
        assert!(text.contains(symbol), "{symbol} missing from header");
    }
    let Ok(probe) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler; skipping syntax check");
        return;
    };
    assert!(probe.status.success());
    let dir = tempfile::tempdir().unwrap();
    let source = dir.path().join("probe.c");
    std::fs::write(
        &source,
        "#include \"pseudoinv.h\"\n\
         int main(void) {\n\
           PseudoinvSolution *s = 0;\n\
           PseudoinvMoments m;\n\
           if (pseudoinv_solution_new_reference(&s) != PSEUDOINV_STATUS_OK) return 1;\n\
           pseudoinv_solution_moments(s, 1.0, &m);\n\
           pseudoinv_solution_free(s);\n\
           return m.product > 0.5 ? 0 : 1;\n\
         }\n",
    )
    .unwrap();
    let include = header.parent().unwrap();
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(include)
        .arg(&source)
        .status()
        .unwrap();
    assert!(status.success());

    // target/<profile>/deps/abi-* -> target/<profile>/libpseudoinv_ffi.a
    let exe = std::env::current_exe().unwrap();
    let archive = exe.parent().and_then(Path::parent).unwrap().join("libpseudoinv_ffi.a");
    if !archive.exists() {
        eprintln!("{} not built; skipping link check", archive.display());
        return;
    }
    let binary = dir.path().join("probe");
    let status = Command::new("cc")
        .args(["-std=c99", "-I"])
        .arg(include)
        .arg(&source)
        .arg(&archive)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&binary)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(Command::new(&binary).status().unwrap().success());
}
