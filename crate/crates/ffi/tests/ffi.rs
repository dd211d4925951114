use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use symrtn_ffi::*;

fn model(
    w: usize,
    h: usize,
    d: usize,
    bond: usize,
    group: Option<&str>,
    n: usize,
    region: &[usize],
) -> *mut SymrtnModel {
    let name = group.map(|g| CString::new(g).unwrap());
    let mut out = ptr::null_mut();
    let status = unsafe {
        symrtn_model_new(
            w,
            h,
            false,
            d,
            bond,
            name.as_ref().map_or(ptr::null(), |c| c.as_ptr()),
            n,
            region.as_ptr(),
            region.len(),
            &mut out,
        )
    };
    assert_eq!(status, SymrtnStatus::Ok, "{}", last_error());
    out
}

fn last_error() -> String {
    let p = symrtn_last_error();
    if p.is_null() {
        String::new()
    } else {
        unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
    }
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(symrtn_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn single_site_partition_functions() {
    let m = model(1, 1, 2, 1, None, 2, &[0]);
    let (mut z0, mut z1) = (f64::NAN, f64::NAN);
    unsafe {
        assert_eq!(
            symrtn_log_partition(m, SYMRTN_Z0, &mut z0),
            SymrtnStatus::Ok
        );
        assert_eq!(
            symrtn_log_partition(m, SYMRTN_Z1, &mut z1),
            SymrtnStatus::Ok
        );
        symrtn_model_free(m);
    }
    // Z0 = 1 and Z1 = Tr ρ² averaged over a Haar qubit = 1.
    assert!(z0.abs() < 1e-12);
    assert!(z1.abs() < 1e-12);
}

#[test]
fn diagonal_counterexample_count() {
    let m = model(2, 2, 2, 2, Some("Z2"), 2, &[0]);
    let mut count = 0u64;
    let labels = [1usize, 0, 0, 1];
    unsafe {
        assert_eq!(
            symrtn_solution_count(m, labels.as_ptr(), 4, &mut count),
            SymrtnStatus::Ok
        );
        symrtn_model_free(m);
    }
    assert_eq!(count, 32);
}

#[test]
fn action_and_entropies_agree() {
    let m = model(2, 2, 2, 2, Some("Z2"), 2, &[0, 1]);
    let labels = [0usize; 4];
    let (mut a, mut exact, mut ground) =
        (f64::NAN, SymrtnEntropy::default(), SymrtnEntropy::default());
    unsafe {
        assert_eq!(
            symrtn_action(m, labels.as_ptr(), 4, SYMRTN_Z0, &mut a),
            SymrtnStatus::Ok
        );
        assert_eq!(symrtn_entropy_exact(m, &mut exact), SymrtnStatus::Ok);
        assert_eq!(
            symrtn_entropy_ground_state(m, &mut ground),
            SymrtnStatus::Ok
        );
        symrtn_model_free(m);
    }
    assert!(a.is_finite());
    assert_eq!(exact.exact, 1);
    assert!(exact.std_error < 0.0);
    assert!(exact.value > 0.0 && exact.value <= ground.value + 1e-9);
}

#[test]
fn haar_average_runs() {
    let m = model(2, 1, 2, 2, None, 2, &[0]);
    let mut avg = SymrtnHaarAverage::default();
    unsafe {
        assert_eq!(symrtn_haar_average(m, 200, 3, &mut avg), SymrtnStatus::Ok);
        symrtn_model_free(m);
    }
    assert!(avg.z0_mean > 0.0 && avg.z1_mean > 0.0 && avg.z1_stderr > 0.0);
}

#[test]
fn errors_set_status_and_message() {
    let mut out = ptr::null_mut();
    let z3 = CString::new("Z3").unwrap();
    let status =
        unsafe { symrtn_model_new(2, 2, false, 2, 2, z3.as_ptr(), 2, ptr::null(), 0, &mut out) };
    assert_eq!(status, SymrtnStatus::InvalidArgument);
    assert!(out.is_null());
    assert!(!last_error().is_empty());

    let m = model(2, 2, 2, 2, None, 2, &[0]);
    let mut count = 0u64;
    let mut x = 0.0;
    let labels = [0usize; 4];
    unsafe {
        assert_eq!(
            symrtn_solution_count(m, labels.as_ptr(), 4, &mut count),
            SymrtnStatus::MissingSymmetry
        );
        assert_eq!(
            symrtn_action(m, labels.as_ptr(), 3, SYMRTN_Z0, &mut x),
            SymrtnStatus::InvalidArgument
        );
        assert_eq!(
            symrtn_action(m, labels.as_ptr(), 4, 7, &mut x),
            SymrtnStatus::InvalidArgument
        );
        assert_eq!(
            symrtn_log_partition(m, SYMRTN_Z0, ptr::null_mut()),
            SymrtnStatus::NullPointer
        );
        assert_eq!(
            symrtn_log_partition(ptr::null(), SYMRTN_Z0, &mut x),
            SymrtnStatus::NullPointer
        );
        symrtn_model_free(m);
        symrtn_model_free(ptr::null_mut());
    }
}

#[test]
fn enumeration_budget_is_reported() {
    let m = model(5, 5, 2, 2, None, 2, &[0]);
    let mut x = 0.0;
    let status = unsafe { symrtn_log_partition(m, SYMRTN_Z1, &mut x) };
    unsafe { symrtn_model_free(m) };
    assert_eq!(status, SymrtnStatus::BudgetExceeded);
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/symrtn.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in [
        "symrtn_model_new",
        "symrtn_solution_count",
        "symrtn_haar_average",
        "symrtn_last_error",
    ] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        format!(
            "#include <stdio.h>\n#include \"{}\"\nint main(void) {{ return 0; }}\n",
            header.display()
        ),
    )
    .unwrap();
    match Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror"])
        .arg(&src)
        .status()
    {
        Ok(s) => assert!(s.success(), "header failed to compile"),
        Err(_) => eprintln!("no C compiler; syntax check skipped"),
    }
}
