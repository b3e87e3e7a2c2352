use mkdv_ut::contour::GridParams;
use mkdv_ut::core::profile::{BoundaryProfile, InitialProfile, ProfileSpec};
use mkdv_ut::core::Lambda;
use mkdv_ut::spectral::{derive_cdhr, tabulate_t, tabulate_x, SpectralConfig, SpectralData};
use mkdv_ut_ffi::*;
use std::ffi::{CStr, CString};
use std::ptr;

fn last() -> String {
    unsafe { CStr::from_ptr(mkdv_last_error()) }.to_string_lossy().into_owned()
}

fn spectral_json(ip: &InitialProfile, bp: &BoundaryProfile) -> CString {
    let cfg = SpectralConfig {
        grid: GridParams { panels_per_ray: 6, nodes_per_panel: 16, r_max: 30.0, grading: 1.8 },
        ..Default::default()
    };
    let sd = derive_cdhr(SpectralData::merge(tabulate_x(ip, &cfg).unwrap(), tabulate_t(bp, &cfg).unwrap()).unwrap()).unwrap();
    CString::new(serde_json::to_string(&sd).unwrap()).unwrap()
}

#[test]
fn null_and_malformed_arguments() {
    let mut h: *mut MkdvProblem = ptr::null_mut();
    let s = unsafe { mkdv_problem_new(ptr::null(), ptr::null(), 1.0, &mut h) };
    assert_eq!(s, MkdvStatus::MkdvNullArgument);
    assert!(last().contains("spectral_json"));
    assert!(h.is_null());
    let bad = CString::new("{not json").unwrap();
    assert_eq!(unsafe { mkdv_problem_new(bad.as_ptr(), ptr::null(), 1.0, &mut h) }, MkdvStatus::MkdvConfigError);
    let mut out = [0.0; 3];
    assert_eq!(unsafe { mkdv_problem_solve(ptr::null(), 0.0, 0.0, out.as_mut_ptr(), ptr::null_mut()) }, MkdvStatus::MkdvNullArgument);
    unsafe { mkdv_problem_free(ptr::null_mut()) };
}

#[test]
fn scatter_matches_library() {
    let json = CString::new(r#"{"kind": "preset", "name": "gaussian", "params": {"alpha": 0.8, "beta": 1, "x0": 1}}"#).unwrap();
    let mut out = [0.0; 4];
    let s = unsafe { mkdv_scatter_x(-1, json.as_ptr(), 12.0, 0.7, -0.2, out.as_mut_ptr()) };
    assert_eq!(s, MkdvStatus::MkdvOk, "{}", last());
    assert_eq!(last(), "");
    let spec = ProfileSpec::preset("gaussian", &[("alpha", 0.8), ("beta", 1.0), ("x0", 1.0)]);
    let ip = InitialProfile::new(Lambda::Focusing, &spec, 12.0).unwrap();
    let v = mkdv_ut::xscatter::solve_x_col2(&ip, mkdv_ut::core::mat2::c(0.7, -0.2), 1e-12).unwrap().first();
    assert_eq!(out, [v[1].re, v[1].im, v[0].re, v[0].im]);
    // upper half plane and bad lambda
    assert_eq!(unsafe { mkdv_scatter_x(-1, json.as_ptr(), 12.0, 0.0, 1.0, out.as_mut_ptr()) }, MkdvStatus::MkdvNumericalError);
    assert_eq!(unsafe { mkdv_scatter_x(3, json.as_ptr(), 12.0, 0.0, 0.0, out.as_mut_ptr()) }, MkdvStatus::MkdvConfigError);
}

#[test]
fn zero_data_problem_and_gate() {
    let z = BoundaryProfile::zero(Lambda::Defocusing, 5.0);
    let sj = spectral_json(&InitialProfile::zero(Lambda::Defocusing, 5.0), &z);
    let opts = CString::new(r#"{"tail_tol": 1e-6}"#).unwrap();
    let mut h: *mut MkdvProblem = ptr::null_mut();
    assert_eq!(unsafe { mkdv_problem_new(sj.as_ptr(), opts.as_ptr(), 1.0, &mut h) }, MkdvStatus::MkdvOk, "{}", last());
    assert_eq!(unsafe { mkdv_problem_gate(h, 1e-4) }, MkdvStatus::MkdvOk);
    let (mut out, mut im) = ([1.0; 3], 1.0);
    assert_eq!(unsafe { mkdv_problem_solve(h, 0.5, 0.2, out.as_mut_ptr(), &mut im) }, MkdvStatus::MkdvOk);
    assert_eq!((out, im), ([0.0; 3], 0.0));
    assert_eq!(unsafe { mkdv_problem_solve(h, -1.0, 0.2, out.as_mut_ptr(), ptr::null_mut()) }, MkdvStatus::MkdvNumericalError);
    assert!(last().contains("outside"));
    unsafe { mkdv_problem_free(h) };

    let bad = CString::new(r#"{"tail_tol": -1}"#).unwrap();
    assert_eq!(unsafe { mkdv_problem_new(sj.as_ptr(), bad.as_ptr(), 1.0, &mut h) }, MkdvStatus::MkdvConfigError);

    // incompatible data: u0(0) != 0 with zero boundary values
    let g = ProfileSpec::preset("gaussian", &[("alpha", 1.0), ("beta", 1.0), ("x0", 0.0)]);
    let ip = InitialProfile::new(Lambda::Focusing, &g, 10.0).unwrap();
    let sj = spectral_json(&ip, &BoundaryProfile::zero(Lambda::Focusing, 5.0));
    assert_eq!(unsafe { mkdv_problem_new(sj.as_ptr(), ptr::null(), 1.0, &mut h) }, MkdvStatus::MkdvOk);
    assert_eq!(unsafe { mkdv_problem_gate(h, 1e-4) }, MkdvStatus::MkdvGateFailed);
    assert!(last().contains("global relation"));
    unsafe { mkdv_problem_free(h) };
}

#[test]
fn header_compiles_as_c() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = dir.join("include/mkdv_ut.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in ["mkdv_problem_new", "mkdv_problem_free", "mkdv_problem_gate", "mkdv_problem_solve", "mkdv_scatter_x", "mkdv_last_error"] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let src = std::env::temp_dir().join(format!("mkdv_hdr_{}.c", std::process::id()));
    std::fs::write(
        &src,
        "#include \"mkdv_ut.h\"\nint main(void) { MkdvProblem *p = 0; double o[3]; \
         MkdvStatus s = mkdv_problem_solve(p, 0.0, 0.0, o, 0); return s == MKDV_NULL_ARGUMENT ? 0 : 1; }\n",
    )
    .unwrap();
    let Ok(o) = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(dir.join("include"))
        .arg(&src)
        .output()
    else {
        eprintln!("no C compiler; header syntax not checked");
        return;
    };
    let _ = std::fs::remove_file(&src);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}
