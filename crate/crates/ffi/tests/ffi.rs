use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use survtrans_ffi::*;

fn last_error() -> String {
    let p = st_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn fixture_dataset() -> *mut StDataset {
    let durations = [2.0, 1.0, 4.0, 3.0, 1.5, 5.0];
    let events = [1u8, 1, 0, 1, 1, 1];
    let x = [0.0, 1.0, 0.0, 1.0, 1.0, 0.0];
    let mut ds = ptr::null_mut();
    let status = unsafe { st_dataset_new(6, 1, durations.as_ptr(), events.as_ptr(), x.as_ptr(), &mut ds) };
    assert_eq!(status, StStatus::Ok);
    ds
}

#[test]
fn km_hand_fixture() {
    let d = [1.0, 2.0, 3.0];
    let e = [1u8, 0, 1];
    let mut curve = ptr::null_mut();
    unsafe {
        assert_eq!(st_km_fit(d.as_ptr(), e.as_ptr(), 3, &mut curve), StStatus::Ok);
        assert_eq!(st_km_len(curve), 2);
        let (mut t, mut s, mut n, mut k) = (0.0, 0.0, 0usize, 0usize);
        assert_eq!(st_km_point(curve, 0, &mut t, &mut s, &mut n, &mut k), StStatus::Ok);
        assert_eq!((t, n, k), (1.0, 3, 1));
        assert!((s - 2.0 / 3.0).abs() < 1e-12);
        let mut s3 = 1.0;
        assert_eq!(st_km_survival_at(curve, 3.0, &mut s3), StStatus::Ok);
        assert_eq!(s3, 0.0);
        assert_eq!(
            st_km_point(curve, 2, ptr::null_mut(), ptr::null_mut(), ptr::null_mut(), ptr::null_mut()),
            StStatus::InvalidArgument
        );
        st_km_free(curve);
    }
}

#[test]
fn cox_round_trip_through_json() {
    let ds = fixture_dataset();
    unsafe {
        let mut model = ptr::null_mut();
        assert_eq!(st_cox_fit(ds, 0.5, &mut model), StStatus::Ok);
        st_dataset_free(ds);
        assert_eq!(st_cox_n_features(model), 1);
        let (mut b, mut se, mut p) = (0.0, 0.0, 0.0);
        assert_eq!(st_cox_coefficients(model, &mut b, &mut se, &mut p, 1), StStatus::Ok);
        assert!(b > 0.0 && se > 0.0 && (0.0..=1.0).contains(&p));

        let mut json = ptr::null_mut();
        assert_eq!(st_cox_to_json(model, &mut json), StStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(st_cox_from_json(json, &mut back), StStatus::Ok);
        st_string_free(json);
        let mut b2 = 0.0;
        assert_eq!(st_cox_coefficients(back, &mut b2, ptr::null_mut(), ptr::null_mut(), 1), StStatus::Ok);
        assert_eq!(b.to_bits(), b2.to_bits());

        let x = [1.0];
        let mut needed = 0usize;
        let status = st_cox_predict_survival(model, x.as_ptr(), 1, ptr::null_mut(), ptr::null_mut(), 0, &mut needed);
        assert_eq!(status, StStatus::BufferTooSmall);
        let mut times = vec![0.0; needed];
        let mut surv = vec![0.0; needed];
        let mut len = 0usize;
        let status =
            st_cox_predict_survival(model, x.as_ptr(), 1, times.as_mut_ptr(), surv.as_mut_ptr(), needed, &mut len);
        assert_eq!(status, StStatus::Ok);
        assert_eq!(len, needed);
        assert_eq!((times[0], surv[0]), (0.0, 1.0));
        assert!(surv.windows(2).all(|w| w[1] <= w[0]));
        let mut s_last = 0.0;
        assert_eq!(st_cox_survival_at(model, x.as_ptr(), 1, times[len - 1], &mut s_last), StStatus::Ok);
        assert_eq!(s_last, surv[len - 1]);

        st_cox_free(model);
        st_cox_free(back);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    unsafe {
        let mut ds = ptr::null_mut();
        let d = [1.0, -1.0];
        let e = [1u8, 1];
        assert_eq!(st_dataset_new(2, 0, d.as_ptr(), e.as_ptr(), ptr::null(), &mut ds), StStatus::InvalidArgument);
        assert!(ds.is_null());
        assert!(!last_error().is_empty());

        assert_eq!(st_dataset_new(2, 0, ptr::null(), e.as_ptr(), ptr::null(), &mut ds), StStatus::NullPointer);
        assert!(last_error().contains("durations"));

        // no events
        let d = [1.0, 2.0];
        let e = [0u8, 0];
        assert_eq!(st_dataset_new(2, 0, d.as_ptr(), e.as_ptr(), ptr::null(), &mut ds), StStatus::Ok);
        let mut model = ptr::null_mut();
        assert_eq!(st_cox_fit(ds, 0.0, &mut model), StStatus::NoEvents);
        st_dataset_free(ds);

        let mut out = 0.0;
        assert_eq!(st_roc_auc([1u8, 1].as_ptr(), [0.1, 0.2].as_ptr(), 2, &mut out), StStatus::Undefined);
        assert_eq!(st_cox_fit(ptr::null(), 0.0, &mut model), StStatus::NullPointer);

        let bad = CString::new("{not json").unwrap();
        assert_eq!(st_cox_from_json(bad.as_ptr(), &mut model), StStatus::Serialization);
    }
}

#[test]
fn metrics_match_core() {
    let d = [1.0, 3.0, 5.0];
    let e = [1u8, 1, 0];
    let r = [3.0, 2.0, 1.0];
    let mut c = 0.0;
    unsafe {
        assert_eq!(st_concordance_index(d.as_ptr(), e.as_ptr(), r.as_ptr(), 3, &mut c), StStatus::Ok);
    }
    assert_eq!(c, 1.0);
    let labels = [1u8, 0, 1, 0];
    let scores = [0.9, 0.1, 0.8, 0.2];
    let mut auc = 0.0;
    unsafe {
        assert_eq!(st_roc_auc(labels.as_ptr(), scores.as_ptr(), 4, &mut auc), StStatus::Ok);
    }
    assert_eq!(auc, 1.0);
}

#[test]
fn free_functions_accept_null() {
    unsafe {
        st_dataset_free(ptr::null_mut());
        st_cox_free(ptr::null_mut());
        st_km_free(ptr::null_mut());
        st_string_free(ptr::null_mut());
        assert_eq!(st_cox_n_features(ptr::null()), 0);
        assert_eq!(st_km_len(ptr::null()), 0);
    }
    let v = unsafe { CStr::from_ptr(st_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/survtrans.h")
}

#[test]
fn header_declares_every_export() {
    let text = std::fs::read_to_string(header()).expect("generated header");
    for name in [
        "st_last_error_message",
        "st_version",
        "st_dataset_new",
        "st_dataset_free",
        "st_cox_fit",
        "st_cox_free",
        "st_cox_n_features",
        "st_cox_coefficients",
        "st_cox_predict_survival",
        "st_cox_survival_at",
        "st_cox_to_json",
        "st_cox_from_json",
        "st_string_free",
        "st_km_fit",
        "st_km_len",
        "st_km_point",
        "st_km_survival_at",
        "st_km_free",
        "st_concordance_index",
        "st_roc_auc",
        "typedef struct StDataset StDataset",
        "ST_STATUS_OK = 0",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
}

/// Compiles a C program against the header and static library.
#[test]
fn c_program_links_and_runs() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    // target/<profile>/deps/<test binary> -> target/<profile>
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libsurvtrans_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let src = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/smoke.c");
    let status = Command::new(cc)
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "smoke program exited with {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}

fn which_cc() -> Result<&'static str, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc).arg("--version").output().is_ok_and(|o| o.status.success()) {
            return Ok(cc);
        }
    }
    Err(())
}
