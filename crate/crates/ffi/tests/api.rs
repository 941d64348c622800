use std::ffi::{CStr, CString};
use std::ptr;

use qdlink_ffi::*;

fn last_error() -> String {
    let p = qd_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn take(s: *mut std::ffi::c_char) -> String {
    let out = CStr::from_ptr(s).to_string_lossy().into_owned();
    qd_string_free(s);
    out
}

fn parse(doc: &str, preset: Option<&str>) -> (QdStatus, *mut QdConfig) {
    let doc = CString::new(doc).unwrap();
    let preset = preset.map(|p| CString::new(p).unwrap());
    let mut cfg = ptr::null_mut();
    let status = unsafe {
        qd_config_parse(
            doc.as_ptr(),
            preset.as_ref().map_or(ptr::null(), |p| p.as_ptr()),
            &mut cfg,
        )
    };
    (status, cfg)
}

#[test]
fn run_and_read_bundle() {
    let (status, cfg) = parse("trials = 20000\n", Some("hbt"));
    assert_eq!(status, QdStatus::Ok);
    assert!(qd_last_error_message().is_null());
    unsafe {
        assert_eq!(qd_config_set_seed(cfg, 5), QdStatus::Ok);
        let mut echo = ptr::null_mut();
        assert_eq!(qd_config_echo(cfg, &mut echo), QdStatus::Ok);
        let echo = take(echo);
        assert!(echo.contains("master_seed = 5"), "{echo}");

        let mut bundle = ptr::null_mut();
        assert_eq!(qd_run_preset(cfg, 2, &mut bundle), QdStatus::Ok);
        qd_config_free(cfg);

        let mut json = ptr::null_mut();
        assert_eq!(qd_bundle_summary_json(bundle, &mut json), QdStatus::Ok);
        let records: serde_json::Value = serde_json::from_str(&take(json)).unwrap();
        assert!(records.as_array().unwrap().len() >= 4);

        let name = CString::new("g2_zero_qd1").unwrap();
        let (mut v, mut se) = (0.0, 0.0);
        assert_eq!(
            qd_bundle_summary_value(bundle, name.as_ptr(), &mut v, &mut se),
            QdStatus::Ok
        );
        assert!(se > 0.0 && (0.0..1.0).contains(&v));
        let missing = CString::new("nothing").unwrap();
        assert_eq!(
            qd_bundle_summary_value(bundle, missing.as_ptr(), &mut v, &mut se),
            QdStatus::NotFound
        );

        assert_eq!(qd_bundle_table_count(bundle), 2);
        let (mut tname, mut csv) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(
            qd_bundle_table(bundle, 0, &mut tname, &mut csv),
            QdStatus::Ok
        );
        assert_eq!(take(tname), "qd1");
        assert!(take(csv).lines().count() > 10);
        assert_eq!(
            qd_bundle_table(bundle, 2, &mut tname, &mut csv),
            QdStatus::NotFound
        );

        let dir = tempfile::tempdir().unwrap();
        let path = CString::new(dir.path().to_str().unwrap()).unwrap();
        assert_eq!(qd_bundle_write(bundle, path.as_ptr()), QdStatus::Ok);
        assert!(dir.path().join("hbt-seed5-summary.jsonl").exists());
        qd_bundle_free(bundle);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let (status, cfg) = parse("bogus = 1\n", Some("hbt"));
    assert_eq!(status, QdStatus::Config);
    assert!(cfg.is_null());
    assert!(last_error().contains("bogus"));

    let (status, _) = parse("", None);
    assert_eq!(status, QdStatus::Config);
    let (status, _) = parse("", Some("nope"));
    assert_eq!(status, QdStatus::Config);

    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(
            qd_config_parse(ptr::null(), ptr::null(), &mut out),
            QdStatus::NullArgument
        );
        let bad = [0xffu8, 0];
        assert_eq!(
            qd_config_parse(bad.as_ptr().cast(), ptr::null(), &mut out),
            QdStatus::InvalidUtf8
        );
        assert_eq!(qd_bundle_table_count(ptr::null()), 0);

        let (_, cfg) = parse("", Some("linkbudget"));
        assert_eq!(qd_config_set_seed(cfg, u64::MAX), QdStatus::Config);
        let mut bundle = ptr::null_mut();
        assert_eq!(qd_run_preset(cfg, 1, &mut bundle), QdStatus::Ok);
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("f"), "x").unwrap();
        let target = CString::new(dir.path().join("f/sub").to_str().unwrap()).unwrap();
        assert_eq!(qd_bundle_write(bundle, target.as_ptr()), QdStatus::Io);
        qd_bundle_free(bundle);
        qd_config_free(cfg);

        qd_config_free(ptr::null_mut());
        qd_bundle_free(ptr::null_mut());
        qd_string_free(ptr::null_mut());
    }
}

#[test]
fn analytic_wrappers_agree_with_library() {
    unsafe {
        let (mut a, mut b) = (std::mem::zeroed(), std::mem::zeroed());
        assert_eq!(qd_emitter_default(1, &mut a), QdStatus::Ok);
        assert_eq!(qd_emitter_default(2, &mut b), QdStatus::Ok);
        assert_eq!(qd_emitter_default(3, &mut b), QdStatus::NotFound);
        let mut v = 0.0;
        assert_eq!(qd_remote_visibility(&a, &b, 0.0, &mut v), QdStatus::Ok);
        let expected = qdlink::model::remote_visibility(
            &qdlink::model::EmitterParams::qd1(),
            &qdlink::model::EmitterParams::qd2(),
            0.0,
        )
        .unwrap();
        assert_eq!(v, expected);

        let bad = QdEmitter {
            t2_ps: 3.0 * a.t1_ps,
            ..a
        };
        assert_eq!(
            qd_remote_visibility(&bad, &b, 0.0, &mut v),
            QdStatus::Config
        );
        assert!(last_error().contains("t2"), "{}", last_error());

        let mut s = std::mem::zeroed();
        assert_eq!(qd_scenario_default(1, &mut s), QdStatus::Ok);
        let (mut rate, mut snr) = (0.0, 0.0);
        assert_eq!(qd_coincidence_rate(600.0, &s, &mut rate), QdStatus::Ok);
        assert!((rate - 0.012).abs() < 1e-12, "{rate}");
        assert_eq!(qd_snr_db(600.0, &s, &mut snr), QdStatus::Ok);
        assert!((snr - 10.0).abs() < 1e-6, "{snr}");

        let mut pump = 0.0;
        assert_eq!(
            qd_solve_pump_wavelength(893.16, 1582.75, &mut pump),
            QdStatus::Ok
        );
        assert!((pump - 2049.98).abs() < 0.01, "{pump}");
        assert_eq!(
            qd_solve_pump_wavelength(893.16, 1582.75, ptr::null_mut()),
            QdStatus::NullArgument
        );
    }
}

#[test]
fn header_declares_the_api() {
    let header = include_str!("../include/qdlink.h");
    for name in [
        "qd_last_error_message",
        "qd_string_free",
        "qd_config_parse",
        "qd_config_free",
        "qd_run_preset",
        "qd_bundle_write",
        "qd_bundle_summary_json",
        "qd_bundle_free",
        "qd_remote_visibility",
        "qd_coincidence_rate",
        "typedef struct QdConfig QdConfig",
        "QD_STATUS_CONFIG = 3",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
