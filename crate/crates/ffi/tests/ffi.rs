use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use isl_ffi::*;

fn config(json: &str) -> *mut IslConfig {
    let text = CString::new(json).unwrap();
    let mut cfg = ptr::null_mut();
    let s = unsafe { isl_config_from_json(text.as_ptr(), &mut cfg) };
    assert_eq!(s, IslStatus::Ok, "{}", last_error());
    cfg
}

fn last_error() -> String {
    let p = isl_last_error();
    if p.is_null() {
        String::new()
    } else {
        unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
    }
}

#[test]
fn design_matches_core() {
    let cfg = config("{}");
    let mut d = IslDesign::default();
    assert_eq!(unsafe { isl_design(cfg, &mut d) }, IslStatus::Ok);
    assert!((d.l_adj_star_m / 1e3 - 3170.42).abs() < 0.05);
    assert!((d.required_eirpg_w - 3.4546).abs() < 1e-3);
    unsafe { isl_config_free(cfg) };
}

#[test]
fn errors_carry_codes_and_messages() {
    let mut cfg = ptr::null_mut();
    let bad = CString::new(r#"{"planes": 7, "bogus": 1}"#).unwrap();
    assert_eq!(
        unsafe { isl_config_from_json(bad.as_ptr(), &mut cfg) },
        IslStatus::InvalidConfig
    );
    assert!(cfg.is_null());
    assert!(last_error().contains("bogus"));

    assert_eq!(
        unsafe { isl_config_from_json(ptr::null(), &mut cfg) },
        IslStatus::NullPointer
    );
    assert_eq!(
        unsafe { isl_design(ptr::null(), ptr::null_mut()) },
        IslStatus::NullPointer
    );

    let cfg = config(r#"{"sats_per_plane": 4}"#);
    let mut c = ptr::null_mut();
    assert_eq!(
        unsafe { isl_constellation_new(cfg, 0.0, &mut c) },
        IslStatus::Ok
    );
    let mut d = 0.0;
    assert_eq!(
        unsafe { isl_constellation_distance(c, 0, 999, &mut d) },
        IslStatus::OutOfRange
    );
    assert_eq!(
        unsafe { isl_constellation_distance(c, 0, 4, &mut d) },
        IslStatus::Ok
    );
    assert!(d > 0.0);

    // a snapshot from another configuration is refused
    let other = config(r#"{"sats_per_plane": 5}"#);
    let mut m = ptr::null_mut();
    assert_eq!(
        unsafe { isl_match(other, c, &mut m) },
        IslStatus::Precondition
    );
    unsafe {
        isl_constellation_free(c);
        isl_config_free(cfg);
        isl_config_free(other);
        // null is accepted by every destructor
        isl_config_free(ptr::null_mut());
        isl_run_free(ptr::null_mut());
    }
}

#[test]
fn config_round_trips_through_json() {
    let cfg = config(r#"{"planes": 8, "matching": "gmm"}"#);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { isl_config_to_json(cfg, &mut s) }, IslStatus::Ok);
    let json = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    assert!(json.contains("\"gmm\""));
    let again = config(&json);
    let mut s2 = ptr::null_mut();
    assert_eq!(unsafe { isl_config_to_json(again, &mut s2) }, IslStatus::Ok);
    assert_eq!(unsafe { CStr::from_ptr(s2) }.to_str().unwrap(), json);
    unsafe {
        isl_string_free(s);
        isl_string_free(s2);
        isl_config_free(cfg);
        isl_config_free(again);
    }
}

#[test]
fn run_exposes_metrics_and_samples() {
    let cfg = config(
        r#"{"sats_per_plane": 10, "nsim": 6, "antenna": "isotropic", "allocation": "gra", "resources": 2}"#,
    );
    let mut run = ptr::null_mut();
    assert_eq!(
        unsafe { isl_run(cfg, &mut run) },
        IslStatus::Ok,
        "{}",
        last_error()
    );
    let mut m = IslMetrics::default();
    assert_eq!(unsafe { isl_run_metrics(run, &mut m) }, IslStatus::Ok);
    assert_eq!(m.n_sim, 6);
    assert_eq!(m.permissibility_violations, 0);
    assert_eq!(m.mu_m_hat, m.mu_m_hat_degrees);
    assert!((0.0..=1.0).contains(&m.mu_r_sinr_hat));

    let mut n = 0;
    assert_eq!(
        unsafe { isl_run_rate_samples(run, ptr::null_mut(), 0, &mut n) },
        IslStatus::Ok
    );
    let mut buf = vec![0.0; n];
    assert_eq!(
        unsafe { isl_run_rate_samples(run, buf.as_mut_ptr(), n, &mut n) },
        IslStatus::Ok
    );
    assert!(buf.windows(2).all(|w| w[0] <= w[1]));
    assert!((buf.iter().sum::<f64>() / 6.0 - m.mu_r_snr_bps / 2.0).abs() <= 1e-6 * m.mu_r_snr_bps);

    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().to_str().unwrap()).unwrap();
    assert_eq!(
        unsafe { isl_run_write_csv(run, path.as_ptr()) },
        IslStatus::Ok
    );
    assert!(dir.path().join("metrics.csv").exists());
    unsafe {
        isl_run_free(run);
        isl_config_free(cfg);
    }
}

#[test]
fn matching_pairs_sum_to_weight() {
    let cfg = config(r#"{"sats_per_plane": 20}"#);
    let mut c = ptr::null_mut();
    assert_eq!(
        unsafe { isl_constellation_new(cfg, 600.0, &mut c) },
        IslStatus::Ok
    );
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { isl_match(cfg, c, &mut m) }, IslStatus::Ok);
    let n = unsafe { isl_matching_len(m) };
    assert!(n > 0);
    let mut sum = 0.0;
    for i in 0..n {
        let mut p = IslPair::default();
        assert_eq!(unsafe { isl_matching_pair(m, i, &mut p) }, IslStatus::Ok);
        sum += 2.0 * p.rate_snr_bps;
    }
    let w = unsafe { isl_matching_weight(m) };
    assert!((sum - w).abs() <= 1e-9 * w);
    let mut p = IslPair::default();
    assert_eq!(
        unsafe { isl_matching_pair(m, n, &mut p) },
        IslStatus::OutOfRange
    );
    unsafe {
        isl_matching_free(m);
        isl_constellation_free(c);
        isl_config_free(cfg);
    }
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(isl_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

/// Compiles tests/smoke.c against the generated header and the static
/// library. Skipped when no C compiler or static library is around.
#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let profile_dir = std::env::current_exe()
        .unwrap()
        .parent()
        .and_then(|d| d.parent())
        .unwrap()
        .to_path_buf();
    let lib = profile_dir.join("libisl_ffi.a");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if !lib.exists() || Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no {} or no C compiler", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new(&cc)
        .arg(manifest.join("tests/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C build failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(
        out.status.success(),
        "smoke exited with {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("isl "));
}
