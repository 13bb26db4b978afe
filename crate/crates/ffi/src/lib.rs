//! C ABI over `isl-core`.
//!
//! Every entry point returns an [`IslStatus`]; on failure the message is
//! available from [`isl_last_error`] on the same thread. Objects are opaque
//! handles released with their `_free` function. Configurations are passed as
//! JSON in the same format the `islsim` binary reads.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use isl_core::config::SpecConfig;
use isl_core::design::design_report;
use isl_core::geometry::{Constellation, SatId};
use isl_core::graph::{FeasibilityGraph, Matching};
use isl_core::report::write_all;
use isl_core::sim::{run_detailed, Run, RunOptions};
use isl_core::Error;

/// Result code of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IslStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidConfig = 3,
    Domain = 4,
    Precondition = 5,
    Io = 6,
    OutOfRange = 7,
    Panic = 8,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn status_of(e: &Error) -> IslStatus {
    match e {
        Error::InvalidConfig(_) | Error::ParseConfig { .. } | Error::Json(_) => {
            IslStatus::InvalidConfig
        }
        Error::Domain(_) => IslStatus::Domain,
        Error::Precondition(_) => IslStatus::Precondition,
        Error::ReadFile { .. } | Error::Io(_) | Error::Csv(_) => IslStatus::Io,
    }
}

struct Fail(IslStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> IslStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IslStatus::Ok,
        Ok(Err(Fail(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            IslStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(IslStatus::NullPointer, format!("{what} is null"))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Fail(IslStatus::InvalidUtf8, format!("{what}: {e}")))
}

fn boxed<T>(x: T) -> *mut T {
    Box::into_raw(Box::new(x))
}

unsafe fn release<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Experiment configuration.
pub struct IslConfig(SpecConfig);

/// Constellation snapshot.
pub struct IslConstellation(Constellation);

/// Matching on one snapshot.
pub struct IslMatching(Matching);

/// Finished experiment.
pub struct IslRun(Run);

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct IslDesign {
    pub l_adj_star_m: f64,
    pub mpl_db: f64,
    pub required_eirpg_w: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct IslPair {
    pub u: usize,
    pub v: usize,
    pub rate_snr_bps: f64,
    pub dist_m: f64,
}

/// Summary of a run. SINR fields are NaN when no allocation ran.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct IslMetrics {
    pub n_sim: usize,
    pub mu_m_hat: f64,
    pub mu_m_hat_degrees: f64,
    pub mu_r_snr_bps: f64,
    pub mu_r_sinr_hat: f64,
    pub mu_r_sinr_bps: f64,
    pub min_degree: usize,
    pub permissibility_violations: usize,
}

/// Last error message on this thread, or null. Valid until the next failing
/// call on the same thread.
#[no_mangle]
pub extern "C" fn isl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version, static string.
#[no_mangle]
pub extern "C" fn isl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn isl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Default configuration.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn isl_config_default(out: *mut *mut IslConfig) -> IslStatus {
    guard(|| {
        *self::out(out, "out")? = boxed(IslConfig(SpecConfig::default()));
        Ok(())
    })
}

/// Parses a JSON configuration; absent fields take their defaults.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn isl_config_from_json(
    json: *const c_char,
    out: *mut *mut IslConfig,
) -> IslStatus {
    guard(|| {
        let slot = self::out(out, "out")?;
        let cfg = SpecConfig::from_json(text(json, "json")?)?;
        cfg.to_spec()?;
        *slot = boxed(IslConfig(cfg));
        Ok(())
    })
}

/// Effective configuration as JSON; free with [`isl_string_free`].
///
/// # Safety
/// `cfg` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn isl_config_to_json(
    cfg: *const IslConfig,
    out: *mut *mut c_char,
) -> IslStatus {
    guard(|| {
        let slot = self::out(out, "out")?;
        let json = borrow(cfg, "cfg")?.0.to_json();
        *slot = CString::new(json)
            .map_err(|e| Fail(IslStatus::InvalidUtf8, e.to_string()))?
            .into_raw();
        Ok(())
    })
}

/// # Safety
/// `cfg` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn isl_config_free(cfg: *mut IslConfig) {
    release(cfg);
}

/// Design range, margin path loss and required EIRPG for `cfg`.
///
/// # Safety
/// `cfg` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn isl_design(cfg: *const IslConfig, out: *mut IslDesign) -> IslStatus {
    guard(|| {
        let slot = self::out(out, "out")?;
        let c = &borrow(cfg, "cfg")?.0;
        let radio = c.radio();
        radio.validate()?;
        let r = design_report(&c.constellation(), &radio, None)?;
        *slot = IslDesign {
            l_adj_star_m: r.l_adj_star_m,
            mpl_db: r.mpl_db,
            required_eirpg_w: r.required_eirpg_w,
        };
        Ok(())
    })
}

/// Constellation of `cfg` propagated to `epoch_s`.
///
/// # Safety
/// `cfg` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn isl_constellation_new(
    cfg: *const IslConfig,
    epoch_s: f64,
    out: *mut *mut IslConstellation,
) -> IslStatus {
    guard(|| {
        let slot = self::out(out, "out")?;
        let c = Constellation::new(borrow(cfg, "cfg")?.0.constellation())?.propagate(epoch_s)?;
        *slot = boxed(IslConstellation(c));
        Ok(())
    })
}

/// # Safety
/// `c` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn isl_constellation_len(c: *const IslConstellation) -> usize {
    c.as_ref().map_or(0, |c| c.0.len())
}

/// Distance in metres between satellites `u` and `v`.
///
/// # Safety
/// `c` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn isl_constellation_distance(
    c: *const IslConstellation,
    u: usize,
    v: usize,
    out: *mut f64,
) -> IslStatus {
    guard(|| {
        let slot = self::out(out, "out")?;
        let c = &borrow(c, "constellation")?.0;
        if u >= c.len() || v >= c.len() {
            return Err(Fail(
                IslStatus::OutOfRange,
                format!("satellite index out of range 0..{}", c.len()),
            ));
        }
        *slot = c.distance(SatId(u), SatId(v));
        Ok(())
    })
}

/// # Safety
/// `c` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn isl_constellation_free(c: *mut IslConstellation) {
    release(c);
}

/// Runs the matching algorithm of `cfg` on snapshot `c` without history.
///
/// # Safety
/// Handles must be live and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn isl_match(
    cfg: *const IslConfig,
    c: *const IslConstellation,
    out: *mut *mut IslMatching,
) -> IslStatus {
    guard(|| {
        let slot = self::out(out, "out")?;
        let spec = borrow(cfg, "cfg")?.0.to_spec()?;
        let c = &borrow(c, "constellation")?.0;
        if c.config() != &spec.constellation {
            return Err(Fail(
                IslStatus::Precondition,
                "constellation was not built from this configuration".into(),
            ));
        }
        let g = FeasibilityGraph::build(c, &spec.radio);
        let m = spec.matching_algo.run(
            c,
            &g,
            spec.transceivers,
            spec.radio.r_min_bps,
            &Matching::new(c.len()),
        );
        *slot = boxed(IslMatching(m));
        Ok(())
    })
}

/// # Safety
/// `m` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn isl_matching_len(m: *const IslMatching) -> usize {
    m.as_ref().map_or(0, |m| m.0.len())
}

/// `w(M)` in bit/s.
///
/// # Safety
/// `m` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn isl_matching_weight(m: *const IslMatching) -> f64 {
    m.as_ref().map_or(0.0, |m| m.0.weight())
}

/// Pair `i` of the matching, heaviest first.
///
/// # Safety
/// `m` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn isl_matching_pair(
    m: *const IslMatching,
    i: usize,
    out: *mut IslPair,
) -> IslStatus {
    guard(|| {
        let slot = self::out(out, "out")?;
        let m = &borrow(m, "matching")?.0;
        let e = m.pairs().get(i).ok_or_else(|| {
            Fail(
                IslStatus::OutOfRange,
                format!("pair {i} out of range 0..{}", m.len()),
            )
        })?;
        *slot = IslPair {
            u: e.u.0,
            v: e.v.0,
            rate_snr_bps: e.rate_snr_bps,
            dist_m: e.dist_m,
        };
        Ok(())
    })
}

/// # Safety
/// `m` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn isl_matching_free(m: *mut IslMatching) {
    release(m);
}

/// Runs the full experiment of `cfg`.
///
/// # Safety
/// `cfg` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn isl_run(cfg: *const IslConfig, out: *mut *mut IslRun) -> IslStatus {
    guard(|| {
        let slot = self::out(out, "out")?;
        let spec = borrow(cfg, "cfg")?.0.to_spec()?;
        *slot = boxed(IslRun(run_detailed(&spec, &RunOptions::default())?));
        Ok(())
    })
}

/// # Safety
/// `run` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn isl_run_metrics(run: *const IslRun, out: *mut IslMetrics) -> IslStatus {
    guard(|| {
        let slot = self::out(out, "out")?;
        let run = &borrow(run, "run")?.0;
        let r = &run.report;
        *slot = IslMetrics {
            n_sim: run.spec.n_sim,
            mu_m_hat: r.mu_m_hat,
            mu_m_hat_degrees: r.mu_m_hat_degrees,
            mu_r_snr_bps: r.mu_r_snr,
            mu_r_sinr_hat: r.mu_r_sinr_hat.unwrap_or(f64::NAN),
            mu_r_sinr_bps: r.mu_r_sinr.unwrap_or(f64::NAN),
            min_degree: r.min_degree(),
            permissibility_violations: r.permissibility_violations,
        };
        Ok(())
    })
}

/// Copies up to `cap` sorted `R*_SNR` samples into `buf` and stores the total
/// sample count in `len`. Pass `cap = 0` to query the count.
///
/// # Safety
/// `buf` must hold `cap` doubles (may be null when `cap` is 0); `len` must be
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn isl_run_rate_samples(
    run: *const IslRun,
    buf: *mut f64,
    cap: usize,
    len: *mut usize,
) -> IslStatus {
    guard(|| {
        let n = self::out(len, "len")?;
        let xs = &borrow(run, "run")?.0.report.rate_cdf;
        *n = xs.len();
        let k = cap.min(xs.len());
        if k > 0 {
            if buf.is_null() {
                return Err(null("buf"));
            }
            ptr::copy_nonoverlapping(xs.as_ptr(), buf, k);
        }
        Ok(())
    })
}

/// Writes the CSV families of `run` into directory `dir`.
///
/// # Safety
/// `run` must be a live handle and `dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn isl_run_write_csv(run: *const IslRun, dir: *const c_char) -> IslStatus {
    guard(|| {
        let run = &borrow(run, "run")?.0;
        write_all(Path::new(text(dir, "dir")?), &[run])?;
        Ok(())
    })
}

/// # Safety
/// `run` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn isl_run_free(run: *mut IslRun) {
    release(run);
}
