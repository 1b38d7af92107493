//! C ABI over `fhshare`.
//!
//! Scenarios and user-count laws are opaque heap handles created by the
//! `*_from_json` / `fh_pmf_*` constructors and released with the matching
//! `*_free`. Every fallible call returns an [`FhStatus`] and writes results
//! through out-pointers; on failure the message is kept per thread and can be
//! read with [`fh_last_error`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fhshare::bounds;
use fhshare::config::{PmfFile, ScenarioFile};
use fhshare::gains;
use fhshare::measures::{self, FdConfig, UserCountPmf};
use fhshare::model::{enumerate_interference_spectrum, HoppingProfile, NetworkScenario};
use fhshare::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FhStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    TooLarge = 4,
    NoConvergence = 5,
    Io = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// A network scenario together with every user's hopping profile.
pub struct FhScenario {
    scenario: NetworkScenario,
    profiles: Vec<HoppingProfile>,
}

/// Distribution of the number of active users.
pub struct FhUserCountPmf {
    pmf: UserCountPmf,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FhRateBound {
    pub value_bits: f64,
    pub slope: f64,
    pub residual_bits: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FhLevel {
    pub prob: f64,
    pub c: f64,
    pub sigma2: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FhMaximum {
    pub value: f64,
    pub argmax: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FhMcEstimate {
    pub bits: f64,
    pub std_error: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

struct Failure(FhStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Json(_) => FhStatus::Parse,
            Error::TooLarge { .. } => FhStatus::TooLarge,
            Error::NoConvergence { .. } => FhStatus::NoConvergence,
            Error::Io(_) => FhStatus::Io,
            _ => FhStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(FhStatus::NullPointer, format!("{what} is null"))
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> FhStatus {
    let (status, msg) = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => (FhStatus::Ok, String::new()),
        Ok(Err(Failure(s, m))) => (s, m),
        Err(p) => {
            let m = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            (FhStatus::Panic, m)
        }
    };
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
    status
}

unsafe fn reference<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    // SAFETY: caller passes either null or a live pointer of the right type.
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    // SAFETY: non-null and, per the API contract, valid for writes.
    unsafe { out.write(value) };
    Ok(())
}

unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null("string"));
    }
    // SAFETY: caller passes a NUL-terminated string.
    unsafe { CStr::from_ptr(s) }
        .to_str()
        .map_err(|e| Failure(FhStatus::Parse, format!("string is not UTF-8: {e}")))
}

/// Copies the calling thread's last error message (NUL-terminated, truncated
/// to `cap`) into `buf` and returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or valid for `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn fh_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && cap > 0 {
            let n = msg.len().min(cap - 1);
            // SAFETY: `buf` holds at least `cap > n` bytes.
            unsafe {
                ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n) = 0;
            }
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fh_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a scenario JSON document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fh_scenario_from_json(json: *const c_char, out: *mut *mut FhScenario) -> FhStatus {
    guard(|| {
        let (scenario, profiles) = ScenarioFile::parse(unsafe { text(json) }?)?.to_model()?;
        let handle = Box::into_raw(Box::new(FhScenario { scenario, profiles }));
        unsafe { write(out, handle) }
    })
}

/// # Safety
/// `s` must be null or a handle from [`fh_scenario_from_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fh_scenario_free(s: *mut FhScenario) {
    if !s.is_null() {
        // SAFETY: handle was created by Box::into_raw and is freed once.
        drop(unsafe { Box::from_raw(s) });
    }
}

/// # Safety
/// `s` must be a live scenario handle; `n_users` and `n_subbands` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fh_scenario_shape(s: *const FhScenario, n_users: *mut usize, n_subbands: *mut usize) -> FhStatus {
    guard(|| {
        let s = unsafe { reference(s, "scenario") }?;
        unsafe { write(n_users, s.scenario.n_users()) }?;
        unsafe { write(n_subbands, s.scenario.n_subbands()) }
    })
}

/// Writes up to `cap` interference levels at `receiver` into `levels` and
/// the total level count into `len`. Pass `levels = NULL` to query the count;
/// returns `BUFFER_TOO_SMALL` when `cap` is short.
///
/// # Safety
/// `s` must be a live handle, `levels` null or valid for `cap` elements, `len` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fh_spectrum_levels(
    s: *const FhScenario,
    receiver: usize,
    levels: *mut FhLevel,
    cap: usize,
    len: *mut usize,
) -> FhStatus {
    guard(|| {
        let s = unsafe { reference(s, "scenario") }?;
        let spectrum = enumerate_interference_spectrum(&s.scenario, &s.profiles, receiver)?;
        unsafe { write(len, spectrum.len()) }?;
        if levels.is_null() {
            return Ok(());
        }
        if cap < spectrum.len() {
            return Err(Failure(
                FhStatus::BufferTooSmall,
                format!("{} levels do not fit in {cap}", spectrum.len()),
            ));
        }
        for (j, l) in spectrum.levels().iter().enumerate() {
            // SAFETY: j < spectrum.len() <= cap.
            unsafe { levels.add(j).write(FhLevel { prob: l.prob, c: l.c, sigma2: l.sigma2 }) };
        }
        Ok(())
    })
}

fn rate(b: bounds::RateBound) -> FhRateBound {
    FhRateBound { value_bits: b.value_bits, slope: b.slope, residual_bits: b.residual_bits }
}

/// # Safety
/// `s` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fh_upper_bound(s: *const FhScenario, user: usize, out: *mut FhRateBound) -> FhStatus {
    guard(|| {
        let s = unsafe { reference(s, "scenario") }?;
        unsafe { write(out, rate(bounds::upper_bound_rate(&s.scenario, &s.profiles, user)?)) }
    })
}

/// # Safety
/// `s` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fh_lower_bound(s: *const FhScenario, user: usize, out: *mut FhRateBound) -> FhStatus {
    guard(|| {
        let s = unsafe { reference(s, "scenario") }?;
        unsafe { write(out, rate(bounds::lower_bound_rate(&s.scenario, &s.profiles, user)?)) }
    })
}

/// # Safety
/// `s` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fh_expected_free_subbands(s: *const FhScenario, user: usize, out: *mut f64) -> FhStatus {
    guard(|| {
        let s = unsafe { reference(s, "scenario") }?;
        unsafe { write(out, bounds::expected_free_subbands(&s.scenario, &s.profiles, user)?) }
    })
}

/// # Safety
/// `s` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fh_regulated_rate(
    s: *const FhScenario,
    user: usize,
    n_active: usize,
    v: f64,
    out: *mut f64,
) -> FhStatus {
    guard(|| {
        let s = unsafe { reference(s, "scenario") }?;
        unsafe { write(out, bounds::regulated_rate(&s.scenario, user, n_active, v)?) }
    })
}

/// Monte-Carlo estimate of the user's rate in bits; deterministic in `seed`.
///
/// # Safety
/// `s` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fh_mc_mutual_information(
    s: *const FhScenario,
    user: usize,
    n_samples: usize,
    seed: u64,
    out: *mut FhMcEstimate,
) -> FhStatus {
    guard(|| {
        let s = unsafe { reference(s, "scenario") }?;
        let est = bounds::mc_mutual_information(&s.scenario, &s.profiles, user, n_samples, seed)?;
        unsafe { write(out, FhMcEstimate { bits: est.bits, std_error: est.std_error }) }
    })
}

/// Sum multiplexing gain of `n` users all hopping over `v` of `u` sub-bands.
#[no_mangle]
pub extern "C" fn fh_smg_fair(v: f64, n: usize, u: usize) -> f64 {
    gains::smg_fair(v, n, u)
}

fn new_pmf(pmf: UserCountPmf, out: *mut *mut FhUserCountPmf) -> Result<(), Failure> {
    let handle = Box::into_raw(Box::new(FhUserCountPmf { pmf }));
    // SAFETY: forwarded from the caller's contract.
    unsafe { write(out, handle) }.inspect_err(|_| drop(unsafe { Box::from_raw(handle) }))
}

/// `q[n] = Pr{N = n}` for `n = 0..len`.
///
/// # Safety
/// `q` must be valid for `len` reads and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fh_pmf_finite(q: *const f64, len: usize, out: *mut *mut FhUserCountPmf) -> FhStatus {
    guard(|| {
        if q.is_null() {
            return Err(null("q"));
        }
        // SAFETY: caller guarantees `len` readable values.
        let q = unsafe { std::slice::from_raw_parts(q, len) }.to_vec();
        new_pmf(UserCountPmf::finite(q)?, out)
    })
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fh_pmf_poisson(lambda: f64, out: *mut *mut FhUserCountPmf) -> FhStatus {
    guard(|| new_pmf(UserCountPmf::poisson(lambda)?, out))
}

/// Parses `{"q": [...]}` or `{"poisson": lambda}`.
///
/// # Safety
/// `json` must be NUL-terminated and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fh_pmf_from_json(json: *const c_char, out: *mut *mut FhUserCountPmf) -> FhStatus {
    guard(|| new_pmf(PmfFile::parse(unsafe { text(json) }?)?.to_model()?, out))
}

/// # Safety
/// `p` must be null or a live user-count handle.
#[no_mangle]
pub unsafe extern "C" fn fh_pmf_free(p: *mut FhUserCountPmf) {
    if !p.is_null() {
        // SAFETY: handle was created by Box::into_raw and is freed once.
        drop(unsafe { Box::from_raw(p) });
    }
}

/// # Safety
/// `p` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fh_pmf_mean(p: *const FhUserCountPmf, out: *mut f64) -> FhStatus {
    guard(|| {
        let p = unsafe { reference(p, "pmf") }?;
        unsafe { write(out, p.pmf.mean()) }
    })
}

fn fd_for(pmf: &UserCountPmf, u: usize, n_des: usize) -> Result<FdConfig, Failure> {
    Ok(if n_des == 0 { FdConfig::default_for(pmf, u) } else { FdConfig::new(n_des)? })
}

fn check_u(u: usize) -> Result<(), Failure> {
    if u == 0 {
        return Err(Failure(FhStatus::InvalidArgument, "need at least one sub-band".into()));
    }
    Ok(())
}

/// Robust FH average sum gain and its hopping parameter.
///
/// # Safety
/// `p` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fh_eta1_fh(p: *const FhUserCountPmf, u: usize, out: *mut FhMaximum) -> FhStatus {
    guard(|| {
        let p = unsafe { reference(p, "pmf") }?;
        let m = measures::eta1_fh(&p.pmf, u)?;
        unsafe { write(out, FhMaximum { value: m.value, argmax: m.x }) }
    })
}

/// Robust FH average minimum gain and its hopping parameter.
///
/// # Safety
/// `p` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fh_eta2_fh(p: *const FhUserCountPmf, u: usize, out: *mut FhMaximum) -> FhStatus {
    guard(|| {
        let p = unsafe { reference(p, "pmf") }?;
        let m = measures::eta2_fh(&p.pmf, u)?;
        unsafe { write(out, FhMaximum { value: m.value, argmax: m.x }) }
    })
}

/// FD average sum gain; `n_des = 0` selects the default design size.
///
/// # Safety
/// `p` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fh_eta1_fd(p: *const FhUserCountPmf, u: usize, n_des: usize, out: *mut f64) -> FhStatus {
    guard(|| {
        let p = unsafe { reference(p, "pmf") }?;
        check_u(u)?;
        unsafe { write(out, measures::eta1_fd(&p.pmf, fd_for(&p.pmf, u, n_des)?, u)) }
    })
}

/// FD average minimum gain; `n_des = 0` selects the default design size.
///
/// # Safety
/// `p` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fh_eta2_fd(p: *const FhUserCountPmf, u: usize, n_des: usize, out: *mut f64) -> FhStatus {
    guard(|| {
        let p = unsafe { reference(p, "pmf") }?;
        check_u(u)?;
        unsafe { write(out, measures::eta2_fd(&p.pmf, fd_for(&p.pmf, u, n_des)?, u)) }
    })
}

/// FD expected served fraction; `n_des = 0` selects the default design size.
///
/// # Safety
/// `p` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fh_eta4_fd(p: *const FhUserCountPmf, u: usize, n_des: usize, out: *mut f64) -> FhStatus {
    guard(|| {
        let p = unsafe { reference(p, "pmf") }?;
        check_u(u)?;
        unsafe { write(out, measures::eta4_fd(&p.pmf, fd_for(&p.pmf, u, n_des)?)) }
    })
}

/// Adaptive FH; `measure` is 1 (average sum gain) or 2 (average per-user gain).
///
/// # Safety
/// `p` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fh_eta_afh(p: *const FhUserCountPmf, u: usize, measure: u32, out: *mut f64) -> FhStatus {
    guard(|| {
        let p = unsafe { reference(p, "pmf") }?;
        check_u(u)?;
        let value = match measure {
            1 => measures::eta1_afh(&p.pmf, u),
            2 => measures::eta2_afh(&p.pmf, u),
            m => return Err(Failure(FhStatus::InvalidArgument, format!("measure {m} is not 1 or 2"))),
        };
        unsafe { write(out, value) }
    })
}

/// Closed-form robust FH average minimum gain for Poisson loads, with
/// `omega = 1 - v/u` at the optimum.
///
/// # Safety
/// `value` and `omega` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fh_eta2_fh_poisson_closed(lambda: f64, u: usize, value: *mut f64, omega: *mut f64) -> FhStatus {
    guard(|| {
        let (v, w) = measures::eta2_fh_poisson_closed(lambda, u)?;
        unsafe { write(value, v) }?;
        unsafe { write(omega, w) }
    })
}
