//! C ABI over the trimmed Nadaraya-Watson library.
//!
//! Samples live behind an opaque `TnwSample` handle created with
//! `tnw_sample_new` and released with `tnw_sample_free`. Every fallible call
//! returns a `TnwStatus`; on failure `tnw_last_error_message` describes the
//! error for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use trimmed_nw::simulation::{empirical_breakdown_point, BreakdownProbe, Placement};
use trimmed_nw::{
    trimmed_nw, BandwidthRule, CovariateLaw, Error, KernelKind, KernelSpec, OrderStatContext, PairedSample,
};

/// Opaque paired sample.
pub struct TnwSample {
    inner: PairedSample,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TnwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    EmptyKernelWindow = 3,
    DegenerateTrim = 4,
    UnsupportedPoint = 5,
    NoBreakdown = 6,
    Numerical = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TnwKernel {
    Epanechnikov = 0,
    Uniform = 1,
    Triangular = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TnwCovariate {
    Uniform01 = 0,
    Beta22 = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TnwPlacement {
    UpperTail = 0,
    KernelWindow = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TnwEstimate {
    pub value: f64,
    pub alpha: f64,
    pub n_retained: usize,
    pub denominator_mass: f64,
    pub bandwidth: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> TnwStatus {
    match e.root() {
        Error::EmptyKernelWindow { .. } => TnwStatus::EmptyKernelWindow,
        Error::DegenerateTrim { .. } => TnwStatus::DegenerateTrim,
        Error::UnsupportedPoint { .. } => TnwStatus::UnsupportedPoint,
        Error::NoBreakdownDetected => TnwStatus::NoBreakdown,
        other if other.is_input_error() => TnwStatus::InvalidArgument,
        _ => TnwStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> Result<(), TnwStatus>) -> TnwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            TnwStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => {
            set_last_error("internal panic");
            TnwStatus::Panic
        }
    }
}

fn lift<T>(r: trimmed_nw::Result<T>) -> Result<T, TnwStatus> {
    r.map_err(|e| {
        set_last_error(&e.to_string());
        status_of(&e)
    })
}

fn null(what: &str) -> TnwStatus {
    set_last_error(&format!("{what} is null"));
    TnwStatus::NullPointer
}

fn kernel_spec(kind: TnwKernel, support: f64) -> trimmed_nw::Result<KernelSpec> {
    let kind = match kind {
        TnwKernel::Epanechnikov => KernelKind::Epanechnikov,
        TnwKernel::Uniform => KernelKind::Uniform,
        TnwKernel::Triangular => KernelKind::Triangular,
    };
    KernelSpec::new(kind, support)
}

fn bandwidth_rule(h: f64) -> trimmed_nw::Result<BandwidthRule> {
    if h == 0.0 {
        Ok(BandwidthRule::PaperDefault)
    } else {
        BandwidthRule::fixed(h)
    }
}

fn covariate(c: TnwCovariate) -> CovariateLaw {
    match c {
        TnwCovariate::Uniform01 => CovariateLaw::Uniform01,
        TnwCovariate::Beta22 => CovariateLaw::Beta22,
    }
}

/// Copies `len` pairs into a new sample handle.
///
/// # Safety
/// `xs` and `ys` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tnw_sample_new(
    xs: *const f64,
    ys: *const f64,
    len: usize,
    out: *mut *mut TnwSample,
) -> TnwStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if len > 0 && (xs.is_null() || ys.is_null()) {
            return Err(null("xs or ys"));
        }
        let (xs, ys) = if len == 0 {
            (Vec::new(), Vec::new())
        } else {
            (std::slice::from_raw_parts(xs, len).to_vec(), std::slice::from_raw_parts(ys, len).to_vec())
        };
        let inner = lift(PairedSample::new(xs, ys))?;
        *out = Box::into_raw(Box::new(TnwSample { inner }));
        Ok(())
    })
}

/// # Safety
/// `sample` must come from `tnw_sample_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn tnw_sample_free(sample: *mut TnwSample) {
    if !sample.is_null() {
        drop(Box::from_raw(sample));
    }
}

/// Number of pairs, or 0 for a null handle.
///
/// # Safety
/// `sample` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tnw_sample_len(sample: *const TnwSample) -> usize {
    sample.as_ref().map_or(0, |s| s.inner.len())
}

/// Trimmed estimate at `x0`. `bandwidth == 0` selects `n^{-1/2}/2`.
///
/// # Safety
/// `sample` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tnw_trimmed_nw(
    sample: *const TnwSample,
    x0: f64,
    alpha: f64,
    kernel: TnwKernel,
    support: f64,
    bandwidth: f64,
    out: *mut TnwEstimate,
) -> TnwStatus {
    guard(|| {
        let s = sample.as_ref().ok_or_else(|| null("sample"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let k = lift(kernel_spec(kernel, support))?;
        let bw = lift(bandwidth_rule(bandwidth))?;
        let e = lift(trimmed_nw(&s.inner, x0, alpha, &k, &bw))?;
        *out = TnwEstimate {
            value: e.value,
            alpha: e.alpha,
            n_retained: e.n_retained,
            denominator_mass: e.denominator_mass,
            bandwidth: e.bandwidth,
        };
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tnw_t_alpha(
    law: TnwCovariate,
    approx_n: usize,
    alpha: f64,
    x: f64,
    out: *mut f64,
) -> TnwStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let ctx = lift(OrderStatContext::new(covariate(law), approx_n))?;
        *out = lift(ctx.t_alpha(alpha, x))?;
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tnw_asymptotic_efficiency(
    law: TnwCovariate,
    approx_n: usize,
    alpha: f64,
    x: f64,
    out: *mut f64,
) -> TnwStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let ctx = lift(OrderStatContext::new(covariate(law), approx_n))?;
        *out = lift(ctx.asymptotic_efficiency(alpha, x))?;
        Ok(())
    })
}

/// Smallest number of contaminated pairs that breaks the estimator.
///
/// # Safety
/// `sample` must be a live handle; `out_m_star` must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn tnw_breakdown_point(
    sample: *const TnwSample,
    x0: f64,
    alpha: f64,
    kernel: TnwKernel,
    support: f64,
    bandwidth: f64,
    magnitude: f64,
    threshold: f64,
    placement: TnwPlacement,
    out_m_star: *mut usize,
) -> TnwStatus {
    guard(|| {
        let s = sample.as_ref().ok_or_else(|| null("sample"))?;
        if out_m_star.is_null() {
            return Err(null("out_m_star"));
        }
        let k = lift(kernel_spec(kernel, support))?;
        let bw = lift(bandwidth_rule(bandwidth))?;
        let probe = BreakdownProbe {
            magnitude,
            threshold,
            placement: match placement {
                TnwPlacement::UpperTail => Placement::UpperTail,
                TnwPlacement::KernelWindow => Placement::KernelWindow,
            },
        };
        *out_m_star = lift(empirical_breakdown_point(&s.inner, x0, alpha, &k, &bw, &probe))?.m_star;
        Ok(())
    })
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn tnw_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn tnw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
