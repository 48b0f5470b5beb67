//! C interface to `qtazrp`.
//!
//! Parameters and options live behind opaque handles created and freed by
//! this library. Every fallible call returns a [`QtzStatus`]; on failure
//! [`qtz_last_error`] gives a message for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qtazrp::asym::{q1_asym_for, q3_asym_for, q4_asym, q5_asym, q6_asym, ScalingParams};
use qtazrp::contour::MIN_NODES;
use qtazrp::conventions::Conventions;
use qtazrp::exact::{two_point_value, EvalOptions, LatticeParams};
use qtazrp::sim::mc_estimate;
use qtazrp::specfun::regularized_gamma_q;
use qtazrp::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QtzStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Precondition = 3,
    InvalidContour = 4,
    PoleProximity = 5,
    NonConvergence = 6,
    DegenerateFit = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QtzConventions {
    /// Reading that reproduces the particle dynamics.
    Verified = 0,
    /// Literal reading, matched by the asymptotic expansions.
    Printed = 1,
}

impl QtzConventions {
    fn get(self) -> Conventions {
        match self {
            QtzConventions::Verified => Conventions::verified(),
            QtzConventions::Printed => Conventions::as_printed(),
        }
    }
}

/// Opaque lattice instance.
pub struct QtzParams(LatticeParams);

/// Opaque evaluation options.
pub struct QtzOptions(EvalOptions);

/// The six-term formula and its intermediates.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QtzSixTerms {
    pub deltas: [f64; 6],
    pub qs: [f64; 6],
    pub ps: [f64; 6],
    pub total: f64,
    pub imag_max: f64,
    /// Final node counts for q4, q5, q6 (0 when not computed by quadrature).
    pub nodes: [usize; 3],
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QtzMcEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> QtzStatus {
    match e {
        Error::Domain(_) => QtzStatus::Domain,
        Error::Precondition(_) => QtzStatus::Precondition,
        Error::InvalidContour(_) => QtzStatus::InvalidContour,
        Error::PoleProximity(_) => QtzStatus::PoleProximity,
        Error::NonConvergence(_) => QtzStatus::NonConvergence,
        Error::DegenerateFit(_) => QtzStatus::DegenerateFit,
    }
}

/// Runs `f`, recording any error or panic for [`qtz_last_error`].
fn guard<F: FnOnce() -> Result<(), Error>>(f: F) -> QtzStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QtzStatus::Ok,
        Ok(Err(e)) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            QtzStatus::Panic
        }
    }
}

fn null_error(what: &str) -> QtzStatus {
    set_error(format!("{what} is null"));
    QtzStatus::NullPointer
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn qtz_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn qtz_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Validates and stores a lattice instance in `*out`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn qtz_params_new(
    q: f64,
    n1: u32,
    n2: u32,
    x1: i64,
    x2: i64,
    y1: i64,
    y2: i64,
    t: f64,
    out: *mut *mut QtzParams,
) -> QtzStatus {
    if out.is_null() {
        return null_error("out");
    }
    *out = ptr::null_mut();
    guard(|| {
        let p = LatticeParams { q, n1, n2, x1, x2, y1, y2, t };
        p.validate()?;
        *out = Box::into_raw(Box::new(QtzParams(p)));
        Ok(())
    })
}

/// # Safety
/// `params` must be null or a handle from [`qtz_params_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qtz_params_free(params: *mut QtzParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Default options: verified conventions, adapted contours.
#[no_mangle]
pub extern "C" fn qtz_options_new() -> *mut QtzOptions {
    Box::into_raw(Box::new(QtzOptions(EvalOptions::default())))
}

/// # Safety
/// `opts` must be null or a handle from [`qtz_options_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qtz_options_free(opts: *mut QtzOptions) {
    if !opts.is_null() {
        drop(Box::from_raw(opts));
    }
}

/// # Safety
/// `opts` must be null or a live options handle.
#[no_mangle]
pub unsafe extern "C" fn qtz_options_set_conventions(opts: *mut QtzOptions, conv: QtzConventions) -> QtzStatus {
    let Some(o) = opts.as_mut() else {
        return null_error("opts");
    };
    o.0.conventions = conv.get();
    QtzStatus::Ok
}

/// Sets the node cap for contour refinement.
///
/// # Safety
/// `opts` must be null or a live options handle.
#[no_mangle]
pub unsafe extern "C" fn qtz_options_set_max_nodes(opts: *mut QtzOptions, max_nodes: usize) -> QtzStatus {
    let Some(o) = opts.as_mut() else {
        return null_error("opts");
    };
    guard(|| {
        if max_nodes < 2 * MIN_NODES {
            return Err(Error::Precondition(format!("max_nodes must be at least {}", 2 * MIN_NODES)));
        }
        o.0.quad.max_nodes = max_nodes;
        Ok(())
    })
}

/// Evaluates the six-term formula. `opts` may be null for the defaults.
///
/// # Safety
/// `params` must be a live handle, `opts` null or a live handle, and `out`
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qtz_two_point_value(
    params: *const QtzParams,
    opts: *const QtzOptions,
    out: *mut QtzSixTerms,
) -> QtzStatus {
    let Some(p) = params.as_ref() else {
        return null_error("params");
    };
    if out.is_null() {
        return null_error("out");
    }
    let opts = opts.as_ref().map_or_else(EvalOptions::default, |o| o.0);
    guard(|| {
        let r = two_point_value(&p.0, &opts)?;
        *out = QtzSixTerms {
            deltas: r.deltas,
            qs: r.qs,
            ps: r.ps,
            total: r.total,
            imag_max: r.diagnostics.max_imag(),
            nodes: r.diagnostics.nodes,
        };
        Ok(())
    })
}

/// Monte Carlo estimate of the observable; `samples >= 100`.
///
/// # Safety
/// `params` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qtz_mc_estimate(
    params: *const QtzParams,
    samples: u64,
    seed: u64,
    out: *mut QtzMcEstimate,
) -> QtzStatus {
    let Some(p) = params.as_ref() else {
        return null_error("params");
    };
    if out.is_null() {
        return null_error("out");
    }
    guard(|| {
        let m = mc_estimate(&p.0, samples, seed)?;
        *out = QtzMcEstimate { mean: m.mean, std_error: m.stderr, samples: m.samples, seed: m.seed };
        Ok(())
    })
}

/// Asymptotic `[q1, q3, q4, q5, q6]` for one particle per species at scale
/// `l`, in the reading `conv`.
///
/// # Safety
/// `out` must be valid for writing five doubles.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn qtz_asym_terms(
    q: f64,
    l: f64,
    c11: f64,
    c12: f64,
    c21: f64,
    order: u32,
    conv: QtzConventions,
    out: *mut f64,
) -> QtzStatus {
    if out.is_null() {
        return null_error("out");
    }
    guard(|| {
        let s = ScalingParams { conventions: conv.get(), ..ScalingParams::new(q, l, c11, c12, c21, order) };
        let v = [
            q1_asym_for(&s)?.value,
            q3_asym_for(&s)?.value,
            q4_asym(&s)?.value,
            q5_asym(&s)?.value,
            q6_asym(&s)?.value,
        ];
        ptr::copy_nonoverlapping(v.as_ptr(), out, v.len());
        Ok(())
    })
}

/// Regularized upper incomplete gamma function `Q(a, z)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qtz_gamma_q(a: f64, z: f64, out: *mut f64) -> QtzStatus {
    if out.is_null() {
        return null_error("out");
    }
    guard(|| {
        *out = regularized_gamma_q(a, z)?;
        Ok(())
    })
}
