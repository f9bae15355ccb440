//! C interface to the `pressureless` solver.
//!
//! Every function returns a [`PlStatus`]; on failure a message describing the
//! last error on the calling thread is available from
//! [`pl_last_error_message`]. Handles are opaque and must be released with
//! [`pl_solver_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pressureless::{Error, InitialData, Piece, Regime, SolutionSample, Solver, SpreadMode};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidData = 3,
    InvalidArgument = 4,
    Extraction = 5,
    BufferTooSmall = 6,
    Internal = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlMode {
    Undamped = 0,
    Damped = 1,
    Scaled = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlRegime {
    Regular = 0,
    Cluster = 1,
    Vacuum = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlSample {
    pub x: f64,
    pub t: f64,
    pub m: f64,
    pub q: f64,
    pub u: f64,
    pub u_left: f64,
    pub u_right: f64,
    pub regime: PlRegime,
}

/// An atom has `lo == hi` and `density == 0`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlPiece {
    pub is_atom: bool,
    pub lo: f64,
    pub hi: f64,
    pub mass: f64,
    pub density: f64,
    pub velocity: f64,
}

/// Opaque solver handle.
pub struct PlSolver {
    inner: Solver,
}

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(msg: &str) {
    LAST_ERROR.with(|e| {
        let mut e = e.borrow_mut();
        e.clear();
        e.extend(msg.bytes().filter(|&b| b != 0));
    });
}

fn status_of(err: &Error) -> PlStatus {
    match err {
        Error::EmptyData
        | Error::InvalidPiece { .. }
        | Error::Overlap { .. }
        | Error::Json(_) => PlStatus::InvalidData,
        Error::Extraction { .. } => PlStatus::Extraction,
        Error::Internal(_) | Error::Io(_) => PlStatus::Internal,
        _ => PlStatus::InvalidArgument,
    }
}

fn fail(status: PlStatus, msg: &str) -> PlStatus {
    set_error(msg);
    status
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (PlStatus, String)>) -> PlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PlStatus::Ok,
        Ok(Err((status, msg))) => fail(status, &msg),
        Err(_) => fail(PlStatus::Panic, "panic inside the solver"),
    }
}

fn lift(err: Error) -> (PlStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(what: &str) -> (PlStatus, String) {
    (PlStatus::NullPointer, format!("{what} is null"))
}

fn mode_of(mode: PlMode, tau: f64) -> Result<SpreadMode, Error> {
    match mode {
        PlMode::Undamped => Ok(SpreadMode::Undamped),
        PlMode::Damped => SpreadMode::damped(tau),
        PlMode::Scaled => SpreadMode::scaled(tau),
    }
}

fn solver<'a>(handle: *const PlSolver) -> Result<&'a Solver, (PlStatus, String)> {
    // SAFETY: non-null handles come from `pl_solver_new` and are live until
    // `pl_solver_free`.
    unsafe { handle.as_ref() }.map(|h| &h.inner).ok_or_else(|| null("solver"))
}

fn c_sample(s: &SolutionSample) -> PlSample {
    PlSample {
        x: s.x,
        t: s.t,
        m: s.m,
        q: s.q,
        u: s.u,
        u_left: s.u_left,
        u_right: s.u_right,
        regime: match s.regime {
            Regime::Regular => PlRegime::Regular,
            Regime::Cluster => PlRegime::Cluster,
            Regime::Vacuum => PlRegime::Vacuum,
        },
    }
}

fn c_piece(p: &Piece) -> PlPiece {
    match *p {
        Piece::Atom { x, mass, v } => PlPiece {
            is_atom: true,
            lo: x,
            hi: x,
            mass,
            density: 0.0,
            velocity: v,
        },
        Piece::Block { a, b, density, v } => PlPiece {
            is_atom: false,
            lo: a,
            hi: b,
            mass: p.mass(),
            density,
            velocity: v,
        },
    }
}

/// Builds a solver from `{"pieces": [...]}` JSON. `tau` is ignored for
/// `PL_MODE_UNDAMPED`. On success `*out` owns a new handle.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pl_solver_new(json: *const c_char, mode: PlMode, tau: f64, out: *mut *mut PlSolver) -> PlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| (PlStatus::InvalidUtf8, e.to_string()))?;
        let data = InitialData::from_json(text).map_err(lift)?;
        let mode = mode_of(mode, tau).map_err(lift)?;
        let handle = Box::new(PlSolver {
            inner: Solver::new(data, mode),
        });
        *out = Box::into_raw(handle);
        Ok(())
    })
}

/// Releases a handle. Null is accepted.
///
/// # Safety
/// `handle` must come from `pl_solver_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pl_solver_free(handle: *mut PlSolver) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Mass, momentum, velocity and regime at one point.
///
/// # Safety
/// `handle` must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn pl_solver_sample(handle: *const PlSolver, x: f64, t: f64, out: *mut PlSample) -> PlStatus {
    guard(|| {
        let s = solver(handle)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = c_sample(&s.sample(x, t).map_err(lift)?);
        Ok(())
    })
}

/// Samples `n` points at one time into `out[0..n]`.
///
/// # Safety
/// `xs` and `out` must hold `n` elements.
#[no_mangle]
pub unsafe extern "C" fn pl_solver_sample_many(
    handle: *const PlSolver,
    xs: *const f64,
    n: usize,
    t: f64,
    out: *mut PlSample,
) -> PlStatus {
    guard(|| {
        let s = solver(handle)?;
        if n == 0 {
            return Ok(());
        }
        if xs.is_null() || out.is_null() {
            return Err(null("xs or out"));
        }
        let xs = std::slice::from_raw_parts(xs, n);
        let rows = s.sample_grid(xs, &[t]).map_err(lift)?;
        let out = std::slice::from_raw_parts_mut(out, n);
        for (o, r) in out.iter_mut().zip(&rows) {
            *o = c_sample(r);
        }
        Ok(())
    })
}

/// Cumulative mass `m(x, t)`.
///
/// # Safety
/// `handle` must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn pl_solver_mass(handle: *const PlSolver, x: f64, t: f64, out: *mut f64) -> PlStatus {
    guard(|| {
        let s = solver(handle)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = s.mass_at(x, t).map_err(lift)?;
        Ok(())
    })
}

/// Cumulative momentum `q(x, t)`.
///
/// # Safety
/// `handle` must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn pl_solver_momentum(handle: *const PlSolver, x: f64, t: f64, out: *mut f64) -> PlStatus {
    guard(|| {
        let s = solver(handle)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = s.momentum_at(x, t).map_err(lift)?;
        Ok(())
    })
}

/// Extracts the measure at time `t` as atoms and blocks, seeding the search
/// with `cells` uniform cells. Writes up to `capacity` pieces and stores the
/// total count in `*count`; returns `PL_STATUS_BUFFER_TOO_SMALL` if it did
/// not fit. Pass `capacity == 0` to query the size.
///
/// # Safety
/// `out` must hold `capacity` elements (it may be null when `capacity` is
/// 0) and `count` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pl_solver_extract(
    handle: *const PlSolver,
    t: f64,
    cells: usize,
    out: *mut PlPiece,
    capacity: usize,
    count: *mut usize,
) -> PlStatus {
    guard(|| {
        let s = solver(handle)?;
        if count.is_null() {
            return Err(null("count"));
        }
        if capacity > 0 && out.is_null() {
            return Err(null("out"));
        }
        let snap = s.at(t).map_err(lift)?;
        let pieces = snap.extract_measure(&snap.default_grid(cells.max(1))).map_err(lift)?;
        *count = pieces.len();
        if pieces.len() > capacity {
            return Err((
                PlStatus::BufferTooSmall,
                format!("{} pieces do not fit in {capacity}", pieces.len()),
            ));
        }
        let out = std::slice::from_raw_parts_mut(out, pieces.len());
        for (o, p) in out.iter_mut().zip(&pieces) {
            *o = c_piece(p);
        }
        Ok(())
    })
}

/// The spread `a(t)` of a mode.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pl_spread(mode: PlMode, tau: f64, t: f64, out: *mut f64) -> PlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = mode_of(mode, tau).and_then(|m| m.spread(t)).map_err(lift)?;
        Ok(())
    })
}

/// Copies the calling thread's last error message into `buf` (truncated,
/// always NUL-terminated when `len > 0`) and returns its full length.
///
/// # Safety
/// `buf` must hold `len` bytes, or be null with `len == 0`.
#[no_mangle]
pub unsafe extern "C" fn pl_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = e.len().min(len - 1);
            ptr::copy_nonoverlapping(e.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        e.len()
    })
}

/// Static NUL-terminated version string.
#[no_mangle]
pub extern "C" fn pl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
