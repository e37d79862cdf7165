//! C ABI for the `plap` solver.
//!
//! Every fallible entry point returns a [`PlapStatus`] and writes results
//! through out-pointers. On failure a message is kept per thread and can be
//! read with [`plap_last_error`]. Meshes, scenario configurations and reports
//! are opaque handles released with their `_free` functions; strings returned
//! by the library are released with [`plap_string_free`]. Panics never cross
//! the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use plap::harness::{self, LambdaMode, Report, ScenarioConfig};
use plap::{build_mesh, fibering, functionals, solvers, Error, ExponentConfig, Mesh, MeshSpec, Moments};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlapStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidMesh = 3,
    InvalidConfig = 4,
    FieldShape = 5,
    Degenerate = 6,
    OutsideThreeRootRegion = 7,
    NotConverged = 8,
    Numerical = 9,
    Io = 10,
    Parse = 11,
    Panic = 12,
}

impl From<&Error> for PlapStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidMesh(_) => PlapStatus::InvalidMesh,
            Error::FieldShape(_) => PlapStatus::FieldShape,
            Error::InvalidConfig(_) => PlapStatus::InvalidConfig,
            Error::InvalidArgument(_) | Error::Precondition(_) => PlapStatus::InvalidArgument,
            Error::Degenerate(_) => PlapStatus::Degenerate,
            Error::OutsideThreeRootRegion => PlapStatus::OutsideThreeRootRegion,
            Error::NotConverged(_) => PlapStatus::NotConverged,
            Error::Singular(_) => PlapStatus::Numerical,
            Error::Io { .. } => PlapStatus::Io,
            Error::Parse(_) => PlapStatus::Parse,
        }
    }
}

/// Exponents and parameter of the problem.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct PlapExponents {
    pub alpha: f64,
    pub p: f64,
    pub beta: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub dimension: u32,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct PlapEnergy {
    pub kinetic: f64,
    pub term_a: f64,
    pub term_b: f64,
    pub term_c: f64,
    pub total: f64,
    pub residual: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct PlapLambdaStar {
    pub lambda_star: f64,
    pub rho: f64,
    pub lambda_hump: f64,
    pub lambda_barrier: f64,
    pub lambda_dip: f64,
    pub b_max: f64,
    pub a_max: f64,
    pub c_star: f64,
}

pub struct PlapMesh(Mesh);

pub struct PlapConfig(ScenarioConfig);

pub struct PlapReport(Report);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(PlapStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(PlapStatus::from(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(PlapStatus::NullPointer, format!("{what} is NULL"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PlapStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PlapStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            PlapStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn exponents(e: &PlapExponents) -> Result<ExponentConfig, Failure> {
    Ok(ExponentConfig::new(
        e.alpha,
        e.p,
        e.beta,
        e.gamma,
        e.lambda,
        e.dimension as usize,
    )?)
}

/// Message of the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn plap_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn plap_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be NULL or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn plap_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Uniform grid on `(0, length)` with `nodes` nodes including both ends.
///
/// # Safety
/// `out` must be valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn plap_mesh_interval(length: f64, nodes: usize, out: *mut *mut PlapMesh) -> PlapStatus {
    guard(|| {
        let mesh = build_mesh(&MeshSpec::interval(length, nodes))?;
        write(out, Box::into_raw(Box::new(PlapMesh(mesh))), "out")
    })
}

/// Uniform grid on `(0, lx) × (0, ly)`, nodes numbered x fastest.
///
/// # Safety
/// `out` must be valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn plap_mesh_rectangle(
    lx: f64,
    ly: f64,
    nx: usize,
    ny: usize,
    out: *mut *mut PlapMesh,
) -> PlapStatus {
    guard(|| {
        let mesh = build_mesh(&MeshSpec::rectangle(lx, ly, nx, ny))?;
        write(out, Box::into_raw(Box::new(PlapMesh(mesh))), "out")
    })
}

/// Number of nodes, or 0 for NULL.
///
/// # Safety
/// `mesh` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn plap_mesh_len(mesh: *const PlapMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.0.len())
}

/// # Safety
/// `mesh` must be NULL or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn plap_mesh_free(mesh: *mut PlapMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// Positive roots of the fibering equation for moments `(a, b, c)`, ascending.
/// Writes up to three roots into `roots` and their number into `count`.
///
/// # Safety
/// `exps` must point to a valid struct, `roots` to room for three doubles and
/// `count` to a writable `size_t`.
#[no_mangle]
pub unsafe extern "C" fn plap_find_roots(
    a: f64,
    b: f64,
    c: f64,
    exps: *const PlapExponents,
    roots: *mut f64,
    count: *mut usize,
) -> PlapStatus {
    guard(|| {
        let cfg = exponents(deref(exps, "exps")?)?;
        if roots.is_null() {
            return Err(null("roots"));
        }
        let found = fibering::find_roots(&Moments::new(a, b, c), &cfg)?;
        for (i, t) in found.roots.iter().take(3).enumerate() {
            roots.add(i).write(*t);
        }
        write(count, found.count().min(3), "count")
    })
}

/// Energy of the nodal field `values` (`len` entries, zero on the boundary).
///
/// # Safety
/// `mesh` must be a live handle, `values` must point to `len` doubles and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn plap_energy(
    mesh: *const PlapMesh,
    values: *const f64,
    len: usize,
    exps: *const PlapExponents,
    out: *mut PlapEnergy,
) -> PlapStatus {
    guard(|| {
        let mesh = &deref(mesh, "mesh")?.0;
        if values.is_null() {
            return Err(null("values"));
        }
        let cfg = exponents(deref(exps, "exps")?)?;
        let field = mesh.field(std::slice::from_raw_parts(values, len).to_vec())?;
        let e = functionals::j_lambda(mesh, &field, &cfg)?;
        write(
            out,
            PlapEnergy {
                kinetic: e.kinetic,
                term_a: e.term_a,
                term_b: e.term_b,
                term_c: e.term_c,
                total: e.total,
                residual: e.residual,
            },
            "out",
        )
    })
}

/// Threshold estimate with default solver options. `exps->lambda` is ignored.
///
/// # Safety
/// `mesh` and `exps` must be valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn plap_lambda_star(
    mesh: *const PlapMesh,
    exps: *const PlapExponents,
    out: *mut PlapLambdaStar,
) -> PlapStatus {
    guard(|| {
        let mesh = &deref(mesh, "mesh")?.0;
        let cfg = exponents(deref(exps, "exps")?)?;
        let s = solvers::estimate_lambda_star(mesh, &cfg, &solvers::SolverOptions::default())?;
        write(
            out,
            PlapLambdaStar {
                lambda_star: s.lambda_star,
                rho: s.rho,
                lambda_hump: s.lambda_hump,
                lambda_barrier: s.lambda_barrier,
                lambda_dip: s.lambda_dip,
                b_max: s.b_max,
                a_max: s.a_max,
                c_star: s.c_star,
            },
            "out",
        )
    })
}

/// The canonical scenario configuration.
///
/// # Safety
/// `out` must be valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn plap_config_default(out: *mut *mut PlapConfig) -> PlapStatus {
    guard(|| {
        write(
            out,
            Box::into_raw(Box::new(PlapConfig(ScenarioConfig::default()))),
            "out",
        )
    })
}

/// Parses a scenario from flat TOML text.
///
/// # Safety
/// `text` must be a NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn plap_config_from_toml(text: *const c_char, out: *mut *mut PlapConfig) -> PlapStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        let s = CStr::from_ptr(text)
            .to_str()
            .map_err(|e| Failure(PlapStatus::Parse, e.to_string()))?;
        let cfg = ScenarioConfig::from_toml_str(s)?;
        write(out, Box::into_raw(Box::new(PlapConfig(cfg))), "out")
    })
}

/// Sets `λ = fraction·λ*`; `fraction` must lie in `(0, 1]`.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn plap_config_set_lambda_fraction(cfg: *mut PlapConfig, fraction: f64) -> PlapStatus {
    guard(|| {
        let cfg = &mut cfg.as_mut().ok_or_else(|| null("cfg"))?.0;
        let mut next = cfg.clone();
        next.lambda = LambdaMode::Fraction(fraction);
        next.validate()?;
        *cfg = next;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn plap_config_set_seed(cfg: *mut PlapConfig, seed: u64) -> PlapStatus {
    guard(|| {
        cfg.as_mut().ok_or_else(|| null("cfg"))?.0.seed = seed;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be NULL or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn plap_config_free(cfg: *mut PlapConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Runs the full pipeline. Solver failures still produce a report whose
/// verdict is FAIL; only invalid input is an error.
///
/// # Safety
/// `cfg` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn plap_run_scenario(cfg: *const PlapConfig, out: *mut *mut PlapReport) -> PlapStatus {
    guard(|| {
        let report = harness::run_scenario(&deref(cfg, "cfg")?.0)?;
        write(out, Box::into_raw(Box::new(PlapReport(report))), "out")
    })
}

/// 1 when every check passed, 0 when one failed, -1 for NULL.
///
/// # Safety
/// `report` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn plap_report_passed(report: *const PlapReport) -> c_int {
    report.as_ref().map_or(-1, |r| c_int::from(r.0.passed))
}

/// Deterministic JSON of the report; release with [`plap_string_free`].
///
/// # Safety
/// `report` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn plap_report_to_json(report: *const PlapReport, out: *mut *mut c_char) -> PlapStatus {
    guard(|| {
        let json = plap::io::to_json(&deref(report, "report")?.0)?;
        let c = CString::new(json).map_err(|e| Failure(PlapStatus::Parse, e.to_string()))?;
        write(out, c.into_raw(), "out")
    })
}

/// # Safety
/// `report` must be NULL or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn plap_report_free(report: *mut PlapReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
