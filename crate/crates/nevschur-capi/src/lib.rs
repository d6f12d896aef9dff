//! C ABI over the nevschur library.
//!
//! Systems are opaque handles created and destroyed here; matrices cross
//! the boundary as interleaved [re, im] doubles in row-major order; every
//! entry point returns an `NsStatus` and writes results through out
//! pointers. `ns_last_error_message` returns a thread-local description of
//! the most recent failure.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use nevschur::numkit::{opnorm, ComplexMatrix};
use nevschur::systems::{krylov_analysis, CutPlanePoint, PassiveSystem};
use num_complex::Complex64;

/// Status codes mirrored into the generated header.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NsStatus {
    NsOk = 0,
    NsErrNullPointer = 1,
    NsErrInvalidArgument = 2,
    NsErrNotContraction = 3,
    NsErrNotSelfadjoint = 4,
    NsErrDomain = 5,
    NsErrSingular = 6,
    NsErrMinimality = 7,
    NsErrBufferTooSmall = 8,
    NsErrParse = 9,
    NsErrPanic = 10,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &nevschur::Error) -> NsStatus {
    use nevschur::Error::*;
    match err {
        NotContraction { .. } => NsStatus::NsErrNotContraction,
        NotSelfadjoint { .. } => NsStatus::NsErrNotSelfadjoint,
        OutsideDomain { .. } => NsStatus::NsErrDomain,
        Singular { .. } | NearSingularResolvent { .. } => NsStatus::NsErrSingular,
        MinimalityRequired { .. } => NsStatus::NsErrMinimality,
        _ => NsStatus::NsErrInvalidArgument,
    }
}

fn fail(err: &nevschur::Error) -> NsStatus {
    set_error(&err.to_string());
    status_of(err)
}

fn guard(body: impl FnOnce() -> NsStatus) -> NsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            NsStatus::NsErrPanic
        }
    }
}

/// Opaque passive-system handle.
pub struct NsSystem {
    inner: PassiveSystem,
}

/// Message describing the most recent error on this thread. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ns_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

unsafe fn matrix_from_raw(entries: *const f64, dim: usize) -> Option<ComplexMatrix> {
    if entries.is_null() {
        return None;
    }
    let raw = std::slice::from_raw_parts(entries, 2 * dim * dim);
    let data: Vec<Complex64> = raw
        .chunks_exact(2)
        .map(|pair| Complex64::new(pair[0], pair[1]))
        .collect();
    ComplexMatrix::new(dim, dim, data).ok()
}

unsafe fn write_matrix(m: &ComplexMatrix, buffer: *mut f64, capacity: usize) -> NsStatus {
    let needed = 2 * m.rows() * m.cols();
    if buffer.is_null() {
        set_error("null output buffer");
        return NsStatus::NsErrNullPointer;
    }
    if capacity < needed {
        set_error("output buffer too small");
        return NsStatus::NsErrBufferTooSmall;
    }
    let out = std::slice::from_raw_parts_mut(buffer, needed);
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let z = m[(i, j)];
            out[2 * (i * m.cols() + j)] = z.re;
            out[2 * (i * m.cols() + j) + 1] = z.im;
        }
    }
    NsStatus::NsOk
}

/// Validates a system from `dim x dim` interleaved complex entries.
///
/// # Safety
/// `entries` must point to `2*dim*dim` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ns_system_new(
    entries: *const f64,
    dim: usize,
    dim_input: usize,
    require_selfadjoint: bool,
    out: *mut *mut NsSystem,
) -> NsStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return NsStatus::NsErrNullPointer;
        }
        let Some(t) = matrix_from_raw(entries, dim) else {
            set_error("null or non-finite matrix data");
            return NsStatus::NsErrNullPointer;
        };
        match PassiveSystem::validate(t, dim_input, require_selfadjoint) {
            Ok(sys) => {
                *out = Box::into_raw(Box::new(NsSystem { inner: sys }));
                NsStatus::NsOk
            }
            Err(e) => fail(&e),
        }
    })
}

/// Parses the canonical JSON document format.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ns_system_from_json(
    json: *const c_char,
    out: *mut *mut NsSystem,
) -> NsStatus {
    guard(|| {
        if json.is_null() || out.is_null() {
            set_error("null pointer");
            return NsStatus::NsErrNullPointer;
        }
        let text = match CStr::from_ptr(json).to_str() {
            Ok(t) => t,
            Err(_) => {
                set_error("document is not valid UTF-8");
                return NsStatus::NsErrParse;
            }
        };
        let doc: nevschur::cli::SystemDocument = match serde_json::from_str(text) {
            Ok(d) => d,
            Err(e) => {
                set_error(&format!("parse error: {e}"));
                return NsStatus::NsErrParse;
            }
        };
        match doc.to_system() {
            Ok(sys) => {
                *out = Box::into_raw(Box::new(NsSystem { inner: sys }));
                NsStatus::NsOk
            }
            Err(e) => {
                set_error(&e.to_string());
                NsStatus::NsErrInvalidArgument
            }
        }
    })
}

/// Serializes the system into the canonical JSON document. Free the
/// returned string with `ns_string_free`.
///
/// # Safety
/// `sys` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ns_system_to_json(
    sys: *const NsSystem,
    out: *mut *mut c_char,
) -> NsStatus {
    guard(|| {
        let (Some(sys), false) = (sys.as_ref(), out.is_null()) else {
            set_error("null pointer");
            return NsStatus::NsErrNullPointer;
        };
        let doc = nevschur::cli::SystemDocument::from_system(&sys.inner);
        let bytes = doc.canonical_bytes();
        let text = CString::new(bytes).expect("canonical JSON has no NUL bytes");
        *out = text.into_raw();
        NsStatus::NsOk
    })
}

/// # Safety
/// `s` must come from `ns_system_to_json` (or be null).
#[no_mangle]
pub unsafe extern "C" fn ns_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `sys` must come from a constructor here (or be null).
#[no_mangle]
pub unsafe extern "C" fn ns_system_free(sys: *mut NsSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Seeded random passive selfadjoint system; identical bytes for identical
/// seeds on every platform.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ns_system_random(
    seed: u64,
    dim_input: usize,
    dim_state: usize,
    out: *mut *mut NsSystem,
) -> NsStatus {
    guard(|| {
        if out.is_null() || dim_input == 0 {
            set_error("null output pointer or zero input dimension");
            return NsStatus::NsErrNullPointer;
        }
        let sys = nevschur::systems::random_selfadjoint_system(seed, dim_input, dim_state);
        *out = Box::into_raw(Box::new(NsSystem { inner: sys }));
        NsStatus::NsOk
    })
}

/// Order-N block Jacobi truncation.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ns_system_jacobi(
    n: usize,
    dim_input: usize,
    out: *mut *mut NsSystem,
) -> NsStatus {
    guard(|| {
        if out.is_null() || dim_input == 0 {
            set_error("null output pointer or zero input dimension");
            return NsStatus::NsErrNullPointer;
        }
        let sys = nevschur::transforms::jacobi_system(n, dim_input);
        *out = Box::into_raw(Box::new(NsSystem { inner: sys }));
        NsStatus::NsOk
    })
}

/// # Safety
/// `sys` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ns_system_dim_input(sys: *const NsSystem) -> usize {
    sys.as_ref().map_or(0, |s| s.inner.dim_input())
}

/// # Safety
/// `sys` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ns_system_dim_state(sys: *const NsSystem) -> usize {
    sys.as_ref().map_or(0, |s| s.inner.dim_state())
}

/// Copies the block operator into `buffer` as interleaved doubles.
///
/// # Safety
/// `buffer` must hold `2*(m+n)^2` doubles.
#[no_mangle]
pub unsafe extern "C" fn ns_system_matrix(
    sys: *const NsSystem,
    buffer: *mut f64,
    capacity: usize,
) -> NsStatus {
    guard(|| {
        let Some(sys) = sys.as_ref() else {
            set_error("null system");
            return NsStatus::NsErrNullPointer;
        };
        write_matrix(sys.inner.matrix(), buffer, capacity)
    })
}

fn eval_to_buffer(
    result: Result<ComplexMatrix, nevschur::Error>,
    buffer: *mut f64,
    capacity: usize,
) -> NsStatus {
    match result {
        Ok(m) => unsafe { write_matrix(&m, buffer, capacity) },
        Err(e) => fail(&e),
    }
}

/// Omega(z) at z = re + i im; `buffer` receives an m x m matrix.
///
/// # Safety
/// `sys` live; `buffer` holds `2*m*m` doubles.
#[no_mangle]
pub unsafe extern "C" fn ns_transfer(
    sys: *const NsSystem,
    re: f64,
    im: f64,
    buffer: *mut f64,
    capacity: usize,
) -> NsStatus {
    guard(|| {
        let Some(sys) = sys.as_ref() else {
            set_error("null system");
            return NsStatus::NsErrNullPointer;
        };
        let z = match CutPlanePoint::new(Complex64::new(re, im)) {
            Ok(z) => z,
            Err(e) => return fail(&e),
        };
        eval_to_buffer(sys.inner.transfer(z), buffer, capacity)
    })
}

/// Omega'(z); same layout as `ns_transfer`.
///
/// # Safety
/// As for `ns_transfer`.
#[no_mangle]
pub unsafe extern "C" fn ns_transfer_derivative(
    sys: *const NsSystem,
    re: f64,
    im: f64,
    buffer: *mut f64,
    capacity: usize,
) -> NsStatus {
    guard(|| {
        let Some(sys) = sys.as_ref() else {
            set_error("null system");
            return NsStatus::NsErrNullPointer;
        };
        let z = match CutPlanePoint::new(Complex64::new(re, im)) {
            Ok(z) => z,
            Err(e) => return fail(&e),
        };
        eval_to_buffer(sys.inner.transfer_derivative(z), buffer, capacity)
    })
}

/// Compressed resolvent M(xi) = P_M (T - xi)^{-1} |_M of a selfadjoint
/// system, evaluated off [-1, 1].
///
/// # Safety
/// As for `ns_transfer`.
#[no_mangle]
pub unsafe extern "C" fn ns_compressed_resolvent(
    sys: *const NsSystem,
    re: f64,
    im: f64,
    buffer: *mut f64,
    capacity: usize,
) -> NsStatus {
    guard(|| {
        let Some(sys) = sys.as_ref() else {
            set_error("null system");
            return NsStatus::NsErrNullPointer;
        };
        let nf = match nevschur::rsclass::to_nfunction(&sys.inner) {
            Ok(nf) => nf,
            Err(e) => return fail(&e),
        };
        eval_to_buffer(nf.eval(Complex64::new(re, im)), buffer, capacity)
    })
}

/// Kind selector for `ns_transform`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NsTransformKind {
    NsTransformPhi = 0,
    NsTransformXi = 1,
    NsTransformPiA = 2,
    NsTransformEta = 3,
    NsTransformZeta = 4,
}

/// Realizes a transform of the system; `a` is ignored by the Phi kind.
///
/// # Safety
/// `sys` live; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ns_transform(
    sys: *const NsSystem,
    kind: NsTransformKind,
    a: f64,
    out: *mut *mut NsSystem,
) -> NsStatus {
    guard(|| {
        let (Some(sys), false) = (sys.as_ref(), out.is_null()) else {
            set_error("null pointer");
            return NsStatus::NsErrNullPointer;
        };
        let result = match kind {
            NsTransformKind::NsTransformPhi => nevschur::transforms::phi_realize(&sys.inner),
            NsTransformKind::NsTransformXi => nevschur::transforms::xi_realize(&sys.inner, a),
            NsTransformKind::NsTransformPiA => nevschur::transforms::pi_a_realize(&sys.inner, a),
            NsTransformKind::NsTransformEta => {
                nevschur::transforms::operator_moebius(&sys.inner, a)
            }
            NsTransformKind::NsTransformZeta => nevschur::transforms::zeta_realize(&sys.inner, a),
        };
        match result {
            Ok(image) => {
                *out = Box::into_raw(Box::new(NsSystem { inner: image }));
                NsStatus::NsOk
            }
            Err(e) => fail(&e),
        }
    })
}

/// Certificate summary: smallest kernel eigenvalue, smallest inequality
/// eigenvalue, largest disk norm, and the verdict.
///
/// # Safety
/// `sys` live; out pointers valid.
#[no_mangle]
pub unsafe extern "C" fn ns_certify(
    sys: *const NsSystem,
    min_kernel_eig: *mut f64,
    min_inequality_eig: *mut f64,
    schur_norm_max: *mut f64,
    verdict: *mut bool,
) -> NsStatus {
    guard(|| {
        let Some(sys) = sys.as_ref() else {
            set_error("null system");
            return NsStatus::NsErrNullPointer;
        };
        if min_kernel_eig.is_null()
            || min_inequality_eig.is_null()
            || schur_norm_max.is_null()
            || verdict.is_null()
        {
            set_error("null output pointer");
            return NsStatus::NsErrNullPointer;
        }
        let cert = nevschur::rsclass::certify_rs(&sys.inner, Default::default());
        *min_kernel_eig = cert.min_kernel_eig;
        *min_inequality_eig = cert.min_inequality_eig;
        *schur_norm_max = cert.schur_norm_max;
        *verdict = cert.verdict;
        NsStatus::NsOk
    })
}

/// Controllability/observability dimensions and the minimal/simple flags.
///
/// # Safety
/// `sys` live; out pointers valid.
#[no_mangle]
pub unsafe extern "C" fn ns_krylov(
    sys: *const NsSystem,
    controllable_dim: *mut usize,
    observable_dim: *mut usize,
    minimal: *mut bool,
    simple: *mut bool,
) -> NsStatus {
    guard(|| {
        let Some(sys) = sys.as_ref() else {
            set_error("null system");
            return NsStatus::NsErrNullPointer;
        };
        if controllable_dim.is_null()
            || observable_dim.is_null()
            || minimal.is_null()
            || simple.is_null()
        {
            set_error("null output pointer");
            return NsStatus::NsErrNullPointer;
        }
        let k = krylov_analysis(&sys.inner, nevschur::numkit::RTOL_DEFAULT);
        *controllable_dim = k.controllable_dim;
        *observable_dim = k.observable_dim;
        *minimal = k.minimal;
        *simple = k.simple;
        NsStatus::NsOk
    })
}

/// Spectral measure of the bi-inner dilation: writes up to `capacity`
/// atoms as locations plus m x m jump matrices.
///
/// # Safety
/// `sys` live; `locations` holds `capacity` doubles, `jumps` holds
/// `capacity * 2 * m * m` doubles, `count` valid.
#[no_mangle]
pub unsafe extern "C" fn ns_spectral_measure(
    sys: *const NsSystem,
    locations: *mut f64,
    jumps: *mut f64,
    capacity: usize,
    count: *mut usize,
) -> NsStatus {
    guard(|| {
        let Some(sys) = sys.as_ref() else {
            set_error("null system");
            return NsStatus::NsErrNullPointer;
        };
        if locations.is_null() || jumps.is_null() || count.is_null() {
            set_error("null output pointer");
            return NsStatus::NsErrNullPointer;
        }
        let dil = match nevschur::transforms::inner_dilate(&sys.inner) {
            Ok(d) => d,
            Err(e) => return fail(&e),
        };
        let measure = nevschur::transforms::spectral_measure(&dil);
        *count = measure.atoms.len();
        if measure.atoms.len() > capacity {
            set_error("atom buffer too small");
            return NsStatus::NsErrBufferTooSmall;
        }
        let m = sys.inner.dim_input();
        let loc_out = std::slice::from_raw_parts_mut(locations, measure.atoms.len());
        let jump_out = std::slice::from_raw_parts_mut(jumps, measure.atoms.len() * 2 * m * m);
        for (idx, (t, jump)) in measure.atoms.iter().enumerate() {
            loc_out[idx] = *t;
            let jm = jump.as_matrix();
            for i in 0..m {
                for j in 0..m {
                    let z = jm[(i, j)];
                    jump_out[idx * 2 * m * m + 2 * (i * m + j)] = z.re;
                    jump_out[idx * 2 * m * m + 2 * (i * m + j) + 1] = z.im;
                }
            }
        }
        NsStatus::NsOk
    })
}

/// Operator norm of the block operator; a convenience for binding checks.
///
/// # Safety
/// `sys` live; `norm` valid.
#[no_mangle]
pub unsafe extern "C" fn ns_opnorm(sys: *const NsSystem, norm: *mut f64) -> NsStatus {
    guard(|| {
        let (Some(sys), false) = (sys.as_ref(), norm.is_null()) else {
            set_error("null pointer");
            return NsStatus::NsErrNullPointer;
        };
        *norm = opnorm(sys.inner.matrix());
        NsStatus::NsOk
    })
}
