//! C ABI over `intermap`.
//!
//! Objects are opaque handles created by `iqm_*_new` functions and released
//! with the matching `iqm_*_free`. Every fallible call returns an
//! [`IqmStatus`]; on failure a description is available from
//! [`iqm_last_error`] on the same thread until the next failing call.
//! Complex arrays are interleaved `(re, im)` pairs of `double`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use intermap::circuit::{build_map_circuit, count_gates, CountingMode};
use intermap::isrm::{build_isrm_circuit, realization_unitary, RandomCircuitSpec};
use intermap::map_operator::build_unitary;
use intermap::observables::{ipr_of, meyer_wallach_q};
use intermap::params::predicted_beta;
use intermap::rng::RngStream;
use intermap::spectral::{eigensystem, EigenSystem};
use intermap::{Alpha, ComplexMatrix, Error, MapSpec, PhaseModel, Representation, StateVector, Variant, C64};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IqmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfRange = 3,
    BufferTooSmall = 4,
    NumericalFailure = 5,
    NoPrediction = 6,
    Internal = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IqmVariant {
    Deterministic = 0,
    IsrmNonSymmetric = 1,
    IsrmSymmetric = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IqmCounting {
    Paper = 0,
    Optimized = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IqmRepresentation {
    Momentum = 0,
    Position = 1,
}

/// Kick strength: `num/den` when `is_rational`, otherwise `value`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IqmAlpha {
    pub is_rational: bool,
    pub num: u64,
    pub den: u64,
    pub value: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IqmGateCounts {
    pub one_qubit: usize,
    pub two_qubit: usize,
    pub total: usize,
}

/// Dense unitary.
pub struct IqmMatrix {
    inner: ComplexMatrix,
}

/// Eigenphases and eigenvectors of a unitary.
pub struct IqmEigenSystem {
    inner: EigenSystem,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> IqmStatus {
    match e {
        Error::InvalidParameter(_)
        | Error::NotPowerOfTwo(_)
        | Error::Config(_)
        | Error::Parse { .. }
        | Error::RepresentationMismatch { .. }
        | Error::ZeroVector
        | Error::NotNormalized { .. } => IqmStatus::InvalidArgument,
        Error::DimensionMismatch { .. } | Error::DimensionCap { .. } | Error::QubitOutOfRange { .. } => {
            IqmStatus::OutOfRange
        }
        Error::NotUnitary { .. } | Error::Eigen { .. } | Error::SymmetryViolation { .. } | Error::Check(_) => {
            IqmStatus::NumericalFailure
        }
        _ => IqmStatus::Internal,
    }
}

/// Run `f`, turning errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Result<(), (IqmStatus, String)>) -> IqmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IqmStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            IqmStatus::Internal
        }
    }
}

fn lib<T>(r: intermap::Result<T>) -> Result<T, (IqmStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (IqmStatus, String) {
    (IqmStatus::NullPointer, format!("{what} is null"))
}

fn alpha_of(a: IqmAlpha) -> Result<Alpha, (IqmStatus, String)> {
    lib(if a.is_rational {
        Alpha::rational(a.num, a.den)
    } else {
        Alpha::real(a.value)
    })
}

fn variant_of(v: IqmVariant) -> Variant {
    match v {
        IqmVariant::Deterministic => Variant::Deterministic,
        IqmVariant::IsrmNonSymmetric => Variant::IsrmNonSymmetric,
        IqmVariant::IsrmSymmetric => Variant::IsrmSymmetric,
    }
}

unsafe fn amplitudes(data: *const f64, n: usize) -> Result<Vec<C64>, (IqmStatus, String)> {
    if data.is_null() {
        return Err(null("amplitudes"));
    }
    let raw = std::slice::from_raw_parts(data, 2 * n);
    Ok(raw.chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect())
}

unsafe fn store<T>(out: *mut T, value: T) -> Result<(), (IqmStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = value;
    Ok(())
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn iqm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the last failure on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn iqm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Deterministic map on `n_qubits` qubits, momentum representation.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn iqm_map_new(n_qubits: u32, alpha: IqmAlpha, out: *mut *mut IqmMatrix) -> IqmStatus {
    guard(|| {
        let spec = lib(MapSpec::deterministic(n_qubits, alpha_of(alpha)?))?;
        let m = lib(build_unitary(&spec))?;
        store(out, Box::into_raw(Box::new(IqmMatrix { inner: m })))
    })
}

/// Realization `realization` of an ISRM ensemble with uniform phases.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn iqm_isrm_new(
    n_qubits: u32,
    alpha: IqmAlpha,
    symmetric: bool,
    seed: u64,
    realization: u64,
    out: *mut *mut IqmMatrix,
) -> IqmStatus {
    guard(|| {
        let variant = if symmetric {
            Variant::IsrmSymmetric
        } else {
            Variant::IsrmNonSymmetric
        };
        let spec = lib(MapSpec::new(
            n_qubits,
            alpha_of(alpha)?,
            variant,
            PhaseModel::Uniform,
            seed,
        ))?;
        let m = lib(realization_unitary(&spec, realization))?;
        store(out, Box::into_raw(Box::new(IqmMatrix { inner: m })))
    })
}

/// A copy of `m` in the requested representation.
///
/// # Safety
/// `m` must be a live handle and `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn iqm_matrix_to_representation(
    m: *const IqmMatrix,
    repr: IqmRepresentation,
    out: *mut *mut IqmMatrix,
) -> IqmStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("matrix"))?;
        let target = match repr {
            IqmRepresentation::Momentum => Representation::Momentum,
            IqmRepresentation::Position => Representation::Position,
        };
        let c = lib(m.inner.to_representation(target))?;
        store(out, Box::into_raw(Box::new(IqmMatrix { inner: c })))
    })
}

/// Dimension of `m`, 0 for NULL.
///
/// # Safety
/// `m` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn iqm_matrix_dim(m: *const IqmMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.inner.dim())
}

/// # Safety
/// `m` must be a live handle; `re` and `im` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn iqm_matrix_get(
    m: *const IqmMatrix,
    row: usize,
    col: usize,
    re: *mut f64,
    im: *mut f64,
) -> IqmStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("matrix"))?;
        let n = m.inner.dim();
        if row >= n || col >= n {
            return Err((IqmStatus::OutOfRange, format!("({row}, {col}) outside {n}x{n}")));
        }
        let z = m.inner.get(row, col);
        store(re, z.re)?;
        store(im, z.im)
    })
}

/// Copy all entries row-major into `out`, which holds `len` doubles
/// (at least `2 N²`).
///
/// # Safety
/// `m` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn iqm_matrix_copy(m: *const IqmMatrix, out: *mut f64, len: usize) -> IqmStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("matrix"))?;
        if out.is_null() {
            return Err(null("output buffer"));
        }
        let n = m.inner.dim();
        if len < 2 * n * n {
            return Err((
                IqmStatus::BufferTooSmall,
                format!("need {} doubles, got {len}", 2 * n * n),
            ));
        }
        let dst = std::slice::from_raw_parts_mut(out, 2 * n * n);
        for (k, z) in m.inner.to_row_major().into_iter().enumerate() {
            dst[2 * k] = z.re;
            dst[2 * k + 1] = z.im;
        }
        Ok(())
    })
}

/// # Safety
/// `m` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn iqm_matrix_free(m: *mut IqmMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Eigen-decomposition of a unitary handle.
///
/// # Safety
/// `m` must be a live handle and `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn iqm_eigen_new(m: *const IqmMatrix, out: *mut *mut IqmEigenSystem) -> IqmStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("matrix"))?;
        let e = lib(eigensystem(&m.inner))?;
        store(out, Box::into_raw(Box::new(IqmEigenSystem { inner: e })))
    })
}

/// # Safety
/// `e` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn iqm_eigen_dim(e: *const IqmEigenSystem) -> usize {
    e.as_ref().map_or(0, |e| e.inner.dim())
}

/// Eigenphases in `[0, 2π)`, ascending.
///
/// # Safety
/// `e` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn iqm_eigen_phases(e: *const IqmEigenSystem, out: *mut f64, len: usize) -> IqmStatus {
    guard(|| {
        let e = e.as_ref().ok_or_else(|| null("eigensystem"))?;
        if out.is_null() {
            return Err(null("output buffer"));
        }
        let n = e.inner.phases.len();
        if len < n {
            return Err((IqmStatus::BufferTooSmall, format!("need {n} doubles, got {len}")));
        }
        std::slice::from_raw_parts_mut(out, n).copy_from_slice(&e.inner.phases);
        Ok(())
    })
}

/// Eigenvector `k` as `N` interleaved complex amplitudes.
///
/// # Safety
/// `e` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn iqm_eigen_vector(e: *const IqmEigenSystem, k: usize, out: *mut f64, len: usize) -> IqmStatus {
    guard(|| {
        let e = e.as_ref().ok_or_else(|| null("eigensystem"))?;
        if out.is_null() {
            return Err(null("output buffer"));
        }
        let v = lib(e.inner.vectors())?;
        let n = v.dim();
        if k >= n {
            return Err((IqmStatus::OutOfRange, format!("eigenvector {k} of {n}")));
        }
        if len < 2 * n {
            return Err((IqmStatus::BufferTooSmall, format!("need {} doubles, got {len}", 2 * n)));
        }
        let dst = std::slice::from_raw_parts_mut(out, 2 * n);
        for (i, z) in v.column_slice(k).iter().enumerate() {
            dst[2 * i] = z.re;
            dst[2 * i + 1] = z.im;
        }
        Ok(())
    })
}

/// # Safety
/// `e` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn iqm_eigen_free(e: *mut IqmEigenSystem) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// Meyer-Wallach Q of a normalized state of `n` (a power of two) amplitudes.
///
/// # Safety
/// `amps` must hold `2n` doubles and `out` be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn iqm_meyer_wallach(amps: *const f64, n: usize, out: *mut f64) -> IqmStatus {
    guard(|| {
        let psi = StateVector::new(amplitudes(amps, n)?, Representation::Position);
        store(out, lib(meyer_wallach_q(&psi))?)
    })
}

/// Inverse participation ratio `(Σ|ψ|²)² / Σ|ψ|⁴`.
///
/// # Safety
/// `amps` must hold `2n` doubles and `out` be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn iqm_ipr(amps: *const f64, n: usize, out: *mut f64) -> IqmStatus {
    guard(|| store(out, lib(ipr_of(&amplitudes(amps, n)?))?))
}

/// Predicted semi-Poisson exponent; `NO_PREDICTION` when none applies.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn iqm_predicted_beta(
    alpha: IqmAlpha,
    dim: usize,
    variant: IqmVariant,
    out: *mut f64,
) -> IqmStatus {
    guard(|| match predicted_beta(&alpha_of(alpha)?, dim, variant_of(variant)) {
        Some(b) => store(out, b),
        None => Err((
            IqmStatus::NoPrediction,
            format!("no semi-Poisson prediction for N = {dim}"),
        )),
    })
}

/// Gate counts of the map circuit.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn iqm_map_gate_counts(
    n_qubits: u32,
    alpha: IqmAlpha,
    counting: IqmCounting,
    out: *mut IqmGateCounts,
) -> IqmStatus {
    guard(|| {
        let spec = lib(MapSpec::deterministic(n_qubits, alpha_of(alpha)?))?;
        let mode = match counting {
            IqmCounting::Paper => CountingMode::PaperFaithful,
            IqmCounting::Optimized => CountingMode::Optimized,
        };
        let k = count_gates(&lib(build_map_circuit(&spec, mode))?);
        store(
            out,
            IqmGateCounts {
                one_qubit: k.one_qubit,
                two_qubit: k.two_qubit,
                total: k.total,
            },
        )
    })
}

/// Gate counts of an ISRM circuit with `n_s` random CNOT pairs drawn from `seed`.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn iqm_isrm_gate_counts(
    n_qubits: u32,
    alpha: IqmAlpha,
    n_s: usize,
    seed: u64,
    out: *mut IqmGateCounts,
) -> IqmStatus {
    guard(|| {
        let mut rng = RngStream::new(seed, 0).rng();
        let rcs = lib(RandomCircuitSpec::random(n_qubits, n_s, &mut rng))?;
        let k = count_gates(&lib(build_isrm_circuit(&alpha_of(alpha)?, &rcs))?);
        store(
            out,
            IqmGateCounts {
                one_qubit: k.one_qubit,
                two_qubit: k.two_qubit,
                total: k.total,
            },
        )
    })
}
