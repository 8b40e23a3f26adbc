//! C ABI over `ccr-core`.
//!
//! States are opaque `CcrState` handles created by one of the
//! `ccr_state_from_*` constructors and released with [`ccr_state_free`].
//! Every fallible call returns a [`CcrStatus`]; on failure the message is
//! available from [`ccr_last_error`] on the same thread until the next call.
//! Complex arrays are interleaved `re, im` pairs; matrices are row-major.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ccr_core::correlations::{
    classical_correlation, concurrence, entanglement_of_formation, MeasurementClass, OptimizerConfig, Side,
};
use ccr_core::measures::{coherence, conditional_entropy, mutual_information, predictability, von_neumann_entropy};
use ccr_core::qstate::linalg::{CMatrix, CVector};
use ccr_core::qstate::{Cut, DensityMatrix, PureState};
use ccr_core::relations::{
    ccr_conditional, ccr_koashi, ccr_mutual_info, ccr_pure, ccr_reality, ccr_tessier, RelationId,
};
use ccr_core::CcrError;
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidState = 2,
    DimMismatch = 3,
    NotPure = 4,
    Unsupported = 5,
    InvalidArgument = 6,
    Parse = 7,
    Panic = 8,
}

/// Optimizer settings for variational quantities.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CcrOptimizerConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub seed: u64,
    /// Nonzero: optimize classical correlations over rank-1 POVMs.
    pub povm: c_int,
}

impl From<&CcrOptimizerConfig> for OptimizerConfig {
    fn from(c: &CcrOptimizerConfig) -> Self {
        OptimizerConfig {
            restarts: c.restarts,
            max_iterations: c.max_iterations,
            tolerance: c.tolerance,
            seed: c.seed,
            ensemble_size: None,
            measurement: if c.povm != 0 {
                MeasurementClass::Povm
            } else {
                MeasurementClass::Projective
            },
        }
    }
}

/// Opaque state handle.
pub struct CcrState {
    density: DensityMatrix,
    pure: Option<PureState>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &CcrError) -> CcrStatus {
    match e {
        CcrError::NotHermitian { .. }
        | CcrError::NotUnitTrace { .. }
        | CcrError::NotPositive { .. }
        | CcrError::NonFinite(_)
        | CcrError::NotNormalized(_) => CcrStatus::InvalidState,
        CcrError::DimMismatch { .. } | CcrError::BadIndex { .. } | CcrError::BadCut(_) => CcrStatus::DimMismatch,
        CcrError::NotPure { .. } => CcrStatus::NotPure,
        CcrError::NotQubit(_) | CcrError::NotTwoQubit(_) | CcrError::DimTooLarge { .. } => CcrStatus::Unsupported,
        CcrError::Parse { .. } => CcrStatus::Parse,
        _ => CcrStatus::InvalidArgument,
    }
}

enum FfiError {
    Null(&'static str),
    Core(CcrError),
}

impl From<CcrError> for FfiError {
    fn from(e: CcrError) -> Self {
        FfiError::Core(e)
    }
}

type FfiResult<T> = Result<T, FfiError>;

/// Runs `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> FfiResult<()>) -> CcrStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CcrStatus::Ok,
        Ok(Err(FfiError::Null(what))) => {
            set_error(format!("{what} is null"));
            CcrStatus::NullPointer
        }
        Ok(Err(FfiError::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            CcrStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, n: usize, what: &'static str) -> FfiResult<&'a [T]> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(FfiError::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn state_ref<'a>(s: *const CcrState) -> FfiResult<&'a CcrState> {
    s.as_ref().ok_or_else(|| FfiError::Null("state"))
}

unsafe fn write_out<T>(out: *mut T, v: T) -> FfiResult<()> {
    if out.is_null() {
        return Err(FfiError::Null("output pointer"));
    }
    out.write(v);
    Ok(())
}

fn complex_pairs(re_im: &[f64]) -> Result<Vec<Complex64>, CcrError> {
    if re_im.len() % 2 != 0 {
        return Err(CcrError::InvalidArgument("interleaved complex array has odd length".into()));
    }
    Ok(re_im.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect())
}

unsafe fn publish(out: *mut *mut CcrState, state: CcrState) -> FfiResult<()> {
    if out.is_null() {
        return Err(FfiError::Null("output handle"));
    }
    out.write(Box::into_raw(Box::new(state)));
    Ok(())
}

unsafe fn cut_from(party_a: *const usize, n: usize) -> FfiResult<Cut> {
    let a = slice(party_a, n, "party_a")?;
    Ok(if a.is_empty() { Cut::first() } else { Cut::new(a.to_vec()) })
}

/// Builds a state from a row-major density matrix of `total × total` complex
/// entries (`2 * total * total` doubles), `total` being the product of `dims`.
///
/// # Safety
/// `dims` must point to `ndims` values and `re_im` to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ccr_state_from_density(
    dims: *const usize,
    ndims: usize,
    re_im: *const f64,
    len: usize,
    out: *mut *mut CcrState,
) -> CcrStatus {
    guard(|| {
        let dims = slice(dims, ndims, "dims")?.to_vec();
        let entries = complex_pairs(slice(re_im, len, "matrix")?)?;
        let total: usize = dims.iter().product();
        if entries.len() != total * total {
            return Err(CcrError::DimMismatch {
                expected: total * total,
                found: entries.len(),
            }
            .into());
        }
        let density = DensityMatrix::new(dims, CMatrix::from_row_slice(total, total, &entries))?;
        publish(out, CcrState { density, pure: None })
    })
}

/// Builds a pure state from `total` complex amplitudes (`2 * total` doubles).
///
/// # Safety
/// As [`ccr_state_from_density`].
#[no_mangle]
pub unsafe extern "C" fn ccr_state_from_vector(
    dims: *const usize,
    ndims: usize,
    re_im: *const f64,
    len: usize,
    out: *mut *mut CcrState,
) -> CcrStatus {
    guard(|| {
        let dims = slice(dims, ndims, "dims")?.to_vec();
        let amps = complex_pairs(slice(re_im, len, "vector")?)?;
        let psi = PureState::new(dims, CVector::from_vec(amps))?;
        publish(
            out,
            CcrState {
                density: psi.density(),
                pure: Some(psi),
            },
        )
    })
}

/// Parses the JSON state-file format accepted by `ccr quantifiers`.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ccr_state_from_json(text: *const c_char, out: *mut *mut CcrState) -> CcrStatus {
    guard(|| {
        if text.is_null() {
            return Err(FfiError::Null("text"));
        }
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|e| CcrError::InvalidArgument(format!("text is not UTF-8: {e}")))?;
        let state = match ccr_core::cli::parse_state(text)? {
            ccr_core::cli::StateInput::Pure(psi) => CcrState {
                density: psi.density(),
                pure: Some(psi),
            },
            ccr_core::cli::StateInput::Mixed(density) => CcrState { density, pure: None },
        };
        publish(out, state)
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `state` must come from a `ccr_state_from_*` call and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ccr_state_free(state: *mut CcrState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Total Hilbert-space dimension.
///
/// # Safety
/// `state` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ccr_state_dim(state: *const CcrState, out: *mut usize) -> CcrStatus {
    guard(|| write_out(out, state_ref(state)?.density.dim()))
}

/// Number of tensor factors.
///
/// # Safety
/// `state` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ccr_state_subsystems(state: *const CcrState, out: *mut usize) -> CcrStatus {
    guard(|| write_out(out, state_ref(state)?.density.num_subsystems()))
}

/// Von Neumann entropy in bits.
///
/// # Safety
/// `state` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ccr_von_neumann_entropy(state: *const CcrState, out: *mut f64) -> CcrStatus {
    guard(|| write_out(out, von_neumann_entropy(&state_ref(state)?.density)))
}

/// Relative entropy of coherence in the computational basis.
///
/// # Safety
/// `state` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ccr_coherence(state: *const CcrState, out: *mut f64) -> CcrStatus {
    guard(|| write_out(out, coherence(&state_ref(state)?.density, None)?))
}

/// Entropic predictability in the computational basis.
///
/// # Safety
/// `state` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ccr_predictability(state: *const CcrState, out: *mut f64) -> CcrStatus {
    guard(|| write_out(out, predictability(&state_ref(state)?.density, None)?))
}

/// Mutual information between the subsystems listed in `party_a` and the
/// rest. An empty list means subsystem 0.
///
/// # Safety
/// `party_a` must point to `n` values; `state` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ccr_mutual_information(
    state: *const CcrState,
    party_a: *const usize,
    n: usize,
    out: *mut f64,
) -> CcrStatus {
    guard(|| write_out(out, mutual_information(&state_ref(state)?.density, &cut_from(party_a, n)?)?))
}

/// Conditional entropy `S(A|B)`.
///
/// # Safety
/// As [`ccr_mutual_information`].
#[no_mangle]
pub unsafe extern "C" fn ccr_conditional_entropy(
    state: *const CcrState,
    party_a: *const usize,
    n: usize,
    out: *mut f64,
) -> CcrStatus {
    guard(|| write_out(out, conditional_entropy(&state_ref(state)?.density, &cut_from(party_a, n)?)?))
}

/// Wootters concurrence of a two-qubit state.
///
/// # Safety
/// `state` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ccr_concurrence(state: *const CcrState, out: *mut f64) -> CcrStatus {
    guard(|| write_out(out, concurrence(&state_ref(state)?.density)?))
}

/// Default optimizer settings.
#[no_mangle]
pub extern "C" fn ccr_optimizer_default() -> CcrOptimizerConfig {
    let d = OptimizerConfig::default();
    CcrOptimizerConfig {
        restarts: d.restarts,
        max_iterations: d.max_iterations,
        tolerance: d.tolerance,
        seed: d.seed,
        povm: 0,
    }
}

fn optimizer(cfg: *const CcrOptimizerConfig) -> FfiResult<OptimizerConfig> {
    // SAFETY: callers pass either null or a pointer they own
    let cfg = match unsafe { cfg.as_ref() } {
        Some(c) => OptimizerConfig::from(c),
        None => OptimizerConfig::default(),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Entanglement of formation across the cut (variational search; the
/// two-qubit closed form is available through [`ccr_concurrence`]).
/// `cfg` may be null for defaults.
///
/// # Safety
/// As [`ccr_mutual_information`]; `cfg` null or valid.
#[no_mangle]
pub unsafe extern "C" fn ccr_entanglement_of_formation(
    state: *const CcrState,
    party_a: *const usize,
    n: usize,
    cfg: *const CcrOptimizerConfig,
    out: *mut f64,
) -> CcrStatus {
    guard(|| {
        let r = entanglement_of_formation(&state_ref(state)?.density, &cut_from(party_a, n)?, &optimizer(cfg)?)?;
        write_out(out, r.value)
    })
}

/// Classical correlation `J` of party A, measuring party B.
///
/// # Safety
/// As [`ccr_entanglement_of_formation`].
#[no_mangle]
pub unsafe extern "C" fn ccr_classical_correlation(
    state: *const CcrState,
    party_a: *const usize,
    n: usize,
    cfg: *const CcrOptimizerConfig,
    out: *mut f64,
) -> CcrStatus {
    guard(|| {
        let r = classical_correlation(
            &state_ref(state)?.density,
            &cut_from(party_a, n)?,
            Side::Second,
            &optimizer(cfg)?,
        )?;
        write_out(out, r.value)
    })
}

/// Residual of a named relation (`"ccr-pure"`, `"ccr-reality"`,
/// `"ccr-koashi"`, `"ccr-tessier"`, `"ccr-mutual-info"`,
/// `"ccr-conditional"`) evaluated on `state` with subsystem 0 as party A.
/// `ccr-quantum-classical` takes an ensemble and is not available here.
///
/// # Safety
/// `relation` NUL-terminated; `state` live; `cfg` null or valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ccr_relation_residual(
    relation: *const c_char,
    state: *const CcrState,
    cfg: *const CcrOptimizerConfig,
    out: *mut f64,
) -> CcrStatus {
    guard(|| {
        if relation.is_null() {
            return Err(FfiError::Null("relation"));
        }
        let name = CStr::from_ptr(relation)
            .to_str()
            .map_err(|_| CcrError::UnknownRelation("<non-UTF-8>".into()))?;
        let id: RelationId = name.parse().map_err(FfiError::Core)?;
        let s = state_ref(state)?;
        let cut = Cut::first();
        let pure = || {
            s.pure
                .clone()
                .map(Ok)
                .unwrap_or_else(|| s.density.as_pure(1e-10))
        };
        let report = match id {
            RelationId::Pure => ccr_pure(&pure()?, &cut, None)?,
            RelationId::Reality => ccr_reality(&s.density, None)?,
            RelationId::Koashi => ccr_koashi(&pure()?, &optimizer(cfg)?, false)?,
            RelationId::Tessier => ccr_tessier(&s.density)?,
            RelationId::MutualInfo => ccr_mutual_info(&s.density, &cut)?,
            RelationId::Conditional => ccr_conditional(&s.density, &cut)?,
            RelationId::QuantumClassical => {
                return Err(CcrError::InvalidArgument(format!("{id} is not available for a single state")).into())
            }
        };
        write_out(out, report.worst_residual())
    })
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn ccr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn ccr_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version contains NUL"),
    };
    VERSION.as_ptr()
}
