//! C interface to the fmcheck analyses.
//!
//! Models are opaque `FmModel` handles created by `fm_model_parse` and
//! released with `fm_model_free`. Every fallible function returns an
//! `FmStatus`; on failure `fm_last_error_message` describes the problem
//! for the calling thread. Strings returned through `char **` out-parameters
//! are owned by the caller and must be released with `fm_string_free`.
//! Configurations are passed as text, one `+feature` or `-feature` per line.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use fmcheck::analysis::{
    check_full_configuration, core_features, count_products, dead_features, is_void, propagate,
    AnalysisError, PropagationResult, SolverBackend,
};
use fmcheck::config_file::parse_configuration;
use fmcheck::encode::write_dimacs;
use fmcheck::{encode_model, parse_model, Configuration, EncodedModel, FeatureId};
use serde_json::json;

pub const FM_BACKEND_AUTO: c_int = 0;
pub const FM_BACKEND_BRUTE: c_int = 1;
pub const FM_BACKEND_DPLL: c_int = 2;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FmStatus {
    Ok = 0,
    /// A null pointer, invalid UTF-8 or an unknown backend value.
    InvalidArgument = 1,
    /// The model or configuration text does not parse.
    ParseError = 2,
    UnknownFeature = 3,
    /// A configuration leaves features undecided where a full one is needed.
    Undecided = 4,
    /// The model has too many features for exhaustive counting.
    TooLarge = 5,
    /// The model has no valid product.
    VoidModel = 6,
    /// Propagation found contradictory requirements.
    Conflict = 7,
    Internal = 99,
}

/// A parsed and encoded feature model.
pub struct FmModel {
    encoded: EncodedModel,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

struct Fail(FmStatus, String);

impl From<AnalysisError> for Fail {
    fn from(e: AnalysisError) -> Self {
        let status = match e {
            AnalysisError::TooLarge { .. } => FmStatus::TooLarge,
            AnalysisError::VoidModel => FmStatus::VoidModel,
            AnalysisError::UndecidedFeature(_) => FmStatus::Undecided,
            AnalysisError::UnknownFeature(_) => FmStatus::UnknownFeature,
            AnalysisError::Cancelled => FmStatus::Internal,
        };
        Fail(status, e.to_string())
    }
}

fn invalid(msg: &str) -> Fail {
    Fail(FmStatus::InvalidArgument, msg.to_string())
}

/// Runs `f`, converting failures and panics into a status code.
fn guard(f: impl FnOnce() -> Result<FmStatus, Fail>) -> FmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => {
            set_error("");
            status
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal error");
            FmStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(invalid(&format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(&format!("{what} is not UTF-8")))
}

unsafe fn handle<'a>(m: *const FmModel) -> Result<&'a FmModel, Fail> {
    m.as_ref().ok_or_else(|| invalid("model is null"))
}

fn backend(b: c_int) -> Result<SolverBackend, Fail> {
    match b {
        FM_BACKEND_AUTO => Ok(SolverBackend::Auto),
        FM_BACKEND_BRUTE => Ok(SolverBackend::BruteForce),
        FM_BACKEND_DPLL => Ok(SolverBackend::Dpll),
        _ => Err(invalid("unknown backend")),
    }
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(invalid("output pointer is null"));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    let c = CString::new(s).map_err(|_| Fail(FmStatus::Internal, "string contains NUL".into()))?;
    put(out, c.into_raw())
}

fn config(m: &FmModel, cfg: &str) -> Result<Configuration, Fail> {
    parse_configuration(cfg, &m.encoded).map_err(|e| Fail(FmStatus::ParseError, e.to_string()))
}

fn feature_lines<'a>(m: &FmModel, set: impl IntoIterator<Item = &'a FeatureId>) -> String {
    let set: std::collections::BTreeSet<&FeatureId> = set.into_iter().collect();
    m.encoded
        .features()
        .iter()
        .filter(|f| set.contains(f))
        .map(|f| format!("{f}\n"))
        .collect()
}

/// Parses and encodes `source`. On success `*out` receives a new handle.
///
/// # Safety
/// `source` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fm_model_parse(source: *const c_char, out: *mut *mut FmModel) -> FmStatus {
    guard(|| {
        if out.is_null() {
            return Err(invalid("output pointer is null"));
        }
        let src = text(source, "source")?;
        let parsed = parse_model(src).map_err(|errs| {
            let msgs: Vec<String> = errs.iter().map(|e| e.to_string()).collect();
            Fail(FmStatus::ParseError, msgs.join("\n"))
        })?;
        let encoded = encode_model(&parsed).map_err(|e| Fail(FmStatus::ParseError, e.to_string()))?;
        put(out, Box::into_raw(Box::new(FmModel { encoded })))?;
        Ok(FmStatus::Ok)
    })
}

/// Releases a handle from `fm_model_parse`. Null is ignored.
///
/// # Safety
/// `model` must come from `fm_model_parse` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fm_model_free(model: *mut FmModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Message for the last failed call on this thread, or an empty string.
/// The pointer stays valid until the next fmcheck call on the same thread.
#[no_mangle]
pub extern "C" fn fm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Number of features, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fm_model_feature_count(model: *const FmModel) -> usize {
    model.as_ref().map_or(0, |m| m.encoded.feature_count())
}

/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fm_model_is_void(model: *const FmModel, backend_id: c_int, out: *mut bool) -> FmStatus {
    guard(|| {
        let m = handle(model)?;
        put(out, is_void(&m.encoded, backend(backend_id)?)?)?;
        Ok(FmStatus::Ok)
    })
}

/// Dead features, one per line in preorder. Fails with `VoidModel` on a
/// void model.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fm_model_dead_features(
    model: *const FmModel,
    backend_id: c_int,
    out: *mut *mut c_char,
) -> FmStatus {
    guard(|| {
        let m = handle(model)?;
        let dead = dead_features(&m.encoded, backend(backend_id)?)?;
        put_string(out, feature_lines(m, &dead))?;
        Ok(FmStatus::Ok)
    })
}

/// Core features, one per line in preorder. Fails with `VoidModel` on a
/// void model.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fm_model_core_features(
    model: *const FmModel,
    backend_id: c_int,
    out: *mut *mut c_char,
) -> FmStatus {
    guard(|| {
        let m = handle(model)?;
        let core = core_features(&m.encoded, backend(backend_id)?)?;
        put_string(out, feature_lines(m, &core))?;
        Ok(FmStatus::Ok)
    })
}

/// Number of valid products, refusing models with more than `cap` features.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fm_model_count_products(model: *const FmModel, cap: usize, out: *mut u64) -> FmStatus {
    guard(|| {
        let m = handle(model)?;
        put(out, count_products(&m.encoded, cap)?)?;
        Ok(FmStatus::Ok)
    })
}

/// Checks a full configuration. `*valid` is set to whether every conjunct
/// holds; a configuration with undecided features fails with `Undecided`.
///
/// # Safety
/// `model` must be a live handle, `config_text` NUL-terminated and `valid`
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fm_model_check_config(
    model: *const FmModel,
    config_text: *const c_char,
    valid: *mut bool,
) -> FmStatus {
    guard(|| {
        let m = handle(model)?;
        let cfg = config(m, text(config_text, "configuration")?)?;
        put(valid, check_full_configuration(&m.encoded, &cfg)?.is_valid())?;
        Ok(FmStatus::Ok)
    })
}

/// Propagates a partial configuration. `*out_json` receives either
/// `{"status":"consistent","decisions":{..},"derivations":[..]}` (status
/// `Ok`) or `{"status":"conflict","conflict":{..}}` (status `Conflict`).
///
/// # Safety
/// `model` must be a live handle, `config_text` NUL-terminated and
/// `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fm_model_propagate(
    model: *const FmModel,
    config_text: *const c_char,
    out_json: *mut *mut c_char,
) -> FmStatus {
    guard(|| {
        let m = handle(model)?;
        let cfg = config(m, text(config_text, "configuration")?)?;
        let (status, doc) = match propagate(&m.encoded, &cfg)? {
            PropagationResult::Consistent {
                decisions,
                derivations,
            } => (
                FmStatus::Ok,
                json!({ "status": "consistent", "decisions": decisions, "derivations": derivations }),
            ),
            PropagationResult::Conflict(c) => {
                (FmStatus::Conflict, json!({ "status": "conflict", "conflict": c }))
            }
        };
        put_string(out_json, doc.to_string())?;
        Ok(status)
    })
}

/// DIMACS text of the model's clause form.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fm_model_to_dimacs(model: *const FmModel, out: *mut *mut c_char) -> FmStatus {
    guard(|| {
        let m = handle(model)?;
        put_string(out, write_dimacs(m.encoded.cnf()))?;
        Ok(FmStatus::Ok)
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn fm_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}
