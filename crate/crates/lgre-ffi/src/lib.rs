//! C ABI over the lgre library: opaque model handles, status codes, and
//! owned C strings for results.
//!
//! Conventions:
//! - Every function returns an [`LgreStatus`]; output parameters are
//!   written only on `Ok`.
//! - Strings returned through `char **` outputs are owned by the caller
//!   and must be released with [`lgre_string_free`].
//! - On any non-`Ok` status, [`lgre_last_error_message`] returns a
//!   human-readable message for the calling thread.
//! - Panics never unwind across the boundary; they are reported as
//!   [`LgreStatus::InternalError`].

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use lgre::gre_graph::{make_re, AtomCount};
use lgre::gre_sim::{compute_gre, re_for, Scheduler};
use lgre::logic::{parse_formula, FormulaLayer};
use lgre::simulation::simulator_set;
use lgre::{describe_via_minimization, ElementId, Language, RelationalModel, SimOptions};

/// Opaque handle to a loaded relational model.
pub struct LgreModel(RelationalModel);

/// Status code returned by every entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LgreStatus {
    /// The call succeeded and outputs were written.
    Ok = 0,
    /// A describe call succeeded but no referring expression exists.
    NoExpression = 1,
    /// A pointer was null or a string was not valid UTF-8.
    InvalidArgument = 2,
    /// Model or formula text failed to parse.
    ParseError = 3,
    /// The element, logic, or algorithm is not usable here.
    Unsupported = 4,
    /// An internal invariant failed; see the last error message.
    InternalError = 5,
}

/// Target logic for describe and simulator-set queries.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LgreLogic {
    Fol = 0,
    Epfol = 1,
    Alc = 2,
    El = 3,
    Elan = 4,
}

impl From<LgreLogic> for Language {
    fn from(logic: LgreLogic) -> Language {
        match logic {
            LgreLogic::Fol => Language::Fol,
            LgreLogic::Epfol => Language::Epfol,
            LgreLogic::Alc => Language::Alc,
            LgreLogic::El => Language::El,
            LgreLogic::Elan => Language::Elan,
        }
    }
}

/// Algorithm used by [`lgre_describe`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LgreAlgo {
    /// Simulator-set refinement (el, elan).
    Sim = 0,
    /// Branch-and-bound graph search (epfol, el).
    Graph = 1,
    /// Minimize by mutual similarity, then search the quotient.
    Combined = 2,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl AsRef<str>) {
    let sanitized: String = message
        .as_ref()
        .chars()
        .map(|c| if c == '\0' { ' ' } else { c })
        .collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("nul bytes removed");
    });
}

fn fail(status: LgreStatus, message: impl AsRef<str>) -> LgreStatus {
    set_error(message);
    status
}

/// The error message for the most recent failing call on this thread.
///
/// The pointer stays valid until the next failing call on the same
/// thread; do not free it.
#[no_mangle]
pub extern "C" fn lgre_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must have been returned by an lgre function and not freed before.
#[no_mangle]
pub unsafe extern "C" fn lgre_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn read_utf8<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, LgreStatus> {
    if ptr.is_null() {
        return Err(fail(
            LgreStatus::InvalidArgument,
            format!("{what} is null"),
        ));
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        fail(
            LgreStatus::InvalidArgument,
            format!("{what} is not valid UTF-8"),
        )
    })
}

fn write_string(out: *mut *mut c_char, value: String) -> LgreStatus {
    let value: String = value.chars().map(|c| if c == '\0' { ' ' } else { c }).collect();
    let cstring = CString::new(value).expect("nul bytes removed");
    unsafe { *out = cstring.into_raw() };
    LgreStatus::Ok
}

fn join_set(set: &BTreeSet<ElementId>) -> String {
    set.iter()
        .map(ElementId::as_str)
        .collect::<Vec<_>>()
        .join(" ")
}

fn guarded(body: impl FnOnce() -> LgreStatus) -> LgreStatus {
    catch_unwind(AssertUnwindSafe(body)).unwrap_or_else(|_| {
        fail(LgreStatus::InternalError, "internal panic; state unchanged")
    })
}

/// Parses a model from its text format.
///
/// On `Ok`, `*out` owns the model; release it with [`lgre_model_free`].
///
/// # Safety
/// `text` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lgre_model_from_text(
    text: *const c_char,
    out: *mut *mut LgreModel,
) -> LgreStatus {
    guarded(|| {
        if out.is_null() {
            return fail(LgreStatus::InvalidArgument, "out is null");
        }
        let text = match read_utf8(text, "text") {
            Ok(t) => t,
            Err(status) => return status,
        };
        match RelationalModel::from_text(text) {
            Ok(model) => {
                *out = Box::into_raw(Box::new(LgreModel(model)));
                LgreStatus::Ok
            }
            Err(e) => fail(LgreStatus::ParseError, e.to_string()),
        }
    })
}

/// Parses a model from its JSON format.
///
/// # Safety
/// As [`lgre_model_from_text`].
#[no_mangle]
pub unsafe extern "C" fn lgre_model_from_json(
    json: *const c_char,
    out: *mut *mut LgreModel,
) -> LgreStatus {
    guarded(|| {
        if out.is_null() {
            return fail(LgreStatus::InvalidArgument, "out is null");
        }
        let json = match read_utf8(json, "json") {
            Ok(t) => t,
            Err(status) => return status,
        };
        match RelationalModel::from_json_str(json) {
            Ok(model) => {
                *out = Box::into_raw(Box::new(LgreModel(model)));
                LgreStatus::Ok
            }
            Err(e) => fail(LgreStatus::ParseError, e.to_string()),
        }
    })
}

/// Releases a model handle. Null is ignored.
///
/// # Safety
/// `model` must come from a model constructor and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn lgre_model_free(model: *mut LgreModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of elements in the model's domain.
///
/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn lgre_model_domain_len(model: *const LgreModel) -> usize {
    if model.is_null() {
        return 0;
    }
    (*model).0.domain_len()
}

/// Computes a referring expression for `target`.
///
/// On `Ok`, `*out_formula` holds the formula in the logic's text syntax.
/// Returns `NoExpression` (without touching `out_formula`) when the
/// target cannot be distinguished in the chosen logic.
///
/// # Safety
/// `model` must be live; `target` a valid C string; `out_formula` valid.
#[no_mangle]
pub unsafe extern "C" fn lgre_describe(
    model: *const LgreModel,
    target: *const c_char,
    logic: LgreLogic,
    algo: LgreAlgo,
    out_formula: *mut *mut c_char,
) -> LgreStatus {
    guarded(|| {
        if model.is_null() || out_formula.is_null() {
            return fail(LgreStatus::InvalidArgument, "model or out_formula is null");
        }
        let target = match read_utf8(target, "target") {
            Ok(t) => t,
            Err(status) => return status,
        };
        let g = &(*model).0;
        let lang = Language::from(logic);
        let found = match algo {
            LgreAlgo::Sim => compute_gre(g, lang, &Scheduler::Fifo)
                .map_err(|e| e.to_string())
                .and_then(|run| {
                    re_for(&run.state, target)
                        .map(|re| re.map(|phi| phi.to_string()))
                        .map_err(|e| e.to_string())
                }),
            LgreAlgo::Graph => make_re(g, target, lang, &AtomCount)
                .map(|re| re.map(|re| re.formula.to_string()))
                .map_err(|e| e.to_string()),
            LgreAlgo::Combined => {
                describe_via_minimization(g, target, lang, &AtomCount, &SimOptions::default())
                    .map(|re| re.map(|re| re.formula.to_string()))
                    .map_err(|e| e.to_string())
            }
        };
        match found {
            Ok(Some(formula)) => write_string(out_formula, formula),
            Ok(None) => fail(
                LgreStatus::NoExpression,
                format!("no referring expression for `{target}`"),
            ),
            Err(message) => fail(LgreStatus::Unsupported, message),
        }
    })
}

/// Evaluates a formula and writes its extension as a space-separated
/// list of element names (empty string for the empty extension).
///
/// Accepts both formula layers; concept syntax is tried first.
///
/// # Safety
/// `model` must be live; `formula` a valid C string; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn lgre_eval(
    model: *const LgreModel,
    formula: *const c_char,
    out: *mut *mut c_char,
) -> LgreStatus {
    guarded(|| {
        if model.is_null() || out.is_null() {
            return fail(LgreStatus::InvalidArgument, "model or out is null");
        }
        let text = match read_utf8(formula, "formula") {
            Ok(t) => t,
            Err(status) => return status,
        };
        let parsed = parse_formula(text, FormulaLayer::Dl)
            .or_else(|_| parse_formula(text, FormulaLayer::Fo));
        let parsed = match parsed {
            Ok(phi) => phi,
            Err(e) => return fail(LgreStatus::ParseError, e.to_string()),
        };
        match parsed.extension(&(*model).0) {
            Ok(extension) => write_string(out, join_set(&extension)),
            Err(e) => fail(LgreStatus::Unsupported, e.to_string()),
        }
    })
}

/// Writes the simulator set of `element` as a space-separated list.
///
/// # Safety
/// `model` must be live; `element` a valid C string; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn lgre_simulator_set(
    model: *const LgreModel,
    element: *const c_char,
    logic: LgreLogic,
    out: *mut *mut c_char,
) -> LgreStatus {
    guarded(|| {
        if model.is_null() || out.is_null() {
            return fail(LgreStatus::InvalidArgument, "model or out is null");
        }
        let element = match read_utf8(element, "element") {
            Ok(t) => t,
            Err(status) => return status,
        };
        match simulator_set(
            &(*model).0,
            element,
            Language::from(logic),
            &SimOptions::default(),
        ) {
            Ok(set) => write_string(out, join_set(&set)),
            Err(e) => fail(LgreStatus::Unsupported, e.to_string()),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    const SCENE: &str = "domain: a b c d e\n\
                         unary beagle: d\n\
                         unary cat: c e\n\
                         unary dog: a b d\n\
                         unary small: b c d\n\
                         binary sniffs: (a,a) (b,a) (c,b) (d,e) (e,d)\n";

    fn cstr(s: &str) -> CString {
        CString::new(s).unwrap()
    }

    unsafe fn take_string(ptr: *mut c_char) -> String {
        let owned = CStr::from_ptr(ptr).to_str().unwrap().to_owned();
        lgre_string_free(ptr);
        owned
    }

    fn load_scene() -> *mut LgreModel {
        let text = cstr(SCENE);
        let mut model = ptr::null_mut();
        let status = unsafe { lgre_model_from_text(text.as_ptr(), &mut model) };
        assert_eq!(status, LgreStatus::Ok);
        assert!(!model.is_null());
        model
    }

    #[test]
    fn describe_round_trips_through_eval() {
        let model = load_scene();
        let target = cstr("b");
        let mut formula = ptr::null_mut();
        let status = unsafe {
            lgre_describe(
                model,
                target.as_ptr(),
                LgreLogic::El,
                LgreAlgo::Graph,
                &mut formula,
            )
        };
        assert_eq!(status, LgreStatus::Ok);
        let formula = unsafe { take_string(formula) };
        assert_eq!(formula, "dog & small & some sniffs . dog");

        let formula = cstr(&formula);
        let mut extension = ptr::null_mut();
        let status = unsafe { lgre_eval(model, formula.as_ptr(), &mut extension) };
        assert_eq!(status, LgreStatus::Ok);
        assert_eq!(unsafe { take_string(extension) }, "b");

        unsafe { lgre_model_free(model) };
    }

    #[test]
    fn no_expression_is_a_distinct_status() {
        let model = load_scene();
        let target = cstr("a");
        let mut formula = ptr::null_mut();
        let status = unsafe {
            lgre_describe(
                model,
                target.as_ptr(),
                LgreLogic::El,
                LgreAlgo::Sim,
                &mut formula,
            )
        };
        assert_eq!(status, LgreStatus::NoExpression);
        assert!(formula.is_null());

        // Elan distinguishes a via negated atoms.
        let status = unsafe {
            lgre_describe(
                model,
                target.as_ptr(),
                LgreLogic::Elan,
                LgreAlgo::Sim,
                &mut formula,
            )
        };
        assert_eq!(status, LgreStatus::Ok);
        assert_eq!(
            unsafe { take_string(formula) },
            "dog & !beagle & !cat & !small"
        );
        unsafe { lgre_model_free(model) };
    }

    #[test]
    fn errors_set_messages_and_statuses() {
        let mut model = ptr::null_mut();
        let bad = cstr("domain:");
        let status = unsafe { lgre_model_from_text(bad.as_ptr(), &mut model) };
        assert_eq!(status, LgreStatus::ParseError);
        let message = unsafe { CStr::from_ptr(lgre_last_error_message()) };
        assert!(!message.to_bytes().is_empty());

        let status = unsafe { lgre_model_from_text(ptr::null(), &mut model) };
        assert_eq!(status, LgreStatus::InvalidArgument);

        let model = load_scene();
        let target = cstr("zz");
        let mut formula = ptr::null_mut();
        let status = unsafe {
            lgre_describe(
                model,
                target.as_ptr(),
                LgreLogic::El,
                LgreAlgo::Graph,
                &mut formula,
            )
        };
        assert_eq!(status, LgreStatus::Unsupported);
        let message = unsafe { CStr::from_ptr(lgre_last_error_message()) }
            .to_str()
            .unwrap();
        assert!(message.contains("zz"));
        unsafe { lgre_model_free(model) };
    }

    #[test]
    fn simulator_sets_and_domain_len() {
        let model = load_scene();
        assert_eq!(unsafe { lgre_model_domain_len(model) }, 5);
        let element = cstr("a");
        let mut out = ptr::null_mut();
        let status =
            unsafe { lgre_simulator_set(model, element.as_ptr(), LgreLogic::El, &mut out) };
        assert_eq!(status, LgreStatus::Ok);
        assert_eq!(unsafe { take_string(out) }, "a b");
        unsafe { lgre_model_free(model) };
    }
}
