//! Drives the C entry points the way a foreign caller would: through raw
//! pointers and status codes only.

use std::ffi::{c_char, CStr, CString};
use std::ptr;

use lgre_ffi::{
    lgre_describe, lgre_eval, lgre_last_error_message, lgre_model_free, lgre_model_from_json,
    lgre_model_from_text, lgre_string_free, LgreAlgo, LgreLogic, LgreModel, LgreStatus,
};

const SCENE_JSON: &str = r#"{
  "domain": ["a", "b", "c", "d", "e"],
  "unary": {
    "beagle": ["d"],
    "cat": ["c", "e"],
    "dog": ["a", "b", "d"],
    "small": ["b", "c", "d"]
  },
  "binary": {
    "sniffs": [["a", "a"], ["b", "a"], ["c", "b"], ["d", "e"], ["e", "d"]]
  }
}"#;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take_string(ptr: *mut c_char) -> String {
    let owned = CStr::from_ptr(ptr).to_str().unwrap().to_owned();
    lgre_string_free(ptr);
    owned
}

#[test]
fn json_models_support_the_combined_route() {
    let json = cstr(SCENE_JSON);
    let mut model: *mut LgreModel = ptr::null_mut();
    let status = unsafe { lgre_model_from_json(json.as_ptr(), &mut model) };
    assert_eq!(status, LgreStatus::Ok);

    // Duplicate-free scene: the quotient search agrees with the direct one.
    let target = cstr("d");
    let mut formula = ptr::null_mut();
    let status = unsafe {
        lgre_describe(
            model,
            target.as_ptr(),
            LgreLogic::El,
            LgreAlgo::Combined,
            &mut formula,
        )
    };
    assert_eq!(status, LgreStatus::Ok);
    let formula_text = unsafe { take_string(formula) };
    assert_eq!(formula_text, "beagle");

    let formula = cstr(&formula_text);
    let mut extension = ptr::null_mut();
    let status = unsafe { lgre_eval(model, formula.as_ptr(), &mut extension) };
    assert_eq!(status, LgreStatus::Ok);
    assert_eq!(unsafe { take_string(extension) }, "d");

    unsafe { lgre_model_free(model) };
}

#[test]
fn eval_accepts_both_layers_and_reports_syntax_errors() {
    let text = cstr("domain: x y\nunary p: x\n");
    let mut model = ptr::null_mut();
    assert_eq!(
        unsafe { lgre_model_from_text(text.as_ptr(), &mut model) },
        LgreStatus::Ok
    );

    for (formula, expected) in [("p", "x"), ("p(x1)", "x"), ("!p(x1)", "y"), ("T", "x y")] {
        let formula = cstr(formula);
        let mut out = ptr::null_mut();
        let status = unsafe { lgre_eval(model, formula.as_ptr(), &mut out) };
        assert_eq!(status, LgreStatus::Ok);
        assert_eq!(unsafe { take_string(out) }, expected);
    }

    let broken = cstr("p &");
    let mut out = ptr::null_mut();
    let status = unsafe { lgre_eval(model, broken.as_ptr(), &mut out) };
    assert_eq!(status, LgreStatus::ParseError);
    assert!(out.is_null());

    unsafe { lgre_model_free(model) };
}

#[test]
fn null_handling_is_defensive() {
    unsafe { lgre_string_free(ptr::null_mut()) };
    unsafe { lgre_model_free(ptr::null_mut()) };

    let mut model = ptr::null_mut();
    let status = unsafe { lgre_model_from_json(ptr::null(), &mut model) };
    assert_eq!(status, LgreStatus::InvalidArgument);
    assert!(model.is_null());

    let message = unsafe { CStr::from_ptr(lgre_last_error_message()) }
        .to_str()
        .unwrap();
    assert!(message.contains("null"));
}
