//! C ABI for the scorbit library: opaque backend handles, UTF-8 string
//! arguments, and integer status codes. The matching header lives in
//! `include/scorbit.h` and is kept in sync by a test.
//!
//! Conventions:
//! - constructors return `NULL` on failure; query the message with
//!   [`scb_last_error`] (thread-local, owned by the library);
//! - returned strings are owned by the caller and must be released with
//!   [`scb_string_release`];
//! - decision functions return `0` / `1` / `2` for in-orbit, not-in-orbit
//!   and unknown, and `-1` on error.

use scorbit::backend::rewrite::KbCaps;
use scorbit::orbit::{self, Decision};
use scorbit::scott;
use scorbit::tsets::ThatStream;
use scorbit::{Backend, Presentation};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

/// Opaque backend handle.
pub struct ScbBackend {
    inner: Arc<Backend>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<Vec<u8>>) {
    let c = CString::new(msg).unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

/// Message for the most recent failure on this thread, or `NULL`. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn scb_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn scb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

unsafe fn utf8_arg<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, ()> {
    if ptr.is_null() {
        set_error(format!("{what} pointer is null"));
        return Err(());
    }
    match unsafe { CStr::from_ptr(ptr) }.to_str() {
        Ok(s) => Ok(s),
        Err(_) => {
            set_error(format!("{what} is not valid UTF-8"));
            Err(())
        }
    }
}

fn wrap_backend(r: scorbit::Result<Backend>) -> *mut ScbBackend {
    match r {
        Ok(b) => {
            clear_error();
            Box::into_raw(Box::new(ScbBackend { inner: b.into_shared() }))
        }
        Err(e) => {
            set_error(e.to_string());
            std::ptr::null_mut()
        }
    }
}

fn guarded<T>(fallback: T, f: impl FnOnce() -> T) -> T {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(v) => v,
        Err(_) => {
            set_error("internal panic");
            fallback
        }
    }
}

/// Free group of the given rank.
#[no_mangle]
pub extern "C" fn scb_backend_free_group(rank: usize) -> *mut ScbBackend {
    guarded(std::ptr::null_mut(), || wrap_backend(Backend::free_group(rank)))
}

/// Free abelian group of the given rank.
#[no_mangle]
pub extern "C" fn scb_backend_free_abelian(rank: usize) -> *mut ScbBackend {
    guarded(std::ptr::null_mut(), || wrap_backend(Backend::free_abelian(rank)))
}

/// The infinite dihedral group on generators `r, s`.
#[no_mangle]
pub extern "C" fn scb_backend_dihedral() -> *mut ScbBackend {
    guarded(std::ptr::null_mut(), || wrap_backend(Ok(Backend::infinite_dihedral())))
}

/// Finite group realized by coset enumeration of the presentation text,
/// capped at `coset_cap` live cosets.
///
/// # Safety
/// `presentation` must be a valid NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn scb_backend_finite(
    presentation: *const c_char,
    coset_cap: usize,
) -> *mut ScbBackend {
    guarded(std::ptr::null_mut(), || {
        let Ok(text) = (unsafe { utf8_arg(presentation, "presentation") }) else {
            return std::ptr::null_mut();
        };
        wrap_backend(
            Presentation::parse(text).and_then(|p| Backend::finite_from_presentation(p, coset_cap)),
        )
    })
}

/// Rewriting backend built by bounded completion of the presentation's
/// relators. `assert_hopfian != 0` records the caller's Hopfianity claim.
///
/// # Safety
/// `presentation` must be a valid NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn scb_backend_rewriting(
    presentation: *const c_char,
    max_rules: usize,
    max_steps: usize,
    assert_hopfian: i32,
) -> *mut ScbBackend {
    guarded(std::ptr::null_mut(), || {
        let Ok(text) = (unsafe { utf8_arg(presentation, "presentation") }) else {
            return std::ptr::null_mut();
        };
        wrap_backend(Presentation::parse(text).map(|p| {
            Backend::rewriting_from_presentation(
                p,
                KbCaps { max_rules, max_steps },
                assert_hopfian != 0,
            )
        }))
    })
}

/// Releases a backend handle. `NULL` is ignored.
///
/// # Safety
/// `backend` must come from a `scb_backend_*` constructor and must not be
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn scb_backend_release(backend: *mut ScbBackend) {
    if !backend.is_null() {
        drop(unsafe { Box::from_raw(backend) });
    }
}

unsafe fn backend_arg<'a>(ptr: *const ScbBackend) -> Result<&'a Arc<Backend>, ()> {
    if ptr.is_null() {
        set_error("backend pointer is null");
        return Err(());
    }
    Ok(unsafe { &(*ptr).inner })
}

fn string_out(s: String) -> *mut c_char {
    match CString::new(s) {
        Ok(c) => {
            clear_error();
            c.into_raw()
        }
        Err(_) => {
            set_error("output contained an interior NUL byte");
            std::ptr::null_mut()
        }
    }
}

/// Releases a string returned by this library. `NULL` is ignored.
///
/// # Safety
/// `s` must come from a scorbit call that transfers string ownership.
#[no_mangle]
pub unsafe extern "C" fn scb_string_release(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Normal form of a word, rendered over the backend's generator names.
///
/// # Safety
/// `backend` must be a live handle and `word` a NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn scb_normal_form(
    backend: *const ScbBackend,
    word: *const c_char,
) -> *mut c_char {
    guarded(std::ptr::null_mut(), || {
        let (Ok(b), Ok(text)) =
            (unsafe { backend_arg(backend) }, unsafe { utf8_arg(word, "word") })
        else {
            return std::ptr::null_mut();
        };
        let result = b
            .presentation()
            .parse_word(text)
            .and_then(|w| b.normal_form(&w))
            .map(|nf| b.presentation().format_word(&nf));
        match result {
            Ok(s) => string_out(s),
            Err(e) => {
                set_error(e.to_string());
                std::ptr::null_mut()
            }
        }
    })
}

/// Word problem: `1` if the word is the identity, `0` if not, `-1` on error.
///
/// # Safety
/// `backend` must be a live handle and `word` a NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn scb_is_identity(backend: *const ScbBackend, word: *const c_char) -> i32 {
    guarded(-1, || {
        let (Ok(b), Ok(text)) =
            (unsafe { backend_arg(backend) }, unsafe { utf8_arg(word, "word") })
        else {
            return -1;
        };
        match b.presentation().parse_word(text).and_then(|w| b.is_identity(&w)) {
            Ok(answer) => {
                clear_error();
                i32::from(answer)
            }
            Err(e) => {
                set_error(e.to_string());
                -1
            }
        }
    })
}

fn decide(b: &Arc<Backend>, tuple_text: &str) -> scorbit::Result<orbit::OrbitVerdict> {
    let tuple = b.presentation().parse_tuple(tuple_text)?;
    orbit::orbit_decide(b, &tuple)
}

/// Membership of a comma-separated tuple in the orbit of the generating
/// tuple: `0` in orbit, `1` not, `2` unknown, `-1` error.
///
/// # Safety
/// `backend` must be a live handle and `tuple` a NUL-terminated UTF-8
/// string.
#[no_mangle]
pub unsafe extern "C" fn scb_orbit_decide(
    backend: *const ScbBackend,
    tuple: *const c_char,
) -> i32 {
    guarded(-1, || {
        let (Ok(b), Ok(text)) =
            (unsafe { backend_arg(backend) }, unsafe { utf8_arg(tuple, "tuple") })
        else {
            return -1;
        };
        match decide(b, text) {
            Ok(verdict) => {
                clear_error();
                match verdict.decision {
                    Decision::InOrbit => 0,
                    Decision::NotInOrbit => 1,
                    Decision::Unknown => 2,
                }
            }
            Err(e) => {
                set_error(e.to_string());
                -1
            }
        }
    })
}

/// Orbit decision with its certificate, as a JSON document.
///
/// # Safety
/// `backend` must be a live handle and `tuple` a NUL-terminated UTF-8
/// string.
#[no_mangle]
pub unsafe extern "C" fn scb_orbit_decide_json(
    backend: *const ScbBackend,
    tuple: *const c_char,
) -> *mut c_char {
    guarded(std::ptr::null_mut(), || {
        let (Ok(b), Ok(text)) =
            (unsafe { backend_arg(backend) }, unsafe { utf8_arg(tuple, "tuple") })
        else {
            return std::ptr::null_mut();
        };
        match decide(b, text) {
            Ok(verdict) => {
                let doc = serde_json::json!({
                    "schema_version": scorbit::SCHEMA_VERSION,
                    "verdict": verdict,
                });
                string_out(serde_json::to_string_pretty(&doc).expect("serializable"))
            }
            Err(e) => {
                set_error(e.to_string());
                std::ptr::null_mut()
            }
        }
    })
}

fn render_document(b: &Arc<Backend>, budget: u64, sentence: bool) -> scorbit::Result<String> {
    let mut stream = ThatStream::new(Arc::clone(b))?;
    if sentence {
        let f = scott::scott_sentence(&mut stream, budget)?;
        scott::render_sentence_document(&f)
    } else {
        let f = scott::theta_prefix(&mut stream, budget)?;
        scott::render_theta_document(b, &f)
    }
}

/// The orbit formula truncated at `budget`, as an S-expression document.
///
/// # Safety
/// `backend` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn scb_theta_sexp(backend: *const ScbBackend, budget: u64) -> *mut c_char {
    guarded(std::ptr::null_mut(), || {
        let Ok(b) = (unsafe { backend_arg(backend) }) else {
            return std::ptr::null_mut();
        };
        match render_document(b, budget, false) {
            Ok(s) => string_out(s),
            Err(e) => {
                set_error(e.to_string());
                std::ptr::null_mut()
            }
        }
    })
}

/// The two-part sentence truncated at `budget`, as an S-expression document.
///
/// # Safety
/// `backend` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn scb_scott_sentence_sexp(
    backend: *const ScbBackend,
    budget: u64,
) -> *mut c_char {
    guarded(std::ptr::null_mut(), || {
        let Ok(b) = (unsafe { backend_arg(backend) }) else {
            return std::ptr::null_mut();
        };
        match render_document(b, budget, true) {
            Ok(s) => string_out(s),
            Err(e) => {
                set_error(e.to_string());
                std::ptr::null_mut()
            }
        }
    })
}
