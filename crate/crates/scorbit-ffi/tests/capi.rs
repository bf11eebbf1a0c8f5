//! Exercises the C ABI through the exported symbols, plus a consistency
//! check between the header and the exported function set.

use scorbit_ffi::*;
use std::ffi::{CStr, CString};

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take_string(ptr: *mut std::ffi::c_char) -> String {
    assert!(!ptr.is_null(), "unexpected null string");
    let out = CStr::from_ptr(ptr).to_str().unwrap().to_string();
    scb_string_release(ptr);
    out
}

#[test]
fn version_reports() {
    let v = unsafe { CStr::from_ptr(scb_version()) }.to_str().unwrap();
    assert!(!v.is_empty());
}

#[test]
fn free_group_orbit_round_trip() {
    let b = scb_backend_free_group(2);
    assert!(!b.is_null());
    unsafe {
        assert_eq!(scb_orbit_decide(b, c("y, x").as_ptr()), 0);
        assert_eq!(scb_orbit_decide(b, c("x^2, y").as_ptr()), 1);
        let json = take_string(scb_orbit_decide_json(b, c("x^2, y").as_ptr()));
        let doc: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(doc["verdict"]["decision"], "NotInOrbit");
        scb_backend_release(b);
    }
}

#[test]
fn dihedral_normal_forms() {
    let b = scb_backend_dihedral();
    unsafe {
        let nf = take_string(scb_normal_form(b, c("s*r").as_ptr()));
        assert_eq!(nf, "r^-1*s");
        assert_eq!(scb_is_identity(b, c("s*s").as_ptr()), 1);
        assert_eq!(scb_is_identity(b, c("r*s").as_ptr()), 0);
        scb_backend_release(b);
    }
}

#[test]
fn finite_backend_and_errors() {
    let p = c("< a, b | a^2, b^3, a*b*a*b >");
    let b = unsafe { scb_backend_finite(p.as_ptr(), 100) };
    assert!(!b.is_null());
    unsafe {
        assert_eq!(scb_orbit_decide(b, c("a, b^2").as_ptr()), 0);
        assert_eq!(scb_orbit_decide(b, c("a, a").as_ptr()), 1);
        // undeclared generator surfaces as an error with a message
        assert_eq!(scb_orbit_decide(b, c("q, b").as_ptr()), -1);
        let msg = CStr::from_ptr(scb_last_error()).to_str().unwrap();
        assert!(msg.contains("undeclared"), "{msg}");
        scb_backend_release(b);
    }

    // a failed constructor returns NULL and sets the error
    let bad = unsafe { scb_backend_finite(c("< a | >").as_ptr(), 10) };
    assert!(bad.is_null());
    let msg = unsafe { CStr::from_ptr(scb_last_error()) }.to_str().unwrap();
    assert!(msg.contains("overflowed"), "{msg}");
}

#[test]
fn rewriting_backend_through_abi() {
    let p = c("< r, s | s^2, s*r*s*r >");
    let b = unsafe { scb_backend_rewriting(p.as_ptr(), 64, 10_000, 1) };
    assert!(!b.is_null());
    unsafe {
        let nf = take_string(scb_normal_form(b, c("s*r*s").as_ptr()));
        assert_eq!(nf, "r^-1");
        scb_backend_release(b);
    }
}

#[test]
fn theta_document_through_abi() {
    let b = scb_backend_free_abelian(1);
    unsafe {
        let doc = take_string(scb_theta_sexp(b, 16));
        assert!(doc.starts_with("(theta :class (pi 1)"), "{doc}");
        let doc = take_string(scb_scott_sentence_sexp(b, 16));
        assert!(doc.starts_with("(sentence :class (d-sigma 2)"), "{doc}");
        scb_backend_release(b);
    }
}

#[test]
fn null_arguments_are_rejected() {
    unsafe {
        assert_eq!(scb_orbit_decide(std::ptr::null(), c("x").as_ptr()), -1);
        let b = scb_backend_free_group(1);
        assert_eq!(scb_is_identity(b, std::ptr::null()), -1);
        scb_backend_release(b);
        scb_backend_release(std::ptr::null_mut());
        scb_string_release(std::ptr::null_mut());
    }
}

/// Every exported `scb_` function appears in the header and vice versa.
#[test]
fn header_matches_exports() {
    let src = include_str!("../src/lib.rs");
    let header = include_str!("../include/scorbit.h");
    let names_in = |text: &str| -> std::collections::BTreeSet<String> {
        let mut names = std::collections::BTreeSet::new();
        let mut rest = text;
        while let Some(pos) = rest.find("scb_") {
            let tail = &rest[pos..];
            let end = tail
                .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_'))
                .unwrap_or(tail.len());
            names.insert(tail[..end].to_string());
            rest = &tail[end..];
        }
        names
    };
    let exported: std::collections::BTreeSet<String> = src
        .lines()
        .zip(src.lines().skip(1).chain(std::iter::once("")))
        .filter(|(l, _)| l.contains("#[no_mangle]"))
        .filter_map(|(_, sig_line)| names_in(sig_line).into_iter().next())
        .collect();
    // the header must declare exactly the exported set
    let declared = names_in(header);
    assert!(!exported.is_empty());
    assert_eq!(exported, declared, "header out of sync with exports");
}
