//! End-to-end checks of the command-line surface: file inputs, JSON
//! schemas, batch mode and exit codes.

use scorbit::cli::{run, EXIT_NEGATIVE, EXIT_OK, EXIT_UNKNOWN, EXIT_USAGE};

fn invoke(args: &[&str]) -> (i32, String, String) {
    let argv: Vec<String> = args.iter().map(|s| s.to_string()).collect();
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(&argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn tempdir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("scorbit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn parse_round_trip_and_json() {
    let (code, out, _) = invoke(&["parse", "< a, b | a^2, b^3 >"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.trim(), "< a, b | a^2, b^3 >");

    let (code, out, _) = invoke(&["parse", "--json", "< a | a*a^-1 >"]);
    assert_eq!(code, EXIT_OK);
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["schema_version"], "1");
    assert_eq!(doc["presentation"]["generators"][0], "a");
    assert_eq!(doc["presentation"]["relators"].as_array().unwrap().len(), 0);
}

#[test]
fn presentation_from_file() {
    let dir = tempdir();
    let path = dir.join("p.txt");
    std::fs::write(&path, "< a, b | a^2, b^3, a*b*a*b >\n").unwrap();
    let (code, out, _) = invoke(&[
        "wp",
        "--backend",
        "coset",
        "--presentation",
        path.to_str().unwrap(),
        "b^3",
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.trim(), "Identity");
}

#[test]
fn coset_cap_overflow_reports_usage_error() {
    let (code, _, err) =
        invoke(&["wp", "--backend", "coset", "--present", "< a | >", "--coset-cap", "10", "a"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("overflowed"), "{err}");
}

#[test]
fn rewrite_rules_from_file() {
    let dir = tempdir();
    let path = dir.join("rules.txt");
    std::fs::write(
        &path,
        "# dihedral normal forms\ns*r -> r^-1*s\ns*r^-1 -> r*s\ns*s -> 1\ns^-1 -> s\n",
    )
    .unwrap();
    let (code, out, _) = invoke(&[
        "nf",
        "--backend",
        "rewrite",
        "--present",
        "< r, s | >",
        "--rules",
        path.to_str().unwrap(),
        "s*r*s",
    ]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert_eq!(out.trim(), "r^-1");
}

#[test]
fn rewrite_backend_via_completion() {
    let (code, out, _) = invoke(&[
        "nf",
        "--backend",
        "rewrite",
        "--present",
        "< r, s | s^2, s*r*s*r >",
        "s*r",
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.trim(), "r^-1*s");
}

#[test]
fn elements_listing() {
    let (code, out, _) = invoke(&[
        "elements",
        "--backend",
        "coset",
        "--present",
        "< a, b | a^2, b^3, a*b*a*b >",
        "--count",
        "10",
    ]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 6, "S3 has exactly six elements: {out}");
    assert_eq!(lines[0], "1");
}

#[test]
fn endo_surfaces() {
    let (code, out, _) = invoke(&[
        "endo", "apply", "--backend", "free", "--rank", "2", "--images", "y, x", "x*y^-1",
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.trim(), "y*x^-1");

    let (code, out, _) = invoke(&[
        "endo", "surjective", "--backend", "free", "--rank", "2", "--images", "x*y, y",
        "--budget", "64",
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("Yes:"), "{out}");

    let (code, out, _) = invoke(&[
        "endo", "surjective", "--backend", "free", "--rank", "2", "--images", "x^2, y",
        "--budget", "64",
    ]);
    assert_eq!(code, EXIT_UNKNOWN);
    assert_eq!(out.trim(), "Unknown");

    let (code, out, _) = invoke(&[
        "endo", "left-inverse", "--backend", "free", "--rank", "2", "--images", "y, x",
        "--budget", "64",
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("Yes:"), "{out}");
}

#[test]
fn tset_surfaces_emit_json_lines() {
    let (code, out, _) = invoke(&[
        "tset", "enum", "--backend", "abelian", "--rank", "1", "--tuple", "a^2", "--budget",
        "400",
    ]);
    assert_eq!(code, EXIT_OK);
    let mut found_square = false;
    for line in out.lines().filter(|l| !l.starts_with('#')) {
        let doc: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(doc["schema_version"], "1");
        if doc["display"] == "x1^2" {
            found_square = true;
        }
    }
    assert!(found_square, "{out}");

    let (code, out, _) = invoke(&[
        "tset", "member", "--backend", "abelian", "--rank", "1", "--tuple", "a^2", "--terms",
        "x1^2", "--budget", "64",
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("witness a"), "{out}");

    let (code, out, _) = invoke(&[
        "tset", "that", "--backend", "free", "--rank", "1", "--budget", "8",
    ]);
    assert_eq!(code, EXIT_OK);
    // the single-letter terms never appear in the complement
    assert!(!out.contains("\"display\":\"x1\""), "{out}");
}

#[test]
fn orbit_semi_surfaces() {
    let (code, out, _) = invoke(&[
        "orbit", "semi-no", "--backend", "abelian", "--rank", "1", "--tuple", "a^2", "--json",
    ]);
    assert_eq!(code, EXIT_OK);
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(doc["certificate"]["ComplementConjunct"].is_object(), "{out}");

    let (code, _, _) = invoke(&[
        "orbit", "semi-no", "--backend", "abelian", "--rank", "1", "--tuple", "a",
    ]);
    assert_eq!(code, EXIT_UNKNOWN);

    let (code, out, _) = invoke(&[
        "orbit", "decide", "--backend", "coset", "--present",
        "< a, b | a^2, b^3, a*b*a*b >", "--tuple", "a, a",
    ]);
    assert_eq!(code, EXIT_NEGATIVE);
    assert!(out.contains("NotInOrbit"), "{out}");
}

#[test]
fn scott_json_format() {
    let (code, out, _) = invoke(&[
        "scott", "theta", "--backend", "abelian", "--rank", "1", "--budget", "8", "--format",
        "json",
    ]);
    assert_eq!(code, EXIT_OK);
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["schema_version"], "1");
    assert_eq!(doc["class"]["class"], "Pi");
    assert_eq!(doc["class"]["level"], 1);
}

#[test]
fn etypes_probe_report() {
    let (code, out, _) = invoke(&[
        "etypes", "probe", "--backend", "abelian", "--rank", "1", "--samples", "12", "--seed",
        "3", "--length-cap", "3",
    ]);
    assert_eq!(code, EXIT_OK, "{out}");
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["passed"], true);
    assert_eq!(doc["report"]["samples"], 12);
}

#[test]
fn batch_mode_runs_lines_in_order() {
    let dir = tempdir();
    let path = dir.join("batch.txt");
    std::fs::write(
        &path,
        "# two queries\nnf --backend dihedral \"s*r\"\norbit decide --backend free --rank 2 --tuple \"y, x\"\n",
    )
    .unwrap();
    let (code, out, _) = invoke(&["batch", "--file", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{out}");
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "$ nf --backend dihedral \"s*r\"");
    assert_eq!(lines[1], "r^-1*s");
    assert_eq!(lines[3], "InOrbit");
}

#[test]
fn oracle_check_filter_smoke() {
    let (code, out, _) = invoke(&["oracle-check", "--filter", "free-abelian"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.contains("[PASS] free-abelian decider"), "{out}");
}
