//! Command-line surface. Every invocation is deterministic: identical
//! arguments produce identical bytes.
//!
//! Exit codes: 0 success (or positive decision), 1 negative decision,
//! 2 unknown / budget exhausted, 64 usage error.

use crate::backend::{rewrite::KbCaps, Backend};
use crate::budget::{Budget, SemiOutcome};
use crate::error::{Error, Result};
use crate::morphism::{self, endo_from_tuple, Endomorphism};
use crate::orbit::{self, Decision};
use crate::presentation::Presentation;
use crate::scott;
use crate::terms::TermTuple;
use crate::tsets::{self, ThatStream};
use crate::words::Word;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::io::Write;
use std::sync::Arc;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(
    name = "scorbit",
    about = "Orbit deciders, term-set enumeration and orbit-formula emission for finitely presented groups",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BackendChoice {
    Free,
    Abelian,
    Dihedral,
    Coset,
    Rewrite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Sexp,
}

#[derive(Args, Debug, Clone)]
struct BackendArgs {
    /// Backend kind.
    #[arg(long, value_enum)]
    backend: BackendChoice,
    /// Rank for the free and abelian backends.
    #[arg(long)]
    rank: Option<usize>,
    /// Inline presentation text, e.g. "< a, b | a^2, b^3, a*b*a*b >".
    #[arg(long)]
    present: Option<String>,
    /// Path to a file holding the presentation text.
    #[arg(long)]
    presentation: Option<String>,
    /// Coset cap for the coset backend.
    #[arg(long, default_value_t = 10_000)]
    coset_cap: usize,
    /// Path to a rewrite-rule file, one `lhs -> rhs` per line.
    #[arg(long)]
    rules: Option<String>,
    /// Caps for completion on the rewrite backend.
    #[arg(long, default_value_t = 512)]
    kb_max_rules: usize,
    #[arg(long, default_value_t = 20_000)]
    kb_max_steps: usize,
    /// Assert that the rewriting backend presents a Hopfian group.
    #[arg(long, default_value_t = false)]
    assert_hopfian: bool,
}

#[derive(Args, Debug, Clone)]
struct BudgetArgs {
    /// Uniform search budget (length caps and step cap).
    #[arg(long, default_value_t = 4096)]
    budget: u64,
}

impl BudgetArgs {
    fn to_budget(&self) -> Budget {
        Budget::exploring(self.budget)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a presentation and echo it back.
    Parse {
        /// Presentation text; reads the file given with --file when absent.
        text: Option<String>,
        #[arg(long)]
        file: Option<String>,
        #[arg(long, default_value_t = false)]
        json: bool,
    },
    /// Word problem: is the word the identity?
    Wp {
        #[command(flatten)]
        backend: BackendArgs,
        word: String,
    },
    /// Normal form of a word.
    Nf {
        #[command(flatten)]
        backend: BackendArgs,
        word: String,
    },
    /// First elements in normal-form order.
    Elements {
        #[command(flatten)]
        backend: BackendArgs,
        #[arg(long, default_value_t = 20)]
        count: usize,
    },
    /// Endomorphism operations.
    Endo {
        #[command(subcommand)]
        op: EndoOp,
    },
    /// Term-set operations.
    Tset {
        #[command(subcommand)]
        op: TsetOp,
    },
    /// Orbit membership of a tuple.
    Orbit {
        #[command(subcommand)]
        op: OrbitOp,
    },
    /// Orbit formula and sentence emission.
    Scott {
        #[command(subcommand)]
        op: ScottOp,
    },
    /// Positive-existential preservation probes.
    Etypes {
        #[command(subcommand)]
        op: EtypesOp,
    },
    /// Runs the full acceptance suite and prints a pass/fail table.
    OracleCheck {
        /// Only run criteria whose name contains this substring.
        #[arg(long)]
        filter: Option<String>,
    },
    /// Reads one invocation per line and runs them in order.
    Batch {
        #[arg(long)]
        file: String,
    },
}

#[derive(Subcommand, Debug)]
enum EndoOp {
    /// Apply the endomorphism given by --images to a word.
    Apply {
        #[command(flatten)]
        backend: BackendArgs,
        #[arg(long)]
        images: String,
        word: String,
    },
    /// Search for terms expressing every generator from the images.
    Surjective {
        #[command(flatten)]
        backend: BackendArgs,
        #[arg(long)]
        images: String,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Search for a left inverse.
    LeftInverse {
        #[command(flatten)]
        backend: BackendArgs,
        #[arg(long)]
        images: String,
        #[command(flatten)]
        budget: BudgetArgs,
    },
}

#[derive(Subcommand, Debug)]
enum TsetOp {
    /// Enumerate term tuples expressing the tuple, as JSON lines.
    Enum {
        #[command(flatten)]
        backend: BackendArgs,
        #[arg(long)]
        tuple: String,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Bounded membership: do the terms express the tuple?
    Member {
        #[command(flatten)]
        backend: BackendArgs,
        #[arg(long)]
        tuple: String,
        /// Terms over x1..xk, comma separated.
        #[arg(long)]
        terms: String,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Stream the complement of the expressible set of the generators.
    That {
        #[command(flatten)]
        backend: BackendArgs,
        #[command(flatten)]
        budget: BudgetArgs,
    },
}

#[derive(Subcommand, Debug)]
enum OrbitOp {
    /// Decide membership in the orbit of the generating tuple.
    Decide {
        #[command(flatten)]
        backend: BackendArgs,
        #[arg(long)]
        tuple: Option<String>,
        /// Exponent matrix rows, e.g. "2 0; 0 1" (abelian backends).
        #[arg(long)]
        matrix: Option<String>,
        #[arg(long, default_value_t = false)]
        json: bool,
    },
    /// Positive semi-decider.
    SemiYes {
        #[command(flatten)]
        backend: BackendArgs,
        #[arg(long)]
        tuple: String,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long, default_value_t = false)]
        json: bool,
    },
    /// Negative semi-decider.
    SemiNo {
        #[command(flatten)]
        backend: BackendArgs,
        #[arg(long)]
        tuple: String,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long, default_value_t = false)]
        json: bool,
    },
}

#[derive(Subcommand, Debug)]
enum ScottOp {
    /// Emit the orbit formula truncated at the budget.
    Theta {
        #[command(flatten)]
        backend: BackendArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long, value_enum, default_value_t = Format::Sexp)]
        format: Format,
    },
    /// Emit the two-part sentence truncated at the budget.
    Sentence {
        #[command(flatten)]
        backend: BackendArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long, value_enum, default_value_t = Format::Sexp)]
        format: Format,
    },
}

#[derive(Subcommand, Debug)]
enum EtypesOp {
    /// Dichotomy probe over sampled endomorphisms.
    Probe {
        #[command(flatten)]
        backend: BackendArgs,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Image length cap for sampling.
        #[arg(long, default_value_t = 4)]
        length_cap: usize,
    },
}

fn build_backend(args: &BackendArgs) -> Result<Arc<Backend>> {
    let presentation = || -> Result<Presentation> {
        if let Some(text) = &args.present {
            return Presentation::parse(text);
        }
        if let Some(path) = &args.presentation {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Unsupported(format!("cannot read {path}: {e}")))?;
            return Presentation::parse(text.trim());
        }
        Err(Error::Unsupported(
            "this backend needs --present or --presentation".into(),
        ))
    };
    let backend = match args.backend {
        BackendChoice::Free => Backend::free_group(
            args.rank.ok_or_else(|| Error::Unsupported("--rank is required".into()))?,
        )?,
        BackendChoice::Abelian => Backend::free_abelian(
            args.rank.ok_or_else(|| Error::Unsupported("--rank is required".into()))?,
        )?,
        BackendChoice::Dihedral => Backend::infinite_dihedral(),
        BackendChoice::Coset => Backend::finite_from_presentation(presentation()?, args.coset_cap)?,
        BackendChoice::Rewrite => {
            let p = presentation()?;
            match &args.rules {
                Some(path) => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| Error::Unsupported(format!("cannot read {path}: {e}")))?;
                    let rules = parse_rule_file(&p, &text)?;
                    Backend::rewriting_from_rules(p, rules, args.assert_hopfian)?
                }
                None => Backend::rewriting_from_presentation(
                    p,
                    KbCaps { max_rules: args.kb_max_rules, max_steps: args.kb_max_steps },
                    args.assert_hopfian,
                ),
            }
        }
    };
    Ok(backend.into_shared())
}

fn parse_rule_file(p: &Presentation, text: &str) -> Result<Vec<(Word, Word)>> {
    let mut rules = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((lhs, rhs)) = line.split_once("->") else {
            return Err(Error::Parse {
                line: i + 1,
                col: 1,
                msg: "expected `lhs -> rhs`".into(),
            });
        };
        rules.push((p.parse_word(lhs.trim())?, p.parse_word(rhs.trim())?));
    }
    Ok(rules)
}

fn parse_tuple(backend: &Backend, text: &str) -> Result<Vec<Word>> {
    backend.presentation().parse_tuple(text)
}

/// Terms over variables `x1..xk`.
fn parse_terms(text: &str, k: usize) -> Result<TermTuple> {
    let names: Vec<String> = (1..=k).map(|i| format!("x{i}")).collect();
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let comps = crate::presentation::split_top_level(text)
        .iter()
        .map(|part| crate::presentation::parse_word_over(part, &name_refs))
        .collect::<Result<Vec<_>>>()?;
    TermTuple::new(k, comps)
}

fn matrix_tuple(backend: &Backend, text: &str) -> Result<Vec<Word>> {
    let mut tuple = Vec::new();
    for row in text.split(';') {
        let mut w = Word::identity();
        for (j, entry) in row.split_whitespace().enumerate() {
            let e: i64 = entry
                .parse()
                .map_err(|_| Error::Unsupported(format!("bad matrix entry `{entry}`")))?;
            if j >= backend.rank() {
                return Err(Error::ArityMismatch { expected: backend.rank(), got: j + 1 });
            }
            w = w.concat(&Word::generator(j).pow(e));
        }
        tuple.push(w);
    }
    Ok(tuple)
}

fn endo_from_args(backend: &Arc<Backend>, images: &str) -> Result<Endomorphism> {
    let tuple = parse_tuple(backend, images)?;
    endo_from_tuple(backend, tuple)
}

fn format_tuple(backend: &Backend, tuple: &[Word]) -> String {
    tuple
        .iter()
        .map(|w| backend.presentation().format_word(w))
        .collect::<Vec<_>>()
        .join(", ")
}

fn format_terms(t: &TermTuple) -> String {
    let names: Vec<String> = (1..=t.arity_in()).map(|i| format!("x{i}")).collect();
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    t.components()
        .iter()
        .map(|w| crate::presentation::format_word_over(w, &name_refs))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Runs one invocation, writing its output to `out` and diagnostics to
/// `err`. Returns the exit code.
pub fn run(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut argv = vec!["scorbit".to_string()];
    argv.extend(args.iter().cloned());
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            let _ = write!(err, "{e}");
            return EXIT_USAGE;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let w = |out: &mut dyn Write, s: String| {
        let _ = writeln!(out, "{s}");
    };
    match cmd {
        Command::Parse { text, file, json } => {
            let source = match (text, file) {
                (Some(t), _) => t,
                (None, Some(path)) => std::fs::read_to_string(&path)
                    .map_err(|e| Error::Unsupported(format!("cannot read {path}: {e}")))?,
                (None, None) => {
                    return Err(Error::Unsupported("parse needs TEXT or --file".into()))
                }
            };
            let p = Presentation::parse(source.trim())?;
            if json {
                let doc = serde_json::json!({
                    "schema_version": crate::SCHEMA_VERSION,
                    "presentation": p,
                });
                w(out, serde_json::to_string_pretty(&doc).expect("serializable"));
            } else {
                w(out, p.to_string());
            }
            Ok(EXIT_OK)
        }
        Command::Wp { backend, word } => {
            let b = build_backend(&backend)?;
            let parsed = b.presentation().parse_word(&word)?;
            if b.is_identity(&parsed)? {
                w(out, "Identity".into());
                Ok(EXIT_OK)
            } else {
                w(out, "NotIdentity".into());
                Ok(EXIT_NEGATIVE)
            }
        }
        Command::Nf { backend, word } => {
            let b = build_backend(&backend)?;
            let parsed = b.presentation().parse_word(&word)?;
            let nf = b.normal_form(&parsed)?;
            w(out, b.presentation().format_word(&nf));
            Ok(EXIT_OK)
        }
        Command::Elements { backend, count } => {
            let b = build_backend(&backend)?;
            for e in b.elements()?.take(count) {
                w(out, b.presentation().format_word(&e));
            }
            Ok(EXIT_OK)
        }
        Command::Endo { op } => match op {
            EndoOp::Apply { backend, images, word } => {
                let b = build_backend(&backend)?;
                let e = endo_from_args(&b, &images)?;
                let parsed = b.presentation().parse_word(&word)?;
                w(out, b.presentation().format_word(&e.apply(&parsed)?));
                Ok(EXIT_OK)
            }
            EndoOp::Surjective { backend, images, budget } => {
                let b = build_backend(&backend)?;
                let e = endo_from_args(&b, &images)?;
                match morphism::surjectivity_semi(&e, &budget.to_budget())? {
                    SemiOutcome::Yes(terms) => {
                        w(out, format!("Yes: {}", format_terms(&terms)));
                        Ok(EXIT_OK)
                    }
                    SemiOutcome::Unknown => {
                        w(out, "Unknown".into());
                        Ok(EXIT_UNKNOWN)
                    }
                }
            }
            EndoOp::LeftInverse { backend, images, budget } => {
                let b = build_backend(&backend)?;
                let e = endo_from_args(&b, &images)?;
                match morphism::left_inverse_semi(&e, &budget.to_budget())? {
                    SemiOutcome::Yes(g) => {
                        w(out, format!("Yes: {}", format_tuple(&b, g.images())));
                        Ok(EXIT_OK)
                    }
                    SemiOutcome::Unknown => {
                        w(out, "Unknown".into());
                        Ok(EXIT_UNKNOWN)
                    }
                }
            }
        },
        Command::Tset { op } => match op {
            TsetOp::Enum { backend, tuple, budget } => {
                let b = build_backend(&backend)?;
                let target = parse_tuple(&b, &tuple)?;
                let mut e = tsets::TSetEnumerator::new(&b, &target)?;
                for (terms, witness) in e.run(budget.budget)? {
                    let doc = serde_json::json!({
                        "schema_version": crate::SCHEMA_VERSION,
                        "terms": terms,
                        "witness": witness,
                        "display": format_terms(&terms),
                    });
                    w(out, serde_json::to_string(&doc).expect("serializable"));
                }
                w(out, format!("# steps={} emitted={} digest={:016x}", e.steps(), e.emitted_count(), e.digest()));
                Ok(EXIT_OK)
            }
            TsetOp::Member { backend, tuple, terms, budget } => {
                let b = build_backend(&backend)?;
                let target = parse_tuple(&b, &tuple)?;
                let t = parse_terms(&terms, b.rank())?;
                match tsets::member_t_semi(&b, &t, &target, &budget.to_budget())? {
                    SemiOutcome::Yes(witness) => {
                        w(out, format!("Yes: witness {}", format_tuple(&b, &witness)));
                        Ok(EXIT_OK)
                    }
                    SemiOutcome::Unknown => {
                        w(out, "Unknown".into());
                        Ok(EXIT_UNKNOWN)
                    }
                }
            }
            TsetOp::That { backend, budget } => {
                let b = build_backend(&backend)?;
                for t in tsets::enumerate_that(&b, budget.budget)? {
                    let doc = serde_json::json!({
                        "schema_version": crate::SCHEMA_VERSION,
                        "terms": t,
                        "display": format_terms(&t),
                    });
                    w(out, serde_json::to_string(&doc).expect("serializable"));
                }
                Ok(EXIT_OK)
            }
        },
        Command::Orbit { op } => match op {
            OrbitOp::Decide { backend, tuple, matrix, json } => {
                let b = build_backend(&backend)?;
                let t = match (tuple, matrix) {
                    (Some(t), _) => parse_tuple(&b, &t)?,
                    (None, Some(m)) => matrix_tuple(&b, &m)?,
                    (None, None) => {
                        return Err(Error::Unsupported("decide needs --tuple or --matrix".into()))
                    }
                };
                let verdict = orbit::orbit_decide(&b, &t)?;
                if json {
                    let doc = serde_json::json!({
                        "schema_version": crate::SCHEMA_VERSION,
                        "verdict": verdict,
                    });
                    w(out, serde_json::to_string_pretty(&doc).expect("serializable"));
                } else {
                    let suffix = match &verdict.certificate {
                        Some(orbit::OrbitCertificate::Determinant { det }) => format!(" det={det}"),
                        Some(orbit::OrbitCertificate::NielsenStuck { abelian_det, .. }) => {
                            format!(" det={abelian_det}")
                        }
                        _ => String::new(),
                    };
                    w(out, format!("{:?}{suffix}", verdict.decision));
                }
                Ok(match verdict.decision {
                    Decision::InOrbit => EXIT_OK,
                    Decision::NotInOrbit => EXIT_NEGATIVE,
                    Decision::Unknown => EXIT_UNKNOWN,
                })
            }
            OrbitOp::SemiYes { backend, tuple, budget, json } => {
                let b = build_backend(&backend)?;
                let t = parse_tuple(&b, &tuple)?;
                match orbit::orbit_semi_yes(&b, &t, &budget.to_budget())? {
                    SemiOutcome::Yes(cert) => {
                        if json {
                            let doc = serde_json::json!({
                                "schema_version": crate::SCHEMA_VERSION,
                                "certificate": cert,
                            });
                            w(out, serde_json::to_string_pretty(&doc).expect("serializable"));
                        } else {
                            w(out, format!("Yes: terms {}", format_terms(&cert.terms)));
                        }
                        Ok(EXIT_OK)
                    }
                    SemiOutcome::Unknown => {
                        w(out, "Unknown".into());
                        Ok(EXIT_UNKNOWN)
                    }
                }
            }
            OrbitOp::SemiNo { backend, tuple, budget, json } => {
                let b = build_backend(&backend)?;
                let t = parse_tuple(&b, &tuple)?;
                match orbit::orbit_semi_no(&b, &t, &budget.to_budget())? {
                    SemiOutcome::Yes(cert) => {
                        if json {
                            let doc = serde_json::json!({
                                "schema_version": crate::SCHEMA_VERSION,
                                "certificate": cert,
                            });
                            w(out, serde_json::to_string_pretty(&doc).expect("serializable"));
                        } else {
                            w(out, format!("Yes: {cert:?}"));
                        }
                        Ok(EXIT_OK)
                    }
                    SemiOutcome::Unknown => {
                        w(out, "Unknown".into());
                        Ok(EXIT_UNKNOWN)
                    }
                }
            }
        },
        Command::Scott { op } => match op {
            ScottOp::Theta { backend, budget, format } => {
                let b = build_backend(&backend)?;
                let mut stream = ThatStream::new(Arc::clone(&b))?;
                let theta = scott::theta_prefix(&mut stream, budget.budget)?;
                let rendered = match format {
                    Format::Sexp => scott::render_theta_document(&b, &theta)?,
                    Format::Json => scott::render_json(&theta)? + "\n",
                    Format::Text => scott::render_theta_document(&b, &theta)?,
                };
                let _ = write!(out, "{rendered}");
                Ok(EXIT_OK)
            }
            ScottOp::Sentence { backend, budget, format } => {
                let b = build_backend(&backend)?;
                let mut stream = ThatStream::new(Arc::clone(&b))?;
                let sentence = scott::scott_sentence(&mut stream, budget.budget)?;
                let rendered = match format {
                    Format::Sexp => scott::render_sentence_document(&sentence)?,
                    Format::Json => scott::render_json(&sentence)? + "\n",
                    Format::Text => scott::render_sentence_document(&sentence)?,
                };
                let _ = write!(out, "{rendered}");
                Ok(EXIT_OK)
            }
        },
        Command::Etypes { op } => match op {
            EtypesOp::Probe { backend, samples, seed, length_cap } => {
                let b = build_backend(&backend)?;
                let report = crate::etypes::strongly_defined_probe(&b, samples, seed, length_cap)?;
                let doc = serde_json::json!({
                    "schema_version": crate::SCHEMA_VERSION,
                    "report": report,
                    "passed": report.passed(),
                });
                w(out, serde_json::to_string_pretty(&doc).expect("serializable"));
                Ok(if report.passed() { EXIT_OK } else { EXIT_NEGATIVE })
            }
        },
        Command::OracleCheck { filter } => {
            let outcomes = crate::acceptance::run_all(filter.as_deref());
            let mut all_passed = true;
            for o in &outcomes {
                all_passed &= o.passed;
                w(
                    out,
                    format!(
                        "[{}] {:<44} {:>8} ms  {}",
                        if o.passed { "PASS" } else { "FAIL" },
                        o.name,
                        o.millis,
                        o.details
                    ),
                );
            }
            if outcomes.is_empty() {
                w(out, "no criteria matched the filter".into());
            }
            Ok(if all_passed { EXIT_OK } else { EXIT_NEGATIVE })
        }
        Command::Batch { file } => {
            let text = std::fs::read_to_string(&file)
                .map_err(|e| Error::Unsupported(format!("cannot read {file}: {e}")))?;
            let mut worst = EXIT_OK;
            for line in text.lines() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let args: Vec<String> = shell_split(line);
                let _ = writeln!(out, "$ {line}");
                let code = run(&args, out, err);
                worst = worst.max(code);
            }
            Ok(worst)
        }
    }
}

/// Minimal whitespace splitter honoring double quotes.
fn shell_split(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    for c in line.chars() {
        match c {
            '"' => quoted = !quoted,
            c if c.is_whitespace() && !quoted => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}
