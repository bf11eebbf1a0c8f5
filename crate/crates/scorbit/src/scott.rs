//! The universal orbit formula, the two-part sentence built from it,
//! complexity classification, and a budgeted evaluator.
//!
//! The orbit formula for the generating tuple conjoins the relator
//! conditions with one universal exclusion per term tuple outside the
//! expressible set: no witness tuple may satisfy the relators and spell the
//! free variables through that term tuple. The excluded conjuncts stream in
//! enumeration order, so the formula is a lazily extended, prefix-monotone
//! conjunction.

use crate::backend::Backend;
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::terms::TermTuple;
use crate::tsets::ThatStream;
use crate::words::{runs, Word};
use serde::Serialize;
use std::fmt::Write as _;

/// A bound variable: display name plus its slot in the global index space
/// of the enclosing formula.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VarDecl {
    pub name: String,
    pub index: usize,
}

/// Provenance tag for a streamed item.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StreamTag {
    /// Position of the underlying term tuple in the base enumeration.
    pub base_index: u64,
    /// The term tuple indexing this item, when there is one.
    pub terms: Option<TermTuple>,
}

/// One materialized item of a computably enumerated connective.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StreamItem {
    pub tag: StreamTag,
    pub formula: Formula,
}

/// What generates a stream, recorded so emission is resumable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StreamKind {
    /// Conjuncts excluding the non-expressible term tuples.
    OrbitExclusion,
    /// Disjuncts asserting an element is spelled by some term.
    SpannedElement,
}

/// A computably enumerated list of formulas: the materialized prefix plus
/// the cursor (base tuples consumed) from which emission resumes.
/// Extensions never change the prefix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Stream {
    pub kind: StreamKind,
    pub cursor: u64,
    pub items: Vec<StreamItem>,
}

/// Formula AST over the group signature: term equations, finite and
/// streamed connectives, negation and quantifiers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Formula {
    /// `lhs = rhs`, both sides words over the variable index space.
    TermEq { lhs: Word, rhs: Word },
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Not(Box<Formula>),
    Forall { vars: Vec<VarDecl>, body: Box<Formula> },
    Exists { vars: Vec<VarDecl>, body: Box<Formula> },
    AndStream(Stream),
    OrStream(Stream),
}

/// Complexity classification.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FormulaClass {
    Sigma,
    Pi,
    DSigma,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ComplexityTag {
    pub class: FormulaClass,
    pub level: u32,
    pub computable: bool,
}

const UNBOUNDED: u32 = u32::MAX / 2;

/// `(sigma_level, pi_level)`: the least levels at which the formula is a
/// computable Sigma / Pi formula.
fn levels(f: &Formula) -> Result<(u32, u32)> {
    let (s, p) = match f {
        Formula::TermEq { .. } => (0, 0),
        Formula::Not(inner) => {
            let (s, p) = levels(inner)?;
            (p, s)
        }
        Formula::And(items) | Formula::Or(items) => {
            let mut s = 0;
            let mut p = 0;
            for i in items {
                let (is, ip) = levels(i)?;
                s = s.max(is);
                p = p.max(ip);
            }
            (s, p)
        }
        Formula::AndStream(stream) => {
            // a computably enumerated conjunction is Pi at the level of its
            // items (at least 1) and Sigma only one level higher
            let mut p = 1;
            for i in &stream.items {
                let (_, ip) = levels(&i.formula)?;
                p = p.max(ip.max(1));
            }
            (UNBOUNDED, p)
        }
        Formula::OrStream(stream) => {
            let mut s = 1;
            for i in &stream.items {
                let (is, _) = levels(&i.formula)?;
                s = s.max(is.max(1));
            }
            (s, UNBOUNDED)
        }
        Formula::Forall { body, .. } => {
            let (bs, bp) = levels(body)?;
            (UNBOUNDED, (bs + 1).min(bp.max(1)))
        }
        Formula::Exists { body, .. } => {
            let (bs, bp) = levels(body)?;
            ((bp + 1).min(bs.max(1)), UNBOUNDED)
        }
    };
    // a Pi_a formula is Sigma_(a+1) and vice versa
    Ok((s.min(p + 1), p.min(s + 1)))
}

/// Least complexity tag derivable from the shape. A top-level binary
/// conjunction of a proper Sigma and a proper Pi formula of the same level
/// classifies as d-Sigma of that level.
pub fn classify_formula(f: &Formula) -> Result<ComplexityTag> {
    validate(f)?;
    if let Formula::And(items) = f {
        if items.len() == 2 {
            let (s0, p0) = levels(&items[0])?;
            let (s1, p1) = levels(&items[1])?;
            if s0 < p0 && p1 < s1 && s0 == p1 {
                return Ok(ComplexityTag {
                    class: FormulaClass::DSigma,
                    level: s0,
                    computable: true,
                });
            }
        }
    }
    let (s, p) = levels(f)?;
    Ok(if p <= s {
        ComplexityTag { class: FormulaClass::Pi, level: p, computable: true }
    } else {
        ComplexityTag { class: FormulaClass::Sigma, level: s, computable: true }
    })
}

/// Structural well-formedness: bound variables must not shadow anything in
/// scope, and every variable is either bound or free.
pub fn validate(f: &Formula) -> Result<()> {
    fn walk(f: &Formula, bound: &mut Vec<usize>) -> Result<()> {
        match f {
            Formula::TermEq { .. } => Ok(()),
            Formula::And(items) | Formula::Or(items) => {
                items.iter().try_for_each(|i| walk(i, bound))
            }
            Formula::AndStream(s) | Formula::OrStream(s) => {
                s.items.iter().try_for_each(|i| walk(&i.formula, bound))
            }
            Formula::Not(inner) => walk(inner, bound),
            Formula::Forall { vars, body } | Formula::Exists { vars, body } => {
                for v in vars {
                    if bound.contains(&v.index) {
                        return Err(Error::MalformedFormula(format!(
                            "variable {} shadows an enclosing binding",
                            v.name
                        )));
                    }
                }
                let mark = bound.len();
                bound.extend(vars.iter().map(|v| v.index));
                walk(body, bound)?;
                bound.truncate(mark);
                Ok(())
            }
        }
    }
    walk(f, &mut Vec::new())
}

/// The relator conditions over variables at `offset..offset+rank`.
pub fn psi_formula(backend: &Backend, offset: usize) -> Formula {
    Formula::And(
        backend
            .presentation()
            .relators()
            .iter()
            .map(|r| Formula::TermEq { lhs: r.shift_indices(offset), rhs: Word::identity() })
            .collect(),
    )
}

fn exclusion_conjunct(backend: &Backend, terms: &TermTuple, base_index: u64) -> StreamItem {
    let n = backend.rank();
    let vars: Vec<VarDecl> =
        (0..n).map(|i| VarDecl { name: format!("y{}", i + 1), index: n + i }).collect();
    let mut inner = match psi_formula(backend, n) {
        Formula::And(items) => items,
        other => vec![other],
    };
    for (i, t) in terms.components().iter().enumerate() {
        inner.push(Formula::TermEq { lhs: Word::generator(i), rhs: t.shift_indices(n) });
    }
    StreamItem {
        tag: StreamTag { base_index, terms: Some(terms.clone()) },
        formula: Formula::Forall {
            vars,
            body: Box::new(Formula::Not(Box::new(Formula::And(inner)))),
        },
    }
}

/// The orbit formula truncated at `base_budget`: relator conditions on
/// `x1..xn` conjoined with one universal exclusion per non-expressible term
/// tuple among the first `base_budget` base tuples. Prefix-monotone in the
/// budget; conjunct order is enumeration order.
pub fn theta_prefix(stream: &mut ThatStream, base_budget: u64) -> Result<Formula> {
    let backend = stream.backend().clone();
    let members = stream.members_upto_base(base_budget)?;
    let items: Vec<StreamItem> = members
        .iter()
        .map(|e| exclusion_conjunct(&backend, &e.tuple, e.base_index))
        .collect();
    Ok(Formula::And(vec![
        psi_formula(&backend, 0),
        Formula::AndStream(Stream { kind: StreamKind::OrbitExclusion, cursor: base_budget, items }),
    ]))
}

/// The two-part sentence: an existential closure of the orbit formula,
/// conjoined with the assertion that every element is spelled by some term
/// at a relator-satisfying tuple. Both infinitary connectives stream to
/// `base_budget`.
pub fn scott_sentence(stream: &mut ThatStream, base_budget: u64) -> Result<Formula> {
    let backend = stream.backend().clone();
    let n = backend.rank();
    let theta = theta_prefix(stream, base_budget)?;
    let xs: Vec<VarDecl> =
        (0..n).map(|i| VarDecl { name: format!("x{}", i + 1), index: i }).collect();
    // the free x-variables of the orbit formula are captured here
    let sigma_part = Formula::Exists { vars: xs, body: Box::new(theta) };

    let mut disjuncts = Vec::new();
    let mut term_source = crate::terms::TermEnumerator::new(1, n);
    let mut consumed = 0u64;
    while consumed < base_budget {
        let Some(t) = term_source.next() else { break };
        let base_index = consumed;
        consumed += 1;
        let inner_xs: Vec<VarDecl> =
            (0..n).map(|i| VarDecl { name: format!("x{}", i + 1), index: 1 + i }).collect();
        let mut inner = match psi_formula(&backend, 1) {
            Formula::And(items) => items,
            other => vec![other],
        };
        inner.push(Formula::TermEq {
            lhs: Word::generator(0),
            rhs: t.components()[0].shift_indices(1),
        });
        disjuncts.push(StreamItem {
            tag: StreamTag { base_index, terms: Some(t.clone()) },
            formula: Formula::Exists { vars: inner_xs, body: Box::new(Formula::And(inner)) },
        });
    }
    let pi_part = Formula::Forall {
        vars: vec![VarDecl { name: "y1".into(), index: 0 }],
        body: Box::new(Formula::OrStream(Stream {
            kind: StreamKind::SpannedElement,
            cursor: consumed,
            items: disjuncts,
        })),
    };
    Ok(Formula::And(vec![sigma_part, pi_part]))
}

/// Evaluation outcome. `Holds` is exact; `HoldsSoFar` reports that no
/// falsification was found within the budget (no claim of truth);
/// `Falsified` is exact and carries a re-checkable certificate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Eval {
    Holds,
    HoldsSoFar,
    Unknown,
    Falsified(Falsification),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Falsification {
    /// Base index of the falsified conjunct, when inside a stream.
    pub conjunct: Option<u64>,
    /// Term tuple indexing the conjunct, when known.
    pub terms: Option<TermTuple>,
    /// Witness assignment for the bound variables.
    pub witness: Vec<Word>,
}

struct Evaluator<'b> {
    backend: &'b Backend,
    env: Vec<Option<Word>>,
    budget: Budget,
}

impl Evaluator<'_> {
    fn resolve(&self, w: &Word) -> Result<Word> {
        let mut args = Vec::with_capacity(self.env.len());
        for (idx, slot) in self.env.iter().enumerate() {
            match slot {
                Some(v) => args.push(v.clone()),
                None => {
                    if w.letters().iter().any(|&l| crate::words::letter_index(l) == idx) {
                        return Err(Error::UnboundVariable(format!("#{idx}")));
                    }
                    args.push(Word::identity());
                }
            }
        }
        if let Some(max) = w.max_index() {
            if max >= args.len() {
                return Err(Error::UnboundVariable(format!("#{max}")));
            }
        }
        Ok(w.substitute(&args))
    }

    fn bind(&mut self, vars: &[VarDecl], values: &[Word]) {
        for (v, w) in vars.iter().zip(values) {
            if self.env.len() <= v.index {
                self.env.resize(v.index + 1, None);
            }
            self.env[v.index] = Some(w.clone());
        }
    }

    fn unbind(&mut self, vars: &[VarDecl]) {
        for v in vars {
            self.env[v.index] = None;
        }
    }

    fn eval(&mut self, f: &Formula) -> Result<Eval> {
        match f {
            Formula::TermEq { lhs, rhs } => {
                let l = self.resolve(lhs)?;
                let r = self.resolve(rhs)?;
                Ok(if self.backend.words_equal(&l, &r)? {
                    Eval::Holds
                } else {
                    Eval::Falsified(Falsification {
                        conjunct: None,
                        terms: None,
                        witness: Vec::new(),
                    })
                })
            }
            Formula::Not(inner) => Ok(match self.eval(inner)? {
                Eval::Holds => Eval::Falsified(Falsification {
                    conjunct: None,
                    terms: None,
                    witness: Vec::new(),
                }),
                Eval::Falsified(_) => Eval::Holds,
                Eval::HoldsSoFar | Eval::Unknown => Eval::Unknown,
            }),
            Formula::And(items) => self.eval_conjunction(items.iter().map(|i| (None, i))),
            Formula::AndStream(stream) => self.eval_and_stream(stream),
            Formula::Or(items) => {
                if items.is_empty() {
                    // empty disjunction is false
                    return Ok(Eval::Falsified(Falsification {
                        conjunct: None,
                        terms: None,
                        witness: Vec::new(),
                    }));
                }
                let mut all_falsified = true;
                for i in items {
                    match self.eval(i)? {
                        Eval::Holds => return Ok(Eval::Holds),
                        Eval::Falsified(_) => {}
                        _ => all_falsified = false,
                    }
                }
                if all_falsified {
                    Ok(Eval::Falsified(Falsification {
                        conjunct: None,
                        terms: None,
                        witness: Vec::new(),
                    }))
                } else {
                    Ok(Eval::Unknown)
                }
            }
            Formula::OrStream(stream) => {
                for item in &stream.items {
                    if let Eval::Holds = self.eval(&item.formula)? {
                        return Ok(Eval::Holds);
                    }
                }
                // the stream may extend, so a missing witness refutes nothing
                Ok(Eval::Unknown)
            }
            Formula::Forall { vars, body } => self.eval_forall(vars, body),
            Formula::Exists { vars, body } => self.eval_exists(vars, body),
        }
    }

    fn eval_conjunction<'f>(
        &mut self,
        items: impl Iterator<Item = (Option<&'f StreamTag>, &'f Formula)>,
    ) -> Result<Eval> {
        let mut worst = Eval::Holds;
        for (tag, i) in items {
            match self.eval(i)? {
                Eval::Falsified(mut f) => {
                    if let Some(tag) = tag {
                        f.conjunct = Some(tag.base_index);
                        f.terms.clone_from(&tag.terms);
                    }
                    return Ok(Eval::Falsified(f));
                }
                Eval::Unknown => worst = Eval::Unknown,
                Eval::HoldsSoFar => {
                    if worst == Eval::Holds {
                        worst = Eval::HoldsSoFar;
                    }
                }
                Eval::Holds => {}
            }
        }
        Ok(worst)
    }

    /// Streamed conjunction in two rounds. Round one probes every conjunct
    /// against the generating tuple (the canonical witness), using the
    /// tagged terms when present; this costs time proportional to the
    /// materialized formula and runs under every budget. Round two gives
    /// each conjunct its own bounded witness search, after an obstruction
    /// check that marks unfalsifiable conjuncts as holding exactly.
    fn eval_and_stream(&mut self, stream: &Stream) -> Result<Eval> {
        let generators = self.backend.presentation().generator_tuple();
        let n = generators.len();
        // normal forms of the free-variable assignment (the tuple under test)
        let mut assigned_nf: Option<Vec<Word>> = None;
        if self.env.len() >= n && self.env[..n].iter().all(Option::is_some) {
            let mut nfs = Vec::with_capacity(n);
            for slot in &self.env[..n] {
                nfs.push(self.backend.normal_form(slot.as_ref().expect("checked"))?);
            }
            assigned_nf = Some(nfs);
        }
        for item in &stream.items {
            let Formula::Forall { vars, body } = &item.formula else { continue };
            if vars.len() != n {
                continue;
            }
            let falsifies = match (&item.tag.terms, &assigned_nf) {
                (Some(terms), Some(nfs)) => {
                    // the conjunct excludes exactly the tuples its terms
                    // evaluate to at the generators
                    let mut matches = true;
                    for (t, target) in terms.components().iter().zip(nfs) {
                        if &self.backend.normal_form(t)? != target {
                            matches = false;
                            break;
                        }
                    }
                    matches
                }
                _ => self.try_witness(vars, body, &generators)?.is_some(),
            };
            if falsifies {
                return Ok(Eval::Falsified(Falsification {
                    conjunct: Some(item.tag.base_index),
                    terms: item.tag.terms.clone(),
                    witness: generators.clone(),
                }));
            }
        }
        // a zero step cap disables the enumerative round entirely
        if self.budget.step_cap == 0 {
            return Ok(if stream.items.is_empty() { Eval::Holds } else { Eval::HoldsSoFar });
        }
        let mut worst = Eval::Holds;
        for item in &stream.items {
            let outcome = match &item.formula {
                Formula::Forall { vars, body } => {
                    if let Some((terms, targets)) = self.extract_constraints(vars, body)? {
                        if self.backend.witness_obstruction(&terms, &targets)? {
                            continue; // holds exactly: no witness can exist
                        }
                    }
                    self.eval_forall_scan(vars, body)?
                }
                other => self.eval(other)?,
            };
            match outcome {
                Eval::Falsified(mut f) => {
                    f.conjunct = Some(item.tag.base_index);
                    f.terms.clone_from(&item.tag.terms);
                    return Ok(Eval::Falsified(f));
                }
                Eval::Unknown => worst = Eval::Unknown,
                Eval::HoldsSoFar => {
                    if worst == Eval::Holds {
                        worst = Eval::HoldsSoFar;
                    }
                }
                Eval::Holds => {}
            }
        }
        Ok(worst)
    }

    /// Evaluates the body at a concrete witness; `Some` when the witness
    /// falsifies the enclosing universal.
    fn try_witness(
        &mut self,
        vars: &[VarDecl],
        body: &Formula,
        witness: &[Word],
    ) -> Result<Option<Falsification>> {
        self.bind(vars, witness);
        let outcome = self.eval(body);
        self.unbind(vars);
        Ok(match outcome? {
            Eval::Falsified(_) => Some(Falsification {
                conjunct: None,
                terms: None,
                witness: witness.to_vec(),
            }),
            _ => None,
        })
    }

    /// Extracts `term(bound vars) = constant` constraints from a body of
    /// shape `not(and(...))`, for sound obstruction pruning.
    fn extract_constraints(
        &self,
        vars: &[VarDecl],
        body: &Formula,
    ) -> Result<Option<(TermTuple, Vec<Word>)>> {
        let Formula::Not(inner) = body else { return Ok(None) };
        let Formula::And(items) = inner.as_ref() else { return Ok(None) };
        let Some(first) = vars.first().map(|v| v.index) else { return Ok(None) };
        let m = vars.len();
        if vars.iter().enumerate().any(|(k, v)| v.index != first + k) {
            return Ok(None);
        }
        let is_bound_only = |w: &Word| {
            w.letters().iter().all(|&l| {
                let i = crate::words::letter_index(l);
                i >= first && i < first + m
            })
        };
        let is_constant = |w: &Word, env: &[Option<Word>]| {
            w.letters().iter().all(|&l| {
                let i = crate::words::letter_index(l);
                i < env.len() && env[i].is_some()
            })
        };
        let mut terms = Vec::new();
        let mut targets = Vec::new();
        for item in items {
            let Formula::TermEq { lhs, rhs } = item else { return Ok(None) };
            let (bound_side, const_side) = if is_bound_only(lhs) && is_constant(rhs, &self.env) {
                (lhs, rhs)
            } else if is_bound_only(rhs) && is_constant(lhs, &self.env) {
                (rhs, lhs)
            } else {
                return Ok(None);
            };
            let reindexed = Word::from_letters(bound_side.letters().iter().map(|&l| {
                let i = crate::words::letter_index(l) - first;
                crate::words::letter(i, l > 0)
            }));
            terms.push(reindexed);
            targets.push(self.resolve(const_side)?);
        }
        Ok(Some((TermTuple::new(m, terms)?, targets)))
    }

    fn eval_forall(&mut self, vars: &[VarDecl], body: &Formula) -> Result<Eval> {
        // sound pruning: no witness can meet the extracted equations
        if let Some((terms, targets)) = self.extract_constraints(vars, body)? {
            if self.backend.witness_obstruction(&terms, &targets)? {
                return Ok(Eval::Holds);
            }
        }
        let generators = self.backend.presentation().generator_tuple();
        if vars.len() == generators.len() {
            if let Some(f) = self.try_witness(vars, body, &generators)? {
                return Ok(Eval::Falsified(f));
            }
        }
        self.eval_forall_scan(vars, body)
    }

    /// The enumerative witness search alone. The step cap bounds this
    /// quantifier's own enumeration, so no conjunct can starve another.
    fn eval_forall_scan(&mut self, vars: &[VarDecl], body: &Formula) -> Result<Eval> {
        let mut exhaustive = true;
        let mut all_exact = true;
        let mut steps = 0u64;
        let mut candidates = self.backend.element_tuples(vars.len())?;
        loop {
            let Some(candidate) = candidates.next() else { break };
            let total: usize = candidate.iter().map(Word::len).sum();
            if total > self.budget.element_length_cap {
                exhaustive = false;
                break;
            }
            steps += 1;
            if steps > self.budget.step_cap {
                return Ok(Eval::HoldsSoFar);
            }
            self.bind(vars, &candidate);
            let outcome = self.eval(body);
            self.unbind(vars);
            match outcome? {
                Eval::Falsified(_) => {
                    return Ok(Eval::Falsified(Falsification {
                        conjunct: None,
                        terms: None,
                        witness: candidate,
                    }));
                }
                Eval::Holds => {}
                _ => all_exact = false,
            }
        }
        if exhaustive && all_exact {
            // the scan covered the whole (finite) domain exactly
            Ok(Eval::Holds)
        } else {
            Ok(Eval::HoldsSoFar)
        }
    }

    fn eval_exists(&mut self, vars: &[VarDecl], body: &Formula) -> Result<Eval> {
        let mut exhaustive = true;
        let mut all_exact = true;
        let mut steps = 0u64;
        let mut candidates = self.backend.element_tuples(vars.len())?;
        loop {
            let Some(candidate) = candidates.next() else { break };
            let total: usize = candidate.iter().map(Word::len).sum();
            if total > self.budget.element_length_cap {
                exhaustive = false;
                break;
            }
            steps += 1;
            if steps > self.budget.step_cap {
                return Ok(Eval::Unknown);
            }
            self.bind(vars, &candidate);
            let outcome = self.eval(body);
            self.unbind(vars);
            match outcome? {
                Eval::Holds => return Ok(Eval::Holds),
                Eval::Falsified(_) => {}
                _ => all_exact = false,
            }
        }
        if exhaustive && all_exact {
            Ok(Eval::Falsified(Falsification {
                conjunct: None,
                terms: None,
                witness: Vec::new(),
            }))
        } else {
            Ok(Eval::Unknown)
        }
    }
}

/// Evaluates a formula at an assignment of the free variables. Finitary
/// parts are exact; `Falsified` outcomes are always exact and carry their
/// witness. The element length cap bounds which witnesses quantifier scans
/// consider and the step cap bounds each quantifier's enumeration
/// separately; obstruction pruning and the canonical-witness probes are
/// proportional to the materialized formula and run under every budget.
pub fn evaluate_bounded(
    f: &Formula,
    assignment: &[Word],
    backend: &Backend,
    budget: &Budget,
) -> Result<Eval> {
    validate(f)?;
    let mut evaluator = Evaluator {
        backend,
        env: assignment.iter().map(|w| Some(w.clone())).collect(),
        budget: *budget,
    };
    evaluator.eval(f)
}

// ---------------------------------------------------------------------------
// printing

fn render_word(w: &Word, names: &dyn Fn(usize) -> String, out: &mut String) {
    if w.is_identity() {
        out.push('e');
        return;
    }
    let rs = runs(w.letters());
    let render_factor = |(idx, exp): &(usize, i64), out: &mut String| {
        let name = names(*idx);
        if *exp == 1 {
            out.push_str(&name);
        } else if *exp == -1 {
            let _ = write!(out, "(inv {name})");
        } else {
            let _ = write!(out, "(pow {name} {exp})");
        }
    };
    if rs.len() == 1 {
        render_factor(&rs[0], out);
    } else {
        out.push_str("(* ");
        for (i, r) in rs.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            render_factor(r, out);
        }
        out.push(')');
    }
}

/// S-expression rendering with a deterministic layout: one streamed item
/// per line, two-space indentation.
pub fn render_sexp(f: &Formula, var_names: &dyn Fn(usize) -> String) -> String {
    let mut out = String::new();
    render_at(f, var_names, 0, &mut out);
    out
}

fn indent(depth: usize, out: &mut String) {
    out.push('\n');
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn render_at(f: &Formula, names: &dyn Fn(usize) -> String, depth: usize, out: &mut String) {
    match f {
        Formula::TermEq { lhs, rhs } => {
            out.push_str("(= ");
            render_word(lhs, names, out);
            out.push(' ');
            render_word(rhs, names, out);
            out.push(')');
        }
        Formula::And(items) => render_inline("and", items.iter(), names, depth, out),
        Formula::Or(items) => render_inline("or", items.iter(), names, depth, out),
        Formula::AndStream(s) => render_list(
            "cand",
            Some(s.cursor),
            s.items.iter().map(|i| &i.formula),
            names,
            depth,
            out,
        ),
        Formula::OrStream(s) => render_list(
            "cor",
            Some(s.cursor),
            s.items.iter().map(|i| &i.formula),
            names,
            depth,
            out,
        ),
        Formula::Not(inner) => {
            out.push_str("(not ");
            render_at(inner, names, depth, out);
            out.push(')');
        }
        Formula::Forall { vars, body } | Formula::Exists { vars, body } => {
            let head = if matches!(f, Formula::Forall { .. }) { "forall" } else { "exists" };
            let _ = write!(out, "({head} (");
            for (i, v) in vars.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                out.push_str(&v.name);
            }
            out.push_str(") ");
            let scoped: Vec<(usize, String)> =
                vars.iter().map(|v| (v.index, v.name.clone())).collect();
            let inner_names = move |idx: usize| -> String {
                scoped
                    .iter()
                    .find(|(i, _)| *i == idx)
                    .map(|(_, n)| n.clone())
                    .unwrap_or_else(|| names(idx))
            };
            render_at(body, &inner_names, depth, out);
            out.push(')');
        }
    }
}

fn render_list<'f>(
    head: &str,
    cursor: Option<u64>,
    items: impl ExactSizeIterator<Item = &'f Formula>,
    names: &dyn Fn(usize) -> String,
    depth: usize,
    out: &mut String,
) {
    out.push('(');
    out.push_str(head);
    if let Some(c) = cursor {
        let _ = write!(out, " :cursor {c}");
    }
    if items.len() == 0 {
        out.push(')');
        return;
    }
    for item in items {
        indent(depth + 1, out);
        render_at(item, names, depth + 1, out);
    }
    out.push(')');
}

/// Finite connectives render on one line; only streams break.
fn render_inline<'f>(
    head: &str,
    items: impl Iterator<Item = &'f Formula>,
    names: &dyn Fn(usize) -> String,
    depth: usize,
    out: &mut String,
) {
    out.push('(');
    out.push_str(head);
    for item in items {
        out.push(' ');
        render_at(item, names, depth, out);
    }
    out.push(')');
}

/// Default display names: `x1..` for the first `n_free` indices.
pub fn free_var_names(n_free: usize) -> impl Fn(usize) -> String {
    move |idx| {
        if idx < n_free {
            format!("x{}", idx + 1)
        } else {
            format!("v{}", idx + 1)
        }
    }
}

/// Self-describing document for the orbit formula.
pub fn render_theta_document(backend: &Backend, f: &Formula) -> Result<String> {
    let tag = classify_formula(f)?;
    let body = render_sexp(f, &free_var_names(backend.rank()));
    Ok(format!(
        "(theta :class {} :computable {}\n  {})\n",
        render_tag(&tag),
        tag.computable,
        reindent(&body, 1)
    ))
}

/// Self-describing document for the two-part sentence.
pub fn render_sentence_document(f: &Formula) -> Result<String> {
    let tag = classify_formula(f)?;
    let body = render_sexp(f, &free_var_names(0));
    Ok(format!(
        "(sentence :class {} :computable {}\n  {})\n",
        render_tag(&tag),
        tag.computable,
        reindent(&body, 1)
    ))
}

fn render_tag(tag: &ComplexityTag) -> String {
    match tag.class {
        FormulaClass::Sigma => format!("(sigma {})", tag.level),
        FormulaClass::Pi => format!("(pi {})", tag.level),
        FormulaClass::DSigma => format!("(d-sigma {})", tag.level),
    }
}

fn reindent(s: &str, by: usize) -> String {
    let pad = "  ".repeat(by);
    s.replace('\n', &format!("\n{pad}"))
}

/// JSON rendering of a formula with the schema version attached.
pub fn render_json(f: &Formula) -> Result<String> {
    let tag = classify_formula(f)?;
    let doc = serde_json::json!({
        "schema_version": crate::SCHEMA_VERSION,
        "class": tag,
        "formula": f,
    });
    serde_json::to_string_pretty(&doc)
        .map_err(|e| Error::Unsupported(format!("json rendering failed: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn z_stream() -> ThatStream {
        ThatStream::new(Backend::free_abelian(1).unwrap().into_shared()).unwrap()
    }

    #[test]
    fn theta_prefix_zero_budget_is_psi() {
        let mut s = z_stream();
        let f = theta_prefix(&mut s, 0).unwrap();
        let Formula::And(items) = &f else { panic!() };
        assert!(matches!(&items[1], Formula::AndStream(st) if st.items.is_empty()));
    }

    #[test]
    fn theta_prefix_z_first_conjuncts() {
        let mut s = z_stream();
        let f = theta_prefix(&mut s, 16).unwrap();
        let Formula::And(items) = &f else { panic!() };
        let Formula::AndStream(stream) = &items[1] else { panic!() };
        // first excluded tuples: the identity term and the square
        let t0 = stream.items[0].tag.terms.as_ref().unwrap();
        assert_eq!(t0, &TermTuple::new(1, vec![Word::identity()]).unwrap());
        let t1 = stream.items[1].tag.terms.as_ref().unwrap();
        assert_eq!(t1, &TermTuple::new(1, vec![Word::generator(0).pow(2)]).unwrap());
    }

    #[test]
    fn classification_examples() {
        let backend = Backend::free_abelian(1).unwrap().into_shared();
        let psi = psi_formula(&backend, 0);
        let tag = classify_formula(&psi).unwrap();
        assert_eq!((tag.class, tag.level), (FormulaClass::Pi, 0));

        let mut s = ThatStream::new(Arc::clone(&backend)).unwrap();
        let theta = theta_prefix(&mut s, 16).unwrap();
        let tag = classify_formula(&theta).unwrap();
        assert_eq!((tag.class, tag.level), (FormulaClass::Pi, 1));

        let sentence = scott_sentence(&mut s, 16).unwrap();
        let tag = classify_formula(&sentence).unwrap();
        assert_eq!((tag.class, tag.level), (FormulaClass::DSigma, 2));
        assert!(tag.computable);
    }

    #[test]
    fn classification_stable_under_extension() {
        let backend = Backend::free_abelian(1).unwrap().into_shared();
        let mut s = ThatStream::new(backend).unwrap();
        let small = theta_prefix(&mut s, 4).unwrap();
        let large = theta_prefix(&mut s, 64).unwrap();
        assert_eq!(classify_formula(&small).unwrap(), classify_formula(&large).unwrap());
    }

    #[test]
    fn evaluate_falsifies_square() {
        let backend = Backend::free_abelian(1).unwrap().into_shared();
        let mut s = ThatStream::new(Arc::clone(&backend)).unwrap();
        let theta = theta_prefix(&mut s, 16).unwrap();
        let a2 = backend.presentation().parse_word("a^2").unwrap();
        let out = evaluate_bounded(&theta, &[a2], &backend, &Budget::exploring(64)).unwrap();
        let Eval::Falsified(f) = out else { panic!("expected falsification, got {out:?}") };
        assert_eq!(f.terms, Some(TermTuple::new(1, vec![Word::generator(0).pow(2)]).unwrap()));
        assert_eq!(f.witness, vec![Word::generator(0)]);
    }

    #[test]
    fn evaluate_holds_for_generator_and_inverse() {
        let backend = Backend::free_abelian(1).unwrap().into_shared();
        let mut s = ThatStream::new(Arc::clone(&backend)).unwrap();
        let theta = theta_prefix(&mut s, 32).unwrap();
        for text in ["a", "a^-1"] {
            let w = backend.presentation().parse_word(text).unwrap();
            let out = evaluate_bounded(&theta, &[w], &backend, &Budget::exploring(64)).unwrap();
            assert!(
                matches!(out, Eval::Holds | Eval::HoldsSoFar),
                "{text} unexpectedly {out:?}"
            );
        }
    }

    #[test]
    fn evaluate_exact_on_psi_at_generators() {
        let p = crate::presentation::Presentation::parse("< a, b | a^2, b^3, a*b*a*b >").unwrap();
        let backend = Backend::finite_from_presentation(p, 100).unwrap();
        let psi = psi_formula(&backend, 0);
        let gens = backend.presentation().generator_tuple();
        let out = evaluate_bounded(&psi, &gens, &backend, &Budget::exploring(64)).unwrap();
        assert_eq!(out, Eval::Holds);
    }

    #[test]
    fn sexp_rendering_shapes() {
        let backend = Backend::free_abelian(1).unwrap().into_shared();
        let mut s = ThatStream::new(Arc::clone(&backend)).unwrap();
        let theta = theta_prefix(&mut s, 4).unwrap();
        let text = render_sexp(&theta, &free_var_names(1));
        assert!(text.contains("(cand :cursor 4"), "{text}");
        assert!(text.contains("(forall (y1) (not (and (= x1 e))))"), "{text}");
        let doc = render_theta_document(&backend, &theta).unwrap();
        assert!(doc.starts_with("(theta :class (pi 1) :computable true"), "{doc}");
    }

    #[test]
    fn validate_rejects_shadowing() {
        let g = Formula::Forall {
            vars: vec![VarDecl { name: "y1".into(), index: 0 }],
            body: Box::new(Formula::Exists {
                vars: vec![VarDecl { name: "z1".into(), index: 0 }],
                body: Box::new(Formula::TermEq {
                    lhs: Word::generator(0),
                    rhs: Word::identity(),
                }),
            }),
        };
        assert!(validate(&g).is_err());
    }

    #[test]
    fn prefix_monotone_formula() {
        let backend = Backend::free_abelian(1).unwrap().into_shared();
        let mut s = ThatStream::new(backend).unwrap();
        let small = theta_prefix(&mut s, 8).unwrap();
        let large = theta_prefix(&mut s, 32).unwrap();
        let Formula::And(small_items) = &small else { panic!() };
        let Formula::And(large_items) = &large else { panic!() };
        let (Formula::AndStream(ss), Formula::AndStream(ls)) = (&small_items[1], &large_items[1])
        else {
            panic!()
        };
        assert_eq!(&ls.items[..ss.items.len()], &ss.items[..]);
    }
}
