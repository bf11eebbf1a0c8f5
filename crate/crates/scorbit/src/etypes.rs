//! Probes for preservation of positive existential conditions by self-maps.
//!
//! A violation witnesses a positive existential condition (a finite system
//! of term equations, possibly with existential variables) that holds at
//! the image tuple but provably fails at the generators; it shows the
//! self-map is not an embedding for the positive existential fragment.
//! Violations require an exact refutation at the generators: exhaustion on
//! finite backends, the abelianized obstruction where it applies, or
//! membership of the indexing terms in the complement stream (which goes
//! through the orbit decider).

use crate::backend::Backend;
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::morphism::{endo_from_tuple, Endomorphism};
use crate::orbit;
use crate::scott::{self, Falsification, Formula, VarDecl};
use crate::terms::TermTuple;
use crate::tsets::{self, ThatStream};
use crate::words::{Word, WordEnumerator};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::sync::Arc;

/// How the failure at the generators was established.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum RefutationEvidence {
    /// Every candidate witness in the finite domain fails.
    FiniteExhaustion,
    /// The abelianized equation system has no integer solution.
    AbelianObstruction,
    /// The indexing term tuple lies outside the expressible set of the
    /// generators (checked through the orbit decider).
    ComplementMembership(TermTuple),
}

/// A positive existential condition true at the images, refuted at the
/// generators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExistsPlusViolation {
    /// Equations `w = 1`, each a word over `n_params + n_existential`
    /// variables (parameters first).
    pub equations: Vec<Word>,
    pub n_params: usize,
    pub n_existential: usize,
    /// Witness for the existential variables at the image side.
    pub image_witness: Vec<Word>,
    pub evidence: RefutationEvidence,
}

impl ExistsPlusViolation {
    /// The condition as a formula over free variables `x1..xn`.
    pub fn formula(&self) -> Formula {
        let eqs: Vec<Formula> = self
            .equations
            .iter()
            .map(|w| Formula::TermEq { lhs: w.clone(), rhs: Word::identity() })
            .collect();
        if self.n_existential == 0 {
            return Formula::And(eqs);
        }
        let vars: Vec<VarDecl> = (0..self.n_existential)
            .map(|i| VarDecl { name: format!("y{}", i + 1), index: self.n_params + i })
            .collect();
        Formula::Exists { vars, body: Box::new(Formula::And(eqs)) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum ProbeOutcome {
    /// No violation among the candidates examined.
    NoViolation { depth: u64 },
    Violation(ExistsPlusViolation),
}

/// Substitutes concrete words for the first `n_params` variables, keeping
/// the `n_existential` trailing variables in place. The result mixes group
/// letters (below `n_params`) with variable letters (at `n_params..`);
/// [`ground`] turns it into a plain group word.
fn substitute_with_params(
    equation: &Word,
    params: &[Word],
    n_params: usize,
    n_existential: usize,
) -> Word {
    let mut args: Vec<Word> = params.to_vec();
    for i in 0..n_existential {
        args.push(Word::generator(n_params + i));
    }
    equation.substitute(&args)
}

/// Substitutes a witness for the trailing existential variables of a mixed
/// word.
fn ground(mixed: &Word, n_params: usize, witness: &[Word]) -> Word {
    let mut args: Vec<Word> = (0..n_params).map(Word::generator).collect();
    args.extend(witness.iter().cloned());
    mixed.substitute(&args)
}

/// Splits a mixed equation `w = 1` into the variable part (shifted down to
/// `0..n_existential`) and the constant target it must hit, valid at the
/// abelianized level.
fn split_mixed(mixed: &Word, n_params: usize) -> (Word, Word) {
    let mut var_letters = Vec::new();
    let mut const_letters = Vec::new();
    for &l in mixed.letters() {
        let idx = crate::words::letter_index(l);
        if idx >= n_params {
            var_letters.push(crate::words::letter(idx - n_params, l > 0));
        } else {
            const_letters.push(l);
        }
    }
    let vars = Word::from_letters(var_letters);
    let target = Word::from_letters(const_letters).inverse();
    (vars, target)
}

/// Does any witness solve every equation (parameters already substituted)?
fn solvable_at(
    backend: &Backend,
    equations: &[Word],
    n_params: usize,
    n_existential: usize,
    budget: &Budget,
    steps: &mut u64,
) -> Result<Option<Vec<Word>>> {
    if n_existential == 0 {
        for eq in equations {
            if !backend.is_identity(eq)? {
                return Ok(None);
            }
        }
        return Ok(Some(Vec::new()));
    }
    for candidate in backend.element_tuples(n_existential)? {
        let total: usize = candidate.iter().map(Word::len).sum();
        if total > budget.element_length_cap {
            break;
        }
        *steps += 1;
        if *steps > budget.step_cap {
            break;
        }
        let mut all = true;
        for eq in equations {
            if !backend.is_identity(&ground(eq, n_params, &candidate))? {
                all = false;
                break;
            }
        }
        if all {
            return Ok(Some(candidate));
        }
    }
    Ok(None)
}

/// Exact refutation of solvability at the generators; `Some(evidence)`
/// proves that no witness exists.
fn refute_at_generators(
    backend: &Backend,
    equations: &[Word],
    n_params: usize,
    n_existential: usize,
) -> Result<Option<RefutationEvidence>> {
    if n_existential == 0 {
        for eq in equations {
            if !backend.is_identity(eq)? {
                // quantifier-free: failure is its own exhaustive refutation
                return Ok(Some(RefutationEvidence::FiniteExhaustion));
            }
        }
        return Ok(None);
    }
    if backend.order().is_some() {
        for candidate in backend.element_tuples(n_existential)? {
            let mut all = true;
            for eq in equations {
                if !backend.is_identity(&ground(eq, n_params, &candidate))? {
                    all = false;
                    break;
                }
            }
            if all {
                return Ok(None);
            }
        }
        return Ok(Some(RefutationEvidence::FiniteExhaustion));
    }
    // infinite backends: abelianized obstruction, sound everywhere and
    // exact on free abelian
    let mut rows = Vec::with_capacity(equations.len());
    let mut targets = Vec::with_capacity(equations.len());
    for eq in equations {
        let (vars, target) = split_mixed(eq, n_params);
        rows.push(vars);
        targets.push(target);
    }
    let terms = TermTuple::new(n_existential, rows)?;
    if backend.witness_obstruction(&terms, &targets)? {
        return Ok(Some(RefutationEvidence::AbelianObstruction));
    }
    Ok(None)
}

/// Searches bounded systems of term equations for a positive existential
/// condition solvable at the images but refuted at the generators. The
/// candidate space is single equations over the parameters and up to two
/// existential variables, scanned in enumeration order.
pub fn exists_plus_probe(e: &Endomorphism, budget: &Budget) -> Result<ProbeOutcome> {
    if !e.validated() {
        return Err(Error::UnvalidatedEndomorphism);
    }
    let backend = e.backend().as_ref();
    let n = backend.rank();
    let generators = backend.presentation().generator_tuple();
    let mut steps = 0u64;
    let mut depth = 0u64;
    for n_existential in 0..=2usize {
        for candidate in WordEnumerator::new(n + n_existential) {
            if candidate.len() > budget.term_length_cap {
                break;
            }
            steps += 1;
            depth += 1;
            if steps > budget.step_cap {
                return Ok(ProbeOutcome::NoViolation { depth });
            }
            if candidate.is_identity() {
                continue;
            }
            let at_images = substitute_with_params(&candidate, e.images(), n, n_existential);
            let Some(witness) =
                solvable_at(backend, &[at_images], n, n_existential, budget, &mut steps)?
            else {
                continue;
            };
            let at_gens = substitute_with_params(&candidate, &generators, n, n_existential);
            if let Some(evidence) = refute_at_generators(backend, &[at_gens], n, n_existential)? {
                return Ok(ProbeOutcome::Violation(ExistsPlusViolation {
                    equations: vec![candidate],
                    n_params: n,
                    n_existential,
                    image_witness: witness,
                    evidence,
                }));
            }
        }
    }
    Ok(ProbeOutcome::NoViolation { depth })
}

/// Re-checks a violation against an endomorphism: both sides under the word
/// oracle.
pub fn verify_violation(e: &Endomorphism, v: &ExistsPlusViolation) -> Result<bool> {
    let backend = e.backend().as_ref();
    if v.image_witness.len() != v.n_existential {
        return Ok(false);
    }
    for eq in &v.equations {
        let at_images = substitute_with_params(eq, e.images(), v.n_params, v.n_existential);
        let grounded = ground(&at_images, v.n_params, &v.image_witness);
        if !backend.is_identity(&grounded)? {
            return Ok(false);
        }
    }
    let generators = backend.presentation().generator_tuple();
    match &v.evidence {
        RefutationEvidence::ComplementMembership(terms) => {
            Ok(!tsets::member_t_decide(backend, terms)?)
        }
        _ => {
            let at_gens: Vec<Word> = v
                .equations
                .iter()
                .map(|eq| substitute_with_params(eq, &generators, v.n_params, v.n_existential))
                .collect();
            Ok(refute_at_generators(backend, &at_gens, v.n_params, v.n_existential)?.is_some())
        }
    }
}

/// Outcome of checking a self-map against the orbit formula.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum EmbeddingCheck {
    ConsistentWithAut,
    RefutedByTheta { falsification: Falsification, violation: ExistsPlusViolation },
}

/// Evaluates the orbit formula at the image tuple. A falsified exclusion
/// conjunct converts directly into a positive existential violation: the
/// conjunct's terms with their witness hold at the images, while membership
/// of the terms in the complement refutes them at the generators.
pub fn theta_check_embedding(
    e: &Endomorphism,
    stream: &mut ThatStream,
    base_budget: u64,
    eval_budget: &Budget,
) -> Result<EmbeddingCheck> {
    if !e.validated() {
        return Err(Error::UnvalidatedEndomorphism);
    }
    let backend = e.backend().as_ref();
    let theta = scott::theta_prefix(stream, base_budget)?;
    match scott::evaluate_bounded(&theta, e.images(), backend, eval_budget)? {
        scott::Eval::Falsified(f) => {
            // equations: relators on the existential variables, plus
            // x_i^-1 * t_i(y) = 1
            let violation = falsification_to_violation(backend, &f)?;
            debug_assert!(verify_violation(e, &violation)?);
            Ok(EmbeddingCheck::RefutedByTheta { falsification: f, violation })
        }
        _ => Ok(EmbeddingCheck::ConsistentWithAut),
    }
}

/// A self-map tracked with the depth up to which preservation has been
/// probed. The depth only grows, and a recorded violation is never
/// retracted.
pub struct EmbeddingCandidate {
    pub endo: Endomorphism,
    pub checked_depth: u64,
    pub violation: Option<ExistsPlusViolation>,
}

impl EmbeddingCandidate {
    pub fn new(endo: Endomorphism) -> EmbeddingCandidate {
        EmbeddingCandidate { endo, checked_depth: 0, violation: None }
    }

    /// Extends the probe to a larger budget.
    pub fn extend_check(&mut self, budget: &Budget) -> Result<()> {
        if self.violation.is_some() {
            return Ok(());
        }
        match exists_plus_probe(&self.endo, budget)? {
            ProbeOutcome::NoViolation { depth } => {
                self.checked_depth = self.checked_depth.max(depth);
            }
            ProbeOutcome::Violation(v) => self.violation = Some(v),
        }
        Ok(())
    }

    pub fn invalid(&self) -> bool {
        self.violation.is_some()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DichotomyReport {
    pub samples: usize,
    pub automorphic: usize,
    pub refuted: usize,
    /// Image tuples for which neither branch of the dichotomy landed.
    pub failures: Vec<Vec<Word>>,
}

impl DichotomyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Base-term budget whose prefix contains every tuple of total length at
/// most `max_total`.
pub fn base_budget_covering(n: usize, k: usize, max_total: usize) -> u64 {
    let mut count = 0u64;
    for t in crate::terms::TermEnumerator::new(n, k) {
        if t.total_len() > max_total {
            break;
        }
        count += 1;
    }
    count
}

/// Checks the dichotomy on every supplied image tuple: each validated
/// endomorphism is either refuted through the orbit formula or lands in the
/// orbit of the generators. Anything else is reported as a failure.
///
/// Samples are grouped by total image length so each group shares one
/// formula prefix sized to contain the terms spelling its tuples.
pub fn dichotomy_over(
    backend: &Arc<Backend>,
    image_tuples: impl IntoIterator<Item = Vec<Word>>,
) -> Result<DichotomyReport> {
    let mut stream = ThatStream::new(Arc::clone(backend))?;
    let mut report =
        DichotomyReport { samples: 0, automorphic: 0, refuted: 0, failures: Vec::new() };
    let eval_budget =
        Budget { term_length_cap: 0, element_length_cap: backend.rank(), step_cap: 4096 };
    let mut by_total: std::collections::BTreeMap<usize, Vec<Endomorphism>> =
        std::collections::BTreeMap::new();
    for images in image_tuples {
        let e = match endo_from_tuple(backend, images.clone()) {
            Ok(e) => e,
            Err(Error::NotAHomomorphism { .. }) => continue,
            Err(other) => return Err(other),
        };
        report.samples += 1;
        if orbit::orbit_decide(backend, e.images())?.decision == orbit::Decision::InOrbit {
            report.automorphic += 1;
            continue;
        }
        let total: usize = images.iter().map(Word::len).sum();
        by_total.entry(total).or_default().push(e);
    }
    for (total, endos) in by_total {
        let base_budget = base_budget_covering(backend.rank(), backend.rank(), total);
        let theta = scott::theta_prefix(&mut stream, base_budget)?;
        for e in endos {
            match scott::evaluate_bounded(&theta, e.images(), backend, &eval_budget)? {
                scott::Eval::Falsified(f) => {
                    let violation = falsification_to_violation(backend, &f)?;
                    if verify_violation(&e, &violation)? {
                        report.refuted += 1;
                    } else {
                        report.failures.push(e.images().to_vec());
                    }
                }
                _ => report.failures.push(e.images().to_vec()),
            }
        }
    }
    Ok(report)
}

fn falsification_to_violation(
    backend: &Backend,
    f: &Falsification,
) -> Result<ExistsPlusViolation> {
    let terms = f
        .terms
        .clone()
        .ok_or_else(|| Error::MalformedFormula("falsification without terms".into()))?;
    let n = backend.rank();
    let mut equations: Vec<Word> =
        backend.presentation().relators().iter().map(|r| r.shift_indices(n)).collect();
    for (i, t) in terms.components().iter().enumerate() {
        equations.push(Word::generator(i).inverse().concat(&t.shift_indices(n)));
    }
    Ok(ExistsPlusViolation {
        equations,
        n_params: n,
        n_existential: n,
        image_witness: f.witness.clone(),
        evidence: RefutationEvidence::ComplementMembership(terms),
    })
}

/// Samples seeded random validated endomorphisms (images of length at most
/// `length_cap`) and runs the dichotomy check on them.
pub fn strongly_defined_probe(
    backend: &Arc<Backend>,
    samples: usize,
    seed: u64,
    length_cap: usize,
) -> Result<DichotomyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rank = backend.rank();
    let mut tuples = Vec::with_capacity(samples);
    let mut attempts = 0usize;
    while tuples.len() < samples && attempts < samples.saturating_mul(100) {
        attempts += 1;
        let tuple: Vec<Word> =
            (0..rank).map(|_| random_reduced_word(&mut rng, rank, length_cap)).collect();
        if backend.satisfies_own_relators(&tuple)? {
            tuples.push(tuple);
        }
    }
    dichotomy_over(backend, tuples)
}

/// Exhaustive dichotomy over every image tuple of a finite backend.
pub fn strongly_defined_exhaustive(backend: &Arc<Backend>) -> Result<DichotomyReport> {
    if backend.order().is_none() {
        return Err(Error::Unsupported("exhaustive probing needs a finite backend".into()));
    }
    let tuples: Vec<Vec<Word>> = backend.element_tuples(backend.rank())?.collect();
    dichotomy_over(backend, tuples)
}

fn random_reduced_word(rng: &mut ChaCha8Rng, rank: usize, length_cap: usize) -> Word {
    let len = rng.random_range(0..=length_cap);
    let mut letters: Vec<i32> = Vec::with_capacity(len);
    for _ in 0..len {
        loop {
            let idx = rng.random_range(0..rank);
            let positive = rng.random_bool(0.5);
            let l = crate::words::letter(idx, positive);
            if letters.last().is_some_and(|&p| p == -l) {
                continue;
            }
            letters.push(l);
            break;
        }
    }
    Word::from_reduced(letters)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_no_violation() {
        let b = Backend::free_group(2).unwrap().into_shared();
        let id = Endomorphism::identity(&b);
        let out = exists_plus_probe(&id, &Budget::new(3, 4, 20_000)).unwrap();
        assert!(matches!(out, ProbeOutcome::NoViolation { .. }));
    }

    #[test]
    fn squaring_on_z_is_violated() {
        let b = Backend::free_abelian(1).unwrap().into_shared();
        let p = b.presentation().clone();
        let e = endo_from_tuple(&b, vec![p.parse_word("a^2").unwrap()]).unwrap();
        let out = exists_plus_probe(&e, &Budget::new(4, 6, 100_000)).unwrap();
        let ProbeOutcome::Violation(v) = out else { panic!("expected a violation, got {out:?}") };
        assert!(verify_violation(&e, &v).unwrap());
    }

    #[test]
    fn s3_automorphisms_have_no_violation() {
        let p = crate::presentation::Presentation::parse("< a, b | a^2, b^3, a*b*a*b >").unwrap();
        let b = Backend::finite_from_presentation(p, 100).unwrap().into_shared();
        let sp = b.presentation().clone();
        let e = endo_from_tuple(
            &b,
            vec![sp.parse_word("a").unwrap(), sp.parse_word("b^2").unwrap()],
        )
        .unwrap();
        let out = exists_plus_probe(&e, &Budget::new(3, 12, 200_000)).unwrap();
        assert!(matches!(out, ProbeOutcome::NoViolation { .. }), "{out:?}");
    }

    #[test]
    fn theta_check_refutes_squaring() {
        let b = Backend::free_abelian(1).unwrap().into_shared();
        let p = b.presentation().clone();
        let e = endo_from_tuple(&b, vec![p.parse_word("a^2").unwrap()]).unwrap();
        let mut stream = ThatStream::new(Arc::clone(&b)).unwrap();
        let out = theta_check_embedding(&e, &mut stream, 16, &Budget::exploring(64)).unwrap();
        let EmbeddingCheck::RefutedByTheta { violation, .. } = out else {
            panic!("squaring must be refuted")
        };
        assert!(verify_violation(&e, &violation).unwrap());
    }

    #[test]
    fn theta_check_consistent_for_swap() {
        let b = Backend::free_group(2).unwrap().into_shared();
        let p = b.presentation().clone();
        let e = endo_from_tuple(&b, vec![p.parse_word("y").unwrap(), p.parse_word("x").unwrap()])
            .unwrap();
        let mut stream = ThatStream::new(Arc::clone(&b)).unwrap();
        let out = theta_check_embedding(&e, &mut stream, 64, &Budget::exploring(64)).unwrap();
        assert!(matches!(out, EmbeddingCheck::ConsistentWithAut));
    }

    #[test]
    fn dichotomy_z_powers() {
        let b = Backend::free_abelian(1).unwrap().into_shared();
        let tuples: Vec<Vec<Word>> =
            (-16i64..=16).map(|k| vec![Word::generator(0).pow(k)]).collect();
        let report = dichotomy_over(&b, tuples).unwrap();
        assert!(report.passed(), "failures: {:?}", report.failures);
        assert_eq!(report.automorphic, 2); // a and a^-1
        assert_eq!(report.refuted, 31);
    }

    #[test]
    fn dichotomy_exhaustive_s3() {
        let p = crate::presentation::Presentation::parse("< a, b | a^2, b^3, a*b*a*b >").unwrap();
        let b = Backend::finite_from_presentation(p, 100).unwrap().into_shared();
        let report = strongly_defined_exhaustive(&b).unwrap();
        assert!(report.passed(), "failures: {:?}", report.failures);
        assert_eq!(report.automorphic, 6);
        // 10 endomorphisms of S3: the trivial one, three collapsing onto a
        // subgroup of order 2, six automorphisms
        assert_eq!(report.samples, 10);
        assert_eq!(report.refuted, 4);
    }

    #[test]
    fn dichotomy_sampled_f2() {
        let b = Backend::free_group(2).unwrap().into_shared();
        let report = strongly_defined_probe(&b, 50, 7, 3).unwrap();
        assert!(report.passed(), "failures: {:?}", report.failures);
        assert_eq!(report.samples, 50);
    }
}
