//! Expressible term-sets and their complements, as resumable enumerators,
//! plus the generic dovetail combinator.
//!
//! For a tuple `b` over a backend, the expressible set collects the term
//! tuples `t` such that some relator-satisfying witness `c` has `t(c) = b`.
//! Membership is semi-decidable by searching witnesses; over the
//! distinguished generating tuple it is decidable outright through the
//! orbit decider, which is what lets the complement stream in enumeration
//! order.

use crate::backend::{Backend, ElementTuples};
use crate::budget::{Budget, SemiOutcome};
use crate::error::{Error, Result};
use crate::morphism::{endo_from_tuple, Endomorphism};
use crate::orbit;
use crate::terms::{TermEnumerator, TermTuple};
use crate::words::Word;
use std::collections::BTreeSet;
use std::sync::Arc;


/// Bounded membership test: searches for a relator-satisfying witness `c`
/// with `t(c) = target`, scanning element tuples in canonical order. Every
/// candidate examined counts one step, so outcomes are monotone in the
/// budget.
pub fn member_t_semi(
    backend: &Backend,
    terms: &TermTuple,
    target: &[Word],
    budget: &Budget,
) -> Result<SemiOutcome<Vec<Word>>> {
    if terms.len() != target.len() {
        return Err(Error::ArityMismatch { expected: terms.len(), got: target.len() });
    }
    let target_nf: Vec<Word> =
        target.iter().map(|w| backend.normal_form(w)).collect::<Result<_>>()?;
    let mut steps = 0u64;
    for candidate in backend.element_tuples(terms.arity_in())? {
        let total: usize = candidate.iter().map(Word::len).sum();
        if total > budget.element_length_cap {
            break;
        }
        steps += 1;
        if steps > budget.step_cap {
            return Ok(SemiOutcome::Unknown);
        }
        if !backend.satisfies_own_relators(&candidate)? {
            continue;
        }
        let values = terms.evaluate(&candidate)?;
        let mut all = true;
        for (v, t) in values.iter().zip(&target_nf) {
            if &backend.normal_form(v)? != t {
                all = false;
                break;
            }
        }
        if all {
            return Ok(SemiOutcome::Yes(candidate));
        }
    }
    Ok(SemiOutcome::Unknown)
}

/// Exact membership of a term tuple in the expressible set of the
/// generating tuple: the tuple of evaluated terms must satisfy the relators
/// and lie in the orbit.
pub fn member_t_decide(backend: &Backend, terms: &TermTuple) -> Result<bool> {
    if !backend.capabilities().orbit_decider {
        return Err(Error::NoOrbitDecider);
    }
    let n = backend.rank();
    if terms.len() != n || terms.arity_in() != n {
        return Err(Error::ArityMismatch { expected: n, got: terms.len() });
    }
    let images = terms.evaluate(&backend.presentation().generator_tuple())?;
    if !backend.satisfies_own_relators(&images)? {
        return Ok(false);
    }
    Ok(orbit::orbit_decide(backend, &images)?.decision == orbit::Decision::InOrbit)
}

/// A materialized member of the complement stream.
#[derive(Clone, Debug)]
pub struct ThatEntry {
    pub tuple: TermTuple,
    /// Position in the base term enumeration.
    pub base_index: u64,
    /// Cached exponent matrix, for witness-obstruction pruning.
    pub expo: Vec<Vec<i64>>,
}

/// Lazily extended stream of the term tuples *not* expressing the
/// generating tuple, in base enumeration order. Prefix-monotone in the
/// base budget and deterministic; safe to share across queries against the
/// same backend.
pub struct ThatStream {
    backend: Arc<Backend>,
    base: TermEnumerator,
    entries: Vec<ThatEntry>,
    base_consumed: u64,
}

impl ThatStream {
    pub fn new(backend: Arc<Backend>) -> Result<ThatStream> {
        if !backend.capabilities().orbit_decider {
            return Err(Error::NoOrbitDecider);
        }
        let n = backend.rank();
        Ok(ThatStream { backend, base: TermEnumerator::new(n, n), entries: Vec::new(), base_consumed: 0 })
    }

    pub fn backend(&self) -> &Arc<Backend> {
        &self.backend
    }

    pub fn base_consumed(&self) -> u64 {
        self.base_consumed
    }

    /// Materializes every complement member among the first `base_cap` base
    /// tuples and returns them (a prefix of the stream).
    pub fn members_upto_base(&mut self, base_cap: u64) -> Result<&[ThatEntry]> {
        while self.base_consumed < base_cap {
            let Some(t) = self.base.next() else { break };
            let base_index = self.base_consumed;
            self.base_consumed += 1;
            if !member_t_decide(&self.backend, &t)? {
                let expo = t.exponent_matrix();
                self.entries.push(ThatEntry { tuple: t, base_index, expo });
            }
        }
        let end = self.entries.partition_point(|e| e.base_index < base_cap);
        Ok(&self.entries[..end])
    }

    /// The `i`-th complement member, materializing at most `base_cap` base
    /// tuples in total.
    pub fn get(&mut self, i: usize, base_cap: u64) -> Result<Option<&ThatEntry>> {
        while self.entries.len() <= i && self.base_consumed < base_cap {
            let Some(t) = self.base.next() else { break };
            let base_index = self.base_consumed;
            self.base_consumed += 1;
            if !member_t_decide(&self.backend, &t)? {
                let expo = t.exponent_matrix();
                self.entries.push(ThatEntry { tuple: t, base_index, expo });
            }
        }
        Ok(self.entries.get(i))
    }
}

/// The complement members among the first `base_budget` term tuples, in
/// enumeration order.
pub fn enumerate_that(backend: &Arc<Backend>, base_budget: u64) -> Result<Vec<TermTuple>> {
    let mut stream = ThatStream::new(Arc::clone(backend))?;
    Ok(stream.members_upto_base(base_budget)?.iter().map(|e| e.tuple.clone()).collect())
}

/// Computably enumerates the expressible set of `target` by dovetailing
/// term tuples against witness tuples along diagonals. Emissions are
/// deduplicated and monotone: the emitted set at any step count is a subset
/// of the emitted set at any later one.
pub struct TSetEnumerator<'b> {
    backend: &'b Backend,
    target_nf: Vec<Word>,
    terms: Vec<TermTuple>,
    term_src: TermEnumerator,
    witnesses: Vec<(Vec<Word>, bool)>,
    witness_src: ElementTuples<'b>,
    witness_exhausted: bool,
    diagonal: u64,
    offset: u64,
    emitted: BTreeSet<TermTuple>,
    steps: u64,
    digest: u64,
}

impl<'b> TSetEnumerator<'b> {
    pub fn new(backend: &'b Backend, target: &[Word]) -> Result<TSetEnumerator<'b>> {
        let n = target.len();
        let target_nf: Vec<Word> =
            target.iter().map(|w| backend.normal_form(w)).collect::<Result<_>>()?;
        Ok(TSetEnumerator {
            backend,
            target_nf,
            terms: Vec::new(),
            term_src: TermEnumerator::new(n, backend.rank()),
            witnesses: Vec::new(),
            witness_src: backend.element_tuples(backend.rank())?,
            witness_exhausted: false,
            diagonal: 0,
            offset: 0,
            emitted: BTreeSet::new(),
            steps: 0,
            digest: 0xcbf29ce484222325,
        })
    }

    fn term(&mut self, i: usize) -> Option<&TermTuple> {
        while self.terms.len() <= i {
            let t = self.term_src.next()?;
            self.terms.push(t);
        }
        self.terms.get(i)
    }

    fn witness(&mut self, j: usize) -> Result<Option<&(Vec<Word>, bool)>> {
        while self.witnesses.len() <= j && !self.witness_exhausted {
            match self.witness_src.next() {
                Some(c) => {
                    let ok = self.backend.satisfies_own_relators(&c)?;
                    self.witnesses.push((c, ok));
                }
                None => self.witness_exhausted = true,
            }
        }
        Ok(self.witnesses.get(j))
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn emitted_count(&self) -> usize {
        self.emitted.len()
    }

    /// Digest of the emitted set (FNV-1a over emissions in order).
    pub fn digest(&self) -> u64 {
        self.digest
    }

    fn fold_digest(&mut self, t: &TermTuple) {
        for c in t.components() {
            for &l in c.letters() {
                self.digest ^= (l as i64) as u64;
                self.digest = self.digest.wrapping_mul(0x100000001b3);
            }
            self.digest ^= 0xff;
            self.digest = self.digest.wrapping_mul(0x100000001b3);
        }
    }

    /// Tests one (term, witness) pair; returns a new emission if the pair
    /// certifies membership.
    pub fn step(&mut self) -> Result<Option<(TermTuple, Vec<Word>)>> {
        self.steps += 1;
        // pair (i, j) on the current diagonal: i + j = diagonal
        let d = self.diagonal;
        let i = self.offset;
        let j = d - i;
        // advance cursor
        if self.offset == d {
            self.diagonal += 1;
            self.offset = 0;
        } else {
            self.offset += 1;
        }
        let Some(t) = self.term(i as usize).cloned() else { return Ok(None) };
        let Some((witness, psi)) = self.witness(j as usize)?.cloned() else {
            return Ok(None);
        };
        if !psi || self.emitted.contains(&t) {
            return Ok(None);
        }
        let values = t.evaluate(&witness)?;
        for (v, target) in values.iter().zip(&self.target_nf) {
            if &self.backend.normal_form(v)? != target {
                return Ok(None);
            }
        }
        self.emitted.insert(t.clone());
        self.fold_digest(&t);
        Ok(Some((t, witness)))
    }

    /// Runs `steps` pair tests, collecting new emissions.
    pub fn run(&mut self, steps: u64) -> Result<Vec<(TermTuple, Vec<Word>)>> {
        let mut out = Vec::new();
        for _ in 0..steps {
            if let Some(e) = self.step()? {
                out.push(e);
            }
        }
        Ok(out)
    }
}

/// Outcome of dovetailing two semi-procedures with disjoint success sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DovetailOutcome<Y, N> {
    True(Y),
    False(N),
    BudgetExhausted,
}

/// Fair round-robin schedule with a global round cap.
#[derive(Clone, Copy, Debug)]
pub struct Schedule {
    pub step_cap: u64,
}

/// Runs two semi-procedures in lockstep, one step each per round. The
/// caller promises their success sets are disjoint; if both land in the
/// same round the promise was violated and the contradiction surfaces as
/// an error.
pub fn dovetail_decide<Y, N>(
    mut yes_step: impl FnMut(u64) -> Result<Option<Y>>,
    mut no_step: impl FnMut(u64) -> Result<Option<N>>,
    schedule: Schedule,
) -> Result<DovetailOutcome<Y, N>> {
    for round in 0..schedule.step_cap {
        let y = yes_step(round)?;
        let n = no_step(round)?;
        match (y, n) {
            (Some(_), Some(_)) => {
                return Err(Error::ContradictoryCertificates { step: round });
            }
            (Some(y), None) => return Ok(DovetailOutcome::True(y)),
            (None, Some(n)) => return Ok(DovetailOutcome::False(n)),
            (None, None) => {}
        }
    }
    Ok(DovetailOutcome::BudgetExhausted)
}

/// Dovetails the two orbit semi-deciders into a bounded decision.
pub fn dovetail_orbit(
    backend: &Backend,
    tuple: &[Word],
    budget: &Budget,
) -> Result<DovetailOutcome<orbit::OrbitYesCertificate, orbit::OrbitNoCertificate>> {
    let mut yes = orbit::OrbitSemiYesProc::new(backend, tuple.to_vec(), *budget);
    let mut no = orbit::OrbitSemiNoProc::new(backend, tuple.to_vec());
    dovetail_decide(
        |_| yes.step(),
        |_| no.step(),
        Schedule { step_cap: budget.step_cap },
    )
}

/// Report from the two-sided inclusion probe: either an endomorphism
/// mapping `left` to `right` (so everything expressible from `left` is
/// expressible from `right`), or a separating term with its witness (only
/// findable on finite backends, where non-membership is checked by
/// exhaustion).
pub struct InclusionReport {
    pub endo_found: Option<Endomorphism>,
    pub counterexample: Option<(TermTuple, Vec<Word>)>,
    pub steps_used: u64,
}

pub fn inclusion_probe(
    backend: &Arc<Backend>,
    left: &[Word],
    right: &[Word],
    budget: &Budget,
) -> Result<InclusionReport> {
    if left.len() != right.len() {
        return Err(Error::ArityMismatch { expected: left.len(), got: right.len() });
    }
    let n = backend.rank();
    let right_nf: Vec<Word> =
        right.iter().map(|w| backend.normal_form(w)).collect::<Result<_>>()?;
    let mut endo_candidates = backend.element_tuples(n)?;
    let mut term_candidates = TermEnumerator::new(left.len(), n);
    let finite = backend.order();
    let mut steps = 0u64;
    let mut endo_done = false;
    let mut terms_done = finite.is_none();

    while steps < budget.step_cap && (!endo_done || !terms_done) {
        // (a) one endomorphism candidate: u with psi(u) and left(u) = right
        if !endo_done {
            steps += 1;
            match endo_candidates.next() {
                Some(u) => {
                    let total: usize = u.iter().map(Word::len).sum();
                    if total > budget.element_length_cap {
                        endo_done = true;
                    } else if backend.satisfies_own_relators(&u)? {
                        let mut matches = true;
                        for (l, r) in left.iter().zip(&right_nf) {
                            if &backend.normal_form(&l.substitute(&u))? != r {
                                matches = false;
                                break;
                            }
                        }
                        if matches {
                            return Ok(InclusionReport {
                                endo_found: Some(endo_from_tuple(backend, u)?),
                                counterexample: None,
                                steps_used: steps,
                            });
                        }
                    }
                }
                None => endo_done = true,
            }
        }
        // (b) one separating-term candidate, finite backends only
        if !terms_done {
            steps += 1;
            match term_candidates.next() {
                Some(t) => {
                    if t.total_len() > budget.term_length_cap {
                        terms_done = true;
                    } else {
                        let left_witness = exhaustive_witness(backend, &t, left)?;
                        if let Some(w) = left_witness {
                            if exhaustive_witness(backend, &t, right)?.is_none() {
                                return Ok(InclusionReport {
                                    endo_found: None,
                                    counterexample: Some((t, w)),
                                    steps_used: steps,
                                });
                            }
                        }
                    }
                }
                None => terms_done = true,
            }
        }
    }
    Ok(InclusionReport { endo_found: None, counterexample: None, steps_used: steps })
}

/// Exhaustive witness search over a finite backend.
fn exhaustive_witness(
    backend: &Backend,
    terms: &TermTuple,
    target: &[Word],
) -> Result<Option<Vec<Word>>> {
    let target_nf: Vec<Word> =
        target.iter().map(|w| backend.normal_form(w)).collect::<Result<_>>()?;
    for candidate in backend.element_tuples(terms.arity_in())? {
        if !backend.satisfies_own_relators(&candidate)? {
            continue;
        }
        let values = terms.evaluate(&candidate)?;
        let mut all = true;
        for (v, t) in values.iter().zip(&target_nf) {
            if &backend.normal_form(v)? != t {
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
