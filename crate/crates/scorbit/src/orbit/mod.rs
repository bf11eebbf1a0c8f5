//! Deciding whether a tuple lies in the automorphism orbit of the
//! distinguished generating tuple, per backend class, plus the two
//! semi-deciders usable on any Hopfian-certified backend.
//!
//! Every definite verdict carries a certificate that re-checks without
//! re-running the search: an automorphism pair, a determinant, a stuck
//! Nielsen tuple, an exhausted finite search, or an expressing/excluding
//! term with its witness.

pub mod nielsen;

use crate::backend::{Backend, BackendKind, ExpressingHint};
use crate::budget::{Budget, SemiOutcome};
use crate::error::{Error, Result};
use crate::intmat::IntMatrix;
use crate::terms::TermTuple;
use crate::tsets;
use crate::words::{Word, WordEnumerator};
use nielsen::{nielsen_reduce, replay, signed_permutation, NielsenMove};
use num_bigint::BigInt;
use num_traits::Signed;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Decision {
    InOrbit,
    NotInOrbit,
    Unknown,
}

mod bigint_string {
    use num_bigint::BigInt;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum OrbitCertificate {
    /// Generator images of an automorphism mapping the generating tuple to
    /// the queried tuple, together with its inverse.
    AutomorphismPair { forward: Vec<Word>, inverse: Vec<Word> },
    /// Nielsen log reducing the tuple to signed generators; replay yields
    /// the automorphism pair.
    NielsenLog {
        log: Vec<NielsenMove>,
        stuck: Vec<Word>,
        forward: Vec<Word>,
        inverse: Vec<Word>,
    },
    /// The reduction stalled on a tuple that is not a signed permutation of
    /// the generators.
    NielsenStuck {
        log: Vec<NielsenMove>,
        stuck: Vec<Word>,
        #[serde(with = "bigint_string")]
        abelian_det: BigInt,
    },
    /// Exponent-matrix determinant different from ±1.
    Determinant {
        #[serde(with = "bigint_string")]
        det: BigInt,
    },
    /// Dihedral normal forms violating the `(r^±1, r^k s)` shape.
    DihedralShape { normal_forms: Vec<Word> },
    /// A finite search over all candidate images found no automorphism.
    FiniteExhausted { searched: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitVerdict {
    pub decision: Decision,
    pub certificate: Option<OrbitCertificate>,
}

impl OrbitVerdict {
    fn in_orbit(cert: OrbitCertificate) -> OrbitVerdict {
        OrbitVerdict { decision: Decision::InOrbit, certificate: Some(cert) }
    }

    fn not_in_orbit(cert: OrbitCertificate) -> OrbitVerdict {
        OrbitVerdict { decision: Decision::NotInOrbit, certificate: Some(cert) }
    }

    pub fn unknown() -> OrbitVerdict {
        OrbitVerdict { decision: Decision::Unknown, certificate: None }
    }
}

/// Certificate for a positive semi-decision: terms expressing every
/// generator from the tuple, with the checked normal forms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitYesCertificate {
    pub terms: TermTuple,
    pub evaluated: Vec<Word>,
}

/// Certificate for a negative semi-decision.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum OrbitNoCertificate {
    /// The tuple fails a defining relator outright.
    RelatorViolated { relator: usize, image_nf: Word },
    /// A term tuple outside the expressible set, together with a
    /// relator-satisfying witness producing the queried tuple.
    ComplementConjunct { term: TermTuple, witness: Vec<Word> },
}

/// Decides basis-ness of an `n`-tuple in the rank-`n` free group by greedy
/// Nielsen reduction: in orbit exactly when the reduction ends at a signed
/// permutation of the generators.
pub fn is_basis_free(backend: &Backend, tuple: &[Word]) -> Result<OrbitVerdict> {
    let n = backend.rank();
    if tuple.len() != n {
        return Err(Error::ArityMismatch { expected: n, got: tuple.len() });
    }
    for w in tuple {
        backend.normal_form(w)?;
    }
    let (stuck, log) = nielsen_reduce(tuple);
    match signed_permutation(&stuck) {
        Some(perm) => {
            let (forward, inverse) = replay(&log, &perm);
            debug_assert_eq!(forward, tuple.to_vec());
            Ok(OrbitVerdict::in_orbit(OrbitCertificate::NielsenLog {
                log,
                stuck,
                forward,
                inverse,
            }))
        }
        None => {
            let det = abelian_determinant(tuple, n)?;
            Ok(OrbitVerdict::not_in_orbit(OrbitCertificate::NielsenStuck {
                log,
                stuck,
                abelian_det: det,
            }))
        }
    }
}

fn abelian_determinant(tuple: &[Word], rank: usize) -> Result<BigInt> {
    let rows: Vec<Vec<BigInt>> = tuple
        .iter()
        .map(|w| w.exponent_sums(rank).into_iter().map(BigInt::from).collect())
        .collect();
    let (_, det) = IntMatrix::from_rows(&rows)?.hnf_and_det()?;
    Ok(det)
}

/// Hermite form and cross-checked determinant of the tuple's exponent
/// matrix; in orbit over a free abelian backend iff `|det| = 1`.
pub fn hnf_and_det(m: &IntMatrix) -> Result<(IntMatrix, BigInt)> {
    m.hnf_and_det()
}

fn decide_abelian(backend: &Backend, tuple: &[Word]) -> Result<OrbitVerdict> {
    let rank = backend.rank();
    let rows: Vec<Vec<BigInt>> = tuple
        .iter()
        .map(|w| w.exponent_sums(rank).into_iter().map(BigInt::from).collect())
        .collect();
    let m = IntMatrix::from_rows(&rows)?;
    let (_, det) = m.hnf_and_det()?;
    if det.abs() == BigInt::from(1) {
        let inv = m.inverse_unimodular()?.expect("unit determinant");
        let mut inverse_images = Vec::with_capacity(rank);
        for i in 0..rank {
            let mut w = Word::identity();
            for j in 0..rank {
                let e = i64::try_from(inv.get(i, j))
                    .map_err(|_| Error::Unsupported("inverse entry exceeds i64".into()))?;
                w = w.concat(&Word::generator(j).pow(e));
            }
            inverse_images.push(backend.normal_form(&w)?);
        }
        let forward: Vec<Word> =
            tuple.iter().map(|w| backend.normal_form(w)).collect::<Result<_>>()?;
        Ok(OrbitVerdict::in_orbit(OrbitCertificate::AutomorphismPair {
            forward,
            inverse: inverse_images,
        }))
    } else {
        Ok(OrbitVerdict::not_in_orbit(OrbitCertificate::Determinant { det }))
    }
}

/// Closed-form decider for the infinite dihedral group: the pair is in
/// orbit iff it normal-forms to `(r^±1, r^k s)`.
pub fn dihedral_orbit_decide(backend: &Backend, tuple: &[Word]) -> Result<OrbitVerdict> {
    let n1 = backend.normal_form(&tuple[0])?;
    let n2 = backend.normal_form(&tuple[1])?;
    let (k1, s1) = crate::backend::dihedral_shape(&n1);
    let (k2, s2) = crate::backend::dihedral_shape(&n2);
    if !s1 && s2 && k1.abs() == 1 {
        let eps = k1;
        let inverse = vec![
            crate::backend::dihedral_render(eps, false),
            crate::backend::dihedral_render(-eps * k2, true),
        ];
        Ok(OrbitVerdict::in_orbit(OrbitCertificate::AutomorphismPair {
            forward: vec![n1, n2],
            inverse,
        }))
    } else {
        Ok(OrbitVerdict::not_in_orbit(OrbitCertificate::DihedralShape {
            normal_forms: vec![n1, n2],
        }))
    }
}

fn decide_finite(backend: &Backend, tuple: &[Word]) -> Result<OrbitVerdict> {
    let nf: Vec<Word> = tuple.iter().map(|w| backend.normal_form(w)).collect::<Result<_>>()?;
    let orbit = backend.finite_orbit_set()?;
    if orbit.contains(&nf) {
        let inverse = backend
            .finite_inverse_images(&nf)?
            .expect("orbit members are bijective");
        Ok(OrbitVerdict::in_orbit(OrbitCertificate::AutomorphismPair { forward: nf, inverse }))
    } else {
        let order = backend.order().expect("finite backend");
        Ok(OrbitVerdict::not_in_orbit(OrbitCertificate::FiniteExhausted {
            searched: order.pow(backend.rank() as u32),
        }))
    }
}

/// Dispatches to the decider for the backend kind. Never returns `Unknown`
/// for the four certified kinds; rewriting backends decide only through a
/// registered plugin.
pub fn orbit_decide(backend: &Backend, tuple: &[Word]) -> Result<OrbitVerdict> {
    if tuple.len() != backend.rank() {
        return Err(Error::ArityMismatch { expected: backend.rank(), got: tuple.len() });
    }
    match backend.kind() {
        BackendKind::Free => is_basis_free(backend, tuple),
        BackendKind::FreeAbelian => decide_abelian(backend, tuple),
        BackendKind::InfiniteDihedral => dihedral_orbit_decide(backend, tuple),
        BackendKind::Finite(_) => decide_finite(backend, tuple),
        BackendKind::Rewriting { .. } => match backend.plugin() {
            Some(plugin) => plugin.decide(backend, tuple),
            None => Ok(OrbitVerdict::unknown()),
        },
    }
}

/// Positive semi-decider: the tuple is in orbit as soon as it satisfies the
/// relators and terms expressing every generator from it are found. On
/// backends with solvers (free, abelian, dihedral) the expressing terms are
/// constructed directly; otherwise the search enumerates terms per
/// component under the budget.
pub fn orbit_semi_yes(
    backend: &Backend,
    tuple: &[Word],
    budget: &Budget,
) -> Result<SemiOutcome<OrbitYesCertificate>> {
    if !backend.capabilities().hopfian_certified {
        return Err(Error::Unsupported(
            "the positive semi-decider needs a Hopfian-certified backend".into(),
        ));
    }
    if tuple.len() != backend.rank() {
        return Err(Error::ArityMismatch { expected: backend.rank(), got: tuple.len() });
    }
    if !backend.satisfies_own_relators(tuple)? {
        return Ok(SemiOutcome::Unknown);
    }
    match expressing_hint(backend, tuple)? {
        ExpressingHint::Terms(terms) => {
            let evaluated = normalize_all(backend, &terms.evaluate(tuple)?)?;
            debug_assert!(evaluated
                .iter()
                .enumerate()
                .all(|(i, v)| *v == backend.normal_form(&Word::generator(i)).unwrap()));
            Ok(SemiOutcome::Yes(OrbitYesCertificate { terms, evaluated }))
        }
        ExpressingHint::ProvablyNone => Ok(SemiOutcome::Unknown),
        ExpressingHint::NoHint => generic_expressing_search(backend, tuple, budget),
    }
}

fn expressing_hint(backend: &Backend, tuple: &[Word]) -> Result<ExpressingHint> {
    if matches!(backend.kind(), BackendKind::Free) {
        // the Nielsen route answers fully: replaying an in-orbit log yields
        // the inverse automorphism, whose images are expressing terms
        return Ok(match is_basis_free(backend, tuple)? {
            OrbitVerdict {
                decision: Decision::InOrbit,
                certificate: Some(OrbitCertificate::NielsenLog { inverse, .. }),
            } => ExpressingHint::Terms(TermTuple::syntactic(&inverse, backend.rank())?),
            _ => ExpressingHint::ProvablyNone,
        });
    }
    backend.expressing_terms_hint(tuple)
}

fn normalize_all(backend: &Backend, words: &[Word]) -> Result<Vec<Word>> {
    words.iter().map(|w| backend.normal_form(w)).collect()
}

fn generic_expressing_search(
    backend: &Backend,
    tuple: &[Word],
    budget: &Budget,
) -> Result<SemiOutcome<OrbitYesCertificate>> {
    let n = backend.rank();
    let mut steps = 0u64;
    let mut components = Vec::with_capacity(n);
    for i in 0..n {
        let target = backend.normal_form(&Word::generator(i))?;
        let mut found = None;
        for t in WordEnumerator::new(n) {
            if t.len() > budget.term_length_cap {
                break;
            }
            steps += 1;
            if steps > budget.step_cap {
                return Ok(SemiOutcome::Unknown);
            }
            if backend.normal_form(&t.substitute(tuple))? == target {
                found = Some(t);
                break;
            }
        }
        match found {
            Some(t) => components.push(t),
            None => return Ok(SemiOutcome::Unknown),
        }
    }
    let terms = TermTuple::new(n, components)?;
    let evaluated = normalize_all(backend, &terms.evaluate(tuple)?)?;
    Ok(SemiOutcome::Yes(OrbitYesCertificate { terms, evaluated }))
}

/// Negative semi-decider: lands when the tuple violates a relator, or when
/// the terms spelling the tuple lie outside the expressible set of the
/// generating tuple (checked through the orbit decider), in which case the
/// generators themselves witness the excluding conjunct.
pub fn orbit_semi_no(
    backend: &Backend,
    tuple: &[Word],
    _budget: &Budget,
) -> Result<SemiOutcome<OrbitNoCertificate>> {
    if tuple.len() != backend.rank() {
        return Err(Error::ArityMismatch { expected: backend.rank(), got: tuple.len() });
    }
    if !backend.capabilities().orbit_decider {
        return Err(Error::NoOrbitDecider);
    }
    if let Some(relator) = backend.violated_relator(tuple)? {
        let image = backend.presentation().relators()[relator].substitute(tuple);
        return Ok(SemiOutcome::Yes(OrbitNoCertificate::RelatorViolated {
            relator,
            image_nf: backend.normal_form(&image)?,
        }));
    }
    // the tuple read as terms evaluates to itself at the generators, so it
    // is an excluding conjunct exactly when the tuple is not in orbit
    let syntactic = TermTuple::syntactic(tuple, backend.rank())?;
    if !tsets::member_t_decide(backend, &syntactic)? {
        return Ok(SemiOutcome::Yes(OrbitNoCertificate::ComplementConjunct {
            term: syntactic,
            witness: backend.presentation().generator_tuple(),
        }));
    }
    Ok(SemiOutcome::Unknown)
}

/// Re-checks a negative certificate under the word oracle and the decider.
pub fn verify_no_certificate(
    backend: &Backend,
    tuple: &[Word],
    cert: &OrbitNoCertificate,
) -> Result<bool> {
    match cert {
        OrbitNoCertificate::RelatorViolated { relator, .. } => {
            let r = backend
                .presentation()
                .relators()
                .get(*relator)
                .ok_or_else(|| Error::MalformedFormula("relator index out of range".into()))?;
            Ok(!backend.is_identity(&r.substitute(tuple))?)
        }
        OrbitNoCertificate::ComplementConjunct { term, witness } => {
            if tsets::member_t_decide(backend, term)? {
                return Ok(false);
            }
            if !backend.satisfies_own_relators(witness)? {
                return Ok(false);
            }
            let evaluated = term.evaluate(witness)?;
            for (v, b) in evaluated.iter().zip(tuple) {
                if !backend.words_equal(v, b)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

/// Re-checks a positive certificate: the terms must express every
/// generator from the tuple.
pub fn verify_yes_certificate(
    backend: &Backend,
    tuple: &[Word],
    cert: &OrbitYesCertificate,
) -> Result<bool> {
    if !backend.satisfies_own_relators(tuple)? {
        return Ok(false);
    }
    let values = cert.terms.evaluate(tuple)?;
    for (i, v) in values.iter().enumerate() {
        if !backend.words_equal(v, &Word::generator(i))? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Re-checks an in-orbit decision certificate: the forward images must map
/// the generators to the tuple and compose with the inverse to the identity
/// both ways.
pub fn verify_orbit_certificate(
    backend: &Backend,
    tuple: &[Word],
    verdict: &OrbitVerdict,
) -> Result<bool> {
    match (&verdict.decision, &verdict.certificate) {
        (Decision::InOrbit, Some(cert)) => {
            let (forward, inverse) = match cert {
                OrbitCertificate::AutomorphismPair { forward, inverse } => (forward, inverse),
                OrbitCertificate::NielsenLog { forward, inverse, .. } => (forward, inverse),
                _ => return Ok(false),
            };
            if !backend.satisfies_own_relators(forward)?
                || !backend.satisfies_own_relators(inverse)?
            {
                return Ok(false);
            }
            for (f, b) in forward.iter().zip(tuple) {
                if !backend.words_equal(f, b)? {
                    return Ok(false);
                }
            }
            for i in 0..backend.rank() {
                let fi = inverse[i].substitute(forward);
                let if_ = forward[i].substitute(inverse);
                if !backend.words_equal(&fi, &Word::generator(i))?
                    || !backend.words_equal(&if_, &Word::generator(i))?
                {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        (Decision::NotInOrbit, Some(cert)) => match cert {
            OrbitCertificate::Determinant { det } => {
                let recomputed = abelian_determinant(tuple, backend.rank())?;
                Ok(recomputed == *det && det.abs() != BigInt::from(1))
            }
            OrbitCertificate::NielsenStuck { log, stuck, .. } => {
                let mut replayed = tuple.to_vec();
                for mv in log {
                    mv.apply(&mut replayed);
                }
                Ok(&replayed == stuck && signed_permutation(stuck).is_none())
            }
            OrbitCertificate::DihedralShape { normal_forms } => {
                let n1 = backend.normal_form(&tuple[0])?;
                let n2 = backend.normal_form(&tuple[1])?;
                let (k1, s1) = crate::backend::dihedral_shape(&n1);
                let (_, s2) = crate::backend::dihedral_shape(&n2);
                Ok(normal_forms == &vec![n1.clone(), n2.clone()]
                    && !(!s1 && s2 && k1.abs() == 1))
            }
            OrbitCertificate::FiniteExhausted { .. } => {
                let nf: Vec<Word> =
                    tuple.iter().map(|w| backend.normal_form(w)).collect::<Result<_>>()?;
                Ok(!backend.finite_orbit_set()?.contains(&nf))
            }
            _ => Ok(false),
        },
        (Decision::Unknown, None) => Ok(true),
        _ => Ok(false),
    }
}

/// Step-able wrapper for the positive semi-decider, for dovetailing.
pub struct OrbitSemiYesProc<'b> {
    backend: &'b Backend,
    tuple: Vec<Word>,
    budget: Budget,
    state: YesState,
}

enum YesState {
    Fresh,
    Scanning {
        component: usize,
        enumerator: WordEnumerator,
        found: Vec<Word>,
    },
    Done,
}

impl<'b> OrbitSemiYesProc<'b> {
    pub fn new(backend: &'b Backend, tuple: Vec<Word>, budget: Budget) -> OrbitSemiYesProc<'b> {
        OrbitSemiYesProc { backend, tuple, budget, state: YesState::Fresh }
    }

    /// One unit of work; `Ok(Some(..))` on success, `Ok(None)` otherwise.
    pub fn step(&mut self) -> Result<Option<OrbitYesCertificate>> {
        match std::mem::replace(&mut self.state, YesState::Done) {
            YesState::Fresh => {
                if !self.backend.capabilities().hopfian_certified {
                    return Err(Error::Unsupported(
                        "the positive semi-decider needs a Hopfian-certified backend".into(),
                    ));
                }
                if !self.backend.satisfies_own_relators(&self.tuple)? {
                    return Ok(None);
                }
                match expressing_hint(self.backend, &self.tuple)? {
                    ExpressingHint::Terms(terms) => {
                        let evaluated =
                            normalize_all(self.backend, &terms.evaluate(&self.tuple)?)?;
                        Ok(Some(OrbitYesCertificate { terms, evaluated }))
                    }
                    ExpressingHint::ProvablyNone => Ok(None),
                    ExpressingHint::NoHint => {
                        self.state = YesState::Scanning {
                            component: 0,
                            enumerator: WordEnumerator::new(self.backend.rank()),
                            found: Vec::new(),
                        };
                        Ok(None)
                    }
                }
            }
            YesState::Scanning { mut component, mut enumerator, mut found } => {
                let n = self.backend.rank();
                let candidate = enumerator.next();
                match candidate {
                    Some(t) if t.len() <= self.budget.term_length_cap => {
                        let target = self.backend.normal_form(&Word::generator(component))?;
                        if self.backend.normal_form(&t.substitute(&self.tuple))? == target {
                            found.push(t);
                            component += 1;
                            if component == n {
                                let terms = TermTuple::new(n, found)?;
                                let evaluated =
                                    normalize_all(self.backend, &terms.evaluate(&self.tuple)?)?;
                                return Ok(Some(OrbitYesCertificate { terms, evaluated }));
                            }
                            enumerator = WordEnumerator::new(n);
                        }
                        self.state = YesState::Scanning { component, enumerator, found };
                        Ok(None)
                    }
                    _ => Ok(None), // exhausted within length cap
                }
            }
            YesState::Done => Ok(None),
        }
    }
}

/// Step-able wrapper for the negative semi-decider.
pub struct OrbitSemiNoProc<'b> {
    backend: &'b Backend,
    tuple: Vec<Word>,
    stage: u8,
}

impl<'b> OrbitSemiNoProc<'b> {
    pub fn new(backend: &'b Backend, tuple: Vec<Word>) -> OrbitSemiNoProc<'b> {
        OrbitSemiNoProc { backend, tuple, stage: 0 }
    }

    pub fn step(&mut self) -> Result<Option<OrbitNoCertificate>> {
        match self.stage {
            0 => {
                self.stage = 1;
                if !self.backend.capabilities().orbit_decider {
                    return Err(Error::NoOrbitDecider);
                }
                if let Some(relator) = self.backend.violated_relator(&self.tuple)? {
                    let image =
                        self.backend.presentation().relators()[relator].substitute(&self.tuple);
                    return Ok(Some(OrbitNoCertificate::RelatorViolated {
                        relator,
                        image_nf: self.backend.normal_form(&image)?,
                    }));
                }
                Ok(None)
            }
            1 => {
                self.stage = 2;
                let syntactic = TermTuple::syntactic(&self.tuple, self.backend.rank())?;
                if !tsets::member_t_decide(self.backend, &syntactic)? {
                    return Ok(Some(OrbitNoCertificate::ComplementConjunct {
                        term: syntactic,
                        witness: self.backend.presentation().generator_tuple(),
                    }));
                }
                Ok(None)
            }
            _ => Ok(None),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::Presentation;

    fn free2() -> Backend {
        Backend::free_group(2).unwrap()
    }

    fn parse(b: &Backend, texts: &[&str]) -> Vec<Word> {
        texts.iter().map(|t| b.presentation().parse_word(t).unwrap()).collect()
    }

    #[test]
    fn swap_is_a_basis() {
        let b = free2();
        let v = orbit_decide(&b, &parse(&b, &["y", "x"])).unwrap();
        assert_eq!(v.decision, Decision::InOrbit);
        assert!(verify_orbit_certificate(&b, &parse(&b, &["y", "x"]), &v).unwrap());
    }

    #[test]
    fn square_is_not_a_basis() {
        let b = free2();
        let tuple = parse(&b, &["x^2", "y"]);
        let v = orbit_decide(&b, &tuple).unwrap();
        assert_eq!(v.decision, Decision::NotInOrbit);
        match &v.certificate {
            Some(OrbitCertificate::NielsenStuck { abelian_det, .. }) => {
                assert_eq!(abelian_det, &BigInt::from(2));
            }
            other => panic!("unexpected certificate {other:?}"),
        }
        assert!(verify_orbit_certificate(&b, &tuple, &v).unwrap());
    }

    #[test]
    fn conjugate_generator_is_a_basis() {
        let b = free2();
        let tuple = parse(&b, &["x*y*x^-1", "x"]);
        let v = orbit_decide(&b, &tuple).unwrap();
        assert_eq!(v.decision, Decision::InOrbit);
        assert!(verify_orbit_certificate(&b, &tuple, &v).unwrap());
    }

    #[test]
    fn abelian_decider() {
        let b = Backend::free_abelian(2).unwrap();
        let tuple = parse(&b, &["a*b", "b"]);
        let v = orbit_decide(&b, &tuple).unwrap();
        assert_eq!(v.decision, Decision::InOrbit);
        assert!(verify_orbit_certificate(&b, &tuple, &v).unwrap());

        let tuple = parse(&b, &["a^2", "b"]);
        let v = orbit_decide(&b, &tuple).unwrap();
        assert_eq!(v.decision, Decision::NotInOrbit);
        assert!(matches!(v.certificate, Some(OrbitCertificate::Determinant { .. })));
        assert!(verify_orbit_certificate(&b, &tuple, &v).unwrap());
    }

    #[test]
    fn dihedral_decider() {
        let b = Backend::infinite_dihedral();
        for (texts, expected) in [
            (vec!["r^-1", "r^2*s"], Decision::InOrbit),
            (vec!["r", "s"], Decision::InOrbit),
            (vec!["r^2", "s"], Decision::NotInOrbit),
            (vec!["s", "r*s"], Decision::NotInOrbit),
        ] {
            let tuple = parse(&b, &texts);
            let v = orbit_decide(&b, &tuple).unwrap();
            assert_eq!(v.decision, expected, "{texts:?}");
            assert!(verify_orbit_certificate(&b, &tuple, &v).unwrap(), "{texts:?}");
        }
    }

    #[test]
    fn finite_decider_s3() {
        let p = Presentation::parse("< a, b | a^2, b^3, a*b*a*b >").unwrap();
        let b = Backend::finite_from_presentation(p, 100).unwrap();
        let tuple = parse(&b, &["a", "b^2"]);
        let v = orbit_decide(&b, &tuple).unwrap();
        assert_eq!(v.decision, Decision::InOrbit);
        assert!(verify_orbit_certificate(&b, &tuple, &v).unwrap());

        let tuple = parse(&b, &["a", "a"]);
        let v = orbit_decide(&b, &tuple).unwrap();
        assert_eq!(v.decision, Decision::NotInOrbit);
    }

    #[test]
    fn semi_yes_examples() {
        let b = free2();
        let tuple = parse(&b, &["y", "x"]);
        let out = orbit_semi_yes(&b, &tuple, &Budget::exploring(64)).unwrap();
        let SemiOutcome::Yes(cert) = out else { panic!("swap lands") };
        assert!(verify_yes_certificate(&b, &tuple, &cert).unwrap());

        let out = orbit_semi_yes(&b, &parse(&b, &["x^2", "y"]), &Budget::exploring(64)).unwrap();
        assert_eq!(out, SemiOutcome::Unknown);

        let z = Backend::free_abelian(1).unwrap();
        let tuple = parse(&z, &["a^-1"]);
        let out = orbit_semi_yes(&z, &tuple, &Budget::exploring(16)).unwrap();
        let SemiOutcome::Yes(cert) = out else { panic!("inversion lands") };
        assert!(verify_yes_certificate(&z, &tuple, &cert).unwrap());
    }

    #[test]
    fn semi_no_examples() {
        let z = Backend::free_abelian(1).unwrap();
        let tuple = parse(&z, &["a^2"]);
        let out = orbit_semi_no(&z, &tuple, &Budget::exploring(64)).unwrap();
        let SemiOutcome::Yes(cert) = out else { panic!("a^2 is excluded") };
        assert!(verify_no_certificate(&z, &tuple, &cert).unwrap());
        match &cert {
            OrbitNoCertificate::ComplementConjunct { term, witness } => {
                assert_eq!(term, &TermTuple::syntactic(&tuple, 1).unwrap());
                assert_eq!(witness, &z.presentation().generator_tuple());
            }
            other => panic!("unexpected {other:?}"),
        }

        let out = orbit_semi_no(&z, &parse(&z, &["a"]), &Budget::exploring(64)).unwrap();
        assert_eq!(out, SemiOutcome::Unknown);

        // non-generating tuple of S3 violates a relator or is excluded
        let p = Presentation::parse("< a, b | a^2, b^3, a*b*a*b >").unwrap();
        let s3 = Backend::finite_from_presentation(p, 100).unwrap();
        let tuple = parse(&s3, &["a", "a"]);
        let out = orbit_semi_no(&s3, &tuple, &Budget::exploring(64)).unwrap();
        let SemiOutcome::Yes(cert) = out else { panic!("(a, a) is rejected") };
        assert!(verify_no_certificate(&s3, &tuple, &cert).unwrap());
    }

    #[test]
    fn semi_deciders_are_exclusive_on_samples() {
        let b = free2();
        for texts in [vec!["y", "x"], vec!["x^2", "y"], vec!["x*y", "y"], vec!["x", "x"]] {
            let tuple = parse(&b, &texts);
            let yes = orbit_semi_yes(&b, &tuple, &Budget::exploring(256)).unwrap();
            let no = orbit_semi_no(&b, &tuple, &Budget::exploring(256)).unwrap();
            assert!(!(yes.is_yes() && no.is_yes()), "both landed on {texts:?}");
            let decided = orbit_decide(&b, &tuple).unwrap().decision;
            match decided {
                Decision::InOrbit => assert!(yes.is_yes()),
                Decision::NotInOrbit => assert!(no.is_yes()),
                Decision::Unknown => {}
            }
        }
    }
}
