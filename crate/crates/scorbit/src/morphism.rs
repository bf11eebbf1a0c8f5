//! Endomorphisms induced by relator-satisfying tuples, with bounded
//! surjectivity and left-inverse searches.

use crate::backend::Backend;
use crate::budget::{Budget, SemiOutcome};
use crate::error::{Error, Result};
use crate::presentation::Presentation;
use crate::terms::TermTuple;
use crate::words::{Word, WordEnumerator};
use std::sync::Arc;

/// A self-map of the backend's group determined by generator images. Only
/// validated endomorphisms (images satisfy every relator) are well defined
/// on the whole group.
#[derive(Clone)]
pub struct Endomorphism {
    presentation: Presentation,
    backend: Arc<Backend>,
    images: Vec<Word>,
    validated: bool,
}

impl std::fmt::Debug for Endomorphism {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Endomorphism{:?}", self.images)
    }
}

/// Validates that `images` satisfy the relators and wraps the induced
/// endomorphism.
pub fn endo_from_tuple(backend: &Arc<Backend>, images: Vec<Word>) -> Result<Endomorphism> {
    if images.len() != backend.rank() {
        return Err(Error::ArityMismatch { expected: backend.rank(), got: images.len() });
    }
    if let Some(relator) = backend.violated_relator(&images)? {
        return Err(Error::NotAHomomorphism { relator });
    }
    Ok(Endomorphism {
        presentation: backend.presentation().clone(),
        backend: Arc::clone(backend),
        images,
        validated: true,
    })
}

impl Endomorphism {
    pub fn identity(backend: &Arc<Backend>) -> Endomorphism {
        Endomorphism {
            presentation: backend.presentation().clone(),
            backend: Arc::clone(backend),
            images: backend.presentation().generator_tuple(),
            validated: true,
        }
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn backend(&self) -> &Arc<Backend> {
        &self.backend
    }

    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    pub fn validated(&self) -> bool {
        self.validated
    }

    /// Applies the endomorphism: substitutes images and normal-forms.
    pub fn apply(&self, w: &Word) -> Result<Word> {
        if !self.validated {
            return Err(Error::UnvalidatedEndomorphism);
        }
        self.backend.normal_form(&w.substitute(&self.images))
    }

    pub fn apply_tuple(&self, tuple: &[Word]) -> Result<Vec<Word>> {
        tuple.iter().map(|w| self.apply(w)).collect()
    }
}

/// Searches for terms expressing every generator from the image tuple: a
/// certificate that the endomorphism is onto. The scan runs per component
/// over single terms in (length, lex) order, sharing the step budget.
pub fn surjectivity_semi(e: &Endomorphism, budget: &Budget) -> Result<SemiOutcome<TermTuple>> {
    if !e.validated {
        return Err(Error::UnvalidatedEndomorphism);
    }
    let n = e.backend.rank();
    let mut steps = 0u64;
    let mut components = Vec::with_capacity(n);
    for i in 0..n {
        let target = e.backend.normal_form(&Word::generator(i))?;
        let mut found = None;
        for t in WordEnumerator::new(n) {
            if t.len() > budget.term_length_cap {
                break;
            }
            steps += 1;
            if steps > budget.step_cap {
                return Ok(SemiOutcome::Unknown);
            }
            if e.backend.normal_form(&t.substitute(&e.images))? == target {
                found = Some(t);
                break;
            }
        }
        match found {
            Some(t) => components.push(t),
            None => return Ok(SemiOutcome::Unknown),
        }
    }
    Ok(SemiOutcome::Yes(TermTuple::new(n, components)?))
}

/// Checks a surjectivity certificate independently of how it was found.
pub fn verify_expressing_terms(
    backend: &Backend,
    images: &[Word],
    terms: &TermTuple,
) -> Result<bool> {
    let values = terms.evaluate(images)?;
    for (i, v) in values.iter().enumerate() {
        if !backend.words_equal(v, &Word::generator(i))? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Searches for `g` with `g ∘ e = id`, scanning candidate image tuples in
/// canonical order. `Yes(g)` comes with `g` validated and the composite
/// checked on every generator.
pub fn left_inverse_semi(e: &Endomorphism, budget: &Budget) -> Result<SemiOutcome<Endomorphism>> {
    if !e.validated {
        return Err(Error::UnvalidatedEndomorphism);
    }
    let n = e.backend.rank();
    let mut steps = 0u64;
    for candidate in e.backend.element_tuples(n)? {
        let total: usize = candidate.iter().map(Word::len).sum();
        if total > budget.element_length_cap {
            break;
        }
        steps += 1;
        if steps > budget.step_cap {
            return Ok(SemiOutcome::Unknown);
        }
        if !e.backend.satisfies_own_relators(&candidate)? {
            continue;
        }
        let mut fixes_generators = true;
        for i in 0..n {
            // g(e(a_i)) = e(a_i) with candidate substituted for generators
            let composed = e.images[i].substitute(&candidate);
            if !e.backend.words_equal(&composed, &Word::generator(i))? {
                fixes_generators = false;
                break;
            }
        }
        if fixes_generators {
            let g = endo_from_tuple(&e.backend, candidate)?;
            return Ok(SemiOutcome::Yes(g));
        }
    }
    Ok(SemiOutcome::Unknown)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn free2() -> Arc<Backend> {
        Backend::free_group(2).unwrap().into_shared()
    }

    #[test]
    fn validation() {
        let b = free2();
        let p = b.presentation().clone();
        // free group: any tuple validates
        let e = endo_from_tuple(&b, vec![p.parse_word("y").unwrap(), p.parse_word("x").unwrap()])
            .unwrap();
        assert!(e.validated());

        let s3 = Backend::finite_from_presentation(
            Presentation::parse("< a, b | a^2, b^3, a*b*a*b >").unwrap(),
            100,
        )
        .unwrap()
        .into_shared();
        let sp = s3.presentation().clone();
        // (a, b^2) validates; (b, b) violates a^2
        assert!(endo_from_tuple(&s3, vec![sp.parse_word("a").unwrap(), sp.parse_word("b^2").unwrap()]).is_ok());
        assert!(matches!(
            endo_from_tuple(&s3, vec![sp.parse_word("b").unwrap(), sp.parse_word("b").unwrap()]),
            Err(Error::NotAHomomorphism { relator: 0 })
        ));
    }

    #[test]
    fn apply_swap() {
        let b = free2();
        let p = b.presentation().clone();
        let e = endo_from_tuple(&b, vec![p.parse_word("y").unwrap(), p.parse_word("x").unwrap()])
            .unwrap();
        let w = p.parse_word("x*y^-1").unwrap();
        assert_eq!(e.apply(&w).unwrap(), p.parse_word("y*x^-1").unwrap());
    }

    #[test]
    fn surjectivity_identity_and_shear() {
        let b = free2();
        let p = b.presentation().clone();
        let id = Endomorphism::identity(&b);
        let out = surjectivity_semi(&id, &Budget::new(1, 0, 1000)).unwrap();
        let SemiOutcome::Yes(t) = out else { panic!("identity is onto") };
        assert_eq!(t, TermTuple::identity(2));

        // x -> xy, y -> y: x is recovered as (xy) y^-1
        let e = endo_from_tuple(&b, vec![p.parse_word("x*y").unwrap(), p.parse_word("y").unwrap()])
            .unwrap();
        let out = surjectivity_semi(&e, &Budget::new(2, 0, 10_000)).unwrap();
        let SemiOutcome::Yes(t) = out else { panic!("shear is onto") };
        assert!(verify_expressing_terms(&b, e.images(), &t).unwrap());
    }

    #[test]
    fn surjectivity_unknown_for_proper_image() {
        let b = free2();
        let p = b.presentation().clone();
        let e = endo_from_tuple(&b, vec![p.parse_word("x^2").unwrap(), p.parse_word("y").unwrap()])
            .unwrap();
        let out = surjectivity_semi(&e, &Budget::new(5, 0, 50_000)).unwrap();
        assert_eq!(out, SemiOutcome::Unknown);
    }

    #[test]
    fn left_inverse_swap_and_identity() {
        let b = free2();
        let p = b.presentation().clone();
        let id = Endomorphism::identity(&b);
        let out = left_inverse_semi(&id, &Budget::new(0, 4, 10_000)).unwrap();
        assert!(out.is_yes());

        let e = endo_from_tuple(&b, vec![p.parse_word("y").unwrap(), p.parse_word("x").unwrap()])
            .unwrap();
        let out = left_inverse_semi(&e, &Budget::new(0, 4, 10_000)).unwrap();
        let SemiOutcome::Yes(g) = out else { panic!("swap has a left inverse") };
        for i in 0..2 {
            let roundtrip = g.apply(&e.apply(&Word::generator(i)).unwrap()).unwrap();
            assert_eq!(roundtrip, Word::generator(i));
        }
    }

    #[test]
    fn left_inverse_inner_automorphism_s3() {
        let s3 = Backend::finite_from_presentation(
            Presentation::parse("< a, b | a^2, b^3, a*b*a*b >").unwrap(),
            100,
        )
        .unwrap()
        .into_shared();
        let p = s3.presentation().clone();
        let e = endo_from_tuple(
            &s3,
            vec![p.parse_word("b*a*b^-1").unwrap(), p.parse_word("b").unwrap()],
        )
        .unwrap();
        let out = left_inverse_semi(&e, &Budget::new(0, 8, 100_000)).unwrap();
        let SemiOutcome::Yes(g) = out else { panic!("inner automorphisms are invertible") };
        for i in 0..2 {
            let roundtrip = g.apply(&e.apply(&Word::generator(i)).unwrap()).unwrap();
            assert!(s3.words_equal(&roundtrip, &Word::generator(i)).unwrap());
        }
    }
}
