//! Tuples of terms in variables `x1..xk` and their canonical enumeration.
//!
//! In the group signature a term collapses to a freely reduced word in the
//! variables, so a term tuple is an `n`-tuple of words over `x1..xk`.

use crate::error::{Error, Result};
use crate::words::Word;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;

/// An `n`-tuple of freely reduced words in variables `x1..xk`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TermTuple {
    arity_in: usize,
    components: Vec<Word>,
}

impl TermTuple {
    /// Validates that every component only uses variables below `arity_in`.
    pub fn new(arity_in: usize, components: Vec<Word>) -> Result<TermTuple> {
        for c in &components {
            if let Some(max) = c.max_index() {
                if max >= arity_in {
                    return Err(Error::ArenaMismatch { index: max, arena: arity_in });
                }
            }
        }
        Ok(TermTuple { arity_in, components })
    }

    /// The identity tuple `(x1, ..., xn)` on `n` variables.
    pub fn identity(n: usize) -> TermTuple {
        TermTuple {
            arity_in: n,
            components: (0..n).map(Word::generator).collect(),
        }
    }

    /// Reads a tuple of group elements as the terms spelling them over the
    /// generating tuple: evaluating the result at the generators returns
    /// `words` verbatim.
    pub fn syntactic(words: &[Word], arity_in: usize) -> Result<TermTuple> {
        TermTuple::new(arity_in, words.to_vec())
    }

    pub fn arity_in(&self) -> usize {
        self.arity_in
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[Word] {
        &self.components
    }

    pub fn total_len(&self) -> usize {
        self.components.iter().map(Word::len).sum()
    }

    /// Substitutes `args[j]` for `xj` in every component and freely reduces.
    pub fn evaluate(&self, args: &[Word]) -> Result<Vec<Word>> {
        if args.len() != self.arity_in {
            return Err(Error::ArityMismatch { expected: self.arity_in, got: args.len() });
        }
        Ok(self.components.iter().map(|c| c.substitute(args)).collect())
    }

    /// Composition `self ∘ inner`: substitutes `inner`'s components for
    /// `self`'s variables. `evaluate(self.compose(s), u) = evaluate(self,
    /// evaluate(s, u))`.
    pub fn compose(&self, inner: &TermTuple) -> Result<TermTuple> {
        if inner.len() != self.arity_in {
            return Err(Error::ArityMismatch { expected: self.arity_in, got: inner.len() });
        }
        let comps = self.evaluate(inner.components())?;
        TermTuple::new(inner.arity_in, comps)
    }

    /// Net exponent of `xj` in component `i`, as an `n x k` matrix.
    pub fn exponent_matrix(&self) -> Vec<Vec<i64>> {
        self.components.iter().map(|c| c.exponent_sums(self.arity_in)).collect()
    }
}

impl PartialOrd for TermTuple {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TermTuple {
    /// Total length first, then componentwise (length, lex).
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_len()
            .cmp(&other.total_len())
            .then_with(|| {
                for (a, b) in self.components.iter().zip(&other.components) {
                    match a.cmp_length_lex(b) {
                        Ordering::Equal => {}
                        ord => return ord,
                    }
                }
                Ordering::Equal
            })
            .then_with(|| self.components.len().cmp(&other.components.len()))
    }
}

impl fmt::Debug for TermTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.components).finish()
    }
}

/// Enumerates all freely reduced `n`-tuples over `k` variables exactly once,
/// ordered by total length, then length-lexicographically with
/// `x1 < x1^-1 < x2 < x2^-1 < ...`. Deterministic and resumable via
/// [`TermEnumerator::position`].
#[derive(Clone)]
pub struct TermEnumerator {
    n: usize,
    k: usize,
    total: usize,
    lengths: Vec<usize>,
    // per-component enumerators pinned to the current length vector
    words: Vec<Word>,
    started: bool,
    done: bool,
    position: u64,
}

impl TermEnumerator {
    pub fn new(n: usize, k: usize) -> TermEnumerator {
        TermEnumerator {
            n,
            k,
            total: 0,
            lengths: vec![0; n],
            words: vec![Word::identity(); n],
            started: false,
            done: false,
            position: 0,
        }
    }

    /// Number of tuples emitted so far.
    pub fn position(&self) -> u64 {
        self.position
    }

    /// Fresh enumerator advanced past the first `position` tuples.
    pub fn resume(n: usize, k: usize, position: u64) -> TermEnumerator {
        let mut e = TermEnumerator::new(n, k);
        for _ in 0..position {
            if e.next().is_none() {
                break;
            }
        }
        e
    }

    fn first_word_of_length(&self, len: usize) -> Option<Word> {
        if len == 0 {
            return Some(Word::identity());
        }
        if self.k == 0 {
            return None;
        }
        // x1^len is the least reduced word of its length
        Some(Word::from_reduced(vec![1; len]))
    }

    /// Next word of the same length in lex order.
    fn bump_word(&self, w: &Word) -> Option<Word> {
        let top = 2 * self.k;
        let mut digits: Vec<usize> =
            w.letters().iter().map(|&l| crate::words::letter_rank(l)).collect();
        let mut pos = digits.len();
        while pos > 0 {
            pos -= 1;
            let prev = if pos == 0 { None } else { Some(digits[pos - 1]) };
            let mut cand = digits[pos] + 1;
            while cand < top && prev.is_some_and(|p| p ^ 1 == cand) {
                cand += 1;
            }
            if cand < top {
                digits[pos] = cand;
                for i in pos + 1..digits.len() {
                    let p = digits[i - 1];
                    digits[i] = if p ^ 1 == 0 { 1 } else { 0 };
                }
                let letters = digits
                    .into_iter()
                    .map(|r| crate::words::letter(r / 2, r % 2 == 0))
                    .collect();
                return Some(Word::from_reduced(letters));
            }
        }
        None
    }

    /// Next composition of `self.total` into `n` parts, in ascending lex
    /// order; `false` when the current one is the last.
    fn bump_lengths(&mut self) -> bool {
        let n = self.n;
        if n == 0 {
            return false;
        }
        let mut p = n;
        while p > 1 {
            p -= 1;
            let suffix: usize = self.lengths[p..].iter().sum();
            if suffix > 0 {
                self.lengths[p - 1] += 1;
                for l in &mut self.lengths[p..] {
                    *l = 0;
                }
                self.lengths[n - 1] = suffix - 1;
                return true;
            }
        }
        false
    }

    fn reset_words(&mut self) -> bool {
        for i in 0..self.n {
            match self.first_word_of_length(self.lengths[i]) {
                Some(w) => self.words[i] = w,
                None => return false,
            }
        }
        true
    }

    fn advance(&mut self) -> bool {
        // odometer over components, rightmost fastest
        let mut i = self.n;
        while i > 0 {
            i -= 1;
            if let Some(next) = self.bump_word(&self.words[i]) {
                self.words[i] = next;
                for j in i + 1..self.n {
                    self.words[j] = self
                        .first_word_of_length(self.lengths[j])
                        .expect("length already realized");
                }
                return true;
            }
        }
        // next length vector, or next total length
        loop {
            if self.bump_lengths() {
                if self.reset_words() {
                    return true;
                }
                continue;
            }
            if self.n == 0 || (self.k == 0 && self.total == 0) {
                return false;
            }
            self.total += 1;
            if self.k == 0 {
                return false;
            }
            self.lengths = vec![0; self.n];
            self.lengths[self.n - 1] = self.total;
            if self.reset_words() {
                return true;
            }
        }
    }
}

impl Iterator for TermEnumerator {
    type Item = TermTuple;

    fn next(&mut self) -> Option<TermTuple> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
        } else if !self.advance() {
            self.done = true;
            return None;
        }
        self.position += 1;
        Some(TermTuple { arity_in: self.k, components: self.words.clone() })
    }
}
