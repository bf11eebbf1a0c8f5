//! Freely reduced words over an indexed alphabet.
//!
//! A letter is a nonzero `i32`: `+(i+1)` is symbol `i`, `-(i+1)` is its
//! inverse. Words are kept freely reduced at all times, so equality of
//! `Word` values is equality in the free group. The same representation
//! serves group elements (symbols = generators) and terms (symbols =
//! variables).

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;

/// Letter for symbol `index`, positive or inverted.
pub fn letter(index: usize, positive: bool) -> i32 {
    let v = (index + 1) as i32;
    if positive {
        v
    } else {
        -v
    }
}

/// Symbol index of a letter.
pub fn letter_index(l: i32) -> usize {
    (l.unsigned_abs() as usize) - 1
}

/// Rank in the canonical letter order `x1 < x1^-1 < x2 < x2^-1 < ...`.
pub fn letter_rank(l: i32) -> usize {
    2 * letter_index(l) + usize::from(l < 0)
}

fn letter_from_rank(rank: usize) -> i32 {
    letter(rank / 2, rank % 2 == 0)
}

/// A freely reduced word.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word {
    letters: Vec<i32>,
}

impl Word {
    /// The empty word.
    pub fn identity() -> Word {
        Word { letters: Vec::new() }
    }

    /// Single positive letter for symbol `index`.
    pub fn generator(index: usize) -> Word {
        Word { letters: vec![letter(index, true)] }
    }

    /// Builds a word from raw signed letters, freely reducing.
    pub fn from_letters<I: IntoIterator<Item = i32>>(raw: I) -> Word {
        let mut buf: Vec<i32> = Vec::new();
        for l in raw {
            debug_assert!(l != 0, "letter 0 is not a symbol");
            if buf.last().is_some_and(|&p| p == -l) {
                buf.pop();
            } else {
                buf.push(l);
            }
        }
        Word { letters: buf }
    }

    /// Wraps letters already known to be freely reduced.
    pub fn from_reduced(letters: Vec<i32>) -> Word {
        debug_assert!(letters.iter().all(|&l| l != 0));
        debug_assert!(letters.windows(2).all(|w| w[0] != -w[1]));
        Word { letters }
    }

    pub fn letters(&self) -> &[i32] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    /// Largest symbol index occurring, if any.
    pub fn max_index(&self) -> Option<usize> {
        self.letters.iter().map(|&l| letter_index(l)).max()
    }

    pub fn inverse(&self) -> Word {
        Word { letters: self.letters.iter().rev().map(|&l| -l).collect() }
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut buf = self.letters.clone();
        for &l in &other.letters {
            if buf.last().is_some_and(|&p| p == -l) {
                buf.pop();
            } else {
                buf.push(l);
            }
        }
        Word { letters: buf }
    }

    pub fn pow(&self, exponent: i64) -> Word {
        let base = if exponent < 0 { self.inverse() } else { self.clone() };
        let n = exponent.unsigned_abs() as usize;
        Word::from_letters((0..n).flat_map(|_| base.letters.iter().copied()))
    }

    /// Substitutes `args[i]` for symbol `i` and freely reduces.
    ///
    /// Letters referring to symbols outside `args` are rejected by the
    /// callers that validate arity; here they panic in debug builds.
    pub fn substitute(&self, args: &[Word]) -> Word {
        let mut buf: Vec<i32> = Vec::new();
        for &l in &self.letters {
            let arg = &args[letter_index(l)];
            if l > 0 {
                for &m in &arg.letters {
                    if buf.last().is_some_and(|&p| p == -m) {
                        buf.pop();
                    } else {
                        buf.push(m);
                    }
                }
            } else {
                for &m in arg.letters.iter().rev() {
                    let m = -m;
                    if buf.last().is_some_and(|&p| p == -m) {
                        buf.pop();
                    } else {
                        buf.push(m);
                    }
                }
            }
        }
        Word { letters: buf }
    }

    /// Same word with every symbol index shifted up by `offset`.
    pub fn shift_indices(&self, offset: usize) -> Word {
        Word {
            letters: self
                .letters
                .iter()
                .map(|&l| letter(letter_index(l) + offset, l > 0))
                .collect(),
        }
    }

    /// Net exponent of each of the first `rank` symbols.
    pub fn exponent_sums(&self, rank: usize) -> Vec<i64> {
        let mut sums = vec![0i64; rank];
        for &l in &self.letters {
            let i = letter_index(l);
            if i < rank {
                sums[i] += if l > 0 { 1 } else { -1 };
            }
        }
        sums
    }

    /// Length-then-lexicographic comparison under the canonical letter order.
    pub fn cmp_length_lex(&self, other: &Word) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| {
            for (&a, &b) in self.letters.iter().zip(&other.letters) {
                match letter_rank(a).cmp(&letter_rank(b)) {
                    Ordering::Equal => {}
                    ord => return ord,
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_length_lex(other)
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        for (index, exp) in runs(&self.letters) {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if exp == 1 {
                write!(f, "#{index}")?;
            } else {
                write!(f, "#{index}^{exp}")?;
            }
        }
        Ok(())
    }
}

/// Runs of equal letters as `(symbol index, signed exponent)` pairs.
pub fn runs(letters: &[i32]) -> Vec<(usize, i64)> {
    let mut out: Vec<(usize, i64)> = Vec::new();
    for &l in letters {
        let idx = letter_index(l);
        let step = if l > 0 { 1 } else { -1 };
        match out.last_mut() {
            Some((i, e)) if *i == idx && *e * step > 0 => *e += step,
            _ => out.push((idx, step)),
        }
    }
    out
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<(usize, i8)> = self
            .letters
            .iter()
            .map(|&l| (letter_index(l), if l > 0 { 1 } else { -1 }))
            .collect();
        pairs.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let pairs = Vec::<(usize, i8)>::deserialize(deserializer)?;
        let mut letters = Vec::with_capacity(pairs.len());
        for (index, sign) in pairs {
            if sign != 1 && sign != -1 {
                return Err(D::Error::custom("letter sign must be 1 or -1"));
            }
            letters.push(letter(index, sign == 1));
        }
        Ok(Word::from_letters(letters))
    }
}

/// Enumerates all freely reduced words over `rank` symbols in
/// (length, lex) order: `1, x1, x1^-1, x2, ..., x1*x1, x1*x2, ...`
#[derive(Clone)]
pub struct WordEnumerator {
    rank: usize,
    // rank-digits of the next word to emit; None before the first call
    digits: Option<Vec<usize>>,
    done: bool,
}

impl WordEnumerator {
    pub fn new(rank: usize) -> WordEnumerator {
        WordEnumerator { rank, digits: None, done: false }
    }

    fn first_of_length(&self, len: usize) -> Option<Vec<usize>> {
        if len > 0 && self.rank == 0 {
            return None;
        }
        // all-zero digit strings are reduced: x1 never meets x1^-1
        Some(vec![0; len])
    }

    /// Successor among words of the same length; `None` when exhausted.
    fn bump(&self, digits: &mut Vec<usize>) -> bool {
        let top = 2 * self.rank;
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
                // fill the suffix with minimal allowed digits
                for i in pos + 1..digits.len() {
                    let p = digits[i - 1];
                    digits[i] = if p ^ 1 == 0 { 1 } else { 0 };
                }
                return true;
            }
        }
        false
    }
}

impl Iterator for WordEnumerator {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        if self.done {
            return None;
        }
        let current = match self.digits.take() {
            None => Vec::new(),
            Some(digits) => {
                let mut d = digits;
                if !self.bump(&mut d) {
                    match self.first_of_length(d.len() + 1) {
                        Some(first) => d = first,
                        None => {
                            self.done = true;
                            return None;
                        }
                    }
                }
                d
            }
        };
        self.digits = Some(current.clone());
        Some(Word::from_reduced(current.into_iter().map(letter_from_rank).collect()))
    }
}
