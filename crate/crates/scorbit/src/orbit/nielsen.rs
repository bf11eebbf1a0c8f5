//! Nielsen reduction of tuples of free-group words, with a replayable move
//! log.
//!
//! A move replaces one component by its product with another component (or
//! that component's inverse) on one side, and is applied only when the total
//! length strictly drops. The log records each move; replaying it recovers
//! the transformation and, when the tuple reduces to signed generators, an
//! explicit automorphism pair.

use crate::words::Word;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Side {
    Left,
    Right,
}

/// `tuple[target] <- other^s * tuple[target]` (Left) or
/// `tuple[target] * other^s` (Right), with `s = -1` iff `invert_other`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct NielsenMove {
    pub target: usize,
    pub other: usize,
    pub side: Side,
    pub invert_other: bool,
}

impl NielsenMove {
    fn factor(&self, tuple: &[Word]) -> Word {
        if self.invert_other {
            tuple[self.other].inverse()
        } else {
            tuple[self.other].clone()
        }
    }

    pub fn apply(&self, tuple: &mut [Word]) {
        let f = self.factor(tuple);
        tuple[self.target] = match self.side {
            Side::Left => f.concat(&tuple[self.target]),
            Side::Right => tuple[self.target].concat(&f),
        };
    }

    /// Generator images of the elementary automorphism this move composes
    /// with (acting on an `n`-generator free group).
    pub fn automorphism_images(&self, n: usize) -> Vec<Word> {
        self.images(n, self.invert_other)
    }

    /// Generator images of the inverse elementary automorphism.
    pub fn inverse_automorphism_images(&self, n: usize) -> Vec<Word> {
        self.images(n, !self.invert_other)
    }

    fn images(&self, n: usize, invert: bool) -> Vec<Word> {
        let mut images: Vec<Word> = (0..n).map(Word::generator).collect();
        let other = if invert {
            Word::generator(self.other).inverse()
        } else {
            Word::generator(self.other)
        };
        images[self.target] = match self.side {
            Side::Left => other.concat(&Word::generator(self.target)),
            Side::Right => Word::generator(self.target).concat(&other),
        };
        images
    }
}

/// Greedily applies strictly length-reducing moves, picking the
/// lexicographically least `(target, other, side, invert)` each round.
/// Returns the stuck tuple and the move log.
pub fn nielsen_reduce(tuple: &[Word]) -> (Vec<Word>, Vec<NielsenMove>) {
    let mut current: Vec<Word> = tuple.to_vec();
    let mut log = Vec::new();
    let n = current.len();
    loop {
        let mut applied = false;
        'search: for target in 0..n {
            for other in 0..n {
                if target == other {
                    continue;
                }
                for side in [Side::Left, Side::Right] {
                    for invert_other in [false, true] {
                        let mv = NielsenMove { target, other, side, invert_other };
                        let f = mv.factor(&current);
                        let replaced = match side {
                            Side::Left => f.concat(&current[target]),
                            Side::Right => current[target].concat(&f),
                        };
                        if replaced.len() < current[target].len() {
                            current[target] = replaced;
                            log.push(mv);
                            applied = true;
                            break 'search;
                        }
                    }
                }
            }
        }
        if !applied {
            return (current, log);
        }
    }
}

/// When every component is a single letter and the letters hit each
/// generator exactly once, returns `(index, positive)` per component.
pub fn signed_permutation(tuple: &[Word]) -> Option<Vec<(usize, bool)>> {
    let n = tuple.len();
    let mut seen = vec![false; n];
    let mut out = Vec::with_capacity(n);
    for w in tuple {
        if w.len() != 1 {
            return None;
        }
        let l = w.letters()[0];
        let idx = crate::words::letter_index(l);
        if idx >= n || seen[idx] {
            return None;
        }
        seen[idx] = true;
        out.push((idx, l > 0));
    }
    Some(out)
}

/// Composition of image maps: `(outer_after ∘ first)(a_i) =
/// first(a_i) with outer_after's images substituted`.
fn compose(outer_after: &[Word], first: &[Word]) -> Vec<Word> {
    first.iter().map(|w| w.substitute(outer_after)).collect()
}

/// Replays a reduction log ending in the signed permutation `perm`,
/// producing the automorphism pair `(forward, inverse)` with
/// `forward(generators) = original tuple` and both composites fixing every
/// generator.
pub fn replay(log: &[NielsenMove], perm: &[(usize, bool)]) -> (Vec<Word>, Vec<Word>) {
    let n = perm.len();
    // forward = perm ∘ mv_k^-1 ∘ ... ∘ mv_1^-1
    let perm_images: Vec<Word> = perm
        .iter()
        .map(|&(idx, positive)| {
            let g = Word::generator(idx);
            if positive {
                g
            } else {
                g.inverse()
            }
        })
        .collect();
    let mut forward = perm_images.clone();
    for mv in log.iter().rev() {
        forward = compose(&forward, &mv.inverse_automorphism_images(n));
    }
    // inverse = mv_1 ∘ ... ∘ mv_k ∘ perm^-1
    let mut perm_inverse: Vec<Word> = vec![Word::identity(); n];
    for (slot, &(idx, positive)) in perm.iter().enumerate() {
        let g = Word::generator(slot);
        perm_inverse[idx] = if positive { g } else { g.inverse() };
    }
    let mut inverse = perm_inverse;
    for mv in log.iter().rev() {
        inverse = compose(&mv.automorphism_images(n), &inverse);
    }
    (forward, inverse)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(raw: &[i32]) -> Word {
        Word::from_letters(raw.iter().copied())
    }

    #[test]
    fn shear_reduces_in_one_move() {
        let (reduced, log) = nielsen_reduce(&[w(&[1, 2]), w(&[2])]);
        assert_eq!(reduced, vec![w(&[1]), w(&[2])]);
        assert_eq!(log.len(), 1);
    }

    #[test]
    fn basis_is_a_fixed_point() {
        let (reduced, log) = nielsen_reduce(&[w(&[1]), w(&[2])]);
        assert_eq!(reduced, vec![w(&[1]), w(&[2])]);
        assert!(log.is_empty());
    }

    #[test]
    fn inverse_and_product_pair() {
        // (x^-1, yx) reduces to signed generators
        let (reduced, _) = nielsen_reduce(&[w(&[-1]), w(&[2, 1])]);
        assert!(signed_permutation(&reduced).is_some(), "{reduced:?}");
    }

    #[test]
    fn replay_recovers_original_tuple() {
        for tuple in [
            vec![w(&[1, 2]), w(&[2])],
            vec![w(&[-1]), w(&[2, 1])],
            vec![w(&[1, 2, -1]), w(&[1])],
            vec![w(&[2]), w(&[1])],
        ] {
            let (reduced, log) = nielsen_reduce(&tuple);
            let perm = signed_permutation(&reduced).expect("all are bases");
            let (forward, inverse) = replay(&log, &perm);
            assert_eq!(forward, tuple, "forward images must be the input tuple");
            // both composites fix the generators
            let fi = compose(&forward, &inverse);
            let if_ = compose(&inverse, &forward);
            let id: Vec<Word> = (0..2).map(Word::generator).collect();
            assert_eq!(fi, id);
            assert_eq!(if_, id);
        }
    }

    #[test]
    fn log_replays_to_stuck_tuple() {
        let tuple = vec![w(&[1, 2, -1]), w(&[1])];
        let (reduced, log) = nielsen_reduce(&tuple);
        let mut replayed = tuple.clone();
        for mv in &log {
            mv.apply(&mut replayed);
        }
        assert_eq!(replayed, reduced);
    }

    #[test]
    fn non_basis_sticks() {
        let (reduced, _) = nielsen_reduce(&[w(&[1, 1]), w(&[2])]);
        assert_eq!(reduced, vec![w(&[1, 1]), w(&[2])]);
        assert!(signed_permutation(&reduced).is_none());
        // degenerate tuple collapses to an identity component
        let (reduced, _) = nielsen_reduce(&[w(&[1]), w(&[1])]);
        assert!(reduced.iter().any(Word::is_identity));
    }
}
