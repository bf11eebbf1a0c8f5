//! String rewriting over the symmetrized alphabet, with bounded
//! Knuth-Bendix completion.
//!
//! Letters are rank codes: `2i` is generator `i`, `2i+1` its inverse, so the
//! shortlex order uses declaration order with `g < g^-1`. The free-reduction
//! rules `g g^-1 -> 1` are always present, so irreducible strings are freely
//! reduced and convert back to [`Word`] losslessly.

use crate::error::{Error, Result};
use crate::presentation::Presentation;
use crate::words::{letter_rank, Word};
use std::cmp::Ordering;
use std::collections::VecDeque;

type Str = Vec<u16>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteRules {
    rank: usize,
    rules: Vec<(Str, Str)>,
    confluence_certified: bool,
}

/// Caps for the completion loop.
#[derive(Clone, Copy, Debug)]
pub struct KbCaps {
    pub max_rules: usize,
    pub max_steps: usize,
}

impl Default for KbCaps {
    fn default() -> Self {
        KbCaps { max_rules: 512, max_steps: 20_000 }
    }
}

fn shortlex(a: &[u16], b: &[u16]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

fn word_to_str(w: &Word) -> Str {
    w.letters().iter().map(|&l| letter_rank(l) as u16).collect()
}

fn str_to_word(s: &[u16]) -> Word {
    Word::from_letters(s.iter().map(|&c| {
        let idx = (c / 2) as usize;
        crate::words::letter(idx, c % 2 == 0)
    }))
}

fn free_reduction_rules(rank: usize) -> Vec<(Str, Str)> {
    let mut rules = Vec::new();
    for i in 0..rank as u16 {
        rules.push((vec![2 * i, 2 * i + 1], Vec::new()));
        rules.push((vec![2 * i + 1, 2 * i], Vec::new()));
    }
    rules
}

impl RewriteRules {
    /// Initial rules for a presentation: free reduction plus one
    /// `relator -> 1` rule per relator.
    pub fn from_relators(p: &Presentation) -> RewriteRules {
        let mut rules = free_reduction_rules(p.rank());
        for r in p.relators() {
            rules.push((word_to_str(r), Vec::new()));
        }
        RewriteRules { rank: p.rank(), rules, confluence_certified: false }
    }

    /// Wraps user-supplied rules, adding free reduction and checking local
    /// confluence; the certification flag records the outcome.
    pub fn from_rules(rank: usize, user: Vec<(Word, Word)>) -> Result<RewriteRules> {
        let mut rules = free_reduction_rules(rank);
        for (lhs, rhs) in user {
            for w in [&lhs, &rhs] {
                if let Some(max) = w.max_index() {
                    if max >= rank {
                        return Err(Error::ArenaMismatch { index: max, arena: rank });
                    }
                }
            }
            let (l, r) = (word_to_str(&lhs), word_to_str(&rhs));
            match shortlex(&l, &r) {
                Ordering::Greater => rules.push((l, r)),
                Ordering::Less => rules.push((r, l)),
                Ordering::Equal => {}
            }
        }
        let mut out = RewriteRules { rank, rules, confluence_certified: false };
        out.dedup_rules();
        out.confluence_certified = out.locally_confluent();
        Ok(out)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rules(&self) -> impl Iterator<Item = (Word, Word)> + '_ {
        self.rules.iter().map(|(l, r)| (str_to_word(l), str_to_word(r)))
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn confluence_certified(&self) -> bool {
        self.confluence_certified
    }

    fn dedup_rules(&mut self) {
        self.rules.sort_by(|a, b| shortlex(&a.0, &b.0).then_with(|| shortlex(&a.1, &b.1)));
        self.rules.dedup();
    }

    /// Leftmost-lowest-rule rewriting to a normal form.
    pub fn reduce(&self, input: &[u16]) -> Str {
        let mut cur: Str = input.to_vec();
        'outer: loop {
            for pos in 0..cur.len() {
                for (lhs, rhs) in &self.rules {
                    if lhs.is_empty() || pos + lhs.len() > cur.len() {
                        continue;
                    }
                    if &cur[pos..pos + lhs.len()] == lhs.as_slice() {
                        let mut next = Vec::with_capacity(cur.len() - lhs.len() + rhs.len());
                        next.extend_from_slice(&cur[..pos]);
                        next.extend_from_slice(rhs);
                        next.extend_from_slice(&cur[pos + lhs.len()..]);
                        cur = next;
                        continue 'outer;
                    }
                }
            }
            return cur;
        }
    }

    /// Normal form of a word; exact only when certified.
    pub fn normal_form(&self, w: &Word) -> Word {
        str_to_word(&self.reduce(&word_to_str(w)))
    }

    fn critical_pairs(r1: &(Str, Str), r2: &(Str, Str)) -> Vec<(Str, Str)> {
        let (l1, rh1) = r1;
        let (l2, rh2) = r2;
        let mut pairs = Vec::new();
        // proper suffix-of-l1 = prefix-of-l2 overlaps
        let max = l1.len().min(l2.len());
        for k in 1..max {
            if l1[l1.len() - k..] == l2[..k] {
                // superposition l1 . l2[k..]
                let mut a = rh1.clone();
                a.extend_from_slice(&l2[k..]);
                let mut b = l1[..l1.len() - k].to_vec();
                b.extend_from_slice(rh2);
                pairs.push((a, b));
            }
        }
        // l2 contained in l1
        if l2.len() <= l1.len() {
            for p in 0..=l1.len() - l2.len() {
                if p == 0 && l1.len() == l2.len() {
                    continue;
                }
                if &l1[p..p + l2.len()] == l2.as_slice() {
                    let mut b = l1[..p].to_vec();
                    b.extend_from_slice(rh2);
                    b.extend_from_slice(&l1[p + l2.len()..]);
                    pairs.push((rh1.clone(), b));
                }
            }
        }
        pairs
    }

    fn locally_confluent(&self) -> bool {
        for r1 in &self.rules {
            for r2 in &self.rules {
                for (a, b) in Self::critical_pairs(r1, r2) {
                    if self.reduce(&a) != self.reduce(&b) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Bounded Knuth-Bendix completion. On success the result resolves every
/// critical pair, so its normal forms decide the word problem.
pub fn kb_complete(initial: &RewriteRules, caps: KbCaps) -> Result<RewriteRules> {
    let mut rules: Vec<(Str, Str)> = Vec::new();
    let mut equations: VecDeque<(Str, Str)> = initial.rules.iter().cloned().collect();
    let mut steps = 0usize;

    let reduce = |rules: &[(Str, Str)], input: &[u16]| -> Str {
        let tmp = RewriteRules {
            rank: initial.rank,
            rules: rules.to_vec(),
            confluence_certified: false,
        };
        tmp.reduce(input)
    };

    while let Some((a, b)) = equations.pop_front() {
        steps += 1;
        if steps > caps.max_steps {
            return Err(Error::Overflow { cap: caps.max_steps });
        }
        let a = reduce(&rules, &a);
        let b = reduce(&rules, &b);
        if a == b {
            continue;
        }
        let (lhs, rhs) = match shortlex(&a, &b) {
            Ordering::Greater => (a, b),
            Ordering::Less => (b, a),
            Ordering::Equal => unreachable!("distinct strings compare unequal in shortlex"),
        };
        // retire rules whose left side the new rule rewrites
        let mut kept = Vec::with_capacity(rules.len() + 1);
        for (l, r) in rules.drain(..) {
            let reducible = lhs.len() <= l.len()
                && (0..=l.len() - lhs.len()).any(|p| l[p..p + lhs.len()] == lhs[..]);
            if reducible {
                equations.push_back((l, r));
            } else {
                kept.push((l, r));
            }
        }
        rules = kept;
        let new_rule = (lhs, rhs);
        for r in &rules {
            for pair in RewriteRules::critical_pairs(&new_rule, r) {
                equations.push_back(pair);
            }
            for pair in RewriteRules::critical_pairs(r, &new_rule) {
                equations.push_back(pair);
            }
        }
        for pair in RewriteRules::critical_pairs(&new_rule, &new_rule) {
            equations.push_back(pair);
        }
        rules.push(new_rule);
        if rules.len() > caps.max_rules {
            return Err(Error::Overflow { cap: caps.max_rules });
        }
    }

    // normalize right-hand sides against the final system
    let final_rules: Vec<(Str, Str)> = rules
        .iter()
        .map(|(l, r)| (l.clone(), reduce(&rules, r)))
        .collect();
    let mut out = RewriteRules {
        rank: initial.rank,
        rules: final_rules,
        confluence_certified: false,
    };
    out.dedup_rules();
    debug_assert!(out.locally_confluent());
    out.confluence_certified = true;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_two_generator() {
        // < s | s^2 >: completion yields s*s -> 1 and s^-1 -> s
        let p = Presentation::parse("< s | s^2 >").unwrap();
        let done = kb_complete(&RewriteRules::from_relators(&p), KbCaps::default()).unwrap();
        assert!(done.confluence_certified());
        let rules: Vec<(Word, Word)> = done.rules().collect();
        let s = p.parse_word("s").unwrap();
        let s_inv = p.parse_word("s^-1").unwrap();
        let ss = p.parse_word("s^2").unwrap();
        assert!(rules.contains(&(ss, Word::identity())), "{rules:?}");
        assert!(rules.contains(&(s_inv, s)), "{rules:?}");
        assert_eq!(rules.len(), 2, "{rules:?}");
    }

    #[test]
    fn empty_relator_set_is_confluent() {
        let p = Presentation::parse("< a, b | >").unwrap();
        let done = kb_complete(&RewriteRules::from_relators(&p), KbCaps::default()).unwrap();
        assert!(done.confluence_certified());
        // only the free-reduction rules survive
        assert_eq!(done.len(), 4);
        let w = p.parse_word("a*b*b^-1*a").unwrap();
        assert_eq!(done.normal_form(&w), p.parse_word("a^2").unwrap());
    }

    #[test]
    fn infinite_dihedral_completes() {
        let p = Presentation::parse("< r, s | s^2, s*r*s*r >").unwrap();
        let done = kb_complete(&RewriteRules::from_relators(&p), KbCaps { max_rules: 50, max_steps: 5000 })
            .unwrap();
        assert!(done.confluence_certified());
        // normal forms match the closed form r^k and r^k s
        let sr = p.parse_word("s*r").unwrap();
        assert_eq!(done.normal_form(&sr), p.parse_word("r^-1*s").unwrap());
        let w = p.parse_word("s*r*s").unwrap();
        assert_eq!(done.normal_form(&w), p.parse_word("r^-1").unwrap());
    }

    #[test]
    fn user_rules_checked_for_confluence() {
        let p = Presentation::parse("< r, s | >").unwrap();
        let r = p.parse_word("r").unwrap();
        // s r -> r^-1 s and s s -> 1: confluent presentation of D-infinity
        let rules = RewriteRules::from_rules(
            2,
            vec![
                (p.parse_word("s*r").unwrap(), p.parse_word("r^-1*s").unwrap()),
                (p.parse_word("s*s").unwrap(), Word::identity()),
                (p.parse_word("s*r^-1").unwrap(), p.parse_word("r*s").unwrap()),
                (p.parse_word("s^-1").unwrap(), p.parse_word("s").unwrap()),
            ],
        )
        .unwrap();
        assert!(rules.confluence_certified());
        assert_eq!(rules.normal_form(&p.parse_word("s*r*s").unwrap()), r.inverse());
    }
}
