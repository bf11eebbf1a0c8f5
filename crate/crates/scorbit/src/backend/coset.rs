//! Coset enumeration (HLT-style relator scanning with a coset cap).

use crate::error::{Error, Result};
use crate::presentation::Presentation;
use crate::words::{letter_rank, Word};
use std::collections::VecDeque;

/// A closed coset table: the permutation action of each generator on the
/// cosets, with the coset reached by each generator from the base point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetTable {
    n_cosets: usize,
    /// `action[g][c]` is the coset reached from `c` by generator `g`.
    action: Vec<Vec<u32>>,
    /// `inverse_action[g][c]` is the coset reached by `g^-1`.
    inverse_action: Vec<Vec<u32>>,
    generator_images: Vec<u32>,
}

impl CosetTable {
    pub fn n_cosets(&self) -> usize {
        self.n_cosets
    }

    pub fn action(&self) -> &[Vec<u32>] {
        &self.action
    }

    pub fn inverse_action(&self) -> &[Vec<u32>] {
        &self.inverse_action
    }

    pub fn generator_images(&self) -> &[u32] {
        &self.generator_images
    }

    /// Applies a word to a coset.
    pub fn walk(&self, start: u32, w: &Word) -> u32 {
        let mut c = start;
        for &l in w.letters() {
            let i = crate::words::letter_index(l);
            c = if l > 0 { self.action[i][c as usize] } else { self.inverse_action[i][c as usize] };
        }
        c
    }

    /// Checks that every generator acts as a permutation and every relator
    /// acts trivially.
    pub fn validate(&self, p: &Presentation) -> bool {
        for g in 0..p.rank() {
            let mut seen = vec![false; self.n_cosets];
            for c in 0..self.n_cosets {
                let t = self.action[g][c] as usize;
                if t >= self.n_cosets || seen[t] {
                    return false;
                }
                seen[t] = true;
                if self.inverse_action[g][t] as usize != c {
                    return false;
                }
            }
        }
        (0..self.n_cosets as u32)
            .all(|c| p.relators().iter().all(|r| self.walk(c, r) == c))
    }
}

/// Enumerates the cosets of the subgroup generated by `subgroup_gens`,
/// failing with [`Error::Overflow`] when more than `cap` cosets would be
/// live at once. With no subgroup generators this produces the regular
/// representation, so `n_cosets` is the group order.
pub fn coset_enumerate(
    p: &Presentation,
    subgroup_gens: &[Word],
    cap: usize,
) -> Result<CosetTable> {
    if cap == 0 {
        return Err(Error::Overflow { cap });
    }
    let mut state = Enumerator::new(p.rank(), cap);
    let relators: Vec<Vec<usize>> = p.relators().iter().map(|r| to_letters(r)).collect();
    let subgroup: Vec<Vec<usize>> = subgroup_gens.iter().map(|w| to_letters(w)).collect();

    for w in &subgroup {
        state.scan_and_fill(0, w)?;
    }
    let mut cursor = 0usize;
    while cursor < state.table.len() {
        if state.find(cursor as u32) != cursor as u32 {
            cursor += 1;
            continue;
        }
        for r in &relators {
            state.scan_and_fill(cursor as u32, r)?;
            if state.find(cursor as u32) != cursor as u32 {
                break;
            }
        }
        if state.find(cursor as u32) != cursor as u32 {
            cursor += 1;
            continue;
        }
        for l in 0..2 * p.rank() {
            if state.entry(cursor as u32, l).is_none() {
                let fresh = state.define(cursor as u32, l)?;
                let _ = fresh;
            }
        }
        cursor += 1;
    }

    // closure check; a failed scan means pending work, so rescan
    loop {
        let mut stable = true;
        for c in 0..state.table.len() as u32 {
            if state.find(c) != c {
                continue;
            }
            for r in &relators {
                if state.walk_closed(c, r) != Some(c) {
                    state.scan_and_fill(c, r)?;
                    stable = false;
                }
            }
        }
        for w in &subgroup {
            if state.walk_closed(0, w).map(|e| state.find(e)) != Some(state.find(0)) {
                state.scan_and_fill(0, w)?;
                stable = false;
            }
        }
        if stable {
            break;
        }
    }

    state.compact(p)
}

fn to_letters(w: &Word) -> Vec<usize> {
    w.letters().iter().map(|&l| letter_rank(l)).collect()
}

fn invert_letter(l: usize) -> usize {
    l ^ 1
}

struct Enumerator {
    rank: usize,
    cap: usize,
    table: Vec<Vec<Option<u32>>>,
    parent: Vec<u32>,
    alive: usize,
    pending: VecDeque<(u32, u32)>,
}

impl Enumerator {
    fn new(rank: usize, cap: usize) -> Enumerator {
        Enumerator {
            rank,
            cap,
            table: vec![vec![None; 2 * rank]],
            parent: vec![0],
            alive: 1,
            pending: VecDeque::new(),
        }
    }

    fn find(&mut self, c: u32) -> u32 {
        let mut root = c;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut cur = c;
        while self.parent[cur as usize] != root {
            let next = self.parent[cur as usize];
            self.parent[cur as usize] = root;
            cur = next;
        }
        root
    }

    fn entry(&mut self, c: u32, l: usize) -> Option<u32> {
        let c = self.find(c);
        let t = self.table[c as usize][l]?;
        let t = self.find(t);
        self.table[c as usize][l] = Some(t);
        Some(t)
    }

    fn define(&mut self, from: u32, l: usize) -> Result<u32> {
        if self.alive >= self.cap {
            return Err(Error::Overflow { cap: self.cap });
        }
        let fresh = self.table.len() as u32;
        self.table.push(vec![None; 2 * self.rank]);
        self.parent.push(fresh);
        self.alive += 1;
        self.connect(from, l, fresh);
        Ok(fresh)
    }

    /// Records `from . l = to`, queuing a coincidence on conflict.
    fn connect(&mut self, from: u32, l: usize, to: u32) {
        let from = self.find(from);
        let to = self.find(to);
        match self.entry(from, l) {
            Some(existing) if existing != to => {
                self.pending.push_back((existing, to));
                self.merge_pending();
            }
            Some(_) => {}
            None => {
                self.table[from as usize][l] = Some(to);
                match self.entry(to, invert_letter(l)) {
                    Some(existing) if existing != from => {
                        self.pending.push_back((existing, from));
                        self.merge_pending();
                    }
                    Some(_) => {}
                    None => {
                        let to = self.find(to);
                        let from = self.find(from);
                        self.table[to as usize][invert_letter(l)] = Some(from);
                    }
                }
            }
        }
    }

    fn merge_pending(&mut self) {
        while let Some((a, b)) = self.pending.pop_front() {
            let a = self.find(a);
            let b = self.find(b);
            if a == b {
                continue;
            }
            let (survivor, dying) = if a < b { (a, b) } else { (b, a) };
            self.parent[dying as usize] = survivor;
            self.alive -= 1;
            for l in 0..2 * self.rank {
                if let Some(t) = self.table[dying as usize][l].take() {
                    let t = self.find(t);
                    match self.table[survivor as usize][l] {
                        Some(existing) => {
                            let existing = self.find(existing);
                            if existing != t {
                                self.pending.push_back((existing, t));
                            }
                        }
                        None => {
                            self.table[survivor as usize][l] = Some(t);
                            let back = self.table[t as usize][invert_letter(l)];
                            match back {
                                Some(e) if self.find(e) != survivor => {
                                    self.pending.push_back((e, survivor));
                                }
                                _ => {
                                    self.table[t as usize][invert_letter(l)] = Some(survivor);
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    /// Walks `word` from `c` using only defined entries.
    fn walk_closed(&mut self, c: u32, word: &[usize]) -> Option<u32> {
        let mut cur = self.find(c);
        for &l in word {
            cur = self.entry(cur, l)?;
        }
        Some(cur)
    }

    fn scan_and_fill(&mut self, start: u32, word: &[usize]) -> Result<()> {
        if word.is_empty() {
            return Ok(());
        }
        loop {
            let c = self.find(start);
            let mut f = c;
            let mut i = 0;
            while i < word.len() {
                match self.entry(f, word[i]) {
                    Some(t) => {
                        f = t;
                        i += 1;
                    }
                    None => break,
                }
            }
            if i == word.len() {
                if f != c {
                    self.pending.push_back((f, c));
                    self.merge_pending();
                }
                return Ok(());
            }
            let mut b = c;
            let mut j = word.len();
            while j > i {
                match self.entry(b, invert_letter(word[j - 1])) {
                    Some(t) => {
                        b = t;
                        j -= 1;
                    }
                    None => break,
                }
            }
            if j == i {
                if f != b {
                    self.pending.push_back((f, b));
                    self.merge_pending();
                    continue;
                }
                return Ok(());
            }
            if j == i + 1 {
                self.connect(f, word[i], b);
                return Ok(());
            }
            // fill one gap position and rescan
            self.define(f, word[i])?;
        }
    }

    fn compact(&mut self, p: &Presentation) -> Result<CosetTable> {
        let mut ids = vec![u32::MAX; self.table.len()];
        let mut live = Vec::new();
        for c in 0..self.table.len() as u32 {
            if self.find(c) == c {
                ids[c as usize] = live.len() as u32;
                live.push(c);
            }
        }
        let n = live.len();
        let rank = self.rank;
        let mut action = vec![vec![0u32; n]; rank];
        let mut inverse_action = vec![vec![0u32; n]; rank];
        for (new_id, &c) in live.iter().enumerate() {
            for g in 0..rank {
                let fwd = self
                    .entry(c, 2 * g)
                    .ok_or_else(|| Error::Unsupported("coset table not closed".into()))?;
                let bwd = self
                    .entry(c, 2 * g + 1)
                    .ok_or_else(|| Error::Unsupported("coset table not closed".into()))?;
                action[g][new_id] = ids[fwd as usize];
                inverse_action[g][new_id] = ids[bwd as usize];
            }
        }
        let generator_images = (0..rank).map(|g| action[g][0]).collect();
        let table = CosetTable {
            n_cosets: n,
            action,
            inverse_action,
            generator_images,
        };
        if !table.validate(p) {
            return Err(Error::Unsupported("coset table failed validation".into()));
        }
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_group_s3() {
        let p = Presentation::parse("< a, b | a^2, b^3, a*b*a*b >").unwrap();
        let t = coset_enumerate(&p, &[], 100).unwrap();
        assert_eq!(t.n_cosets(), 6);
    }

    #[test]
    fn trivial_group() {
        let p = Presentation::parse("< a | a >").unwrap();
        let t = coset_enumerate(&p, &[], 10).unwrap();
        assert_eq!(t.n_cosets(), 1);
    }

    #[test]
    fn infinite_group_overflows() {
        let p = Presentation::parse("< a | >").unwrap();
        assert!(matches!(
            coset_enumerate(&p, &[], 10),
            Err(Error::Overflow { cap: 10 })
        ));
    }

    #[test]
    fn klein_four_and_z6() {
        let p = Presentation::parse("< a, b | a^2, b^2, a*b*a^-1*b^-1 >").unwrap();
        assert_eq!(coset_enumerate(&p, &[], 50).unwrap().n_cosets(), 4);
        let p = Presentation::parse("< a, b | a^2, b^3, a*b*a^-1*b^-1 >").unwrap();
        assert_eq!(coset_enumerate(&p, &[], 50).unwrap().n_cosets(), 6);
    }

    #[test]
    fn subgroup_cosets() {
        // index of <a> in S3 is 3
        let p = Presentation::parse("< a, b | a^2, b^3, a*b*a*b >").unwrap();
        let a = p.parse_word("a").unwrap();
        let t = coset_enumerate(&p, &[a], 100).unwrap();
        assert_eq!(t.n_cosets(), 3);
    }

    #[test]
    fn quaternion_group() {
        let p = Presentation::parse("< a, b | a^4, a^2*b^-2, b^-1*a*b*a >").unwrap();
        let t = coset_enumerate(&p, &[], 100).unwrap();
        assert_eq!(t.n_cosets(), 8);
    }

    #[test]
    fn larger_finite_group() {
        // S4 = < a, b | a^2, b^3, (ab)^4 >
        let p = Presentation::parse("< a, b | a^2, b^3, a*b*a*b*a*b*a*b >").unwrap();
        let t = coset_enumerate(&p, &[], 200).unwrap();
        assert_eq!(t.n_cosets(), 24);
    }
}
