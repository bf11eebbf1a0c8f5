//! Computable realizations of finitely presented groups.
//!
//! A [`Backend`] bundles a presentation with a normal-form algorithm, element
//! enumeration in (length, lex) order, and capability flags that downstream
//! deciders consult. The five kinds:
//!
//! - free groups (normal form = free reduction),
//! - free abelian groups (exponent vectors),
//! - the infinite dihedral group (bespoke `r^k`, `r^k s` normal forms,
//!   independently coded so it can serve as an oracle for the others),
//! - finite groups realized by coset enumeration (regular representation),
//! - confluent string rewriting systems.
//!
//! The first four are certified: their word problem is decided exactly and
//! they are Hopfian. A rewriting backend decides words only when completion
//! certified confluence, and is Hopfian only by user assertion.

pub mod coset;
pub mod rewrite;

use crate::error::{Error, Result};
use crate::intmat::{solvable_left_i128, IntMatrix};
use crate::presentation::Presentation;
use crate::terms::TermTuple;
use crate::words::{Word, WordEnumerator};
use coset::CosetTable;
use num_bigint::BigInt;
use rewrite::{KbCaps, RewriteRules};
use std::collections::{BTreeSet, VecDeque};
use std::sync::{Arc, OnceLock};

/// Truthful capability record, fixed per backend kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Capabilities {
    pub word_problem_decidable: bool,
    pub hopfian_certified: bool,
    pub orbit_decider: bool,
}

/// Pluggable orbit decider for backends without a built-in one.
pub trait OrbitDeciderPlugin: Send + Sync {
    fn decide(&self, backend: &Backend, tuple: &[Word]) -> Result<crate::orbit::OrbitVerdict>;
}

#[derive(Clone)]
pub enum BackendKind {
    Free,
    FreeAbelian,
    InfiniteDihedral,
    Finite(FiniteRealization),
    Rewriting { rules: RewriteRules, hopfian_asserted: bool },
}

/// A word-problem oracle over a fixed presentation.
#[derive(Clone)]
pub struct Backend {
    kind: BackendKind,
    presentation: Presentation,
    plugin: Option<Arc<dyn OrbitDeciderPlugin>>,
}

impl std::fmt::Debug for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match &self.kind {
            BackendKind::Free => "free".to_string(),
            BackendKind::FreeAbelian => "abelian".to_string(),
            BackendKind::InfiniteDihedral => "dihedral".to_string(),
            BackendKind::Finite(r) => format!("finite({})", r.table.n_cosets()),
            BackendKind::Rewriting { rules, .. } => format!("rewriting({} rules)", rules.len()),
        };
        write!(f, "Backend[{kind}, {}]", self.presentation)
    }
}

fn free_names(rank: usize) -> Vec<String> {
    const SHORT: [&str; 4] = ["x", "y", "z", "w"];
    if rank <= SHORT.len() {
        SHORT[..rank].iter().map(|s| s.to_string()).collect()
    } else {
        (1..=rank).map(|i| format!("x{i}")).collect()
    }
}

fn abelian_names(rank: usize) -> Vec<String> {
    const SHORT: [&str; 4] = ["a", "b", "c", "d"];
    if rank <= SHORT.len() {
        SHORT[..rank].iter().map(|s| s.to_string()).collect()
    } else {
        (1..=rank).map(|i| format!("a{i}")).collect()
    }
}

impl Backend {
    pub fn free_group(rank: usize) -> Result<Backend> {
        Ok(Backend {
            kind: BackendKind::Free,
            presentation: Presentation::free(free_names(rank))?,
            plugin: None,
        })
    }

    pub fn free_abelian(rank: usize) -> Result<Backend> {
        let mut relators = Vec::new();
        for i in 0..rank {
            for j in i + 1..rank {
                let (a, b) = (Word::generator(i), Word::generator(j));
                relators.push(a.concat(&b).concat(&a.inverse()).concat(&b.inverse()));
            }
        }
        Ok(Backend {
            kind: BackendKind::FreeAbelian,
            presentation: Presentation::new(abelian_names(rank), relators)?,
            plugin: None,
        })
    }

    pub fn infinite_dihedral() -> Backend {
        let p = Presentation::parse("< r, s | s^2, s*r*s*r >").expect("fixed presentation");
        Backend { kind: BackendKind::InfiniteDihedral, presentation: p, plugin: None }
    }

    /// Realizes a finite group by enumerating the cosets of the trivial
    /// subgroup.
    pub fn finite_from_presentation(p: Presentation, cap: usize) -> Result<Backend> {
        let table = coset::coset_enumerate(&p, &[], cap)?;
        let realization = FiniteRealization::new(table);
        Ok(Backend { kind: BackendKind::Finite(realization), presentation: p, plugin: None })
    }

    /// Runs bounded completion on the presentation's relators. Completion
    /// failure is not fatal: the backend is returned uncertified and refuses
    /// normal-form queries.
    pub fn rewriting_from_presentation(
        p: Presentation,
        caps: KbCaps,
        hopfian_asserted: bool,
    ) -> Backend {
        let initial = RewriteRules::from_relators(&p);
        let rules = kb_completion_or_uncertified(initial, caps);
        Backend {
            kind: BackendKind::Rewriting { rules, hopfian_asserted },
            presentation: p,
            plugin: None,
        }
    }

    /// Wraps user-supplied rules (free reduction is added automatically);
    /// certification records the local-confluence check.
    pub fn rewriting_from_rules(
        p: Presentation,
        user_rules: Vec<(Word, Word)>,
        hopfian_asserted: bool,
    ) -> Result<Backend> {
        let rules = RewriteRules::from_rules(p.rank(), user_rules)?;
        Ok(Backend {
            kind: BackendKind::Rewriting { rules, hopfian_asserted },
            presentation: p,
            plugin: None,
        })
    }

    pub fn with_orbit_plugin(mut self, plugin: Arc<dyn OrbitDeciderPlugin>) -> Backend {
        self.plugin = Some(plugin);
        self
    }

    pub fn into_shared(self) -> Arc<Backend> {
        Arc::new(self)
    }

    pub fn kind(&self) -> &BackendKind {
        &self.kind
    }

    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    pub fn rank(&self) -> usize {
        self.presentation.rank()
    }

    pub fn capabilities(&self) -> Capabilities {
        match &self.kind {
            BackendKind::Free
            | BackendKind::FreeAbelian
            | BackendKind::InfiniteDihedral
            | BackendKind::Finite(_) => Capabilities {
                word_problem_decidable: true,
                hopfian_certified: true,
                orbit_decider: true,
            },
            BackendKind::Rewriting { rules, hopfian_asserted } => Capabilities {
                word_problem_decidable: rules.confluence_certified(),
                hopfian_certified: *hopfian_asserted,
                orbit_decider: self.plugin.is_some(),
            },
        }
    }

    pub fn plugin(&self) -> Option<&Arc<dyn OrbitDeciderPlugin>> {
        self.plugin.as_ref()
    }

    /// Group order, when finite and known.
    pub fn order(&self) -> Option<usize> {
        match &self.kind {
            BackendKind::Finite(r) => Some(r.table.n_cosets()),
            _ => None,
        }
    }

    fn check_arena(&self, w: &Word) -> Result<()> {
        if let Some(max) = w.max_index() {
            if max >= self.rank() {
                return Err(Error::ArenaMismatch { index: max, arena: self.rank() });
            }
        }
        Ok(())
    }

    /// Canonical representative: `normal_form(u) = normal_form(v)` iff
    /// `u = v` in the group.
    pub fn normal_form(&self, w: &Word) -> Result<Word> {
        self.check_arena(w)?;
        match &self.kind {
            BackendKind::Free => Ok(w.clone()),
            BackendKind::FreeAbelian => {
                let sums = w.exponent_sums(self.rank());
                Ok(abelian_render(&sums))
            }
            BackendKind::InfiniteDihedral => {
                let (k, s) = dihedral_shape(w);
                Ok(dihedral_render(k, s))
            }
            BackendKind::Finite(r) => {
                let c = r.table.walk(0, w);
                Ok(r.min_words[c as usize].clone())
            }
            BackendKind::Rewriting { rules, .. } => {
                if !rules.confluence_certified() {
                    return Err(Error::NotCertified);
                }
                Ok(rules.normal_form(w))
            }
        }
    }

    pub fn is_identity(&self, w: &Word) -> Result<bool> {
        Ok(self.normal_form(w)?.is_identity())
    }

    pub fn words_equal(&self, u: &Word, v: &Word) -> Result<bool> {
        Ok(self.normal_form(u)? == self.normal_form(v)?)
    }

    /// Whether the tuple satisfies every relator of this backend's own
    /// presentation.
    pub fn satisfies_own_relators(&self, tuple: &[Word]) -> Result<bool> {
        satisfies_relators(&self.presentation, self, tuple)
    }

    /// Index of the first relator the tuple violates, if any.
    pub fn violated_relator(&self, tuple: &[Word]) -> Result<Option<usize>> {
        if tuple.len() != self.rank() {
            return Err(Error::ArityMismatch { expected: self.rank(), got: tuple.len() });
        }
        for (i, r) in self.presentation.relators().iter().enumerate() {
            if !self.is_identity(&r.substitute(tuple))? {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    /// Enumerates normal forms in (length, lex) order, each exactly once.
    pub fn elements(&self) -> Result<Elements<'_>> {
        Ok(match &self.kind {
            BackendKind::Free => Elements::Free(WordEnumerator::new(self.rank())),
            BackendKind::FreeAbelian => Elements::Abelian {
                rank: self.rank(),
                next_weight: 0,
                buf: VecDeque::new(),
            },
            BackendKind::InfiniteDihedral => {
                Elements::Dihedral { next_len: 0, buf: VecDeque::new() }
            }
            BackendKind::Finite(r) => Elements::Finite { words: r.discovery.iter() },
            BackendKind::Rewriting { rules, .. } => {
                if !rules.confluence_certified() {
                    return Err(Error::NotCertified);
                }
                Elements::Rewriting {
                    rules,
                    inner: WordEnumerator::new(self.rank()),
                    pushback: None,
                    level: 0,
                    buf: VecDeque::new(),
                    done: false,
                }
            }
        })
    }

    /// Enumerates `n`-tuples of elements ordered by total length, then
    /// componentwise (length, lex).
    pub fn element_tuples(&self, n: usize) -> Result<ElementTuples<'_>> {
        Ok(ElementTuples {
            n,
            feeder: self.elements()?,
            feeder_done: false,
            pushback: None,
            by_len: Vec::new(),
            total: 0,
            lengths: vec![0; n],
            indices: vec![0; n],
            started: false,
            done: false,
        })
    }

    /// Sound pruning for witness searches: `true` means no element tuple can
    /// satisfy `t(c) = target`, proved in the abelianization. Exact on free
    /// abelian backends, a necessary condition elsewhere; finite and
    /// rewriting backends never prune.
    pub fn witness_obstruction(&self, t: &TermTuple, target: &[Word]) -> Result<bool> {
        if target.len() != t.len() {
            return Err(Error::ArityMismatch { expected: t.len(), got: target.len() });
        }
        match &self.kind {
            BackendKind::Free | BackendKind::FreeAbelian => {
                let expo = t.exponent_matrix();
                let k = t.arity_in();
                let n = t.len();
                // unknowns X (k x rank) with M_t X = M_target, tested per
                // generator coordinate as row systems x * M_t^T = b
                let a_t: Vec<Vec<i128>> = (0..k)
                    .map(|j| (0..n).map(|i| expo[i][j] as i128).collect())
                    .collect();
                let rank = self.rank();
                let targets: Vec<Vec<i64>> =
                    target.iter().map(|w| w.exponent_sums(rank)).collect();
                let rows: Vec<Vec<i128>> = (0..rank)
                    .map(|g| (0..n).map(|i| targets[i][g] as i128).collect())
                    .collect();
                match solvable_left_i128(&a_t, &rows) {
                    Some(solvable) => Ok(!solvable),
                    None => {
                        // overflow: redo with exact integers
                        let a_big = IntMatrix::from_rows(
                            &a_t.iter()
                                .map(|r| r.iter().map(|&v| BigInt::from(v)).collect::<Vec<_>>())
                                .collect::<Vec<_>>(),
                        )?;
                        for row in rows {
                            let rhs: Vec<BigInt> = row.into_iter().map(BigInt::from).collect();
                            if a_big.solve_left(&rhs)?.is_none() {
                                return Ok(true);
                            }
                        }
                        Ok(false)
                    }
                }
            }
            BackendKind::InfiniteDihedral => {
                let expo = t.exponent_matrix();
                let n = t.len();
                let k = t.arity_in();
                let m2: Vec<Vec<bool>> =
                    (0..n).map(|i| (0..k).map(|j| expo[i][j] % 2 != 0).collect()).collect();
                // abelianization is Z/2 x Z/2: one F2 system per coordinate
                for coord in 0..2usize {
                    let b: Vec<bool> = target
                        .iter()
                        .map(|w| w.exponent_sums(2)[coord] % 2 != 0)
                        .collect();
                    if !solvable_f2(&m2, &b) {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            BackendKind::Finite(_) | BackendKind::Rewriting { .. } => Ok(false),
        }
    }

    /// Backend-assisted construction of terms expressing the generators from
    /// `tuple`, for callers that have already checked the relators hold.
    pub fn expressing_terms_hint(&self, tuple: &[Word]) -> Result<ExpressingHint> {
        if tuple.len() != self.rank() {
            return Err(Error::ArityMismatch { expected: self.rank(), got: tuple.len() });
        }
        match &self.kind {
            BackendKind::FreeAbelian => {
                let rank = self.rank();
                let rows: Vec<Vec<BigInt>> = tuple
                    .iter()
                    .map(|w| w.exponent_sums(rank).into_iter().map(BigInt::from).collect())
                    .collect();
                let m = IntMatrix::from_rows(&rows)?;
                match m.inverse_unimodular()? {
                    None => Ok(ExpressingHint::ProvablyNone),
                    Some(inv) => {
                        let mut comps = Vec::with_capacity(rank);
                        for i in 0..rank {
                            let mut w = Word::identity();
                            for j in 0..rank {
                                let e = int_to_i64(inv.get(i, j));
                                let Some(e) = e else { return Ok(ExpressingHint::NoHint) };
                                w = w.concat(&Word::generator(j).pow(e));
                            }
                            comps.push(w);
                        }
                        Ok(ExpressingHint::Terms(TermTuple::new(rank, comps)?))
                    }
                }
            }
            BackendKind::InfiniteDihedral => {
                let n1 = self.normal_form(&tuple[0])?;
                let n2 = self.normal_form(&tuple[1])?;
                let (k1, s1) = dihedral_shape(&n1);
                let (k2, s2) = dihedral_shape(&n2);
                if s1 || !s2 || k1.abs() != 1 {
                    return Ok(ExpressingHint::ProvablyNone);
                }
                let eps = k1;
                let t1 = Word::generator(0).pow(eps);
                let t2 = Word::generator(0).pow(-eps * k2).concat(&Word::generator(1));
                Ok(ExpressingHint::Terms(TermTuple::new(2, vec![t1, t2])?))
            }
            _ => Ok(ExpressingHint::NoHint),
        }
    }

    /// Image tuples of all automorphisms of a finite backend (which is
    /// simultaneously the orbit of the generating tuple). Computed once per
    /// backend.
    pub fn finite_orbit_set(&self) -> Result<&BTreeSet<Vec<Word>>> {
        let BackendKind::Finite(r) = &self.kind else {
            return Err(Error::Unsupported("orbit set is only cached for finite backends".into()));
        };
        Ok(r.orbit_set(&self.presentation))
    }

    /// Element-level inverse of a validated automorphism of a finite
    /// backend: images of each generator under the inverse map, or `None`
    /// when the endomorphism is not bijective.
    pub fn finite_inverse_images(&self, images: &[Word]) -> Result<Option<Vec<Word>>> {
        let BackendKind::Finite(r) = &self.kind else {
            return Err(Error::Unsupported("element-level inverses need a finite backend".into()));
        };
        let n = r.table.n_cosets();
        let mut perm = vec![u32::MAX; n];
        let mut seen = vec![false; n];
        for c in 0..n {
            let image_word = r.min_words[c].substitute(images);
            let target = r.table.walk(0, &image_word);
            if seen[target as usize] {
                return Ok(None);
            }
            seen[target as usize] = true;
            perm[c] = target;
        }
        let mut inverse = Vec::with_capacity(self.rank());
        for g in 0..self.rank() {
            let coset_of_gen = r.table.generator_images()[g];
            let pre = perm
                .iter()
                .position(|&t| t == coset_of_gen)
                .expect("bijection covers every coset");
            inverse.push(r.min_words[pre].clone());
        }
        Ok(Some(inverse))
    }

    /// Length of the longest normal form, when finite.
    pub fn max_element_length(&self) -> Option<usize> {
        match &self.kind {
            BackendKind::Finite(r) => r.min_words.iter().map(Word::len).max(),
            _ => None,
        }
    }
}

/// Evaluates the relators of `p` at `tuple` inside `b`.
pub fn satisfies_relators(p: &Presentation, b: &Backend, tuple: &[Word]) -> Result<bool> {
    if tuple.len() != p.rank() {
        return Err(Error::ArityMismatch { expected: p.rank(), got: tuple.len() });
    }
    for w in tuple {
        b.check_arena(w)?;
    }
    for r in p.relators() {
        if !b.is_identity(&r.substitute(tuple))? {
            return Ok(false);
        }
    }
    Ok(true)
}

pub enum ExpressingHint {
    NoHint,
    ProvablyNone,
    Terms(TermTuple),
}

fn int_to_i64(v: &BigInt) -> Option<i64> {
    i64::try_from(v).ok()
}

fn abelian_render(sums: &[i64]) -> Word {
    let mut letters = Vec::new();
    for (i, &e) in sums.iter().enumerate() {
        let l = crate::words::letter(i, e > 0);
        for _ in 0..e.unsigned_abs() {
            letters.push(l);
        }
    }
    Word::from_reduced(letters)
}

/// `(k, s)` with the element equal to `r^k s^(s as u8)`.
pub fn dihedral_shape(w: &Word) -> (i64, bool) {
    let mut k = 0i64;
    let mut s = false;
    for &l in w.letters() {
        match crate::words::letter_index(l) {
            0 => {
                let step = if l > 0 { 1 } else { -1 };
                k += if s { -step } else { step };
            }
            _ => s = !s,
        }
    }
    (k, s)
}

pub fn dihedral_render(k: i64, s: bool) -> Word {
    let mut w = Word::generator(0).pow(k);
    if s {
        w = w.concat(&Word::generator(1));
    }
    w
}

/// Solvability of `a * x = b` over F2: is `b` in the column span of `a`?
fn solvable_f2(a: &[Vec<bool>], b: &[bool]) -> bool {
    let rows = a.len();
    if rows == 0 {
        return true;
    }
    let cols = a[0].len();
    let mut basis: Vec<Vec<bool>> = Vec::new();
    let insert = |mut v: Vec<bool>, basis: &mut Vec<Vec<bool>>| -> Vec<bool> {
        for bv in basis.iter() {
            let lead = bv.iter().position(|&x| x).expect("basis vectors are nonzero");
            if v[lead] {
                for (x, y) in v.iter_mut().zip(bv) {
                    *x ^= y;
                }
            }
        }
        v
    };
    for j in 0..cols {
        let col: Vec<bool> = (0..rows).map(|i| a[i][j]).collect();
        let reduced = insert(col, &mut basis);
        if reduced.iter().any(|&x| x) {
            basis.push(reduced);
            basis.sort_by_key(|r| r.iter().position(|&x| x));
        }
    }
    let target = insert(b.to_vec(), &mut basis);
    target.iter().all(|&x| !x)
}

fn kb_completion_or_uncertified(initial: RewriteRules, caps: KbCaps) -> RewriteRules {
    match rewrite::kb_complete(&initial, caps) {
        Ok(done) => done,
        Err(_) => initial,
    }
}

/// Finite realization: the regular-representation coset table plus minimal
/// words computed breadth-first, so element `i` of `discovery` is the `i`-th
/// normal form in (length, lex) order.
#[derive(Clone)]
pub struct FiniteRealization {
    table: CosetTable,
    min_words: Vec<Word>,
    discovery: Vec<Word>,
    orbit: OnceLock<BTreeSet<Vec<Word>>>,
}

impl FiniteRealization {
    fn new(table: CosetTable) -> FiniteRealization {
        let n = table.n_cosets();
        let rank = table.action().len();
        let mut min_words: Vec<Option<Word>> = vec![None; n];
        let mut discovery = Vec::with_capacity(n);
        let mut queue = VecDeque::new();
        min_words[0] = Some(Word::identity());
        discovery.push(Word::identity());
        queue.push_back(0u32);
        while let Some(c) = queue.pop_front() {
            let base = min_words[c as usize].clone().expect("visited");
            for rank_code in 0..2 * rank {
                let g = rank_code / 2;
                let positive = rank_code % 2 == 0;
                let next = if positive {
                    table.action()[g][c as usize]
                } else {
                    table.inverse_action()[g][c as usize]
                };
                if min_words[next as usize].is_none() {
                    let w = base.concat(&Word::from_reduced(vec![crate::words::letter(
                        g, positive,
                    )]));
                    min_words[next as usize] = Some(w.clone());
                    discovery.push(w);
                    queue.push_back(next);
                }
            }
        }
        FiniteRealization {
            table,
            min_words: min_words.into_iter().map(|w| w.expect("table is connected")).collect(),
            discovery,
            orbit: OnceLock::new(),
        }
    }

    pub fn table(&self) -> &CosetTable {
        &self.table
    }

    fn generated_subgroup_size(&self, tuple: &[Word]) -> usize {
        let n = self.table.n_cosets();
        let mut visited = vec![false; n];
        let mut queue = VecDeque::new();
        visited[0] = true;
        queue.push_back(0u32);
        let mut count = 1;
        while let Some(c) = queue.pop_front() {
            for w in tuple {
                for step in [w.clone(), w.inverse()] {
                    let t = self.table.walk(c, &step);
                    if !visited[t as usize] {
                        visited[t as usize] = true;
                        count += 1;
                        queue.push_back(t);
                    }
                }
            }
        }
        count
    }

    fn orbit_set(&self, p: &Presentation) -> &BTreeSet<Vec<Word>> {
        self.orbit.get_or_init(|| {
            let n = self.table.n_cosets();
            let rank = p.rank();
            let mut out = BTreeSet::new();
            let mut indices = vec![0usize; rank];
            loop {
                let tuple: Vec<Word> =
                    indices.iter().map(|&i| self.discovery[i].clone()).collect();
                let satisfies = p.relators().iter().all(|r| {
                    let image = r.substitute(&tuple);
                    self.table.walk(0, &image) == 0
                });
                if satisfies && self.generated_subgroup_size(&tuple) == n {
                    // normal-form the tuple before caching
                    let nf: Vec<Word> = tuple
                        .iter()
                        .map(|w| self.min_words[self.table.walk(0, w) as usize].clone())
                        .collect();
                    out.insert(nf);
                }
                // odometer over element indices
                let mut pos = rank;
                loop {
                    if pos == 0 {
                        return out;
                    }
                    pos -= 1;
                    indices[pos] += 1;
                    if indices[pos] < n {
                        break;
                    }
                    indices[pos] = 0;
                }
            }
        })
    }
}

/// Element stream in (length, lex) normal-form order.
pub enum Elements<'b> {
    Free(WordEnumerator),
    Abelian { rank: usize, next_weight: usize, buf: VecDeque<Word> },
    Dihedral { next_len: usize, buf: VecDeque<Word> },
    Finite { words: std::slice::Iter<'b, Word> },
    Rewriting {
        rules: &'b RewriteRules,
        inner: WordEnumerator,
        pushback: Option<Word>,
        level: usize,
        buf: VecDeque<Word>,
        done: bool,
    },
}

fn abelian_vectors(rank: usize, weight: usize) -> Vec<Word> {
    fn rec(rank: usize, weight: usize, pos: usize, acc: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if pos == rank {
            if weight == 0 {
                out.push(acc.clone());
            }
            return;
        }
        for mag in 0..=weight {
            let signs: &[i64] = if mag == 0 { &[1] } else { &[1, -1] };
            for &sign in signs {
                acc.push(sign * mag as i64);
                rec(rank, weight - mag, pos + 1, acc, out);
                acc.pop();
            }
        }
    }
    let mut vecs = Vec::new();
    rec(rank, weight, 0, &mut Vec::new(), &mut vecs);
    let mut words: Vec<Word> = vecs.iter().map(|v| abelian_render(v)).collect();
    words.sort_by(|a, b| a.cmp_length_lex(b));
    words
}

fn dihedral_level(len: usize) -> Vec<Word> {
    if len == 0 {
        return vec![Word::identity()];
    }
    let l = len as i64;
    let mut words = vec![
        dihedral_render(l, false),
        dihedral_render(-l, false),
        dihedral_render(l - 1, true),
    ];
    if l > 1 {
        words.push(dihedral_render(-(l - 1), true));
    }
    words.sort_by(|a, b| a.cmp_length_lex(b));
    words
}

impl Iterator for Elements<'_> {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        match self {
            Elements::Free(inner) => inner.next(),
            Elements::Abelian { rank, next_weight, buf } => {
                while buf.is_empty() {
                    if *rank == 0 && *next_weight > 0 {
                        return None;
                    }
                    buf.extend(abelian_vectors(*rank, *next_weight));
                    *next_weight += 1;
                }
                buf.pop_front()
            }
            Elements::Dihedral { next_len, buf } => {
                while buf.is_empty() {
                    buf.extend(dihedral_level(*next_len));
                    *next_len += 1;
                }
                buf.pop_front()
            }
            Elements::Finite { words } => words.next().cloned(),
            Elements::Rewriting { rules, inner, pushback, level, buf, done } => {
                // If a whole length level has no irreducible word, no longer
                // level can either: every factor of an irreducible word is
                // irreducible.
                while buf.is_empty() {
                    if *done {
                        return None;
                    }
                    let current = *level;
                    *level += 1;
                    let mut exhausted = false;
                    loop {
                        let next = match pushback.take() {
                            Some(w) => Some(w),
                            None => inner.next(),
                        };
                        match next {
                            None => {
                                exhausted = true;
                                break;
                            }
                            Some(w) if w.len() == current => {
                                let codes: Vec<u16> = w
                                    .letters()
                                    .iter()
                                    .map(|&l| crate::words::letter_rank(l) as u16)
                                    .collect();
                                if rules.reduce(&codes) == codes {
                                    buf.push_back(w);
                                }
                            }
                            Some(w) => {
                                *pushback = Some(w);
                                break;
                            }
                        }
                    }
                    if buf.is_empty() && (current > 0 || exhausted) {
                        *done = true;
                        return None;
                    }
                }
                buf.pop_front()
            }
        }
    }
}

/// Tuples of elements ordered by total length, then componentwise
/// (length, lex); resumable and deterministic.
pub struct ElementTuples<'b> {
    n: usize,
    feeder: Elements<'b>,
    feeder_done: bool,
    pushback: Option<Word>,
    by_len: Vec<Vec<Word>>,
    total: usize,
    lengths: Vec<usize>,
    indices: Vec<usize>,
    started: bool,
    done: bool,
}

impl ElementTuples<'_> {
    /// Materializes the group of elements of exactly length `l`; `false`
    /// when the backend has no more elements at all beyond current groups.
    fn ensure_len(&mut self, l: usize) -> bool {
        while self.by_len.len() <= l {
            if self.feeder_done {
                self.by_len.push(Vec::new());
                continue;
            }
            let current_len = self.by_len.len();
            let mut group = Vec::new();
            loop {
                let next = match self.pushback.take() {
                    Some(w) => Some(w),
                    None => self.feeder.next(),
                };
                match next {
                    None => {
                        self.feeder_done = true;
                        break;
                    }
                    Some(w) if w.len() == current_len => group.push(w),
                    Some(w) => {
                        self.pushback = Some(w);
                        break;
                    }
                }
            }
            self.by_len.push(group);
        }
        true
    }

    fn group(&mut self, l: usize) -> usize {
        self.ensure_len(l);
        self.by_len[l].len()
    }

    fn first_lengths(&mut self, total: usize) -> Option<Vec<usize>> {
        // ascending-lex least composition of `total` whose groups are all
        // nonempty: put as much as possible in the last slot, but every slot
        // must land on a realizable length
        self.next_lengths_from(vec![0; self.n], total, true)
    }

    /// Finds the lex-least composition >= the given one (or strictly greater
    /// when `include == false`) summing to `total` with all groups nonempty.
    fn next_lengths_from(
        &mut self,
        mut lens: Vec<usize>,
        total: usize,
        include: bool,
    ) -> Option<Vec<usize>> {
        if self.n == 0 {
            return None;
        }
        lens[self.n - 1] = total - lens[..self.n - 1].iter().sum::<usize>();
        let mut candidate = if include {
            Some(lens.clone())
        } else {
            bump_composition(&mut lens).then(|| lens.clone())
        };
        while let Some(c) = candidate {
            if c.iter().all(|&l| self.group(l) > 0) {
                return Some(c);
            }
            let mut next = c;
            candidate = bump_composition(&mut next).then_some(next);
        }
        None
    }
}

/// Next composition with the same sum in ascending lex order.
fn bump_composition(lens: &mut [usize]) -> bool {
    let n = lens.len();
    let mut p = n;
    while p > 1 {
        p -= 1;
        let suffix: usize = lens[p..].iter().sum();
        if suffix > 0 {
            lens[p - 1] += 1;
            for l in &mut lens[p..] {
                *l = 0;
            }
            lens[n - 1] = suffix - 1;
            return true;
        }
    }
    false
}

impl Iterator for ElementTuples<'_> {
    type Item = Vec<Word>;

    fn next(&mut self) -> Option<Vec<Word>> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            if self.n == 0 {
                self.done = true;
                return Some(Vec::new());
            }
            match self.first_lengths(0) {
                Some(lens) => {
                    self.lengths = lens;
                    self.indices = vec![0; self.n];
                }
                None => {
                    self.done = true;
                    return None;
                }
            }
            return Some(self.current());
        }
        // odometer over per-component indices
        let mut pos = self.n;
        while pos > 0 {
            pos -= 1;
            self.indices[pos] += 1;
            if self.indices[pos] < self.group(self.lengths[pos]) {
                for i in pos + 1..self.n {
                    self.indices[i] = 0;
                }
                return Some(self.current());
            }
            self.indices[pos] = 0;
        }
        // next composition, or next total
        loop {
            match self.next_lengths_from(self.lengths.clone(), self.total, false) {
                Some(lens) => {
                    self.lengths = lens;
                    self.indices = vec![0; self.n];
                    return Some(self.current());
                }
                None => {
                    self.total += 1;
                    // stop once the backend is exhausted and no composition
                    // of this or any larger total can be filled
                    if self.feeder_done {
                        let max_len =
                            (0..self.by_len.len()).rev().find(|&l| !self.by_len[l].is_empty());
                        match max_len {
                            Some(m) if self.total <= m * self.n => {}
                            _ => {
                                self.done = true;
                                return None;
                            }
                        }
                    }
                    match self.first_lengths(self.total) {
                        Some(lens) => {
                            self.lengths = lens;
                            self.indices = vec![0; self.n];
                            return Some(self.current());
                        }
                        None => continue,
                    }
                }
            }
        }
    }
}

impl ElementTuples<'_> {
    fn current(&mut self) -> Vec<Word> {
        (0..self.n)
            .map(|i| {
                let l = self.lengths[i];
                self.by_len[l][self.indices[i]].clone()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(p: &Presentation, text: &str) -> Word {
        p.parse_word(text).unwrap()
    }

    #[test]
    fn free_normal_forms() {
        let b = Backend::free_group(2).unwrap();
        let p = b.presentation().clone();
        assert_eq!(b.normal_form(&w(&p, "x*y*y^-1")).unwrap(), w(&p, "x"));
        assert!(!b.is_identity(&w(&p, "x*y*x^-1*y^-1")).unwrap());
    }

    #[test]
    fn abelian_normal_forms() {
        let b = Backend::free_abelian(2).unwrap();
        let p = b.presentation().clone();
        assert_eq!(b.normal_form(&w(&p, "b*a*b^-1")).unwrap(), w(&p, "a"));
        assert!(b.is_identity(&w(&p, "a*b*a^-1*b^-1")).unwrap());
    }

    #[test]
    fn dihedral_normal_forms() {
        let b = Backend::infinite_dihedral();
        let p = b.presentation().clone();
        assert_eq!(b.normal_form(&w(&p, "s*r")).unwrap(), w(&p, "r^-1*s"));
        assert!(b.is_identity(&w(&p, "s*s")).unwrap());
        assert!(b.is_identity(&w(&p, "s*r*s*r")).unwrap());
        assert!(!b.is_identity(&w(&p, "r*s")).unwrap());
    }

    #[test]
    fn finite_s3() {
        let p = Presentation::parse("< a, b | a^2, b^3, a*b*a*b >").unwrap();
        let b = Backend::finite_from_presentation(p.clone(), 100).unwrap();
        assert_eq!(b.order(), Some(6));
        assert!(b.is_identity(&w(&p, "a*b*a*b")).unwrap());
        assert!(!b.is_identity(&w(&p, "a*b")).unwrap());
        let elems: Vec<Word> = b.elements().unwrap().collect();
        assert_eq!(elems.len(), 6);
        // all distinct normal forms, fixed under normal_form
        for e in &elems {
            assert_eq!(&b.normal_form(e).unwrap(), e);
        }
    }

    #[test]
    fn dihedral_element_order() {
        let b = Backend::infinite_dihedral();
        let p = b.presentation().clone();
        let elems: Vec<Word> = b.elements().unwrap().take(5).collect();
        assert_eq!(
            elems,
            vec![
                Word::identity(),
                w(&p, "r"),
                w(&p, "r^-1"),
                w(&p, "s"),
                w(&p, "r^2"),
            ]
        );
    }

    #[test]
    fn abelian_element_order_no_duplicates() {
        let b = Backend::free_abelian(2).unwrap();
        let elems: Vec<Word> = b.elements().unwrap().take(100).collect();
        let mut seen = std::collections::HashSet::new();
        for e in &elems {
            assert!(seen.insert(e.clone()));
            assert_eq!(&b.normal_form(e).unwrap(), e);
        }
        for pair in elems.windows(2) {
            assert!(pair[0].cmp_length_lex(&pair[1]).is_lt());
        }
    }

    #[test]
    fn satisfies_relators_examples() {
        let p = Presentation::parse("< a, b | a^2 >").unwrap();
        let s3 = Presentation::parse("< a, b | a^2, b^3, a*b*a*b >").unwrap();
        let b = Backend::finite_from_presentation(s3.clone(), 100).unwrap();
        // (ab, b) satisfies a^2 -> (ab)^2 = 1 in S3
        let tuple = vec![w(&s3, "a*b"), w(&s3, "b")];
        assert!(satisfies_relators(&p, &b, &tuple).unwrap());
        // generators satisfy their own relators
        assert!(b.satisfies_own_relators(&b.presentation().generator_tuple()).unwrap());
    }

    #[test]
    fn element_tuples_order() {
        let b = Backend::free_group(1).unwrap();
        let tuples: Vec<Vec<Word>> = b.element_tuples(2).unwrap().take(9).collect();
        let x = Word::generator(0);
        assert_eq!(tuples[0], vec![Word::identity(), Word::identity()]);
        assert_eq!(tuples[1], vec![Word::identity(), x.clone()]);
        assert_eq!(tuples[2], vec![Word::identity(), x.inverse()]);
        assert_eq!(tuples[3], vec![x.clone(), Word::identity()]);
        assert_eq!(tuples[4], vec![x.inverse(), Word::identity()]);
        // total length 2 starts afterwards
        assert_eq!(tuples[5], vec![Word::identity(), x.pow(2)]);
    }

    #[test]
    fn element_tuples_finite_terminates() {
        let p = Presentation::parse("< a | a^2 >").unwrap();
        let b = Backend::finite_from_presentation(p, 10).unwrap();
        let tuples: Vec<Vec<Word>> = b.element_tuples(2).unwrap().collect();
        assert_eq!(tuples.len(), 4);
    }

    #[test]
    fn rewriting_backend_dihedral() {
        let p = Presentation::parse("< r, s | s^2, s*r*s*r >").unwrap();
        let b = Backend::rewriting_from_presentation(p.clone(), KbCaps::default(), true);
        assert!(b.capabilities().word_problem_decidable);
        let oracle = Backend::infinite_dihedral();
        // cross-check normal forms against the bespoke backend
        let mut count = 0;
        for u in oracle.elements().unwrap().take(30) {
            for v in oracle.elements().unwrap().take(30) {
                let prod = u.concat(&v);
                let nf_rw = b.normal_form(&prod).unwrap();
                let nf_or = oracle.normal_form(&prod).unwrap();
                assert_eq!(nf_rw, nf_or, "{u:?} * {v:?}");
                count += 1;
            }
        }
        assert_eq!(count, 900);
    }

    #[test]
    fn uncertified_rewriting_refuses() {
        let p = Presentation::parse("< a, b | a*b*a^-1*b^-1*a^-1 >").unwrap();
        let b = Backend::rewriting_from_presentation(p, KbCaps { max_rules: 2, max_steps: 2 }, false);
        assert!(!b.capabilities().word_problem_decidable);
        assert!(matches!(b.normal_form(&Word::generator(0)), Err(Error::NotCertified)));
    }

    #[test]
    fn obstruction_examples() {
        let b = Backend::free_group(1).unwrap();
        // x1^2 cannot hit the generator: abelianized 2c = 1
        let t = TermTuple::new(1, vec![Word::generator(0).pow(2)]).unwrap();
        assert!(b.witness_obstruction(&t, &[Word::generator(0)]).unwrap());
        assert!(!b.witness_obstruction(&t, &[Word::generator(0).pow(2)]).unwrap());
    }

    #[test]
    fn abelian_expressing_hint() {
        let b = Backend::free_abelian(2).unwrap();
        let p = b.presentation().clone();
        // (a*b, b) is a basis; the hint inverts the matrix
        let tuple = vec![w(&p, "a*b"), w(&p, "b")];
        match b.expressing_terms_hint(&tuple).unwrap() {
            ExpressingHint::Terms(t) => {
                let back = t.evaluate(&tuple).unwrap();
                for (i, g) in back.iter().enumerate() {
                    assert!(b.words_equal(g, &Word::generator(i)).unwrap());
                }
            }
            _ => panic!("expected terms"),
        }
        // determinant 2: provably none
        let tuple = vec![w(&p, "a^2"), w(&p, "b")];
        assert!(matches!(
            b.expressing_terms_hint(&tuple).unwrap(),
            ExpressingHint::ProvablyNone
        ));
    }

    #[test]
    fn finite_orbit_set_s3() {
        let p = Presentation::parse("< a, b | a^2, b^3, a*b*a*b >").unwrap();
        let b = Backend::finite_from_presentation(p.clone(), 100).unwrap();
        let orbit = b.finite_orbit_set().unwrap();
        // |Aut(S3)| = 6
        assert_eq!(orbit.len(), 6);
        assert!(orbit.contains(&b.presentation().generator_tuple()));
    }
}
