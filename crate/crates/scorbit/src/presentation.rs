//! Group presentations: parsing, printing and generator changes.
//!
//! Grammar (UTF-8 text, whitespace insensitive between tokens):
//!
//! ```text
//! presentation := "<" gen_list "|" relator_list ">"
//! gen_list     := name ("," name)*
//! relator_list := ε | word ("," word)*
//! word         := factor ("*" factor)*
//! factor       := name ("^" integer)? | "1"
//! ```
//!
//! Negative exponents are allowed and `^0` yields the empty word. Relators
//! that reduce to the identity are dropped.

use crate::error::{Error, Result};
use crate::terms::TermTuple;
use crate::words::{runs, Word};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use std::fmt;

/// A named generator with its position in the declaration list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GeneratorSymbol {
    pub name: String,
    pub index: usize,
}

/// A finite presentation: generators plus freely reduced relators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    generators: Vec<GeneratorSymbol>,
    relators: Vec<Word>,
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Presentation {
    /// Builds a presentation, reducing relators and dropping trivial ones.
    pub fn new<S: Into<String>>(names: Vec<S>, relators: Vec<Word>) -> Result<Presentation> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::Unsupported("a presentation needs at least one generator".into()));
        }
        for (i, n) in names.iter().enumerate() {
            if !valid_name(n) {
                return Err(Error::InvalidGeneratorName(n.clone()));
            }
            if names[..i].contains(n) {
                return Err(Error::DuplicateGenerator(n.clone()));
            }
        }
        let rank = names.len();
        let mut reduced = Vec::new();
        for r in relators {
            if let Some(max) = r.max_index() {
                if max >= rank {
                    return Err(Error::ArenaMismatch { index: max, arena: rank });
                }
            }
            if !r.is_identity() {
                reduced.push(r);
            }
        }
        Ok(Presentation {
            generators: names
                .into_iter()
                .enumerate()
                .map(|(index, name)| GeneratorSymbol { name, index })
                .collect(),
            relators: reduced,
        })
    }

    /// Free presentation on `rank` generators named `names`.
    pub fn free<S: Into<String>>(names: Vec<S>) -> Result<Presentation> {
        Presentation::new(names, Vec::new())
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[GeneratorSymbol] {
        &self.generators
    }

    pub fn generator_names(&self) -> Vec<&str> {
        self.generators.iter().map(|g| g.name.as_str()).collect()
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    /// The distinguished generating tuple: each generator as a word.
    pub fn generator_tuple(&self) -> Vec<Word> {
        (0..self.rank()).map(Word::generator).collect()
    }

    pub fn generator_index(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|g| g.name == name)
    }

    /// Parses the presentation grammar.
    pub fn parse(text: &str) -> Result<Presentation> {
        Parser::new(text).presentation()
    }

    /// Parses a word over this presentation's generators.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        let names = self.generator_names();
        parse_word_over(text, &names)
    }

    /// Parses a comma-separated tuple of words.
    pub fn parse_tuple(&self, text: &str) -> Result<Vec<Word>> {
        split_top_level(text).iter().map(|part| self.parse_word(part)).collect()
    }

    /// Renders a word using this presentation's generator names.
    pub fn format_word(&self, w: &Word) -> String {
        format_word_over(w, &self.generator_names())
    }

    /// Changes generators. `new_in_old[j]` spells the new generator `uj` over
    /// the old ones; `old_in_new` spells each old generator over `x1..xp`
    /// (one variable per new generator). Consistency is certified against
    /// `oracle`: substituting the definitions into `old_in_new` must recover
    /// every old generator.
    pub fn change_generators(
        &self,
        new_in_old: &[Word],
        old_in_new: &TermTuple,
        oracle: &crate::backend::Backend,
    ) -> Result<Presentation> {
        let p = new_in_old.len();
        if old_in_new.arity_in() != p {
            return Err(Error::ArityMismatch { expected: p, got: old_in_new.arity_in() });
        }
        if old_in_new.len() != self.rank() {
            return Err(Error::ArityMismatch { expected: self.rank(), got: old_in_new.len() });
        }
        let recovered = old_in_new.evaluate(new_in_old)?;
        for (i, r) in recovered.iter().enumerate() {
            let gen = Word::generator(i);
            if !oracle.words_equal(r, &gen)? {
                return Err(Error::InconsistentChange { index: i });
            }
        }
        let names: Vec<String> = (1..=p).map(|j| format!("u{j}")).collect();
        let mut relators = Vec::new();
        // old relators rewritten over the new generators
        for r in &self.relators {
            relators.push(r.substitute(old_in_new.components()));
        }
        // one relator per new generator equating it to its definition
        for (j, def) in new_in_old.iter().enumerate() {
            let rewritten = def.substitute(old_in_new.components());
            relators.push(Word::generator(j).inverse().concat(&rewritten));
        }
        Presentation::new(names, relators)
    }
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.generator_names();
        write!(f, "< {} |", names.join(", "))?;
        for (i, r) in self.relators.iter().enumerate() {
            if i == 0 {
                write!(f, " {}", format_word_over(r, &names))?;
            } else {
                write!(f, ", {}", format_word_over(r, &names))?;
            }
        }
        write!(f, " >")
    }
}

impl Serialize for Presentation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Presentation", 2)?;
        let names: Vec<&str> = self.generator_names();
        s.serialize_field("generators", &names)?;
        s.serialize_field("relators", &self.relators)?;
        s.end()
    }
}

/// Renders a word over explicit symbol names, collapsing runs to exponents.
/// The empty word prints as `1`.
pub fn format_word_over(w: &Word, names: &[&str]) -> String {
    if w.is_identity() {
        return "1".to_string();
    }
    let mut parts = Vec::new();
    for (index, exp) in runs(w.letters()) {
        let name = names.get(index).copied().unwrap_or("?");
        if exp == 1 {
            parts.push(name.to_string());
        } else {
            parts.push(format!("{name}^{exp}"));
        }
    }
    parts.join("*")
}

/// Parses a word over explicit symbol names.
pub fn parse_word_over(text: &str, names: &[&str]) -> Result<Word> {
    let mut parser = Parser::new(text);
    let w = parser.word(names)?;
    parser.skip_ws();
    if !parser.at_end() {
        return Err(parser.err("trailing input after word"));
    }
    Ok(w)
}

/// Splits on top-level commas (no nesting in this grammar, so a plain split
/// that trims whitespace).
pub fn split_top_level(text: &str) -> Vec<&str> {
    text.split(',').map(str::trim).collect()
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Parser<'a> {
        Parser { src, bytes: src.as_bytes(), pos: 0, line: 1, col: 1 }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { line: self.line, col: self.col, msg: msg.into() }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.bytes.len()
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn advance(&mut self) -> Option<u8> {
        let b = self.peek()?;
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(b)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|b| b.is_ascii_whitespace()) {
            self.advance();
        }
    }

    fn expect(&mut self, b: u8) -> Result<()> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c == b => {
                self.advance();
                Ok(())
            }
            Some(c) => Err(self.err(format!("expected `{}`, found `{}`", b as char, c as char))),
            None => Err(self.err(format!("expected `{}`, found end of input", b as char))),
        }
    }

    fn name(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some(b) if b.is_ascii_alphabetic() => {
                self.advance();
            }
            _ => return Err(self.err("expected a generator name")),
        }
        while self.peek().is_some_and(|b| b.is_ascii_alphanumeric() || b == b'_') {
            self.advance();
        }
        Ok(self.src[start..self.pos].to_string())
    }

    fn integer(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        if self.peek() == Some(b'-') || self.peek() == Some(b'+') {
            self.advance();
        }
        let digits_start = self.pos;
        while self.peek().is_some_and(|b| b.is_ascii_digit()) {
            self.advance();
        }
        if self.pos == digits_start {
            return Err(self.err("expected an integer exponent"));
        }
        self.src[start..self.pos]
            .parse::<i64>()
            .map_err(|_| self.err("exponent out of range"))
    }

    fn factor(&mut self, names: &[&str]) -> Result<Word> {
        self.skip_ws();
        if self.peek() == Some(b'1') {
            self.advance();
            return Ok(Word::identity());
        }
        let name = self.name()?;
        let index = names
            .iter()
            .position(|n| *n == name)
            .ok_or_else(|| Error::UndeclaredGenerator(name.clone()))?;
        self.skip_ws();
        let exp = if self.peek() == Some(b'^') {
            self.advance();
            self.integer()?
        } else {
            1
        };
        Ok(Word::generator(index).pow(exp))
    }

    fn word(&mut self, names: &[&str]) -> Result<Word> {
        let mut w = self.factor(names)?;
        loop {
            self.skip_ws();
            if self.peek() == Some(b'*') {
                self.advance();
                w = w.concat(&self.factor(names)?);
            } else {
                return Ok(w);
            }
        }
    }

    fn presentation(&mut self) -> Result<Presentation> {
        self.expect(b'<')?;
        let mut names = vec![self.name()?];
        loop {
            self.skip_ws();
            if self.peek() == Some(b',') {
                self.advance();
                names.push(self.name()?);
            } else {
                break;
            }
        }
        self.expect(b'|')?;
        let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let mut relators = Vec::new();
        self.skip_ws();
        if self.peek() != Some(b'>') {
            relators.push(self.word(&name_refs)?);
            loop {
                self.skip_ws();
                if self.peek() == Some(b',') {
                    self.advance();
                    relators.push(self.word(&name_refs)?);
                } else {
                    break;
                }
            }
        }
        self.expect(b'>')?;
        self.skip_ws();
        if !self.at_end() {
            return Err(self.err("trailing input after presentation"));
        }
        Presentation::new(names, relators)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(raw: &[i32]) -> Word {
        Word::from_letters(raw.iter().copied())
    }

    #[test]
    fn parse_basic() {
        let p = Presentation::parse("< a, b | a^2, b^3 >").unwrap();
        assert_eq!(p.rank(), 2);
        assert_eq!(p.relators(), &[w(&[1, 1]), w(&[2, 2, 2])]);
    }

    #[test]
    fn parse_free_rank_one() {
        let p = Presentation::parse("< a | >").unwrap();
        assert_eq!(p.rank(), 1);
        assert!(p.relators().is_empty());
    }

    #[test]
    fn trivial_relator_dropped() {
        let p = Presentation::parse("< a | a*a^-1 >").unwrap();
        assert!(p.relators().is_empty());
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            Presentation::parse("< a, a | >"),
            Err(Error::DuplicateGenerator(_))
        ));
        assert!(matches!(
            Presentation::parse("< a | b >"),
            Err(Error::UndeclaredGenerator(_))
        ));
        let err = Presentation::parse("< a | a^2").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "got {err:?}");
    }

    #[test]
    fn exponent_zero_is_identity() {
        let p = Presentation::parse("< a | >").unwrap();
        assert_eq!(p.parse_word("a^0").unwrap(), Word::identity());
        assert_eq!(p.parse_word("1").unwrap(), Word::identity());
        assert_eq!(p.parse_word("a^-2").unwrap(), w(&[-1, -1]));
    }

    #[test]
    fn print_parse_round_trip() {
        for text in ["< a, b | a^2, b^3, a*b*a^-1*b^-1 >", "< x | >", "< r, s | s^2, s*r*s*r >"] {
            let p = Presentation::parse(text).unwrap();
            let printed = p.to_string();
            let q = Presentation::parse(&printed).unwrap();
            assert_eq!(p, q, "round trip failed for {printed}");
        }
    }

    proptest! {
        #[test]
        fn format_parse_words(raw in proptest::collection::vec(-2i32..=2, 0..12)) {
            let p = Presentation::parse("< a, b | >").unwrap();
            let u = Word::from_letters(raw.into_iter().filter(|&l| l != 0));
            let printed = p.format_word(&u);
            let back = p.parse_word(&printed).unwrap();
            prop_assert_eq!(u, back);
        }
    }
}
