use std::fmt;
use std::ops::{Deref, Index};
use std::str::FromStr;

use crate::error::{Error, Result};

/// One letter of the itinerary alphabet `{0, 1, *}`.
///
/// `Star` is the wildcard: in the product topology it cannot be separated
/// from either `Zero` or `One`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Zero,
    One,
    Star,
}

impl Symbol {
    pub const ALL: [Symbol; 3] = [Symbol::Zero, Symbol::One, Symbol::Star];

    pub fn from_char(c: char) -> Option<Symbol> {
        match c {
            '0' => Some(Symbol::Zero),
            '1' => Some(Symbol::One),
            '*' => Some(Symbol::Star),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Symbol::Zero => '0',
            Symbol::One => '1',
            Symbol::Star => '*',
        }
    }

    pub fn from_bit(bit: bool) -> Symbol {
        if bit {
            Symbol::One
        } else {
            Symbol::Zero
        }
    }

    #[inline]
    pub fn is_star(self) -> bool {
        self == Symbol::Star
    }

    /// `0 <-> 1`; the star is left alone.
    pub fn flipped(self) -> Symbol {
        match self {
            Symbol::Zero => Symbol::One,
            Symbol::One => Symbol::Zero,
            Symbol::Star => Symbol::Star,
        }
    }

    /// True when `self` agrees with `pattern`, reading a star in the pattern
    /// as "anything".
    #[inline]
    pub fn matches(self, pattern: Symbol) -> bool {
        pattern == Symbol::Star || self == pattern
    }

    /// Both symbols are concrete and they differ.
    #[inline]
    pub fn separated_from(self, other: Symbol) -> bool {
        self != Symbol::Star && other != Symbol::Star && self != other
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

/// A finite word over `{0, 1, *}`, indexed from 0.
///
/// The truncation `x|n` of a sequence is a word of length `n + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct FiniteWord(Vec<Symbol>);

impl FiniteWord {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        FiniteWord(symbols)
    }

    pub fn empty() -> Self {
        FiniteWord(Vec::new())
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn into_symbols(self) -> Vec<Symbol> {
        self.0
    }

    pub fn push(&mut self, s: Symbol) {
        self.0.push(s);
    }

    pub fn is_star_free(&self) -> bool {
        !self.0.iter().any(|s| s.is_star())
    }

    /// All words of `len` symbols over `{0, 1}`, in lexicographic order.
    pub fn all_binary(len: usize) -> impl Iterator<Item = FiniteWord> {
        assert!(len < usize::BITS as usize);
        (0..1usize << len).map(move |bits| {
            FiniteWord(
                (0..len)
                    .map(|i| Symbol::from_bit(bits >> (len - 1 - i) & 1 == 1))
                    .collect(),
            )
        })
    }

    /// All words of `len` symbols over `{0, 1, *}`.
    pub fn all_ternary(len: usize) -> impl Iterator<Item = FiniteWord> {
        let total = 3usize.pow(len as u32);
        (0..total).map(move |mut code| {
            let mut out = vec![Symbol::Zero; len];
            for slot in out.iter_mut().rev() {
                *slot = Symbol::ALL[code % 3];
                code /= 3;
            }
            FiniteWord(out)
        })
    }
}

impl Deref for FiniteWord {
    type Target = [Symbol];
    fn deref(&self) -> &[Symbol] {
        &self.0
    }
}

impl Index<usize> for FiniteWord {
    type Output = Symbol;
    fn index(&self, i: usize) -> &Symbol {
        &self.0[i]
    }
}

impl From<Vec<Symbol>> for FiniteWord {
    fn from(v: Vec<Symbol>) -> Self {
        FiniteWord(v)
    }
}

impl FromIterator<Symbol> for FiniteWord {
    fn from_iter<I: IntoIterator<Item = Symbol>>(iter: I) -> Self {
        FiniteWord(iter.into_iter().collect())
    }
}

impl FromStr for FiniteWord {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| {
                Symbol::from_char(c).ok_or_else(|| Error::Parse {
                    literal: s.to_string(),
                    reason: format!("unexpected character {c:?}"),
                })
            })
            .collect()
    }
}

impl fmt::Display for FiniteWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Shorthand used throughout the tests: parse a word, panicking on bad input.
pub fn word(s: &str) -> FiniteWord {
    s.parse().expect("valid word literal")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_roundtrip() {
        let w = word("10*1");
        assert_eq!(w.len(), 4);
        assert_eq!(w.to_string(), "10*1");
        assert!(!w.is_star_free());
        assert!("10a".parse::<FiniteWord>().is_err());
    }

    #[test]
    fn enumerations_have_expected_sizes() {
        assert_eq!(FiniteWord::all_binary(4).count(), 16);
        assert_eq!(FiniteWord::all_ternary(3).count(), 27);
        assert_eq!(FiniteWord::all_binary(0).next(), Some(FiniteWord::empty()));
        let first = FiniteWord::all_binary(3).nth(5).unwrap();
        assert_eq!(first.to_string(), "101");
    }

    #[test]
    fn separation() {
        assert!(Symbol::Zero.separated_from(Symbol::One));
        assert!(!Symbol::Zero.separated_from(Symbol::Star));
        assert!(!Symbol::One.separated_from(Symbol::One));
        assert!(Symbol::One.matches(Symbol::Star));
        assert!(!Symbol::One.matches(Symbol::Zero));
    }
}
