//! Infinite sequences over `{0, 1, *}`.
//!
//! A [`SymSeq`] is either *exact* (eventually periodic, stored as a canonical
//! preperiod/period pair) or *generated* from a pure index function that is
//! only trusted up to a certified depth. Exact sequences share their storage,
//! so shifting one is O(1).

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use super::symbol::{FiniteWord, Symbol};
use crate::error::{Error, Result};

type Source = Arc<dyn Fn(usize) -> Symbol + Send + Sync>;

#[derive(Clone)]
pub struct SymSeq {
    form: Form,
    label: Option<Arc<str>>,
}

#[derive(Clone)]
enum Form {
    Exact(Exact),
    Generated(Generated),
}

/// `pre[start..]` followed by `period` rotated left by `rot`, repeated.
///
/// Canonical: the period is primitive and, when the visible preperiod is
/// nonempty, its last symbol differs from the last symbol of the rotated
/// period (otherwise it could be absorbed).
#[derive(Clone)]
struct Exact {
    pre: Arc<[Symbol]>,
    start: usize,
    period: Arc<[Symbol]>,
    rot: usize,
}

#[derive(Clone)]
struct Generated {
    source: Source,
    offset: usize,
    /// Largest readable index, relative to `offset`.
    certified: usize,
}

impl Exact {
    #[inline]
    fn pre_len(&self) -> usize {
        self.pre.len() - self.start
    }

    #[inline]
    fn get(&self, i: usize) -> Symbol {
        let pl = self.pre_len();
        if i < pl {
            self.pre[self.start + i]
        } else {
            let p = self.period.len();
            self.period[(self.rot + (i - pl)) % p]
        }
    }

    fn pre_slice(&self) -> &[Symbol] {
        &self.pre[self.start..]
    }

    fn rotated_period(&self) -> Vec<Symbol> {
        let p = self.period.len();
        (0..p).map(|i| self.period[(self.rot + i) % p]).collect()
    }

    fn shift(&self, k: usize) -> Exact {
        let pl = self.pre_len();
        if k <= pl {
            Exact {
                pre: self.pre.clone(),
                start: self.start + k,
                period: self.period.clone(),
                rot: self.rot,
            }
        } else {
            let p = self.period.len();
            Exact {
                pre: self.pre.clone(),
                start: self.pre.len(),
                period: self.period.clone(),
                rot: (self.rot + (k - pl)) % p,
            }
        }
    }

    fn same_storage(&self, other: &Exact) -> bool {
        Arc::ptr_eq(&self.pre, &other.pre)
            && Arc::ptr_eq(&self.period, &other.period)
            && self.start == other.start
            && self.rot == other.rot
    }

    fn canonical_eq(&self, other: &Exact) -> bool {
        if self.same_storage(other) {
            return true;
        }
        let p = self.period.len();
        self.pre_len() == other.pre_len()
            && p == other.period.len()
            && self.pre_slice() == other.pre_slice()
            && (0..p).all(|i| {
                self.period[(self.rot + i) % p] == other.period[(other.rot + i) % p]
            })
    }
}

/// Length of the primitive root of `w` (smallest `d | len` with `w` d-periodic).
pub fn primitive_root_len(w: &[Symbol]) -> usize {
    let n = w.len();
    (1..=n)
        .find(|&d| n.is_multiple_of(d) && (d..n).all(|i| w[i] == w[i - d]))
        .unwrap_or(n)
}

fn canonicalize(mut pre: Vec<Symbol>, period: Vec<Symbol>) -> (Vec<Symbol>, Vec<Symbol>) {
    let d = primitive_root_len(&period);
    let mut period: Vec<Symbol> = period[..d].to_vec();
    while let (Some(&a), Some(&b)) = (pre.last(), period.last()) {
        if a != b {
            break;
        }
        pre.pop();
        period.rotate_right(1);
    }
    (pre, period)
}

impl SymSeq {
    /// Canonical exact sequence `pre (period)^infinity`.
    pub fn exact(pre: Vec<Symbol>, period: Vec<Symbol>) -> Result<SymSeq> {
        if period.is_empty() {
            return Err(Error::Parse {
                literal: format!("{}[]", FiniteWord::new(pre)),
                reason: "empty period".into(),
            });
        }
        let (pre, period) = canonicalize(pre, period);
        Ok(SymSeq {
            form: Form::Exact(Exact {
                pre: pre.into(),
                start: 0,
                period: period.into(),
                rot: 0,
            }),
            label: None,
        })
    }

    /// The constant sequence `s s s ...`.
    pub fn constant(s: Symbol) -> SymSeq {
        SymSeq::exact(Vec::new(), vec![s]).expect("nonempty period")
    }

    /// A sequence read from `source`, trusted for indices `0..=certified_depth`.
    pub fn generated<F>(source: F, certified_depth: usize) -> SymSeq
    where
        F: Fn(usize) -> Symbol + Send + Sync + 'static,
    {
        SymSeq {
            form: Form::Generated(Generated {
                source: Arc::new(source),
                offset: 0,
                certified: certified_depth,
            }),
            label: None,
        }
    }

    /// A finite word promoted to a generated sequence certified to its last index.
    pub fn from_finite(word: FiniteWord) -> Result<SymSeq> {
        if word.is_empty() {
            return Err(Error::Contract("empty word has no certified symbols".into()));
        }
        let depth = word.len() - 1;
        let syms: Arc<[Symbol]> = word.into_symbols().into();
        Ok(SymSeq::generated(move |i| syms[i], depth))
    }

    pub fn with_label(mut self, label: impl Into<Arc<str>>) -> SymSeq {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.form, Form::Exact(_))
    }

    /// Largest readable index; `None` for exact sequences (unbounded).
    pub fn certified_depth(&self) -> Option<usize> {
        match &self.form {
            Form::Exact(_) => None,
            Form::Generated(g) => Some(g.certified),
        }
    }

    pub fn readable(&self, index: usize) -> bool {
        self.certified_depth().is_none_or(|d| index <= d)
    }

    /// Preperiod and period of an exact sequence, in canonical form.
    pub fn exact_parts(&self) -> Option<(Vec<Symbol>, Vec<Symbol>)> {
        match &self.form {
            Form::Exact(e) => Some((e.pre_slice().to_vec(), e.rotated_period())),
            Form::Generated(_) => None,
        }
    }

    /// `(preperiod length, period length)` for exact sequences.
    pub fn exact_shape(&self) -> Option<(usize, usize)> {
        match &self.form {
            Form::Exact(e) => Some((e.pre_len(), e.period.len())),
            Form::Generated(_) => None,
        }
    }

    pub fn is_purely_periodic(&self) -> bool {
        matches!(self.exact_shape(), Some((0, _)))
    }

    #[inline]
    pub fn symbol(&self, index: usize) -> Result<Symbol> {
        match &self.form {
            Form::Exact(e) => Ok(e.get(index)),
            Form::Generated(g) => {
                if index > g.certified {
                    Err(Error::DepthExceeded {
                        index,
                        certified: g.certified,
                    })
                } else {
                    Ok((g.source)(g.offset + index))
                }
            }
        }
    }

    /// `x|n = x_0 ... x_n` (length `n + 1`).
    pub fn truncate(&self, n: usize) -> Result<FiniteWord> {
        Ok(FiniteWord::new(self.window(0, n + 1)?))
    }

    /// Symbols `start .. start + len`.
    pub fn window(&self, start: usize, len: usize) -> Result<Vec<Symbol>> {
        if len == 0 {
            return Ok(Vec::new());
        }
        let last = start + len - 1;
        if let Some(d) = self.certified_depth() {
            if last > d {
                return Err(Error::DepthExceeded {
                    index: last,
                    certified: d,
                });
            }
        }
        match &self.form {
            Form::Exact(e) => Ok((start..=last).map(|i| e.get(i)).collect()),
            Form::Generated(g) => Ok((start..=last).map(|i| (g.source)(g.offset + i)).collect()),
        }
    }

    /// `sigma^k(x)`.
    pub fn shift(&self, k: usize) -> Result<SymSeq> {
        let form = match &self.form {
            Form::Exact(e) => Form::Exact(e.shift(k)),
            Form::Generated(g) => {
                if k > g.certified {
                    return Err(Error::DepthExceeded {
                        index: k,
                        certified: g.certified,
                    });
                }
                Form::Generated(Generated {
                    source: g.source.clone(),
                    offset: g.offset + k,
                    certified: g.certified - k,
                })
            }
        };
        Ok(SymSeq { form, label: None })
    }

    /// `w x` — the word followed by this sequence.
    pub fn prepend(&self, w: &[Symbol]) -> SymSeq {
        match &self.form {
            Form::Exact(e) => {
                let mut pre = w.to_vec();
                pre.extend_from_slice(e.pre_slice());
                SymSeq::exact(pre, e.rotated_period()).expect("nonempty period")
            }
            Form::Generated(g) => {
                let head: Arc<[Symbol]> = w.to_vec().into();
                let inner = g.clone();
                let n = head.len();
                SymSeq::generated(
                    move |i| {
                        if i < n {
                            head[i]
                        } else {
                            (inner.source)(inner.offset + i - n)
                        }
                    },
                    g.certified + n,
                )
            }
        }
    }

    /// The sequence with the symbol at `index` replaced.
    pub fn with_symbol(&self, index: usize, s: Symbol) -> Result<SymSeq> {
        match &self.form {
            Form::Exact(e) => {
                let pl = e.pre_len();
                let p = e.period.len();
                let len = pl.max(index + 1);
                // Unroll far enough that `index` lies in the preperiod.
                let mut pre: Vec<Symbol> = (0..len).map(|i| e.get(i)).collect();
                pre[index] = s;
                let period: Vec<Symbol> = (0..p).map(|i| e.get(len + i)).collect();
                SymSeq::exact(pre, period)
            }
            Form::Generated(g) => {
                if index > g.certified {
                    return Err(Error::DepthExceeded {
                        index,
                        certified: g.certified,
                    });
                }
                let inner = g.clone();
                Ok(SymSeq::generated(
                    move |i| {
                        if i == index {
                            s
                        } else {
                            (inner.source)(inner.offset + i)
                        }
                    },
                    g.certified,
                ))
            }
        }
    }

    /// Exact equality of two exact sequences; `None` if either is generated.
    pub fn exact_eq(&self, other: &SymSeq) -> Option<bool> {
        match (&self.form, &other.form) {
            (Form::Exact(a), Form::Exact(b)) => Some(a.canonical_eq(b)),
            _ => None,
        }
    }

    /// First index `< cap` at which the sequences differ, if any. Exact
    /// sequences sharing storage are recognised without scanning.
    pub fn first_difference(&self, other: &SymSeq, cap: usize) -> Result<Option<usize>> {
        if let (Form::Exact(a), Form::Exact(b)) = (&self.form, &other.form) {
            if a.same_storage(b) {
                return Ok(None);
            }
            for i in 0..cap {
                if a.get(i) != b.get(i) {
                    return Ok(Some(i));
                }
            }
            return Ok(None);
        }
        for i in 0..cap {
            if self.symbol(i)? != other.symbol(i)? {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    /// Equality, exact when both are exact, otherwise checked on `0..=depth`.
    pub fn equals_to_depth(&self, other: &SymSeq, depth: usize) -> Result<bool> {
        if let Some(eq) = self.exact_eq(other) {
            return Ok(eq);
        }
        Ok(self.first_difference(other, depth + 1)?.is_none())
    }

    pub fn contains_star_within(&self, depth: usize) -> Result<bool> {
        match &self.form {
            Form::Exact(e) => Ok(e.pre_slice().contains(&Symbol::Star) || e.period.contains(&Symbol::Star)),
            Form::Generated(_) => {
                for i in 0..=depth {
                    if self.symbol(i)?.is_star() {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }

    /// Canonical literal, e.g. `1[0]`. Generated sequences have none.
    pub fn literal(&self) -> Option<String> {
        let (pre, period) = self.exact_parts()?;
        Some(format!(
            "{}[{}]",
            FiniteWord::new(pre),
            FiniteWord::new(period)
        ))
    }

    pub fn parse(text: &str) -> Result<SymSeq> {
        let err = |reason: &str| Error::Parse {
            literal: text.to_string(),
            reason: reason.to_string(),
        };
        let open = text.find('[').ok_or_else(|| err("missing bracketed period"))?;
        if !text.ends_with(']') {
            return Err(err("literal must end with ']'"));
        }
        let prefix = &text[..open];
        let body = &text[open + 1..text.len() - 1];
        if body.contains('[') || body.contains(']') || prefix.contains(']') {
            return Err(err("nested or stray brackets"));
        }
        if body.is_empty() {
            return Err(err("empty period"));
        }
        let pre: FiniteWord = prefix.parse().map_err(|_| err("bad symbol in prefix"))?;
        let period: FiniteWord = body.parse().map_err(|_| err("bad symbol in period"))?;
        SymSeq::exact(pre.into_symbols(), period.into_symbols())
    }
}

impl FromStr for SymSeq {
    type Err = Error;
    fn from_str(s: &str) -> Result<SymSeq> {
        SymSeq::parse(s)
    }
}

impl fmt::Display for SymSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.literal(), &self.label) {
            (Some(lit), _) => write!(f, "{lit}"),
            (None, Some(label)) => write!(f, "{label}"),
            (None, None) => write!(f, "<generated to {}>", self.certified_depth().unwrap_or(0)),
        }
    }
}

impl fmt::Debug for SymSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymSeq({self})")
    }
}

/// Parse a literal, panicking on bad input. Intended for tests and fixtures.
pub fn seq(s: &str) -> SymSeq {
    SymSeq::parse(s).expect("valid sequence literal")
}

#[cfg(test)]
mod tests {
    use super::super::symbol::word;
    use super::*;

    #[test]
    fn parse_examples() {
        assert_eq!(seq("[10*]").exact_parts().unwrap(), (vec![], word("10*").into_symbols()));
        assert_eq!(seq("1[0]").literal().unwrap(), "1[0]");
        assert_eq!(seq("1[0101]").literal().unwrap(), "[10]");
        assert_eq!(seq("0[0101]").literal().unwrap(), "0[01]");
        // absorption
        assert_eq!(seq("10[10]").literal().unwrap(), "[10]");
        assert_eq!(seq("0110[110]").literal().unwrap(), "[011]");
        assert_eq!(seq("1110[110]").literal().unwrap(), "1[110]");
    }

    #[test]
    fn parse_rejects() {
        for bad in ["", "101", "1[]", "1[0", "[0]1", "1[2]", "[[0]]", "1]0["] {
            assert!(SymSeq::parse(bad).is_err(), "{bad:?} should be rejected");
        }
    }

    #[test]
    fn truncate_examples() {
        assert_eq!(seq("[10*]").truncate(4).unwrap().to_string(), "10*10");
        assert_eq!(seq("1[0]").truncate(2).unwrap().to_string(), "100");
        let g = SymSeq::generated(|i| Symbol::from_bit(i % 2 == 0), 10);
        assert!(g.truncate(10).is_ok());
        assert!(matches!(g.truncate(11), Err(Error::DepthExceeded { .. })));
    }

    #[test]
    fn shift_examples() {
        assert_eq!(seq("[10*]").shift(3).unwrap().literal().unwrap(), "[10*]");
        assert_eq!(seq("1[0]").shift(1).unwrap().literal().unwrap(), "[0]");
        assert_eq!(seq("[10*]").shift(1).unwrap().literal().unwrap(), "[0*1]");
        let g = SymSeq::generated(|i| Symbol::from_bit(i % 3 == 0), 20);
        let s = g.shift(5).unwrap();
        assert_eq!(s.certified_depth(), Some(15));
        assert_eq!(s.symbol(1).unwrap(), Symbol::One);
        assert!(g.shift(21).is_err());
    }

    #[test]
    fn shifted_exact_equals_reparsed() {
        let x = seq("0110*[0111]");
        for k in 0..20 {
            let a = x.shift(k).unwrap();
            let b = seq(&a.literal().unwrap());
            assert_eq!(a.exact_eq(&b), Some(true), "k = {k}");
            assert_eq!(a.truncate(30).unwrap(), b.truncate(30).unwrap());
        }
    }

    #[test]
    fn prepend_and_replace() {
        let x = seq("[0]").prepend(&word("1*"));
        assert_eq!(x.literal().unwrap(), "1*[0]");
        let y = seq("1[0]").with_symbol(3, Symbol::One).unwrap();
        assert_eq!(y.literal().unwrap(), "1001[0]");
        let g = SymSeq::generated(|_| Symbol::Zero, 10).prepend(&word("11"));
        assert_eq!(g.truncate(3).unwrap().to_string(), "1100");
        assert_eq!(g.certified_depth(), Some(12));
    }

    #[test]
    fn differing_representations_compare_equal() {
        let a = seq("10[0]");
        let b = seq("1[00]");
        assert_eq!(a.exact_eq(&b), Some(true));
        assert_eq!(a.first_difference(&b, 50).unwrap(), None);
    }
}
