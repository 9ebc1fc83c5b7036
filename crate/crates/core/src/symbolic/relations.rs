//! The `≈` and `≃` relations on truncations and the cylinder proximity they
//! induce.
//!
//! Two truncations `x|n`, `y|n` are `≃` when they are equal or both `≈`-match a
//! common precritical truncation `u * tau_0 tau_1 ...`. Proximity is
//! `2^-m` where `m` is the first depth at which `≃` fails, so
//! `proximity(x, y) < 2^-N  <=>  x|N ≃ y|N`.

use std::collections::BTreeSet;
use std::fmt;

use super::seq::SymSeq;
use super::symbol::{FiniteWord, Symbol};
use crate::error::{Error, Result};

/// Largest `n` accepted by [`enumerate_precritical_truncations`].
pub const ORACLE_MAX_DEPTH: usize = 16;

/// `w ≈ pattern`: agreement wherever the pattern is not a star.
pub fn match_approx(w: &[Symbol], pattern: &[Symbol]) -> Result<bool> {
    if w.len() != pattern.len() {
        return Err(Error::LengthMismatch {
            left: w.len(),
            right: pattern.len(),
        });
    }
    Ok(w.iter().zip(pattern).all(|(a, p)| a.matches(*p)))
}

/// Outcome of a `≃` test, with the precritical witness when the words differ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimeqResult {
    pub holds: bool,
    pub witness: Option<SimeqWitness>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimeqWitness {
    pub star_position: usize,
    pub witness_word: FiniteWord,
}

/// `(*tau)|len-1` starting at offset `j` inside a word of length `len`, i.e.
/// the pattern `* tau_0 ... tau_{len-j-2}`.
fn critical_pattern(tau: &SymSeq, len: usize) -> Result<Vec<Symbol>> {
    let mut out = Vec::with_capacity(len);
    if len > 0 {
        out.push(Symbol::Star);
        out.extend(tau.window(0, len - 1)?);
    }
    Ok(out)
}

/// `x ≃ y` for words of equal length, scanning every candidate star position.
///
/// Words containing stars are accepted; the witness prefix is then copied from
/// `x` as-is.
pub fn simeq(x: &[Symbol], y: &[Symbol], tau: &SymSeq) -> Result<SimeqResult> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x == y {
        return Ok(SimeqResult {
            holds: true,
            witness: None,
        });
    }
    let len = x.len();
    let pattern = critical_pattern(tau, len)?;
    for j in 0..len {
        if x[..j] != y[..j] {
            break;
        }
        let tail = &pattern[..len - j];
        if match_approx(&x[j..], tail)? && match_approx(&y[j..], tail)? {
            let mut w = x[..j].to_vec();
            w.extend_from_slice(tail);
            return Ok(SimeqResult {
                holds: true,
                witness: Some(SimeqWitness {
                    star_position: j,
                    witness_word: FiniteWord::new(w),
                }),
            });
        }
    }
    Ok(SimeqResult {
        holds: false,
        witness: None,
    })
}

/// Every length-`n+1` truncation of a precritical point: `u * tau_0 ...` with
/// `u` star-free.
pub fn enumerate_precritical_truncations(tau: &SymSeq, n: usize) -> Result<BTreeSet<FiniteWord>> {
    if n > ORACLE_MAX_DEPTH {
        return Err(Error::ScaleExceeded {
            what: "oracle depth",
            got: n,
            limit: ORACLE_MAX_DEPTH,
        });
    }
    let len = n + 1;
    let pattern = critical_pattern(tau, len)?;
    let mut out = BTreeSet::new();
    for ulen in 0..len {
        for u in FiniteWord::all_binary(ulen) {
            let mut w = u.into_symbols();
            w.extend_from_slice(&pattern[..len - ulen]);
            out.insert(FiniteWord::new(w));
        }
    }
    Ok(out)
}

/// First depth at which `≃` fails, or a lower bound when it never fails up to the cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Agreement {
    FailAt(usize),
    AtLeast(usize),
}

impl Agreement {
    /// `x|n ≃ y|n`.
    pub fn holds_at(self, n: usize) -> bool {
        match self {
            Agreement::FailAt(m) => n < m,
            Agreement::AtLeast(c) => n <= c,
        }
    }
}

/// Minimal `m <= cap` with `x|m` not `≃` `y|m`.
///
/// Let `d` be the first index where the sequences differ. For `m < d` the
/// truncations are equal; for `m >= d` a witness must place its star at some
/// `j <= d`, and it survives exactly while both tails keep matching `tau`.
/// Each witness covers an interval of depths starting at or below `d`, so the
/// failure depth is the furthest reach over all candidate stars.
pub fn agreement_depth(x: &SymSeq, y: &SymSeq, tau: &SymSeq, cap: usize) -> Result<Agreement> {
    let d = match x.first_difference(y, cap + 1)? {
        None => return Ok(Agreement::AtLeast(cap)),
        Some(d) => d,
    };
    let mut reach = d;
    for j in 0..=d {
        let mut k = 1;
        while j + k <= cap {
            let t = tau.symbol(k - 1)?;
            if !(x.symbol(j + k)?.matches(t) && y.symbol(j + k)?.matches(t)) {
                break;
            }
            k += 1;
        }
        if j + k > cap {
            return Ok(Agreement::AtLeast(cap));
        }
        reach = reach.max(j + k);
    }
    Ok(Agreement::FailAt(reach))
}

/// `x|n ≃ y|n`.
pub fn agrees_at(x: &SymSeq, y: &SymSeq, tau: &SymSeq, n: usize) -> Result<bool> {
    Ok(agreement_depth(x, y, tau, n)?.holds_at(n))
}

/// Cylinder proximity: `2^-m` at the first `≃`-failure depth `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Proximity {
    Value(usize),
    AtMost(usize),
}

impl Proximity {
    /// The exponent `m` in `2^-m` (the cap for an upper bound).
    pub fn exponent(self) -> usize {
        match self {
            Proximity::Value(m) | Proximity::AtMost(m) => m,
        }
    }

    pub fn as_f64(self) -> f64 {
        2f64.powi(-(self.exponent() as i32))
    }

    /// `proximity < 2^-n`, when decidable from the value.
    pub fn below_exponent(self, n: usize) -> Option<bool> {
        match self {
            Proximity::Value(m) => Some(m > n),
            Proximity::AtMost(c) if c > n => Some(true),
            Proximity::AtMost(_) => None,
        }
    }
}

impl fmt::Display for Proximity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Proximity::Value(m) => write!(f, "2^-{m}"),
            Proximity::AtMost(c) => write!(f, "<= 2^-{c}"),
        }
    }
}

pub fn proximity(x: &SymSeq, y: &SymSeq, tau: &SymSeq, cap: usize) -> Result<Proximity> {
    Ok(match agreement_depth(x, y, tau, cap)? {
        Agreement::FailAt(m) => Proximity::Value(m),
        Agreement::AtLeast(c) => Proximity::AtMost(c),
    })
}

/// A positive real tolerance together with its truncation depth
/// `N = floor(log2(1 / eps))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonScale {
    epsilon: f64,
    depth: usize,
}

impl EpsilonScale {
    pub fn new(epsilon: f64) -> Result<EpsilonScale> {
        if !(epsilon > 0.0 && epsilon <= 1.0) || !epsilon.is_finite() {
            return Err(Error::Contract(format!(
                "epsilon must lie in (0, 1], got {epsilon}"
            )));
        }
        // Largest n with 2^n <= 1/eps, computed without trusting log2 rounding.
        let mut n = (1.0 / epsilon).log2().floor().max(0.0) as usize;
        while n > 0 && 2f64.powi(n as i32) * epsilon > 1.0 {
            n -= 1;
        }
        while 2f64.powi(n as i32 + 1) * epsilon <= 1.0 {
            n += 1;
        }
        Ok(EpsilonScale { epsilon, depth: n })
    }

    /// `eps = 2^-n`.
    pub fn from_exponent(n: usize) -> EpsilonScale {
        EpsilonScale {
            epsilon: 2f64.powi(-(n as i32)),
            depth: n,
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// The truncation depth `N_eps`.
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// `proximity(x, y) < eps`.
    pub fn close(&self, x: &SymSeq, y: &SymSeq, tau: &SymSeq) -> Result<bool> {
        agrees_at(x, y, tau, self.depth)
    }
}

#[cfg(test)]
mod tests {
    use super::super::seq::seq;
    use super::super::symbol::word;
    use super::*;

    #[test]
    fn match_approx_examples() {
        assert!(match_approx(&word("101"), &word("1*1")).unwrap());
        assert!(!match_approx(&word("101"), &word("100")).unwrap());
        assert!(match_approx(&word("1*1"), &word("1*1")).unwrap());
        assert!(match_approx(&word("10"), &word("101")).is_err());
    }

    #[test]
    fn simeq_examples() {
        let tau = seq("1[0]");
        let r = simeq(&word("10110"), &word("10010"), &tau).unwrap();
        assert!(r.holds);
        let w = r.witness.unwrap();
        assert_eq!(w.star_position, 2);
        assert_eq!(w.witness_word.to_string(), "10*10");

        let r = simeq(&word("10110"), &word("10110"), &seq("[10*]")).unwrap();
        assert!(r.holds && r.witness.is_none());

        assert!(!simeq(&word("00000"), &word("11111"), &tau).unwrap().holds);
    }

    #[test]
    fn simeq_reports_earliest_witness() {
        // tau = [10*]: both j = 0 and j = 3 carry a star over the disagreement
        // at index 3; the scan reports the first.
        let tau = seq("[10*]");
        let x = word("010010");
        let y = word("010110");
        let r = simeq(&x, &y, &tau).unwrap();
        assert!(r.holds);
        assert_eq!(r.witness.unwrap().star_position, 0);
        assert!(simeq(&x.symbols()[3..], &y.symbols()[3..], &tau).unwrap().holds);
    }

    #[test]
    fn enumeration_examples() {
        let set = enumerate_precritical_truncations(&seq("1[0]"), 2).unwrap();
        let got: Vec<String> = set.iter().map(|w| w.to_string()).collect();
        let mut want = vec!["*10", "0*1", "1*1", "00*", "01*", "10*", "11*"];
        want.sort();
        let mut got_sorted = got.clone();
        got_sorted.sort();
        assert_eq!(got_sorted, want);

        let set = enumerate_precritical_truncations(&seq("[10*]"), 0).unwrap();
        assert_eq!(set.len(), 1);
        assert!(set.contains(&word("*")));

        let set = enumerate_precritical_truncations(&seq("[10*]"), 3).unwrap();
        assert!(set.contains(&word("*10*")));
        assert!(enumerate_precritical_truncations(&seq("[10*]"), 17).is_err());
    }

    #[test]
    fn agreement_examples() {
        let tau = seq("1[0]");
        let x = seq("10[1]");
        assert_eq!(agreement_depth(&x, &x, &tau, 10).unwrap(), Agreement::AtLeast(10));
        // x = 111..., y = 000...: star at 0 needs tails 1000..; both fail at index 1.
        let r = agreement_depth(&seq("[1]"), &seq("[0]"), &tau, 10).unwrap();
        assert_eq!(r, Agreement::FailAt(1));
        assert_eq!(
            agreement_depth(&seq("10[0]"), &seq("1[00]"), &tau, 10).unwrap(),
            Agreement::AtLeast(10)
        );
    }

    #[test]
    fn agreement_matches_simeq_scan() {
        let tau = seq("[10*]");
        let xs = ["[0]", "0[1]", "110[10]", "01[011]", "1[100]", "[01]", "10[0]"];
        for a in xs {
            for b in xs {
                let (x, y) = (seq(a), seq(b));
                let r = agreement_depth(&x, &y, &tau, 12).unwrap();
                for m in 0..=12 {
                    let s = simeq(&x.truncate(m).unwrap(), &y.truncate(m).unwrap(), &tau)
                        .unwrap()
                        .holds;
                    assert_eq!(r.holds_at(m), s, "{a} {b} m={m}");
                }
            }
        }
    }

    #[test]
    fn proximity_values() {
        let tau = seq("1[0]");
        let x = seq("[0]");
        assert_eq!(proximity(&x, &x, &tau, 30).unwrap(), Proximity::AtMost(30));
        // x = 0001..., y = 0000...: differ at 3; stars at 3 need tails ~ 1 0..
        let p = proximity(&seq("0001[1]"), &seq("[0]"), &tau, 30).unwrap();
        assert_eq!(p, Proximity::Value(4));
        assert_eq!(p.below_exponent(3), Some(true));
        assert_eq!(p.below_exponent(4), Some(false));
    }

    #[test]
    fn epsilon_scale_mapping() {
        assert_eq!(EpsilonScale::new(0.0625).unwrap().depth(), 4);
        assert_eq!(EpsilonScale::new(0.1).unwrap().depth(), 3);
        assert_eq!(EpsilonScale::new(0.125).unwrap().depth(), 3);
        assert_eq!(EpsilonScale::new(1.0).unwrap().depth(), 0);
        assert_eq!(EpsilonScale::from_exponent(5).epsilon(), 1.0 / 32.0);
        assert!(EpsilonScale::new(0.0).is_err());
        assert!(EpsilonScale::new(2.0).is_err());
    }
}
