//! Membership predicates for the itinerary space `D_tau`.

use std::fmt;

use super::seq::SymSeq;
use super::symbol::Symbol;
use crate::error::{Error, Result};
use crate::kneading::{classify, KneadingClass};

/// Verdict of a (possibly depth-limited) check.
///
/// `exact` verdicts are unconditional. Otherwise the verdict covers indices up
/// to `verified_to_depth`, and `unresolved` names the first index whose
/// condition could not be decided from the readable symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationRecord {
    pub verdict: bool,
    pub exact: bool,
    pub verified_to_depth: usize,
    /// Index at which the condition fails (when `verdict` is false).
    pub witness: Option<usize>,
    pub unresolved: Option<usize>,
}

impl VerificationRecord {
    fn pass(exact: bool, depth: usize) -> Self {
        VerificationRecord {
            verdict: true,
            exact,
            verified_to_depth: depth,
            witness: None,
            unresolved: None,
        }
    }

    fn fail(exact: bool, depth: usize, witness: usize) -> Self {
        VerificationRecord {
            verdict: false,
            exact,
            verified_to_depth: depth,
            witness: Some(witness),
            unresolved: None,
        }
    }
}

impl fmt::Display for VerificationRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({}, depth {})",
            if self.verdict { "pass" } else { "fail" },
            if self.exact { "exact" } else { "to depth" },
            self.verified_to_depth
        )
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Indices of shifts that need checking: all distinct shifts for an exact
/// sequence, `0..=depth` otherwise.
fn shift_range(x: &SymSeq, depth: usize) -> std::ops::Range<usize> {
    match x.exact_shape() {
        Some((pre, p)) => 0..pre + p,
        None => 0..depth.min(x.certified_depth().unwrap_or(depth)) + 1,
    }
}

/// Is `sigma^k(x) = y`? Exact when both are exact, else compared on the
/// readable overlap (returns `None` when the overlap shows no difference).
fn shift_equals(x: &SymSeq, k: usize, y: &SymSeq) -> Result<Option<bool>> {
    if let (Some(_), Some(_)) = (x.exact_shape(), y.exact_shape()) {
        return Ok(x.shift(k)?.exact_eq(y));
    }
    let mut i = 0;
    while x.readable(k + i) && y.readable(i) {
        if x.symbol(k + i)? != y.symbol(i)? {
            return Ok(Some(false));
        }
        i += 1;
    }
    Ok(None)
}

/// Checks the two conditions making `tau` a kneading sequence:
/// (1) `tau_n = *` iff `sigma^{n+1}(tau) = tau`;
/// (2) whenever `sigma^n(tau) != tau` the two differ at a place where neither
///     has a star.
pub fn is_lambda_acceptable(tau: &SymSeq, depth: usize) -> Result<VerificationRecord> {
    let exact = tau.is_exact();
    let ns = shift_range(tau, depth);
    // Past the preperiod the pair (tau_m, tau_{m+n}) repeats with the period.
    let horizon = match tau.exact_shape() {
        Some((pre, p)) => pre + 2 * p + depth,
        None => 0,
    };
    let mut unresolved = None;

    for n in ns.clone() {
        let fixed = shift_equals(tau, n + 1, tau)?;
        let star = tau.symbol(n)?.is_star();
        match fixed {
            Some(f) if f != star => return Ok(VerificationRecord::fail(exact, depth, n)),
            None if !star => return Ok(VerificationRecord::fail(exact, depth, n)),
            _ => {}
        }
    }

    for n in ns {
        if shift_equals(tau, n, tau)? != Some(false) {
            continue;
        }
        let mut separated = false;
        let mut m = 0;
        loop {
            if exact && m >= horizon {
                break;
            }
            if !exact && !tau.readable(m + n) {
                unresolved.get_or_insert(n);
                break;
            }
            if tau.symbol(m + n)?.separated_from(tau.symbol(m)?) {
                separated = true;
                break;
            }
            m += 1;
        }
        if !separated {
            let mut rec = VerificationRecord::fail(exact, depth, n);
            rec.unresolved = unresolved;
            return Ok(rec);
        }
    }
    Ok(VerificationRecord::pass(exact, depth))
}

/// A validated kneading sequence together with its classification; stands
/// for the dendrite `D_tau`.
#[derive(Debug, Clone)]
pub struct DendriteSpace {
    tau: SymSeq,
    critical: SymSeq,
    acceptability: VerificationRecord,
    class: KneadingClass,
}

impl DendriteSpace {
    /// Verify acceptability to `depth` and classify. Fails on non-acceptable
    /// `tau`.
    pub fn new(tau: SymSeq, depth: usize) -> Result<DendriteSpace> {
        let acceptability = is_lambda_acceptable(&tau, depth)?;
        if !acceptability.verdict {
            return Err(Error::NotAcceptable {
                index: acceptability.witness.unwrap_or(0),
            });
        }
        let class = classify(&tau, depth)?;
        let critical = tau.prepend(&[Symbol::Star]);
        Ok(DendriteSpace {
            tau,
            critical,
            acceptability,
            class,
        })
    }

    pub fn tau(&self) -> &SymSeq {
        &self.tau
    }

    /// The critical point `*tau`.
    pub fn critical_point(&self) -> &SymSeq {
        &self.critical
    }

    pub fn acceptability(&self) -> &VerificationRecord {
        &self.acceptability
    }

    pub fn class(&self) -> &KneadingClass {
        &self.class
    }

    /// `tau_0 .. tau_{len-1}`.
    pub fn tau_prefix(&self, len: usize) -> Result<Vec<Symbol>> {
        self.tau.window(0, len)
    }
}

/// `alpha_n = *` forces `sigma^{n+1}(alpha) = tau`.
pub fn is_consistent(alpha: &SymSeq, space: &DendriteSpace, depth: usize) -> Result<VerificationRecord> {
    let exact = alpha.is_exact() && space.tau().is_exact();
    let mut unresolved = None;
    for n in shift_range(alpha, depth) {
        if !alpha.symbol(n)?.is_star() {
            continue;
        }
        match shift_equals(alpha, n + 1, space.tau())? {
            Some(true) => {}
            Some(false) => return Ok(VerificationRecord::fail(exact, depth, n)),
            None => {
                unresolved.get_or_insert(n);
            }
        }
    }
    let mut rec = VerificationRecord::pass(exact, depth);
    rec.unresolved = unresolved;
    Ok(rec)
}

/// Search for the separating index of `sigma^n(alpha)` against `*tau`:
/// some `m > 0` with `alpha_{n+m}` and `tau_{m-1}` concrete and different.
/// Returns `Some(true)` when separated, `Some(false)` when provably never
/// separated, `None` when the readable symbols ran out.
pub(crate) fn separated_from_critical(
    alpha: &SymSeq,
    space: &DendriteSpace,
    n: usize,
) -> Result<Option<bool>> {
    let tau = space.tau();
    let horizon = match (alpha.exact_shape(), tau.exact_shape()) {
        (Some((pa, qa)), Some((pt, qt))) => Some(pa.max(pt + 1) + qa / gcd(qa, qt) * qt + 1),
        _ => None,
    };
    let mut m = 1;
    loop {
        if let Some(h) = horizon {
            if m > h {
                return Ok(Some(false));
            }
        } else if !(alpha.readable(n + m) && tau.readable(m - 1)) {
            return Ok(None);
        }
        if alpha.symbol(n + m)?.separated_from(tau.symbol(m - 1)?) {
            return Ok(Some(true));
        }
        m += 1;
    }
}

/// Admissibility over an explicit set of shifts; assumes consistency.
pub(crate) fn admissible_over(
    alpha: &SymSeq,
    space: &DendriteSpace,
    ns: impl Iterator<Item = usize>,
    depth: usize,
) -> Result<VerificationRecord> {
    let exact = alpha.is_exact() && space.tau().is_exact();
    let mut unresolved = None;
    for n in ns {
        if alpha.symbol(n)?.is_star() {
            // sigma^n(alpha) starts with a star; by consistency it is *tau.
            continue;
        }
        match separated_from_critical(alpha, space, n)? {
            Some(true) => {}
            Some(false) => return Ok(VerificationRecord::fail(exact, depth, n)),
            None => {
                unresolved.get_or_insert(n);
            }
        }
    }
    let mut rec = VerificationRecord::pass(exact, depth);
    rec.unresolved = unresolved;
    Ok(rec)
}

/// `(Lambda, tau)`-admissibility: consistent, and every shift other than the
/// critical point itself is separated from `*tau` at a star-free place.
///
/// A shift starting with a concrete symbol can never equal `*tau`, and one
/// starting with a star equals `*tau` by consistency, so only the former need
/// a separating index.
pub fn is_admissible(alpha: &SymSeq, space: &DendriteSpace, depth: usize) -> Result<VerificationRecord> {
    let consistency = is_consistent(alpha, space, depth)?;
    if !consistency.verdict {
        return Err(Error::Inconsistent {
            index: consistency.witness.unwrap_or(0),
        });
    }
    let mut rec = admissible_over(alpha, space, shift_range(alpha, depth), depth)?;
    if rec.unresolved.is_none() {
        rec.unresolved = consistency.unresolved;
    }
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::super::seq::seq;
    use super::*;
    use crate::kneading::period_doubling;

    fn space(lit: &str) -> DendriteSpace {
        DendriteSpace::new(seq(lit), 50).unwrap()
    }

    #[test]
    fn acceptability_examples() {
        assert!(is_lambda_acceptable(&seq("[*]"), 10).unwrap().verdict);
        let r = is_lambda_acceptable(&seq("[1*]"), 10).unwrap();
        assert!(!r.verdict);
        assert_eq!(r.witness, Some(1));
        assert!(r.exact);
        assert!(is_lambda_acceptable(&seq("[10*]"), 10).unwrap().verdict);
        assert!(is_lambda_acceptable(&seq("1[0]"), 10).unwrap().verdict);
        // star in a preperiodic sequence violates condition (1)
        assert!(!is_lambda_acceptable(&seq("*[0]"), 10).unwrap().verdict);
        // period 3 with the star in the wrong slot
        assert!(!is_lambda_acceptable(&seq("[1*0]"), 10).unwrap().verdict);
    }

    #[test]
    fn period_doubling_is_acceptable_to_depth() {
        let r = is_lambda_acceptable(&period_doubling(1 << 12), 200).unwrap();
        assert!(r.verdict);
        assert!(!r.exact);
    }

    #[test]
    fn consistency_examples() {
        let s = space("1[0]");
        assert!(is_consistent(s.critical_point(), &s, 20).unwrap().verdict);
        assert!(!is_consistent(&seq("*0[0]"), &s, 20).unwrap().verdict);
        assert!(is_consistent(&seq("01[10]"), &s, 20).unwrap().verdict);
    }

    #[test]
    fn admissibility_examples() {
        let s = space("1[0]");
        assert!(is_admissible(&seq("[1]"), &s, 20).unwrap().verdict);
        assert!(is_admissible(&seq("[0]"), &s, 20).unwrap().verdict);
        assert!(matches!(
            is_admissible(&seq("*0[0]"), &s, 20),
            Err(Error::Inconsistent { index: 0 })
        ));
        // a*tau with a concrete is glued to the critical point: not admissible
        assert!(!is_admissible(&seq("01[0]"), &s, 20).unwrap().verdict);
        assert!(is_admissible(s.critical_point(), &s, 20).unwrap().verdict);
        assert!(is_admissible(&seq("01*1[0]"), &s, 20).unwrap().verdict);
    }

    #[test]
    fn periodic_tau_shadow_points() {
        let s = space("[10*]");
        // [100] follows tau from index 2 forever
        let r = is_admissible(&seq("[100]"), &s, 20).unwrap();
        assert!(!r.verdict);
        assert!(is_admissible(&seq("100101[0]"), &s, 20).unwrap().verdict);
        assert!(is_admissible(&seq("[10*]"), &s, 20).unwrap().verdict);
    }

    #[test]
    fn rejects_unacceptable_space() {
        assert!(matches!(
            DendriteSpace::new(seq("[1*]"), 10),
            Err(Error::NotAcceptable { index: 1 })
        ));
    }
}
