//! Canonical epsilon-shadows of delta pseudo-orbits.
//!
//! Position `i` of a shadow follows point `x_{i+1}`: the shadow `z` is meant
//! to satisfy `sigma^i(z)|N_eps ≃ x_{i+1}|N_eps`. A ledger entry with
//! `beta_k` therefore puts its diamond at position `beta_k - 1`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kneading::{milestones, KneadingClass};
use crate::pseudo_orbit::{build_ledger, DeltaPseudoOrbit, DeltaScale, FlipLedger};
use crate::symbolic::{
    agrees_at, is_admissible, match_approx, simeq, DendriteSpace, EpsilonScale, SymSeq, Symbol, VerificationRecord,
};

/// Smallest `N_delta` strictly above the bound for the class of `tau`.
pub fn delta_for_epsilon(space: &DendriteSpace, eps: EpsilonScale) -> Result<DeltaScale> {
    let n = eps.depth();
    let depth = match space.class() {
        KneadingClass::Periodic { period } => 2 * (period + 1) * n + 1,
        KneadingClass::NonRecurrent { horizon, .. } => 2 * (n + horizon + 1) + 1,
        KneadingClass::RecurrentNonPeriodic { milestones: ms, table } => {
            let t = match ms.values.iter().position(|&m| m > n) {
                Some(t) => t,
                None => {
                    // the stored list may stop short; ask the table directly
                    let more = milestones(table, ms.values.len() + 1)?;
                    more.values
                        .iter()
                        .position(|&m| m > n)
                        .ok_or_else(|| Error::Insufficient(format!("no milestone above {n} is certified")))?
                }
            };
            let need = t + 2 * n + 2;
            let values = if ms.values.len() >= need {
                ms.values.clone()
            } else {
                milestones(table, need)?.values
            };
            values[t..need].iter().sum::<usize>() + 2 * n + 2
        }
    };
    Ok(DeltaScale::from_exponent(depth))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShadowSymbol {
    Sym(Symbol),
    Diamond,
}

impl fmt::Display for ShadowSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShadowSymbol::Sym(s) => write!(f, "{}", s.to_char()),
            ShadowSymbol::Diamond => f.write_str("◇"),
        }
    }
}

/// `zhat`: the finite head `word`, then the last point `x_L` read from
/// position `L - 1` on.
#[derive(Debug, Clone)]
pub struct CanonicalShadow {
    pub word: Vec<ShadowSymbol>,
    /// Diamond positions, increasing.
    pub diamonds: Vec<usize>,
    /// Index `L` of the last point.
    pub tail_source: usize,
    pub tail: SymSeq,
    pub ledger: FlipLedger,
    /// `x^{i+1}_0` under each diamond, in order.
    orbit_symbols: Vec<Symbol>,
}

impl CanonicalShadow {
    /// `zhat_i`, including the tail.
    pub fn symbol(&self, i: usize) -> Result<ShadowSymbol> {
        if let Some(&s) = self.word.get(i) {
            return Ok(s);
        }
        self.tail
            .symbol(i + 1 - self.tail_source)
            .map(ShadowSymbol::Sym)
    }
}

impl fmt::Display for CanonicalShadow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.word {
            write!(f, "{s}")?;
        }
        f.write_str("|")?;
        match self.tail.shift(self.word.len() + 1 - self.tail_source) {
            Ok(t) => write!(f, "{t}"),
            Err(_) => f.write_str("..."),
        }
    }
}

fn require_scale(orbit: &DeltaPseudoOrbit, eps: EpsilonScale, space: &DendriteSpace) -> Result<()> {
    if !orbit.is_validated() {
        return Err(Error::Contract("shadowing needs a validated pseudo-orbit".into()));
    }
    let need = delta_for_epsilon(space, eps)?.depth();
    let have = orbit.scale().depth();
    if have < need {
        return Err(Error::Contract(format!(
            "N_delta = {have} is below the {need} required for N_eps = {}",
            eps.depth()
        )));
    }
    Ok(())
}

pub fn canonical_shadow(orbit: &DeltaPseudoOrbit, eps: EpsilonScale, space: &DendriteSpace) -> Result<CanonicalShadow> {
    require_scale(orbit, eps, space)?;
    let ledger = build_ledger(orbit, eps)?;
    let len = orbit.len();
    let diamonds: Vec<usize> = ledger.betas().map(|b| b - 1).collect();
    let width = diamonds.last().map_or(len - 1, |&d| (d + 1).max(len - 1));
    let mut word = Vec::with_capacity(width);
    for p in 0..width {
        word.push(ShadowSymbol::Sym(orbit.entry(p + 1, 0)?));
    }
    let mut orbit_symbols = Vec::with_capacity(diamonds.len());
    for &d in &diamonds {
        orbit_symbols.push(orbit.entry(d + 1, 0)?);
        word[d] = ShadowSymbol::Diamond;
    }
    Ok(CanonicalShadow {
        word,
        diamonds,
        tail_source: len,
        tail: orbit.point(len)?.clone(),
        ledger,
        orbit_symbols,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssignmentPolicy {
    AllZero,
    AllOne,
    /// `x^{beta_k}_0` when it is a bit, else 0.
    PreferOrbit,
    Random { seed: u64 },
}

impl fmt::Display for AssignmentPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AssignmentPolicy::AllZero => f.write_str("all-zero"),
            AssignmentPolicy::AllOne => f.write_str("all-one"),
            AssignmentPolicy::PreferOrbit => f.write_str("prefer-orbit"),
            AssignmentPolicy::Random { seed } => write!(f, "random:{seed}"),
        }
    }
}

impl FromStr for AssignmentPolicy {
    type Err = Error;

    /// `all-zero`, `all-one`, `prefer-orbit`, `random` or `random:<seed>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse {
            literal: s.to_string(),
            reason: "expected all-zero, all-one, prefer-orbit or random[:seed]".into(),
        };
        match s {
            "all-zero" => Ok(AssignmentPolicy::AllZero),
            "all-one" => Ok(AssignmentPolicy::AllOne),
            "prefer-orbit" => Ok(AssignmentPolicy::PreferOrbit),
            "random" => Ok(AssignmentPolicy::Random { seed: 0 }),
            _ => {
                let seed = s.strip_prefix("random:").ok_or_else(bad)?;
                Ok(AssignmentPolicy::Random {
                    seed: seed.parse().map_err(|_| bad())?,
                })
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct AssignedShadow {
    pub z: SymSeq,
    /// Diamond position where a star was forced.
    pub forced_at: Option<usize>,
    pub admissibility: VerificationRecord,
}

/// First place where `zhat` after position `p` fails to match `tau`.
/// `Ok(None)` means it matches forever; undecidable cases are errors.
fn forcing_mismatch(shadow: &CanonicalShadow, tau: &SymSeq, p: usize, depth: usize) -> Result<Option<usize>> {
    let start = p + 1;
    let head = shadow.word.len();
    for i in start..head.max(start) {
        let t = tau.symbol(i - start)?;
        let ok = match shadow.word[i] {
            ShadowSymbol::Diamond => t.is_star(),
            ShadowSymbol::Sym(s) => s.matches(t),
        };
        if !ok {
            return Ok(Some(i));
        }
    }
    // past the head both sides are fixed sequences
    let from = head.max(start);
    let x = shadow.tail.shift(from + 1 - shadow.tail_source)?;
    let t = tau.shift(from - start)?;
    let bound = match (x.exact_shape(), t.exact_shape()) {
        (Some((a, p)), Some((b, q))) => Some(a.max(b) + lcm(p, q)),
        _ => None,
    };
    let scan = bound.unwrap_or(depth);
    for i in 0..scan {
        if !x.symbol(i)?.matches(t.symbol(i)?) {
            return Ok(Some(from + i));
        }
    }
    match bound {
        Some(_) => Ok(None),
        None => Err(Error::Undecided {
            position: p,
            depth: from + scan,
        }),
    }
}

fn lcm(a: usize, b: usize) -> usize {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

fn policy_rng(policy: AssignmentPolicy) -> Option<ChaCha8Rng> {
    match policy {
        AssignmentPolicy::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    }
}

fn policy_bit(policy: AssignmentPolicy, under: Symbol, rng: &mut Option<ChaCha8Rng>) -> Symbol {
    match policy {
        AssignmentPolicy::AllZero => Symbol::Zero,
        AssignmentPolicy::AllOne => Symbol::One,
        AssignmentPolicy::PreferOrbit => match under {
            Symbol::Star => Symbol::Zero,
            s => s,
        },
        AssignmentPolicy::Random { .. } => Symbol::from_bit(rng.as_mut().is_some_and(|r| r.gen())),
    }
}

impl CanonicalShadow {
    /// The head word with every diamond replaced by a bit, never a star.
    pub fn binary_head(&self, policy: AssignmentPolicy) -> Vec<Symbol> {
        let mut rng = policy_rng(policy);
        let mut k = 0;
        self.word
            .iter()
            .map(|s| match *s {
                ShadowSymbol::Sym(s) => s,
                ShadowSymbol::Diamond => {
                    k += 1;
                    policy_bit(policy, self.orbit_symbols[k - 1], &mut rng)
                }
            })
            .collect()
    }
}

/// Fill the diamonds. At the first diamond whose tail matches `tau` a star
/// is forced and `tau` copied after it; otherwise each diamond gets a bit
/// chosen by `policy`. The result is checked for admissibility to `depth`,
/// which also bounds the forcing test for generated `tau`.
pub fn assign_shadow(
    shadow: &CanonicalShadow,
    policy: AssignmentPolicy,
    space: &DendriteSpace,
    depth: usize,
) -> Result<AssignedShadow> {
    let tau = space.tau();
    let mut rng = policy_rng(policy);
    let mut head: Vec<Symbol> = Vec::with_capacity(shadow.word.len());
    let mut next = 0;
    let mut forced_at = None;
    for (k, &p) in shadow.diamonds.iter().enumerate() {
        for s in &shadow.word[next..p] {
            let ShadowSymbol::Sym(s) = *s else { unreachable!() };
            head.push(s);
        }
        next = p + 1;
        if forcing_mismatch(shadow, tau, p, depth)?.is_none() {
            head.push(Symbol::Star);
            forced_at = Some(p);
            break;
        }
        head.push(policy_bit(policy, shadow.orbit_symbols[k], &mut rng));
    }
    let z = if forced_at.is_some() {
        tau.prepend(&head)
    } else {
        for s in &shadow.word[next..] {
            let ShadowSymbol::Sym(s) = *s else { unreachable!() };
            head.push(s);
        }
        shadow
            .tail
            .shift(shadow.word.len() + 1 - shadow.tail_source)?
            .prepend(&head)
    };
    let admissibility = is_admissible(&z, space, depth)?;
    Ok(AssignedShadow {
        z,
        forced_at,
        admissibility,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShadowReport {
    pub n_eps: usize,
    pub checked: usize,
    /// Least `i` with `sigma^i(z)|N_eps` not `≃` `x_{i+1}|N_eps`.
    pub first_failure: Option<usize>,
}

impl ShadowReport {
    pub fn verified(&self) -> bool {
        self.first_failure.is_none()
    }
}

/// Compare `sigma^i(z)` with `x_{i+1}` at `N_eps` for every point.
pub fn verify_shadowing(
    orbit: &DeltaPseudoOrbit,
    z: &SymSeq,
    eps: EpsilonScale,
    space: &DendriteSpace,
) -> Result<ShadowReport> {
    let n = eps.depth();
    let mut first_failure = None;
    let mut zi = z.clone();
    for (i, x) in orbit.points().iter().enumerate() {
        if i > 0 {
            zi = zi.shift(1)?;
        }
        if !agrees_at(&zi, x, space.tau(), n)? {
            first_failure = Some(i);
            break;
        }
    }
    Ok(ShadowReport {
        n_eps: n,
        checked: orbit.len(),
        first_failure,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PseudoAgreementReport {
    pub n_eps: usize,
    pub points_checked: usize,
    /// Points `n` with `x_n|N_eps` not `≃` the column word `x^n_0 .. x^{n+N_eps}_0`.
    pub column_failures: Vec<usize>,
    /// `(k, t)` with `x_{beta_k + t}|(N_eps - t)` not `≈` `sigma^t(*tau)`.
    pub critical_failures: Vec<(usize, usize)>,
    pub ledger_len: usize,
}

impl PseudoAgreementReport {
    pub fn holds(&self) -> bool {
        self.column_failures.is_empty() && self.critical_failures.is_empty()
    }
}

/// Check both agreement properties at every point and every ledger entry.
/// Runs at any scale; violations are reported, not raised.
pub fn check_pseudo_agreement(
    orbit: &DeltaPseudoOrbit,
    eps: EpsilonScale,
    space: &DendriteSpace,
) -> Result<PseudoAgreementReport> {
    let n = eps.depth();
    let tau = space.tau();
    let mut column_failures = Vec::new();
    for k in 1..=orbit.len() {
        let row = orbit.point(k)?.window(0, n + 1)?;
        let col = (0..=n).map(|r| orbit.entry(k + r, 0)).collect::<Result<Vec<_>>>()?;
        if !simeq(&row, &col, tau)?.holds {
            column_failures.push(k);
        }
    }
    let ledger = build_ledger(orbit, eps)?;
    let critical = space.critical_point();
    let mut critical_failures = Vec::new();
    for (k, e) in ledger.entries.iter().enumerate() {
        for t in 0..=n {
            let x = orbit.extended(e.beta + t)?.window(0, n - t + 1)?;
            let c = critical.window(t, n - t + 1)?;
            if !match_approx(&x, &c)? {
                critical_failures.push((k + 1, t));
            }
        }
    }
    Ok(PseudoAgreementReport {
        n_eps: n,
        points_checked: orbit.len(),
        column_failures,
        critical_failures,
        ledger_len: ledger.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kneading::period_doubling;
    use crate::pseudo_orbit::{plant_flip_at, random_pseudo_orbit_with, ColumnChoice};
    use crate::symbolic::seq;

    fn space(lit: &str) -> DendriteSpace {
        DendriteSpace::new(seq(lit), 64).unwrap()
    }

    #[test]
    fn delta_bounds() {
        let e4 = EpsilonScale::from_exponent(4);
        assert_eq!(delta_for_epsilon(&space("[10*]"), e4).unwrap().depth(), 33);
        assert_eq!(delta_for_epsilon(&space("1[0]"), e4).unwrap().depth(), 13);
        let pd = DendriteSpace::new(period_doubling(1 << 17), 20_000).unwrap();
        let got: Vec<usize> = (3..=5)
            .map(|e| delta_for_epsilon(&pd, EpsilonScale::from_exponent(e)).unwrap().depth())
            .collect();
        assert_eq!(got, [1044, 4122, 16416]);
    }

    #[test]
    fn delta_monotone_in_eps() {
        for lit in ["[10*]", "1[0]", "10[0]"] {
            let s = space(lit);
            let d: Vec<usize> = (1..8)
                .map(|e| delta_for_epsilon(&s, EpsilonScale::from_exponent(e)).unwrap().depth())
                .collect();
            assert!(d.windows(2).all(|w| w[0] <= w[1]), "{lit}: {d:?}");
        }
    }

    #[test]
    fn exact_orbit_shadow_is_first_point() {
        let s = space("1[0]");
        let x = seq("0110[01]");
        let pts: Vec<SymSeq> = (0..20).map(|i| x.shift(i).unwrap()).collect();
        let o = DeltaPseudoOrbit::validate(pts, DeltaScale::from_exponent(13), &s).unwrap();
        let eps = EpsilonScale::from_exponent(4);
        let sh = canonical_shadow(&o, eps, &s).unwrap();
        assert!(sh.diamonds.is_empty());
        let a = assign_shadow(&sh, AssignmentPolicy::AllOne, &s, 80).unwrap();
        assert_eq!(a.z.exact_eq(&x), Some(true));
        assert!(verify_shadowing(&o, &a.z, eps, &s).unwrap().verified());
        assert!(check_pseudo_agreement(&o, eps, &s).unwrap().holds());
    }

    #[test]
    fn scale_too_coarse_is_rejected() {
        let s = space("1[0]");
        let o = DeltaPseudoOrbit::validate(vec![seq("[01]")], DeltaScale::from_exponent(12), &s).unwrap();
        assert!(matches!(
            canonical_shadow(&o, EpsilonScale::from_exponent(4), &s),
            Err(Error::Contract(_))
        ));
    }

    fn planted_orbit() -> (DendriteSpace, DeltaPseudoOrbit) {
        // tau = 1[0]: sigma(x_3) = 01000..., so column 0 is legal
        let s = space("1[0]");
        let n = 13;
        let x = seq("0000100000000000000[01]");
        let mut pts: Vec<SymSeq> = (0..3).map(|i| x.shift(i).unwrap()).collect();
        let sh = pts[2].shift(1).unwrap();
        let y = plant_flip_at(&s, &sh, 0, n, Symbol::One, &seq("[011]"), 4).unwrap().unwrap();
        pts.push(y.clone());
        for i in 1..12 {
            pts.push(y.shift(i).unwrap());
        }
        let o = DeltaPseudoOrbit::validate(pts, DeltaScale::from_exponent(n), &s).unwrap();
        (s, o)
    }

    #[test]
    fn one_planted_flip_one_diamond() {
        let (s, o) = planted_orbit();
        let eps = EpsilonScale::from_exponent(4);
        let sh = canonical_shadow(&o, eps, &s).unwrap();
        assert_eq!(sh.ledger.len(), 1);
        assert_eq!(sh.diamonds, vec![sh.ledger.entries[0].beta - 1]);
        for policy in [AssignmentPolicy::AllZero, AssignmentPolicy::AllOne] {
            let a = assign_shadow(&sh, policy, &s, 80).unwrap();
            assert_eq!(a.forced_at, None);
            assert!(a.admissibility.verdict, "{policy}");
            assert!(verify_shadowing(&o, &a.z, eps, &s).unwrap().verified(), "{policy}");
        }
        assert!(check_pseudo_agreement(&o, eps, &s).unwrap().holds());
    }

    #[test]
    fn forced_star_when_orbit_follows_critical_orbit() {
        // the last point is tau itself, so the tail after the diamond is tau
        let s = space("1[0]");
        let n = 13;
        let x = seq("0001[0]");
        let mut pts: Vec<SymSeq> = (0..2).map(|i| x.shift(i).unwrap()).collect();
        pts.push(seq("*1[0]"));
        pts.push(seq("1[0]"));
        let o = DeltaPseudoOrbit::validate(pts, DeltaScale::from_exponent(n), &s).unwrap();
        let eps = EpsilonScale::from_exponent(4);
        let sh = canonical_shadow(&o, eps, &s).unwrap();
        assert_eq!(sh.diamonds.len(), 1);
        let a = assign_shadow(&sh, AssignmentPolicy::AllZero, &s, 80).unwrap();
        let p = sh.diamonds[0];
        assert_eq!(a.forced_at, Some(p));
        assert_eq!(a.z.symbol(p).unwrap(), Symbol::Star);
        assert_eq!(a.z.shift(p + 1).unwrap().exact_eq(s.tau()), Some(true));
        assert!(a.admissibility.verdict);
        assert!(verify_shadowing(&o, &a.z, eps, &s).unwrap().verified());
    }

    #[test]
    fn unrelated_point_fails_early() {
        let s = space("1[0]");
        let x = seq("[0]");
        let pts: Vec<SymSeq> = (0..5).map(|_| x.clone()).collect();
        let o = DeltaPseudoOrbit::validate(pts, DeltaScale::from_exponent(13), &s).unwrap();
        let r = verify_shadowing(&o, &seq("[1]"), EpsilonScale::from_exponent(4), &s).unwrap();
        assert_eq!(r.first_failure, Some(0));
    }

    #[test]
    fn random_orbits_are_shadowed() {
        let mut diamonds = 0;
        for lit in ["[10*]", "1[0]"] {
            let s = space(lit);
            for e in 3..=4 {
                let eps = EpsilonScale::from_exponent(e);
                let scale = delta_for_epsilon(&s, eps).unwrap();
                for seed in 0..5 {
                    let o = random_pseudo_orbit_with(&s, scale, 60, seed, 0.5, ColumnChoice::LowBiased).unwrap();
                    let sh = canonical_shadow(&o, eps, &s).unwrap();
                    diamonds += sh.diamonds.len();
                    // a diamond closer than N_eps sits on a star of the critical copy
                    for w in sh.diamonds.windows(2) {
                        let gap = w[1] - w[0];
                        assert!(gap > e || s.critical_point().symbol(gap).unwrap().is_star());
                    }
                    assert!(check_pseudo_agreement(&o, eps, &s).unwrap().holds());
                    for policy in [AssignmentPolicy::AllZero, AssignmentPolicy::AllOne, AssignmentPolicy::Random { seed }] {
                        let a = assign_shadow(&sh, policy, &s, 200).unwrap();
                        let r = verify_shadowing(&o, &a.z, eps, &s).unwrap();
                        assert!(r.verified(), "{lit} e={e} seed={seed} {policy}: {r:?}");
                    }
                }
            }
        }
        assert!(diamonds > 20, "{diamonds}");
    }

    #[test]
    fn diamonds_closer_than_n_eps_for_periodic_tau() {
        let s = space("[10*]");
        let eps = EpsilonScale::from_exponent(3);
        let scale = delta_for_epsilon(&s, eps).unwrap();
        let o = random_pseudo_orbit_with(&s, scale, 60, 2, 0.5, ColumnChoice::LowBiased).unwrap();
        let sh = canonical_shadow(&o, eps, &s).unwrap();
        assert_eq!(sh.diamonds[..2], [29, 32]);
        assert!(check_pseudo_agreement(&o, eps, &s).unwrap().holds());
        let a = assign_shadow(&sh, AssignmentPolicy::AllOne, &s, 200).unwrap();
        assert!(verify_shadowing(&o, &a.z, eps, &s).unwrap().verified());
    }

    #[test]
    fn coarse_delta_reports_without_crashing() {
        let s = space("1[0]");
        let eps = EpsilonScale::from_exponent(4);
        let o = random_pseudo_orbit_with(&s, DeltaScale::from_exponent(4), 80, 2, 0.8, ColumnChoice::LowBiased).unwrap();
        let r = check_pseudo_agreement(&o, eps, &s).unwrap();
        assert_eq!(r.points_checked, 80);
    }

    #[test]
    fn policy_round_trip() {
        for p in [
            AssignmentPolicy::AllZero,
            AssignmentPolicy::AllOne,
            AssignmentPolicy::PreferOrbit,
            AssignmentPolicy::Random { seed: 17 },
        ] {
            assert_eq!(p.to_string().parse::<AssignmentPolicy>().unwrap(), p);
        }
        assert!("sometimes".parse::<AssignmentPolicy>().is_err());
    }
}
