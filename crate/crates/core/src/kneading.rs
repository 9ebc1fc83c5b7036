//! Return times, recurrence classification and milestones of a kneading
//! sequence.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::symbolic::{FiniteWord, SymSeq, Symbol};

/// `r_m`: the least `k >= 1` with `tau|m = sigma^k(tau)|m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReturnTime {
    Finite(usize),
    /// No return ever (exact input).
    Infinite,
    /// No return among the shifts readable at the given certified depth.
    NoneWithin(usize),
}

impl ReturnTime {
    pub fn finite(self) -> Option<usize> {
        match self {
            ReturnTime::Finite(k) => Some(k),
            _ => None,
        }
    }
}

impl fmt::Display for ReturnTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReturnTime::Finite(k) => write!(f, "{k}"),
            ReturnTime::Infinite => write!(f, "inf"),
            ReturnTime::NoneWithin(d) => write!(f, ">{d}"),
        }
    }
}

/// Return time for a single `m`.
pub fn return_time(tau: &SymSeq, m: usize) -> Result<ReturnTime> {
    let prefix = tau.window(0, m + 1)?;
    let limit = match tau.exact_shape() {
        // beyond pre + p every shift repeats an earlier one
        Some((pre, p)) => pre + p,
        None => {
            let certified = tau.certified_depth().unwrap_or(0);
            if certified < m {
                return Err(Error::Insufficient(format!(
                    "return time for m = {m} needs depth {m}, certified {certified}"
                )));
            }
            certified - m
        }
    };
    for k in 1..=limit {
        if tau.window(k, m + 1)? == prefix {
            return Ok(ReturnTime::Finite(k));
        }
    }
    Ok(match tau.certified_depth() {
        Some(d) => ReturnTime::NoneWithin(d),
        None => ReturnTime::Infinite,
    })
}

/// `z[k]` = length of the longest common prefix of `s` and `s[k..]`.
fn z_function(s: &[Symbol]) -> Vec<usize> {
    let n = s.len();
    let mut z = vec![0; n];
    if n == 0 {
        return z;
    }
    z[0] = n;
    let (mut l, mut r) = (0, 0);
    for i in 1..n {
        if i < r {
            z[i] = (r - i).min(z[i - l]);
        }
        while i + z[i] < n && s[z[i]] == s[i + z[i]] {
            z[i] += 1;
        }
        if i + z[i] > r {
            l = i;
            r = i + z[i];
        }
    }
    z
}

/// `r_0, ..., r_{computed_to}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReturnTimeTable {
    entries: Vec<ReturnTime>,
}

impl ReturnTimeTable {
    /// Compute `r_m` for `m <= up_to`. Generated inputs are scanned with a
    /// Z-function over the readable prefix.
    pub fn compute(tau: &SymSeq, up_to: usize) -> Result<ReturnTimeTable> {
        match tau.certified_depth() {
            None => {
                let entries = (0..=up_to)
                    .map(|m| return_time(tau, m))
                    .collect::<Result<Vec<_>>>()?;
                Ok(ReturnTimeTable { entries })
            }
            Some(certified) => {
                if up_to > certified {
                    return Err(Error::Insufficient(format!(
                        "return times to {up_to} need depth {up_to}, certified {certified}"
                    )));
                }
                let s = tau.window(0, certified + 1)?;
                let z = z_function(&s);
                let mut entries = vec![ReturnTime::NoneWithin(certified); up_to + 1];
                // z[k] >= m + 1 means tau|m recurs at k
                let mut covered = 0;
                for (k, &len) in z.iter().enumerate().skip(1) {
                    let reach = len.min(up_to + 1);
                    while covered < reach {
                        entries[covered] = ReturnTime::Finite(k);
                        covered += 1;
                    }
                    if covered > up_to {
                        break;
                    }
                }
                Ok(ReturnTimeTable { entries })
            }
        }
    }

    /// A table from given values; useful for synthetic return-time data.
    pub fn from_values(entries: Vec<ReturnTime>) -> ReturnTimeTable {
        ReturnTimeTable { entries }
    }

    pub fn get(&self, m: usize) -> Option<ReturnTime> {
        self.entries.get(m).copied()
    }

    pub fn computed_to(&self) -> usize {
        self.entries.len().saturating_sub(1)
    }

    pub fn entries(&self) -> &[ReturnTime] {
        &self.entries
    }

    /// Least `m` whose return time is not finite.
    pub fn first_non_return(&self) -> Option<usize> {
        self.entries.iter().position(|r| r.finite().is_none())
    }
}

/// The greedy milestone sequence `m_1 < m_2 < ...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MilestoneSequence {
    pub values: Vec<usize>,
    /// Largest `m` whose return time was consulted.
    pub certified_to: usize,
}

/// `m_1` is the least `m >= 1` with `r_m >= m`; `m_{i+1}` the least
/// `m > r_{m_i} + 1` with `r_m >= m`. Stops after `count` values or when the
/// table is exhausted, failing if fewer than `count` were found.
pub fn milestones(table: &ReturnTimeTable, count: usize) -> Result<MilestoneSequence> {
    let mut values = Vec::with_capacity(count);
    let mut m = 1;
    let mut consulted = 0;
    while values.len() < count {
        let Some(r) = table.get(m) else {
            return Err(Error::Insufficient(format!(
                "only {} milestones within return times to {}",
                values.len(),
                table.computed_to()
            )));
        };
        consulted = m;
        let Some(r) = r.finite() else {
            return Err(Error::Contract(format!(
                "return time r_{m} is not finite; milestones need a recurrent sequence"
            )));
        };
        if r >= m {
            values.push(m);
            m = r + 2;
        } else {
            m += 1;
        }
    }
    Ok(MilestoneSequence {
        values,
        certified_to: consulted,
    })
}

/// Every milestone that fits in the table.
fn all_milestones(table: &ReturnTimeTable, limit: usize) -> MilestoneSequence {
    let mut values = Vec::new();
    let mut m = 1;
    let mut consulted = 0;
    while m <= limit {
        let Some(r) = table.get(m).and_then(ReturnTime::finite) else {
            break;
        };
        consulted = m;
        if r >= m {
            values.push(m);
            m = r + 2;
        } else {
            m += 1;
        }
    }
    MilestoneSequence {
        values,
        certified_to: consulted,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KneadingClass {
    Periodic {
        period: usize,
    },
    /// `horizon` is some `M >= 1` with `r_M` infinite.
    NonRecurrent {
        horizon: usize,
        exact: bool,
    },
    RecurrentNonPeriodic {
        milestones: MilestoneSequence,
        table: Arc<ReturnTimeTable>,
    },
}

impl KneadingClass {
    pub fn name(&self) -> &'static str {
        match self {
            KneadingClass::Periodic { .. } => "PERIODIC",
            KneadingClass::NonRecurrent { .. } => "NON_RECURRENT",
            KneadingClass::RecurrentNonPeriodic { .. } => "RECURRENT_NONPERIODIC",
        }
    }
}

impl fmt::Display for KneadingClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KneadingClass::Periodic { period } => write!(f, "PERIODIC(P={period})"),
            KneadingClass::NonRecurrent { horizon, .. } => write!(f, "NON_RECURRENT(M={horizon})"),
            KneadingClass::RecurrentNonPeriodic { milestones, .. } => {
                let head: Vec<String> = milestones.values.iter().take(8).map(|m| m.to_string()).collect();
                write!(f, "RECURRENT_NONPERIODIC(m={}", head.join(","))?;
                if milestones.values.len() > 8 {
                    write!(f, ",...")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Classify `tau`. Exact inputs are classified exactly; generated ones from
/// return times up to half their certified depth (capped by `depth`).
pub fn classify(tau: &SymSeq, depth: usize) -> Result<KneadingClass> {
    if let Some((pre, p)) = tau.exact_shape() {
        if pre == 0 {
            return Ok(KneadingClass::Periodic { period: p });
        }
        let scan = 4 * (pre + p) + 4;
        for m in 0..=scan {
            if return_time(tau, m)? == ReturnTime::Infinite {
                return Ok(KneadingClass::NonRecurrent {
                    horizon: m.max(1),
                    exact: true,
                });
            }
        }
        return Err(Error::Contract(format!(
            "preperiodic {tau} recurs beyond the scan bound {scan}"
        )));
    }

    let certified = tau.certified_depth().unwrap_or(0);
    let up_to = (certified / 2).min(depth.max(1));
    let table = ReturnTimeTable::compute(tau, up_to)?;

    if let Some(m0) = table.first_non_return() {
        if m0 <= up_to / 4 {
            return Ok(KneadingClass::NonRecurrent {
                horizon: m0.max(1),
                exact: false,
            });
        }
    }
    let finite: Vec<usize> = table.entries().iter().map_while(|r| r.finite()).collect();
    if let Some(&p) = finite.first() {
        if finite.len() > 2 * p && finite.iter().all(|&r| r == p) {
            return Ok(KneadingClass::Periodic { period: p });
        }
    }
    let milestones = all_milestones(&table, finite.len().saturating_sub(1));
    Ok(KneadingClass::RecurrentNonPeriodic {
        milestones,
        table: Arc::new(table),
    })
}

/// Result of the word-overlap lemma: `alpha = gamma^repetitions`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimitiveRootResult {
    pub gamma: FiniteWord,
    pub ell: usize,
    pub repetitions: usize,
}

/// If `alpha alpha` contains `alpha` starting at offset `n - m`, then
/// `alpha` is a power of a word of length `gcd(n, m)`.
pub fn word_overlap_root(alpha: &[Symbol], m: usize) -> Result<PrimitiveRootResult> {
    let n = alpha.len();
    if m == 0 || m >= n {
        return Err(Error::Contract(format!("overlap m = {m} must lie in 1..{n}")));
    }
    let shift = n - m;
    let doubled = |i: usize| alpha[i % n];
    if (0..n).any(|i| doubled(i) != doubled(i + shift)) {
        return Err(Error::Contract(format!(
            "alpha does not occur in alpha alpha at offset {shift}"
        )));
    }
    // Euclid on (n, m): both are periods of the infinite repetition.
    let (mut a, mut b) = (n, m);
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    let ell = a;
    let gamma: FiniteWord = alpha[..ell].iter().copied().collect();
    if alpha.chunks(ell).any(|c| c != gamma.symbols()) {
        return Err(Error::Contract("alpha is not a power of its gcd prefix".into()));
    }
    Ok(PrimitiveRootResult {
        gamma,
        ell,
        repetitions: n / ell,
    })
}

/// Witnesses `t` with `r_t >= t`, used to check that return times keep up
/// with `m` along a recurrent sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrowthReport {
    pub witnesses: Vec<usize>,
    pub checked_to: usize,
}

impl GrowthReport {
    /// Some witness lies in `(d/2, d]` for each `d` in `2..=checked_to`?
    pub fn witnesses_dense(&self) -> bool {
        let mut last = 0;
        for d in 2..=self.checked_to {
            while self.witnesses.get(last + 1).is_some_and(|&w| w <= d) {
                last += 1;
            }
            match self.witnesses.get(last) {
                Some(&w) if w <= d && 2 * w > d => {}
                _ => return false,
            }
        }
        true
    }
}

pub fn check_return_time_growth(tau: &SymSeq, depth: usize) -> Result<GrowthReport> {
    if tau.is_exact() {
        return Err(Error::Contract(format!(
            "{tau} is eventually periodic; return-time growth applies to recurrent non-periodic sequences"
        )));
    }
    if depth == 0 {
        return Ok(GrowthReport {
            witnesses: Vec::new(),
            checked_to: 0,
        });
    }
    let table = ReturnTimeTable::compute(tau, depth)?;
    let witnesses = (1..=depth)
        .filter(|&t| match table.get(t) {
            Some(ReturnTime::Finite(r)) => r >= t,
            Some(ReturnTime::NoneWithin(d)) => d >= 2 * t,
            _ => false,
        })
        .collect();
    Ok(GrowthReport {
        witnesses,
        checked_to: depth,
    })
}

/// Kneading sequence of the Feigenbaum (period-doubling limit) parameter,
/// the fixed point of `1 -> 10, 0 -> 11`: `1011101010111011...`.
pub fn period_doubling(certified_depth: usize) -> SymSeq {
    SymSeq::generated(
        |i| Symbol::from_bit((i + 1).trailing_zeros() % 2 == 0),
        certified_depth,
    )
    .with_label("period-doubling")
}

/// Certified depth given to generator sequences named on the command line or
/// in files.
pub const GENERATOR_DEPTH: usize = 1 << 17;

/// A sequence literal, or the name of a built-in generator
/// (`period-doubling`, alias `pd`).
pub fn parse_tau(text: &str) -> Result<SymSeq> {
    match text.trim() {
        "period-doubling" | "pd" => Ok(period_doubling(GENERATOR_DEPTH)),
        lit => SymSeq::parse(lit),
    }
}

/// Inverse of [`parse_tau`]: the literal, or the generator label.
pub fn tau_name(tau: &SymSeq) -> Result<String> {
    tau.literal()
        .or_else(|| tau.label().map(str::to_string))
        .ok_or_else(|| Error::Contract("unnamed generated sequence has no textual form".into()))
}
