use std::collections::BTreeMap;
use std::fmt;

use super::{ArrayAccess, DeltaPseudoOrbit};
use crate::error::{Error, Result};
use crate::kneading::KneadingClass;
use crate::symbolic::{DendriteSpace, EpsilonScale, Symbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FlipKind {
    /// `x^k_j != x^{k+i}_{j-i}` for a least `i`.
    Disagreement,
    /// `x^k_j = x^{k+1}_{j-1} = ... = x^{k+j}_0 = *`; row recorded as 1.
    StarDiagonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FlipRecord {
    pub owner: usize,
    pub column: usize,
    pub row: usize,
    pub kind: FlipKind,
}

/// Column `j` relative to `x_k`, read straight off the array.
pub(crate) fn column_flip<A: ArrayAccess>(orbit: &A, k: usize, j: usize) -> Result<Option<FlipRecord>> {
    let top = orbit.entry(k, j)?;
    for i in 1..=j {
        if orbit.entry(k + i, j - i)? != top {
            return Ok(Some(FlipRecord {
                owner: k,
                column: j,
                row: i,
                kind: FlipKind::Disagreement,
            }));
        }
    }
    Ok(if top.is_star() {
        Some(FlipRecord {
            owner: k,
            column: j,
            row: 1,
            kind: FlipKind::StarDiagonal,
        })
    } else {
        None
    })
}

/// All flip columns `j < horizon` relative to `x_anchor`.
///
/// Row `i` breaks column `j` exactly when `sigma(x_{k+i-1})` and `x_{k+i}`
/// differ at `j - i`, so only differing consecutive pairs are inspected.
pub(crate) fn scan_columns(orbit: &DeltaPseudoOrbit, anchor: usize, horizon: usize) -> Result<Vec<FlipRecord>> {
    if anchor == 0 || anchor > orbit.len() {
        return Err(Error::Contract(format!(
            "anchor {anchor} outside 1..={}",
            orbit.len()
        )));
    }
    let mut rows: BTreeMap<usize, usize> = BTreeMap::new();
    let last = orbit.len();
    for i in 1..horizon {
        let k = anchor + i;
        if k > last {
            break;
        }
        let span = horizon - i;
        let prev = orbit.point(k - 1)?.shift(1)?;
        let cur = orbit.point(k)?;
        let Some(first) = prev.first_difference(cur, span)? else {
            continue;
        };
        let a = prev.window(first, span - first)?;
        let b = cur.window(first, span - first)?;
        for (off, (x, y)) in a.iter().zip(&b).enumerate() {
            if x != y {
                rows.entry(first + off + i).or_insert(i);
            }
        }
    }
    let mut out = Vec::new();
    for j in 0..horizon {
        if let Some(&row) = rows.get(&j) {
            out.push(FlipRecord {
                owner: anchor,
                column: j,
                row,
                kind: FlipKind::Disagreement,
            });
        } else if orbit.entry(anchor, j)?.is_star() {
            out.push(FlipRecord {
                owner: anchor,
                column: j,
                row: 1,
                kind: FlipKind::StarDiagonal,
            });
        }
    }
    Ok(out)
}

/// Flip columns `j < horizon <= N_delta` relative to `x_anchor` with their
/// least flip rows.
pub fn flip_scan(orbit: &DeltaPseudoOrbit, anchor: usize, horizon: usize) -> Result<Vec<FlipRecord>> {
    let n = orbit.scale().depth();
    if horizon > n {
        return Err(Error::Contract(format!("horizon {horizon} exceeds N_delta = {n}")));
    }
    scan_columns(orbit, anchor, horizon)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LedgerEntry {
    pub alpha: usize,
    pub j: usize,
    pub i: usize,
    pub beta: usize,
    pub kind: FlipKind,
}

/// The sequences `alpha_k, j_k, i_k, beta_k = alpha_k + j_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlipLedger {
    pub entries: Vec<LedgerEntry>,
    /// `N_eps`: only columns below it are recorded.
    pub horizon: usize,
}

impl FlipLedger {
    pub fn betas(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|e| e.beta)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl fmt::Display for FlipLedger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, e) in self.entries.iter().enumerate() {
            writeln!(
                f,
                "k={} alpha={} j={} i={} beta={}{}",
                n + 1,
                e.alpha,
                e.j,
                e.i,
                e.beta,
                if e.kind == FlipKind::StarDiagonal { " (star diagonal)" } else { "" }
            )?;
        }
        Ok(())
    }
}

/// The least column `j < n_eps` that is a flip column of `x_alpha` (or an
/// all-star diagonal), as a ledger entry.
pub(crate) fn ledger_entry_at<A: ArrayAccess>(orbit: &A, alpha: usize, n_eps: usize) -> Result<Option<LedgerEntry>> {
    for j in 0..n_eps {
        if let Some(rec) = column_flip(orbit, alpha, j)? {
            return Ok(Some(LedgerEntry {
                alpha,
                j,
                i: rec.row,
                beta: alpha + j,
                kind: rec.kind,
            }));
        }
    }
    Ok(None)
}

/// Minimal `alpha_k > beta_{k-1}`, then minimal `j_k < N_eps`, then minimal
/// row, over the points of the orbit.
pub fn build_ledger(orbit: &DeltaPseudoOrbit, eps: EpsilonScale) -> Result<FlipLedger> {
    let n_eps = eps.depth();
    let mut entries = Vec::new();
    let mut alpha = 1;
    while alpha <= orbit.len() {
        match ledger_entry_at(orbit, alpha, n_eps)? {
            Some(e) => {
                alpha = e.beta + 1;
                entries.push(e);
            }
            None => alpha += 1,
        }
    }
    Ok(FlipLedger {
        entries,
        horizon: n_eps,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BetweenFlipsReport {
    pub anchor: usize,
    pub j1: usize,
    pub j2: usize,
    /// Equalities checked in the first and second family.
    pub checked: (usize, usize),
    /// `(family, parameter)` of each failed equality.
    pub counterexamples: Vec<(u8, usize)>,
}

impl BetweenFlipsReport {
    pub fn holds(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// For consecutive flip columns `j1 < j2` of `x_k`, the symbols strictly
/// between the two columns are carried unchanged:
/// (1) `sigma^{j1+1}(x_k)` and `sigma^{j1+1-l}(x_{k+l})` agree on
///     `j2 - j1 - 1` symbols for `1 <= l <= j1 + 1`;
/// (2) `sigma^{j1+n}(x_k)` and `x_{k+j1+n}` agree on `j2 - j1 - n` symbols
///     for `1 <= n <= j2 - j1 - 1`.
pub fn verify_between_flips(orbit: &DeltaPseudoOrbit, k: usize, j1: usize, j2: usize) -> Result<BetweenFlipsReport> {
    if j1 >= j2 {
        return Err(Error::Contract(format!("need j1 < j2, got {j1} and {j2}")));
    }
    let flips: Vec<usize> = scan_columns(orbit, k, j2 + 1)?
        .into_iter()
        .filter(|r| r.kind == FlipKind::Disagreement)
        .map(|r| r.column)
        .filter(|&c| c >= j1)
        .collect();
    if flips != [j1, j2] {
        return Err(Error::Contract(format!(
            "columns {j1} and {j2} are not consecutive flip columns of x_{k} (found {flips:?})"
        )));
    }
    let width = j2 - j1 - 1;
    let xk = orbit.extended(k)?;
    let mut report = BetweenFlipsReport {
        anchor: k,
        j1,
        j2,
        checked: (0, 0),
        counterexamples: Vec::new(),
    };
    let head = xk.window(j1 + 1, width)?;
    for l in 1..=j1 + 1 {
        let other = orbit.extended(k + l)?.window(j1 + 1 - l, width)?;
        report.checked.0 += 1;
        if other != head {
            report.counterexamples.push((1, l));
        }
    }
    for n in 1..=width {
        let len = j2 - j1 - n;
        let a = xk.window(j1 + n, len)?;
        let b = orbit.extended(k + j1 + n)?.window(0, len)?;
        report.checked.1 += 1;
        if a != b {
            report.counterexamples.push((2, n));
        }
    }
    Ok(report)
}

/// The `s_i` / `t_i` chain for an anchor flip, and the measured gaps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlipDiagnostics {
    pub anchor: usize,
    pub column: usize,
    pub period: usize,
    pub n_delta: usize,
    /// `(s_i, t_i)` in enumeration order.
    pub chain: Vec<(usize, usize)>,
    /// `N_delta - t_i` for each link.
    pub gaps: Vec<usize>,
    /// 1-based `i` with `N_delta - t_i >= i P`.
    pub violations: Vec<usize>,
}

impl FlipDiagnostics {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// For periodic `tau` and a flip of `x_k` at `column` coming from the first
/// step (row 1), enumerate the out-of-sync flip columns `t` (those with
/// `t - column` not a multiple of `P`) by increasing least row and
/// decreasing column, and check `N_delta - t_i < i P`.
pub fn verify_periodic_flip_bound(
    orbit: &DeltaPseudoOrbit,
    space: &DendriteSpace,
    k: usize,
    column: usize,
) -> Result<FlipDiagnostics> {
    let KneadingClass::Periodic { period } = *space.class() else {
        return Err(Error::Contract(format!(
            "periodic flip bound needs periodic tau, got {}",
            space.class()
        )));
    };
    let n_delta = orbit.scale().depth();
    if column >= n_delta {
        return Err(Error::Contract(format!("column {column} is not below N_delta = {n_delta}")));
    }
    let flips = scan_columns(orbit, k, n_delta)?;
    let anchor_ok = flips
        .iter()
        .any(|r| r.column == column && r.row == 1 && r.kind == FlipKind::Disagreement);
    if !anchor_ok {
        return Err(Error::Contract(format!(
            "column {column} of x_{k} is not a row-1 flip column"
        )));
    }
    let candidates: Vec<(usize, usize)> = flips
        .iter()
        .filter(|r| r.kind == FlipKind::Disagreement && r.column > column && !(r.column - column).is_multiple_of(period))
        .map(|r| (r.row, r.column))
        .collect();

    let mut chain = Vec::new();
    let mut last: Option<(usize, usize)> = None;
    loop {
        let next = candidates
            .iter()
            .filter(|&&(s, t)| last.is_none_or(|(ls, lt)| s > ls && t < lt))
            .min()
            .copied();
        match next {
            Some(link) => {
                chain.push(link);
                last = Some(link);
            }
            None => break,
        }
    }
    let gaps: Vec<usize> = chain.iter().map(|&(_, t)| n_delta - t).collect();
    let violations = gaps
        .iter()
        .enumerate()
        .filter(|&(i, &g)| g >= (i + 1) * period)
        .map(|(i, _)| i + 1)
        .collect();
    Ok(FlipDiagnostics {
        anchor: k,
        column,
        period,
        n_delta,
        chain,
        gaps,
        violations,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecurrentGapReport {
    pub anchor: usize,
    pub j1: usize,
    pub j2: usize,
    pub rows: (usize, usize),
    pub milestone_index: usize,
    /// Third flip `(j3, i3)` with `i3` strictly between the rows and
    /// `j3 - j2 - 1 < m_{t+1}`.
    pub third: Option<(usize, usize)>,
}

impl RecurrentGapReport {
    pub fn holds(&self) -> bool {
        self.third.is_some()
    }
}

/// For successive flip columns `j1 < j2` of `x_k` with distinct rows and a
/// milestone index `t` (1-based) such that `j2 - j1 - 1 < m_t` and
/// `N_delta - j2 - 1 > m_{t+1}`, look for the promised third flip.
pub fn verify_recurrent_flip_gap(
    orbit: &DeltaPseudoOrbit,
    space: &DendriteSpace,
    k: usize,
    j1: usize,
    j2: usize,
    t: usize,
) -> Result<RecurrentGapReport> {
    let KneadingClass::RecurrentNonPeriodic { milestones, .. } = space.class() else {
        return Err(Error::Contract(format!(
            "recurrent flip gap needs recurrent non-periodic tau, got {}",
            space.class()
        )));
    };
    if t == 0 || t + 1 > milestones.values.len() {
        return Err(Error::Insufficient(format!(
            "milestone index {t} needs m_{} (have {})",
            t + 1,
            milestones.values.len()
        )));
    }
    let (mt, mt1) = (milestones.values[t - 1], milestones.values[t]);
    let n_delta = orbit.scale().depth();
    if j1 >= j2 || j2 >= n_delta {
        return Err(Error::Contract(format!("need j1 < j2 < N_delta, got {j1}, {j2}")));
    }
    if j2 - j1 > mt {
        return Err(Error::Contract(format!("premise (i) fails: j2 - j1 - 1 = {} >= m_t = {mt}", j2 - j1 - 1)));
    }
    if n_delta - j2 - 1 <= mt1 {
        return Err(Error::Contract(format!(
            "premise (ii) fails: N_delta - j2 - 1 = {} <= m_(t+1) = {mt1}",
            n_delta - j2 - 1
        )));
    }
    let flips: Vec<FlipRecord> = scan_columns(orbit, k, n_delta)?
        .into_iter()
        .filter(|r| r.kind == FlipKind::Disagreement)
        .collect();
    let row_of = |c: usize| flips.iter().find(|r| r.column == c).map(|r| r.row);
    let (Some(i1), Some(i2)) = (row_of(j1), row_of(j2)) else {
        return Err(Error::Contract(format!("{j1} and {j2} must both be flip columns of x_{k}")));
    };
    if flips.iter().any(|r| r.column > j1 && r.column < j2) {
        return Err(Error::Contract(format!("flip columns {j1} and {j2} are not successive")));
    }
    if i1 == i2 {
        return Err(Error::Contract(format!("rows must differ, both are {i1}")));
    }
    let (lo, hi) = (i1.min(i2), i1.max(i2));
    let third = flips
        .iter()
        .find(|r| r.column > j2 && r.column - j2 - 1 < mt1 && r.row > lo && r.row < hi)
        .map(|r| (r.column, r.row));
    Ok(RecurrentGapReport {
        anchor: k,
        j1,
        j2,
        rows: (i1, i2),
        milestone_index: t,
        third,
    })
}

/// Symbol column `j` of the array from `x_k` downwards, for display.
pub fn column_trace(orbit: &DeltaPseudoOrbit, k: usize, j: usize) -> Result<Vec<Symbol>> {
    (0..=j).map(|i| orbit.entry(k + i, j - i)).collect()
}

#[cfg(test)]
mod tests {
    use super::super::{plant_flip_at, DeltaScale};
    use super::*;
    use crate::symbolic::{seq, SymSeq};

    fn space(lit: &str) -> DendriteSpace {
        DendriteSpace::new(seq(lit), 40).unwrap()
    }

    fn orbit_with(points: Vec<SymSeq>, n: usize, s: &DendriteSpace) -> DeltaPseudoOrbit {
        DeltaPseudoOrbit::validate(points, DeltaScale::from_exponent(n), s).unwrap()
    }

    /// Literal reading of the definition: for each column, walk the rows.
    fn slow_scan(orbit: &DeltaPseudoOrbit, k: usize, horizon: usize) -> Vec<FlipRecord> {
        (0..horizon).filter_map(|j| column_flip(orbit, k, j).unwrap()).collect()
    }

    /// `x, sigma x, sigma^2 x, ...` with a flip planted into point `step + 1`.
    fn planted(s: &DendriteSpace, x: &SymSeq, len: usize, step: usize, column: usize, n: usize) -> Vec<SymSeq> {
        let mut pts = vec![x.clone()];
        for q in 1..len {
            let next = pts[q - 1].shift(1).unwrap();
            let next = if q == step {
                plant_flip_at(s, &next, column, n, Symbol::One, &seq("[01]"), 0).unwrap().unwrap()
            } else {
                next
            };
            pts.push(next);
        }
        pts
    }

    /// A single 1 every 20 symbols; with tau = 1[0] the legal flip column of
    /// `sigma^q(x)` is `19 - q`.
    fn sparse() -> SymSeq {
        seq("[10000000000000000000]")
    }

    #[test]
    fn exact_orbit_has_no_flips() {
        let s = space("1[0]");
        let x = seq("0110[01]");
        let o = orbit_with((0..20).map(|i| x.shift(i).unwrap()).collect(), 10, &s);
        for k in 1..=20 {
            assert!(flip_scan(&o, k, 10).unwrap().is_empty());
        }
        assert!(build_ledger(&o, EpsilonScale::from_exponent(4)).unwrap().is_empty());
    }

    #[test]
    fn planted_flip_found_at_column_and_row() {
        let s = space("1[0]");
        // flip at position 3 of x_17: column 5 relative to x_15, row 2
        let o = orbit_with(planted(&s, &sparse(), 25, 16, 3, 10), 10, &s);
        let recs = flip_scan(&o, 15, 10).unwrap();
        assert_eq!(recs, vec![FlipRecord { owner: 15, column: 5, row: 2, kind: FlipKind::Disagreement }]);
        assert!(flip_scan(&o, 26, 5).is_err());
        assert!(flip_scan(&o, 1, 11).is_err());
    }

    #[test]
    fn fast_scan_matches_definition() {
        let s = space("1[0]");
        let o = orbit_with(planted(&s, &sparse(), 30, 14, 5, 10), 10, &s);
        for k in 1..=30 {
            assert_eq!(flip_scan(&o, k, 10).unwrap(), slow_scan(&o, k, 10), "anchor {k}");
        }
        let wide = DeltaPseudoOrbit::unchecked(o.points().to_vec(), DeltaScale::from_exponent(40)).unwrap();
        for k in 1..=30 {
            assert_eq!(flip_scan(&wide, k, 40).unwrap(), slow_scan(&wide, k, 40), "anchor {k}");
        }
    }

    #[test]
    fn ledger_records_single_flip() {
        let s = space("1[0]");
        // flip at position 1 of x_19: column 1 + r relative to x_{19-r}, row r;
        // the earliest anchor with a column below 4 is x_17
        let o = orbit_with(planted(&s, &sparse(), 30, 18, 1, 10), 10, &s);
        let ledger = build_ledger(&o, EpsilonScale::from_exponent(4)).unwrap();
        assert_eq!(
            ledger.entries,
            vec![LedgerEntry { alpha: 17, j: 3, i: 2, beta: 20, kind: FlipKind::Disagreement }]
        );
    }

    #[test]
    fn star_diagonal_at_column_zero() {
        let s = space("1[0]");
        let pts = vec![s.critical_point().clone(), seq("1[0]"), seq("[0]")];
        let o = orbit_with(pts, 6, &s);
        let ledger = build_ledger(&o, EpsilonScale::from_exponent(3)).unwrap();
        assert_eq!(ledger.entries[0], LedgerEntry { alpha: 1, j: 0, i: 1, beta: 1, kind: FlipKind::StarDiagonal });
    }

    #[test]
    fn between_flips_families() {
        let s = space("1[0]");
        let o = orbit_with(planted(&s, &sparse(), 30, 15, 4, 10), 10, &s);
        // the planted point differs from sigma(x_15) at 4 and again from 12 on
        let cols: Vec<usize> = scan_columns(&o, 15, 16)
            .unwrap()
            .into_iter()
            .filter(|r| r.kind == FlipKind::Disagreement)
            .map(|r| r.column)
            .collect();
        assert_eq!(&cols[..2], &[5, 13]);
        for w in cols.windows(2) {
            let r = verify_between_flips(&o, 15, w[0], w[1]).unwrap();
            assert!(r.holds(), "{r:?}");
            assert_eq!(r.checked, (w[0] + 1, w[1] - w[0] - 1));
        }
        assert!(verify_between_flips(&o, 15, 0, 1).is_err());
        assert!(verify_between_flips(&o, 15, 5, 15).is_err());
    }

    #[test]
    fn periodic_bound_contracts() {
        let s = space("1[0]");
        let o = orbit_with(vec![seq("[0]")], 5, &s);
        assert!(verify_periodic_flip_bound(&o, &s, 1, 1).is_err());
        let p = space("[10*]");
        let o = orbit_with(vec![seq("[0]"), seq("[0]")], 5, &p);
        assert!(verify_periodic_flip_bound(&o, &p, 1, 1).is_err());
    }
}
