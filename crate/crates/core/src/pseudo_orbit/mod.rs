//! Finite delta pseudo-orbits in `D_tau` and the array `x^k_j` they span.
//!
//! Points are numbered from 1. Past the last point `x_L` the array is
//! continued by the true orbit, `x_{L+q} = sigma^q(x_L)`, which adds no flips.

mod flips;
mod generate;
mod io;

use std::collections::VecDeque;

pub use flips::*;
pub use generate::*;
pub use io::*;

use crate::error::{Error, Result};
use crate::symbolic::{agrees_at, DendriteSpace, EpsilonScale, SymSeq, Symbol};

/// `delta` with its depth `N_delta = floor(log2(1 / delta))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaScale(EpsilonScale);

impl DeltaScale {
    pub fn new(delta: f64) -> Result<DeltaScale> {
        EpsilonScale::new(delta).map(DeltaScale)
    }

    pub fn from_exponent(n: usize) -> DeltaScale {
        DeltaScale(EpsilonScale::from_exponent(n))
    }

    pub fn delta(&self) -> f64 {
        self.0.epsilon()
    }

    pub fn depth(&self) -> usize {
        self.0.depth()
    }

    pub fn as_epsilon(&self) -> EpsilonScale {
        self.0
    }
}

#[derive(Debug, Clone)]
pub struct DeltaPseudoOrbit {
    points: Vec<SymSeq>,
    scale: DeltaScale,
    validated: bool,
}

/// First `i` (1-based) with `sigma(x_i)|N` not `≃` `x_{i+1}|N`.
pub fn first_violation(points: &[SymSeq], scale: DeltaScale, space: &DendriteSpace) -> Result<Option<usize>> {
    let n = scale.depth();
    for (i, pair) in points.windows(2).enumerate() {
        if !agrees_at(&pair[0].shift(1)?, &pair[1], space.tau(), n)? {
            return Ok(Some(i + 1));
        }
    }
    Ok(None)
}

impl DeltaPseudoOrbit {
    /// Checks every consecutive pair at `N_delta`.
    pub fn validate(points: Vec<SymSeq>, scale: DeltaScale, space: &DendriteSpace) -> Result<DeltaPseudoOrbit> {
        if points.is_empty() {
            return Err(Error::Contract("pseudo-orbit needs at least one point".into()));
        }
        if let Some(index) = first_violation(&points, scale, space)? {
            return Err(Error::OrbitViolation { index });
        }
        Ok(DeltaPseudoOrbit {
            points,
            scale,
            validated: true,
        })
    }

    /// Wrap points without checking them.
    pub fn unchecked(points: Vec<SymSeq>, scale: DeltaScale) -> Result<DeltaPseudoOrbit> {
        if points.is_empty() {
            return Err(Error::Contract("pseudo-orbit needs at least one point".into()));
        }
        Ok(DeltaPseudoOrbit {
            points,
            scale,
            validated: false,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[SymSeq] {
        &self.points
    }

    pub fn scale(&self) -> DeltaScale {
        self.scale
    }

    pub fn is_validated(&self) -> bool {
        self.validated
    }

    /// `x_k` for `1 <= k <= len`.
    pub fn point(&self, k: usize) -> Result<&SymSeq> {
        if k == 0 || k > self.points.len() {
            return Err(Error::Contract(format!(
                "point index {k} outside 1..={}",
                self.points.len()
            )));
        }
        Ok(&self.points[k - 1])
    }

    /// `x_k` for any `k >= 1`, continuing past the end by the true orbit.
    pub fn extended(&self, k: usize) -> Result<SymSeq> {
        let len = self.points.len();
        if k == 0 {
            return Err(Error::Contract("points are numbered from 1".into()));
        }
        if k <= len {
            Ok(self.points[k - 1].clone())
        } else {
            self.points[len - 1].shift(k - len)
        }
    }

    /// `x^k_j`.
    #[inline]
    pub fn entry(&self, k: usize, j: usize) -> Result<Symbol> {
        let len = self.points.len();
        if k == 0 {
            return Err(Error::Contract("points are numbered from 1".into()));
        }
        if k <= len {
            self.points[k - 1].symbol(j)
        } else {
            self.points[len - 1].symbol(j + k - len)
        }
    }
}

/// Consumes points one at a time, validating each step and keeping only a
/// bounded look-back window; emits ledger entries as soon as they are final.
pub struct OrbitStream<'a> {
    space: &'a DendriteSpace,
    scale: DeltaScale,
    eps: EpsilonScale,
    window: VecDeque<SymSeq>,
    /// 1-based index of `window[0]`.
    base: usize,
    next_alpha: usize,
    entries: Vec<LedgerEntry>,
}

impl<'a> OrbitStream<'a> {
    pub fn new(space: &'a DendriteSpace, scale: DeltaScale, eps: EpsilonScale) -> OrbitStream<'a> {
        OrbitStream {
            space,
            scale,
            eps,
            window: VecDeque::new(),
            base: 1,
            next_alpha: 1,
            entries: Vec::new(),
        }
    }

    /// Number of points pushed so far.
    pub fn pushed(&self) -> usize {
        self.base + self.window.len() - 1
    }

    /// Largest number of points held at once: `N_delta + 1`.
    pub fn capacity(&self) -> usize {
        self.scale.depth() + 1
    }

    pub fn push(&mut self, point: SymSeq) -> Result<()> {
        if let Some(last) = self.window.back() {
            if !agrees_at(&last.shift(1)?, &point, self.space.tau(), self.scale.depth())? {
                return Err(Error::OrbitViolation { index: self.pushed() });
            }
        }
        self.window.push_back(point);
        // An anchor needs rows up to N_eps - 1 beyond it.
        let need = self.eps.depth();
        while self.next_alpha + need <= self.pushed() {
            self.settle()?;
        }
        // Rows only reach forward from an unsettled anchor.
        while self.window.len() > 1 && self.base < self.next_alpha {
            self.window.pop_front();
            self.base += 1;
        }
        if self.window.len() > self.capacity() {
            return Err(Error::Contract(format!(
                "stream window exceeds {} points; N_eps must not exceed N_delta",
                self.capacity()
            )));
        }
        Ok(())
    }

    fn settle(&mut self) -> Result<()> {
        let alpha = self.next_alpha;
        let found = ledger_entry_at(&WindowView { stream: self }, alpha, self.eps.depth())?;
        match found {
            Some(e) => {
                self.next_alpha = e.beta + 1;
                self.entries.push(e);
            }
            None => self.next_alpha += 1,
        }
        Ok(())
    }

    /// Finish: settle the remaining anchors against the true-orbit tail.
    pub fn finish(mut self) -> Result<FlipLedger> {
        while self.next_alpha <= self.pushed() {
            self.settle()?;
        }
        Ok(FlipLedger {
            entries: self.entries,
            horizon: self.eps.depth(),
        })
    }
}

/// Array access over the stream window.
pub(crate) struct WindowView<'a> {
    stream: &'a OrbitStream<'a>,
}

pub(crate) trait ArrayAccess {
    fn entry(&self, k: usize, j: usize) -> Result<Symbol>;
}

impl ArrayAccess for DeltaPseudoOrbit {
    fn entry(&self, k: usize, j: usize) -> Result<Symbol> {
        DeltaPseudoOrbit::entry(self, k, j)
    }
}

impl ArrayAccess for WindowView<'_> {
    fn entry(&self, k: usize, j: usize) -> Result<Symbol> {
        let s = self.stream;
        if k < s.base {
            return Err(Error::Contract(format!("point {k} has left the stream window")));
        }
        let last = s.pushed();
        if k <= last {
            s.window[k - s.base].symbol(j)
        } else {
            s.window[last - s.base].symbol(j + k - last)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::seq;

    fn space(lit: &str) -> DendriteSpace {
        DendriteSpace::new(seq(lit), 40).unwrap()
    }

    fn true_orbit(x: &SymSeq, len: usize) -> Vec<SymSeq> {
        (0..len).map(|i| x.shift(i).unwrap()).collect()
    }

    #[test]
    fn true_orbits_validate() {
        let s = space("1[0]");
        let pts = true_orbit(&seq("0110[1]"), 30);
        let o = DeltaPseudoOrbit::validate(pts, DeltaScale::from_exponent(12), &s).unwrap();
        assert!(o.is_validated());
        assert_eq!(o.len(), 30);
    }

    #[test]
    fn violation_reported_with_index() {
        let s = space("1[0]");
        let mut pts = true_orbit(&seq("[011]"), 6);
        // differs from sigma(x_5) at index 1; the best witness dies at depth 3
        pts[5] = pts[5].with_symbol(1, pts[5].symbol(1).unwrap().flipped()).unwrap();
        assert!(matches!(
            DeltaPseudoOrbit::validate(pts.clone(), DeltaScale::from_exponent(4), &s),
            Err(Error::OrbitViolation { index: 5 })
        ));
        // a difference in the last place is always witnessed
        assert!(DeltaPseudoOrbit::validate(pts, DeltaScale::from_exponent(2), &s).is_ok());
    }

    #[test]
    fn empty_orbit_rejected() {
        let s = space("1[0]");
        assert!(DeltaPseudoOrbit::validate(vec![], DeltaScale::from_exponent(3), &s).is_err());
    }

    #[test]
    fn extension_follows_true_orbit() {
        let pts = vec![seq("01[1]"), seq("1[1]")];
        let o = DeltaPseudoOrbit::unchecked(pts, DeltaScale::from_exponent(2)).unwrap();
        assert_eq!(o.entry(3, 0).unwrap(), Symbol::One);
        assert_eq!(o.entry(1, 0).unwrap(), Symbol::Zero);
        assert!(o.point(3).is_err());
        assert!(o.entry(0, 0).is_err());
    }

    #[test]
    fn delta_scale_mapping() {
        assert_eq!(DeltaScale::new(0.001).unwrap().depth(), 9);
        assert_eq!(DeltaScale::from_exponent(33).depth(), 33);
    }
}
