//! Internal chain transitivity at a fixed resolution, and omega-limit sets.
//!
//! Everything here is resolution-qualified: an edge `u -> v` means
//! `d(sigma(x_u), x_v) < eps`, and omega-limit checks look at a finite
//! stretch of the orbit.

use std::collections::VecDeque;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kneading::{parse_tau, tau_name};
use crate::pseudo_orbit::DeltaPseudoOrbit;
use crate::shadowing::{canonical_shadow, delta_for_epsilon, AssignmentPolicy};
use crate::symbolic::{
    agrees_at, is_admissible, primitive_root_len, DendriteSpace, EpsilonScale, FiniteWord, SymSeq, Symbol,
    VerificationRecord,
};

/// Depth used for admissibility certificates when none is given.
pub const DEFAULT_CERT_DEPTH: usize = 64;

#[derive(Debug, Clone)]
pub struct FinitePointSet {
    points: Vec<SymSeq>,
    certificates: Vec<VerificationRecord>,
}

impl FinitePointSet {
    /// Distinct points of `D_tau`, each checked for admissibility to `depth`.
    pub fn new(points: Vec<SymSeq>, space: &DendriteSpace, depth: usize) -> Result<FinitePointSet> {
        if points.is_empty() {
            return Err(Error::Contract("point set is empty".into()));
        }
        for (i, p) in points.iter().enumerate() {
            for (j, q) in points[..i].iter().enumerate() {
                if p.equals_to_depth(q, depth)? {
                    return Err(Error::Contract(format!("points {j} and {i} coincide")));
                }
            }
        }
        let mut certificates = Vec::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            let r = is_admissible(p, space, depth)?;
            if !r.verdict {
                return Err(Error::Contract(format!("point {i} ({p}) is not admissible: {r}")));
            }
            certificates.push(r);
        }
        Ok(FinitePointSet { points, certificates })
    }

    /// The orbit `{x, sigma x, ...}` of an eventually periodic point, from
    /// its periodic part on.
    pub fn cycle_of(x: &SymSeq, space: &DendriteSpace) -> Result<FinitePointSet> {
        let (pre, p) = x
            .exact_shape()
            .ok_or_else(|| Error::Contract("cycle_of needs an exact point".into()))?;
        let start = x.shift(pre)?;
        let points = (0..p).map(|i| start.shift(i)).collect::<Result<Vec<_>>>()?;
        FinitePointSet::new(points, space, DEFAULT_CERT_DEPTH.max(2 * (pre + p)))
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

    pub fn certificates(&self) -> &[VerificationRecord] {
        &self.certificates
    }

    /// Some point has no star anywhere.
    pub fn has_non_precritical(&self) -> Result<bool> {
        for p in &self.points {
            if !p.contains_star_within(DEFAULT_CERT_DEPTH)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Edges `u -> v` with `sigma(x_u)|N ≃ x_v|N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionGraph {
    pub succ: Vec<Vec<usize>>,
    pub depth: usize,
}

impl TransitionGraph {
    pub fn len(&self) -> usize {
        self.succ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.succ.is_empty()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.succ[u].binary_search(&v).is_ok()
    }

    /// Shortest path `from -> .. -> to` with at least one edge.
    pub fn path(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        let n = self.len();
        let mut parent = vec![usize::MAX; n];
        let mut queue = VecDeque::new();
        for &v in &self.succ[from] {
            if parent[v] == usize::MAX {
                parent[v] = from;
                queue.push_back(v);
            }
        }
        while let Some(u) = queue.pop_front() {
            if u == to {
                let mut path = vec![to];
                let mut cur = to;
                loop {
                    cur = parent[cur];
                    path.push(cur);
                    if cur == from && path.len() > 1 {
                        break;
                    }
                }
                path.reverse();
                return Some(path);
            }
            for &v in &self.succ[u] {
                if parent[v] == usize::MAX {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        None
    }

    fn reachable(&self, from: usize) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut queue: VecDeque<usize> = self.succ[from].iter().copied().collect();
        for &v in &self.succ[from] {
            seen[v] = true;
        }
        while let Some(u) = queue.pop_front() {
            for &v in &self.succ[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }
}

/// The edge set at depth `n` (use `eps.depth()` for an epsilon graph).
pub fn transition_graph_at(set: &FinitePointSet, n: usize, space: &DendriteSpace) -> Result<TransitionGraph> {
    let images = set.points.iter().map(|p| p.shift(1)).collect::<Result<Vec<_>>>()?;
    let succ = images
        .par_iter()
        .map(|img| {
            let mut out = Vec::new();
            for (v, q) in set.points.iter().enumerate() {
                if agrees_at(img, q, space.tau(), n)? {
                    out.push(v);
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TransitionGraph { succ, depth: n })
}

pub fn transition_graph(set: &FinitePointSet, eps: EpsilonScale, space: &DendriteSpace) -> Result<TransitionGraph> {
    transition_graph_at(set, eps.depth(), space)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IctVerdict {
    pub holds: bool,
    /// A pair with no chain from the first to the second.
    pub missing: Option<(usize, usize)>,
}

/// Every point reaches every point (itself included) by a chain of at
/// least one step.
pub fn is_ict_graph(graph: &TransitionGraph) -> IctVerdict {
    for u in 0..graph.len() {
        let seen = graph.reachable(u);
        if let Some(v) = seen.iter().position(|&s| !s) {
            return IctVerdict {
                holds: false,
                missing: Some((u, v)),
            };
        }
    }
    IctVerdict {
        holds: true,
        missing: None,
    }
}

pub fn is_ict(set: &FinitePointSet, eps: EpsilonScale, space: &DendriteSpace) -> Result<IctVerdict> {
    Ok(is_ict_graph(&transition_graph(set, eps, space)?))
}

pub const MAX_INCOMPRESSIBLE_SET: usize = 16;

/// Every nonempty proper subset `K` has a point within `eps` of the image of
/// a point outside `K`.
pub fn is_weakly_incompressible(set: &FinitePointSet, eps: EpsilonScale, space: &DendriteSpace) -> Result<bool> {
    let n = set.len();
    if n > MAX_INCOMPRESSIBLE_SET {
        return Err(Error::ScaleExceeded {
            what: "weak incompressibility set size",
            got: n,
            limit: MAX_INCOMPRESSIBLE_SET,
        });
    }
    let g = transition_graph(set, eps, space)?;
    // in_from[v]: sources of edges into v
    let mut in_from = vec![0u32; n];
    for (u, vs) in g.succ.iter().enumerate() {
        for &v in vs {
            in_from[v] |= 1 << u;
        }
    }
    let full: u32 = if n == 32 { u32::MAX } else { (1 << n) - 1 };
    Ok((1..full).all(|k| (0..n).any(|v| k & (1 << v) != 0 && in_from[v] & !k & full != 0)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OmegaSegment {
    /// Segment number `i >= 1`; shadowing accuracy `2^-i`.
    pub index: usize,
    /// `None` when the chain is a true orbit segment, which is a
    /// pseudo-orbit at every scale and needs no `delta_i`.
    pub n_delta: Option<usize>,
    /// Point indices of the chain, first and last included.
    pub path: Vec<usize>,
}

impl OmegaSegment {
    pub fn len(&self) -> usize {
        self.path.len()
    }

    pub fn is_empty(&self) -> bool {
        self.path.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OmegaBuildPlan {
    pub dense_cycle: Vec<usize>,
    pub segments: Vec<OmegaSegment>,
    /// `offsets[i - 1]`: where segment `i` starts in `z`.
    pub offsets: Vec<usize>,
    pub depth: usize,
}

/// Edges `u -> v` with `sigma(x_u) = x_v` exactly.
fn exact_graph(set: &FinitePointSet) -> Result<TransitionGraph> {
    let mut succ = Vec::with_capacity(set.len());
    for p in &set.points {
        let img = p.shift(1)?;
        succ.push(
            set.points
                .iter()
                .enumerate()
                .filter(|(_, q)| img.exact_eq(q) == Some(true))
                .map(|(v, _)| v)
                .collect(),
        );
    }
    Ok(TransitionGraph { succ, depth: usize::MAX })
}

/// Shortest chain `from -> to` with at least `min_len` points, padded with
/// loops at `to`.
fn padded_path(g: &TransitionGraph, from: usize, to: usize, min_len: usize) -> Option<Vec<usize>> {
    let mut path = g.path(from, to)?;
    while path.len() < min_len {
        let lp = g.path(to, to)?;
        path.extend_from_slice(&lp[1..]);
    }
    Some(path)
}

/// A point whose omega-limit set is `set`: chains between consecutive
/// points of a cyclic enumeration at ever finer scales, each replaced by a
/// canonical shadow with bits in its diamonds.
pub fn build_omega_point(
    set: &FinitePointSet,
    space: &DendriteSpace,
    depth: usize,
) -> Result<(SymSeq, OmegaBuildPlan)> {
    if depth == 0 {
        return Err(Error::Contract("omega point needs positive depth".into()));
    }
    if !set.has_non_precritical()? {
        return Err(Error::Contract("set has no non-precritical point".into()));
    }
    let s = set.len();
    let dense_cycle: Vec<usize> = (0..s).collect();
    let exact = exact_graph(set)?;
    let mut word = Vec::with_capacity(depth + 1);
    let mut segments = Vec::new();
    let mut offsets = Vec::new();
    let mut graph: Option<TransitionGraph> = None;
    let mut i = 1;
    while word.len() <= depth {
        let from = dense_cycle[(i - 1) % s];
        let to = dense_cycle[i % s];
        offsets.push(word.len());
        // n_i > N_{1/2^{i-1}} = i - 1
        if let Some(path) = padded_path(&exact, from, to, i) {
            let x = &set.points[from];
            word.extend(x.window(0, path.len() - 1)?);
            segments.push(OmegaSegment {
                index: i,
                n_delta: None,
                path,
            });
            i += 1;
            continue;
        }
        let eps = EpsilonScale::from_exponent(i);
        let scale = delta_for_epsilon(space, eps)?;
        let n_delta = scale.depth();
        if graph.as_ref().is_none_or(|g| g.depth != n_delta) {
            graph = Some(transition_graph_at(set, n_delta, space)?);
        }
        let g = graph.as_ref().expect("graph built above");
        let path = padded_path(g, from, to, i).ok_or(Error::NoChain { scale: i, from, to })?;
        let pts = path.iter().map(|&u| set.points[u].clone()).collect();
        let orbit = DeltaPseudoOrbit::validate(pts, scale, space)?;
        let head = canonical_shadow(&orbit, eps, space)?.binary_head(AssignmentPolicy::PreferOrbit);
        word.extend_from_slice(&head[..path.len() - 1]);
        segments.push(OmegaSegment {
            index: i,
            n_delta: Some(n_delta),
            path,
        });
        i += 1;
    }
    word.truncate(depth + 1);
    let z = SymSeq::from_finite(FiniteWord::new(word))?;
    Ok((
        z,
        OmegaBuildPlan {
            dense_cycle,
            segments,
            offsets,
            depth,
        },
    ))
}

fn admissible_point(x: &SymSeq, space: &DendriteSpace, depth: usize) -> Result<bool> {
    match is_admissible(x, space, depth) {
        Ok(r) => Ok(r.verdict && r.unresolved.is_none()),
        Err(Error::Inconsistent { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

/// The orbit of a random star-free admissible periodic point of primitive
/// period at most `max_period`.
pub fn random_admissible_cycle<R: Rng>(space: &DendriteSpace, max_period: usize, rng: &mut R) -> Result<FinitePointSet> {
    if max_period == 0 {
        return Err(Error::Contract("period bound must be positive".into()));
    }
    for _ in 0..10_000 {
        let p = rng.gen_range(1..=max_period);
        let w: Vec<Symbol> = (0..p).map(|_| Symbol::from_bit(rng.gen())).collect();
        if primitive_root_len(&w) != p {
            continue;
        }
        let x = SymSeq::exact(Vec::new(), w)?;
        if admissible_point(&x, space, DEFAULT_CERT_DEPTH)? {
            return FinitePointSet::cycle_of(&x, space);
        }
    }
    Err(Error::Insufficient("no admissible cycle found in 10000 draws".into()))
}

/// Segments `i` whose offset misses `d(sigma^{nu}(z), x_i) < 2^-i`.
pub fn check_offsets(z: &SymSeq, plan: &OmegaBuildPlan, set: &FinitePointSet, space: &DendriteSpace) -> Result<Vec<usize>> {
    let mut bad = Vec::new();
    for (seg, &nu) in plan.segments.iter().zip(&plan.offsets) {
        let n = seg.index;
        if nu + n > plan.depth {
            break;
        }
        let x = &set.points[seg.path[0]];
        if !agrees_at(&z.shift(nu)?, x, space.tau(), n)? {
            bad.push(n);
        }
    }
    Ok(bad)
}

#[derive(Debug, Clone)]
pub struct OmegaApproximation {
    pub set: FinitePointSet,
    /// Iterates assigned to each representative.
    pub visits: Vec<usize>,
}

/// Cluster `sigma^i(z)`, `burn_in <= i <= horizon`, greedily by agreement at
/// `N_eps`; the first iterate of each cluster represents it.
pub fn approximate_omega(
    z: &SymSeq,
    eps: EpsilonScale,
    space: &DendriteSpace,
    horizon: usize,
    burn_in: usize,
) -> Result<OmegaApproximation> {
    if horizon < burn_in {
        return Err(Error::Contract(format!("horizon {horizon} is before burn-in {burn_in}")));
    }
    let n = eps.depth();
    if let Some(d) = z.certified_depth() {
        if horizon + n > d {
            return Err(Error::DepthExceeded {
                index: horizon + n,
                certified: d,
            });
        }
    }
    let mut reps: Vec<SymSeq> = Vec::new();
    let mut visits: Vec<usize> = Vec::new();
    let mut zi = z.shift(burn_in)?;
    for i in burn_in..=horizon {
        if i > burn_in {
            zi = zi.shift(1)?;
        }
        let mut hit = None;
        for (c, r) in reps.iter().enumerate() {
            if agrees_at(&zi, r, space.tau(), n)? {
                hit = Some(c);
                break;
            }
        }
        match hit {
            Some(c) => visits[c] += 1,
            None => {
                reps.push(zi.clone());
                visits.push(1);
            }
        }
    }
    let mut certificates = Vec::with_capacity(reps.len());
    for r in &reps {
        certificates.push(is_admissible(r, space, n + DEFAULT_CERT_DEPTH)?);
    }
    Ok(OmegaApproximation {
        set: FinitePointSet {
            points: reps,
            certificates,
        },
        visits,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OmegaReport {
    pub n_eps: usize,
    pub burn_in: usize,
    pub horizon: usize,
    pub visits: Vec<usize>,
    /// Points visited fewer than `min_visits` times.
    pub under_visited: Vec<usize>,
    /// Iterates farther than `2 eps` from every point.
    pub strays: usize,
    pub first_stray: Option<usize>,
}

impl OmegaReport {
    pub fn holds(&self) -> bool {
        self.under_visited.is_empty() && self.strays == 0
    }
}

/// Both inclusions at resolution `eps`: every point is visited at least
/// `min_visits` times, and every iterate is within `2 eps` of the set.
pub fn verify_omega_equals(
    set: &FinitePointSet,
    z: &SymSeq,
    eps: EpsilonScale,
    space: &DendriteSpace,
    horizon: usize,
    burn_in: usize,
    min_visits: usize,
) -> Result<OmegaReport> {
    if horizon < burn_in {
        return Err(Error::Contract(format!("horizon {horizon} is before burn-in {burn_in}")));
    }
    let n = eps.depth();
    let coarse = n.saturating_sub(1);
    let mut visits = vec![0; set.len()];
    let mut strays = 0;
    let mut first_stray = None;
    let mut zi = z.shift(burn_in)?;
    for i in burn_in..=horizon {
        if i > burn_in {
            zi = zi.shift(1)?;
        }
        let mut near = false;
        for (c, b) in set.points.iter().enumerate() {
            if agrees_at(&zi, b, space.tau(), n)? {
                visits[c] += 1;
                near = true;
            } else if !near && agrees_at(&zi, b, space.tau(), coarse)? {
                near = true;
            }
        }
        if !near {
            strays += 1;
            first_stray.get_or_insert(i);
        }
    }
    let under_visited = (0..set.len()).filter(|&c| visits[c] < min_visits).collect();
    Ok(OmegaReport {
        n_eps: n,
        burn_in,
        horizon,
        visits,
        under_visited,
        strays,
        first_stray,
    })
}

/// `tau: <literal>` then one point per line.
pub fn write_set(set: &FinitePointSet, tau: &SymSeq) -> Result<String> {
    let mut out = format!("tau: {}\n", tau_name(tau)?);
    for (i, p) in set.points.iter().enumerate() {
        let lit = p
            .literal()
            .ok_or_else(|| Error::Contract(format!("point {i} has no literal form")))?;
        out.push_str(&lit);
        out.push('\n');
    }
    Ok(out)
}

/// The `tau` header and the point literals, unchecked.
pub fn parse_set(text: &str) -> Result<(SymSeq, Vec<SymSeq>)> {
    let mut lines = text.lines().enumerate();
    let (_, first) = lines.next().ok_or_else(|| Error::Format {
        line: 1,
        reason: "empty set file".into(),
    })?;
    let tau_text = first
        .strip_prefix("tau:")
        .ok_or_else(|| Error::Format {
            line: 1,
            reason: "expected `tau:` header".into(),
        })?;
    let tau = parse_tau(tau_text)?;
    let mut points = Vec::new();
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        points.push(SymSeq::parse(line).map_err(|e| Error::Format {
            line: i + 1,
            reason: e.to_string(),
        })?);
    }
    Ok((tau, points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kneading::period_doubling;
    use crate::symbolic::seq;
    use rand::SeedableRng;

    fn space(lit: &str) -> DendriteSpace {
        DendriteSpace::new(seq(lit), 64).unwrap()
    }

    fn set(s: &DendriteSpace, lits: &[&str]) -> FinitePointSet {
        FinitePointSet::new(lits.iter().map(|l| seq(l)).collect(), s, 64).unwrap()
    }

    const E4: fn() -> EpsilonScale = || EpsilonScale::from_exponent(4);

    #[test]
    fn cycle_edges_and_self_loop() {
        let s = space("1[0]");
        let c = set(&s, &["[011]", "[110]", "[101]"]);
        let g = transition_graph(&c, E4(), &s).unwrap();
        assert!(g.has_edge(0, 1) && g.has_edge(1, 2) && g.has_edge(2, 0));
        let f = set(&s, &["[1]"]);
        assert!(transition_graph(&f, E4(), &s).unwrap().has_edge(0, 0));
        assert!(is_ict(&f, E4(), &s).unwrap().holds);
        assert!(is_ict(&c, E4(), &s).unwrap().holds);
    }

    #[test]
    fn two_fixed_points_are_not_ict() {
        let s = space("1[0]");
        let b = set(&s, &["[0]", "[1]"]);
        let g = transition_graph(&b, E4(), &s).unwrap();
        assert!(!g.has_edge(0, 1) && !g.has_edge(1, 0));
        let v = is_ict(&b, E4(), &s).unwrap();
        assert!(!v.holds);
        assert_eq!(v.missing, Some((0, 1)));
        assert!(!is_weakly_incompressible(&b, E4(), &s).unwrap());
    }

    #[test]
    fn cycle_plus_unreachable_point() {
        let s = space("1[0]");
        let b = set(&s, &["[011]", "[110]", "[101]", "[0]"]);
        assert!(!is_ict(&b, E4(), &s).unwrap().holds);
        assert!(!is_weakly_incompressible(&b, E4(), &s).unwrap());
    }

    #[test]
    fn incompressible_cycles() {
        let s = space("1[0]");
        assert!(is_weakly_incompressible(&set(&s, &["[1]"]), E4(), &s).unwrap());
        assert!(is_weakly_incompressible(&set(&s, &["[011]", "[110]", "[101]"]), E4(), &s).unwrap());
    }

    #[test]
    fn duplicate_points_rejected() {
        let s = space("1[0]");
        assert!(FinitePointSet::new(vec![seq("[01]"), seq("0[10]")], &s, 64).is_err());
    }

    fn pd() -> DendriteSpace {
        DendriteSpace::new(period_doubling(1 << 14), 4096).unwrap()
    }

    fn cycles(s: &DendriteSpace, count: u64) -> Vec<FinitePointSet> {
        (0..count)
            .map(|seed| {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                random_admissible_cycle(s, 8, &mut rng).unwrap()
            })
            .collect()
    }

    #[test]
    fn random_cycles_are_ict_and_incompressible() {
        for s in [space("[10*]"), space("1[0]"), pd()] {
            let lit = tau_name(s.tau()).unwrap();
            for b in cycles(&s, 10) {
                assert!(b.len() <= 8);
                for n in [2, 4, 40] {
                    let eps = EpsilonScale::from_exponent(n);
                    assert!(is_ict(&b, eps, &s).unwrap().holds, "{lit} {:?}", b.points());
                    assert!(is_weakly_incompressible(&b, eps, &s).unwrap());
                }
            }
        }
    }

    #[test]
    fn omega_point_of_a_cycle() {
        let s = space("1[0]");
        let b = set(&s, &["[011]", "[110]", "[101]"]);
        let (z, plan) = build_omega_point(&b, &s, 2000).unwrap();
        assert!(!z.contains_star_within(2000).unwrap());
        assert!(plan.segments.iter().all(|g| g.n_delta.is_none()));
        assert!(check_offsets(&z, &plan, &b, &s).unwrap().is_empty());
        let r = verify_omega_equals(&b, &z, E4(), &s, 1900, 200, 10).unwrap();
        assert!(r.holds(), "{r:?}");
    }

    #[test]
    fn omega_points_of_random_cycles() {
        for s in [space("[10*]"), pd()] {
            for b in cycles(&s, 4) {
                let (z, plan) = build_omega_point(&b, &s, 3000).unwrap();
                assert!(!z.contains_star_within(3000).unwrap());
                assert!(check_offsets(&z, &plan, &b, &s).unwrap().is_empty());
                let r = verify_omega_equals(&b, &z, E4(), &s, 2900, 300, 10).unwrap();
                assert!(r.holds(), "{r:?}");
                let adm = is_admissible(&z, &s, 2000).unwrap();
                assert!(adm.verdict, "{adm}");
            }
        }
    }

    #[test]
    fn coarse_chains_use_delta_segments() {
        let s = space("1[0]");
        let far = format!("{}[1]", "0".repeat(40));
        let b = set(&s, &["[0]", &far]);
        let (_, plan) = build_omega_point(&b, &s, 2).unwrap();
        assert!(plan.segments.iter().all(|g| g.n_delta.is_some()));
        match build_omega_point(&b, &s, 1000) {
            Err(Error::NoChain { scale, .. }) => assert!(scale > 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn omega_point_needs_chains() {
        let s = space("1[0]");
        let b = set(&s, &["[0]", "[1]"]);
        assert!(matches!(build_omega_point(&b, &s, 100), Err(Error::NoChain { .. })));
        assert!(build_omega_point(&b, &s, 0).is_err());
    }

    #[test]
    fn approximation_of_eventually_periodic_point() {
        let s = space("1[0]");
        let z = seq("0110[011]");
        let a = approximate_omega(&z, E4(), &s, 500, 20).unwrap();
        assert_eq!(a.set.len(), 3);
        assert!(is_ict(&a.set, EpsilonScale::from_exponent(3), &s).unwrap().holds);
        let r = verify_omega_equals(&a.set, &z, E4(), &s, 500, 20, 10).unwrap();
        assert!(r.holds());
        assert!(approximate_omega(&z, E4(), &s, 10, 20).is_err());
    }

    #[test]
    fn critical_cycle_approximation() {
        let s = space("[10*]");
        let a = approximate_omega(s.critical_point(), E4(), &s, 300, 10).unwrap();
        assert_eq!(a.set.len(), 3);
    }

    #[test]
    fn unrelated_point_misses_the_set() {
        let s = space("1[0]");
        let b = set(&s, &["[011]", "[110]", "[101]"]);
        let r = verify_omega_equals(&b, &seq("[1]"), E4(), &s, 300, 10, 10).unwrap();
        assert!(!r.holds());
        assert_eq!(r.under_visited, vec![0, 1, 2]);
    }

    #[test]
    fn set_file_round_trip() {
        let s = space("[10*]");
        let b = cycles(&s, 1).remove(0);
        let text = write_set(&b, s.tau()).unwrap();
        let (tau, pts) = parse_set(&text).unwrap();
        assert_eq!(tau.exact_eq(s.tau()), Some(true));
        let b2 = FinitePointSet::new(pts, &s, 64).unwrap();
        assert_eq!(write_set(&b2, &tau).unwrap(), text);
    }
}
