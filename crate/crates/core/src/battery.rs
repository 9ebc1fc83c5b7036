//! The acceptance battery: every criterion as a seeded, configurable run
//! with pass counts and failure witnesses.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ict_omega::{approximate_omega, build_omega_point, is_ict, random_admissible_cycle, verify_omega_equals};
use crate::julia_bridge::{crosscheck, extract_kneading, misiurewicz_detect, ComplexParam, Misiurewicz, PartitionSpec};
use crate::kneading::{parse_tau, tau_name, word_overlap_root, KneadingClass};
use crate::pseudo_orbit::{
    flip_scan, random_admissible_point, random_pseudo_orbit_with, verify_between_flips, verify_periodic_flip_bound,
    ColumnChoice, DeltaPseudoOrbit, DeltaScale, FlipKind,
};
use crate::shadowing::{assign_shadow, canonical_shadow, check_pseudo_agreement, delta_for_epsilon, AssignmentPolicy};
use crate::symbolic::{
    enumerate_precritical_truncations, is_admissible, is_lambda_acceptable, match_approx, proximity, simeq,
    DendriteSpace, EpsilonScale, FiniteWord, Proximity, SymSeq, Symbol,
};

/// How `delta` is chosen for the shadowing runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeltaMode {
    /// `delta_eps` from the shadowing bound.
    #[default]
    Bound,
    /// `delta = eps`, too coarse on purpose.
    Eps,
}

impl FromStr for DeltaMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "bound" => Ok(DeltaMode::Bound),
            "eps" => Ok(DeltaMode::Eps),
            _ => Err(format!("unknown delta mode {s:?} (bound, eps)")),
        }
    }
}

impl fmt::Display for DeltaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DeltaMode::Bound => "bound",
            DeltaMode::Eps => "eps",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatteryConfig {
    pub taus: Vec<String>,
    pub space_depth: usize,
    pub seed: u64,
    pub eps_exps: Vec<usize>,
    pub orbits: usize,
    pub orbit_length: usize,
    pub flip_rate: f64,
    pub column_choice: ColumnChoice,
    pub delta: DeltaMode,
    pub policies: Vec<AssignmentPolicy>,
    pub simeq_max_len: usize,
    pub lambda_max_period: usize,
    pub lambda_horizon: usize,
    /// Periodic kneading sequences checked for the flip bound besides the
    /// periodic members of `taus`.
    pub flip_extra_taus: Vec<String>,
    pub omega_sets: usize,
    pub omega_max_period: usize,
    pub omega_eps_exp: usize,
    pub omega_depth: usize,
    pub omega_burn_in: usize,
    pub omega_min_visits: usize,
    pub sarkovskii_points: usize,
    pub sarkovskii_eps_exp: usize,
    pub sarkovskii_horizon: usize,
    pub sarkovskii_burn_in: usize,
    pub sarkovskii_pass_rate: f64,
    pub root_max_len: usize,
    pub julia_samples: usize,
    pub julia_depth: usize,
    pub proximity_pairs: usize,
    pub proximity_cap: usize,
    pub monotone_len: usize,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        BatteryConfig {
            taus: vec!["[10*]".into(), "1[0]".into(), "pd".into()],
            space_depth: 20_000,
            seed: 0,
            eps_exps: vec![3, 4, 5],
            orbits: 100,
            orbit_length: 200,
            flip_rate: 0.5,
            column_choice: ColumnChoice::Uniform,
            delta: DeltaMode::Bound,
            policies: vec![
                AssignmentPolicy::AllZero,
                AssignmentPolicy::AllOne,
                AssignmentPolicy::Random { seed: 0 },
            ],
            simeq_max_len: 8,
            lambda_max_period: 5,
            lambda_horizon: 50,
            flip_extra_taus: vec!["[110*]".into()],
            omega_sets: 20,
            omega_max_period: 8,
            omega_eps_exp: 4,
            omega_depth: 10_000,
            omega_burn_in: 1_000,
            omega_min_visits: 10,
            sarkovskii_points: 50,
            sarkovskii_eps_exp: 4,
            sarkovskii_horizon: 10_000,
            sarkovskii_burn_in: 1_000,
            sarkovskii_pass_rate: 0.95,
            root_max_len: 12,
            julia_samples: 200,
            julia_depth: 15,
            proximity_pairs: 100_000,
            proximity_cap: 64,
            monotone_len: 8,
        }
    }
}

fn list<T: FromStr>(v: &str) -> std::result::Result<Vec<T>, String>
where
    T::Err: fmt::Display,
{
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| format!("{s:?}: {e}")))
        .collect()
}

fn one<T: FromStr>(v: &str) -> std::result::Result<T, String>
where
    T::Err: fmt::Display,
{
    v.parse::<T>().map_err(|e| format!("{v:?}: {e}"))
}

fn choice_name(c: ColumnChoice) -> &'static str {
    match c {
        ColumnChoice::Uniform => "uniform",
        ColumnChoice::LowBiased => "low-biased",
    }
}

fn join<T: fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(", ")
}

impl BatteryConfig {
    /// `key: value` lines; `#` starts a comment. Unset keys keep defaults.
    pub fn parse(text: &str) -> Result<BatteryConfig> {
        let mut c = BatteryConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fail = |reason: String| Error::Format { line: i + 1, reason };
            let (key, v) = line
                .split_once(':')
                .ok_or_else(|| fail(format!("expected `key: value`, got {line:?}")))?;
            let v = v.trim();
            let r: std::result::Result<(), String> = (|| {
                match key.trim() {
                    "taus" => c.taus = list(v)?,
                    "space_depth" => c.space_depth = one(v)?,
                    "seed" => c.seed = one(v)?,
                    "eps_exps" => c.eps_exps = list(v)?,
                    "orbits" => c.orbits = one(v)?,
                    "orbit_length" => c.orbit_length = one(v)?,
                    "flip_rate" => c.flip_rate = one(v)?,
                    "column_choice" => {
                        c.column_choice = match v {
                            "uniform" => ColumnChoice::Uniform,
                            "low-biased" => ColumnChoice::LowBiased,
                            _ => return Err(format!("unknown column choice {v:?}")),
                        }
                    }
                    "delta" => c.delta = one(v)?,
                    "policies" => c.policies = list(v)?,
                    "simeq_max_len" => c.simeq_max_len = one(v)?,
                    "lambda_max_period" => c.lambda_max_period = one(v)?,
                    "lambda_horizon" => c.lambda_horizon = one(v)?,
                    "flip_extra_taus" => c.flip_extra_taus = list(v)?,
                    "omega_sets" => c.omega_sets = one(v)?,
                    "omega_max_period" => c.omega_max_period = one(v)?,
                    "omega_eps_exp" => c.omega_eps_exp = one(v)?,
                    "omega_depth" => c.omega_depth = one(v)?,
                    "omega_burn_in" => c.omega_burn_in = one(v)?,
                    "omega_min_visits" => c.omega_min_visits = one(v)?,
                    "sarkovskii_points" => c.sarkovskii_points = one(v)?,
                    "sarkovskii_eps_exp" => c.sarkovskii_eps_exp = one(v)?,
                    "sarkovskii_horizon" => c.sarkovskii_horizon = one(v)?,
                    "sarkovskii_burn_in" => c.sarkovskii_burn_in = one(v)?,
                    "sarkovskii_pass_rate" => c.sarkovskii_pass_rate = one(v)?,
                    "root_max_len" => c.root_max_len = one(v)?,
                    "julia_samples" => c.julia_samples = one(v)?,
                    "julia_depth" => c.julia_depth = one(v)?,
                    "proximity_pairs" => c.proximity_pairs = one(v)?,
                    "proximity_cap" => c.proximity_cap = one(v)?,
                    "monotone_len" => c.monotone_len = one(v)?,
                    k => return Err(format!("unknown key {k:?}")),
                }
                Ok(())
            })();
            r.map_err(fail)?;
        }
        if c.taus.is_empty() || c.eps_exps.is_empty() || c.policies.is_empty() {
            return Err(Error::Format {
                line: 0,
                reason: "taus, eps_exps and policies must be non-empty".into(),
            });
        }
        if c.eps_exps.contains(&0) {
            return Err(Error::Format {
                line: 0,
                reason: "eps exponents must be positive".into(),
            });
        }
        Ok(c)
    }

    /// The config in the form `parse` reads.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| out.push_str(&format!("{k}: {v}\n"));
        kv("taus", self.taus.join(", "));
        kv("space_depth", self.space_depth.to_string());
        kv("seed", self.seed.to_string());
        kv("eps_exps", join(&self.eps_exps));
        kv("orbits", self.orbits.to_string());
        kv("orbit_length", self.orbit_length.to_string());
        kv("flip_rate", self.flip_rate.to_string());
        kv("column_choice", choice_name(self.column_choice).into());
        kv("delta", self.delta.to_string());
        kv("policies", join(&self.policies));
        kv("simeq_max_len", self.simeq_max_len.to_string());
        kv("lambda_max_period", self.lambda_max_period.to_string());
        kv("lambda_horizon", self.lambda_horizon.to_string());
        kv("flip_extra_taus", self.flip_extra_taus.join(", "));
        kv("omega_sets", self.omega_sets.to_string());
        kv("omega_max_period", self.omega_max_period.to_string());
        kv("omega_eps_exp", self.omega_eps_exp.to_string());
        kv("omega_depth", self.omega_depth.to_string());
        kv("omega_burn_in", self.omega_burn_in.to_string());
        kv("omega_min_visits", self.omega_min_visits.to_string());
        kv("sarkovskii_points", self.sarkovskii_points.to_string());
        kv("sarkovskii_eps_exp", self.sarkovskii_eps_exp.to_string());
        kv("sarkovskii_horizon", self.sarkovskii_horizon.to_string());
        kv("sarkovskii_burn_in", self.sarkovskii_burn_in.to_string());
        kv("sarkovskii_pass_rate", self.sarkovskii_pass_rate.to_string());
        kv("root_max_len", self.root_max_len.to_string());
        kv("julia_samples", self.julia_samples.to_string());
        kv("julia_depth", self.julia_depth.to_string());
        kv("proximity_pairs", self.proximity_pairs.to_string());
        kv("proximity_cap", self.proximity_cap.to_string());
        kv("monotone_len", self.monotone_len.to_string());
        out
    }
}

/// Keep reports short: at most this many witnesses per criterion.
pub const MAX_WITNESSES: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: usize,
    pub total: usize,
    /// Fraction of `total` that must pass.
    pub required: f64,
    pub witnesses: Vec<String>,
    /// Extra counts worth reporting.
    pub notes: Vec<String>,
}

impl CriterionOutcome {
    fn new(id: u8, name: &'static str, required: f64) -> Self {
        CriterionOutcome {
            id,
            name,
            passed: 0,
            total: 0,
            required,
            witnesses: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn record(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.total += 1;
        if ok {
            self.passed += 1;
        } else if self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(witness());
        }
    }

    fn absorb(&mut self, results: Vec<(bool, String)>) {
        for (ok, w) in results {
            self.record(ok, || w);
        }
    }

    pub fn holds(&self) -> bool {
        self.total > 0 && self.passed as f64 >= self.required * self.total as f64
    }

    pub fn failed(&self) -> usize {
        self.total - self.passed
    }
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {} ({}): {} {}/{}",
            self.id,
            self.name,
            if self.holds() { "pass" } else { "FAIL" },
            self.passed,
            self.total
        )
    }
}

pub const CRITERIA: [(u8, &str); 10] = [
    (1, "shadowing"),
    (2, "simeq oracle"),
    (3, "acceptability oracle"),
    (4, "pseudo-agreement"),
    (5, "flip bounds"),
    (6, "ict to omega"),
    (7, "omega to ict"),
    (8, "word root"),
    (9, "julia bridge"),
    (10, "proximity"),
];

/// One pseudo-orbit of the shadowing family.
#[derive(Debug, Clone)]
pub struct OrbitRun {
    pub tau: usize,
    pub eps_exp: usize,
    pub seed: u64,
    pub orbit: std::result::Result<DeltaPseudoOrbit, Error>,
}

impl OrbitRun {
    fn label(&self, b: &Battery) -> String {
        format!("tau={} e={} seed={}", b.cfg.taus[self.tau], self.eps_exp, self.seed)
    }
}

pub struct Battery {
    pub cfg: BatteryConfig,
    spaces: Vec<DendriteSpace>,
    orbits: OnceLock<Vec<OrbitRun>>,
}

fn build_space(lit: &str, depth: usize) -> Result<DendriteSpace> {
    DendriteSpace::new(parse_tau(lit)?, depth)
}

impl Battery {
    pub fn new(cfg: BatteryConfig) -> Result<Battery> {
        let spaces = cfg
            .taus
            .iter()
            .map(|t| build_space(t, cfg.space_depth))
            .collect::<Result<Vec<_>>>()?;
        Ok(Battery {
            cfg,
            spaces,
            orbits: OnceLock::new(),
        })
    }

    pub fn spaces(&self) -> &[DendriteSpace] {
        &self.spaces
    }

    fn scale(&self, space: &DendriteSpace, eps: EpsilonScale) -> Result<DeltaScale> {
        match self.cfg.delta {
            DeltaMode::Bound => delta_for_epsilon(space, eps),
            DeltaMode::Eps => Ok(DeltaScale::from_exponent(eps.depth())),
        }
    }

    /// The shadowing family, generated once.
    pub fn orbits(&self) -> &[OrbitRun] {
        self.orbits.get_or_init(|| {
            let mut jobs = Vec::new();
            for t in 0..self.spaces.len() {
                for &e in &self.cfg.eps_exps {
                    for i in 0..self.cfg.orbits {
                        jobs.push((t, e, self.cfg.seed + i as u64));
                    }
                }
            }
            jobs.into_par_iter()
                .map(|(t, e, seed)| {
                    let space = &self.spaces[t];
                    let orbit = self.scale(space, EpsilonScale::from_exponent(e)).and_then(|scale| {
                        random_pseudo_orbit_with(
                            space,
                            scale,
                            self.cfg.orbit_length,
                            seed,
                            self.cfg.flip_rate,
                            self.cfg.column_choice,
                        )
                    });
                    OrbitRun {
                        tau: t,
                        eps_exp: e,
                        seed,
                        orbit,
                    }
                })
                .collect()
        })
    }

    pub fn run(&self, id: u8) -> Result<CriterionOutcome> {
        match id {
            1 => Ok(self.shadowing()),
            2 => self.simeq_oracle(),
            3 => self.acceptability_oracle(),
            4 => Ok(self.pseudo_agreement()),
            5 => self.flip_bounds(),
            6 => Ok(self.ict_to_omega()),
            7 => Ok(self.omega_to_ict()),
            8 => self.word_root(),
            9 => self.julia(),
            10 => self.proximity_contracts(),
            _ => Err(Error::Contract(format!("no criterion {id}"))),
        }
    }

    pub fn run_all(&self) -> Result<Vec<CriterionOutcome>> {
        CRITERIA.iter().map(|&(id, _)| self.run(id)).collect()
    }

    fn shadowing(&self) -> CriterionOutcome {
        let mut out = CriterionOutcome::new(1, "shadowing", 1.0);
        let results: Vec<Vec<(bool, String)>> = self
            .orbits()
            .par_iter()
            .map(|run| {
                let space = &self.spaces[run.tau];
                let eps = EpsilonScale::from_exponent(run.eps_exp);
                let fail_all = |e: &Error| {
                    self.cfg
                        .policies
                        .iter()
                        .map(|p| (false, format!("{} {p}: {e}", run.label(self))))
                        .collect()
                };
                let orbit = match &run.orbit {
                    Ok(o) => o,
                    Err(e) => return fail_all(e),
                };
                let shadow = match canonical_shadow(orbit, eps, space) {
                    Ok(s) => s,
                    Err(e) => return fail_all(&e),
                };
                let depth = orbit.len() + eps.depth() + 1;
                self.cfg
                    .policies
                    .iter()
                    .map(|&policy| {
                        let policy = match policy {
                            AssignmentPolicy::Random { seed } => AssignmentPolicy::Random { seed: seed ^ run.seed },
                            p => p,
                        };
                        let r = assign_shadow(&shadow, policy, space, depth).and_then(|a| {
                            let v = crate::shadowing::verify_shadowing(orbit, &a.z, eps, space)?;
                            Ok((v, a.admissibility.verdict))
                        });
                        match r {
                            Ok((v, adm)) if v.verified() && adm => (true, String::new()),
                            Ok((v, adm)) => (
                                false,
                                format!(
                                    "{} {policy}: first failure {:?}, admissible {adm}",
                                    run.label(self),
                                    v.first_failure
                                ),
                            ),
                            Err(e) => (false, format!("{} {policy}: {e}", run.label(self))),
                        }
                    })
                    .collect()
            })
            .collect();
        for r in results {
            out.absorb(r);
        }
        out
    }

    fn simeq_oracle(&self) -> Result<CriterionOutcome> {
        let mut out = CriterionOutcome::new(2, "simeq oracle", 1.0);
        for space in &self.spaces {
            let name = tau_name(space.tau())?;
            for len in 1..=self.cfg.simeq_max_len {
                let words: Vec<FiniteWord> = FiniteWord::all_binary(len).collect();
                let trunc: Vec<FiniteWord> = enumerate_precritical_truncations(space.tau(), len - 1)?.into_iter().collect();
                let masks = words
                    .iter()
                    .map(|x| {
                        trunc
                            .iter()
                            .map(|w| match_approx(x.symbols(), w.symbols()))
                            .collect::<Result<Vec<bool>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                let results: Vec<(bool, String)> = (0..words.len())
                    .into_par_iter()
                    .flat_map_iter(|a| {
                        let (words, masks, name) = (&words, &masks, &name);
                        (0..words.len()).map(move |b| {
                            let oracle = a == b || masks[a].iter().zip(&masks[b]).any(|(p, q)| *p && *q);
                            match simeq(words[a].symbols(), words[b].symbols(), space.tau()) {
                                Ok(r) if r.holds == oracle => (true, String::new()),
                                Ok(r) => (
                                    false,
                                    format!("tau={name} {} vs {}: simeq {} oracle {oracle}", words[a], words[b], r.holds),
                                ),
                                Err(e) => (false, format!("tau={name} {} vs {}: {e}", words[a], words[b])),
                            }
                        })
                    })
                    .collect();
                out.absorb(results);
            }
        }
        Ok(out)
    }

    fn acceptability_oracle(&self) -> Result<CriterionOutcome> {
        let mut out = CriterionOutcome::new(3, "acceptability oracle", 1.0);
        let h = self.cfg.lambda_horizon;
        for p in 1..=self.cfg.lambda_max_period {
            for w in FiniteWord::all_ternary(p) {
                let tau = SymSeq::exact(Vec::new(), w.symbols().to_vec())?;
                let oracle = direct_acceptability(w.symbols(), h);
                let got = is_lambda_acceptable(&tau, h)?.verdict;
                out.record(got == oracle, || format!("[{w}]: checker {got}, oracle {oracle}"));
            }
        }
        for (lit, want) in [("[*]", true), ("[1*]", false), ("[10*]", true)] {
            let got = is_lambda_acceptable(&SymSeq::parse(lit)?, h)?.verdict;
            out.record(got == want, || format!("{lit}: expected {want}, got {got}"));
        }
        Ok(out)
    }

    fn pseudo_agreement(&self) -> CriterionOutcome {
        let mut out = CriterionOutcome::new(4, "pseudo-agreement", 1.0);
        let results: Vec<(bool, String, usize)> = self
            .orbits()
            .par_iter()
            .map(|run| {
                let Ok(orbit) = &run.orbit else {
                    return (false, format!("{}: no orbit", run.label(self)), 0);
                };
                let eps = EpsilonScale::from_exponent(run.eps_exp);
                match check_pseudo_agreement(orbit, eps, &self.spaces[run.tau]) {
                    Ok(r) if r.holds() => (true, String::new(), r.ledger_len),
                    Ok(r) => (
                        false,
                        format!(
                            "{}: column failures {:?}, critical failures {:?}",
                            run.label(self),
                            &r.column_failures[..r.column_failures.len().min(5)],
                            &r.critical_failures[..r.critical_failures.len().min(5)]
                        ),
                        r.ledger_len,
                    ),
                    Err(e) => (false, format!("{}: {e}", run.label(self)), 0),
                }
            })
            .collect();
        let mut ledger = 0;
        for (ok, w, l) in results {
            ledger += l;
            out.record(ok, || w);
        }
        out.notes.push(format!("ledger entries: {ledger}"));
        out
    }

    fn flip_bounds(&self) -> Result<CriterionOutcome> {
        let mut out = CriterionOutcome::new(5, "flip bounds", 1.0);
        let mut runs: Vec<(DendriteSpace, String, u64, DeltaPseudoOrbit)> = Vec::new();
        for run in self.orbits() {
            let space = &self.spaces[run.tau];
            if let (KneadingClass::Periodic { .. }, Ok(o)) = (space.class(), &run.orbit) {
                runs.push((space.clone(), run.label(self), run.seed, o.clone()));
            }
        }
        for lit in &self.cfg.flip_extra_taus {
            let space = build_space(lit, self.cfg.space_depth)?;
            if !matches!(space.class(), KneadingClass::Periodic { .. }) {
                return Err(Error::Contract(format!("flip_extra_taus entry {lit} is not periodic")));
            }
            for &e in &self.cfg.eps_exps {
                let scale = self.scale(&space, EpsilonScale::from_exponent(e))?;
                for i in 0..self.cfg.orbits {
                    let seed = self.cfg.seed + i as u64;
                    for choice in [ColumnChoice::Uniform, ColumnChoice::LowBiased] {
                        let o = random_pseudo_orbit_with(
                            &space,
                            scale,
                            self.cfg.orbit_length,
                            seed,
                            self.cfg.flip_rate,
                            choice,
                        )?;
                        let label = format!("tau={lit} e={e} seed={seed} {}", choice_name(choice));
                        runs.push((space.clone(), label, seed, o));
                    }
                }
            }
        }
        let results: Vec<(Vec<(bool, String)>, usize)> = runs
            .par_iter()
            .map(|(space, label, _, o)| {
                let mut res = Vec::new();
                let mut chains = 0;
                let n = o.scale().depth();
                for k in 1..=o.len() {
                    let flips = match flip_scan(o, k, n) {
                        Ok(f) => f,
                        Err(e) => {
                            res.push((false, format!("{label} k={k}: {e}")));
                            continue;
                        }
                    };
                    let dis: Vec<_> = flips.iter().filter(|r| r.kind == FlipKind::Disagreement).collect();
                    for r in dis.iter().filter(|r| r.row == 1) {
                        match verify_periodic_flip_bound(o, space, k, r.column) {
                            Ok(d) => {
                                chains += usize::from(!d.chain.is_empty());
                                res.push((d.holds(), format!("{label} k={k} column={}: {d:?}", r.column)));
                            }
                            Err(e) => res.push((false, format!("{label} k={k} column={}: {e}", r.column))),
                        }
                    }
                    for w in dis.windows(2) {
                        match verify_between_flips(o, k, w[0].column, w[1].column) {
                            Ok(b) => res.push((b.holds(), format!("{label} k={k}: {b:?}"))),
                            Err(e) => res.push((false, format!("{label} k={k}: {e}"))),
                        }
                    }
                }
                (res, chains)
            })
            .collect();
        let mut chains = 0;
        for (r, c) in results {
            chains += c;
            out.absorb(r);
        }
        out.notes.push(format!("orbits: {}, non-empty out-of-sync chains: {chains}", runs.len()));
        Ok(out)
    }

    fn ict_to_omega(&self) -> CriterionOutcome {
        let mut out = CriterionOutcome::new(6, "ict to omega", 1.0);
        let eps = EpsilonScale::from_exponent(self.cfg.omega_eps_exp);
        let depth = self.cfg.omega_depth;
        let horizon = depth.saturating_sub(eps.depth() + 1);
        let jobs: Vec<(usize, u64)> = (0..self.spaces.len())
            .flat_map(|t| (0..self.cfg.omega_sets).map(move |i| (t, i as u64)))
            .collect();
        let results: Vec<(bool, String)> = jobs
            .into_par_iter()
            .map(|(t, i)| {
                let space = &self.spaces[t];
                let seed = self.cfg.seed + i;
                let label = format!("tau={} set seed={seed}", self.cfg.taus[t]);
                let r = (|| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let set = random_admissible_cycle(space, self.cfg.omega_max_period, &mut rng)?;
                    if !is_ict(&set, eps, space)?.holds {
                        return Err(Error::Contract("set is not ICT".into()));
                    }
                    let (z, _) = build_omega_point(&set, space, depth)?;
                    if z.contains_star_within(depth)? {
                        return Err(Error::Contract("omega point contains a star".into()));
                    }
                    verify_omega_equals(&set, &z, eps, space, horizon, self.cfg.omega_burn_in, self.cfg.omega_min_visits)
                })();
                match r {
                    Ok(rep) if rep.holds() => (true, String::new()),
                    Ok(rep) => (
                        false,
                        format!("{label}: under-visited {:?}, strays {}", rep.under_visited, rep.strays),
                    ),
                    Err(e) => (false, format!("{label}: {e}")),
                }
            })
            .collect();
        out.absorb(results);
        out
    }

    fn omega_to_ict(&self) -> CriterionOutcome {
        let mut out = CriterionOutcome::new(7, "omega to ict", self.cfg.sarkovskii_pass_rate);
        let eps = EpsilonScale::from_exponent(self.cfg.sarkovskii_eps_exp);
        let coarse = EpsilonScale::from_exponent(self.cfg.sarkovskii_eps_exp.saturating_sub(1));
        let jobs: Vec<(usize, u64)> = (0..self.spaces.len())
            .flat_map(|t| (0..self.cfg.sarkovskii_points).map(move |i| (t, i as u64)))
            .collect();
        let results: Vec<(bool, String)> = jobs
            .into_par_iter()
            .map(|(t, i)| {
                let space = &self.spaces[t];
                let seed = self.cfg.seed + i;
                let label = format!("tau={} point seed={seed}", self.cfg.taus[t]);
                let r = (|| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let z = random_admissible_point(space, &mut rng)?;
                    let a = approximate_omega(&z, eps, space, self.cfg.sarkovskii_horizon, self.cfg.sarkovskii_burn_in)?;
                    Ok::<_, Error>((z, a.set.len(), is_ict(&a.set, coarse, space)?))
                })();
                match r {
                    Ok((_, _, v)) if v.holds => (true, String::new()),
                    Ok((z, n, v)) => (false, format!("{label} z={z}: {n} points, no chain {:?}", v.missing)),
                    Err(e) => (false, format!("{label}: {e}")),
                }
            })
            .collect();
        out.absorb(results);
        out
    }

    fn word_root(&self) -> Result<CriterionOutcome> {
        let mut out = CriterionOutcome::new(8, "word root", 1.0);
        for n in 2..=self.cfg.root_max_len {
            for w in FiniteWord::all_binary(n) {
                let a = w.symbols();
                for m in 1..n {
                    let s = n - m;
                    if (0..n).any(|i| a[i] != a[(i + s) % n]) {
                        continue;
                    }
                    let ok = match word_overlap_root(a, m) {
                        Ok(r) => {
                            let l = r.ell;
                            l == r.gamma.len()
                                && m % l == 0
                                && s % l == 0
                                && r.repetitions * l == n
                                && (0..n).all(|i| a[i] == r.gamma.symbols()[i % l])
                        }
                        Err(_) => false,
                    };
                    out.record(ok, || format!("alpha={w} m={m}"));
                }
            }
        }
        Ok(out)
    }

    fn julia(&self) -> Result<CriterionOutcome> {
        let mut out = CriterionOutcome::new(9, "julia bridge", 1.0);
        let ci = ComplexParam::with_default_tolerance(Complex64::new(0.0, 1.0));
        let c0 = ComplexParam::with_default_tolerance(Complex64::new(0.0, 0.0));
        let v = misiurewicz_detect(ci, 200)?;
        out.record(v == Misiurewicz::Misiurewicz { preperiod: 1, period: 2 }, || format!("c=i: {v}"));
        let v0 = misiurewicz_detect(c0, 200)?;
        out.record(matches!(v0, Misiurewicz::PeriodicCritical { .. }), || format!("c=0: {v0}"));
        let part = PartitionSpec::for_c_equals_i();
        let tau = extract_kneading(ci, part, 20)?;
        let strict = tau.exact_shape().is_some_and(|(pre, _)| pre >= 1);
        let acc = is_lambda_acceptable(&tau, 30)?;
        out.record(strict && acc.verdict, || format!("c=i: tau {tau}, acceptability {acc}"));
        let r = crosscheck(ci, part, self.cfg.julia_depth, self.cfg.julia_samples, self.cfg.seed)?;
        out.record(r.admissible_rate() >= 0.95, || {
            format!("c=i crosscheck: {}/{} admissible", r.admissible, r.samples)
        });
        out.notes.push(format!(
            "tau(c=i) = {tau}, crosscheck {}/{} admissible",
            r.admissible, r.samples
        ));
        Ok(out)
    }

    fn proximity_contracts(&self) -> Result<CriterionOutcome> {
        let mut out = CriterionOutcome::new(10, "proximity", 1.0);
        let cap = self.cfg.proximity_cap;
        let per = self.cfg.proximity_pairs.div_ceil(self.spaces.len());
        for (t, space) in self.spaces.iter().enumerate() {
            let tau = space.tau();
            let name = tau_name(tau)?;
            let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed ^ (0x5eed_0000 + t as u64));
            let pool = (0..256)
                .map(|_| random_admissible_point(space, &mut rng))
                .collect::<Result<Vec<_>>>()?;
            let pairs = (0..per)
                .map(|_| correlated_pair(space, &pool, &mut rng))
                .collect::<Result<Vec<_>>>()?;
            let results: Vec<(bool, String)> = pairs
                .par_iter()
                .map(|(x, y)| {
                    let r = (|| {
                        let p = proximity(x, y, tau, cap)?;
                        let q = proximity(y, x, tau, cap)?;
                        let ps = proximity(&x.shift(1)?, &y.shift(1)?, tau, cap)?;
                        Ok::<_, Error>((p == q, shift_bound_holds(p, ps), p, ps))
                    })();
                    match r {
                        Ok((true, true, _, _)) => (true, String::new()),
                        Ok((sym, _, p, ps)) => (
                            false,
                            format!("tau={name} x={x} y={y}: symmetric {sym}, d={p}, d(shifted)={ps}"),
                        ),
                        Err(e) => (false, format!("tau={name} x={x} y={y}: {e}")),
                    }
                })
                .collect();
            out.absorb(results);
            let n = self.cfg.monotone_len;
            let words: Vec<FiniteWord> = FiniteWord::all_binary(n).collect();
            let results: Vec<(bool, String)> = (0..words.len())
                .into_par_iter()
                .flat_map_iter(|a| {
                    let (words, name) = (&words, &name);
                    (0..words.len()).map(move |b| {
                        let (x, y) = (words[a].symbols(), words[b].symbols());
                        let mut prev = true;
                        for l in 1..=n {
                            match simeq(&x[..l], &y[..l], tau) {
                                Ok(r) if r.holds && !prev => {
                                    return (false, format!("tau={name} {} vs {}: holds at {l} only", words[a], words[b]))
                                }
                                Ok(r) => prev = r.holds,
                                Err(e) => return (false, format!("tau={name}: {e}")),
                            }
                        }
                        (true, String::new())
                    })
                })
                .collect();
            out.absorb(results);
        }
        Ok(out)
    }
}

/// `d(sigma x, sigma y) <= 2 d(x, y)`: the failure depth drops by at most one.
fn shift_bound_holds(p: Proximity, shifted: Proximity) -> bool {
    match shifted {
        Proximity::AtMost(_) => true,
        Proximity::Value(m) => m + 1 >= p.exponent(),
    }
}

/// A point from the pool and a second point sharing a random prefix with it.
fn correlated_pair<R: Rng>(space: &DendriteSpace, pool: &[SymSeq], rng: &mut R) -> Result<(SymSeq, SymSeq)> {
    let x = pool[rng.gen_range(0..pool.len())].clone();
    for _ in 0..20 {
        let k = rng.gen_range(0..40);
        let w = &pool[rng.gen_range(0..pool.len())];
        let y = w.prepend(&x.window(0, k)?);
        if let Ok(r) = is_admissible(&y, space, 128) {
            if r.verdict && r.unresolved.is_none() {
                return Ok((x, y));
            }
        }
    }
    Ok((x, pool[rng.gen_range(0..pool.len())].clone()))
}

/// Acceptability of the periodic sequence `[w]` straight from the
/// definition, comparing `horizon` symbols.
pub fn direct_acceptability(w: &[Symbol], horizon: usize) -> bool {
    let t = |i: usize| w[i % w.len()];
    let shift_is_tau = |n: usize| (0..horizon).all(|m| t(n + m) == t(m));
    for n in 0..horizon {
        if t(n).is_star() != shift_is_tau(n + 1) {
            return false;
        }
    }
    for n in 1..horizon {
        if !shift_is_tau(n) {
            let separated = (0..horizon).any(|m| {
                let (a, b) = (t(n + m), t(m));
                !a.is_star() && !b.is_star() && a != b
            });
            if !separated {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> BatteryConfig {
        BatteryConfig {
            taus: vec!["[10*]".into(), "1[0]".into()],
            space_depth: 200,
            eps_exps: vec![3, 4],
            orbits: 4,
            orbit_length: 40,
            simeq_max_len: 5,
            flip_extra_taus: vec!["[110*]".into()],
            omega_sets: 3,
            omega_depth: 1500,
            omega_burn_in: 200,
            sarkovskii_points: 5,
            sarkovskii_horizon: 1500,
            sarkovskii_burn_in: 200,
            root_max_len: 8,
            julia_samples: 50,
            proximity_pairs: 500,
            monotone_len: 6,
            ..BatteryConfig::default()
        }
    }

    #[test]
    fn config_round_trip() {
        let c = BatteryConfig::default();
        assert_eq!(BatteryConfig::parse(&c.render()).unwrap(), c);
        let c = small();
        assert_eq!(BatteryConfig::parse(&c.render()).unwrap(), c);
        assert_eq!(BatteryConfig::parse("# nothing\n\n").unwrap(), BatteryConfig::default());
    }

    #[test]
    fn config_errors() {
        assert!(matches!(BatteryConfig::parse("orbits 3"), Err(Error::Format { line: 1, .. })));
        assert!(matches!(BatteryConfig::parse("\nfoo: 1"), Err(Error::Format { line: 2, .. })));
        assert!(BatteryConfig::parse("orbits: many").is_err());
        assert!(BatteryConfig::parse("policies: sideways").is_err());
        assert!(BatteryConfig::parse("eps_exps: 0").is_err());
        assert!(BatteryConfig::parse("taus:").is_err());
    }

    #[test]
    fn direct_oracle_examples() {
        let w = |s: &str| s.chars().map(|c| Symbol::from_char(c).unwrap()).collect::<Vec<_>>();
        assert!(direct_acceptability(&w("*"), 50));
        assert!(direct_acceptability(&w("10*"), 50));
        assert!(!direct_acceptability(&w("1*"), 50));
        assert!(!direct_acceptability(&w("1"), 50));
    }

    #[test]
    fn small_battery_passes() {
        let b = Battery::new(small()).unwrap();
        for o in b.run_all().unwrap() {
            assert!(o.holds(), "{o} {:?}", o.witnesses);
        }
    }

    #[test]
    fn coarse_delta_is_caught() {
        let cfg = BatteryConfig {
            delta: DeltaMode::Eps,
            flip_rate: 0.8,
            column_choice: ColumnChoice::LowBiased,
            ..small()
        };
        let b = Battery::new(cfg).unwrap();
        let sh = b.run(1).unwrap();
        let pa = b.run(4).unwrap();
        assert!(!sh.holds() || !pa.holds(), "{sh} {pa}");
    }

    #[test]
    fn bad_tau_is_rejected() {
        let cfg = BatteryConfig {
            taus: vec!["[1*]".into()],
            ..small()
        };
        assert!(Battery::new(cfg).is_err());
        assert!(Battery::new(small()).unwrap().run(11).is_err());
    }
}
