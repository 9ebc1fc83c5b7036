use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use dendrite_core::battery::{Battery, BatteryConfig, CRITERIA};
use dendrite_core::ict_omega::{
    approximate_omega, build_omega_point, is_ict, is_weakly_incompressible, parse_set, verify_omega_equals, write_set,
    FinitePointSet, DEFAULT_CERT_DEPTH, MAX_INCOMPRESSIBLE_SET,
};
use dendrite_core::julia_bridge::{
    crosscheck, extract_kneading, iterate_orbit, classify_orbit, render, write_ppm, ComplexParam, ImageSpec,
    PartitionSpec,
};
use dendrite_core::kneading::{classify, parse_tau, tau_name};
use dendrite_core::pseudo_orbit::{first_violation, parse_orbit, random_pseudo_orbit_with, write_orbit, ColumnChoice, DeltaScale};
use dendrite_core::shadowing::{assign_shadow, canonical_shadow, delta_for_epsilon, verify_shadowing, AssignmentPolicy};
use dendrite_core::symbolic::{
    is_lambda_acceptable, proximity, simeq, DendriteSpace, EpsilonScale, FiniteWord, Proximity, SymSeq,
};
use num_complex::Complex64;

use crate::report::Report;
use crate::{Command, EpsArgs, IctCommand, JuliaCommand, OmegaCommand, OrbitCommand, ParamArgs, TauArgs};

/// Symbols shown for points without a literal form.
const SHOW: usize = 64;

impl TauArgs {
    fn space(&self) -> Result<DendriteSpace> {
        space_for(parse_tau(&self.tau)?, self.depth)
    }
}

fn space_for(tau: SymSeq, depth: usize) -> Result<DendriteSpace> {
    let name = tau_name(&tau).unwrap_or_else(|_| tau.to_string());
    DendriteSpace::new(tau, depth).with_context(|| format!("tau {name}"))
}

impl EpsArgs {
    fn scale(&self) -> Result<EpsilonScale> {
        match (self.eps_exp, self.eps) {
            (Some(n), None) => Ok(EpsilonScale::from_exponent(n)),
            (None, Some(e)) => Ok(EpsilonScale::new(e)?),
            _ => bail!("give exactly one of --eps-exp and --eps"),
        }
    }
}

impl ParamArgs {
    fn param(&self) -> Result<ComplexParam> {
        Ok(ComplexParam::new(Complex64::new(self.re, self.im), self.tol)?)
    }
}

fn show(x: &SymSeq) -> String {
    match x.literal() {
        Some(l) => l,
        None => {
            let n = x.certified_depth().map_or(SHOW, |d| d.min(SHOW - 1) + 1);
            match x.window(0, n) {
                Ok(w) => format!("{}...", FiniteWord::new(w)),
                Err(_) => x.to_string(),
            }
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

/// A literal, or a file holding a literal or a bare symbol word.
fn point_arg(text: &str) -> Result<SymSeq> {
    let path = Path::new(text);
    let body = if path.is_file() { read(path)?.trim().to_string() } else { text.to_string() };
    if body.contains('[') {
        return Ok(SymSeq::parse(&body)?);
    }
    let w: FiniteWord = body.parse()?;
    Ok(SymSeq::from_finite(w)?)
}

fn load_set(path: &Path, depth: usize) -> Result<(DendriteSpace, FinitePointSet)> {
    let (tau, points) = parse_set(&read(path)?)?;
    let space = space_for(tau, depth)?;
    let set = FinitePointSet::new(points, &space, DEFAULT_CERT_DEPTH)?;
    Ok((space, set))
}

/// Runs one command; `Ok(false)` when the checked property fails.
pub fn run(cmd: Command, r: &mut Report) -> Result<bool> {
    match cmd {
        Command::CheckTau(t) => {
            let tau = parse_tau(&t.tau)?;
            let rec = is_lambda_acceptable(&tau, t.depth)?;
            r.kv("tau", tau_name(&tau)?);
            r.kv("verdict", if rec.verdict { "acceptable" } else { "not-acceptable" });
            r.kv("exact", rec.exact);
            r.kv("verified_to_depth", rec.verified_to_depth);
            if let Some(n) = rec.witness {
                r.kv("n", n);
            }
            if let Some(u) = rec.unresolved {
                r.kv("unresolved", u);
            }
            Ok(rec.verdict)
        }
        Command::ClassifyTau(t) => {
            let tau = parse_tau(&t.tau)?;
            let rec = is_lambda_acceptable(&tau, t.depth)?;
            if !rec.verdict {
                bail!("tau is not acceptable (n = {})", rec.witness.unwrap_or(0));
            }
            let class = classify(&tau, t.depth)?;
            r.kv("tau", tau_name(&tau)?);
            r.kv("class", class.name());
            r.kv("detail", &class);
            Ok(true)
        }
        Command::Distance { tau, x, y, cap } => {
            let space = tau.space()?;
            let (x, y) = (SymSeq::parse(&x)?, SymSeq::parse(&y)?);
            let p = proximity(&x, &y, space.tau(), cap)?;
            r.kv("proximity", p);
            r.kv("exponent", p.exponent());
            r.kv("bound", if matches!(p, Proximity::Value(_)) { "exact" } else { "upper" });
            r.kv("value", p.as_f64());
            Ok(true)
        }
        Command::Simeq { tau, x, y } => {
            let space = tau.space()?;
            let (x, y): (FiniteWord, FiniteWord) = (x.parse()?, y.parse()?);
            let res = simeq(x.symbols(), y.symbols(), space.tau())?;
            r.kv("holds", res.holds);
            if let Some(w) = res.witness {
                r.kv("star_position", w.star_position);
                r.kv("witness", w.witness_word);
            }
            Ok(res.holds)
        }
        Command::Orbit(OrbitCommand::Gen {
            tau,
            eps,
            delta_exp,
            length,
            seed,
            flip_rate,
            choice,
            out,
        }) => {
            let space = tau.space()?;
            let scale = match delta_exp {
                Some(n) => DeltaScale::from_exponent(n),
                None => delta_for_epsilon(&space, eps.scale()?)?,
            };
            let choice = match choice.as_str() {
                "uniform" => ColumnChoice::Uniform,
                "low-biased" => ColumnChoice::LowBiased,
                c => bail!("unknown column choice {c:?} (uniform, low-biased)"),
            };
            let orbit = random_pseudo_orbit_with(&space, scale, length, seed, flip_rate, choice)?;
            let text = write_orbit(&orbit, space.tau())?;
            match out {
                Some(path) => {
                    write(&path, &text)?;
                    r.kv("tau", tau_name(space.tau())?);
                    r.kv("n_delta", scale.depth());
                    r.kv("points", orbit.len());
                    r.kv("seed", seed);
                    r.kv("written", path.display());
                }
                None => r.line(text.trim_end()),
            }
            Ok(true)
        }
        Command::Orbit(OrbitCommand::Check { file, depth }) => {
            let f = parse_orbit(&read(&file)?)?;
            let space = space_for(f.tau.clone(), depth)?;
            r.kv("tau", tau_name(space.tau())?);
            r.kv("n_delta", f.scale.depth());
            r.kv("points", f.points.len());
            match first_violation(&f.points, f.scale, &space)? {
                None => {
                    r.kv("verdict", "pseudo-orbit");
                    Ok(true)
                }
                Some(i) => {
                    r.kv("verdict", "violation");
                    r.kv("index", i);
                    Ok(false)
                }
            }
        }
        Command::DeltaForEps { tau, eps } => {
            let space = tau.space()?;
            let eps = eps.scale()?;
            let d = delta_for_epsilon(&space, eps)?;
            r.kv("tau", tau_name(space.tau())?);
            r.kv("class", space.class());
            r.kv("n_eps", eps.depth());
            r.kv("n_delta", d.depth());
            r.kv("delta", format!("2^-{}", d.depth()));
            Ok(true)
        }
        Command::Shadow {
            file,
            eps,
            policy,
            depth,
        } => {
            let f = parse_orbit(&read(&file)?)?;
            let space = space_for(f.tau.clone(), depth)?;
            let orbit = f.validate(&space)?;
            let eps = eps.scale()?;
            let policy: AssignmentPolicy = policy.parse()?;
            let shadow = canonical_shadow(&orbit, eps, &space)?;
            let a = assign_shadow(&shadow, policy, &space, orbit.len() + eps.depth() + 1)?;
            let v = verify_shadowing(&orbit, &a.z, eps, &space)?;
            r.kv("n_eps", eps.depth());
            r.kv("n_delta", orbit.scale().depth());
            r.kv("points", orbit.len());
            r.kv("diamonds", shadow.diamonds.len());
            r.kv(
                "diamond_positions",
                shadow.diamonds.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(","),
            );
            let head: String = shadow.word.iter().map(|s| s.to_string()).collect();
            r.kv("shadow_head", head);
            r.kv("policy", policy);
            if let Some(p) = a.forced_at {
                r.kv("forced_star_at", p);
            }
            r.kv("z", show(&a.z));
            r.kv("admissible", a.admissibility.verdict);
            r.kv("verified", v.verified());
            if let Some(i) = v.first_failure {
                r.kv("first_failure", i);
            }
            Ok(v.verified() && a.admissibility.verdict)
        }
        Command::Ict(IctCommand::Check { file, eps, depth }) => {
            let (space, set) = load_set(&file, depth)?;
            let eps = eps.scale()?;
            let v = is_ict(&set, eps, &space)?;
            r.kv("points", set.len());
            r.kv("n_eps", eps.depth());
            r.kv("ict", v.holds);
            if let Some((a, b)) = v.missing {
                r.kv("no_chain_from", a);
                r.kv("no_chain_to", b);
            }
            if set.len() <= MAX_INCOMPRESSIBLE_SET {
                let w = is_weakly_incompressible(&set, eps, &space)?;
                r.kv("weakly_incompressible", w);
                if w != v.holds {
                    r.kv("note", "ict and weak incompressibility disagree at this eps");
                }
            }
            Ok(v.holds)
        }
        Command::Omega(OmegaCommand::Build {
            file,
            length,
            depth,
            out,
        }) => {
            let (space, set) = load_set(&file, depth)?;
            let (z, plan) = build_omega_point(&set, &space, length)?;
            r.kv("points", set.len());
            r.kv("length", length + 1);
            r.kv("segments", plan.segments.len());
            let exact = plan.segments.iter().filter(|s| s.n_delta.is_none()).count();
            r.kv("orbit_segments", exact);
            r.kv("delta_segments", plan.segments.len() - exact);
            for (s, nu) in plan.segments.iter().zip(&plan.offsets).take(8) {
                let nd = s.n_delta.map_or("orbit".to_string(), |n| n.to_string());
                r.kv(&format!("segment.{}", s.index), format!("offset={nu} n_delta={nd} path={:?}", s.path));
            }
            r.kv("z", show(&z));
            if let Some(path) = out {
                let w = FiniteWord::new(z.window(0, length + 1)?);
                write(&path, format!("{w}\n"))?;
                r.kv("written", path.display());
            }
            Ok(true)
        }
        Command::Omega(OmegaCommand::Approx {
            tau,
            z,
            eps,
            horizon,
            burn_in,
            out,
        }) => {
            let space = tau.space()?;
            let z = point_arg(&z)?;
            let eps = eps.scale()?;
            let a = approximate_omega(&z, eps, &space, horizon, burn_in)?;
            r.kv("n_eps", eps.depth());
            r.kv("points", a.set.len());
            for (i, (p, v)) in a.set.points().iter().zip(&a.visits).enumerate() {
                r.kv(&format!("point.{i}"), show(p));
                r.kv(&format!("visits.{i}"), v);
            }
            if let Some(path) = out {
                write(&path, write_set(&a.set, space.tau())?)?;
                r.kv("written", path.display());
            }
            Ok(true)
        }
        Command::Omega(OmegaCommand::Verify {
            file,
            z,
            eps,
            horizon,
            burn_in,
            min_visits,
            depth,
        }) => {
            let (space, set) = load_set(&file, depth)?;
            let eps = eps.scale()?;
            let z = match z {
                Some(z) => point_arg(&z)?,
                None => build_omega_point(&set, &space, horizon + eps.depth() + 1)?.0,
            };
            let rep = verify_omega_equals(&set, &z, eps, &space, horizon, burn_in, min_visits)?;
            r.kv("n_eps", rep.n_eps);
            r.kv("burn_in", rep.burn_in);
            r.kv("horizon", rep.horizon);
            for (i, v) in rep.visits.iter().enumerate() {
                r.kv(&format!("visits.{i}"), v);
            }
            r.kv("under_visited", format!("{:?}", rep.under_visited));
            r.kv("strays", rep.strays);
            if let Some(i) = rep.first_stray {
                r.kv("first_stray", i);
            }
            r.kv("verdict", if rep.holds() { "equal" } else { "differ" });
            Ok(rep.holds())
        }
        Command::Julia(JuliaCommand::Detect { param, steps }) => {
            let p = param.param()?;
            let o = iterate_orbit(p, steps)?;
            let v = classify_orbit(&o, p.tolerance);
            r.kv("c", p.c);
            r.kv("tolerance", p.tolerance);
            r.kv("verdict", v);
            if let Some(e) = o.escaped_at {
                r.kv("escaped_at", e);
            }
            if let (Some(pre), Some(per)) = (o.preperiod, o.period) {
                r.kv("preperiod", pre);
                r.kv("period", per);
            }
            Ok(true)
        }
        Command::Julia(JuliaCommand::Kneading {
            param,
            theta,
            star_tol,
            depth,
            crosscheck: cc,
            seed,
        }) => {
            let p = param.param()?;
            let part = PartitionSpec::new(theta, star_tol)?;
            let tau = extract_kneading(p, part, depth)?;
            let acc = is_lambda_acceptable(&tau, depth.max(30))?;
            r.kv("c", p.c);
            r.kv("tau", &tau);
            r.kv("acceptable", acc.verdict);
            let mut holds = acc.verdict;
            if let Some(d) = cc {
                let rep = crosscheck(p, part, d, 200, seed)?;
                r.kv("class", &rep.class);
                r.kv("samples", rep.samples);
                r.kv("admissible", rep.admissible);
                r.kv("admissible_rate", format!("{:.3}", rep.admissible_rate()));
                for (k, why) in rep.failures.iter().take(5) {
                    r.kv(&format!("failure.{k}"), why);
                }
                holds &= rep.admissible_rate() >= 0.95;
            }
            Ok(holds)
        }
        Command::Julia(JuliaCommand::Render {
            param,
            size,
            radius,
            max_iter,
            out,
        }) => {
            let p = param.param()?;
            let img = render(p, &ImageSpec::square(size, radius, max_iter))?;
            write(&out, write_ppm(&img))?;
            let inside = img.pixels.iter().filter(|&&n| n == max_iter).count();
            r.kv("c", p.c);
            r.kv("size", size);
            r.kv("non_escaping", inside);
            r.kv("written", out.display());
            Ok(true)
        }
        Command::Battery { config, criteria } => {
            let cfg = match config {
                Some(path) => BatteryConfig::parse(&read(&path)?)?,
                None => BatteryConfig::default(),
            };
            let ids: Vec<u8> = if criteria.is_empty() {
                CRITERIA.iter().map(|&(id, _)| id).collect()
            } else {
                criteria
            };
            let battery = Battery::new(cfg)?;
            let mut all = true;
            for id in ids {
                let o = battery.run(id)?;
                all &= o.holds();
                r.line(o.to_string());
                for n in &o.notes {
                    r.line(format!("  note: {n}"));
                }
                for w in &o.witnesses {
                    r.line(format!("  witness: {w}"));
                }
            }
            r.kv("verdict", if all { "pass" } else { "fail" });
            Ok(all)
        }
    }
}
