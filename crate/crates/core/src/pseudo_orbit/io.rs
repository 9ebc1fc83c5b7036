use super::{DeltaPseudoOrbit, DeltaScale};
use crate::error::{Error, Result};
use crate::kneading::{parse_tau, tau_name};
use crate::symbolic::{DendriteSpace, SymSeq};

/// Text form: `tau:` and `delta_exponent:` headers, then one point per line.
pub fn write_orbit(orbit: &DeltaPseudoOrbit, tau: &SymSeq) -> Result<String> {
    let mut out = format!("tau: {}\ndelta_exponent: {}\n", tau_name(tau)?, orbit.scale().depth());
    for (i, p) in orbit.points().iter().enumerate() {
        let lit = p
            .literal()
            .ok_or_else(|| Error::Contract(format!("point {} has no literal form", i + 1)))?;
        out.push_str(&lit);
        out.push('\n');
    }
    Ok(out)
}

/// Parsed orbit file, points not yet validated.
#[derive(Debug, Clone)]
pub struct OrbitFile {
    pub tau: SymSeq,
    pub scale: DeltaScale,
    pub points: Vec<SymSeq>,
}

impl OrbitFile {
    pub fn validate(self, space: &DendriteSpace) -> Result<DeltaPseudoOrbit> {
        DeltaPseudoOrbit::validate(self.points, self.scale, space)
    }
}

fn header<'a>(line: Option<(usize, &'a str)>, key: &str) -> Result<&'a str> {
    let (n, text) = line.ok_or_else(|| Error::Format {
        line: 0,
        reason: format!("missing `{key}:` header"),
    })?;
    text.strip_prefix(key)
        .and_then(|r| r.strip_prefix(':'))
        .map(str::trim)
        .ok_or_else(|| Error::Format {
            line: n + 1,
            reason: format!("expected `{key}:` header"),
        })
}

pub fn parse_orbit(text: &str) -> Result<OrbitFile> {
    let mut lines = text.lines().enumerate();
    let tau = parse_tau(header(lines.next(), "tau")?)?;
    let exp_line = lines.next();
    let exp = header(exp_line, "delta_exponent")?;
    let n: usize = exp.parse().map_err(|_| Error::Format {
        line: 2,
        reason: format!("bad delta exponent `{exp}`"),
    })?;
    let mut points = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        points.push(SymSeq::parse(line.trim()).map_err(|e| Error::Format {
            line: i + 1,
            reason: e.to_string(),
        })?);
    }
    if points.is_empty() {
        return Err(Error::Format {
            line: 3,
            reason: "no points".into(),
        });
    }
    Ok(OrbitFile {
        tau,
        scale: DeltaScale::from_exponent(n),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::super::random_pseudo_orbit;
    use super::*;
    use crate::symbolic::seq;

    #[test]
    fn round_trip_is_byte_exact() {
        let space = DendriteSpace::new(seq("[10*]"), 40).unwrap();
        let o = random_pseudo_orbit(&space, DeltaScale::from_exponent(20), 25, 9, 0.5).unwrap();
        let text = write_orbit(&o, space.tau()).unwrap();
        let back = parse_orbit(&text).unwrap();
        let o2 = back.validate(&space).unwrap();
        assert_eq!(write_orbit(&o2, space.tau()).unwrap(), text);
        assert!(text.starts_with("tau: [10*]\ndelta_exponent: 20\n"));
    }

    #[test]
    fn period_doubling_header() {
        let text = "tau: period-doubling\ndelta_exponent: 5\n[1]\n";
        let f = parse_orbit(text).unwrap();
        assert_eq!(tau_name(&f.tau).unwrap(), "period-doubling");
    }

    #[test]
    fn malformed_files_rejected() {
        assert!(matches!(parse_orbit("delta_exponent: 3\n[1]\n"), Err(Error::Format { .. }) | Err(Error::Parse { .. })));
        assert!(matches!(parse_orbit("tau: 1[0]\ndelta_exponent: x\n[1]\n"), Err(Error::Format { line: 2, .. })));
        assert!(matches!(parse_orbit("tau: 1[0]\ndelta_exponent: 3\n1[2]\n"), Err(Error::Format { line: 3, .. })));
    }
}
