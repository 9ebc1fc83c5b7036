//! Numeric quadratic Julia sets: `f_c(z) = z^2 + c` in double precision,
//! Misiurewicz detection, kneading extraction through a half-plane
//! partition, escape-time rendering, and a cross-check of sampled
//! itineraries against the symbolic side.

use std::f64::consts::FRAC_PI_4;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kneading::classify;
use crate::symbolic::{is_admissible, is_lambda_acceptable, DendriteSpace, FiniteWord, SymSeq, Symbol, VerificationRecord};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const ESCAPE_RADIUS: f64 = 2.0;
pub const INVERSE_BURN_IN: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexParam {
    pub c: Complex64,
    pub tolerance: f64,
}

impl ComplexParam {
    pub fn new(c: Complex64, tolerance: f64) -> Result<ComplexParam> {
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return Err(Error::Contract(format!("tolerance must be positive, got {tolerance}")));
        }
        Ok(ComplexParam { c, tolerance })
    }

    pub fn with_default_tolerance(c: Complex64) -> ComplexParam {
        ComplexParam {
            c,
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    pub fn f(&self, z: Complex64) -> Complex64 {
        z * z + self.c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitRecord {
    /// `z_0 = 0, z_1 = c, ...`, stopping after an escape.
    pub samples: Vec<Complex64>,
    /// Counted from `z_1`.
    pub preperiod: Option<usize>,
    pub period: Option<usize>,
    pub escaped_at: Option<usize>,
}

/// Orbit of the critical point for `steps` iterations, with the earliest
/// cycle (smallest `n + p`, then smallest `p`) matched to tolerance over one
/// period window.
pub fn iterate_orbit(param: ComplexParam, steps: usize) -> Result<OrbitRecord> {
    if steps == 0 {
        return Err(Error::Contract("need at least one step".into()));
    }
    let mut samples = vec![Complex64::new(0.0, 0.0)];
    let mut escaped_at = None;
    for i in 1..=steps {
        let z = param.f(samples[i - 1]);
        samples.push(z);
        if z.norm() > ESCAPE_RADIUS {
            escaped_at = Some(i);
            break;
        }
    }
    let (mut preperiod, mut period) = (None, None);
    if escaped_at.is_none() {
        let len = samples.len();
        'search: for end in 2..len {
            for p in 1..end {
                let n = end - p;
                if n < 1 || n + 2 * p > len {
                    continue;
                }
                if (0..p).all(|k| (samples[n + k] - samples[n + p + k]).norm() < param.tolerance) {
                    preperiod = Some(n - 1);
                    period = Some(p);
                    break 'search;
                }
            }
        }
    }
    Ok(OrbitRecord {
        samples,
        preperiod,
        period,
        escaped_at,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Misiurewicz {
    Misiurewicz { preperiod: usize, period: usize },
    PeriodicCritical { period: usize },
    Escapes { at: usize },
    Undecided,
}

impl fmt::Display for Misiurewicz {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Misiurewicz::Misiurewicz { preperiod, period } => {
                write!(f, "misiurewicz preperiod={preperiod} period={period}")
            }
            Misiurewicz::PeriodicCritical { period } => write!(f, "periodic-critical period={period}"),
            Misiurewicz::Escapes { at } => write!(f, "escapes at={at}"),
            Misiurewicz::Undecided => write!(f, "undecided"),
        }
    }
}

pub fn classify_orbit(orbit: &OrbitRecord, tolerance: f64) -> Misiurewicz {
    if let Some(at) = orbit.escaped_at {
        return Misiurewicz::Escapes { at };
    }
    let (Some(pre), Some(p)) = (orbit.preperiod, orbit.period) else {
        return Misiurewicz::Undecided;
    };
    let cycle = &orbit.samples[pre + 1..pre + 1 + p];
    if pre == 0 || cycle.iter().any(|z| z.norm() < tolerance) {
        return Misiurewicz::PeriodicCritical { period: p };
    }
    // An orbit converging to an attracting cycle also matches to tolerance
    // eventually; a strictly preperiodic one lands on a repelling cycle.
    let multiplier: f64 = cycle.iter().map(|z| 2.0 * z.norm()).product();
    if multiplier <= 1.0 {
        Misiurewicz::Undecided
    } else {
        Misiurewicz::Misiurewicz { preperiod: pre, period: p }
    }
}

pub fn misiurewicz_detect(param: ComplexParam, steps: usize) -> Result<Misiurewicz> {
    Ok(classify_orbit(&iterate_orbit(param, steps)?, param.tolerance))
}

/// Half-plane split through 0 at angle `theta`, with a star disc of radius
/// `star_tolerance` around the critical point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionSpec {
    pub theta: f64,
    pub star_tolerance: f64,
}

impl PartitionSpec {
    pub fn new(theta: f64, star_tolerance: f64) -> Result<PartitionSpec> {
        if star_tolerance.is_nan() || star_tolerance <= 0.0 {
            return Err(Error::Contract("star tolerance must be positive".into()));
        }
        Ok(PartitionSpec { theta, star_tolerance })
    }

    /// Calibrated for `c = i`: the line along `1 + i` separates the two
    /// arms of the Julia set at 0, which run towards `1 - i` and `-1 + i`.
    pub fn for_c_equals_i() -> PartitionSpec {
        PartitionSpec {
            theta: FRAC_PI_4,
            star_tolerance: 1e-6,
        }
    }

    /// Signed distance from the partition line.
    pub fn side(&self, z: Complex64) -> f64 {
        (z * Complex64::from_polar(1.0, -self.theta)).im
    }

    pub fn symbol(&self, z: Complex64) -> Symbol {
        if z.norm() < self.star_tolerance {
            Symbol::Star
        } else {
            Symbol::from_bit(self.side(z) > 0.0)
        }
    }

    /// Like `symbol`, but a point near the line and away from 0 is an error.
    pub fn strict_symbol(&self, z: Complex64, index: usize) -> Result<Symbol> {
        let d = self.side(z);
        if z.norm() >= self.star_tolerance && d.abs() < self.star_tolerance {
            return Err(Error::PartitionAmbiguity { index, distance: d.abs() });
        }
        Ok(self.symbol(z))
    }
}

/// Itinerary of the critical value `z_1, z_2, ...`, folded into
/// preperiod/period form from the detected cycle.
pub fn extract_kneading(param: ComplexParam, partition: PartitionSpec, depth: usize) -> Result<SymSeq> {
    let orbit = iterate_orbit(param, depth.max(64))?;
    let (pre, p) = match classify_orbit(&orbit, param.tolerance) {
        Misiurewicz::Misiurewicz { preperiod, period } => (preperiod, period),
        other => return Err(Error::NotMisiurewicz(format!("c = {}: {other}", param.c))),
    };
    let mut syms = Vec::with_capacity(pre + p);
    for i in 1..=pre + p {
        syms.push(partition.strict_symbol(orbit.samples[i], i)?);
    }
    let period = syms.split_off(pre);
    SymSeq::exact(syms, period)
}

/// Backward orbit `w_0, w_1, ...` with `f(w_{k+1}) = w_k`, signs drawn from
/// the seed. `w_k` has forward itinerary read off `w_k, w_{k-1}, ..`.
fn inverse_chain(param: ComplexParam, len: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(len);
    let mut z = Complex64::new(1.0, 0.0);
    out.push(z);
    while out.len() < len {
        let r = (z - param.c).sqrt();
        z = if rng.gen::<bool>() { r } else { -r };
        out.push(z);
    }
    out
}

/// Points near `J_c` by random inverse iteration after a fixed burn-in.
pub fn sample_julia(param: ComplexParam, count: usize, seed: u64) -> Result<Vec<Complex64>> {
    if count == 0 {
        return Err(Error::Contract("need at least one sample".into()));
    }
    Ok(inverse_chain(param, INVERSE_BURN_IN + 1 + count, seed).split_off(INVERSE_BURN_IN + 1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageSpec {
    pub width: usize,
    pub height: usize,
    pub re: (f64, f64),
    pub im: (f64, f64),
    pub max_iter: u32,
}

impl ImageSpec {
    pub fn square(size: usize, radius: f64, max_iter: u32) -> ImageSpec {
        ImageSpec {
            width: size,
            height: size,
            re: (-radius, radius),
            im: (-radius, radius),
            max_iter,
        }
    }

    /// Centre of pixel `(x, y)`; row 0 is the top.
    pub fn point(&self, x: usize, y: usize) -> Complex64 {
        let re = self.re.0 + (x as f64 + 0.5) * (self.re.1 - self.re.0) / self.width as f64;
        let im = self.im.1 - (y as f64 + 0.5) * (self.im.1 - self.im.0) / self.height as f64;
        Complex64::new(re, im)
    }

    /// Pixel containing `z`, if inside the viewport.
    pub fn pixel_of(&self, z: Complex64) -> Option<(usize, usize)> {
        let fx = (z.re - self.re.0) / (self.re.1 - self.re.0) * self.width as f64;
        let fy = (self.im.1 - z.im) / (self.im.1 - self.im.0) * self.height as f64;
        if fx < 0.0 || fy < 0.0 {
            return None;
        }
        let (x, y) = (fx as usize, fy as usize);
        (x < self.width && y < self.height).then_some((x, y))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JuliaImage {
    pub spec: ImageSpec,
    /// Row-major escape counts; `max_iter` means no escape.
    pub pixels: Vec<u32>,
}

impl JuliaImage {
    pub fn at(&self, x: usize, y: usize) -> u32 {
        self.pixels[y * self.spec.width + x]
    }

    pub fn gray(&self) -> Vec<u8> {
        let m = self.spec.max_iter.max(1) as u64;
        self.pixels.iter().map(|&n| (n as u64 * 255 / m) as u8).collect()
    }
}

pub fn escape_count(param: ComplexParam, z0: Complex64, max_iter: u32) -> u32 {
    let mut z = z0;
    for n in 0..max_iter {
        if z.norm_sqr() > ESCAPE_RADIUS * ESCAPE_RADIUS {
            return n;
        }
        z = param.f(z);
    }
    max_iter
}

pub fn render(param: ComplexParam, spec: &ImageSpec) -> Result<JuliaImage> {
    if spec.width == 0 || spec.height == 0 {
        return Err(Error::Contract("image dimensions must be positive".into()));
    }
    if !(spec.re.0 < spec.re.1 && spec.im.0 < spec.im.1) {
        return Err(Error::Contract("empty viewport".into()));
    }
    let pixels = (0..spec.height)
        .into_par_iter()
        .flat_map_iter(|y| (0..spec.width).map(move |x| escape_count(param, spec.point(x, y), spec.max_iter)))
        .collect();
    Ok(JuliaImage {
        spec: spec.clone(),
        pixels,
    })
}

/// Binary P6, maxval 255, equal RGB channels.
pub fn write_ppm(image: &JuliaImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", image.spec.width, image.spec.height).into_bytes();
    for g in image.gray() {
        out.extend_from_slice(&[g, g, g]);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ppm {
    pub width: usize,
    pub height: usize,
    pub rgb: Vec<u8>,
}

impl Ppm {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.rgb);
        out
    }
}

pub fn read_ppm(bytes: &[u8]) -> Result<Ppm> {
    let bad = |reason: &str| Error::Format {
        line: 1,
        reason: reason.into(),
    };
    let mut pos = 0;
    let mut fields = Vec::new();
    while fields.len() < 4 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("non-ascii header"))?);
    }
    if fields[0] != "P6" {
        return Err(bad("not a P6 file"));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad("bad header number"));
    let (width, height, maxval) = (num(fields[1])?, num(fields[2])?, num(fields[3])?);
    if maxval != 255 {
        return Err(bad("maxval must be 255"));
    }
    // exactly one whitespace byte before the raster
    let rgb = bytes.get(pos + 1..).unwrap_or_default();
    if rgb.len() != width * height * 3 {
        return Err(bad("raster size does not match header"));
    }
    Ok(Ppm {
        width,
        height,
        rgb: rgb.to_vec(),
    })
}

/// Symbols read past the checked depth so that separations can be found.
pub const ITINERARY_MARGIN: usize = 30;

#[derive(Debug, Clone)]
pub struct CrosscheckReport {
    pub tau: SymSeq,
    pub acceptability: VerificationRecord,
    pub class: String,
    pub samples: usize,
    pub admissible: usize,
    /// Sample indices whose itinerary failed, with the reason.
    pub failures: Vec<(usize, String)>,
}

impl CrosscheckReport {
    pub fn admissible_rate(&self) -> f64 {
        self.admissible as f64 / self.samples.max(1) as f64
    }
}

/// Extract `tau`, check it, then check itineraries of sampled Julia points
/// for admissibility in `D_tau` to `depth`.
pub fn crosscheck(
    param: ComplexParam,
    partition: PartitionSpec,
    depth: usize,
    samples: usize,
    seed: u64,
) -> Result<CrosscheckReport> {
    let tau = extract_kneading(param, partition, depth)?;
    let acceptability = is_lambda_acceptable(&tau, depth)?;
    let class = classify(&tau, depth)?.name().to_string();
    let mut report = CrosscheckReport {
        tau: tau.clone(),
        acceptability: acceptability.clone(),
        class,
        samples,
        admissible: 0,
        failures: Vec::new(),
    };
    if !acceptability.verdict {
        report.failures.push((0, format!("tau {tau} is not acceptable: {acceptability}")));
        return Ok(report);
    }
    let space = DendriteSpace::new(tau, depth)?;
    let len = depth + 1 + ITINERARY_MARGIN;
    let start = INVERSE_BURN_IN.max(len);
    let chain = inverse_chain(param, start + samples, seed);
    for k in 0..samples {
        let j = start + k;
        let word: Vec<Symbol> = (0..len).map(|m| partition.symbol(chain[j - m])).collect();
        let x = SymSeq::from_finite(FiniteWord::new(word))?;
        match is_admissible(&x, &space, depth) {
            Ok(r) if r.verdict && r.unresolved.is_none() => report.admissible += 1,
            Ok(r) => report.failures.push((k, format!("{x}: {r}"))),
            Err(e) => report.failures.push((k, format!("{x}: {e}"))),
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::seq;

    fn param(re: f64, im: f64) -> ComplexParam {
        ComplexParam::with_default_tolerance(Complex64::new(re, im))
    }

    #[test]
    fn orbit_of_zero_is_fixed() {
        let o = iterate_orbit(param(0.0, 0.0), 20).unwrap();
        assert_eq!((o.preperiod, o.period, o.escaped_at), (Some(0), Some(1), None));
        assert_eq!(classify_orbit(&o, 1e-9), Misiurewicz::PeriodicCritical { period: 1 });
    }

    #[test]
    fn orbit_of_i() {
        let o = iterate_orbit(param(0.0, 1.0), 20).unwrap();
        assert_eq!(o.samples[1], Complex64::new(0.0, 1.0));
        assert_eq!(o.samples[2], Complex64::new(-1.0, 1.0));
        assert_eq!(o.samples[3], Complex64::new(0.0, -1.0));
        assert_eq!((o.preperiod, o.period), (Some(1), Some(2)));
        assert_eq!(
            misiurewicz_detect(param(0.0, 1.0), 20).unwrap(),
            Misiurewicz::Misiurewicz { preperiod: 1, period: 2 }
        );
    }

    #[test]
    fn escaping_and_generic_parameters() {
        let o = iterate_orbit(param(3.0, 0.0), 20).unwrap();
        assert_eq!(o.escaped_at, Some(1));
        assert_eq!(misiurewicz_detect(param(3.0, 0.0), 20).unwrap(), Misiurewicz::Escapes { at: 1 });
        let v = misiurewicz_detect(param(0.3, 0.5), 500).unwrap();
        assert_eq!(v, Misiurewicz::Undecided);
        let o = iterate_orbit(param(0.3, 0.5), 500).unwrap();
        assert_eq!(o.period, Some(4));
        // c = -2: 0 -> -2 -> 2 -> 2
        assert_eq!(
            misiurewicz_detect(param(-2.0, 0.0), 20).unwrap(),
            Misiurewicz::Misiurewicz { preperiod: 1, period: 1 }
        );
        assert!(iterate_orbit(param(0.0, 0.0), 0).is_err());
    }

    #[test]
    fn partition_separates_preimages() {
        let p = PartitionSpec::for_c_equals_i();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let z = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            if z.norm() > p.star_tolerance && p.side(z) != 0.0 {
                assert_ne!(p.symbol(z), p.symbol(-z));
            }
        }
        assert_eq!(p.symbol(Complex64::new(0.0, 1e-9)), Symbol::Star);
    }

    #[test]
    fn kneading_of_i() {
        let tau = extract_kneading(param(0.0, 1.0), PartitionSpec::for_c_equals_i(), 20).unwrap();
        assert_eq!(tau.literal().unwrap(), "1[10]");
        assert!(is_lambda_acceptable(&tau, 30).unwrap().verdict);
        let (pre, _) = tau.exact_shape().unwrap();
        assert!(pre >= 1);
        // the mirror labelling is the same dendrite
        let flipped = PartitionSpec::new(FRAC_PI_4 + std::f64::consts::PI, 1e-6).unwrap();
        let t2 = extract_kneading(param(0.0, 1.0), flipped, 20).unwrap();
        assert_eq!(t2.literal().unwrap(), "0[01]");
    }

    #[test]
    fn kneading_needs_misiurewicz() {
        let p = PartitionSpec::for_c_equals_i();
        assert!(matches!(extract_kneading(param(0.0, 0.0), p, 20), Err(Error::NotMisiurewicz(_))));
    }

    #[test]
    fn ambiguous_partition_is_reported() {
        // the line along -1 + i passes through z_2
        let p = PartitionSpec::new(3.0 * FRAC_PI_4, 1e-6).unwrap();
        assert!(matches!(
            extract_kneading(param(0.0, 1.0), p, 20),
            Err(Error::PartitionAmbiguity { index: 2, .. })
        ));
    }

    #[test]
    fn samples_lie_on_julia_sets() {
        let s = sample_julia(param(0.0, 0.0), 500, 3).unwrap();
        assert!(s.iter().all(|z| (z.norm() - 1.0).abs() < 1e-9));
        let s = sample_julia(param(0.0, 1.0), 500, 3).unwrap();
        assert!(s.iter().all(|z| z.norm() <= 2.0));
        assert_eq!(s, sample_julia(param(0.0, 1.0), 500, 3).unwrap());
        assert_ne!(s, sample_julia(param(0.0, 1.0), 500, 4).unwrap());
    }

    #[test]
    fn render_unit_disc() {
        let spec = ImageSpec::square(64, 4.0, 100);
        let img = render(param(0.0, 0.0), &spec).unwrap();
        let (x, y) = spec.pixel_of(Complex64::new(0.5, 0.0)).unwrap();
        assert_eq!(img.at(x, y), 100);
        let (x, y) = spec.pixel_of(Complex64::new(3.0, 0.0)).unwrap();
        assert!(img.at(x, y) <= 1);
        assert_eq!(img, render(param(0.0, 0.0), &spec).unwrap());
    }

    #[test]
    fn ppm_round_trip() {
        let spec = ImageSpec {
            width: 17,
            height: 9,
            re: (-1.5, 1.5),
            im: (-1.5, 1.5),
            max_iter: 60,
        };
        let img = render(param(0.0, 1.0), &spec).unwrap();
        let bytes = write_ppm(&img);
        let ppm = read_ppm(&bytes).unwrap();
        assert_eq!((ppm.width, ppm.height), (17, 9));
        let gray: Vec<u8> = ppm.rgb.chunks(3).map(|c| c[0]).collect();
        assert_eq!(gray, img.gray());
        assert_eq!(ppm.to_bytes(), bytes);
        assert!(read_ppm(b"P5\n1 1\n255\n\0").is_err());
        assert!(read_ppm(b"P6\n2 1\n255\n\0\0\0").is_err());
    }

    #[test]
    fn crosscheck_for_i() {
        let r = crosscheck(param(0.0, 1.0), PartitionSpec::for_c_equals_i(), 15, 200, 0).unwrap();
        assert!(r.acceptability.verdict);
        assert_eq!(r.tau.exact_eq(&seq("1[10]")), Some(true));
        assert!(r.admissible_rate() >= 0.95, "{:?}", &r.failures[..r.failures.len().min(5)]);
    }

    #[test]
    fn wrong_angle_is_detected() {
        let p = PartitionSpec::new(FRAC_PI_4 + std::f64::consts::FRAC_PI_2, 1e-6).unwrap();
        match crosscheck(param(0.0, 1.0), p, 15, 200, 0) {
            Ok(r) => assert!(!r.acceptability.verdict || r.admissible_rate() < 0.95, "{r:?}"),
            Err(e) => assert!(matches!(e, Error::PartitionAmbiguity { .. }), "{e}"),
        }
        assert!(crosscheck(param(0.0, 0.0), PartitionSpec::for_c_equals_i(), 15, 10, 0).is_err());
    }
}
