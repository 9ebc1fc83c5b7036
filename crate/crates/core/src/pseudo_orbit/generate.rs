use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DeltaPseudoOrbit, DeltaScale};
use crate::error::{Error, Result};
use crate::symbolic::{is_admissible, DendriteSpace, SymSeq, Symbol};

fn random_bits<R: Rng>(rng: &mut R, len: usize) -> Vec<Symbol> {
    (0..len).map(|_| Symbol::from_bit(rng.gen())).collect()
}

/// `y` passes consistency and admissibility to `depth`. Exact inputs against
/// an exact `tau` are decided outright.
fn admissible(y: &SymSeq, space: &DendriteSpace, depth: usize) -> Result<bool> {
    match is_admissible(y, space, depth) {
        Ok(r) => Ok(r.verdict && r.unresolved.is_none()),
        Err(Error::Inconsistent { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

/// A random star-free eventually periodic point of `D_tau`.
pub fn random_admissible_point<R: Rng>(space: &DendriteSpace, rng: &mut R) -> Result<SymSeq> {
    for _ in 0..10_000 {
        let pre = rng.gen_range(0..=8);
        let per = rng.gen_range(1..=8);
        let x = SymSeq::exact(random_bits(rng, pre), random_bits(rng, per))?;
        if admissible(&x, space, 64)? {
            return Ok(x);
        }
    }
    Err(Error::Insufficient("no admissible point found in 10000 draws".into()))
}

/// Columns `c <= n` at which a flip can be planted into `s`: those with
/// `s_{c+1} .. s_n` matching `tau_0 .. tau_{n-c-1}` (stars in `tau` match
/// anything).
pub fn legal_flip_columns(space: &DendriteSpace, s: &SymSeq, n: usize) -> Result<Vec<usize>> {
    let tau = space.tau_prefix(n)?;
    let w = s.window(0, n + 1)?;
    if tau.iter().any(|t| t.is_star()) {
        return Ok((0..=n)
            .filter(|&c| (c + 1..=n).all(|q| w[q].matches(tau[q - c - 1])))
            .collect());
    }
    // Star-free tau: suffixes of the window that are prefixes of tau, read
    // off a Z-function of tau # window.
    let code = |x: Symbol| x as u8;
    let mut text: Vec<u8> = tau.iter().map(|&x| code(x)).collect();
    text.push(u8::MAX);
    text.extend(w.iter().map(|&x| code(x)));
    let z = z_bytes(&text);
    let base = tau.len() + 1;
    Ok((0..=n)
        .filter(|&c| c == n || z[base + c + 1] >= n - c)
        .collect())
}

fn z_bytes(s: &[u8]) -> Vec<usize> {
    let n = s.len();
    let mut z = vec![0; n];
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

/// Plant a flip into `s` at a legal `column`: keep `s_0 .. s_{c-1}`, change
/// the symbol at `c`, copy `tau` for `n - c + extra` symbols (its stars read
/// as `fill`), then continue with `tail`. Returns `None` when the column is
/// not legal or the result is not admissible.
pub fn plant_flip_at(
    space: &DendriteSpace,
    s: &SymSeq,
    column: usize,
    n: usize,
    fill: Symbol,
    tail: &SymSeq,
    extra: usize,
) -> Result<Option<SymSeq>> {
    if column > n {
        return Ok(None);
    }
    let tau = space.tau_prefix(n - column + extra)?;
    let w = s.window(0, n + 1)?;
    if !(column + 1..=n).all(|q| w[q].matches(tau[q - column - 1])) {
        return Ok(None);
    }
    let mut head = w[..column].to_vec();
    head.push(match w[column] {
        Symbol::Star => fill,
        x => x.flipped(),
    });
    head.extend(tau.iter().map(|&t| if t.is_star() { fill } else { t }));
    let y = tail.prepend(&head);
    if !admissible(&y, space, n + extra + 64)? {
        return Ok(None);
    }
    Ok(Some(y))
}

/// How a flip column is picked among the legal ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ColumnChoice {
    #[default]
    Uniform,
    /// The smallest legal column half of the time, else uniform. Small
    /// columns are the ones that reach the epsilon ledger.
    LowBiased,
}

/// Random flip at a legal column, retrying with fresh fills and tails;
/// `None` if every attempt fails.
pub fn plant_random_flip<R: Rng>(
    space: &DendriteSpace,
    s: &SymSeq,
    n: usize,
    choice: ColumnChoice,
    rng: &mut R,
) -> Result<Option<SymSeq>> {
    let legal = legal_flip_columns(space, s, n)?;
    for _ in 0..6 {
        let column = match choice {
            ColumnChoice::LowBiased if rng.gen() => legal[0],
            _ => legal[rng.gen_range(0..legal.len())],
        };
        let fill = Symbol::from_bit(rng.gen());
        let per = rng.gen_range(1..=6);
        let tail = SymSeq::exact(Vec::new(), random_bits(rng, per))?;
        let extra = rng.gen_range(0..=n.min(32));
        if let Some(y) = plant_flip_at(space, s, column, n, fill, &tail, extra)? {
            return Ok(Some(y));
        }
    }
    Ok(None)
}

/// Endless seeded pseudo-orbit: each step is the true successor, or with
/// probability `flip_rate` a planted flip of it.
pub struct PseudoOrbitGenerator<'a> {
    space: &'a DendriteSpace,
    n: usize,
    flip_rate: f64,
    choice: ColumnChoice,
    rng: ChaCha8Rng,
    current: Option<SymSeq>,
    /// Flips actually planted so far.
    pub flips: usize,
}

impl<'a> PseudoOrbitGenerator<'a> {
    pub fn new(space: &'a DendriteSpace, scale: DeltaScale, seed: u64, flip_rate: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&flip_rate) {
            return Err(Error::Contract(format!("flip rate {flip_rate} outside [0, 1]")));
        }
        Ok(PseudoOrbitGenerator {
            space,
            n: scale.depth(),
            flip_rate,
            choice: ColumnChoice::Uniform,
            rng: ChaCha8Rng::seed_from_u64(seed),
            current: None,
            flips: 0,
        })
    }

    pub fn with_choice(mut self, choice: ColumnChoice) -> Self {
        self.choice = choice;
        self
    }

    pub fn next_point(&mut self) -> Result<SymSeq> {
        let next = match &self.current {
            None => random_admissible_point(self.space, &mut self.rng)?,
            Some(x) => {
                let s = x.shift(1)?;
                if self.flip_rate > 0.0 && self.rng.gen_bool(self.flip_rate) {
                    match plant_random_flip(self.space, &s, self.n, self.choice, &mut self.rng)? {
                        Some(y) => {
                            self.flips += 1;
                            y
                        }
                        None => s,
                    }
                } else {
                    s
                }
            }
        };
        self.current = Some(next.clone());
        Ok(next)
    }
}

impl Iterator for PseudoOrbitGenerator<'_> {
    type Item = Result<SymSeq>;

    fn next(&mut self) -> Option<Result<SymSeq>> {
        Some(self.next_point())
    }
}

/// `length` points of a seeded random delta pseudo-orbit, validated.
pub fn random_pseudo_orbit(
    space: &DendriteSpace,
    scale: DeltaScale,
    length: usize,
    seed: u64,
    flip_rate: f64,
) -> Result<DeltaPseudoOrbit> {
    random_pseudo_orbit_with(space, scale, length, seed, flip_rate, ColumnChoice::Uniform)
}

pub fn random_pseudo_orbit_with(
    space: &DendriteSpace,
    scale: DeltaScale,
    length: usize,
    seed: u64,
    flip_rate: f64,
    choice: ColumnChoice,
) -> Result<DeltaPseudoOrbit> {
    if length == 0 {
        return Err(Error::Contract("pseudo-orbit length must be positive".into()));
    }
    let points = PseudoOrbitGenerator::new(space, scale, seed, flip_rate)?
        .with_choice(choice)
        .take(length)
        .collect::<Result<Vec<_>>>()?;
    DeltaPseudoOrbit::validate(points, scale, space)
}
