mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use report::Report;

#[derive(Parser, Debug)]
#[command(name = "dendrite", version, about = "Itinerary spaces of dendrite maps at finite depth")]
pub struct Cli {
    /// Omit the leading timestamp line.
    #[arg(long, global = true)]
    pub no_timestamp: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct TauArgs {
    /// Kneading sequence literal such as "[10*]", or "pd" for period doubling.
    #[arg(long)]
    pub tau: String,
    /// Depth for acceptability and classification of generated sequences.
    #[arg(long, default_value_t = 20_000)]
    pub depth: usize,
}

#[derive(Args, Debug, Clone)]
pub struct EpsArgs {
    /// eps = 2^-N.
    #[arg(long, conflicts_with = "eps")]
    pub eps_exp: Option<usize>,
    /// Decimal eps, floored to a dyadic scale.
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check that tau is Lambda-acceptable.
    CheckTau(TauArgs),
    /// Classify tau as periodic, non-recurrent or recurrent.
    ClassifyTau(TauArgs),
    /// Cylinder proximity of two points.
    Distance {
        #[command(flatten)]
        tau: TauArgs,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long, default_value_t = 64)]
        cap: usize,
    },
    /// Test x ≃ y for two words of equal length.
    Simeq {
        #[command(flatten)]
        tau: TauArgs,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Generate or check delta pseudo-orbits.
    #[command(subcommand)]
    Orbit(OrbitCommand),
    /// N_delta for a given eps.
    DeltaForEps {
        #[command(flatten)]
        tau: TauArgs,
        #[command(flatten)]
        eps: EpsArgs,
    },
    /// Canonical shadow of an orbit file, filled and verified.
    Shadow {
        #[arg(long)]
        file: PathBuf,
        #[command(flatten)]
        eps: EpsArgs,
        /// all-zero, all-one, prefer-orbit or random[:seed].
        #[arg(long, default_value = "all-zero")]
        policy: String,
        #[arg(long, default_value_t = 20_000)]
        depth: usize,
    },
    /// Internal chain transitivity of a finite set.
    #[command(subcommand)]
    Ict(IctCommand),
    /// Omega-limit sets.
    #[command(subcommand)]
    Omega(OmegaCommand),
    /// Quadratic Julia sets.
    #[command(subcommand)]
    Julia(JuliaCommand),
    /// Run the acceptance battery.
    Battery {
        /// `key: value` config; the shipped defaults when absent.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated criterion numbers; all when absent.
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u8>,
    },
}

#[derive(Subcommand, Debug)]
pub enum OrbitCommand {
    /// Random delta pseudo-orbit, written in orbit file format.
    Gen {
        #[command(flatten)]
        tau: TauArgs,
        #[command(flatten)]
        eps: EpsArgs,
        /// delta = 2^-N directly, instead of the bound for eps.
        #[arg(long)]
        delta_exp: Option<usize>,
        #[arg(long, default_value_t = 200)]
        length: usize,
        #[arg(long, env = "DENDRITE_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.5)]
        flip_rate: f64,
        /// uniform or low-biased.
        #[arg(long, default_value = "uniform")]
        choice: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate an orbit file.
    Check {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, default_value_t = 20_000)]
        depth: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum IctCommand {
    Check {
        #[arg(long)]
        file: PathBuf,
        #[command(flatten)]
        eps: EpsArgs,
        #[arg(long, default_value_t = 20_000)]
        depth: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum OmegaCommand {
    /// A point whose omega-limit set is the given set.
    Build {
        #[arg(long)]
        file: PathBuf,
        /// Certified length of the point.
        #[arg(long, default_value_t = 10_000)]
        length: usize,
        #[arg(long, default_value_t = 20_000)]
        depth: usize,
        /// Write the point's symbols here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cluster the tail of an orbit into a finite set.
    Approx {
        #[command(flatten)]
        tau: TauArgs,
        /// Point literal, or a file of symbols written by `omega build`.
        #[arg(long)]
        z: String,
        #[command(flatten)]
        eps: EpsArgs,
        #[arg(long, default_value_t = 10_000)]
        horizon: usize,
        #[arg(long, default_value_t = 1_000)]
        burn_in: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare omega(z) with a set at resolution eps.
    Verify {
        #[arg(long)]
        file: PathBuf,
        /// Point literal or symbol file; built from the set when absent.
        #[arg(long)]
        z: Option<String>,
        #[command(flatten)]
        eps: EpsArgs,
        #[arg(long, default_value_t = 9_000)]
        horizon: usize,
        #[arg(long, default_value_t = 1_000)]
        burn_in: usize,
        #[arg(long, default_value_t = 10)]
        min_visits: usize,
        #[arg(long, default_value_t = 20_000)]
        depth: usize,
    },
}

#[derive(Args, Debug, Clone)]
pub struct ParamArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub re: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub im: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Subcommand, Debug)]
pub enum JuliaCommand {
    /// Classify the critical orbit.
    Detect {
        #[command(flatten)]
        param: ParamArgs,
        #[arg(long, default_value_t = 200)]
        steps: usize,
    },
    /// Kneading sequence through a half-plane partition.
    Kneading {
        #[command(flatten)]
        param: ParamArgs,
        /// Partition angle in radians.
        #[arg(long, allow_negative_numbers = true, default_value_t = std::f64::consts::FRAC_PI_4)]
        theta: f64,
        #[arg(long, default_value_t = 1e-6)]
        star_tol: f64,
        #[arg(long, default_value_t = 20)]
        depth: usize,
        /// Also check sampled itineraries to `depth`.
        #[arg(long)]
        crosscheck: Option<usize>,
        #[arg(long, env = "DENDRITE_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Escape-time image as binary PPM.
    Render {
        #[command(flatten)]
        param: ParamArgs,
        #[arg(long, default_value_t = 512)]
        size: usize,
        #[arg(long, default_value_t = 2.0)]
        radius: f64,
        #[arg(long, default_value_t = 256)]
        max_iter: u32,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut report = Report::new(!cli.no_timestamp);
    match commands::run(cli.command, &mut report) {
        Ok(holds) => {
            print!("{report}");
            ExitCode::from(if holds { 0 } else { 1 })
        }
        Err(e) => {
            print!("{report}");
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
