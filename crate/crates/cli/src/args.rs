use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use pu_core::dynamics::Potential;
use pu_core::symmetry::GeneratorId;
use pu_core::transform::TransformKind;
use pu_core::PuParams;

#[derive(Debug, Parser)]
#[command(name = "pu", version, about = "Pais-Uhlenbeck oscillator: structures, transforms and verification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every verification suite and emit a JSON report.
    Verify(Common),
    /// Coefficients of H1..Hn on (H1, H2) and the polynomials Pn.
    Hierarchy {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u16).range(1..=64))]
        n: u16,
    },
    /// Build a catalog transformation and report its spec, pullback and brackets.
    Transform {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        free: TransformArgs,
    },
    /// Sample group-flow curves along a classical solution.
    Flow {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_generator)]
        generator: GeneratorId,
        /// Group parameter; may be repeated.
        #[arg(long = "s", allow_negative_numbers = true, default_value = "1")]
        s: Vec<f64>,
        #[command(flatten)]
        amps: AmplitudeArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Integrate the equation of motion with RK4 and export the trajectory.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        amps: AmplitudeArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Interaction, e.g. `quartic:lambda=0.5,arg=q`.
        #[arg(long, value_parser = parse_potential)]
        potential: Option<Potential>,
    },
    /// Solve for all compatible Poisson structures of the flow.
    Discover(Common),
}

#[derive(Debug, Clone, Args)]
#[command(group(ArgGroup::new("params").args(["alpha", "omega1"]).required(true).multiple(false)))]
pub struct ParamArgs {
    #[arg(long, allow_negative_numbers = true, requires = "beta")]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true, requires = "alpha")]
    pub beta: Option<f64>,
    #[arg(long, allow_negative_numbers = true, requires = "omega2")]
    pub omega1: Option<f64>,
    #[arg(long, allow_negative_numbers = true, requires = "omega1")]
    pub omega2: Option<f64>,
}

impl ParamArgs {
    pub fn resolve(&self) -> pu_core::Result<PuParams> {
        match (self.alpha, self.beta, self.omega1, self.omega2) {
            (Some(a), Some(b), None, None) => PuParams::new(a, b),
            (None, None, Some(w1), Some(w2)) => PuParams::from_frequencies(w1, w2),
            _ => Err(pu_core::PuError::InvalidInput(
                "give exactly one of --alpha/--beta or --omega1/--omega2".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, env = "PU_TOL", default_value_t = 1e-9, value_parser = parse_tol)]
    pub tol: f64,
    /// Write to this file instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct TransformArgs {
    /// One of Ta1+, Ta1-, Ta2+, Ta2-, Tb1, Tb2+, Tb2-.
    #[arg(long, value_parser = parse_kind)]
    pub kind: TransformKind,
    #[arg(long = "a-x", allow_negative_numbers = true)]
    pub a_x: Option<f64>,
    #[arg(long = "a-y", allow_negative_numbers = true)]
    pub a_y: Option<f64>,
    #[arg(long = "b-x", allow_negative_numbers = true)]
    pub b_x: Option<f64>,
    #[arg(long = "b-y", allow_negative_numbers = true)]
    pub b_y: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub g: f64,
    /// Coefficients of the induced structure c1 J1 + c2 J2.
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    pub c1: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub c2: f64,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct AmplitudeArgs {
    #[arg(long = "A1", allow_negative_numbers = true, default_value_t = 0.0)]
    pub a1: f64,
    #[arg(long = "A2", allow_negative_numbers = true, default_value_t = 0.0)]
    pub a2: f64,
    #[arg(long = "B1", allow_negative_numbers = true, default_value_t = 0.0)]
    pub b1: f64,
    #[arg(long = "B2", allow_negative_numbers = true, default_value_t = 0.0)]
    pub b2: f64,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 1e-2)]
    pub h: f64,
    #[arg(long = "t-end", default_value_t = 10.0)]
    pub t_end: f64,
}

fn parse_tol(s: &str) -> Result<f64, String> {
    let t: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if t > 0.0 && t.is_finite() {
        Ok(t)
    } else {
        Err("tol must be positive and finite".into())
    }
}

fn parse_kind(s: &str) -> Result<TransformKind, String> {
    s.parse().map_err(|e: pu_core::PuError| e.to_string())
}

fn parse_generator(s: &str) -> Result<GeneratorId, String> {
    s.parse().map_err(|e: pu_core::PuError| e.to_string())
}

fn parse_potential(s: &str) -> Result<Potential, String> {
    s.parse().map_err(|e: pu_core::PuError| e.to_string())
}
