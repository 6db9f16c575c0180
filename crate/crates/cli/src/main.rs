//! `catlin`: batch front end for Catlin-metric computations on model domains.
//!
//! Exit codes: 0 success, 2 invalid domain, 3 geometric precondition failed,
//! 4 invalid parameters, 5 iteration budget exhausted (the partial result is
//! still written).

mod commands;
mod parse;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use catlin_core::Error;
use parse::InputError;

pub const EXIT_DOMAIN: u8 = 2;
pub const EXIT_GEOMETRY: u8 = 3;
pub const EXIT_PARAMS: u8 = 4;
pub const EXIT_BUDGET: u8 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "catlin", version, about = "Catlin metric, distances, scaling and hyperbolicity probes on model domains")]
pub struct Cli {
    /// Model domain: `thullen:<p>`, inline polynomial JSON, or a JSON file path
    /// (default: the Siegel domain, P = |z|²).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub domain: Option<String>,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Pattern-search sweeps allowed per distance estimate.
    #[arg(long, global = true, default_value_t = 3000)]
    pub budget: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Catlin metric of a tangent vector.
    Metric {
        /// `z_re,z_im,w_re,w_im`
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// `x_re,x_im,y_re,y_im`
        #[arg(long, allow_hyphen_values = true)]
        tangent: String,
    },
    /// Distance bracket between two points.
    Distance {
        #[arg(long, allow_hyphen_values = true)]
        p: String,
        #[arg(long, allow_hyphen_values = true)]
        q: String,
    },
    /// Optimized path between two points, one row per control point.
    GeodesicDump {
        #[arg(long, allow_hyphen_values = true)]
        p: String,
        #[arg(long, allow_hyphen_values = true)]
        q: String,
    },
    /// (A, B) quasi-geodesic check of an optimized path or a vertical ray.
    QgeoCheck {
        /// Check the optimized path from `p` to `q`, parameterized by length.
        #[arg(long, allow_hyphen_values = true, requires = "q", conflicts_with = "foot")]
        p: Option<String>,
        #[arg(long, allow_hyphen_values = true, requires = "p")]
        q: Option<String>,
        /// Boundary point of the vertical ray to check.
        #[arg(long, allow_hyphen_values = true)]
        foot: Option<String>,
        /// Ray height `a` in `(z, w − a e^{−t})`.
        #[arg(long, default_value_t = 1.0)]
        height: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        s: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 3.0)]
        t: f64,
        /// The ray is traversed as `u ↦ σ(speed · u)`.
        #[arg(long, default_value_t = 1.0)]
        speed: f64,
        /// Multiplicative constant A ≥ 1.
        #[arg(long, default_value_t = 1.0)]
        distortion: f64,
        /// Additive constant B ≥ 0.
        #[arg(long, default_value_t = 0.05)]
        offset: f64,
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// D'Angelo type of the boundary point over `z`.
    Type {
        /// `re,im`
        #[arg(long, allow_hyphen_values = true)]
        z: String,
    },
    /// Scaling step at an interior point, or a sequence approaching the boundary.
    Scale {
        #[arg(long, allow_hyphen_values = true, required_unless_present = "sequence")]
        eta: Option<String>,
        /// Comma-separated n: rescale at `(z0, −P(z0) − 1/n)`.
        #[arg(long, conflicts_with = "eta")]
        sequence: Option<String>,
        #[arg(long, allow_hyphen_values = true, default_value = "0,0")]
        z0: String,
    },
    /// `n^{−m} P(n z)` for the given values of n.
    ScaleInfinity {
        /// Comma-separated n ≥ 1.
        #[arg(long)]
        n: String,
    },
    /// Four-point δ estimate from seeded samples.
    Delta {
        #[arg(long, default_value_t = 500)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        pool: usize,
        #[arg(long, allow_hyphen_values = true, default_value = "0,0,-1,0")]
        basepoint: String,
        #[command(flatten)]
        sampler: SamplerArgs,
    },
    /// Gromov products of points on two vertical rays at several depths.
    BoundaryProduct {
        #[arg(long, allow_hyphen_values = true, default_value = "0,0,0,0")]
        foot_plus: String,
        #[arg(long, default_value_t = 1.0)]
        a_plus: f64,
        #[arg(long, allow_hyphen_values = true)]
        foot_minus: String,
        #[arg(long, default_value_t = 1.0)]
        a_minus: f64,
        #[arg(long, default_value = "1,2,3")]
        depths: String,
        /// Defaults to the midpoint of the two rays at depth 0.
        #[arg(long, allow_hyphen_values = true)]
        basepoint: Option<String>,
    },
    /// Catlin brackets against the exact Kobayashi distance of the Siegel domain.
    OracleCompare {
        #[arg(long, default_value_t = 200)]
        pairs: usize,
        #[command(flatten)]
        sampler: SamplerArgs,
    },
}

#[derive(Debug, Clone, clap::Args)]
pub struct SamplerArgs {
    /// Radius of the disk `z` is drawn from.
    #[arg(long, default_value_t = 2.0)]
    pub radius: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = -4.0)]
    pub log_depth_min: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 2.0)]
    pub log_depth_max: f64,
    /// `Im w` is drawn from `[−spread, spread]`.
    #[arg(long, default_value_t = 0.0)]
    pub im_w_spread: f64,
}

/// A failed run: exit code and message.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NonHermitian { .. }
            | Error::MalformedPolynomial(_)
            | Error::HarmonicTerm { .. }
            | Error::NonzeroConstant(_)
            | Error::NotSubharmonic { .. } => EXIT_DOMAIN,
            Error::BoundaryPoint { .. }
            | Error::NotBoundary { .. }
            | Error::NotHomogeneous { .. }
            | Error::PathExitsDomain { .. }
            | Error::DegenerateStep
            | Error::CanonicalFormViolation { .. } => EXIT_GEOMETRY,
            Error::BudgetExhausted { .. } => EXIT_BUDGET,
            Error::InvalidParameter(_) => EXIT_PARAMS,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        match e {
            InputError::Domain(message) => Self { code: EXIT_DOMAIN, message },
            InputError::Param(message) => Self { code: EXIT_PARAMS, message },
        }
    }
}

/// Text to write and the exit code to finish with.
pub struct Outcome {
    pub text: String,
    pub code: u8,
}

fn write_out(cli: &Cli, text: &str) -> std::io::Result<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARAMS } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(outcome) => {
            if let Err(e) = write_out(&cli, &outcome.text) {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(EXIT_PARAMS);
            }
            ExitCode::from(outcome.code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
