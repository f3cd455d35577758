//! Library behind `qdisp`: build representations, check R-matrix identities, evaluate and
//! minimize the quantum dispersion, and emit JSON/CSV reports.

pub mod commands;
pub mod output;
pub mod state;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qdisp_core::cartan::DeformationParameter;
use qdisp_core::repn::Backend;
use qdisp_core::Error;

#[derive(Parser, Debug)]
#[command(name = "qdisp", version, about = "Quantum dispersion of states in tensor squares of U_q(g) irreps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Relation, intertwiner, Yang-Baxter, Drinfeld scalar and projector checks.
    Check(Target),
    /// Dispersion report for one state.
    Delta(DeltaArgs),
    /// Spectral decomposition of R^T R on the tensor square.
    Decompose(DecomposeArgs),
    /// Minimize the dispersion and check the minimizer characterization.
    Verify(VerifyArgs),
    /// Tabulate formula and optimizer minima over a grid of (n, q).
    Sweep(SweepArgs),
    /// Approach to the classical dispersion as q -> 1.
    Limit(LimitArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgebraArg {
    Sl2,
    Sln,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

/// One representation at one deformation parameter.
#[derive(Args, Debug, Clone)]
pub struct Target {
    #[arg(long, value_enum, default_value_t = AlgebraArg::Sl2)]
    pub algebra: AlgebraArg,
    /// Highest weight `n` for sl2 (dimension n+1); `N` of sl_N for sln.
    #[arg(long = "n", visible_alias = "rank", allow_negative_numbers = true)]
    pub n: i64,
    #[arg(long, allow_negative_numbers = true, conflicts_with = "eta", required_unless_present = "eta")]
    pub q: Option<f64>,
    /// Deformation as `q = e^eta`.
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,
}

impl Target {
    pub fn backend(&self) -> Result<Backend, Failure> {
        backend_for(self.algebra, self.n)
    }

    pub fn deformation(&self) -> Result<DeformationParameter, Failure> {
        let dp = match (self.q, self.eta) {
            (Some(q), _) => DeformationParameter::from_q(q),
            (None, Some(eta)) => DeformationParameter::from_eta(eta),
            (None, None) => return Err(Failure::Usage("one of --q or --eta is required".into())),
        };
        dp.map_err(Failure::from)
    }
}

pub fn backend_for(algebra: AlgebraArg, n: i64) -> Result<Backend, Failure> {
    match algebra {
        AlgebraArg::Sl2 if n >= 0 => Ok(Backend::Sl2Spin { n: n as usize }),
        AlgebraArg::Sl2 => Err(Failure::Usage(format!("sl2 highest weight must be a non-negative integer, got {n}"))),
        AlgebraArg::Sln if n >= 2 => Ok(Backend::SlnFundamental { n: n as usize }),
        AlgebraArg::Sln => Err(Failure::Usage(format!("sl_N needs N >= 2, got {n}"))),
    }
}

#[derive(Args, Debug)]
pub struct DeltaArgs {
    #[command(flatten)]
    pub target: Target,
    /// `highest`, `lowest`, `random`, or comma-separated amplitudes (`re` or `re+imj`).
    #[arg(long, default_value = "highest", allow_hyphen_values = true)]
    pub state: String,
    /// Seed for `--state random`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub target: Target,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub target: Target,
    #[arg(long, default_value_t = 64)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Text verdict by default; `json` for a machine-readable one.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Debug fault injection: perturb one entry of R before verifying.
    #[arg(long)]
    pub corrupt_r: bool,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long, value_enum, default_value_t = AlgebraArg::Sl2)]
    pub algebra: AlgebraArg,
    /// Comma-separated list of highest weights (sl2) or N values (sln).
    #[arg(long = "n", visible_alias = "rank", value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub n: Vec<i64>,
    /// Explicit comma-separated q grid; overrides the range options.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub q: Vec<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub q_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub q_max: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub q_count: usize,
    #[arg(long, value_enum, default_value_t = Spacing::Linear)]
    pub q_spacing: Spacing,
    #[arg(long, default_value_t = 64)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Append the classical minimum and the distance of the formula to it.
    #[arg(long)]
    pub with_classical: bool,
    /// Fill `wall_ms`; otherwise it is 0 so output stays reproducible.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Args, Debug)]
pub struct LimitArgs {
    #[arg(long, value_enum, default_value_t = AlgebraArg::Sl2)]
    pub algebra: AlgebraArg,
    #[arg(long = "n", visible_alias = "rank", allow_negative_numbers = true)]
    pub n: i64,
    #[arg(long, default_value = "random", allow_hyphen_values = true)]
    pub state: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Values of eta = ln q.
    #[arg(long, value_delimiter = ',', default_value = "1e-2,1e-3,1e-4", allow_negative_numbers = true)]
    pub eps: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Exit-code classes.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Verification(String),
    Numerical(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Verification(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Verification(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::ClassicalMode
            | Error::NearClassical { .. }
            | Error::InvalidDeformation(_)
            | Error::NotDominant(_)
            | Error::InvalidParameter(_)
            | Error::DimensionMismatch { .. }
            | Error::UnknownGenerator(_) => Failure::Usage(msg),
            Error::Intertwiner { .. } | Error::NotScalar { .. } | Error::Decomposition(_) => Failure::Verification(msg),
            Error::DegenerateSpectrum { .. } | Error::Numerical(_) | Error::NonConvergence { .. } => {
                Failure::Numerical(msg)
            }
        }
    }
}

/// Result of one invocation: bytes for stdout, an error message, and the exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Invocation {
    pub stdout: Vec<u8>,
    pub stderr: String,
    pub code: u8,
}

/// Runs a parsed command, collecting stdout-bound output in memory.
pub fn execute(cli: &Cli) -> Invocation {
    let mut out = String::new();
    let run = match &cli.command {
        Command::Check(a) => commands::check(a, &mut out),
        Command::Delta(a) => commands::delta(a, &mut out),
        Command::Decompose(a) => commands::decompose(a, &mut out),
        Command::Verify(a) => commands::verify(a, &mut out),
        Command::Sweep(a) => commands::sweep(a, &mut out),
        Command::Limit(a) => commands::limit(a, &mut out),
    };
    let (stderr, code) = match run {
        Ok(()) => (String::new(), 0),
        Err(f) => (format!("error: {}\n", f.message()), f.code()),
    };
    Invocation { stdout: out.into_bytes(), stderr, code }
}

/// Parses `args` (program name first) and runs them. Parse errors give exit 1;
/// `--help` and `--version` give exit 0.
pub fn run<I, T>(args: I) -> Invocation
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli),
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                Invocation { stdout: text.into_bytes(), stderr: String::new(), code }
            } else {
                Invocation { stdout: Vec::new(), stderr: text, code }
            }
        }
    }
}
