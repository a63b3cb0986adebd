//! Command-line interface definition and dispatch.

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::{cmd_cont, cmd_fit, cmd_local, cmd_op, pipeline};

/// Result of a command that can end without a decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Done,
    Undecided,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Done => 0,
            Outcome::Undecided => 2,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "odeforge", version, about = "Reconstruct, factor and continue Fuchsian operators from series data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Minimal-order annihilator of a series.
    Guess(GuessArgs),
    /// Joint fit L(s) = Σ Q_t B_t against a right-hand-side ansatz.
    GuessInhom(GuessInhomArgs),
    /// Extends a seed series with an operator's recurrence.
    Extend(ExtendArgs),
    /// Unknown count of a fit: (M+1)(D+1) + nb(Dr+1).
    Budget {
        order: usize,
        degree: usize,
        #[arg(default_value_t = 0)]
        n_bases: usize,
        #[arg(default_value_t = 0)]
        rhs_degree: usize,
    },
    /// Symmetric-range CRT lift of residue sets.
    Crt(CrtArgs),
    /// Rational reconstruction of residue sets.
    Ratrec(ResidueArgs),
    /// Quadratic fit of coefficient sizes and the predicted prime count.
    EstimatePrimes(EstimateArgs),
    /// Operator algebra.
    #[command(subcommand)]
    Op(OpCommand),
    /// Formal log-solution basis at a point.
    Frobenius(FrobeniusArgs),
    /// Right-factor probe of a log solution.
    Probe(ProbeArgs),
    /// Right factors at accidental roots of a head factor modulo primes.
    Acroot(AcrootArgs),
    /// Connection matrix between the bases at two points.
    Match(MatchArgs),
    /// Analytic continuation along a path with windings.
    Continue(ContinueArgs),
    /// Euler transformation y → y/(1 − βy) of a series.
    Euler(EulerArgs),
    /// Ratio-test radius of convergence.
    Radius(RadiusArgs),
    /// Rational limit of a converging sequence by continued fractions.
    CfDetect(CfArgs),
    /// Amplitude of a (1 − w/w_s)^γ singularity from series coefficients.
    Amplitude(AmplitudeArgs),
    /// Matching point balancing two truncation errors.
    Optmatch(OptmatchArgs),
    /// Denominator digit growth of an exact series.
    DenomProfile(DenomArgs),
    /// End-to-end pipelines driven by a TOML config.
    Pipeline {
        kind: PipelineKind,
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum PipelineKind {
    Reconstruct,
    Factor,
}

#[derive(Args, Debug)]
pub struct GuessArgs {
    #[arg(long)]
    pub series: PathBuf,
    #[arg(long)]
    pub max_order: usize,
    #[arg(long)]
    pub max_degree: usize,
    #[arg(long, default_value_t = odeforge_core::guess::DEFAULT_MARGIN)]
    pub margin: usize,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GuessInhomArgs {
    #[arg(long)]
    pub series: PathBuf,
    #[arg(long)]
    pub max_order: usize,
    #[arg(long)]
    pub max_degree: usize,
    /// `elliptic:kappa=<k>` or a comma-separated list of series files.
    #[arg(long)]
    pub bases: String,
    #[arg(long, default_value_t = 0)]
    pub rhs_degree: usize,
    #[arg(long, default_value_t = odeforge_core::guess::DEFAULT_MARGIN)]
    pub margin: usize,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ExtendArgs {
    #[arg(long)]
    pub op: PathBuf,
    #[arg(long)]
    pub seed: PathBuf,
    #[arg(long)]
    pub to: usize,
    /// Right-hand-side coefficients e_n.
    #[arg(long)]
    pub rhs: Option<PathBuf>,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ResidueArgs {
    /// TSV lines `index prime residue`.
    #[arg(long = "in")]
    pub input: PathBuf,
}

#[derive(Args, Debug)]
pub struct CrtArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Strip a power of two up to 2^k before lifting.
    #[arg(long)]
    pub pow2: Option<u32>,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    /// Lines `n c_n` with lifted rational coefficients.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value = "quadratic")]
    pub fit: String,
    #[arg(long)]
    pub horizon: usize,
    #[arg(long, default_value_t = 2)]
    pub headroom: u64,
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum OpCommand {
    /// Product a·b.
    Mul { a: PathBuf, b: PathBuf },
    /// Right division g·l = q·r + rem.
    Divr { l: PathBuf, r: PathBuf },
    Adjoint { op: PathBuf },
    /// Applies an operator to a series.
    Apply { op: PathBuf, series: PathBuf },
    /// p-curvature class: zero, nilpotent or neither.
    Pcurv {
        op: PathBuf,
        /// Primes for an exact operator.
        #[arg(long, value_delimiter = ',')]
        primes: Vec<u64>,
    },
    /// First-order annihilator of num/den.
    AnnRational {
        #[arg(long)]
        num: String,
        #[arg(long, default_value = "1")]
        den: String,
    },
    /// Block-scheme feasibility of a symmetric decomposition.
    Blocks {
        /// `point=scheme`, e.g. `0=2*BL3+2*BL1`; repeat per point.
        #[arg(long = "scheme", required = true)]
        schemes: Vec<String>,
        /// Factor orders, e.g. `3,4`, or the base order for a power.
        #[arg(long, value_delimiter = ',')]
        config: Vec<usize>,
        /// `product` or `power:<n>`.
        #[arg(long, default_value = "product")]
        mode: String,
    },
}

#[derive(Args, Debug)]
pub struct FrobeniusArgs {
    #[arg(long)]
    pub op: PathBuf,
    /// `0`, `1/4`, `inf` or `modp:<w_p>`.
    #[arg(long)]
    pub at: String,
    #[arg(long, default_value_t = odeforge_core::localfrob::DEFAULT_DEPTH_BUDGET)]
    pub depth: usize,
    #[arg(long, default_value_t = 30)]
    pub terms: usize,
    /// Directory receiving one `.lsol` file per solution; stdout otherwise.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ProbeArgs {
    #[arg(long)]
    pub sol: PathBuf,
    #[arg(long)]
    pub max_order: usize,
    #[arg(long)]
    pub max_degree: Option<usize>,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AcrootArgs {
    #[arg(long)]
    pub op: PathBuf,
    /// Irreducible head factor, e.g. `1+3*w+4*w^2`.
    #[arg(long)]
    pub h: String,
    #[arg(long, value_delimiter = ',')]
    pub primes: Vec<u64>,
    #[arg(long, default_value_t = 240)]
    pub order_budget: usize,
}

#[derive(Args, Debug)]
pub struct MatchArgs {
    #[arg(long)]
    pub op: PathBuf,
    #[arg(long)]
    pub from: String,
    #[arg(long)]
    pub to: String,
    #[arg(long, default_value_t = 30)]
    pub digits: usize,
    #[arg(long)]
    pub terms: Option<usize>,
    #[arg(long)]
    pub midpoint: Option<String>,
}

#[derive(Args, Debug)]
pub struct ContinueArgs {
    #[arg(long)]
    pub op: PathBuf,
    /// Starting point of the solution.
    #[arg(long, default_value = "0")]
    pub start: String,
    /// Exact series at the start whose coordinates are continued.
    #[arg(long, conflicts_with = "coords")]
    pub series: Option<PathBuf>,
    /// Coordinates in the start basis, one value per line.
    #[arg(long)]
    pub coords: Option<PathBuf>,
    /// Legs `center:param=winding` separated by `;`.
    #[arg(long)]
    pub path: String,
    #[arg(long)]
    pub to: String,
    #[arg(long, default_value_t = 20)]
    pub digits: usize,
    /// Sweep the winding of this parameter over `--values`.
    #[arg(long, requires = "values")]
    pub sweep: Option<String>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub values: Vec<i64>,
}

#[derive(Args, Debug)]
pub struct EulerArgs {
    #[arg(long)]
    pub series: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: String,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RadiusArgs {
    #[arg(long)]
    pub series: PathBuf,
    /// Index window `a:b`.
    #[arg(long)]
    pub window: Option<String>,
}

#[derive(Args, Debug)]
pub struct CfArgs {
    /// One value per line (rational, decimal or `x@digits`).
    #[arg(long = "in")]
    pub input: PathBuf,
}

#[derive(Args, Debug)]
pub struct AmplitudeArgs {
    #[arg(long)]
    pub series: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub exponent: String,
    /// Singular point w_s.
    #[arg(long)]
    pub at: String,
    #[arg(long, default_value_t = 0)]
    pub log_depth: usize,
    #[arg(long, default_value_t = 3)]
    pub corrections: usize,
    /// Working precision for exact input.
    #[arg(long, default_value_t = 60)]
    pub prec: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Linear,
    Sqrt,
}

#[derive(Args, Debug)]
pub struct OptmatchArgs {
    #[arg(long = "Nw")]
    pub n_w: f64,
    #[arg(long = "Ny")]
    pub n_y: f64,
    #[arg(long, default_value_t = 0.183)]
    pub r: f64,
    #[arg(long, value_enum, default_value_t = Mode::Linear)]
    pub mode: Mode,
}

#[derive(Args, Debug)]
pub struct DenomArgs {
    #[arg(long)]
    pub series: PathBuf,
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

pub fn dispatch(cli: Cli) -> Result<Outcome> {
    use Command::*;
    match cli.command {
        Guess(a) => cmd_fit::guess(a),
        GuessInhom(a) => cmd_fit::guess_inhom(a),
        Extend(a) => cmd_fit::extend(a),
        Budget { order, degree, n_bases, rhs_degree } => {
            println!("{}", odeforge_core::guess::budget(order, degree, n_bases, rhs_degree));
            Ok(Outcome::Done)
        }
        Crt(a) => cmd_fit::crt(a),
        Ratrec(a) => cmd_fit::ratrec(a),
        EstimatePrimes(a) => cmd_fit::estimate(a),
        Op(c) => cmd_op::run(c),
        Frobenius(a) => cmd_local::frobenius(a),
        Probe(a) => cmd_local::probe(a),
        Acroot(a) => cmd_local::acroot(a),
        Match(a) => cmd_cont::matching(a),
        Continue(a) => cmd_cont::continuation(a),
        Euler(a) => cmd_cont::euler(a),
        Radius(a) => cmd_cont::radius(a),
        CfDetect(a) => cmd_cont::cf_detect(a),
        Amplitude(a) => cmd_cont::amplitude(a),
        Optmatch(a) => cmd_cont::optmatch(a),
        DenomProfile(a) => cmd_cont::denom(a),
        Pipeline { kind, config } => pipeline::run_from_file(kind, &config),
    }
}
