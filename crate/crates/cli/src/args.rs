use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "incompat",
    version,
    about = "Measurement incompatibility, truncation, coexistence and steering analyses"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Seed for every randomised step; recorded in the report.
    #[arg(long, global = true, env = "INCOMPAT_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Worker threads for sample and seed loops (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Relative duality gap accepted by the SDP solver.
    #[arg(long, global = true)]
    pub gap_tol: Option<f64>,

    /// Relative primal/dual residual accepted by the SDP solver.
    #[arg(long, global = true)]
    pub residual_tol: Option<f64>,

    /// Threshold on the identity shift below which a feasibility SDP is infeasible.
    #[arg(long, global = true)]
    pub feas_tol: Option<f64>,

    /// Interior-point iteration cap.
    #[arg(long, global = true)]
    pub sdp_max_iters: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Depolarising robustness η of an assemblage.
    Robustness(AssemblageSource),
    /// Joint-measurability feasibility with a parent POVM.
    Jm(AssemblageSource),
    /// Optimal incompatibility witness.
    Witness(AssemblageSource),
    /// Coexistence of a pair of POVMs, compared with joint measurability.
    Coexistence(AssemblageSource),
    /// Seesaw search for coexistent but incompatible pairs.
    Seesaw(SeesawArgs),
    /// Truncate an assemblage to a subspace.
    Truncate(TruncateArgs),
    /// Classify an assemblage over its n-dimensional truncations.
    Classify(ClassifyArgs),
    /// Steering analyses.
    #[command(subcommand)]
    Steering(SteeringCommand),
    /// The Peres bound-entangled family.
    #[command(subcommand)]
    Peres(PeresCommand),
    /// Monte Carlo check of the Haar subspace integral identities.
    Integrals(IntegralArgs),
    /// Truncation of two qutrit MUBs to a plane that merges them.
    MubCheck,
    /// Write the builtin corpus as JSON files.
    #[command(hide = true)]
    ExportCorpus {
        #[arg(long, default_value = "corpus")]
        dir: PathBuf,
    },
}

#[derive(Args, Debug, Clone)]
pub struct AssemblageSource {
    /// Assemblage JSON file.
    #[arg(
        long,
        short,
        conflicts_with = "builtin",
        required_unless_present = "builtin"
    )]
    pub input: Option<PathBuf>,
    /// Builtin assemblage key.
    #[arg(long)]
    pub builtin: Option<String>,
}

#[derive(Args, Debug)]
pub struct SeesawArgs {
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    #[arg(long, default_value_t = 2)]
    pub ma: usize,
    #[arg(long, default_value_t = 3)]
    pub mb: usize,
    /// Number of random starting pairs.
    #[arg(long, default_value_t = 500)]
    pub seeds: usize,
    #[arg(long, default_value_t = 200)]
    pub max_iters: usize,
}

#[derive(Args, Debug)]
pub struct TruncateArgs {
    #[command(flatten)]
    pub source: AssemblageSource,
    /// Projector JSON file (`{"matrix": ...}` or `{"vectors": [...]}`).
    #[arg(long, conflicts_with_all = ["builtin_projector", "span"])]
    pub projector: Option<PathBuf>,
    #[arg(long, conflicts_with = "span")]
    pub builtin_projector: Option<String>,
    /// Computational basis indices spanning the subspace, e.g. `0,1`.
    #[arg(long, value_delimiter = ',')]
    pub span: Option<Vec<usize>>,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub source: AssemblageSource,
    /// Subspace dimension.
    #[arg(long)]
    pub n: usize,
    /// Haar-random subspaces in addition to the structured probes.
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
}

#[derive(Args, Debug, Clone)]
pub struct StateSource {
    /// Bipartite state JSON file.
    #[arg(
        long,
        conflicts_with = "builtin_state",
        required_unless_present = "builtin_state"
    )]
    pub state: Option<PathBuf>,
    #[arg(long)]
    pub builtin_state: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct MeasurementSource {
    /// Alice's measurements (assemblage JSON file).
    #[arg(
        long,
        conflicts_with = "builtin_measurements",
        required_unless_present = "builtin_measurements"
    )]
    pub measurements: Option<PathBuf>,
    #[arg(long)]
    pub builtin_measurements: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct SteeringInput {
    /// State assemblage JSON file (`{"sigmas": [[...]]}`).
    #[arg(long, conflicts_with_all = ["state", "builtin_state", "measurements", "builtin_measurements"])]
    pub assemblage: Option<PathBuf>,
    #[arg(long, conflicts_with = "builtin_state")]
    pub state: Option<PathBuf>,
    #[arg(long)]
    pub builtin_state: Option<String>,
    #[arg(long, conflicts_with = "builtin_measurements")]
    pub measurements: Option<PathBuf>,
    #[arg(long)]
    pub builtin_measurements: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum SteeringCommand {
    /// Local hidden state model feasibility.
    Lhs(SteeringInput),
    /// Pretty-good measurements of a state assemblage and their robustness.
    PrettyGood(SteeringInput),
    /// Apply the Choi channel of a state to Alice's measurements.
    Choi {
        #[command(flatten)]
        state: StateSource,
        #[command(flatten)]
        measurements: MeasurementSource,
    },
}

#[derive(Subcommand, Debug)]
pub enum PeresCommand {
    /// Build the state at one parameter point and analyse it.
    Construct {
        #[arg(long)]
        m1: f64,
        #[arg(long)]
        m2: f64,
    },
    /// Scan the admissible parameter grid for steerable points.
    Scan {
        #[arg(long, default_value_t = 0.02)]
        step: f64,
    },
}

#[derive(Args, Debug)]
pub struct IntegralArgs {
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 20000)]
    pub samples: usize,
}
