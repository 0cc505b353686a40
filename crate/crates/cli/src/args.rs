use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Odd-Cycle and CHSH nonlocal games from the command line.
#[derive(Debug, Parser)]
#[command(name = "oddcycle", version, about)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Directory for report files; without it the report only goes to stdout.
    #[arg(long, global = true, env = "ODDCYCLE_OUT")]
    pub out: Option<PathBuf>,
    /// Master seed for every randomised step [default: 42].
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to the machine's parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GameName {
    OddCycle,
    Chsh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Every pair of strategy tables.
    Exhaustive,
    /// Every Alice table against Bob's best response.
    BestResponse,
    /// Seeded local search; a lower bound.
    Search,
    /// Exact where the budget allows, otherwise search.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    All,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BlockerSearchArg {
    Exact,
    Heuristic,
}

#[derive(Debug, Args)]
pub struct GameArgs {
    #[arg(long, value_enum, default_value_t = GameName::OddCycle)]
    pub game: GameName,
    /// Cycle length; must be odd.
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Number of parallel repetitions.
    #[arg(long, default_value_t = 1)]
    pub d: u32,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classical value of a game.
    Value {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
        #[arg(long, default_value_t = 1_000_000)]
        iterations: u64,
        /// Largest number of strategy tables an exact search may visit.
        #[arg(long)]
        budget: Option<u128>,
    },
    /// Quantum winning probability of the canonical strategy and of the
    /// angle-optimised one.
    Qvalue {
        #[command(flatten)]
        game: GameArgs,
        /// Phase of the shared Bell state.
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        #[arg(long, default_value_t = 8)]
        starts: usize,
        /// ε of the approximality check.
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
    },
    /// Classical value of the repeated Odd-Cycle game with the decay diagnostic.
    Repeat {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        d: u32,
        #[arg(long, default_value_t = 1_000_000)]
        iterations: u64,
    },
    /// Consistent regions of an Alice strategy and, optionally, a grown cycle.
    Pearls {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        d: u32,
        /// Alice's answers as comma-separated integers; parity by default.
        #[arg(long, value_delimiter = ',')]
        strategy: Option<Vec<u32>>,
        /// Grow a consistent cycle on a sampled torical graph.
        #[arg(long)]
        grow: bool,
    },
    /// Minimum blocker of the torus.
    Blocker {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        d: u32,
        #[arg(long, value_enum, default_value_t = Mode::All)]
        mode: Mode,
        #[arg(long, value_enum, default_value_t = BlockerSearchArg::Exact)]
        method: BlockerSearchArg,
        #[arg(long, default_value_t = 2_000_000)]
        node_budget: u64,
    },
    /// Foam probability probes on the side-2 torus.
    Foam {
        #[arg(long, default_value_t = 2)]
        d: u32,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 3)]
        max_weight: u64,
        #[arg(long, default_value_t = 2.0)]
        constant: f64,
    },
    /// Rademacher diamond norm of a vector with its sandwich bounds.
    Norms {
        /// Use the diamond norm, the only norm offered.
        #[arg(long)]
        diamond: bool,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        vector: Vec<f64>,
        /// Monte Carlo samples instead of exact enumeration.
        #[arg(long)]
        samples: Option<u64>,
    },
    /// Seeded Monte Carlo over torical graphs.
    Experiment {
        /// TOML file; flags override it and it overrides the defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Cycle lengths, comma-separated.
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<usize>>,
        #[arg(long)]
        samples: Option<usize>,
        /// Sets ε₁, ε₂ and ε₃ together.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Drop the per-sample records from the report.
        #[arg(long)]
        summary_only: bool,
    },
}
