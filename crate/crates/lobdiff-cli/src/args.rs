use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "lobdiff",
    about = "Semi-Markov mid-price model estimation, diffusion limits, and Monte Carlo verification",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the n-state model from a LOBSTER file pair and write the
    /// report row, model JSON, and plot-ready CSVs.
    Estimate(EstimateArgs),
    /// Export the derived event sequences: price changes, spread
    /// statistics, intensities, and the normalized quote series.
    Events(EventsArgs),
    /// Simulate Markov-renewal paths from a model JSON and verify the
    /// CLT prediction; optionally emit a synthetic LOBSTER pair.
    Simulate(SimulateArgs),
    /// Regress diffusion coefficients on realized volatility across
    /// estimate rows.
    Report(ReportArgs),
    /// Export the price-up probability surface, optionally with its
    /// empirical counterpart from data.
    Probup(ProbupArgs),
}

#[derive(Debug, Args, Clone)]
pub struct DataArgs {
    /// LOBSTER message CSV path.
    #[arg(long)]
    pub message: Option<String>,
    /// LOBSTER level-1 orderbook CSV path.
    #[arg(long)]
    pub orderbook: Option<String>,
    /// Tick size in price units.
    #[arg(long, default_value_t = 0.01)]
    pub tick_size: f64,
    /// Minutes trimmed from each session edge.
    #[arg(long, default_value_t = 15.0)]
    pub trim_minutes: f64,
    /// Session open in seconds after midnight.
    #[arg(long, default_value_t = 34_200.0)]
    pub session_open: f64,
    /// Session close in seconds after midnight.
    #[arg(long, default_value_t = 57_600.0)]
    pub session_close: f64,
    /// Count hidden-order executions as queue events.
    #[arg(long, default_value_t = false)]
    pub include_hidden: bool,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Requested number of states (n >= 2).
    #[arg(long, default_value_t = 2)]
    pub states: usize,
    /// Balance-classification tolerance on |P(1,1) - P(-1,-1)|.
    #[arg(long, default_value_t = 0.05)]
    pub epsilon: f64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out_dir: String,
    /// Symbol tag used in file names and the report row.
    #[arg(long, default_value = "SYMBOL")]
    pub symbol: String,
    /// Realized-volatility window in seconds.
    #[arg(long, default_value_t = 600.0)]
    pub window: f64,
    /// Config file (JSON or key=value lines) overriding these flags.
    #[arg(long)]
    pub config: Option<String>,
}

#[derive(Debug, Args)]
pub struct EventsArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Directory the export files are written to.
    #[arg(long)]
    pub export_dir: Option<String>,
    /// Config file (JSON or key=value lines) overriding these flags.
    #[arg(long)]
    pub config: Option<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// StateModel JSON path.
    #[arg(long)]
    pub model: String,
    /// Sojourn distribution: exp:RATE, det:VALUE, or pareto:ALPHA:SCALE.
    #[arg(long, default_value = "exp:1.0")]
    pub sojourn: String,
    #[arg(long, default_value_t = 200)]
    pub paths: usize,
    /// Scaling parameter n (paths run to the corresponding horizon).
    #[arg(long, default_value_t = 100_000)]
    pub jumps: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Time argument of the limit process.
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// Force a scaling regime: auto, balanced, or unbalanced.
    #[arg(long, default_value = "auto")]
    pub scaling: String,
    /// Write the simulation report JSON here (stdout if omitted).
    #[arg(long)]
    pub out: Option<String>,
    /// Also write one simulated path as a LOBSTER pair with this prefix.
    #[arg(long)]
    pub emit_lobster: Option<String>,
    /// Tick size used when emitting LOBSTER files.
    #[arg(long, default_value_t = 0.01)]
    pub tick_size: f64,
    /// Config file (JSON or key=value lines) overriding these flags.
    #[arg(long)]
    pub config: Option<String>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Estimate row CSVs (at least 3 symbol rows in total).
    #[arg(required = true)]
    pub rows: Vec<String>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out_dir: String,
    /// Config file (JSON or key=value lines) overriding these flags.
    #[arg(long)]
    pub config: Option<String>,
}

#[derive(Debug, Args)]
pub struct ProbupArgs {
    #[arg(long, default_value_t = 10)]
    pub max_n: u32,
    #[arg(long, default_value_t = 10)]
    pub max_p: u32,
    /// Shares per depth unit for the empirical grid.
    #[arg(long, default_value_t = 100)]
    pub lot_size: u32,
    /// Keep pre-change book states whose spread exceeds one tick in the
    /// empirical grid (the model's own regime filters them out).
    #[arg(long, default_value_t = false)]
    pub include_wide_spreads: bool,
    /// Output CSV path (stdout if omitted).
    #[arg(long)]
    pub out: Option<String>,
    #[command(flatten)]
    pub data: DataArgs,
    /// Config file (JSON or key=value lines) overriding these flags.
    #[arg(long)]
    pub config: Option<String>,
}
