mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "quadclass", version, about = "Real quadratic field datasets, class-number separability and classifiers")]
struct Cli {
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = "QUADCLASS_THREADS")]
    threads: Option<usize>,
    /// Pretty-print JSON outputs and the stdout summary.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a dataset of real quadratic fields with the given class numbers.
    Generate(GenerateArgs),
    /// Rank coefficient triples by separability cost, or export frontiers and charts.
    Bubble(BubbleArgs),
    /// Check the genus-theory constraints on every record.
    VerifyGenus(VerifyArgs),
    /// Evaluate a closed-form predictor or train the boosted-tree baseline.
    Classify(ClassifyArgs),
    /// Run the feature-set ablation of the boosted-tree baseline.
    Ablation(AblationArgs),
    /// Principal components of the coefficient vectors.
    Pca(PcaArgs),
    /// Count tables by class number.
    Stats(StatsArgs),
    /// Import and validate an external CSV of fields.
    Import(ImportArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    /// Largest fundamental discriminant D.
    #[arg(long = "max-D")]
    pub max_d: u64,
    /// Class numbers to keep, comma-separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub classes: Vec<u32>,
    /// Number of zeta coefficients a_1..a_N stored per field.
    #[arg(long, default_value_t = 1000)]
    pub coeff_bound: usize,
    /// Output dataset directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Sampled,
}

#[derive(Debug, Args, Serialize)]
pub struct BubbleArgs {
    /// Dataset directory.
    #[arg(long)]
    pub dataset: PathBuf,
    /// The two class numbers i,j.
    #[arg(long, value_delimiter = ',', num_args = 1, required = true)]
    pub classes: Vec<u32>,
    /// Candidate indices: ranges `a..b`, single indices, `primes` or `all`, comma-separated.
    #[arg(long, default_value = "1..50")]
    pub indices: String,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    pub mode: Mode,
    /// Triples to evaluate; required for sampled mode, a prefix cap in exact mode.
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long, default_value_t = 10)]
    pub top_k: usize,
    /// Instead of searching, tabulate the best class-j purity for 0..=MAX_PURE pure class-i values.
    #[arg(long, value_name = "MAX_PURE")]
    pub frontier: Option<u64>,
    /// Instead of searching, export the bubble chart of one triple, e.g. 3,5,7.
    #[arg(long, value_name = "TRIPLE")]
    pub chart: Option<String>,
    /// Seed for sampled mode.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Output directory for the full report.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FormulaArg {
    F12,
    F13a,
    F13b,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GbdtArgs {
    #[arg(long, default_value_t = 200)]
    pub trees: usize,
    #[arg(long, default_value_t = 4)]
    pub depth: usize,
    #[arg(long, default_value_t = 0.1)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 20)]
    pub min_samples_leaf: usize,
    /// L2 penalty on leaf values.
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Row fraction per tree.
    #[arg(long, default_value_t = 1.0)]
    pub subsample: f64,
    /// Training share of the stratified split.
    #[arg(long, default_value_t = 0.7)]
    pub train_fraction: f64,
}

#[derive(Debug, Args, Serialize)]
#[command(group(clap::ArgGroup::new("model").required(true).args(["formula", "gbdt"])))]
pub struct ClassifyArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Closed-form threshold predictor.
    #[arg(long, value_enum)]
    pub formula: Option<FormulaArg>,
    /// Train and evaluate the boosted-tree baseline.
    #[arg(long)]
    pub gbdt: bool,
    /// Two class numbers to keep; defaults to the formula's pair or the dataset's classes.
    #[arg(long, value_delimiter = ',')]
    pub classes: Option<Vec<u32>>,
    /// Replace the data by a discriminant-bucket balanced sample (needs --seed).
    #[arg(long)]
    pub balanced: bool,
    /// Boosted-tree features, e.g. `ap`, `ap:10,D,R`, `D,R,S_chi`.
    #[arg(long, default_value = "ap")]
    pub features: String,
    #[command(flatten)]
    pub gbdt_config: GbdtArgs,
    /// Permutation-importance repeats on the test split.
    #[arg(long, default_value_t = 5)]
    pub importance_repeats: usize,
    /// Seed for sampling, splitting and training.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct AblationArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Replace the data by the class 1 / class 3 balanced sample with D <= 10^6.
    #[arg(long)]
    pub balanced: bool,
    #[command(flatten)]
    pub gbdt_config: GbdtArgs,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct PcaArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Coefficient indices, as for `bubble --indices`.
    #[arg(long, default_value = "all")]
    pub indices: String,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Class numbers to keep.
    #[arg(long, value_delimiter = ',')]
    pub classes: Option<Vec<u32>>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct StatsArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ImportArgs {
    /// CSV with columns D (or d), h and R, plus optional invariants to validate.
    #[arg(long)]
    pub csv: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub coeff_bound: usize,
    /// Output dataset directory.
    #[arg(long)]
    pub out: PathBuf,
}

/// Failure kinds, mapped to exit codes 1 (usage) and 2 (validation).
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Validation(String),
}

impl From<quadclass::Error> for Failure {
    fn from(e: quadclass::Error) -> Self {
        use quadclass::Error as E;
        match e {
            E::InvalidArgument(_) | E::IndexOutOfRange { .. } | E::UnknownFeature(_) | E::Io(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

pub struct Context {
    pub pretty: bool,
    pub threads: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let ctx = Context { pretty: cli.pretty, threads: rayon::current_num_threads() };
    let result = match &cli.command {
        Command::Generate(a) => commands::generate(a, &ctx),
        Command::Bubble(a) => commands::bubble(a, &ctx),
        Command::VerifyGenus(a) => commands::verify_genus(a, &ctx),
        Command::Classify(a) => commands::classify(a, &ctx),
        Command::Ablation(a) => commands::ablation(a, &ctx),
        Command::Pca(a) => commands::pca(a, &ctx),
        Command::Stats(a) => commands::stats(a, &ctx),
        Command::Import(a) => commands::import(a, &ctx),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Validation(m)) => {
            eprintln!("validation failed: {m}");
            ExitCode::from(2)
        }
    }
}
