//! `conflict-select`: command-line front end for conflictual pair selection.
//!
//! Exit codes: 0 success, 1 an axiom audit found a failure, 2 usage error,
//! 3 data/configuration error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use conflict_core::axioms::AxiomId;
use conflict_core::rules::{PolarExponent, RuleId};

#[derive(Parser)]
#[command(
    name = "conflict-select",
    version,
    about = "Select the most conflicting pair of candidates from ordinal preference profiles",
    after_help = "FILE FORMATS:\n  \
    Native profile document: header `m n`, then m candidate-name lines, then\n  \
    `multiplicity: i,j,...` ballot lines with 0-based candidate indices.\n  \
    `#` lines are comments.\n  \
    Ranking files (--preflib): either `# NUMBER ALTERNATIVES:` metadata or a\n  \
    bare candidate count + name lines, followed by `weight: 3,1,{2,4},...`\n  \
    lines with 1-based ids, `{}` tie groups, optional truncation, and\n  \
    integer/decimal/fraction weights.\n\n\
    ENVIRONMENT:\n  CONFLICT_SELECT_THREADS caps the worker pool."
)]
struct CliArgs {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute each rule's co-winning pairs on one profile.
    Winners(WinnersArgs),
    /// Print the polarization metrics of candidate pairs.
    Metrics(MetricsArgs),
    /// Audit rules against axioms, on a profile or over random profiles.
    Axioms(AxiomsArgs),
    /// Run batch experiments and emit plot-ready CSV files.
    Experiment(ExperimentArgs),
    /// Sample a profile from a generator and write the native document.
    Sample(SampleArgs),
    /// Convert a ranking file into a native profile document.
    Ingest(IngestArgs),
    /// Materialize the bundled demonstration profiles.
    Fixtures(FixturesArgs),
}

fn default_conflictual_rules() -> Vec<RuleId> {
    RuleId::conflictual_four().to_vec()
}

fn default_all_rules() -> Vec<RuleId> {
    let mut rules = default_conflictual_rules();
    rules.push(RuleId::Borda2);
    rules.push(RuleId::Cc2);
    rules
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TieBreakArg {
    /// Shuffle tie groups with the ingest seed.
    Seeded,
    /// Order tie groups by candidate index.
    Index,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IncompleteArg {
    /// Drop entries that do not rank every candidate.
    Drop,
    /// Reject the file if any entry is incomplete.
    Error,
}

/// Where a single profile comes from, plus the ingest policy for ranking
/// files.
#[derive(Args)]
pub struct ProfileSourceArgs {
    /// Native profile document.
    #[arg(long, value_name = "FILE", conflicts_with = "preflib")]
    profile: Option<PathBuf>,
    /// PrefLib-style ranking file (ties/truncation/weights allowed).
    #[arg(long, value_name = "FILE")]
    preflib: Option<PathBuf>,
    /// Multiplicity = round(weight * this scale) for ranking files.
    #[arg(long, value_name = "K", default_value_t = 1)]
    weight_scale: u64,
    #[arg(long, value_enum, default_value_t = TieBreakArg::Seeded)]
    tie_break: TieBreakArg,
    #[arg(long, value_enum, default_value_t = IncompleteArg::Drop)]
    incomplete: IncompleteArg,
    /// Keep only these candidates (comma-separated names), preserving order.
    #[arg(long, value_name = "NAMES")]
    subset: Option<String>,
    /// Draw this many ballots with probability proportional to weight.
    #[arg(long, value_name = "N")]
    subsample: Option<u64>,
    /// Seed for tie breaking and subsampling.
    #[arg(long, value_name = "SEED", default_value_t = 0)]
    ingest_seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GeneratorArg {
    Identity,
    Antagonism,
    Uniformity,
    Ic,
    Mallows,
    Euclidean,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PointDistArg {
    Uniform,
    Gaussian,
}

/// Synthetic profile source.
#[derive(Args)]
pub struct GeneratorArgs {
    #[arg(long, value_enum, value_name = "KIND")]
    generator: Option<GeneratorArg>,
    /// Voter count (uniformity defaults to m!, everything else to 100).
    #[arg(long, value_name = "N")]
    n: Option<u64>,
    /// Candidate count.
    #[arg(long, value_name = "M", default_value_t = 10)]
    m: usize,
    /// Base seed; every derived artifact is a pure function of it.
    #[arg(long, value_name = "SEED", default_value_t = 0)]
    seed: u64,
    /// Mallows dispersion in [0, 1].
    #[arg(long, value_name = "PSI", default_value_t = 0.5)]
    psi: f64,
    /// Mallows centers: 1 (roster order) or 2 (roster order + reverse).
    #[arg(long, value_name = "COUNT", default_value_t = 1)]
    centers: u8,
    #[arg(long, value_enum, value_name = "DIST", default_value_t = PointDistArg::Uniform)]
    voter_dist: PointDistArg,
    #[arg(long, value_enum, value_name = "DIST", default_value_t = PointDistArg::Uniform)]
    cand_dist: PointDistArg,
    /// Standard deviation of gaussian point distributions.
    #[arg(long, value_name = "SIGMA", default_value_t = conflict_core::generators::DEFAULT_SIGMA)]
    sigma: f64,
    /// Key/value generator document; overrides the flags above.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

#[derive(Args)]
pub struct WinnersArgs {
    #[command(flatten)]
    source: ProfileSourceArgs,
    /// Rules to run (maxsum, maxnash, maxswap, maxpolar:P, borda, cc).
    #[arg(long = "rule", value_name = "RULE", value_delimiter = ',',
          default_values_t = default_conflictual_rules())]
    rules: Vec<RuleId>,
}

#[derive(Args)]
pub struct MetricsArgs {
    #[command(flatten)]
    source: ProfileSourceArgs,
    /// Pairs as `nameA:nameB` (comma-separated); all pairs when omitted.
    #[arg(long, value_name = "PAIRS")]
    pairs: Option<String>,
}

#[derive(Args)]
pub struct AxiomsArgs {
    /// Check a fixed profile instead of searching random ones.
    #[command(flatten)]
    source: ProfileSourceArgs,
    #[command(flatten)]
    generator: GeneratorArgs,
    #[arg(long = "rule", value_name = "RULE", value_delimiter = ',',
          default_values_t = default_conflictual_rules())]
    rules: Vec<RuleId>,
    /// Axioms to check; defaults to all of them.
    #[arg(long = "axiom", value_name = "AXIOM", value_delimiter = ',',
          default_values_t = AxiomId::all())]
    axioms: Vec<AxiomId>,
    /// Random profiles per (rule, axiom) cell in search mode.
    #[arg(long, value_name = "COUNT", default_value_t = 10_000)]
    trials: u64,
    /// Directory for replayable witness files (created on first failure).
    #[arg(long, value_name = "DIR", default_value = "witnesses")]
    witness_dir: PathBuf,
}

#[derive(Args)]
#[command(after_help = "CSV SCHEMAS (fixed column order, decimal dot):\n  \
    winners.csv:   trial,rule,pair_a,pair_b,alpha,beta,gamma,phi,score,ties\n  \
    baseline.csv:  trial,pair_a,pair_b,alpha,beta,gamma,phi\n  \
    summary.csv:   rule,winner_rows,mean_alpha,sd_alpha,mean_beta,sd_beta,\n                 \
    mean_gamma,sd_gamma,mean_phi,sd_phi,mean_center_dist\n  \
    positions.csv: trial,rule,pair_a,pair_b,ax,ay,bx,by,center_dist\n                 \
    (Euclidean sources only)\n  \
    sweep.csv:     psi,centers,profiles,mean_alpha,max_beta,mean_gamma,mean_phi")]
pub struct ExperimentArgs {
    #[command(flatten)]
    generator: GeneratorArgs,
    /// Dataset source: per trial, draw --m candidates and --n ballots.
    #[command(flatten)]
    source: ProfileSourceArgs,
    #[arg(long = "rule", value_name = "RULE", value_delimiter = ',',
          default_values_t = default_all_rules())]
    rules: Vec<RuleId>,
    /// Trials (or profiles per sweep point in sweep mode).
    #[arg(long, value_name = "COUNT", default_value_t = 1000)]
    trials: u64,
    /// Output directory for the CSV files.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Mallows sweep mode: comma-separated psi values.
    #[arg(long, value_name = "PSIS", value_delimiter = ',')]
    sweep_psi: Vec<f64>,
}

#[derive(Args)]
pub struct SampleArgs {
    #[command(flatten)]
    generator: GeneratorArgs,
    /// Output path for the native profile document.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args)]
pub struct IngestArgs {
    #[command(flatten)]
    source: ProfileSourceArgs,
    /// Output path for the native profile document.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args)]
pub struct FixturesArgs {
    /// Directory to write the bundled profiles into.
    #[arg(long, value_name = "DIR", default_value = "fixtures")]
    out: PathBuf,
}

fn configure_thread_pool() {
    if let Ok(value) = std::env::var("CONFLICT_SELECT_THREADS") {
        match value.parse::<usize>() {
            Ok(threads) if threads > 0 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
            _ => eprintln!("warning: ignoring invalid CONFLICT_SELECT_THREADS={value:?}"),
        }
    }
}

/// The 2-MaxPolar audit default; used by help strings and tests.
pub fn polar2() -> RuleId {
    RuleId::MaxPolar(PolarExponent::integer(2).expect("positive"))
}

fn main() -> ExitCode {
    configure_thread_pool();
    let args = CliArgs::parse();
    let outcome = match args.command {
        Command::Winners(a) => commands::winners(a),
        Command::Metrics(a) => commands::metrics(a),
        Command::Axioms(a) => commands::axioms(a),
        Command::Experiment(a) => commands::experiment(a),
        Command::Sample(a) => commands::sample(a),
        Command::Ingest(a) => commands::ingest(a),
        Command::Fixtures(a) => commands::fixtures(a),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(3)
        }
    }
}
