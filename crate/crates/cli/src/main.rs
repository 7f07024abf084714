mod commands;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "riskprobe", version, about = "Probe LLM hallucination risk factors and fit their association")]
struct Cli {
    /// Overrides the seed from the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (defaults to the config's, or `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Term index, frequency counts and complexity metrics for a corpus.
    CorpusStats(CorpusStatsArgs),
    /// Sample low-frequency terms and render commonsense prompts.
    SampleTerms(SampleTermsArgs),
    /// Generate closed-world reasoning theories, or import a dataset.
    GenNlsat(GenNlsatArgs),
    /// Counterfactual NLI construction steps.
    BuildCnli(BuildCnliArgs),
    /// Query models for every instance and record the responses.
    Query(QueryArgs),
    /// Turn annotations (or relational responses) into labels.
    IngestAnnotations(IngestArgs),
    /// Export per-instance factors to CSV.
    Factors(FactorsArgs),
    /// Fit the logistic association model.
    Fit(FitArgs),
    /// Write the report bundle.
    Report(ReportArgs),
    /// Run the full pipeline from a config.
    Run(RunArgs),
}

#[derive(Args)]
struct CorpusStatsArgs {
    #[arg(value_enum)]
    action: commands::CorpusAction,
    /// WikiText dump or JSONL `{title, body}` file.
    #[arg(long)]
    corpus: PathBuf,
    /// Terms for `complexity`; all indexed terms when omitted.
    #[arg(long = "term")]
    terms: Vec<String>,
}

#[derive(Args)]
struct SampleTermsArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 0.30)]
    percentile: f64,
    #[arg(long, default_value = "explain")]
    template: String,
}

#[derive(Args)]
struct GenNlsatArgs {
    #[arg(long, default_value_t = 3)]
    num_args: usize,
    #[arg(long, default_value_t = 5)]
    num_preds: usize,
    #[arg(long, default_value_t = 4)]
    num_facts: usize,
    #[arg(long, default_value_t = 4)]
    num_rules: usize,
    #[arg(long, default_value_t = 3)]
    max_depth: usize,
    #[arg(long, default_value_t = 100)]
    count: usize,
    /// Exemplar counts; renders one prompt per instance and count.
    #[arg(long, value_delimiter = ',')]
    fewshot_n: Vec<usize>,
    #[arg(long, default_value_t = 32)]
    pool_size: usize,
    /// Import RuleTaker-format JSONL instead of generating.
    #[arg(long)]
    ruletaker: Option<PathBuf>,
}

#[derive(Args)]
struct BuildCnliArgs {
    #[arg(value_enum)]
    action: commands::CnliAction,
    #[arg(long)]
    chains: Option<PathBuf>,
    #[arg(long)]
    pairs: Option<PathBuf>,
    #[arg(long)]
    verdicts: Option<PathBuf>,
    /// Proposing model for `propose`.
    #[arg(long)]
    model: Option<String>,
    #[arg(long, value_enum, default_value = "mock")]
    provider: commands::ProviderArg,
    /// Precomputed `scores.jsonl`.
    #[arg(long)]
    scores: Option<PathBuf>,
    #[arg(long)]
    scorer_url: Option<String>,
    #[arg(long, default_value = "roberta-large")]
    model_tag: String,
    #[arg(long)]
    instances: Option<PathBuf>,
    #[arg(long, default_value = "assume")]
    template: String,
    #[arg(long, default_value_t = 5)]
    min_tokens: usize,
    #[arg(long, default_value_t = 25)]
    max_tokens: usize,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long = "model")]
    models: Vec<String>,
    #[arg(long)]
    instances: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    parallelism: usize,
    /// Ignore cached responses.
    #[arg(long)]
    fresh: bool,
    #[arg(long, value_enum, default_value = "mock")]
    provider: commands::ProviderArg,
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    task: Option<String>,
    #[arg(long)]
    annotations: Option<PathBuf>,
    /// Relational: generated theories.
    #[arg(long)]
    theories: Option<PathBuf>,
    /// Relational: response log.
    #[arg(long)]
    responses: Option<PathBuf>,
}

#[derive(Args)]
struct FactorsArgs {
    #[arg(long)]
    instances: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long)]
    factors: Option<PathBuf>,
    /// Factor spec JSON; the task default when omitted.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    task: Option<String>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    fits: Option<PathBuf>,
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long)]
    factors: Option<PathBuf>,
    #[arg(long)]
    task: Option<String>,
    #[arg(long, default_value_t = 4)]
    bins: usize,
}

#[derive(Args)]
struct RunArgs {
    /// Start at this stage, reusing earlier artifacts.
    #[arg(long, value_enum)]
    from: Option<commands::StageArg>,
    #[arg(long)]
    fresh: bool,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Err(e) = commands::dispatch(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
