use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "phishlens", version, about = "Phishing URL detection")]
pub struct Cli {
    /// TOML config file; keys are the long flag names.
    #[arg(long, global = true, env = "PHISHLENS_CONFIG")]
    pub config: Option<PathBuf>,

    /// Log more (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Read a URL feed and write a labeled URL list.
    Ingest(IngestArgs),
    /// Extract the 23 features for a labeled URL list.
    Extract(ExtractArgs),
    /// Grid-search with k-fold CV and save the best model.
    Train(TrainArgs),
    /// Score a model against a labeled matrix.
    Evaluate(EvaluateArgs),
    /// Classify one URL. Exit 0 for safe, 10 for deceptive.
    Predict(PredictArgs),
    /// Run the local verdict service.
    Serve(ServeArgs),
    /// Show recorded history, newest first.
    History(HistoryArgs),
    /// Write synthetic labeled feature rows.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Args, Default)]
pub struct EvidenceArgs {
    /// Use recorded evidence only; needs --evidence-dir.
    #[arg(long)]
    pub offline: bool,
    #[arg(long)]
    pub evidence_dir: Option<PathBuf>,
    /// WHOIS cache for live lookups.
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    /// Rank CSV (`rank,domain`) for live lookups.
    #[arg(long)]
    pub rank_snapshot: Option<PathBuf>,
    /// Network timeout per request.
    #[arg(long)]
    pub timeout_ms: Option<u64>,
    /// Read the traffic-rank cut the inverted way (rank under the cut is phishing).
    #[arg(long)]
    pub web_traffic_literal: bool,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub feed: PathBuf,
    /// phish or legit
    #[arg(long)]
    pub label: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub limit: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads; 0 means one per core.
    #[arg(long)]
    pub parallel: Option<usize>,
    #[command(flatten)]
    pub evidence: EvidenceArgs,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    /// naive_bayes, logistic, random_forest (or nb, lr, rf), or all.
    #[arg(long, default_value = "random_forest")]
    pub model_kind: String,
    /// `default` or a grid file with `name = v1, v2` lines.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub folds: Option<usize>,
    /// Model file, or a directory when --model-kind all.
    #[arg(long)]
    pub out: PathBuf,
    /// CSV with one row per grid point plus the final model's training fit.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub url: String,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[command(flatten)]
    pub evidence: EvidenceArgs,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Bind address; loopback unless told otherwise.
    #[arg(long)]
    pub host: Option<String>,
    #[arg(long)]
    pub port: Option<u16>,
    #[arg(long)]
    pub history_dir: Option<PathBuf>,
    #[arg(long)]
    pub history_max_bytes: Option<u64>,
    /// Allowed CORS origin (repeatable). Without any, browser-extension
    /// origins are allowed.
    #[arg(long)]
    pub allow_origin: Vec<String>,
    /// Per-request extraction deadline.
    #[arg(long)]
    pub deadline_ms: Option<u64>,
    #[command(flatten)]
    pub evidence: EvidenceArgs,
}

#[derive(Debug, Args)]
pub struct HistoryArgs {
    #[arg(long)]
    pub history_dir: Option<PathBuf>,
    #[arg(long)]
    pub limit: Option<usize>,
    /// One JSON entry per line instead of a table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 760)]
    pub rows: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 0.5)]
    pub phishing_fraction: f64,
    #[arg(long, default_value_t = 0.02)]
    pub label_noise: f64,
    /// Matrix whose rows are copied in front of the synthetic ones.
    #[arg(long)]
    pub prepend: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}
