use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mediascreen_core::pipeline::DEFAULT_TEST_FRACTION;

#[derive(Debug, Parser)]
#[command(name = "mediascreen", version, about = "Adverse-media screening pipeline")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fetch a news feed or read a social export into a corpus file.
    Ingest(IngestArgs),
    /// Clean and segment documents that have no fragments yet.
    Prep(PrepArgs),
    /// Write a stratified train/test split of the labeled fragments.
    Split(SplitArgs),
    /// Train the baseline model.
    Train(TrainArgs),
    /// Split, train, predict and score in one run.
    Eval(EvalArgs),
    /// Classify fragments and list the ones flagged negative.
    Screen(ScreenArgs),
    /// Re-render a saved evaluation.
    Report(ReportArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceArg {
    NewsFeed,
    SocialExport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClassifierArg {
    Baseline,
    Remote,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
    Text,
}

fn fraction(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("fraction must lie strictly between 0 and 1, got {v}"))
    }
}

fn alpha(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("alpha must be positive, got {v}"))
    }
}

#[derive(Debug, Args)]
pub struct SplitParams {
    #[arg(long, default_value_t = DEFAULT_TEST_FRACTION, value_parser = fraction)]
    pub fraction: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct RemoteParams {
    /// Completion endpoint for the remote classifier.
    #[arg(long)]
    pub endpoint: Option<String>,
    /// TOML file with remote adapter settings; environment variables override it.
    #[arg(long)]
    pub remote_config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long, value_enum)]
    pub source: SourceArg,
    /// Feed URL or file, or export file.
    #[arg(long)]
    pub location: String,
    /// Corpus file to create or extend.
    #[arg(long)]
    pub output: PathBuf,
    /// Keep only items mentioning one of these (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub keywords: Vec<String>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_items: Option<u64>,
    #[arg(long, default_value = "text")]
    pub text_field: String,
    #[arg(long, default_value = "created_time")]
    pub timestamp_field: String,
    #[arg(long, default_value = "id")]
    pub id_field: String,
}

#[derive(Debug, Args)]
pub struct PrepArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Defaults to rewriting the dataset in place.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[command(flatten)]
    pub split: SplitParams,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Train only on the training ids of this split file.
    #[arg(long)]
    pub split: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0, value_parser = alpha)]
    pub alpha: f64,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[command(flatten)]
    pub split: SplitParams,
    #[arg(long, value_enum, default_value_t = ClassifierArg::Baseline)]
    pub classifier: ClassifierArg,
    #[arg(long, default_value_t = 1.0, value_parser = alpha)]
    pub alpha: f64,
    #[command(flatten)]
    pub remote: RemoteParams,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    pub format: FormatArg,
    /// Report destination; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Also save the full run (exact report, pairs, split) for `report`.
    #[arg(long)]
    pub save_run: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScreenArgs {
    /// Corpus whose fragments are screened.
    #[arg(long, required_unless_present = "text", conflicts_with = "text")]
    pub dataset: Option<PathBuf>,
    /// Inline text to screen; repeatable.
    #[arg(long)]
    pub text: Vec<String>,
    #[arg(long, value_enum, default_value_t = ClassifierArg::Baseline)]
    pub classifier: ClassifierArg,
    /// Saved baseline model; without it the baseline trains on the dataset's labels.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[command(flatten)]
    pub remote: RemoteParams,
    /// Write every prediction, not only flagged ones.
    #[arg(long)]
    pub all: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Run file written by `eval --save-run`, or a bare report.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    pub format: FormatArg,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: String,
    #[arg(long, default_value = "mediascreen-data")]
    pub data_dir: PathBuf,
    /// Require this bearer token on every route but /health.
    #[arg(long, env = "MEDIASCREEN_TOKEN", hide_env_values = true)]
    pub token: Option<String>,
    /// Read-only evaluation dataset as NAME=PATH; repeatable.
    #[arg(long = "dataset", value_parser = named_path)]
    pub datasets: Vec<(String, PathBuf)>,
    /// Saved baseline model used for screening.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[command(flatten)]
    pub remote: RemoteParams,
    /// Skip fsync after each log append.
    #[arg(long)]
    pub no_sync: bool,
}

fn named_path(s: &str) -> Result<(String, PathBuf), String> {
    match s.split_once('=') {
        Some((name, path)) if !name.is_empty() && !path.is_empty() => Ok((name.to_string(), PathBuf::from(path))),
        _ => Err(format!("expected NAME=PATH, got `{s}`")),
    }
}
