use std::collections::{BTreeSet, HashSet};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use chrono::Utc;
use serde::{Deserialize, Serialize};

use mediascreen_core::classify::{
    load_model, save_model, screen_batch, BaselineModel, Classifier, RemoteAdapterConfig, RemoteClassifier,
};
use mediascreen_core::corpus::{
    class_distribution, load_corpus, save_corpus, stratified_split, Corpus, DatasetSplit, Document, Fragment,
};
use mediascreen_core::fsutil::atomic_write;
use mediascreen_core::ingest::{deduplicate, fetch_news_feed, parse_social_export, SourceConfig, SourceKind};
use mediascreen_core::metrics::{render_report, EvalReport, ReportFormat};
use mediascreen_core::pipeline::{evaluate, ClassifierChoice, EvalPair, EvalParams, ItemError};
use mediascreen_core::textprep::{clean_document, detect_language, segment_fragments, Tokenizer};
use mediascreen_core::SentimentLabel;
use mediascreen_service::api::LIVE_DATASET;
use mediascreen_service::{AppState, Store};

use crate::args::*;
use crate::UsageError;

pub fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Ingest(a) => ingest(a),
        Command::Prep(a) => prep(a),
        Command::Split(a) => split(a),
        Command::Train(a) => train(a),
        Command::Eval(a) => eval(a),
        Command::Screen(a) => screen(a),
        Command::Report(a) => report(a),
        Command::Serve(a) => serve(a),
    }
}

fn require_file(path: &Path) -> Result<()> {
    if !path.is_file() {
        bail!(UsageError(format!("input file {} does not exist", path.display())));
    }
    Ok(())
}

fn require_output_dir(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => {
            bail!(UsageError(format!("output directory {} does not exist", dir.display())))
        }
        _ => Ok(()),
    }
}

/// Writes atomically to `output`, or to standard output when absent.
fn emit(output: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match output {
        Some(path) => atomic_write(path, bytes).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn load(path: &Path) -> Result<(Vec<Document>, Vec<Fragment>)> {
    load_corpus(path).with_context(|| format!("loading {}", path.display()))
}

fn to_json(value: &impl Serialize) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("value serializes");
    out.push(b'\n');
    out
}

fn report_format(format: FormatArg) -> ReportFormat {
    match format {
        FormatArg::Json => ReportFormat::Json,
        FormatArg::Csv => ReportFormat::Csv,
        FormatArg::Text => ReportFormat::TextTable,
    }
}

/// Plain paths become `file://` URLs so feeds can be read from disk.
fn feed_location(location: &str) -> Result<String> {
    if location.contains("://") {
        return Ok(location.to_string());
    }
    let path = std::fs::canonicalize(location).with_context(|| format!("feed file {location}"))?;
    Ok(format!("file://{}", path.display()))
}

fn ingest(a: IngestArgs) -> Result<()> {
    require_output_dir(&a.output)?;
    let mut config = match a.source {
        SourceArg::NewsFeed => SourceConfig::news_feed(feed_location(&a.location)?),
        SourceArg::SocialExport => {
            require_file(Path::new(&a.location))?;
            SourceConfig::social_export(&a.location)
        }
    };
    config.max_items = a.max_items.map(|m| m as usize);
    config.include_keywords = a.keywords;
    config.text_field = a.text_field;
    config.timestamp_field = a.timestamp_field;
    config.id_field = a.id_field;
    config.validate().map_err(|e| UsageError(e.to_string()))?;

    let batch = match config.kind {
        SourceKind::NewsFeed => fetch_news_feed(&config)?,
        SourceKind::SocialExport => parse_social_export(&config)?,
    };
    for warning in &batch.warnings {
        eprintln!("warning: {warning}");
    }

    let (mut documents, fragments) = if a.output.exists() { load(&a.output)? } else { (Vec::new(), Vec::new()) };
    let before = documents.len();
    let known: HashSet<String> = documents.iter().map(|d| d.id.clone()).collect();
    documents.extend(batch.documents.into_iter().filter(|d| !known.contains(&d.id)));
    let documents = deduplicate(documents);
    let kept: HashSet<&str> = documents.iter().map(|d| d.id.as_str()).collect();
    let fragments: Vec<Fragment> = fragments.into_iter().filter(|f| kept.contains(f.doc_id.as_str())).collect();
    save_corpus(&documents, &fragments, &a.output)?;
    eprintln!(
        "ingested {} new document(s) into {} ({} skipped, {} filtered by keyword)",
        documents.len().saturating_sub(before),
        a.output.display(),
        batch.skipped,
        batch.filtered
    );
    Ok(())
}

fn prep(a: PrepArgs) -> Result<()> {
    require_file(&a.dataset)?;
    let output = a.output.unwrap_or_else(|| a.dataset.clone());
    require_output_dir(&output)?;
    let (documents, fragments) = load(&a.dataset)?;
    let corpus = Corpus::new(documents, fragments)?;
    let segmented: HashSet<String> = corpus.segmented_doc_ids().into_iter().map(str::to_string).collect();
    let (documents, mut fragments) = corpus.into_parts();

    let mut out_docs = Vec::with_capacity(documents.len());
    let mut new_fragments = 0;
    for document in documents {
        if segmented.contains(&document.id) {
            out_docs.push(document);
            continue;
        }
        match clean_document(&document) {
            Ok(cleaned) => {
                let produced = segment_fragments(&cleaned);
                new_fragments += produced.len();
                fragments.extend(produced);
                out_docs.push(cleaned);
            }
            Err(e) => {
                eprintln!("warning: document {} left unsegmented: {e}", document.id);
                out_docs.push(document);
            }
        }
    }
    save_corpus(&out_docs, &fragments, &output)?;
    eprintln!("wrote {new_fragments} new fragment(s) to {}", output.display());
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct SplitFile {
    #[serde(flatten)]
    split: DatasetSplit,
    dataset: String,
    test_counts: [u64; 3],
    train_counts: [u64; 3],
}

fn split(a: SplitArgs) -> Result<()> {
    require_file(&a.dataset)?;
    if let Some(o) = &a.output {
        require_output_dir(o)?;
    }
    let (_, fragments) = load(&a.dataset)?;
    let split = stratified_split(&fragments, a.split.fraction, a.split.seed)?;
    if split.test_ids.is_empty() && split.train_ids.is_empty() {
        bail!("{} has no labeled fragments", a.dataset.display());
    }
    let counts = |ids: &BTreeSet<String>| class_distribution(fragments.iter().filter(|f| ids.contains(&f.id))).counts.0;
    let file = SplitFile {
        test_counts: counts(&split.test_ids),
        train_counts: counts(&split.train_ids),
        dataset: a.dataset.display().to_string(),
        split,
    };
    emit(a.output.as_deref(), &to_json(&file))
}

fn train(a: TrainArgs) -> Result<()> {
    require_file(&a.dataset)?;
    if let Some(s) = &a.split {
        require_file(s)?;
    }
    require_output_dir(&a.output)?;
    let (_, fragments) = load(&a.dataset)?;
    let train_ids = match &a.split {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let file: SplitFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            Some(file.split.train_ids)
        }
        None => None,
    };
    let selected: Vec<&Fragment> =
        fragments.iter().filter(|f| train_ids.as_ref().is_none_or(|ids| ids.contains(&f.id))).collect();
    let model = BaselineModel::train(selected.iter().copied(), a.alpha, &Tokenizer::default()).map_err(|e| {
        let d = class_distribution(selected.iter().copied());
        anyhow::anyhow!("{e} (training data: {} negative, {} neutral, {} positive)", d.counts.0[0], d.counts.0[1], d.counts.0[2])
    })?;
    save_model(&model, &a.output)?;
    eprintln!("trained on {} fragment(s), vocabulary {}", class_distribution(selected).total, model.vocabulary_size());
    Ok(())
}

fn remote_classifier(params: &RemoteParams) -> Result<RemoteClassifier> {
    let base = match &params.remote_config {
        Some(path) => {
            require_file(path)?;
            RemoteAdapterConfig::from_toml_file(path)?
        }
        None => RemoteAdapterConfig::default(),
    };
    let mut config = base.with_env_overrides()?;
    if let Some(endpoint) = &params.endpoint {
        config.endpoint = endpoint.clone();
    }
    if config.endpoint.is_empty() {
        bail!(UsageError("the remote classifier needs --endpoint, a config file or MEDIASCREEN_REMOTE_ENDPOINT".into()));
    }
    RemoteClassifier::new(config).map_err(|e| UsageError(e.to_string()).into())
}

#[derive(Serialize, Deserialize)]
struct RunFile {
    report: EvalReport,
    pairs: Vec<EvalPair>,
    errors: Vec<ItemError>,
    split: DatasetSplit,
}

fn eval(a: EvalArgs) -> Result<()> {
    require_file(&a.dataset)?;
    for o in a.output.iter().chain(a.save_run.iter()) {
        require_output_dir(o)?;
    }
    let remote = match a.classifier {
        ClassifierArg::Remote => Some(remote_classifier(&a.remote)?),
        ClassifierArg::Baseline => None,
    };
    let (_, fragments) = load(&a.dataset)?;
    let choice = match &remote {
        Some(r) => ClassifierChoice::Fixed(r),
        None => ClassifierChoice::Baseline { alpha: a.alpha },
    };
    let dataset = a.dataset.display().to_string();
    let params = EvalParams { dataset: &dataset, test_fraction: a.split.fraction, seed: a.split.seed, created_at: Utc::now() };
    let outcome = evaluate(&fragments, choice, &params)?;
    if outcome.is_partial() {
        eprintln!("warning: {} test fragment(s) could not be classified; the report is partial", outcome.errors.len());
    }
    if let Some(path) = &a.save_run {
        let run = RunFile {
            report: outcome.report.clone(),
            pairs: outcome.pairs.clone(),
            errors: outcome.errors.clone(),
            split: outcome.split.clone(),
        };
        atomic_write(path, &to_json(&run)).with_context(|| format!("writing {}", path.display()))?;
    }
    emit(a.output.as_deref(), &render_report(&outcome.report, report_format(a.format)))
}

#[derive(Serialize)]
struct ScreenLine<'a> {
    fragment_id: &'a str,
    text: &'a str,
    flagged: bool,
    label: Option<SentimentLabel>,
    posterior: Option<[f64; 3]>,
    error: Option<String>,
}

fn screen(a: ScreenArgs) -> Result<()> {
    if let Some(d) = &a.dataset {
        require_file(d)?;
    }
    if let Some(m) = &a.model {
        require_file(m)?;
    }
    if let Some(o) = &a.output {
        require_output_dir(o)?;
    }
    let fragments: Vec<Fragment> = match &a.dataset {
        Some(path) => load(path)?.1,
        None => a
            .text
            .iter()
            .enumerate()
            .map(|(i, text)| Fragment {
                id: format!("inline#{i}"),
                doc_id: String::new(),
                index: i,
                lang: detect_language(text),
                text: text.clone(),
                label: None,
                predicted: None,
            })
            .collect(),
    };
    let classifier: Box<dyn Classifier> = match (a.classifier, &a.model) {
        (ClassifierArg::Remote, _) => Box::new(remote_classifier(&a.remote)?),
        (ClassifierArg::Baseline, Some(path)) => Box::new(load_model(path)?),
        (ClassifierArg::Baseline, None) => {
            if a.dataset.is_none() {
                bail!(UsageError("screening inline text with the baseline needs --model".into()));
            }
            Box::new(BaselineModel::train(&fragments, 1.0, &Tokenizer::default()).context("training on the dataset's labels")?)
        }
    };
    let result = screen_batch(classifier.as_ref(), &fragments);

    let mut out = Vec::new();
    for item in result.items.iter().filter(|i| a.all || i.flagged) {
        let line = ScreenLine {
            fragment_id: &item.fragment.id,
            text: &item.fragment.text,
            flagged: item.flagged,
            label: item.prediction.as_ref().map(|p| p.label),
            posterior: item.prediction.as_ref().map(|p| p.posterior().0),
            error: item.error.as_ref().map(|e| e.to_string()),
        };
        serde_json::to_writer(&mut out, &line)?;
        out.push(b'\n');
    }
    let failed = result.failures().count();
    eprintln!("screened {} fragment(s): {} flagged, {failed} failed", result.items.len(), result.flagged().count());
    emit(a.output.as_deref(), &out)?;
    if failed > 0 && failed == result.items.len() {
        bail!("every fragment failed to classify");
    }
    Ok(())
}

fn report(a: ReportArgs) -> Result<()> {
    require_file(&a.input)?;
    if let Some(o) = &a.output {
        require_output_dir(o)?;
    }
    let text = std::fs::read_to_string(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", a.input.display()))?;
    let report_value = value.get("report").cloned().unwrap_or(value);
    let stored: EvalReport = serde_json::from_value(report_value).context("input does not hold an evaluation report")?;
    // Figures are recomputed from the matrix so rounded inputs re-render exactly.
    let report = EvalReport::from_matrix(stored.matrix, stored.metadata);
    emit(a.output.as_deref(), &render_report(&report, report_format(a.format)))
}

fn serve(a: ServeArgs) -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();

    let mut datasets: Vec<(String, Vec<Fragment>)> = Vec::new();
    for (name, path) in &a.datasets {
        if name == LIVE_DATASET {
            bail!(UsageError(format!("dataset name `{LIVE_DATASET}` is reserved for the service corpus")));
        }
        require_file(path)?;
        datasets.push((name.clone(), load(path)?.1));
    }
    if let Some(m) = &a.model {
        require_file(m)?;
    }
    let remote = if a.remote.endpoint.is_some() || a.remote.remote_config.is_some() {
        Some(remote_classifier(&a.remote)?)
    } else {
        None
    };

    let store = Store::open(PathBuf::from(&a.data_dir), !a.no_sync)?;
    let mut state = AppState::new(store);
    for (name, fragments) in datasets {
        state = state.with_dataset(name, fragments);
    }
    if let Some(m) = &a.model {
        state = state.with_model(load_model(m)?);
    }
    if let Some(r) = remote {
        state = state.with_classifier("remote", Arc::new(r));
    }
    if let Some(token) = a.token {
        state = state.with_token(token);
    }

    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(async move {
        let listener =
            tokio::net::TcpListener::bind(&a.addr).await.with_context(|| format!("binding {}", a.addr))?;
        mediascreen_service::serve(listener, state).await?;
        Ok(())
    })
}
