use std::collections::BTreeMap;
use std::sync::Arc;

use axum::extract::rejection::QueryRejection;
use axum::extract::{FromRequest, Path, Query, Request, State};
use axum::http::StatusCode;
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use mediascreen_core::classify::{screen_batch, BaselineModel, Classifier, ScreenedItem, DEFAULT_ALPHA};
use mediascreen_core::corpus::{class_distribution, Document, DocumentSource, Fragment};
use mediascreen_core::ingest::hashed_id;
use mediascreen_core::metrics::EvalReport;
use mediascreen_core::pipeline::{ClassifierChoice, EvalPair, ItemError, DEFAULT_TEST_FRACTION};
use mediascreen_core::textprep::{clean_document, detect_language, segment_fragments, LanguageTag, Tokenizer};
use mediascreen_core::SentimentLabel;

use crate::error::ServiceError;
use crate::runs::{run_evaluation, EvalRequest, EvalRunRecord};
use crate::store::{DocumentAdded, ScreenRun, Store};
use crate::triage::{Decision, TriageItem, TriageStatus};

/// Dataset id naming the service's own, live corpus.
pub const LIVE_DATASET: &str = "live";
pub const BASELINE: &str = "baseline";
const DEFAULT_PAGE: usize = 50;
const MAX_PAGE: usize = 500;

struct Inner {
    store: Store,
    datasets: BTreeMap<String, Arc<Vec<Fragment>>>,
    classifiers: BTreeMap<String, Arc<dyn Classifier>>,
    model: Option<Arc<BaselineModel>>,
    token: Option<String>,
}

#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

impl AppState {
    pub fn new(store: Store) -> Self {
        AppState {
            inner: Arc::new(Inner {
                store,
                datasets: BTreeMap::new(),
                classifiers: BTreeMap::new(),
                model: None,
                token: None,
            }),
        }
    }

    fn inner_mut(&mut self) -> &mut Inner {
        Arc::get_mut(&mut self.inner).expect("configure AppState before sharing it")
    }

    /// Registers a read-only dataset for evaluation runs.
    pub fn with_dataset(mut self, id: impl Into<String>, fragments: Vec<Fragment>) -> Self {
        self.inner_mut().datasets.insert(id.into(), Arc::new(fragments));
        self
    }

    /// Registers a named classifier for screening and evaluation.
    pub fn with_classifier(mut self, name: impl Into<String>, classifier: Arc<dyn Classifier>) -> Self {
        self.inner_mut().classifiers.insert(name.into(), classifier);
        self
    }

    /// Baseline model used for screening instead of training on the live corpus.
    pub fn with_model(mut self, model: BaselineModel) -> Self {
        self.inner_mut().model = Some(Arc::new(model));
        self
    }

    /// Requires `Authorization: Bearer <token>` on every route but `/health`.
    pub fn with_token(mut self, token: impl Into<String>) -> Self {
        self.inner_mut().token = Some(token.into());
        self
    }

    pub fn store(&self) -> &Store {
        &self.inner.store
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/documents", post(add_documents))
        .route("/fragments/{id}", get(get_fragment))
        .route("/screen", post(screen))
        .route("/queue/labeling", get(labeling_queue))
        .route("/labels", post(submit_label))
        .route("/queue/triage", get(triage_queue))
        .route("/triage/{id}", get(get_triage_item))
        .route("/triage/{id}/decision", post(decide))
        .route("/eval-runs", post(create_eval_run).get(list_eval_runs))
        .route("/eval-runs/{id}", get(get_eval_run))
        .fallback(|| async { ServiceError::NotFound("no such route".into()) })
        .layer(middleware::from_fn_with_state(state.clone(), require_token))
        .with_state(state)
}

async fn require_token(State(state): State<AppState>, request: Request, next: Next) -> Response {
    if let Some(token) = &state.inner.token {
        let expected = format!("Bearer {token}");
        let given = request.headers().get("authorization").and_then(|v| v.to_str().ok());
        if request.uri().path() != "/health" && given != Some(expected.as_str()) {
            return ServiceError::Unauthorized.into_response();
        }
    }
    next.run(request).await
}

/// JSON body whose rejections use the uniform error body.
pub struct ApiJson<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for ApiJson<T> {
    type Rejection = ServiceError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        Json::<T>::from_request(req, state)
            .await
            .map(|Json(v)| ApiJson(v))
            .map_err(|rejection| ServiceError::validation(rejection.body_text()))
    }
}

fn query<T>(q: Result<Query<T>, QueryRejection>) -> Result<T, ServiceError> {
    q.map(|Query(v)| v).map_err(|rejection| ServiceError::validation(rejection.body_text()))
}

/// Runs store work off the async executor.
async fn blocking<R: Send + 'static>(
    f: impl FnOnce() -> Result<R, ServiceError> + Send + 'static,
) -> Result<R, ServiceError> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ServiceError::Storage(format!("worker failed: {e}")))?
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Page<T> {
    pub items: Vec<T>,
    /// Pass back as `cursor` to fetch the next page; absent on the last page.
    pub next_cursor: Option<String>,
    pub total: usize,
}

#[derive(Debug, Deserialize)]
struct PageParams {
    cursor: Option<String>,
    limit: Option<usize>,
    status: Option<String>,
    lang: Option<String>,
}

fn paginate<T: Clone>(all: Vec<&T>, params: &PageParams) -> Result<Page<T>, ServiceError> {
    let start: usize = match &params.cursor {
        None => 0,
        Some(c) => c.parse().map_err(|_| ServiceError::validation(format!("invalid cursor `{c}`")))?,
    };
    let limit = params.limit.unwrap_or(DEFAULT_PAGE);
    if limit == 0 || limit > MAX_PAGE {
        return Err(ServiceError::validation(format!("limit must be between 1 and {MAX_PAGE}")));
    }
    let total = all.len();
    let end = (start + limit).min(total);
    let items = all.get(start..end).unwrap_or_default().iter().map(|t| (*t).clone()).collect();
    let next_cursor = (end < total).then(|| end.to_string());
    Ok(Page { items, next_cursor, total })
}

#[derive(Debug, Serialize)]
struct Health {
    status: &'static str,
    documents: usize,
    fragments: usize,
    labeled: usize,
    triage_pending: usize,
    eval_runs: usize,
}

async fn health(State(state): State<AppState>) -> Json<Health> {
    let snap = state.store().snapshot();
    Json(Health {
        status: "ok",
        documents: snap.corpus.documents().len(),
        fragments: snap.corpus.fragments().len(),
        labeled: snap.corpus.labeled_fragments().count(),
        triage_pending: snap.triage.iter(Some(TriageStatus::Pending)).count(),
        eval_runs: snap.runs.len(),
    })
}

#[derive(Debug, Deserialize)]
pub struct DocumentInput {
    pub id: Option<String>,
    pub source: Option<DocumentSource>,
    pub origin_ref: Option<String>,
    pub title: Option<String>,
    pub raw_text: String,
    pub published_at: Option<DateTime<Utc>>,
}

#[derive(Debug, Deserialize)]
struct DocumentsRequest {
    documents: Vec<DocumentInput>,
}

#[derive(Debug, Serialize)]
struct AddedDocument {
    id: String,
    lang: Option<LanguageTag>,
    fragment_ids: Vec<String>,
}

async fn add_documents(
    State(state): State<AppState>,
    ApiJson(request): ApiJson<DocumentsRequest>,
) -> Result<(StatusCode, Json<serde_json::Value>), ServiceError> {
    if request.documents.is_empty() {
        return Err(ServiceError::validation("documents must not be empty"));
    }
    let now = Utc::now();
    let mut batch = Vec::with_capacity(request.documents.len());
    for (n, input) in request.documents.into_iter().enumerate() {
        if input.raw_text.trim().is_empty() {
            return Err(ServiceError::validation(format!("documents[{n}].raw_text is empty")));
        }
        let id = input.id.unwrap_or_else(|| hashed_id("doc", &[&input.raw_text]));
        let origin = input.origin_ref.unwrap_or_else(|| format!("api://documents/{id}"));
        let mut document = Document::new(id, input.source.unwrap_or(DocumentSource::Manual), origin, input.raw_text);
        document.fetched_at = now;
        document.title = input.title;
        document.published_at = input.published_at;
        let document = clean_document(&document)
            .map_err(|e| ServiceError::validation(format!("documents[{n}]: {e}")))?;
        let fragments = segment_fragments(&document);
        batch.push(DocumentAdded { document, fragments });
    }
    let store_state = state.clone();
    let added = blocking(move || store_state.store().add_documents(batch)).await?;
    let documents: Vec<AddedDocument> = added
        .into_iter()
        .map(|a| AddedDocument {
            id: a.document.id,
            lang: a.document.lang,
            fragment_ids: a.fragments.into_iter().map(|f| f.id).collect(),
        })
        .collect();
    Ok((StatusCode::CREATED, Json(serde_json::json!({ "documents": documents }))))
}

async fn get_fragment(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<Fragment>, ServiceError> {
    let snap = state.store().snapshot();
    snap.corpus
        .fragment(&id)
        .cloned()
        .map(Json)
        .ok_or_else(|| ServiceError::NotFound(format!("fragment `{id}` not found")))
}

async fn labeling_queue(
    State(state): State<AppState>,
    params: Result<Query<PageParams>, QueryRejection>,
) -> Result<Json<Page<Fragment>>, ServiceError> {
    let params = query(params)?;
    let lang: Option<LanguageTag> = match &params.lang {
        None => None,
        Some(l) => Some(
            serde_json::from_value(serde_json::Value::String(l.clone()))
                .map_err(|_| ServiceError::validation(format!("unknown language `{l}`")))?,
        ),
    };
    let snap = state.store().snapshot();
    let unlabeled: Vec<&Fragment> = snap
        .corpus
        .fragments()
        .iter()
        .filter(|f| f.label.is_none() && lang.is_none_or(|l| f.lang == l))
        .collect();
    Ok(Json(paginate(unlabeled, &params)?))
}

#[derive(Debug, Deserialize)]
struct LabelRequest {
    fragment_id: String,
    label: String,
    annotator: String,
}

async fn submit_label(
    State(state): State<AppState>,
    ApiJson(request): ApiJson<LabelRequest>,
) -> Result<Json<Fragment>, ServiceError> {
    let label: SentimentLabel = request.label.parse().map_err(|e| ServiceError::validation(format!("{e}")))?;
    let store_state = state.clone();
    let fragment = blocking(move || {
        store_state.store().apply_label(&request.fragment_id, label, &request.annotator, Utc::now())
    })
    .await?;
    Ok(Json(fragment))
}

async fn triage_queue(
    State(state): State<AppState>,
    params: Result<Query<PageParams>, QueryRejection>,
) -> Result<Json<Page<TriageItem>>, ServiceError> {
    let params = query(params)?;
    let status = match &params.status {
        None => None,
        Some(s) => Some(s.parse::<TriageStatus>().map_err(ServiceError::validation)?),
    };
    let snap = state.store().snapshot();
    Ok(Json(paginate(snap.triage.iter(status).collect(), &params)?))
}

async fn get_triage_item(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<TriageItem>, ServiceError> {
    let snap = state.store().snapshot();
    snap.triage
        .get(&id)
        .cloned()
        .map(Json)
        .ok_or_else(|| ServiceError::NotFound(format!("triage item `{id}` not found")))
}

#[derive(Debug, Deserialize)]
struct DecisionRequest {
    decision: Decision,
    analyst: String,
}

async fn decide(
    State(state): State<AppState>,
    Path(id): Path<String>,
    ApiJson(request): ApiJson<DecisionRequest>,
) -> Result<Json<TriageItem>, ServiceError> {
    let store_state = state.clone();
    let item =
        blocking(move || store_state.store().decide(&id, request.decision, &request.analyst, Utc::now())).await?;
    Ok(Json(item))
}

#[derive(Debug, Deserialize)]
struct ScreenRequest {
    fragment_ids: Option<Vec<String>>,
    texts: Option<Vec<String>>,
    classifier: Option<String>,
}

#[derive(Debug, Serialize)]
struct ScreenResponse {
    run: ScreenRun,
    items: Vec<ScreenedItem>,
    enqueued: Vec<TriageItem>,
}

/// Named classifier, or the baseline: the configured model when there is
/// one, otherwise a model trained on the live corpus's labeled fragments.
fn resolve_screening_classifier(state: &AppState, name: &str) -> Result<Arc<dyn Classifier>, ServiceError> {
    if name != BASELINE {
        return state
            .inner
            .classifiers
            .get(name)
            .cloned()
            .ok_or_else(|| ServiceError::validation(format!("unknown classifier `{name}`")));
    }
    if let Some(model) = &state.inner.model {
        return Ok(Arc::clone(model) as Arc<dyn Classifier>);
    }
    let snap = state.store().snapshot();
    let model = BaselineModel::train(snap.corpus.labeled_fragments(), DEFAULT_ALPHA, &Tokenizer::default())
        .map_err(|e| ServiceError::Validation {
            message: format!("cannot train baseline on the live corpus: {e}"),
            detail: Some(serde_json::json!({ "distribution": snap.corpus.class_distribution() })),
        })?;
    Ok(Arc::new(model))
}

async fn screen(
    State(state): State<AppState>,
    ApiJson(request): ApiJson<ScreenRequest>,
) -> Result<Json<ScreenResponse>, ServiceError> {
    let fragments: Vec<Fragment> = match (request.fragment_ids, request.texts) {
        (Some(ids), None) if !ids.is_empty() => {
            let snap = state.store().snapshot();
            ids.iter()
                .map(|id| {
                    snap.corpus.fragment(id).cloned().ok_or_else(|| ServiceError::NotFound(format!("fragment `{id}` not found")))
                })
                .collect::<Result<_, _>>()?
        }
        (None, Some(texts)) if !texts.is_empty() => texts
            .into_iter()
            .enumerate()
            .map(|(i, text)| {
                if text.trim().is_empty() {
                    return Err(ServiceError::validation(format!("texts[{i}] is empty")));
                }
                Ok(Fragment {
                    id: format!("inline#{i}"),
                    doc_id: String::new(),
                    index: i,
                    lang: detect_language(&text),
                    text,
                    label: None,
                    predicted: None,
                })
            })
            .collect::<Result<_, _>>()?,
        _ => return Err(ServiceError::validation("give exactly one of a non-empty `fragment_ids` or `texts`")),
    };
    let name = request.classifier.unwrap_or_else(|| BASELINE.to_string());
    let store_state = state.clone();
    let response = blocking(move || {
        let classifier = resolve_screening_classifier(&store_state, &name)?;
        let result = screen_batch(classifier.as_ref(), &fragments);
        let (run, enqueued) = store_state.store().record_screen(&classifier.descriptor(), &result.items, Utc::now())?;
        Ok(ScreenResponse { run, items: result.items, enqueued })
    })
    .await?;
    Ok(Json(response))
}

fn default_classifier() -> String {
    BASELINE.to_string()
}

fn default_fraction() -> f64 {
    DEFAULT_TEST_FRACTION
}

fn default_seed() -> u64 {
    42
}

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

#[derive(Debug, Deserialize)]
struct EvalRunRequest {
    dataset_id: String,
    #[serde(default = "default_classifier")]
    classifier: String,
    #[serde(default = "default_fraction")]
    fraction: f64,
    #[serde(default = "default_seed")]
    seed: u64,
    #[serde(default = "default_alpha")]
    alpha: f64,
}

/// A run as served to clients: metrics rounded to four decimals.
#[derive(Debug, Serialize, Deserialize)]
pub struct EvalRunView {
    pub run_id: String,
    pub dataset_id: String,
    pub classifier: String,
    pub seed: u64,
    pub test_fraction: f64,
    pub partial: bool,
    pub created_at: DateTime<Utc>,
    pub report: EvalReport,
    pub errors: Vec<ItemError>,
    pub pairs: Vec<EvalPair>,
}

impl From<&EvalRunRecord> for EvalRunView {
    fn from(r: &EvalRunRecord) -> Self {
        EvalRunView {
            run_id: r.run_id.clone(),
            dataset_id: r.dataset_id.clone(),
            classifier: r.classifier.clone(),
            seed: r.seed,
            test_fraction: r.test_fraction,
            partial: r.partial,
            created_at: r.created_at,
            report: r.report.rounded(),
            errors: r.errors.clone(),
            pairs: r.pairs.clone(),
        }
    }
}

/// Evaluates a classifier on a dataset and persists the run.
pub fn evaluate_and_record(
    state: &AppState,
    dataset_id: &str,
    classifier: &str,
    fraction: f64,
    seed: u64,
    alpha: f64,
) -> Result<EvalRunRecord, ServiceError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(ServiceError::validation(format!("fraction must be in (0, 1), got {fraction}")));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(ServiceError::validation(format!("alpha must be positive, got {alpha}")));
    }
    let fragments: Arc<Vec<Fragment>> = if dataset_id == LIVE_DATASET {
        Arc::new(state.store().snapshot().corpus.fragments().to_vec())
    } else {
        state
            .inner
            .datasets
            .get(dataset_id)
            .cloned()
            .ok_or_else(|| ServiceError::NotFound(format!("dataset `{dataset_id}` not found")))?
    };
    let named;
    let choice = if classifier == BASELINE {
        ClassifierChoice::Baseline { alpha }
    } else {
        named = state
            .inner
            .classifiers
            .get(classifier)
            .cloned()
            .ok_or_else(|| ServiceError::validation(format!("unknown classifier `{classifier}`")))?;
        ClassifierChoice::Fixed(named.as_ref())
    };
    let request = EvalRequest { dataset_id, test_fraction: fraction, seed };
    let record = run_evaluation(&fragments, choice, &request, Utc::now()).map_err(|e| match e {
        ServiceError::Validation { message, detail } => {
            let labeled = class_distribution(fragments.iter());
            let mut detail = detail.unwrap_or_else(|| serde_json::json!({}));
            detail["dataset_distribution"] = serde_json::to_value(labeled).expect("distribution serializes");
            ServiceError::Validation { message, detail: Some(detail) }
        }
        other => other,
    })?;
    state.store().record_run(record)
}

async fn create_eval_run(
    State(state): State<AppState>,
    ApiJson(request): ApiJson<EvalRunRequest>,
) -> Result<(StatusCode, Json<EvalRunView>), ServiceError> {
    let store_state = state.clone();
    let record = blocking(move || {
        evaluate_and_record(
            &store_state,
            &request.dataset_id,
            &request.classifier,
            request.fraction,
            request.seed,
            request.alpha,
        )
    })
    .await?;
    Ok((StatusCode::CREATED, Json(EvalRunView::from(&record))))
}

#[derive(Debug, Serialize)]
struct RunSummary {
    run_id: String,
    dataset_id: String,
    classifier: String,
    accuracy: Option<f64>,
    partial: bool,
    created_at: DateTime<Utc>,
}

async fn list_eval_runs(State(state): State<AppState>) -> Json<Vec<RunSummary>> {
    let snap = state.store().snapshot();
    Json(
        snap.runs
            .values()
            .map(|r| RunSummary {
                run_id: r.run_id.clone(),
                dataset_id: r.dataset_id.clone(),
                classifier: r.classifier.clone(),
                accuracy: r.report.rounded().weighted.accuracy,
                partial: r.partial,
                created_at: r.created_at,
            })
            .collect(),
    )
}

async fn get_eval_run(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<EvalRunView>, ServiceError> {
    let snap = state.store().snapshot();
    snap.runs
        .get(&id)
        .map(|r| Json(EvalRunView::from(r)))
        .ok_or_else(|| ServiceError::NotFound(format!("eval run `{id}` not found")))
}
