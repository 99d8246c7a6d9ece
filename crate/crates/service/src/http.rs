//! HTTP API. One mutex serializes writers (log append, then snapshot swap);
//! readers work on the latest published snapshot without taking it.

use std::sync::{Arc, Mutex, RwLock};

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use claimgraph::dsl::{parse_query, print_schema, DslError};
use claimgraph::ids::canonicalize_id;
use claimgraph::inference::{evaluate_profile, Alert, InferenceError, InterestProfile};
use claimgraph::ingest::{IngestError, Violation};
use claimgraph::kb::KnowledgeBase;
use claimgraph::query::{execute_with, export_map, extract_concept_map, MapError, MapFormat, QueryError};
use claimgraph::store::{Repository, StoreError};
use serde::{Deserialize, Serialize};

use crate::config::ServerConfig;

pub struct AppState {
    writer: Mutex<Repository>,
    snapshot: RwLock<Arc<KnowledgeBase>>,
    profiles: RwLock<Arc<Vec<InterestProfile>>>,
    config: ServerConfig,
}

pub type Shared = Arc<AppState>;

impl AppState {
    pub fn new(repo: Repository, config: ServerConfig) -> Shared {
        Arc::new(AppState {
            snapshot: RwLock::new(Arc::new(repo.kb().clone())),
            profiles: RwLock::new(Arc::new(repo.profiles().to_vec())),
            writer: Mutex::new(repo),
            config,
        })
    }

    pub fn snapshot(&self) -> Arc<KnowledgeBase> {
        self.snapshot.read().expect("snapshot lock").clone()
    }

    fn profiles(&self) -> Arc<Vec<InterestProfile>> {
        self.profiles.read().expect("profiles lock").clone()
    }
}

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/submissions", post(post_submission))
        .route("/query", get(get_query))
        .route("/maps/{id}", get(get_map))
        .route("/schema", get(get_schema))
        .route("/profiles", post(post_profiles))
        .route("/alerts", get(get_alerts))
        .route("/claims/{id}", get(get_claim))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not-found", "no such endpoint") })
        .with_state(state)
}

/// Error body: a stable code, a message and, for input errors, positions.
#[derive(Debug, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    status: StatusCode,
    pub error: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<Violation>,
}

impl ApiError {
    fn new(status: StatusCode, error: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            error,
            message: message.into(),
            violations: Vec::new(),
        }
    }

    fn internal(e: impl std::fmt::Display) -> Self {
        log::error!("{e}");
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string())
    }

    fn parse(status: StatusCode, e: &DslError) -> Self {
        let mut err = Self::new(status, "parse-error", e.to_string());
        err.violations = vec![Violation {
            line: e.line,
            col: e.col,
            message: e.message.clone(),
        }];
        err
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}

impl From<QueryError> for ApiError {
    fn from(e: QueryError) -> Self {
        let code = match &e {
            QueryError::UnknownId(_) => return Self::new(StatusCode::NOT_FOUND, "unknown-id", e.to_string()),
            QueryError::UnknownKind(_) => "unknown-kind",
            QueryError::UnknownLink(_) => "unknown-link",
            QueryError::Unsupported(_) => "unsupported",
            QueryError::Inference(InferenceError::UnknownId(_)) => {
                return Self::new(StatusCode::NOT_FOUND, "unknown-id", e.to_string())
            }
            QueryError::Inference(_) => "invalid-parameter",
        };
        Self::new(StatusCode::BAD_REQUEST, code, e.to_string())
    }
}

impl From<MapError> for ApiError {
    fn from(e: MapError) -> Self {
        match e {
            MapError::UnknownId(_) => Self::new(StatusCode::NOT_FOUND, "unknown-id", e.to_string()),
            MapError::InvalidDepth | MapError::UnknownFormat(_) => {
                Self::new(StatusCode::BAD_REQUEST, "invalid-parameter", e.to_string())
            }
            MapError::Invalid(_) => Self::internal(e),
        }
    }
}

/// Runs a write on a blocking thread, since appends sync to disk.
async fn with_writer<T: Send + 'static>(
    state: &Shared,
    f: impl FnOnce(&AppState, &mut Repository) -> T + Send + 'static,
) -> Result<T, ApiError> {
    let state = state.clone();
    tokio::task::spawn_blocking(move || {
        let mut repo = state.writer.lock().expect("writer lock");
        f(&state, &mut repo)
    })
    .await
    .map_err(ApiError::internal)
}

#[derive(Debug, Deserialize)]
struct SubmitParams {
    lax: Option<bool>,
    source: Option<String>,
}

async fn post_submission(
    State(state): State<Shared>,
    Query(params): Query<SubmitParams>,
    body: String,
) -> Result<Response, ApiError> {
    let lax = params.lax.unwrap_or(state.config.lax);
    let source = params.source.unwrap_or_else(|| "http".to_string());
    let result = with_writer(&state, move |s, repo| {
        let r = repo.ingest(&body, &source, lax);
        if r.is_ok() {
            *s.snapshot.write().expect("snapshot lock") = Arc::new(repo.kb().clone());
        }
        r
    })
    .await?;
    match result {
        Ok(report) => Ok((StatusCode::CREATED, Json(report)).into_response()),
        Err(StoreError::Ingest(e)) => {
            let code = match &e {
                IngestError::Parse(_) => "parse-error",
                IngestError::Rejected(_) => "rejected",
            };
            let mut err = ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, code, e.to_string());
            err.violations = e.violations();
            Err(err)
        }
        Err(e) => Err(ApiError::internal(e)),
    }
}

#[derive(Debug, Deserialize)]
struct QueryParams {
    q: String,
    w_docs: Option<f64>,
    w_domains: Option<f64>,
    w_problems: Option<f64>,
    threshold: Option<f64>,
}

async fn get_query(State(state): State<Shared>, Query(p): Query<QueryParams>) -> Result<Response, ApiError> {
    let query = parse_query(&p.q).map_err(|e| ApiError::parse(StatusCode::BAD_REQUEST, &e))?;
    let mut opts = state.config.rules.query_options();
    let w = &mut opts.impact_weights;
    w.docs = p.w_docs.unwrap_or(w.docs);
    w.domains = p.w_domains.unwrap_or(w.domains);
    w.problems = p.w_problems.unwrap_or(w.problems);
    opts.perspective_threshold = p.threshold.unwrap_or(opts.perspective_threshold);
    let rs = execute_with(&state.snapshot(), &query, &opts)?;
    Ok(Json(rs).into_response())
}

#[derive(Debug, Deserialize)]
struct MapParams {
    depth: Option<usize>,
    format: Option<String>,
    inferred: Option<bool>,
}

async fn get_map(
    State(state): State<Shared>,
    Path(id): Path<String>,
    Query(p): Query<MapParams>,
) -> Result<Response, ApiError> {
    let format = MapFormat::parse(p.format.as_deref().unwrap_or("json"))?;
    let id = canonicalize_id(&id).map_err(|_| ApiError::new(StatusCode::NOT_FOUND, "unknown-id", "empty id"))?;
    let map = extract_concept_map(&state.snapshot(), &id, p.depth.unwrap_or(1), p.inferred.unwrap_or(false))?;
    let content_type = match format {
        MapFormat::Dot => "text/vnd.graphviz; charset=utf-8",
        MapFormat::Json => "application/json",
    };
    Ok(([(header::CONTENT_TYPE, content_type)], export_map(&map, format)).into_response())
}

async fn get_schema(State(state): State<Shared>) -> Response {
    let text = print_schema(state.snapshot().schema());
    ([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], text).into_response()
}

#[derive(Debug, Serialize)]
struct ProfilesAdded {
    profiles: Vec<String>,
}

async fn post_profiles(State(state): State<Shared>, body: String) -> Result<Response, ApiError> {
    let result = with_writer(&state, move |s, repo| {
        let r = repo.add_profiles(&body);
        if r.is_ok() {
            *s.profiles.write().expect("profiles lock") = Arc::new(repo.profiles().to_vec());
        }
        r
    })
    .await?;
    match result {
        Ok(profiles) => Ok((StatusCode::CREATED, Json(ProfilesAdded { profiles })).into_response()),
        Err(StoreError::Config { error, .. }) => Err(ApiError::parse(StatusCode::UNPROCESSABLE_ENTITY, &error)),
        Err(e) => Err(ApiError::internal(e)),
    }
}

#[derive(Debug, Serialize)]
pub struct AlertResult {
    pub profile: String,
    pub fired: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alert: Option<Alert>,
}

async fn get_alerts(State(state): State<Shared>) -> Result<Response, ApiError> {
    let kb = state.snapshot();
    let mut out = Vec::new();
    for p in state.profiles().iter() {
        let alert = evaluate_profile(&kb, p).map_err(|e| ApiError::from(QueryError::from(e)))?;
        out.push(AlertResult {
            profile: p.id.clone(),
            fired: alert.is_some(),
            alert,
        });
    }
    Ok(Json(out).into_response())
}

async fn get_claim(State(state): State<Shared>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let kb = state.snapshot();
    match kb.claim(&id) {
        Some(c) => Ok(Json(c).into_response()),
        None => Err(ApiError::new(StatusCode::NOT_FOUND, "unknown-id", format!("unknown claim `{id}`"))),
    }
}
