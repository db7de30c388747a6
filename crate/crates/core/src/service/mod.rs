//! JSON-over-HTTP service: models loaded from a directory at startup,
//! configuration sessions with live propagation, and cached analyses.

mod session;

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock};
use std::time::{Duration, Instant};

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::cors::{Any, CorsLayer};

pub use session::{
    session_state, DecisionRequest, FeatureState, FeatureView, Session, SessionState,
};

use crate::analysis::{analyze, count_products, AnalysisError, Control, SolverBackend};
use crate::dsl::{parse_model, ParseError};
use crate::encode::{encode_model, EncodedModel};
use crate::model::{AnalysisReport, FeatureModel};

pub const DEFAULT_SESSION_TTL: Duration = Duration::from_secs(3600);

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Allowed browser origin; `*` allows any, `None` disables CORS headers.
    pub cors_origin: Option<String>,
    pub session_ttl: Duration,
    pub count_cap: usize,
    pub backend: SolverBackend,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            cors_origin: None,
            session_ttl: DEFAULT_SESSION_TTL,
            count_cap: crate::analysis::DEFAULT_COUNT_CAP,
            backend: SolverBackend::Auto,
        }
    }
}

pub struct LoadedModel {
    pub model: FeatureModel,
    pub encoded: EncodedModel,
    pub source: PathBuf,
    analysis: OnceLock<Result<AnalysisReport, AnalysisError>>,
    count: OnceLock<Result<u64, AnalysisError>>,
}

impl LoadedModel {
    pub fn new(model: FeatureModel, source: PathBuf) -> Result<Self, String> {
        let encoded = encode_model(&model).map_err(|e| e.to_string())?;
        Ok(LoadedModel {
            model,
            encoded,
            source,
            analysis: OnceLock::new(),
            count: OnceLock::new(),
        })
    }
}

/// A file that could not be loaded.
#[derive(Debug)]
pub struct LoadFailure {
    pub path: PathBuf,
    pub errors: Vec<String>,
}

/// Parses every `.fm` file in `dir` (not recursive), in file-name order.
/// Files that fail to parse, and later files reusing a model name, are
/// reported and skipped.
pub fn load_models(
    dir: &Path,
) -> std::io::Result<(BTreeMap<String, Arc<LoadedModel>>, Vec<LoadFailure>)> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "fm"))
        .collect();
    paths.sort();
    let mut models = BTreeMap::new();
    let mut failures = Vec::new();
    for path in paths {
        let fail = |errors: Vec<String>| LoadFailure {
            path: path.clone(),
            errors,
        };
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) => {
                failures.push(fail(vec![e.to_string()]));
                continue;
            }
        };
        let model = match parse_model(&text) {
            Ok(m) => m,
            Err(errs) => {
                failures.push(fail(errs.iter().map(ParseError::to_string).collect()));
                continue;
            }
        };
        if models.contains_key(&model.name) {
            failures.push(fail(vec![format!("duplicate model name `{}`", model.name)]));
            continue;
        }
        match LoadedModel::new(model, path.clone()) {
            Ok(m) => {
                models.insert(m.model.name.clone(), Arc::new(m));
            }
            Err(e) => failures.push(fail(vec![e])),
        }
    }
    Ok((models, failures))
}

pub struct AppState {
    models: BTreeMap<String, Arc<LoadedModel>>,
    sessions: Mutex<HashMap<String, Arc<tokio::sync::Mutex<Session>>>>,
    config: ServiceConfig,
}

impl AppState {
    pub fn new(models: BTreeMap<String, Arc<LoadedModel>>, config: ServiceConfig) -> Arc<Self> {
        Arc::new(AppState {
            models,
            sessions: Mutex::new(HashMap::new()),
            config,
        })
    }

    fn model(&self, name: &str) -> Result<Arc<LoadedModel>, ApiError> {
        self.models
            .get(name)
            .cloned()
            .ok_or_else(|| ApiError::not_found(format!("unknown model `{name}`")))
    }

    fn session(&self, id: &str) -> Result<Arc<tokio::sync::Mutex<Session>>, ApiError> {
        self.sessions
            .lock()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(format!("unknown session `{id}`")))
    }

    /// Drops sessions idle longer than the configured lifetime.
    fn expire_idle(&self) {
        let ttl = self.config.session_ttl;
        self.sessions.lock().unwrap().retain(|_, s| match s.try_lock() {
            Ok(s) => s.last_used.elapsed() <= ttl,
            // In use right now, so not idle.
            Err(_) => true,
        });
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: serde_json::Value,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: json!({ "error": message.into() }),
        }
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, message)
    }
}

impl From<AnalysisError> for ApiError {
    fn from(e: AnalysisError) -> Self {
        let status = match e {
            AnalysisError::TooLarge { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            AnalysisError::UnknownFeature(_) => StatusCode::NOT_FOUND,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self::new(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    let cors = state.config.cors_origin.as_deref().map(|origin| {
        let layer = CorsLayer::new().allow_methods(Any).allow_headers(Any);
        if origin == "*" {
            layer.allow_origin(Any)
        } else {
            match HeaderValue::from_str(origin) {
                Ok(v) => layer.allow_origin(v),
                Err(_) => {
                    tracing::warn!(origin, "ignoring malformed CORS origin");
                    layer
                }
            }
        }
    });
    let app = Router::new()
        .route("/api/health", get(health))
        .route("/api/models", get(list_models))
        .route("/api/models/{name}/tree", get(model_tree))
        .route("/api/models/{name}/analysis", get(model_analysis))
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}", get(get_session))
        .route("/api/sessions/{id}/decide", post(decide))
        .with_state(state);
    match cors {
        Some(layer) => app.layer(layer),
        None => app,
    }
}

/// Serves `state` on `listener` until ctrl-c.
pub async fn serve(listener: tokio::net::TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok" }))
}

#[derive(Debug, Serialize)]
struct ModelSummary {
    name: String,
    feature_count: usize,
    constraint_count: usize,
}

async fn list_models(State(st): State<Arc<AppState>>) -> Json<Vec<ModelSummary>> {
    Json(
        st.models
            .values()
            .map(|m| ModelSummary {
                name: m.model.name.clone(),
                feature_count: m.model.feature_count(),
                constraint_count: m.model.constraints.len(),
            })
            .collect(),
    )
}

async fn model_tree(
    State(st): State<Arc<AppState>>,
    UrlPath(name): UrlPath<String>,
) -> Result<Json<FeatureModel>, ApiError> {
    Ok(Json(st.model(&name)?.model.clone()))
}

#[derive(Debug, Deserialize)]
struct AnalysisQuery {
    #[serde(default)]
    count: bool,
}

async fn model_analysis(
    State(st): State<Arc<AppState>>,
    UrlPath(name): UrlPath<String>,
    Query(q): Query<AnalysisQuery>,
) -> Result<Json<AnalysisReport>, ApiError> {
    let m = st.model(&name)?;
    let (backend, cap) = (st.config.backend, st.config.count_cap);
    if q.count && m.encoded.feature_count() > cap.min(crate::analysis::MAX_ENUMERATION_FEATURES) {
        return Err(AnalysisError::TooLarge {
            features: m.encoded.feature_count(),
            cap,
        }
        .into());
    }
    let report = tokio::task::spawn_blocking(move || {
        let mut report = m
            .analysis
            .get_or_init(|| analyze(&m.encoded, backend, None, &Control::none()))
            .clone()?;
        if q.count {
            report.product_count = Some(if report.void {
                0
            } else {
                m.count
                    .get_or_init(|| count_products(&m.encoded, cap))
                    .clone()?
            });
        }
        Ok::<_, AnalysisError>(report)
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    Ok(Json(report))
}

#[derive(Debug, Deserialize)]
struct CreateSession {
    model: String,
}

async fn create_session(
    State(st): State<Arc<AppState>>,
    Json(req): Json<CreateSession>,
) -> Result<(StatusCode, Json<serde_json::Value>), ApiError> {
    let m = st.model(&req.model)?;
    st.expire_idle();
    let id = uuid::Uuid::new_v4().to_string();
    let session = Session::new(id.clone(), m.model.name.clone());
    let state = session.state(&m.encoded)?;
    st.sessions
        .lock()
        .unwrap()
        .insert(id.clone(), Arc::new(tokio::sync::Mutex::new(session)));
    Ok((
        StatusCode::CREATED,
        Json(json!({ "session_id": id, "state": state })),
    ))
}

async fn get_session(
    State(st): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<SessionState>, ApiError> {
    st.expire_idle();
    let handle = st.session(&id)?;
    let mut s = handle.lock().await;
    s.last_used = Instant::now();
    let m = st.model(&s.model)?;
    Ok(Json(s.state(&m.encoded)?))
}

#[derive(Debug, Deserialize)]
struct DecideRequest {
    feature: String,
    decision: DecisionRequest,
}

async fn decide(
    State(st): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Json(req): Json<DecideRequest>,
) -> Result<(StatusCode, Json<SessionState>), ApiError> {
    st.expire_idle();
    let handle = st.session(&id)?;
    let mut s = handle.lock().await;
    s.last_used = Instant::now();
    let m = st.model(&s.model)?;
    let feature = m
        .encoded
        .feature(&req.feature)
        .cloned()
        .ok_or_else(|| ApiError::not_found(format!("unknown feature `{}`", req.feature)))?;
    let state = s.decide(&m.encoded, &feature, req.decision.decision())?;
    let status = if state.conflict.is_some() {
        StatusCode::CONFLICT
    } else {
        StatusCode::OK
    };
    Ok((status, Json(state)))
}
