//! Local verdict service for the browser extension.
//!
//! ```text
//! POST /predict   {"url": "..."}                               -> Verdict
//! POST /history   {"verdict_id"|"verdict", "user_action"}      -> stored entry
//! GET  /history?limit=N                                        -> newest first
//! GET  /health                                                 -> status, model_id, uptime
//! ```
//!
//! Every JSON body carries `"protocol"`. Errors look like
//! `{"protocol":1,"error":"timeout","message":"..."}`.

use std::collections::{HashMap, VecDeque};
use std::net::SocketAddr;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, Instant};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Query, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::Utc;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::cors::{AllowOrigin, CorsLayer};
use tracing::{error, info};

use phishlens::dataset::{extract_url, EvidenceSource, ExtractConfig};
use phishlens::ml::TrainedModel;
use phishlens::parse_url;

use crate::history::HistoryLog;
use crate::verdict::{UserAction, Verdict, PROTOCOL_VERSION};

pub const DEFAULT_PORT: u16 = 8970;
pub const DEFAULT_DEADLINE: Duration = Duration::from_secs(8);
pub const DEFAULT_HISTORY_LIMIT: usize = 50;
const RECENT_VERDICTS: usize = 4096;

pub struct LoadedModel {
    pub model: TrainedModel,
    pub id: String,
}

/// Verdicts handed out recently, so `/history` can take just an id.
#[derive(Default)]
struct Recent {
    by_id: HashMap<String, Verdict>,
    order: VecDeque<String>,
}

impl Recent {
    fn insert(&mut self, v: Verdict) {
        if self.by_id.insert(v.id.clone(), v.clone()).is_none() {
            self.order.push_back(v.id);
            if self.order.len() > RECENT_VERDICTS {
                if let Some(old) = self.order.pop_front() {
                    self.by_id.remove(&old);
                }
            }
        }
    }
}

pub struct AppState {
    model: RwLock<Option<Arc<LoadedModel>>>,
    evidence: Arc<dyn EvidenceSource>,
    extract: ExtractConfig,
    deadline: Duration,
    history: Arc<HistoryLog>,
    recent: Mutex<Recent>,
    started: Instant,
}

impl AppState {
    pub fn new(
        evidence: Arc<dyn EvidenceSource>,
        extract: ExtractConfig,
        deadline: Duration,
        history: Arc<HistoryLog>,
    ) -> Self {
        Self {
            model: RwLock::new(None),
            evidence,
            extract,
            deadline,
            history,
            recent: Mutex::new(Recent::default()),
            started: Instant::now(),
        }
    }

    pub fn set_model(&self, m: LoadedModel) {
        *self.model.write().unwrap_or_else(|p| p.into_inner()) = Some(Arc::new(m));
    }

    fn model(&self) -> Option<Arc<LoadedModel>> {
        self.model.read().unwrap_or_else(|p| p.into_inner()).clone()
    }
}

pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    fn no_model() -> Self {
        Self::new(
            StatusCode::SERVICE_UNAVAILABLE,
            "model_not_loaded",
            "no model loaded yet",
        )
    }

    fn internal(message: impl Into<String>) -> Self {
        let message = message.into();
        error!(%message, "request failed");
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({
            "protocol": PROTOCOL_VERSION,
            "error": self.code,
            "message": self.message,
        });
        (self.status, Json(body)).into_response()
    }
}

#[derive(Serialize)]
struct Envelope<T> {
    protocol: u32,
    #[serde(flatten)]
    body: T,
}

fn envelope<T: Serialize>(body: T) -> Json<Envelope<T>> {
    Json(Envelope {
        protocol: PROTOCOL_VERSION,
        body,
    })
}

#[derive(Deserialize)]
struct PredictRequest {
    url: String,
}

async fn predict(
    State(st): State<Arc<AppState>>,
    body: Result<Json<PredictRequest>, JsonRejection>,
) -> Result<impl IntoResponse, ApiError> {
    let Json(req) = body.map_err(|e| ApiError::bad_request(e.body_text()))?;
    let model = st.model().ok_or_else(ApiError::no_model)?;
    let url = req.url.trim().to_string();
    if url.is_empty() {
        return Err(ApiError::bad_request("url is empty"));
    }
    parse_url(&url).map_err(|e| ApiError::bad_request(format!("malformed url: {e}")))?;

    let started = Instant::now();
    let (evidence, cfg, u) = (st.evidence.clone(), st.extract.clone(), url.clone());
    let task = tokio::task::spawn_blocking(move || extract_url(&u, evidence.as_ref(), &cfg));
    let extraction = match tokio::time::timeout(st.deadline, task).await {
        Err(_) => {
            return Err(ApiError::new(
                StatusCode::GATEWAY_TIMEOUT,
                "timeout",
                format!(
                    "feature extraction exceeded {} ms; no verdict available",
                    st.deadline.as_millis()
                ),
            ))
        }
        Ok(Err(join)) => return Err(ApiError::internal(join.to_string())),
        Ok(Ok(Err(e))) => return Err(ApiError::bad_request(format!("malformed url: {e}"))),
        Ok(Ok(Ok(x))) => x,
    };
    let prediction = model.model.predict(&extraction.features);
    let verdict = Verdict::new(
        &url,
        extraction.features,
        prediction,
        &model.id,
        started.elapsed().as_secs_f64() * 1000.0,
        Utc::now(),
    );
    st.recent
        .lock()
        .unwrap_or_else(|p| p.into_inner())
        .insert(verdict.clone());
    Ok(envelope(verdict))
}

#[derive(Deserialize)]
struct HistoryPost {
    verdict_id: Option<String>,
    verdict: Option<Verdict>,
    user_action: String,
}

async fn post_history(
    State(st): State<Arc<AppState>>,
    body: Result<Json<HistoryPost>, JsonRejection>,
) -> Result<impl IntoResponse, ApiError> {
    let Json(req) = body.map_err(|e| ApiError::bad_request(e.body_text()))?;
    let action: UserAction = req.user_action.parse().map_err(ApiError::bad_request)?;
    let verdict = match (req.verdict_id, req.verdict) {
        (Some(_), Some(_)) => {
            return Err(ApiError::bad_request(
                "give either verdict_id or verdict, not both",
            ))
        }
        (None, None) => return Err(ApiError::bad_request("verdict_id or verdict is required")),
        (Some(id), None) => st
            .recent
            .lock()
            .unwrap_or_else(|p| p.into_inner())
            .by_id
            .get(&id)
            .cloned()
            .ok_or_else(|| {
                ApiError::new(
                    StatusCode::NOT_FOUND,
                    "unknown_verdict",
                    format!("no recent verdict with id {id}; send the full verdict"),
                )
            })?,
        (None, Some(mut v)) => {
            v.normalize().map_err(ApiError::bad_request)?;
            v
        }
    };
    let log = st.history.clone();
    let entry = tokio::task::spawn_blocking(move || log.append(verdict, action))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
        .map_err(|e| ApiError::internal(format!("history append failed: {e}")))?;
    Ok((StatusCode::CREATED, envelope(json!({ "entry": entry }))))
}

#[derive(Deserialize)]
struct HistoryQuery {
    limit: Option<usize>,
}

async fn get_history(
    State(st): State<Arc<AppState>>,
    q: Result<Query<HistoryQuery>, QueryRejection>,
) -> Result<impl IntoResponse, ApiError> {
    let Query(q) = q.map_err(|e| ApiError::bad_request(e.body_text()))?;
    let limit = q.limit.unwrap_or(DEFAULT_HISTORY_LIMIT);
    let log = st.history.clone();
    let entries = tokio::task::spawn_blocking(move || log.recent(limit))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
        .map_err(|e| ApiError::internal(format!("history read failed: {e}")))?;
    Ok(envelope(json!({ "entries": entries })))
}

async fn health(State(st): State<Arc<AppState>>) -> Response {
    let uptime = st.started.elapsed().as_secs_f64();
    match st.model() {
        Some(m) => envelope(json!({
            "status": "ok",
            "model_id": m.id,
            "uptime": uptime,
        }))
        .into_response(),
        None => (
            StatusCode::SERVICE_UNAVAILABLE,
            envelope(json!({
                "status": "loading",
                "model_id": null,
                "uptime": uptime,
            })),
        )
            .into_response(),
    }
}

/// With an empty allowlist any browser-extension origin may call the
/// service; otherwise only the listed origins.
fn cors(allow: &[String]) -> CorsLayer {
    let list: Vec<HeaderValue> = allow
        .iter()
        .filter_map(|o| HeaderValue::from_str(o.trim_end_matches('/')).ok())
        .collect();
    let origin = if list.is_empty() {
        AllowOrigin::predicate(|o: &HeaderValue, _| {
            o.to_str().is_ok_and(|s| {
                s.starts_with("chrome-extension://")
                    || s.starts_with("moz-extension://")
                    || s.starts_with("safari-web-extension://")
            })
        })
    } else {
        AllowOrigin::list(list)
    };
    CorsLayer::new()
        .allow_origin(origin)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE])
}

pub fn router(state: Arc<AppState>, allow_origins: &[String]) -> Router {
    Router::new()
        .route("/predict", post(predict))
        .route("/history", post(post_history).get(get_history))
        .route("/health", get(health))
        .layer(cors(allow_origins))
        .with_state(state)
}

pub struct ServeOptions {
    pub addr: SocketAddr,
    pub model_path: std::path::PathBuf,
    pub allow_origins: Vec<String>,
}

/// Bind, announce the address on stdout, then load the model. Requests
/// arriving before the model is ready get 503.
pub async fn serve(state: Arc<AppState>, opts: ServeOptions) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(opts.addr).await?;
    let addr = listener.local_addr()?;
    println!("listening on http://{addr}");
    {
        use std::io::Write;
        std::io::stdout().flush()?;
    }
    let app = router(state.clone(), &opts.allow_origins);
    let server = tokio::spawn(async move {
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
    });

    let path = opts.model_path.clone();
    let loaded = tokio::task::spawn_blocking(move || phishlens::ml::load_model(&path)).await?;
    match loaded {
        Ok((model, id)) => {
            info!(model_id = %id, kind = %model.kind(), "model loaded");
            state.set_model(LoadedModel { model, id });
        }
        Err(e) => {
            server.abort();
            return Err(anyhow::Error::new(crate::error::CliError::from(e)));
        }
    }
    server.await??;
    Ok(())
}
