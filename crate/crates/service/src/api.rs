//! HTTP JSON API.
//!
//! | method | path | body | response |
//! |---|---|---|---|
//! | GET | `/api/config` | | condition and active roles |
//! | POST | `/api/sessions` | `{pseudonym?, condition?}` | `{session_id, pseudonym, condition}` |
//! | POST | `/api/sessions/{id}/messages` | `{text}` | `{inquiry, routing, reply}` |
//! | POST | `/api/sessions/{id}/events` | `{page}` | the logged event |
//! | GET | `/api/sessions/{id}/transcript` | | session |
//! | GET | `/api/admin/sequences` | | plot-data CSV |
//! | GET | `/api/admin/transitions` | | transition matrix |
//! | GET | `/api/admin/topics?k=&iterations=&seed=&top=` | | topic report |
//! | POST | `/api/eval/batch?strict=&format=` | multipart `dataset` [+ `rubric`] | report (JSON or CSV) |
//!
//! Errors are `{"error": "..."}` with 400, 404 or 500.

use std::sync::Arc;

use axum::extract::{DefaultBodyLimit, Multipart, Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use tutorbots_core::analytics::{InteractionEvent, Page};
use tutorbots_core::metrics::Evaluator;
use tutorbots_core::{BotRole, Condition, Session, SessionId, TransitionMatrix};

use crate::analysis::{self, TopicQuery, TopicReport};
use crate::eval::{eval_batch, EvalError, EvalReport};
use crate::store::{Exchange, ServiceError, Store};

pub struct AppState {
    pub store: Store,
    pub evaluator: Evaluator,
}

#[derive(Debug)]
pub enum ApiError {
    Service(ServiceError),
    Eval(EvalError),
    BadRequest(String),
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        ApiError::Service(e)
    }
}

impl From<tutorbots_core::Error> for ApiError {
    fn from(e: tutorbots_core::Error) -> Self {
        ApiError::Service(e.into())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, message) = match self {
            ApiError::Service(e) => {
                let status = match &e {
                    ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
                    ServiceError::Invalid(_) | ServiceError::ConditionMismatch { .. } => {
                        StatusCode::BAD_REQUEST
                    }
                    ServiceError::Log(_) | ServiceError::Internal(_) => {
                        tracing::error!(error = %e, "request failed");
                        StatusCode::INTERNAL_SERVER_ERROR
                    }
                };
                (status, e.to_string())
            }
            ApiError::Eval(EvalError::Io { .. }) => {
                (StatusCode::INTERNAL_SERVER_ERROR, "could not read upload".to_owned())
            }
            ApiError::Eval(e) => (StatusCode::BAD_REQUEST, e.to_string()),
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, m),
        };
        (status, Json(json!({ "error": message }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoleInfo {
    pub role: BotRole,
    pub name: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigInfo {
    pub condition: Condition,
    /// Roles a student can meet: all four in the multi-role condition, the
    /// instructor alone otherwise.
    pub roles: Vec<RoleInfo>,
    pub backend: String,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub pseudonym: Option<String>,
    pub condition: Option<Condition>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionCreated {
    pub session_id: SessionId,
    pub pseudonym: String,
    pub condition: Condition,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PostMessage {
    pub text: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PostEvent {
    pub page: Page,
}

#[derive(Debug, Default, Deserialize)]
pub struct TopicParams {
    pub k: Option<usize>,
    pub iterations: Option<usize>,
    pub seed: Option<u64>,
    pub top: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
pub struct EvalParams {
    #[serde(default)]
    pub strict: bool,
    pub format: Option<String>,
}

const MAX_TOPICS: usize = 50;
const MAX_ITERATIONS: usize = 5_000;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/config", get(config_info))
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}/messages", post(post_message))
        .route("/api/sessions/{id}/events", post(post_event))
        .route("/api/sessions/{id}/transcript", get(transcript))
        .route("/api/admin/sequences", get(sequences))
        .route("/api/admin/transitions", get(transitions))
        .route("/api/admin/topics", get(topics))
        .route("/api/eval/batch", post(eval))
        .layer(DefaultBodyLimit::max(16 * 1024 * 1024))
        .with_state(state)
}

async fn config_info(State(app): State<Arc<AppState>>) -> Json<ConfigInfo> {
    let condition = app.store.condition();
    let roles = match condition {
        Condition::SingleBot => vec![BotRole::Instructor],
        Condition::MultiRole => BotRole::ALL.to_vec(),
    };
    Json(ConfigInfo {
        condition,
        roles: roles
            .into_iter()
            .map(|role| RoleInfo {
                role,
                name: role.display_name().to_owned(),
            })
            .collect(),
        backend: app.store.backend_name().to_owned(),
    })
}

async fn create_session(
    State(app): State<Arc<AppState>>,
    body: Option<Json<CreateSession>>,
) -> ApiResult<(StatusCode, Json<SessionCreated>)> {
    let req = body.map(|Json(b)| b).unwrap_or_default();
    let session = app.store.create_session(req.pseudonym.as_deref(), req.condition)?;
    Ok((
        StatusCode::CREATED,
        Json(SessionCreated {
            session_id: session.id().clone(),
            pseudonym: session.pseudonym().to_owned(),
            condition: session.condition(),
        }),
    ))
}

async fn post_message(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(req): Json<PostMessage>,
) -> ApiResult<Json<Exchange>> {
    Ok(Json(app.store.post_message(&SessionId::new(id), &req.text).await?))
}

async fn post_event(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(req): Json<PostEvent>,
) -> ApiResult<Json<InteractionEvent>> {
    Ok(Json(app.store.record_click(&SessionId::new(id), req.page).await?))
}

async fn transcript(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<Session>> {
    Ok(Json(app.store.transcript(&SessionId::new(id)).await?))
}

async fn sequences(State(app): State<Arc<AppState>>) -> Response {
    let events = app.store.interaction_events().await;
    (
        [(header::CONTENT_TYPE, "text/csv; charset=utf-8")],
        analysis::sequence_plot(&events),
    )
        .into_response()
}

async fn transitions(State(app): State<Arc<AppState>>) -> ApiResult<Json<TransitionMatrix>> {
    let events = app.store.interaction_events().await;
    Ok(Json(analysis::transitions(&events)?))
}

async fn topics(
    State(app): State<Arc<AppState>>,
    Query(params): Query<TopicParams>,
) -> ApiResult<Json<TopicReport>> {
    let d = TopicQuery::default();
    let query = TopicQuery {
        k: params.k.unwrap_or(d.k),
        iterations: params.iterations.unwrap_or(d.iterations),
        seed: params.seed.unwrap_or(d.seed),
        top: params.top.unwrap_or(d.top),
    };
    if query.k > MAX_TOPICS || query.iterations > MAX_ITERATIONS {
        return Err(ApiError::BadRequest(format!(
            "k is limited to {MAX_TOPICS} and iterations to {MAX_ITERATIONS}"
        )));
    }
    let docs = analysis::student_documents(app.store.snapshot().await.values());
    let report = tokio::task::spawn_blocking(move || analysis::topic_report(&docs, query))
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))??;
    Ok(Json(report))
}

async fn eval(
    State(app): State<Arc<AppState>>,
    Query(params): Query<EvalParams>,
    mut multipart: Multipart,
) -> ApiResult<Response> {
    let mut dataset = None;
    let mut rubric = None;
    while let Some(field) = multipart
        .next_field()
        .await
        .map_err(|e| ApiError::BadRequest(e.to_string()))?
    {
        let name = field.name().unwrap_or_default().to_owned();
        let text = field.text().await.map_err(|e| ApiError::BadRequest(e.to_string()))?;
        match name.as_str() {
            "dataset" => dataset = Some(text),
            "rubric" => rubric = Some(text),
            other => return Err(ApiError::BadRequest(format!("unexpected field {other:?}"))),
        }
    }
    let dataset = dataset.ok_or_else(|| ApiError::BadRequest("missing field \"dataset\"".into()))?;
    let report: EvalReport = eval_batch(&app.evaluator, &dataset, rubric.as_deref(), params.strict)
        .map_err(ApiError::Eval)?;
    Ok(match params.format.as_deref() {
        None | Some("json") => Json(report).into_response(),
        Some("csv") => (
            [(header::CONTENT_TYPE, "text/csv; charset=utf-8")],
            report.levels_csv(),
        )
            .into_response(),
        Some(other) => return Err(ApiError::BadRequest(format!("unknown format {other:?}"))),
    })
}
