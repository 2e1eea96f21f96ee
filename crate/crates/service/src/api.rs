//! Route handlers. Every error body has the shape
//! `{"error": {"code": ..., "message": ...}}`.

use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use ruleforge::apriori::{CandidateStrategy, MiningConfig, MiningReport};
use ruleforge::dataset::{parse_dataset, to_transactions};
use ruleforge::id3::{build_tree_with, EmptyBranchPolicy};
use ruleforge::inference::{Answer, ConsultationSession, Explanation, Status};
use ruleforge::knowledge_base::parse_knb;
use ruleforge::ParseError;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::sessions::SessionStore;
use crate::store::{ArtifactKind, ArtifactStore, StoreError};

pub struct AppState {
    pub store: ArtifactStore,
    pub sessions: SessionStore,
}

impl AppState {
    pub fn new(store: ArtifactStore, sessions: SessionStore) -> Arc<Self> {
        Arc::new(Self { store, sessions })
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/datasets", post(upload_dataset))
        .route("/datasets/{id}/mine", post(mine))
        .route("/artifacts/{kind}/{id}", get(get_artifact))
        .route("/kbs", post(upload_kb))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/answer", post(answer))
        .route("/sessions/{id}/explanation", get(explanation))
        .with_state(state)
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
    location: Option<(usize, usize)>,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl ToString) -> Self {
        Self { status, code, message: message.to_string(), location: None }
    }

    fn parse(err: ParseError) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            code: "parse_error",
            message: err.to_string(),
            location: Some((err.line, err.column)),
        }
    }

    fn unprocessable(message: impl ToString) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_params", message)
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::NotFound(..) => Self::new(StatusCode::NOT_FOUND, "not_found", e),
            StoreError::Invalid(..) => Self::new(StatusCode::BAD_REQUEST, "invalid_artifact", e),
            _ => Self::new(StatusCode::INTERNAL_SERVER_ERROR, "storage_error", e),
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        Self::unprocessable(e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut error = json!({ "code": self.code, "message": self.message });
        if let Some((line, column)) = self.location {
            error["line"] = line.into();
            error["column"] = column.into();
        }
        (self.status, Json(json!({ "error": error }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

async fn upload_dataset(State(app): State<Arc<AppState>>, body: String) -> ApiResult<(StatusCode, Json<Value>)> {
    parse_dataset(&body).map_err(ApiError::parse)?;
    let a = app.store.put(ArtifactKind::Dataset, Value::String(body))?;
    Ok((StatusCode::CREATED, Json(json!({ "id": a.id }))))
}

async fn upload_kb(State(app): State<Arc<AppState>>, body: String) -> ApiResult<(StatusCode, Json<Value>)> {
    parse_knb(&body).map_err(ApiError::parse)?;
    let a = app.store.put(ArtifactKind::Kb, Value::String(body))?;
    Ok((StatusCode::CREATED, Json(json!({ "id": a.id }))))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MineParams {
    pub kind: String,
    pub min_support: Option<f64>,
    pub min_confidence: Option<f64>,
    pub strategy: Option<String>,
    pub empty_branch: Option<String>,
}

async fn mine(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    params: Result<Json<MineParams>, JsonRejection>,
) -> ApiResult<Json<Value>> {
    let text = app.store.get_text(ArtifactKind::Dataset, &id)?;
    let Json(params) = params?;
    let d = parse_dataset(&text).map_err(ApiError::parse)?;

    let (kind, result) = match params.kind.as_str() {
        "tree" => {
            let policy = match params.empty_branch.as_deref() {
                Some(p) => p.parse::<EmptyBranchPolicy>().map_err(ApiError::unprocessable)?,
                None => EmptyBranchPolicy::default(),
            };
            let tree = build_tree_with(&d, policy).map_err(ApiError::unprocessable)?;
            (ArtifactKind::Tree, serde_json::to_value(tree).expect("tree serializes"))
        }
        "assoc" => {
            let min_support = params.min_support.ok_or_else(|| ApiError::unprocessable("min_support is required"))?;
            let mut cfg = MiningConfig::new(min_support).map_err(ApiError::unprocessable)?;
            if let Some(c) = params.min_confidence {
                cfg = cfg.with_min_confidence(c).map_err(ApiError::unprocessable)?;
            }
            if let Some(s) = params.strategy.as_deref() {
                cfg = cfg.with_strategy(s.parse::<CandidateStrategy>().map_err(ApiError::unprocessable)?);
            }
            let db = to_transactions(&d).map_err(ApiError::unprocessable)?;
            let report = MiningReport::run(&db, &cfg).map_err(ApiError::unprocessable)?;
            (ArtifactKind::Patterns, serde_json::to_value(report).expect("report serializes"))
        }
        other => return Err(ApiError::unprocessable(format!("unknown kind `{other}` (expected tree or assoc)"))),
    };
    let stored = app.store.put(kind, result)?;
    Ok(Json(json!({ "id": stored.id, "kind": kind, "result": stored.payload })))
}

async fn get_artifact(
    State(app): State<Arc<AppState>>,
    Path((kind, id)): Path<(String, String)>,
) -> ApiResult<Json<Value>> {
    let kind = ArtifactKind::parse(&kind)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("unknown artifact kind `{kind}`")))?;
    let a = app.store.get(kind, &id)?;
    Ok(Json(serde_json::to_value(a).expect("artifact serializes")))
}

/// Wire form of a session state.
pub fn status_payload(session_id: &str, status: &Status) -> Value {
    match status {
        Status::AwaitingAnswer { attribute, menu } => json!({
            "session": session_id,
            "status": "awaiting",
            "question": { "attribute": attribute, "menu": menu },
        }),
        Status::Concluded(c) => json!({
            "session": session_id,
            "status": "concluded",
            "conclusion": { "class": c.class_value, "probability": c.probability },
        }),
        Status::Failed => json!({ "session": session_id, "status": "failed" }),
        Status::Aborted => json!({ "session": session_id, "status": "aborted" }),
    }
}

/// Wire form of an explanation; known facts are most recent first.
pub fn explanation_payload(session_id: &str, why: &Explanation) -> Value {
    json!({
        "session": session_id,
        "conclusion": why.conclusion.map(|c| json!({ "class": c.class_value, "probability": c.probability })),
        "known": why.known.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "text": why.to_string(),
    })
}

#[derive(Debug, Deserialize)]
struct CreateSession {
    kb: String,
}

async fn create_session(
    State(app): State<Arc<AppState>>,
    body: Result<Json<CreateSession>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<Value>)> {
    let Json(body) = body?;
    let text = app.store.get_text(ArtifactKind::Kb, &body.kb)?;
    let kb = parse_knb(&text).map_err(ApiError::parse)?;
    let session = ConsultationSession::start(kb).map_err(ApiError::unprocessable)?;
    let status = session.status().clone();
    let id = app.sessions.insert(session);
    Ok((StatusCode::CREATED, Json(status_payload(&id, &status))))
}

#[derive(Debug, Deserialize)]
struct AnswerBody {
    value: String,
}

fn unknown_session(id: &str) -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("no live session `{id}`"))
}

async fn answer(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Result<Json<AnswerBody>, JsonRejection>,
) -> ApiResult<Json<Value>> {
    let handle = app.sessions.get(&id).ok_or_else(|| unknown_session(&id))?;
    let Json(body) = body?;
    let mut rec = handle.lock().unwrap();
    let Status::AwaitingAnswer { attribute, .. } = rec.session.status().clone() else {
        return Err(ApiError::new(StatusCode::CONFLICT, "not_awaiting", "session is not awaiting an answer"));
    };
    let reply = if body.value == "exit" { Answer::Exit } else { Answer::Value(body.value) };
    let status = rec.session.submit_answer(&attribute, reply).map_err(ApiError::unprocessable)?;
    Ok(Json(status_payload(&id, status)))
}

async fn explanation(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let handle = app.sessions.get(&id).ok_or_else(|| unknown_session(&id))?;
    let rec = handle.lock().unwrap();
    let why = rec.session.explain().map_err(|e| ApiError::new(StatusCode::CONFLICT, "no_explanation", e))?;
    Ok(Json(explanation_payload(&id, &why)))
}
