//! HTTP/JSON API over [`SessionService`].
//!
//! | method | path | body |
//! |---|---|---|
//! | POST | `/sessions` | alternatives, optional criteria + matrix, facilitator |
//! | GET | `/sessions/{id}` | |
//! | POST | `/sessions/{id}/participants` | `{id, display_name?, role?}` |
//! | POST | `/sessions/{id}/phase` | `{advance_to}` |
//! | PUT | `/sessions/{id}/ballots/{participant}` | `{ranking}` |
//! | POST | `/sessions/{id}/suggest` | `{weights}` |
//! | GET | `/sessions/{id}/results?method=borda\|condorcet` | |
//! | GET | `/sessions/{id}/pairwise` | |
//! | POST | `/sessions/{id}/rerun` | |
//!
//! Callers identify themselves with the token issued at creation or
//! enrollment, sent in the [`TOKEN_HEADER`] header. Errors are
//! `{"error": code, "detail": text}`.

use std::collections::BTreeMap;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use crate::model::{load_matrix, Alternative, Criterion, EvaluationMatrix};
use crate::ranking::Ranking;
use crate::service::{Created, SessionService};
use crate::session::{
    NewParticipant, ParticipantView, Phase, Role, SessionError, SessionSpec, SessionView,
};
use crate::store::SessionStore;
use crate::voting::Method;

pub const TOKEN_HEADER: &str = "x-consilium-token";

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub detail: String,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, detail: impl Into<String>) -> Self {
        Self {
            status,
            body: ErrorBody {
                error: code.to_string(),
                detail: detail.into(),
            },
        }
    }

    fn bad_request(detail: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", detail)
    }
}

fn status_of(e: &SessionError) -> StatusCode {
    use SessionError::*;
    match e {
        NotFound(_) | UnknownParticipant(_) => StatusCode::NOT_FOUND,
        Forbidden(_) | FacilitatorCannotVote => StatusCode::FORBIDDEN,
        WrongPhase { .. }
        | InvalidTransition { .. }
        | NoBallots
        | DuplicateParticipant(_)
        | SecondFacilitator => StatusCode::CONFLICT,
        TooFewAlternatives(_)
        | Validation(_)
        | MalformedBallot(_)
        | NoMatrix
        | UnknownCriterion(_)
        | InvalidWeights(_) => StatusCode::UNPROCESSABLE_ENTITY,
        UnknownMethod(_) => StatusCode::BAD_REQUEST,
        Storage(_) => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        Self::new(status_of(&e), e.code(), e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        Self::bad_request(e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Either a bare id or a full `{id, label}` object.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum AlternativeInput {
    Id(String),
    Full(Alternative),
}

impl From<AlternativeInput> for Alternative {
    fn from(a: AlternativeInput) -> Self {
        match a {
            AlternativeInput::Id(id) => Alternative::bare(id),
            AlternativeInput::Full(a) => a,
        }
    }
}

#[derive(Debug, Deserialize)]
pub struct FacilitatorInput {
    pub id: String,
    #[serde(default)]
    pub display_name: Option<String>,
}

#[derive(Debug, Deserialize)]
pub struct CreateRequest {
    #[serde(default)]
    pub alternatives: Option<Vec<AlternativeInput>>,
    #[serde(default)]
    pub criteria: Option<Vec<Criterion>>,
    #[serde(default)]
    pub matrix: Option<EvaluationMatrix>,
    /// Matrix CSV text, as an alternative to `matrix`.
    #[serde(default)]
    pub matrix_csv: Option<String>,
    pub facilitator: FacilitatorInput,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CreatedResponse {
    pub session: SessionView,
    pub facilitator_token: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EnrolledResponse {
    pub participant: ParticipantView,
    pub token: String,
}

#[derive(Debug, Deserialize)]
pub struct PhaseRequest {
    pub advance_to: Phase,
}

#[derive(Debug, Deserialize)]
pub struct BallotRequest {
    pub ranking: Ranking,
}

#[derive(Debug, Deserialize)]
pub struct SuggestRequest {
    pub weights: BTreeMap<String, f64>,
}

#[derive(Debug, Deserialize)]
pub struct ResultsQuery {
    pub method: Option<String>,
}

fn token(headers: &HeaderMap) -> Option<&str> {
    headers.get(TOKEN_HEADER).and_then(|v| v.to_str().ok())
}

fn created(c: Created) -> (StatusCode, Json<CreatedResponse>) {
    (
        StatusCode::CREATED,
        Json(CreatedResponse {
            session: c.session.view(true),
            facilitator_token: c.facilitator_token,
        }),
    )
}

type Svc<S> = Arc<SessionService<S>>;

async fn create_session<S: SessionStore>(
    State(svc): State<Svc<S>>,
    body: Result<Json<CreateRequest>, JsonRejection>,
) -> ApiResult<impl IntoResponse> {
    let Json(req) = body?;
    let matrix = match (req.matrix, req.matrix_csv) {
        (Some(_), Some(_)) => {
            return Err(ApiError::bad_request(
                "give either matrix or matrix_csv, not both",
            ))
        }
        (Some(m), None) => Some(m),
        (None, Some(csv)) => Some(load_matrix(&csv).map_err(|e| {
            ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "validation_error",
                e.to_string(),
            )
        })?),
        (None, None) => None,
    };
    let spec = SessionSpec {
        alternatives: req
            .alternatives
            .map(|v| v.into_iter().map(Alternative::from).collect()),
        criteria: req.criteria,
        matrix,
    };
    let facilitator = NewParticipant {
        id: req.facilitator.id,
        display_name: req.facilitator.display_name,
        role: Role::Facilitator,
    };
    Ok(created(svc.create(spec, facilitator)?))
}

async fn get_session<S: SessionStore>(
    State(svc): State<Svc<S>>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> ApiResult<Json<SessionView>> {
    let s = svc.get(&id)?;
    Ok(Json(s.view(s.is_facilitator(token(&headers)))))
}

async fn enroll<S: SessionStore>(
    State(svc): State<Svc<S>>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Result<Json<NewParticipant>, JsonRejection>,
) -> ApiResult<impl IntoResponse> {
    let Json(p) = body?;
    let pid = p.id.clone();
    let (session, issued) = svc.enroll(&id, token(&headers), p)?;
    let participant = session
        .view(false)
        .participants
        .into_iter()
        .find(|v| v.id == pid)
        .expect("just enrolled");
    Ok((
        StatusCode::CREATED,
        Json(EnrolledResponse {
            participant,
            token: issued,
        }),
    ))
}

async fn advance<S: SessionStore>(
    State(svc): State<Svc<S>>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Result<Json<PhaseRequest>, JsonRejection>,
) -> ApiResult<Json<SessionView>> {
    let Json(req) = body?;
    let s = svc.advance(&id, token(&headers), req.advance_to)?;
    Ok(Json(s.view(true)))
}

async fn submit_ballot<S: SessionStore>(
    State(svc): State<Svc<S>>,
    Path((id, participant)): Path<(String, String)>,
    headers: HeaderMap,
    body: Result<Json<BallotRequest>, JsonRejection>,
) -> ApiResult<Json<SessionView>> {
    let Json(req) = body?;
    let s = svc.submit_ballot(&id, token(&headers), &participant, req.ranking)?;
    Ok(Json(s.view(false)))
}

async fn suggest<S: SessionStore>(
    State(svc): State<Svc<S>>,
    Path(id): Path<String>,
    body: Result<Json<SuggestRequest>, JsonRejection>,
) -> ApiResult<impl IntoResponse> {
    let Json(req) = body?;
    Ok(Json(svc.suggest(&id, &req.weights)?))
}

async fn results<S: SessionStore>(
    State(svc): State<Svc<S>>,
    Path(id): Path<String>,
    Query(q): Query<ResultsQuery>,
) -> ApiResult<impl IntoResponse> {
    let raw = q
        .method
        .ok_or_else(|| ApiError::bad_request("query parameter `method` is required"))?;
    let method: Method = raw
        .parse()
        .map_err(|_| SessionError::UnknownMethod(raw.clone()))?;
    Ok(Json(svc.results(&id, method)?))
}

async fn pairwise<S: SessionStore>(
    State(svc): State<Svc<S>>,
    Path(id): Path<String>,
) -> ApiResult<impl IntoResponse> {
    Ok(Json(svc.pairwise(&id)?))
}

async fn rerun<S: SessionStore>(
    State(svc): State<Svc<S>>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> ApiResult<impl IntoResponse> {
    Ok(created(svc.rerun(&id, token(&headers))?))
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such route")
}

pub fn router<S: SessionStore + 'static>(service: Arc<SessionService<S>>) -> Router {
    Router::new()
        .route("/sessions", post(create_session::<S>))
        .route("/sessions/{id}", get(get_session::<S>))
        .route("/sessions/{id}/participants", post(enroll::<S>))
        .route("/sessions/{id}/phase", post(advance::<S>))
        .route(
            "/sessions/{id}/ballots/{participant}",
            put(submit_ballot::<S>),
        )
        .route("/sessions/{id}/suggest", post(suggest::<S>))
        .route("/sessions/{id}/results", get(results::<S>))
        .route("/sessions/{id}/pairwise", get(pairwise::<S>))
        .route("/sessions/{id}/rerun", post(rerun::<S>))
        .fallback(not_found)
        .with_state(service)
}

/// Serves `router` on `listener` until ctrl-c.
pub async fn serve<S: SessionStore + 'static>(
    listener: tokio::net::TcpListener,
    service: Arc<SessionService<S>>,
) -> std::io::Result<()> {
    axum::serve(listener, router(service))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
