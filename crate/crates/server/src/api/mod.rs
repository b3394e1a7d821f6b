//! HTTP routes, authentication and the endpoint/activity map.

mod handlers;

use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::extract::rejection::JsonRejection;
use axum::extract::{FromRequest, MatchedPath, Request, State};
use axum::http::header::AUTHORIZATION;
use axum::middleware::{self, Next};
use axum::response::Response;
use axum::routing::{get, post, put};
use axum::{Json, Router};
use saris_core::access::{is_permitted, Activity, Role};
use saris_core::c45::{DecisionTree, Metrics, TrainConfig};
use saris_core::dataset::DeriveConfig;
use saris_core::{Store, Workflow};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::ApiError;
use crate::session::{Session, SessionManager};

/// What a caller must hold to use an endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Access {
    /// One row of the access-rights grid.
    Activity(Activity),
    /// Administrative data and model operations: CSC only.
    Administrative,
}

impl Access {
    pub fn permits(self, role: Role) -> bool {
        match self {
            Access::Activity(a) => is_permitted(role, a),
            Access::Administrative => role == Role::Csc,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Endpoint {
    pub method: &'static str,
    pub path: &'static str,
    pub access: Access,
    /// Callable without a session. A session, if sent, is still checked.
    pub anonymous: bool,
}

const fn ep(method: &'static str, path: &'static str, access: Access) -> Endpoint {
    Endpoint {
        method,
        path,
        access,
        anonymous: false,
    }
}

const fn open(method: &'static str, path: &'static str, activity: Activity) -> Endpoint {
    Endpoint {
        method,
        path,
        access: Access::Activity(activity),
        anonymous: true,
    }
}

use Access::{Activity as A, Administrative as Admin};

pub const ENDPOINTS: &[Endpoint] = &[
    open("POST", "/api/login", Activity::Login),
    open("GET", "/api/permissions", Activity::Login),
    ep("GET", "/api/session", A(Activity::Login)),
    ep("DELETE", "/api/session", A(Activity::Login)),
    open("POST", "/api/reviewers", Activity::Register),
    ep("GET", "/api/reviews", A(Activity::ViewSubmittedReview)),
    ep("POST", "/api/reviews", A(Activity::SubmitAnnualReview)),
    ep("GET", "/api/reviews/{id}", A(Activity::ViewSubmittedReview)),
    ep("PUT", "/api/reviews/{id}", A(Activity::EditSubmittedReview)),
    ep("POST", "/api/reviews/{id}/verify", A(Activity::VerifyReview)),
    ep("GET", "/api/students/{id}/reviews", A(Activity::ViewSubmittedReview)),
    ep("GET", "/api/students/{id}/scores", A(Activity::ViewScores)),
    ep(
        "PUT",
        "/api/students/{id}/scores/{subject}",
        A(Activity::SubmitEditScores),
    ),
    ep("GET", "/api/students/{id}/punishments", A(Activity::ViewPunishments)),
    ep(
        "POST",
        "/api/students/{id}/punishments",
        A(Activity::SubmitEditPunishments),
    ),
    ep(
        "PUT",
        "/api/students/{id}/punishments/{item}",
        A(Activity::SubmitEditPunishments),
    ),
    ep("GET", "/api/students/{id}/rewards", A(Activity::ViewRewards)),
    ep("POST", "/api/students/{id}/rewards", A(Activity::SubmitEditRewards)),
    ep(
        "PUT",
        "/api/students/{id}/rewards/{item}",
        A(Activity::SubmitEditRewards),
    ),
    ep(
        "GET",
        "/api/students/{id}/scholarship-status",
        A(Activity::ViewScholarshipStatus),
    ),
    ep(
        "PUT",
        "/api/students/{id}/scholarship-status",
        A(Activity::EditScholarshipStatus),
    ),
    ep("GET", "/api/dataset.csv", Admin),
    ep("GET", "/api/model", Admin),
    ep("POST", "/api/model/train", Admin),
    ep("POST", "/api/model/predict", Admin),
];

pub fn endpoint(method: &str, path: &str) -> Option<&'static Endpoint> {
    ENDPOINTS.iter().find(|e| e.method == method && e.path == path)
}

/// Summary of the current model as returned by the model endpoints.
#[derive(Debug, Clone, Serialize)]
pub struct ModelSummary {
    pub rows: usize,
    pub node_count: usize,
    pub leaf_count: usize,
    pub depth: usize,
    pub config: TrainConfig,
    /// Metrics of the model on its own training rows.
    pub training: Metrics,
    pub trained_at: chrono::DateTime<chrono::Utc>,
    /// The tree in model-file text form.
    pub model: String,
}

pub struct TrainedModel {
    pub tree: DecisionTree,
    pub summary: ModelSummary,
}

pub struct AppState {
    pub workflow: Workflow,
    pub sessions: SessionManager,
    pub derive: DeriveConfig,
    model: RwLock<Option<Arc<TrainedModel>>>,
}

impl AppState {
    pub fn new(store: Arc<Store>, sessions: SessionManager) -> Self {
        AppState {
            workflow: Workflow::new(store),
            sessions,
            derive: DeriveConfig::default(),
            model: RwLock::new(None),
        }
    }

    pub fn store(&self) -> &Arc<Store> {
        self.workflow.store()
    }

    pub fn model(&self) -> Option<Arc<TrainedModel>> {
        self.model.read().expect("model lock poisoned").clone()
    }

    /// Replaces the current model in one step; readers see old or new.
    pub fn install_model(&self, model: TrainedModel) -> Arc<TrainedModel> {
        let model = Arc::new(model);
        *self.model.write().expect("model lock poisoned") = Some(model.clone());
        model
    }
}

/// The authenticated session, if the request carried one.
#[derive(Debug, Clone)]
pub struct Caller(pub Option<Session>);

impl Caller {
    pub fn session(&self) -> Result<&Session, ApiError> {
        self.0.as_ref().ok_or_else(ApiError::unauthorized)
    }
}

fn bearer(req: &Request) -> Option<Result<String, ApiError>> {
    let value = req.headers().get(AUTHORIZATION)?;
    let token = value
        .to_str()
        .ok()
        .and_then(|v| v.strip_prefix("Bearer "))
        .map(|t| t.trim().to_string())
        .filter(|t| !t.is_empty());
    Some(token.ok_or_else(ApiError::unauthorized))
}

/// Authenticates the caller and applies the endpoint's grid row before any
/// handler or body parsing runs.
async fn guard(
    State(state): State<Arc<AppState>>,
    matched: Option<MatchedPath>,
    mut req: Request,
    next: Next,
) -> Result<Response, ApiError> {
    let path = matched.as_ref().map(MatchedPath::as_str).unwrap_or_default();
    let endpoint = endpoint(req.method().as_str(), path).ok_or_else(|| ApiError::not_found("no such endpoint"))?;
    let session = match bearer(&req) {
        Some(token) => Some(state.sessions.validate(&token?).ok_or_else(ApiError::unauthorized)?),
        None if endpoint.anonymous => None,
        None => return Err(ApiError::unauthorized()),
    };
    if let Some(s) = &session {
        if !endpoint.access.permits(s.actor.role) {
            let what = match endpoint.access {
                Access::Activity(a) => format!("`{a}`"),
                Access::Administrative => "administrative operations".to_string(),
            };
            return Err(ApiError::forbidden(format!("{} may not perform {what}", s.actor.role)));
        }
    }
    req.extensions_mut().insert(Caller(session));
    Ok(next.run(req).await)
}

/// JSON body whose rejections use the common error shape: malformed JSON is
/// 400, well-formed JSON with the wrong fields or types is 422.
pub struct ApiJson<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for ApiJson<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(v)) => Ok(ApiJson(v)),
            Err(JsonRejection::JsonDataError(e)) => Err(ApiError::unprocessable("bad_body", e.body_text())),
            Err(e) => Err(ApiError::bad_request(e.body_text())),
        }
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    router_with_static(state, None)
}

/// Like [`router`], additionally serving files from `static_dir` for any
/// path outside `/api`.
pub fn router_with_static(state: Arc<AppState>, static_dir: Option<PathBuf>) -> Router {
    use handlers::*;
    let api = Router::new()
        .route("/api/login", post(login))
        .route("/api/permissions", get(permissions))
        .route("/api/session", get(session_info).delete(logout))
        .route("/api/reviewers", post(register_reviewer))
        .route("/api/reviews", get(pending_reviews).post(submit_review))
        .route("/api/reviews/{id}", get(view_review).put(edit_review))
        .route("/api/reviews/{id}/verify", post(verify_review))
        .route("/api/students/{id}/reviews", get(student_reviews))
        .route("/api/students/{id}/scores", get(view_scores))
        .route("/api/students/{id}/scores/{subject}", put(record_score))
        .route(
            "/api/students/{id}/punishments",
            get(view_punishments).post(record_punishment),
        )
        .route("/api/students/{id}/punishments/{item}", put(edit_punishment))
        .route("/api/students/{id}/rewards", get(view_rewards).post(record_reward))
        .route("/api/students/{id}/rewards/{item}", put(edit_reward))
        .route(
            "/api/students/{id}/scholarship-status",
            get(view_scholarship_status).put(set_scholarship_status),
        )
        .route("/api/dataset.csv", get(dataset_csv))
        .route("/api/model", get(current_model))
        .route("/api/model/train", post(train_model))
        .route("/api/model/predict", post(predict))
        .route_layer(middleware::from_fn_with_state(state.clone(), guard))
        .method_not_allowed_fallback(|| async { ApiError::not_found("no such endpoint") });
    let router = match static_dir {
        Some(dir) => api.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => api.fallback(|| async { ApiError::not_found("no such endpoint") }),
    };
    router.with_state(state)
}
