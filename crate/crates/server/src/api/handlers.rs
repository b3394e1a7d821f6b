use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::IntoResponse;
use axum::{Extension, Json};
use chrono::{NaiveDate, Utc};
use rand::rngs::OsRng;
use rand::RngCore;
use saris_core::access::{permitted_activities, Activity, PermissionMatrix, Role};
use saris_core::c45::{evaluate, train, write_tree, TrainConfig, TrainingSet};
use saris_core::credentials;
use saris_core::dataset::{derive_all, derive_row, export_csv, Label};
use saris_core::domain::{
    Account, AnnualReview, Punishment, ReviewDecision, Reviewer, Reward, ScholarshipStatus, Student,
};
use saris_core::workflow::{PunishmentEdit, ReviewEdit, RewardEdit};
use saris_core::{Actor, EntityKind, WorkflowError};
use serde::{Deserialize, Serialize};

use super::{ApiJson, AppState, Caller, ModelSummary, TrainedModel};
use crate::error::ApiError;

type Shared = State<Arc<AppState>>;
type ApiResult<T> = Result<T, ApiError>;

/// Compared against when the identifier is unknown, so both failure paths
/// do the same work.
const DECOY_DIGEST: &str =
    "sha256$00000000000000000000000000000000$0000000000000000000000000000000000000000000000000000000000000000";

fn actor(caller: &Caller) -> ApiResult<&Actor> {
    Ok(&caller.session()?.actor)
}

fn fresh_salt() -> [u8; 16] {
    let mut salt = [0u8; 16];
    OsRng.fill_bytes(&mut salt);
    salt
}

#[derive(Debug, Deserialize)]
pub struct LoginRequest {
    pub identifier: String,
    pub password: String,
}

#[derive(Debug, Serialize)]
pub struct SessionView {
    pub token: String,
    pub role: Role,
    pub principal_id: String,
    pub display_name: String,
    pub student_id: Option<String>,
    pub school_id: Option<String>,
    pub expires_at: chrono::DateTime<Utc>,
    pub permitted_activities: Vec<Activity>,
}

impl SessionView {
    fn of(s: &crate::session::Session) -> Self {
        SessionView {
            token: s.token.clone(),
            role: s.actor.role,
            principal_id: s.actor.principal_id.clone(),
            display_name: s.display_name.clone(),
            student_id: s.actor.student_id.clone(),
            school_id: s.actor.school_id.clone(),
            expires_at: s.expires_at,
            permitted_activities: permitted_activities(s.actor.role).into_iter().collect(),
        }
    }
}

/// Students and CSC officers sign in with their account id, reviewers with
/// their employee id.
pub async fn login(State(app): Shared, ApiJson(body): ApiJson<LoginRequest>) -> ApiResult<Json<SessionView>> {
    let tables = app.store().snapshot();
    let found: Option<(String, Actor, String)> = if let Some(account) = tables.get::<Account>(&body.identifier) {
        let actor = match (account.role, &account.student_id) {
            (Role::Student, Some(sid)) => Actor::student(sid.clone()),
            _ => Actor::csc(account.account_id.clone()),
        };
        let name = match &actor.student_id {
            Some(sid) => tables
                .get::<Student>(sid)
                .map_or_else(|| sid.clone(), |s| s.name.clone()),
            None => account.account_id.clone(),
        };
        Some((account.credentials.clone(), actor, name))
    } else {
        tables
            .all::<Reviewer>()
            .find(|r| r.employee_id == body.identifier)
            .map(|r| {
                (
                    r.credentials.clone(),
                    Actor::reviewer(r.reviewer_id.clone(), r.school_id.clone()),
                    r.name.clone(),
                )
            })
    };
    match found {
        Some((digest, actor, name)) if credentials::verify(&body.password, &digest) => {
            Ok(Json(SessionView::of(&app.sessions.issue(actor, name))))
        }
        Some(_) => Err(ApiError::bad_credentials()),
        None => {
            let _ = credentials::verify(&body.password, DECOY_DIGEST);
            Err(ApiError::bad_credentials())
        }
    }
}

pub async fn session_info(Extension(caller): Extension<Caller>) -> ApiResult<Json<SessionView>> {
    Ok(Json(SessionView::of(caller.session()?)))
}

pub async fn logout(State(app): Shared, Extension(caller): Extension<Caller>) -> ApiResult<StatusCode> {
    app.sessions.revoke(&caller.session()?.token);
    Ok(StatusCode::NO_CONTENT)
}

#[derive(Debug, Serialize)]
pub struct GridRow {
    pub activity: Activity,
    pub caption: &'static str,
    pub student: bool,
    pub reviewer: bool,
    pub csc: bool,
}

pub async fn permissions() -> Json<Vec<GridRow>> {
    let grid = PermissionMatrix;
    Json(
        Activity::ALL
            .into_iter()
            .map(|a| GridRow {
                activity: a,
                caption: a.caption(),
                student: grid.get(Role::Student, a),
                reviewer: grid.get(Role::Reviewer, a),
                csc: grid.get(Role::Csc, a),
            })
            .collect(),
    )
}

#[derive(Debug, Deserialize)]
pub struct RegisterRequest {
    pub name: String,
    pub employee_id: String,
    pub password: String,
}

#[derive(Debug, Serialize)]
pub struct ReviewerView {
    pub reviewer_id: String,
    pub employee_id: String,
    pub name: String,
    pub school_id: String,
}

pub async fn register_reviewer(
    State(app): Shared,
    ApiJson(body): ApiJson<RegisterRequest>,
) -> ApiResult<(StatusCode, Json<ReviewerView>)> {
    if body.password.is_empty() {
        return Err(ApiError::unprocessable(
            "validation_failed",
            "password must not be empty",
        ));
    }
    let digest = credentials::digest(&body.password, &fresh_salt());
    let r = app.workflow.register_reviewer(&body.name, &body.employee_id, &digest)?;
    Ok((
        StatusCode::CREATED,
        Json(ReviewerView {
            reviewer_id: r.reviewer_id,
            employee_id: r.employee_id,
            name: r.name,
            school_id: r.school_id,
        }),
    ))
}

#[derive(Debug, Deserialize)]
pub struct SubmitReview {
    pub academic_year: i32,
    pub student_summary: String,
}

pub async fn submit_review(
    State(app): Shared,
    Extension(caller): Extension<Caller>,
    ApiJson(body): ApiJson<SubmitReview>,
) -> ApiResult<(StatusCode, Json<AnnualReview>)> {
    let review = app
        .workflow
        .submit_annual_review(actor(&caller)?, body.academic_year, &body.student_summary)?;
    Ok((StatusCode::CREATED, Json(review)))
}

pub async fn pending_reviews(
    State(app): Shared,
    Extension(caller): Extension<Caller>,
) -> ApiResult<Json<Vec<AnnualReview>>> {
    Ok(Json(app.workflow.pending_reviews(actor(&caller)?)?))
}

pub async fn view_review(
    State(app): Shared,
    Extension(caller): Extension<Caller>,
    Path(id): Path<String>,
) -> ApiResult<Json<AnnualReview>> {
    Ok(Json(app.workflow.view_review(actor(&caller)?, &id)?))
}

pub async fn edit_review(
    State(app): Shared,
    Extension(caller): Extension<Caller>,
    Path(id): Path<String>,
    ApiJson(edit): ApiJson<ReviewEdit>,
) -> ApiResult<Json<AnnualReview>> {
    Ok(Json(app.workflow.edit_annual_review(actor(&caller)?, &id, &edit)?))
}

#[derive(Debug, Deserialize)]
pub struct VerifyRequest {
    pub reviewer_summary: String,
    pub decision: ReviewDecision,
}

pub async fn verify_review(
    State(app): Shared,
    Extension(caller): Extension<Caller>,
    Path(id): Path<String>,
    ApiJson(body): ApiJson<VerifyRequest>,
) -> ApiResult<Json<AnnualReview>> {
    Ok(Json(app.workflow.verify_annual_review(
        actor(&caller)?,
        &id,
        &body.reviewer_summary,
        body.decision,
    )?))
}

pub async fn student_reviews(
    State(app): Shared,
    Extension(caller): Extension<Caller>,
    Path(id): Path<String>,
) -> ApiResult<Json<Vec<AnnualReview>>> {
    Ok(Json(app.workflow.view_reviews(actor(&caller)?, &id)?))
}

pub async fn view_scores(
    State(app): Shared,
    Extension(caller): Extension<Caller>,
    Path(id): Path<String>,
) -> ApiResult<impl IntoResponse> {
    Ok(Json(app.workflow.view_scores(actor(&caller)?, &id)?))
}

#[derive(Debug, Deserialize)]
pub struct ScoreRequest {
    pub marks_obtained: f64,
    pub hours_attended: f64,
}

pub async fn record_score(
    State(app): Shared,
    Extension(caller): Extension<Caller>,
    Path((id, subject)): Path<(String, String)>,
    ApiJson(body): ApiJson<ScoreRequest>,
) -> ApiResult<impl IntoResponse> {
    Ok(Json(app.workflow.record_score(
        actor(&caller)?,
        &id,
        &subject,
        body.marks_obtained,
        body.hours_attended,
    )?))
}

pub async fn view_punishments(
    State(app): Shared,
    Extension(caller): Extension<Caller>,
    Path(id): Path<String>,
) -> ApiResult<Json<Vec<Punishment>>> {
    Ok(Json(app.workflow.view_punishments(actor(&caller)?, &id)?))
}

#[derive(Debug, Deserialize)]
pub struct NewPunishment {
    pub seriousness: String,
    pub description: String,
    pub date: NaiveDate,
}

pub async fn record_punishment(
    State(app): Shared,
    Extension(caller): Extension<Caller>,
    Path(id): Path<String>,
    ApiJson(body): ApiJson<NewPunishment>,
) -> ApiResult<(StatusCode, Json<Punishment>)> {
    let p = app
        .workflow
        .record_punishment(actor(&caller)?, &id, &body.seriousness, &body.description, body.date)?;
    Ok((StatusCode::CREATED, Json(p)))
}

/// The item in the path must belong to the student in the path.
fn check_owner(owner: Option<String>, student_id: &str, kind: EntityKind, item: &str) -> ApiResult<()> {
    match owner {
        Some(o) if o == student_id => Ok(()),
        _ => Err(WorkflowError::NotFound {
            kind,
            id: item.to_string(),
        }
        .into()),
    }
}

pub async fn edit_punishment(
    State(app): Shared,
    Extension(caller): Extension<Caller>,
    Path((id, item)): Path<(String, String)>,
    ApiJson(edit): ApiJson<PunishmentEdit>,
) -> ApiResult<Json<Punishment>> {
    let owner = app.store().get::<Punishment>(&item).map(|p| p.student_id);
    check_owner(owner, &id, EntityKind::Punishment, &item)?;
    Ok(Json(app.workflow.edit_punishment(actor(&caller)?, &item, &edit)?))
}

pub async fn view_rewards(
    State(app): Shared,
    Extension(caller): Extension<Caller>,
    Path(id): Path<String>,
) -> ApiResult<Json<Vec<Reward>>> {
    Ok(Json(app.workflow.view_rewards(actor(&caller)?, &id)?))
}

#[derive(Debug, Deserialize)]
pub struct NewReward {
    pub description: String,
    pub date: NaiveDate,
}

pub async fn record_reward(
    State(app): Shared,
    Extension(caller): Extension<Caller>,
    Path(id): Path<String>,
    ApiJson(body): ApiJson<NewReward>,
) -> ApiResult<(StatusCode, Json<Reward>)> {
    let r = app
        .workflow
        .record_reward(actor(&caller)?, &id, &body.description, body.date)?;
    Ok((StatusCode::CREATED, Json(r)))
}

pub async fn edit_reward(
    State(app): Shared,
    Extension(caller): Extension<Caller>,
    Path((id, item)): Path<(String, String)>,
    ApiJson(edit): ApiJson<RewardEdit>,
) -> ApiResult<Json<Reward>> {
    let owner = app.store().get::<Reward>(&item).map(|r| r.student_id);
    check_owner(owner, &id, EntityKind::Reward, &item)?;
    Ok(Json(app.workflow.edit_reward(actor(&caller)?, &item, &edit)?))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct StatusBody {
    pub scholarship_status: ScholarshipStatus,
}

#[derive(Debug, Serialize)]
pub struct StatusView {
    pub student_id: String,
    pub scholarship_status: ScholarshipStatus,
}

pub async fn view_scholarship_status(
    State(app): Shared,
    Extension(caller): Extension<Caller>,
    Path(id): Path<String>,
) -> ApiResult<Json<StatusView>> {
    let status = app.workflow.view_scholarship_status(actor(&caller)?, &id)?;
    Ok(Json(StatusView {
        student_id: id,
        scholarship_status: status,
    }))
}

pub async fn set_scholarship_status(
    State(app): Shared,
    Extension(caller): Extension<Caller>,
    Path(id): Path<String>,
    ApiJson(body): ApiJson<StatusBody>,
) -> ApiResult<Json<Student>> {
    Ok(Json(app.workflow.set_scholarship_status(
        actor(&caller)?,
        &id,
        body.scholarship_status,
    )?))
}

pub async fn dataset_csv(State(app): Shared) -> ApiResult<impl IntoResponse> {
    let rows = derive_all(&app.store().snapshot(), &app.derive)?;
    Ok((
        [
            (header::CONTENT_TYPE, "text/csv"),
            (header::CONTENT_DISPOSITION, "attachment; filename=\"dataset.csv\""),
        ],
        export_csv(&rows),
    ))
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainRequest {
    pub min_leaf: Option<usize>,
    pub confidence_factor: Option<f64>,
    pub pruning: Option<bool>,
}

/// An empty body means "all defaults".
fn optional_json<T: Default + serde::de::DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    serde_json::from_slice(body).map_err(|e| {
        if e.is_data() {
            ApiError::unprocessable("bad_body", e.to_string())
        } else {
            ApiError::bad_request(e.to_string())
        }
    })
}

pub async fn train_model(State(app): Shared, body: Bytes) -> ApiResult<Json<ModelSummary>> {
    let req: TrainRequest = optional_json(&body)?;
    let defaults = TrainConfig::default();
    let config = TrainConfig {
        min_leaf: req.min_leaf.unwrap_or(defaults.min_leaf),
        confidence_factor: req.confidence_factor.unwrap_or(defaults.confidence_factor),
        pruning: req.pruning.unwrap_or(defaults.pruning),
    };
    config.check()?;
    let rows = derive_all(&app.store().snapshot(), &app.derive)?;
    let set = TrainingSet::from_dataset(&rows);
    let tree = train(&set, &config)?;
    let summary = ModelSummary {
        rows: set.len(),
        node_count: tree.node_count(),
        leaf_count: tree.leaf_count(),
        depth: tree.depth(),
        config,
        training: evaluate(&tree, &set)?,
        trained_at: Utc::now(),
        model: write_tree(&tree),
    };
    let installed = app.install_model(TrainedModel { tree, summary });
    Ok(Json(installed.summary.clone()))
}

pub async fn current_model(State(app): Shared) -> ApiResult<Json<ModelSummary>> {
    let model = app.model().ok_or_else(ApiError::no_model)?;
    Ok(Json(model.summary.clone()))
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictRequest {
    pub student_id: Option<String>,
    pub features: Option<Vec<u32>>,
}

#[derive(Debug, Serialize)]
pub struct PredictionView {
    pub student_id: Option<String>,
    pub features: Vec<u32>,
    pub label: Label,
    pub confidence: f64,
}

pub async fn predict(State(app): Shared, ApiJson(req): ApiJson<PredictRequest>) -> ApiResult<Json<PredictionView>> {
    let model = app.model().ok_or_else(ApiError::no_model)?;
    let features = match (&req.student_id, req.features) {
        (Some(id), None) => derive_row(&app.store().snapshot(), id, &app.derive)?
            .features()
            .to_vec(),
        (None, Some(f)) => f,
        _ => {
            return Err(ApiError::unprocessable(
                "bad_features",
                "send exactly one of `student_id` or `features`",
            ))
        }
    };
    let p = model.tree.predict(&features)?;
    Ok(Json(PredictionView {
        student_id: req.student_id,
        features,
        label: p.label,
        confidence: p.confidence,
    }))
}
