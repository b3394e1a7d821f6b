//! Annual review lifecycle and record entry.
//!
//! Each operation first checks the role grid, then the record-level scope
//! (students see only themselves, reviewers act only within their school),
//! and only then writes. A write and its audit entry commit in the same
//! transaction, so a rejected call leaves the store untouched.

use std::sync::Arc;

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::access::{is_permitted, Activity, Role};
use crate::domain::*;
use crate::error::{DomainError, StoreError};
use crate::storage::{AuditEntry, EntityKind, Store, Tables, Transaction};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Actor {
    pub principal_id: String,
    pub role: Role,
    /// Reviewers: the school they act for.
    pub school_id: Option<String>,
    /// Students: their own student record.
    pub student_id: Option<String>,
}

impl Actor {
    pub fn student(student_id: impl Into<String>) -> Self {
        let id = student_id.into();
        Actor {
            principal_id: id.clone(),
            role: Role::Student,
            school_id: None,
            student_id: Some(id),
        }
    }

    pub fn reviewer(reviewer_id: impl Into<String>, school_id: impl Into<String>) -> Self {
        Actor {
            principal_id: reviewer_id.into(),
            role: Role::Reviewer,
            school_id: Some(school_id.into()),
            student_id: None,
        }
    }

    pub fn csc(officer_id: impl Into<String>) -> Self {
        Actor {
            principal_id: officer_id.into(),
            role: Role::Csc,
            school_id: None,
            student_id: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum WorkflowError {
    #[error("{role} may not perform `{activity}`")]
    PermissionDenied { role: Role, activity: Activity },
    #[error("out of scope: {0}")]
    ScopeViolation(String),
    #[error("{kind} `{id}` not found")]
    NotFound { kind: EntityKind, id: String },
    #[error("an annual review for ({student_id}, {year}) already exists")]
    DuplicateReview { student_id: String, year: i32 },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("validation failed: {0}")]
    ValidationFailed(String),
    #[error(transparent)]
    UnknownLevel(DomainError),
    #[error("no teacher matches the given name and employee id")]
    NoMatchingTeacher,
    #[error("employee `{0}` is already registered")]
    AlreadyRegistered(String),
    #[error(transparent)]
    Store(StoreError),
}

impl From<StoreError> for WorkflowError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::ValidationFailed { .. } => WorkflowError::ValidationFailed(e.to_string()),
            other => WorkflowError::Store(other),
        }
    }
}

pub type Result<T, E = WorkflowError> = std::result::Result<T, E>;

/// Fields an editor may change on an existing review.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewEdit {
    pub student_summary: Option<String>,
    pub reviewer_summary: Option<String>,
    pub decision: Option<ReviewDecision>,
}

/// Replacement values for a punishment; `None` keeps the current value.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PunishmentEdit {
    pub seriousness: Option<String>,
    pub description: Option<String>,
    pub date: Option<NaiveDate>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewardEdit {
    pub description: Option<String>,
    pub date: Option<NaiveDate>,
}

#[derive(Clone)]
pub struct Workflow {
    store: Arc<Store>,
    clock: fn() -> DateTime<Utc>,
}

impl Workflow {
    pub fn new(store: Arc<Store>) -> Self {
        Workflow { store, clock: Utc::now }
    }

    pub fn with_clock(mut self, clock: fn() -> DateTime<Utc>) -> Self {
        self.clock = clock;
        self
    }

    pub fn store(&self) -> &Arc<Store> {
        &self.store
    }

    fn audit(&self, actor: &str, role: Role, operation: &str, target: &str, changed: Vec<String>) -> AuditEntry {
        AuditEntry {
            seq: 0,
            actor: actor.to_string(),
            role,
            at: (self.clock)(),
            operation: operation.to_string(),
            target: target.to_string(),
            changed_fields: changed,
        }
    }

    fn authorize(&self, tables: &Tables, actor: &Actor, activity: Activity) -> Result<()> {
        let denied = WorkflowError::PermissionDenied {
            role: actor.role,
            activity,
        };
        if !is_permitted(actor.role, activity) {
            return Err(denied);
        }
        let resolves = match actor.role {
            Role::Student => actor
                .student_id
                .as_deref()
                .is_some_and(|id| tables.get::<Student>(id).is_some()),
            Role::Reviewer => tables
                .get::<Reviewer>(&actor.principal_id)
                .is_some_and(|r| actor.school_id.as_deref() == Some(r.school_id.as_str())),
            Role::Csc => true,
        };
        if resolves {
            Ok(())
        } else {
            Err(denied)
        }
    }

    /// Looks up the student and checks the actor may touch their records.
    fn scoped_student<'t>(
        &self,
        tables: &'t Tables,
        actor: &Actor,
        activity: Activity,
        student_id: &str,
    ) -> Result<&'t Student> {
        if actor.role == Role::Student && actor.student_id.as_deref() != Some(student_id) {
            return Err(WorkflowError::PermissionDenied {
                role: actor.role,
                activity,
            });
        }
        let student = tables
            .get::<Student>(student_id)
            .ok_or_else(|| not_found(EntityKind::Student, student_id))?;
        if actor.role == Role::Reviewer && actor.school_id.as_deref() != Some(student.school_id.as_str()) {
            return Err(WorkflowError::ScopeViolation(format!(
                "student `{student_id}` belongs to another school"
            )));
        }
        Ok(student)
    }

    pub fn register_reviewer(&self, name: &str, employee_id: &str, credentials: &str) -> Result<Reviewer> {
        let tables = self.store.snapshot();
        if !is_permitted(Role::Reviewer, Activity::Register) {
            return Err(WorkflowError::PermissionDenied {
                role: Role::Reviewer,
                activity: Activity::Register,
            });
        }
        let teacher = tables
            .all::<Teacher>()
            .find(|t| t.employee_id == employee_id && t.name == name)
            .ok_or(WorkflowError::NoMatchingTeacher)?;
        if tables.all::<Reviewer>().any(|r| r.employee_id == employee_id) {
            return Err(WorkflowError::AlreadyRegistered(employee_id.to_string()));
        }
        let reviewer = Reviewer {
            reviewer_id: String::new(),
            employee_id: employee_id.to_string(),
            name: name.to_string(),
            credentials: credentials.to_string(),
            school_id: teacher.school_id.clone(),
        };
        let entry = self.audit(employee_id, Role::Reviewer, "register_reviewer", employee_id, vec![]);
        let commit = self
            .store
            .apply(Transaction::new().put(reviewer).audit(entry))
            .map_err(|e| match e {
                StoreError::DuplicateKey(_) => WorkflowError::AlreadyRegistered(employee_id.to_string()),
                other => other.into(),
            })?;
        Ok(commit.first::<Reviewer>().expect("reviewer stored"))
    }

    pub fn submit_annual_review(
        &self,
        actor: &Actor,
        academic_year: i32,
        student_summary: &str,
    ) -> Result<AnnualReview> {
        let tables = self.store.snapshot();
        self.authorize(&tables, actor, Activity::SubmitAnnualReview)?;
        let student_id = actor.student_id.clone().expect("authorized student actor");
        if tables
            .all::<AnnualReview>()
            .any(|r| r.student_id == student_id && r.academic_year == academic_year)
        {
            return Err(WorkflowError::DuplicateReview {
                student_id,
                year: academic_year,
            });
        }
        let review = AnnualReview {
            review_id: String::new(),
            student_id: student_id.clone(),
            academic_year,
            student_summary: student_summary.to_string(),
            academic_score_snapshot: score_snapshot(&tables, &student_id),
            punishments_snapshot: punishment_snapshot(&tables, &student_id),
            rewards_snapshot: reward_snapshot(&tables, &student_id),
            reviewer_summary: None,
            reviewer_id: None,
            status: ReviewStatus::Submitted,
            decision: None,
        };
        let entry = self.audit(
            &actor.principal_id,
            actor.role,
            "submit_annual_review",
            &format!("{student_id}/{academic_year}"),
            vec!["student_summary".into()],
        );
        let commit = self
            .store
            .apply(Transaction::new().put(review).audit(entry))
            .map_err(|e| match e {
                StoreError::DuplicateKey(_) => WorkflowError::DuplicateReview {
                    student_id: student_id.clone(),
                    year: academic_year,
                },
                other => other.into(),
            })?;
        Ok(commit.first::<AnnualReview>().expect("review stored"))
    }

    pub fn verify_annual_review(
        &self,
        actor: &Actor,
        review_id: &str,
        reviewer_summary: &str,
        decision: ReviewDecision,
    ) -> Result<AnnualReview> {
        let tables = self.store.snapshot();
        self.authorize(&tables, actor, Activity::VerifyReview)?;
        let review = tables
            .get::<AnnualReview>(review_id)
            .ok_or_else(|| not_found(EntityKind::AnnualReview, review_id))?;
        self.scoped_student(&tables, actor, Activity::VerifyReview, &review.student_id)?;
        if !review.status.can_transition_to(ReviewStatus::Verified) {
            return Err(WorkflowError::InvalidState(format!(
                "review `{review_id}` is already {:?}",
                review.status
            )));
        }
        let verified = AnnualReview {
            status: ReviewStatus::Verified,
            reviewer_summary: Some(reviewer_summary.to_string()),
            reviewer_id: Some(actor.principal_id.clone()),
            decision: Some(decision),
            ..review.clone()
        };
        let entry = self.audit(
            &actor.principal_id,
            actor.role,
            "verify_annual_review",
            review_id,
            vec![
                "status".into(),
                "reviewer_summary".into(),
                "reviewer_id".into(),
                "decision".into(),
            ],
        );
        self.store
            .apply(Transaction::new().put(verified.clone()).audit(entry))?;
        Ok(verified)
    }

    pub fn edit_annual_review(&self, actor: &Actor, review_id: &str, edit: &ReviewEdit) -> Result<AnnualReview> {
        let tables = self.store.snapshot();
        self.authorize(&tables, actor, Activity::EditSubmittedReview)?;
        let review = tables
            .get::<AnnualReview>(review_id)
            .ok_or_else(|| not_found(EntityKind::AnnualReview, review_id))?;
        self.scoped_student(&tables, actor, Activity::EditSubmittedReview, &review.student_id)?;

        let mut updated = review.clone();
        let mut changed = Vec::new();
        if let Some(s) = &edit.student_summary {
            updated.student_summary = s.clone();
            changed.push("student_summary".to_string());
        }
        if let Some(s) = &edit.reviewer_summary {
            updated.reviewer_summary = Some(s.clone());
            changed.push("reviewer_summary".to_string());
        }
        if let Some(d) = edit.decision {
            updated.decision = Some(d);
            changed.push("decision".to_string());
        }
        let validation = updated.validate();
        if !validation.is_valid() {
            return Err(WorkflowError::ValidationFailed(validation.to_string()));
        }
        let entry = self.audit(
            &actor.principal_id,
            actor.role,
            "edit_annual_review",
            review_id,
            changed,
        );
        self.store.apply(Transaction::new().put(updated.clone()).audit(entry))?;
        Ok(updated)
    }

    pub fn record_score(
        &self,
        actor: &Actor,
        student_id: &str,
        subject_id: &str,
        marks_obtained: f64,
        hours_attended: f64,
    ) -> Result<StudentScore> {
        let tables = self.store.snapshot();
        self.authorize(&tables, actor, Activity::SubmitEditScores)?;
        self.scoped_student(&tables, actor, Activity::SubmitEditScores, student_id)?;
        let subject = tables
            .get::<Subject>(subject_id)
            .ok_or_else(|| not_found(EntityKind::Subject, subject_id))?;
        let score = StudentScore {
            student_id: student_id.to_string(),
            subject_id: subject_id.to_string(),
            marks_obtained,
            hours_attended,
        };
        let validation = score.validate_against(subject);
        if !validation.is_valid() {
            return Err(WorkflowError::ValidationFailed(validation.to_string()));
        }
        let entry = self.audit(
            &actor.principal_id,
            actor.role,
            "record_score",
            &score.key(),
            vec!["marks_obtained".into(), "hours_attended".into()],
        );
        self.store.apply(Transaction::new().put(score.clone()).audit(entry))?;
        Ok(score)
    }

    pub fn record_punishment(
        &self,
        actor: &Actor,
        student_id: &str,
        seriousness: &str,
        description: &str,
        date: NaiveDate,
    ) -> Result<Punishment> {
        let tables = self.store.snapshot();
        self.authorize(&tables, actor, Activity::SubmitEditPunishments)?;
        let seriousness_id = seriousness_id(&tables, seriousness)?;
        self.scoped_student(&tables, actor, Activity::SubmitEditPunishments, student_id)?;
        let punishment = Punishment {
            punishment_id: String::new(),
            student_id: student_id.to_string(),
            seriousness_id,
            description: description.to_string(),
            date,
        };
        let entry = self.audit(&actor.principal_id, actor.role, "record_punishment", student_id, vec![]);
        let commit = self.store.apply(Transaction::new().put(punishment).audit(entry))?;
        Ok(commit.first::<Punishment>().expect("punishment stored"))
    }

    pub fn edit_punishment(&self, actor: &Actor, punishment_id: &str, edit: &PunishmentEdit) -> Result<Punishment> {
        let tables = self.store.snapshot();
        self.authorize(&tables, actor, Activity::SubmitEditPunishments)?;
        let current = tables
            .get::<Punishment>(punishment_id)
            .ok_or_else(|| not_found(EntityKind::Punishment, punishment_id))?;
        self.scoped_student(&tables, actor, Activity::SubmitEditPunishments, &current.student_id)?;
        let mut updated = current.clone();
        let mut changed = Vec::new();
        if let Some(level) = &edit.seriousness {
            updated.seriousness_id = seriousness_id(&tables, level)?;
            changed.push("seriousness_id".to_string());
        }
        if let Some(d) = &edit.description {
            updated.description = d.clone();
            changed.push("description".to_string());
        }
        if let Some(d) = edit.date {
            updated.date = d;
            changed.push("date".to_string());
        }
        let entry = self.audit(
            &actor.principal_id,
            actor.role,
            "edit_punishment",
            punishment_id,
            changed,
        );
        self.store.apply(Transaction::new().put(updated.clone()).audit(entry))?;
        Ok(updated)
    }

    pub fn record_reward(&self, actor: &Actor, student_id: &str, description: &str, date: NaiveDate) -> Result<Reward> {
        let tables = self.store.snapshot();
        self.authorize(&tables, actor, Activity::SubmitEditRewards)?;
        self.scoped_student(&tables, actor, Activity::SubmitEditRewards, student_id)?;
        let reward = Reward {
            reward_id: String::new(),
            student_id: student_id.to_string(),
            description: description.to_string(),
            date,
        };
        let entry = self.audit(&actor.principal_id, actor.role, "record_reward", student_id, vec![]);
        let commit = self.store.apply(Transaction::new().put(reward).audit(entry))?;
        Ok(commit.first::<Reward>().expect("reward stored"))
    }

    pub fn edit_reward(&self, actor: &Actor, reward_id: &str, edit: &RewardEdit) -> Result<Reward> {
        let tables = self.store.snapshot();
        self.authorize(&tables, actor, Activity::SubmitEditRewards)?;
        let current = tables
            .get::<Reward>(reward_id)
            .ok_or_else(|| not_found(EntityKind::Reward, reward_id))?;
        self.scoped_student(&tables, actor, Activity::SubmitEditRewards, &current.student_id)?;
        let mut updated = current.clone();
        let mut changed = Vec::new();
        if let Some(d) = &edit.description {
            updated.description = d.clone();
            changed.push("description".to_string());
        }
        if let Some(d) = edit.date {
            updated.date = d;
            changed.push("date".to_string());
        }
        let entry = self.audit(&actor.principal_id, actor.role, "edit_reward", reward_id, changed);
        self.store.apply(Transaction::new().put(updated.clone()).audit(entry))?;
        Ok(updated)
    }

    pub fn set_scholarship_status(
        &self,
        actor: &Actor,
        student_id: &str,
        status: ScholarshipStatus,
    ) -> Result<Student> {
        let tables = self.store.snapshot();
        self.authorize(&tables, actor, Activity::EditScholarshipStatus)?;
        let student = self.scoped_student(&tables, actor, Activity::EditScholarshipStatus, student_id)?;
        let updated = Student {
            scholarship_status: status,
            ..student.clone()
        };
        let entry = self.audit(
            &actor.principal_id,
            actor.role,
            "set_scholarship_status",
            student_id,
            vec!["scholarship_status".into()],
        );
        self.store.apply(Transaction::new().put(updated.clone()).audit(entry))?;
        Ok(updated)
    }

    pub fn view_review(&self, actor: &Actor, review_id: &str) -> Result<AnnualReview> {
        let tables = self.store.snapshot();
        self.authorize(&tables, actor, Activity::ViewSubmittedReview)?;
        let review = tables
            .get::<AnnualReview>(review_id)
            .ok_or_else(|| not_found(EntityKind::AnnualReview, review_id))?;
        self.scoped_student(&tables, actor, Activity::ViewSubmittedReview, &review.student_id)?;
        Ok(review.clone())
    }

    /// All reviews of one student, in identifier order.
    pub fn view_reviews(&self, actor: &Actor, student_id: &str) -> Result<Vec<AnnualReview>> {
        let tables = self.store.snapshot();
        self.authorize(&tables, actor, Activity::ViewSubmittedReview)?;
        self.scoped_student(&tables, actor, Activity::ViewSubmittedReview, student_id)?;
        Ok(tables.query::<AnnualReview>(|r| r.student_id == student_id))
    }

    /// Submitted, not yet verified reviews visible to the actor.
    pub fn pending_reviews(&self, actor: &Actor) -> Result<Vec<AnnualReview>> {
        let tables = self.store.snapshot();
        self.authorize(&tables, actor, Activity::ViewSubmittedReview)?;
        Ok(tables.query::<AnnualReview>(|r| {
            r.status == ReviewStatus::Submitted
                && match actor.role {
                    Role::Student => actor.student_id.as_deref() == Some(r.student_id.as_str()),
                    Role::Reviewer => tables
                        .get::<Student>(&r.student_id)
                        .is_some_and(|s| actor.school_id.as_deref() == Some(s.school_id.as_str())),
                    Role::Csc => true,
                }
        }))
    }

    pub fn view_scores(&self, actor: &Actor, student_id: &str) -> Result<Vec<StudentScore>> {
        let tables = self.store.snapshot();
        self.authorize(&tables, actor, Activity::ViewScores)?;
        self.scoped_student(&tables, actor, Activity::ViewScores, student_id)?;
        Ok(tables.query::<StudentScore>(|s| s.student_id == student_id))
    }

    pub fn view_punishments(&self, actor: &Actor, student_id: &str) -> Result<Vec<Punishment>> {
        let tables = self.store.snapshot();
        self.authorize(&tables, actor, Activity::ViewPunishments)?;
        self.scoped_student(&tables, actor, Activity::ViewPunishments, student_id)?;
        Ok(tables.query::<Punishment>(|p| p.student_id == student_id))
    }

    pub fn view_rewards(&self, actor: &Actor, student_id: &str) -> Result<Vec<Reward>> {
        let tables = self.store.snapshot();
        self.authorize(&tables, actor, Activity::ViewRewards)?;
        self.scoped_student(&tables, actor, Activity::ViewRewards, student_id)?;
        Ok(tables.query::<Reward>(|r| r.student_id == student_id))
    }

    pub fn view_scholarship_status(&self, actor: &Actor, student_id: &str) -> Result<ScholarshipStatus> {
        let tables = self.store.snapshot();
        self.authorize(&tables, actor, Activity::ViewScholarshipStatus)?;
        let student = self.scoped_student(&tables, actor, Activity::ViewScholarshipStatus, student_id)?;
        Ok(student.scholarship_status)
    }
}

fn not_found(kind: EntityKind, id: &str) -> WorkflowError {
    WorkflowError::NotFound {
        kind,
        id: id.to_string(),
    }
}

fn seriousness_id(tables: &Tables, label: &str) -> Result<String> {
    let level: SeriousnessLevel = label.parse().map_err(WorkflowError::UnknownLevel)?;
    tables
        .all::<PunishSeriousness>()
        .find(|p| p.level == level)
        .map(|p| p.seriousness_id.clone())
        .ok_or_else(|| not_found(EntityKind::PunishSeriousness, level.label()))
}

fn join_or_none(parts: Vec<String>) -> String {
    if parts.is_empty() {
        "none".to_string()
    } else {
        parts.join("; ")
    }
}

fn score_snapshot(tables: &Tables, student_id: &str) -> String {
    join_or_none(
        tables
            .query::<StudentScore>(|s| s.student_id == student_id)
            .iter()
            .map(|s| {
                let subject = tables.get::<Subject>(&s.subject_id);
                let name = subject.map_or(s.subject_id.as_str(), |sub| sub.name.as_str());
                let (tm, th) = subject.map_or((0.0, 0.0), |sub| (sub.total_marks, sub.total_hours));
                format!(
                    "{name}: {}/{} marks, {}/{} hours",
                    s.marks_obtained, tm, s.hours_attended, th
                )
            })
            .collect(),
    )
}

fn punishment_snapshot(tables: &Tables, student_id: &str) -> String {
    join_or_none(
        tables
            .query::<Punishment>(|p| p.student_id == student_id)
            .iter()
            .map(|p| {
                let level = tables
                    .get::<PunishSeriousness>(&p.seriousness_id)
                    .map_or(p.seriousness_id.clone(), |s| s.level.to_string());
                format!("{} {level}: {}", p.date, p.description)
            })
            .collect(),
    )
}

fn reward_snapshot(tables: &Tables, student_id: &str) -> String {
    join_or_none(
        tables
            .query::<Reward>(|r| r.student_id == student_id)
            .iter()
            .map(|r| format!("{}: {}", r.date, r.description))
            .collect(),
    )
}
