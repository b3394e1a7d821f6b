//! Entity types for the scholarship council tables and the annual review tables.
//!
//! Every type here is a plain immutable value. Checks that only need the value
//! itself live in [`Validate`]; checks that need other records (foreign keys,
//! score bounds against a subject) are performed by the store.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::DomainError;

/// A single violated invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub field: &'static str,
    pub rule: &'static str,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

/// Result of validating an entity. Violations are data, not errors.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Validation {
    pub violations: Vec<Violation>,
}

impl Validation {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn check(&mut self, ok: bool, field: &'static str, rule: &'static str) {
        if !ok {
            self.violations.push(Violation { field, rule });
        }
    }

    pub fn merge(mut self, other: Validation) -> Validation {
        self.violations.extend(other.violations);
        self
    }

    pub fn has_rule(&self, rule: &str) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }
}

impl fmt::Display for Validation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

pub trait Validate {
    fn validate(&self) -> Validation;
}

fn non_empty(s: &str) -> bool {
    !s.trim().is_empty()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ScholarshipStatus {
    #[default]
    Active,
    Continued,
    Suspended,
    Terminated,
}

impl FromStr for ScholarshipStatus {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Active" => Ok(Self::Active),
            "Continued" => Ok(Self::Continued),
            "Suspended" => Ok(Self::Suspended),
            "Terminated" => Ok(Self::Terminated),
            other => Err(DomainError::UnknownStatus(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Student {
    pub student_id: String,
    pub name: String,
    pub registration_details: String,
    pub university_id: String,
    pub school_id: String,
    pub major_field_id: String,
    pub scholarship_id: String,
    pub scholarship_type_id: String,
    pub period_id: String,
    #[serde(default)]
    pub scholarship_status: ScholarshipStatus,
}

impl Validate for Student {
    fn validate(&self) -> Validation {
        let mut v = Validation::default();
        v.check(non_empty(&self.name), "name", "non-empty");
        v
    }
}

/// Shape shared by the simple named reference tables.
macro_rules! named_entity {
    ($(#[$meta:meta])* $name:ident, $id:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
        pub struct $name {
            pub $id: String,
            pub name: String,
        }

        impl Validate for $name {
            fn validate(&self) -> Validation {
                let mut v = Validation::default();
                v.check(non_empty(&self.name), "name", "non-empty");
                v
            }
        }
    };
}

named_entity!(
    /// A scholarship programme offered by the council.
    Scholarship,
    scholarship_id
);
named_entity!(
    /// Full or partial.
    ScholarshipType,
    scholarship_type_id
);
named_entity!(MajorField, major_field_id);
named_entity!(University, university_id);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct School {
    pub school_id: String,
    pub name: String,
    pub university_id: String,
}

impl Validate for School {
    fn validate(&self) -> Validation {
        let mut v = Validation::default();
        v.check(non_empty(&self.name), "name", "non-empty");
        v
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Period {
    pub period_id: String,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
}

impl Validate for Period {
    fn validate(&self) -> Validation {
        let mut v = Validation::default();
        v.check(self.start_date < self.end_date, "start_date", "start before end");
        v
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Teacher {
    pub teacher_id: String,
    pub employee_id: String,
    pub name: String,
    pub school_id: String,
}

impl Validate for Teacher {
    fn validate(&self) -> Validation {
        let mut v = Validation::default();
        v.check(non_empty(&self.employee_id), "employee_id", "non-empty");
        v.check(non_empty(&self.name), "name", "non-empty");
        v
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reviewer {
    pub reviewer_id: String,
    pub employee_id: String,
    pub name: String,
    /// Salted digest produced by [`crate::credentials`]; never the plain secret.
    pub credentials: String,
    pub school_id: String,
}

impl Validate for Reviewer {
    fn validate(&self) -> Validation {
        let mut v = Validation::default();
        v.check(non_empty(&self.employee_id), "employee_id", "non-empty");
        v.check(non_empty(&self.name), "name", "non-empty");
        v.check(non_empty(&self.credentials), "credentials", "non-empty");
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subject {
    pub subject_id: String,
    pub major_field_id: String,
    pub name: String,
    pub total_marks: f64,
    pub total_hours: f64,
}

impl Validate for Subject {
    fn validate(&self) -> Validation {
        let mut v = Validation::default();
        v.check(non_empty(&self.name), "name", "non-empty");
        v.check(self.total_marks > 0.0, "total_marks", "positive");
        v.check(self.total_hours > 0.0, "total_hours", "positive");
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudentScore {
    pub student_id: String,
    pub subject_id: String,
    pub marks_obtained: f64,
    pub hours_attended: f64,
}

impl StudentScore {
    /// Composite key: one score per (student, subject).
    pub fn key(&self) -> String {
        format!("{}/{}", self.student_id, self.subject_id)
    }

    /// Bounds that depend on the referenced subject.
    pub fn validate_against(&self, subject: &Subject) -> Validation {
        let mut v = self.validate();
        v.check(
            self.marks_obtained <= subject.total_marks,
            "marks_obtained",
            "marks within total",
        );
        v.check(
            self.hours_attended <= subject.total_hours,
            "hours_attended",
            "hours within total",
        );
        v
    }

    /// Fraction of the subject's marks obtained.
    pub fn fraction(&self, subject: &Subject) -> f64 {
        self.marks_obtained / subject.total_marks
    }
}

impl Validate for StudentScore {
    fn validate(&self) -> Validation {
        let mut v = Validation::default();
        v.check(self.marks_obtained >= 0.0, "marks_obtained", "nonnegative");
        v.check(self.hours_attended >= 0.0, "hours_attended", "nonnegative");
        v
    }
}

/// Punishment severity, lowest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SeriousnessLevel {
    Warning,
    SeriousWarning1,
    SeriousWarning2,
    Dismissal,
}

impl SeriousnessLevel {
    pub const ALL: [SeriousnessLevel; 4] = [
        SeriousnessLevel::Warning,
        SeriousnessLevel::SeriousWarning1,
        SeriousnessLevel::SeriousWarning2,
        SeriousnessLevel::Dismissal,
    ];

    pub fn rank(self) -> u8 {
        self as u8
    }

    pub fn label(self) -> &'static str {
        match self {
            SeriousnessLevel::Warning => "Warning",
            SeriousnessLevel::SeriousWarning1 => "Serious Warning1",
            SeriousnessLevel::SeriousWarning2 => "Serious Warning2",
            SeriousnessLevel::Dismissal => "Dismissal",
        }
    }
}

impl FromStr for SeriousnessLevel {
    type Err = DomainError;

    /// Accepts both the display labels ("Serious Warning1") and the
    /// identifier spelling ("SeriousWarning1").
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        match compact.as_str() {
            "Warning" => Ok(Self::Warning),
            "SeriousWarning1" => Ok(Self::SeriousWarning1),
            "SeriousWarning2" => Ok(Self::SeriousWarning2),
            "Dismissal" => Ok(Self::Dismissal),
            _ => Err(DomainError::UnknownLevel(s.to_string())),
        }
    }
}

impl fmt::Display for SeriousnessLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Rank of a seriousness label: Warning 0 up to Dismissal 3.
pub fn seriousness_rank(label: &str) -> Result<u8, DomainError> {
    label.parse::<SeriousnessLevel>().map(SeriousnessLevel::rank)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PunishSeriousness {
    pub seriousness_id: String,
    pub level: SeriousnessLevel,
}

impl PunishSeriousness {
    /// The four standard rows, keyed by their identifier spelling.
    pub fn standard() -> Vec<PunishSeriousness> {
        SeriousnessLevel::ALL
            .iter()
            .map(|&level| PunishSeriousness {
                seriousness_id: format!("{level:?}"),
                level,
            })
            .collect()
    }
}

impl Validate for PunishSeriousness {
    fn validate(&self) -> Validation {
        Validation::default()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Punishment {
    pub punishment_id: String,
    pub student_id: String,
    pub seriousness_id: String,
    pub description: String,
    pub date: NaiveDate,
}

impl Validate for Punishment {
    fn validate(&self) -> Validation {
        Validation::default()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reward {
    pub reward_id: String,
    pub student_id: String,
    pub description: String,
    pub date: NaiveDate,
}

impl Validate for Reward {
    fn validate(&self) -> Validation {
        Validation::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ReviewStatus {
    Submitted,
    Verified,
}

impl ReviewStatus {
    pub fn can_transition_to(self, next: ReviewStatus) -> bool {
        matches!((self, next), (ReviewStatus::Submitted, ReviewStatus::Verified))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ReviewDecision {
    Approve,
    Disapprove,
}

impl FromStr for ReviewDecision {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Approve" => Ok(Self::Approve),
            "Disapprove" => Ok(Self::Disapprove),
            other => Err(DomainError::UnknownDecision(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnualReview {
    pub review_id: String,
    pub student_id: String,
    pub academic_year: i32,
    pub student_summary: String,
    pub academic_score_snapshot: String,
    pub punishments_snapshot: String,
    pub rewards_snapshot: String,
    pub reviewer_summary: Option<String>,
    pub reviewer_id: Option<String>,
    pub status: ReviewStatus,
    pub decision: Option<ReviewDecision>,
}

impl Validate for AnnualReview {
    fn validate(&self) -> Validation {
        let mut v = Validation::default();
        let verified = self.status == ReviewStatus::Verified;
        v.check(non_empty(&self.student_summary), "student_summary", "non-empty");
        v.check(
            self.reviewer_summary.is_some() == verified,
            "reviewer_summary",
            "present iff verified",
        );
        v.check(self.decision.is_some() == verified, "decision", "present iff verified");
        v.check(
            self.reviewer_id.is_some() == verified,
            "reviewer_id",
            "present iff verified",
        );
        v
    }
}

/// Login credentials for students and council officers. Reviewers keep their
/// credentials on the reviewer record itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Account {
    pub account_id: String,
    pub role: crate::access::Role,
    /// Set for student accounts; must resolve to a student.
    pub student_id: Option<String>,
    pub credentials: String,
}

impl Validate for Account {
    fn validate(&self) -> Validation {
        use crate::access::Role;
        let mut v = Validation::default();
        v.check(non_empty(&self.account_id), "account_id", "non-empty");
        v.check(non_empty(&self.credentials), "credentials", "non-empty");
        v.check(
            (self.role == Role::Student) == self.student_id.is_some(),
            "student_id",
            "present iff student account",
        );
        v.check(self.role != Role::Reviewer, "role", "reviewers register separately");
        v
    }
}
