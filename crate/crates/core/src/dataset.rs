//! Prediction dataset: one row of derived counts per student, exchanged as CSV.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{
    AnnualReview, PunishSeriousness, Punishment, ReviewDecision, ReviewStatus, Reward, ScholarshipStatus,
    SeriousnessLevel, Student, StudentScore, Subject,
};
use crate::storage::Tables;

pub const HEADER: &str = "STUDENT_ID,SUBJECT_FAILED,DISMISSAL_PUNISH,REWARDS,SUCCESS";

pub const FEATURE_NAMES: [&str; 3] = ["SUBJECT_FAILED", "DISMISSAL_PUNISH", "REWARDS"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "NO")]
    No,
    #[serde(rename = "YES")]
    Yes,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::No, Label::Yes];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::No => "NO",
            Label::Yes => "YES",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "YES" => Ok(Label::Yes),
            "NO" => Ok(Label::No),
            other => Err(format!("label must be YES or NO, got `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DatasetRow {
    pub student_id: String,
    pub subject_failed: u32,
    pub dismissal_punish: u32,
    pub rewards: u32,
    pub success: Label,
}

impl DatasetRow {
    pub fn features(&self) -> [u32; 3] {
        [self.subject_failed, self.dismissal_punish, self.rewards]
    }
}

/// How the success label is read off a student's records.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRule {
    /// Verified decision that counts as success.
    pub success_decision: ReviewDecision,
    /// Used when the student has no verified review.
    pub success_statuses: BTreeSet<ScholarshipStatus>,
}

impl Default for LabelRule {
    fn default() -> Self {
        LabelRule {
            success_decision: ReviewDecision::Approve,
            success_statuses: [ScholarshipStatus::Active, ScholarshipStatus::Continued].into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeriveConfig {
    /// A subject is failed when marks / total < pass_fraction.
    pub pass_fraction: f64,
    /// Punishments at or above this rank count as dismissals.
    pub dismissal_min_rank: u8,
    pub label_rule: LabelRule,
}

impl Default for DeriveConfig {
    fn default() -> Self {
        DeriveConfig {
            pass_fraction: 0.6,
            dismissal_min_rank: SeriousnessLevel::Dismissal.rank(),
            label_rule: LabelRule::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DatasetError {
    #[error("student `{0}` not found")]
    NotFound(String),
    #[error("pass_fraction must be in (0, 1]")]
    BadConfig,
    #[error("line 1: header must be `{HEADER}`")]
    BadHeader,
    #[error("line {line}: {message}")]
    BadField { line: u64, message: String },
}

pub fn derive_row(tables: &Tables, student_id: &str, config: &DeriveConfig) -> Result<DatasetRow, DatasetError> {
    if !(config.pass_fraction > 0.0 && config.pass_fraction <= 1.0) {
        return Err(DatasetError::BadConfig);
    }
    let student = tables
        .get::<Student>(student_id)
        .ok_or_else(|| DatasetError::NotFound(student_id.to_string()))?;

    let subject_failed = tables
        .all::<StudentScore>()
        .filter(|s| s.student_id == student_id)
        .filter(|s| {
            tables
                .get::<Subject>(&s.subject_id)
                .is_some_and(|sub| s.fraction(sub) < config.pass_fraction)
        })
        .count() as u32;

    let dismissal_punish = tables
        .all::<Punishment>()
        .filter(|p| p.student_id == student_id)
        .filter(|p| {
            tables
                .get::<PunishSeriousness>(&p.seriousness_id)
                .is_some_and(|s| s.level.rank() >= config.dismissal_min_rank)
        })
        .count() as u32;

    let rewards = tables.all::<Reward>().filter(|r| r.student_id == student_id).count() as u32;

    let latest_verified = tables
        .all::<AnnualReview>()
        .filter(|r| r.student_id == student_id && r.status == ReviewStatus::Verified)
        .max_by_key(|r| r.academic_year);
    let rule = &config.label_rule;
    let success = match latest_verified.and_then(|r| r.decision) {
        Some(decision) => decision == rule.success_decision,
        None => rule.success_statuses.contains(&student.scholarship_status),
    };

    Ok(DatasetRow {
        student_id: student_id.to_string(),
        subject_failed,
        dismissal_punish,
        rewards,
        success: if success { Label::Yes } else { Label::No },
    })
}

/// One row per stored student, in student-id order.
pub fn derive_all(tables: &Tables, config: &DeriveConfig) -> Result<Vec<DatasetRow>, DatasetError> {
    tables
        .all::<Student>()
        .map(|s| derive_row(tables, &s.student_id, config))
        .collect()
}

/// Header line plus one LF-terminated line per row, in the order given.
///
/// [`derive_all`] yields student-id order; callers replaying an existing file
/// pass its rows in file order.
pub fn export_csv(rows: &[DatasetRow]) -> String {
    let mut out = String::with_capacity(HEADER.len() + 1 + rows.len() * 24);
    out.push_str(HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.student_id, r.subject_failed, r.dismissal_punish, r.rewards, r.success
        ));
    }
    out
}

pub fn parse_csv(bytes: &[u8]) -> Result<Vec<DatasetRow>, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .quoting(false)
        .from_reader(bytes);
    let mut records = reader.records();

    let header = match records.next() {
        Some(Ok(h)) => h,
        _ => return Err(DatasetError::BadHeader),
    };
    if header.iter().collect::<Vec<_>>().join(",") != HEADER {
        return Err(DatasetError::BadHeader);
    }

    let mut rows = Vec::new();
    for record in records {
        let record = record.map_err(|e| DatasetError::BadField {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |message: String| DatasetError::BadField { line, message };
        let fields: Vec<&str> = record.iter().collect();
        let [id, failed, dismissal, rewards, success] = fields[..] else {
            return Err(bad(format!("expected 5 fields, found {}", fields.len())));
        };
        if id.is_empty() {
            return Err(bad("STUDENT_ID is empty".into()));
        }
        let count = |name: &str, v: &str| {
            v.parse::<u32>()
                .map_err(|_| bad(format!("{name} must be a nonnegative integer, got `{v}`")))
        };
        rows.push(DatasetRow {
            student_id: id.to_string(),
            subject_failed: count("SUBJECT_FAILED", failed)?,
            dismissal_punish: count("DISMISSAL_PUNISH", dismissal)?,
            rewards: count("REWARDS", rewards)?,
            success: success.parse().map_err(|m: String| bad(format!("SUCCESS: {m}")))?,
        });
    }
    Ok(rows)
}
