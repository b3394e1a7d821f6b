//! Single-file record store with referential integrity.
//!
//! The whole database is one [`Tables`] value. Readers take an `Arc` to the
//! last committed snapshot; writers are serialized, build the next snapshot
//! from a copy, check every constraint against that post-state and only then
//! publish it (and persist it, when the store is file-backed).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::access::Role;
use crate::domain::*;
use crate::error::StoreError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EntityKind {
    Student,
    Scholarship,
    ScholarshipType,
    MajorField,
    Period,
    University,
    School,
    Reviewer,
    Teacher,
    Subject,
    StudentScore,
    AnnualReview,
    Punishment,
    PunishSeriousness,
    Reward,
    Account,
}

impl EntityKind {
    pub const ALL: [EntityKind; 16] = [
        EntityKind::Student,
        EntityKind::Scholarship,
        EntityKind::ScholarshipType,
        EntityKind::MajorField,
        EntityKind::Period,
        EntityKind::University,
        EntityKind::School,
        EntityKind::Reviewer,
        EntityKind::Teacher,
        EntityKind::Subject,
        EntityKind::StudentScore,
        EntityKind::AnnualReview,
        EntityKind::Punishment,
        EntityKind::PunishSeriousness,
        EntityKind::Reward,
        EntityKind::Account,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EntityKind::Student => "student",
            EntityKind::Scholarship => "scholarship",
            EntityKind::ScholarshipType => "scholarship_type",
            EntityKind::MajorField => "major_field",
            EntityKind::Period => "period",
            EntityKind::University => "university",
            EntityKind::School => "school",
            EntityKind::Reviewer => "reviewer",
            EntityKind::Teacher => "teacher",
            EntityKind::Subject => "subject",
            EntityKind::StudentScore => "student_score",
            EntityKind::AnnualReview => "annual_review",
            EntityKind::Punishment => "punishment",
            EntityKind::PunishSeriousness => "punish_seriousness",
            EntityKind::Reward => "reward",
            EntityKind::Account => "account",
        }
    }

    /// Reference data is seeded, never deleted.
    pub fn is_reference_data(self) -> bool {
        matches!(
            self,
            EntityKind::Student
                | EntityKind::Scholarship
                | EntityKind::ScholarshipType
                | EntityKind::MajorField
                | EntityKind::Period
                | EntityKind::University
                | EntityKind::School
                | EntityKind::Teacher
                | EntityKind::PunishSeriousness
        )
    }

    fn id_prefix(self) -> &'static str {
        match self {
            EntityKind::Student => "ST",
            EntityKind::Scholarship => "SC",
            EntityKind::ScholarshipType => "STY",
            EntityKind::MajorField => "MF",
            EntityKind::Period => "PD",
            EntityKind::University => "UN",
            EntityKind::School => "SH",
            EntityKind::Reviewer => "RV",
            EntityKind::Teacher => "TC",
            EntityKind::Subject => "SB",
            EntityKind::StudentScore => "SS",
            EntityKind::AnnualReview => "AR",
            EntityKind::Punishment => "PN",
            EntityKind::PunishSeriousness => "PS",
            EntityKind::Reward => "RW",
            EntityKind::Account => "AC",
        }
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One row of an append-only audit trail.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub seq: u64,
    pub actor: String,
    pub role: Role,
    pub at: DateTime<Utc>,
    pub operation: String,
    pub target: String,
    pub changed_fields: Vec<String>,
}

macro_rules! entities {
    ($($variant:ident => $table:ident, $id:ident;)*) => {
        /// Any storable record.
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        #[serde(tag = "kind", content = "value")]
        pub enum Entity {
            $($variant($variant),)*
            StudentScore(StudentScore),
        }

        /// Every collection of the database, keyed by identifier.
        #[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
        pub struct Tables {
            $(pub $table: BTreeMap<String, $variant>,)*
            /// Keyed by `student_id/subject_id`.
            pub student_scores: BTreeMap<String, StudentScore>,
            pub audit: Vec<AuditEntry>,
            pub next_id: u64,
        }

        $(
            impl Record for $variant {
                const KIND: EntityKind = EntityKind::$variant;

                fn key(&self) -> String {
                    self.$id.clone()
                }

                fn assign_key(&mut self, id: String) {
                    self.$id = id;
                }

                fn table(tables: &Tables) -> &BTreeMap<String, Self> {
                    &tables.$table
                }

                fn table_mut(tables: &mut Tables) -> &mut BTreeMap<String, Self> {
                    &mut tables.$table
                }

                fn into_entity(self) -> Entity {
                    Entity::$variant(self)
                }

                fn from_entity(entity: &Entity) -> Option<&Self> {
                    match entity {
                        Entity::$variant(v) => Some(v),
                        _ => None,
                    }
                }
            }
        )*

        impl Entity {
            pub fn kind(&self) -> EntityKind {
                match self {
                    $(Entity::$variant(_) => EntityKind::$variant,)*
                    Entity::StudentScore(_) => EntityKind::StudentScore,
                }
            }

            pub fn key(&self) -> String {
                match self {
                    $(Entity::$variant(v) => v.key(),)*
                    Entity::StudentScore(v) => v.key(),
                }
            }

            fn validate_self(&self) -> Validation {
                match self {
                    $(Entity::$variant(v) => v.validate(),)*
                    Entity::StudentScore(v) => v.validate(),
                }
            }

            fn assign_key_if_empty(&mut self, next: impl FnOnce(EntityKind) -> String) {
                match self {
                    $(Entity::$variant(v) => if v.key().is_empty() { v.assign_key(next(EntityKind::$variant)) },)*
                    Entity::StudentScore(_) => {}
                }
            }

            fn insert_into(self, tables: &mut Tables) {
                match self {
                    $(Entity::$variant(v) => { tables.$table.insert(v.key(), v); })*
                    Entity::StudentScore(v) => { tables.student_scores.insert(v.key(), v); }
                }
            }
        }

        impl Tables {
            fn lookup(&self, kind: EntityKind, id: &str) -> Option<Entity> {
                match kind {
                    $(EntityKind::$variant => self.$table.get(id).cloned().map(Entity::$variant),)*
                    EntityKind::StudentScore => self.student_scores.get(id).cloned().map(Entity::StudentScore),
                }
            }

            fn remove(&mut self, kind: EntityKind, id: &str) -> Option<Entity> {
                match kind {
                    $(EntityKind::$variant => self.$table.remove(id).map(Entity::$variant),)*
                    EntityKind::StudentScore => self.student_scores.remove(id).map(Entity::StudentScore),
                }
            }

            pub fn count(&self, kind: EntityKind) -> usize {
                match kind {
                    $(EntityKind::$variant => self.$table.len(),)*
                    EntityKind::StudentScore => self.student_scores.len(),
                }
            }

            /// Every stored entity, kind by kind, each in key order.
            pub fn entities(&self) -> Vec<Entity> {
                let mut out = Vec::new();
                $(out.extend(self.$table.values().cloned().map(Entity::$variant));)*
                out.extend(self.student_scores.values().cloned().map(Entity::StudentScore));
                out
            }
        }
    };
}

entities! {
    Student => students, student_id;
    Scholarship => scholarships, scholarship_id;
    ScholarshipType => scholarship_types, scholarship_type_id;
    MajorField => major_fields, major_field_id;
    Period => periods, period_id;
    University => universities, university_id;
    School => schools, school_id;
    Reviewer => reviewers, reviewer_id;
    Teacher => teachers, teacher_id;
    Subject => subjects, subject_id;
    AnnualReview => annual_reviews, review_id;
    Punishment => punishments, punishment_id;
    PunishSeriousness => punish_seriousness, seriousness_id;
    Reward => rewards, reward_id;
    Account => accounts, account_id;
}

impl Record for StudentScore {
    const KIND: EntityKind = EntityKind::StudentScore;

    fn key(&self) -> String {
        StudentScore::key(self)
    }

    fn assign_key(&mut self, _id: String) {}

    fn table(tables: &Tables) -> &BTreeMap<String, Self> {
        &tables.student_scores
    }

    fn table_mut(tables: &mut Tables) -> &mut BTreeMap<String, Self> {
        &mut tables.student_scores
    }

    fn into_entity(self) -> Entity {
        Entity::StudentScore(self)
    }

    fn from_entity(entity: &Entity) -> Option<&Self> {
        match entity {
            Entity::StudentScore(v) => Some(v),
            _ => None,
        }
    }
}

/// Typed access to one collection.
pub trait Record: Clone + Sized + 'static {
    const KIND: EntityKind;
    fn key(&self) -> String;
    fn assign_key(&mut self, id: String);
    fn table(tables: &Tables) -> &BTreeMap<String, Self>;
    fn table_mut(tables: &mut Tables) -> &mut BTreeMap<String, Self>;
    fn into_entity(self) -> Entity;
    fn from_entity(entity: &Entity) -> Option<&Self>;
}

/// A foreign key held by some entity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reference {
    pub field: &'static str,
    pub kind: EntityKind,
    pub id: String,
}

fn reference(field: &'static str, kind: EntityKind, id: &str) -> Reference {
    Reference {
        field,
        kind,
        id: id.to_string(),
    }
}

impl Entity {
    pub fn references(&self) -> Vec<Reference> {
        use EntityKind as K;
        match self {
            Entity::Student(s) => vec![
                reference("university_id", K::University, &s.university_id),
                reference("school_id", K::School, &s.school_id),
                reference("major_field_id", K::MajorField, &s.major_field_id),
                reference("scholarship_id", K::Scholarship, &s.scholarship_id),
                reference("scholarship_type_id", K::ScholarshipType, &s.scholarship_type_id),
                reference("period_id", K::Period, &s.period_id),
            ],
            Entity::School(s) => vec![reference("university_id", K::University, &s.university_id)],
            Entity::Reviewer(r) => vec![reference("school_id", K::School, &r.school_id)],
            Entity::Teacher(t) => vec![reference("school_id", K::School, &t.school_id)],
            Entity::Subject(s) => vec![reference("major_field_id", K::MajorField, &s.major_field_id)],
            Entity::StudentScore(s) => vec![
                reference("student_id", K::Student, &s.student_id),
                reference("subject_id", K::Subject, &s.subject_id),
            ],
            Entity::AnnualReview(r) => {
                let mut refs = vec![reference("student_id", K::Student, &r.student_id)];
                if let Some(rv) = &r.reviewer_id {
                    refs.push(reference("reviewer_id", K::Reviewer, rv));
                }
                refs
            }
            Entity::Punishment(p) => vec![
                reference("student_id", K::Student, &p.student_id),
                reference("seriousness_id", K::PunishSeriousness, &p.seriousness_id),
            ],
            Entity::Reward(r) => vec![reference("student_id", K::Student, &r.student_id)],
            Entity::Account(a) => a
                .student_id
                .iter()
                .map(|s| reference("student_id", K::Student, s))
                .collect(),
            Entity::Scholarship(_)
            | Entity::ScholarshipType(_)
            | Entity::MajorField(_)
            | Entity::Period(_)
            | Entity::University(_)
            | Entity::PunishSeriousness(_) => Vec::new(),
        }
    }
}

/// Ordered write intents, committed all-or-nothing.
#[derive(Debug, Clone, Default)]
pub struct Transaction {
    intents: Vec<Intent>,
}

#[derive(Debug, Clone)]
enum Intent {
    Put(Entity),
    Delete(EntityKind, String),
    Audit(AuditEntry),
}

impl Transaction {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn put(mut self, entity: impl Into<Entity>) -> Self {
        self.intents.push(Intent::Put(entity.into()));
        self
    }

    pub fn delete(mut self, kind: EntityKind, id: impl Into<String>) -> Self {
        self.intents.push(Intent::Delete(kind, id.into()));
        self
    }

    /// `seq` is assigned at commit.
    pub fn audit(mut self, entry: AuditEntry) -> Self {
        self.intents.push(Intent::Audit(entry));
        self
    }

    pub fn is_empty(&self) -> bool {
        self.intents.is_empty()
    }

    pub fn len(&self) -> usize {
        self.intents.len()
    }
}

impl<T: Record> From<T> for Entity {
    fn from(value: T) -> Self {
        value.into_entity()
    }
}

/// Entities written by a committed transaction, in intent order, with any
/// assigned identifiers filled in.
#[derive(Debug, Clone, Default)]
pub struct Commit {
    pub stored: Vec<Entity>,
}

impl Commit {
    pub fn first<T: Record>(&self) -> Option<T> {
        self.stored.iter().find_map(T::from_entity).cloned()
    }
}

/// Counts per kind and all unique keys; equal censuses mean equal content.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Census {
    pub counts: BTreeMap<EntityKind, usize>,
    pub keys: BTreeSet<(EntityKind, String)>,
}

#[derive(Serialize)]
struct FileImageRef<'a> {
    schema_version: u32,
    tables: &'a Tables,
}

#[derive(Deserialize)]
struct FileImage {
    schema_version: u32,
    tables: Tables,
}

impl Tables {
    pub fn get<T: Record>(&self, id: &str) -> Option<&T> {
        T::table(self).get(id)
    }

    pub fn get_entity(&self, kind: EntityKind, id: &str) -> Option<Entity> {
        self.lookup(kind, id)
    }

    /// Matching records in identifier order.
    pub fn query<T: Record>(&self, mut predicate: impl FnMut(&T) -> bool) -> Vec<T> {
        T::table(self).values().filter(|v| predicate(v)).cloned().collect()
    }

    pub fn all<T: Record>(&self) -> impl Iterator<Item = &T> {
        T::table(self).values()
    }

    fn contains(&self, kind: EntityKind, id: &str) -> bool {
        self.lookup(kind, id).is_some()
    }

    /// Every reference in the store that does not resolve.
    pub fn dangling_references(&self) -> Vec<(EntityKind, String, Reference)> {
        let mut out = Vec::new();
        for entity in self.entities() {
            for r in entity.references() {
                if !self.contains(r.kind, &r.id) {
                    out.push((entity.kind(), entity.key(), r));
                }
            }
        }
        out
    }

    pub fn census(&self) -> Census {
        let counts = EntityKind::ALL.iter().map(|&k| (k, self.count(k))).collect();
        let keys = self.entities().iter().map(|e| (e.kind(), e.key())).collect();
        Census { counts, keys }
    }

    /// SHA-256 over the canonical serialization of the whole database.
    pub fn state_hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("tables serialize");
        hex::encode(Sha256::digest(bytes))
    }

    fn next_identifier(&mut self, kind: EntityKind) -> String {
        self.next_id += 1;
        format!("{}{:08}", kind.id_prefix(), self.next_id)
    }

    fn check_entity(&self, entity: &Entity) -> Result<(), StoreError> {
        let validation = entity.validate_self();
        if !validation.is_valid() {
            return Err(StoreError::ValidationFailed {
                kind: entity.kind().name(),
                id: entity.key(),
                validation,
            });
        }
        for r in entity.references() {
            if !self.contains(r.kind, &r.id) {
                return Err(StoreError::IntegrityViolation(format!(
                    "{} `{}`: {} `{}` does not exist",
                    entity.kind(),
                    entity.key(),
                    r.field,
                    r.id
                )));
            }
        }
        match entity {
            Entity::StudentScore(score) => {
                let subject = &self.subjects[&score.subject_id];
                let validation = score.validate_against(subject);
                if !validation.is_valid() {
                    return Err(StoreError::ValidationFailed {
                        kind: EntityKind::StudentScore.name(),
                        id: score.key(),
                        validation,
                    });
                }
            }
            Entity::Reviewer(rv) if !self.teachers.values().any(|t| t.employee_id == rv.employee_id) => {
                return Err(StoreError::IntegrityViolation(format!(
                    "reviewer `{}`: no teacher with employee_id `{}`",
                    rv.reviewer_id, rv.employee_id
                )));
            }
            _ => {}
        }
        Ok(())
    }

    fn check_unique(&self, entity: &Entity) -> Result<(), StoreError> {
        let clash = match entity {
            Entity::AnnualReview(r) => self
                .annual_reviews
                .values()
                .find(|o| {
                    o.review_id != r.review_id && o.student_id == r.student_id && o.academic_year == r.academic_year
                })
                .map(|_| format!("annual review for ({}, {})", r.student_id, r.academic_year)),
            Entity::Teacher(t) => self
                .teachers
                .values()
                .find(|o| o.teacher_id != t.teacher_id && o.employee_id == t.employee_id)
                .map(|_| format!("teacher employee_id `{}`", t.employee_id)),
            Entity::Reviewer(r) => self
                .reviewers
                .values()
                .find(|o| o.reviewer_id != r.reviewer_id && o.employee_id == r.employee_id)
                .map(|_| format!("reviewer employee_id `{}`", r.employee_id)),
            _ => None,
        };
        match clash {
            Some(what) => Err(StoreError::DuplicateKey(what)),
            None => Ok(()),
        }
    }

    fn apply_intents(&mut self, intents: Vec<Intent>) -> Result<Commit, StoreError> {
        let mut commit = Commit::default();
        let mut touched: Vec<(EntityKind, String)> = Vec::new();
        let mut deleted = false;
        for intent in intents {
            match intent {
                Intent::Put(mut entity) => {
                    entity.assign_key_if_empty(|k| self.next_identifier(k));
                    self.check_unique(&entity)?;
                    touched.push((entity.kind(), entity.key()));
                    commit.stored.push(entity.clone());
                    entity.insert_into(self);
                }
                Intent::Delete(kind, id) => {
                    let existing = self.lookup(kind, &id);
                    if kind.is_reference_data()
                        || matches!(&existing, Some(Entity::AnnualReview(r)) if r.status == ReviewStatus::Verified)
                    {
                        return Err(StoreError::DeletionForbidden { kind: kind.name(), id });
                    }
                    self.remove(kind, &id);
                    deleted = true;
                }
                Intent::Audit(mut entry) => {
                    entry.seq = self.audit.len() as u64 + 1;
                    self.audit.push(entry);
                }
            }
        }
        // Constraints are checked on the post-state so a transaction may
        // reference records it creates later in the same batch.
        for (kind, id) in &touched {
            if let Some(entity) = self.lookup(*kind, id) {
                self.check_entity(&entity)?;
            }
        }
        if deleted {
            if let Some((kind, id, r)) = self.dangling_references().into_iter().next() {
                return Err(StoreError::IntegrityViolation(format!(
                    "{kind} `{id}` still references deleted {} `{}`",
                    r.kind, r.id
                )));
            }
        }
        Ok(commit)
    }
}

/// Durable store handle. Cheap to share behind an `Arc`.
#[derive(Debug)]
pub struct Store {
    path: Option<PathBuf>,
    current: RwLock<Arc<Tables>>,
    writer: Mutex<()>,
}

impl Store {
    /// Volatile store, pre-populated with the standard seriousness levels.
    pub fn in_memory() -> Self {
        Store {
            path: None,
            current: RwLock::new(Arc::new(Self::initial_tables())),
            writer: Mutex::new(()),
        }
    }

    /// Opens (or creates) a store persisted to a single file.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let path = path.as_ref().to_path_buf();
        let tables = if path.exists() {
            let bytes = fs::read(&path)?;
            let image: FileImage = serde_json::from_slice(&bytes).map_err(|e| StoreError::Corrupt(e.to_string()))?;
            if image.schema_version != SCHEMA_VERSION {
                return Err(StoreError::Corrupt(format!(
                    "schema version {} (expected {SCHEMA_VERSION})",
                    image.schema_version
                )));
            }
            image.tables
        } else {
            let tables = Self::initial_tables();
            write_image(&path, &tables)?;
            tables
        };
        Ok(Store {
            path: Some(path),
            current: RwLock::new(Arc::new(tables)),
            writer: Mutex::new(()),
        })
    }

    fn initial_tables() -> Tables {
        let mut tables = Tables::default();
        for level in PunishSeriousness::standard() {
            tables.punish_seriousness.insert(level.seriousness_id.clone(), level);
        }
        tables
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    /// The last committed state.
    pub fn snapshot(&self) -> Arc<Tables> {
        self.current.read().expect("store lock poisoned").clone()
    }

    pub fn apply(&self, txn: Transaction) -> Result<Commit, StoreError> {
        if txn.is_empty() {
            return Ok(Commit::default());
        }
        let _guard = self.writer.lock().expect("writer lock poisoned");
        let mut next = (*self.snapshot()).clone();
        let commit = next.apply_intents(txn.intents)?;
        if let Some(path) = &self.path {
            write_image(path, &next)?;
        }
        *self.current.write().expect("store lock poisoned") = Arc::new(next);
        Ok(commit)
    }

    /// Inserts or replaces one record; returns it with any assigned identifier.
    pub fn put<T: Record>(&self, record: T) -> Result<T, StoreError> {
        let commit = self.apply(Transaction::new().put(record))?;
        Ok(commit.first::<T>().expect("put returns its record"))
    }

    pub fn get<T: Record>(&self, id: &str) -> Option<T> {
        self.snapshot().get::<T>(id).cloned()
    }

    pub fn get_entity(&self, kind: EntityKind, id: &str) -> Option<Entity> {
        self.snapshot().get_entity(kind, id)
    }

    pub fn query<T: Record>(&self, predicate: impl FnMut(&T) -> bool) -> Vec<T> {
        self.snapshot().query(predicate)
    }

    pub fn delete(&self, kind: EntityKind, id: &str) -> Result<(), StoreError> {
        self.apply(Transaction::new().delete(kind, id)).map(|_| ())
    }

    pub fn state_hash(&self) -> String {
        self.snapshot().state_hash()
    }

    pub fn census(&self) -> Census {
        self.snapshot().census()
    }
}

fn write_image(path: &Path, tables: &Tables) -> Result<(), StoreError> {
    let image = FileImageRef {
        schema_version: SCHEMA_VERSION,
        tables,
    };
    let bytes = serde_json::to_vec(&image).map_err(|e| StoreError::Corrupt(e.to_string()))?;
    let tmp = path.with_extension("tmp");
    {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(&bytes)?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}
