//! Student annual review records with role-governed workflow, dataset
//! derivation and a C4.5 success predictor.
//!
//! - [`domain`]: entity types and their invariants
//! - [`access`]: the role x activity permission grid
//! - [`storage`]: single-file store with referential integrity
//! - [`workflow`]: review lifecycle and record entry
//! - [`dataset`]: per-student feature rows and their CSV form
//! - [`c45`]: tree induction, pruning, prediction and evaluation

pub mod access;
pub mod c45;
pub mod credentials;
pub mod dataset;
pub mod domain;
pub mod error;
pub mod fixtures;
pub mod seed;
pub mod storage;
pub mod workflow;

pub use access::{is_permitted, permitted_activities, Activity, PermissionMatrix, Role};
pub use error::{DomainError, StoreError};
pub use storage::{EntityKind, Store, Transaction};
pub use workflow::{Actor, Workflow, WorkflowError};
