//! Loads reference tables from a directory of CSV files.
//!
//! One file per table, header row = field names:
//! `universities.csv`, `schools.csv`, `major_fields.csv`, `scholarships.csv`,
//! `scholarship_types.csv`, `periods.csv`, `students.csv`, `teachers.csv`,
//! `subjects.csv` and `accounts.csv`. Missing files are skipped. Account rows
//! carry a plain `password` column which is digested before storage.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::access::Role;
use crate::credentials;
use crate::domain::*;
use crate::error::StoreError;
use crate::storage::{Record, Transaction};

#[derive(Debug, Deserialize)]
struct AccountRow {
    account_id: String,
    role: Role,
    #[serde(default)]
    student_id: Option<String>,
    password: String,
}

fn read_table<T: DeserializeOwned>(dir: &Path, file: &str) -> Result<Vec<T>, StoreError> {
    let path = dir.join(file);
    if !path.exists() {
        return Ok(Vec::new());
    }
    let seed_error = |message: String| StoreError::Seed {
        file: file.to_string(),
        message,
    };
    let mut reader = csv::Reader::from_path(&path).map_err(|e| seed_error(e.to_string()))?;
    reader
        .deserialize()
        .map(|r| r.map_err(|e| seed_error(e.to_string())))
        .collect()
}

fn put_all<T: Record>(txn: Transaction, rows: Vec<T>) -> Transaction {
    rows.into_iter().fold(txn, |txn, r| txn.put(r))
}

/// Builds one transaction holding every seed row found under `dir`.
///
/// `salt` is called once per account to salt its credential digest.
pub fn load_dir(dir: &Path, mut salt: impl FnMut() -> Vec<u8>) -> Result<Transaction, StoreError> {
    if !dir.is_dir() {
        return Err(StoreError::Seed {
            file: dir.display().to_string(),
            message: "not a directory".into(),
        });
    }
    let mut txn = Transaction::new();
    txn = put_all(txn, read_table::<University>(dir, "universities.csv")?);
    txn = put_all(txn, read_table::<School>(dir, "schools.csv")?);
    txn = put_all(txn, read_table::<MajorField>(dir, "major_fields.csv")?);
    txn = put_all(txn, read_table::<Scholarship>(dir, "scholarships.csv")?);
    txn = put_all(txn, read_table::<ScholarshipType>(dir, "scholarship_types.csv")?);
    txn = put_all(txn, read_table::<Period>(dir, "periods.csv")?);
    txn = put_all(txn, read_table::<Student>(dir, "students.csv")?);
    txn = put_all(txn, read_table::<Teacher>(dir, "teachers.csv")?);
    txn = put_all(txn, read_table::<Subject>(dir, "subjects.csv")?);
    for row in read_table::<AccountRow>(dir, "accounts.csv")? {
        let digest = credentials::digest(&row.password, &salt());
        txn = txn.put(Account {
            account_id: row.account_id,
            role: row.role,
            student_id: row.student_id.filter(|s| !s.is_empty()),
            credentials: digest,
        });
    }
    Ok(txn)
}
