#![allow(dead_code)]

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use chrono::Duration;
use http_body_util::BodyExt;
use saris::session::{Clock, SessionManager};
use saris::{router, AppState};
use saris_core::access::Role;
use saris_core::credentials::digest;
use saris_core::domain::Account;
use saris_core::fixtures::{self, FIXTURE_SALT, SAMPLE_ROWS};
use saris_core::storage::Transaction;
use saris_core::Store;
use serde_json::Value;
use tower::ServiceExt;

pub const CSC_ID: &str = "csc1";
pub const CSC_PASSWORD: &str = "csc-pass";
pub const REVIEWER_PASSWORD: &str = "reviewer-pass";

pub fn student_password(id: &str) -> String {
    format!("pw-{id}")
}

/// The five published students with their histories, a CSC officer and one
/// login per student. Reviewers E-1001 (SH1) and E-2001 (SH2) already exist.
pub fn seeded_store() -> Store {
    let store = fixtures::sample_store();
    let mut txn = Transaction::new().put(Account {
        account_id: CSC_ID.into(),
        role: Role::Csc,
        student_id: None,
        credentials: digest(CSC_PASSWORD, FIXTURE_SALT),
    });
    for (id, ..) in SAMPLE_ROWS {
        txn = txn.put(Account {
            account_id: id.into(),
            role: Role::Student,
            student_id: Some(id.into()),
            credentials: digest(&student_password(id), FIXTURE_SALT),
        });
    }
    store.apply(txn).unwrap();
    store
}

pub struct TestApp {
    pub state: Arc<AppState>,
    pub router: Router,
}

impl TestApp {
    pub fn new() -> Self {
        Self::with_sessions(SessionManager::new(Duration::hours(8)))
    }

    pub fn with_clock(clock: Clock) -> Self {
        Self::with_sessions(SessionManager::with_clock(Duration::hours(8), clock))
    }

    pub fn with_store(store: Store) -> Self {
        let state = Arc::new(AppState::new(Arc::new(store), SessionManager::new(Duration::hours(8))));
        TestApp {
            router: router(state.clone()),
            state,
        }
    }

    fn with_sessions(sessions: SessionManager) -> Self {
        let state = Arc::new(AppState::new(Arc::new(seeded_store()), sessions));
        TestApp {
            router: router(state.clone()),
            state,
        }
    }

    pub fn hash(&self) -> String {
        self.state.store().state_hash()
    }

    pub async fn send(&self, method: &str, path: &str, token: Option<&str>, body: Option<&str>) -> Reply {
        let mut req = Request::builder().method(method).uri(path);
        if let Some(t) = token {
            req = req.header("authorization", format!("Bearer {t}"));
        }
        let req = match body {
            Some(b) => req
                .header("content-type", "application/json")
                .body(Body::from(b.to_string())),
            None => req.body(Body::empty()),
        }
        .unwrap();
        let resp = self.router.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let content_type = resp
            .headers()
            .get("content-type")
            .map(|v| v.to_str().unwrap().to_string())
            .unwrap_or_default();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        Reply {
            status,
            content_type,
            text: String::from_utf8(bytes.to_vec()).unwrap(),
        }
    }

    pub async fn call(&self, method: &str, path: &str, token: Option<&str>, body: Option<Value>) -> Reply {
        let body = body.map(|v| v.to_string());
        self.send(method, path, token, body.as_deref()).await
    }

    pub async fn login(&self, identifier: &str, password: &str) -> String {
        let r = self
            .call(
                "POST",
                "/api/login",
                None,
                Some(serde_json::json!({ "identifier": identifier, "password": password })),
            )
            .await;
        assert_eq!(r.status, StatusCode::OK, "{}", r.text);
        r.json()["token"].as_str().unwrap().to_string()
    }

    pub async fn student(&self, id: &str) -> String {
        self.login(id, &student_password(id)).await
    }

    /// Reviewer for SH1 (students 100121, 100213).
    pub async fn reviewer_sh1(&self) -> String {
        self.login("E-1001", REVIEWER_PASSWORD).await
    }

    pub async fn reviewer_sh2(&self) -> String {
        self.login("E-2001", REVIEWER_PASSWORD).await
    }

    pub async fn csc(&self) -> String {
        self.login(CSC_ID, CSC_PASSWORD).await
    }
}

#[derive(Debug)]
pub struct Reply {
    pub status: StatusCode,
    pub content_type: String,
    pub text: String,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_str(&self.text).unwrap_or_else(|e| panic!("{e}: {}", self.text))
    }

    pub fn code(&self) -> String {
        self.json()["code"].as_str().unwrap_or_default().to_string()
    }
}
