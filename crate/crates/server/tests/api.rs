mod common;

use axum::http::StatusCode;
use common::{TestApp, CSC_ID};
use saris_core::fixtures::SAMPLE_CSV;
use serde_json::json;

#[tokio::test]
async fn login_resolves_each_role() {
    let app = TestApp::new();
    for (id, password, role) in [
        ("100121", "pw-100121", "Student"),
        ("E-1001", "reviewer-pass", "Reviewer"),
        (CSC_ID, "csc-pass", "CSC"),
    ] {
        let r = app
            .call(
                "POST",
                "/api/login",
                None,
                Some(json!({"identifier": id, "password": password})),
            )
            .await;
        assert_eq!(r.status, StatusCode::OK, "{}", r.text);
        let body = r.json();
        assert_eq!(body["role"], role);
        assert_eq!(body["token"].as_str().unwrap().len(), 32);
    }
    let student = app
        .call(
            "POST",
            "/api/login",
            None,
            Some(json!({"identifier": "100121", "password": "pw-100121"})),
        )
        .await
        .json();
    assert_eq!(student["permitted_activities"].as_array().unwrap().len(), 7);
    assert_eq!(student["student_id"], "100121");
}

#[tokio::test]
async fn failed_logins_look_alike() {
    let app = TestApp::new();
    let wrong = app
        .call(
            "POST",
            "/api/login",
            None,
            Some(json!({"identifier": "100121", "password": "nope"})),
        )
        .await;
    let unknown = app
        .call(
            "POST",
            "/api/login",
            None,
            Some(json!({"identifier": "nobody", "password": "nope"})),
        )
        .await;
    assert_eq!(wrong.status, StatusCode::UNAUTHORIZED);
    assert_eq!(wrong.text, unknown.text);
    assert_eq!(wrong.status, unknown.status);
}

#[tokio::test]
async fn missing_or_bogus_tokens_are_rejected() {
    let app = TestApp::new();
    let r = app.call("GET", "/api/students/100121/scores", None, None).await;
    assert_eq!(r.status, StatusCode::UNAUTHORIZED);
    let r = app
        .call("GET", "/api/students/100121/scores", Some("deadbeef"), None)
        .await;
    assert_eq!(r.status, StatusCode::UNAUTHORIZED);
    assert_eq!(r.code(), "unauthorized");
}

#[tokio::test]
async fn logout_ends_the_session() {
    let app = TestApp::new();
    let token = app.student("100121").await;
    assert_eq!(
        app.call("GET", "/api/session", Some(&token), None).await.status,
        StatusCode::OK
    );
    assert_eq!(
        app.call("DELETE", "/api/session", Some(&token), None).await.status,
        StatusCode::NO_CONTENT
    );
    assert_eq!(
        app.call("GET", "/api/session", Some(&token), None).await.status,
        StatusCode::UNAUTHORIZED
    );
}

#[tokio::test]
async fn review_lifecycle_over_http() {
    let app = TestApp::new();
    let student = app.student("100121").await;
    let r = app
        .call(
            "POST",
            "/api/reviews",
            Some(&student),
            Some(json!({"academic_year": 2015, "student_summary": "Second year went well"})),
        )
        .await;
    assert_eq!(r.status, StatusCode::CREATED, "{}", r.text);
    let review = r.json();
    assert_eq!(review["status"], "Submitted");
    assert!(review["reviewer_summary"].is_null());
    let id = review["review_id"].as_str().unwrap().to_string();

    let dup = app
        .call(
            "POST",
            "/api/reviews",
            Some(&student),
            Some(json!({"academic_year": 2015, "student_summary": "again"})),
        )
        .await;
    assert_eq!(dup.status, StatusCode::CONFLICT);
    assert_eq!(dup.code(), "duplicate_review");

    let status_edit = app
        .call(
            "PUT",
            "/api/students/100121/scholarship-status",
            Some(&student),
            Some(json!({"scholarship_status": "Continued"})),
        )
        .await;
    assert_eq!(status_edit.status, StatusCode::FORBIDDEN);

    let other_school = app.reviewer_sh2().await;
    let verify = json!({"reviewer_summary": "Matches records", "decision": "Approve"});
    let r = app
        .call(
            "POST",
            &format!("/api/reviews/{id}/verify"),
            Some(&other_school),
            Some(verify.clone()),
        )
        .await;
    assert_eq!(r.status, StatusCode::FORBIDDEN);
    assert_eq!(r.code(), "scope_violation");

    let reviewer = app.reviewer_sh1().await;
    let pending = app.call("GET", "/api/reviews", Some(&reviewer), None).await.json();
    assert_eq!(pending.as_array().unwrap().len(), 1);
    let r = app
        .call(
            "POST",
            &format!("/api/reviews/{id}/verify"),
            Some(&reviewer),
            Some(verify.clone()),
        )
        .await;
    assert_eq!(r.status, StatusCode::OK, "{}", r.text);
    assert_eq!(r.json()["status"], "Verified");
    assert_eq!(r.json()["decision"], "Approve");

    let again = app
        .call(
            "POST",
            &format!("/api/reviews/{id}/verify"),
            Some(&reviewer),
            Some(verify),
        )
        .await;
    assert_eq!(again.status, StatusCode::CONFLICT);
    assert_eq!(again.code(), "invalid_state");

    let mine = app
        .call("GET", &format!("/api/reviews/{id}"), Some(&student), None)
        .await;
    assert_eq!(mine.json()["reviewer_summary"], "Matches records");
    let someone_else = app.student("201324").await;
    let r = app
        .call("GET", &format!("/api/reviews/{id}"), Some(&someone_else), None)
        .await;
    assert_eq!(r.status, StatusCode::FORBIDDEN);
}

#[tokio::test]
async fn records_entry_and_views() {
    let app = TestApp::new();
    let reviewer = app.reviewer_sh1().await;
    let r = app
        .call(
            "PUT",
            "/api/students/100121/scores/SB2",
            Some(&reviewer),
            Some(json!({"marks_obtained": 55.0, "hours_attended": 44.0})),
        )
        .await;
    assert_eq!(r.status, StatusCode::OK, "{}", r.text);
    let r = app
        .call(
            "PUT",
            "/api/students/100121/scores/SB2",
            Some(&reviewer),
            Some(json!({"marks_obtained": 155.0, "hours_attended": 44.0})),
        )
        .await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);

    let r = app
        .call(
            "POST",
            "/api/students/100121/punishments",
            Some(&reviewer),
            Some(json!({"seriousness": "Serious Warning1", "description": "Noise", "date": "2015-03-02"})),
        )
        .await;
    assert_eq!(r.status, StatusCode::CREATED, "{}", r.text);
    let pid = r.json()["punishment_id"].as_str().unwrap().to_string();
    let r = app
        .call(
            "PUT",
            &format!("/api/students/100121/punishments/{pid}"),
            Some(&reviewer),
            Some(json!({"seriousness": "Dismissal"})),
        )
        .await;
    assert_eq!(r.status, StatusCode::OK, "{}", r.text);
    assert_eq!(r.json()["seriousness_id"], "Dismissal");
    let wrong_owner = app
        .call(
            "PUT",
            &format!("/api/students/100213/punishments/{pid}"),
            Some(&reviewer),
            Some(json!({"description": "x"})),
        )
        .await;
    assert_eq!(wrong_owner.status, StatusCode::NOT_FOUND);
    let bad_level = app
        .call(
            "POST",
            "/api/students/100121/punishments",
            Some(&reviewer),
            Some(json!({"seriousness": "Expulsion", "description": "x", "date": "2015-03-02"})),
        )
        .await;
    assert_eq!(bad_level.status, StatusCode::UNPROCESSABLE_ENTITY);

    let r = app
        .call(
            "POST",
            "/api/students/100121/rewards",
            Some(&reviewer),
            Some(json!({"description": "Best paper", "date": "2015-06-01"})),
        )
        .await;
    assert_eq!(r.status, StatusCode::CREATED);

    let student = app.student("100121").await;
    let rewards = app
        .call("GET", "/api/students/100121/rewards", Some(&student), None)
        .await
        .json();
    assert_eq!(rewards.as_array().unwrap().len(), 1);
    let punishments = app
        .call("GET", "/api/students/100121/punishments", Some(&student), None)
        .await
        .json();
    assert_eq!(punishments.as_array().unwrap().len(), 2);
    let scores = app
        .call("GET", "/api/students/100121/scores", Some(&student), None)
        .await
        .json();
    assert_eq!(scores.as_array().unwrap().len(), 6);

    let csc = app.csc().await;
    let r = app
        .call(
            "PUT",
            "/api/students/100121/scholarship-status",
            Some(&csc),
            Some(json!({"scholarship_status": "Suspended"})),
        )
        .await;
    assert_eq!(r.status, StatusCode::OK, "{}", r.text);
    let r = app
        .call("GET", "/api/students/100121/scholarship-status", Some(&student), None)
        .await
        .json();
    assert_eq!(r["scholarship_status"], "Suspended");
}

#[tokio::test]
async fn dataset_download_is_csc_only() {
    let app = TestApp::new();
    let csc = app.csc().await;
    let r = app.call("GET", "/api/dataset.csv", Some(&csc), None).await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.content_type, "text/csv");
    assert_eq!(r.text.lines().next(), SAMPLE_CSV.lines().next());
    let mut got: Vec<&str> = r.text.lines().collect();
    let mut want: Vec<&str> = SAMPLE_CSV.lines().collect();
    got.sort_unstable();
    want.sort_unstable();
    assert_eq!(got, want);

    let reviewer = app.reviewer_sh1().await;
    assert_eq!(
        app.call("GET", "/api/dataset.csv", Some(&reviewer), None).await.status,
        StatusCode::FORBIDDEN
    );
}

#[tokio::test]
async fn empty_store_exports_header_only() {
    let store = saris_core::Store::in_memory();
    store
        .put(saris_core::domain::Account {
            account_id: CSC_ID.into(),
            role: saris_core::access::Role::Csc,
            student_id: None,
            credentials: saris_core::credentials::digest("csc-pass", b"s"),
        })
        .unwrap();
    let app = TestApp::with_store(store);
    let csc = app.csc().await;
    let r = app.call("GET", "/api/dataset.csv", Some(&csc), None).await;
    assert_eq!(r.text, "STUDENT_ID,SUBJECT_FAILED,DISMISSAL_PUNISH,REWARDS,SUCCESS\n");
    let train = app.call("POST", "/api/model/train", Some(&csc), None).await;
    assert_eq!(train.status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn train_then_predict() {
    let app = TestApp::new();
    let csc = app.csc().await;
    let early = app
        .call(
            "POST",
            "/api/model/predict",
            Some(&csc),
            Some(json!({"student_id": "201324"})),
        )
        .await;
    assert_eq!(early.status, StatusCode::CONFLICT);
    assert_eq!(early.code(), "no_model");
    assert_eq!(
        app.call("GET", "/api/model", Some(&csc), None).await.status,
        StatusCode::CONFLICT
    );

    let r = app
        .call(
            "POST",
            "/api/model/train",
            Some(&csc),
            Some(json!({"pruning": false, "min_leaf": 1})),
        )
        .await;
    assert_eq!(r.status, StatusCode::OK, "{}", r.text);
    let summary = r.json();
    assert_eq!(summary["training"]["accuracy"], 1.0);
    assert_eq!(summary["rows"], 5);
    assert_eq!(summary["node_count"], 5);
    assert!(summary["model"]
        .as_str()
        .unwrap()
        .starts_with("# features: SUBJECT_FAILED"));

    let p = app
        .call(
            "POST",
            "/api/model/predict",
            Some(&csc),
            Some(json!({"student_id": "201324"})),
        )
        .await
        .json();
    assert_eq!(p["label"], "YES");
    assert_eq!(p["features"], json!([0, 0, 0]));
    let p = app
        .call(
            "POST",
            "/api/model/predict",
            Some(&csc),
            Some(json!({"features": [2, 0, 0]})),
        )
        .await
        .json();
    assert_eq!(p["label"], "NO");
    assert_eq!(p["confidence"], 1.0);

    let unknown = app
        .call(
            "POST",
            "/api/model/predict",
            Some(&csc),
            Some(json!({"student_id": "999999"})),
        )
        .await;
    assert_eq!(unknown.status, StatusCode::NOT_FOUND);
    for bad in [json!({"features": [1, 2]}), json!({}), json!({"features": [-1, 0, 0]})] {
        let r = app.call("POST", "/api/model/predict", Some(&csc), Some(bad)).await;
        assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY, "{}", r.text);
    }

    let defaults = app.call("POST", "/api/model/train", Some(&csc), None).await;
    assert_eq!(defaults.status, StatusCode::OK);
    assert_eq!(defaults.json()["config"]["min_leaf"], 2);
    let bad = app
        .call(
            "POST",
            "/api/model/train",
            Some(&csc),
            Some(json!({"confidence_factor": 2.0})),
        )
        .await;
    assert_eq!(bad.status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn reviewer_registration() {
    let app = TestApp::new();
    let body = json!({"name": "Wang Fang", "employee_id": "E-1002", "password": "s3cret"});
    let r = app.call("POST", "/api/reviewers", None, Some(body.clone())).await;
    assert_eq!(r.status, StatusCode::CREATED, "{}", r.text);
    let created = r.json();
    assert_eq!(created["school_id"], "SH1");
    assert!(created.get("credentials").is_none());
    assert_eq!(
        app.call("POST", "/api/reviewers", None, Some(body)).await.status,
        StatusCode::CONFLICT
    );

    let stranger = json!({"name": "Nobody", "employee_id": "E-9999", "password": "x"});
    let r = app.call("POST", "/api/reviewers", None, Some(stranger)).await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);

    let token = app.login("E-1002", "s3cret").await;
    let scores = app.call("GET", "/api/students/100213/scores", Some(&token), None).await;
    assert_eq!(scores.status, StatusCode::OK);

    let student = app.student("100121").await;
    let r = app
        .call(
            "POST",
            "/api/reviewers",
            Some(&student),
            Some(json!({"name": "Li Wei", "employee_id": "E-1001", "password": "x"})),
        )
        .await;
    assert_eq!(r.status, StatusCode::FORBIDDEN);
}

#[tokio::test]
async fn malformed_bodies_use_the_error_shape() {
    let app = TestApp::new();
    let student = app.student("100121").await;
    let r = app
        .send("POST", "/api/reviews", Some(&student), Some("{not json"))
        .await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    assert_eq!(r.json()["status"], 400);
    let r = app
        .send("POST", "/api/reviews", Some(&student), Some(r#"{"academic_year":"x"}"#))
        .await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    let r = app.call("GET", "/api/nowhere", Some(&student), None).await;
    assert_eq!(r.status, StatusCode::NOT_FOUND);
    assert_eq!(r.code(), "not_found");
    let r = app.call("PATCH", "/api/reviews", Some(&student), None).await;
    assert_eq!(r.status, StatusCode::NOT_FOUND);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_duplicate_submissions_commit_once() {
    let app = std::sync::Arc::new(TestApp::new());
    let token = app.student("201217").await;
    let mut tasks = Vec::new();
    for _ in 0..16 {
        let app = app.clone();
        let token = token.clone();
        tasks.push(tokio::spawn(async move {
            app.call(
                "POST",
                "/api/reviews",
                Some(&token),
                Some(json!({"academic_year": 2016, "student_summary": "race"})),
            )
            .await
            .status
        }));
    }
    let mut created = 0;
    for t in tasks {
        match t.await.unwrap() {
            StatusCode::CREATED => created += 1,
            StatusCode::CONFLICT => {}
            other => panic!("unexpected {other}"),
        }
    }
    assert_eq!(created, 1);
}
