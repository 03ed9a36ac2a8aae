use std::fs;
use std::path::Path;

use axum::body::{to_bytes, Body};
use axum::http::{Request, StatusCode};
use axum::Router;
use rdr_core::dataset::{
    append_gradability, apply_gradability, filter_gradable, read_gradability_file, resolve_latest,
    DatasetManifest, GradabilityEntry, ManifestEntry, Source, Split,
};
use rdr_core::{GradabilityStatus, GradeRecord, IcdrGrade, Quality};
use rdr_grading::{router, shard_sessions, GradingConfig, GradingState, DEFAULT_INSTRUCTIONS};
use serde_json::{json, Value};
use tower::ServiceExt;

fn manifest(dir: &Path, n: usize) -> DatasetManifest {
    let entries = (0..n)
        .map(|i| {
            let id = format!("img{i:02}");
            fs::write(dir.join(format!("{id}.png")), format!("bytes of {id}")).unwrap();
            ManifestEntry {
                file_path: format!("{id}.png").into(),
                grade_record: GradeRecord::new(id, IcdrGrade::new((i % 5) as i64).unwrap()),
                split: Split::Train,
                source: Source::Synthetic,
            }
        })
        .collect();
    DatasetManifest::new(entries, 0).unwrap()
}

fn open(dir: &Path, m: &DatasetManifest, shards: usize) -> Router {
    let state = GradingState::open(
        m,
        GradingConfig {
            image_dir: dir.to_path_buf(),
            grades_path: dir.join("quality.csv"),
            instructions: DEFAULT_INSTRUCTIONS.to_string(),
            sessions: shard_sessions(m, "s", "grader1", shards),
        },
    )
    .unwrap();
    router(state)
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    (status, to_bytes(resp.into_body(), usize::MAX).await.unwrap().to_vec())
}

async fn json_call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (s, b) = call(app, method, uri, body).await;
    (s, serde_json::from_slice(&b).unwrap())
}

async fn grade(app: &Router, image_id: &str, quality: &str) -> (StatusCode, Value) {
    json_call(
        app,
        "POST",
        "/session/s/grade",
        Some(json!({"image_id": image_id, "quality": quality})),
    )
    .await
}

#[tokio::test]
async fn next_grade_and_completion() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest(dir.path(), 3);
    let app = open(dir.path(), &m, 1);

    let (s, v) = json_call(&app, "GET", "/session/s/next", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["image_id"], "img00");
    assert_eq!(v["image_url"], "/image/img00");
    assert_eq!(v["progress"], json!({"graded": 0, "remaining": 3, "total": 3}));
    let (_, again) = json_call(&app, "GET", "/session/s/next", None).await;
    assert_eq!(again["image_id"], "img00");

    let (s, v) = grade(&app, "img01", "good").await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(v["expected"], "img00");
    let (s, v) = grade(&app, "img00", "blurry").await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"], "unknown_quality");
    let (s, _) = call(&app, "POST", "/session/s/grade", Some(json!({"image": 1}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);

    let (s, v) = grade(&app, "img00", "adequate").await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["status"], "gradable");
    assert_eq!(v["progress"]["graded"], 1);
    let (_, v) = grade(&app, "img01", "insufficient").await;
    assert_eq!(v["status"], "ungradable");
    grade(&app, "img02", "excellent").await;

    let (s, v) = json_call(&app, "GET", "/session/s/next", None).await;
    assert_eq!(s, StatusCode::GONE);
    assert_eq!(v["error"], "session_complete");
    assert_eq!(v["progress"]["graded"], 3);

    let (s, _) = json_call(&app, "GET", "/session/nope/next", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn serves_image_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest(dir.path(), 2);
    let app = open(dir.path(), &m, 1);
    let (s, b) = call(&app, "GET", "/image/img01", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(b, b"bytes of img01");
    let (s, _) = call(&app, "GET", "/image/ghost", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn restart_resumes_after_acknowledged_grades() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest(dir.path(), 20);
    {
        let app = open(dir.path(), &m, 1);
        for i in 0..10 {
            let q = if i % 4 == 3 { "insufficient" } else { "good" };
            assert_eq!(grade(&app, &format!("img{i:02}"), q).await.0, StatusCode::OK);
        }
    }
    let app = open(dir.path(), &m, 1);
    let (_, v) = json_call(&app, "GET", "/session/s/next", None).await;
    assert_eq!(v["image_id"], "img10");
    assert_eq!(v["progress"], json!({"graded": 10, "remaining": 10, "total": 20}));

    let records = read_gradability_file(&dir.path().join("quality.csv")).unwrap();
    assert_eq!(records.len(), 10);
    assert!(records.iter().all(|r| r.grader_id.as_deref() == Some("grader1")));

    let mut m2 = m.clone();
    assert_eq!(apply_gradability(&mut m2, &resolve_latest(&records)), 10);
    let (_, report) = filter_gradable(&m2);
    assert_eq!(report.removed_ungradable, 2);
    assert_eq!(report.removed_unknown, 10);
    assert_eq!(report.retained, 8);
}

#[tokio::test]
async fn later_records_supersede_earlier_ones() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest(dir.path(), 2);
    let app = open(dir.path(), &m, 1);
    grade(&app, "img00", "insufficient").await;
    let path = dir.path().join("quality.csv");
    let later = chrono::Utc::now() + chrono::Duration::seconds(5);
    append_gradability(&path, &GradabilityEntry::from_quality("img00", Quality::Good, None, later)).unwrap();
    let resolved = resolve_latest(&read_gradability_file(&path).unwrap());
    assert_eq!(resolved["img00"].gradability.status(), GradabilityStatus::Gradable);
}

#[tokio::test]
async fn shards_are_disjoint_sessions() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest(dir.path(), 5);
    let app = open(dir.path(), &m, 2);
    let (_, a) = json_call(&app, "GET", "/session/s-0/next", None).await;
    let (_, b) = json_call(&app, "GET", "/session/s-1/next", None).await;
    assert_eq!(a["image_id"], "img00");
    assert_eq!(b["image_id"], "img03");
    assert_eq!(a["progress"]["total"], 3);
    assert_eq!(b["progress"]["total"], 2);
    let (s, _) = json_call(
        &app,
        "POST",
        "/session/s-1/grade",
        Some(json!({"image_id": "img00", "quality": "good"})),
    )
    .await;
    assert_eq!(s, StatusCode::CONFLICT);
}
