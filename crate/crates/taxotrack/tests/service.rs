mod common;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use taxotrack::service::{router, AppState};
use tower::ServiceExt;

use common::{synthetic_csv, test_config};

async fn call(app: &Router, method: &str, uri: &str, body: Option<Vec<u8>>) -> (StatusCode, Vec<u8>) {
    let mut req = Request::builder().method(method).uri(uri);
    if body.is_some() {
        req = req.header("content-type", "application/json");
    }
    let req = req.body(body.map_or_else(Body::empty, Body::from)).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes)
}

async fn call_json(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (s, b) = call(app, method, uri, body.map(|v| serde_json::to_vec(&v).unwrap())).await;
    let v = if b.is_empty() { Value::Null } else { serde_json::from_slice(&b).unwrap() };
    (s, v)
}

struct Fixture {
    _dir: tempfile::TempDir,
    app: Router,
    id: String,
    cfg: taxotrack::config::AppConfig,
}

async fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let cfg = test_config(dir.path());
    let app = router(AppState::new(cfg.clone()).unwrap());
    let content = synthetic_csv(60, 20, 60, 7);
    let (s, v) = call_json(&app, "POST", "/api/datasets", Some(json!({ "name": "synthetic", "content": content }))).await;
    assert_eq!(s, StatusCode::CREATED, "{v}");
    let id = v["entry"]["id"].as_str().unwrap().to_string();
    Fixture { _dir: dir, app, id, cfg }
}

/// Two zones of `combo` with at least `min` members each.
async fn populated_zones(f: &Fixture, combo: &str, min: usize) -> (u8, u8) {
    let (s, v) = call_json(&f.app, "GET", &format!("/api/datasets/{}/scores?combo={combo}", f.id), None).await;
    assert_eq!(s, StatusCode::OK);
    let mut counts = [0usize; 4];
    for z in v.as_array().unwrap() {
        counts[z["zone"].as_u64().unwrap() as usize] += 1;
    }
    let ok: Vec<u8> = (0..4u8).filter(|&z| counts[z as usize] >= min).collect();
    assert!(ok.len() >= 2, "zone counts {counts:?}");
    (ok[0], ok[1])
}

#[tokio::test]
async fn health_and_schema() {
    let f = fixture().await;
    let (s, v) = call_json(&f.app, "GET", "/api/health", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["status"], "ok");
    let (s, v) = call_json(&f.app, "GET", "/api/schema", None).await;
    assert_eq!(s, StatusCode::OK);
    for t in ["ZonedScore", "FrequencyMatrix", "ComparisonReport", "SampleWindow", "Error"] {
        assert!(v["types"][t].is_object(), "{t}");
    }
}

#[tokio::test]
async fn dataset_listing_and_reupload() {
    let f = fixture().await;
    let (s, v) = call_json(&f.app, "GET", "/api/datasets", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v.as_array().unwrap().len(), 1);
    assert_eq!(v[0]["trajectories"], 60);
    let content = synthetic_csv(60, 20, 60, 7);
    let (s, v) = call_json(&f.app, "POST", "/api/datasets", Some(json!({ "content": content }))).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["created"], false);
    assert_eq!(v["entry"]["id"], f.id.as_str());

    let (s, v) = call_json(&f.app, "GET", &format!("/api/datasets/{}/trajectories", f.id), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v[0], "traj-0000");
    let (s, v) = call_json(&f.app, "GET", &format!("/api/datasets/{}/trajectories/traj-0003", f.id), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["id"], "traj-0003");
    assert!(v["points"].as_array().unwrap().len() >= 20);
}

#[tokio::test]
async fn multipart_upload() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(AppState::new(test_config(dir.path())).unwrap());
    let content = synthetic_csv(5, 10, 12, 3);
    let boundary = "XBOUNDARYX";
    let body = format!(
        "--{boundary}\r\nContent-Disposition: form-data; name=\"file\"; filename=\"walks.csv\"\r\nContent-Type: text/csv\r\n\r\n{content}\r\n--{boundary}--\r\n"
    );
    let req = Request::builder()
        .method("POST")
        .uri("/api/datasets")
        .header("content-type", format!("multipart/form-data; boundary={boundary}"))
        .body(Body::from(body))
        .unwrap();
    let resp = app.oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::CREATED);
    let v: Value = serde_json::from_slice(&resp.into_body().collect().await.unwrap().to_bytes()).unwrap();
    assert_eq!(v["entry"]["name"], "walks.csv");
    assert_eq!(v["report"]["trajectories"], 5);
}

#[tokio::test]
async fn heatmap_rows_sum_to_dataset_size() {
    let f = fixture().await;
    let (s, v) = call_json(&f.app, "GET", &format!("/api/datasets/{}/heatmap", f.id), None).await;
    assert_eq!(s, StatusCode::OK);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 7);
    for r in rows {
        let sum: u64 = r["counts"].as_array().unwrap().iter().map(|c| c.as_u64().unwrap()).sum();
        assert_eq!(sum, 60);
    }
}

#[tokio::test]
async fn scores_match_zone_rule() {
    let f = fixture().await;
    let (s, v) = call_json(&f.app, "GET", &format!("/api/datasets/{}/scores?combo=curvature-speed", f.id), None).await;
    assert_eq!(s, StatusCode::OK);
    for z in v.as_array().unwrap() {
        let (x, y) = (z["x"].as_f64().unwrap(), z["y"].as_f64().unwrap());
        let zone = taxotrack::core::assign_zone(x, y).unwrap();
        assert_eq!(z["zone"].as_u64().unwrap() as usize, zone.index());
    }
}

#[tokio::test]
async fn parent_child_combination_is_409_with_reason() {
    let f = fixture().await;
    let (s, v) = call_json(&f.app, "GET", &format!("/api/datasets/{}/scores?combo=kinematic-speed", f.id), None).await;
    assert_eq!(s, StatusCode::CONFLICT, "{v}");
    assert_eq!(v["error"]["reason"], "parent_child");
    let body = json!({ "combo": "speed-speed", "zone_a": 0, "zone_b": 1 });
    let (s, v) = call_json(&f.app, "POST", &format!("/api/datasets/{}/compare", f.id), Some(body)).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(v["error"]["reason"], "same_node");
}

#[tokio::test]
async fn identical_zones_are_422() {
    let f = fixture().await;
    let body = json!({ "combo": "curvature-speed", "zone_a": 2, "zone_b": 2 });
    let (s, v) = call_json(&f.app, "POST", &format!("/api/datasets/{}/compare", f.id), Some(body)).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"]["code"], "identical_zones");
}

#[tokio::test]
async fn unknown_ids_are_404() {
    let f = fixture().await;
    let (s, v) = call_json(&f.app, "GET", "/api/datasets/nope/heatmap", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert!(v["error"]["code"].is_string());
    let (s, _) = call_json(&f.app, "GET", &format!("/api/datasets/{}/trajectories/ghost", f.id), None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = call_json(&f.app, "GET", "/api/nothing-here", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn malformed_input_is_400() {
    let f = fixture().await;
    let uri = format!("/api/datasets/{}/compare", f.id);
    let (s, v) = call(&f.app, "POST", &uri, Some(b"{not json".to_vec())).await;
    assert_eq!(s, StatusCode::BAD_REQUEST, "{}", String::from_utf8_lossy(&v));
    let (s, _) = call_json(&f.app, "POST", &uri, Some(json!({ "combo": "curvature-speed", "zone_a": 0, "zone_b": 9 }))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = call_json(&f.app, "GET", &format!("/api/datasets/{}/sample?tid=traj-0001&variable=speed_bogus", f.id), None).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = call_json(&f.app, "POST", "/api/datasets", Some(json!({ "content": "a,b\n1,2\n" }))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn repeated_compare_is_identical() {
    let f = fixture().await;
    let (a, b) = populated_zones(&f, "curvature-speed", 2).await;
    let uri = format!("/api/datasets/{}/compare", f.id);
    let body = serde_json::to_vec(&json!({ "combo": "curvature-speed", "zone_a": a, "zone_b": b })).unwrap();
    let (s1, r1) = call(&f.app, "POST", &uri, Some(body.clone())).await;
    assert_eq!(s1, StatusCode::OK, "{}", String::from_utf8_lossy(&r1));
    let (s2, r2) = call(&f.app, "POST", &uri, Some(body.clone())).await;
    assert_eq!(s2, StatusCode::OK);
    assert_eq!(r1, r2);

    // a fresh server over the same data directory recomputes the same bytes
    let app2 = router(AppState::new(f.cfg.clone()).unwrap());
    let (_, r3) = call(&app2, "POST", &uri, Some(body)).await;
    assert_eq!(r1, r3);

    let v: Value = serde_json::from_slice(&r1).unwrap();
    let total: f64 = v["column_x"].as_array().unwrap().iter().chain(v["column_y"].as_array().unwrap())
        .map(|c| c["importance"].as_f64().unwrap())
        .sum();
    if v["importance_defined"] == true {
        assert!((total - 1.0).abs() < 1e-9, "{total}");
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_compares_agree() {
    let f = fixture().await;
    let (a, b) = populated_zones(&f, "acceleration-speed", 2).await;
    let uri = format!("/api/datasets/{}/compare", f.id);
    let body = serde_json::to_vec(&json!({ "combo": "acceleration-speed", "zone_a": a, "zone_b": b })).unwrap();
    let handles: Vec<_> = (0..6)
        .map(|_| {
            let (app, uri, body) = (f.app.clone(), uri.clone(), body.clone());
            tokio::spawn(async move { call(&app, "POST", &uri, Some(body)).await })
        })
        .collect();
    let mut results = Vec::new();
    for h in handles {
        results.push(h.await.unwrap());
    }
    for (s, r) in &results {
        assert_eq!(*s, StatusCode::OK);
        assert_eq!(r, &results[0].1);
    }
}

#[tokio::test]
async fn signature_sample_returns_its_segment() {
    let f = fixture().await;
    let uri = format!("/api/datasets/{}/sample?tid=traj-0002&variable=distance_geometry_2_1", f.id);
    let (s, v) = call_json(&f.app, "GET", &uri, None).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    assert_eq!(v["kind"], "signature_segment");
    let (_, t) = call_json(&f.app, "GET", &format!("/api/datasets/{}/trajectories/traj-0002", f.id), None).await;
    let n = t["points"].as_array().unwrap().len() as u64;
    assert_eq!(v["start"], 0);
    assert_eq!(v["end"].as_u64().unwrap(), n.div_ceil(2));
}

#[tokio::test]
async fn anchored_sample_and_pair() {
    let f = fixture().await;
    let uri = format!("/api/datasets/{}/sample?tid=traj-0004&variable=speed_quant_median", f.id);
    let (s, v) = call_json(&f.app, "GET", &uri, None).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    assert_eq!(v["kind"], "anchored");
    let (start, end, anchor) = (v["start"].as_u64().unwrap(), v["end"].as_u64().unwrap(), v["anchor"].as_u64().unwrap());
    assert!(start <= anchor && anchor < end);
    assert!(end - start <= 10);

    let uri = format!("/api/datasets/{}/sample-pair?a=traj-0004&b=traj-0005&variable=angles_mean", f.id);
    let (s, v) = call_json(&f.app, "GET", &uri, None).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    assert_eq!(v["windows"].as_array().unwrap().len(), 2);
    let (lo, hi) = (v["color_scale"]["min"].as_f64().unwrap(), v["color_scale"]["max"].as_f64().unwrap());
    for w in v["windows"].as_array().unwrap() {
        for a in w["features"]["angle"].as_array().unwrap() {
            let a = a.as_f64().unwrap();
            assert!(lo <= a && a <= hi);
        }
    }
}

#[tokio::test]
async fn registry_survives_restart() {
    let f = fixture().await;
    let app2 = router(AppState::new(f.cfg.clone()).unwrap());
    let (s, v) = call_json(&app2, "GET", &format!("/api/datasets/{}", f.id), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["name"], "synthetic");
    let (s1, h1) = call(&f.app, "GET", &format!("/api/datasets/{}/heatmap", f.id), None).await;
    let (s2, h2) = call(&app2, "GET", &format!("/api/datasets/{}/heatmap", f.id), None).await;
    assert_eq!((s1, s2), (StatusCode::OK, StatusCode::OK));
    assert_eq!(h1, h2);
}

#[tokio::test]
async fn session_round_trip() {
    let f = fixture().await;
    let (s, v) = call_json(&f.app, "GET", "/api/session", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["dataset"], Value::Null);
    let session = json!({
        "dataset": f.id, "combination": "curvature-speed",
        "trajectories": ["traj-0001", "traj-0002"], "zones": [1, 2], "variable": "speed_mean"
    });
    let (s, v) = call_json(&f.app, "PUT", "/api/session", Some(session.clone())).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    let app2 = router(AppState::new(f.cfg.clone()).unwrap());
    let (_, v) = call_json(&app2, "GET", "/api/session", None).await;
    assert_eq!(v, session);

    let bad = json!({ "dataset": f.id, "trajectories": ["ghost"] });
    let (s, _) = call_json(&f.app, "PUT", "/api/session", Some(bad)).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let bad = json!({ "zones": [3, 3] });
    let (s, _) = call_json(&f.app, "PUT", "/api/session", Some(bad)).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
}
