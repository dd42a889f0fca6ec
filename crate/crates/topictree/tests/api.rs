mod common;

use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::{Request, StatusCode};
use common::{build_small, evaluated_output};
use serde_json::Value;
use topictree::api::{router, ApiBundle};
use topictree::export::TreeExport;
use tower::ServiceExt;

async fn get(app: &axum::Router, uri: &str) -> (StatusCode, Vec<u8>) {
    let resp = app
        .clone()
        .oneshot(Request::get(uri).body(Body::empty()).unwrap())
        .await
        .unwrap();
    let status = resp.status();
    (status, to_bytes(resp.into_body(), usize::MAX).await.unwrap().to_vec())
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap()
}

#[tokio::test]
async fn tree_is_the_export_and_stable() {
    let dir = tempfile::tempdir().unwrap();
    let out = evaluated_output(dir.path());
    let app = router(Arc::new(ApiBundle::load(&out).unwrap()), None);
    let (s1, a) = get(&app, "/api/tree").await;
    let (s2, b) = get(&app, "/api/tree").await;
    assert_eq!((s1, s2), (StatusCode::OK, StatusCode::OK));
    assert_eq!(a, b);
    assert_eq!(a, std::fs::read(out.join("tree.json")).unwrap());
    TreeExport::from_json(std::str::from_utf8(&a).unwrap()).unwrap();
}

#[tokio::test]
async fn node_views_carry_child_stubs() {
    let dir = tempfile::tempdir().unwrap();
    let out = evaluated_output(dir.path());
    let export = TreeExport::read(&out.join("tree.json")).unwrap();
    let app = router(Arc::new(ApiBundle::load(&out).unwrap()), None);
    for node in export.nodes_by_layer() {
        let (status, body) = get(&app, &format!("/api/node/{}", node.path)).await;
        assert_eq!(status, StatusCode::OK);
        let v = json(&body);
        assert_eq!(v["path"], node.path.as_str());
        assert_eq!(v["doc_count"], node.doc_count);
        assert_eq!(v["articles"].as_array().unwrap().len(), node.doc_count);
        let expected_parent = node.path.rsplit_once('-').map(|(p, _)| p);
        assert_eq!(v["parent"].as_str(), expected_parent);
        let stubs: Vec<&str> = v["children"].as_array().unwrap().iter().map(|c| c["path"].as_str().unwrap()).collect();
        let children: Vec<&str> = node.children.iter().map(|c| c.path.as_str()).collect();
        assert_eq!(stubs, children);
        for (stub, child) in v["children"].as_array().unwrap().iter().zip(&node.children) {
            assert_eq!(stub["doc_count"], child.doc_count);
            assert!(stub.get("articles").is_none());
            assert_eq!(stub["keywords_top5"].as_array().unwrap().len(), child.keywords_top5.len());
        }
        assert_eq!(v["coherence"].as_f64(), node.coherence);
    }
    let (_, first) = get(&app, "/api/node/1").await;
    assert!(json(&first)["children"].as_array().unwrap().len() >= 2);
}

#[tokio::test]
async fn unknown_routes_are_structured_404s() {
    let dir = tempfile::tempdir().unwrap();
    let out = evaluated_output(dir.path());
    let app = router(Arc::new(ApiBundle::load(&out).unwrap()), None);
    let (status, body) = get(&app, "/api/node/9-9").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let v = json(&body);
    assert_eq!(v["error"]["code"], "unknown_node");
    assert!(v["error"]["message"].as_str().unwrap().contains("9-9"));
    for uri in ["/api/nodes", "/api/node/1/extra", "/index.html"] {
        let (status, body) = get(&app, uri).await;
        assert_eq!(status, StatusCode::NOT_FOUND, "{uri}");
        assert_eq!(json(&body)["error"]["code"], "not_found", "{uri}");
    }
}

#[tokio::test]
async fn heatmap_view() {
    let dir = tempfile::tempdir().unwrap();
    let out = evaluated_output(dir.path());
    let app = router(Arc::new(ApiBundle::load(&out).unwrap()), None);
    let (status, body) = get(&app, "/api/heatmap").await;
    assert_eq!(status, StatusCode::OK);
    let v = json(&body);
    let paths: Vec<&str> = v["paths"].as_array().unwrap().iter().map(|p| p.as_str().unwrap()).collect();
    let export = TreeExport::read(&out.join("tree.json")).unwrap();
    let layered: Vec<&str> = export.nodes_by_layer().iter().map(|n| n.path.as_str()).collect();
    assert_eq!(paths, layered);
    let d = v["distances"].as_array().unwrap();
    let s = v["similarity"].as_array().unwrap();
    let (lo, hi) = (v["d_min"].as_f64().unwrap(), v["d_max"].as_f64().unwrap());
    assert_eq!(v["transform"], "affine-minmax");
    for i in 0..paths.len() {
        for j in 0..paths.len() {
            let dij = d[i][j].as_f64().unwrap();
            assert_eq!(dij, d[j][i].as_f64().unwrap());
            let expected = 1.0 - (dij - lo) / (hi - lo);
            assert!((s[i][j].as_f64().unwrap() - expected).abs() < 1e-12);
        }
        assert_eq!(s[i][i].as_f64().unwrap(), 1.0 - (0.0 - lo) / (hi - lo));
    }
}

#[tokio::test]
async fn heatmap_missing_before_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    let (_, mut run) = build_small(dir.path());
    let out = dir.path().join("out");
    topictree::pipeline::write_build(&mut run, &out, false).unwrap();
    let app = router(Arc::new(ApiBundle::load(&out).unwrap()), None);
    let (status, body) = get(&app, "/api/heatmap").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(json(&body)["error"]["code"], "no_heatmap");
}

#[tokio::test]
async fn ui_assets_are_served_outside_the_api() {
    let dir = tempfile::tempdir().unwrap();
    let out = evaluated_output(dir.path());
    let ui = dir.path().join("ui");
    std::fs::create_dir_all(&ui).unwrap();
    std::fs::write(ui.join("index.html"), "<html></html>").unwrap();
    let app = router(Arc::new(ApiBundle::load(&out).unwrap()), Some(&ui));
    let (status, body) = get(&app, "/index.html").await;
    assert_eq!((status, body.as_slice()), (StatusCode::OK, &b"<html></html>"[..]));
    let (status, _) = get(&app, "/api/tree").await;
    assert_eq!(status, StatusCode::OK);
}

#[tokio::test]
async fn static_export_matches_live_responses() {
    let dir = tempfile::tempdir().unwrap();
    let out = evaluated_output(dir.path());
    let bundle = ApiBundle::load(&out).unwrap();
    let site = dir.path().join("site");
    let files = bundle.write_static(&site).unwrap();
    assert_eq!(files.len(), 2 + bundle.nodes.len());
    let app = router(Arc::new(bundle.clone()), None);
    assert_eq!(std::fs::read(site.join("api/tree.json")).unwrap(), get(&app, "/api/tree").await.1);
    assert_eq!(std::fs::read(site.join("api/heatmap.json")).unwrap(), get(&app, "/api/heatmap").await.1);
    for path in bundle.nodes.keys() {
        let file = std::fs::read(site.join(format!("api/node/{path}.json"))).unwrap();
        assert_eq!(file, get(&app, &format!("/api/node/{path}")).await.1, "{path}");
    }
}

#[test]
fn loading_rejects_a_bad_export() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("tree.json"), r#"{"schema_version": 99}"#).unwrap();
    let e = ApiBundle::load(dir.path()).unwrap_err();
    assert_eq!(e.exit_code(), topictree::error::exit::SCHEMA);
    let e = ApiBundle::load(&dir.path().join("missing")).unwrap_err();
    assert_eq!(e.exit_code(), topictree::error::exit::INPUT);
}
