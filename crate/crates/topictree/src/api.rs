//! Read-only API over an output directory.
//!
//! | route | static file | body |
//! |-------|-------------|------|
//! | `GET /api/tree` | `api/tree.json` | the tree export |
//! | `GET /api/node/{path}` | `api/node/{path}.json` | [`NodeView`] |
//! | `GET /api/heatmap` | `api/heatmap.json` | [`HeatmapView`] |
//!
//! Bodies are rendered once when the directory is loaded, so repeated
//! requests return identical bytes. Errors are `{"error": {"code", "message"}}`.

use std::collections::BTreeMap;
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::extract::{Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use serde::Serialize;
use tower_http::services::ServeDir;

use crate::error::{Error, Result};
use crate::export::{read_heatmap, Article, Keyword, NodeRecord, TreeExport, HEATMAP_CSV, TREE_FILE};

#[derive(Debug, Serialize)]
pub struct ChildStub<'a> {
    pub path: &'a str,
    pub doc_count: usize,
    pub keywords_top5: &'a [Keyword],
    pub coherence: Option<f64>,
}

/// One node with its children reduced to stubs.
#[derive(Debug, Serialize)]
pub struct NodeView<'a> {
    pub path: &'a str,
    pub parent: Option<&'a str>,
    pub depth: usize,
    pub doc_count: usize,
    pub keywords_top5: &'a [Keyword],
    pub keywords_top10: &'a [Keyword],
    pub coherence: Option<f64>,
    pub k_star: Option<usize>,
    pub flag: Option<&'a str>,
    pub articles: &'a [Article],
    pub children: Vec<ChildStub<'a>>,
}

impl<'a> NodeView<'a> {
    fn new(n: &'a NodeRecord) -> Self {
        NodeView {
            path: &n.path,
            parent: n.path.rsplit_once('-').map(|(p, _)| p),
            depth: n.depth,
            doc_count: n.doc_count,
            keywords_top5: &n.keywords_top5,
            keywords_top10: &n.keywords_top10,
            coherence: n.coherence,
            k_star: n.k_star,
            flag: n.flag.as_deref(),
            articles: &n.articles,
            children: n
                .children
                .iter()
                .map(|c| ChildStub {
                    path: &c.path,
                    doc_count: c.doc_count,
                    keywords_top5: &c.keywords_top5,
                    coherence: c.coherence,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct HeatmapView {
    pub paths: Vec<String>,
    pub distances: Vec<Vec<f64>>,
    /// Display similarity, 1 for the closest pair and 0 for the farthest.
    pub similarity: Vec<Vec<f64>>,
    pub d_min: f64,
    pub d_max: f64,
    pub transform: &'static str,
    pub coverage: Vec<f64>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: ErrorDetail<'a>,
}

#[derive(Serialize)]
struct ErrorDetail<'a> {
    code: &'a str,
    message: String,
}

pub fn error_body(code: &str, message: String) -> Vec<u8> {
    serde_json::to_vec(&ErrorBody {
        error: ErrorDetail { code, message },
    })
    .expect("error body serializes")
}

fn json<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("api body serializes");
    s.push(b'\n');
    s
}

/// Pre-rendered response bodies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiBundle {
    pub tree: Vec<u8>,
    pub nodes: BTreeMap<String, Vec<u8>>,
    pub heatmap: Option<Vec<u8>>,
}

impl ApiBundle {
    /// Loads `tree.json` and, when present, the heatmap from `dir`.
    pub fn load(dir: &Path) -> Result<Self> {
        let tree_path = dir.join(TREE_FILE);
        let tree = fs::read(&tree_path).map_err(|e| Error::io(&tree_path, e))?;
        let text = String::from_utf8(tree.clone()).map_err(|_| Error::Schema(format!("{TREE_FILE} is not UTF-8")))?;
        let export = TreeExport::from_json(&text)?;
        let nodes = export
            .nodes_by_layer()
            .into_iter()
            .map(|n| (n.path.clone(), json(&NodeView::new(n))))
            .collect();
        let heatmap = if dir.join(HEATMAP_CSV).exists() {
            let h = read_heatmap(dir)?;
            let n = h.paths.len();
            let view = HeatmapView {
                distances: (0..n).map(|i| h.distances.row(i).to_vec()).collect(),
                similarity: (0..n).map(|i| (0..n).map(|j| h.similarity(i, j)).collect()).collect(),
                paths: h.paths.clone(),
                d_min: h.d_min,
                d_max: h.d_max,
                transform: topictree_core::eval::DISPLAY_TRANSFORM,
                coverage: h.coverage.clone(),
            };
            Some(json(&view))
        } else {
            None
        };
        Ok(ApiBundle { tree, nodes, heatmap })
    }

    /// Writes the bodies as static files under `out/api`.
    pub fn write_static(&self, out: &Path) -> Result<Vec<PathBuf>> {
        let api = out.join("api");
        let node_dir = api.join("node");
        fs::create_dir_all(&node_dir).map_err(|e| Error::io(&node_dir, e))?;
        let mut files = vec![(api.join("tree.json"), &self.tree)];
        for (path, body) in &self.nodes {
            files.push((node_dir.join(format!("{path}.json")), body));
        }
        if let Some(h) = &self.heatmap {
            files.push((api.join("heatmap.json"), h));
        }
        for (p, body) in &files {
            fs::write(p, body).map_err(|e| Error::io(p, e))?;
        }
        Ok(files.into_iter().map(|(p, _)| p).collect())
    }
}

fn body(status: StatusCode, bytes: Vec<u8>) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], bytes).into_response()
}

async fn tree(State(b): State<Arc<ApiBundle>>) -> Response {
    body(StatusCode::OK, b.tree.clone())
}

async fn node(State(b): State<Arc<ApiBundle>>, UrlPath(path): UrlPath<String>) -> Response {
    match b.nodes.get(&path) {
        Some(bytes) => body(StatusCode::OK, bytes.clone()),
        None => body(
            StatusCode::NOT_FOUND,
            error_body("unknown_node", format!("no topic with path {path:?}")),
        ),
    }
}

async fn heatmap(State(b): State<Arc<ApiBundle>>) -> Response {
    match &b.heatmap {
        Some(bytes) => body(StatusCode::OK, bytes.clone()),
        None => body(
            StatusCode::NOT_FOUND,
            error_body("no_heatmap", "the export has not been evaluated".into()),
        ),
    }
}

async fn not_found() -> Response {
    body(StatusCode::NOT_FOUND, error_body("not_found", "no such resource".into()))
}

/// API routes, with static UI assets from `assets` for every other path.
pub fn router(bundle: Arc<ApiBundle>, assets: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/api/tree", get(tree))
        .route("/api/node/{path}", get(node))
        .route("/api/heatmap", get(heatmap))
        .route("/api/{*rest}", get(not_found))
        .with_state(bundle);
    match assets {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(not_found),
    }
}

/// Serves until interrupted.
pub async fn serve(bundle: ApiBundle, assets: Option<PathBuf>, addr: SocketAddr) -> Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await.map_err(|e| Error::Bind {
        addr: addr.to_string(),
        source: e,
    })?;
    let app = router(Arc::new(bundle), assets.as_deref());
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| Error::Bind {
            addr: addr.to_string(),
            source: e,
        })
}
