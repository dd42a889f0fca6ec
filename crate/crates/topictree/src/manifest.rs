//! Run manifest: the configuration, corpus fingerprint and diagnostics of a
//! build, plus what evaluation adds later.

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use topictree_core::hnmf::TreeWarning;
use topictree_core::TopicTree;

use crate::config::BuildConfig;
use crate::error::{Error, Result};
use crate::export::{flag_name, SCHEMA_VERSION};
use crate::ingest::IngestStats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WarningRecord {
    /// A document's coding weights were all zero when `node` was split
    /// (`"root"` for the whole corpus).
    ZeroCoding { node: String, doc: String },
    ZeroSimilarity { doc: String, leaf: String },
    OversizedLeaf { path: String, flag: String, size: usize },
    DegenerateRun { node: String, seed: u64 },
    NoCoherence { path: String, reason: String },
    LowCoverage { path: String, coverage: f64 },
}

impl WarningRecord {
    pub fn from_tree(w: &TreeWarning, doc_ids: &[String]) -> Self {
        let node_label = |n: &str| if n.is_empty() { "root".to_string() } else { n.to_string() };
        match w {
            TreeWarning::ZeroCoding { node, doc } => WarningRecord::ZeroCoding {
                node: node_label(node),
                doc: doc_ids[*doc].clone(),
            },
            TreeWarning::ZeroSimilarity { doc, leaf } => WarningRecord::ZeroSimilarity {
                doc: doc_ids[*doc].clone(),
                leaf: leaf.clone(),
            },
            TreeWarning::OversizedLeaf { path, flag, size } => WarningRecord::OversizedLeaf {
                path: path.clone(),
                flag: flag_name(*flag).into(),
                size: *size,
            },
            TreeWarning::DegenerateRun { node, seed } => WarningRecord::DegenerateRun {
                node: node_label(node),
                seed: *seed,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerChoice {
    pub layer: usize,
    /// Node that was split; `"root"` for the first layer.
    pub node: String,
    pub k_star: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool_version: String,
    pub corpus_path: PathBuf,
    pub corpus_sha256: String,
    pub config: BuildConfig,
    pub seed_master: u64,
    pub layer_k: Vec<LayerChoice>,
    pub ingest: IngestStats,
    pub excluded_docs: Vec<String>,
    pub reassigned_docs: usize,
    pub timings_ms: BTreeMap<String, u64>,
    pub warnings: Vec<WarningRecord>,
    /// Per-topic fraction of words with an embedding, filled by evaluation.
    pub embedding_coverage: Option<BTreeMap<String, f64>>,
    pub outputs: Vec<String>,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

impl RunManifest {
    pub fn new(corpus_path: &Path, config: &BuildConfig, tree: &TopicTree, doc_ids: &[String]) -> Result<Self> {
        let layer_k = tree
            .layer_k()
            .into_iter()
            .flat_map(|(layer, nodes)| {
                nodes.into_iter().map(move |(node, k_star)| LayerChoice {
                    layer,
                    node: if node.is_empty() { "root".into() } else { node },
                    k_star,
                })
            })
            .collect();
        Ok(RunManifest {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            corpus_path: corpus_path.to_path_buf(),
            corpus_sha256: sha256_file(corpus_path)?,
            config: config.clone(),
            seed_master: config.seed,
            layer_k,
            ingest: IngestStats::default(),
            excluded_docs: Vec::new(),
            reassigned_docs: tree.audit.len(),
            timings_ms: BTreeMap::new(),
            warnings: tree
                .warnings
                .iter()
                .map(|w| WarningRecord::from_tree(w, doc_ids))
                .collect(),
            embedding_coverage: None,
            outputs: Vec::new(),
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: RunManifest =
            serde_json::from_str(&text).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
        if m.schema_version != SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "{}: unsupported schema version {}",
                path.display(),
                m.schema_version
            )));
        }
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}
