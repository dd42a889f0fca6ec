//! On-disk formats: the tree export, split series, heatmap and factor dump.
//!
//! An output directory holds:
//!
//! | file | content |
//! |------|---------|
//! | `tree.json` | [`TreeExport`] |
//! | `manifest.json` | [`crate::manifest::RunManifest`] |
//! | `variance.csv`, `lss.csv` | root split series (`k,increment` and `k,score`) |
//! | `splits/<node>/variance.csv`, `splits/<node>/lss.csv` | the same per split node |
//! | `heatmap.csv`, `heatmap.json` | distances with node-path header row and column, and their metadata |
//! | `factors.bin` | optional root `W` and `H` |

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use topictree_core::eval::{SimilarityHeatmap, DISPLAY_TRANSFORM, WMD_WORDS};
use topictree_core::hnmf::{LeafFlag, SplitRecord};
use topictree_core::nmf::topic_words;
use topictree_core::{CorpusMatrix, LssDistribution, Matrix, TopicNode, TopicTree};

use crate::config::BuildConfig;
use crate::error::{Error, Result};
use crate::ingest::Document;

pub const SCHEMA_VERSION: u32 = 1;

pub const TREE_FILE: &str = "tree.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const VARIANCE_FILE: &str = "variance.csv";
pub const LSS_FILE: &str = "lss.csv";
pub const SPLITS_DIR: &str = "splits";
pub const HEATMAP_CSV: &str = "heatmap.csv";
pub const HEATMAP_META: &str = "heatmap.json";
pub const FACTORS_FILE: &str = "factors.bin";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Keyword {
    pub word: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Article {
    pub id: String,
    pub title: String,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeRecord {
    pub path: String,
    pub depth: usize,
    pub doc_count: usize,
    pub keywords_top5: Vec<Keyword>,
    pub keywords_top10: Vec<Keyword>,
    /// Top dictionary words used for topic distances.
    pub wmd_words: Vec<Keyword>,
    pub coherence: Option<f64>,
    /// Topic count chosen when this node was split.
    pub k_star: Option<usize>,
    /// `"max_depth"` or `"too_small"` for leaves above the size limit.
    pub flag: Option<String>,
    pub articles: Vec<Article>,
    pub children: Vec<NodeRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusMeta {
    pub n_docs: usize,
    pub n_terms: usize,
    /// Ids of documents left out because no token survived the vocabulary.
    pub excluded: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootRecord {
    pub doc_count: usize,
    pub k_star: usize,
    pub range: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalMeta {
    pub coherence_words: usize,
    /// `"topic"` or `"corpus"`.
    pub coherence_scope: String,
    /// `"uniform"` or `"dictionary"`.
    pub wmd_weighting: String,
    pub coverage_floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeExport {
    pub schema_version: u32,
    pub corpus: CorpusMeta,
    pub config: BuildConfig,
    pub root: RootRecord,
    pub topics: Vec<NodeRecord>,
    pub evaluation: Option<EvalMeta>,
}

fn keywords(words: &[(String, f64)], n: usize) -> Vec<Keyword> {
    words
        .iter()
        .take(n)
        .map(|(w, x)| Keyword {
            word: w.clone(),
            weight: *x,
        })
        .collect()
}

pub fn flag_name(flag: LeafFlag) -> &'static str {
    match flag {
        LeafFlag::MaxDepth => "max_depth",
        LeafFlag::TooSmall => "too_small",
    }
}

impl TreeExport {
    /// `documents` must contain every document id of `corpus`.
    pub fn from_tree(tree: &TopicTree, corpus: &CorpusMatrix, documents: &[Document], config: &BuildConfig) -> Result<Self> {
        let by_id: BTreeMap<&str, &Document> = documents.iter().map(|d| (d.id.as_str(), d)).collect();
        let articles = corpus
            .doc_ids()
            .iter()
            .map(|id| {
                let d = by_id
                    .get(id.as_str())
                    .ok_or_else(|| Error::Argument(format!("document {id:?} missing from the corpus")))?;
                Ok(Article {
                    id: d.id.clone(),
                    title: d.title.clone(),
                    source: d.source.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let vocab = corpus.vocabulary();

        fn record(node: &TopicNode, articles: &[Article], vocab: &topictree_core::Vocabulary) -> Result<NodeRecord> {
            let wmd = topic_words(&node.dictionary, vocab, WMD_WORDS)?;
            Ok(NodeRecord {
                path: node.path.clone(),
                depth: node.depth,
                doc_count: node.docs.len(),
                keywords_top5: keywords(&node.keywords, 5),
                keywords_top10: keywords(&node.keywords, 10),
                wmd_words: keywords(&wmd, WMD_WORDS),
                coherence: node.coherence,
                k_star: node.k_star(),
                flag: node.flag.map(|f| flag_name(f).to_string()),
                articles: node.docs.iter().map(|&j| articles[j].clone()).collect(),
                children: node
                    .children
                    .iter()
                    .map(|c| record(c, articles, vocab))
                    .collect::<Result<_>>()?,
            })
        }

        Ok(TreeExport {
            schema_version: SCHEMA_VERSION,
            corpus: CorpusMeta {
                n_docs: corpus.n_docs(),
                n_terms: corpus.n_terms(),
                excluded: corpus.excluded().to_vec(),
            },
            config: config.clone(),
            root: RootRecord {
                doc_count: tree.n_docs,
                k_star: tree.root.k_star,
                range: tree.root.range.to_string(),
            },
            topics: tree
                .children
                .iter()
                .map(|c| record(c, &articles, vocab))
                .collect::<Result<_>>()?,
            evaluation: None,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("export serializes");
        s.push('\n');
        s
    }

    /// Parses and validates an export. Version and structure problems are
    /// schema errors.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Schema(format!("not JSON: {e}")))?;
        match value.get("schema_version").and_then(|v| v.as_u64()) {
            Some(v) if v == u64::from(SCHEMA_VERSION) => {}
            Some(v) => {
                return Err(Error::Schema(format!(
                    "unsupported schema version {v} (expected {SCHEMA_VERSION})"
                )))
            }
            None => return Err(Error::Schema("missing schema_version".into())),
        }
        let export: TreeExport = serde_json::from_value(value).map_err(|e| Error::Schema(e.to_string()))?;
        export.validate()?;
        Ok(export)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        fn check(node: &NodeRecord, parent: &str, index: usize, depth: usize) -> Result<()> {
            let bad = |msg: String| Err(Error::Schema(format!("node {:?}: {msg}", node.path)));
            let expected = if parent.is_empty() {
                format!("{index}")
            } else {
                format!("{parent}-{index}")
            };
            if node.path != expected {
                return bad(format!("expected path {expected:?}"));
            }
            if node.depth != depth {
                return bad(format!("depth {} but path implies {depth}", node.depth));
            }
            if node.doc_count != node.articles.len() {
                return bad(format!("doc_count {} but {} articles", node.doc_count, node.articles.len()));
            }
            for list in [&node.keywords_top5, &node.keywords_top10, &node.wmd_words] {
                if list.windows(2).any(|p| p[0].weight < p[1].weight) {
                    return bad("keywords not in descending order".into());
                }
            }
            if node.keywords_top5.len() > 5 || node.keywords_top10.len() > 10 {
                return bad("too many keywords".into());
            }
            if !node.keywords_top10.starts_with(&node.keywords_top5) {
                return bad("top-5 keywords are not a prefix of the top-10".into());
            }
            for (i, c) in node.children.iter().enumerate() {
                check(c, &node.path, i + 1, depth + 1)?;
            }
            Ok(())
        }
        for (i, t) in self.topics.iter().enumerate() {
            check(t, "", i + 1, 1)?;
        }
        Ok(())
    }

    /// Every node, layer by layer, each layer in tree order.
    pub fn nodes_by_layer(&self) -> Vec<&NodeRecord> {
        fn collect<'a>(n: &'a NodeRecord, out: &mut Vec<&'a NodeRecord>) {
            out.push(n);
            for c in &n.children {
                collect(c, out);
            }
        }
        let mut all = Vec::new();
        for t in &self.topics {
            collect(t, &mut all);
        }
        all.sort_by_key(|n| n.depth);
        all
    }

    pub fn find(&self, path: &str) -> Option<&NodeRecord> {
        self.nodes_by_layer().into_iter().find(|n| n.path == path)
    }

    /// Visits every node in pre-order.
    pub fn for_each_node_mut(&mut self, f: &mut impl FnMut(&mut NodeRecord)) {
        fn visit(n: &mut NodeRecord, f: &mut impl FnMut(&mut NodeRecord)) {
            f(n);
            for c in n.children.iter_mut() {
                visit(c, f);
            }
        }
        for t in self.topics.iter_mut() {
            visit(t, f);
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// `k,increment` for k = 1, 2, ...
pub fn variance_csv(increments: &[f64]) -> Vec<u8> {
    csv_bytes(
        &["k", "increment"],
        increments
            .iter()
            .enumerate()
            .map(|(i, v)| vec![(i + 1).to_string(), v.to_string()]),
    )
}

/// `k,score`, one row per seed pair.
pub fn lss_csv(dist: &LssDistribution) -> Vec<u8> {
    csv_bytes(
        &["k", "score"],
        dist.scores
            .iter()
            .flat_map(|(k, s)| s.iter().map(move |v| vec![k.to_string(), v.to_string()])),
    )
}

/// Writes the root series and the per-split series.
pub fn write_split_series(dir: &Path, tree: &TopicTree) -> Result<Vec<String>> {
    let mut written = Vec::new();
    let mut put = |name: String, bytes: Vec<u8>| -> Result<()> {
        write_file(&dir.join(&name), &bytes)?;
        written.push(name);
        Ok(())
    };
    put(VARIANCE_FILE.into(), variance_csv(&tree.root.increments))?;
    put(LSS_FILE.into(), lss_csv(&tree.root.lss))?;
    let mut splits: Vec<(String, &SplitRecord)> = vec![("root".into(), &tree.root)];
    splits.extend(
        tree.nodes_by_layer()
            .into_iter()
            .filter_map(|n| n.split.as_ref().map(|s| (n.path.clone(), s))),
    );
    for (label, s) in splits {
        put(format!("{SPLITS_DIR}/{label}/{VARIANCE_FILE}"), variance_csv(&s.increments))?;
        put(format!("{SPLITS_DIR}/{label}/{LSS_FILE}"), lss_csv(&s.lss))?;
    }
    Ok(written)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatmapMeta {
    pub paths: Vec<String>,
    pub d_min: f64,
    pub d_max: f64,
    pub transform: String,
    /// Fraction of each topic's words with an embedding, in `paths` order.
    pub coverage: Vec<f64>,
}

pub fn write_heatmap(dir: &Path, h: &SimilarityHeatmap) -> Result<()> {
    let mut header = vec!["path"];
    header.extend(h.paths.iter().map(String::as_str));
    let rows = h.paths.iter().enumerate().map(|(i, p)| {
        let mut row = vec![p.clone()];
        row.extend(h.distances.row(i).iter().map(|d| d.to_string()));
        row
    });
    write_file(&dir.join(HEATMAP_CSV), &csv_bytes(&header, rows))?;
    let meta = HeatmapMeta {
        paths: h.paths.clone(),
        d_min: h.d_min,
        d_max: h.d_max,
        transform: DISPLAY_TRANSFORM.into(),
        coverage: h.coverage.clone(),
    };
    let mut json = serde_json::to_string_pretty(&meta).expect("meta serializes");
    json.push('\n');
    write_file(&dir.join(HEATMAP_META), json.as_bytes())
}

/// Reads `heatmap.csv` and its metadata back.
pub fn read_heatmap(dir: &Path) -> Result<SimilarityHeatmap> {
    let meta_path = dir.join(HEATMAP_META);
    let text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let meta: HeatmapMeta = serde_json::from_str(&text).map_err(|e| Error::Schema(format!("{HEATMAP_META}: {e}")))?;
    if meta.transform != DISPLAY_TRANSFORM {
        return Err(Error::Schema(format!("unknown transform {:?}", meta.transform)));
    }
    let csv_path = dir.join(HEATMAP_CSV);
    let mut r = csv::Reader::from_path(&csv_path).map_err(|e| Error::Schema(format!("{HEATMAP_CSV}: {e}")))?;
    let schema = |m: String| Error::Schema(format!("{HEATMAP_CSV}: {m}"));
    let header: Vec<String> = r.headers().map_err(|e| schema(e.to_string()))?.iter().map(String::from).collect();
    if header.first().map(String::as_str) != Some("path") || header[1..] != meta.paths[..] {
        return Err(schema("header does not match the metadata paths".into()));
    }
    let n = meta.paths.len();
    let mut values = Vec::with_capacity(n * n);
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| schema(e.to_string()))?;
        if i >= n || rec.get(0) != Some(meta.paths[i].as_str()) || rec.len() != n + 1 {
            return Err(schema(format!("row {} is malformed", i + 1)));
        }
        for v in rec.iter().skip(1) {
            values.push(v.parse::<f64>().map_err(|e| schema(e.to_string()))?);
        }
    }
    if values.len() != n * n {
        return Err(schema(format!("expected {n} rows")));
    }
    Ok(SimilarityHeatmap {
        paths: meta.paths,
        distances: Matrix::from_vec(n, n, values)?,
        d_min: meta.d_min,
        d_max: meta.d_max,
        coverage: meta.coverage,
    })
}

fn put_matrix(out: &mut impl Write, m: &Matrix) -> std::io::Result<()> {
    out.write_all(&(m.rows() as u64).to_le_bytes())?;
    out.write_all(&(m.cols() as u64).to_le_bytes())?;
    for v in m.as_slice() {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn get_matrix(input: &mut impl Read) -> std::io::Result<Matrix> {
    let mut word = [0u8; 8];
    input.read_exact(&mut word)?;
    let rows = u64::from_le_bytes(word) as usize;
    input.read_exact(&mut word)?;
    let cols = u64::from_le_bytes(word) as usize;
    let len = rows
        .checked_mul(cols)
        .ok_or_else(|| std::io::Error::new(std::io::ErrorKind::InvalidData, "dimensions overflow"))?;
    let mut data = Vec::with_capacity(len.min(1 << 24));
    for _ in 0..len {
        input.read_exact(&mut word)?;
        data.push(f64::from_le_bytes(word));
    }
    Matrix::from_vec(rows, cols, data).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()))
}

/// `W` then `H`, each as little-endian `u64` rows, `u64` cols and the
/// row-major `f64` entries.
pub fn write_factors(out: &mut impl Write, w: &Matrix, h: &Matrix) -> std::io::Result<()> {
    put_matrix(out, w)?;
    put_matrix(out, h)
}

pub fn read_factors(input: &mut impl Read) -> std::io::Result<(Matrix, Matrix)> {
    Ok((get_matrix(input)?, get_matrix(input)?))
}
