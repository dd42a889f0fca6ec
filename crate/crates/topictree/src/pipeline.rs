//! End-to-end runs: corpus file to tree export, and export to scores.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use topictree_core::eval::{coherence, heatmap, MassWeighting, SimilarityHeatmap, TopicWordSet};
use topictree_core::{build_tfidf, build_tree, build_vocabulary, nmf, normalize, CorpusMatrix, TopicTree};

use crate::config::BuildConfig;
use crate::embeddings::load_embeddings;
use crate::error::{Error, Result};
use crate::export::{
    write_factors, write_heatmap, write_split_series, EvalMeta, TreeExport, FACTORS_FILE, MANIFEST_FILE, TREE_FILE,
};
use crate::ingest::{ingest, Document, Ingested};
use crate::manifest::{sha256_file, RunManifest, WarningRecord};
use crate::tokenize::Tokenizer;

/// Ingested documents, their tokens and the term-document matrix.
pub struct PreparedCorpus {
    pub ingested: Ingested,
    pub tokens: Vec<Vec<String>>,
    pub matrix: CorpusMatrix,
}

fn millis(t: Instant) -> u64 {
    t.elapsed().as_millis() as u64
}

pub fn tokenize_all(docs: &[Document], cfg: &BuildConfig) -> Result<Vec<Vec<String>>> {
    let tokenizer = Tokenizer::new(&cfg.tokens.pipeline())?;
    Ok(docs.par_iter().map(|d| tokenizer.tokenize(d)).collect())
}

pub fn prepare(corpus_path: &Path, cfg: &BuildConfig, timings: &mut BTreeMap<String, u64>) -> Result<PreparedCorpus> {
    let t = Instant::now();
    let ingested = ingest(corpus_path, &cfg.filter())?;
    timings.insert("ingest".into(), millis(t));

    let t = Instant::now();
    let tokens = tokenize_all(&ingested.documents, cfg)?;
    timings.insert("tokenize".into(), millis(t));

    let t = Instant::now();
    let ids: Vec<String> = ingested.documents.iter().map(|d| d.id.clone()).collect();
    let vocab = build_vocabulary(&tokens, cfg.min_df, cfg.max_df_ratio)?;
    let matrix = build_tfidf(&ids, &tokens, vocab)?;
    timings.insert("vectorize".into(), millis(t));
    Ok(PreparedCorpus {
        ingested,
        tokens,
        matrix,
    })
}

pub struct BuildRun {
    pub corpus: PreparedCorpus,
    pub tree: TopicTree,
    pub export: TreeExport,
    pub manifest: RunManifest,
}

pub fn build(corpus_path: &Path, cfg: &BuildConfig) -> Result<BuildRun> {
    cfg.validate()?;
    let hnmf = cfg.hnmf()?;
    let mut timings = BTreeMap::new();
    let corpus = prepare(corpus_path, cfg, &mut timings)?;

    let t = Instant::now();
    let tree = build_tree(&corpus.matrix, &hnmf)?;
    timings.insert("tree".into(), millis(t));

    let export = TreeExport::from_tree(&tree, &corpus.matrix, &corpus.ingested.documents, cfg)?;
    let mut manifest = RunManifest::new(corpus_path, cfg, &tree, corpus.matrix.doc_ids())?;
    manifest.ingest = corpus.ingested.stats.clone();
    manifest.excluded_docs = corpus.matrix.excluded().to_vec();
    manifest.timings_ms = timings;
    Ok(BuildRun {
        corpus,
        tree,
        export,
        manifest,
    })
}

/// Re-runs the build a manifest describes. The corpus file must be unchanged.
pub fn replay(manifest_path: &Path) -> Result<BuildRun> {
    let m = RunManifest::read(manifest_path)?;
    let digest = sha256_file(&m.corpus_path)?;
    if digest != m.corpus_sha256 {
        return Err(Error::Argument(format!(
            "{} changed since the manifest was written",
            m.corpus_path.display()
        )));
    }
    build(&m.corpus_path, &m.config)
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Writes the export, split series and manifest (and the root factors when
/// asked). Returns the written file names relative to `out_dir`.
pub fn write_build(run: &mut BuildRun, out_dir: &Path, dump_factors: bool) -> Result<Vec<String>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut outputs = vec![TREE_FILE.to_string()];
    write(&out_dir.join(TREE_FILE), run.export.to_json().as_bytes())?;
    outputs.extend(write_split_series(out_dir, &run.tree)?);
    if dump_factors {
        let root = &run.tree.root;
        let params = &run.tree.config.nmf;
        let f = normalize(&nmf(run.corpus.matrix.matrix(), &params.config(root.k_star, root.factor_seed))?)?;
        let mut bytes = Vec::new();
        write_factors(&mut bytes, &f.w, &f.h).expect("in-memory write");
        write(&out_dir.join(FACTORS_FILE), &bytes)?;
        outputs.push(FACTORS_FILE.into());
    }
    outputs.push(MANIFEST_FILE.into());
    run.manifest.outputs = outputs.clone();
    write(&out_dir.join(MANIFEST_FILE), run.manifest.to_json().as_bytes())?;
    Ok(outputs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Scope {
    /// Documents assigned to the topic.
    #[default]
    Topic,
    /// Every document of the corpus.
    Corpus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Weighting {
    #[default]
    Uniform,
    Dictionary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOptions {
    /// Keywords per topic scored for coherence.
    pub coherence_words: usize,
    pub scope: Scope,
    pub weighting: Weighting,
    /// Smallest acceptable fraction of a topic's words with an embedding.
    pub coverage_floor: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            coherence_words: topictree_core::eval::COHERENCE_WORDS,
            scope: Scope::Topic,
            weighting: Weighting::Uniform,
            coverage_floor: 0.5,
        }
    }
}

#[derive(Debug)]
pub struct Evaluation {
    pub heatmap: SimilarityHeatmap,
    pub warnings: Vec<WarningRecord>,
}

/// Fills coherence on every node of `export` from the documents' token
/// sets, and computes the topic distance heatmap.
pub fn evaluate(
    export: &mut TreeExport,
    doc_tokens: &BTreeMap<String, BTreeSet<String>>,
    emb: &topictree_core::eval::EmbeddingTable,
    opts: &EvalOptions,
) -> Result<Evaluation> {
    if !(0.0..=1.0).contains(&opts.coverage_floor) {
        return Err(Error::Argument("coverage floor must lie in [0, 1]".into()));
    }
    let mut warnings = Vec::new();

    let sets: Vec<TopicWordSet> = export
        .nodes_by_layer()
        .into_iter()
        .map(|n| {
            TopicWordSet::new(
                n.path.clone(),
                n.wmd_words.iter().map(|k| (k.word.clone(), k.weight)).collect(),
            )
        })
        .collect::<topictree_core::Result<_>>()
        .map_err(|e| Error::Schema(e.to_string()))?;
    let mut low: Vec<(f64, &str)> = sets
        .iter()
        .map(|s| (s.coverage(emb), s.path.as_str()))
        .filter(|(c, _)| *c < opts.coverage_floor)
        .collect();
    if !low.is_empty() {
        low.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(b.1)));
        let worst = low
            .iter()
            .take(5)
            .map(|(c, p)| format!("topic {p} {:.0}%", c * 100.0))
            .collect::<Vec<_>>()
            .join(", ");
        return Err(Error::Coverage {
            floor: opts.coverage_floor,
            worst,
        });
    }
    let weighting = match opts.weighting {
        Weighting::Uniform => MassWeighting::Uniform,
        Weighting::Dictionary => MassWeighting::Dictionary,
    };
    let map = heatmap(&sets, emb, weighting)?;
    for (p, c) in map.paths.iter().zip(&map.coverage) {
        if *c < 1.0 {
            warnings.push(WarningRecord::LowCoverage {
                path: p.clone(),
                coverage: *c,
            });
        }
    }

    let all: Vec<&BTreeSet<String>> = doc_tokens.values().collect();
    let p = opts.coherence_words;
    let mut failure = None;
    export.for_each_node_mut(&mut |node| {
        let words: Vec<&str> = node.wmd_words.iter().take(p).map(|k| k.word.as_str()).collect();
        let docs: Vec<BTreeSet<&str>> = match opts.scope {
            Scope::Topic => node
                .articles
                .iter()
                .map(|a| doc_tokens.get(&a.id).map(|s| s.iter().map(String::as_str).collect()))
                .collect::<Option<_>>()
                .unwrap_or_else(|| {
                    failure.get_or_insert_with(|| format!("topic {} lists documents missing from the corpus", node.path));
                    Vec::new()
                }),
            Scope::Corpus => all.iter().map(|s| s.iter().map(String::as_str).collect()).collect(),
        };
        match coherence(&docs, &words) {
            Ok(c) => node.coherence = Some(c.score),
            Err(e) => {
                node.coherence = None;
                warnings.push(WarningRecord::NoCoherence {
                    path: node.path.clone(),
                    reason: e.to_string(),
                });
            }
        }
    });
    if let Some(msg) = failure {
        return Err(Error::Argument(msg));
    }
    export.evaluation = Some(EvalMeta {
        coherence_words: p,
        coherence_scope: match opts.scope {
            Scope::Topic => "topic",
            Scope::Corpus => "corpus",
        }
        .into(),
        wmd_weighting: match opts.weighting {
            Weighting::Uniform => "uniform",
            Weighting::Dictionary => "dictionary",
        }
        .into(),
        coverage_floor: opts.coverage_floor,
    });
    Ok(Evaluation { heatmap: map, warnings })
}

/// Token sets of the corpus documents, tokenized as the export's build was.
pub fn document_token_sets(corpus_path: &Path, cfg: &BuildConfig) -> Result<BTreeMap<String, BTreeSet<String>>> {
    let ingested = ingest(corpus_path, &cfg.filter())?;
    let tokens = tokenize_all(&ingested.documents, cfg)?;
    Ok(ingested
        .documents
        .into_iter()
        .zip(tokens)
        .map(|(d, t)| (d.id, t.into_iter().collect()))
        .collect())
}

/// Evaluates the export in `out_dir` and rewrites it with scores, writing
/// the heatmap beside it. The corpus defaults to the one in the manifest.
pub fn run_eval(out_dir: &Path, corpus: Option<&Path>, embeddings: &Path, opts: &EvalOptions) -> Result<Evaluation> {
    let tree_path = out_dir.join(TREE_FILE);
    let mut export = TreeExport::read(&tree_path)?;
    let manifest_path = out_dir.join(MANIFEST_FILE);
    let mut manifest = manifest_path
        .exists()
        .then(|| RunManifest::read(&manifest_path))
        .transpose()?;
    let corpus_path: PathBuf = match (corpus, &manifest) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(m)) => m.corpus_path.clone(),
        (None, None) => {
            return Err(Error::Argument(
                "no corpus given and no manifest to take it from".into(),
            ))
        }
    };
    let t = Instant::now();
    let emb = load_embeddings(embeddings)?;
    let tokens = document_token_sets(&corpus_path, &export.config)?;
    let eval = evaluate(&mut export, &tokens, &emb, opts)?;

    write(&tree_path, export.to_json().as_bytes())?;
    write_heatmap(out_dir, &eval.heatmap)?;
    if let Some(m) = manifest.as_mut() {
        m.embedding_coverage = Some(
            eval.heatmap
                .paths
                .iter()
                .cloned()
                .zip(eval.heatmap.coverage.iter().copied())
                .collect(),
        );
        m.timings_ms.insert("eval".into(), millis(t));
        m.warnings
            .retain(|w| !matches!(w, WarningRecord::LowCoverage { .. } | WarningRecord::NoCoherence { .. }));
        m.warnings.extend(eval.warnings.iter().cloned());
        for f in [crate::export::HEATMAP_CSV, crate::export::HEATMAP_META] {
            if !m.outputs.iter().any(|o| o == f) {
                m.outputs.push(f.into());
            }
        }
        write(&manifest_path, m.to_json().as_bytes())?;
    }
    Ok(eval)
}
