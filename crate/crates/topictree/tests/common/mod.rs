#![allow(dead_code)]

use std::io::Write;
use std::path::{Path, PathBuf};

use topictree::config::{BuildConfig, NormalizerKind};
use topictree_core::synthetic::PlantedCorpus;

pub fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub fn write_lines(path: &Path, lines: &[String]) {
    let mut f = std::fs::File::create(path).unwrap();
    for l in lines {
        writeln!(f, "{l}").unwrap();
    }
}

/// Writes a planted corpus as records whose abstract and body split each
/// document's tokens.
pub fn write_planted(path: &Path, planted: &PlantedCorpus) {
    let lines: Vec<String> = planted
        .ids
        .iter()
        .zip(&planted.tokens)
        .map(|(id, toks)| {
            let half = toks.len() / 2;
            serde_json::json!({
                "id": id,
                "title": format!("Document {id}"),
                "abstract": toks[..half].join(" "),
                "body": toks[half..].join(" "),
                "source": "synthetic",
                "language": "en",
            })
            .to_string()
        })
        .collect();
    write_lines(path, &lines);
}

/// Configuration that keeps planted tokens as they are.
pub fn planted_config() -> BuildConfig {
    let mut c = BuildConfig::default();
    c.min_df = 1;
    c.max_df_ratio = 1.0;
    c.tokens.normalizer = NormalizerKind::Identity;
    c.tokens.include_title = false;
    c
}

/// Quick configuration for the bundled mini-corpus.
pub fn mini_config() -> BuildConfig {
    let mut c = BuildConfig::default();
    c.m = 80;
    c.q = 6;
    c.seed = 7;
    c.ranges = vec!["3:5".into()];
    c
}

/// Three disjoint topics of 40 documents, small enough that the first
/// layer's nodes are split again.
pub fn small_planted() -> PlantedCorpus {
    topictree_core::synthetic::disjoint_topics(3, 30, 40, 30, 17)
}

pub fn small_config() -> BuildConfig {
    let mut c = planted_config();
    c.m = 30;
    c.q = 4;
    c.seed = 3;
    c.max_depth = 2;
    c.ranges = vec!["2:4".into(), "2:3".into()];
    c
}

/// Writes the small planted corpus to `dir` and builds it.
pub fn build_small(dir: &Path) -> (PathBuf, topictree::pipeline::BuildRun) {
    let corpus = dir.join("corpus.jsonl");
    write_planted(&corpus, &small_planted());
    let run = topictree::pipeline::build(&corpus, &small_config()).unwrap();
    (corpus, run)
}

/// Writes a word-vector file with random 6-d vectors for `words`.
pub fn write_embeddings(path: &Path, words: &std::collections::BTreeSet<String>, seed: u64) {
    let mut rng = topictree_core::seed::Uniform01::new(seed);
    let mut text = format!("{} 6\n", words.len());
    for w in words {
        let v: Vec<String> = (0..6).map(|_| format!("{:?}", rng.sample() * 2.0 - 1.0)).collect();
        text.push_str(&format!("{w} {}\n", v.join(" ")));
    }
    std::fs::write(path, text).unwrap();
}

/// Builds and evaluates the small planted corpus into `dir/out`.
pub fn evaluated_output(dir: &Path) -> PathBuf {
    let (_, mut run) = build_small(dir);
    let out = dir.join("out");
    topictree::pipeline::write_build(&mut run, &out, false).unwrap();
    let words = run
        .export
        .nodes_by_layer()
        .iter()
        .flat_map(|n| n.wmd_words.iter().map(|k| k.word.clone()))
        .collect();
    let emb = dir.join("emb.txt");
    write_embeddings(&emb, &words, 5);
    topictree::pipeline::run_eval(&out, None, &emb, &Default::default()).unwrap();
    out
}
