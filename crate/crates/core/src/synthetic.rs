//! Planted-structure corpora and matrices with known ground truth, used by
//! the recovery experiments in the test suites.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::corpus::{build_tfidf, build_vocabulary, CorpusMatrix};
use crate::error::Result;
use crate::linalg::Matrix;
use crate::seed::Uniform01;
use crate::sparse::CscMatrix;

/// Token lists with the ground-truth group of every document.
#[derive(Debug, Clone)]
pub struct PlantedCorpus {
    pub ids: Vec<String>,
    pub tokens: Vec<Vec<String>>,
    /// Finest ground-truth group of each document.
    pub labels: Vec<usize>,
    /// Coarse group (equal to `labels` for flat corpora).
    pub super_labels: Vec<usize>,
}

impl PlantedCorpus {
    /// TF-IDF matrix keeping every token.
    pub fn matrix(&self) -> Result<CorpusMatrix> {
        let vocab = build_vocabulary(&self.tokens, 1, 1.0)?;
        build_tfidf(&self.ids, &self.tokens, vocab)
    }
}

fn pick(rng: &mut Uniform01, n: usize) -> usize {
    ((rng.sample() * n as f64) as usize).min(n - 1)
}

/// `topics` groups of `docs_per_topic` documents; each document draws
/// `words_per_doc` tokens uniformly from its group's private vocabulary of
/// `vocab_per_topic` words.
pub fn disjoint_topics(
    topics: usize,
    vocab_per_topic: usize,
    docs_per_topic: usize,
    words_per_doc: usize,
    seed: u64,
) -> PlantedCorpus {
    let mut rng = Uniform01::new(seed);
    let mut out = PlantedCorpus {
        ids: Vec::new(),
        tokens: Vec::new(),
        labels: Vec::new(),
        super_labels: Vec::new(),
    };
    for t in 0..topics {
        for _ in 0..docs_per_topic {
            let doc = (0..words_per_doc)
                .map(|_| format!("t{t}w{}", pick(&mut rng, vocab_per_topic)))
                .collect();
            out.ids.push(format!("doc{}", out.ids.len()));
            out.tokens.push(doc);
            out.labels.push(t);
            out.super_labels.push(t);
        }
    }
    out
}

/// Two-level hierarchy: `supers` groups, each with `subs` subgroups of
/// `docs_per_sub` documents. A document mixes `super_words` tokens from its
/// group's shared vocabulary with `sub_words` tokens from its subgroup's own
/// vocabulary; all vocabularies are disjoint.
#[allow(clippy::too_many_arguments)]
pub fn two_level(
    supers: usize,
    subs: usize,
    docs_per_sub: usize,
    super_vocab: usize,
    sub_vocab: usize,
    super_words: usize,
    sub_words: usize,
    seed: u64,
) -> PlantedCorpus {
    let mut rng = Uniform01::new(seed);
    let mut out = PlantedCorpus {
        ids: Vec::new(),
        tokens: Vec::new(),
        labels: Vec::new(),
        super_labels: Vec::new(),
    };
    for a in 0..supers {
        for b in 0..subs {
            for _ in 0..docs_per_sub {
                let mut doc: Vec<String> = (0..super_words)
                    .map(|_| format!("s{a}w{}", pick(&mut rng, super_vocab)))
                    .collect();
                doc.extend((0..sub_words).map(|_| format!("s{a}b{b}w{}", pick(&mut rng, sub_vocab))));
                out.ids.push(format!("doc{}", out.ids.len()));
                out.tokens.push(doc);
                out.labels.push(a * subs + b);
                out.super_labels.push(a);
            }
        }
    }
    out
}

/// Uniform (0, 1) dense matrix.
pub fn uniform_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = Uniform01::new(seed);
    Matrix::from_fn(rows, cols, |_, _| rng.sample())
}

/// Random nonnegative matrix in sparse storage.
pub fn random_nonnegative(rows: usize, cols: usize, seed: u64) -> CscMatrix {
    CscMatrix::from_dense(&uniform_matrix(rows, cols, seed))
}

/// `X = W* H*` with uniform planted factors of inner dimension `k`.
pub fn planted_product(d: usize, n: usize, k: usize, seed: u64) -> (Matrix, Matrix, CscMatrix) {
    let w = uniform_matrix(d, k, seed);
    let h = uniform_matrix(k, n, seed ^ 0xA5A5_A5A5);
    let x = CscMatrix::from_dense(&w.matmul(&h).expect("shapes agree"));
    (w, h, x)
}
