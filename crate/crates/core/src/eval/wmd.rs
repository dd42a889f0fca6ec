use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::eval::emd::{emd, TransportProblem};
use crate::linalg::Matrix;

/// Token to dense vector lookup.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: BTreeMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        EmbeddingTable {
            dim,
            vectors: BTreeMap::new(),
        }
    }

    /// Adds a vector; rejects wrong dimensions and repeated tokens.
    pub fn insert(&mut self, token: String, vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: vector.len(),
            });
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(alloc::format!("non-finite embedding for {token:?}")));
        }
        if self.vectors.contains_key(&token) {
            return Err(Error::DuplicateToken(token));
        }
        self.vectors.insert(token, vector);
        Ok(())
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.vectors.get(token).map(Vec::as_slice)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// A topic's top words with their dictionary weights, descending.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicWordSet {
    pub path: String,
    pub words: Vec<(String, f64)>,
}

impl TopicWordSet {
    pub fn new(path: impl Into<String>, words: Vec<(String, f64)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (w, weight) in &words {
            if !seen.insert(w.as_str()) {
                return Err(Error::DuplicateToken(w.clone()));
            }
            if !(*weight >= 0.0) {
                return Err(Error::OutOfRange(alloc::format!("negative weight for {w:?}")));
            }
        }
        if words.windows(2).any(|p| p[0].1 < p[1].1) {
            return Err(Error::OutOfRange("topic words must be in descending weight order".into()));
        }
        Ok(TopicWordSet {
            path: path.into(),
            words,
        })
    }

    /// Equal-weight word set (every weight 1).
    pub fn uniform(path: impl Into<String>, words: impl IntoIterator<Item = String>) -> Result<Self> {
        TopicWordSet::new(path, words.into_iter().map(|w| (w, 1.0)).collect())
    }

    /// Fraction of the words that have an embedding.
    pub fn coverage(&self, emb: &EmbeddingTable) -> f64 {
        if self.words.is_empty() {
            return 0.0;
        }
        let hit = self.words.iter().filter(|(w, _)| emb.get(w).is_some()).count();
        hit as f64 / self.words.len() as f64
    }
}

/// How word mass is distributed over a topic's retained words.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MassWeighting {
    #[default]
    Uniform,
    /// Proportional to the dictionary weights.
    Dictionary,
}

fn masses<'a>(
    set: &'a TopicWordSet,
    emb: &'a EmbeddingTable,
    weighting: MassWeighting,
) -> Result<(Vec<&'a [f64]>, Vec<f64>)> {
    let mut vecs = Vec::new();
    let mut raw = Vec::new();
    for (w, weight) in &set.words {
        if let Some(v) = emb.get(w) {
            vecs.push(v);
            raw.push(match weighting {
                MassWeighting::Uniform => 1.0,
                MassWeighting::Dictionary => *weight,
            });
        }
    }
    let total: f64 = raw.iter().sum();
    if vecs.is_empty() || !(total > 0.0) {
        return Err(Error::NoEmbeddedTokens(set.path.clone()));
    }
    Ok((vecs, raw.into_iter().map(|r| r / total).collect()))
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// Word mover's distance between two topics. Words without embeddings are
/// dropped and the remaining mass renormalized; ground cost is Euclidean.
pub fn wmd(a: &TopicWordSet, b: &TopicWordSet, emb: &EmbeddingTable) -> Result<f64> {
    wmd_weighted(a, b, emb, MassWeighting::Uniform)
}

pub fn wmd_weighted(
    a: &TopicWordSet,
    b: &TopicWordSet,
    emb: &EmbeddingTable,
    weighting: MassWeighting,
) -> Result<f64> {
    let (va, wa) = masses(a, emb, weighting)?;
    let (vb, wb) = masses(b, emb, weighting)?;
    let cost = Matrix::from_fn(va.len(), vb.len(), |i, j| euclidean(va[i], vb[j]));
    // Re-balance so both sides carry identical totals.
    let sb: f64 = wb.iter().sum();
    let sa: f64 = wa.iter().sum();
    let wb: Vec<f64> = wb.into_iter().map(|w| w * sa / sb).collect();
    let problem = TransportProblem::new(wa, wb, cost)?;
    Ok(emd(&problem)?.cost)
}
