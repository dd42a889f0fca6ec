//! Vocabulary construction and the TF-IDF term-document matrix.
//!
//! Term frequency is the raw count; inverse document frequency is the smooth
//! form `ln((1 + n) / (1 + df)) + 1`. Each document column is scaled to unit
//! L2 norm, and documents left with no vocabulary terms are excluded.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::sparse::CscMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    index: BTreeMap<String, usize>,
    tokens: Vec<String>,
    df: Vec<usize>,
    n_docs: usize,
}

impl Vocabulary {
    /// Builds a vocabulary from explicit `(token, df)` pairs; indices follow
    /// lexicographic token order.
    pub fn from_counts(counts: impl IntoIterator<Item = (String, usize)>, n_docs: usize) -> Result<Self> {
        let sorted: BTreeMap<String, usize> = counts.into_iter().collect();
        if sorted.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        let mut index = BTreeMap::new();
        let mut tokens = Vec::with_capacity(sorted.len());
        let mut df = Vec::with_capacity(sorted.len());
        for (i, (tok, count)) in sorted.into_iter().enumerate() {
            if count == 0 || count > n_docs {
                return Err(Error::OutOfRange(alloc::format!(
                    "document frequency {count} of {tok:?} outside 1..={n_docs}"
                )));
            }
            index.insert(tok.clone(), i);
            tokens.push(tok);
            df.push(count);
        }
        Ok(Vocabulary {
            index,
            tokens,
            df,
            n_docs,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, i: usize) -> &str {
        &self.tokens[i]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn df(&self, i: usize) -> usize {
        self.df[i]
    }

    /// Smooth inverse document frequency of term `i`.
    pub fn idf(&self, i: usize) -> f64 {
        libm::log((1.0 + self.n_docs as f64) / (1.0 + self.df[i] as f64)) + 1.0
    }
}

/// Counts document frequencies and keeps tokens with
/// `min_df <= df <= max_df_ratio * n`.
pub fn build_vocabulary<S: AsRef<str>>(
    docs: &[Vec<S>],
    min_df: usize,
    max_df_ratio: f64,
) -> Result<Vocabulary> {
    if min_df < 1 {
        return Err(Error::InvalidConfig("min_df must be at least 1".into()));
    }
    if !(max_df_ratio > 0.0 && max_df_ratio <= 1.0) {
        return Err(Error::InvalidConfig("max_df_ratio must lie in (0, 1]".into()));
    }
    let n = docs.len();
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in docs {
        let distinct: BTreeSet<&str> = doc.iter().map(AsRef::as_ref).collect();
        for tok in distinct {
            *df.entry(tok).or_insert(0) += 1;
        }
    }
    let max_df = max_df_ratio * n as f64;
    let kept = df
        .into_iter()
        .filter(|&(_, c)| c >= min_df && c as f64 <= max_df)
        .map(|(t, c)| (String::from(t), c));
    Vocabulary::from_counts(kept, n)
}

/// The TF-IDF matrix with its document-id and vocabulary bindings.
#[derive(Debug, Clone)]
pub struct CorpusMatrix {
    matrix: CscMatrix,
    doc_ids: Vec<String>,
    vocab: Vocabulary,
    excluded: Vec<String>,
}

impl CorpusMatrix {
    /// `d × n` term-document matrix.
    pub fn matrix(&self) -> &CscMatrix {
        &self.matrix
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    /// Document id of each column.
    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    /// Ids of documents dropped because their TF-IDF vector was empty.
    pub fn excluded(&self) -> &[String] {
        &self.excluded
    }

    pub fn n_docs(&self) -> usize {
        self.matrix.cols()
    }

    pub fn n_terms(&self) -> usize {
        self.matrix.rows()
    }

    /// Term indices present in column `j`.
    pub fn doc_terms(&self, j: usize) -> BTreeSet<usize> {
        self.matrix.column(j).0.iter().copied().collect()
    }
}

/// Builds the column-normalized TF-IDF matrix. `ids[j]` names `docs[j]`.
pub fn build_tfidf<S: AsRef<str>>(
    ids: &[String],
    docs: &[Vec<S>],
    vocab: Vocabulary,
) -> Result<CorpusMatrix> {
    if ids.len() != docs.len() {
        return Err(Error::ShapeMismatch {
            expected: (docs.len(), 1),
            found: (ids.len(), 1),
        });
    }
    let idf: Vec<f64> = (0..vocab.len()).map(|i| vocab.idf(i)).collect();
    let mut columns = Vec::with_capacity(docs.len());
    let mut doc_ids = Vec::with_capacity(docs.len());
    let mut excluded = Vec::new();
    for (id, doc) in ids.iter().zip(docs) {
        let mut counts: BTreeMap<usize, u32> = BTreeMap::new();
        for tok in doc {
            if let Some(i) = vocab.index_of(tok.as_ref()) {
                *counts.entry(i).or_insert(0) += 1;
            }
        }
        if counts.is_empty() {
            excluded.push(id.clone());
            continue;
        }
        let mut col: Vec<(usize, f64)> = counts
            .into_iter()
            .map(|(i, c)| (i, f64::from(c) * idf[i]))
            .collect();
        let norm = libm::sqrt(col.iter().map(|(_, v)| v * v).sum::<f64>());
        for (_, v) in col.iter_mut() {
            *v /= norm;
        }
        columns.push(col);
        doc_ids.push(id.clone());
    }
    if columns.is_empty() {
        return Err(Error::AllDocumentsExcluded);
    }
    let matrix = CscMatrix::from_columns(vocab.len(), columns)?;
    Ok(CorpusMatrix {
        matrix,
        doc_ids,
        vocab,
        excluded,
    })
}
