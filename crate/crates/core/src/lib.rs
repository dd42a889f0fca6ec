//! Hierarchical topic modeling with nonnegative matrix factorization.
//!
//! The crate is `no_std` with `alloc`. It covers the numerical side of the
//! pipeline: the TF-IDF term-document matrix ([`corpus`]), seeded
//! multiplicative-update NMF ([`nmf`]), consistent topic-count selection
//! ([`modelsel`], [`spectrum`]), the topic tree ([`hnmf`]) and its evaluation
//! ([`eval`]). File formats, tokenization and the command line live in the
//! `topictree` crate.
//!
//! The `parallel` feature (implies `std`) runs the seeded factorization grid
//! and pairwise distances on rayon. Results do not depend on it.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod corpus;
pub mod error;
pub mod eval;
pub mod hnmf;
pub mod linalg;
pub mod modelsel;
pub mod nmf;
pub mod seed;
pub mod sparse;
pub mod spectrum;
pub mod synthetic;

pub use corpus::{build_tfidf, build_vocabulary, CorpusMatrix, Vocabulary};
pub use error::{Error, Result};
pub use hnmf::{build_tree, HnmfConfig, RangePolicy, TopicNode, TopicTree};
pub use linalg::Matrix;
pub use modelsel::{select_k, KRange, LssDistribution, NmfParams};
pub use nmf::{nmf, normalize, objective, top_words, topic_words, Factorization, NmfConfig};
pub use sparse::CscMatrix;
pub use spectrum::variance_increments;
