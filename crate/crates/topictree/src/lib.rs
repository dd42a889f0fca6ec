//! Files, text processing and the command line around `topictree-core`.
//!
//! Reading a corpus ([`ingest`]), turning articles into tokens
//! ([`tokenize`]), loading word vectors ([`embeddings`]), running the
//! pipeline ([`pipeline`]), writing results ([`export`], [`manifest`]) and
//! serving them read-only ([`api`]).

pub mod api;
pub mod cli;
pub mod config;
pub mod embeddings;
pub mod error;
pub mod export;
pub mod ingest;
pub mod manifest;
pub mod pipeline;
pub mod tokenize;

pub use config::BuildConfig;
pub use error::{Error, Result};
pub use export::TreeExport;
pub use ingest::{ingest, Document, IngestFilter};
pub use manifest::RunManifest;
pub use tokenize::{TokenPipelineConfig, Tokenizer};
