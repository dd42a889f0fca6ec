//! Line-delimited article records.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One article. Text fields absent from a record read as empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    #[serde(default)]
    pub title: String,
    #[serde(default, rename = "abstract")]
    pub abstract_text: String,
    #[serde(default)]
    pub body: String,
    #[serde(default)]
    pub source: String,
    #[serde(default)]
    pub language: String,
}

impl Document {
    pub fn is_complete(&self) -> bool {
        !self.abstract_text.trim().is_empty() && !self.body.trim().is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestFilter {
    /// Required language tag, compared case-insensitively. `None` keeps all.
    pub language: Option<String>,
}

impl Default for IngestFilter {
    fn default() -> Self {
        IngestFilter {
            language: Some("en".into()),
        }
    }
}

impl IngestFilter {
    fn accepts_language(&self, doc: &Document) -> bool {
        self.language
            .as_deref()
            .is_none_or(|l| doc.language.trim().eq_ignore_ascii_case(l))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub records: usize,
    pub kept: usize,
    pub wrong_language: usize,
    pub incomplete: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub documents: Vec<Document>,
    pub stats: IngestStats,
}

/// Reads records from `path`, keeping those that pass `filter` and have both
/// an abstract and a body. Ids must be unique across all records.
pub fn ingest(path: &Path, filter: &IngestFilter) -> Result<Ingested> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    ingest_reader(BufReader::new(file), path, filter)
}

pub fn ingest_reader<R: BufRead>(reader: R, path: &Path, filter: &IngestFilter) -> Result<Ingested> {
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut out = Ingested {
        documents: Vec::new(),
        stats: IngestStats::default(),
    };
    for (i, line) in reader.lines().enumerate() {
        let n = i + 1;
        let malformed = |message: String| Error::Malformed {
            path: path.to_path_buf(),
            line: n,
            message,
        };
        let line = line.map_err(|e| malformed(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document = serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
        if doc.id.trim().is_empty() {
            return Err(malformed("empty id".into()));
        }
        if seen.insert(doc.id.clone(), n).is_some() {
            return Err(Error::DuplicateId {
                path: path.to_path_buf(),
                line: n,
                id: doc.id,
            });
        }
        out.stats.records += 1;
        if !filter.accepts_language(&doc) {
            out.stats.wrong_language += 1;
        } else if !doc.is_complete() {
            out.stats.incomplete += 1;
        } else {
            out.documents.push(doc);
        }
    }
    out.stats.kept = out.documents.len();
    Ok(out)
}
