mod common;

use std::path::Path;

use common::{data, write_lines};
use topictree::error::exit;
use topictree::ingest::{ingest_reader, IngestFilter};
use topictree::{ingest, Error};

fn record(id: &str, abs: &str, body: &str, lang: &str) -> String {
    serde_json::json!({"id": id, "title": "t", "abstract": abs, "body": body, "source": "s", "language": lang})
        .to_string()
}

fn read(text: &str) -> topictree::Result<topictree::ingest::Ingested> {
    ingest_reader(text.as_bytes(), Path::new("corpus.jsonl"), &IngestFilter::default())
}

#[test]
fn incomplete_records_are_filtered() {
    let text = [
        record("a", "abs", "body", "en"),
        record("b", "abs", "", "en"),
        record("c", "abs", "body", "en"),
    ]
    .join("\n");
    let got = read(&text).unwrap();
    let ids: Vec<&str> = got.documents.iter().map(|d| d.id.as_str()).collect();
    assert_eq!(ids, ["a", "c"]);
    assert_eq!(got.stats.incomplete, 1);
}

#[test]
fn missing_fields_count_as_empty() {
    let got = read(r#"{"id": "x", "abstract": "only abstract", "language": "en"}"#).unwrap();
    assert!(got.documents.is_empty());
    assert_eq!(got.stats.incomplete, 1);
}

#[test]
fn empty_file_gives_no_documents() {
    let got = read("").unwrap();
    assert!(got.documents.is_empty());
    assert_eq!(got.stats.records, 0);
    assert!(read("\n  \n").unwrap().documents.is_empty());
}

#[test]
fn language_filter() {
    let text = [record("a", "x", "y", "fr"), record("b", "x", "y", "EN")].join("\n");
    let got = read(&text).unwrap();
    assert_eq!(got.documents.len(), 1);
    assert_eq!(got.documents[0].id, "b");
    assert_eq!(got.stats.wrong_language, 1);
    let all = ingest_reader(text.as_bytes(), Path::new("c"), &IngestFilter { language: None }).unwrap();
    assert_eq!(all.documents.len(), 2);
}

#[test]
fn order_is_preserved() {
    let text: Vec<String> = (0..20).rev().map(|i| record(&format!("d{i}"), "a", "b", "en")).collect();
    let got = read(&text.join("\n")).unwrap();
    let ids: Vec<String> = got.documents.iter().map(|d| d.id.clone()).collect();
    let expected: Vec<String> = (0..20).rev().map(|i| format!("d{i}")).collect();
    assert_eq!(ids, expected);
}

#[test]
fn errors_carry_line_numbers() {
    let dup = [record("a", "x", "y", "en"), String::new(), record("a", "x", "y", "fr")].join("\n");
    match read(&dup).unwrap_err() {
        Error::DuplicateId { line, id, .. } => assert_eq!((line, id.as_str()), (3, "a")),
        e => panic!("{e}"),
    }
    let bad = [record("a", "x", "y", "en"), "{not json".into()].join("\n");
    let e = read(&bad).unwrap_err();
    assert!(matches!(e, Error::Malformed { line: 2, .. }), "{e}");
    assert!(e.to_string().starts_with("corpus.jsonl:2:"));
    let empty_id = read(&record("  ", "x", "y", "en")).unwrap_err();
    assert!(matches!(empty_id, Error::Malformed { line: 1, .. }));
    assert_eq!(empty_id.exit_code(), exit::INPUT);
}

#[test]
fn unreadable_file_names_the_path() {
    let e = ingest(Path::new("/nonexistent/corpus.jsonl"), &IngestFilter::default()).unwrap_err();
    assert!(e.to_string().contains("/nonexistent/corpus.jsonl"));
    assert_eq!(e.exit_code(), exit::INPUT);
}

#[test]
fn reads_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.jsonl");
    write_lines(&p, &[record("a", "x", "y", "en"), record("b", "x", "", "en")]);
    assert_eq!(ingest(&p, &IngestFilter::default()).unwrap().documents.len(), 1);
}

#[test]
fn bundled_corpus_filters() {
    let got = ingest(&data("mini_corpus.jsonl"), &IngestFilter::default()).unwrap();
    assert_eq!(got.stats.records, 518);
    assert_eq!(got.stats.wrong_language, 6);
    assert_eq!(got.stats.incomplete, 8);
    assert_eq!(got.documents.len(), 504);
    assert!(got.documents.iter().all(|d| d.is_complete()));
}
