mod common;

use std::collections::BTreeSet;

use common::build_small;
use topictree::error::exit;
use topictree::export::{
    lss_csv, read_factors, read_heatmap, variance_csv, write_factors, write_heatmap, TreeExport, SCHEMA_VERSION,
};
use topictree::Error;
use topictree_core::eval::SimilarityHeatmap;
use topictree_core::{LssDistribution, Matrix, TopicNode};

#[test]
fn round_trip_preserves_memberships_and_keywords() {
    let dir = tempfile::tempdir().unwrap();
    let (_, run) = build_small(dir.path());
    let parsed = TreeExport::from_json(&run.export.to_json()).unwrap();
    assert_eq!(parsed, run.export);
    assert_eq!(parsed.to_json(), run.export.to_json());

    let ids = run.corpus.matrix.doc_ids();
    let tree_nodes: Vec<&TopicNode> = run.tree.nodes_by_layer();
    let export_nodes = parsed.nodes_by_layer();
    assert_eq!(tree_nodes.len(), export_nodes.len());
    assert!(run.tree.depth() == 2, "fixture should have two layers");
    for (t, e) in tree_nodes.iter().zip(&export_nodes) {
        assert_eq!(t.path, e.path);
        let members: BTreeSet<&str> = t.docs.iter().map(|&j| ids[j].as_str()).collect();
        let exported: BTreeSet<&str> = e.articles.iter().map(|a| a.id.as_str()).collect();
        assert_eq!(members, exported, "node {}", t.path);
        assert_eq!(e.doc_count, t.docs.len());
        let words: Vec<(String, f64)> = e.keywords_top10.iter().map(|k| (k.word.clone(), k.weight)).collect();
        assert_eq!(words, t.keywords.iter().take(10).cloned().collect::<Vec<_>>());
        assert_eq!(e.k_star, t.k_star());
    }
    assert_eq!(parsed.root.k_star, run.tree.root.k_star);
    assert_eq!(parsed.corpus.n_docs, 120);
}

#[test]
fn schema_problems_are_schema_errors() {
    let dir = tempfile::tempdir().unwrap();
    let (_, run) = build_small(dir.path());
    let good: serde_json::Value = serde_json::from_str(&run.export.to_json()).unwrap();

    let mut v = good.clone();
    v["schema_version"] = (SCHEMA_VERSION + 1).into();
    let e = TreeExport::from_json(&v.to_string()).unwrap_err();
    assert!(matches!(e, Error::Schema(_)));
    assert!(e.to_string().contains("schema version"));
    assert_eq!(e.exit_code(), exit::SCHEMA);

    let mut v = good.clone();
    v.as_object_mut().unwrap().remove("schema_version");
    assert!(matches!(TreeExport::from_json(&v.to_string()), Err(Error::Schema(_))));

    let mut v = good.clone();
    v["topics"][0]["extra"] = 1.into();
    assert!(matches!(TreeExport::from_json(&v.to_string()), Err(Error::Schema(_))));

    let mut v = good.clone();
    v["topics"][0]["doc_count"] = 9999.into();
    assert!(matches!(TreeExport::from_json(&v.to_string()), Err(Error::Schema(_))));

    let mut v = good.clone();
    v["topics"][0]["path"] = "2".into();
    assert!(matches!(TreeExport::from_json(&v.to_string()), Err(Error::Schema(_))));

    let mut v = good;
    v["topics"][0]["keywords_top10"].as_array_mut().unwrap().reverse();
    assert!(matches!(TreeExport::from_json(&v.to_string()), Err(Error::Schema(_))));

    assert!(matches!(TreeExport::from_json("{"), Err(Error::Schema(_))));
}

#[test]
fn csv_series_formats() {
    assert_eq!(
        String::from_utf8(variance_csv(&[0.5, 0.25])).unwrap(),
        "k,increment\n1,0.5\n2,0.25\n"
    );
    let dist = LssDistribution {
        scores: [(2, vec![1.0, 0.75]), (3, vec![0.5])].into_iter().collect(),
    };
    assert_eq!(String::from_utf8(lss_csv(&dist)).unwrap(), "k,score\n2,1\n2,0.75\n3,0.5\n");
}

#[test]
fn split_series_written_per_split() {
    let dir = tempfile::tempdir().unwrap();
    let (_, mut run) = build_small(dir.path());
    let out = dir.path().join("out");
    let files = topictree::pipeline::write_build(&mut run, &out, false).unwrap();
    for f in &files {
        assert!(out.join(f).is_file(), "{f}");
    }
    let split_nodes: Vec<String> = run
        .tree
        .nodes_by_layer()
        .into_iter()
        .filter(|n| n.split.is_some())
        .map(|n| n.path.clone())
        .collect();
    assert!(!split_nodes.is_empty());
    for p in split_nodes.iter().map(String::as_str).chain(["root"]) {
        let lss = std::fs::read_to_string(out.join("splits").join(p).join("lss.csv")).unwrap();
        assert!(lss.starts_with("k,score\n"));
        let var = std::fs::read_to_string(out.join("splits").join(p).join("variance.csv")).unwrap();
        assert!(var.starts_with("k,increment\n1,"));
    }
    let q = run.export.config.q;
    let rows = std::fs::read_to_string(out.join("lss.csv")).unwrap().lines().count() - 1;
    assert_eq!(rows, q * run.tree.root.range.len());
}

#[test]
fn heatmap_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let h = SimilarityHeatmap {
        paths: vec!["1".into(), "2".into(), "1-1".into()],
        distances: Matrix::from_vec(3, 3, vec![0.0, 0.1 + 0.2, 1.5, 0.1 + 0.2, 0.0, 2.0 / 3.0, 1.5, 2.0 / 3.0, 0.0])
            .unwrap(),
        d_min: 0.0,
        d_max: 1.5,
        coverage: vec![1.0, 0.875, 1.0 / 3.0],
    };
    write_heatmap(dir.path(), &h).unwrap();
    assert_eq!(read_heatmap(dir.path()).unwrap(), h);
    let csv = std::fs::read_to_string(dir.path().join("heatmap.csv")).unwrap();
    assert!(csv.starts_with("path,1,2,1-1\n1,0,"));
}

#[test]
fn factors_round_trip() {
    let w = Matrix::from_vec(3, 2, vec![0.0, 1.0, 2.5, f64::MIN_POSITIVE, 1e300, 0.1]).unwrap();
    let h = Matrix::from_vec(2, 1, vec![7.0, 1.0 / 3.0]).unwrap();
    let mut bytes = Vec::new();
    write_factors(&mut bytes, &w, &h).unwrap();
    assert_eq!(bytes.len(), 16 + 6 * 8 + 16 + 2 * 8);
    assert_eq!(&bytes[..8], &3u64.to_le_bytes());
    let (w2, h2) = read_factors(&mut bytes.as_slice()).unwrap();
    assert_eq!((w2, h2), (w, h));
    assert!(read_factors(&mut &bytes[..bytes.len() - 1]).is_err());
}

#[test]
fn dumped_factors_reproduce_the_root_split() {
    let dir = tempfile::tempdir().unwrap();
    let (_, mut run) = build_small(dir.path());
    let out = dir.path().join("out");
    topictree::pipeline::write_build(&mut run, &out, true).unwrap();
    let bytes = std::fs::read(out.join("factors.bin")).unwrap();
    let (w, h) = read_factors(&mut bytes.as_slice()).unwrap();
    let k = run.tree.root.k_star;
    assert_eq!(w.shape(), (run.corpus.matrix.n_terms(), k));
    assert_eq!(h.shape(), (k, run.corpus.matrix.n_docs()));
    for (i, node) in run.tree.children.iter().enumerate() {
        assert_eq!(w.column(i), node.dictionary, "topic {}", node.path);
    }
}
