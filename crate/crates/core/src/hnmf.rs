//! Hierarchical NMF: the topic tree.
//!
//! The corpus is factorized once to obtain the first layer of topics. Every
//! document whose normalized coding weight for a topic exceeds `alpha` joins
//! that topic (a document may join several). Any topic holding more than
//! `max_leaf_size` documents is split by factorizing its own column
//! sub-matrix, with the topic count chosen by [`select_k`]. Documents that no
//! topic claims wait in an extras pool and are attached to the leaf whose
//! dictionary vector is most cosine-similar. Leaves that grow past the size
//! limit through reassignment are split again, until every leaf fits or has
//! reached `max_depth`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::corpus::CorpusMatrix;
use crate::error::{Error, Result};
use crate::modelsel::{select_k, suggest_range, KRange, LssDistribution, NmfParams, DEFAULT_DROP_RATIO};
use crate::nmf::{nmf, normalize, topic_words, Factorization};
use crate::seed::derive_seed;
use crate::sparse::CscMatrix;
use crate::spectrum::variance_increments;

/// How the candidate topic range is chosen at each split.
#[derive(Debug, Clone, PartialEq)]
pub enum RangePolicy {
    /// Plateau heuristic on the variance increments of each sub-corpus.
    Auto,
    /// Explicit range per layer; the last entry applies to deeper layers.
    Fixed(Vec<KRange>),
}

impl RangePolicy {
    fn range_for(&self, layer: usize, increments: &[f64], drop_ratio: f64) -> KRange {
        match self {
            RangePolicy::Auto => suggest_range(increments, drop_ratio),
            RangePolicy::Fixed(ranges) => {
                let i = (layer.max(1) - 1).min(ranges.len().saturating_sub(1));
                ranges[i]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HnmfConfig {
    /// Membership threshold on a document's normalized coding weights.
    pub alpha: f64,
    /// Largest number of documents a leaf may hold without being split.
    pub max_leaf_size: usize,
    /// Seed pairs compared during topic-count selection.
    pub q: usize,
    /// Deepest layer that may be created.
    pub max_depth: usize,
    pub range: RangePolicy,
    pub seed_master: u64,
    pub nmf: NmfParams,
    /// Number of variance increments computed at each split.
    pub variance_k_max: usize,
    pub drop_ratio: f64,
    /// Keywords kept on each node.
    pub keywords: usize,
}

impl Default for HnmfConfig {
    fn default() -> Self {
        HnmfConfig {
            alpha: 0.05,
            max_leaf_size: 1400,
            q: 30,
            max_depth: 5,
            range: RangePolicy::Auto,
            seed_master: 0,
            nmf: NmfParams::default(),
            variance_k_max: 30,
            drop_ratio: DEFAULT_DROP_RATIO,
            keywords: 10,
        }
    }
}

impl HnmfConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig("alpha must lie in (0, 1)".into()));
        }
        if self.max_leaf_size == 0 {
            return Err(Error::InvalidConfig("max leaf size must be at least 1".into()));
        }
        if self.max_depth == 0 {
            return Err(Error::InvalidConfig("max depth must be at least 1".into()));
        }
        if self.q == 0 {
            return Err(Error::InvalidConfig("q must be at least 1".into()));
        }
        if self.keywords == 0 || self.variance_k_max == 0 {
            return Err(Error::InvalidConfig("keyword and variance counts must be positive".into()));
        }
        if let RangePolicy::Fixed(r) = &self.range {
            if r.is_empty() {
                return Err(Error::InvalidConfig("fixed range policy needs at least one range".into()));
            }
        }
        Ok(())
    }
}

/// Why a leaf holds more than `max_leaf_size` documents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeafFlag {
    MaxDepth,
    /// Fewer documents than the smallest candidate topic count.
    TooSmall,
}

/// Record of one split: the spectrum, the candidate range and the selection.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitRecord {
    pub increments: Vec<f64>,
    pub range: KRange,
    pub k_star: usize,
    pub lss: LssDistribution,
    pub seed: u64,
    /// Seed of the factorization the children were cut from.
    pub factor_seed: u64,
    /// Global column indices that were factorized.
    pub input_docs: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicNode {
    /// Dash-separated 1-based position, e.g. `"7-1"`.
    pub path: String,
    pub depth: usize,
    /// Unit-norm column of the parent's dictionary matrix.
    pub dictionary: Vec<f64>,
    pub keywords: Vec<(String, f64)>,
    /// Final membership (column indices of the corpus matrix).
    pub docs: BTreeSet<usize>,
    /// Membership given by thresholding when the node was created.
    pub assigned: BTreeSet<usize>,
    pub children: Vec<TopicNode>,
    pub split: Option<SplitRecord>,
    pub flag: Option<LeafFlag>,
    pub coherence: Option<f64>,
}

impl TopicNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn k_star(&self) -> Option<usize> {
        self.split.as_ref().map(|s| s.k_star)
    }

    fn collect<'a>(&'a self, out: &mut Vec<&'a TopicNode>) {
        out.push(self);
        for c in &self.children {
            c.collect(out);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reassignment {
    pub doc: usize,
    pub leaf: String,
    pub similarity: f64,
    pub round: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeWarning {
    /// A document's coding column was all zero in the split of `node`
    /// (empty string for the root).
    ZeroCoding { node: String, doc: usize },
    /// A pooled document had zero similarity to every leaf.
    ZeroSimilarity { doc: usize, leaf: String },
    /// A leaf kept more than `max_leaf_size` documents.
    OversizedLeaf { path: String, flag: LeafFlag, size: usize },
    /// A run produced a zero dictionary column and was retried.
    DegenerateRun { node: String, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicTree {
    pub config: HnmfConfig,
    pub n_docs: usize,
    /// Selection over the whole corpus.
    pub root: SplitRecord,
    pub children: Vec<TopicNode>,
    pub audit: Vec<Reassignment>,
    pub warnings: Vec<TreeWarning>,
}

impl TopicTree {
    /// All nodes, layer by layer, each layer in tree order.
    pub fn nodes_by_layer(&self) -> Vec<&TopicNode> {
        let mut all = Vec::new();
        for c in &self.children {
            c.collect(&mut all);
        }
        // Stable sort keeps pre-order within a layer, which is tree order.
        all.sort_by_key(|n| n.depth);
        all
    }

    pub fn leaves(&self) -> Vec<&TopicNode> {
        let mut all = Vec::new();
        for c in &self.children {
            c.collect(&mut all);
        }
        all.retain(|n| n.is_leaf());
        all
    }

    pub fn find(&self, path: &str) -> Option<&TopicNode> {
        let mut all = Vec::new();
        for c in &self.children {
            c.collect(&mut all);
        }
        all.into_iter().find(|n| n.path == path)
    }

    pub fn depth(&self) -> usize {
        self.nodes_by_layer().last().map_or(0, |n| n.depth)
    }

    /// `k*` chosen at each split, keyed by the layer of the children created.
    pub fn layer_k(&self) -> BTreeMap<usize, Vec<(String, usize)>> {
        let mut out: BTreeMap<usize, Vec<(String, usize)>> = BTreeMap::new();
        out.entry(1).or_default().push((String::new(), self.root.k_star));
        for n in self.nodes_by_layer() {
            if let Some(k) = n.k_star() {
                out.entry(n.depth + 1).or_default().push((n.path.clone(), k));
            }
        }
        out
    }
}

/// Threshold memberships of one factorization.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Assignment {
    /// Local column indices per topic.
    pub topics: Vec<Vec<usize>>,
    /// Columns that joined no topic.
    pub extras: Vec<usize>,
    /// Columns whose coding weights were all zero (also in `extras`).
    pub zero_coding: Vec<usize>,
}

/// Assigns each column to every topic whose share of the column's coding
/// weight exceeds `alpha`. `f` must have unit-norm dictionary columns.
pub fn assign_documents(f: &Factorization, alpha: f64) -> Assignment {
    let (k, n) = f.h.shape();
    let mut out = Assignment {
        topics: alloc::vec![Vec::new(); k],
        ..Assignment::default()
    };
    for j in 0..n {
        let total: f64 = (0..k).map(|t| f.h[(t, j)]).sum();
        if !(total > 0.0) {
            out.extras.push(j);
            out.zero_coding.push(j);
            continue;
        }
        let mut any = false;
        for t in 0..k {
            if f.h[(t, j)] / total > alpha {
                out.topics[t].push(j);
                any = true;
            }
        }
        if !any {
            out.extras.push(j);
        }
    }
    out
}

/// Documents waiting for reassignment.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExtrasPool {
    pub docs: BTreeSet<usize>,
}

/// Attaches each pooled column of `x` to the leaf with the most similar
/// dictionary vector. Leaves are `(path, dictionary)`; ties go to the
/// lexicographically smallest path. The pool is emptied.
pub fn reassign_extras(
    pool: &mut ExtrasPool,
    leaves: &[(String, Vec<f64>)],
    x: &CscMatrix,
    round: usize,
) -> Result<Vec<Reassignment>> {
    if leaves.is_empty() {
        return Err(Error::InvalidConfig("no leaves to reassign documents to".into()));
    }
    let mut order: Vec<usize> = (0..leaves.len()).collect();
    order.sort_by(|&a, &b| leaves[a].0.cmp(&leaves[b].0));
    let leaf_norms: Vec<f64> = leaves.iter().map(|(_, v)| crate::linalg::norm(v)).collect();

    let mut out = Vec::with_capacity(pool.docs.len());
    for &doc in &pool.docs {
        let doc_norm = x.column_norm(doc);
        let mut best: Option<(usize, f64)> = None;
        for &l in &order {
            let den = doc_norm * leaf_norms[l];
            let sim = if den > 0.0 {
                x.column_dot_dense(doc, &leaves[l].1) / den
            } else {
                0.0
            };
            match best {
                Some((_, b)) if sim <= b => {}
                _ => best = Some((l, sim)),
            }
        }
        let (l, sim) = best.expect("at least one leaf");
        out.push(Reassignment {
            doc,
            leaf: leaves[l].0.clone(),
            similarity: sim,
            round,
        });
    }
    pool.docs.clear();
    Ok(out)
}

struct WorkNode {
    path: Vec<usize>,
    depth: usize,
    dictionary: Vec<f64>,
    keywords: Vec<(String, f64)>,
    docs: BTreeSet<usize>,
    assigned: BTreeSet<usize>,
    children: Vec<usize>,
    split: Option<SplitRecord>,
    unsplittable: bool,
}

fn path_string(path: &[usize]) -> String {
    let mut s = String::new();
    for (i, p) in path.iter().enumerate() {
        if i > 0 {
            s.push('-');
        }
        s.push_str(&alloc::format!("{p}"));
    }
    s
}

struct Builder<'a> {
    corpus: &'a CorpusMatrix,
    cfg: &'a HnmfConfig,
    nodes: Vec<WorkNode>,
    warnings: Vec<TreeWarning>,
}

const MAX_RETRIES: u64 = 8;
const MAX_ROUNDS: usize = 64;

impl Builder<'_> {
    /// Splits node `idx`. Returns `false` when the node cannot be split.
    fn split(&mut self, idx: usize) -> Result<bool> {
        let x = self.corpus.matrix();
        let docs: Vec<usize> = self.nodes[idx].docs.iter().copied().collect();
        let layer = self.nodes[idx].depth + 1;
        let path = self.nodes[idx].path.clone();
        let label = path_string(&path);
        let labels: Vec<u64> = path.iter().map(|&p| p as u64).collect();
        let seed = derive_seed(self.cfg.seed_master, &labels);

        if docs.len() < 2 {
            return Ok(false);
        }
        let sub = x.select_columns(&docs);
        let max_k = sub.rows().min(sub.cols());
        let increments = variance_increments(&sub, self.cfg.variance_k_max.min(max_k))?;
        let wanted = self.cfg.range.range_for(layer, &increments, self.cfg.drop_ratio);
        let range = match wanted.clamp_to(max_k) {
            Some(r) => r,
            None => return Ok(false),
        };
        let selection = select_k(&sub, range, self.cfg.q, seed, &self.cfg.nmf)?;
        let k = selection.k_star;

        let mut attempt = 0;
        let (f, factor_seed) = loop {
            let run_seed = derive_seed(seed, &[k as u64, attempt]);
            let raw = nmf(&sub, &self.cfg.nmf.config(k, run_seed))?;
            match normalize(&raw) {
                Ok(f) => break (f, run_seed),
                Err(Error::ZeroColumn(_)) if attempt + 1 < MAX_RETRIES => {
                    self.warnings.push(TreeWarning::DegenerateRun {
                        node: label.clone(),
                        seed: run_seed,
                    });
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        };

        let assignment = assign_documents(&f, self.cfg.alpha);
        for &j in &assignment.zero_coding {
            self.warnings.push(TreeWarning::ZeroCoding {
                node: label.clone(),
                doc: docs[j],
            });
        }
        let vocab = self.corpus.vocabulary();
        for (t, members) in assignment.topics.iter().enumerate() {
            let dictionary = f.w.column(t);
            let keywords = topic_words(&dictionary, vocab, self.cfg.keywords)?;
            let mut child_path = path.clone();
            child_path.push(t + 1);
            let set: BTreeSet<usize> = members.iter().map(|&j| docs[j]).collect();
            let child = WorkNode {
                path: child_path,
                depth: layer,
                dictionary,
                keywords,
                docs: set.clone(),
                assigned: set,
                children: Vec::new(),
                split: None,
                unsplittable: false,
            };
            self.nodes.push(child);
            let child_idx = self.nodes.len() - 1;
            self.nodes[idx].children.push(child_idx);
        }
        self.nodes[idx].split = Some(SplitRecord {
            increments,
            range,
            k_star: k,
            lss: selection.distribution,
            seed,
            factor_seed,
            input_docs: docs,
        });
        Ok(true)
    }

    fn leaf_indices(&self) -> Vec<usize> {
        (1..self.nodes.len())
            .filter(|&i| self.nodes[i].children.is_empty())
            .collect()
    }

    fn splittable(&self) -> Vec<usize> {
        self.leaf_indices()
            .into_iter()
            .filter(|&i| {
                let n = &self.nodes[i];
                n.docs.len() > self.cfg.max_leaf_size && n.depth < self.cfg.max_depth && !n.unsplittable
            })
            .collect()
    }

    fn union_children(&mut self, idx: usize) -> BTreeSet<usize> {
        if self.nodes[idx].children.is_empty() {
            return self.nodes[idx].docs.clone();
        }
        let children = self.nodes[idx].children.clone();
        let mut all = BTreeSet::new();
        for c in children {
            all.extend(self.union_children(c));
        }
        self.nodes[idx].docs = all.clone();
        all
    }

    fn into_node(&self, idx: usize) -> TopicNode {
        let n = &self.nodes[idx];
        let children: Vec<TopicNode> = n.children.iter().map(|&c| self.into_node(c)).collect();
        let flag = if children.is_empty() && n.docs.len() > self.cfg.max_leaf_size {
            Some(if n.unsplittable {
                LeafFlag::TooSmall
            } else {
                LeafFlag::MaxDepth
            })
        } else {
            None
        };
        TopicNode {
            path: path_string(&n.path),
            depth: n.depth,
            dictionary: n.dictionary.clone(),
            keywords: n.keywords.clone(),
            docs: n.docs.clone(),
            assigned: n.assigned.clone(),
            children,
            split: n.split.clone(),
            flag,
            coherence: None,
        }
    }
}

/// Builds the topic tree for the whole corpus.
pub fn build_tree(corpus: &CorpusMatrix, cfg: &HnmfConfig) -> Result<TopicTree> {
    cfg.validate()?;
    let n = corpus.n_docs();
    let mut b = Builder {
        corpus,
        cfg,
        nodes: alloc::vec![WorkNode {
            path: Vec::new(),
            depth: 0,
            dictionary: Vec::new(),
            keywords: Vec::new(),
            docs: (0..n).collect(),
            assigned: (0..n).collect(),
            children: Vec::new(),
            split: None,
            unsplittable: false,
        }],
        warnings: Vec::new(),
    };
    if !b.split(0)? {
        return Err(Error::InvalidConfig(alloc::format!(
            "corpus of {n} documents is too small for the requested topic range"
        )));
    }

    let mut audit = Vec::new();
    let mut round = 0;
    loop {
        loop {
            let todo = b.splittable();
            if todo.is_empty() {
                break;
            }
            for idx in todo {
                if !b.split(idx)? {
                    b.nodes[idx].unsplittable = true;
                }
            }
        }

        let leaves = b.leaf_indices();
        let covered: BTreeSet<usize> = leaves.iter().flat_map(|&i| b.nodes[i].docs.iter().copied()).collect();
        let mut pool = ExtrasPool {
            docs: (0..n).filter(|j| !covered.contains(j)).collect(),
        };
        if pool.docs.is_empty() {
            break;
        }
        if round == MAX_ROUNDS {
            return Err(Error::Numeric("extras reassignment did not settle".into()));
        }
        let targets: Vec<(String, Vec<f64>)> = leaves
            .iter()
            .map(|&i| (path_string(&b.nodes[i].path), b.nodes[i].dictionary.clone()))
            .collect();
        let moves = reassign_extras(&mut pool, &targets, corpus.matrix(), round)?;
        for mv in &moves {
            let i = leaves[targets.iter().position(|(p, _)| *p == mv.leaf).expect("leaf exists")];
            b.nodes[i].docs.insert(mv.doc);
            if mv.similarity <= 0.0 {
                b.warnings.push(TreeWarning::ZeroSimilarity {
                    doc: mv.doc,
                    leaf: mv.leaf.clone(),
                });
            }
        }
        audit.extend(moves);
        round += 1;
    }

    b.union_children(0);
    let root_children: Vec<TopicNode> = b.nodes[0].children.iter().map(|&c| b.into_node(c)).collect();
    let mut tree = TopicTree {
        config: cfg.clone(),
        n_docs: n,
        root: b.nodes[0].split.clone().expect("root was split"),
        children: root_children,
        audit,
        warnings: b.warnings,
    };
    let oversized: Vec<TreeWarning> = tree
        .leaves()
        .into_iter()
        .filter_map(|l| {
            l.flag.map(|flag| TreeWarning::OversizedLeaf {
                path: l.path.clone(),
                flag,
                size: l.docs.len(),
            })
        })
        .collect();
    tree.warnings.extend(oversized);
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use alloc::vec;

    fn fact(h: Vec<Vec<f64>>) -> Factorization {
        let k = h.len();
        Factorization {
            w: Matrix::identity(k),
            h: Matrix::from_rows(&h).unwrap(),
            objective_history: vec![],
            seed: 0,
        }
    }

    #[test]
    fn threshold_assignment_examples() {
        let f = fact(vec![vec![0.5, 1.0, 0.97, 0.0], vec![0.5, 0.0, 0.03, 0.0]]);
        let a = assign_documents(&f, 0.05);
        assert_eq!(a.topics, vec![vec![0, 1, 2], vec![0]]);
        assert_eq!(a.extras, vec![3]);
        assert_eq!(a.zero_coding, vec![3]);
    }

    #[test]
    fn threshold_is_scale_free_per_document() {
        let f = fact(vec![vec![50.0, 0.01], vec![1.0, 0.0002]]);
        let a = assign_documents(&f, 0.05);
        assert_eq!(a.topics, vec![vec![0, 1], vec![]]);
        assert!(a.extras.is_empty());
    }

    #[test]
    fn reassignment_picks_most_similar_leaf() {
        let x = CscMatrix::from_columns(
            3,
            vec![
                vec![(0, 1.0)],
                vec![(1, 0.6), (2, 0.8)],
                vec![(2, 1.0)],
            ],
        )
        .unwrap();
        let leaves = vec![
            (String::from("2"), vec![0.0, 0.6, 0.8]),
            (String::from("1"), vec![1.0, 0.0, 0.0]),
        ];
        let mut pool = ExtrasPool {
            docs: [0, 1, 2].into_iter().collect(),
        };
        let moves = reassign_extras(&mut pool, &leaves, &x, 0).unwrap();
        assert!(pool.docs.is_empty());
        assert_eq!(moves[0].leaf, "1");
        assert_eq!(moves[1].leaf, "2");
        assert!((moves[1].similarity - 1.0).abs() < 1e-12);
        assert_eq!(moves[2].leaf, "2");
    }

    #[test]
    fn reassignment_ties_go_to_smallest_path() {
        let x = CscMatrix::from_columns(3, vec![vec![(2, 1.0)]]).unwrap();
        let leaves = vec![
            (String::from("3-1"), vec![1.0, 0.0, 0.0]),
            (String::from("1-2"), vec![0.0, 1.0, 0.0]),
        ];
        let mut pool = ExtrasPool {
            docs: [0].into_iter().collect(),
        };
        let moves = reassign_extras(&mut pool, &leaves, &x, 0).unwrap();
        assert_eq!(moves[0].leaf, "1-2");
        assert_eq!(moves[0].similarity, 0.0);
    }

    #[test]
    fn config_validation() {
        let mut c = HnmfConfig::default();
        assert!(c.validate().is_ok());
        c.alpha = 1.0;
        assert!(c.validate().is_err());
        let c = HnmfConfig {
            max_depth: 0,
            ..HnmfConfig::default()
        };
        assert!(c.validate().is_err());
        let c = HnmfConfig {
            range: RangePolicy::Fixed(vec![]),
            ..HnmfConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn fixed_ranges_repeat_last_entry() {
        let p = RangePolicy::Fixed(vec![KRange::new(3, 5).unwrap(), KRange::new(2, 4).unwrap()]);
        assert_eq!(p.range_for(1, &[], 0.9), KRange { k1: 3, k2: 5 });
        assert_eq!(p.range_for(2, &[], 0.9), KRange { k1: 2, k2: 4 });
        assert_eq!(p.range_for(4, &[], 0.9), KRange { k1: 2, k2: 4 });
    }

    #[test]
    fn path_strings() {
        assert_eq!(path_string(&[7, 1]), "7-1");
        assert_eq!(path_string(&[3]), "3");
    }
}
