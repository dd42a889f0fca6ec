//! Topic quality: keyword coherence and inter-topic word mover's distance.

pub mod coherence;
pub mod emd;
pub mod heatmap;
pub mod wmd;

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

pub use coherence::{coherence, CoherenceScore};
pub use emd::{emd, TransportProblem, TransportSolution};
pub use heatmap::{heatmap, tree_word_sets, SimilarityHeatmap, DISPLAY_TRANSFORM, WMD_WORDS};
pub use wmd::{wmd, wmd_weighted, EmbeddingTable, MassWeighting, TopicWordSet};

use crate::corpus::CorpusMatrix;
use crate::hnmf::{TopicNode, TopicTree};

/// Which documents the co-occurrence counts range over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoherenceScope {
    /// Only the documents assigned to the topic.
    #[default]
    Topic,
    /// Every document of the corpus.
    Corpus,
}

/// Default number of keywords scored per topic.
pub const COHERENCE_WORDS: usize = 10;

/// Fills `coherence` on every node from its top `p` keywords. Nodes with
/// fewer than two scoreable words keep `None`.
pub fn score_tree(tree: &mut TopicTree, corpus: &CorpusMatrix, p: usize, scope: CoherenceScope) {
    let all_docs: Vec<BTreeSet<usize>> = (0..corpus.n_docs()).map(|j| corpus.doc_terms(j)).collect();
    fn visit(node: &mut TopicNode, corpus: &CorpusMatrix, all: &[BTreeSet<usize>], p: usize, scope: CoherenceScope) {
        let vocab = corpus.vocabulary();
        let words: Vec<usize> = node
            .keywords
            .iter()
            .take(p)
            .filter_map(|(t, _)| vocab.index_of(t))
            .collect();
        let docs: Vec<BTreeSet<usize>> = match scope {
            CoherenceScope::Topic => node.docs.iter().map(|&j| all[j].clone()).collect(),
            CoherenceScope::Corpus => all.to_vec(),
        };
        node.coherence = coherence(&docs, &words).ok().map(|c| c.score);
        for c in node.children.iter_mut() {
            visit(c, corpus, all, p, scope);
        }
    }
    for c in tree.children.iter_mut() {
        visit(c, corpus, &all_docs, p, scope);
    }
}
