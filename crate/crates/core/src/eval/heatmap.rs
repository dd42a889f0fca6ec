use alloc::string::String;
use alloc::vec::Vec;

use crate::corpus::Vocabulary;
use crate::error::Result;
use crate::eval::wmd::{wmd_weighted, EmbeddingTable, MassWeighting, TopicWordSet};
use crate::hnmf::TopicTree;
use crate::linalg::Matrix;
use crate::nmf::topic_words;

/// Name of the distance-to-similarity map recorded alongside the matrix.
pub const DISPLAY_TRANSFORM: &str = "affine-minmax";

/// Words per topic used for topic-to-topic distances.
pub const WMD_WORDS: usize = 100;

/// Pairwise topic distances, ordered layer by layer.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityHeatmap {
    pub paths: Vec<String>,
    pub distances: Matrix,
    pub d_min: f64,
    pub d_max: f64,
    /// Fraction of each topic's words that had an embedding.
    pub coverage: Vec<f64>,
}

impl SimilarityHeatmap {
    /// Display similarity `(d_max - d) / (d_max - d_min)`; 1 when all
    /// distances coincide.
    pub fn similarity(&self, i: usize, j: usize) -> f64 {
        let span = self.d_max - self.d_min;
        if span <= 0.0 {
            1.0
        } else {
            (self.d_max - self.distances[(i, j)]) / span
        }
    }
}

/// WMD between every pair of word sets. The matrix is filled from the upper
/// triangle, so it is exactly symmetric with a zero diagonal.
pub fn heatmap(sets: &[TopicWordSet], emb: &EmbeddingTable, weighting: MassWeighting) -> Result<SimilarityHeatmap> {
    let n = sets.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let run = |&(i, j): &(usize, usize)| wmd_weighted(&sets[i], &sets[j], emb, weighting);
    #[cfg(feature = "parallel")]
    let values: Vec<Result<f64>> = {
        use rayon::prelude::*;
        pairs.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let values: Vec<Result<f64>> = pairs.iter().map(run).collect();

    // Single-topic sets still need to be embeddable.
    for s in sets {
        if s.coverage(emb) == 0.0 {
            return Err(crate::error::Error::NoEmbeddedTokens(s.path.clone()));
        }
    }

    let mut distances = Matrix::zeros(n, n);
    for (&(i, j), v) in pairs.iter().zip(values) {
        let v = v?;
        distances[(i, j)] = v;
        distances[(j, i)] = v;
    }
    let all = distances.as_slice();
    let d_min = all.iter().copied().fold(f64::INFINITY, f64::min);
    let d_max = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(SimilarityHeatmap {
        paths: sets.iter().map(|s| s.path.clone()).collect(),
        distances,
        d_min: if n == 0 { 0.0 } else { d_min },
        d_max: if n == 0 { 0.0 } else { d_max },
        coverage: sets.iter().map(|s| s.coverage(emb)).collect(),
    })
}

/// Word sets for every tree node, layer by layer, from each node's top
/// positive-weight dictionary words.
pub fn tree_word_sets(tree: &TopicTree, vocab: &Vocabulary, p: usize) -> Result<Vec<TopicWordSet>> {
    tree.nodes_by_layer()
        .into_iter()
        .map(|node| TopicWordSet::new(node.path.clone(), topic_words(&node.dictionary, vocab, p)?))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn single_and_identical_nodes() {
        let mut emb = EmbeddingTable::new(1);
        emb.insert("a".into(), vec![0.0]).unwrap();
        emb.insert("b".into(), vec![2.0]).unwrap();
        let one = [TopicWordSet::uniform("1", [String::from("a")]).unwrap()];
        let h = heatmap(&one, &emb, MassWeighting::Uniform).unwrap();
        assert_eq!(h.distances.shape(), (1, 1));
        assert_eq!(h.distances[(0, 0)], 0.0);

        let words = || [String::from("a"), String::from("b")];
        let two = [
            TopicWordSet::uniform("1", words()).unwrap(),
            TopicWordSet::uniform("2", words()).unwrap(),
        ];
        let h = heatmap(&two, &emb, MassWeighting::Uniform).unwrap();
        assert_eq!(h.distances[(0, 1)], 0.0);
        assert_eq!(h.similarity(0, 1), 1.0);
    }

    #[test]
    fn display_transform_spans_unit_interval() {
        let mut emb = EmbeddingTable::new(1);
        for (t, x) in [("a", 0.0), ("b", 1.0), ("c", 4.0)] {
            emb.insert(t.into(), vec![x]).unwrap();
        }
        let sets: Vec<TopicWordSet> = ["a", "b", "c"]
            .iter()
            .map(|w| TopicWordSet::uniform(*w, [String::from(*w)]).unwrap())
            .collect();
        let h = heatmap(&sets, &emb, MassWeighting::Uniform).unwrap();
        assert_eq!(h.d_min, 0.0);
        assert_eq!(h.d_max, 4.0);
        assert_eq!(h.similarity(0, 2), 0.0);
        assert_eq!(h.similarity(1, 1), 1.0);
        assert_eq!(h.similarity(0, 1), 0.75);
    }
}
