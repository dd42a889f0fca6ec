use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Coherence of one topic plus the keyword positions that were dropped
/// because no scoring document contains them.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceScore {
    pub score: f64,
    pub dropped: Vec<usize>,
}

/// Co-occurrence coherence of a ranked keyword list over a set of documents:
///
/// `Σ_{p=2..P} Σ_{l<p} ln((D(v_p, v_l) + 1) / D(v_l))`
///
/// where `D(v)` counts documents containing `v` and `D(v, u)` documents
/// containing both. `words` must be ordered by descending weight.
pub fn coherence<T: Ord>(docs: &[BTreeSet<T>], words: &[T]) -> Result<CoherenceScore> {
    let mut kept: Vec<&T> = Vec::with_capacity(words.len());
    let mut dropped = Vec::new();
    let mut presence: Vec<Vec<bool>> = Vec::with_capacity(words.len());
    for (pos, w) in words.iter().enumerate() {
        let row: Vec<bool> = docs.iter().map(|d| d.contains(w)).collect();
        if row.iter().any(|&p| p) {
            kept.push(w);
            presence.push(row);
        } else {
            dropped.push(pos);
        }
    }
    if kept.len() < 2 {
        return Err(Error::TooFewWords(kept.len()));
    }
    let df: Vec<usize> = presence.iter().map(|r| r.iter().filter(|&&p| p).count()).collect();
    let mut score = 0.0;
    for p in 1..kept.len() {
        for l in 0..p {
            let co = presence[p]
                .iter()
                .zip(&presence[l])
                .filter(|(&a, &b)| a && b)
                .count();
            score += libm::log((co as f64 + 1.0) / df[l] as f64);
        }
    }
    Ok(CoherenceScore { score, dropped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn docs(v: &[&[u32]]) -> Vec<BTreeSet<u32>> {
        v.iter().map(|d| d.iter().copied().collect()).collect()
    }

    #[test]
    fn numerator_equals_denominator() {
        // D(v1) = 4, D(v2, v1) = 3.
        let d = docs(&[&[1, 2], &[1, 2], &[1, 2], &[1], &[2]]);
        let c = coherence(&d, &[1, 2]).unwrap();
        assert_eq!(c.score, 0.0);
    }

    #[test]
    fn no_cooccurrence() {
        // D(v1) = 4, D(v2, v1) = 0.
        let d = docs(&[&[1], &[1], &[1], &[1], &[2]]);
        let c = coherence(&d, &[1, 2]).unwrap();
        assert!((c.score - libm::log(0.25)).abs() < 1e-15);
        assert!((c.score + 1.386).abs() < 1e-3);
    }

    #[test]
    fn absent_words_are_dropped() {
        let d = docs(&[&[1, 3], &[3]]);
        let c = coherence(&d, &[9, 1, 3]).unwrap();
        assert_eq!(c.dropped, vec![0]);
        assert!((c.score - libm::log(2.0)).abs() < 1e-15);
        assert_eq!(coherence(&d, &[9, 1]), Err(Error::TooFewWords(1)));
    }
}
