//! Consistent topic-count selection.
//!
//! A candidate `k` is consistent when NMF runs from different random seeds
//! recover matching topics. For each `k` in a range, `q + 1` seeded runs are
//! compared pairwise in sequence (run `j` against run `j + 1`) by the cosine
//! similarity of their topic vectors; each comparison is summarized by its
//! least seed similarity (the smallest row or column maximum) and the `k`
//! with the highest median score wins.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, Matrix};
use crate::nmf::{nmf, NmfConfig};
use crate::seed::SeedStream;
use crate::sparse::CscMatrix;

/// Inclusive range of candidate topic counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KRange {
    pub k1: usize,
    pub k2: usize,
}

impl KRange {
    pub fn new(k1: usize, k2: usize) -> Result<Self> {
        if k1 == 0 || k1 > k2 {
            return Err(Error::InvalidConfig(alloc::format!(
                "topic range [{k1}, {k2}] must satisfy 1 <= k1 <= k2"
            )));
        }
        Ok(KRange { k1, k2 })
    }

    /// Range restricted to `k <= max`, or `None` when nothing remains.
    pub fn clamp_to(self, max: usize) -> Option<KRange> {
        if self.k1 > max {
            None
        } else {
            Some(KRange {
                k1: self.k1,
                k2: self.k2.min(max),
            })
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> {
        self.k1..=self.k2
    }

    pub fn len(&self) -> usize {
        self.k2 - self.k1 + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl core::fmt::Display for KRange {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}:{}", self.k1, self.k2)
    }
}

/// Default ratio above which consecutive variance increments count as level.
pub const DEFAULT_DROP_RATIO: f64 = 0.9;
/// Width added to `k1` to form the suggested upper end.
pub const SUGGESTED_WIDTH: usize = 4;
pub const FALLBACK_RANGE: KRange = KRange { k1: 2, k2: 6 };

/// Finds where the variance increments level off: the smallest 1-based `i`
/// such that both `inc[i+1]/inc[i]` and `inc[i+2]/inc[i+1]` exceed
/// `drop_ratio`. Suggests `[i, i + 4]`, with `k1` raised to at least 2, or
/// [`FALLBACK_RANGE`] when no plateau is found.
pub fn suggest_range(increments: &[f64], drop_ratio: f64) -> KRange {
    let level = |a: f64, b: f64| a > 0.0 && b / a > drop_ratio;
    for i in 0..increments.len().saturating_sub(2) {
        if level(increments[i], increments[i + 1]) && level(increments[i + 1], increments[i + 2]) {
            let k1 = (i + 1).max(2);
            return KRange {
                k1,
                k2: k1 + SUGGESTED_WIDTH,
            };
        }
    }
    FALLBACK_RANGE
}

/// Least seed similarity of a cross-run similarity matrix: the minimum over
/// all row maxima and all column maxima.
pub fn lss(s: &Matrix) -> Result<f64> {
    let (r, c) = s.shape();
    if r == 0 || c == 0 {
        return Err(Error::EmptyMatrix);
    }
    let mut best = f64::INFINITY;
    for i in 0..r {
        let row_max = s.row(i).iter().copied().fold(f64::NEG_INFINITY, f64::max);
        best = best.min(row_max);
    }
    for j in 0..c {
        let col_max = (0..r).map(|i| s[(i, j)]).fold(f64::NEG_INFINITY, f64::max);
        best = best.min(col_max);
    }
    Ok(best)
}

/// Unit-normalized topic vectors from one seeded run, stored as the columns
/// of a `d × k` matrix. A topic whose dictionary column collapsed to zero is
/// kept as a zero vector and matches nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicSet {
    pub vectors: Matrix,
    pub seed: u64,
}

impl TopicSet {
    pub fn from_dictionary(w: &Matrix, seed: u64) -> Self {
        let mut vectors = w.clone();
        for t in 0..w.cols() {
            let s = norm(&w.column(t));
            if s > 0.0 {
                for i in 0..w.rows() {
                    vectors[(i, t)] /= s;
                }
            }
        }
        TopicSet { vectors, seed }
    }

    pub fn k(&self) -> usize {
        self.vectors.cols()
    }
}

/// `S[a][b]` = cosine similarity of topic `a` of `a_set` and topic `b` of
/// `b_set`, clamped to `[0, 1]`.
pub fn pairwise_cosine(a_set: &TopicSet, b_set: &TopicSet) -> Result<Matrix> {
    if a_set.vectors.shape() != b_set.vectors.shape() {
        return Err(Error::ShapeMismatch {
            expected: a_set.vectors.shape(),
            found: b_set.vectors.shape(),
        });
    }
    let at = a_set.vectors.transpose();
    let bt = b_set.vectors.transpose();
    let k = a_set.k();
    let norms_a: Vec<f64> = (0..k).map(|t| norm(at.row(t))).collect();
    let norms_b: Vec<f64> = (0..k).map(|t| norm(bt.row(t))).collect();
    Ok(Matrix::from_fn(k, k, |x, y| {
        let den = norms_a[x] * norms_b[y];
        if den == 0.0 {
            0.0
        } else {
            (dot(at.row(x), bt.row(y)) / den).clamp(0.0, 1.0)
        }
    }))
}

/// Median; even-length lists average the two middle values.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    })
}

/// Per-candidate lss scores.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LssDistribution {
    pub scores: BTreeMap<usize, Vec<f64>>,
}

impl LssDistribution {
    pub fn median(&self, k: usize) -> Option<f64> {
        self.scores.get(&k).and_then(|s| median(s))
    }

    /// `argmax_k median(LSS_k)`, ties going to the smaller `k`.
    pub fn best_k(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (&k, scores) in &self.scores {
            let m = median(scores)?;
            match best {
                Some((_, bm)) if m <= bm => {}
                _ => best = Some((k, m)),
            }
        }
        best.map(|(k, _)| k)
    }
}

/// Solver settings shared by every run inside a selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NmfParams {
    pub max_iters: usize,
    pub rel_tol: f64,
    pub eps: f64,
}

impl Default for NmfParams {
    fn default() -> Self {
        NmfParams {
            max_iters: NmfConfig::DEFAULT_MAX_ITERS,
            rel_tol: NmfConfig::DEFAULT_REL_TOL,
            eps: NmfConfig::DEFAULT_EPS,
        }
    }
}

impl NmfParams {
    pub fn config(&self, k: usize, seed: u64) -> NmfConfig {
        NmfConfig {
            k,
            seed,
            max_iters: self.max_iters,
            rel_tol: self.rel_tol,
            eps: self.eps,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub k_star: usize,
    pub distribution: LssDistribution,
    pub seeds: Vec<u64>,
}

/// Chooses the most consistent topic count in `range` from `q + 1` seeded
/// runs per candidate.
pub fn select_k(
    x: &CscMatrix,
    range: KRange,
    q: usize,
    seed_master: u64,
    params: &NmfParams,
) -> Result<Selection> {
    if q == 0 {
        return Err(Error::InvalidConfig("q must be at least 1".into()));
    }
    let (d, n) = x.shape();
    let range = KRange::new(range.k1, range.k2)?;
    if range.k2 > d.min(n) {
        return Err(Error::RankTooLarge {
            k: range.k2,
            max: d.min(n),
        });
    }
    let seeds = SeedStream::new(seed_master).take_seeds(q + 1);

    let jobs: Vec<(usize, usize)> = range
        .iter()
        .flat_map(|k| (0..=q).map(move |j| (k, j)))
        .collect();
    let run = |&(k, j): &(usize, usize)| -> Result<TopicSet> {
        let f = nmf(x, &params.config(k, seeds[j]))?;
        Ok(TopicSet::from_dictionary(&f.w, seeds[j]))
    };
    #[cfg(feature = "parallel")]
    let sets: Vec<Result<TopicSet>> = {
        use rayon::prelude::*;
        jobs.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let sets: Vec<Result<TopicSet>> = jobs.iter().map(run).collect();
    let sets = sets.into_iter().collect::<Result<Vec<_>>>()?;

    let mut distribution = LssDistribution::default();
    for (ki, k) in range.iter().enumerate() {
        let runs = &sets[ki * (q + 1)..(ki + 1) * (q + 1)];
        let scores = runs
            .windows(2)
            .map(|pair| lss(&pairwise_cosine(&pair[0], &pair[1])?))
            .collect::<Result<Vec<f64>>>()?;
        distribution.scores.insert(k, scores);
    }
    let k_star = distribution
        .best_k()
        .ok_or_else(|| Error::Numeric("no lss scores were produced".into()))?;
    Ok(Selection {
        k_star,
        distribution,
        seeds,
    })
}
