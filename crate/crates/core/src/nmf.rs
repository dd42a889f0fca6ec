//! Nonnegative matrix factorization `X ≈ W H` under the squared Frobenius
//! loss, solved with multiplicative updates from a seeded uniform start.

use alloc::string::String;
use alloc::vec::Vec;

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::linalg::{norm, Matrix};
use crate::seed::Uniform01;
use crate::sparse::CscMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NmfConfig {
    pub k: usize,
    pub seed: u64,
    pub max_iters: usize,
    pub rel_tol: f64,
    /// Denominator floor in the update ratios.
    pub eps: f64,
}

impl NmfConfig {
    pub const DEFAULT_MAX_ITERS: usize = 400;
    pub const DEFAULT_REL_TOL: f64 = 1e-5;
    pub const DEFAULT_EPS: f64 = 1e-12;

    pub fn new(k: usize, seed: u64) -> Self {
        NmfConfig {
            k,
            seed,
            max_iters: Self::DEFAULT_MAX_ITERS,
            rel_tol: Self::DEFAULT_REL_TOL,
            eps: Self::DEFAULT_EPS,
        }
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn validate(&self, d: usize, n: usize) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        if self.k > d.min(n) {
            return Err(Error::RankTooLarge {
                k: self.k,
                max: d.min(n),
            });
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        if !(self.rel_tol >= 0.0) {
            return Err(Error::InvalidConfig("rel_tol must be nonnegative".into()));
        }
        if !(self.eps > 0.0) {
            return Err(Error::InvalidConfig("eps must be positive".into()));
        }
        Ok(())
    }
}

/// Result of one factorization run.
#[derive(Debug, Clone, PartialEq)]
pub struct Factorization {
    /// `d × k` dictionary matrix.
    pub w: Matrix,
    /// `k × n` coding matrix.
    pub h: Matrix,
    /// Loss after each iteration.
    pub objective_history: Vec<f64>,
    pub seed: u64,
}

impl Factorization {
    pub fn k(&self) -> usize {
        self.w.cols()
    }

    pub fn final_objective(&self) -> f64 {
        self.objective_history.last().copied().unwrap_or(f64::NAN)
    }

    pub fn topic_vector(&self, t: usize) -> Vec<f64> {
        self.w.column(t)
    }
}

/// `‖X − W H‖²_F`.
pub fn objective(x: &CscMatrix, w: &Matrix, h: &Matrix) -> Result<f64> {
    let (d, n) = x.shape();
    if w.rows() != d || h.cols() != n || w.cols() != h.rows() {
        return Err(Error::ShapeMismatch {
            expected: (d, n),
            found: (w.rows(), h.cols()),
        });
    }
    Ok(loss(x, w, h, None))
}

/// Loss evaluation. Dense-ish inputs are summed entry by entry; sparse inputs
/// combine the exact residual on stored entries with `tr(WᵀW · HHᵀ)` for the
/// rest. `grams` supplies precomputed `(WᵀW, HHᵀ)` when available.
fn loss(x: &CscMatrix, w: &Matrix, h: &Matrix, grams: Option<(&Matrix, &Matrix)>) -> f64 {
    let (d, n) = x.shape();
    let k = w.cols();
    let mut hcol = alloc::vec![0.0; k];
    if x.nnz().saturating_mul(4) >= d.saturating_mul(n) {
        let mut total = 0.0;
        for j in 0..n {
            for (t, v) in hcol.iter_mut().enumerate() {
                *v = h[(t, j)];
            }
            let (idx, vals) = x.column(j);
            let mut p = 0;
            for i in 0..d {
                let wh: f64 = w.row(i).iter().zip(&hcol).map(|(a, b)| a * b).sum();
                let xv = if p < idx.len() && idx[p] == i {
                    p += 1;
                    vals[p - 1]
                } else {
                    0.0
                };
                let r = xv - wh;
                total += r * r;
            }
        }
        return total;
    }

    let mut stored_residual = 0.0;
    let mut stored_model = 0.0;
    for j in 0..n {
        for (t, v) in hcol.iter_mut().enumerate() {
            *v = h[(t, j)];
        }
        let (idx, vals) = x.column(j);
        for (&i, &xv) in idx.iter().zip(vals) {
            let wh: f64 = w.row(i).iter().zip(&hcol).map(|(a, b)| a * b).sum();
            stored_residual += (xv - wh) * (xv - wh);
            stored_model += wh * wh;
        }
    }
    let owned;
    let (wtw, hht) = match grams {
        Some(g) => g,
        None => {
            owned = (w.gram(), h.outer_gram());
            (&owned.0, &owned.1)
        }
    };
    let model_total: f64 = wtw
        .as_slice()
        .iter()
        .zip(hht.as_slice())
        .map(|(a, b)| a * b)
        .sum();
    (stored_residual + (model_total - stored_model).max(0.0)).max(0.0)
}

fn random_matrix(rows: usize, cols: usize, rng: &mut Uniform01) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample())
}

/// Factorizes `x` with the multiplicative updates
/// `H ← H ∘ (WᵀX) ⊘ (WᵀWH + ε)` then `W ← W ∘ (XHᵀ) ⊘ (WHHᵀ + ε)`.
///
/// Stops after `max_iters` iterations or once the relative decrease of the
/// loss over one iteration falls below `rel_tol`. The result depends only on
/// `x` and `cfg`.
pub fn nmf(x: &CscMatrix, cfg: &NmfConfig) -> Result<Factorization> {
    let (d, n) = x.shape();
    cfg.validate(d, n)?;
    if !x.is_nonnegative() {
        return Err(Error::OutOfRange("input matrix has negative entries".into()));
    }
    if let Some(j) = x.first_zero_column() {
        return Err(Error::OutOfRange(alloc::format!("column {j} of the input is all zero")));
    }
    let k = cfg.k;
    let eps = cfg.eps;
    let mut rng = Uniform01::new(cfg.seed);
    let mut w = random_matrix(d, k, &mut rng);
    let mut h = random_matrix(k, n, &mut rng);

    let mut history = Vec::with_capacity(cfg.max_iters);
    let mut prev = loss(x, &w, &h, None);

    for _ in 0..cfg.max_iters {
        // H step.
        let wtx = x.dense_t_mul_transposed(&w); // n × k
        let wtw = w.gram();
        let wtwh = wtw.matmul(&h)?;
        for t in 0..k {
            for j in 0..n {
                let num = wtx[(j, t)];
                let den = wtwh[(t, j)] + eps;
                h[(t, j)] *= num / den;
            }
        }

        // W step.
        let xht = x.mul_dense_t(&h); // d × k
        let hht = h.outer_gram();
        let whht = w.matmul(&hht)?;
        for (wv, (num, den)) in w
            .as_mut_slice()
            .iter_mut()
            .zip(xht.as_slice().iter().zip(whht.as_slice()))
        {
            *wv *= num / (den + eps);
        }

        let wtw = w.gram();
        let cur = loss(x, &w, &h, Some((&wtw, &hht)));
        if !cur.is_finite() {
            return Err(Error::Numeric("factorization loss is not finite".into()));
        }
        history.push(cur);
        let converged = cur == 0.0 || (prev > 0.0 && (prev - cur) / prev < cfg.rel_tol);
        prev = cur;
        if converged {
            break;
        }
    }

    Ok(Factorization {
        w,
        h,
        objective_history: history,
        seed: cfg.seed,
    })
}

/// Scales each column of `W` to unit L2 norm and the matching row of `H` by
/// the inverse factor, leaving `W H` unchanged.
pub fn normalize(f: &Factorization) -> Result<Factorization> {
    let mut out = f.clone();
    let (d, k) = f.w.shape();
    for t in 0..k {
        let col = f.w.column(t);
        let s = norm(&col);
        if s == 0.0 {
            return Err(Error::ZeroColumn(t));
        }
        for i in 0..d {
            out.w[(i, t)] /= s;
        }
        for v in out.h.row_mut(t) {
            *v *= s;
        }
    }
    Ok(out)
}

/// The `p` largest-weight tokens of a topic vector, descending by weight,
/// ties broken by lexicographic token order.
pub fn top_words(w: &[f64], vocab: &Vocabulary, p: usize) -> Result<Vec<(String, f64)>> {
    if w.len() != vocab.len() {
        return Err(Error::ShapeMismatch {
            expected: (vocab.len(), 1),
            found: (w.len(), 1),
        });
    }
    Ok(top_indices(w, p, |a, b| vocab.token(a).cmp(vocab.token(b)))?
        .into_iter()
        .map(|i| (String::from(vocab.token(i)), w[i]))
        .collect())
}

/// [`top_words`] without the zero-weight tokens, which do not belong to the
/// topic. `p` may exceed the vocabulary size.
pub fn topic_words(w: &[f64], vocab: &Vocabulary, p: usize) -> Result<Vec<(String, f64)>> {
    let mut words = top_words(w, vocab, p.min(vocab.len()))?;
    words.retain(|(_, x)| *x > 0.0);
    Ok(words)
}

/// Indices of the `p` largest entries of `w`, descending, with `tie` ordering
/// equal weights.
pub fn top_indices(
    w: &[f64],
    p: usize,
    mut tie: impl FnMut(usize, usize) -> core::cmp::Ordering,
) -> Result<Vec<usize>> {
    if p == 0 {
        return Err(Error::OutOfRange("P must be at least 1".into()));
    }
    if p > w.len() {
        return Err(Error::OutOfRange(alloc::format!(
            "P = {p} exceeds vocabulary size {}",
            w.len()
        )));
    }
    let mut idx: Vec<usize> = (0..w.len()).collect();
    idx.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then_with(|| tie(a, b)));
    idx.truncate(p);
    Ok(idx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn random_sparse(d: usize, n: usize, seed: u64) -> CscMatrix {
        let mut rng = Uniform01::new(seed);
        CscMatrix::from_dense(&Matrix::from_fn(d, n, |_, _| rng.sample()))
    }

    #[test]
    fn objective_matches_hand_expansion() {
        let x = CscMatrix::from_dense(&Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 3.0]]).unwrap());
        let w = Matrix::from_rows(&[vec![1.0], vec![0.5]]).unwrap();
        let h = Matrix::from_rows(&[vec![2.0, 1.0]]).unwrap();
        // WH = [[2, 1], [1, 0.5]]; residual [[-1, 1], [-1, 2.5]].
        let expected = 1.0 + 1.0 + 1.0 + 6.25;
        assert!((objective(&x, &w, &h).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn objective_edge_cases() {
        let x = random_sparse(4, 3, 1);
        let xd = x.to_dense();
        let zero_w = Matrix::zeros(4, 2);
        let zero_h = Matrix::zeros(2, 3);
        assert!((objective(&x, &zero_w, &zero_h).unwrap() - x.frobenius_sq()).abs() < 1e-12);
        assert!(objective(&x, &xd, &Matrix::identity(3)).unwrap() < 1e-24);
        assert!(objective(&x, &zero_w, &Matrix::zeros(2, 4)).is_err());
    }

    #[test]
    fn sparse_loss_path_agrees_with_dense_path() {
        // Mostly-zero matrix forces the split evaluation.
        let cols = (0..20)
            .map(|j| vec![(j % 15, 1.0 + j as f64), ((j * 7) % 15, 0.5)])
            .collect();
        let x = CscMatrix::from_columns(15, cols).unwrap();
        assert!(x.nnz() * 4 < 15 * 20);
        let mut rng = Uniform01::new(9);
        let w = random_matrix(15, 3, &mut rng);
        let h = random_matrix(3, 20, &mut rng);
        let direct = x.to_dense().sub(&w.matmul(&h).unwrap()).unwrap().frobenius_sq();
        let fast = objective(&x, &w, &h).unwrap();
        assert!((direct - fast).abs() <= 1e-10 * direct);
    }

    #[test]
    fn rank_one_exact() {
        let w: Vec<f64> = (0..12).map(|i| 0.5 + i as f64 * 0.1).collect();
        let h: Vec<f64> = (0..9).map(|j| 1.0 + (j % 4) as f64).collect();
        let x = CscMatrix::from_dense(&Matrix::from_fn(12, 9, |i, j| w[i] * h[j]));
        let f = nmf(&x, &NmfConfig::new(1, 3)).unwrap();
        assert!(f.final_objective() <= 1e-6 * x.frobenius_sq());
    }

    #[test]
    fn monotone_and_deterministic() {
        let x = random_sparse(50, 80, 11);
        let cfg = NmfConfig::new(5, 99).with_max_iters(300).with_rel_tol(0.0);
        let f = nmf(&x, &cfg).unwrap();
        assert_eq!(f.objective_history.len(), 300);
        for pair in f.objective_history.windows(2) {
            assert!(pair[1] <= pair[0] * (1.0 + 1e-10));
        }
        assert!(f.w.as_slice().iter().all(|&v| v >= 0.0));
        assert!(f.h.as_slice().iter().all(|&v| v >= 0.0));
        let g = nmf(&x, &cfg).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn rejects_rank_above_min_dimension() {
        let x = random_sparse(4, 3, 2);
        assert_eq!(
            nmf(&x, &NmfConfig::new(4, 0)),
            Err(Error::RankTooLarge { k: 4, max: 3 })
        );
    }

    #[test]
    fn normalize_scales_columns() {
        let w = Matrix::from_rows(&[vec![2.0 * 0.6, 1.0], vec![2.0 * 0.8, 0.0]]).unwrap();
        let h = Matrix::from_rows(&[vec![1.0, 3.0], vec![4.0, 5.0]]).unwrap();
        let f = Factorization {
            w,
            h,
            objective_history: vec![],
            seed: 0,
        };
        let g = normalize(&f).unwrap();
        assert!((g.w[(0, 0)] - 0.6).abs() < 1e-15);
        assert!((g.w[(1, 0)] - 0.8).abs() < 1e-15);
        assert_eq!(g.h.row(0), &[2.0, 6.0]);
        assert_eq!(g.h.row(1), &[4.0, 5.0]);
        let again = normalize(&g).unwrap();
        assert!(again.w.max_abs_diff(&g.w) < 1e-12);
        assert!(again.h.max_abs_diff(&g.h) < 1e-12);
    }

    #[test]
    fn normalize_rejects_zero_column() {
        let f = Factorization {
            w: Matrix::from_rows(&[vec![1.0, 0.0]]).unwrap(),
            h: Matrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap(),
            objective_history: vec![],
            seed: 0,
        };
        assert_eq!(normalize(&f), Err(Error::ZeroColumn(1)));
    }

    fn vocab(tokens: &[&str]) -> Vocabulary {
        Vocabulary::from_counts(tokens.iter().map(|t| (String::from(*t), 1)), 1).unwrap()
    }

    #[test]
    fn top_words_indicator_and_ties() {
        let v = vocab(&["alpha", "beta", "delta", "gamma", "omega"]);
        let e3 = [0.0, 0.0, 0.0, 1.0, 0.0];
        assert_eq!(top_words(&e3, &v, 1).unwrap(), vec![(String::from("gamma"), 1.0)]);
        let uniform = [0.2; 5];
        let top: Vec<String> = top_words(&uniform, &v, 2)
            .unwrap()
            .into_iter()
            .map(|(t, _)| t)
            .collect();
        assert_eq!(top, vec![String::from("alpha"), String::from("beta")]);
        assert!(top_words(&uniform, &v, 6).is_err());
        assert!(top_words(&uniform, &v, 0).is_err());
        let sparse = [0.0, 0.5, 0.0, 0.25, 0.0];
        let kept: Vec<String> = topic_words(&sparse, &v, 9).unwrap().into_iter().map(|(w, _)| w).collect();
        assert_eq!(kept, ["beta", "gamma"]);
        assert_eq!(topic_words(&sparse, &v, 1).unwrap().len(), 1);
    }
}
