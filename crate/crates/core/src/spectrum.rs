//! Leading singular values of the term-document matrix and the proportion of
//! variance each one explains.
//!
//! Squared singular values are the eigenvalues of the smaller Gram matrix
//! (`XᵀX` or `XXᵀ`). Small problems diagonalize that Gram matrix densely;
//! larger ones run block subspace iteration on the implicit Gram operator and
//! only resolve the leading eigenvalues.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{dot, orthonormalize, symmetric_eigen, Matrix};
use crate::seed::Uniform01;
use crate::sparse::CscMatrix;

/// Above this Gram dimension the iterative method is used.
pub const DENSE_GRAM_LIMIT: usize = 160;

const OVERSAMPLE: usize = 10;
const MAX_SUBSPACE_ITERS: usize = 2000;
const RITZ_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumMethod {
    /// Dense Gram matrix below [`DENSE_GRAM_LIMIT`], subspace iteration above.
    Auto,
    DenseGram,
    SubspaceIteration,
}

/// Squared leading singular values `σ₁² ≥ … ≥ σ_k²` of `x`.
pub fn leading_squared_singular_values(
    x: &CscMatrix,
    k_max: usize,
    method: SpectrumMethod,
) -> Result<Vec<f64>> {
    let (d, n) = x.shape();
    let m = d.min(n);
    if k_max == 0 || k_max > m {
        return Err(Error::OutOfRange(alloc::format!(
            "k_max = {k_max} outside 1..={m}"
        )));
    }
    let dense = match method {
        SpectrumMethod::Auto => m <= DENSE_GRAM_LIMIT,
        SpectrumMethod::DenseGram => true,
        SpectrumMethod::SubspaceIteration => false,
    };
    let mut values = if dense {
        let (vals, _) = symmetric_eigen(&gram(x))?;
        vals
    } else {
        subspace_eigenvalues(x, k_max)?
    };
    values.truncate(k_max);
    for v in values.iter_mut() {
        *v = v.max(0.0);
    }
    Ok(values)
}

/// `σ_i² / ‖X‖²_F` for `i = 1..=k_max`.
pub fn variance_increments(x: &CscMatrix, k_max: usize) -> Result<Vec<f64>> {
    variance_increments_with(x, k_max, SpectrumMethod::Auto)
}

pub fn variance_increments_with(
    x: &CscMatrix,
    k_max: usize,
    method: SpectrumMethod,
) -> Result<Vec<f64>> {
    let total = x.frobenius_sq();
    if total == 0.0 {
        return Err(Error::EmptyMatrix);
    }
    let sq = leading_squared_singular_values(x, k_max, method)?;
    Ok(sq.into_iter().map(|s| s / total).collect())
}

/// The smaller of `XᵀX` and `XXᵀ`, formed densely.
fn gram(x: &CscMatrix) -> Matrix {
    let (d, n) = x.shape();
    if n <= d {
        let mut g = Matrix::zeros(n, n);
        for a in 0..n {
            for b in a..n {
                let v = x.column_dot(a, b);
                g[(a, b)] = v;
                g[(b, a)] = v;
            }
        }
        g
    } else {
        let mut g = Matrix::zeros(d, d);
        for j in 0..n {
            let (idx, vals) = x.column(j);
            for (p, (&i, &vi)) in idx.iter().zip(vals).enumerate() {
                for (&l, &vl) in idx[p..].iter().zip(&vals[p..]) {
                    g[(i, l)] += vi * vl;
                }
            }
        }
        for i in 0..d {
            for l in 0..i {
                g[(i, l)] = g[(l, i)];
            }
        }
        g
    }
}

/// Applies the smaller Gram operator without forming it.
fn apply_gram(x: &CscMatrix, v: &[f64]) -> Vec<f64> {
    let (d, n) = x.shape();
    if n <= d {
        x.t_mul_vec(&x.mul_vec(v))
    } else {
        x.mul_vec(&x.t_mul_vec(v))
    }
}

fn subspace_eigenvalues(x: &CscMatrix, k_max: usize) -> Result<Vec<f64>> {
    let (d, n) = x.shape();
    let m = d.min(n);
    let block = (k_max + OVERSAMPLE).min(m);
    let mut rng = Uniform01::new(0x5EED_5B5C);
    let mut q: Vec<Vec<f64>> = (0..block)
        .map(|_| (0..m).map(|_| rng.sample() - 0.5).collect())
        .collect();
    orthonormalize(&mut q);

    let mut prev: Vec<f64> = vec![f64::INFINITY; k_max];
    for _ in 0..MAX_SUBSPACE_ITERS {
        let z: Vec<Vec<f64>> = q.iter().map(|v| apply_gram(x, v)).collect();
        let t = Matrix::from_fn(block, block, |a, b| 0.5 * (dot(&q[a], &z[b]) + dot(&q[b], &z[a])));
        let (ritz, _) = symmetric_eigen(&t)?;
        let scale = ritz.first().copied().unwrap_or(0.0).abs().max(f64::MIN_POSITIVE);
        let settled = ritz
            .iter()
            .zip(&prev)
            .take(k_max)
            .all(|(a, b)| (a - b).abs() <= RITZ_TOL * scale);
        if settled {
            return Ok(ritz);
        }
        prev = ritz;
        q = z;
        orthonormalize(&mut q);
    }
    Ok(prev)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthogonal_equal_norm_columns() {
        // 5 × 3 with orthogonal unit columns.
        let cols = (0..3).map(|j| vec![(j, 1.0)]).collect();
        let x = CscMatrix::from_columns(5, cols).unwrap();
        let inc = variance_increments(&x, 3).unwrap();
        for v in inc {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rank_one_concentrates_variance() {
        let x = CscMatrix::from_dense(&Matrix::from_fn(6, 4, |i, j| (1 + i) as f64 * (2 + j) as f64));
        let inc = variance_increments(&x, 4).unwrap();
        assert!((inc[0] - 1.0).abs() < 1e-12);
        for v in &inc[1..] {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_k_max() {
        let x = CscMatrix::from_dense(&Matrix::identity(3));
        assert!(variance_increments(&x, 0).is_err());
        assert!(variance_increments(&x, 4).is_err());
    }

    #[test]
    fn both_gram_orientations_agree() {
        let mut rng = Uniform01::new(4);
        let a = Matrix::from_fn(7, 5, |_, _| rng.sample());
        let x = CscMatrix::from_dense(&a);
        let xt = CscMatrix::from_dense(&a.transpose());
        let s1 = leading_squared_singular_values(&x, 5, SpectrumMethod::DenseGram).unwrap();
        let s2 = leading_squared_singular_values(&xt, 5, SpectrumMethod::DenseGram).unwrap();
        for (p, q) in s1.iter().zip(&s2) {
            assert!((p - q).abs() < 1e-10 * s1[0]);
        }
    }
}
