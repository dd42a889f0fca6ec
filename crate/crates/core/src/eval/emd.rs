//! Exact earth mover's distance via the transportation simplex.
//!
//! The basis is kept as an explicit spanning tree of `m + n - 1` cells (zero
//! flows allowed), potentials are solved over that tree, and the entering
//! cell's cycle is the tree path between its row and column. Dantzig pricing
//! is used until a run of degenerate pivots, after which Bland's rule takes
//! over to rule out cycling.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// A balanced transportation problem.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportProblem {
    supply: Vec<f64>,
    demand: Vec<f64>,
    cost: Matrix,
}

impl TransportProblem {
    pub fn new(supply: Vec<f64>, demand: Vec<f64>, cost: Matrix) -> Result<Self> {
        if supply.is_empty() || demand.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        if cost.shape() != (supply.len(), demand.len()) {
            return Err(Error::ShapeMismatch {
                expected: (supply.len(), demand.len()),
                found: cost.shape(),
            });
        }
        let bad = |v: &f64| !(v.is_finite() && *v >= 0.0);
        if supply.iter().any(bad) || demand.iter().any(bad) {
            return Err(Error::OutOfRange("transport weights must be finite and nonnegative".into()));
        }
        if cost.as_slice().iter().any(bad) {
            return Err(Error::OutOfRange("transport costs must be finite and nonnegative".into()));
        }
        let s: f64 = supply.iter().sum();
        let d: f64 = demand.iter().sum();
        if (s - 1.0).abs() > 1e-9 || (s - d).abs() > 1e-12 {
            return Err(Error::OutOfRange(alloc::format!(
                "supply and demand must each sum to 1 (got {s} and {d})"
            )));
        }
        Ok(TransportProblem {
            supply,
            demand,
            cost,
        })
    }

    pub fn supply(&self) -> &[f64] {
        &self.supply
    }

    pub fn demand(&self) -> &[f64] {
        &self.demand
    }

    pub fn cost(&self) -> &Matrix {
        &self.cost
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportSolution {
    pub cost: f64,
    pub plan: Matrix,
}

const DEGENERATE_RUN: usize = 50;

/// Minimum-cost transport plan and its cost.
pub fn emd(p: &TransportProblem) -> Result<TransportSolution> {
    let m = p.supply.len();
    let n = p.demand.len();
    let c = &p.cost;
    let cmax = c.as_slice().iter().copied().fold(0.0, f64::max);
    let tol = 1e-12 * cmax.max(1e-300);

    let mut flow = Matrix::zeros(m, n);
    let mut basic = vec![false; m * n];
    let mut basis: Vec<(usize, usize)> = Vec::with_capacity(m + n - 1);

    // North-west corner start, keeping exactly m + n - 1 basic cells.
    let mut s = p.supply.clone();
    let mut d = p.demand.clone();
    let (mut i, mut j) = (0, 0);
    loop {
        let x = s[i].min(d[j]);
        flow[(i, j)] = x;
        s[i] -= x;
        d[j] -= x;
        basic[i * n + j] = true;
        basis.push((i, j));
        if i == m - 1 && j == n - 1 {
            break;
        }
        if i == m - 1 {
            j += 1;
        } else if j == n - 1 || s[i] <= d[j] {
            i += 1;
        } else {
            j += 1;
        }
    }

    let mut u = vec![0.0; m];
    let mut v = vec![0.0; n];
    let mut degenerate_streak = 0;
    let max_pivots = 50 * (m + n) * (m + n) + 1000;

    for _ in 0..max_pivots {
        let adj = adjacency(&basis, m, n);
        potentials(&adj, &basis, c, m, &mut u, &mut v);

        let bland = degenerate_streak >= DEGENERATE_RUN;
        let mut entering: Option<(usize, usize)> = None;
        let mut best = -tol;
        'scan: for a in 0..m {
            for b in 0..n {
                if basic[a * n + b] {
                    continue;
                }
                let r = c[(a, b)] - u[a] - v[b];
                if r < best {
                    entering = Some((a, b));
                    if bland {
                        break 'scan;
                    }
                    best = r;
                }
            }
        }
        let Some((ei, ej)) = entering else {
            let cost = (0..m)
                .flat_map(|a| (0..n).map(move |b| (a, b)))
                .map(|(a, b)| flow[(a, b)] * c[(a, b)])
                .sum::<f64>()
                .max(0.0);
            return Ok(TransportSolution { cost, plan: flow });
        };

        // Tree path from row `ei` to column `ej`; its cells alternate -, +, -.
        let path = tree_path(&adj, ei, m + ej);
        let mut theta = f64::INFINITY;
        let mut leave_pos = usize::MAX;
        for (step, &bi) in path.iter().enumerate() {
            if step % 2 == 0 {
                let (a, b) = basis[bi];
                let f = flow[(a, b)];
                let better = f < theta || (bland && f == theta && bi < leave_pos);
                if better {
                    theta = f;
                    leave_pos = bi;
                }
            }
        }
        for (step, &bi) in path.iter().enumerate() {
            let (a, b) = basis[bi];
            if step % 2 == 0 {
                flow[(a, b)] = (flow[(a, b)] - theta).max(0.0);
            } else {
                flow[(a, b)] += theta;
            }
        }
        flow[(ei, ej)] = theta;
        let (la, lb) = basis[leave_pos];
        flow[(la, lb)] = 0.0;
        basic[la * n + lb] = false;
        basic[ei * n + ej] = true;
        basis[leave_pos] = (ei, ej);

        if theta == 0.0 {
            degenerate_streak += 1;
        } else {
            degenerate_streak = 0;
        }
    }
    Err(Error::Numeric("transport simplex exceeded its pivot budget".into()))
}

/// Node adjacency of the basis tree: rows are nodes `0..m`, columns `m..m+n`.
/// Each entry is `(neighbour, basis index)`.
fn adjacency(basis: &[(usize, usize)], m: usize, n: usize) -> Vec<Vec<(usize, usize)>> {
    let mut adj = vec![Vec::new(); m + n];
    for (bi, &(a, b)) in basis.iter().enumerate() {
        adj[a].push((m + b, bi));
        adj[m + b].push((a, bi));
    }
    adj
}

fn potentials(
    adj: &[Vec<(usize, usize)>],
    basis: &[(usize, usize)],
    c: &Matrix,
    m: usize,
    u: &mut [f64],
    v: &mut [f64],
) {
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::new();
    u[0] = 0.0;
    seen[0] = true;
    queue.push_back(0);
    while let Some(node) = queue.pop_front() {
        for &(next, bi) in &adj[node] {
            if seen[next] {
                continue;
            }
            let (a, b) = basis[bi];
            if node < m {
                v[next - m] = c[(a, b)] - u[node];
            } else {
                u[next] = c[(a, b)] - v[node - m];
            }
            seen[next] = true;
            queue.push_back(next);
        }
    }
}

/// Basis indices along the tree path from node `from` to node `to`.
fn tree_path(adj: &[Vec<(usize, usize)>], from: usize, to: usize) -> Vec<usize> {
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; adj.len()];
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::new();
    seen[from] = true;
    queue.push_back(from);
    while let Some(node) = queue.pop_front() {
        if node == to {
            break;
        }
        for &(next, bi) in &adj[node] {
            if !seen[next] {
                seen[next] = true;
                parent[next] = Some((node, bi));
                queue.push_back(next);
            }
        }
    }
    let mut path = Vec::new();
    let mut node = to;
    while node != from {
        let (prev, bi) = parent[node].expect("basis is a spanning tree");
        path.push(bi);
        node = prev;
    }
    path.reverse();
    path
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_cost_diagonal() {
        let w = vec![0.25, 0.25, 0.5];
        let c = Matrix::from_fn(3, 3, |i, j| if i == j { 0.0 } else { 1.0 + (i + j) as f64 });
        let sol = emd(&TransportProblem::new(w.clone(), w, c).unwrap()).unwrap();
        assert_eq!(sol.cost, 0.0);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(sol.plan[(i, j)], 0.0);
                }
            }
        }
    }

    #[test]
    fn single_cell() {
        let c = Matrix::from_rows(&[vec![2.5]]).unwrap();
        let sol = emd(&TransportProblem::new(vec![1.0], vec![1.0], c).unwrap()).unwrap();
        assert_eq!(sol.cost, 2.5);
        assert_eq!(sol.plan[(0, 0)], 1.0);
    }

    #[test]
    fn crossing_beats_north_west() {
        // NW corner ships 0->0 and 1->1 at cost 10; the optimum swaps.
        let c = Matrix::from_rows(&[vec![5.0, 1.0], vec![1.0, 5.0]]).unwrap();
        let sol = emd(&TransportProblem::new(vec![0.5, 0.5], vec![0.5, 0.5], c).unwrap()).unwrap();
        assert!((sol.cost - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rectangular_plan_is_feasible() {
        let c = Matrix::from_fn(2, 4, |i, j| ((i * 4 + j) % 5) as f64);
        let p = TransportProblem::new(vec![0.3, 0.7], vec![0.1, 0.2, 0.3, 0.4], c).unwrap();
        let sol = emd(&p).unwrap();
        for (i, s) in p.supply().iter().enumerate() {
            let row: f64 = sol.plan.row(i).iter().sum();
            assert!((row - s).abs() < 1e-12);
        }
        for (j, dm) in p.demand().iter().enumerate() {
            let col: f64 = sol.plan.column(j).iter().sum();
            assert!((col - dm).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_problems() {
        let c = Matrix::zeros(2, 2);
        assert!(TransportProblem::new(vec![0.5, 0.6], vec![0.5, 0.5], c.clone()).is_err());
        assert!(TransportProblem::new(vec![1.0], vec![0.5, 0.5], c.clone()).is_err());
        assert!(TransportProblem::new(vec![-0.5, 1.5], vec![0.5, 0.5], c).is_err());
    }
}
