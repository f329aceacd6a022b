//! Clustering accuracy under the best one-to-one label matching.
//!
//! Predicted labels are arbitrary symbols, so accuracy is the maximum over
//! label permutations of the fraction of agreeing points. The maximum is
//! found with the Hungarian algorithm on the confusion matrix (square-padded
//! with zeros when the label alphabets differ in size), which keeps the cost
//! cubic instead of factorial.

use crate::error::{Error, Result};

/// Fraction of points whose predicted cluster matches the ground truth under
/// the best matching of predicted labels to true labels.
pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.is_empty() || pred.len() != truth.len() {
        return Err(Error::InvalidInput(format!(
            "need equal non-empty label vectors, got {} predicted and {} true",
            pred.len(),
            truth.len()
        )));
    }
    let np = pred.iter().max().unwrap() + 1;
    let nt = truth.iter().max().unwrap() + 1;
    let side = np.max(nt);

    let mut counts = vec![vec![0i64; side]; side];
    for (&p, &t) in pred.iter().zip(truth) {
        counts[p][t] += 1;
    }

    // Hungarian minimizes, so negate the match counts.
    let cost: Vec<Vec<i64>> = counts.iter().map(|row| row.iter().map(|&c| -c).collect()).collect();
    let assignment = hungarian_min(&cost);
    let matched: i64 = assignment
        .iter()
        .enumerate()
        .map(|(row, &col)| counts[row][col])
        .sum();
    Ok(matched as f64 / pred.len() as f64)
}

/// Minimum-cost perfect assignment on a square cost matrix; returns for each
/// row the column it is assigned to. Shortest augmenting path formulation
/// with potentials, O(n^3).
pub(crate) fn hungarian_min(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    debug_assert!(cost.iter().all(|row| row.len() == n));
    const INF: i64 = i64::MAX / 4;

    // 1-based arrays; p[j] is the row matched to column j, p[0] the row
    // currently being inserted.
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = INF;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            row_to_col[p[j] - 1] = j - 1;
        }
    }
    row_to_col
}
