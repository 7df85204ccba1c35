//! Minimum-cost perfect matching on a square cost matrix (O(n^3) shortest
//! augmenting paths with potentials) and topic alignment built on it.

use crate::error::{Error, Result};
use crate::model::TopicMatrix;

/// `assignment[r]` is the column matched to row `r` of the row-major `n x n`
/// `cost`; also returns the total cost summed in row order.
pub fn solve_assignment(cost: &[f64], n: usize) -> Result<(Vec<usize>, f64)> {
    if cost.len() != n * n {
        return Err(Error::Dimension(format!("cost matrix has {} entries, expected {n}x{n}", cost.len())));
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(Error::Domain("assignment costs must be finite".into()));
    }
    if n == 0 {
        return Ok((Vec::new(), 0.0));
    }
    // 1-based arrays; column 0 is the virtual source.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut matched_row = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        matched_row[0] = row;
        let mut col0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col0] = true;
            let r0 = matched_row[col0];
            let mut delta = f64::INFINITY;
            let mut col1 = 0;
            for col in 1..=n {
                if used[col] {
                    continue;
                }
                let reduced = cost[(r0 - 1) * n + (col - 1)] - u[r0] - v[col];
                if reduced < minv[col] {
                    minv[col] = reduced;
                    way[col] = col0;
                }
                if minv[col] < delta {
                    delta = minv[col];
                    col1 = col;
                }
            }
            for col in 0..=n {
                if used[col] {
                    u[matched_row[col]] += delta;
                    v[col] -= delta;
                } else {
                    minv[col] -= delta;
                }
            }
            col0 = col1;
            if matched_row[col0] == 0 {
                break;
            }
        }
        loop {
            let col1 = way[col0];
            matched_row[col0] = matched_row[col1];
            col0 = col1;
            if col0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for col in 1..=n {
        assignment[matched_row[col] - 1] = col - 1;
    }
    let total = assignment.iter().enumerate().map(|(r, &c)| cost[r * n + c]).sum();
    Ok((assignment, total))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    /// `perm[i]` is the row of the estimate matched to reference row `i`.
    pub perm: Vec<usize>,
    /// Total l1 distance over matched pairs.
    pub cost: f64,
}

fn check_same_shape(a: &TopicMatrix, b: &TopicMatrix) -> Result<()> {
    if a.num_topics() != b.num_topics() || a.vocab_size() != b.vocab_size() {
        return Err(Error::Dimension(format!(
            "topic matrices are {}x{} and {}x{}",
            a.num_topics(),
            a.vocab_size(),
            b.num_topics(),
            b.vocab_size()
        )));
    }
    Ok(())
}

pub(crate) fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Match rows of `estimate` to rows of `reference` minimizing total l1.
pub fn hungarian_align(estimate: &TopicMatrix, reference: &TopicMatrix) -> Result<Alignment> {
    check_same_shape(estimate, reference)?;
    let k = reference.num_topics();
    let mut cost = Vec::with_capacity(k * k);
    for i in 0..k {
        for h in 0..k {
            cost.push(l1(estimate.row(h), reference.row(i)));
        }
    }
    let (perm, cost) = solve_assignment(&cost, k)?;
    Ok(Alignment { perm, cost })
}

/// Mean l1 distance per topic after optimal alignment.
pub fn topic_l1_error(estimate: &TopicMatrix, truth: &TopicMatrix) -> Result<f64> {
    let a = hungarian_align(estimate, truth)?;
    Ok(a.cost / truth.num_topics() as f64)
}

fn kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(&x, &y)| x * (x / y).ln()).sum()
}

/// Mean symmetric KL divergence over l1-aligned topic pairs. Both matrices
/// must be strictly positive.
pub fn symmetric_kl_topics(a: &TopicMatrix, b: &TopicMatrix) -> Result<f64> {
    check_same_shape(a, b)?;
    if a.probabilities().iter().chain(b.probabilities()).any(|&p| p <= 0.0) {
        return Err(Error::Domain("symmetric KL needs strictly positive topic matrices".into()));
    }
    let align = hungarian_align(a, b)?;
    let k = b.num_topics();
    let total: f64 = (0..k)
        .map(|i| {
            let (p, q) = (a.row(align.perm[i]), b.row(i));
            kl(p, q) + kl(q, p)
        })
        .sum();
    Ok(total / k as f64)
}
