//! Partition agreement between two token labelings.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

struct Contingency {
    n: usize,
    cells: BTreeMap<(usize, usize), usize>,
    rows: BTreeMap<usize, usize>,
    cols: BTreeMap<usize, usize>,
}

fn contingency(a: &[usize], b: &[usize], min_len: usize) -> Result<Contingency> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!("labelings have lengths {} and {}", a.len(), b.len())));
    }
    if a.len() < min_len {
        return Err(Error::Argument(format!("need at least {min_len} labels, got {}", a.len())));
    }
    let mut cells = BTreeMap::new();
    let mut rows = BTreeMap::new();
    let mut cols = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *cells.entry((x, y)).or_insert(0) += 1;
        *rows.entry(x).or_insert(0) += 1;
        *cols.entry(y).or_insert(0) += 1;
    }
    Ok(Contingency { n: a.len(), cells, rows, cols })
}

fn entropy(marginal: &BTreeMap<usize, usize>, n: f64) -> f64 {
    marginal
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information with the arithmetic mean of the two
/// entropies. Two constant labelings score 1; exactly one constant scores 0.
pub fn nmi(a: &[usize], b: &[usize]) -> Result<f64> {
    let t = contingency(a, b, 1)?;
    let n = t.n as f64;
    let (ha, hb) = (entropy(&t.rows, n), entropy(&t.cols, n));
    if t.rows.len() == 1 && t.cols.len() == 1 {
        return Ok(1.0);
    }
    if t.rows.len() == 1 || t.cols.len() == 1 {
        return Ok(0.0);
    }
    // Same partition up to relabeling: every class meets exactly one class.
    if t.cells.len() == t.rows.len() && t.cells.len() == t.cols.len() {
        return Ok(1.0);
    }
    let mi: f64 = t
        .cells
        .iter()
        .map(|(&(x, y), &c)| {
            let c = c as f64;
            c / n * (n * c / (t.rows[&x] as f64 * t.cols[&y] as f64)).ln()
        })
        .sum();
    Ok((mi / ((ha + hb) / 2.0)).clamp(0.0, 1.0))
}

fn pairs(c: usize) -> f64 {
    let c = c as f64;
    c * (c - 1.0) / 2.0
}

/// Adjusted Rand index under the permutation model. Identical trivial
/// partitions (where the index is 0/0) score 1.
pub fn adjusted_rand(a: &[usize], b: &[usize]) -> Result<f64> {
    let t = contingency(a, b, 2)?;
    let index: f64 = t.cells.values().map(|&c| pairs(c)).sum();
    let sum_a: f64 = t.rows.values().map(|&c| pairs(c)).sum();
    let sum_b: f64 = t.cols.values().map(|&c| pairs(c)).sum();
    let expected = sum_a * sum_b / pairs(t.n);
    let max = (sum_a + sum_b) / 2.0;
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}
