//! Held-out word log-likelihood under a fixed topic matrix.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::model::TopicMatrix;
use crate::sva::{ufl_assign_all, TokenOrder};
use crate::synthgen::sample_cumulative;

fn check_heldout(psi: &TopicMatrix, heldout: &Corpus) -> Result<()> {
    if heldout.num_tokens() == 0 {
        return Err(Error::Degenerate("held-out set has no tokens".into()));
    }
    if heldout.vocab_size() != psi.vocab_size() {
        return Err(Error::Dimension(format!(
            "held-out vocabulary has {} terms, topics have {}",
            heldout.vocab_size(),
            psi.vocab_size()
        )));
    }
    Ok(())
}

/// Mean per-token `ln psi[z][w]` after one word-assignment pass with `psi`
/// frozen.
pub fn hard_predictive_ll(psi: &TopicMatrix, heldout: &Corpus, lambda: f64) -> Result<f64> {
    check_heldout(psi, heldout)?;
    let (labels, _) = ufl_assign_all(heldout, psi, TokenOrder::Distance, lambda);
    let total: f64 = heldout
        .docs()
        .iter()
        .zip(&labels)
        .flat_map(|(d, z)| d.tokens.iter().zip(z))
        .map(|(&w, &i)| -psi.distance(w, i))
        .sum();
    Ok(total / heldout.num_tokens() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldInConfig {
    pub alpha: f64,
    pub sweeps: usize,
    pub seed: u64,
}

impl FoldInConfig {
    pub fn new(alpha: f64) -> Self {
        FoldInConfig { alpha, sweeps: 200, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoftLl {
    /// Mean per-token `ln sum_i theta[i] psi[i][w]`.
    pub mean: f64,
    /// Mean per-token `ln max_i theta[i] psi[i][w]` for the same `theta`.
    pub max_term: f64,
}

/// Topic proportions of one document by Gibbs fold-in with `psi` frozen,
/// taken from the final sweep.
pub fn fold_in_theta<R: Rng + ?Sized>(tokens: &[usize], psi: &TopicMatrix, alpha: f64, sweeps: usize, rng: &mut R) -> Vec<f64> {
    let k = psi.num_topics();
    let mut labels: Vec<usize> = tokens.iter().map(|_| rng.random_range(0..k)).collect();
    let mut counts = vec![0usize; k];
    labels.iter().for_each(|&z| counts[z] += 1);
    let mut cumulative = vec![0.0; k];
    for _ in 0..sweeps {
        for (t, &w) in tokens.iter().enumerate() {
            counts[labels[t]] -= 1;
            let mut acc = 0.0;
            for i in 0..k {
                acc += (counts[i] as f64 + alpha) * psi.prob(i, w);
                cumulative[i] = acc;
            }
            let z = sample_cumulative(&cumulative, rng);
            counts[z] += 1;
            labels[t] = z;
        }
    }
    let denom = tokens.len() as f64 + k as f64 * alpha;
    counts.iter().map(|&c| (c as f64 + alpha) / denom).collect()
}

/// Mixture log-likelihood with per-document proportions from Gibbs fold-in.
/// Documents are independent; each gets its own seeded stream.
pub fn soft_predictive_ll(psi: &TopicMatrix, heldout: &Corpus, config: &FoldInConfig) -> Result<SoftLl> {
    check_heldout(psi, heldout)?;
    if !(config.alpha > 0.0 && config.alpha.is_finite()) {
        return Err(Error::Argument(format!("alpha must be positive, got {}", config.alpha)));
    }
    let k = psi.num_topics();
    let per_doc: Vec<(f64, f64)> = heldout
        .docs()
        .par_iter()
        .enumerate()
        .map(|(j, d)| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(j as u64);
            let theta = fold_in_theta(&d.tokens, psi, config.alpha, config.sweeps, &mut rng);
            let mut sum_ll = 0.0;
            let mut max_ll = 0.0;
            for &w in &d.tokens {
                let mut mix = 0.0;
                let mut best = 0.0f64;
                for i in 0..k {
                    let term = theta[i] * psi.prob(i, w);
                    mix += term;
                    best = best.max(term);
                }
                sum_ll += mix.ln();
                max_ll += best.ln();
            }
            (sum_ll, max_ll)
        })
        .collect();
    let n = heldout.num_tokens() as f64;
    let (sum, max) = per_doc.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    Ok(SoftLl { mean: sum / n, max_term: max / n })
}
