//! k-means over documents with the KL divergence: each document is one
//! point (its word counts), each cluster a smoothed word distribution.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::model::{TopicMatrix, DEFAULT_GAMMA};

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansConfig {
    pub k: usize,
    pub seed: u64,
    pub max_iters: usize,
    pub gamma: f64,
}

impl KMeansConfig {
    pub fn new(k: usize) -> Self {
        KMeansConfig { k, seed: 0, max_iters: 100, gamma: DEFAULT_GAMMA }
    }
}

#[derive(Debug, Clone)]
pub struct KMeansResult {
    pub doc_labels: Vec<usize>,
    pub psi: TopicMatrix,
    /// `sum_j min_i sum_t -ln psi[i][w_jt]` at each assignment step.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
}

impl KMeansResult {
    /// Every token inherits its document's cluster.
    pub fn token_labels(&self, corpus: &Corpus) -> Vec<Vec<usize>> {
        corpus.docs().iter().zip(&self.doc_labels).map(|(d, &c)| vec![c; d.len()]).collect()
    }
}

/// Smoothed rows from per-cluster word counts; clusters without tokens get a
/// uniform row.
fn centroids(k: usize, v: usize, counts: &[f64], totals: &[f64], gamma: f64) -> Result<TopicMatrix> {
    let mut probs = Vec::with_capacity(k * v);
    for i in 0..k {
        let denom = totals[i] + gamma * v as f64;
        if denom > 0.0 {
            probs.extend(counts[i * v..(i + 1) * v].iter().map(|&c| (c + gamma) / denom));
        } else {
            probs.extend(std::iter::repeat_n(1.0 / v as f64, v));
        }
    }
    TopicMatrix::from_probabilities(k, v, probs, gamma)
}

fn doc_cost(words: &[(usize, usize)], psi: &TopicMatrix, i: usize) -> f64 {
    words.iter().map(|&(w, c)| c as f64 * psi.distance(w, i)).sum()
}

pub fn kl_kmeans_fit(corpus: &Corpus, config: &KMeansConfig) -> Result<KMeansResult> {
    let k = config.k;
    if k == 0 {
        return Err(Error::Argument("K must be at least 1".into()));
    }
    if config.max_iters == 0 {
        return Err(Error::Argument("max_iters must be at least 1".into()));
    }
    if !(config.gamma >= 0.0 && config.gamma.is_finite()) {
        return Err(Error::Argument(format!("gamma must be finite and >= 0, got {}", config.gamma)));
    }
    let (m, v) = (corpus.num_docs(), corpus.vocab_size());
    let words: Vec<Vec<(usize, usize)>> = corpus.docs().iter().map(|d| d.word_counts()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut counts = vec![0.0; k * v];
    let mut totals = vec![0.0; k];
    for (i, j) in sample(&mut rng, m, k.min(m)).into_iter().enumerate() {
        for &(w, c) in &words[j] {
            counts[i * v + w] += c as f64;
            totals[i] += c as f64;
        }
    }
    let mut psi = centroids(k, v, &counts, &totals, config.gamma)?;

    let mut labels = vec![usize::MAX; m];
    let mut trace = Vec::new();
    let mut iterations = 0;
    for _ in 0..config.max_iters {
        iterations += 1;
        let assigned: Vec<(usize, f64)> = words
            .par_iter()
            .map(|wc| {
                let mut best = (0, f64::INFINITY);
                for i in 0..k {
                    let cost = doc_cost(wc, &psi, i);
                    if cost < best.1 {
                        best = (i, cost);
                    }
                }
                if best.1 == f64::INFINITY {
                    best.0 = 0;
                }
                best
            })
            .collect();
        trace.push(assigned.iter().map(|&(_, c)| c).sum());
        let mut new_labels: Vec<usize> = assigned.iter().map(|&(i, _)| i).collect();

        // Refill empty clusters with the worst-fitting documents.
        let mut sizes = vec![0usize; k];
        new_labels.iter().for_each(|&i| sizes[i] += 1);
        let mut by_fit: Vec<usize> = (0..m).collect();
        by_fit.sort_by(|&a, &b| assigned[b].1.total_cmp(&assigned[a].1).then(a.cmp(&b)));
        let mut donors = by_fit.into_iter();
        for i in 0..k {
            if sizes[i] > 0 {
                continue;
            }
            for j in donors.by_ref() {
                if sizes[new_labels[j]] > 1 {
                    sizes[new_labels[j]] -= 1;
                    new_labels[j] = i;
                    sizes[i] = 1;
                    break;
                }
            }
        }

        let changed = new_labels != labels;
        labels = new_labels;
        counts.iter_mut().for_each(|c| *c = 0.0);
        totals.iter_mut().for_each(|c| *c = 0.0);
        for (j, wc) in words.iter().enumerate() {
            let i = labels[j];
            for &(w, c) in wc {
                counts[i * v + w] += c as f64;
                totals[i] += c as f64;
            }
        }
        psi = centroids(k, v, &counts, &totals, config.gamma)?;
        if !changed {
            break;
        }
    }
    Ok(KMeansResult { doc_labels: labels, psi, objective_trace: trace, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Document, Vocabulary};
    use crate::synthgen::{generate_lda_corpus, LdaGenSpec};

    #[test]
    fn single_cluster_is_global_distribution() {
        let docs = vec![Document::new(vec![0, 0, 1]), Document::new(vec![2, 0])];
        let corpus = Corpus::new(docs, Vocabulary::synthetic(3).unwrap()).unwrap();
        let gamma = 0.01;
        let r = kl_kmeans_fit(&corpus, &KMeansConfig { gamma, ..KMeansConfig::new(1) }).unwrap();
        let denom = 5.0 + 3.0 * gamma;
        for (u, c) in [3.0, 1.0, 1.0].into_iter().enumerate() {
            assert!((r.psi.prob(0, u) - (c + gamma) / denom).abs() < 1e-12);
        }
    }

    #[test]
    fn disjoint_documents_are_separated() {
        let docs = vec![Document::new(vec![0, 1, 0]), Document::new(vec![2, 3, 3])];
        let corpus = Corpus::new(docs, Vocabulary::synthetic(4).unwrap()).unwrap();
        for seed in 0..5 {
            let r = kl_kmeans_fit(&corpus, &KMeansConfig { seed, gamma: 1e-9, ..KMeansConfig::new(2) }).unwrap();
            assert_ne!(r.doc_labels[0], r.doc_labels[1]);
            let (a, b) = (r.doc_labels[0], r.doc_labels[1]);
            assert!(r.psi.prob(a, 2) + r.psi.prob(a, 3) < 1e-6);
            assert!(r.psi.prob(b, 0) + r.psi.prob(b, 1) < 1e-6);
        }
    }

    #[test]
    fn objective_never_increases() {
        for seed in 0..5 {
            let spec = LdaGenSpec { docs: 80, topics: 5, vocab: 50, alpha: 0.1, beta: 0.1, doc_len: 40, seed };
            let corpus = generate_lda_corpus(&spec).unwrap().0;
            let cfg = KMeansConfig { seed, gamma: 1e-9, max_iters: 50, ..KMeansConfig::new(5) };
            let r = kl_kmeans_fit(&corpus, &cfg).unwrap();
            for w in r.objective_trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-6, "{} -> {}", w[0], w[1]);
            }
            assert!(r.doc_labels.iter().all(|&c| c < 5));
        }
    }
}
