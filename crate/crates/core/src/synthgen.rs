//! Synthetic corpora from the LDA generative process, with ground truth.
//!
//! One ChaCha stream is consumed in a fixed order: topic rows, then
//! document proportions, then tokens document-major.

use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::corpus::{write_corpus, Corpus, Document, Vocabulary};
use crate::error::{Error, Result};
use crate::textio;

pub const PSI_TRUE_FILE: &str = "psi_true.txt";
pub const THETA_TRUE_FILE: &str = "theta_true.txt";
pub const Z_TRUE_FILE: &str = "z_true.txt";

#[derive(Debug, Clone, PartialEq)]
pub struct LdaGenSpec {
    pub docs: usize,
    pub topics: usize,
    pub vocab: usize,
    pub alpha: f64,
    pub beta: f64,
    pub doc_len: usize,
    pub seed: u64,
}

impl LdaGenSpec {
    /// 20 topics over 2000 words, `alpha = 0.04`, `beta = 0.05`, 150 tokens
    /// per document.
    pub fn synth_a(docs: usize, seed: u64) -> Self {
        LdaGenSpec { docs, topics: 20, vocab: 2000, alpha: 0.04, beta: 0.05, doc_len: 150, seed }
    }

    /// 50 topics over 3000 words, `alpha = 0.02`, `beta = 0.01`, 200 tokens
    /// per document.
    pub fn synth_b(docs: usize, seed: u64) -> Self {
        LdaGenSpec { docs, topics: 50, vocab: 3000, alpha: 0.02, beta: 0.01, doc_len: 200, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.docs == 0 || self.topics == 0 || self.vocab == 0 || self.doc_len == 0 {
            return Err(Error::Argument("docs, topics, vocab and doc_len must all be >= 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Argument(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::Argument(format!("beta must be positive, got {}", self.beta)));
        }
        Ok(())
    }

    pub fn key_values(&self) -> Vec<(String, String)> {
        vec![
            ("docs".into(), self.docs.to_string()),
            ("topics".into(), self.topics.to_string()),
            ("vocab".into(), self.vocab.to_string()),
            ("alpha".into(), self.alpha.to_string()),
            ("beta".into(), self.beta.to_string()),
            ("doc_len".into(), self.doc_len.to_string()),
            ("seed".into(), self.seed.to_string()),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    /// `K x V` row-major.
    pub psi_true: Vec<f64>,
    /// `M x K` row-major.
    pub theta_true: Vec<f64>,
    pub z_true: Vec<Vec<usize>>,
    pub spec: LdaGenSpec,
}

impl GroundTruth {
    pub fn psi_row(&self, i: usize) -> &[f64] {
        &self.psi_true[i * self.spec.vocab..(i + 1) * self.spec.vocab]
    }

    pub fn theta_row(&self, j: usize) -> &[f64] {
        &self.theta_true[j * self.spec.topics..(j + 1) * self.spec.topics]
    }

    pub fn flat_labels(&self) -> Vec<usize> {
        self.z_true.iter().flatten().copied().collect()
    }

    /// Number of distinct topics used by each document under `z_true`.
    pub fn topics_per_doc(&self) -> Vec<usize> {
        self.z_true
            .iter()
            .map(|z| {
                let mut seen = vec![false; self.spec.topics];
                z.iter().for_each(|&i| seen[i] = true);
                seen.iter().filter(|&&s| s).count()
            })
            .collect()
    }
}

/// `ln` of a `Gamma(shape, 1)` variate. Shapes below one use
/// `G(a) = G(a + 1) * U^(1/a)` evaluated in log space.
fn ln_gamma_variate<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape >= 1.0 {
        let g: f64 = Gamma::new(shape, 1.0).expect("valid gamma shape").sample(rng);
        g.ln()
    } else {
        let g: f64 = Gamma::new(shape + 1.0, 1.0).expect("valid gamma shape").sample(rng);
        // (0, 1]
        let u: f64 = 1.0 - rng.random::<f64>();
        g.ln() + u.ln() / shape
    }
}

/// Draw from a symmetric Dirichlet by normalizing Gamma variates. Entries
/// that underflow are floored at the smallest positive normal `f64`.
pub fn sample_dirichlet_symmetric<R: Rng + ?Sized>(dim: usize, conc: f64, rng: &mut R) -> Vec<f64> {
    assert!(dim >= 1 && conc > 0.0, "dirichlet requires dim >= 1 and conc > 0");
    let logs: Vec<f64> = (0..dim).map(|_| ln_gamma_variate(conc, rng)).collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logs.iter().map(|&l| (l - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    for x in out.iter_mut() {
        *x = (*x / sum).max(f64::MIN_POSITIVE);
    }
    out
}

/// Inverse-CDF draw from an unnormalized weight vector given its cumulative
/// sums.
pub(crate) fn sample_cumulative<R: Rng + ?Sized>(cumulative: &[f64], rng: &mut R) -> usize {
    let total = *cumulative.last().expect("nonempty distribution");
    let target = rng.random::<f64>() * total;
    let idx = cumulative.partition_point(|&c| c <= target);
    idx.min(cumulative.len() - 1)
}

fn cumulative(weights: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    weights
        .iter()
        .map(|&w| {
            acc += w;
            acc
        })
        .collect()
}

pub fn generate_lda_corpus(spec: &LdaGenSpec) -> Result<(Corpus, GroundTruth)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (m, k, v) = (spec.docs, spec.topics, spec.vocab);

    let mut psi_true = Vec::with_capacity(k * v);
    for _ in 0..k {
        psi_true.extend(sample_dirichlet_symmetric(v, spec.beta, &mut rng));
    }
    let mut theta_true = Vec::with_capacity(m * k);
    for _ in 0..m {
        theta_true.extend(sample_dirichlet_symmetric(k, spec.alpha, &mut rng));
    }

    let psi_cdf: Vec<Vec<f64>> = psi_true.chunks(v).map(cumulative).collect();
    let mut docs = Vec::with_capacity(m);
    let mut z_true = Vec::with_capacity(m);
    for j in 0..m {
        let theta_cdf = cumulative(&theta_true[j * k..(j + 1) * k]);
        let mut tokens = Vec::with_capacity(spec.doc_len);
        let mut labels = Vec::with_capacity(spec.doc_len);
        for _ in 0..spec.doc_len {
            let z = sample_cumulative(&theta_cdf, &mut rng);
            let w = sample_cumulative(&psi_cdf[z], &mut rng);
            labels.push(z);
            tokens.push(w);
        }
        docs.push(Document::new(tokens));
        z_true.push(labels);
    }
    let corpus = Corpus::new(docs, Vocabulary::synthetic(v)?)?;
    Ok((corpus, GroundTruth { psi_true, theta_true, z_true, spec: spec.clone() }))
}

/// Write the corpus plus `psi_true.txt`, `theta_true.txt` and `z_true.txt`
/// under `dir`. Each sidecar echoes the generator spec as header lines.
pub fn write_generated(dir: &Path, corpus: &Corpus, truth: &GroundTruth) -> Result<()> {
    write_corpus(corpus, dir)?;
    let header = truth.spec.key_values();
    textio::save_matrix(&dir.join(PSI_TRUE_FILE), &header, truth.spec.vocab, &truth.psi_true)?;
    textio::save_matrix(&dir.join(THETA_TRUE_FILE), &header, truth.spec.topics, &truth.theta_true)?;
    textio::save_labels(&dir.join(Z_TRUE_FILE), &header, &truth.z_true)
}
