//! Collapsed Gibbs sampling for LDA with symmetric priors.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::model::{TopicMatrix, TopicState};
use crate::sva::init_random;
use crate::synthgen::sample_cumulative;

/// Offset between the label-initialization stream and the sampling stream.
const SAMPLER_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Clone, PartialEq)]
pub struct CgsConfig {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub burnin: usize,
    pub n_samples: usize,
    pub thinning: usize,
    pub seed: u64,
    /// Warm-start labels; uniform random labels when absent.
    pub init: Option<Vec<Vec<usize>>>,
}

impl CgsConfig {
    /// Desk-scale schedule: 500 burn-in sweeps, 5 samples, thinning 10.
    pub fn new(k: usize, alpha: f64, beta: f64) -> Self {
        CgsConfig { k, alpha, beta, burnin: 500, n_samples: 5, thinning: 10, seed: 0, init: None }
    }

    /// 3000 burn-in sweeps, 30 samples, thinning 10.
    pub fn full_schedule(k: usize, alpha: f64, beta: f64) -> Self {
        CgsConfig { burnin: 3000, n_samples: 30, thinning: 10, ..Self::new(k, alpha, beta) }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Argument("K must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Argument(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::Argument(format!("beta must be positive, got {}", self.beta)));
        }
        if self.n_samples == 0 || self.thinning == 0 {
            return Err(Error::Argument("n_samples and thinning must be at least 1".into()));
        }
        Ok(())
    }
}

/// Labels and topic counts recorded after one sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct CgsSample {
    pub index: usize,
    /// Sweeps completed when the sample was taken.
    pub sweep: usize,
    pub labels: Vec<Vec<usize>>,
    pub k: usize,
    pub v: usize,
    pub topic_word: Vec<u32>,
    pub topic_totals: Vec<usize>,
}

impl CgsSample {
    pub fn flat_labels(&self) -> Vec<usize> {
        self.labels.iter().flatten().copied().collect()
    }
}

/// Posterior-mean topic estimate `(c_iu + beta) / (n_i + beta V)`.
pub fn estimate_psi_from_sample(sample: &CgsSample, beta: f64) -> Result<TopicMatrix> {
    TopicMatrix::from_counts(sample.k, sample.v, &sample.topic_word, &sample.topic_totals, beta)
}

/// A single Gibbs chain that can be advanced one sweep at a time.
#[derive(Debug, Clone)]
pub struct CgsSampler {
    state: TopicState,
    alpha: f64,
    beta: f64,
    rng: ChaCha8Rng,
    cumulative: Vec<f64>,
    sweeps: usize,
}

impl CgsSampler {
    pub fn new(corpus: &Corpus, config: &CgsConfig) -> Result<Self> {
        config.validate()?;
        let state = match &config.init {
            Some(labels) => TopicState::from_labels(corpus, config.k, labels.clone(), 0.0)?,
            None => init_random(corpus, config.k, config.seed)?,
        };
        Ok(CgsSampler {
            state,
            alpha: config.alpha,
            beta: config.beta,
            rng: ChaCha8Rng::seed_from_u64(config.seed ^ SAMPLER_STREAM),
            cumulative: vec![0.0; config.k],
            sweeps: 0,
        })
    }

    /// Resample every token once, document-major.
    pub fn sweep(&mut self, corpus: &Corpus) {
        let k = self.state.num_topics();
        let beta_v = self.beta * self.state.vocab_size() as f64;
        for (j, doc) in corpus.docs().iter().enumerate() {
            for (t, &w) in doc.tokens.iter().enumerate() {
                let old = self.state.doc_labels(j)[t];
                self.state.remove_token(j, w, old);
                let mut acc = 0.0;
                for i in 0..k {
                    let weight = (self.state.doc_topic_count(j, i) as f64 + self.alpha)
                        * (self.state.topic_word_count(i, w) as f64 + self.beta)
                        / (self.state.topic_totals()[i] as f64 + beta_v);
                    debug_assert!(weight > 0.0 && weight.is_finite(), "bad conditional weight {weight}");
                    acc += weight;
                    self.cumulative[i] = acc;
                }
                let new = sample_cumulative(&self.cumulative, &mut self.rng);
                self.state.add_token(j, w, new);
                self.state.write_label(j, t, new);
            }
        }
        self.sweeps += 1;
        #[cfg(debug_assertions)]
        if let Err(e) = self.state.verify_counts(corpus) {
            panic!("gibbs bookkeeping drifted: {e}");
        }
    }

    pub fn state(&self) -> &TopicState {
        &self.state
    }

    pub fn labels(&self) -> &[Vec<usize>] {
        self.state.labels()
    }

    pub fn sweeps_done(&self) -> usize {
        self.sweeps
    }

    pub fn snapshot(&self, index: usize) -> CgsSample {
        CgsSample {
            index,
            sweep: self.sweeps,
            labels: self.state.labels().to_vec(),
            k: self.state.num_topics(),
            v: self.state.vocab_size(),
            topic_word: self.state.topic_word_counts().to_vec(),
            topic_totals: self.state.topic_totals().to_vec(),
        }
    }
}

/// Burn in, then record `n_samples` samples `thinning` sweeps apart.
pub fn cgs_fit(corpus: &Corpus, config: &CgsConfig) -> Result<Vec<CgsSample>> {
    let mut sampler = CgsSampler::new(corpus, config)?;
    for _ in 0..config.burnin {
        sampler.sweep(corpus);
    }
    let mut samples = Vec::with_capacity(config.n_samples);
    for index in 0..config.n_samples {
        for _ in 0..config.thinning {
            sampler.sweep(corpus);
        }
        samples.push(sampler.snapshot(index));
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Document, Vocabulary};
    use crate::model::update_topics;
    use statrs::function::gamma::ln_gamma;

    fn tiny_corpus() -> Corpus {
        let docs = vec![Document::new(vec![0, 0, 1]), Document::new(vec![2, 1, 2])];
        Corpus::new(docs, Vocabulary::synthetic(3).unwrap()).unwrap()
    }

    #[test]
    fn single_topic_keeps_everything_on_zero() {
        let corpus = tiny_corpus();
        let cfg = CgsConfig { burnin: 3, n_samples: 2, thinning: 2, ..CgsConfig::new(1, 0.1, 0.1) };
        for s in cgs_fit(&corpus, &cfg).unwrap() {
            assert!(s.flat_labels().iter().all(|&z| z == 0));
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let corpus = tiny_corpus();
        let cfg = CgsConfig { burnin: 10, ..CgsConfig::new(3, 0.5, 0.1).with_seed(7) };
        assert_eq!(cgs_fit(&corpus, &cfg).unwrap(), cgs_fit(&corpus, &cfg).unwrap());
    }

    #[test]
    fn psi_estimate_matches_update_topics() {
        let corpus = tiny_corpus();
        let cfg = CgsConfig { burnin: 2, n_samples: 1, thinning: 1, ..CgsConfig::new(2, 0.5, 0.3) };
        let sample = &cgs_fit(&corpus, &cfg).unwrap()[0];
        let state = TopicState::from_labels(&corpus, 2, sample.labels.clone(), 0.0).unwrap();
        assert_eq!(estimate_psi_from_sample(sample, 0.3).unwrap(), update_topics(&state, 0.3).unwrap());
    }

    #[test]
    fn psi_estimate_edge_rows() {
        let sample = CgsSample {
            index: 0,
            sweep: 0,
            labels: vec![],
            k: 2,
            v: 4,
            topic_word: vec![5, 0, 0, 0, 0, 0, 0, 0],
            topic_totals: vec![5, 0],
        };
        let psi = estimate_psi_from_sample(&sample, 1e-12).unwrap();
        assert!((psi.prob(0, 0) - 1.0).abs() < 1e-9);
        for u in 0..4 {
            assert!((psi.prob(1, u) - 0.25).abs() < 1e-12);
        }
    }

    fn ln_joint(corpus: &Corpus, labels: &[Vec<usize>], k: usize, alpha: f64, beta: f64) -> f64 {
        let state = TopicState::from_labels(corpus, k, labels.to_vec(), 0.0).unwrap();
        let v = corpus.vocab_size();
        let mut lp = 0.0;
        for j in 0..corpus.num_docs() {
            lp += ln_gamma(k as f64 * alpha) - ln_gamma(k as f64 * alpha + corpus.doc(j).len() as f64);
            for i in 0..k {
                lp += ln_gamma(alpha + state.doc_topic_count(j, i) as f64) - ln_gamma(alpha);
            }
        }
        for i in 0..k {
            lp += ln_gamma(v as f64 * beta) - ln_gamma(v as f64 * beta + state.topic_totals()[i] as f64);
            for u in 0..v {
                lp += ln_gamma(beta + state.topic_word_count(i, u) as f64) - ln_gamma(beta);
            }
        }
        lp
    }

    #[test]
    fn matches_enumerated_posterior() {
        let corpus = tiny_corpus();
        let (k, alpha, beta) = (2, 0.5, 0.2);
        let encode = |labels: &[Vec<usize>]| labels.iter().flatten().fold(0usize, |acc, &z| acc * 2 + z);
        let decode = |code: usize| -> Vec<Vec<usize>> {
            let bits: Vec<usize> = (0..6).rev().map(|b| (code >> b) & 1).collect();
            vec![bits[..3].to_vec(), bits[3..].to_vec()]
        };
        let ln_p: Vec<f64> = (0..64).map(|c| ln_joint(&corpus, &decode(c), k, alpha, beta)).collect();
        let max = ln_p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = ln_p.iter().map(|&l| (l - max).exp()).sum();
        let exact: Vec<f64> = ln_p.iter().map(|&l| (l - max).exp() / z).collect();

        let cfg = CgsConfig::new(k, alpha, beta).with_seed(3);
        let mut sampler = CgsSampler::new(&corpus, &cfg).unwrap();
        for _ in 0..1000 {
            sampler.sweep(&corpus);
        }
        let sweeps = 1_000_000;
        let mut freq = vec![0usize; 64];
        for _ in 0..sweeps {
            sampler.sweep(&corpus);
            freq[encode(sampler.labels())] += 1;
        }
        let tv: f64 =
            0.5 * freq.iter().zip(&exact).map(|(&f, &p)| (f as f64 / sweeps as f64 - p).abs()).sum::<f64>();
        assert!(tv < 0.02, "total variation {tv}");
    }
}
