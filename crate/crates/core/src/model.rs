//! Hard-assignment topic model state and objective.
//!
//! The objective minimized by every fitter in [`crate::sva`] is
//!
//! ```text
//!   sum_j sum_t -ln psi[z_jt][w_jt]  +  lambda * sum_j K_j+
//! ```
//!
//! where `K_j+` is the number of distinct topics used by document `j`. Topic
//! rows are re-estimated from counts with a pseudocount `gamma`:
//! `psi[i][u] = (c_iu + gamma) / (n_i + gamma * V)`.

use std::path::Path;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::textio::{self, header_value};

/// Distance of a token to a topic that assigns its word zero probability.
pub const INFINITE_DISTANCE: f64 = f64::INFINITY;

/// Default pseudocount used when re-estimating topics.
pub const DEFAULT_GAMMA: f64 = 0.01;

/// Row-stochastic `K x V` topic-word matrix with cached `-ln psi`.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicMatrix {
    k: usize,
    v: usize,
    gamma: f64,
    probs: Vec<f64>,
    neg_log: Vec<f64>,
}

impl TopicMatrix {
    /// Wrap a dense row-major matrix. Rows must be nonnegative and sum to 1
    /// within `1e-9`.
    pub fn from_probabilities(k: usize, v: usize, probs: Vec<f64>, gamma: f64) -> Result<Self> {
        if k == 0 || v == 0 {
            return Err(Error::Dimension(format!("topic matrix must be nonempty, got {k}x{v}")));
        }
        if probs.len() != k * v {
            return Err(Error::Dimension(format!(
                "expected {k}x{v}={} entries, got {}",
                k * v,
                probs.len()
            )));
        }
        for (i, row) in probs.chunks(v).enumerate() {
            if let Some(x) = row.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
                return Err(Error::Domain(format!("row {i} has invalid entry {x}")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::Domain(format!("row {i} sums to {s}, not 1")));
            }
        }
        Ok(Self::from_parts(k, v, probs, gamma))
    }

    fn from_parts(k: usize, v: usize, probs: Vec<f64>, gamma: f64) -> Self {
        let neg_log = probs
            .iter()
            .map(|&p| if p > 0.0 { -p.ln() } else { INFINITE_DISTANCE })
            .collect();
        TopicMatrix { k, v, gamma, probs, neg_log }
    }

    /// Smoothed estimate from a `K x V` count matrix and per-topic totals.
    pub fn from_counts(k: usize, v: usize, counts: &[u32], totals: &[usize], gamma: f64) -> Result<Self> {
        debug_assert_eq!(counts.len(), k * v);
        debug_assert_eq!(totals.len(), k);
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::Argument(format!("smoothing must be finite and nonnegative, got {gamma}")));
        }
        let mut probs = vec![0.0; k * v];
        let gamma_v = gamma * v as f64;
        for i in 0..k {
            let denom = totals[i] as f64 + gamma_v;
            if denom <= 0.0 {
                return Err(Error::DegenerateTopic { topic: i });
            }
            let row = &counts[i * v..(i + 1) * v];
            for (p, &c) in probs[i * v..(i + 1) * v].iter_mut().zip(row) {
                *p = (c as f64 + gamma) / denom;
            }
        }
        Ok(Self::from_parts(k, v, probs, gamma))
    }

    pub fn num_topics(&self) -> usize {
        self.k
    }

    pub fn vocab_size(&self) -> usize {
        self.v
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn prob(&self, topic: usize, word: usize) -> f64 {
        self.probs[topic * self.v + word]
    }

    pub fn row(&self, topic: usize) -> &[f64] {
        &self.probs[topic * self.v..(topic + 1) * self.v]
    }

    pub fn neg_log_row(&self, topic: usize) -> &[f64] {
        &self.neg_log[topic * self.v..(topic + 1) * self.v]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    /// `-ln psi[topic][word]`; [`INFINITE_DISTANCE`] when the entry is zero.
    #[inline]
    pub fn distance(&self, word: usize, topic: usize) -> f64 {
        self.neg_log[topic * self.v + word]
    }

    /// Matrix with rows reordered so that row `i` of the result is row
    /// `perm[i]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> TopicMatrix {
        let mut probs = Vec::with_capacity(self.probs.len());
        for &src in perm {
            probs.extend_from_slice(self.row(src));
        }
        Self::from_parts(self.k, self.v, probs, self.gamma)
    }

    pub fn save(&self, path: &Path, extra: &[(String, String)]) -> Result<()> {
        let mut header = vec![
            ("topics".to_string(), self.k.to_string()),
            ("vocab".to_string(), self.v.to_string()),
            ("gamma".to_string(), self.gamma.to_string()),
        ];
        header.extend_from_slice(extra);
        textio::save_matrix(path, &header, self.v, &self.probs)
    }

    pub fn load(path: &Path) -> Result<TopicMatrix> {
        let m = textio::load_matrix(path)?;
        let gamma = header_value(&m.header, "gamma")
            .and_then(|g| g.parse().ok())
            .unwrap_or(0.0);
        TopicMatrix::from_probabilities(m.rows, m.cols, m.data, gamma)
    }
}

/// `-ln psi[topic][word]`.
pub fn token_topic_distance(psi: &TopicMatrix, word: usize, topic: usize) -> f64 {
    psi.distance(word, topic)
}

/// Per-token topic labels together with every count statistic derived from
/// them.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicState {
    k: usize,
    v: usize,
    lambda: f64,
    labels: Vec<Vec<usize>>,
    /// `M x K`, tokens of document j on topic i.
    doc_topic: Vec<u32>,
    /// `K x V`, tokens of word u on topic i.
    topic_word: Vec<u32>,
    topic_totals: Vec<usize>,
    /// `K_j+` per document.
    doc_used: Vec<usize>,
}

impl TopicState {
    pub fn from_labels(corpus: &Corpus, k: usize, labels: Vec<Vec<usize>>, lambda: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::Argument("topic count must be at least 1".into()));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::Argument(format!("lambda must be finite and nonnegative, got {lambda}")));
        }
        if labels.len() != corpus.num_docs() {
            return Err(Error::Dimension(format!(
                "labels cover {} documents, corpus has {}",
                labels.len(),
                corpus.num_docs()
            )));
        }
        for (j, (z, d)) in labels.iter().zip(corpus.docs()).enumerate() {
            if z.len() != d.len() {
                return Err(Error::Dimension(format!(
                    "document {j} has {} tokens but {} labels",
                    d.len(),
                    z.len()
                )));
            }
            if let Some(&bad) = z.iter().find(|&&i| i >= k) {
                return Err(Error::Dimension(format!("document {j} has label {bad} >= K={k}")));
            }
        }
        let v = corpus.vocab_size();
        let m = corpus.num_docs();
        let mut state = TopicState {
            k,
            v,
            lambda,
            labels,
            doc_topic: vec![0; m * k],
            topic_word: vec![0; k * v],
            topic_totals: vec![0; k],
            doc_used: vec![0; m],
        };
        state.rebuild_counts(corpus);
        Ok(state)
    }

    /// Recompute all counts from the labels.
    pub(crate) fn rebuild_counts(&mut self, corpus: &Corpus) {
        self.doc_topic.iter_mut().for_each(|c| *c = 0);
        self.topic_word.iter_mut().for_each(|c| *c = 0);
        self.topic_totals.iter_mut().for_each(|c| *c = 0);
        let (k, v) = (self.k, self.v);
        for (j, (z, d)) in self.labels.iter().zip(corpus.docs()).enumerate() {
            let row = &mut self.doc_topic[j * k..(j + 1) * k];
            for (&i, &w) in z.iter().zip(&d.tokens) {
                row[i] += 1;
                self.topic_word[i * v + w] += 1;
                self.topic_totals[i] += 1;
            }
            self.doc_used[j] = row.iter().filter(|&&c| c > 0).count();
        }
    }

    /// Replace every label and rebuild counts. Returns the number of tokens
    /// whose label changed.
    pub(crate) fn replace_labels(&mut self, corpus: &Corpus, labels: Vec<Vec<usize>>) -> usize {
        let changed = self
            .labels
            .iter()
            .zip(&labels)
            .map(|(a, b)| a.iter().zip(b).filter(|(x, y)| x != y).count())
            .sum();
        self.labels = labels;
        self.rebuild_counts(corpus);
        changed
    }

    pub fn num_topics(&self) -> usize {
        self.k
    }

    pub fn vocab_size(&self) -> usize {
        self.v
    }

    pub fn num_docs(&self) -> usize {
        self.labels.len()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn set_lambda(&mut self, lambda: f64) {
        self.lambda = lambda;
    }

    pub fn labels(&self) -> &[Vec<usize>] {
        &self.labels
    }

    pub fn doc_labels(&self, j: usize) -> &[usize] {
        &self.labels[j]
    }

    pub fn into_labels(self) -> Vec<Vec<usize>> {
        self.labels
    }

    /// Labels flattened document-major.
    pub fn flat_labels(&self) -> Vec<usize> {
        self.labels.iter().flatten().copied().collect()
    }

    #[inline]
    pub fn doc_topic_count(&self, j: usize, i: usize) -> u32 {
        self.doc_topic[j * self.k + i]
    }

    pub fn doc_topic_row(&self, j: usize) -> &[u32] {
        &self.doc_topic[j * self.k..(j + 1) * self.k]
    }

    #[inline]
    pub fn topic_word_count(&self, i: usize, u: usize) -> u32 {
        self.topic_word[i * self.v + u]
    }

    pub fn topic_word_counts(&self) -> &[u32] {
        &self.topic_word
    }

    pub fn topic_totals(&self) -> &[usize] {
        &self.topic_totals
    }

    /// `K_j+`.
    pub fn num_used(&self, j: usize) -> usize {
        self.doc_used[j]
    }

    /// `T_j` in ascending topic order.
    pub fn used_topics(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.doc_topic_row(j)
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, _)| i)
    }

    pub fn total_used(&self) -> usize {
        self.doc_used.iter().sum()
    }

    #[inline]
    pub(crate) fn remove_token(&mut self, j: usize, word: usize, topic: usize) {
        let c = &mut self.doc_topic[j * self.k + topic];
        *c -= 1;
        if *c == 0 {
            self.doc_used[j] -= 1;
        }
        self.topic_word[topic * self.v + word] -= 1;
        self.topic_totals[topic] -= 1;
    }

    #[inline]
    pub(crate) fn add_token(&mut self, j: usize, word: usize, topic: usize) {
        let c = &mut self.doc_topic[j * self.k + topic];
        if *c == 0 {
            self.doc_used[j] += 1;
        }
        *c += 1;
        self.topic_word[topic * self.v + word] += 1;
        self.topic_totals[topic] += 1;
    }

    /// Overwrite a label without touching counts; callers pair it with
    /// `remove_token`/`add_token`.
    #[inline]
    pub(crate) fn write_label(&mut self, j: usize, t: usize, topic: usize) {
        self.labels[j][t] = topic;
    }

    /// Set the label of token `t` in document `j`, keeping counts in sync.
    pub fn set_label(&mut self, corpus: &Corpus, j: usize, t: usize, topic: usize) {
        let old = self.labels[j][t];
        if old == topic {
            return;
        }
        let w = corpus.doc(j).tokens[t];
        self.remove_token(j, w, old);
        self.add_token(j, w, topic);
        self.labels[j][t] = topic;
    }

    /// Move every token of document `j` labelled `from` to `to`. Returns the
    /// number of tokens moved.
    pub fn move_mini_topic(&mut self, corpus: &Corpus, j: usize, from: usize, to: usize) -> usize {
        if from == to {
            return 0;
        }
        let words = &corpus.doc(j).tokens;
        let mut moved = 0;
        for t in 0..words.len() {
            if self.labels[j][t] == from {
                self.labels[j][t] = to;
                let w = words[t];
                self.topic_word[from * self.v + w] -= 1;
                self.topic_word[to * self.v + w] += 1;
                moved += 1;
            }
        }
        if moved > 0 {
            let m32 = moved as u32;
            let row = &mut self.doc_topic[j * self.k..(j + 1) * self.k];
            row[from] -= m32;
            if row[to] == 0 {
                self.doc_used[j] += 1;
            }
            row[to] += m32;
            if row[from] == 0 {
                self.doc_used[j] -= 1;
            }
            self.topic_totals[from] -= moved;
            self.topic_totals[to] += moved;
        }
        moved
    }

    /// Check that every maintained count equals a full recount from labels.
    pub fn verify_counts(&self, corpus: &Corpus) -> Result<(), String> {
        let mut fresh = self.clone();
        fresh.rebuild_counts(corpus);
        if fresh.doc_topic != self.doc_topic {
            return Err("document-topic counts drifted".into());
        }
        if fresh.topic_word != self.topic_word {
            return Err("topic-word counts drifted".into());
        }
        if fresh.topic_totals != self.topic_totals {
            return Err("topic totals drifted".into());
        }
        if fresh.doc_used != self.doc_used {
            return Err("used-topic counts drifted".into());
        }
        for i in 0..self.k {
            let row_sum: usize = self.topic_word[i * self.v..(i + 1) * self.v].iter().map(|&c| c as usize).sum();
            if row_sum != self.topic_totals[i] {
                return Err(format!("topic {i} word counts do not sum to its total"));
            }
        }
        Ok(())
    }
}

/// Smoothed topic re-estimation from the state's counts.
pub fn update_topics(state: &TopicState, gamma: f64) -> Result<TopicMatrix> {
    TopicMatrix::from_counts(state.k, state.v, &state.topic_word, &state.topic_totals, gamma)
}

/// Hard-LDA objective of `state` under `psi`.
pub fn compute_objective(state: &TopicState, corpus: &Corpus, psi: &TopicMatrix) -> f64 {
    let mut distortion = 0.0;
    for (z, d) in state.labels.iter().zip(corpus.docs()) {
        for (&i, &w) in z.iter().zip(&d.tokens) {
            distortion += psi.distance(w, i);
        }
    }
    distortion + state.lambda * state.total_used() as f64
}

/// `-ln p(Z | alpha)` for the Dirichlet-multinomial over per-document topic
/// counts, evaluated as
/// `sum_{n<N_j} ln(alpha K + n) - sum_i sum_{n<n_ji} ln(alpha + n)`.
///
/// `alpha` is passed as `ln_alpha` so that values like `exp(-1e6)` stay
/// representable; only the `n = 0` terms involve `ln alpha` directly.
pub fn dirichlet_multinomial_neg_log<'a, I>(doc_counts: I, k: usize, ln_alpha: f64) -> f64
where
    I: IntoIterator<Item = &'a [u32]>,
{
    let alpha = ln_alpha.exp();
    let alpha_k = alpha * k as f64;
    let ln_k = (k as f64).ln();
    let mut total = 0.0;
    for row in doc_counts {
        let n_j: u32 = row.iter().sum();
        if n_j == 0 {
            continue;
        }
        total += ln_alpha + ln_k;
        for n in 1..n_j {
            let n = n as f64;
            total += n.ln() + (alpha_k / n).ln_1p();
        }
        for &c in row {
            if c == 0 {
                continue;
            }
            total -= ln_alpha;
            for n in 1..c {
                let n = n as f64;
                total -= n.ln() + (alpha / n).ln_1p();
            }
        }
    }
    total
}

/// Ratio of the exact Dirichlet-multinomial negative log-likelihood at
/// `alpha = exp(-lambda * eta)` to its asymptote
/// `eta * lambda * sum_j (K_j+ - 1)`.
pub fn verify_lemma1_ratio(state: &TopicState, lambda: f64, eta: f64) -> Result<f64> {
    if !(lambda > 0.0 && eta > 0.0) {
        return Err(Error::Argument("lambda and eta must be positive".into()));
    }
    let excess: usize = state
        .doc_used
        .iter()
        .filter(|&&u| u > 0)
        .map(|&u| u - 1)
        .sum();
    if excess == 0 {
        return Err(Error::Degenerate("every document uses a single topic".into()));
    }
    let rows = (0..state.num_docs()).map(|j| state.doc_topic_row(j));
    let exact = dirichlet_multinomial_neg_log(rows, state.k, -lambda * eta);
    Ok(exact / (eta * lambda * excess as f64))
}

/// Which optimizer a [`FitConfig`] drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Schedule {
    Basic,
    Word,
    WordRefine,
}

impl Schedule {
    pub fn name(self) -> &'static str {
        match self {
            Schedule::Basic => "basic",
            Schedule::Word => "word",
            Schedule::WordRefine => "word-refine",
        }
    }

    pub fn default_iters(self) -> usize {
        match self {
            Schedule::Basic => 100,
            Schedule::Word => 20,
            Schedule::WordRefine => 10,
        }
    }
}

impl std::str::FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "basic" => Ok(Schedule::Basic),
            "word" => Ok(Schedule::Word),
            "word-refine" | "word+refine" | "wr" => Ok(Schedule::WordRefine),
            other => Err(Error::Argument(format!("unknown schedule {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub k: usize,
    pub lambda: f64,
    pub max_iters: usize,
    pub seed: u64,
    pub gamma: f64,
    /// Relative objective change below which a fit stops.
    pub tol: f64,
    pub schedule: Schedule,
}

impl FitConfig {
    pub fn new(schedule: Schedule, k: usize, lambda: f64) -> Self {
        FitConfig {
            k,
            lambda,
            max_iters: schedule.default_iters(),
            seed: 0,
            gamma: DEFAULT_GAMMA,
            tol: 1e-12,
            schedule,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Argument("K must be at least 1".into()));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Argument(format!("lambda must be finite and >= 0, got {}", self.lambda)));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::Argument(format!("gamma must be finite and >= 0, got {}", self.gamma)));
        }
        if self.max_iters == 0 {
            return Err(Error::Argument("max_iters must be at least 1".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::Argument("tol must be >= 0".into()));
        }
        Ok(())
    }
}
