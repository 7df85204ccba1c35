//! Facility-location word assignment for a single document.
//!
//! Topics are facilities with opening cost `lambda` (zero once opened in the
//! document); tokens are clients at distance `-ln psi[i][w]`. Each round
//! picks the topic `i` and unmarked token set `T` minimizing
//! `(f_i + sum_{t in T} d(t, i)) / |T|`, assigns `T` to `i` and opens `i`.
//!
//! For a fixed topic and size the best `T` is the `|T|` nearest unmarked
//! tokens. Tokens at equal distance form runs; the score is monotone inside a
//! run, so only run ends are candidate sizes (ties prefer the larger set,
//! which always sits at a run end). Scores are accumulated per run as
//! `sum += len * d` in both implementations, so they agree bit for bit.
//!
//! Ties between candidates: smaller score, then larger `|T|`, then lower
//! topic index. Within a topic tokens are ordered by distance, then word id,
//! then position.

use crate::model::TopicMatrix;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct UflStats {
    /// List entries touched while sorting and scanning.
    pub examined: u64,
    pub rounds: usize,
}

impl std::ops::AddAssign for UflStats {
    fn add_assign(&mut self, rhs: Self) {
        self.examined += rhs.examined;
        self.rounds += rhs.rounds;
    }
}

/// How the fast assigner orders tokens within each topic.
#[derive(Debug, Clone, Copy)]
pub enum TokenOrder<'a> {
    /// Integer topic-word counts (`K x V`, row-major) that `psi` was
    /// estimated from. Enables the linear-time sort.
    Counts(&'a [u32]),
    /// Comparison sort on `-ln psi`; for matrices without backing counts.
    Distance,
}

/// Score of every prefix size `t = 1..=len` of an ascending distance list
/// with opening cost `open_cost`.
pub fn prefix_scores(sorted_distances: &[f64], open_cost: f64) -> Vec<f64> {
    let mut sum = 0.0;
    sorted_distances
        .iter()
        .enumerate()
        .map(|(t, &d)| {
            sum += d;
            (open_cost + sum) / (t + 1) as f64
        })
        .collect()
}

#[inline]
fn better(score: f64, size: usize, best_score: f64, best_size: usize) -> bool {
    score < best_score || (score == best_score && size > best_size)
}

/// Reference implementation: every round re-sorts all unmarked tokens for
/// every topic and evaluates every candidate size.
pub fn ufl_assign_document_naive(tokens: &[usize], psi: &TopicMatrix, lambda: f64) -> Vec<usize> {
    let n = tokens.len();
    let k = psi.num_topics();
    let mut labels = vec![usize::MAX; n];
    let mut marked = vec![false; n];
    let mut open = vec![false; k];
    let mut remaining = n;
    while remaining > 0 {
        let mut best_score = f64::INFINITY;
        let mut best_size = 0;
        let mut best_set: Vec<usize> = Vec::new();
        let mut best_topic = usize::MAX;
        for i in 0..k {
            let dist = |p: usize| psi.distance(tokens[p], i);
            let mut cand: Vec<usize> = (0..n).filter(|&p| !marked[p]).collect();
            cand.sort_by(|&a, &b| {
                dist(a)
                    .total_cmp(&dist(b))
                    .then(tokens[a].cmp(&tokens[b]))
                    .then(a.cmp(&b))
            });
            let f = if open[i] { 0.0 } else { lambda };
            let mut sum = 0.0;
            let mut idx = 0;
            while idx < cand.len() {
                let d = dist(cand[idx]);
                let start = idx;
                while idx < cand.len() && dist(cand[idx]) == d {
                    idx += 1;
                }
                sum += (idx - start) as f64 * d;
                let score = (f + sum) / idx as f64;
                if better(score, idx, best_score, best_size) {
                    best_score = score;
                    best_size = idx;
                    best_topic = i;
                    best_set = cand[..idx].to_vec();
                }
            }
        }
        for &p in &best_set {
            marked[p] = true;
            labels[p] = best_topic;
        }
        open[best_topic] = true;
        remaining -= best_set.len();
    }
    labels
}

/// Reusable buffers for [`UflWorkspace::assign`].
#[derive(Debug, Default, Clone)]
pub struct UflWorkspace {
    by_word: Vec<usize>,
    group_word: Vec<usize>,
    group_start: Vec<usize>,
    token_group: Vec<usize>,
    local_dist: Vec<f64>,
    order: Vec<usize>,
    keys: Vec<usize>,
    scratch: Vec<usize>,
    buckets: Vec<usize>,
    next: Vec<usize>,
    prev: Vec<usize>,
    open: Vec<bool>,
    chosen: Vec<usize>,
}

impl UflWorkspace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Fast assignment: one sort per topic, O(1) unlinking of marked tokens,
    /// and per-topic scans that stop at the first score increase.
    pub fn assign(
        &mut self,
        tokens: &[usize],
        psi: &TopicMatrix,
        token_order: TokenOrder<'_>,
        lambda: f64,
        labels: &mut Vec<usize>,
    ) -> UflStats {
        let n = tokens.len();
        labels.clear();
        labels.resize(n, usize::MAX);
        let mut stats = UflStats::default();
        if n == 0 {
            return stats;
        }
        let k = psi.num_topics();
        let v = psi.vocab_size();

        // Group positions by word (word ascending, position ascending).
        self.by_word.clear();
        self.by_word.extend(0..n);
        self.by_word.sort_unstable_by_key(|&p| (tokens[p], p));
        self.group_word.clear();
        self.group_start.clear();
        self.token_group.clear();
        self.token_group.resize(n, 0);
        for (idx, &p) in self.by_word.iter().enumerate() {
            let w = tokens[p];
            if self.group_word.last() != Some(&w) {
                self.group_word.push(w);
                self.group_start.push(idx);
            }
            self.token_group[p] = self.group_word.len() - 1;
        }
        self.group_start.push(n);
        let groups = self.group_word.len();

        self.local_dist.clear();
        for i in 0..k {
            for &w in &self.group_word {
                self.local_dist.push(psi.distance(w, i));
            }
        }

        let stride = n + 1;
        let head = n;
        self.next.clear();
        self.next.resize(k * stride, head);
        self.prev.clear();
        self.prev.resize(k * stride, head);
        for i in 0..k {
            self.sort_groups(i, groups, v, token_order);
            let base = i * stride;
            let mut last = head;
            for &g in &self.order {
                for &p in &self.by_word[self.group_start[g]..self.group_start[g + 1]] {
                    self.next[base + last] = p;
                    self.prev[base + p] = last;
                    last = p;
                }
            }
            self.next[base + last] = head;
            self.prev[base + head] = last;
            stats.examined += n as u64;
        }

        self.open.clear();
        self.open.resize(k, false);
        let mut remaining = n;
        while remaining > 0 {
            stats.rounds += 1;
            let mut best_score = f64::INFINITY;
            let mut best_size = 0;
            let mut best_topic = usize::MAX;
            for i in 0..k {
                let f = if self.open[i] { 0.0 } else { lambda };
                let (score, size, seen) = self.scan(i, f, stride, groups);
                stats.examined += seen;
                if better(score, size, best_score, best_size) {
                    best_score = score;
                    best_size = size;
                    best_topic = i;
                }
            }

            self.chosen.clear();
            let base = best_topic * stride;
            let mut p = self.next[base + head];
            for _ in 0..best_size {
                self.chosen.push(p);
                p = self.next[base + p];
            }
            for &p in &self.chosen {
                labels[p] = best_topic;
                for i in 0..k {
                    let b = i * stride;
                    let (before, after) = (self.prev[b + p], self.next[b + p]);
                    self.next[b + before] = after;
                    self.prev[b + after] = before;
                }
            }
            self.open[best_topic] = true;
            remaining -= best_size;
        }
        stats
    }

    /// Order the document's word groups for topic `i` into `self.order`.
    fn sort_groups(&mut self, i: usize, groups: usize, v: usize, token_order: TokenOrder<'_>) {
        self.order.clear();
        match token_order {
            TokenOrder::Distance => {
                let dist = &self.local_dist[i * groups..(i + 1) * groups];
                self.order.extend(0..groups);
                self.order.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));
            }
            TokenOrder::Counts(counts) => {
                let row = &counts[i * v..(i + 1) * v];
                self.keys.clear();
                self.keys.extend(self.group_word.iter().map(|&w| row[w] as usize));
                let max = self.keys.iter().copied().max().unwrap_or(0);
                // Descending count == ascending (max - count); both sorts are
                // stable so equal counts keep word order.
                for key in self.keys.iter_mut() {
                    *key = max - *key;
                }
                self.order.extend(0..groups);
                if max < 4 * groups + 64 {
                    counting_sort(&mut self.order, &self.keys, max + 1, &mut self.buckets, &mut self.scratch);
                } else {
                    radix_sort(&mut self.order, &self.keys, max, &mut self.buckets, &mut self.scratch);
                }
            }
        }
    }

    /// Best run-end candidate `(score, size)` for topic `i`, plus the number
    /// of list entries visited.
    fn scan(&self, i: usize, open_cost: f64, stride: usize, groups: usize) -> (f64, usize, u64) {
        let base = i * stride;
        let head = stride - 1;
        let dist = &self.local_dist[i * groups..(i + 1) * groups];
        let d_of = |p: usize| dist[self.token_group[p]];

        let mut p = self.next[base + head];
        let mut sum = 0.0;
        let mut size = 0usize;
        let mut seen = 0u64;
        let mut best = (f64::INFINITY, 0usize);
        while p != head {
            let d = d_of(p);
            let mut len = 0;
            while p != head && d_of(p) == d {
                len += 1;
                p = self.next[base + p];
            }
            seen += len as u64;
            sum += len as f64 * d;
            size += len;
            let score = (open_cost + sum) / size as f64;
            if size > len && score > best.0 {
                #[cfg(debug_assertions)]
                self.check_no_later_decrease(p, base, head, &d_of, open_cost, sum, size, score);
                break;
            }
            best = (score, size);
        }
        (best.0, best.1, seen)
    }

    /// The score must not drop again after its first increase.
    #[cfg(debug_assertions)]
    #[allow(clippy::too_many_arguments)]
    fn check_no_later_decrease(
        &self,
        mut p: usize,
        base: usize,
        head: usize,
        d_of: &dyn Fn(usize) -> f64,
        open_cost: f64,
        mut sum: f64,
        mut size: usize,
        score: f64,
    ) {
        if p == head {
            return;
        }
        let d = d_of(p);
        while p != head && d_of(p) == d {
            sum += d;
            size += 1;
            p = self.next[base + p];
        }
        let next_score = (open_cost + sum) / size as f64;
        debug_assert!(
            next_score >= score - 1e-9 * score.abs().max(1.0),
            "score decreased after increasing: {score} -> {next_score}"
        );
    }
}

/// Stable counting sort of `items` by `keys[item]` in `0..range`.
fn counting_sort(items: &mut Vec<usize>, keys: &[usize], range: usize, counts: &mut Vec<usize>, out: &mut Vec<usize>) {
    counts.clear();
    counts.resize(range + 1, 0);
    for &it in items.iter() {
        counts[keys[it] + 1] += 1;
    }
    for b in 1..=range {
        counts[b] += counts[b - 1];
    }
    out.clear();
    out.resize(items.len(), 0);
    for &it in items.iter() {
        let slot = &mut counts[keys[it]];
        out[*slot] = it;
        *slot += 1;
    }
    std::mem::swap(items, out);
}

/// Stable LSD radix sort with 8-bit digits.
fn radix_sort(items: &mut Vec<usize>, keys: &[usize], max: usize, counts: &mut Vec<usize>, out: &mut Vec<usize>) {
    let mut shift = 0;
    loop {
        counts.clear();
        counts.resize(257, 0);
        for &it in items.iter() {
            counts[((keys[it] >> shift) & 0xff) + 1] += 1;
        }
        for b in 1..=256 {
            counts[b] += counts[b - 1];
        }
        out.clear();
        out.resize(items.len(), 0);
        for &it in items.iter() {
            let slot = &mut counts[(keys[it] >> shift) & 0xff];
            out[*slot] = it;
            *slot += 1;
        }
        std::mem::swap(items, out);
        shift += 8;
        if shift >= usize::BITS as usize || (max >> shift) == 0 {
            break;
        }
    }
}

/// Convenience wrapper around [`UflWorkspace::assign`].
pub fn ufl_assign_document_fast(
    tokens: &[usize],
    psi: &TopicMatrix,
    token_order: TokenOrder<'_>,
    lambda: f64,
) -> (Vec<usize>, UflStats) {
    let mut labels = Vec::new();
    let stats = UflWorkspace::new().assign(tokens, psi, token_order, lambda, &mut labels);
    (labels, stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_counts(rng: &mut ChaCha8Rng, k: usize, v: usize, max: u32) -> (Vec<u32>, Vec<usize>) {
        let counts: Vec<u32> = (0..k * v)
            .map(|_| if rng.random_bool(0.3) { 0 } else { rng.random_range(0..max) })
            .collect();
        let totals = counts.chunks(v).map(|r| r.iter().map(|&c| c as usize).sum()).collect();
        (counts, totals)
    }

    #[test]
    fn single_word_document_goes_to_most_probable_topic() {
        let psi = TopicMatrix::from_probabilities(3, 2, vec![0.9, 0.1, 0.3, 0.7, 0.5, 0.5], 0.0).unwrap();
        for lambda in [0.0, 1.0, 100.0] {
            let tokens = vec![1; 7];
            let naive = ufl_assign_document_naive(&tokens, &psi, lambda);
            assert_eq!(naive, vec![1; 7]);
            let (fast, _) = ufl_assign_document_fast(&tokens, &psi, TokenOrder::Distance, lambda);
            assert_eq!(fast, naive);
        }
    }

    #[test]
    fn zero_penalty_sends_every_token_to_its_nearest_topic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (k, v) = (5, 30);
        let (counts, totals) = random_counts(&mut rng, k, v, 40);
        let psi = TopicMatrix::from_counts(k, v, &counts, &totals, 0.01).unwrap();
        for _ in 0..50 {
            let tokens: Vec<usize> = (0..40).map(|_| rng.random_range(0..v)).collect();
            let (labels, _) = ufl_assign_document_fast(&tokens, &psi, TokenOrder::Counts(&counts), 0.0);
            for (&w, &z) in tokens.iter().zip(&labels) {
                let nearest = (0..k).map(|i| psi.distance(w, i)).fold(f64::INFINITY, f64::min);
                assert_eq!(psi.distance(w, z), nearest);
            }
        }
    }

    #[test]
    fn huge_penalty_uses_one_topic_with_least_total_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (k, v) = (4, 12);
        let (counts, totals) = random_counts(&mut rng, k, v, 30);
        let psi = TopicMatrix::from_counts(k, v, &counts, &totals, 0.05).unwrap();
        for _ in 0..50 {
            let tokens: Vec<usize> = (0..25).map(|_| rng.random_range(0..v)).collect();
            let (labels, _) = ufl_assign_document_fast(&tokens, &psi, TokenOrder::Counts(&counts), 1e9);
            let total = |i: usize| tokens.iter().map(|&w| psi.distance(w, i)).sum::<f64>();
            let best = (0..k).min_by(|&a, &b| total(a).total_cmp(&total(b))).unwrap();
            assert!(labels.iter().all(|&z| z == best));
        }
    }

    #[test]
    fn fast_matches_naive_on_fuzzed_documents() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for case in 0..300 {
            let k = rng.random_range(1..7);
            let v = rng.random_range(1..25);
            let (counts, totals) = random_counts(&mut rng, k, v, if case % 3 == 0 { 2000 } else { 20 });
            let gamma = [0.01, 0.5, 1e-9][case % 3];
            let psi = TopicMatrix::from_counts(k, v, &counts, &totals, gamma).unwrap();
            let lambda = [0.0, 0.5, 3.0, 10.0, 50.0][rng.random_range(0..5)];
            let tokens: Vec<usize> = (0..rng.random_range(1..60)).map(|_| rng.random_range(0..v)).collect();
            let naive = ufl_assign_document_naive(&tokens, &psi, lambda);
            let (by_count, _) = ufl_assign_document_fast(&tokens, &psi, TokenOrder::Counts(&counts), lambda);
            let (by_dist, _) = ufl_assign_document_fast(&tokens, &psi, TokenOrder::Distance, lambda);
            assert_eq!(by_count, naive, "case {case}");
            assert_eq!(by_dist, naive, "case {case}");
        }
    }

    #[test]
    fn opened_facilities_equal_topics_used() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (k, v) = (6, 20);
        let (counts, totals) = random_counts(&mut rng, k, v, 50);
        let psi = TopicMatrix::from_counts(k, v, &counts, &totals, 0.01).unwrap();
        for _ in 0..100 {
            let tokens: Vec<usize> = (0..50).map(|_| rng.random_range(0..v)).collect();
            let lambda = rng.random_range(0.0..8.0);
            let naive = ufl_assign_document_naive(&tokens, &psi, lambda);
            // Replay the rounds and count topic openings.
            let mut used = vec![false; k];
            naive.iter().for_each(|&z| used[z] = true);
            let distinct = used.iter().filter(|&&u| u).count();
            let (_, stats) = ufl_assign_document_fast(&tokens, &psi, TokenOrder::Counts(&counts), lambda);
            assert!(stats.rounds >= distinct);
            assert!(naive.iter().all(|&z| z < k));
        }
    }

    #[test]
    fn prefix_scores_are_unimodal() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let len = rng.random_range(1..40);
            let mut c: Vec<u32> = (0..len).map(|_| rng.random_range(1..500)).collect();
            c.sort_unstable_by(|a, b| b.cmp(a));
            let total: f64 = c.iter().map(|&x| x as f64).sum::<f64>() + rng.random_range(0.0..1000.0);
            let d: Vec<f64> = c.iter().map(|&x| total.ln() - (x as f64).ln()).collect();
            let s = prefix_scores(&d, rng.random_range(0.0..20.0));
            let mut increased = false;
            for w in s.windows(2) {
                let tol = 1e-12 * w[0].abs().max(1.0);
                if increased {
                    assert!(w[1] >= w[0] - tol);
                } else if w[1] > w[0] + tol {
                    increased = true;
                }
            }
        }
    }

    #[test]
    fn sorts_are_stable_and_descending() {
        let keys = vec![3, 1, 3, 0, 2, 1];
        let mut items: Vec<usize> = (0..6).collect();
        let (mut a, mut b) = (Vec::new(), Vec::new());
        counting_sort(&mut items, &keys, 4, &mut a, &mut b);
        assert_eq!(items, vec![3, 1, 5, 4, 0, 2]);
        let keys = vec![70000, 5, 70000, 300, 5];
        let mut items: Vec<usize> = (0..5).collect();
        radix_sort(&mut items, &keys, 70000, &mut a, &mut b);
        assert_eq!(items, vec![1, 4, 3, 0, 2]);
    }

    #[test]
    fn empty_document() {
        let psi = TopicMatrix::from_probabilities(1, 1, vec![1.0], 0.0).unwrap();
        let (labels, stats) = ufl_assign_document_fast(&[], &psi, TokenOrder::Distance, 1.0);
        assert!(labels.is_empty());
        assert_eq!(stats.rounds, 0);
        assert!(ufl_assign_document_naive(&[], &psi, 1.0).is_empty());
    }
}
