//! Basic batch assignment: each token independently picks the topic with the
//! smallest penalized distance.

use rayon::prelude::*;

use crate::corpus::Corpus;
use crate::model::{TopicMatrix, TopicState};

/// New labels for every document. A topic costs an extra `lambda` unless the
/// document used it at the start of the pass. Ties go to the lowest index.
pub fn basic_assign_labels(state: &TopicState, corpus: &Corpus, psi: &TopicMatrix) -> Vec<Vec<usize>> {
    let k = psi.num_topics();
    let lambda = state.lambda();
    (0..corpus.num_docs())
        .into_par_iter()
        .map(|j| {
            let penalty: Vec<f64> = state
                .doc_topic_row(j)
                .iter()
                .map(|&c| if c > 0 { 0.0 } else { lambda })
                .collect();
            corpus
                .doc(j)
                .tokens
                .iter()
                .map(|&w| {
                    let mut best = 0;
                    let mut best_cost = f64::INFINITY;
                    for i in 0..k {
                        let cost = psi.distance(w, i) + penalty[i];
                        if cost < best_cost {
                            best_cost = cost;
                            best = i;
                        }
                    }
                    best
                })
                .collect()
        })
        .collect()
}

/// One Basic assignment pass followed by a count rebuild. Returns the number
/// of tokens whose label changed.
pub fn basic_assign_step(state: &mut TopicState, corpus: &Corpus, psi: &TopicMatrix) -> usize {
    let labels = basic_assign_labels(state, corpus, psi);
    state.replace_labels(corpus, labels)
}
