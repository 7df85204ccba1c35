//! Hard-LDA optimizers and their fit drivers.
//!
//! * Basic: per-token argmin with a penalty for topics new to the document.
//! * Word: per-document facility-location assignment ([`ufl`]).
//! * Word+Refine: Word followed by one mini-topic refinement pass per
//!   iteration ([`refine`]).

pub mod basic;
pub mod refine;
pub mod ufl;

use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use basic::{basic_assign_labels, basic_assign_step};
pub use refine::{delta_move, refine_pass, refine_pass_observed, MiniTopic, RefineStats};
pub use ufl::{
    prefix_scores, ufl_assign_document_fast, ufl_assign_document_naive, TokenOrder, UflStats, UflWorkspace,
};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::model::{compute_objective, update_topics, FitConfig, Schedule, TopicMatrix, TopicState};

/// Seed offset for the refinement document order, so it does not replay the
/// initialization stream.
const REFINE_STREAM: u64 = 0x5eed_0f_4ef1_4e;

/// Uniform random labels.
pub fn init_random(corpus: &Corpus, k: usize, seed: u64) -> Result<TopicState> {
    if k == 0 {
        return Err(Error::Argument("K must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = corpus
        .docs()
        .iter()
        .map(|d| d.tokens.iter().map(|_| rng.random_range(0..k)).collect())
        .collect();
    TopicState::from_labels(corpus, k, labels, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Init,
    Assign,
    Update,
    Refine,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Init => "init",
            Phase::Assign => "assign",
            Phase::Update => "update",
            Phase::Refine => "refine",
        }
    }
}

/// Objective after one phase of one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub phase: Phase,
    pub objective: f64,
    /// Tokens whose label changed in this phase.
    pub changed: usize,
    pub examined: u64,
    pub secs: f64,
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "iter={} phase={} objective={:.6} changed={} examined={} secs={:.6}",
            self.iteration,
            self.phase.name(),
            self.objective,
            self.changed,
            self.examined,
            self.secs
        )
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub state: TopicState,
    pub psi: TopicMatrix,
    pub trace: Vec<TraceRecord>,
    pub iterations: usize,
}

impl FitResult {
    pub fn objective(&self) -> f64 {
        self.trace.last().map_or(f64::NAN, |r| r.objective)
    }
}

/// Word assignment for every document against a frozen `psi`, merged in
/// document order.
pub fn ufl_assign_all(corpus: &Corpus, psi: &TopicMatrix, order: TokenOrder<'_>, lambda: f64) -> (Vec<Vec<usize>>, UflStats) {
    let results: Vec<(Vec<usize>, UflStats)> = corpus
        .docs()
        .par_iter()
        .map_init(UflWorkspace::new, |ws, d| {
            let mut labels = Vec::new();
            let stats = ws.assign(&d.tokens, psi, order, lambda, &mut labels);
            (labels, stats)
        })
        .collect();
    let mut total = UflStats::default();
    let labels = results
        .into_iter()
        .map(|(l, s)| {
            total += s;
            l
        })
        .collect();
    (labels, total)
}

/// Run the schedule in `config` from uniform random labels.
pub fn fit(corpus: &Corpus, config: &FitConfig) -> Result<FitResult> {
    config.validate()?;
    let init = init_random(corpus, config.k, config.seed)?;
    fit_from(corpus, config, init)
}

pub fn basic_batch_fit(corpus: &Corpus, config: &FitConfig) -> Result<FitResult> {
    fit(corpus, &FitConfig { schedule: Schedule::Basic, ..config.clone() })
}

pub fn word_fit(corpus: &Corpus, config: &FitConfig) -> Result<FitResult> {
    fit(corpus, &FitConfig { schedule: Schedule::Word, ..config.clone() })
}

pub fn word_refine_fit(corpus: &Corpus, config: &FitConfig) -> Result<FitResult> {
    fit(corpus, &FitConfig { schedule: Schedule::WordRefine, ..config.clone() })
}

/// Run the schedule in `config` starting from `init`.
pub fn fit_from(corpus: &Corpus, config: &FitConfig, init: TopicState) -> Result<FitResult> {
    config.validate()?;
    if init.num_topics() != config.k {
        return Err(Error::Dimension(format!(
            "initial state has {} topics, config asks for {}",
            init.num_topics(),
            config.k
        )));
    }
    let mut state = init;
    state.set_lambda(config.lambda);
    let mut refine_rng = ChaCha8Rng::seed_from_u64(config.seed ^ REFINE_STREAM);

    let clock = Instant::now();
    let mut psi = update_topics(&state, config.gamma)?;
    let mut objective = compute_objective(&state, corpus, &psi);
    let mut trace = vec![TraceRecord {
        iteration: 0,
        phase: Phase::Init,
        objective,
        changed: 0,
        examined: 0,
        secs: clock.elapsed().as_secs_f64(),
    }];

    let mut iterations = 0;
    for iteration in 1..=config.max_iters {
        iterations = iteration;
        let start_objective = objective;

        let clock = Instant::now();
        let (changed, examined) = match config.schedule {
            Schedule::Basic => {
                let changed = basic_assign_step(&mut state, corpus, &psi);
                (changed, (corpus.num_tokens() * config.k) as u64)
            }
            Schedule::Word | Schedule::WordRefine => {
                let counts = state.topic_word_counts().to_vec();
                let (labels, stats) =
                    ufl_assign_all(corpus, &psi, TokenOrder::Counts(&counts), config.lambda);
                (state.replace_labels(corpus, labels), stats.examined)
            }
        };
        let assigned = compute_objective(&state, corpus, &psi);
        trace.push(TraceRecord {
            iteration,
            phase: Phase::Assign,
            objective: assigned,
            changed,
            examined,
            secs: clock.elapsed().as_secs_f64(),
        });

        let clock = Instant::now();
        psi = update_topics(&state, config.gamma)?;
        objective = compute_objective(&state, corpus, &psi);
        trace.push(TraceRecord {
            iteration,
            phase: Phase::Update,
            objective,
            changed: 0,
            examined: 0,
            secs: clock.elapsed().as_secs_f64(),
        });

        let mut moved = 0;
        if config.schedule == Schedule::WordRefine {
            let clock = Instant::now();
            let stats = refine_pass(&mut state, corpus, config.gamma, &mut refine_rng);
            moved = stats.moved_tokens;
            psi = update_topics(&state, config.gamma)?;
            objective = compute_objective(&state, corpus, &psi);
            trace.push(TraceRecord {
                iteration,
                phase: Phase::Refine,
                objective,
                changed: moved,
                examined: stats.examined,
                secs: clock.elapsed().as_secs_f64(),
            });
        }

        if changed == 0 && moved == 0 {
            break;
        }
        if (start_objective - objective).abs() < config.tol * start_objective.abs() {
            break;
        }
    }

    Ok(FitResult { state, psi, trace, iterations })
}
