//! Shared fixtures for the criterion benchmarks: a SynthA corpus plus the
//! topic state and topics reached after a short Word fit.

use hardlda_core::{fit, generate_lda_corpus, Corpus, FitConfig, LdaGenSpec, Schedule, TopicMatrix, TopicState};

pub const TOPICS: usize = 20;
pub const LAMBDA: f64 = 10.0;

pub struct Fixture {
    pub spec: LdaGenSpec,
    pub corpus: Corpus,
    /// Labels after a few Word iterations, so benchmarks see realistic
    /// per-document topic counts rather than a uniform random start.
    pub state: TopicState,
    pub psi: TopicMatrix,
}

impl Fixture {
    pub fn synth_a(docs: usize) -> Fixture {
        let spec = LdaGenSpec::synth_a(docs, 7);
        let (corpus, _) = generate_lda_corpus(&spec).expect("preset is valid");
        let result = fit(&corpus, &FitConfig::new(Schedule::Word, TOPICS, LAMBDA).with_seed(7).with_iters(3))
            .expect("fit on a generated corpus");
        Fixture { spec, corpus, state: result.state, psi: result.psi }
    }
}
