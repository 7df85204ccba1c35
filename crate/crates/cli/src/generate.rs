//! `generate` and `split`.

use std::time::Instant;

use hardlda_core::corpus::{read_corpus, split_heldout, write_corpus};
use hardlda_core::synthgen::{write_generated, PSI_TRUE_FILE, THETA_TRUE_FILE, Z_TRUE_FILE};
use hardlda_core::{generate_lda_corpus, LdaGenSpec, SplitSpec};

use crate::args::{GenerateArgs, Preset, SplitArgs};
use crate::manifest::Manifest;
use crate::{create_dir, CliError};

pub fn preset_spec(preset: Preset, docs: usize, seed: u64) -> LdaGenSpec {
    match preset {
        Preset::SynthA => LdaGenSpec::synth_a(docs, seed),
        Preset::SynthB => LdaGenSpec::synth_b(docs, seed),
    }
}

/// Resolve the generator flags; every value must come from the preset or a flag.
pub fn gen_spec(a: &GenerateArgs) -> Result<LdaGenSpec, CliError> {
    let base = a.preset.map(|p| preset_spec(p, a.docs.unwrap_or(1000), a.seed));
    let b = base.as_ref();
    let spec = LdaGenSpec {
        docs: pick(a.docs, b.map(|b| b.docs), "docs")?,
        topics: pick(a.topics, b.map(|b| b.topics), "topics")?,
        vocab: pick(a.vocab, b.map(|b| b.vocab), "vocab")?,
        alpha: pick(a.alpha, b.map(|b| b.alpha), "alpha")?,
        beta: pick(a.beta, b.map(|b| b.beta), "beta")?,
        doc_len: pick(a.doc_len, b.map(|b| b.doc_len), "doc-len")?,
        seed: a.seed,
    };
    spec.validate()?;
    Ok(spec)
}

fn pick<T>(flag: Option<T>, preset: Option<T>, name: &str) -> Result<T, CliError> {
    flag.or(preset).ok_or_else(|| CliError::Usage(format!("--{name} is required without --preset")))
}

pub fn cmd_generate(a: &GenerateArgs) -> Result<(), CliError> {
    let spec = gen_spec(a)?;
    let clock = Instant::now();
    let (corpus, truth) = generate_lda_corpus(&spec)?;
    let sample_secs = clock.elapsed().as_secs_f64();

    create_dir(&a.out)?;
    let clock = Instant::now();
    write_generated(&a.out, &corpus, &truth)?;
    let write_secs = clock.elapsed().as_secs_f64();

    let mut m = Manifest::new("generate");
    for (k, v) in spec.key_values() {
        m.set(k, v);
    }
    m.set("tokens", corpus.num_tokens());
    for file in ["docword.txt", "vocab.txt", PSI_TRUE_FILE, THETA_TRUE_FILE, Z_TRUE_FILE] {
        m.output(file.trim_end_matches(".txt"), &a.out.join(file));
    }
    m.phase_secs("sample", sample_secs);
    m.phase_secs("write", write_secs);
    m.save(&a.out)?;
    println!("wrote {} documents, {} tokens to {}", corpus.num_docs(), corpus.num_tokens(), a.out.display());
    Ok(())
}

pub fn cmd_split(a: &SplitArgs) -> Result<(), CliError> {
    let corpus = read_corpus(&a.corpus)?;
    let split = split_heldout(&corpus, SplitSpec { heldout: a.heldout, seed: a.seed })?;
    let train = a.out.join("train");
    let heldout = a.out.join("heldout");
    create_dir(&train)?;
    create_dir(&heldout)?;
    write_corpus(&split.train, &train)?;
    write_corpus(&split.heldout, &heldout)?;

    let mut m = Manifest::new("split");
    m.corpus_input("corpus", &a.corpus)?;
    m.set("heldout", a.heldout);
    m.set("seed", a.seed);
    m.set("train_docs", split.train.num_docs());
    m.set("heldout_docs", split.heldout.num_docs());
    m.output("train", &train);
    m.output("heldout", &heldout);
    m.save(&a.out)?;
    println!("train {} docs, held out {} docs", split.train.num_docs(), split.heldout.num_docs());
    Ok(())
}
