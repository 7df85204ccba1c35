//! `fit`: one model per lambda value, or one Gibbs / k-means run.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use hardlda_core::baselines::{estimate_psi_from_sample, kl_kmeans_fit, CgsConfig, CgsSampler, KMeansConfig};
use hardlda_core::corpus::read_corpus;
use hardlda_core::sva::{fit_from, init_random};
use hardlda_core::textio::{load_labels, save_labels};
use hardlda_core::{Corpus, FitConfig, Schedule, TopicMatrix, TopicState, Vocabulary};

use crate::args::{Algo, FitArgs};
use crate::manifest::Manifest;
use crate::{create_dir, write_file, CliError};

pub const LABELS_FILE: &str = "labels.txt";
pub const PSI_FILE: &str = "psi.txt";
pub const TRACE_FILE: &str = "trace.txt";
pub const TOP_WORDS_FILE: &str = "top_words.txt";
pub const SAMPLES_DIR: &str = "samples";

/// Output directory for one point of a lambda sweep.
pub fn sweep_dir(out: &Path, lambda: f64) -> PathBuf {
    out.join(format!("lambda_{lambda}"))
}

pub fn cmd_fit(a: &FitArgs) -> Result<(), CliError> {
    let clock = Instant::now();
    let corpus = read_corpus(&a.corpus)?;
    let init = match &a.init_from {
        Some(path) => Some(load_labels(path)?.1),
        None => None,
    };
    let load_secs = clock.elapsed().as_secs_f64();

    let mut base = Manifest::new("fit");
    base.set("algo", a.algo.name());
    base.corpus_input("corpus", &a.corpus)?;
    base.set("topics", a.topics);
    base.set("seed", a.seed);
    match &a.init_from {
        Some(path) => {
            base.set("init", "file");
            base.input("init_from", path)?;
        }
        None => base.set("init", "random"),
    }
    base.phase_secs("load", load_secs);

    match a.algo {
        Algo::Basic | Algo::Word | Algo::WordRefine => {
            let schedule = match a.algo {
                Algo::Basic => Schedule::Basic,
                Algo::Word => Schedule::Word,
                _ => Schedule::WordRefine,
            };
            let sweep = match (a.lambda, &a.lambda_sweep) {
                (Some(l), _) => Some((vec![l], false)),
                (None, Some(list)) if !list.is_empty() => Some((list.clone(), true)),
                _ => None,
            };
            let Some((lambdas, is_sweep)) = sweep else {
                return Err(CliError::Usage(format!("--lambda or --lambda-sweep is required for --algo {}", a.algo.name())));
            };
            for lambda in lambdas {
                let dir = if is_sweep { sweep_dir(&a.out, lambda) } else { a.out.clone() };
                let mut config = FitConfig::new(schedule, a.topics, lambda).with_seed(a.seed).with_gamma(a.gamma);
                if let Some(iters) = a.iters {
                    config = config.with_iters(iters);
                }
                run_sva(&corpus, &config, init.clone(), &dir, base.clone())?;
            }
            Ok(())
        }
        Algo::Cgs => {
            let (Some(alpha), Some(beta)) = (a.alpha, a.beta) else {
                return Err(CliError::Usage("--alpha and --beta are required for --algo cgs".into()));
            };
            let mut config = if a.full_schedule {
                CgsConfig::full_schedule(a.topics, alpha, beta)
            } else {
                CgsConfig::new(a.topics, alpha, beta)
            }
            .with_seed(a.seed);
            config.burnin = a.burnin.unwrap_or(config.burnin);
            config.n_samples = a.samples.unwrap_or(config.n_samples);
            config.thinning = a.thinning.unwrap_or(config.thinning);
            config.init = init;
            if let Some(lambda) = a.lambda {
                base.set("lambda", lambda);
            }
            run_cgs(&corpus, &config, &a.out, base)
        }
        Algo::Kmeans => {
            let mut config = KMeansConfig::new(a.topics);
            config.seed = a.seed;
            config.gamma = a.gamma;
            config.max_iters = a.iters.unwrap_or(config.max_iters);
            run_kmeans(&corpus, &config, &a.out, base)
        }
    }
}

fn run_sva(
    corpus: &Corpus,
    config: &FitConfig,
    init: Option<Vec<Vec<usize>>>,
    dir: &Path,
    mut m: Manifest,
) -> Result<(), CliError> {
    let init = match init {
        Some(labels) => TopicState::from_labels(corpus, config.k, labels, config.lambda)?,
        None => init_random(corpus, config.k, config.seed)?,
    };
    let clock = Instant::now();
    let result = fit_from(corpus, config, init)?;
    m.phase_secs("fit", clock.elapsed().as_secs_f64());

    let clock = Instant::now();
    create_dir(dir)?;
    let header = vec![
        ("algo".to_string(), config.schedule.name().to_string()),
        ("topics".to_string(), config.k.to_string()),
        ("lambda".to_string(), config.lambda.to_string()),
    ];
    save_labels(&dir.join(LABELS_FILE), &header, result.state.labels())?;
    result.psi.save(&dir.join(PSI_FILE), &header[..1])?;
    let mut trace = String::new();
    for (k, v) in &header {
        writeln!(trace, "# {k}={v}").unwrap();
    }
    for record in &result.trace {
        writeln!(trace, "{record}").unwrap();
    }
    write_file(&dir.join(TRACE_FILE), &trace)?;
    write_file(&dir.join(TOP_WORDS_FILE), &top_words(&result.psi, corpus.vocab(), 10))?;
    m.phase_secs("write", clock.elapsed().as_secs_f64());

    m.set("lambda", config.lambda);
    m.set("gamma", config.gamma);
    m.set("max_iters", config.max_iters);
    m.set("tol", config.tol);
    m.set("iterations", result.iterations);
    m.set("objective", result.objective());
    record_outputs(&mut m, dir);
    m.save(dir)?;
    println!(
        "{} lambda={} iterations={} objective={:.6} -> {}",
        config.schedule.name(),
        config.lambda,
        result.iterations,
        result.objective(),
        dir.display()
    );
    Ok(())
}

fn run_cgs(corpus: &Corpus, config: &CgsConfig, dir: &Path, mut m: Manifest) -> Result<(), CliError> {
    let clock = Instant::now();
    let mut sampler = CgsSampler::new(corpus, config)?;
    let mut trace = format!("# algo=cgs\n# topics={}\n", config.k);
    let timed_sweep = |sampler: &mut CgsSampler, phase: &str, trace: &mut String| {
        let clock = Instant::now();
        sampler.sweep(corpus);
        writeln!(trace, "sweep={} phase={phase} secs={:.6}", sampler.sweeps_done(), clock.elapsed().as_secs_f64())
            .unwrap();
    };
    for _ in 0..config.burnin {
        timed_sweep(&mut sampler, "burnin", &mut trace);
    }
    let mut samples = Vec::with_capacity(config.n_samples);
    for index in 0..config.n_samples {
        for _ in 0..config.thinning {
            timed_sweep(&mut sampler, "thin", &mut trace);
        }
        writeln!(trace, "sample={index} sweep={}", sampler.sweeps_done()).unwrap();
        samples.push(sampler.snapshot(index));
    }
    m.phase_secs("fit", clock.elapsed().as_secs_f64());

    let clock = Instant::now();
    let samples_dir = dir.join(SAMPLES_DIR);
    create_dir(&samples_dir)?;
    let header = vec![("algo".to_string(), "cgs".to_string()), ("topics".to_string(), config.k.to_string())];
    let mut last_psi = None;
    for s in &samples {
        let psi = estimate_psi_from_sample(s, config.beta)?;
        let mut h = header.clone();
        h.push(("sample".into(), s.index.to_string()));
        h.push(("sweep".into(), s.sweep.to_string()));
        save_labels(&samples_dir.join(format!("labels_{}.txt", s.index)), &h, &s.labels)?;
        psi.save(&samples_dir.join(format!("psi_{}.txt", s.index)), &h[..1])?;
        last_psi = Some(psi);
    }
    let last = samples.last().expect("n_samples >= 1 is validated");
    let psi = last_psi.expect("n_samples >= 1 is validated");
    save_labels(&dir.join(LABELS_FILE), &header, &last.labels)?;
    psi.save(&dir.join(PSI_FILE), &header[..1])?;
    write_file(&dir.join(TRACE_FILE), &trace)?;
    write_file(&dir.join(TOP_WORDS_FILE), &top_words(&psi, corpus.vocab(), 10))?;
    m.phase_secs("write", clock.elapsed().as_secs_f64());

    m.set("alpha", config.alpha);
    m.set("beta", config.beta);
    m.set("burnin", config.burnin);
    m.set("samples", config.n_samples);
    m.set("thinning", config.thinning);
    m.set("sweeps", sampler.sweeps_done());
    record_outputs(&mut m, dir);
    m.output("samples", &samples_dir);
    m.save(dir)?;
    println!("cgs sweeps={} samples={} -> {}", sampler.sweeps_done(), samples.len(), dir.display());
    Ok(())
}

fn run_kmeans(corpus: &Corpus, config: &KMeansConfig, dir: &Path, mut m: Manifest) -> Result<(), CliError> {
    let clock = Instant::now();
    let result = kl_kmeans_fit(corpus, config)?;
    m.phase_secs("fit", clock.elapsed().as_secs_f64());

    let clock = Instant::now();
    create_dir(dir)?;
    let header = vec![("algo".to_string(), "kmeans".to_string()), ("topics".to_string(), config.k.to_string())];
    save_labels(&dir.join(LABELS_FILE), &header, &result.token_labels(corpus))?;
    result.psi.save(&dir.join(PSI_FILE), &header[..1])?;
    let mut trace = String::from("# algo=kmeans\n");
    for (i, objective) in result.objective_trace.iter().enumerate() {
        writeln!(trace, "iter={} objective={objective:.6}", i + 1).unwrap();
    }
    write_file(&dir.join(TRACE_FILE), &trace)?;
    write_file(&dir.join(TOP_WORDS_FILE), &top_words(&result.psi, corpus.vocab(), 10))?;
    m.phase_secs("write", clock.elapsed().as_secs_f64());

    m.set("gamma", config.gamma);
    m.set("max_iters", config.max_iters);
    m.set("iterations", result.iterations);
    record_outputs(&mut m, dir);
    m.save(dir)?;
    println!("kmeans iterations={} -> {}", result.iterations, dir.display());
    Ok(())
}

fn record_outputs(m: &mut Manifest, dir: &Path) {
    for file in [LABELS_FILE, PSI_FILE, TRACE_FILE, TOP_WORDS_FILE] {
        m.output(file.trim_end_matches(".txt"), &dir.join(file));
    }
}

/// The `n` most probable terms of every topic, one topic per line.
pub fn top_words(psi: &TopicMatrix, vocab: &Vocabulary, n: usize) -> String {
    let mut out = String::new();
    for i in 0..psi.num_topics() {
        let row = psi.row(i);
        let mut ids: Vec<usize> = (0..row.len()).collect();
        ids.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
        let terms: Vec<&str> = ids.iter().take(n).map(|&u| vocab.term(u).unwrap_or("?")).collect();
        writeln!(out, "topic {i}: {}", terms.join(" ")).unwrap();
    }
    out
}
