//! `bench`: mean wall-clock seconds per iteration for each algorithm on
//! synthetic corpora of increasing size, relative to one Gibbs sweep.

use std::fmt::Write as _;
use std::time::Instant;

use hardlda_core::baselines::{CgsConfig, CgsSampler};
use hardlda_core::textio::save_key_values;
use hardlda_core::{fit, generate_lda_corpus, Corpus, FitConfig, LdaGenSpec, Phase, Schedule};

use crate::args::{BenchAlgo, BenchArgs};
use crate::generate::preset_spec;
use crate::manifest::Manifest;
use crate::{create_dir, write_file, CliError};

pub const BENCH_HEADER: &str = "algo,docs,tokens,iters,mean_iter_secs,ratio_to_cgs";

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub algo: BenchAlgo,
    pub docs: usize,
    pub tokens: usize,
    pub iters: usize,
    pub mean_iter_secs: f64,
    /// `mean_iter_secs` over the Gibbs sweep time at the same size.
    pub ratio_to_cgs: Option<f64>,
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut s = format!("{BENCH_HEADER}\n");
    for r in rows {
        let ratio = r.ratio_to_cgs.map(|x| format!("{x:.2}")).unwrap_or_default();
        writeln!(s, "{},{},{},{},{:.6},{ratio}", r.algo.name(), r.docs, r.tokens, r.iters, r.mean_iter_secs).unwrap();
    }
    s
}

/// Seconds per iteration for one algorithm; also the number of iterations
/// actually timed (a fit may stop early at a fixed point).
pub fn time_algo(corpus: &Corpus, spec: &LdaGenSpec, algo: BenchAlgo, lambda: f64, iters: usize) -> Result<(f64, usize), CliError> {
    let (k, seed) = (spec.topics, spec.seed);
    let per_iter = match algo {
        BenchAlgo::Cgs => {
            let mut sampler = CgsSampler::new(corpus, &CgsConfig::new(k, spec.alpha, spec.beta).with_seed(seed))?;
            (0..iters)
                .map(|_| {
                    let clock = Instant::now();
                    sampler.sweep(corpus);
                    clock.elapsed().as_secs_f64()
                })
                .collect::<Vec<_>>()
        }
        BenchAlgo::Basic | BenchAlgo::Word | BenchAlgo::Refine => {
            let schedule = match algo {
                BenchAlgo::Basic => Schedule::Basic,
                BenchAlgo::Word => Schedule::Word,
                _ => Schedule::WordRefine,
            };
            let mut config = FitConfig::new(schedule, k, lambda).with_seed(seed).with_iters(iters);
            config.tol = 0.0;
            let result = fit(corpus, &config)?;
            let phases: &[Phase] = if algo == BenchAlgo::Refine { &[Phase::Refine] } else { &[Phase::Assign, Phase::Update] };
            (1..=result.iterations)
                .map(|it| {
                    result
                        .trace
                        .iter()
                        .filter(|r| r.iteration == it && phases.contains(&r.phase))
                        .map(|r| r.secs)
                        .sum::<f64>()
                })
                .collect()
        }
    };
    if per_iter.is_empty() {
        return Err(CliError::Internal(format!("{} ran no iterations", algo.name())));
    }
    Ok((per_iter.iter().sum::<f64>() / per_iter.len() as f64, per_iter.len()))
}

pub fn bench_table(a: &BenchArgs) -> Result<Vec<BenchRow>, CliError> {
    if a.iters < 3 {
        return Err(CliError::Usage("--iters must be at least 3".into()));
    }
    if a.sizes.is_empty() || a.sizes.contains(&0) || a.algos.is_empty() {
        return Err(CliError::Usage("--sizes and --algos need at least one positive entry".into()));
    }
    let mut rows = Vec::new();
    for &docs in &a.sizes {
        let spec = preset_spec(a.preset, docs, a.seed);
        let (corpus, _) = generate_lda_corpus(&spec)?;
        let mut block = Vec::new();
        for &algo in &a.algos {
            let (mean, iters) = time_algo(&corpus, &spec, algo, a.lambda, a.iters)?;
            block.push(BenchRow { algo, docs, tokens: corpus.num_tokens(), iters, mean_iter_secs: mean, ratio_to_cgs: None });
        }
        if let Some(cgs) = block.iter().find(|r| r.algo == BenchAlgo::Cgs).map(|r| r.mean_iter_secs) {
            for r in &mut block {
                r.ratio_to_cgs = Some(r.mean_iter_secs / cgs);
            }
        }
        rows.extend(block);
    }
    Ok(rows)
}

pub fn cmd_bench(a: &BenchArgs) -> Result<(), CliError> {
    let clock = Instant::now();
    let rows = bench_table(a)?;
    let csv = bench_csv(&rows);
    print!("{csv}");
    if let Some(path) = &a.out {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            create_dir(parent)?;
        }
        write_file(path, &csv)?;
        let mut m = Manifest::new("bench");
        m.set("sizes", a.sizes.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(","));
        m.set("algos", a.algos.iter().map(|x| x.name()).collect::<Vec<_>>().join(","));
        m.set("iters", a.iters);
        m.set("lambda", a.lambda);
        m.set("preset", format!("{:?}", a.preset));
        m.set("seed", a.seed);
        m.set("threads", rayon::current_num_threads());
        m.output("table", path);
        m.phase_secs("bench", clock.elapsed().as_secs_f64());
        let file = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
        let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(std::path::Path::new("."));
        save_key_values(&dir.join(format!("{file}.manifest.txt")), m.pairs())?;
    }
    Ok(())
}

