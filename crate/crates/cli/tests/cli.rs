use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hardlda_core::corpus::read_corpus;
use hardlda_core::eval::{hard_predictive_ll, nmi, soft_predictive_ll, topic_l1_error, FoldInConfig};
use hardlda_core::textio::{load_key_values, load_labels};
use hardlda_core::TopicMatrix;
use tempfile::TempDir;

fn hardlda(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hardlda")).args(args).output().expect("spawn hardlda")
}

fn ok(args: &[&str]) -> String {
    let out = hardlda(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    hardlda(args).status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Small SynthA-style corpus: 60 docs of 40 tokens over 5 topics.
fn generate(dir: &Path, seed: u64) -> PathBuf {
    let out = dir.join(format!("corpus_{seed}"));
    ok(&[
        "generate", "--docs", "60", "--topics", "5", "--vocab", "80", "--alpha", "0.1", "--beta", "0.05", "--doc-len",
        "40", "--seed", &seed.to_string(), "--out", s(&out),
    ]);
    out
}

fn kv(path: &Path) -> Vec<(String, String)> {
    load_key_values(path).unwrap()
}

fn get(pairs: &[(String, String)], key: &str) -> Option<String> {
    pairs.iter().find(|(k, _)| k == key).map(|(_, v)| v.clone())
}

fn trace_objectives(path: &Path) -> Vec<f64> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter_map(|l| l.split_whitespace().find_map(|f| f.strip_prefix("objective=")))
        .map(|v| v.parse().unwrap())
        .collect()
}

#[test]
fn generate_writes_corpus_and_truth() {
    let tmp = TempDir::new().unwrap();
    let dir = generate(tmp.path(), 1);
    for f in ["docword.txt", "vocab.txt", "psi_true.txt", "theta_true.txt", "z_true.txt", "manifest.txt"] {
        assert!(dir.join(f).is_file(), "{f}");
    }
    let corpus = read_corpus(&dir).unwrap();
    assert_eq!(corpus.num_tokens(), 60 * 40);
    let m = kv(&dir.join("manifest.txt"));
    assert_eq!(get(&m, "command").as_deref(), Some("generate"));
    assert_eq!(get(&m, "alpha").as_deref(), Some("0.1"));
}

#[test]
fn generate_is_byte_identical_for_same_flags() {
    let tmp = TempDir::new().unwrap();
    let a = generate(&tmp.path().join("a"), 7);
    let b = generate(&tmp.path().join("b"), 7);
    for f in ["docword.txt", "vocab.txt", "psi_true.txt", "theta_true.txt", "z_true.txt"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let strip = |p: &Path| -> Vec<(String, String)> {
        kv(p).into_iter().filter(|(k, _)| !k.starts_with("secs.") && !k.starts_with("output.")).collect()
    };
    assert_eq!(strip(&a.join("manifest.txt")), strip(&b.join("manifest.txt")));
}

#[test]
fn generate_presets_and_usage_errors() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("p");
    ok(&["generate", "--preset", "synth-a", "--docs", "3", "--out", s(&out)]);
    assert_eq!(read_corpus(&out).unwrap().num_tokens(), 3 * 150);
    assert_eq!(code(&["generate", "--preset", "synth-a", "--docs", "3", "--alpha", "0", "--out", s(&out)]), 2);
    assert_eq!(code(&["generate", "--docs", "3", "--out", s(&out)]), 2);
    assert_eq!(code(&["generate", "--preset", "synth-a"]), 2);
    assert_eq!(code(&["no-such-command"]), 2);
    assert_eq!(code(&["--threads", "0", "generate", "--preset", "synth-a", "--docs", "3", "--out", s(&out)]), 2);
}

#[test]
fn fit_word_refine_writes_outputs_with_decreasing_trace() {
    let tmp = TempDir::new().unwrap();
    let corpus = generate(tmp.path(), 2);
    let out = tmp.path().join("wr");
    ok(&["fit", "--algo", "word-refine", "--corpus", s(&corpus), "-k", "5", "--lambda", "10", "--out", s(&out)]);
    for f in ["labels.txt", "psi.txt", "trace.txt", "top_words.txt", "manifest.txt"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let objectives = trace_objectives(&out.join("trace.txt"));
    assert!(objectives.len() >= 3);
    assert!(objectives.last().unwrap() <= objectives.first().unwrap());
    let m = kv(&out.join("manifest.txt"));
    assert_eq!(get(&m, "algo").as_deref(), Some("word-refine"));
    assert_eq!(get(&m, "lambda").as_deref(), Some("10"));
    assert_eq!(get(&m, "init").as_deref(), Some("random"));
    assert!(get(&m, "digest.corpus.docword").unwrap().len() == 64);
    assert_eq!(fs::read_to_string(out.join("top_words.txt")).unwrap().lines().count(), 5);
}

#[test]
fn fit_is_deterministic() {
    let tmp = TempDir::new().unwrap();
    let corpus = generate(tmp.path(), 3);
    for name in ["x", "y"] {
        ok(&["fit", "--algo", "word", "--corpus", s(&corpus), "-k", "5", "--lambda", "6", "--seed", "4", "--out", s(&tmp.path().join(name))]);
    }
    for f in ["labels.txt", "psi.txt"] {
        assert_eq!(fs::read(tmp.path().join("x").join(f)).unwrap(), fs::read(tmp.path().join("y").join(f)).unwrap());
    }
}

#[test]
fn fit_lambda_sweep_writes_one_set_per_value() {
    let tmp = TempDir::new().unwrap();
    let corpus = generate(tmp.path(), 4);
    let out = tmp.path().join("sweep");
    ok(&["fit", "--algo", "basic", "--corpus", s(&corpus), "-k", "5", "--lambda-sweep", "6,8,10", "--out", s(&out)]);
    for l in ["6", "8", "10"] {
        let dir = out.join(format!("lambda_{l}"));
        assert!(dir.join("labels.txt").is_file(), "lambda {l}");
        assert_eq!(get(&kv(&dir.join("manifest.txt")), "lambda").as_deref(), Some(l));
    }
}

#[test]
fn fit_cgs_warm_start_records_provenance() {
    let tmp = TempDir::new().unwrap();
    let corpus = generate(tmp.path(), 5);
    let wr = tmp.path().join("wr");
    ok(&["fit", "--algo", "word-refine", "--corpus", s(&corpus), "-k", "5", "--lambda", "8", "--out", s(&wr)]);
    let cgs = tmp.path().join("cgs");
    let init = wr.join("labels.txt");
    ok(&[
        "fit", "--algo", "cgs", "--corpus", s(&corpus), "-k", "5", "--alpha", "0.1", "--beta", "0.05", "--burnin", "20",
        "--samples", "3", "--thinning", "2", "--init-from", s(&init), "--out", s(&cgs),
    ]);
    let m = kv(&cgs.join("manifest.txt"));
    assert_eq!(get(&m, "init").as_deref(), Some("file"));
    assert_eq!(get(&m, "input.init_from").as_deref(), Some(s(&init)));
    assert_eq!(get(&m, "sweeps").as_deref(), Some("26"));
    for i in 0..3 {
        assert!(cgs.join("samples").join(format!("labels_{i}.txt")).is_file());
    }
    let trace = fs::read_to_string(cgs.join("trace.txt")).unwrap();
    assert_eq!(trace.lines().filter(|l| l.starts_with("sample=")).count(), 3);
}

#[test]
fn fit_kmeans_labels_are_constant_per_document() {
    let tmp = TempDir::new().unwrap();
    let corpus = generate(tmp.path(), 6);
    let out = tmp.path().join("km");
    ok(&["fit", "--algo", "kmeans", "--corpus", s(&corpus), "-k", "5", "--out", s(&out)]);
    let (_, labels) = load_labels(&out.join("labels.txt")).unwrap();
    assert!(labels.iter().all(|d| d.windows(2).all(|w| w[0] == w[1])));
}

#[test]
fn fit_errors_map_to_exit_classes() {
    let tmp = TempDir::new().unwrap();
    let corpus = generate(tmp.path(), 8);
    let out = tmp.path().join("o");
    // Missing lambda for an optimizer of the hard objective.
    assert_eq!(code(&["fit", "--algo", "word", "--corpus", s(&corpus), "-k", "5", "--out", s(&out)]), 2);
    assert_eq!(code(&["fit", "--algo", "cgs", "--corpus", s(&corpus), "-k", "5", "--out", s(&out)]), 2);
    assert_eq!(code(&["fit", "--algo", "word", "--corpus", s(&corpus), "-k", "0", "--lambda", "1", "--out", s(&out)]), 2);
    // Malformed and missing corpora.
    let bad = tmp.path().join("bad");
    fs::create_dir_all(&bad).unwrap();
    fs::write(bad.join("docword.txt"), "2\n3\n1\n1 9 4\n").unwrap();
    fs::write(bad.join("vocab.txt"), "a\nb\nc\n").unwrap();
    assert_eq!(code(&["fit", "--algo", "word", "--corpus", s(&bad), "-k", "2", "--lambda", "1", "--out", s(&out)]), 3);
    let missing = tmp.path().join("missing");
    assert_eq!(code(&["fit", "--algo", "word", "--corpus", s(&missing), "-k", "2", "--lambda", "1", "--out", s(&out)]), 3);
    // Warm-start labels that do not match the corpus shape.
    let labels = tmp.path().join("labels.txt");
    fs::write(&labels, "0 1\n").unwrap();
    let c = code(&[
        "fit", "--algo", "word", "--corpus", s(&corpus), "-k", "5", "--lambda", "1", "--init-from", s(&labels), "--out", s(&out),
    ]);
    assert_eq!(c, 3);
}

#[test]
fn eval_against_own_topics_is_perfect() {
    let tmp = TempDir::new().unwrap();
    let corpus = generate(tmp.path(), 9);
    let model = tmp.path().join("m");
    ok(&["fit", "--algo", "word-refine", "--corpus", s(&corpus), "-k", "5", "--lambda", "8", "--out", s(&model)]);
    let out = tmp.path().join("e");
    ok(&[
        "eval", "--model", s(&model), "--corpus", s(&corpus), "--truth-psi", s(&model.join("psi.txt")), "--truth-labels",
        s(&model.join("labels.txt")), "--out", s(&out),
    ]);
    let r = kv(&out.join("report.txt"));
    assert_eq!(get(&r, "nmi").as_deref(), Some("1"));
    assert_eq!(get(&r, "arand").as_deref(), Some("1"));
    assert_eq!(get(&r, "mean_l1").as_deref(), Some("0"));
    let objective: f64 = get(&r, "objective").unwrap().parse().unwrap();
    let fitted: f64 = get(&kv(&model.join("manifest.txt")), "objective").unwrap().parse().unwrap();
    assert!((objective - fitted).abs() <= 1e-9 * fitted.abs());
    assert!(out.join("report.csv").is_file());
    assert!(out.join("manifest.txt").is_file());
}

#[test]
fn eval_without_truth_reports_likelihoods_only() {
    let tmp = TempDir::new().unwrap();
    let corpus = generate(tmp.path(), 10);
    let split = tmp.path().join("split");
    ok(&["split", "--corpus", s(&corpus), "--heldout", "10", "--seed", "1", "--out", s(&split)]);
    let train = split.join("train");
    let model = tmp.path().join("m");
    ok(&["fit", "--algo", "word", "--corpus", s(&train), "-k", "5", "--lambda", "8", "--out", s(&model)]);
    let out = tmp.path().join("e");
    ok(&["eval", "--model", s(&model), "--corpus", s(&train), "--heldout", s(&split.join("heldout")), "--out", s(&out)]);
    let r = kv(&out.join("report.txt"));
    for present in ["hard_ll", "soft_ll", "soft_ll_max_term"] {
        assert!(get(&r, present).is_some(), "{present}");
    }
    for absent in ["nmi", "arand", "mean_l1", "sym_kl"] {
        assert!(get(&r, absent).is_none(), "{absent}");
        assert!(get(&r, &format!("omitted.{absent}")).is_some(), "{absent} reason");
    }
    let csv = fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("nmi,,no ground-truth labels")));
}

#[test]
fn eval_matches_library_calls() {
    let tmp = TempDir::new().unwrap();
    let corpus_dir = generate(tmp.path(), 11);
    let split = tmp.path().join("split");
    ok(&["split", "--corpus", s(&corpus_dir), "--heldout", "10", "--out", s(&split)]);
    let model = tmp.path().join("m");
    ok(&["fit", "--algo", "word-refine", "--corpus", s(&corpus_dir), "-k", "5", "--lambda", "9", "--out", s(&model)]);
    let out = tmp.path().join("e");
    ok(&[
        "eval", "--model", s(&model), "--corpus", s(&corpus_dir), "--truth", s(&corpus_dir), "--heldout",
        s(&split.join("heldout")), "--alpha", "0.2", "--seed", "3", "--out", s(&out),
    ]);
    let r = kv(&out.join("report.txt"));
    let num = |k: &str| -> f64 { get(&r, k).unwrap().parse().unwrap() };

    let psi = TopicMatrix::load(&model.join("psi.txt")).unwrap();
    let truth = TopicMatrix::load(&corpus_dir.join("psi_true.txt")).unwrap();
    let labels: Vec<usize> = load_labels(&model.join("labels.txt")).unwrap().1.concat();
    let z: Vec<usize> = load_labels(&corpus_dir.join("z_true.txt")).unwrap().1.concat();
    let heldout = read_corpus(&split.join("heldout")).unwrap();
    assert_eq!(num("nmi"), nmi(&z, &labels).unwrap());
    assert_eq!(num("mean_l1"), topic_l1_error(&psi, &truth).unwrap());
    assert_eq!(num("hard_ll"), hard_predictive_ll(&psi, &heldout, 9.0).unwrap());
    let soft = soft_predictive_ll(&psi, &heldout, &FoldInConfig { alpha: 0.2, sweeps: 200, seed: 3 }).unwrap();
    assert_eq!(num("soft_ll"), soft.mean);
    assert_eq!(num("soft_ll_max_term"), soft.max_term);
}

#[test]
fn eval_reports_dimension_mismatch_per_metric() {
    let tmp = TempDir::new().unwrap();
    let corpus = generate(tmp.path(), 12);
    let other = generate(&tmp.path().join("o"), 13);
    let model = tmp.path().join("m");
    ok(&["fit", "--algo", "word", "--corpus", s(&corpus), "-k", "4", "--lambda", "8", "--out", s(&model)]);
    let out = tmp.path().join("e");
    // Truth has 5 topics, the model 4: l1 is reported as omitted while the
    // label metrics still work.
    ok(&["eval", "--model", s(&model), "--corpus", s(&corpus), "--truth", s(&corpus), "--compare-psi", s(&other.join("psi_true.txt")), "--out", s(&out)]);
    let r = kv(&out.join("report.txt"));
    assert!(get(&r, "nmi").is_some());
    assert!(get(&r, "omitted.mean_l1").unwrap().contains("dimension"));
    assert!(get(&r, "omitted.sym_kl").is_some());
}

#[test]
fn eval_of_gibbs_run_scores_every_sample() {
    let tmp = TempDir::new().unwrap();
    let corpus = generate(tmp.path(), 14);
    let cgs = tmp.path().join("cgs");
    ok(&[
        "fit", "--algo", "cgs", "--corpus", s(&corpus), "-k", "5", "--alpha", "0.1", "--beta", "0.05", "--burnin", "30",
        "--samples", "4", "--thinning", "2", "--out", s(&cgs),
    ]);
    let out = tmp.path().join("e");
    ok(&["eval", "--model", s(&cgs), "--corpus", s(&corpus), "--truth", s(&corpus), "--out", s(&out)]);
    let csv = fs::read_to_string(out.join("samples.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    let r = kv(&out.join("report.txt"));
    let max: f64 = get(&r, "samples.max_nmi").unwrap().parse().unwrap();
    let last: f64 = get(&r, "nmi").unwrap().parse().unwrap();
    assert!(max >= last);
    assert!(get(&r, "omitted.objective").is_some());
}

fn bench_rows(csv: &str) -> Vec<Vec<String>> {
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("algo,docs,tokens,iters,mean_iter_secs,ratio_to_cgs"));
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn bench_table_has_one_row_per_algo_and_size() {
    let tmp = TempDir::new().unwrap();
    let path = tmp.path().join("bench.csv");
    let stdout = ok(&["bench", "--sizes", "30,60", "--algos", "basic,word,refine,cgs", "--iters", "3", "--out", s(&path)]);
    assert_eq!(stdout, fs::read_to_string(&path).unwrap());
    let rows = bench_rows(&stdout);
    assert_eq!(rows.len(), 8);
    for r in &rows {
        assert!(r[4].parse::<f64>().unwrap() > 0.0, "{r:?}");
        let ratio = &r[5];
        assert!(ratio.parse::<f64>().unwrap().is_finite());
        assert_eq!(ratio.split('.').nth(1).map(str::len), Some(2), "{ratio}");
    }
    assert!(tmp.path().join("bench.csv.manifest.txt").is_file());
    assert_eq!(code(&["bench", "--iters", "2"]), 2);
}

#[test]
fn bench_time_grows_at_most_linearly() {
    let stdout = ok(&["--threads", "1", "bench", "--sizes", "200,400,800", "--algos", "word,refine,cgs", "--iters", "3"]);
    let rows = bench_rows(&stdout);
    for algo in ["word", "refine", "cgs"] {
        let t: Vec<f64> = rows.iter().filter(|r| r[0] == algo).map(|r| r[4].parse().unwrap()).collect();
        for w in t.windows(2) {
            assert!(w[1] / w[0] <= 2.5, "{algo}: {t:?}");
        }
    }
}
