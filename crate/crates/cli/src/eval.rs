//! `eval`: every metric the inputs allow, with a reason for each one they
//! do not.

use std::path::{Path, PathBuf};
use std::time::Instant;

use hardlda_core::corpus::read_corpus;
use hardlda_core::eval::{
    adjusted_rand, hard_predictive_ll, nmi, reports_to_csv, soft_predictive_ll, symmetric_kl_topics, topic_l1_error,
    EvalReport, FoldInConfig,
};
use hardlda_core::synthgen::{PSI_TRUE_FILE, Z_TRUE_FILE};
use hardlda_core::textio::{load_labels, save_key_values};
use hardlda_core::{compute_objective, Corpus, TopicMatrix, TopicState};

use crate::args::EvalArgs;
use crate::fit::{LABELS_FILE, PSI_FILE, SAMPLES_DIR};
use crate::manifest::Manifest;
use crate::{create_dir, write_file, CliError};

pub const REPORT_FILE: &str = "report.txt";
pub const REPORT_CSV: &str = "report.csv";
pub const SAMPLES_CSV: &str = "samples.csv";

/// Fold-in prior when neither the flags nor the model supply one.
pub const DEFAULT_FOLD_IN_ALPHA: f64 = 0.1;

/// Everything `evaluate` may use; absent inputs turn into omitted metrics.
#[derive(Debug, Clone, Default)]
pub struct EvalInputs<'a> {
    pub corpus: Option<&'a Corpus>,
    pub labels: Option<&'a [Vec<usize>]>,
    pub psi: Option<&'a TopicMatrix>,
    pub truth_labels: Option<&'a [Vec<usize>]>,
    pub truth_psi: Option<&'a TopicMatrix>,
    pub heldout: Option<&'a Corpus>,
    pub compare_psi: Option<&'a TopicMatrix>,
    pub lambda: Option<f64>,
    pub fold_in: Option<FoldInConfig>,
}

fn flat(labels: &[Vec<usize>]) -> Vec<usize> {
    labels.iter().flatten().copied().collect()
}

fn record(report: &mut EvalReport, metric: &str, value: hardlda_core::Result<f64>) -> Option<f64> {
    match value {
        Ok(v) => Some(v),
        Err(e) => {
            report.omit(metric, e.to_string());
            None
        }
    }
}

pub fn evaluate(inputs: &EvalInputs<'_>) -> EvalReport {
    let mut r = EvalReport::default();

    match (inputs.corpus, inputs.labels, inputs.psi, inputs.lambda) {
        (Some(corpus), Some(labels), Some(psi), Some(lambda)) => {
            let value = TopicState::from_labels(corpus, psi.num_topics(), labels.to_vec(), lambda)
                .map(|state| compute_objective(&state, corpus, psi));
            r.objective = record(&mut r, "objective", value);
        }
        (_, _, _, None) => r.omit("objective", "no lambda: pass --lambda or fit with a lambda"),
        _ => r.omit("objective", "needs labels, topics and the training corpus"),
    }

    match (inputs.labels, inputs.truth_labels) {
        (Some(labels), Some(truth)) => {
            let (est, reference) = (flat(labels), flat(truth));
            r.nmi = record(&mut r, "nmi", nmi(&reference, &est));
            r.arand = record(&mut r, "arand", adjusted_rand(&reference, &est));
        }
        _ => {
            r.omit("nmi", "no ground-truth labels");
            r.omit("arand", "no ground-truth labels");
        }
    }

    match (inputs.psi, inputs.truth_psi) {
        (Some(psi), Some(truth)) => r.mean_l1 = record(&mut r, "mean_l1", topic_l1_error(psi, truth)),
        _ => r.omit("mean_l1", "no ground-truth topics"),
    }

    match (inputs.psi, inputs.heldout) {
        (Some(psi), Some(heldout)) => {
            match inputs.lambda {
                Some(lambda) => r.hard_ll = record(&mut r, "hard_ll", hard_predictive_ll(psi, heldout, lambda)),
                None => r.omit("hard_ll", "no lambda: pass --lambda or fit with a lambda"),
            }
            match &inputs.fold_in {
                Some(cfg) => match soft_predictive_ll(psi, heldout, cfg) {
                    Ok(s) => {
                        r.soft_ll = Some(s.mean);
                        r.soft_ll_max_term = Some(s.max_term);
                    }
                    Err(e) => {
                        r.omit("soft_ll", e.to_string());
                        r.omit("soft_ll_max_term", e.to_string());
                    }
                },
                None => {
                    r.omit("soft_ll", "no fold-in configuration");
                    r.omit("soft_ll_max_term", "no fold-in configuration");
                }
            }
        }
        _ => {
            for m in ["hard_ll", "soft_ll", "soft_ll_max_term"] {
                r.omit(m, "no held-out corpus");
            }
        }
    }

    match (inputs.psi, inputs.compare_psi) {
        (Some(psi), Some(other)) => r.sym_kl = record(&mut r, "sym_kl", symmetric_kl_topics(other, psi)),
        _ => r.omit("sym_kl", "no comparison topics"),
    }
    r
}

fn truth_paths(a: &EvalArgs) -> (Option<PathBuf>, Option<PathBuf>) {
    let from_dir = |file: &str| a.truth.as_ref().map(|d| d.join(file));
    (a.truth_labels.clone().or_else(|| from_dir(Z_TRUE_FILE)), a.truth_psi.clone().or_else(|| from_dir(PSI_TRUE_FILE)))
}

fn load_psi(path: &Path) -> Result<TopicMatrix, CliError> {
    Ok(TopicMatrix::load(path)?)
}

pub fn cmd_eval(a: &EvalArgs) -> Result<(), CliError> {
    let clock = Instant::now();
    let model = Manifest::load(&a.model).unwrap_or_default();
    let corpus = read_corpus(&a.corpus)?;
    let labels = load_labels(&a.model.join(LABELS_FILE))?.1;
    let psi = load_psi(&a.model.join(PSI_FILE))?;
    let (truth_labels_path, truth_psi_path) = truth_paths(a);
    let truth_labels = truth_labels_path.as_deref().map(load_labels).transpose()?.map(|(_, l)| l);
    let truth_psi = truth_psi_path.as_deref().map(load_psi).transpose()?;
    let heldout = a.heldout.as_deref().map(read_corpus).transpose()?;
    let compare = a.compare_psi.as_deref().map(load_psi).transpose()?;
    let load_secs = clock.elapsed().as_secs_f64();

    let parsed = |key: &str| model.get(key).and_then(|v| v.parse::<f64>().ok());
    let lambda = a.lambda.or_else(|| parsed("lambda"));
    let alpha = a.alpha.or_else(|| parsed("alpha")).unwrap_or(DEFAULT_FOLD_IN_ALPHA);
    let fold_in = FoldInConfig { alpha, sweeps: a.fold_in_sweeps, seed: a.seed };

    let clock = Instant::now();
    let inputs = EvalInputs {
        corpus: Some(&corpus),
        labels: Some(&labels),
        psi: Some(&psi),
        truth_labels: truth_labels.as_deref(),
        truth_psi: truth_psi.as_ref(),
        heldout: heldout.as_ref(),
        compare_psi: compare.as_ref(),
        lambda,
        fold_in: Some(fold_in.clone()),
    };
    let mut report = evaluate(&inputs);
    if let Some(algo) = model.get("algo") {
        report.info.push(("algo".into(), algo.to_string()));
    }
    if let Some(lambda) = lambda {
        report.info.push(("lambda".into(), lambda.to_string()));
    }
    report.info.push(("fold_in_alpha".into(), alpha.to_string()));
    report.info.push(("fold_in_sweeps".into(), fold_in.sweeps.to_string()));

    // Gibbs runs keep one labels/topics pair per sample.
    let samples = evaluate_samples(&a.model, &inputs)?;
    if !samples.is_empty() {
        let best = |f: fn(&EvalReport) -> Option<f64>, max: bool| {
            samples.iter().filter_map(|(_, r)| f(r)).reduce(|x, y| if (y > x) == max { y } else { x })
        };
        if let Some(v) = best(|r| r.nmi, true) {
            report.info.push(("samples.max_nmi".into(), v.to_string()));
        }
        if let Some(v) = best(|r| r.arand, true) {
            report.info.push(("samples.max_arand".into(), v.to_string()));
        }
        if let Some(v) = best(|r| r.mean_l1, false) {
            report.info.push(("samples.min_mean_l1".into(), v.to_string()));
        }
    }
    let eval_secs = clock.elapsed().as_secs_f64();

    create_dir(&a.out)?;
    save_key_values(&a.out.join(REPORT_FILE), &report.to_key_values())?;
    write_file(&a.out.join(REPORT_CSV), &report.to_csv())?;
    if !samples.is_empty() {
        write_file(&a.out.join(SAMPLES_CSV), &reports_to_csv(&samples))?;
    }

    let mut m = Manifest::new("eval");
    m.set("input.model", a.model.display());
    m.input("model.labels", &a.model.join(LABELS_FILE))?;
    m.input("model.psi", &a.model.join(PSI_FILE))?;
    m.corpus_input("corpus", &a.corpus)?;
    if let Some(p) = &truth_labels_path {
        m.input("truth_labels", p)?;
    }
    if let Some(p) = &truth_psi_path {
        m.input("truth_psi", p)?;
    }
    if let Some(p) = &a.heldout {
        m.corpus_input("heldout", p)?;
    }
    if let Some(p) = &a.compare_psi {
        m.input("compare_psi", p)?;
    }
    m.set("seed", a.seed);
    m.output("report", &a.out.join(REPORT_FILE));
    m.output("report_csv", &a.out.join(REPORT_CSV));
    m.phase_secs("load", load_secs);
    m.phase_secs("eval", eval_secs);
    m.save(&a.out)?;

    for (k, v) in report.to_key_values() {
        println!("{k}={v}");
    }
    Ok(())
}

/// Agreement metrics for every `samples/labels_<i>.txt` + `psi_<i>.txt`.
fn evaluate_samples(model: &Path, base: &EvalInputs<'_>) -> Result<Vec<(String, EvalReport)>, CliError> {
    let dir = model.join(SAMPLES_DIR);
    let mut rows = Vec::new();
    for index in 0.. {
        let labels_path = dir.join(format!("labels_{index}.txt"));
        if !labels_path.exists() {
            break;
        }
        let labels = load_labels(&labels_path)?.1;
        let psi = load_psi(&dir.join(format!("psi_{index}.txt")))?;
        let inputs = EvalInputs {
            corpus: base.corpus,
            labels: Some(&labels),
            psi: Some(&psi),
            truth_labels: base.truth_labels,
            truth_psi: base.truth_psi,
            lambda: base.lambda,
            ..EvalInputs::default()
        };
        rows.push((format!("sample_{index}"), evaluate(&inputs)));
    }
    Ok(rows)
}
