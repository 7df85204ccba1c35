//! Metric collection with reasons for anything that could not be computed.

use std::fmt::Write as _;

/// Evaluation results. `None` metrics are listed in `omitted` with a reason.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalReport {
    pub objective: Option<f64>,
    pub nmi: Option<f64>,
    pub arand: Option<f64>,
    pub mean_l1: Option<f64>,
    pub hard_ll: Option<f64>,
    pub soft_ll: Option<f64>,
    pub soft_ll_max_term: Option<f64>,
    pub sym_kl: Option<f64>,
    pub omitted: Vec<(String, String)>,
    /// Free-form context such as run labels and timings.
    pub info: Vec<(String, String)>,
}

impl EvalReport {
    pub const METRICS: [&'static str; 8] =
        ["objective", "nmi", "arand", "mean_l1", "hard_ll", "soft_ll", "soft_ll_max_term", "sym_kl"];

    pub fn metrics(&self) -> [(&'static str, Option<f64>); 8] {
        [
            ("objective", self.objective),
            ("nmi", self.nmi),
            ("arand", self.arand),
            ("mean_l1", self.mean_l1),
            ("hard_ll", self.hard_ll),
            ("soft_ll", self.soft_ll),
            ("soft_ll_max_term", self.soft_ll_max_term),
            ("sym_kl", self.sym_kl),
        ]
    }

    pub fn omit(&mut self, metric: &str, reason: impl Into<String>) {
        self.omitted.push((metric.to_string(), reason.into()));
    }

    pub fn reason(&self, metric: &str) -> Option<&str> {
        self.omitted.iter().find(|(m, _)| m == metric).map(|(_, r)| r.as_str())
    }

    /// `metric=value` for computed metrics, `omitted.metric=reason` for the
    /// rest, then the info pairs.
    pub fn to_key_values(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for (name, value) in self.metrics() {
            if let Some(v) = value {
                out.push((name.to_string(), format!("{v}")));
            }
        }
        for (m, r) in &self.omitted {
            out.push((format!("omitted.{m}"), r.clone()));
        }
        out.extend(self.info.iter().cloned());
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("metric,value,note\n");
        for (name, value) in self.metrics() {
            match value {
                Some(v) => writeln!(s, "{name},{v},").unwrap(),
                None => writeln!(s, "{name},,{}", csv_field(self.reason(name).unwrap_or(""))).unwrap(),
            }
        }
        s
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One row per labelled report, one column per metric (empty when omitted).
pub fn reports_to_csv(rows: &[(String, EvalReport)]) -> String {
    let mut s = String::from("run");
    for m in EvalReport::METRICS {
        s.push(',');
        s.push_str(m);
    }
    s.push('\n');
    for (label, report) in rows {
        s.push_str(&csv_field(label));
        for (_, value) in report.metrics() {
            s.push(',');
            if let Some(v) = value {
                write!(s, "{v}").unwrap();
            }
        }
        s.push('\n');
    }
    s
}
