//! Evaluation reports as `key=value` text and CSV.

use std::io::{self, Write};

pub const CSV_HEADER: &str = "task,metric,value,spec,order,seed";

#[derive(Clone, Debug, PartialEq)]
pub struct MetricRow {
    pub metric: String,
    pub value: f64,
    /// `None` for aggregates over repeats.
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub task: String,
    /// Similarity spec of the evaluated embedding, `-` when unknown.
    pub spec: String,
    pub order: String,
    /// Echo of the resolved settings, in insertion order.
    pub config: Vec<(String, String)>,
    pub rows: Vec<MetricRow>,
}

/// Mean and sample standard deviation; the deviation of fewer than two
/// values is 0.
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl EvalReport {
    pub fn new(task: impl Into<String>) -> Self {
        EvalReport {
            task: task.into(),
            spec: "-".into(),
            order: "-".into(),
            config: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn with_spec(mut self, spec: impl Into<String>, order: impl Into<String>) -> Self {
        self.spec = spec.into();
        self.order = order.into();
        self
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl ToString) {
        self.config.push((key.into(), value.to_string()));
    }

    pub fn push(&mut self, metric: impl Into<String>, value: f64, seed: Option<u64>) {
        self.rows.push(MetricRow {
            metric: metric.into(),
            value,
            seed,
        });
    }

    /// One row per `(seed, value)` plus `<metric>_mean` and `<metric>_sd`.
    pub fn push_repeats(&mut self, metric: &str, runs: &[(u64, f64)]) {
        for &(seed, value) in runs {
            self.push(metric, value, Some(seed));
        }
        let values: Vec<f64> = runs.iter().map(|r| r.1).collect();
        let (mean, sd) = mean_sd(&values);
        self.push(format!("{metric}_mean"), mean, None);
        self.push(format!("{metric}_sd"), sd, None);
    }

    pub fn value(&self, metric: &str) -> Option<f64> {
        self.rows.iter().find(|r| r.metric == metric && r.seed.is_none()).map(|r| r.value)
    }

    /// Line-oriented `key=value`: task, spec, config, then aggregate
    /// metrics; per-seed values appear as `<metric>.seed<N>`.
    pub fn write_text<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "task={}", self.task)?;
        writeln!(out, "spec={}", self.spec)?;
        writeln!(out, "order={}", self.order)?;
        for (k, v) in &self.config {
            writeln!(out, "{k}={v}")?;
        }
        for r in &self.rows {
            match r.seed {
                Some(seed) => writeln!(out, "{}.seed{}={}", r.metric, seed, r.value)?,
                None => writeln!(out, "{}={}", r.metric, r.value)?,
            }
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, mut out: W, header: bool) -> io::Result<()> {
        if header {
            writeln!(out, "{CSV_HEADER}")?;
        }
        for r in &self.rows {
            let seed = r.seed.map_or_else(|| "-".to_string(), |s| s.to_string());
            writeln!(
                out,
                "{},{},{},{},{},{}",
                csv_field(&self.task),
                csv_field(&r.metric),
                r.value,
                csv_field(&self.spec),
                csv_field(&self.order),
                seed
            )?;
        }
        Ok(())
    }
}
