//! Scoring and statistical comparison of classification results: the
//! two-class confusion matrix, geometric-mean metrics, score tables with
//! tie-averaged ranking, and the Friedman test with Holm post-hoc
//! correction against the best-ranked control.

mod friedman;
mod normal;
mod ranking;

pub use friedman::{friedman_holm, Comparison, FriedmanResult};
pub use normal::normal_upper_tail;
pub use ranking::{rank_rows, ScoreTable};

use thiserror::Error;

use crate::dataset::ClassLabel;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("predicted and truth label vectors differ in length ({predicted} vs {truth})")]
    LengthMismatch { predicted: usize, truth: usize },
    #[error("metric undefined: truth contains no {class} samples")]
    UndefinedMetric { class: &'static str },
    #[error("no fold reports to summarize")]
    EmptySummary,
    #[error("score table needs at least 2 datasets and 2 algorithms, got {rows}x{cols}")]
    TableTooSmall { rows: usize, cols: usize },
    #[error("score table is degenerate: every row is constant")]
    DegenerateTable,
    #[error("line {line}: {message}")]
    TableFormat { line: usize, message: String },
}

/// Two-class confusion counts. The minority class is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    pub true_positive: usize,
    pub false_negative: usize,
    pub false_positive: usize,
    pub true_negative: usize,
}

impl ConfusionMatrix {
    pub fn from_predictions(
        predicted: &[ClassLabel],
        truth: &[ClassLabel],
    ) -> Result<ConfusionMatrix, EvalError> {
        if predicted.len() != truth.len() {
            return Err(EvalError::LengthMismatch {
                predicted: predicted.len(),
                truth: truth.len(),
            });
        }
        let mut cm = ConfusionMatrix::default();
        for (&p, &t) in predicted.iter().zip(truth) {
            match (t.is_minority(), p.is_minority()) {
                (true, true) => cm.true_positive += 1,
                (true, false) => cm.false_negative += 1,
                (false, true) => cm.false_positive += 1,
                (false, false) => cm.true_negative += 1,
            }
        }
        Ok(cm)
    }

    /// Positive-class (minority) sample count in the truth.
    pub fn positives(&self) -> usize {
        self.true_positive + self.false_negative
    }

    /// Negative-class (majority) sample count in the truth.
    pub fn negatives(&self) -> usize {
        self.false_positive + self.true_negative
    }

    pub fn total(&self) -> usize {
        self.positives() + self.negatives()
    }

    /// Per-class rates and their geometric mean. Fails when a class is
    /// absent from the truth; callers must treat that as "undefined"
    /// rather than zero.
    pub fn class_rates(&self) -> Result<ClassRates, EvalError> {
        if self.positives() == 0 {
            return Err(EvalError::UndefinedMetric { class: "positive" });
        }
        if self.negatives() == 0 {
            return Err(EvalError::UndefinedMetric { class: "negative" });
        }
        let tp_rate = self.true_positive as f64 / self.positives() as f64;
        let tn_rate = self.true_negative as f64 / self.negatives() as f64;
        Ok(ClassRates {
            tp_rate,
            tn_rate,
            gm: (tp_rate * tn_rate).sqrt(),
        })
    }
}

/// True-positive rate, true-negative rate, and their geometric mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassRates {
    pub tp_rate: f64,
    pub tn_rate: f64,
    pub gm: f64,
}

/// Metrics of one evaluation cell (one fold of one dataset).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub tp_rate: f64,
    pub tn_rate: f64,
    pub gm: f64,
    /// Mean wall-clock seconds per query; reported, never asserted.
    pub mean_query_time_s: f64,
}

impl MetricReport {
    pub fn new(rates: ClassRates, mean_query_time_s: f64) -> MetricReport {
        MetricReport {
            tp_rate: rates.tp_rate,
            tn_rate: rates.tn_rate,
            gm: rates.gm,
            mean_query_time_s,
        }
    }
}

/// Arithmetic mean of per-fold reports.
pub fn summarize(reports: &[MetricReport]) -> Result<MetricReport, EvalError> {
    if reports.is_empty() {
        return Err(EvalError::EmptySummary);
    }
    let n = reports.len() as f64;
    Ok(MetricReport {
        tp_rate: reports.iter().map(|r| r.tp_rate).sum::<f64>() / n,
        tn_rate: reports.iter().map(|r| r.tn_rate).sum::<f64>() / n,
        gm: reports.iter().map(|r| r.gm).sum::<f64>() / n,
        mean_query_time_s: reports.iter().map(|r| r.mean_query_time_s).sum::<f64>() / n,
    })
}
