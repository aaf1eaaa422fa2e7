//! Friedman rank test with Holm post-hoc comparisons against the
//! best-ranked algorithm.
//!
//! Mean ranks come from tie-averaged per-dataset rankings (rank 1 is
//! best). Each non-control algorithm is compared to the control through
//! `z = (R_i - R_control) / sqrt(k(k+1) / (6N))` with a two-sided normal
//! p-value. Holm's step-down procedure orders the p-values ascending and
//! tests the i-th smallest against `alpha / (m - i + 1)` for `m = k - 1`
//! hypotheses, stopping at the first failure.

use std::fmt;

use super::normal::normal_upper_tail;
use super::ranking::rank_rows;
use super::{EvalError, ScoreTable};

/// One algorithm-versus-control comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub algorithm: String,
    pub mean_rank: f64,
    pub z: f64,
    /// Two-sided, unadjusted.
    pub p_value: f64,
    /// Holm step threshold this p-value is compared against.
    pub holm_threshold: f64,
    /// Rejected by the step-down procedure at level alpha.
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FriedmanResult {
    pub control: String,
    pub control_mean_rank: f64,
    /// Friedman chi-square statistic over k-1 degrees of freedom.
    pub statistic: f64,
    pub alpha: f64,
    pub n_datasets: usize,
    pub n_algorithms: usize,
    /// Mean rank per algorithm, in the table's column order.
    pub mean_ranks: Vec<(String, f64)>,
    /// Non-control comparisons, ordered by mean rank ascending.
    pub comparisons: Vec<Comparison>,
}

/// Runs the Friedman test on a scores-higher-is-better table and the Holm
/// post-hoc comparison of every algorithm against the best-ranked one.
pub fn friedman_holm(table: &ScoreTable, alpha: f64) -> Result<FriedmanResult, EvalError> {
    let n = table.n_datasets();
    let k = table.n_algorithms();
    if n < 2 || k < 2 {
        return Err(EvalError::TableTooSmall { rows: n, cols: k });
    }
    if table
        .rows()
        .iter()
        .all(|row| row.iter().all(|&v| v == row[0]))
    {
        return Err(EvalError::DegenerateTable);
    }

    let ranks = rank_rows(table, true);
    let mean_ranks: Vec<f64> = (0..k)
        .map(|j| ranks.iter().map(|row| row[j]).sum::<f64>() / n as f64)
        .collect();

    // Control: best (lowest) mean rank; earlier column wins exact ties.
    let control_index = mean_ranks
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.total_cmp(b))
        .map(|(i, _)| i)
        .expect("at least two columns");

    let nf = n as f64;
    let kf = k as f64;
    let statistic = 12.0 * nf / (kf * (kf + 1.0))
        * (mean_ranks.iter().map(|r| r * r).sum::<f64>() - kf * (kf + 1.0) * (kf + 1.0) / 4.0);

    let standard_error = (kf * (kf + 1.0) / (6.0 * nf)).sqrt();
    let mut comparisons: Vec<Comparison> = (0..k)
        .filter(|&j| j != control_index)
        .map(|j| {
            let z = (mean_ranks[j] - mean_ranks[control_index]) / standard_error;
            let p_value = 2.0 * normal_upper_tail(z.abs());
            Comparison {
                algorithm: table.algorithms()[j].clone(),
                mean_rank: mean_ranks[j],
                z,
                p_value,
                holm_threshold: 0.0,
                significant: false,
            }
        })
        .collect();

    let p_values: Vec<f64> = comparisons.iter().map(|c| c.p_value).collect();
    for (comparison, (threshold, significant)) in
        comparisons.iter_mut().zip(holm_step_down(&p_values, alpha))
    {
        comparison.holm_threshold = threshold;
        comparison.significant = significant;
    }

    comparisons.sort_by(|a, b| {
        a.mean_rank
            .total_cmp(&b.mean_rank)
            .then_with(|| a.algorithm.cmp(&b.algorithm))
    });

    Ok(FriedmanResult {
        control: table.algorithms()[control_index].clone(),
        control_mean_rank: mean_ranks[control_index],
        statistic,
        alpha,
        n_datasets: n,
        n_algorithms: k,
        mean_ranks: table
            .algorithms()
            .iter()
            .cloned()
            .zip(mean_ranks)
            .collect(),
        comparisons,
    })
}

/// Holm's step-down assignment: the i-th smallest of `m` p-values is
/// tested against `alpha / (m - i + 1)`; the first failure retains that
/// hypothesis and every larger p-value after it. Returns, in input order,
/// each p-value's step threshold and whether it was rejected. Ties keep
/// input order (stable sort).
fn holm_step_down(p_values: &[f64], alpha: f64) -> Vec<(f64, bool)> {
    let m = p_values.len();
    let mut by_p: Vec<usize> = (0..m).collect();
    by_p.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]));
    let mut out = vec![(0.0, false); m];
    let mut rejecting = true;
    for (step, &idx) in by_p.iter().enumerate() {
        let threshold = alpha / (m - step) as f64;
        rejecting = rejecting && p_values[idx] < threshold;
        out[idx] = (threshold, rejecting);
    }
    out
}

impl fmt::Display for FriedmanResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "Friedman test over {} datasets x {} algorithms: chi-square = {:.4} (alpha = {})",
            self.n_datasets, self.n_algorithms, self.statistic, self.alpha
        )?;
        let name_width = self
            .mean_ranks
            .iter()
            .map(|(name, _)| name.len())
            .max()
            .unwrap_or(9)
            .max("Algorithm".len());
        writeln!(
            f,
            "{:<name_width$}  {:>8}  {:>10}  {:>10}",
            "Algorithm", "Ranking", "p", "Holm"
        )?;
        writeln!(
            f,
            "{:<name_width$}  {:>8.4}  {:>10}  {:>10}",
            self.control, self.control_mean_rank, "-", "-"
        )?;
        for c in &self.comparisons {
            writeln!(
                f,
                "{:<name_width$}  {:>8.4}  {:>10.6}  {:>10.6}{}",
                c.algorithm,
                c.mean_rank,
                c.p_value,
                c.holm_threshold,
                if c.significant { "  *" } else { "" }
            )?;
        }
        Ok(())
    }
}
