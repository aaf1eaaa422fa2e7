//! Run reports: one cell per (dataset, algorithm, fold), serialized as
//! JSON lines, CSV, or an aligned text table.
//!
//! The JSON-lines form is the canonical one: the first line carries the
//! tool version and the echoed configuration, each further line one cell.
//! Parsing it back yields a report equal to the one written. Timing
//! fields are inherently non-deterministic and are the only fields
//! excluded when comparing reports for reproducibility.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use crate::config::{Algorithm, ExperimentConfig, ReportFormat};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellMetrics {
    pub tp_rate: f64,
    pub tn_rate: f64,
    pub gm: f64,
}

/// Distribution of competition stop ranks over one fold's queries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopRankSummary {
    pub min: usize,
    pub median: f64,
    pub max: usize,
    /// Queries decided by the full-sum fallback rather than a threshold
    /// crossing.
    pub fallback_count: usize,
}

impl StopRankSummary {
    pub fn from_stop_ranks(mut ranks: Vec<usize>, fallback_count: usize) -> Option<StopRankSummary> {
        if ranks.is_empty() {
            return None;
        }
        ranks.sort_unstable();
        let median = if ranks.len() % 2 == 1 {
            ranks[ranks.len() / 2] as f64
        } else {
            (ranks[ranks.len() / 2 - 1] + ranks[ranks.len() / 2]) as f64 / 2.0
        };
        Some(StopRankSummary {
            min: ranks[0],
            median,
            max: *ranks.last().unwrap(),
            fallback_count,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub dataset: String,
    pub algorithm: Algorithm,
    pub fold: usize,
    /// Absent when the metric is undefined for this fold (a class missing
    /// from the test truth); `undefined_reason` then says why.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub metrics: Option<CellMetrics>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub undefined_reason: Option<String>,
    /// Mean wall-clock seconds per query; excluded from determinism
    /// comparisons.
    pub mean_query_time_s: f64,
    /// Present for the progressive classifier only.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub stop_ranks: Option<StopRankSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    version: String,
    config: ExperimentConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub version: String,
    pub config: ExperimentConfig,
    pub cells: Vec<CellReport>,
}

impl RunReport {
    pub fn new(config: ExperimentConfig, mut cells: Vec<CellReport>) -> RunReport {
        cells.sort_by(|a, b| {
            (&a.dataset, a.algorithm, a.fold).cmp(&(&b.dataset, b.algorithm, b.fold))
        });
        RunReport {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            cells,
        }
    }

    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        let header = Header {
            version: self.version.clone(),
            config: self.config.clone(),
        };
        out.push_str(&serde_json::to_string(&header)?);
        out.push('\n');
        for cell in &self.cells {
            out.push_str(&serde_json::to_string(cell)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn from_jsonl(text: &str) -> Result<RunReport> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header_line = lines.next().context("empty report")?;
        let header: Header =
            serde_json::from_str(header_line).context("malformed report header")?;
        let cells: Vec<CellReport> = lines
            .enumerate()
            .map(|(i, line)| {
                serde_json::from_str(line)
                    .with_context(|| format!("malformed report cell on line {}", i + 2))
            })
            .collect::<Result<_>>()?;
        Ok(RunReport {
            version: header.version,
            config: header.config,
            cells,
        })
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record([
            "dataset",
            "algorithm",
            "fold",
            "tp_rate",
            "tn_rate",
            "gm",
            "mean_query_time_s",
            "stop_rank_min",
            "stop_rank_median",
            "stop_rank_max",
            "fallback_count",
            "undefined_reason",
        ])?;
        for cell in &self.cells {
            let metric = |f: fn(&CellMetrics) -> f64| {
                cell.metrics.as_ref().map(|m| f(m).to_string()).unwrap_or_default()
            };
            writer.write_record([
                cell.dataset.clone(),
                cell.algorithm.to_string(),
                cell.fold.to_string(),
                metric(|m| m.tp_rate),
                metric(|m| m.tn_rate),
                metric(|m| m.gm),
                cell.mean_query_time_s.to_string(),
                cell.stop_ranks.map(|s| s.min.to_string()).unwrap_or_default(),
                cell.stop_ranks.map(|s| s.median.to_string()).unwrap_or_default(),
                cell.stop_ranks.map(|s| s.max.to_string()).unwrap_or_default(),
                cell.stop_ranks
                    .map(|s| s.fallback_count.to_string())
                    .unwrap_or_default(),
                cell.undefined_reason.clone().unwrap_or_default(),
            ])?;
        }
        let bytes = writer.into_inner().context("csv writer")?;
        Ok(String::from_utf8(bytes).context("csv output was not utf-8")?)
    }

    pub fn to_pretty(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "npc {} run report", self.version);
        let _ = writeln!(
            out,
            "folds={} seed={} normalize={} algorithms={}",
            self.config.folds,
            self.config.seed,
            self.config.normalization,
            self.config
                .algorithms
                .iter()
                .map(|a| a.to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
        let name_width = self
            .cells
            .iter()
            .map(|c| c.dataset.len())
            .max()
            .unwrap_or(7)
            .max("dataset".len());
        let _ = writeln!(
            out,
            "{:<name_width$}  {:>8}  {:>4}  {:>8}  {:>8}  {:>8}  {:>12}  {:>14}",
            "dataset", "algo", "fold", "tp_rate", "tn_rate", "gm", "query_time_s", "stop(min/md/mx)"
        );
        for cell in &self.cells {
            let (tp, tn, gm) = match &cell.metrics {
                Some(m) => (
                    format!("{:.4}", m.tp_rate),
                    format!("{:.4}", m.tn_rate),
                    format!("{:.4}", m.gm),
                ),
                None => ("undef".into(), "undef".into(), "undef".into()),
            };
            let stops = cell
                .stop_ranks
                .map(|s| format!("{}/{}/{}", s.min, s.median, s.max))
                .unwrap_or_else(|| "-".into());
            let _ = writeln!(
                out,
                "{:<name_width$}  {:>8}  {:>4}  {:>8}  {:>8}  {:>8}  {:>12.3e}  {:>14}",
                cell.dataset,
                cell.algorithm.to_string(),
                cell.fold,
                tp,
                tn,
                gm,
                cell.mean_query_time_s,
                stops
            );
        }
        // Per-dataset, per-algorithm means over folds with defined metrics.
        let _ = writeln!(out);
        let mut groups: Vec<(&str, Algorithm)> = self
            .cells
            .iter()
            .map(|c| (c.dataset.as_str(), c.algorithm))
            .collect();
        groups.dedup();
        for (dataset, algorithm) in groups {
            let gms: Vec<f64> = self
                .cells
                .iter()
                .filter(|c| c.dataset == dataset && c.algorithm == algorithm)
                .filter_map(|c| c.metrics.as_ref().map(|m| m.gm))
                .collect();
            if gms.is_empty() {
                let _ = writeln!(out, "mean gm {dataset} {algorithm}: undefined");
            } else {
                let mean: f64 = gms.iter().sum::<f64>() / gms.len() as f64;
                let _ = writeln!(out, "mean gm {dataset} {algorithm}: {mean:.4}");
            }
        }
        out
    }

    /// Writes every requested format into `out_dir`, returning the paths.
    pub fn write_all(&self, out_dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(out_dir)
            .with_context(|| format!("cannot create output directory {}", out_dir.display()))?;
        let mut written = Vec::new();
        for format in &self.config.formats {
            let path = out_dir.join(format.file_name());
            let content = match format {
                ReportFormat::JsonLines => self.to_jsonl()?,
                ReportFormat::Csv => self.to_csv()?,
                ReportFormat::PrettyTable => self.to_pretty(),
            };
            fs::write(&path, content)
                .with_context(|| format!("cannot write {}", path.display()))?;
            written.push(path);
        }
        if written.is_empty() {
            bail!("no output formats requested");
        }
        Ok(written)
    }
}
