//! End-to-end experiment execution: discover datasets, split or load
//! folds, fit and classify per algorithm, and score each cell.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};

use npc_core::{
    knn_baseline, ClassLabel, Dataset, Decision, EvalError, FoldPlan, LabelColumn,
    NormalizationParams, Normalization, NpcModel,
};

use crate::config::{Algorithm, ExperimentConfig};
use crate::report::{CellMetrics, CellReport, RunReport, StopRankSummary};

/// One dataset plus its fold layout.
pub enum DataSource {
    /// A single file, split internally with seeded stratification.
    Single { name: String, dataset: Dataset },
    /// Official pre-made fold files found on disk: (train, test) pairs in
    /// fold order. These override internal splitting.
    PrePartitioned {
        name: String,
        folds: Vec<(Dataset, Dataset)>,
    },
}

impl DataSource {
    pub fn name(&self) -> &str {
        match self {
            DataSource::Single { name, .. } => name,
            DataSource::PrePartitioned { name, .. } => name,
        }
    }
}

/// Runs the full experiment described by `config` and assembles the
/// report. Deterministic for a fixed config apart from timing fields.
pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    let sources = discover(&config.data)?;
    if sources.is_empty() {
        bail!("no datasets found under the given paths");
    }
    let mut cells = Vec::new();
    for source in &sources {
        let folds = materialize_folds(source, config)?;
        for (fold_index, (train, test)) in folds.iter().enumerate() {
            for &algorithm in &config.algorithms {
                let cell = evaluate_cell(source.name(), fold_index, train, test, algorithm, config)
                    .with_context(|| {
                        format!(
                            "dataset {} fold {} algorithm {}",
                            source.name(),
                            fold_index,
                            algorithm
                        )
                    })?;
                cells.push(cell);
            }
        }
    }
    Ok(RunReport::new(config.clone(), cells))
}

fn materialize_folds(
    source: &DataSource,
    config: &ExperimentConfig,
) -> Result<Vec<(Dataset, Dataset)>> {
    match source {
        DataSource::Single { name, dataset } => {
            let plan = FoldPlan::stratified(dataset, config.folds, config.seed)
                .with_context(|| format!("cannot split dataset {name}"))?;
            (0..config.folds)
                .map(|f| {
                    plan.split(dataset, f)
                        .with_context(|| format!("dataset {name} fold {f}"))
                })
                .collect()
        }
        DataSource::PrePartitioned { folds, .. } => Ok(folds.clone()),
    }
}

fn evaluate_cell(
    dataset: &str,
    fold: usize,
    train: &Dataset,
    test: &Dataset,
    algorithm: Algorithm,
    config: &ExperimentConfig,
) -> Result<CellReport> {
    let (predicted, mean_query_time_s, stop_ranks) = match algorithm {
        Algorithm::Npc => {
            let model = NpcModel::fit(train, config.normalization)?;
            let started = Instant::now();
            let predictions = model.classify_batch(&test.features)?;
            let elapsed = started.elapsed().as_secs_f64();
            let labels: Vec<ClassLabel> = predictions.iter().map(|p| p.label).collect();
            let fallback_count = predictions
                .iter()
                .filter(|p| p.decided_by == Decision::Fallback)
                .count();
            let summary = StopRankSummary::from_stop_ranks(
                predictions.iter().map(|p| p.stop_rank).collect(),
                fallback_count,
            );
            (labels, elapsed / test.len().max(1) as f64, summary)
        }
        Algorithm::Knn(k) => {
            // The baseline gets the same preprocessing as the competitor.
            let (train_view, test_features) = match config.normalization {
                Normalization::MinMax => {
                    let params = NormalizationParams::fit(&train.features)?;
                    let mut normalized = train.clone();
                    normalized.features = params.transform(&train.features)?;
                    (normalized, params.transform(&test.features)?)
                }
                Normalization::None => (train.clone(), test.features.clone()),
            };
            let started = Instant::now();
            let labels: Vec<ClassLabel> = (0..test_features.rows())
                .map(|i| knn_baseline(&train_view, test_features.row(i), k))
                .collect::<Result<_, _>>()?;
            let elapsed = started.elapsed().as_secs_f64();
            (labels, elapsed / test.len().max(1) as f64, None)
        }
    };

    let confusion = npc_core::ConfusionMatrix::from_predictions(&predicted, &test.labels)?;
    let (metrics, undefined_reason) = match confusion.class_rates() {
        Ok(rates) => (
            Some(CellMetrics {
                tp_rate: rates.tp_rate,
                tn_rate: rates.tn_rate,
                gm: rates.gm,
            }),
            None,
        ),
        Err(err @ EvalError::UndefinedMetric { .. }) => {
            eprintln!(
                "warning: {dataset} fold {fold} {algorithm}: {err}; cell excluded from averages"
            );
            (None, Some(err.to_string()))
        }
        Err(other) => return Err(other.into()),
    };

    Ok(CellReport {
        dataset: dataset.to_string(),
        algorithm,
        fold,
        metrics,
        undefined_reason,
        mean_query_time_s,
        stop_ranks,
    })
}

/// Expands the configured paths into data sources. Directories are
/// scanned recursively; fold files following the `<stem>-<k>-<i>tra.dat`
/// / `...tst.dat` convention are grouped into pre-partitioned sources,
/// and every other `.dat` or `.csv` file loads as a single dataset.
pub fn discover(paths: &[PathBuf]) -> Result<Vec<DataSource>> {
    let mut files = Vec::new();
    for path in paths {
        if !path.exists() {
            bail!("dataset path {} does not exist", path.display());
        }
        collect_files(path, &mut files)?;
    }
    files.sort();

    let mut fold_groups: BTreeMap<String, Vec<(usize, usize, bool, PathBuf)>> = BTreeMap::new();
    let mut singles = Vec::new();
    for file in files {
        let file_name = file
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        if let Some((stem, k, fold, is_train)) = parse_fold_file_name(&file_name) {
            fold_groups
                .entry(stem)
                .or_default()
                .push((k, fold, is_train, file));
        } else {
            match file.extension().and_then(|e| e.to_str()) {
                Some("dat") | Some("csv") => singles.push(file),
                _ => {}
            }
        }
    }

    let mut sources = Vec::new();
    for (stem, mut members) in fold_groups {
        members.sort();
        let k = members[0].0;
        if members.iter().any(|&(mk, ..)| mk != k) {
            bail!("fold files for {stem} disagree on the fold count");
        }
        let mut folds = Vec::with_capacity(k);
        for fold in 1..=k {
            let train_path = members
                .iter()
                .find(|&&(_, f, is_train, _)| f == fold && is_train)
                .map(|(.., p)| p)
                .ok_or_else(|| anyhow!("{stem}: missing training file for fold {fold}"))?;
            let test_path = members
                .iter()
                .find(|&&(_, f, is_train, _)| f == fold && !is_train)
                .map(|(.., p)| p)
                .ok_or_else(|| anyhow!("{stem}: missing test file for fold {fold}"))?;
            let train = load_file(train_path)
                .with_context(|| format!("loading {}", train_path.display()))?;
            let test = load_file(test_path)
                .with_context(|| format!("loading {}", test_path.display()))?;
            if !train.has_both_classes() {
                bail!("{stem}: training file for fold {fold} contains a single class");
            }
            folds.push((train, test));
        }
        sources.push(DataSource::PrePartitioned { name: stem, folds });
    }
    for file in singles {
        let dataset =
            load_file(&file).with_context(|| format!("loading {}", file.display()))?;
        let name = file
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| dataset.name.clone());
        sources.push(DataSource::Single { name, dataset });
    }
    sources.sort_by(|a, b| a.name().cmp(b.name()));
    Ok(sources)
}

fn collect_files(path: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    if path.is_dir() {
        for entry in std::fs::read_dir(path)
            .with_context(|| format!("cannot read directory {}", path.display()))?
        {
            collect_files(&entry?.path(), out)?;
        }
    } else {
        out.push(path.to_path_buf());
    }
    Ok(())
}

/// Recognizes KEEL-style fold file names: `<stem>-<k>-<i>tra.dat` or
/// `<stem>-<k>-<i>tst.dat`. Returns (stem, k, fold index, is_train).
fn parse_fold_file_name(file_name: &str) -> Option<(String, usize, usize, bool)> {
    let rest = file_name.strip_suffix(".dat")?;
    let (rest, is_train) = if let Some(r) = rest.strip_suffix("tra") {
        (r, true)
    } else if let Some(r) = rest.strip_suffix("tst") {
        (r, false)
    } else {
        return None;
    };
    let digits_start = rest
        .char_indices()
        .rev()
        .take_while(|(_, c)| c.is_ascii_digit())
        .last()?
        .0;
    let fold: usize = rest[digits_start..].parse().ok()?;
    let rest = rest[..digits_start].strip_suffix('-')?;
    let digits_start = rest
        .char_indices()
        .rev()
        .take_while(|(_, c)| c.is_ascii_digit())
        .last()?
        .0;
    let k: usize = rest[digits_start..].parse().ok()?;
    let stem = rest[..digits_start].strip_suffix('-')?;
    if stem.is_empty() || fold == 0 || fold > k {
        return None;
    }
    Some((stem.to_string(), k, fold, is_train))
}

/// Loads a `.dat` (KEEL) or `.csv` file. CSV files need a header row; the
/// label column is the one named `class` (case-insensitive) when present,
/// otherwise the last column.
pub fn load_file(path: &Path) -> Result<Dataset> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("dat") => Ok(Dataset::from_keel_path(path)?),
        Some("csv") => {
            let text = std::fs::read_to_string(path)?;
            let header = text.lines().next().unwrap_or("");
            let label = header
                .split(',')
                .map(str::trim)
                .find(|h| h.eq_ignore_ascii_case("class"))
                .or_else(|| header.split(',').map(str::trim).last())
                .ok_or_else(|| anyhow!("{}: empty header", path.display()))?;
            Ok(Dataset::from_csv_path(path, &LabelColumn::Name(label.to_string()))?)
        }
        _ => bail!("{}: unsupported dataset extension", path.display()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fold_file_names_are_recognized() {
        assert_eq!(
            parse_fold_file_name("new-thyroid1-5-1tra.dat"),
            Some(("new-thyroid1".to_string(), 5, 1, true))
        );
        assert_eq!(
            parse_fold_file_name("yeast5-5-4tst.dat"),
            Some(("yeast5".to_string(), 5, 4, false))
        );
        assert_eq!(
            parse_fold_file_name("glass-0-1-5_vs_2-5-2tra.dat"),
            Some(("glass-0-1-5_vs_2".to_string(), 5, 2, true))
        );
        assert_eq!(parse_fold_file_name("plain.dat"), None);
        assert_eq!(parse_fold_file_name("x-5-6tra.dat"), None);
        assert_eq!(parse_fold_file_name("x-5-0tra.dat"), None);
        assert_eq!(parse_fold_file_name("x-5-1tra.csv"), None);
    }
}
