//! Dataset loading, validation, normalization, and partitioning.
//!
//! Binary datasets carry real-valued features and `{majority, minority}`
//! labels. The minority class is the positive class throughout: KEEL's
//! `positive`/`negative` spellings map directly, and for any other pair of
//! class values the rarer one becomes the minority.

mod folds;
mod keel;
mod normalize;
mod tabular;

pub use folds::FoldPlan;
pub use keel::{parse_keel, write_keel};
pub use normalize::NormalizationParams;
pub use tabular::{parse_csv, write_csv, LabelColumn};

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use thiserror::Error;

/// Errors raised while loading, validating, or partitioning datasets.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    /// Structural problems in a header or directive line.
    #[error("line {line}: {message}")]
    Header { line: usize, message: String },
    #[error("line {line}: expected {expected} values, found {found}")]
    RowArity {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: invalid numeric value {token:?}")]
    NonNumeric { line: usize, token: String },
    #[error("line {line}: non-finite feature value {token:?}")]
    NonFinite { line: usize, token: String },
    #[error("line {line}: class value {token:?} is not one of the declared values")]
    UnknownClassValue { line: usize, token: String },
    #[error("expected exactly two class values, found {found}{}", at_line(*.line))]
    ClassValueCount { found: usize, line: Option<usize> },
    #[error("dataset contains a single class; two classes are required")]
    SingleClass,
    #[error("label column {name:?} not found")]
    MissingLabelColumn { name: String },
    #[error("dataset has no feature columns")]
    NoFeatures,
    #[error("dataset is empty")]
    Empty,
    #[error("feature matrix has {rows} rows but {labels} labels")]
    LabelLength { rows: usize, labels: usize },
    #[error("expected {expected} features, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("fold count {k} must be between 2 and the number of samples ({n})")]
    InvalidFoldCount { k: usize, n: usize },
    #[error("training portion of fold {fold} contains a single class")]
    SingleClassTrainingFold { fold: usize },
}

fn at_line(line: Option<usize>) -> String {
    match line {
        Some(l) => format!(" (line {l})"),
        None => String::new(),
    }
}

/// Binary class label. The minority class is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassLabel {
    Majority,
    Minority,
}

impl ClassLabel {
    /// Numeric encoding: majority is 0, minority is 1.
    pub fn bit(self) -> u8 {
        match self {
            ClassLabel::Majority => 0,
            ClassLabel::Minority => 1,
        }
    }

    pub fn from_bit(bit: u8) -> Option<ClassLabel> {
        match bit {
            0 => Some(ClassLabel::Majority),
            1 => Some(ClassLabel::Minority),
            _ => None,
        }
    }

    pub fn is_minority(self) -> bool {
        self == ClassLabel::Minority
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bit())
    }
}

/// Dense row-major matrix of feature values.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl FeatureMatrix {
    pub fn with_columns(cols: usize) -> FeatureMatrix {
        FeatureMatrix {
            data: Vec::new(),
            rows: 0,
            cols,
        }
    }

    /// Builds a matrix from row vectors. All rows must share one length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<FeatureMatrix, DataError> {
        let cols = rows.first().map(|r| r.len()).unwrap_or(0);
        let mut m = FeatureMatrix::with_columns(cols);
        for row in rows {
            if row.len() != cols {
                return Err(DataError::DimensionMismatch {
                    expected: cols,
                    found: row.len(),
                });
            }
            m.push_row(row);
        }
        Ok(m)
    }

    /// Appends a row; panics if the length does not match the column count.
    pub fn push_row(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.cols, "row length must match column count");
        self.data.extend_from_slice(row);
        self.rows += 1;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        // chunks_exact(0) would panic; an empty matrix yields nothing.
        self.data.chunks(self.cols.max(1)).take(self.rows)
    }

    /// New matrix holding the given rows, in the given order.
    pub fn select(&self, indices: &[usize]) -> FeatureMatrix {
        let mut m = FeatureMatrix::with_columns(self.cols);
        for &i in indices {
            m.push_row(self.row(i));
        }
        m
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }
}

/// A named binary-class dataset: features, labels, and feature names.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub features: FeatureMatrix,
    pub labels: Vec<ClassLabel>,
    pub feature_names: Vec<String>,
}

impl Dataset {
    /// Validates finiteness, shape agreement, and non-emptiness.
    ///
    /// Single-class label vectors are accepted here because evaluation
    /// slices (test folds of a rare class) can legitimately lack a class;
    /// training entry points reject them separately.
    pub fn new(
        name: impl Into<String>,
        features: FeatureMatrix,
        labels: Vec<ClassLabel>,
        feature_names: Vec<String>,
    ) -> Result<Dataset, DataError> {
        if features.rows() == 0 {
            return Err(DataError::Empty);
        }
        if features.cols() == 0 {
            return Err(DataError::NoFeatures);
        }
        if features.rows() != labels.len() {
            return Err(DataError::LabelLength {
                rows: features.rows(),
                labels: labels.len(),
            });
        }
        if feature_names.len() != features.cols() {
            return Err(DataError::DimensionMismatch {
                expected: features.cols(),
                found: feature_names.len(),
            });
        }
        if let Some(bad) = features.values().iter().find(|v| !v.is_finite()) {
            return Err(DataError::NonFinite {
                line: 0,
                token: bad.to_string(),
            });
        }
        Ok(Dataset {
            name: name.into(),
            features,
            labels,
            feature_names,
        })
    }

    pub fn from_keel_path(path: impl AsRef<Path>) -> Result<Dataset, DataError> {
        let path = path.as_ref();
        let reader = BufReader::new(File::open(path)?);
        parse_keel(reader)
    }

    pub fn from_csv_path(
        path: impl AsRef<Path>,
        label: &LabelColumn,
    ) -> Result<Dataset, DataError> {
        let path = path.as_ref();
        let reader = BufReader::new(File::open(path)?);
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        parse_csv(reader, label, &name)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// (majority count, minority count).
    pub fn class_counts(&self) -> (usize, usize) {
        let minority = self.labels.iter().filter(|l| l.is_minority()).count();
        (self.labels.len() - minority, minority)
    }

    pub fn has_both_classes(&self) -> bool {
        let (maj, min) = self.class_counts();
        maj > 0 && min > 0
    }

    /// New dataset holding the given rows, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            features: self.features.select(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
        }
    }
}

/// Maps the raw class strings of a two-class CSV onto labels.
///
/// `positive`/`negative` (case-insensitive, trimmed) are honored when both
/// appear; otherwise the rarer value becomes the minority, with a
/// lexicographic tie-break toward the smaller value. CSV carries no class
/// declaration, so exactly two distinct values must appear in the data.
///
/// `first_lines` carries the first line each distinct value was seen on,
/// for error reporting.
pub(crate) fn assign_labels(
    raw: &[String],
    first_lines: &BTreeMap<String, usize>,
) -> Result<Vec<ClassLabel>, DataError> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for value in raw {
        *counts.entry(value.as_str()).or_insert(0) += 1;
    }
    if counts.len() != 2 {
        if counts.len() < 2 {
            return Err(DataError::SingleClass);
        }
        // Report the line where a third distinct value first appeared.
        let mut seen: Vec<(&String, &usize)> = first_lines.iter().collect();
        seen.sort_by_key(|(_, line)| **line);
        return Err(DataError::ClassValueCount {
            found: counts.len(),
            line: seen.get(2).map(|(_, line)| **line),
        });
    }
    let values: Vec<&str> = counts.keys().copied().collect();
    let minority_value = minority_class_value(values[0], values[1], counts[values[0]], counts[values[1]]);
    Ok(raw
        .iter()
        .map(|v| {
            if v == minority_value {
                ClassLabel::Minority
            } else {
                ClassLabel::Majority
            }
        })
        .collect())
}

/// Decides which of two class values is the minority/positive one.
pub(crate) fn minority_class_value<'a>(
    a: &'a str,
    b: &'a str,
    count_a: usize,
    count_b: usize,
) -> &'a str {
    let a_trim = a.trim();
    let b_trim = b.trim();
    if a_trim.eq_ignore_ascii_case("positive") && b_trim.eq_ignore_ascii_case("negative") {
        return a;
    }
    if b_trim.eq_ignore_ascii_case("positive") && a_trim.eq_ignore_ascii_case("negative") {
        return b;
    }
    match count_a.cmp(&count_b) {
        std::cmp::Ordering::Less => a,
        std::cmp::Ordering::Greater => b,
        std::cmp::Ordering::Equal => a.min(b),
    }
}

/// Parses a feature token as a finite f64, reporting the source line.
pub(crate) fn parse_feature(token: &str, line: usize) -> Result<f64, DataError> {
    let value: f64 = token.trim().parse().map_err(|_| DataError::NonNumeric {
        line,
        token: token.trim().to_string(),
    })?;
    if !value.is_finite() {
        return Err(DataError::NonFinite {
            line,
            token: token.trim().to_string(),
        });
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_bits_round_trip() {
        assert_eq!(ClassLabel::from_bit(0), Some(ClassLabel::Majority));
        assert_eq!(ClassLabel::from_bit(1), Some(ClassLabel::Minority));
        assert_eq!(ClassLabel::from_bit(2), None);
        assert_eq!(ClassLabel::Minority.bit(), 1);
    }

    #[test]
    fn matrix_select_preserves_rows() {
        let m = FeatureMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        let picked = m.select(&[2, 0]);
        assert_eq!(picked.row(0), &[5.0, 6.0]);
        assert_eq!(picked.row(1), &[1.0, 2.0]);
        assert_eq!(picked.rows(), 2);
    }

    #[test]
    fn dataset_rejects_shape_mismatch() {
        let m = FeatureMatrix::from_rows(&[vec![1.0], vec![2.0]]).unwrap();
        let err = Dataset::new(
            "t",
            m,
            vec![ClassLabel::Majority],
            vec!["x".into()],
        )
        .unwrap_err();
        assert!(matches!(err, DataError::LabelLength { rows: 2, labels: 1 }));
    }

    #[test]
    fn dataset_rejects_non_finite() {
        let m = FeatureMatrix::from_rows(&[vec![1.0], vec![f64::NAN]]).unwrap();
        let err = Dataset::new(
            "t",
            m,
            vec![ClassLabel::Majority, ClassLabel::Minority],
            vec!["x".into()],
        )
        .unwrap_err();
        assert!(matches!(err, DataError::NonFinite { .. }));
    }

    #[test]
    fn minority_prefers_positive_spelling() {
        // "positive" wins even when it is the more common value.
        assert_eq!(minority_class_value("positive", "negative", 10, 2), "positive");
        assert_eq!(minority_class_value("negative", "Positive", 2, 10), "Positive");
    }

    #[test]
    fn minority_falls_back_to_count_then_lexicographic() {
        assert_eq!(minority_class_value("g", "b", 7, 3), "b");
        assert_eq!(minority_class_value("g", "b", 3, 3), "b");
        assert_eq!(minority_class_value("a", "b", 3, 3), "a");
    }
}
