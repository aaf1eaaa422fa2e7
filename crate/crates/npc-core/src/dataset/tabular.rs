//! Comma-separated reader and writer.
//!
//! The label column is chosen by header name (which implies a header row)
//! or by zero-based index (headerless). All other cells must be numeric.
//! Blank lines are skipped.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Read;

use super::{assign_labels, parse_feature, DataError, Dataset, FeatureMatrix};

/// How to find the label column in a CSV file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    /// Column name; the file must have a header row.
    Name(String),
    /// Zero-based column index; the file has no header row.
    Index(usize),
}

/// Parses CSV text into a [`Dataset`]. `name` is used as the dataset name
/// since CSV carries no relation line.
pub fn parse_csv(
    reader: impl Read,
    label: &LabelColumn,
    name: &str,
) -> Result<Dataset, DataError> {
    let mut builder = csv::ReaderBuilder::new();
    builder.has_headers(matches!(label, LabelColumn::Name(_)));
    builder.trim(csv::Trim::All);
    let mut csv_reader = builder.from_reader(reader);

    let (label_index, feature_names) = match label {
        LabelColumn::Name(wanted) => {
            let headers = csv_reader.headers().map_err(csv_error)?.clone();
            let Some(idx) = headers.iter().position(|h| h == wanted) else {
                return Err(DataError::MissingLabelColumn {
                    name: wanted.clone(),
                });
            };
            let names = headers
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != idx)
                .map(|(_, h)| h.to_string())
                .collect();
            (idx, Some(names))
        }
        LabelColumn::Index(idx) => (*idx, None),
    };

    let mut feature_rows: Vec<Vec<f64>> = Vec::new();
    let mut raw_labels: Vec<String> = Vec::new();
    let mut first_lines: BTreeMap<String, usize> = BTreeMap::new();
    let mut width: Option<usize> = None;

    for record in csv_reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(0);
        match width {
            None => {
                if label_index >= record.len() {
                    return Err(DataError::MissingLabelColumn {
                        name: format!("#{label_index}"),
                    });
                }
                width = Some(record.len());
            }
            Some(w) => {
                if record.len() != w {
                    return Err(DataError::RowArity {
                        line,
                        expected: w,
                        found: record.len(),
                    });
                }
            }
        }
        let mut row = Vec::with_capacity(record.len() - 1);
        for (col, cell) in record.iter().enumerate() {
            if col == label_index {
                first_lines.entry(cell.to_string()).or_insert(line);
                raw_labels.push(cell.to_string());
            } else {
                row.push(parse_feature(cell, line)?);
            }
        }
        feature_rows.push(row);
    }

    if feature_rows.is_empty() {
        return Err(DataError::Empty);
    }
    let labels = assign_labels(&raw_labels, &first_lines)?;
    let features = FeatureMatrix::from_rows(&feature_rows)?;
    let feature_names = feature_names
        .unwrap_or_else(|| (0..features.cols()).map(|i| format!("x{i}")).collect());
    Dataset::new(name, features, labels, feature_names)
}

/// Serializes a dataset to CSV with a header row; the label column is
/// written last under the name `class` with `positive`/`negative` values,
/// so `parse_csv(.., LabelColumn::Name("class"))` reproduces the input.
pub fn write_csv(dataset: &Dataset) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{},class", dataset.feature_names.join(","));
    for (row, label) in dataset.features.iter_rows().zip(&dataset.labels) {
        for value in row {
            let _ = write!(out, "{value},");
        }
        let tag = if label.is_minority() { "positive" } else { "negative" };
        let _ = writeln!(out, "{tag}");
    }
    out
}

fn csv_error(err: csv::Error) -> DataError {
    let line = err
        .position()
        .map(|p| p.line() as usize)
        .unwrap_or(0);
    match err.kind() {
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => DataError::RowArity {
            line,
            expected: *expected_len as usize,
            found: *len as usize,
        },
        csv::ErrorKind::Io(_) => DataError::Header {
            line,
            message: "io error while reading csv".to_string(),
        },
        _ => DataError::Header {
            line,
            message: err.to_string(),
        },
    }
}
