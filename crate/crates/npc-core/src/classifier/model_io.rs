//! Version-tagged plain-text model export and import.
//!
//! The format stores everything needed to rebuild a model exactly: class
//! counts, normalization bounds, and the (already normalized) training
//! matrix with labels. Grade table and threshold are recomputed from the
//! counts on load. Floats are written in Rust's shortest round-trip form,
//! so import reproduces the exported model bit for bit.
//!
//! ```text
//! npc-model v1
//! stats <n_minority> <n_majority>
//! normalization minmax|none
//! min <d floats>          (only with minmax)
//! max <d floats>
//! features <rows> <cols>
//! <rows lines of cols floats>
//! labels <rows 0/1 tokens>
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use super::{NpcModel, TrainError};
use crate::dataset::{ClassLabel, DataError, FeatureMatrix, NormalizationParams};

const MAGIC: &str = "npc-model";
const VERSION: &str = "v1";

#[derive(Debug, Error)]
pub enum ModelFormatError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not an npc model file (expected `{MAGIC} {VERSION}` header)")]
    BadMagic,
    #[error("unsupported model version {found:?} (expected {VERSION})")]
    UnsupportedVersion { found: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("model is invalid: {0}")]
    Train(#[from] TrainError),
}

impl NpcModel {
    /// Serializes the model to its text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC} {VERSION}");
        let _ = writeln!(
            out,
            "stats {} {}",
            self.stats.n_minority(),
            self.stats.n_majority()
        );
        match &self.normalization {
            Some(params) => {
                let _ = writeln!(out, "normalization minmax");
                let _ = writeln!(out, "min {}", join_floats(params.mins()));
                let _ = writeln!(out, "max {}", join_floats(params.maxs()));
            }
            None => {
                let _ = writeln!(out, "normalization none");
            }
        }
        let _ = writeln!(
            out,
            "features {} {}",
            self.features.rows(),
            self.features.cols()
        );
        for row in self.features.iter_rows() {
            let _ = writeln!(out, "{}", join_floats(row));
        }
        let labels: Vec<String> = self.labels.iter().map(|l| l.bit().to_string()).collect();
        let _ = writeln!(out, "labels {}", labels.join(" "));
        out
    }

    /// Parses a model from its text format.
    pub fn from_text(text: &str) -> Result<NpcModel, ModelFormatError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

        let (_, header) = lines.next().ok_or(ModelFormatError::BadMagic)?;
        let mut header_parts = header.split_whitespace();
        if header_parts.next() != Some(MAGIC) {
            return Err(ModelFormatError::BadMagic);
        }
        match header_parts.next() {
            Some(VERSION) => {}
            Some(other) => {
                return Err(ModelFormatError::UnsupportedVersion {
                    found: other.to_string(),
                })
            }
            None => return Err(ModelFormatError::BadMagic),
        }

        let (line, stats_line) = expect_line(&mut lines, "stats")?;
        let counts = parse_fields::<usize>(stats_line, line, "stats")?;
        if counts.len() != 2 {
            return Err(parse_err(line, "stats needs two counts"));
        }

        let (line, norm_line) = expect_line(&mut lines, "normalization")?;
        let normalization = match norm_line.trim() {
            "minmax" => {
                let (l_min, min_line) = expect_line(&mut lines, "min")?;
                let mins = parse_fields::<f64>(min_line, l_min, "min")?;
                let (l_max, max_line) = expect_line(&mut lines, "max")?;
                let maxs = parse_fields::<f64>(max_line, l_max, "max")?;
                let params = NormalizationParams::from_bounds(mins, maxs)
                    .map_err(|e| parse_err(l_max, &e.to_string()))?;
                Some(params)
            }
            "none" => None,
            other => return Err(parse_err(line, &format!("unknown normalization {other:?}"))),
        };

        let (line, dims_line) = expect_line(&mut lines, "features")?;
        let dims = parse_fields::<usize>(dims_line, line, "features")?;
        if dims.len() != 2 {
            return Err(parse_err(line, "features needs rows and cols"));
        }
        let (rows, cols) = (dims[0], dims[1]);
        let mut features = FeatureMatrix::with_columns(cols);
        for _ in 0..rows {
            let (line, row_text) = lines
                .next()
                .ok_or_else(|| parse_err(0, "unexpected end of file in feature rows"))?;
            let row = parse_fields::<f64>(row_text, line, "feature row")?;
            if row.len() != cols {
                return Err(parse_err(
                    line,
                    &format!("expected {cols} values, found {}", row.len()),
                ));
            }
            if let Some(bad) = row.iter().find(|v| !v.is_finite()) {
                return Err(parse_err(line, &format!("non-finite feature value {bad}")));
            }
            features.push_row(&row);
        }

        let (line, labels_line) = expect_line(&mut lines, "labels")?;
        let bits = parse_fields::<u8>(labels_line, line, "labels")?;
        let labels: Vec<ClassLabel> = bits
            .iter()
            .map(|&b| ClassLabel::from_bit(b))
            .collect::<Option<_>>()
            .ok_or_else(|| parse_err(line, "labels must be 0 or 1"))?;
        if labels.len() != rows {
            return Err(parse_err(
                line,
                &format!("expected {rows} labels, found {}", labels.len()),
            ));
        }

        let model = NpcModel::from_parts(features, labels, normalization)?;
        // The stored counts are redundant with the labels; verify they
        // agree so silent corruption is caught.
        if model.stats.n_minority() != counts[0] || model.stats.n_majority() != counts[1] {
            return Err(ModelFormatError::Train(TrainError::Data(
                DataError::Header {
                    line: 2,
                    message: "stats counts disagree with labels".to_string(),
                },
            )));
        }
        Ok(model)
    }

    pub fn write_to_path(&self, path: impl AsRef<Path>) -> Result<(), ModelFormatError> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read_from_path(path: impl AsRef<Path>) -> Result<NpcModel, ModelFormatError> {
        let text = fs::read_to_string(path)?;
        NpcModel::from_text(&text)
    }
}

fn join_floats(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn parse_err(line: usize, message: &str) -> ModelFormatError {
    ModelFormatError::Parse {
        line,
        message: message.to_string(),
    }
}

fn expect_line<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    keyword: &str,
) -> Result<(usize, &'a str), ModelFormatError> {
    let (line, text) = lines
        .next()
        .ok_or_else(|| parse_err(0, &format!("missing {keyword} line")))?;
    let rest = text
        .strip_prefix(keyword)
        .ok_or_else(|| parse_err(line, &format!("expected {keyword} line, found {text:?}")))?;
    Ok((line, rest.trim()))
}

fn parse_fields<T: std::str::FromStr>(
    text: &str,
    line: usize,
    what: &str,
) -> Result<Vec<T>, ModelFormatError> {
    text.split_whitespace()
        .map(|tok| {
            tok.parse::<T>()
                .map_err(|_| parse_err(line, &format!("invalid {what} value {tok:?}")))
        })
        .collect()
}
