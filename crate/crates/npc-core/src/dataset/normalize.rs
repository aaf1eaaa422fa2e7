//! Per-feature min-max scaling, fitted on training rows only.

use super::{DataError, FeatureMatrix};

/// Per-feature minimum and maximum observed on the training rows.
///
/// Application maps `x` to `(x - min) / (max - min)`; constant features
/// map to 0. Values outside the training span are allowed on test rows
/// and fall outside `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationParams {
    mins: Vec<f64>,
    maxs: Vec<f64>,
}

impl NormalizationParams {
    pub fn fit(features: &FeatureMatrix) -> Result<NormalizationParams, DataError> {
        if features.rows() == 0 {
            return Err(DataError::Empty);
        }
        let mut mins = features.row(0).to_vec();
        let mut maxs = features.row(0).to_vec();
        for row in features.iter_rows().skip(1) {
            for (j, &value) in row.iter().enumerate() {
                if value < mins[j] {
                    mins[j] = value;
                }
                if value > maxs[j] {
                    maxs[j] = value;
                }
            }
        }
        Ok(NormalizationParams { mins, maxs })
    }

    pub fn feature_count(&self) -> usize {
        self.mins.len()
    }

    pub fn mins(&self) -> &[f64] {
        &self.mins
    }

    pub fn maxs(&self) -> &[f64] {
        &self.maxs
    }

    /// Rebuilds params from stored vectors (model import).
    pub fn from_bounds(mins: Vec<f64>, maxs: Vec<f64>) -> Result<NormalizationParams, DataError> {
        if mins.len() != maxs.len() {
            return Err(DataError::DimensionMismatch {
                expected: mins.len(),
                found: maxs.len(),
            });
        }
        if mins.iter().zip(&maxs).any(|(lo, hi)| hi < lo) {
            return Err(DataError::Header {
                line: 0,
                message: "normalization max is below min".to_string(),
            });
        }
        Ok(NormalizationParams { mins, maxs })
    }

    pub fn apply_row(&self, row: &mut [f64]) {
        assert_eq!(row.len(), self.mins.len(), "row length must match params");
        for (j, value) in row.iter_mut().enumerate() {
            let span = self.maxs[j] - self.mins[j];
            *value = if span == 0.0 {
                0.0
            } else {
                (*value - self.mins[j]) / span
            };
        }
    }

    pub fn transform(&self, features: &FeatureMatrix) -> Result<FeatureMatrix, DataError> {
        if features.cols() != self.mins.len() {
            return Err(DataError::DimensionMismatch {
                expected: self.mins.len(),
                found: features.cols(),
            });
        }
        let mut out = FeatureMatrix::with_columns(features.cols());
        let mut buffer = vec![0.0; features.cols()];
        for row in features.iter_rows() {
            buffer.copy_from_slice(row);
            self.apply_row(&mut buffer);
            out.push_row(&buffer);
        }
        Ok(out)
    }
}
