//! The progressive competition classifier and a plain k-NN baseline.
//!
//! A fitted [`NpcModel`] freezes the training features (normalized if
//! requested), labels, the precomputed grade table, and the winning
//! threshold. Classification consumes neighbors in rank order, adding each
//! one's grade to a running sum; the first time the sum's magnitude
//! exceeds the threshold, its sign decides the class. If no prefix ever
//! crosses the threshold the sign of the full sum decides, with an exact
//! zero going to the minority class.

mod model_io;
mod neighbors;

pub use model_io::ModelFormatError;
pub use neighbors::{euclidean_distance, ClassifyError, NeighborStream, RankedNeighbor};

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::dataset::{ClassLabel, DataError, Dataset, FeatureMatrix, NormalizationParams};
use crate::grading::{GradeTable, GradingError, ImbalanceStats};

/// Preprocessing applied to features before distance computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Per-feature min-max scaling fitted on the training rows.
    #[default]
    MinMax,
    /// Use features as-is.
    None,
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Normalization::MinMax => write!(f, "minmax"),
            Normalization::None => write!(f, "none"),
        }
    }
}

impl FromStr for Normalization {
    type Err = String;

    fn from_str(s: &str) -> Result<Normalization, String> {
        match s {
            "minmax" => Ok(Normalization::MinMax),
            "none" => Ok(Normalization::None),
            other => Err(format!("unknown normalization {other:?} (expected minmax or none)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Grading(#[from] GradingError),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// How a prediction was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    /// A prefix sum exceeded the winning threshold.
    Threshold,
    /// No prefix crossed the threshold; the full sum decided.
    Fallback,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decision::Threshold => write!(f, "threshold"),
            Decision::Fallback => write!(f, "fallback"),
        }
    }
}

/// Outcome of classifying one query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: ClassLabel,
    /// Rank at which the competition stopped (the training-set size if it
    /// never crossed the threshold).
    pub stop_rank: usize,
    /// Cumulative grade sum at the stop.
    pub final_score: f64,
    pub decided_by: Decision,
}

/// Error from batch classification, carrying the first failing query.
#[derive(Debug, Error, PartialEq)]
#[error("query {query_index}: {source}")]
pub struct BatchError {
    pub query_index: usize,
    #[source]
    pub source: ClassifyError,
}

/// A fitted progressive-competition classifier. Immutable and cheap to
/// share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct NpcModel {
    features: FeatureMatrix,
    labels: Vec<ClassLabel>,
    stats: ImbalanceStats,
    grades: GradeTable,
    threshold: f64,
    normalization: Option<NormalizationParams>,
}

impl NpcModel {
    /// Fits a model on a training dataset. With
    /// [`Normalization::MinMax`], scaling parameters are fitted on
    /// these rows and applied to both the stored features and every
    /// future query.
    pub fn fit(training: &Dataset, normalization: Normalization) -> Result<NpcModel, TrainError> {
        let stats = ImbalanceStats::from_labels(&training.labels)?;
        let (features, params) = match normalization {
            Normalization::MinMax => {
                let params = NormalizationParams::fit(&training.features)?;
                (params.transform(&training.features)?, Some(params))
            }
            Normalization::None => (training.features.clone(), None),
        };
        let grades = GradeTable::new(&stats);
        let threshold = stats.winning_threshold();
        Ok(NpcModel {
            features,
            labels: training.labels.clone(),
            stats,
            grades,
            threshold,
            normalization: params,
        })
    }

    pub(crate) fn from_parts(
        features: FeatureMatrix,
        labels: Vec<ClassLabel>,
        normalization: Option<NormalizationParams>,
    ) -> Result<NpcModel, TrainError> {
        let stats = ImbalanceStats::from_labels(&labels)?;
        if features.rows() != labels.len() {
            return Err(TrainError::Data(DataError::LabelLength {
                rows: features.rows(),
                labels: labels.len(),
            }));
        }
        let grades = GradeTable::new(&stats);
        let threshold = stats.winning_threshold();
        Ok(NpcModel {
            features,
            labels,
            stats,
            grades,
            threshold,
            normalization,
        })
    }

    pub fn n_training(&self) -> usize {
        self.labels.len()
    }

    pub fn feature_count(&self) -> usize {
        self.features.cols()
    }

    pub fn stats(&self) -> &ImbalanceStats {
        &self.stats
    }

    pub fn grade_table(&self) -> &GradeTable {
        &self.grades
    }

    pub fn winning_threshold(&self) -> f64 {
        self.threshold
    }

    pub fn normalization(&self) -> Option<&NormalizationParams> {
        self.normalization.as_ref()
    }

    pub fn training_labels(&self) -> &[ClassLabel] {
        &self.labels
    }

    pub fn training_features(&self) -> &FeatureMatrix {
        &self.features
    }

    /// Streams training samples in rank order for a query. The query is
    /// mapped into the model's feature space first, so callers always
    /// pass raw (unnormalized) values.
    pub fn rank_neighbors(&self, query: &[f64]) -> Result<NeighborStream, ClassifyError> {
        match &self.normalization {
            Some(params) => {
                if query.len() != self.features.cols() {
                    return Err(ClassifyError::DimensionMismatch {
                        expected: self.features.cols(),
                        found: query.len(),
                    });
                }
                if let Some(position) = query.iter().position(|v| !v.is_finite()) {
                    return Err(ClassifyError::NonFiniteQuery { position });
                }
                let mut mapped = query.to_vec();
                params.apply_row(&mut mapped);
                NeighborStream::over(&self.features, &mapped)
            }
            None => NeighborStream::over(&self.features, query),
        }
    }

    /// Runs the progressive competition for one query.
    pub fn classify(&self, query: &[f64]) -> Result<Prediction, ClassifyError> {
        let stream = self.rank_neighbors(query)?;
        let labels = &self.labels;
        Ok(run_competition(
            &self.grades,
            self.threshold,
            stream.map(|neighbor| labels[neighbor.index]),
        ))
    }

    /// Classifies every row of `queries`, preserving order. The first
    /// failing query aborts with its index. Runs in parallel when the
    /// `parallel` feature is enabled.
    pub fn classify_batch(&self, queries: &FeatureMatrix) -> Result<Vec<Prediction>, BatchError> {
        #[cfg(feature = "parallel")]
        {
            let results: Vec<Result<Prediction, ClassifyError>> = (0..queries.rows())
                .into_par_iter()
                .map(|i| self.classify(queries.row(i)))
                .collect();
            collect_batch(results)
        }
        #[cfg(not(feature = "parallel"))]
        {
            self.classify_batch_serial(queries)
        }
    }

    /// Sequential batch classification; always available and used by the
    /// benchmarks as the baseline for the parallel path.
    pub fn classify_batch_serial(
        &self,
        queries: &FeatureMatrix,
    ) -> Result<Vec<Prediction>, BatchError> {
        let results: Vec<Result<Prediction, ClassifyError>> = (0..queries.rows())
            .map(|i| self.classify(queries.row(i)))
            .collect();
        collect_batch(results)
    }
}

/// Accumulates grades over labels given in rank order and decides at the
/// first strict threshold crossing; when nothing crosses, the sign of the
/// full sum decides, with an exact zero going to the minority class.
fn run_competition(
    grades: &GradeTable,
    threshold: f64,
    ranked_labels: impl Iterator<Item = ClassLabel>,
) -> Prediction {
    let mut sum = 0.0;
    let mut stop_rank = 0;
    for (i, label) in ranked_labels.enumerate() {
        let rank = i + 1;
        sum += grades.grade(rank, label);
        stop_rank = rank;
        if sum.abs() > threshold {
            let label = if sum > 0.0 {
                ClassLabel::Minority
            } else {
                ClassLabel::Majority
            };
            return Prediction {
                label,
                stop_rank,
                final_score: sum,
                decided_by: Decision::Threshold,
            };
        }
    }
    let label = if sum >= 0.0 {
        ClassLabel::Minority
    } else {
        ClassLabel::Majority
    };
    Prediction {
        label,
        stop_rank,
        final_score: sum,
        decided_by: Decision::Fallback,
    }
}

fn collect_batch(
    results: Vec<Result<Prediction, ClassifyError>>,
) -> Result<Vec<Prediction>, BatchError> {
    let mut predictions = Vec::with_capacity(results.len());
    for (query_index, result) in results.into_iter().enumerate() {
        match result {
            Ok(p) => predictions.push(p),
            Err(source) => return Err(BatchError { query_index, source }),
        }
    }
    Ok(predictions)
}

/// Unweighted k-NN majority vote over the raw training features, with the
/// same distance and tie-break contract as the competition classifier.
/// Vote ties go to the minority class.
pub fn knn_baseline(
    training: &Dataset,
    query: &[f64],
    k: usize,
) -> Result<ClassLabel, ClassifyError> {
    let n = training.len();
    if k == 0 || k > n {
        return Err(ClassifyError::InvalidK { k, n_all: n });
    }
    let stream = NeighborStream::over(&training.features, query)?;
    let minority_votes = stream
        .take(k)
        .filter(|n| training.labels[n.index].is_minority())
        .count();
    if 2 * minority_votes >= k {
        Ok(ClassLabel::Minority)
    } else {
        Ok(ClassLabel::Majority)
    }
}
