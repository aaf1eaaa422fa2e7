//! Progressive nearest-neighbor competition classifier for imbalanced
//! binary datasets, together with the evaluation machinery used to
//! benchmark it: KEEL/CSV data loading, stratified cross-validation,
//! geometric-mean scoring, and Friedman/Holm rank statistics.
//!
//! The classifier grades every training sample by its distance rank to a
//! query: majority samples contribute negative grades that grow in
//! magnitude with rank, minority samples contribute positive grades that
//! shrink to zero. Grades are accumulated in rank order until the running
//! sum clears a winning threshold of `0.7 * IR`, at which point the sign
//! of the sum decides the class. Nearby minority evidence therefore wins
//! quickly, while a long run of majority neighbors is needed to outvote
//! the imbalance compensation.
//!
//! Batch classification is data-parallel via `rayon` when the `parallel`
//! feature (on by default) is enabled; disabling it falls back to the
//! sequential path with identical results.

pub mod classifier;
pub mod dataset;
pub mod evaluation;
pub mod grading;

pub use classifier::{
    knn_baseline, BatchError, ClassifyError, Decision, ModelFormatError, NeighborStream,
    Normalization, NpcModel, Prediction, RankedNeighbor, TrainError,
};
pub use dataset::{
    ClassLabel, DataError, Dataset, FeatureMatrix, FoldPlan, LabelColumn, NormalizationParams,
};
pub use evaluation::{
    friedman_holm, normal_upper_tail, rank_rows, summarize, ClassRates, Comparison,
    ConfusionMatrix, EvalError, FriedmanResult, MetricReport, ScoreTable,
};
pub use grading::{GradeTable, GradingError, ImbalanceStats};
