//! Imbalance statistics and the precomputed reference-grade table.
//!
//! Each training sample contributes a grade determined only by its class
//! and its distance rank to the query. For a training set of size `n` with
//! imbalance ratio `ir = n_majority / n_minority`:
//!
//! - majority samples:  `-(ir ^ (rank / n))`, falling from about -1 at
//!   rank 1 to exactly `-ir` at rank `n`;
//! - minority samples:  `ir * (n - rank) / (n - 1 - sqrt(ir))`, falling
//!   linearly from just above `ir` at rank 1 to exactly 0 at rank `n`.
//!
//! Minority grades at low ranks dominate the majority ones, which is what
//! compensates for the imbalance: a single nearby minority sample clears
//! the winning threshold of `0.7 * ir` on its own, while only a sustained
//! run of majority neighbors accumulates enough negative mass to win.
//!
//! All grades depend only on (rank, class), so the whole table is
//! precomputed once per training fold and shared read-only.

use std::fmt::Write as _;

use thiserror::Error;

use crate::dataset::ClassLabel;

#[derive(Debug, Error, PartialEq)]
pub enum GradingError {
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("training set too small: need n - 1 > sqrt(ir), got n = {n_all}, ir = {ratio}")]
    TooSmall { n_all: usize, ratio: f64 },
    #[error("imbalance ratio must be a positive finite number, got {0}")]
    InvalidRatio(f64),
    #[error("rank {rank} out of range 1..={n_all}")]
    RankOutOfRange { rank: usize, n_all: usize },
}

/// Class counts and imbalance ratio of one training fold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImbalanceStats {
    n_minority: usize,
    n_majority: usize,
    ratio: f64,
}

impl ImbalanceStats {
    /// Counts classes in a training label vector.
    pub fn from_labels(labels: &[ClassLabel]) -> Result<ImbalanceStats, GradingError> {
        let n_minority = labels.iter().filter(|l| l.is_minority()).count();
        let n_majority = labels.len() - n_minority;
        ImbalanceStats::from_counts(n_minority, n_majority)
    }

    pub fn from_counts(n_minority: usize, n_majority: usize) -> Result<ImbalanceStats, GradingError> {
        if n_minority == 0 || n_majority == 0 {
            return Err(GradingError::SingleClass);
        }
        let ratio = n_majority as f64 / n_minority as f64;
        let n_all = n_minority + n_majority;
        check_size(n_all, ratio)?;
        Ok(ImbalanceStats {
            n_minority,
            n_majority,
            ratio,
        })
    }

    pub fn n_minority(&self) -> usize {
        self.n_minority
    }

    pub fn n_majority(&self) -> usize {
        self.n_majority
    }

    pub fn n_all(&self) -> usize {
        self.n_minority + self.n_majority
    }

    /// Majority count over minority count.
    pub fn imbalance_ratio(&self) -> f64 {
        self.ratio
    }

    /// Cumulative-grade magnitude at which the competition stops:
    /// `0.7 * ir`.
    pub fn winning_threshold(&self) -> f64 {
        0.7 * self.ratio
    }

    /// Grade of a majority sample at the given rank (1-based).
    pub fn majority_grade(&self, rank: usize) -> Result<f64, GradingError> {
        check_rank(rank, self.n_all())?;
        Ok(majority_grade_at(self.n_all(), self.ratio, rank))
    }

    /// Grade of a minority sample at the given rank (1-based).
    pub fn minority_grade(&self, rank: usize) -> Result<f64, GradingError> {
        check_rank(rank, self.n_all())?;
        Ok(minority_grade_at(self.n_all(), self.ratio, rank))
    }
}

fn check_rank(rank: usize, n_all: usize) -> Result<(), GradingError> {
    if rank == 0 || rank > n_all {
        return Err(GradingError::RankOutOfRange { rank, n_all });
    }
    Ok(())
}

fn check_size(n_all: usize, ratio: f64) -> Result<(), GradingError> {
    if !(ratio.is_finite() && ratio > 0.0) {
        return Err(GradingError::InvalidRatio(ratio));
    }
    // The minority-grade denominator n - 1 - sqrt(ir) must be positive.
    if (n_all as f64 - 1.0) <= ratio.sqrt() {
        return Err(GradingError::TooSmall { n_all, ratio });
    }
    Ok(())
}

fn majority_grade_at(n_all: usize, ratio: f64, rank: usize) -> f64 {
    -(ratio.powf(rank as f64 / n_all as f64))
}

fn minority_grade_at(n_all: usize, ratio: f64, rank: usize) -> f64 {
    ratio * (n_all - rank) as f64 / (n_all as f64 - 1.0 - ratio.sqrt())
}

/// One row of the reference-grade table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradeRow {
    pub rank: usize,
    pub majority: f64,
    pub minority: f64,
}

/// Precomputed grades for every (rank, class) pair of a training fold.
#[derive(Debug, Clone, PartialEq)]
pub struct GradeTable {
    ratio: f64,
    majority: Vec<f64>,
    minority: Vec<f64>,
}

impl GradeTable {
    pub fn new(stats: &ImbalanceStats) -> GradeTable {
        // Counts were validated by the stats constructor.
        GradeTable::build(stats.n_all(), stats.imbalance_ratio())
    }

    /// Builds a table straight from (n, ir), used for grade-curve dumps
    /// where the ratio is a free parameter rather than a count quotient.
    pub fn from_parameters(n_all: usize, ratio: f64) -> Result<GradeTable, GradingError> {
        check_size(n_all, ratio)?;
        Ok(GradeTable::build(n_all, ratio))
    }

    fn build(n_all: usize, ratio: f64) -> GradeTable {
        let mut majority = Vec::with_capacity(n_all);
        let mut minority = Vec::with_capacity(n_all);
        for rank in 1..=n_all {
            majority.push(majority_grade_at(n_all, ratio, rank));
            minority.push(minority_grade_at(n_all, ratio, rank));
        }
        GradeTable {
            ratio,
            majority,
            minority,
        }
    }

    /// Number of ranks (the training-set size).
    pub fn len(&self) -> usize {
        self.majority.len()
    }

    pub fn is_empty(&self) -> bool {
        self.majority.is_empty()
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    /// Grade contributed by a sample of `label` at `rank` (1-based).
    /// Panics if the rank is out of range; streams generated against the
    /// same training set are always in range.
    pub fn grade(&self, rank: usize, label: ClassLabel) -> f64 {
        match label {
            ClassLabel::Majority => self.majority[rank - 1],
            ClassLabel::Minority => self.minority[rank - 1],
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = GradeRow> + '_ {
        self.majority
            .iter()
            .zip(&self.minority)
            .enumerate()
            .map(|(i, (&majority, &minority))| GradeRow {
                rank: i + 1,
                majority,
                minority,
            })
    }

    /// Renders the table as CSV: `rank,majority_grade,minority_grade`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,majority_grade,minority_grade\n");
        for row in self.rows() {
            let _ = writeln!(out, "{},{},{}", row.rank, row.majority, row.minority);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn stats(n_minority: usize, n_majority: usize) -> ImbalanceStats {
        ImbalanceStats::from_counts(n_minority, n_majority).unwrap()
    }

    #[test]
    fn ratio_and_total_from_labels() {
        let mut labels = vec![ClassLabel::Majority; 450];
        labels.extend(vec![ClassLabel::Minority; 50]);
        let s = ImbalanceStats::from_labels(&labels).unwrap();
        assert_eq!(s.n_all(), 500);
        assert_eq!(s.imbalance_ratio(), 9.0);
    }

    #[test]
    fn ratio_matches_published_rounding() {
        let s = stats(559, 4913);
        assert_relative_eq!(s.imbalance_ratio(), 8.789, epsilon = 5e-4);
        assert_eq!(s.n_all(), 5472);
    }

    #[test]
    fn balanced_data_is_valid() {
        let s = stats(10, 10);
        assert_eq!(s.imbalance_ratio(), 1.0);
    }

    #[test]
    fn single_class_is_rejected() {
        assert_eq!(
            ImbalanceStats::from_counts(0, 10).unwrap_err(),
            GradingError::SingleClass
        );
        assert_eq!(
            ImbalanceStats::from_labels(&[ClassLabel::Minority; 4]).unwrap_err(),
            GradingError::SingleClass
        );
    }

    #[test]
    fn two_sample_set_is_too_small() {
        // n - 1 = 1 is not greater than sqrt(1).
        assert!(matches!(
            ImbalanceStats::from_counts(1, 1),
            Err(GradingError::TooSmall { n_all: 2, .. })
        ));
        assert!(ImbalanceStats::from_counts(1, 2).is_ok());
    }

    // Reference values evaluated independently with 40-digit arithmetic
    // for n = 500, ir = 10.
    const FIG_MAJ_1: f64 = -1.0046157902783952;
    const FIG_MAJ_250: f64 = -3.1622776601683795;
    const FIG_MIN_1: f64 = 10.063776463905283;
    const FIG_MIN_250: f64 = 5.0419721763052516;

    fn fig_table() -> GradeTable {
        GradeTable::from_parameters(500, 10.0).unwrap()
    }

    #[test]
    fn majority_grade_reference_values() {
        let t = fig_table();
        assert_relative_eq!(t.grade(1, ClassLabel::Majority), FIG_MAJ_1, epsilon = 1e-12);
        assert_relative_eq!(t.grade(250, ClassLabel::Majority), FIG_MAJ_250, epsilon = 1e-12);
        assert_eq!(t.grade(500, ClassLabel::Majority), -10.0);
    }

    #[test]
    fn minority_grade_reference_values() {
        let t = fig_table();
        assert_relative_eq!(t.grade(1, ClassLabel::Minority), FIG_MIN_1, epsilon = 1e-12);
        assert_relative_eq!(t.grade(250, ClassLabel::Minority), FIG_MIN_250, epsilon = 1e-12);
        assert_eq!(t.grade(500, ClassLabel::Minority), 0.0);
    }

    #[test]
    fn grade_endpoints_for_count_based_stats() {
        let s = stats(50, 450);
        assert_eq!(s.majority_grade(500).unwrap(), -9.0);
        assert_eq!(s.minority_grade(500).unwrap(), 0.0);
        // One minority vote at rank 1 beats the threshold.
        assert!(s.minority_grade(1).unwrap() > s.winning_threshold());
    }

    #[test]
    fn rank_bounds_are_enforced() {
        let s = stats(2, 2);
        assert_eq!(
            s.majority_grade(0).unwrap_err(),
            GradingError::RankOutOfRange { rank: 0, n_all: 4 }
        );
        assert_eq!(
            s.minority_grade(5).unwrap_err(),
            GradingError::RankOutOfRange { rank: 5, n_all: 4 }
        );
    }

    #[test]
    fn winning_threshold_values() {
        assert_relative_eq!(stats(50, 500).winning_threshold(), 7.0, epsilon = 1e-12);
        assert_relative_eq!(stats(10, 10).winning_threshold(), 0.7, epsilon = 1e-12);
        // ir = 32.91 as a raw parameter.
        let t = GradeTable::from_parameters(1484, 32.91).unwrap();
        assert_relative_eq!(0.7 * t.ratio(), 23.037, epsilon = 1e-9);
    }

    #[test]
    fn balanced_table_endpoint_identities() {
        let t = GradeTable::new(&stats(2, 2));
        assert_eq!(t.len(), 4);
        assert_eq!(t.grade(4, ClassLabel::Majority), -1.0);
        assert_eq!(t.grade(4, ClassLabel::Minority), 0.0);
    }

    #[test]
    fn sign_contract_holds_everywhere() {
        let t = GradeTable::new(&stats(45, 455));
        for row in t.rows() {
            assert!(row.majority <= 0.0, "rank {}", row.rank);
            assert!(row.minority >= 0.0, "rank {}", row.rank);
        }
    }

    #[test]
    fn table_matches_pointwise_functions() {
        let s = stats(45, 455);
        let t = GradeTable::new(&s);
        for rank in 1..=s.n_all() {
            assert_eq!(t.grade(rank, ClassLabel::Majority), s.majority_grade(rank).unwrap());
            assert_eq!(t.grade(rank, ClassLabel::Minority), s.minority_grade(rank).unwrap());
        }
    }

    #[test]
    fn csv_dump_has_header_and_all_ranks() {
        let t = GradeTable::new(&stats(2, 6));
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 9);
        assert_eq!(lines[0], "rank,majority_grade,minority_grade");
        assert!(lines[8].starts_with("8,-3,0"));
    }

    #[test]
    fn invalid_ratio_parameters_are_rejected() {
        assert!(matches!(
            GradeTable::from_parameters(500, 0.0),
            Err(GradingError::InvalidRatio(_))
        ));
        assert!(matches!(
            GradeTable::from_parameters(500, f64::NAN),
            Err(GradingError::InvalidRatio(_))
        ));
        assert!(matches!(
            GradeTable::from_parameters(3, 9.0),
            Err(GradingError::TooSmall { .. })
        ));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            // Strict monotonicity in rank for ir > 1, plus endpoint
            // identities, front dominance, and threshold crossing.
            #[test]
            fn grade_invariants(
                n_minority in 1usize..60,
                multiplier in 2usize..12,
                extra in 0usize..40,
            ) {
                let n_majority = n_minority * multiplier + extra;
                let s = ImbalanceStats::from_counts(n_minority, n_majority).unwrap();
                let ir = s.imbalance_ratio();
                prop_assume!(ir > 1.0);
                let t = GradeTable::new(&s);
                let n = s.n_all();

                for rank in 1..n {
                    prop_assert!(t.grade(rank, ClassLabel::Majority) > t.grade(rank + 1, ClassLabel::Majority));
                    prop_assert!(t.grade(rank, ClassLabel::Minority) > t.grade(rank + 1, ClassLabel::Minority));
                }
                prop_assert!((t.grade(n, ClassLabel::Majority) + ir).abs() <= ir * f64::EPSILON);
                prop_assert_eq!(t.grade(n, ClassLabel::Minority), 0.0);
                prop_assert!(t.grade(1, ClassLabel::Minority) > t.grade(1, ClassLabel::Majority).abs());
                prop_assert!(t.grade(1, ClassLabel::Minority) > s.winning_threshold());
            }

            #[test]
            fn threshold_crossing_holds_for_any_valid_stats(
                n_minority in 1usize..200,
                n_majority in 1usize..2000,
            ) {
                prop_assume!(ImbalanceStats::from_counts(n_minority, n_majority).is_ok());
                let s = ImbalanceStats::from_counts(n_minority, n_majority).unwrap();
                prop_assume!(s.imbalance_ratio() >= 1.0);
                prop_assert!(s.minority_grade(1).unwrap() > s.winning_threshold());
            }
        }
    }
}
