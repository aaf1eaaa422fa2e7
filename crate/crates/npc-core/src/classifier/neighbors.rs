//! Incremental nearest-neighbor ranking.
//!
//! Distances to all training rows are computed once (linear, unavoidable),
//! then neighbors are extracted in rank order from a binary heap. Stopping
//! after `r` neighbors therefore costs `O(n + r log n)` instead of a full
//! `O(n log n)` sort, which is what makes early competition stops cheap.

use std::cmp::Ordering;
use std::cmp::Reverse;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::dataset::FeatureMatrix;

#[derive(Debug, Error, PartialEq)]
pub enum ClassifyError {
    #[error("query has {found} features, training data has {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("query contains a non-finite value at position {position}")]
    NonFiniteQuery { position: usize },
    #[error("k must be between 1 and {n_all}, got {k}")]
    InvalidK { k: usize, n_all: usize },
}

/// A training sample at its distance rank from a query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedNeighbor {
    /// Row index into the training set.
    pub index: usize,
    /// Euclidean distance to the query.
    pub distance: f64,
    /// 1-based rank; rank 1 is the nearest neighbor.
    pub rank: usize,
}

#[derive(Debug, PartialEq)]
struct Candidate {
    distance: f64,
    index: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Candidate) -> Ordering {
        // Distances are finite by construction, so total_cmp agrees with
        // numeric order; equal distances break toward the lower index.
        self.distance
            .total_cmp(&other.distance)
            .then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Candidate) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lazily yields training samples in nondecreasing distance order.
///
/// Ranks are consecutive from 1 and ties are broken by ascending training
/// index, so the stream is fully deterministic. It may be dropped early;
/// unconsumed ranks cost nothing beyond the initial heapify.
#[derive(Debug)]
pub struct NeighborStream {
    heap: BinaryHeap<Reverse<Candidate>>,
    next_rank: usize,
}

impl NeighborStream {
    pub(crate) fn over(
        features: &FeatureMatrix,
        query: &[f64],
    ) -> Result<NeighborStream, ClassifyError> {
        if query.len() != features.cols() {
            return Err(ClassifyError::DimensionMismatch {
                expected: features.cols(),
                found: query.len(),
            });
        }
        if let Some(position) = query.iter().position(|v| !v.is_finite()) {
            return Err(ClassifyError::NonFiniteQuery { position });
        }
        let candidates: Vec<Reverse<Candidate>> = features
            .iter_rows()
            .enumerate()
            .map(|(index, row)| {
                Reverse(Candidate {
                    distance: euclidean_distance(row, query),
                    index,
                })
            })
            .collect();
        Ok(NeighborStream {
            heap: BinaryHeap::from(candidates),
            next_rank: 1,
        })
    }

    /// Neighbors not yet yielded.
    pub fn remaining(&self) -> usize {
        self.heap.len()
    }
}

impl Iterator for NeighborStream {
    type Item = RankedNeighbor;

    fn next(&mut self) -> Option<RankedNeighbor> {
        let Reverse(candidate) = self.heap.pop()?;
        let rank = self.next_rank;
        self.next_rank += 1;
        Some(RankedNeighbor {
            index: candidate.index,
            distance: candidate.distance,
            rank,
        })
    }
}

impl ExactSizeIterator for NeighborStream {
    fn len(&self) -> usize {
        self.heap.len()
    }
}

pub fn euclidean_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}
