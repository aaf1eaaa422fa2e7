//! The streaming classifier must agree bit for bit with an eager
//! reference that sorts all distances up front and recomputes grades from
//! first principles. Randomized across dataset shapes, imbalance ratios,
//! duplicated points (distance ties), and queries that sit exactly on
//! training rows.

use npc_core::{ClassLabel, Dataset, Decision, FeatureMatrix, Normalization, NpcModel};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Reference decision procedure: full sort, then the cumulative-grade
/// competition, everything computed locally.
fn eager_reference(
    features: &FeatureMatrix,
    labels: &[ClassLabel],
    query: &[f64],
) -> (ClassLabel, usize, f64, Decision) {
    let n = labels.len();
    let n_minority = labels.iter().filter(|l| l.is_minority()).count();
    let ratio = (n - n_minority) as f64 / n_minority as f64;
    let threshold = 0.7 * ratio;

    let mut ordered: Vec<(f64, usize)> = (0..n)
        .map(|i| {
            let row = features.row(i);
            let d2: f64 = row
                .iter()
                .zip(query)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            (d2.sqrt(), i)
        })
        .collect();
    ordered.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut sum = 0.0;
    for (pos, &(_, index)) in ordered.iter().enumerate() {
        let rank = pos + 1;
        let grade = if labels[index].is_minority() {
            ratio * (n - rank) as f64 / (n as f64 - 1.0 - ratio.sqrt())
        } else {
            -(ratio.powf(rank as f64 / n as f64))
        };
        sum += grade;
        if sum.abs() > threshold {
            let label = if sum > 0.0 {
                ClassLabel::Minority
            } else {
                ClassLabel::Majority
            };
            return (label, rank, sum, Decision::Threshold);
        }
    }
    let label = if sum >= 0.0 {
        ClassLabel::Minority
    } else {
        ClassLabel::Majority
    };
    (label, n, sum, Decision::Fallback)
}

fn random_dataset(rng: &mut StdRng) -> Dataset {
    let dims = rng.gen_range(1..=8);
    let n_minority = rng.gen_range(2..=10);
    let ratio = rng.gen_range(1.0..=30.0);
    let n_majority = ((n_minority as f64 * ratio).round() as usize)
        .clamp(n_minority, 300 - n_minority);
    let n = n_minority + n_majority;

    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let minority = i < n_minority;
        // Overlapping clusters, coarse grid to provoke exact ties.
        let center = if minority { 0.8 } else { 0.0 };
        let row: Vec<f64> = (0..dims)
            .map(|_| center + (rng.gen_range(-10i32..=10) as f64) * 0.25)
            .collect();
        rows.push(row);
        labels.push(if minority {
            ClassLabel::Minority
        } else {
            ClassLabel::Majority
        });
    }
    // Duplicate a handful of rows across classes: identical distances must
    // resolve by training index on both paths.
    for _ in 0..rng.gen_range(0..4) {
        let from = rng.gen_range(0..n);
        let to = rng.gen_range(0..n);
        let row = rows[from].clone();
        rows[to] = row;
    }
    Dataset::new(
        "random",
        FeatureMatrix::from_rows(&rows).unwrap(),
        labels,
        (0..dims).map(|d| format!("x{d}")).collect(),
    )
    .unwrap()
}

fn check_dataset(ds: &Dataset, rng: &mut StdRng) {
    let model = NpcModel::fit(ds, Normalization::None).unwrap();
    for q in 0..10 {
        let query: Vec<f64> = if q % 3 == 0 {
            // Exactly on a training point.
            ds.features.row(rng.gen_range(0..ds.len())).to_vec()
        } else {
            (0..ds.features.cols())
                .map(|_| (rng.gen_range(-12i32..=12) as f64) * 0.25)
                .collect()
        };
        let lazy = model.classify(&query).unwrap();
        let (label, stop_rank, score, decided_by) =
            eager_reference(&ds.features, &ds.labels, &query);
        assert_eq!(lazy.label, label);
        assert_eq!(lazy.stop_rank, stop_rank);
        assert_eq!(lazy.decided_by, decided_by);
        assert_eq!(
            lazy.final_score.to_bits(),
            score.to_bits(),
            "scores differ: {} vs {}",
            lazy.final_score,
            score
        );
    }
}

#[test]
fn streaming_matches_eager_reference_on_random_datasets() {
    let mut rng = StdRng::seed_from_u64(20260809);
    for _ in 0..250 {
        let ds = random_dataset(&mut rng);
        check_dataset(&ds, &mut rng);
    }
}

#[test]
fn streaming_matches_eager_reference_with_normalization_off_and_ties() {
    // A fully degenerate grid: many duplicated points, guaranteed ties.
    let mut rng = StdRng::seed_from_u64(7);
    let rows: Vec<Vec<f64>> = (0..60).map(|i| vec![(i % 5) as f64, (i % 3) as f64]).collect();
    let labels: Vec<ClassLabel> = (0..60)
        .map(|i| {
            if i % 7 == 0 {
                ClassLabel::Minority
            } else {
                ClassLabel::Majority
            }
        })
        .collect();
    let ds = Dataset::new(
        "grid",
        FeatureMatrix::from_rows(&rows).unwrap(),
        labels,
        vec!["a".into(), "b".into()],
    )
    .unwrap();
    check_dataset(&ds, &mut rng);
}
