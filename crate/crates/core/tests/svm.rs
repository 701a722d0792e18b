use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use subgraph_entropy::census::TopologyMask;
use subgraph_entropy::dataset::parse_tudataset;
use subgraph_entropy::entropy::{EdgeIntegral, Embedder, ThermoParams};
use subgraph_entropy::kernel::{gram, standardize, BaseKernelSpec, GramMatrix};
use subgraph_entropy::pipeline::embed_with_mask;
use subgraph_entropy::svm::{
    cross_validate, predict, stratified_folds, train, Classifier, SvmModel, DEFAULT_TOL,
};
use subgraph_entropy::Error;

const C_GRID: [f64; 5] = [0.01, 0.1, 1.0, 10.0, 100.0];

fn rows_of(points: &[Vec<f64>], kernel: impl Fn(&[f64], &[f64]) -> f64) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|a| points.iter().map(|b| kernel(a, b)).collect())
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn gram_from(rows: Vec<Vec<f64>>) -> GramMatrix {
    let ids = (0..rows.len()).map(|i| i.to_string()).collect();
    GramMatrix::from_rows(ids, rows).unwrap()
}

fn assert_kkt(model: &SvmModel, k: &[Vec<f64>], y: &[i8], tol: f64) {
    let n = y.len();
    let mut alpha = vec![0.0; n];
    for (&i, &a) in model.support_indices.iter().zip(&model.dual_coefs) {
        alpha[i] = a.abs();
        assert!(alpha[i] <= model.c * (1.0 + 1e-12));
        assert_eq!(a.signum() as i8, y[i]);
    }
    let balance: f64 = alpha.iter().zip(y).map(|(a, &yi)| a * yi as f64).sum();
    assert!(balance.abs() < 1e-6, "sum alpha_i y_i = {balance}");
    for i in 0..n {
        let margin = y[i] as f64 * model.decision_value(&k[i]).unwrap();
        if alpha[i] == 0.0 {
            assert!(margin >= 1.0 - tol, "row {i}: alpha=0, margin {margin}");
        } else if alpha[i] >= model.c {
            assert!(margin <= 1.0 + tol, "row {i}: alpha=C, margin {margin}");
        } else {
            assert!((margin - 1.0).abs() <= tol, "row {i}: free, margin {margin}");
        }
    }
}

#[test]
fn kkt_conditions_hold_on_random_fixtures() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for trial in 0..24 {
        let n = rng.gen_range(10..60);
        let dim = rng.gen_range(2..6);
        let y: Vec<i8> = (0..n).map(|i| if i % 3 == 0 { -1 } else { 1 }).collect();
        let points: Vec<Vec<f64>> = y
            .iter()
            .map(|&yi| {
                (0..dim)
                    .map(|_| rng.sample::<f64, _>(StandardNormal) + 0.8 * yi as f64)
                    .collect()
            })
            .collect();
        let k = if trial % 2 == 0 {
            rows_of(&points, dot)
        } else {
            rows_of(&points, |a, b| {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-0.5 * d2).exp()
            })
        };
        let c = C_GRID[trial % C_GRID.len()];
        let model = train(&k, &y, c, DEFAULT_TOL).unwrap();
        assert_kkt(&model, &k, &y, DEFAULT_TOL);
    }
}

#[test]
fn xor_is_not_linearly_separable() {
    let points = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![1.0, 0.0], vec![0.0, 1.0]];
    let y = [1, 1, -1, -1];
    let k = rows_of(&points, dot);
    for c in C_GRID {
        let model = train(&k, &y, c, DEFAULT_TOL).unwrap();
        let correct = (0..4)
            .filter(|&i| predict(&model, &k[i]).unwrap() == y[i])
            .count();
        assert!(correct <= 3);
    }
}

#[test]
fn free_support_vectors_predict_their_own_label() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let y: Vec<i8> = (0..40).map(|i| if i < 20 { 1 } else { -1 }).collect();
    let points: Vec<Vec<f64>> = y
        .iter()
        .map(|&yi| vec![rng.gen_range(-1.0..1.0) + yi as f64, rng.gen_range(-1.0..1.0)])
        .collect();
    let k = rows_of(&points, dot);
    let model = train(&k, &y, 1.0, DEFAULT_TOL).unwrap();
    for (&i, &a) in model.support_indices.iter().zip(&model.dual_coefs) {
        if a.abs() < model.c {
            assert_eq!(predict(&model, &k[i]).unwrap(), y[i]);
        }
    }
}

#[test]
fn block_diagonal_gram_is_perfectly_classified() {
    let labels: Vec<i64> = (0..40).map(|i| if i < 25 { 0 } else { 1 }).collect();
    let rows = (0..40)
        .map(|i| {
            (0..40)
                .map(|j| if labels[i] == labels[j] { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    let report = cross_validate(&gram_from(rows), &labels, 10, &C_GRID, 1).unwrap();
    assert_eq!(report.mean, 1.0);
}

#[test]
fn identity_gram_with_shuffled_labels_stays_near_majority() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut labels: Vec<i64> = (0..100).map(|i| if i < 62 { 1 } else { -1 }).collect();
    labels.shuffle(&mut rng);
    let rows = (0..100)
        .map(|i| (0..100).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let report = cross_validate(&gram_from(rows), &labels, 10, &C_GRID, 5).unwrap();
    let majority = 0.62;
    let slack = 3.0 * report.std_error.max(1e-3);
    assert!((report.mean - majority).abs() <= slack, "{report}");
}

#[test]
fn folds_partition_the_index_set() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let labels: Vec<i64> = (0..97).map(|_| rng.gen_range(0..3)).collect();
    let idx: Vec<usize> = (0..97).collect();
    let folds = stratified_folds(&idx, &labels, 10, 4).unwrap();
    let mut seen: Vec<usize> = folds.iter().flatten().copied().collect();
    seen.sort_unstable();
    assert_eq!(seen, idx);
    for fold in &folds {
        for class in 0..3 {
            assert!(fold.iter().any(|&i| labels[i] == class));
        }
    }
    assert!(matches!(
        stratified_folds(&idx[..5], &labels, 10, 4),
        Err(Error::Stratification { .. })
    ));
}

#[test]
fn multiclass_one_vs_rest() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let centers = [[0.0, 4.0], [4.0, 0.0], [-4.0, -4.0]];
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..15 {
            points.push(vec![
                center[0] + rng.sample::<f64, _>(StandardNormal),
                center[1] + rng.sample::<f64, _>(StandardNormal),
            ]);
            labels.push(c as i64 + 10);
        }
    }
    let g = gram_from(rows_of(&points, |a, b| dot(a, b) + 1.0));
    let report = cross_validate(&g, &labels, 5, &C_GRID, 2).unwrap();
    assert!(report.mean > 0.9, "{report}");
}

fn mutag_linear() -> (GramMatrix, Vec<i64>) {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/MUTAG");
    let ds = parse_tudataset(dir, "MUTAG").unwrap();
    let embedder = Embedder::new(ThermoParams::default(), EdgeIntegral::Closed).unwrap();
    let e = embed_with_mask(&ds, &TopologyMask::all(), &embedder).unwrap();
    (gram(&e, &BaseKernelSpec::Linear).unwrap(), ds.class_labels)
}

#[test]
fn mutag_training_beats_majority() {
    let (g, labels) = mutag_linear();
    let all: Vec<usize> = (0..g.len()).collect();
    let majority = 125.0 / 188.0;
    // The raw linear Gram spans eigenvalues 0..4e8; at C = 1 the dual does not
    // reach tol within the iteration cap (LIBSVM stops early there as well).
    assert!(matches!(
        Classifier::fit(&g, &labels, &all, 1.0, DEFAULT_TOL),
        Err(Error::Convergence { .. })
    ));
    let clf = Classifier::fit(&g, &labels, &all, 0.01, DEFAULT_TOL).unwrap();
    let acc = clf.accuracy(&g, &labels, &all).unwrap();
    assert!(acc > majority, "training accuracy {acc}");

    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/MUTAG");
    let ds = parse_tudataset(dir, "MUTAG").unwrap();
    let embedder = Embedder::new(ThermoParams::default(), EdgeIntegral::Closed).unwrap();
    let mut e = embed_with_mask(&ds, &TopologyMask::all(), &embedder).unwrap();
    standardize(&mut e);
    let gs = gram(&e, &BaseKernelSpec::Linear).unwrap();
    let clf = Classifier::fit(&gs, &labels, &all, 1.0, DEFAULT_TOL).unwrap();
    let acc = clf.accuracy(&gs, &labels, &all).unwrap();
    assert!(acc > majority, "standardized training accuracy {acc}");
}

#[test]
fn mutag_cross_validation() {
    let (g, labels) = mutag_linear();
    let start = std::time::Instant::now();
    let report = cross_validate(&g, &labels, 10, &C_GRID, 42).unwrap();
    println!("{report}elapsed {:?}", start.elapsed());
    assert!((report.mean - report.fold_accuracies.iter().sum::<f64>() / 10.0).abs() < 1e-15);
    assert_eq!(report, cross_validate(&g, &labels, 10, &C_GRID, 42).unwrap());

    // held-out rows reproduce each fold's accuracy
    let all: Vec<usize> = (0..g.len()).collect();
    for fold in &report.folds {
        let train: Vec<usize> = all
            .iter()
            .copied()
            .filter(|i| !fold.test_indices.contains(i))
            .collect();
        let clf = Classifier::fit(&g, &labels, &train, fold.c, DEFAULT_TOL).unwrap();
        assert_eq!(clf.accuracy(&g, &labels, &fold.test_indices).unwrap(), fold.accuracy);
    }
    assert!(report.mean >= 0.80, "{report}");
}
