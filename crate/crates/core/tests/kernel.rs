use std::path::PathBuf;

use subgraph_entropy::census::TopologyMask;
use subgraph_entropy::dataset::{parse_tudataset, GraphDataset};
use subgraph_entropy::entropy::{EdgeIntegral, Embedder, EntropyEmbedding, ThermoParams};
use subgraph_entropy::kernel::{
    center, gram, kpca, read_precomputed, standardize, write_gram_csv, write_precomputed,
    BaseKernelSpec, GramMatrix,
};
use subgraph_entropy::pipeline::embed_with_mask;

fn mutag() -> GraphDataset {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/MUTAG");
    parse_tudataset(dir, "MUTAG").unwrap()
}

fn mutag_embeddings() -> (GraphDataset, Vec<EntropyEmbedding>) {
    let ds = mutag();
    let embedder = Embedder::new(ThermoParams::default(), EdgeIntegral::Closed).unwrap();
    let e = embed_with_mask(&ds, &TopologyMask::all(), &embedder).unwrap();
    (ds, e)
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn assert_isometry(g: &GramMatrix, tol: f64) {
    let n = g.len();
    let coords = kpca(g, n).unwrap().coordinates;
    for i in 0..n {
        for j in 0..n {
            let feature = g.get(i, i) + g.get(j, j) - 2.0 * g.get(i, j);
            let embedded = squared_distance(&coords[i], &coords[j]);
            assert!(
                (feature - embedded).abs() < tol,
                "({i},{j}): {feature} vs {embedded}"
            );
        }
    }
}

#[test]
fn mutag_linear_and_rbf_are_psd() {
    let (ds, mut e) = mutag_embeddings();
    assert_eq!(e.len(), 188);
    let dim = e[0].dim();
    for spec in [BaseKernelSpec::Linear, BaseKernelSpec::rbf_default(dim)] {
        assert!(gram(&e, &spec).unwrap().is_psd(1e-8), "{spec:?}");
    }
    standardize(&mut e);
    for spec in [
        BaseKernelSpec::Linear,
        BaseKernelSpec::rbf_default(dim),
        BaseKernelSpec::Polynomial { degree: 2, coef0: 1.0 },
    ] {
        assert!(gram(&e, &spec).unwrap().is_psd(1e-8), "standardized {spec:?}");
    }
    assert_eq!(ds.len(), 188);
}

#[test]
fn kpca_is_an_isometry_on_a_subset() {
    let (_, mut e) = mutag_embeddings();
    e.truncate(30);
    standardize(&mut e);
    let dim = e[0].dim();
    assert_isometry(&gram(&e, &BaseKernelSpec::Linear).unwrap(), 1e-8);
    assert_isometry(&gram(&e, &BaseKernelSpec::rbf_default(dim)).unwrap(), 1e-8);
}

#[test]
fn kpca_recovers_planar_distances() {
    let points = [
        [0.0, 0.0],
        [1.0, 0.5],
        [-2.0, 1.0],
        [0.3, -1.7],
        [4.0, 2.0],
        [-1.0, -1.0],
    ];
    let rows: Vec<Vec<f64>> = points
        .iter()
        .map(|a| points.iter().map(|b| a[0] * b[0] + a[1] * b[1]).collect())
        .collect();
    let g = GramMatrix::from_rows((0..6).map(|i| i.to_string()).collect(), rows).unwrap();
    let coords = kpca(&g, 2).unwrap().coordinates;
    for i in 0..6 {
        for j in 0..6 {
            let d_in = squared_distance(&points[i], &points[j]).sqrt();
            let d_out = squared_distance(&coords[i], &coords[j]).sqrt();
            assert!((d_in - d_out).abs() < 1e-8);
        }
    }
}

#[test]
fn kpca_explained_ratios_descend() {
    let (_, e) = mutag_embeddings();
    let g = gram(&e, &BaseKernelSpec::Linear).unwrap();
    let r = kpca(&g, 3).unwrap();
    assert_eq!(r.coordinates.len(), 188);
    assert!(r.coordinates.iter().all(|row| row.len() == 3));
    let sum: f64 = r.explained_ratio.iter().sum();
    assert!(sum <= 1.0 + 1e-12);
    assert!(r.explained_ratio.windows(2).all(|w| w[0] >= w[1]));
    // sign convention
    for c in 0..3 {
        let col: Vec<f64> = r.coordinates.iter().map(|row| row[c]).collect();
        let pivot = col
            .iter()
            .copied()
            .fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        assert!(pivot > 0.0);
    }
}

#[test]
fn gram_is_identical_across_thread_counts() {
    let (_, e) = mutag_embeddings();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| gram(&e, &BaseKernelSpec::rbf_default(e[0].dim())).unwrap())
    };
    let a = run(1);
    let b = run(4);
    assert_eq!(a, b);
    a.check_symmetric(0.0).unwrap();
}

#[test]
fn centered_mutag_gram_stays_psd() {
    let (_, e) = mutag_embeddings();
    let g = gram(&e, &BaseKernelSpec::Linear).unwrap();
    assert!(center(&g).is_psd(1e-8));
}

#[test]
fn serializers_round_trip() {
    let (ds, e) = mutag_embeddings();
    let g = gram(&e[..10], &BaseKernelSpec::Linear).unwrap();
    let mut buf = Vec::new();
    write_precomputed(&g, &ds.class_labels[..10], &mut buf).unwrap();
    let (back, labels) = read_precomputed(&buf[..]).unwrap();
    assert_eq!(labels, ds.class_labels[..10]);
    for i in 0..10 {
        assert_eq!(back.row(i), g.row(i));
    }
    let mut csv = Vec::new();
    write_gram_csv(&g, &mut csv).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 11);
    let json = serde_json::to_string(&g).unwrap();
    let parsed: GramMatrix = serde_json::from_str(&json).unwrap();
    assert_eq!(parsed, g);
}
