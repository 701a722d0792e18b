use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subgraph_entropy::census::{count_labeled, TopologyCatalog, TopologyMask, TOPOLOGY_COUNT};
use subgraph_entropy::dataset::parse_tudataset;
use subgraph_entropy::entropy::{
    edge_integral_closed, edge_integral_mayer, embed, graphlet_entropy, von_neumann_entropy,
    EdgeIntegral, Embedder, ThermoParams,
};
use subgraph_entropy::LabeledGraph;

fn mutag_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/MUTAG")
}

fn ln_z(n: f64, l: f64, d: f64, eps: f64) -> f64 {
    n * (d * eps.ln() - l * l.ln()) - n * n.ln()
}

fn mean_energy(n: f64, d: f64, eps: f64, r: f64) -> f64 {
    -n * d * (eps - r) / eps
}

/// 100 parameter points: (n, l, d, β, p, R).
fn sweep() -> Vec<(u64, usize, usize, f64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..100)
        .map(|_| {
            let l = rng.gen_range(3..=6);
            let d = rng.gen_range(l - 1..=l * (l - 1) / 2);
            let n = rng.gen_range(1..=400);
            let beta = rng.gen_range(0.1..3.0);
            let p = rng.gen_range(1.0..20.0);
            let r = -rng.gen_range(0.0..(p * f64::exp(beta)).min(15.0));
            (n, l, d, beta, p, r)
        })
        .collect()
}

#[test]
fn entropy_equals_two_part_recomputation() {
    for (n, l, d, beta, p, r) in sweep() {
        let eps = p * beta.exp() + r;
        let s = graphlet_entropy(n, l, d, eps, beta, r).unwrap();
        let (nf, lf, df) = (n as f64, l as f64, d as f64);
        let two_part = ln_z(nf, lf, df, eps) + beta * mean_energy(nf, df, eps, r);
        assert!(
            (s - two_part).abs() <= 1e-12 * s.abs().max(1.0),
            "n={n} l={l} d={d} beta={beta}: {s} vs {two_part}"
        );
    }
}

#[test]
fn finite_difference_gradient_matches_mean_energy() {
    let h = 1e-5;
    for (n, l, d, beta, p, r) in sweep() {
        let (nf, lf, df) = (n as f64, l as f64, d as f64);
        let eps_at = |b: f64| p * b.exp() + r;
        let fd = (ln_z(nf, lf, df, eps_at(beta + h)) - ln_z(nf, lf, df, eps_at(beta - h))) / (2.0 * h);
        let u = mean_energy(nf, df, eps_at(beta), r);
        assert!(
            (fd + u).abs() <= 1e-5 * u.abs(),
            "n={n} beta={beta}: d ln z/d beta = {fd}, <U> = {u}"
        );
    }
}

#[test]
fn k4_triangles_match_two_part_form() {
    let params = ThermoParams::default();
    let eps = edge_integral_closed(&params).unwrap();
    let r = params.r_offset();
    let k4 = LabeledGraph::unlabeled("k4", 4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
    let census = count_labeled(&k4, &TopologyCatalog::standard(), &TopologyMask::all());
    assert_eq!(census.get(0, 0), 12);
    let e = embed(&k4, &census, &params, EdgeIntegral::Closed).unwrap();
    let expect = ln_z(12.0, 3.0, 3.0, eps) + params.beta * mean_energy(12.0, 3.0, eps, r);
    assert!((e.get(0, 0) - expect).abs() < 1e-12 * expect.abs().max(1.0));
}

#[test]
fn defaults_pin_edge_integrals() {
    let params = ThermoParams::default();
    let closed = edge_integral_closed(&params).unwrap();
    assert!((closed - (10.0 * std::f64::consts::E - 10.0)).abs() < 1e-12);
    let mayer = edge_integral_mayer(&params).unwrap();
    assert!(mayer.is_finite() && mayer > 0.0);
    // independent recomputation over the 11-point grid
    let sum: f64 = (0..=10)
        .map(|i| {
            let r = 1.0 + 0.1 * i as f64;
            let s6 = (1.0 / r).powi(6);
            (-4.0 * (s6 * s6 - s6)).exp()
        })
        .sum();
    assert!((mayer - (sum.exp() - 10.0)).abs() < 1e-9 * mayer);
}

#[test]
fn mayer_mode_changes_only_the_edge_constant() {
    let ds = parse_tudataset(mutag_dir(), "MUTAG").unwrap();
    let params = ThermoParams::default();
    let closed = Embedder::new(params, EdgeIntegral::Closed).unwrap();
    let mayer = Embedder::new(params, EdgeIntegral::Mayer).unwrap();
    let catalog = TopologyCatalog::standard();
    let g = &ds.graphs[0];
    let census = count_labeled(g, &catalog, &TopologyMask::all());
    let a = mayer.embed(&census, ds.label_count()).unwrap();
    let _ = closed.embed(&census, ds.label_count()).unwrap();
    let eps = mayer.edge_integral();
    for v in 0..TOPOLOGY_COUNT {
        let entry = catalog.entry(v);
        for l in 0..ds.label_count() {
            let expect = graphlet_entropy(
                census.get(v, l),
                entry.nodes,
                entry.edge_count,
                eps,
                params.beta,
                params.r_offset(),
            )
            .unwrap();
            assert_eq!(a.get(v, l), expect);
        }
    }
}

fn erdos_renyi(rng: &mut ChaCha8Rng, n: usize, p: f64) -> LabeledGraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    LabeledGraph::unlabeled(format!("er{n}"), n, edges).unwrap()
}

/// Cyclic Jacobi rotations on a dense symmetric matrix.
fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

fn reference_von_neumann(g: &LabeledGraph) -> f64 {
    let n = g.node_count();
    let mut m = vec![vec![0.0; n]; n];
    for u in 0..n {
        let du = g.degree(u) as f64;
        if du > 0.0 {
            m[u][u] = 1.0 / n as f64;
        }
        for &v in g.neighbors(u) {
            m[u][v] = -1.0 / ((du * g.degree(v) as f64).sqrt() * n as f64);
        }
    }
    jacobi_eigenvalues(m)
        .into_iter()
        .filter(|&l| l > 1e-300)
        .map(|l| -l * l.ln())
        .sum()
}

#[test]
fn von_neumann_matches_jacobi_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..30 {
        let p = rng.gen_range(0.1..0.6);
        let g = erdos_renyi(&mut rng, 20, p);
        let ours = von_neumann_entropy(&g);
        let reference = reference_von_neumann(&g);
        assert!((ours - reference).abs() < 1e-9, "{ours} vs {reference}");
    }
}

#[test]
fn von_neumann_complete_graphs() {
    for n in 2..=10 {
        let edges: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        let g = LabeledGraph::unlabeled("k", n, edges).unwrap();
        let s = von_neumann_entropy(&g);
        assert!((s - ((n - 1) as f64).ln()).abs() < 1e-9, "K{n}: {s}");
    }
}

#[test]
fn von_neumann_bounds_on_corpus() {
    let ds = parse_tudataset(mutag_dir(), "MUTAG").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let random: Vec<_> = (0..100)
        .map(|_| {
            let n = rng.gen_range(2..=30);
            let p = rng.gen_range(0.0..1.0);
            erdos_renyi(&mut rng, n, p)
        })
        .collect();
    for g in ds.graphs.iter().chain(&random) {
        let s = von_neumann_entropy(g);
        let upper = (g.node_count() as f64).ln();
        assert!(s >= -1e-12 && s <= upper + 1e-12, "{}: {s} not in [0, {upper}]", g.id());
    }
}

#[test]
fn embedding_sparsity_and_isomorphism_invariance() {
    let ds = parse_tudataset(mutag_dir(), "MUTAG").unwrap();
    let catalog = TopologyCatalog::standard();
    let embedder = Embedder::new(ThermoParams::default(), EdgeIntegral::Closed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for g in ds.graphs.iter().take(40) {
        let census = count_labeled(g, &catalog, &TopologyMask::all());
        let e = embedder.embed(&census, ds.label_count()).unwrap();
        assert_eq!(e.dim(), TOPOLOGY_COUNT * ds.label_count());
        for v in 0..TOPOLOGY_COUNT {
            for l in 0..ds.label_count() {
                assert_eq!(census.get(v, l) == 0, e.get(v, l) == 0.0);
            }
        }
        let mut perm: Vec<usize> = (0..g.node_count()).collect();
        for i in (1..perm.len()).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let h = g.permuted(&perm).unwrap();
        let e2 = embedder
            .embed(&count_labeled(&h, &catalog, &TopologyMask::all()), ds.label_count())
            .unwrap();
        assert_eq!(e.values, e2.values);
    }
}

#[test]
fn mutag_first_graph_embedding_is_pinned() {
    let ds = parse_tudataset(mutag_dir(), "MUTAG").unwrap();
    assert_eq!(ds.label_count(), 7);
    let g = &ds.graphs[0];
    let census = count_labeled(g, &TopologyCatalog::standard(), &TopologyMask::all());
    let e = Embedder::new(ThermoParams::default(), EdgeIntegral::Closed)
        .unwrap()
        .embed(&census, ds.label_count())
        .unwrap();
    assert_eq!(e.dim(), 84);
    let own = embed(g, &census, &ThermoParams::default(), EdgeIntegral::Closed).unwrap();
    for v in 0..TOPOLOGY_COUNT {
        for l in 0..own.label_count {
            assert_eq!(own.get(v, l), e.get(v, l));
        }
    }
    let nonzero = e.values.iter().filter(|v| **v != 0.0).count();
    let total: f64 = e.values.iter().sum();
    assert_eq!(nonzero, PINNED_NONZERO);
    assert!((total - PINNED_TOTAL).abs() < 1e-9 * PINNED_TOTAL.abs());
}

// first verified run; census checked against the oracle on random graphs
const PINNED_NONZERO: usize = 14;
const PINNED_TOTAL: f64 = -2213.115502222407;
