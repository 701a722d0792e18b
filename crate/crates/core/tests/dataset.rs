use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subgraph_entropy::dataset::{parse_tudataset, write_tudataset};
use subgraph_entropy::LabeledGraph;

fn mutag_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/MUTAG")
}

#[test]
fn mutag_shape() {
    let ds = parse_tudataset(mutag_dir(), "MUTAG").unwrap();
    assert_eq!(ds.len(), 188);
    assert_eq!(ds.classes(), [-1, 1]);
    assert_eq!(ds.class_labels.iter().filter(|&&c| c == 1).count(), 125);
    assert_eq!(ds.label_count(), 7);
    for (i, g) in ds.graphs.iter().enumerate() {
        // graph i comes from indicator value i + 1
        assert_eq!(g.id(), (i + 1).to_string());
        let degree_sum: usize = (0..g.node_count()).map(|v| g.degree(v)).sum();
        assert_eq!(degree_sum, 2 * g.edge_count());
    }
}

#[test]
fn mutag_round_trips_through_the_text_layout() {
    let ds = parse_tudataset(mutag_dir(), "MUTAG").unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_tudataset(&ds, dir.path()).unwrap();
    assert_eq!(parse_tudataset(dir.path(), "MUTAG").unwrap(), ds);
}

#[test]
fn neighbor_sets_are_symmetric_and_sorted() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let edges: Vec<(usize, usize)> = (0..50)
        .flat_map(|u| (u + 1..50).map(move |v| (u, v)))
        .filter(|_| rng.gen_bool(0.1))
        .collect();
    let g = LabeledGraph::unlabeled("r50", 50, edges.clone()).unwrap();
    let sets = g.neighbor_sets();
    for u in 0..50 {
        assert!(sets[u].windows(2).all(|w| w[0] < w[1]));
        for v in 0..50 {
            let listed = edges.contains(&(u.min(v), u.max(v)));
            assert_eq!(sets[u].contains(&v), listed);
            assert_eq!(sets[u].contains(&v), sets[v].contains(&u));
        }
    }
}
