//! Edge-local labeled census.
//!
//! Every count is accumulated per root node and credited to that node's label.
//! Per-edge triangle counts `c(x, y) = |N(x) ∩ N(y)|` and per-edge 4-clique
//! counts are merged from sorted neighbor lists once; the 3- and 4-node rooted
//! counts follow from them through closed combinatorial identities. Star-5
//! uses inclusion-exclusion over adjacency among the leaves, and the 5- and
//! 6-node paths and the 5-cycle come from hop-composed path tables.

use rayon::prelude::*;

use super::catalog::{Shape, TopologyCatalog, TopologyMask, TOPOLOGY_COUNT};
use super::paths::HopTables;
use super::table::CensusTable;
use crate::graph::LabeledGraph;

fn choose2(x: i64) -> i64 {
    x * (x - 1) / 2
}

fn choose3(x: i64) -> i64 {
    x * (x - 1) * (x - 2) / 6
}

/// Adjacency-aligned per-edge statistics: `tri[u][k]` and `k4[u][k]` describe
/// the edge from `u` to its `k`-th neighbor.
struct EdgeStats {
    tri: Vec<Vec<i64>>,
    k4: Vec<Vec<i64>>,
}

fn intersect_count(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}

/// Visits `(x, position of x in b)` for every `x` in `a ∩ b`.
fn for_each_common(a: &[usize], b: &[usize], mut f: impl FnMut(usize, usize)) {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                f(a[i], j);
                i += 1;
                j += 1;
            }
        }
    }
}

impl EdgeStats {
    fn compute(graph: &LabeledGraph, with_cliques: bool) -> Self {
        let n = graph.node_count();
        let tri: Vec<Vec<i64>> = (0..n)
            .into_par_iter()
            .map(|u| {
                graph
                    .neighbors(u)
                    .iter()
                    .map(|&v| intersect_count(graph.neighbors(u), graph.neighbors(v)) as i64)
                    .collect()
            })
            .collect();
        let k4 = if with_cliques {
            (0..n)
                .into_par_iter()
                .map(|u| {
                    graph
                        .neighbors(u)
                        .iter()
                        .map(|&v| {
                            // edges inside N(u) ∩ N(v)
                            let common: Vec<usize> = {
                                let mut c = Vec::new();
                                for_each_common(graph.neighbors(u), graph.neighbors(v), |x, _| {
                                    c.push(x)
                                });
                                c
                            };
                            let inside: usize = common
                                .iter()
                                .map(|&w| intersect_count(graph.neighbors(w), &common))
                                .sum();
                            (inside / 2) as i64
                        })
                        .collect()
                })
                .collect()
        } else {
            Vec::new()
        };
        EdgeStats { tri, k4 }
    }
}

/// Reusable per-worker buffers indexed by node.
struct Scratch {
    mark: Vec<u32>,
    stamp: u32,
    reach: Vec<i64>,
    touched: Vec<usize>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Scratch {
            mark: vec![0; n],
            stamp: 0,
            reach: vec![0; n],
            touched: Vec::new(),
        }
    }

    fn next_stamp(&mut self) -> u32 {
        self.stamp += 1;
        self.stamp
    }
}

#[derive(Clone, Copy)]
struct Needs {
    cliques: bool,
    two_hop: bool,
    out_triangles: bool,
    hops: usize,
}

impl Needs {
    fn of(catalog: &TopologyCatalog, mask: &TopologyMask) -> Self {
        let mut needs = Needs {
            cliques: false,
            two_hop: false,
            out_triangles: false,
            hops: 0,
        };
        for e in catalog.entries().iter().filter(|e| mask.contains(e.type_id)) {
            match (e.shape, e.nodes) {
                (Shape::Star, 4) | (Shape::Diamond, _) | (Shape::Clique, _) => {
                    needs.cliques = true
                }
                (Shape::TailedTriangle, _) => {
                    needs.cliques = true;
                    needs.out_triangles = true;
                }
                (Shape::Path, 4) => {
                    needs.cliques = true;
                    needs.two_hop = true;
                    needs.out_triangles = true;
                }
                (Shape::Cycle, 4) => {
                    needs.cliques = true;
                    needs.two_hop = true;
                    needs.out_triangles = true;
                }
                (Shape::Path, k) | (Shape::Cycle, k) if k >= 5 => {
                    needs.hops = needs.hops.max(if e.shape == Shape::Path { k - 1 } else { 4 })
                }
                _ => {}
            }
        }
        needs
    }
}

/// Root-occurrence counts for one node, indexed by catalog position.
fn rooted_counts(
    u: usize,
    graph: &LabeledGraph,
    catalog: &TopologyCatalog,
    mask: &TopologyMask,
    stats: &EdgeStats,
    hops: Option<&HopTables>,
    needs: Needs,
    scratch: &mut Scratch,
) -> [u64; TOPOLOGY_COUNT] {
    let nu = graph.neighbors(u);
    let d = nu.len() as i64;
    let tri_u_row = &stats.tri[u];
    let triangles: i64 = tri_u_row.iter().sum::<i64>() / 2;
    let wedge_pairs: i64 = tri_u_row.iter().map(|&c| choose2(c)).sum();
    let cliques: i64 = if needs.cliques {
        stats.k4[u].iter().sum::<i64>() / 3
    } else {
        0
    };

    // Σ_{a ∈ N(u)} Σ_{b ∈ N(u) ∩ N(a)} (c(a, b) - 1) and Σ_a E_out(a), where
    // E_out(a) counts triangles at a whose other two nodes avoid N[u].
    let mut inner_edge_weight = 0i64;
    let mut tailed = 0i64;
    if needs.out_triangles {
        for (k, &a) in nu.iter().enumerate() {
            let na = graph.neighbors(a);
            let mut weight = 0i64;
            for_each_common(nu, na, |_, pos_in_a| {
                weight += stats.tri[a][pos_in_a] - 1;
            });
            let triangles_at_a: i64 = stats.tri[a].iter().sum::<i64>() / 2;
            tailed += triangles_at_a - tri_u_row[k] - weight + stats.k4[u][k];
            inner_edge_weight += weight;
        }
    }

    // reach[b] = |N(u) ∩ N(b)| for nodes b at distance exactly two
    let mut square_pairs = 0i64;
    let mut onward = 0i64;
    if needs.two_hop {
        let stamp = scratch.next_stamp();
        scratch.mark[u] = stamp;
        for &a in nu {
            scratch.mark[a] = stamp;
        }
        scratch.touched.clear();
        for &a in nu {
            for &b in graph.neighbors(a) {
                if scratch.mark[b] == stamp {
                    continue;
                }
                if scratch.reach[b] == 0 {
                    scratch.touched.push(b);
                }
                scratch.reach[b] += 1;
            }
        }
        for &b in &scratch.touched {
            let r = scratch.reach[b];
            square_pairs += choose2(r);
            onward += r * (graph.degree(b) as i64 - r);
            scratch.reach[b] = 0;
        }
    }

    let mut out = [0u64; TOPOLOGY_COUNT];
    for e in catalog.entries().iter().filter(|e| mask.contains(e.type_id)) {
        let value: i64 = match (e.shape, e.nodes) {
            (Shape::Triangle, _) => triangles,
            (Shape::Path, 3) => nu
                .iter()
                .zip(tri_u_row)
                .map(|(&a, &c)| graph.degree(a) as i64 - 1 - c)
                .sum(),
            (Shape::Path, 4) => onward - 2 * tailed,
            (Shape::Star, 4) => choose3(d) - triangles * (d - 2) + wedge_pairs - cliques,
            (Shape::Cycle, 4) => square_pairs - inner_edge_weight / 2 + 3 * cliques,
            (Shape::TailedTriangle, _) => tailed,
            (Shape::Diamond, _) => wedge_pairs - 3 * cliques,
            (Shape::Clique, _) => cliques,
            (Shape::Star, 5) => independent_quadruples(graph, nu, scratch),
            (Shape::Path, k) if k >= 5 => {
                let hops = hops.expect("hop tables built for long paths");
                long_paths(graph, u, hops, k - 1, false)
            }
            (Shape::Cycle, 5) => {
                let hops = hops.expect("hop tables built for cycles");
                long_paths(graph, u, hops, 4, true) / 2
            }
            (shape, nodes) => unreachable!("no fast routine for {shape:?} on {nodes} nodes"),
        };
        debug_assert!(value >= 0, "{} at node {u}: {value}", e.name);
        out[e.type_id] = value as u64;
    }
    out
}

/// Independent 4-subsets of `leaves`: Σ over the smallest member `a` of the
/// independent triples among later leaves not adjacent to `a`, each triple
/// count obtained by inclusion-exclusion over its adjacent pairs.
fn independent_quadruples(graph: &LabeledGraph, leaves: &[usize], scratch: &mut Scratch) -> i64 {
    let mut total = 0i64;
    let mut pool = Vec::new();
    for (i, &a) in leaves.iter().enumerate() {
        pool.clear();
        pool.extend(
            leaves[i + 1..]
                .iter()
                .copied()
                .filter(|&b| !graph.has_edge(a, b)),
        );
        let x = pool.len() as i64;
        if x < 3 {
            continue;
        }
        let stamp = scratch.next_stamp();
        for &b in &pool {
            scratch.mark[b] = stamp;
        }
        let (mut edges, mut wedges, mut triangles) = (0i64, 0i64, 0i64);
        for &b in &pool {
            let inside: Vec<usize> = graph
                .neighbors(b)
                .iter()
                .copied()
                .filter(|&w| scratch.mark[w] == stamp)
                .collect();
            let deg = inside.len() as i64;
            edges += deg;
            wedges += choose2(deg);
            for &c in inside.iter().filter(|&&c| c > b) {
                triangles += graph
                    .neighbors(c)
                    .iter()
                    .filter(|&&w| w > c && scratch.mark[w] == stamp && graph.has_edge(b, w))
                    .count() as i64;
            }
        }
        edges /= 2;
        total += choose3(x) - edges * (x - 2) + wedges - triangles;
    }
    total
}

/// Induced paths with `hops` edges starting at `u`; with `closed`, only those
/// whose far end is adjacent to `u` and whose node set induces exactly a cycle.
fn long_paths(graph: &LabeledGraph, u: usize, tables: &HopTables, hops: usize, closed: bool) -> i64 {
    let (lo, hi) = (hops / 2, hops - hops / 2);
    let head = tables.get(lo);
    let tail = tables.get(hi);
    let mut count = 0i64;
    for (end, set) in head.extend_from(u, tail) {
        let wanted = if closed {
            if !graph.has_edge(u, end) {
                continue;
            }
            hops + 1
        } else {
            hops
        };
        if set.induced_edges(graph) == wanted {
            count += 1;
        }
    }
    count
}

/// Labeled census of `graph` restricted to the topologies in `mask`.
///
/// Masked-out topologies report zero; graphs with fewer than three nodes give
/// an all-zero table.
pub fn count_labeled(
    graph: &LabeledGraph,
    catalog: &TopologyCatalog,
    mask: &TopologyMask,
) -> CensusTable {
    let mut table = CensusTable::zeros(graph.id(), graph.label_bound());
    let n = graph.node_count();
    if n < 3 || graph.edge_count() < 2 {
        return table;
    }
    let needs = Needs::of(catalog, mask);
    let stats = EdgeStats::compute(graph, needs.cliques);
    let hops = (needs.hops > 0).then(|| {
        HopTables::build(graph, needs.hops - needs.hops / 2).expect("hop count within range")
    });
    let per_node: Vec<[u64; TOPOLOGY_COUNT]> = (0..n)
        .into_par_iter()
        .map_init(
            || Scratch::new(n),
            |scratch, u| {
                rooted_counts(u, graph, catalog, mask, &stats, hops.as_ref(), needs, scratch)
            },
        )
        .collect();
    for (u, counts) in per_node.iter().enumerate() {
        for (type_id, &c) in counts.iter().enumerate() {
            if c > 0 {
                table.add(type_id, graph.label(u), c);
            }
        }
    }
    table
}
