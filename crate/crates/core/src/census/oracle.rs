//! Exhaustive reference census.
//!
//! Enumerates every connected node subset of size 3 to 6, tests it for
//! induced isomorphism against each catalog entry by backtracking, and credits
//! every subset node that some isomorphism places on a root position. Shares
//! nothing with the fast counter beyond the graph type.

use super::catalog::{TopologyCatalog, TopologyEntry};
use super::table::CensusTable;
use crate::error::{Error, Result};
use crate::graph::LabeledGraph;

pub const ORACLE_NODE_LIMIT: usize = 16;

pub fn count_oracle(graph: &LabeledGraph, catalog: &TopologyCatalog) -> Result<CensusTable> {
    let n = graph.node_count();
    if n > ORACLE_NODE_LIMIT {
        return Err(Error::SizeGuard {
            nodes: n,
            limit: ORACLE_NODE_LIMIT,
        });
    }
    let mut adj = vec![vec![false; n]; n];
    for &(u, v) in graph.edges() {
        adj[u][v] = true;
        adj[v][u] = true;
    }
    let mut table = CensusTable::zeros(graph.id(), graph.label_bound());
    let max_size = catalog.entries().iter().map(|e| e.nodes).max().unwrap_or(0);
    let mut subset = Vec::with_capacity(max_size);
    for size in 3..=max_size.min(n) {
        visit_subsets(n, size, 0, &mut subset, &mut |s| {
            census_subset(s, &adj, graph, catalog, &mut table)
        });
    }
    Ok(table)
}

fn visit_subsets(
    n: usize,
    size: usize,
    start: usize,
    current: &mut Vec<usize>,
    f: &mut dyn FnMut(&[usize]),
) {
    if current.len() == size {
        f(current);
        return;
    }
    let needed = size - current.len();
    for x in start..=n - needed {
        current.push(x);
        visit_subsets(n, size, x + 1, current, f);
        current.pop();
    }
}

fn census_subset(
    subset: &[usize],
    adj: &[Vec<bool>],
    graph: &LabeledGraph,
    catalog: &TopologyCatalog,
    table: &mut CensusTable,
) {
    let k = subset.len();
    let local = |i: usize, j: usize| adj[subset[i]][subset[j]];
    let mut degrees: Vec<usize> = (0..k)
        .map(|i| (0..k).filter(|&j| j != i && local(i, j)).count())
        .collect();
    let edges: usize = degrees.iter().sum::<usize>() / 2;
    if !connected(k, &local) {
        return;
    }
    degrees.sort_unstable();
    for entry in catalog.entries() {
        if entry.nodes != k || entry.edge_count != edges {
            continue;
        }
        let mut pattern_degrees: Vec<usize> = (0..k).map(|i| entry.degree(i)).collect();
        pattern_degrees.sort_unstable();
        if pattern_degrees != degrees {
            continue;
        }
        let mut roots = vec![false; k];
        let mut assignment = Vec::with_capacity(k);
        let mut used = vec![false; k];
        match_pattern(entry, &local, &mut assignment, &mut used, &mut roots);
        for (i, &is_root) in roots.iter().enumerate() {
            if is_root {
                table.add(entry.type_id, graph.label(subset[i]), 1);
            }
        }
    }
}

fn connected(k: usize, local: &dyn Fn(usize, usize) -> bool) -> bool {
    let mut seen = vec![false; k];
    let mut stack = vec![0];
    seen[0] = true;
    let mut reached = 1;
    while let Some(x) = stack.pop() {
        for y in 0..k {
            if !seen[y] && local(x, y) {
                seen[y] = true;
                reached += 1;
                stack.push(y);
            }
        }
    }
    reached == k
}

/// Extends `assignment` (pattern node i -> subset position) in every way that
/// keeps adjacency and non-adjacency consistent; marks root images.
fn match_pattern(
    entry: &TopologyEntry,
    local: &dyn Fn(usize, usize) -> bool,
    assignment: &mut Vec<usize>,
    used: &mut [bool],
    roots: &mut [bool],
) {
    let i = assignment.len();
    if i == entry.nodes {
        for &r in entry.root_orbit {
            roots[assignment[r]] = true;
        }
        return;
    }
    for pos in 0..entry.nodes {
        if used[pos] {
            continue;
        }
        let consistent = assignment
            .iter()
            .enumerate()
            .all(|(j, &pj)| entry.has_edge(i, j) == local(pos, pj));
        if consistent {
            used[pos] = true;
            assignment.push(pos);
            match_pattern(entry, local, assignment, used, roots);
            assignment.pop();
            used[pos] = false;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> LabeledGraph {
        LabeledGraph::unlabeled("c", n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    #[test]
    fn refuses_large_graphs() {
        let g = LabeledGraph::unlabeled("big", 17, []).unwrap();
        assert!(matches!(
            count_oracle(&g, &TopologyCatalog::standard()),
            Err(Error::SizeGuard { nodes: 17, .. })
        ));
    }

    #[test]
    fn empty_graph_is_all_zero() {
        let g = LabeledGraph::unlabeled("e", 5, []).unwrap();
        assert!(count_oracle(&g, &TopologyCatalog::standard())
            .unwrap()
            .is_zero());
    }

    #[test]
    fn five_cycle() {
        let t = count_oracle(&cycle(5), &TopologyCatalog::standard()).unwrap();
        assert_eq!(t.total(10), 5);
        assert_eq!(t.total(1), 10);
        assert_eq!(t.total(2), 10);
        // the only 5-node subset induces the cycle itself
        assert_eq!(t.total(8), 0);
    }
}
