//! Simple-path tables built by hop composition.
//!
//! The table for `h` hops is the join of the `floor(h/2)` and `ceil(h/2)`
//! tables at their shared midpoint; a join survives only when the two halves
//! meet in the midpoint alone. Every simple path splits uniquely at its
//! midpoint, so each path appears exactly once per direction.

use crate::error::{Error, Result};
use crate::graph::LabeledGraph;

pub const MAX_HOPS: usize = 5;

/// Vertex set of a simple path with at most `MAX_HOPS + 1` nodes, kept sorted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PathSet {
    len: u8,
    nodes: [u32; MAX_HOPS + 1],
}

impl PathSet {
    fn pair(a: usize, b: usize) -> Self {
        let mut nodes = [0; MAX_HOPS + 1];
        nodes[0] = a.min(b) as u32;
        nodes[1] = a.max(b) as u32;
        PathSet { len: 2, nodes }
    }

    pub fn nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes[..self.len as usize].iter().map(|&x| x as usize)
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, node: usize) -> bool {
        self.nodes[..self.len as usize].binary_search(&(node as u32)).is_ok()
    }

    /// Union of two sets that share exactly one node; `None` otherwise.
    fn join(&self, other: &PathSet) -> Option<PathSet> {
        let (a, b) = (
            &self.nodes[..self.len as usize],
            &other.nodes[..other.len as usize],
        );
        if a.len() + b.len() - 1 > MAX_HOPS + 1 {
            return None;
        }
        let mut out = [0u32; MAX_HOPS + 1];
        let (mut i, mut j, mut k, mut shared) = (0, 0, 0, 0);
        while i < a.len() || j < b.len() {
            let next = if j == b.len() || (i < a.len() && a[i] < b[j]) {
                i += 1;
                a[i - 1]
            } else if i == a.len() || b[j] < a[i] {
                j += 1;
                b[j - 1]
            } else {
                shared += 1;
                i += 1;
                j += 1;
                a[i - 1]
            };
            out[k] = next;
            k += 1;
        }
        (shared == 1).then_some(PathSet {
            len: k as u8,
            nodes: out,
        })
    }

    /// Number of graph edges with both ends in the set.
    pub fn induced_edges(&self, graph: &LabeledGraph) -> usize {
        let nodes = &self.nodes[..self.len as usize];
        let mut count = 0;
        for (i, &a) in nodes.iter().enumerate() {
            for &b in &nodes[i + 1..] {
                if graph.has_edge(a as usize, b as usize) {
                    count += 1;
                }
            }
        }
        count
    }
}

/// For every source node, the `(end, vertex set)` of each simple path with
/// exactly `hops` edges starting there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathTable {
    hops: usize,
    from: Vec<Vec<(usize, PathSet)>>,
}

impl PathTable {
    pub fn hops(&self) -> usize {
        self.hops
    }

    pub fn from_node(&self, source: usize) -> &[(usize, PathSet)] {
        &self.from[source]
    }

    /// Total number of (ordered) entries.
    pub fn len(&self) -> usize {
        self.from.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Entries for the ordered pair `(u, v)`.
    pub fn between(&self, u: usize, v: usize) -> Vec<PathSet> {
        self.from[u]
            .iter()
            .filter(|(end, _)| *end == v)
            .map(|(_, s)| *s)
            .collect()
    }

    fn edges(graph: &LabeledGraph) -> Self {
        let from = (0..graph.node_count())
            .map(|u| {
                graph
                    .neighbors(u)
                    .iter()
                    .map(|&v| (v, PathSet::pair(u, v)))
                    .collect()
            })
            .collect();
        PathTable { hops: 1, from }
    }

    /// Paths from `source` formed by following `self` then `tail`.
    pub fn extend_from(&self, source: usize, tail: &PathTable) -> Vec<(usize, PathSet)> {
        let mut out = Vec::new();
        for (mid, head) in &self.from[source] {
            for (end, rest) in &tail.from[*mid] {
                if let Some(joined) = head.join(rest) {
                    out.push((*end, joined));
                }
            }
        }
        out
    }

    fn compose(&self, tail: &PathTable) -> PathTable {
        let from = (0..self.from.len())
            .map(|u| self.extend_from(u, tail))
            .collect();
        PathTable {
            hops: self.hops + tail.hops,
            from,
        }
    }
}

/// Hop tables up to a fixed depth, each built from two shorter ones.
#[derive(Debug, Clone)]
pub struct HopTables {
    tables: Vec<PathTable>,
}

impl HopTables {
    /// Builds the tables for `1..=max_hops` hops.
    pub fn build(graph: &LabeledGraph, max_hops: usize) -> Result<Self> {
        check_hops(max_hops)?;
        let mut tables = vec![PathTable::edges(graph)];
        for h in 2..=max_hops {
            let (lo, hi) = (h / 2, h - h / 2);
            let next = tables[lo - 1].compose(&tables[hi - 1]);
            tables.push(next);
        }
        Ok(HopTables { tables })
    }

    pub fn get(&self, hops: usize) -> &PathTable {
        &self.tables[hops - 1]
    }

    pub fn max_hops(&self) -> usize {
        self.tables.len()
    }
}

fn check_hops(h: usize) -> Result<()> {
    if !(1..=MAX_HOPS).contains(&h) {
        return Err(Error::Contract(format!(
            "hop count {h} outside 1..={MAX_HOPS}"
        )));
    }
    Ok(())
}

/// Simple paths with exactly `h` edges, per ordered end pair.
pub fn compose_path_sets(graph: &LabeledGraph, h: usize) -> Result<PathTable> {
    check_hops(h)?;
    let mut tables = HopTables::build(graph, h)?;
    Ok(tables.tables.swap_remove(h - 1))
}
