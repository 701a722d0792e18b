//! Undirected node-labeled graphs and their validation.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unvalidated graph description, as read from a file or assembled by hand.
///
/// Edges are unordered pairs: `(1, 0)` and `(0, 1)` denote the same edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphParts {
    pub id: String,
    pub node_count: usize,
    pub edges: Vec<(usize, usize)>,
    pub labels: Vec<usize>,
}

/// First broken invariant found by [`GraphParts::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    SelfLoop { node: usize },
    EndpointOutOfRange { edge: (usize, usize), node_count: usize },
    DuplicateEdge { edge: (usize, usize) },
    LabelCount { labels: usize, node_count: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SelfLoop { node } => write!(f, "self-loop at node {node}"),
            Violation::EndpointOutOfRange { edge, node_count } => write!(
                f,
                "endpoint out of range: edge ({}, {}) on {node_count} nodes",
                edge.0, edge.1
            ),
            Violation::DuplicateEdge { edge } => {
                write!(f, "duplicate edge ({}, {})", edge.0, edge.1)
            }
            Violation::LabelCount { labels, node_count } => {
                write!(f, "{labels} labels given for {node_count} nodes")
            }
        }
    }
}

impl std::error::Error for Violation {}

impl GraphParts {
    pub fn new(
        id: impl Into<String>,
        node_count: usize,
        edges: Vec<(usize, usize)>,
        labels: Vec<usize>,
    ) -> Self {
        GraphParts {
            id: id.into(),
            node_count,
            edges,
            labels,
        }
    }

    /// Checks the graph invariants, reporting the first violation.
    pub fn validate(&self) -> std::result::Result<(), Violation> {
        if self.labels.len() != self.node_count {
            return Err(Violation::LabelCount {
                labels: self.labels.len(),
                node_count: self.node_count,
            });
        }
        let mut seen = BTreeSet::new();
        for &(u, v) in &self.edges {
            if u == v {
                return Err(Violation::SelfLoop { node: u });
            }
            if u >= self.node_count || v >= self.node_count {
                return Err(Violation::EndpointOutOfRange {
                    edge: (u, v),
                    node_count: self.node_count,
                });
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Violation::DuplicateEdge { edge: (u, v) });
            }
        }
        Ok(())
    }
}

/// A validated undirected simple graph with one dense label id per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledGraph {
    id: String,
    labels: Vec<usize>,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl TryFrom<GraphParts> for LabeledGraph {
    type Error = Violation;

    fn try_from(parts: GraphParts) -> std::result::Result<Self, Violation> {
        parts.validate()?;
        let n = parts.node_count;
        let mut edges: Vec<(usize, usize)> = parts
            .edges
            .into_iter()
            .map(|(u, v)| (u.min(v), u.max(v)))
            .collect();
        edges.sort_unstable();
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(LabeledGraph {
            id: parts.id,
            labels: parts.labels,
            edges,
            adjacency,
        })
    }
}

impl LabeledGraph {
    /// Builds and validates a graph; the violation becomes a contract error.
    pub fn new(
        id: impl Into<String>,
        labels: Vec<usize>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let parts = GraphParts::new(id, labels.len(), edges.into_iter().collect(), labels);
        LabeledGraph::try_from(parts).map_err(|v| Error::Contract(v.to_string()))
    }

    /// Graph with every node carrying label 0.
    pub fn unlabeled(
        id: impl Into<String>,
        node_count: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        LabeledGraph::new(id, vec![0; node_count], edges)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Canonical edge list: `u < v`, sorted lexicographically.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, node: usize) -> usize {
        self.labels[node]
    }

    /// One past the largest label id in use (0 for an empty graph).
    pub fn label_bound(&self) -> usize {
        self.labels.iter().max().map_or(0, |&m| m + 1)
    }

    /// Sorted neighbors of `node`.
    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        let (a, b) = if self.degree(u) <= self.degree(v) {
            (u, v)
        } else {
            (v, u)
        };
        self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Per-node sorted neighbor lists.
    pub fn neighbor_sets(&self) -> Vec<Vec<usize>> {
        self.adjacency.clone()
    }

    pub fn to_parts(&self) -> GraphParts {
        GraphParts::new(
            self.id.clone(),
            self.node_count(),
            self.edges.clone(),
            self.labels.clone(),
        )
    }

    /// Same graph with node `i` renamed to `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.node_count();
        let mut check = perm.to_vec();
        check.sort_unstable();
        if check != (0..n).collect::<Vec<_>>() {
            return Err(Error::Contract(format!(
                "permutation of length {} is not a bijection on {n} nodes",
                perm.len()
            )));
        }
        let mut labels = vec![0; n];
        for (old, &new) in perm.iter().enumerate() {
            labels[new] = self.labels[old];
        }
        let edges = self.edges.iter().map(|&(u, v)| (perm[u], perm[v]));
        LabeledGraph::new(self.id.clone(), labels, edges)
    }

    /// Same topology under a new label assignment.
    pub fn with_labels(&self, labels: Vec<usize>) -> Result<Self> {
        LabeledGraph::new(self.id.clone(), labels, self.edges.iter().copied())
    }

    /// Same graph with edge `{u, v}` removed (no-op if absent).
    pub fn without_edge(&self, u: usize, v: usize) -> Self {
        let key = (u.min(v), u.max(v));
        let edges = self.edges.iter().copied().filter(|&e| e != key);
        LabeledGraph::new(self.id.clone(), self.labels.clone(), edges)
            .expect("removing an edge preserves validity")
    }
}
