//! Graph-classification corpora in the TUDataset text layout.
//!
//! A dataset `NAME` is a directory holding
//!
//! * `NAME_A.txt`: one `row, col` pair per line, 1-based global node ids;
//! * `NAME_graph_indicator.txt`: the graph id (1-based) of each node;
//! * `NAME_graph_labels.txt`: one integer class label per graph;
//! * `NAME_node_labels.txt`: one integer label per node.
//!
//! Edge labels and attribute files are ignored. Raw node labels are mapped to
//! dense ids through the sorted corpus-wide alphabet, so every graph shares one
//! label axis.

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::graph::{GraphParts, LabeledGraph};

#[derive(Debug, Clone, PartialEq)]
pub struct GraphDataset {
    pub name: String,
    pub graphs: Vec<LabeledGraph>,
    pub class_labels: Vec<i64>,
    /// Sorted raw node labels; a graph's label id `k` stands for `label_alphabet[k]`.
    pub label_alphabet: Vec<i64>,
}

impl GraphDataset {
    pub fn new(
        name: impl Into<String>,
        graphs: Vec<LabeledGraph>,
        class_labels: Vec<i64>,
        label_alphabet: Vec<i64>,
    ) -> Result<Self> {
        if graphs.len() != class_labels.len() {
            return Err(Error::Contract(format!(
                "{} graphs but {} class labels",
                graphs.len(),
                class_labels.len()
            )));
        }
        if let Some(g) = graphs
            .iter()
            .find(|g| g.label_bound() > label_alphabet.len())
        {
            return Err(Error::Contract(format!(
                "graph {} uses label id {} outside an alphabet of {}",
                g.id(),
                g.label_bound() - 1,
                label_alphabet.len()
            )));
        }
        Ok(GraphDataset {
            name: name.into(),
            graphs,
            class_labels,
            label_alphabet,
        })
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn label_count(&self) -> usize {
        self.label_alphabet.len()
    }

    /// Distinct class labels in ascending order.
    pub fn classes(&self) -> Vec<i64> {
        let set: BTreeSet<i64> = self.class_labels.iter().copied().collect();
        set.into_iter().collect()
    }

    /// Keeps the graphs at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> GraphDataset {
        GraphDataset {
            name: self.name.clone(),
            graphs: indices.iter().map(|&i| self.graphs[i].clone()).collect(),
            class_labels: indices.iter().map(|&i| self.class_labels[i]).collect(),
            label_alphabet: self.label_alphabet.clone(),
        }
    }
}

struct Lines {
    file: String,
    rows: Vec<(usize, String)>,
}

fn read_lines(dir: &Path, name: &str, suffix: &str) -> Result<Lines> {
    let file = format!("{name}_{suffix}.txt");
    let path: PathBuf = dir.join(&file);
    let text = fs::read_to_string(&path).map_err(|source| Error::Ingestion { path, source })?;
    let rows = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim().to_string()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    Ok(Lines { file, rows })
}

fn parse_int<T: std::str::FromStr>(file: &str, line: usize, token: &str) -> Result<T> {
    token
        .trim()
        .parse()
        .map_err(|_| Error::format(file, line, format!("non-integer token {:?}", token.trim())))
}

/// Reads `dir/NAME_*.txt` into a dataset.
pub fn parse_tudataset(dir: impl AsRef<Path>, name: &str) -> Result<GraphDataset> {
    let dir = dir.as_ref();
    let edges = read_lines(dir, name, "A")?;
    let indicator = read_lines(dir, name, "graph_indicator")?;
    let graph_labels = read_lines(dir, name, "graph_labels")?;
    let node_labels = read_lines(dir, name, "node_labels")?;

    let node_graph: Vec<usize> = indicator
        .rows
        .iter()
        .map(|(line, tok)| {
            let g: usize = parse_int(&indicator.file, *line, tok)?;
            if g == 0 {
                return Err(Error::format(&indicator.file, *line, "graph ids are 1-based"));
            }
            Ok(g - 1)
        })
        .collect::<Result<_>>()?;
    let total_nodes = node_graph.len();

    let class_labels: Vec<i64> = graph_labels
        .rows
        .iter()
        .map(|(line, tok)| parse_int(&graph_labels.file, *line, tok))
        .collect::<Result<_>>()?;
    let graph_count = class_labels.len();
    if let Some(&max) = node_graph.iter().max() {
        if max >= graph_count {
            return Err(Error::format(
                &indicator.file,
                0,
                format!(
                    "graph id {} exceeds the {graph_count} graph labels",
                    max + 1
                ),
            ));
        }
    }

    let raw_labels: Vec<i64> = node_labels
        .rows
        .iter()
        .map(|(line, tok)| {
            // some distributions carry extra columns; the first one is the label
            let first = tok.split(',').next().unwrap_or(tok);
            parse_int(&node_labels.file, *line, first)
        })
        .collect::<Result<_>>()?;
    if raw_labels.len() != total_nodes {
        return Err(Error::format(
            &node_labels.file,
            0,
            format!(
                "{} node labels for {total_nodes} indicator entries",
                raw_labels.len()
            ),
        ));
    }
    let alphabet: Vec<i64> = raw_labels
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    // local index of each global node inside its graph, in file order
    let mut sizes = vec![0usize; graph_count];
    let local: Vec<usize> = node_graph
        .iter()
        .map(|&g| {
            sizes[g] += 1;
            sizes[g] - 1
        })
        .collect();
    let mut labels: Vec<Vec<usize>> = sizes.iter().map(|&s| Vec::with_capacity(s)).collect();
    for (node, &g) in node_graph.iter().enumerate() {
        let id = alphabet
            .binary_search(&raw_labels[node])
            .expect("alphabet built from these labels");
        labels[g].push(id);
    }

    let mut graph_edges: Vec<Vec<(usize, usize)>> = vec![Vec::new(); graph_count];
    let mut directed: HashSet<(usize, usize)> = HashSet::new();
    for (line, row) in &edges.rows {
        let mut parts = row.split(',');
        let (a, b) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(Error::format(
                    &edges.file,
                    *line,
                    format!("expected `row, col`, found {row:?}"),
                ))
            }
        };
        let a: usize = parse_int(&edges.file, *line, a)?;
        let b: usize = parse_int(&edges.file, *line, b)?;
        for x in [a, b] {
            if x == 0 || x > total_nodes {
                return Err(Error::format(
                    &edges.file,
                    *line,
                    format!("node id {x} outside 1..={total_nodes}"),
                ));
            }
        }
        let (a, b) = (a - 1, b - 1);
        if node_graph[a] != node_graph[b] {
            return Err(Error::format(
                &edges.file,
                *line,
                format!(
                    "edge ({}, {}) joins graphs {} and {}",
                    a + 1,
                    b + 1,
                    node_graph[a] + 1,
                    node_graph[b] + 1
                ),
            ));
        }
        if a == b {
            return Err(Error::format(
                &edges.file,
                *line,
                format!("self-loop on node {}", a + 1),
            ));
        }
        if !directed.insert((a, b)) {
            return Err(Error::format(
                &edges.file,
                *line,
                format!("duplicate edge entry ({}, {})", a + 1, b + 1),
            ));
        }
        if directed.contains(&(b, a)) {
            // the reverse direction was already recorded
            continue;
        }
        graph_edges[node_graph[a]].push((local[a], local[b]));
    }

    let graphs = labels
        .into_iter()
        .zip(graph_edges)
        .enumerate()
        .map(|(g, (labels, edges))| {
            let parts = GraphParts::new((g + 1).to_string(), labels.len(), edges, labels);
            LabeledGraph::try_from(parts)
                .map_err(|v| Error::format(name, 0, format!("graph {}: {v}", g + 1)))
        })
        .collect::<Result<Vec<_>>>()?;

    GraphDataset::new(name, graphs, class_labels, alphabet)
}

/// Writes `dataset` in the layout read by [`parse_tudataset`], both edge
/// directions included.
pub fn write_tudataset(dataset: &GraphDataset, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let name = &dataset.name;
    let mut a = String::new();
    let mut indicator = String::new();
    let mut node_labels = String::new();
    let mut graph_labels = String::new();
    let mut offset = 0;
    for (g, (graph, class)) in dataset
        .graphs
        .iter()
        .zip(&dataset.class_labels)
        .enumerate()
    {
        for &(u, v) in graph.edges() {
            let _ = writeln!(a, "{}, {}", u + offset + 1, v + offset + 1);
            let _ = writeln!(a, "{}, {}", v + offset + 1, u + offset + 1);
        }
        for &label in graph.labels() {
            let _ = writeln!(indicator, "{}", g + 1);
            let _ = writeln!(node_labels, "{}", dataset.label_alphabet[label]);
        }
        let _ = writeln!(graph_labels, "{class}");
        offset += graph.node_count();
    }
    fs::write(dir.join(format!("{name}_A.txt")), a)?;
    fs::write(dir.join(format!("{name}_graph_indicator.txt")), indicator)?;
    fs::write(dir.join(format!("{name}_node_labels.txt")), node_labels)?;
    fs::write(dir.join(format!("{name}_graph_labels.txt")), graph_labels)?;
    Ok(())
}
