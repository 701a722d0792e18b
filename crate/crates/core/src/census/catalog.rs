//! The fixed catalog of rooted graphlet topologies.
//!
//! Entry order defines the coordinate order of census tables and entropy
//! embeddings:
//!
//! | id | topology            | nodes | edges | root orbit            |
//! |----|---------------------|-------|-------|-----------------------|
//! | 0  | triangle            | 3     | 3     | every node            |
//! | 1  | path-3              | 3     | 2     | either end            |
//! | 2  | path-4              | 4     | 3     | either end            |
//! | 3  | star-4 (claw)       | 4     | 3     | center                |
//! | 4  | cycle-4             | 4     | 4     | every node            |
//! | 5  | tailed triangle     | 4     | 4     | free end of the tail  |
//! | 6  | diamond             | 4     | 5     | the two degree-3 nodes|
//! | 7  | clique-4            | 4     | 6     | every node            |
//! | 8  | path-5              | 5     | 4     | either end            |
//! | 9  | star-5              | 5     | 4     | center                |
//! | 10 | cycle-5             | 5     | 5     | every node            |
//! | 11 | path-6              | 6     | 5     | either end            |

use serde::Serialize;

pub const TOPOLOGY_COUNT: usize = 12;

/// Structural family of an entry; selects the fast counting routine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Triangle,
    Path,
    Star,
    Cycle,
    TailedTriangle,
    Diamond,
    Clique,
}

#[derive(Debug, Clone, Serialize)]
pub struct TopologyEntry {
    pub type_id: usize,
    pub name: &'static str,
    pub shape: Shape,
    /// Node count.
    pub nodes: usize,
    /// Edge count.
    pub edge_count: usize,
    /// Canonical edges on nodes `0..nodes`.
    pub edges: &'static [(usize, usize)],
    /// Node positions that may act as the starting node.
    pub root_orbit: &'static [usize],
}

impl TopologyEntry {
    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges
            .iter()
            .any(|&(x, y)| (x, y) == (a, b) || (y, x) == (a, b))
    }

    pub fn degree(&self, node: usize) -> usize {
        self.edges
            .iter()
            .filter(|&&(x, y)| x == node || y == node)
            .count()
    }
}

macro_rules! entry {
    ($id:expr, $name:expr, $shape:ident, $nodes:expr, [$(($a:expr, $b:expr)),*], [$($r:expr),*]) => {
        TopologyEntry {
            type_id: $id,
            name: $name,
            shape: Shape::$shape,
            nodes: $nodes,
            edge_count: [$(($a, $b)),*].len(),
            edges: &[$(($a, $b)),*],
            root_orbit: &[$($r),*],
        }
    };
}

#[derive(Debug, Clone, Serialize)]
pub struct TopologyCatalog {
    entries: Vec<TopologyEntry>,
}

impl Default for TopologyCatalog {
    fn default() -> Self {
        Self::standard()
    }
}

impl TopologyCatalog {
    pub fn standard() -> Self {
        let entries = vec![
            entry!(0, "triangle", Triangle, 3, [(0, 1), (1, 2), (0, 2)], [0, 1, 2]),
            entry!(1, "path-3", Path, 3, [(0, 1), (1, 2)], [0, 2]),
            entry!(2, "path-4", Path, 4, [(0, 1), (1, 2), (2, 3)], [0, 3]),
            entry!(3, "star-4", Star, 4, [(0, 1), (0, 2), (0, 3)], [0]),
            entry!(4, "cycle-4", Cycle, 4, [(0, 1), (1, 2), (2, 3), (0, 3)], [0, 1, 2, 3]),
            entry!(5, "tailed-triangle", TailedTriangle, 4, [(0, 1), (1, 2), (1, 3), (2, 3)], [0]),
            entry!(6, "diamond", Diamond, 4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)], [0, 1]),
            entry!(7, "clique-4", Clique, 4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], [0, 1, 2, 3]),
            entry!(8, "path-5", Path, 5, [(0, 1), (1, 2), (2, 3), (3, 4)], [0, 4]),
            entry!(9, "star-5", Star, 5, [(0, 1), (0, 2), (0, 3), (0, 4)], [0]),
            entry!(10, "cycle-5", Cycle, 5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)], [0, 1, 2, 3, 4]),
            entry!(11, "path-6", Path, 6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)], [0, 5]),
        ];
        debug_assert_eq!(entries.len(), TOPOLOGY_COUNT);
        TopologyCatalog { entries }
    }

    pub fn entries(&self) -> &[TopologyEntry] {
        &self.entries
    }

    pub fn entry(&self, type_id: usize) -> &TopologyEntry {
        &self.entries[type_id]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// JSON reference card describing every entry.
    pub fn reference_card(&self) -> serde_json::Value {
        serde_json::json!({
            "semantics": "induced subgraphs; one count per (instance, root node) with the root in the root orbit",
            "entries": self.entries,
        })
    }
}

/// Subset of catalog entries to count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TopologyMask([bool; TOPOLOGY_COUNT]);

impl Default for TopologyMask {
    fn default() -> Self {
        Self::all()
    }
}

impl TopologyMask {
    pub fn all() -> Self {
        TopologyMask([true; TOPOLOGY_COUNT])
    }

    pub fn none() -> Self {
        TopologyMask([false; TOPOLOGY_COUNT])
    }

    pub fn only(ids: &[usize]) -> Self {
        let mut m = Self::none();
        for &id in ids {
            m.0[id] = true;
        }
        m
    }

    pub fn excluding(ids: &[usize]) -> Self {
        let mut m = Self::all();
        for &id in ids {
            m.0[id] = false;
        }
        m
    }

    /// Entries with at most four nodes (ids 0 through 7).
    pub fn small() -> Self {
        Self::only(&[0, 1, 2, 3, 4, 5, 6, 7])
    }

    pub fn contains(&self, type_id: usize) -> bool {
        self.0[type_id]
    }

    pub fn is_empty(&self) -> bool {
        !self.0.iter().any(|&b| b)
    }

    pub fn ids(&self) -> Vec<usize> {
        (0..TOPOLOGY_COUNT).filter(|&i| self.0[i]).collect()
    }

    /// Parses `all`, `small`, `include=1,2`, `exclude=3` or a bare id list.
    pub fn parse(spec: &str) -> Result<Self, String> {
        let spec = spec.trim();
        let ids = |list: &str| -> Result<Vec<usize>, String> {
            list.split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| {
                    let id: usize = s
                        .trim()
                        .parse()
                        .map_err(|_| format!("bad topology id {s:?}"))?;
                    if id >= TOPOLOGY_COUNT {
                        return Err(format!("topology id {id} outside 0..{TOPOLOGY_COUNT}"));
                    }
                    Ok(id)
                })
                .collect()
        };
        let mask = match spec {
            "all" => Self::all(),
            "small" => Self::small(),
            _ => {
                if let Some(rest) = spec.strip_prefix("include=") {
                    Self::only(&ids(rest)?)
                } else if let Some(rest) = spec.strip_prefix("exclude=") {
                    Self::excluding(&ids(rest)?)
                } else {
                    Self::only(&ids(spec)?)
                }
            }
        };
        if mask.is_empty() {
            return Err(format!("topology selection {spec:?} is empty"));
        }
        Ok(mask)
    }
}

impl std::fmt::Display for TopologyMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if *self == Self::all() {
            return f.write_str("all");
        }
        let ids: Vec<String> = self.ids().iter().map(|i| i.to_string()).collect();
        write!(f, "include={}", ids.join(","))
    }
}
