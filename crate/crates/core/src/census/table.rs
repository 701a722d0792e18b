use std::io::Write;

use serde::{Deserialize, Serialize};

use super::catalog::TOPOLOGY_COUNT;
use crate::error::Result;

/// Per-(topology, root label) occurrence counts for one graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusTable {
    pub graph_id: String,
    label_count: usize,
    /// Row-major `[type_id][label]`.
    counts: Vec<u64>,
}

impl CensusTable {
    pub fn zeros(graph_id: impl Into<String>, label_count: usize) -> Self {
        CensusTable {
            graph_id: graph_id.into(),
            label_count,
            counts: vec![0; TOPOLOGY_COUNT * label_count],
        }
    }

    pub fn label_count(&self) -> usize {
        self.label_count
    }

    /// Labels beyond the table's width have count zero.
    pub fn get(&self, type_id: usize, label: usize) -> u64 {
        if label >= self.label_count {
            return 0;
        }
        self.counts[type_id * self.label_count + label]
    }

    pub(crate) fn add(&mut self, type_id: usize, label: usize, amount: u64) {
        self.counts[type_id * self.label_count + label] += amount;
    }

    /// Counts for one topology, indexed by label.
    pub fn row(&self, type_id: usize) -> &[u64] {
        let start = type_id * self.label_count;
        &self.counts[start..start + self.label_count]
    }

    /// Rooted count of a topology with labels ignored.
    pub fn total(&self, type_id: usize) -> u64 {
        self.row(type_id).iter().sum()
    }

    /// All counts in catalog-then-label order.
    pub fn as_slice(&self) -> &[u64] {
        &self.counts
    }

    pub fn is_zero(&self) -> bool {
        self.counts.iter().all(|&c| c == 0)
    }
}

/// Writes `graph_id,type_id,label,count` rows, one per cell.
///
/// `alphabet[k]` is printed for label id `k`.
pub fn write_census_csv<W: Write>(
    tables: &[CensusTable],
    alphabet: &[i64],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["graph_id", "type_id", "label", "count"])?;
    for t in tables {
        for type_id in 0..TOPOLOGY_COUNT {
            for (label, raw) in alphabet.iter().enumerate() {
                w.write_record([
                    t.graph_id.clone(),
                    type_id.to_string(),
                    raw.to_string(),
                    t.get(type_id, label).to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
