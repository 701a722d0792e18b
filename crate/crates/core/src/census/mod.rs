//! Labeled graphlet census over the fixed topology catalog.

mod catalog;
mod fast;
mod oracle;
mod paths;
mod table;

pub use catalog::{Shape, TopologyCatalog, TopologyEntry, TopologyMask, TOPOLOGY_COUNT};
pub use fast::count_labeled;
pub use oracle::{count_oracle, ORACLE_NODE_LIMIT};
pub use paths::{compose_path_sets, HopTables, PathSet, PathTable, MAX_HOPS};
pub use table::{write_census_csv, CensusTable};
