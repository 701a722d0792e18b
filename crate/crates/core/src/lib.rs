//! Labeled subgraph entropy: graphlet census, cluster-expansion entropy
//! embeddings, graph kernels, kernel PCA, SVM evaluation and
//! correlation-network entropy series.

pub mod census;
pub mod dataset;
pub mod error;
pub mod finnet;
pub mod entropy;
pub mod graph;
pub mod kernel;
pub mod pipeline;
pub mod svm;

pub use error::{Error, Result};
pub use graph::{GraphParts, LabeledGraph, Violation};
