//! Dataset-level census and embedding passes.

use rayon::prelude::*;

use crate::census::{count_labeled, CensusTable, TopologyCatalog, TopologyMask};
use crate::dataset::GraphDataset;
use crate::entropy::{Embedder, EntropyEmbedding};
use crate::error::Result;

/// Census of every graph, in dataset order, widened to the dataset's label axis.
pub fn census_dataset(dataset: &GraphDataset, mask: &TopologyMask) -> Vec<CensusTable> {
    let catalog = TopologyCatalog::standard();
    dataset
        .graphs
        .par_iter()
        .map(|g| count_labeled(g, &catalog, mask))
        .collect()
}

pub fn embed_dataset(
    dataset: &GraphDataset,
    censuses: &[CensusTable],
    embedder: &Embedder,
) -> Result<Vec<EntropyEmbedding>> {
    censuses
        .iter()
        .map(|c| embedder.embed(c, dataset.label_count()))
        .collect()
}

/// Census followed by embedding.
pub fn embed_with_mask(
    dataset: &GraphDataset,
    mask: &TopologyMask,
    embedder: &Embedder,
) -> Result<Vec<EntropyEmbedding>> {
    embed_dataset(dataset, &census_dataset(dataset, mask), embedder)
}
