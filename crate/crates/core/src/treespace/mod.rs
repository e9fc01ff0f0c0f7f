//! Ultrametrics of equidistant trees and tropical segments between them.

mod segment;
mod ultrametric;

use thiserror::Error;

use crate::trees::TreeError;
use crate::tropical::TropicalError;

pub use segment::{
    check_clade_preservation, check_nni_theorem, classify_nni_segment, segment_between, segment_to_star, star_in_hull,
    star_on_segment, topology_sequence, tree_segment, BendTree, EndpointRelation, NniTheoremReport, TopologyRun,
    TreeSegment,
};
pub use ultrametric::{is_ultrametric, leaves_for_pairs, pair_count, pair_index, tree_of, ultrametric_of, Ultrametric};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TreeSpaceError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Tropical(#[from] TropicalError),
    #[error("trees have different leaf sets")]
    LeafSetMismatch,
    #[error("tree heights differ: {0} vs {1}")]
    HeightMismatch(f64, f64),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl TreeSpaceError {
    /// Leaf-set mismatches, whether raised here or by the tree layer.
    pub fn is_leaf_mismatch(&self) -> bool {
        matches!(self, TreeSpaceError::LeafSetMismatch | TreeSpaceError::Tree(TreeError::LeafSetMismatch))
    }
}
