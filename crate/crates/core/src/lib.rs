//! Tropical line segments between equidistant phylogenetic trees.
//!
//! Trees enter as Newick text ([`newick`]), are converted to ultrametrics
//! ([`treespace::Ultrametric`]), and are connected by max-plus line segments
//! ([`tropical::tropical_segment`]). Every bend point of a segment between
//! two ultrametrics is again an ultrametric, so the segment can be read back
//! as a sequence of trees whose topologies are reported by
//! [`treespace::tree_segment`] and [`treespace::topology_sequence`].
//!
//! [`sim`] draws random equidistant trees and runs Monte Carlo experiments
//! on star-tree crossings and topology transitions along segments.

pub mod cli;
pub mod labels;
pub mod newick;
pub mod sim;
pub mod tol;
pub mod trees;
pub mod treespace;
pub mod tropical;

pub use newick::{parse_newick, write_newick, ParseError, RootedTree};
pub use tol::Tol;
pub use trees::{Topology, TreeError};
pub use treespace::{TreeSegment, TreeSpaceError, Ultrametric};
pub use tropical::{PointType, TorusPoint, TropicalError, TropicalSegment};
