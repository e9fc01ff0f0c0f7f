//! Strict Newick dialect for rooted, edge-weighted trees.
//!
//! Every non-root node must carry a `:length`; internal node labels are
//! accepted and dropped; whitespace between tokens is insignificant.

mod parser;
mod tree;
mod writer;

pub use parser::{parse_newick, ParseError, ParseErrorKind};
pub use tree::{HeightNode, InvalidTree, Node, NodeId, RootedTree};
pub use writer::{format_number, write_newick, DEFAULT_PRECISION};

pub(crate) use tree::cmp_f64;
