use std::cmp::Ordering;
use std::collections::HashSet;

use thiserror::Error;

use crate::labels::label_cmp;
use crate::tol::Tol;

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    /// Length of the edge to the parent. Always present on non-root nodes.
    pub length: Option<f64>,
    /// Present exactly on leaves.
    pub label: Option<String>,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InvalidTree {
    #[error("tree has no nodes")]
    Empty,
    #[error("node {0} references a node outside the tree")]
    DanglingLink(NodeId),
    #[error("node {0} has inconsistent parent/child links")]
    BrokenLink(NodeId),
    #[error("tree must have exactly one root, found {0}")]
    RootCount(usize),
    #[error("node {0} is not reachable from the root")]
    Unreachable(NodeId),
    #[error("duplicate leaf label '{0}'")]
    DuplicateLabel(String),
    #[error("leaf {0} has no label")]
    MissingLabel(NodeId),
    #[error("internal node {0} carries a label")]
    InternalLabel(NodeId),
    #[error("internal node {0} has fewer than two children")]
    UnaryNode(NodeId),
    #[error("node {0} has no branch length")]
    MissingLength(NodeId),
    #[error("node {node} has invalid branch length {length}")]
    BadLength { node: NodeId, length: f64 },
}

/// A rooted, edge-weighted tree with uniquely labelled leaves.
///
/// Internal nodes have at least two children; polytomies are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct RootedTree {
    nodes: Vec<Node>,
    root: NodeId,
}

/// Node description used to build a tree from node heights above the leaves.
#[derive(Debug, Clone)]
pub struct HeightNode {
    pub children: Vec<NodeId>,
    pub height: f64,
    pub label: Option<String>,
}

impl RootedTree {
    /// Validates and wraps an arena of nodes.
    pub fn from_nodes(nodes: Vec<Node>, root: NodeId) -> Result<Self, InvalidTree> {
        if nodes.is_empty() {
            return Err(InvalidTree::Empty);
        }
        let roots = nodes.iter().filter(|n| n.parent.is_none()).count();
        if roots != 1 || root >= nodes.len() || nodes[root].parent.is_some() {
            return Err(InvalidTree::RootCount(roots));
        }
        let mut labels = HashSet::new();
        for (id, node) in nodes.iter().enumerate() {
            if let Some(p) = node.parent {
                if p >= nodes.len() {
                    return Err(InvalidTree::DanglingLink(id));
                }
                if !nodes[p].children.contains(&id) {
                    return Err(InvalidTree::BrokenLink(id));
                }
                match node.length {
                    None => return Err(InvalidTree::MissingLength(id)),
                    Some(l) if !(l.is_finite() && l >= 0.0) => {
                        return Err(InvalidTree::BadLength { node: id, length: l })
                    }
                    _ => {}
                }
            } else if let Some(l) = node.length {
                if !(l.is_finite() && l >= 0.0) {
                    return Err(InvalidTree::BadLength { node: id, length: l });
                }
            }
            for &c in &node.children {
                if c >= nodes.len() {
                    return Err(InvalidTree::DanglingLink(id));
                }
                if nodes[c].parent != Some(id) {
                    return Err(InvalidTree::BrokenLink(c));
                }
            }
            match (&node.label, node.is_leaf()) {
                (None, true) => return Err(InvalidTree::MissingLabel(id)),
                (Some(_), false) => return Err(InvalidTree::InternalLabel(id)),
                (Some(l), true) => {
                    if l.is_empty() {
                        return Err(InvalidTree::MissingLabel(id));
                    }
                    if !labels.insert(l.as_str()) {
                        return Err(InvalidTree::DuplicateLabel(l.clone()));
                    }
                }
                (None, false) => {
                    if node.children.len() < 2 {
                        return Err(InvalidTree::UnaryNode(id));
                    }
                }
            }
        }
        let tree = RootedTree { nodes, root };
        let reached = tree.preorder().len();
        if reached != tree.nodes.len() {
            let seen: HashSet<NodeId> = tree.preorder().into_iter().collect();
            let missing = (0..tree.nodes.len()).find(|i| !seen.contains(i)).unwrap_or(0);
            return Err(InvalidTree::Unreachable(missing));
        }
        Ok(tree)
    }

    /// Builds a tree from node heights; each edge length is the height
    /// difference between parent and child. Leaves should have height 0.
    pub fn from_heights(spec: &[HeightNode], root: NodeId) -> Result<Self, InvalidTree> {
        let mut nodes: Vec<Node> = spec
            .iter()
            .map(|h| Node { parent: None, children: h.children.clone(), length: None, label: h.label.clone() })
            .collect();
        for (id, h) in spec.iter().enumerate() {
            for &c in &h.children {
                if c >= spec.len() {
                    return Err(InvalidTree::DanglingLink(id));
                }
                nodes[c].parent = Some(id);
                nodes[c].length = Some((h.height - spec[c].height).max(0.0));
            }
        }
        Self::from_nodes(nodes, root)
    }

    /// The single-leaf tree.
    pub fn leaf(label: impl Into<String>) -> Self {
        RootedTree {
            nodes: vec![Node { parent: None, children: vec![], length: None, label: Some(label.into()) }],
            root: 0,
        }
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn leaves(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).filter(move |&i| self.nodes[i].is_leaf())
    }

    pub fn n_leaves(&self) -> usize {
        self.leaves().count()
    }

    /// Leaf labels in canonical label order.
    pub fn leaf_labels(&self) -> Vec<String> {
        let mut labels: Vec<String> = self.leaves().filter_map(|i| self.nodes[i].label.clone()).collect();
        labels.sort_by(|a, b| label_cmp(a, b));
        labels
    }

    pub fn label(&self, id: NodeId) -> Option<&str> {
        self.nodes[id].label.as_deref()
    }

    pub fn preorder(&self) -> Vec<NodeId> {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            if order.len() > self.nodes.len() {
                break;
            }
            order.push(id);
            stack.extend(self.nodes[id].children.iter().rev().copied());
        }
        order
    }

    /// Children before parents.
    pub fn postorder(&self) -> Vec<NodeId> {
        let mut order = self.preorder();
        order.reverse();
        order
    }

    /// Distance from the root to every node.
    pub fn depths(&self) -> Vec<f64> {
        let mut depth = vec![0.0; self.nodes.len()];
        for id in self.preorder() {
            if let Some(p) = self.nodes[id].parent {
                depth[id] = depth[p] + self.nodes[id].length.unwrap_or(0.0);
            }
        }
        depth
    }

    /// Largest root-to-leaf distance.
    pub fn height(&self) -> f64 {
        let depth = self.depths();
        self.leaves().map(|i| depth[i]).fold(0.0, f64::max)
    }

    /// Height of every node above the deepest leaf.
    pub fn node_heights(&self) -> Vec<f64> {
        let depth = self.depths();
        let h = self.leaves().map(|i| depth[i]).fold(0.0, f64::max);
        depth.iter().map(|d| h - d).collect()
    }

    /// Leaf label that sorts first within each node's subtree.
    pub(crate) fn min_labels(&self) -> Vec<&str> {
        let mut min: Vec<&str> = vec![""; self.nodes.len()];
        for id in self.postorder() {
            let node = &self.nodes[id];
            min[id] = match &node.label {
                Some(l) if node.is_leaf() => l.as_str(),
                _ => node.children.iter().map(|&c| min[c]).min_by(|a, b| label_cmp(a, b)).unwrap_or(""),
            };
        }
        min
    }

    /// Children ordered by the smallest leaf label of their clade.
    pub(crate) fn sorted_children(&self, id: NodeId, min: &[&str]) -> Vec<NodeId> {
        let mut kids = self.nodes[id].children.clone();
        kids.sort_by(|&a, &b| label_cmp(min[a], min[b]));
        kids
    }

    /// Same tree renumbered in preorder with canonically ordered children.
    pub fn canonical(&self) -> RootedTree {
        let min = self.min_labels();
        let mut old_to_new = vec![usize::MAX; self.nodes.len()];
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            old_to_new[id] = order.len();
            order.push(id);
            let kids = self.sorted_children(id, &min);
            stack.extend(kids.into_iter().rev());
        }
        let nodes = order
            .iter()
            .map(|&old| {
                let n = &self.nodes[old];
                Node {
                    parent: n.parent.map(|p| old_to_new[p]),
                    children: self.sorted_children(old, &min).into_iter().map(|c| old_to_new[c]).collect(),
                    length: n.length,
                    label: n.label.clone(),
                }
            })
            .collect();
        RootedTree { nodes, root: 0 }
    }

    /// Structural equality ignoring child order, branch lengths within `tol`.
    pub fn approx_eq(&self, other: &RootedTree, tol: Tol) -> bool {
        let a = self.canonical();
        let b = other.canonical();
        if a.nodes.len() != b.nodes.len() {
            return false;
        }
        a.nodes.iter().zip(&b.nodes).all(|(x, y)| {
            x.parent == y.parent
                && x.children == y.children
                && x.label == y.label
                && match (x.length, y.length) {
                    (None, None) => true,
                    (Some(p), Some(q)) => tol.eq(p, q),
                    _ => false,
                }
        })
    }

    /// Leaf labels below every node.
    pub fn clades(&self) -> Vec<Vec<&str>> {
        let mut sets: Vec<Vec<&str>> = vec![Vec::new(); self.nodes.len()];
        for id in self.postorder() {
            let node = &self.nodes[id];
            if let (true, Some(l)) = (node.is_leaf(), &node.label) {
                sets[id].push(l.as_str());
            } else {
                let mut merged: Vec<&str> = node.children.iter().flat_map(|&c| sets[c].iter().copied()).collect();
                merged.sort_by(|a, b| label_cmp(a, b));
                sets[id] = merged;
            }
        }
        sets
    }

    /// Returns a copy with every branch length multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> RootedTree {
        let mut t = self.clone();
        for n in &mut t.nodes {
            n.length = n.length.map(|l| l * factor);
        }
        t
    }
}

pub(crate) fn cmp_f64(a: f64, b: f64) -> Ordering {
    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
}
