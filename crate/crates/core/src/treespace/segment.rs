use serde::Serialize;

use super::{tree_of, ultrametric_of, TreeSpaceError, Ultrametric};
use crate::newick::RootedTree;
use crate::tol::Tol;
use crate::trees::{is_clade, restrict_to_clade, speciation_times, topology_of, Topology, TreeError};
use crate::tropical::{in_tropical_hull, tropical_segment, TorusPoint, TropicalError, TropicalSegment};

/// Tree reconstructed at one bend point.
#[derive(Debug, Clone)]
pub struct BendTree {
    /// λ at which the bend is attained.
    pub lambda: f64,
    pub ultrametric: Ultrametric,
    pub tree: RootedTree,
    pub topology: Topology,
}

/// Maximal stretch of the segment with one topology. Positions index the
/// interleaved sequence `bend 0, piece 0, bend 1, …, bend m`: bend `k` is at
/// `2k` and the interior of piece `k` at `2k + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TopologyRun {
    pub topology: Topology,
    pub first: usize,
    pub last: usize,
}

impl TopologyRun {
    /// The run is a single bend point.
    pub fn is_point(&self) -> bool {
        self.first == self.last && self.first.is_multiple_of(2)
    }
}

/// Tropical segment between two ultrametrics, with trees at every bend.
/// The path starts at the second tree and ends at the first.
#[derive(Debug, Clone)]
pub struct TreeSegment {
    segment: TropicalSegment,
    labels: Vec<String>,
    bends: Vec<BendTree>,
    pieces: Vec<Topology>,
    runs: Vec<TopologyRun>,
}

impl TreeSegment {
    pub fn segment(&self) -> &TropicalSegment {
        &self.segment
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn bends(&self) -> &[BendTree] {
        &self.bends
    }

    /// Topology in the interior of each straight piece.
    pub fn pieces(&self) -> &[Topology] {
        &self.pieces
    }

    pub fn runs(&self) -> &[TopologyRun] {
        &self.runs
    }

    pub fn len(&self) -> usize {
        self.bends.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bends.is_empty()
    }

    /// `v - u` in pair order (unsorted).
    pub fn lambda_vector(&self) -> Vec<f64> {
        let s = &self.segment;
        s.start().coords().iter().zip(s.end().coords()).map(|(a, b)| a - b).collect()
    }

    /// Ultrametric at fraction `s` of piece `k`.
    pub fn piece_ultrametric(&self, k: usize, s: f64) -> Ultrametric {
        let p = self.segment.piece_point(k, s);
        Ultrametric::new(self.labels.clone(), p.into_coords()).expect("segment points are valid distances")
    }

    /// Tree at fraction `s` of piece `k`.
    pub fn piece_tree(&self, k: usize, s: f64, tol: Tol) -> Result<RootedTree, TreeError> {
        tree_of(&self.piece_ultrametric(k, s), tol)
    }

    /// Every tree examined along the path: bends interleaved with piece
    /// midpoints.
    pub fn sampled_trees(&self, tol: Tol) -> Result<Vec<RootedTree>, TreeError> {
        let mut out = Vec::with_capacity(2 * self.bends.len());
        for (k, b) in self.bends.iter().enumerate() {
            if k > 0 {
                out.push(self.piece_tree(k - 1, 0.5, tol)?);
            }
            out.push(b.tree.clone());
        }
        Ok(out)
    }
}

fn check_same_leaves(t1: &RootedTree, t2: &RootedTree) -> Result<(), TreeSpaceError> {
    if t1.leaf_labels() != t2.leaf_labels() {
        return Err(TreeSpaceError::LeafSetMismatch);
    }
    Ok(())
}

/// Segment from `t2` to `t1` in ultrametric space.
pub fn tree_segment(t1: &RootedTree, t2: &RootedTree, tol: Tol) -> Result<TreeSegment, TreeSpaceError> {
    check_same_leaves(t1, t2)?;
    let u = ultrametric_of(t1, tol)?;
    let v = ultrametric_of(t2, tol)?;
    segment_between(&u, &v, tol)
}

/// Segment from `v` to `u` given as ultrametrics.
pub fn segment_between(u: &Ultrametric, v: &Ultrametric, tol: Tol) -> Result<TreeSegment, TreeSpaceError> {
    if u.labels() != v.labels() {
        return Err(TreeSpaceError::LeafSetMismatch);
    }
    if u.n() < 3 {
        return Err(TropicalError::TooFewCoordinates(u.e()).into());
    }
    let segment = tropical_segment(&u.to_point()?, &v.to_point()?, tol)?;
    let labels = u.labels().to_vec();
    let mut bends = Vec::with_capacity(segment.len());
    for k in 0..segment.len() {
        let ultrametric = Ultrametric::new(labels.clone(), segment.bend_point(k).into_coords())?;
        let tree = tree_of(&ultrametric, tol)?;
        let topology = topology_of(&tree, tol)?;
        bends.push(BendTree { lambda: segment.bend_lambda(k), ultrametric, tree, topology });
    }
    let mut seg = TreeSegment { segment, labels, bends, pieces: Vec::new(), runs: Vec::new() };
    for k in 0..seg.bends.len().saturating_sub(1) {
        let mid = seg.piece_tree(k, 0.5, tol)?;
        seg.pieces.push(topology_of(&mid, tol)?);
    }
    seg.runs = build_runs(&seg);
    Ok(seg)
}

fn build_runs(seg: &TreeSegment) -> Vec<TopologyRun> {
    let mut runs: Vec<TopologyRun> = Vec::new();
    let mut push = |topology: &Topology, pos: usize| match runs.last_mut() {
        Some(r) if r.topology == *topology => r.last = pos,
        _ => runs.push(TopologyRun { topology: topology.clone(), first: pos, last: pos }),
    };
    for (k, b) in seg.bends.iter().enumerate() {
        if k > 0 {
            push(&seg.pieces[k - 1], 2 * k - 1);
        }
        push(&b.topology, 2 * k);
    }
    runs
}

/// Topologies met along the segment from the `t2` end to the `t1` end,
/// consecutive repeats removed.
pub fn topology_sequence(seg: &TreeSegment) -> Vec<Topology> {
    seg.runs.iter().map(|r| r.topology.clone()).collect()
}

/// Trees `T^1 = T, …, T^k = star` obtained by raising every internal node
/// below the `i`-th speciation time up to it.
pub fn segment_to_star(tree: &RootedTree, tol: Tol) -> Result<Vec<RootedTree>, TreeError> {
    let u = ultrametric_of(tree, tol)?;
    let times = speciation_times(tree, tol)?;
    times
        .as_slice()
        .iter()
        .map(|&t| {
            let raised = u.entries().iter().map(|&x| x.max(2.0 * t)).collect();
            tree_of(&Ultrametric::new(u.labels().to_vec(), raised)?, tol)
        })
        .collect()
}

fn equal_height_pair(t1: &RootedTree, t2: &RootedTree, tol: Tol) -> Result<(Ultrametric, Ultrametric), TreeSpaceError> {
    check_same_leaves(t1, t2)?;
    let u = ultrametric_of(t1, tol)?;
    let v = ultrametric_of(t2, tol)?;
    let (h1, h2) = (u.height(), v.height());
    if !tol.eq(h1, h2) {
        return Err(TreeSpaceError::HeightMismatch(h1, h2));
    }
    Ok((u, v))
}

/// The segment passes through the star tree iff `max(u, v)` is constant.
pub fn star_on_segment(t1: &RootedTree, t2: &RootedTree, tol: Tol) -> Result<bool, TreeSpaceError> {
    let (u, v) = equal_height_pair(t1, t2, tol)?;
    let joined: Vec<f64> = u.entries().iter().zip(v.entries()).map(|(a, b)| a.max(*b)).collect();
    let lo = joined.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = joined.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(hi - lo <= tol.value())
}

/// Star-tree membership through the hull type test.
pub fn star_in_hull(t1: &RootedTree, t2: &RootedTree, tol: Tol) -> Result<bool, TreeSpaceError> {
    let (u, v) = equal_height_pair(t1, t2, tol)?;
    let star = TorusPoint::new(vec![0.0; u.e()])?;
    Ok(in_tropical_hull(&[u.to_point()?, v.to_point()?], &star, tol)?)
}

/// Whether `leaves`, a clade of both trees with the same restricted
/// topology, stays a clade with that topology at every bend point and piece
/// midpoint of the segment.
pub fn check_clade_preservation<S: AsRef<str>>(
    t1: &RootedTree,
    t2: &RootedTree,
    leaves: &[S],
    tol: Tol,
) -> Result<bool, TreeSpaceError> {
    check_same_leaves(t1, t2)?;
    let names: Vec<&str> = leaves.iter().map(|s| s.as_ref()).collect();
    if !is_clade(t1, &names, tol)? || !is_clade(t2, &names, tol)? {
        return Err(TreeSpaceError::Precondition("leaf set is not a clade of both trees".into()));
    }
    let target = topology_of(&restrict_to_clade(t1, &names, tol)?, tol)?;
    if topology_of(&restrict_to_clade(t2, &names, tol)?, tol)? != target {
        return Err(TreeSpaceError::Precondition("restricted topologies differ".into()));
    }
    let seg = tree_segment(t1, t2, tol)?;
    for tree in seg.sampled_trees(tol)? {
        if !is_clade(&tree, &names, tol)? {
            return Ok(false);
        }
        if topology_of(&restrict_to_clade(&tree, &names, tol)?, tol)? != target {
            return Ok(false);
        }
    }
    Ok(true)
}

/// How a topology on the segment relates to the two endpoint topologies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EndpointRelation {
    /// Equal to both (identical endpoints).
    Both,
    First,
    Second,
    /// A proper contraction of both endpoint topologies.
    ContractionOfBoth,
    ContractionOfFirst,
    ContractionOfSecond,
    Neither,
}

impl EndpointRelation {
    pub fn classify(t: &Topology, first: &Topology, second: &Topology) -> Self {
        match (t == first, t == second) {
            (true, true) => return EndpointRelation::Both,
            (true, false) => return EndpointRelation::First,
            (false, true) => return EndpointRelation::Second,
            _ => {}
        }
        match (t.is_contraction_of(first), t.is_contraction_of(second)) {
            (true, true) => EndpointRelation::ContractionOfBoth,
            (true, false) => EndpointRelation::ContractionOfFirst,
            (false, true) => EndpointRelation::ContractionOfSecond,
            (false, false) => EndpointRelation::Neither,
        }
    }

    pub fn is_allowed(self) -> bool {
        self != EndpointRelation::Neither
    }
}

/// Per-topology classification of a segment between one-NNI-apart trees.
#[derive(Debug, Clone)]
pub struct NniTheoremReport {
    pub first: Topology,
    pub second: Topology,
    pub sequence: Vec<(Topology, EndpointRelation)>,
}

impl NniTheoremReport {
    pub fn holds(&self) -> bool {
        self.sequence.iter().all(|(_, r)| r.is_allowed())
    }
}

/// Classifies every topology along the segment between `t1` and `t2`, which
/// must be binary and either one NNI move apart or of equal topology.
pub fn classify_nni_segment(t1: &RootedTree, t2: &RootedTree, tol: Tol) -> Result<NniTheoremReport, TreeSpaceError> {
    check_same_leaves(t1, t2)?;
    let first = topology_of(t1, tol)?;
    let second = topology_of(t2, tol)?;
    if !first.is_binary() || !second.is_binary() {
        return Err(TreeSpaceError::Precondition("both trees must be binary".into()));
    }
    if first != second && !first.one_nni_apart(&second)? {
        return Err(TreeSpaceError::Precondition("trees are not one NNI move apart".into()));
    }
    let seg = tree_segment(t1, t2, tol)?;
    let sequence = topology_sequence(&seg)
        .into_iter()
        .map(|t| {
            let r = EndpointRelation::classify(&t, &first, &second);
            (t, r)
        })
        .collect();
    Ok(NniTheoremReport { first, second, sequence })
}

/// Every topology along the segment equals an endpoint topology or is a
/// contraction of one.
pub fn check_nni_theorem(t1: &RootedTree, t2: &RootedTree, tol: Tol) -> Result<bool, TreeSpaceError> {
    Ok(classify_nni_segment(t1, t2, tol)?.holds())
}
