//! Equidistant-tree semantics: validation, topology, clades, speciation
//! times and rooted NNI moves.

mod nni;
mod topology;

use thiserror::Error;

use crate::newick::{cmp_f64, format_number, InvalidTree, RootedTree};
use crate::tol::Tol;
use crate::treespace::{tree_of, ultrametric_of};

pub use nni::{nni_neighbors, one_nni_apart};
pub use topology::{Clade, Topology};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TreeError {
    #[error(
        "tree is not equidistant: leaf '{leaf}' at depth {depth} but leaf '{reference}' at depth {reference_depth}"
    )]
    NotEquidistant { leaf: String, depth: f64, reference: String, reference_depth: f64 },
    #[error("three-point condition violated on leaves ({0}, {1}, {2})")]
    NotUltrametric(String, String, String),
    #[error("tree has a polytomy; operation requires a binary tree")]
    NotBinary,
    #[error("unknown leaf label '{0}'")]
    UnknownLabel(String),
    #[error("empty leaf set")]
    EmptyLeafSet,
    #[error("trees have different leaf sets")]
    LeafSetMismatch,
    #[error("invalid tree: {0}")]
    Invalid(String),
}

impl From<InvalidTree> for TreeError {
    fn from(e: InvalidTree) -> Self {
        TreeError::Invalid(e.to_string())
    }
}

/// Sorted distinct internal-node heights `t_1 < … < t_k`; `t_k` is the tree
/// height and each `t_i` is half of some pairwise leaf distance.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeciationTimes(Vec<f64>);

impl SpeciationTimes {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn height(&self) -> Option<f64> {
        self.0.last().copied()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// All root-to-leaf path lengths agree within `tol`.
pub fn is_equidistant(tree: &RootedTree, tol: Tol) -> bool {
    check_equidistant(tree, tol).is_ok()
}

/// Like [`is_equidistant`] but names the leaf whose depth is farthest from
/// the median depth.
pub fn check_equidistant(tree: &RootedTree, tol: Tol) -> Result<(), TreeError> {
    let depth = tree.depths();
    let mut leaves: Vec<(f64, &str)> = tree.leaves().map(|i| (depth[i], tree.label(i).unwrap_or(""))).collect();
    leaves.sort_by(|a, b| cmp_f64(a.0, b.0));
    let (lo, hi) = match (leaves.first(), leaves.last()) {
        (Some(lo), Some(hi)) => (*lo, *hi),
        _ => return Ok(()),
    };
    if hi.0 - lo.0 <= tol.value() {
        return Ok(());
    }
    let median = leaves[leaves.len() / 2];
    let worst = if (hi.0 - median.0) >= (median.0 - lo.0) { hi } else { lo };
    Err(TreeError::NotEquidistant {
        leaf: worst.1.to_string(),
        depth: worst.0,
        reference: median.1.to_string(),
        reference_depth: median.0,
    })
}

/// Clade set of an equidistant tree after contracting every internal edge of
/// length at most `tol`.
pub fn topology_of(tree: &RootedTree, tol: Tol) -> Result<Topology, TreeError> {
    check_equidistant(tree, tol)?;
    let labels: Vec<String> = tree.leaf_labels();
    let clade_labels = tree.clades();
    let mut clades = Vec::new();
    for (id, node) in tree.nodes().iter().enumerate() {
        if node.is_leaf() {
            continue;
        }
        let kept = match node.parent {
            None => true,
            Some(_) => node.length.unwrap_or(0.0) > tol.value(),
        };
        if kept {
            let c = clade_labels[id]
                .iter()
                .map(|l| labels.iter().position(|x| x == l).expect("leaf label present"))
                .collect();
            clades.push(c);
        }
    }
    Topology::new(labels, clades)
}

/// Sorted distinct internal-node heights, merging values within `tol`.
pub fn speciation_times(tree: &RootedTree, tol: Tol) -> Result<SpeciationTimes, TreeError> {
    check_equidistant(tree, tol)?;
    let heights = tree.node_heights();
    let mut internal: Vec<f64> =
        tree.nodes().iter().enumerate().filter(|(_, n)| !n.is_leaf()).map(|(i, _)| heights[i]).collect();
    internal.sort_by(|a, b| cmp_f64(*a, *b));
    let mut times: Vec<f64> = Vec::new();
    let mut group_start = f64::NEG_INFINITY;
    for h in internal {
        match times.last_mut() {
            Some(last) if h - group_start <= tol.value() => *last = h,
            _ => {
                group_start = h;
                times.push(h);
            }
        }
    }
    Ok(SpeciationTimes(times))
}

/// Equidistant tree induced by the sub-ultrametric on `leaves`.
pub fn restrict_to_clade<S: AsRef<str>>(tree: &RootedTree, leaves: &[S], tol: Tol) -> Result<RootedTree, TreeError> {
    if leaves.is_empty() {
        return Err(TreeError::EmptyLeafSet);
    }
    let u = ultrametric_of(tree, tol)?;
    let sub = u.restrict(leaves)?;
    tree_of(&sub, tol)
}

/// `leaves` is a clade iff `u_ij < u_ik` for all `i, j` inside and `k`
/// outside (strictly, by more than `tol`).
pub fn is_clade<S: AsRef<str>>(tree: &RootedTree, leaves: &[S], tol: Tol) -> Result<bool, TreeError> {
    if leaves.is_empty() {
        return Err(TreeError::EmptyLeafSet);
    }
    let u = ultrametric_of(tree, tol)?;
    let inside = u.indices_of(leaves)?;
    let mut is_in = vec![false; u.n()];
    for &i in &inside {
        is_in[i] = true;
    }
    let outside: Vec<usize> = (0..u.n()).filter(|&k| !is_in[k]).collect();
    for (a, &i) in inside.iter().enumerate() {
        for &j in &inside[a + 1..] {
            let d = u.get(i, j);
            for &k in &outside {
                if !(tol.lt(d, u.get(i, k)) && tol.lt(d, u.get(j, k))) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

pub(crate) fn fmt_len(x: f64) -> String {
    format_number(x, crate::newick::DEFAULT_PRECISION)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newick::{parse_newick, write_newick};

    const T1: &str = "(((1:0.2,2:0.2):0.2,3:0.4):0.6,4:1.0);";
    const BEND: &str = "((1:0.4,2:0.4,3:0.4):0.6,4:1);";
    // Leaves 7,8 merge at 0.2, 3,4 at 0.3, 5,6 at 0.4, {2,3,4} at 0.6,
    // {5,6,7,8} at 0.7, {1,2,3,4} at 1.0 and the root at 1.2.
    pub(crate) const EIGHT: &str =
        "((1:1.0,(2:0.6,(3:0.3,4:0.3):0.3):0.4):0.2,((5:0.4,6:0.4):0.3,(7:0.2,8:0.2):0.5):0.5);";

    fn tol() -> Tol {
        Tol::DEFAULT
    }

    #[test]
    fn equidistance() {
        assert!(is_equidistant(&parse_newick(T1).unwrap(), tol()));
        let bad = parse_newick("(1:1,(2:0.5,3:0.5):0.2);").unwrap();
        assert!(!is_equidistant(&bad, tol()));
        match check_equidistant(&bad, tol()) {
            Err(TreeError::NotEquidistant { leaf, .. }) => assert_eq!(leaf, "1"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(is_equidistant(&parse_newick("A:0;").unwrap(), tol()));
    }

    #[test]
    fn topologies() {
        let t = topology_of(&parse_newick(T1).unwrap(), tol()).unwrap();
        assert_eq!(t.to_newick_shape(), "(((1,2),3),4)");
        assert_eq!(t.to_string(), "{1,2} {1,2,3} {1,2,3,4}");
        let b = topology_of(&parse_newick(BEND).unwrap(), tol()).unwrap();
        assert_eq!(b.to_string(), "{1,2,3} {1,2,3,4}");
        let star = topology_of(&parse_newick("(1:2,2:2,3:2,4:2);").unwrap(), tol()).unwrap();
        assert_eq!(star.to_string(), "{1,2,3,4}");
        assert!(star.is_star());
    }

    #[test]
    fn zero_length_edges_collapse() {
        let t = parse_newick("(((1:0.4,2:0.4):0,3:0.4):0.6,4:1);").unwrap();
        assert_eq!(topology_of(&t, tol()).unwrap().to_newick_shape(), "((1,2,3),4)");
        assert!(topology_of(&parse_newick("(1:1,(2:0.5,3:0.5):0.2);").unwrap(), tol()).is_err());
    }

    #[test]
    fn topology_is_scale_invariant() {
        let t = parse_newick(EIGHT).unwrap();
        let base = topology_of(&t, tol()).unwrap();
        for f in [0.001, 0.5, 3.0, 1e4] {
            assert_eq!(topology_of(&t.scaled(f), tol()).unwrap(), base);
        }
    }

    #[test]
    fn speciation_times_examples() {
        let t = speciation_times(&parse_newick(T1).unwrap(), tol()).unwrap();
        assert_times(t.as_slice(), &[0.2, 0.4, 1.0]);
        let star = speciation_times(&parse_newick("(1:1.5,2:1.5,3:1.5);").unwrap(), tol()).unwrap();
        assert_times(star.as_slice(), &[1.5]);
        let eight = parse_newick(EIGHT).unwrap();
        let t = speciation_times(&eight, tol()).unwrap();
        assert_times(t.as_slice(), &[0.2, 0.3, 0.4, 0.6, 0.7, 1.0, 1.2]);
        assert!((t.height().unwrap() - eight.height()).abs() < 1e-12);
        assert!(t.len() < eight.n_leaves());
    }

    #[test]
    fn speciation_times_merge_ties() {
        let t = parse_newick("((1:0.5,2:0.5):0.5,(3:0.5,4:0.5):0.5);").unwrap();
        assert_times(speciation_times(&t, tol()).unwrap().as_slice(), &[0.5, 1.0]);
    }

    fn assert_times(got: &[f64], want: &[f64]) {
        assert_eq!(got.len(), want.len(), "{got:?} vs {want:?}");
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-12, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn restriction() {
        let t = parse_newick(T1).unwrap();
        let full = restrict_to_clade(&t, &["1", "2", "3", "4"], tol()).unwrap();
        assert!(full.approx_eq(&t, Tol(1e-12)));
        let pair = restrict_to_clade(&t, &["1", "3"], tol()).unwrap();
        assert_eq!(write_newick(&pair, 10), "(1:0.4,3:0.4);");
        let single = restrict_to_clade(&t, &["4"], tol()).unwrap();
        assert_eq!(write_newick(&single, 10), "4;");
        assert_eq!(restrict_to_clade::<&str>(&t, &[], tol()), Err(TreeError::EmptyLeafSet));
        assert_eq!(restrict_to_clade(&t, &["9"], tol()), Err(TreeError::UnknownLabel("9".into())));
    }

    #[test]
    fn clade_criterion() {
        let t = parse_newick(T1).unwrap();
        assert!(is_clade(&t, &["1", "2"], tol()).unwrap());
        assert!(is_clade(&t, &["1", "2", "3"], tol()).unwrap());
        assert!(is_clade(&t, &["1", "2", "3", "4"], tol()).unwrap());
        assert!(!is_clade(&t, &["1", "3"], tol()).unwrap());
        assert!(!is_clade(&t, &["3", "4"], tol()).unwrap());
        let poly = parse_newick(BEND).unwrap();
        assert!(!is_clade(&poly, &["1", "2"], tol()).unwrap());
    }
}
