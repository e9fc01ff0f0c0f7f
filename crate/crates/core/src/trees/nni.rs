use super::{check_equidistant, topology_of, TreeError};
use crate::newick::{HeightNode, RootedTree};
use crate::tol::Tol;

/// All trees one rooted NNI move away from a binary equidistant tree.
///
/// For every internal edge from `p` down to `c`, where `c` has children
/// `a, b` and `p` has the other child `s`, the moves regraft `s` under `c`
/// in place of `b` or of `a`. Node heights are kept; if the new child of
/// `c` is not below it, `c` is lifted to the midpoint between its tallest
/// child and `p`.
pub fn nni_neighbors(tree: &RootedTree, tol: Tol) -> Result<Vec<RootedTree>, TreeError> {
    check_equidistant(tree, tol)?;
    if tree.nodes().iter().any(|n| !n.is_leaf() && n.children.len() != 2) {
        return Err(TreeError::NotBinary);
    }
    if !topology_of(tree, tol)?.is_binary() {
        return Err(TreeError::NotBinary);
    }
    let heights = tree.node_heights();
    let base: Vec<HeightNode> = tree
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, n)| HeightNode {
            children: n.children.clone(),
            height: if n.is_leaf() { 0.0 } else { heights[i] },
            label: n.label.clone(),
        })
        .collect();

    let mut out = Vec::new();
    for (c, node) in tree.nodes().iter().enumerate() {
        let Some(p) = node.parent else { continue };
        if node.is_leaf() {
            continue;
        }
        let s = *tree.node(p).children.iter().find(|&&x| x != c).expect("binary parent");
        let [a, b] = [node.children[0], node.children[1]];
        for (kept, moved_out) in [(a, b), (b, a)] {
            let mut spec = base.clone();
            spec[c].children = vec![kept, s];
            spec[p].children = vec![c, moved_out];
            let tallest = spec[kept].height.max(spec[s].height);
            if tallest >= spec[c].height - tol.value() {
                spec[c].height = 0.5 * (tallest + spec[p].height);
            }
            out.push(RootedTree::from_heights(&spec, tree.root())?);
        }
    }
    Ok(out)
}

/// Whether `b`'s topology is one rooted NNI move from `a`'s.
pub fn one_nni_apart(a: &RootedTree, b: &RootedTree, tol: Tol) -> Result<bool, TreeError> {
    if a.leaf_labels() != b.leaf_labels() {
        return Err(TreeError::LeafSetMismatch);
    }
    let ta = topology_of(a, tol)?;
    let tb = topology_of(b, tol)?;
    if !ta.is_binary() || !tb.is_binary() {
        return Err(TreeError::NotBinary);
    }
    ta.one_nni_apart(&tb)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::newick::parse_newick;
    use crate::trees::is_equidistant;

    fn tol() -> Tol {
        Tol::DEFAULT
    }

    fn shapes(trees: &[RootedTree]) -> BTreeSet<String> {
        trees.iter().map(|t| topology_of(t, tol()).unwrap().to_newick_shape()).collect()
    }

    #[test]
    fn three_leaves() {
        let t = parse_newick("((1:0.3,2:0.3):0.7,3:1);").unwrap();
        let n = nni_neighbors(&t, tol()).unwrap();
        assert_eq!(n.len(), 2);
        let expected: BTreeSet<String> = ["((1,3),2)", "(1,(2,3))"].iter().map(|s| s.to_string()).collect();
        assert_eq!(shapes(&n), expected);
        for x in &n {
            assert!(is_equidistant(x, tol()));
            assert!((x.height() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn caterpillar_to_balanced() {
        let t = parse_newick("(((1:0.2,2:0.2):0.2,3:0.4):0.6,4:1.0);").unwrap();
        let n = nni_neighbors(&t, tol()).unwrap();
        assert_eq!(n.len(), 4);
        assert!(shapes(&n).contains("((1,2),(3,4))"));
        for x in &n {
            assert!(is_equidistant(x, tol()));
            assert!(one_nni_apart(&t, x, tol()).unwrap());
            assert!(one_nni_apart(x, &t, tol()).unwrap());
        }
    }

    #[test]
    fn lifts_node_when_regrafted_subtree_is_taller() {
        // ((1,2)@0.1, (3,4)@0.8)@1: moving (3,4) under the 0.1 node needs a lift.
        let t = parse_newick("((1:0.1,2:0.1):0.9,(3:0.8,4:0.8):0.2);").unwrap();
        for x in nni_neighbors(&t, tol()).unwrap() {
            assert!(is_equidistant(&x, tol()));
            assert!(x.nodes().iter().filter(|n| n.parent.is_some()).all(|n| n.length.unwrap() > 0.0));
        }
    }

    #[test]
    fn rejects_polytomies() {
        let t = parse_newick("((1:0.4,2:0.4,3:0.4):0.6,4:1);").unwrap();
        assert_eq!(nni_neighbors(&t, tol()).unwrap_err(), TreeError::NotBinary);
    }

    #[test]
    fn one_nni_examples() {
        let cat = parse_newick("(((1:0.2,2:0.2):0.2,3:0.4):0.6,4:1.0);").unwrap();
        let bal = parse_newick("((1:0.2,2:0.2):0.8,(3:0.5,4:0.5):0.5);").unwrap();
        assert!(one_nni_apart(&bal, &cat, tol()).unwrap());
        assert!(!one_nni_apart(&cat, &cat, tol()).unwrap());
        let far = parse_newick("(((3:0.2,4:0.2):0.2,1:0.4):0.6,2:1.0);").unwrap();
        assert!(!one_nni_apart(&cat, &far, tol()).unwrap());
        let other = parse_newick("((1:0.5,2:0.5):0.5,5:1);").unwrap();
        assert_eq!(one_nni_apart(&cat, &other, tol()), Err(TreeError::LeafSetMismatch));
    }
}
