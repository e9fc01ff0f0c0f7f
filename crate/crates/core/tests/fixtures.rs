//! Worked examples on small fixed trees.

use troptree::newick::{parse_newick, RootedTree};
use troptree::sim::{random_equidistant_tree, sample_rng};
use troptree::trees::{is_clade, restrict_to_clade, topology_of};
use troptree::treespace::{
    check_clade_preservation, check_nni_theorem, classify_nni_segment, star_on_segment, topology_sequence,
    tree_segment, ultrametric_of, EndpointRelation,
};
use troptree::Tol;

// {S1..S4} joins at 1.9 and S5 at the root, 2.0.
const S_T1: &str = "((((S1:0.5,S2:0.5):0.5,S3:1):0.9,S4:1.9):0.1,S5:2);";
// {S4,S5} is a cherry; {S1,S2,S3} keeps the same shape.
const S_T2: &str = "(((S1:0.7,S2:0.7):0.6,S3:1.3):0.7,(S4:1.5,S5:1.5):0.5);";
const X0: [&str; 3] = ["S1", "S2", "S3"];

fn tol() -> Tol {
    Tol::DEFAULT
}

fn tree(s: &str) -> RootedTree {
    parse_newick(s).unwrap()
}

#[test]
fn shared_clade_fixture() {
    let (t1, t2) = (tree(S_T1), tree(S_T2));
    let u = ultrametric_of(&t1, tol()).unwrap();
    let s4 = u.index_of("S4").unwrap();
    let s5 = u.index_of("S5").unwrap();
    for leaf in X0 {
        let i = u.index_of(leaf).unwrap();
        assert_eq!(u.get(i, s4), 3.8);
        assert_eq!(u.get(i, s5), 4.0);
    }
    assert!(is_clade(&t1, &X0, tol()).unwrap());
    assert!(is_clade(&t2, &X0, tol()).unwrap());
    assert!(check_clade_preservation(&t1, &t2, &X0, tol()).unwrap());

    let seg = tree_segment(&t1, &t2, tol()).unwrap();
    assert!(seg.len() > 2);
    for b in seg.bends() {
        let sub = restrict_to_clade(&b.tree, &X0, tol()).unwrap();
        assert_eq!(topology_of(&sub, tol()).unwrap().to_newick_shape(), "((S1,S2),S3)");
    }
    assert!(one_nni(&t1, &t2));
    assert!(check_nni_theorem(&t1, &t2, tol()).unwrap());
}

fn one_nni(a: &RootedTree, b: &RootedTree) -> bool {
    troptree::trees::one_nni_apart(a, b, tol()).unwrap()
}

#[test]
fn balanced_and_caterpillar() {
    let bal = tree("((1:0.2,2:0.2):0.8,(3:0.5,4:0.5):0.5);");
    let cat = tree("(((1:0.2,2:0.2):0.2,3:0.4):0.6,4:1.0);");
    let report = classify_nni_segment(&bal, &cat, tol()).unwrap();
    assert!(report.holds());
    assert_eq!(report.sequence.first().unwrap().1, EndpointRelation::Second);
    assert_eq!(report.sequence.last().unwrap().1, EndpointRelation::First);
    for (t, _) in &report.sequence {
        assert!(t.is_contraction_of(&report.first) || t.is_contraction_of(&report.second));
    }
}

#[test]
fn three_leaves_pass_through_star() {
    let mut seen = 0;
    for i in 0..500 {
        let mut rng = sample_rng(33, i);
        let a = random_equidistant_tree(3, 1.0, &mut rng);
        let b = random_equidistant_tree(3, 1.0, &mut rng);
        let (ta, tb) = (topology_of(&a, tol()).unwrap(), topology_of(&b, tol()).unwrap());
        let seq = topology_sequence(&tree_segment(&a, &b, tol()).unwrap());
        if ta == tb {
            assert_eq!(seq, vec![ta]);
            assert!(!star_on_segment(&a, &b, tol()).unwrap());
            continue;
        }
        seen += 1;
        assert_eq!(seq.len(), 3);
        assert_eq!(seq[0], tb);
        assert!(seq[1].is_star());
        assert_eq!(seq[2], ta);
        assert!(star_on_segment(&a, &b, tol()).unwrap());
    }
    assert!(seen > 250);
}

#[test]
fn shared_cherry_on_five_leaves() {
    let a = tree("(((1:0.1,2:0.1):0.6,3:0.7):0.3,(4:0.4,5:0.4):0.6);");
    let b = tree("((1:0.3,2:0.3):0.7,((3:0.2,4:0.2):0.5,5:0.7):0.3);");
    assert!(!star_on_segment(&a, &b, tol()).unwrap());
    let seq = topology_sequence(&tree_segment(&a, &b, tol()).unwrap());
    assert!(seq.iter().all(|t| !t.is_star()));
    assert!(seq.iter().all(|t| t.contains_labels(&["1", "2"])));
}
