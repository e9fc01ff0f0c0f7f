use crate::labels::label_cmp;
use crate::newick::{cmp_f64, HeightNode, RootedTree};
use crate::tol::Tol;
use crate::trees::{check_equidistant, TreeError};
use crate::tropical::{TorusPoint, TropicalError};

/// Number of leaf pairs, `n(n-1)/2`.
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Position of the pair `(i, j)`, `i < j`, in lexicographic pair order.
#[inline]
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// Leaf count for `e` pairs, if `e` is a triangular number.
pub fn leaves_for_pairs(e: usize) -> Option<usize> {
    let n = ((1.0 + (1.0 + 8.0 * e as f64).sqrt()) / 2.0).round() as usize;
    (pair_count(n) == e).then_some(n)
}

/// Pairwise leaf distances of an equidistant tree, `u_ij = 2 × height of
/// the common ancestor of i and j`, stored in lexicographic pair order over
/// the sorted labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Ultrametric {
    labels: Vec<String>,
    entries: Vec<f64>,
}

impl Ultrametric {
    /// Wraps labels and pair entries given in the pair order of `labels`.
    /// Labels are re-sorted and the entries permuted to match. The
    /// three-point condition is not checked here; see [`is_ultrametric`].
    pub fn new(labels: Vec<String>, entries: Vec<f64>) -> Result<Self, TreeError> {
        let n = labels.len();
        if n == 0 {
            return Err(TreeError::EmptyLeafSet);
        }
        if entries.len() != pair_count(n) {
            return Err(TreeError::Invalid(format!(
                "{} entries do not match {} leaves ({} expected)",
                entries.len(),
                n,
                pair_count(n)
            )));
        }
        if let Some(x) = entries.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(TreeError::Invalid(format!("distance {x} is negative or not finite")));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| label_cmp(&labels[a], &labels[b]));
        let sorted: Vec<String> = order.iter().map(|&i| labels[i].clone()).collect();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(TreeError::Invalid("duplicate leaf label".into()));
        }
        if order.iter().enumerate().all(|(a, &b)| a == b) {
            return Ok(Ultrametric { labels: sorted, entries });
        }
        let mut permuted = vec![0.0; entries.len()];
        for a in 0..n {
            for b in a + 1..n {
                let (x, y) = (order[a].min(order[b]), order[a].max(order[b]));
                permuted[pair_index(n, a, b)] = entries[pair_index(n, x, y)];
            }
        }
        Ok(Ultrametric { labels: sorted, entries: permuted })
    }

    /// Ultrametric on leaves `1..=n` from entries in pair order.
    pub fn numbered(entries: Vec<f64>) -> Result<Self, TreeError> {
        let n = leaves_for_pairs(entries.len())
            .ok_or_else(|| TreeError::Invalid(format!("{} is not a triangular number", entries.len())))?;
        Ultrametric::new((1..=n).map(|i| i.to_string()).collect(), entries)
    }

    /// Same labels as `self` with new entries (a torus representative).
    pub fn with_point(&self, point: &TorusPoint) -> Result<Self, TreeError> {
        Ultrametric::new(self.labels.clone(), point.coords().to_vec())
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn e(&self) -> usize {
        self.entries.len()
    }

    /// Distance between leaves `i` and `j` (indices into [`Self::labels`]).
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.entries[pair_index(self.n(), i, j)],
            std::cmp::Ordering::Greater => self.entries[pair_index(self.n(), j, i)],
            std::cmp::Ordering::Equal => 0.0,
        }
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.binary_search_by(|l| label_cmp(l, label)).ok()
    }

    pub fn indices_of<S: AsRef<str>>(&self, leaves: &[S]) -> Result<Vec<usize>, TreeError> {
        let mut idx = leaves
            .iter()
            .map(|l| self.index_of(l.as_ref()).ok_or_else(|| TreeError::UnknownLabel(l.as_ref().to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        idx.sort_unstable();
        idx.dedup();
        Ok(idx)
    }

    /// Tree height, half the largest distance.
    pub fn height(&self) -> f64 {
        self.entries.iter().copied().fold(0.0, f64::max) / 2.0
    }

    /// Sub-ultrametric on a subset of leaves.
    pub fn restrict<S: AsRef<str>>(&self, leaves: &[S]) -> Result<Ultrametric, TreeError> {
        if leaves.is_empty() {
            return Err(TreeError::EmptyLeafSet);
        }
        let idx = self.indices_of(leaves)?;
        let labels = idx.iter().map(|&i| self.labels[i].clone()).collect();
        let mut entries = Vec::with_capacity(pair_count(idx.len()));
        for (a, &i) in idx.iter().enumerate() {
            for &j in &idx[a + 1..] {
                entries.push(self.get(i, j));
            }
        }
        Ok(Ultrametric { labels, entries })
    }

    pub fn to_point(&self) -> Result<TorusPoint, TropicalError> {
        TorusPoint::new(self.entries.clone())
    }

    /// First triple (as label indices) whose maximum is attained only once.
    pub fn violation(&self, tol: Tol) -> Option<(usize, usize, usize)> {
        find_violation(&self.entries, self.n(), tol)
    }

    /// Star tree of height `h`: every entry `2h`.
    pub fn star(labels: Vec<String>, h: f64) -> Result<Self, TreeError> {
        let e = pair_count(labels.len());
        Ultrametric::new(labels, vec![2.0 * h; e])
    }
}

fn three_point_ok(a: f64, b: f64, c: f64, tol: Tol) -> bool {
    let max = a.max(b).max(c);
    [a, b, c].iter().filter(|x| tol.eq(**x, max)).count() >= 2
}

fn find_violation(entries: &[f64], n: usize, tol: Tol) -> Option<(usize, usize, usize)> {
    for i in 0..n {
        for j in i + 1..n {
            let ij = entries[pair_index(n, i, j)];
            for k in j + 1..n {
                let ik = entries[pair_index(n, i, k)];
                let jk = entries[pair_index(n, j, k)];
                if !three_point_ok(ij, ik, jk, tol) {
                    return Some((i, j, k));
                }
            }
        }
    }
    None
}

/// Three-point condition on every triple. Fails if the length is not a
/// triangular number.
pub fn is_ultrametric(entries: &[f64], tol: Tol) -> Result<bool, TreeError> {
    let n = leaves_for_pairs(entries.len())
        .ok_or_else(|| TreeError::Invalid(format!("{} is not a triangular number", entries.len())))?;
    Ok(find_violation(entries, n, tol).is_none())
}

/// Pairwise distances of an equidistant tree.
pub fn ultrametric_of(tree: &RootedTree, tol: Tol) -> Result<Ultrametric, TreeError> {
    check_equidistant(tree, tol)?;
    let labels = tree.leaf_labels();
    let n = labels.len();
    let heights = tree.node_heights();
    let mut entries = vec![0.0; pair_count(n)];
    let mut below: Vec<Vec<usize>> = vec![Vec::new(); tree.len()];
    for id in tree.postorder() {
        let node = tree.node(id);
        if node.is_leaf() {
            let l = node.label.as_deref().unwrap_or_default();
            let idx = labels.binary_search_by(|x| label_cmp(x, l)).expect("leaf label present");
            below[id].push(idx);
            continue;
        }
        let d = 2.0 * heights[id];
        let kids: Vec<Vec<usize>> = node.children.iter().map(|&c| std::mem::take(&mut below[c])).collect();
        for (a, xs) in kids.iter().enumerate() {
            for ys in &kids[a + 1..] {
                for &x in xs {
                    for &y in ys {
                        entries[pair_index(n, x.min(y), x.max(y))] = d;
                    }
                }
            }
        }
        below[id] = kids.into_iter().flatten().collect();
    }
    Ok(Ultrametric { labels, entries })
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }
}

/// The equidistant tree realizing `u`, built by merging clusters at height
/// `u_ij / 2` in increasing order. Distances within `tol` of each other
/// merge at once and produce polytomies.
pub fn tree_of(u: &Ultrametric, tol: Tol) -> Result<RootedTree, TreeError> {
    let n = u.n();
    if let Some((i, j, k)) = u.violation(tol) {
        return Err(TreeError::NotUltrametric(u.labels[i].clone(), u.labels[j].clone(), u.labels[k].clone()));
    }
    if n == 1 {
        return Ok(RootedTree::leaf(u.labels[0].clone()));
    }
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(u.e());
    for i in 0..n {
        for j in i + 1..n {
            pairs.push((i, j));
        }
    }
    pairs.sort_by(|a, b| cmp_f64(u.get(a.0, a.1), u.get(b.0, b.1)));

    let mut spec: Vec<HeightNode> =
        u.labels.iter().map(|l| HeightNode { children: vec![], height: 0.0, label: Some(l.clone()) }).collect();
    let mut dsu = Dsu((0..n).collect());
    let mut node_of: Vec<usize> = (0..n).collect();
    let mut start = 0;
    while start < pairs.len() {
        let level = u.get(pairs[start].0, pairs[start].1);
        let mut end = start;
        while end < pairs.len() && u.get(pairs[end].0, pairs[end].1) - level <= tol.value() {
            end += 1;
        }
        let links: Vec<(usize, usize)> =
            pairs[start..end].iter().map(|&(i, j)| (dsu.find(i), dsu.find(j))).filter(|(a, b)| a != b).collect();
        let mut touched: Vec<usize> = links.iter().flat_map(|&(a, b)| [a, b]).collect();
        touched.sort_unstable();
        touched.dedup();
        for &(a, b) in &links {
            let (ra, rb) = (dsu.find(a), dsu.find(b));
            if ra != rb {
                dsu.0[rb] = ra;
            }
        }
        let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
        for &old in &touched {
            let root = dsu.find(old);
            match groups.iter_mut().find(|(r, _)| *r == root) {
                Some((_, members)) => members.push(node_of[old]),
                None => groups.push((root, vec![node_of[old]])),
            }
        }
        for (root, children) in groups {
            let id = spec.len();
            spec.push(HeightNode { children, height: level / 2.0, label: None });
            node_of[root] = id;
        }
        start = end;
    }
    let root = node_of[dsu.find(0)];
    Ok(RootedTree::from_heights(&spec, root)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newick::{parse_newick, write_newick};
    use crate::trees::topology_of;

    const T1: &str = "(((1:0.2,2:0.2):0.2,3:0.4):0.6,4:1.0);";
    const T2: &str = "(((2:0.2,3:0.2):0.2,1:0.4):0.6,4:1.0);";

    fn tol() -> Tol {
        Tol::DEFAULT
    }

    fn assert_entries(got: &[f64], want: &[f64]) {
        assert_eq!(got.len(), want.len());
        for (a, b) in got.iter().zip(want) {
            assert!((a - b).abs() < 1e-12, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn pair_indexing() {
        let n = 5;
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                assert_eq!(pair_index(n, i, j), k);
                k += 1;
            }
        }
        assert_eq!(leaves_for_pairs(6), Some(4));
        assert_eq!(leaves_for_pairs(7), None);
        assert_eq!(leaves_for_pairs(0), Some(1));
    }

    #[test]
    fn ultrametrics_of_example_trees() {
        let u = ultrametric_of(&parse_newick(T1).unwrap(), tol()).unwrap();
        assert_entries(u.entries(), &[0.4, 0.8, 2.0, 0.8, 2.0, 2.0]);
        let v = ultrametric_of(&parse_newick(T2).unwrap(), tol()).unwrap();
        assert_entries(v.entries(), &[0.8, 0.8, 2.0, 0.4, 2.0, 2.0]);
        let star = ultrametric_of(&parse_newick("(a:1.5,b:1.5,c:1.5,d:1.5,e:1.5);").unwrap(), tol()).unwrap();
        assert!(star.entries().iter().all(|&x| x == 3.0));
        assert!(ultrametric_of(&parse_newick("(1:1,(2:0.5,3:0.5):0.2);").unwrap(), tol()).is_err());
    }

    #[test]
    fn trees_of_example_ultrametrics() {
        let t = tree_of(&Ultrametric::numbered(vec![0.4, 0.8, 2.0, 0.8, 2.0, 2.0]).unwrap(), tol()).unwrap();
        assert_eq!(write_newick(&t, 10), "(((1:0.2,2:0.2):0.2,3:0.4):0.6,4:1);");
        let b = tree_of(&Ultrametric::numbered(vec![0.8, 0.8, 2.0, 0.8, 2.0, 2.0]).unwrap(), tol()).unwrap();
        assert_eq!(write_newick(&b, 10), "((1:0.4,2:0.4,3:0.4):0.6,4:1);");
        assert_eq!(topology_of(&b, tol()).unwrap().to_newick_shape(), "((1,2,3),4)");
        let err = tree_of(&Ultrametric::numbered(vec![1.0, 2.0, 3.0]).unwrap(), tol()).unwrap_err();
        assert_eq!(err, TreeError::NotUltrametric("1".into(), "2".into(), "3".into()));
    }

    #[test]
    fn three_point_checks() {
        assert!(is_ultrametric(&[0.4, 0.8, 2.0, 0.8, 2.0, 2.0], tol()).unwrap());
        assert!(is_ultrametric(&[2.0, 2.0, 2.0], tol()).unwrap());
        assert!(!is_ultrametric(&[1.0, 2.0, 3.0], tol()).unwrap());
        assert!(is_ultrametric(&[1.0, 2.0], tol()).is_err());
        assert!(is_ultrametric(&[1.0, 2.0, 2.0 + 1e-10], tol()).unwrap());
    }

    #[test]
    fn labels_are_reordered() {
        let u = Ultrametric::new(vec!["c".into(), "a".into(), "b".into()], vec![2.0, 2.0, 1.0]).unwrap();
        // c-a = 2, c-b = 2, a-b = 1 in sorted order (a, b, c): ab, ac, bc.
        assert_eq!(u.labels(), ["a", "b", "c"]);
        assert_eq!(u.entries(), &[1.0, 2.0, 2.0]);
    }

    #[test]
    fn restriction_and_round_trip() {
        let t = parse_newick(T1).unwrap();
        let u = ultrametric_of(&t, tol()).unwrap();
        let r = u.restrict(&["4", "1", "3"]).unwrap();
        assert_eq!(r.labels(), ["1", "3", "4"]);
        assert_entries(r.entries(), &[0.8, 2.0, 2.0]);
        let back = ultrametric_of(&tree_of(&u, tol()).unwrap(), tol()).unwrap();
        assert_entries(back.entries(), u.entries());
    }

    #[test]
    fn zero_distances_allowed() {
        let t = tree_of(&Ultrametric::numbered(vec![0.0, 1.0, 1.0]).unwrap(), tol()).unwrap();
        assert_eq!(write_newick(&t, 10), "((1:0,2:0):0.5,3:0.5);");
    }
}
