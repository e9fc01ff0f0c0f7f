use std::collections::BTreeSet;
use std::fmt;

use serde::{Serialize, Serializer};

use super::TreeError;
use crate::labels::label_cmp;

/// A clade as sorted indices into [`Topology::labels`].
pub type Clade = Vec<usize>;

/// Rooted tree shape as a laminar family of clades.
///
/// The full leaf set is always a member; singletons never are. Polytomies
/// appear as clades with more than two children.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Topology {
    labels: Vec<String>,
    clades: BTreeSet<Clade>,
}

fn is_subset(small: &[usize], big: &[usize]) -> bool {
    let mut it = big.iter();
    small.iter().all(|x| it.any(|y| y == x))
}

fn disjoint(a: &[usize], b: &[usize]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return false,
        }
    }
    true
}

fn union(a: &[usize], b: &[usize]) -> Clade {
    let mut u: Clade = a.iter().chain(b).copied().collect();
    u.sort_unstable();
    u.dedup();
    u
}

impl Topology {
    /// Builds a topology from labels (any order) and clades given as index
    /// sets into `labels`. Singletons are dropped and the full set added.
    pub fn new(labels: Vec<String>, clades: impl IntoIterator<Item = Vec<usize>>) -> Result<Self, TreeError> {
        let mut order: Vec<usize> = (0..labels.len()).collect();
        order.sort_by(|&a, &b| label_cmp(&labels[a], &labels[b]));
        let mut rank = vec![0; labels.len()];
        for (new, &old) in order.iter().enumerate() {
            rank[old] = new;
        }
        let sorted_labels: Vec<String> = order.iter().map(|&i| labels[i].clone()).collect();
        if sorted_labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(TreeError::Invalid("duplicate leaf label".into()));
        }
        let n = labels.len();
        let mut set = BTreeSet::new();
        for clade in clades {
            let mut c: Clade = clade
                .into_iter()
                .map(|i| rank.get(i).copied().ok_or_else(|| TreeError::Invalid(format!("leaf index {i} out of range"))))
                .collect::<Result<_, _>>()?;
            c.sort_unstable();
            c.dedup();
            if c.len() >= 2 {
                set.insert(c);
            }
        }
        if n >= 2 {
            set.insert((0..n).collect());
        }
        let topo = Topology { labels: sorted_labels, clades: set };
        topo.check_laminar()?;
        Ok(topo)
    }

    /// Builds a topology from clades written as label sets.
    pub fn from_label_sets<S: AsRef<str>>(labels: &[S], clades: &[&[&str]]) -> Result<Self, TreeError> {
        let labels: Vec<String> = labels.iter().map(|s| s.as_ref().to_string()).collect();
        let index = |l: &str| labels.iter().position(|x| x == l).ok_or_else(|| TreeError::UnknownLabel(l.to_string()));
        let sets = clades
            .iter()
            .map(|c| c.iter().map(|l| index(l)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Topology::new(labels, sets)
    }

    /// Star topology on the given labels.
    pub fn star(labels: Vec<String>) -> Self {
        Topology::new(labels, std::iter::empty()).expect("star topology is laminar")
    }

    fn check_laminar(&self) -> Result<(), TreeError> {
        let all: Vec<&Clade> = self.clades.iter().collect();
        for (i, a) in all.iter().enumerate() {
            for b in &all[i + 1..] {
                if !(is_subset(a, b) || is_subset(b, a) || disjoint(a, b)) {
                    return Err(TreeError::Invalid(format!(
                        "clades {} and {} overlap without nesting",
                        self.clade_string(a),
                        self.clade_string(b)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n_leaves(&self) -> usize {
        self.labels.len()
    }

    pub fn clades(&self) -> impl Iterator<Item = &Clade> {
        self.clades.iter()
    }

    pub fn n_clades(&self) -> usize {
        self.clades.len()
    }

    pub fn contains(&self, clade: &[usize]) -> bool {
        self.clades.contains(clade)
    }

    /// Index of a label in [`Topology::labels`].
    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.binary_search_by(|l| label_cmp(l, label)).ok()
    }

    pub fn indices_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<Clade, TreeError> {
        let mut c = labels
            .iter()
            .map(|l| self.index_of(l.as_ref()).ok_or_else(|| TreeError::UnknownLabel(l.as_ref().to_string())))
            .collect::<Result<Clade, _>>()?;
        c.sort_unstable();
        c.dedup();
        Ok(c)
    }

    pub fn contains_labels<S: AsRef<str>>(&self, labels: &[S]) -> bool {
        self.indices_of(labels).map(|c| self.contains(&c)).unwrap_or(false)
    }

    /// Every internal node has exactly two children.
    pub fn is_binary(&self) -> bool {
        self.labels.len() < 2 || self.clades.len() == self.labels.len() - 1
    }

    pub fn is_star(&self) -> bool {
        self.clades.len() <= 1
    }

    /// All clades of `self` are clades of `other`: `self` is obtained from
    /// `other` by contracting internal edges to zero length.
    pub fn is_contraction_of(&self, other: &Topology) -> bool {
        self.labels == other.labels && self.clades.is_subset(&other.clades)
    }

    /// Topology induced on a subset of leaves.
    pub fn restrict<S: AsRef<str>>(&self, leaves: &[S]) -> Result<Topology, TreeError> {
        if leaves.is_empty() {
            return Err(TreeError::EmptyLeafSet);
        }
        let keep = self.indices_of(leaves)?;
        let labels: Vec<String> = keep.iter().map(|&i| self.labels[i].clone()).collect();
        let clades =
            self.clades.iter().map(|c| c.iter().filter_map(|x| keep.binary_search(x).ok()).collect::<Vec<usize>>());
        Topology::new(labels, clades)
    }

    /// Smallest clade strictly containing `clade`.
    fn parent_of(&self, clade: &[usize]) -> Option<&Clade> {
        self.clades.iter().filter(|c| c.len() > clade.len() && is_subset(clade, c)).min_by_key(|c| c.len())
    }

    /// Maximal proper sub-clades and loose leaves of a clade, each as an
    /// index set, ordered by smallest member.
    pub fn children_of(&self, clade: &[usize]) -> Vec<Clade> {
        let mut kids: Vec<Clade> = Vec::new();
        let mut subs: Vec<&Clade> =
            self.clades.iter().filter(|c| c.len() < clade.len() && is_subset(c, clade)).collect();
        subs.sort_by_key(|c| std::cmp::Reverse(c.len()));
        let mut covered = vec![false; self.labels.len()];
        for c in subs {
            if c.iter().all(|&x| !covered[x]) {
                for &x in c {
                    covered[x] = true;
                }
                kids.push(c.clone());
            }
        }
        for &x in clade {
            if !covered[x] {
                kids.push(vec![x]);
            }
        }
        kids.sort_by_key(|c| c[0]);
        kids
    }

    /// Rooted NNI neighbours. For each internal edge above a clade
    /// `C = A ∪ B` whose parent has the other child `S`, the two moves
    /// replace `C` by `A ∪ S` or by `B ∪ S`.
    pub fn nni_neighbors(&self) -> Result<Vec<Topology>, TreeError> {
        if !self.is_binary() {
            return Err(TreeError::NotBinary);
        }
        let n = self.labels.len();
        let mut out = Vec::new();
        for c in &self.clades {
            if c.len() == n {
                continue;
            }
            let parent = self.parent_of(c).expect("non-root clade has a parent");
            let kids = self.children_of(c);
            let sibling: Clade = parent.iter().copied().filter(|x| c.binary_search(x).is_err()).collect();
            for moved in [&kids[0], &kids[1]] {
                let mut clades = self.clades.clone();
                clades.remove(c);
                let replacement = union(moved, &sibling);
                clades.insert(replacement);
                out.push(Topology { labels: self.labels.clone(), clades });
            }
        }
        Ok(out)
    }

    /// Whether `other` is reachable by exactly one rooted NNI move.
    pub fn one_nni_apart(&self, other: &Topology) -> Result<bool, TreeError> {
        if self.labels != other.labels {
            return Err(TreeError::LeafSetMismatch);
        }
        if !other.is_binary() {
            return Err(TreeError::NotBinary);
        }
        Ok(self.nni_neighbors()?.iter().any(|t| t == other))
    }

    /// Number of clades in exactly one of the two topologies.
    pub fn rf_distance(&self, other: &Topology) -> usize {
        self.clades.symmetric_difference(&other.clades).count()
    }

    fn clade_string(&self, clade: &[usize]) -> String {
        let names: Vec<&str> = clade.iter().map(|&i| self.labels[i].as_str()).collect();
        format!("{{{}}}", names.join(","))
    }

    /// Clades sorted by size and then by members, e.g.
    /// `{1,2} {1,2,3} {1,2,3,4}`.
    pub fn clade_set_string(&self) -> String {
        let mut all: Vec<&Clade> = self.clades.iter().collect();
        all.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        all.iter().map(|c| self.clade_string(c)).collect::<Vec<_>>().join(" ")
    }

    /// Newick shape without branch lengths, e.g. `(((1,2),3),4)`.
    pub fn to_newick_shape(&self) -> String {
        let n = self.labels.len();
        if n == 1 {
            return self.labels[0].clone();
        }
        let mut out = String::new();
        self.write_shape(&(0..n).collect::<Vec<_>>(), &mut out);
        out
    }

    fn write_shape(&self, clade: &[usize], out: &mut String) {
        if clade.len() == 1 {
            out.push_str(&self.labels[clade[0]]);
            return;
        }
        out.push('(');
        for (i, kid) in self.children_of(clade).iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            self.write_shape(kid, out);
        }
        out.push(')');
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.clade_set_string())
    }
}

impl Serialize for Topology {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.clade_set_string())
    }
}
