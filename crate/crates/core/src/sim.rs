//! Random equidistant trees and Monte Carlo experiments over tree pairs.
//!
//! Every sample `i` draws from its own ChaCha stream (`seed`, stream `i`),
//! so reports do not depend on thread scheduling.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::seq::IndexedRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::newick::{write_newick, HeightNode, RootedTree, DEFAULT_PRECISION};
use crate::tol::Tol;
use crate::trees::{topology_of, Topology, TreeError};
use crate::treespace::{
    star_in_hull, star_on_segment, topology_sequence, tree_of, tree_segment, ultrametric_of, TreeSpaceError,
    Ultrametric,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    TreeSpace(#[from] TreeSpaceError),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// How the two trees of a sampled pair are related.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairModel {
    /// Two independent coalescent trees.
    Coalescent,
    /// A coalescent tree and a tree one NNI move away with fresh heights.
    OneNni,
    /// Two trees with the same topology and independent heights.
    SameTopology,
    /// Two trees sharing a random clade with equal restricted topology.
    SharedClade,
}

impl PairModel {
    pub const ALL: [PairModel; 4] =
        [PairModel::Coalescent, PairModel::OneNni, PairModel::SameTopology, PairModel::SharedClade];

    pub fn tag(self) -> &'static str {
        match self {
            PairModel::Coalescent => "coalescent",
            PairModel::OneNni => "one-nni",
            PairModel::SameTopology => "same-topology",
            PairModel::SharedClade => "shared-clade",
        }
    }
}

impl fmt::Display for PairModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for PairModel {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PairModel::ALL
            .into_iter()
            .find(|m| m.tag() == s)
            .ok_or_else(|| SimError::InvalidConfig(format!("unknown model '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleConfig {
    pub n: usize,
    pub height: f64,
    pub samples: usize,
    pub seed: u64,
    pub model: PairModel,
    pub tol: f64,
}

impl SampleConfig {
    pub fn new(n: usize, height: f64, samples: usize, seed: u64) -> Self {
        SampleConfig { n, height, samples, seed, model: PairModel::Coalescent, tol: Tol::DEFAULT.value() }
    }

    pub fn with_model(mut self, model: PairModel) -> Self {
        self.model = model;
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.n < 3 {
            return Err(SimError::InvalidConfig(format!("n must be at least 3, got {}", self.n)));
        }
        if self.samples < 1 {
            return Err(SimError::InvalidConfig("samples must be at least 1".into()));
        }
        if !(self.height > 0.0 && self.height.is_finite()) {
            return Err(SimError::InvalidConfig(format!("height must be positive, got {}", self.height)));
        }
        if !(self.tol >= 0.0 && self.tol.is_finite()) {
            return Err(SimError::InvalidConfig(format!("tol must be non-negative, got {}", self.tol)));
        }
        Ok(())
    }

    fn tol(&self) -> Tol {
        Tol(self.tol)
    }
}

/// RNG for sample `index` of a run seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn numbered(n: usize) -> Vec<String> {
    (1..=n).map(|i| i.to_string()).collect()
}

/// Binary equidistant tree on `labels` with root at height `h`: a coalescent
/// ranked topology with the other `n - 2` node heights drawn uniformly on
/// `(0, h)` and sorted.
pub fn random_tree_on<R: Rng + ?Sized>(labels: &[String], h: f64, rng: &mut R) -> RootedTree {
    let n = labels.len();
    assert!(n >= 1, "at least one leaf");
    if n == 1 {
        return RootedTree::leaf(labels[0].clone());
    }
    let mut heights: Vec<f64> = (0..n - 2).map(|_| rng.random_range(0.0..h)).collect();
    heights.sort_by(f64::total_cmp);
    heights.push(h);
    let mut spec: Vec<HeightNode> =
        labels.iter().map(|l| HeightNode { children: vec![], height: 0.0, label: Some(l.clone()) }).collect();
    let mut active: Vec<usize> = (0..n).collect();
    for height in heights {
        let a = active.swap_remove(rng.random_range(0..active.len()));
        let b = active.swap_remove(rng.random_range(0..active.len()));
        active.push(spec.len());
        spec.push(HeightNode { children: vec![a, b], height, label: None });
    }
    let root = spec.len() - 1;
    RootedTree::from_heights(&spec, root).expect("coalescent construction is a valid tree")
}

/// Random equidistant tree on leaves `1..=n` of height exactly `h`.
pub fn random_equidistant_tree<R: Rng + ?Sized>(n: usize, h: f64, rng: &mut R) -> RootedTree {
    random_tree_on(&numbered(n), h, rng)
}

/// Same topology as `tree`, root at `h`, and every other internal node at a
/// uniform fraction in `[0.05, 0.95]` of its parent's height.
pub fn random_heights<R: Rng + ?Sized>(tree: &RootedTree, h: f64, rng: &mut R) -> RootedTree {
    let mut heights = vec![0.0; tree.len()];
    for id in tree.preorder() {
        let node = tree.node(id);
        heights[id] = match (node.parent, node.is_leaf()) {
            (_, true) => 0.0,
            (None, false) => h,
            (Some(p), false) => heights[p] * rng.random_range(0.05..0.95),
        };
    }
    let spec: Vec<HeightNode> = tree
        .nodes()
        .iter()
        .zip(&heights)
        .map(|(n, &height)| HeightNode { children: n.children.clone(), height, label: n.label.clone() })
        .collect();
    RootedTree::from_heights(&spec, tree.root()).expect("same shape as a valid tree")
}

/// A pair of trees one rooted NNI move apart, both of height `h`.
pub fn random_one_nni_pair<R: Rng + ?Sized>(n: usize, h: f64, tol: Tol, rng: &mut R) -> (RootedTree, RootedTree) {
    let t1 = random_equidistant_tree(n, h, rng);
    let neighbors = crate::trees::nni_neighbors(&t1, tol).expect("coalescent trees are binary");
    let shape = neighbors.choose(rng).expect("n >= 3 has NNI neighbors");
    let t2 = random_heights(shape, h, rng);
    (t1, t2)
}

/// A pair of trees with one shared topology and independent heights.
pub fn random_same_topology_pair<R: Rng + ?Sized>(n: usize, h: f64, rng: &mut R) -> (RootedTree, RootedTree) {
    let t1 = random_equidistant_tree(n, h, rng);
    let t2 = random_heights(&t1, h, rng);
    (t1, t2)
}

/// Two trees on `1..=n` sharing a random clade of size `2..n` whose
/// restricted topology agrees. Returns the trees and the clade labels.
pub fn random_shared_clade_pair<R: Rng + ?Sized>(
    n: usize,
    h: f64,
    tol: Tol,
    rng: &mut R,
) -> (RootedTree, RootedTree, Vec<String>) {
    let labels = numbered(n);
    let m = rng.random_range(2..n);
    let clade: Vec<String> = {
        let mut c: Vec<String> = labels.choose_multiple(rng, m).cloned().collect();
        crate::labels::sort_labels(&mut c);
        c
    };
    let outside: Vec<String> = labels.iter().filter(|l| !clade.contains(l)).cloned().collect();
    let shape = random_tree_on(&clade, 1.0, rng);
    let build = |rng: &mut R| {
        const ANCHOR: &str = "#";
        let mut outer_labels = outside.clone();
        outer_labels.push(ANCHOR.to_string());
        let outer = ultrametric_of(&random_tree_on(&outer_labels, h, rng), tol).expect("equidistant");
        let anchor = outer.index_of(ANCHOR).expect("anchor present");
        let join = (0..outer.n()).filter(|&k| k != anchor).map(|k| outer.get(anchor, k)).fold(f64::INFINITY, f64::min);
        let hc = 0.5 * join * rng.random_range(0.1..0.9);
        let inner = ultrametric_of(&random_heights(&shape, hc, rng), tol).expect("equidistant");
        let map = |l: &String| match inner.index_of(l) {
            Some(i) => (true, i),
            None => (false, outer.index_of(l).expect("outer label")),
        };
        let mut entries = Vec::with_capacity(labels.len() * (labels.len() - 1) / 2);
        for (a, la) in labels.iter().enumerate() {
            for lb in &labels[a + 1..] {
                let d = match (map(la), map(lb)) {
                    ((true, i), (true, j)) => inner.get(i, j),
                    ((true, _), (false, k)) | ((false, k), (true, _)) => outer.get(anchor, k),
                    ((false, i), (false, j)) => outer.get(i, j),
                };
                entries.push(d);
            }
        }
        let u = Ultrametric::new(labels.clone(), entries).expect("valid distances");
        tree_of(&u, tol).expect("grafted ultrametric")
    };
    let t1 = build(rng);
    let t2 = build(rng);
    (t1, t2, clade)
}

/// Draws the pair for sample `index` under `cfg.model`.
pub fn sample_pair(cfg: &SampleConfig, index: u64) -> (RootedTree, RootedTree) {
    let mut rng = sample_rng(cfg.seed, index);
    let (n, h) = (cfg.n, cfg.height);
    match cfg.model {
        PairModel::Coalescent => (random_equidistant_tree(n, h, &mut rng), random_equidistant_tree(n, h, &mut rng)),
        PairModel::OneNni => random_one_nni_pair(n, h, cfg.tol(), &mut rng),
        PairModel::SameTopology => random_same_topology_pair(n, h, &mut rng),
        PairModel::SharedClade => {
            let (a, b, _) = random_shared_clade_pair(n, h, cfg.tol(), &mut rng);
            (a, b)
        }
    }
}

/// A topology change along a sampled segment that is not one NNI move.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub pair: usize,
    pub t1: String,
    pub t2: String,
    pub transition: usize,
    pub from: Topology,
    pub to: Topology,
    /// Still present when the segment is recomputed at `tol / 100`.
    pub confirmed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub config: SampleConfig,
    /// Pairs whose segment passes through the star tree.
    pub hits: usize,
    pub rate: f64,
    /// Pairs whose endpoint topologies differ.
    pub differing_topologies: usize,
    /// Pairs where the hull-type star test disagrees with `max(u, v)`.
    pub hull_disagreements: usize,
    /// Number of pairs by count of binary-to-binary topology transitions.
    pub transition_histogram: BTreeMap<usize, usize>,
    pub transitions: usize,
    pub single_nni_transitions: usize,
    pub single_nni_fraction: f64,
    pub violations: Vec<Violation>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Violations as CSV: pair index, both Newick inputs, transition index.
    pub fn violations_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["pair", "t1", "t2", "transition", "from", "to", "confirmed"])?;
        for v in &self.violations {
            w.write_record([
                v.pair.to_string(),
                v.t1.clone(),
                v.t2.clone(),
                v.transition.to_string(),
                v.from.to_string(),
                v.to.to_string(),
                v.confirmed.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Binary topology changes along the segment: polytomies are skipped and
/// consecutive binary topologies that differ form one transition each.
pub fn binary_transitions(sequence: &[Topology]) -> Vec<(Topology, Topology)> {
    let binary: Vec<&Topology> = sequence.iter().filter(|t| t.is_binary()).collect();
    binary.windows(2).filter(|w| w[0] != w[1]).map(|w| (w[0].clone(), w[1].clone())).collect()
}

struct PairOutcome {
    star: bool,
    hull: bool,
    differ: bool,
    transitions: Vec<(Topology, Topology, bool)>,
    t1: RootedTree,
    t2: RootedTree,
}

fn evaluate(cfg: &SampleConfig, index: usize, transitions: bool) -> Result<PairOutcome, SimError> {
    let tol = cfg.tol();
    let (t1, t2) = sample_pair(cfg, index as u64);
    let star = star_on_segment(&t1, &t2, tol)?;
    let hull = star_in_hull(&t1, &t2, tol)?;
    let differ = topology_of(&t1, tol)? != topology_of(&t2, tol)?;
    let transitions = if transitions {
        let seg = tree_segment(&t1, &t2, tol)?;
        binary_transitions(&topology_sequence(&seg))
            .into_iter()
            .map(|(a, b)| {
                let single = a.one_nni_apart(&b).unwrap_or(false);
                (a, b, single)
            })
            .collect()
    } else {
        Vec::new()
    };
    Ok(PairOutcome { star, hull, differ, transitions, t1, t2 })
}

fn still_violates(t1: &RootedTree, t2: &RootedTree, tol: Tol) -> bool {
    let fine = Tol(tol.value() / 100.0);
    match tree_segment(t1, t2, fine) {
        Ok(seg) => {
            binary_transitions(&topology_sequence(&seg)).iter().any(|(a, b)| !a.one_nni_apart(b).unwrap_or(false))
        }
        Err(_) => true,
    }
}

fn run(cfg: &SampleConfig, experiment: &str, transitions: bool) -> Result<ExperimentReport, SimError> {
    cfg.validate()?;
    let started = Instant::now();
    let outcomes: Vec<PairOutcome> =
        (0..cfg.samples).into_par_iter().map(|i| evaluate(cfg, i, transitions)).collect::<Result<_, _>>()?;

    let mut report = ExperimentReport {
        experiment: experiment.to_string(),
        config: cfg.clone(),
        hits: 0,
        rate: 0.0,
        differing_topologies: 0,
        hull_disagreements: 0,
        transition_histogram: BTreeMap::new(),
        transitions: 0,
        single_nni_transitions: 0,
        single_nni_fraction: 1.0,
        violations: Vec::new(),
        elapsed: Duration::ZERO,
    };
    for (pair, o) in outcomes.iter().enumerate() {
        report.hits += o.star as usize;
        report.differing_topologies += o.differ as usize;
        report.hull_disagreements += (o.star != o.hull) as usize;
        if !transitions {
            continue;
        }
        *report.transition_histogram.entry(o.transitions.len()).or_default() += 1;
        report.transitions += o.transitions.len();
        for (k, (from, to, single)) in o.transitions.iter().enumerate() {
            if *single {
                report.single_nni_transitions += 1;
                continue;
            }
            report.violations.push(Violation {
                pair,
                t1: write_newick(&o.t1, DEFAULT_PRECISION),
                t2: write_newick(&o.t2, DEFAULT_PRECISION),
                transition: k,
                from: from.clone(),
                to: to.clone(),
                confirmed: still_violates(&o.t1, &o.t2, cfg.tol()),
            });
        }
    }
    report.rate = report.hits as f64 / cfg.samples as f64;
    if report.transitions > 0 {
        report.single_nni_fraction = report.single_nni_transitions as f64 / report.transitions as f64;
    }
    report.elapsed = started.elapsed();
    Ok(report)
}

/// Fraction of sampled pairs whose segment crosses the star tree.
pub fn estimate_star_probability(cfg: &SampleConfig) -> Result<ExperimentReport, SimError> {
    run(cfg, "star-probability", false)
}

/// Topology transitions along sampled segments and how many are one NNI
/// move.
pub fn check_nni_conjecture(cfg: &SampleConfig) -> Result<ExperimentReport, SimError> {
    run(cfg, "nni-conjecture", true)
}
