//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or invalid configuration, 2 unreadable or
//! unparseable input, 3 tree not equidistant or not ultrametric, 4 leaf
//! sets differ.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::newick::{format_number, parse_newick, write_newick, RootedTree};
use crate::sim::{check_nni_conjecture, estimate_star_probability, PairModel, SampleConfig};
use crate::tol::Tol;
use crate::trees::{check_equidistant, topology_of, Topology, TreeError};
use crate::treespace::{topology_sequence, tree_of, tree_segment, ultrametric_of, TreeSegment, TreeSpaceError};
use crate::tropical::trop_dist;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NOT_EQUIDISTANT: i32 = 3;
pub const EXIT_LEAF_MISMATCH: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "troptree", version, about = "Tropical line segments between equidistant trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Newick,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    /// Rate at which segments pass through the star tree.
    StarProb,
    /// Topology transitions along segments and their NNI distance.
    NniConjecture,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Absolute tolerance for comparing distances.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Significant digits when printing numbers.
    #[arg(long, default_value_t = crate::newick::DEFAULT_PRECISION)]
    pub precision: usize,
}

#[derive(Debug, Args)]
pub struct Pair {
    /// First tree (Newick file); the segment ends here.
    pub t1: PathBuf,
    /// Second tree (Newick file); the segment starts here.
    pub t2: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bend points of the segment between two trees.
    Segment {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        common: Common,
    },
    /// Topologies met along the segment.
    Topologies {
        #[command(flatten)]
        pair: Pair,
        #[command(flatten)]
        common: Common,
    },
    /// Tropical distance between the two ultrametrics.
    Dist {
        #[command(flatten)]
        pair: Pair,
        #[command(flatten)]
        common: Common,
    },
    /// Checks that a tree is equidistant.
    Validate {
        path: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo experiment over random tree pairs; JSON report.
    Simulate {
        #[arg(value_enum)]
        kind: Experiment,
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 1.0)]
        height: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// coalescent | one-nni | same-topology | shared-clade
        #[arg(long, default_value = "coalescent")]
        model: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write non-NNI transitions as CSV.
        #[arg(long)]
        violations: Option<PathBuf>,
    },
}

/// Error carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

fn tree_failure(path: &Path, e: TreeError) -> Failure {
    let code = match e {
        TreeError::NotEquidistant { .. } | TreeError::NotUltrametric(..) => EXIT_NOT_EQUIDISTANT,
        TreeError::LeafSetMismatch => EXIT_LEAF_MISMATCH,
        _ => EXIT_USAGE,
    };
    Failure::new(code, format!("{}: {e}", path.display()))
}

fn space_failure(e: TreeSpaceError) -> Failure {
    let code = match &e {
        e if e.is_leaf_mismatch() => EXIT_LEAF_MISMATCH,
        TreeSpaceError::Tree(TreeError::NotEquidistant { .. } | TreeError::NotUltrametric(..)) => EXIT_NOT_EQUIDISTANT,
        _ => EXIT_USAGE,
    };
    Failure::new(code, e.to_string())
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::new(EXIT_INPUT, format!("{}: {e}", path.display()))
}

fn tolerance(tol: f64) -> Result<Tol, Failure> {
    if tol >= 0.0 && tol.is_finite() {
        Ok(Tol(tol))
    } else {
        Err(Failure::new(EXIT_USAGE, format!("invalid tolerance {tol}")))
    }
}

/// Reads, parses and checks one tree.
fn load(path: &Path, tol: Tol) -> Result<RootedTree, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    let tree = parse_newick(&text).map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))?;
    check_equidistant(&tree, tol).map_err(|e| tree_failure(path, e))?;
    Ok(tree)
}

fn load_pair(pair: &Pair, tol: Tol) -> Result<(RootedTree, RootedTree), Failure> {
    let t1 = load(&pair.t1, tol)?;
    let t2 = load(&pair.t2, tol)?;
    if t1.leaf_labels() != t2.leaf_labels() {
        return Err(Failure::new(
            EXIT_LEAF_MISMATCH,
            format!("{} and {} have different leaf sets", pair.t1.display(), pair.t2.display()),
        ));
    }
    Ok((t1, t2))
}

/// CSV header: index, lambda, one column per leaf pair, newick, topology.
pub fn csv_header(labels: &[String]) -> Vec<String> {
    let mut h = vec!["index".to_string(), "lambda".to_string()];
    for (a, la) in labels.iter().enumerate() {
        for lb in &labels[a + 1..] {
            h.push(format!("u_{la}_{lb}"));
        }
    }
    h.push("newick".into());
    h.push("topology".into());
    h
}

fn segment_csv(seg: &TreeSegment, precision: usize) -> Result<String, Failure> {
    let to_failure = |e: csv::Error| Failure::new(EXIT_INPUT, e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(csv_header(seg.labels())).map_err(to_failure)?;
    for (k, b) in seg.bends().iter().enumerate() {
        let mut row = vec![k.to_string(), format_number(b.lambda, precision)];
        row.extend(b.ultrametric.entries().iter().map(|x| format_number(*x, precision)));
        row.push(write_newick(&b.tree, precision));
        row.push(b.topology.to_string());
        w.write_record(&row).map_err(to_failure)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::new(EXIT_INPUT, e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Serialize)]
struct BendJson {
    index: usize,
    lambda: f64,
    ultrametric: Vec<f64>,
    newick: String,
    topology: Topology,
}

#[derive(Serialize)]
struct SegmentJson<'a> {
    labels: &'a [String],
    distance: f64,
    bends: Vec<BendJson>,
    topologies: Vec<Topology>,
}

fn segment_json(seg: &TreeSegment, precision: usize) -> String {
    let bends = seg
        .bends()
        .iter()
        .enumerate()
        .map(|(index, b)| BendJson {
            index,
            lambda: b.lambda,
            ultrametric: b.ultrametric.entries().to_vec(),
            newick: write_newick(&b.tree, precision),
            topology: b.topology.clone(),
        })
        .collect();
    let s = seg.segment();
    let doc = SegmentJson {
        labels: seg.labels(),
        distance: trop_dist(s.start(), s.end()).expect("same dimension"),
        bends,
        topologies: topology_sequence(seg),
    };
    serde_json::to_string_pretty(&doc).expect("segment serializes") + "\n"
}

/// Label for the change from `a` to `b`: `yes` for one NNI move between
/// binary topologies, `degenerate` when either has a polytomy.
pub fn transition_flag(a: &Topology, b: &Topology) -> &'static str {
    if !a.is_binary() || !b.is_binary() {
        "degenerate"
    } else if a.one_nni_apart(b).unwrap_or(false) {
        "yes"
    } else {
        "no"
    }
}

fn topologies_text(seg: &TreeSegment) -> String {
    let seq = topology_sequence(seg);
    let mut out = String::new();
    for t in &seq {
        out.push_str(&t.to_string());
        out.push('\n');
    }
    let star = seq.iter().any(Topology::is_star);
    out.push_str(&format!("star-crossing: {}\n", if star { "yes" } else { "no" }));
    for (k, w) in seq.windows(2).enumerate() {
        out.push_str(&format!("transition {}: {}\n", k + 1, transition_flag(&w[0], &w[1])));
    }
    out
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| io_failure(path, e))
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let mut emit = |text: &str| out.write_all(text.as_bytes()).map_err(|e| Failure::new(EXIT_INPUT, e.to_string()));
    match command {
        Command::Segment { pair, format, common } => {
            let tol = tolerance(common.tol)?;
            let (t1, t2) = load_pair(&pair, tol)?;
            let seg = tree_segment(&t1, &t2, tol).map_err(space_failure)?;
            let text = match format {
                Format::Csv => segment_csv(&seg, common.precision)?,
                Format::Newick => seg.bends().iter().map(|b| write_newick(&b.tree, common.precision) + "\n").collect(),
                Format::Json => segment_json(&seg, common.precision),
            };
            emit(&text)
        }
        Command::Topologies { pair, common } => {
            let tol = tolerance(common.tol)?;
            let (t1, t2) = load_pair(&pair, tol)?;
            let seg = tree_segment(&t1, &t2, tol).map_err(space_failure)?;
            emit(&topologies_text(&seg))
        }
        Command::Dist { pair, common } => {
            let tol = tolerance(common.tol)?;
            let (t1, t2) = load_pair(&pair, tol)?;
            let u = ultrametric_of(&t1, tol).map_err(|e| tree_failure(&pair.t1, e))?;
            let v = ultrametric_of(&t2, tol).map_err(|e| tree_failure(&pair.t2, e))?;
            let d = match (u.to_point(), v.to_point()) {
                (Ok(a), Ok(b)) => trop_dist(&a, &b).expect("same dimension"),
                // One pair of leaves: a single coordinate, every point equal.
                _ => 0.0,
            };
            emit(&format!("{}\n", format_number(d, common.precision)))
        }
        Command::Validate { path, common } => {
            let tol = tolerance(common.tol)?;
            let tree = load(&path, tol)?;
            let u = ultrametric_of(&tree, tol).map_err(|e| tree_failure(&path, e))?;
            tree_of(&u, tol).map_err(|e| tree_failure(&path, e))?;
            let topo = topology_of(&tree, tol).map_err(|e| tree_failure(&path, e))?;
            emit(&format!(
                "equidistant: {} leaves, height {}, {}\n",
                tree.n_leaves(),
                format_number(tree.height(), common.precision),
                if topo.is_binary() { "binary" } else { "with polytomies" }
            ))
        }
        Command::Simulate { kind, n, samples, height, seed, model, tol, out: path, violations } => {
            let model: PairModel =
                model.parse().map_err(|e: crate::sim::SimError| Failure::new(EXIT_USAGE, e.to_string()))?;
            let mut cfg = SampleConfig::new(n, height, samples, seed).with_model(model);
            cfg.tol = tol;
            cfg.validate().map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
            let report = match kind {
                Experiment::StarProb => estimate_star_probability(&cfg),
                Experiment::NniConjecture => check_nni_conjecture(&cfg),
            }
            .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
            let _ = writeln!(err, "elapsed: {:.3} s", report.elapsed.as_secs_f64());
            let json = report.to_json() + "\n";
            if let Some(p) = violations {
                let csv = report.violations_csv().map_err(|e| Failure::new(EXIT_INPUT, e.to_string()))?;
                write_file(&p, &csv)?;
            }
            match path {
                Some(p) => write_file(&p, &json),
                None => emit(&json),
            }
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            if f.code == EXIT_USAGE {
                let _ = writeln!(err, "run with --help for usage");
            }
            f.code
        }
    }
}
