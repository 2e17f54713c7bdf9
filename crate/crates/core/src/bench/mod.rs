//! Ground-truth sampling, evaluation metrics and the benchmark driver.

pub mod fixtures;
mod metrics;
pub mod plot;
mod sample;

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{optimal_network_with, EXACT_HARD_CAP};
use crate::global::{dag_to_cpdag, sll_plus_c_with, sll_plus_g_with};
use crate::greedy::{greedy_search_on, EdgeConstraint, GreedyParams};
use crate::local::{LocalLearner, SllConfig, VisitOrder};
use crate::model::{BayesianNetwork, Dag, Dataset, NodeSubset};
use crate::scoring::BdeuParams;

pub use metrics::{blanket_sets, neighbor_sets, normalized_score, shd, slhd};
pub use sample::{forward_sample, margin_cpt, random_cpts, random_dag, FAITHFULNESS_MARGIN};

/// Learners the benchmark can run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    SllLocal,
    SllC,
    SllG,
    Greedy,
    Exact,
}

impl Method {
    pub const ALL: [Method; 5] = [Self::SllLocal, Self::SllC, Self::SllG, Self::Greedy, Self::Exact];

    pub fn name(self) -> &'static str {
        match self {
            Self::SllLocal => "sll-local",
            Self::SllC => "sll-c",
            Self::SllG => "sll-g",
            Self::Greedy => "greedy",
            Self::Exact => "exact",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where the true network comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NetworkSource {
    /// A network JSON file.
    File { path: PathBuf },
    /// A fresh [`random_dag`] per replicate.
    Random {
        n: usize,
        max_indegree: usize,
        arity: [usize; 2],
    },
    /// A network supplied in-process.
    #[serde(skip)]
    Fixed(BayesianNetwork),
}

fn default_sample_sizes() -> Vec<usize> {
    vec![500, 1000, 5000]
}

fn default_replicates() -> usize {
    10
}

fn default_methods() -> Vec<Method> {
    vec![Method::SllLocal, Method::SllC, Method::SllG]
}

fn default_ess() -> f64 {
    1.0
}

fn default_max_indegree() -> usize {
    crate::scoring::DEFAULT_MAX_INDEGREE
}

fn default_exact_limit() -> usize {
    crate::exact::DEFAULT_EXACT_LIMIT
}

fn default_tabu() -> usize {
    GreedyParams::default().tabu_capacity
}

fn default_patience() -> usize {
    GreedyParams::default().patience
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkSpec {
    pub network: NetworkSource,
    #[serde(default = "default_sample_sizes")]
    pub sample_sizes: Vec<usize>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_ess")]
    pub ess: f64,
    #[serde(default = "default_max_indegree")]
    pub max_indegree: usize,
    #[serde(default = "default_exact_limit")]
    pub exact_limit: usize,
    #[serde(default = "default_tabu")]
    pub tabu: usize,
    #[serde(default = "default_patience")]
    pub patience: usize,
}

impl BenchmarkSpec {
    /// A spec with every tunable at its default.
    pub fn new(network: NetworkSource) -> Self {
        Self {
            network,
            sample_sizes: default_sample_sizes(),
            replicates: default_replicates(),
            seed: 0,
            methods: default_methods(),
            ess: default_ess(),
            max_indegree: default_max_indegree(),
            exact_limit: default_exact_limit(),
            tabu: default_tabu(),
            patience: default_patience(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.sample_sizes.is_empty() || self.sample_sizes.contains(&0) {
            return bad("sample sizes must be a nonempty list of positive integers".into());
        }
        if self.replicates == 0 {
            return bad("replicates must be at least 1".into());
        }
        if !(self.ess > 0.0 && self.ess.is_finite()) {
            return bad(format!("ess must be positive, got {}", self.ess));
        }
        if self.exact_limit < 3 {
            return bad(format!("exact limit must be at least 3, got {}", self.exact_limit));
        }
        if let NetworkSource::Random { n, arity, .. } = &self.network {
            if *n == 0 || arity[0] < 2 || arity[1] < arity[0] {
                return bad(format!("random network needs n >= 1 and 2 <= lo <= hi, got n={n} arity={arity:?}"));
            }
        }
        Ok(())
    }

    fn sll_config(&self) -> SllConfig<f64> {
        SllConfig {
            scoring: BdeuParams::new(self.ess).expect("validated ess"),
            max_indegree: self.max_indegree,
            exact_limit: self.exact_limit,
            visit_order: VisitOrder::AscendingIndex,
        }
    }

    fn greedy_params(&self) -> GreedyParams {
        GreedyParams {
            tabu_capacity: self.tabu,
            patience: self.patience,
            max_indegree: self.max_indegree,
            seed: self.seed,
        }
    }
}

/// Mixes `parts` into `base` with the splitmix64 finalizer.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(base, |acc, &p| {
        let mut z = acc ^ p.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    })
}

/// Metrics of one method on one dataset. Metrics a method cannot produce
/// are left empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub method: Method,
    pub m: usize,
    pub replicate: usize,
    pub slhd_neighbors: Option<usize>,
    pub slhd_blankets: Option<usize>,
    pub shd: Option<usize>,
    pub normalized_score: Option<f64>,
    pub inexact: bool,
    /// Seconds spent learning, excluding sampling and scoring of the truth.
    #[serde(skip)]
    pub wall_time: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation; zero for a single value.
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let k = values.len() as f64;
        let mean = values.iter().sum::<f64>() / k;
        let std = if values.len() > 1 {
            (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(Self { mean, std })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub method: Method,
    pub m: usize,
    pub cells: usize,
    pub slhd_neighbors: Option<Stat>,
    pub slhd_blankets: Option<Stat>,
    pub shd: Option<Stat>,
    pub normalized_score: Option<Stat>,
    pub inexact_cells: usize,
    #[serde(skip)]
    pub wall_time: Option<Stat>,
}

/// Per-cell results ordered by method, sample size and replicate, with
/// their aggregates.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricReport {
    pub cells: Vec<Cell>,
    pub aggregates: Vec<Aggregate>,
}

/// Mean and standard deviation per `(method, m)`.
pub fn aggregate(cells: &[Cell]) -> Vec<Aggregate> {
    let mut groups: BTreeMap<(Method, usize), Vec<&Cell>> = BTreeMap::new();
    for c in cells {
        groups.entry((c.method, c.m)).or_default().push(c);
    }
    groups
        .into_iter()
        .map(|((method, m), group)| {
            let stat = |f: &dyn Fn(&Cell) -> Option<f64>| {
                let values: Vec<f64> = group.iter().filter_map(|c| f(c)).collect();
                Stat::of(&values)
            };
            Aggregate {
                method,
                m,
                cells: group.len(),
                slhd_neighbors: stat(&|c| c.slhd_neighbors.map(|x| x as f64)),
                slhd_blankets: stat(&|c| c.slhd_blankets.map(|x| x as f64)),
                shd: stat(&|c| c.shd.map(|x| x as f64)),
                normalized_score: stat(&|c| c.normalized_score),
                inexact_cells: group.iter().filter(|c| c.inexact).count(),
                wall_time: stat(&|c| Some(c.wall_time)),
            }
        })
        .collect()
}

/// Runs one learner against the truth on one dataset.
fn run_cell(
    method: Method,
    spec: &BenchmarkSpec,
    truth: &BayesianNetwork,
    data: &Dataset,
    m: usize,
    replicate: usize,
) -> Result<Cell> {
    let cfg = spec.sll_config();
    let start = Instant::now();
    let learner = LocalLearner::new(data, cfg)?;
    let mut cell = Cell {
        method,
        m,
        replicate,
        slhd_neighbors: None,
        slhd_blankets: None,
        shd: None,
        normalized_score: None,
        inexact: false,
        wall_time: 0.0,
    };
    let learned: Dag = match method {
        Method::SllLocal => {
            let reports = learner.all_blankets()?;
            cell.wall_time = start.elapsed().as_secs_f64();
            let nb: Vec<NodeSubset> = reports.iter().map(|r| r.neighbors.clone()).collect();
            let mb: Vec<NodeSubset> = reports.iter().map(|r| r.blanket()).collect();
            cell.slhd_neighbors = Some(slhd(&nb, &neighbor_sets(truth.dag()))?);
            cell.slhd_blankets = Some(slhd(&mb, &blanket_sets(truth.dag()))?);
            cell.inexact = reports.iter().any(|r| r.inexact);
            return Ok(cell);
        }
        Method::SllC => {
            let out = sll_plus_c_with(&learner)?;
            cell.inexact = out.inexact;
            out.dag
        }
        Method::SllG => {
            let out = sll_plus_g_with(&learner, &spec.greedy_params())?;
            cell.inexact = out.inexact;
            out.dag
        }
        Method::Greedy => {
            let nodes = NodeSubset::full(data.n_vars());
            greedy_search_on(learner.scorer(), &nodes, &spec.greedy_params(), &EdgeConstraint::Unconstrained).dag
        }
        Method::Exact => {
            let nodes = NodeSubset::full(data.n_vars());
            optimal_network_with(learner.scorer(), &nodes, spec.max_indegree, spec.exact_limit)?.dag
        }
    };
    cell.wall_time = start.elapsed().as_secs_f64();
    cell.slhd_neighbors = Some(slhd(&neighbor_sets(&learned), &neighbor_sets(truth.dag()))?);
    cell.slhd_blankets = Some(slhd(&blanket_sets(&learned), &blanket_sets(truth.dag()))?);
    let cpdag = dag_to_cpdag(&learned);
    cell.shd = Some(shd(&cpdag, &dag_to_cpdag(truth.dag()))?);
    cell.normalized_score = Some(normalized_score(&cpdag, truth.dag(), data, &spec.sll_config().scoring)?);
    Ok(cell)
}

/// Samples every `(m, replicate)` dataset, runs each method on it and
/// scores the results. Cells run in parallel and are merged in a fixed
/// order, so the report depends only on the spec.
pub fn run_benchmark(spec: &BenchmarkSpec, methods: &[Method]) -> Result<MetricReport> {
    spec.validate()?;
    if methods.is_empty() {
        return Err(Error::Config("no methods to run".into()));
    }
    let fixed = match &spec.network {
        NetworkSource::File { path } => Some(crate::io::read_network(path)?),
        NetworkSource::Fixed(bn) => Some(bn.clone()),
        NetworkSource::Random { .. } => None,
    };
    let network_for = |r: usize| -> Result<BayesianNetwork> {
        match (&fixed, &spec.network) {
            (Some(bn), _) => Ok(bn.clone()),
            (None, NetworkSource::Random { n, max_indegree, arity }) => {
                random_dag(*n, *max_indegree, (arity[0], arity[1]), derive_seed(spec.seed, &[1, r as u64]))
            }
            _ => unreachable!("file and fixed sources are loaded above"),
        }
    };
    let n = match (&fixed, &spec.network) {
        (Some(bn), _) => bn.n(),
        (None, NetworkSource::Random { n, .. }) => *n,
        _ => unreachable!(),
    };
    if methods.contains(&Method::Exact) && n > spec.exact_limit.min(EXACT_HARD_CAP) {
        return Err(Error::Config(format!(
            "exact method needs n <= {}, network has {n} nodes",
            spec.exact_limit.min(EXACT_HARD_CAP)
        )));
    }

    let jobs: Vec<(usize, usize)> = (0..spec.replicates)
        .flat_map(|r| spec.sample_sizes.iter().map(move |&m| (r, m)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(r, m)| -> Result<Vec<Cell>> {
            let truth = network_for(r)?;
            let data = forward_sample(&truth, m, derive_seed(spec.seed, &[2, r as u64, m as u64]));
            methods.iter().map(|&method| run_cell(method, spec, &truth, &data, m, r)).collect()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut cells: Vec<Cell> = results.into_iter().flatten().collect();
    cells.sort_by_key(|c| (c.method, c.m, c.replicate));
    let aggregates = aggregate(&cells);
    Ok(MetricReport { cells, aggregates })
}

/// Per-cell metrics as CSV, wall times excluded.
pub fn write_cells_csv(cells: &[Cell], writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for c in cells {
        let mut c = c.clone();
        c.normalized_score = c.normalized_score.map(crate::io::round_sig12);
        w.serialize(&c)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_cells_csv(reader: impl std::io::Read) -> Result<Vec<Cell>> {
    let mut r = csv::Reader::from_reader(reader);
    r.deserialize()
        .map(|row| row.map_err(|e| Error::Format(format!("benchmark cells: {e}"))))
        .collect()
}

/// Per-cell wall times as CSV.
pub fn write_timings_csv(cells: &[Cell], writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["method", "m", "replicate", "wall_time_s"])?;
    for c in cells {
        w.write_record([
            c.method.name().to_string(),
            c.m.to_string(),
            c.replicate.to_string(),
            format!("{:.6}", c.wall_time),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Metrics that can be charted, with their axis labels.
pub const PLOTTED_METRICS: [(&str, &str); 4] = [
    ("slhd_neighbors", "SLHD (neighbors)"),
    ("slhd_blankets", "SLHD (Markov blankets)"),
    ("shd", "SHD"),
    ("normalized_score", "normalized score"),
];

/// One chart per metric that at least one method reports, keyed by metric.
pub fn plot_aggregates(aggregates: &[Aggregate]) -> Vec<(&'static str, String)> {
    let pick = |a: &Aggregate, key: &str| match key {
        "slhd_neighbors" => a.slhd_neighbors,
        "slhd_blankets" => a.slhd_blankets,
        "shd" => a.shd,
        _ => a.normalized_score,
    };
    PLOTTED_METRICS
        .iter()
        .filter_map(|&(key, label)| {
            let mut series: BTreeMap<Method, plot::Series> = BTreeMap::new();
            for a in aggregates {
                if let Some(s) = pick(a, key) {
                    series
                        .entry(a.method)
                        .or_insert_with(|| plot::Series {
                            label: a.method.name().into(),
                            points: Vec::new(),
                        })
                        .points
                        .push((a.m, s.mean, s.std));
                }
            }
            if series.is_empty() {
                return None;
            }
            let series: Vec<plot::Series> = series.into_values().collect();
            Some((key, plot::line_chart(label, label, &series)))
        })
        .collect()
}
