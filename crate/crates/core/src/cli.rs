//! Command-line front end.
//!
//! Results go to the output stream as JSON, one document per line, with
//! keys in sorted order and floats rounded to 12 significant digits. Logs go
//! to standard error. Exit codes: 0 on success, 1 on usage errors, 2 on
//! data or format errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::bench::{self, BenchmarkSpec, Method, NetworkSource};
use crate::error::Error;
use crate::exact::{optimal_network, EXACT_HARD_CAP};
use crate::global::{dag_to_cpdag, sll_plus_c_with, sll_plus_g_with};
use crate::greedy::{greedy_search_on, EdgeConstraint, GreedyParams};
use crate::io::{read_dataset, read_network, round_json_floats, write_dataset};
use crate::local::{LocalLearner, SllConfig, TargetReport, VisitOrder};
use crate::model::{Dag, Dataset, NodeSubset, Variable};
use crate::scoring::{BdeuParams, Scorer, DEFAULT_MAX_INDEGREE};

#[derive(Debug, Parser)]
#[command(name = "sll", version, about = "Score-based local learning of Bayesian network structure")]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Only log errors.
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Output path; standard output when absent. `bench` takes a directory.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// BDeu equivalent sample size.
    #[arg(long, default_value_t = 1.0)]
    pub ess: f64,
    /// Largest parent set considered.
    #[arg(long, default_value_t = DEFAULT_MAX_INDEGREE)]
    pub max_indegree: usize,
}

#[derive(Debug, Args)]
pub struct LocalArgs {
    /// Largest node set solved exactly before falling back to hill-climbing.
    #[arg(long, default_value_t = crate::exact::DEFAULT_EXACT_LIMIT)]
    pub exact_limit: usize,
    /// Order in which candidate nodes are visited.
    #[arg(long, value_enum, default_value_t = VisitArg::Ascending)]
    pub visit_order: VisitArg,
}

#[derive(Debug, Args)]
pub struct TabuArgs {
    /// Number of recent structures kept in the TABU list.
    #[arg(long, default_value_t = 100)]
    pub tabu: usize,
    /// Non-improving steps tolerated before stopping.
    #[arg(long, default_value_t = 15)]
    pub patience: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VisitArg {
    Ascending,
    Data,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GlobalMethod {
    SllC,
    SllG,
    Greedy,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Total BDeu score of a network's structure on a dataset.
    Score {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        score: ScoreArgs,
        /// Print the parent-set score table of this variable as CSV instead.
        #[arg(long, value_name = "NAME")]
        dump_table: Option<String>,
    },
    /// Highest-scoring DAG by exact search (at most 25 variables).
    LearnExact {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        score: ScoreArgs,
    },
    /// TABU hill-climbing, optionally restricted to a skeleton.
    LearnGreedy {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        score: ScoreArgs,
        #[command(flatten)]
        tabu: TabuArgs,
        /// JSON list of allowed edges as name pairs.
        #[arg(long)]
        skeleton: Option<PathBuf>,
    },
    /// Neighbors, spouses and Markov blanket of one or all variables.
    LearnLocal {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, required_unless_present = "all_targets", conflicts_with = "all_targets")]
        target: Option<String>,
        #[arg(long)]
        all_targets: bool,
        #[command(flatten)]
        score: ScoreArgs,
        #[command(flatten)]
        local: LocalArgs,
    },
    /// Whole-network structure.
    LearnGlobal {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum)]
        method: GlobalMethod,
        #[command(flatten)]
        score: ScoreArgs,
        #[command(flatten)]
        local: LocalArgs,
        #[command(flatten)]
        tabu: TabuArgs,
    },
    /// Forward-sample a dataset from a network.
    Sample {
        #[arg(long)]
        network: PathBuf,
        /// Number of rows.
        #[arg(short)]
        m: usize,
    },
    /// Compare a learned structure with the true network.
    Evaluate {
        #[arg(long)]
        truth: PathBuf,
        /// JSON arc list of name pairs, or any learn-* output with "arcs".
        #[arg(long)]
        learned: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        ess: f64,
    },
    /// Run a benchmark spec, or chart an existing cells CSV with --plot.
    Bench {
        #[arg(long, required_unless_present = "plot", conflicts_with = "plot")]
        spec: Option<PathBuf>,
        /// Cells CSV written by an earlier run.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
}

/// Failure of a CLI run, carrying its exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::Data(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self::Data(e.into())
    }
}

type Outcome<T = ()> = std::result::Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> Outcome<T> {
    Err(Failure::Usage(msg.into()))
}

/// Parses `argv`, runs the command and returns the exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    init_logging(cli.quiet);
    let outcome = match cli.threads {
        Some(0) => usage("--threads must be at least 1"),
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(Failure::Data(Error::Internal(e.to_string()))),
        },
        None => dispatch(&cli),
    };
    match outcome {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn init_logging(quiet: bool) {
    let env = env_logger::Env::new().filter_or("SLL_LOG", "warn");
    let mut builder = env_logger::Builder::from_env(env);
    if quiet {
        builder.filter_level(log::LevelFilter::Error);
    }
    let _ = builder.format_timestamp(None).try_init();
}

fn open_output(cli: &Cli) -> Outcome<Box<dyn Write>> {
    Ok(match &cli.output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit(out: &mut dyn Write, mut value: Value) -> Outcome {
    round_json_floats(&mut value);
    writeln!(out, "{value}")?;
    Ok(())
}

fn threads(cli: &Cli) -> usize {
    cli.threads.unwrap_or_else(rayon::current_num_threads)
}

fn check_ess(ess: f64) -> Outcome<BdeuParams<f64>> {
    BdeuParams::new(ess).or_else(|e| usage(e.to_string()))
}

fn sll_config(score: &ScoreArgs, local: &LocalArgs) -> Outcome<SllConfig<f64>> {
    if local.exact_limit < 3 {
        return usage(format!("--exact-limit must be at least 3, got {}", local.exact_limit));
    }
    Ok(SllConfig {
        scoring: check_ess(score.ess)?,
        max_indegree: score.max_indegree,
        exact_limit: local.exact_limit,
        visit_order: match local.visit_order {
            VisitArg::Ascending => VisitOrder::AscendingIndex,
            VisitArg::Data => VisitOrder::DataOrder,
        },
    })
}

fn greedy_params(cli: &Cli, score: &ScoreArgs, tabu: &TabuArgs) -> GreedyParams {
    GreedyParams {
        tabu_capacity: tabu.tabu,
        patience: tabu.patience,
        max_indegree: score.max_indegree,
        seed: cli.seed,
    }
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn base_config(cli: &Cli, command: &str) -> serde_json::Map<String, Value> {
    let mut c = serde_json::Map::new();
    c.insert("command".into(), json!(command));
    c.insert("seed".into(), json!(cli.seed));
    c.insert("threads".into(), json!(threads(cli)));
    c.insert("quiet".into(), json!(cli.quiet));
    c.insert(
        "output".into(),
        cli.output.as_deref().map_or(json!("-"), |p| json!(path_str(p))),
    );
    c
}

fn resolve(data: &Dataset, name: &str) -> Outcome<usize> {
    match data.index_of(name) {
        Some(i) => Ok(i),
        None => usage(format!("no variable named {name:?} in the data")),
    }
}

fn names(vars: &[Variable], set: &NodeSubset) -> Vec<String> {
    set.iter().map(|v| vars[v].name.clone()).collect()
}

fn arc_names(vars: &[Variable], arcs: &[(usize, usize)]) -> Value {
    json!(arcs
        .iter()
        .map(|&(u, v)| [vars[u].name.clone(), vars[v].name.clone()])
        .collect::<Vec<_>>())
}

fn dispatch(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Score {
            network,
            data,
            score,
            dump_table,
        } => {
            let params = check_ess(score.ess)?;
            let bn = read_network(network)?;
            let ds = read_dataset(data, Some(bn.variables()))?;
            let mut out = open_output(cli)?;
            if let Some(name) = dump_table {
                let v = resolve(&ds, name)?;
                let others: Vec<usize> = (0..ds.n_vars()).filter(|&u| u != v).collect();
                if others.len() >= 64 {
                    return usage("--dump-table supports at most 64 variables");
                }
                let table = crate::scoring::build_score_table(v, &others.iter().copied().collect(), &ds, &params, score.max_indegree)?;
                writeln!(out, "bitmask,score")?;
                for (set, s) in table.entries() {
                    let mask = others
                        .iter()
                        .enumerate()
                        .filter(|(_, &u)| set.contains(u))
                        .fold(0u64, |m, (i, _)| m | 1 << i);
                    writeln!(out, "{mask},{}", crate::io::round_sig12(s))?;
                }
                return Ok(());
            }
            let total = crate::scoring::score_dag(bn.dag(), &ds, &params)?;
            let mut config = base_config(cli, "score");
            config.insert("network".into(), json!(path_str(network)));
            config.insert("data".into(), json!(path_str(data)));
            config.insert("ess".into(), json!(score.ess));
            emit(&mut out, json!({"score": total, "config": config}))
        }
        Command::LearnExact { data, score } => {
            let params = check_ess(score.ess)?;
            let ds = read_dataset(data, None)?;
            if ds.n_vars() > EXACT_HARD_CAP {
                return Err(Failure::Data(Error::Format(format!(
                    "exact search handles at most {EXACT_HARD_CAP} variables, data has {}",
                    ds.n_vars()
                ))));
            }
            let nodes = NodeSubset::full(ds.n_vars());
            let learned = optimal_network(&nodes, &ds, &params, score.max_indegree, EXACT_HARD_CAP)?;
            let total = crate::scoring::score_dag(&learned.dag, &ds, &params)?;
            let mut config = base_config(cli, "learn-exact");
            config.insert("data".into(), json!(path_str(data)));
            config.insert("ess".into(), json!(score.ess));
            config.insert("max_indegree".into(), json!(score.max_indegree));
            let mut out = open_output(cli)?;
            emit(
                &mut out,
                json!({
                    "arcs": arc_names(ds.variables(), &learned.dag.arcs()),
                    "score": total,
                    "config": config,
                }),
            )
        }
        Command::LearnGreedy {
            data,
            score,
            tabu,
            skeleton,
        } => {
            let params = check_ess(score.ess)?;
            let ds = read_dataset(data, None)?;
            let constraint = match skeleton {
                Some(path) => {
                    let pairs = read_name_pairs(path)?;
                    let mut edges = Vec::with_capacity(pairs.len());
                    for (a, b) in pairs {
                        edges.push((resolve_in_file(&ds, &a)?, resolve_in_file(&ds, &b)?));
                    }
                    EdgeConstraint::allowed(edges)
                }
                None => EdgeConstraint::Unconstrained,
            };
            let gp = greedy_params(cli, score, tabu);
            let scorer = Scorer::new(&ds, params);
            let run = greedy_search_on(&scorer, &NodeSubset::full(ds.n_vars()), &gp, &constraint);
            let mut config = base_config(cli, "learn-greedy");
            config.insert("data".into(), json!(path_str(data)));
            config.insert("ess".into(), json!(score.ess));
            config.insert("max_indegree".into(), json!(score.max_indegree));
            config.insert("tabu".into(), json!(tabu.tabu));
            config.insert("patience".into(), json!(tabu.patience));
            config.insert("skeleton".into(), skeleton.as_deref().map_or(Value::Null, |p| json!(path_str(p))));
            let mut out = open_output(cli)?;
            emit(
                &mut out,
                json!({
                    "arcs": arc_names(ds.variables(), &run.dag.arcs()),
                    "score": run.score,
                    "config": config,
                }),
            )
        }
        Command::LearnLocal {
            data,
            target,
            all_targets,
            score,
            local,
        } => {
            let cfg = sll_config(score, local)?;
            let ds = read_dataset(data, None)?;
            let learner = LocalLearner::new(&ds, cfg)?;
            let reports: Vec<TargetReport> = match target {
                Some(name) => vec![learner.markov_blanket(resolve(&ds, name)?)?],
                None => learner.all_blankets()?,
            };
            let mut config = base_config(cli, "learn-local");
            config.insert("data".into(), json!(path_str(data)));
            config.insert("target".into(), target.as_ref().map_or(Value::Null, |t| json!(t)));
            config.insert("all_targets".into(), json!(all_targets));
            config.insert("ess".into(), json!(score.ess));
            config.insert("max_indegree".into(), json!(score.max_indegree));
            config.insert("exact_limit".into(), json!(local.exact_limit));
            config.insert(
                "visit_order".into(),
                json!(match local.visit_order {
                    VisitArg::Ascending => "ascending",
                    VisitArg::Data => "data",
                }),
            );
            let vars = ds.variables();
            let mut out = open_output(cli)?;
            for r in reports {
                emit(
                    &mut out,
                    json!({
                        "target": vars[r.target].name,
                        "neighbors": names(vars, &r.neighbors),
                        "spouses": names(vars, &r.spouses),
                        "blanket": names(vars, &r.blanket()),
                        "inexact": r.inexact,
                        "config": config,
                    }),
                )?;
            }
            Ok(())
        }
        Command::LearnGlobal {
            data,
            method,
            score,
            local,
            tabu,
        } => {
            let cfg = sll_config(score, local)?;
            let ds = read_dataset(data, None)?;
            let learner = LocalLearner::new(&ds, cfg)?;
            let gp = greedy_params(cli, score, tabu);
            let (dag, inexact) = match method {
                GlobalMethod::SllC => {
                    let r = sll_plus_c_with(&learner)?;
                    (r.dag, r.inexact)
                }
                GlobalMethod::SllG => {
                    let r = sll_plus_g_with(&learner, &gp)?;
                    (r.dag, r.inexact)
                }
                GlobalMethod::Greedy => {
                    let nodes = NodeSubset::full(ds.n_vars());
                    let run = greedy_search_on(learner.scorer(), &nodes, &gp, &EdgeConstraint::Unconstrained);
                    (run.dag, false)
                }
            };
            let total = learner.scorer().score_dag(&dag);
            let cpdag = dag_to_cpdag(&dag);
            let vars = ds.variables();
            let mut config = base_config(cli, "learn-global");
            config.insert("data".into(), json!(path_str(data)));
            config.insert(
                "method".into(),
                json!(match method {
                    GlobalMethod::SllC => "sll-c",
                    GlobalMethod::SllG => "sll-g",
                    GlobalMethod::Greedy => "greedy",
                }),
            );
            config.insert("ess".into(), json!(score.ess));
            config.insert("max_indegree".into(), json!(score.max_indegree));
            config.insert("exact_limit".into(), json!(local.exact_limit));
            config.insert("tabu".into(), json!(tabu.tabu));
            config.insert("patience".into(), json!(tabu.patience));
            let mut out = open_output(cli)?;
            emit(
                &mut out,
                json!({
                    "arcs": arc_names(vars, &dag.arcs()),
                    "cpdag": {
                        "directed": arc_names(vars, &cpdag.directed_arcs()),
                        "undirected": arc_names(vars, &cpdag.undirected_edges()),
                    },
                    "score": total,
                    "inexact": inexact,
                    "config": config,
                }),
            )
        }
        Command::Sample { network, m } => {
            let bn = read_network(network)?;
            let ds = bench::forward_sample(&bn, *m, cli.seed);
            let out = open_output(cli)?;
            write_dataset(&ds, out)?;
            Ok(())
        }
        Command::Evaluate {
            truth,
            learned,
            data,
            ess,
        } => {
            let params = check_ess(*ess)?;
            let bn = read_network(truth)?;
            let ds = read_dataset(data, Some(bn.variables()))?;
            let mut arcs = Vec::new();
            for (a, b) in read_name_pairs(learned)? {
                arcs.push((resolve_in_file(&ds, &a)?, resolve_in_file(&ds, &b)?));
            }
            let dag = Dag::from_arcs(bn.n(), arcs)?;
            let cpdag = dag_to_cpdag(&dag);
            let shd = bench::shd(&cpdag, &dag_to_cpdag(bn.dag()))?;
            let normalized = bench::normalized_score(&cpdag, bn.dag(), &ds, &params)?;
            let slhd_nb = bench::slhd(&bench::neighbor_sets(&dag), &bench::neighbor_sets(bn.dag()))?;
            let slhd_mb = bench::slhd(&bench::blanket_sets(&dag), &bench::blanket_sets(bn.dag()))?;
            let mut config = base_config(cli, "evaluate");
            config.insert("truth".into(), json!(path_str(truth)));
            config.insert("learned".into(), json!(path_str(learned)));
            config.insert("data".into(), json!(path_str(data)));
            config.insert("ess".into(), json!(ess));
            let mut out = open_output(cli)?;
            emit(
                &mut out,
                json!({
                    "shd": shd,
                    "normalized_score": normalized,
                    "slhd_neighbors": slhd_nb,
                    "slhd_blankets": slhd_mb,
                    "config": config,
                }),
            )
        }
        Command::Bench { spec, plot } => {
            let Some(dir) = &cli.output else {
                return usage("bench needs --output <directory>");
            };
            std::fs::create_dir_all(dir)?;
            if let Some(cells_path) = plot {
                let cells = bench::read_cells_csv(File::open(cells_path)?)?;
                let aggregates = bench::aggregate(&cells);
                let mut written = Vec::new();
                for (key, svg) in bench::plot_aggregates(&aggregates) {
                    let name = format!("{key}.svg");
                    std::fs::write(dir.join(&name), svg)?;
                    written.push(name);
                }
                let mut config = base_config(cli, "bench");
                config.insert("plot".into(), json!(path_str(cells_path)));
                return emit(&mut io::stdout().lock(), json!({"plots": written, "config": config}));
            }
            let spec_path = spec.as_ref().expect("clap requires --spec without --plot");
            let text = std::fs::read_to_string(spec_path)?;
            let mut spec: BenchmarkSpec = serde_json::from_str(&text).map_err(Error::from)?;
            if let NetworkSource::File { path } = &mut spec.network {
                if path.is_relative() {
                    let base = spec_path.parent().unwrap_or(Path::new("."));
                    *path = base.join(&*path);
                }
            }
            let methods: Vec<Method> = spec.methods.clone();
            let report = bench::run_benchmark(&spec, &methods)?;
            bench::write_cells_csv(&report.cells, BufWriter::new(File::create(dir.join("cells.csv"))?))?;
            bench::write_timings_csv(&report.cells, BufWriter::new(File::create(dir.join("timings.csv"))?))?;
            let mut config = base_config(cli, "bench");
            config.insert("spec".into(), serde_json::to_value(&spec).map_err(Error::from)?);
            let mut summary = json!({
                "aggregates": serde_json::to_value(&report.aggregates).map_err(Error::from)?,
                "config": config,
            });
            round_json_floats(&mut summary);
            std::fs::write(
                dir.join("aggregate.json"),
                serde_json::to_string_pretty(&summary).map_err(Error::from)? + "\n",
            )?;
            emit(&mut io::stdout().lock(), summary)
        }
    }
}

fn resolve_in_file(data: &Dataset, name: &str) -> Outcome<usize> {
    data.index_of(name)
        .ok_or_else(|| Failure::Data(Error::Format(format!("unknown variable {name:?} in edge list"))))
}

/// Name pairs from a JSON array, or from the `"arcs"` field of an object.
fn read_name_pairs(path: &Path) -> Outcome<Vec<(String, String)>> {
    let value: Value = serde_json::from_str(&std::fs::read_to_string(path)?).map_err(Error::from)?;
    let list = match &value {
        Value::Object(map) => map.get("arcs").cloned().unwrap_or(Value::Null),
        other => other.clone(),
    };
    let pairs: Vec<[String; 2]> = serde_json::from_value(list).map_err(|e| {
        Failure::Data(Error::Format(format!(
            "{}: expected a list of [name, name] pairs: {e}",
            path.display()
        )))
    })?;
    Ok(pairs.into_iter().map(|[a, b]| (a, b)).collect())
}
