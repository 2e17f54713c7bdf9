//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any fails.

mod common;

use std::collections::HashMap;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::Rng;
use sll::bench::fixtures::{identifiable_network, pathology_network, PATHOLOGY_FALSE_NEIGHBOR};
use sll::bench::{
    forward_sample, normalized_score, random_dag, run_benchmark, shd, BenchmarkSpec,
    Method, NetworkSource,
};
use sll::exact::optimal_network;
use sll::global::{dag_to_cpdag, sll_plus_c};
use sll::local::{LocalLearner, SllConfig};
use sll::model::{d_separated, NodeSubset};
use sll::scoring::{score_dag, BdeuParams};

type Check = (bool, String);

fn params() -> BdeuParams<f64> {
    BdeuParams::default()
}

fn cfg() -> SllConfig<f64> {
    SllConfig::default()
}

fn rate(hits: usize, total: usize) -> f64 {
    hits as f64 / total as f64
}

fn exact_optimality() -> Check {
    let start = Instant::now();
    let dags = common::all_dags(4);
    let mut worst: f64 = 0.0;
    for seed in 0..50 {
        let bn = random_dag(4, 3, (2, 2), 1000 + seed).unwrap();
        let data = forward_sample(&bn, 200, 2000 + seed);
        let brute = dags
            .iter()
            .map(|d| common::naive_bdeu(d, &data, 1.0))
            .fold(f64::NEG_INFINITY, f64::max);
        let found = optimal_network(&NodeSubset::full(4), &data, &params(), 5, 20).unwrap();
        assert!(!found.inexact);
        worst = worst.max((score_dag(&found.dag, &data, &params()).unwrap() - brute).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    (
        dags.len() == 543 && worst <= 1e-9 && secs < 10.0,
        format!("{} DAGs, max |exact - brute force| = {worst:.2e}, {secs:.2}s", dags.len()),
    )
}

fn score_equivalence() -> Check {
    let start = Instant::now();
    let dags = common::all_dags(3);
    let mut classes: HashMap<_, Vec<_>> = HashMap::new();
    for d in &dags {
        classes.entry(common::class_key(d)).or_default().push(d.clone());
    }
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let bn = random_dag(3, 2, (2, 3), 3000 + seed).unwrap();
        let data = forward_sample(&bn, 300, 4000 + seed);
        for members in classes.values() {
            let scores: Vec<f64> = members.iter().map(|d| score_dag(d, &data, &params()).unwrap()).collect();
            let lo = scores.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            worst = worst.max(hi - lo);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    (
        dags.len() == 25 && worst <= 1e-9 && secs < 5.0,
        format!("{} classes, max in-class spread {worst:.2e}, {secs:.2}s", classes.len()),
    )
}

fn dsep_oracle() -> Check {
    let start = Instant::now();
    let mut triples = 0;
    let mut mismatches = 0;
    for seed in 0..100 {
        let bn = random_dag(5, 3, (2, 3), 5000 + seed).unwrap();
        let joint = common::joint_table(&bn);
        for u in 0..5 {
            for v in u + 1..5 {
                let rest: Vec<usize> = (0..5).filter(|&x| x != u && x != v).collect();
                let mut zs: Vec<Vec<usize>> = vec![vec![]];
                for (i, &a) in rest.iter().enumerate() {
                    zs.push(vec![a]);
                    for &b in &rest[i + 1..] {
                        zs.push(vec![a, b]);
                    }
                }
                for z in zs {
                    triples += 1;
                    let graph = d_separated(bn.dag(), u, v, &z.iter().copied().collect()).unwrap();
                    let numeric = common::conditionally_independent(&joint, u, v, &z, 1e-9);
                    if graph != numeric {
                        mismatches += 1;
                    }
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    (
        mismatches == 0 && secs < 60.0,
        format!("{triples} triples, {mismatches} disagreements, {secs:.2}s"),
    )
}

/// Per-target outcomes on the n = 10 fixtures shared by criteria 4 to 6.
struct LocalStats {
    pairs: usize,
    pn_contains: usize,
    nb_exact: usize,
    ps_no_false: usize,
    ps_contains: usize,
    sp_exact: usize,
    secs: f64,
}

fn local_stats() -> LocalStats {
    let start = Instant::now();
    let mut s = LocalStats {
        pairs: 0,
        pn_contains: 0,
        nb_exact: 0,
        ps_no_false: 0,
        ps_contains: 0,
        sp_exact: 0,
        secs: 0.0,
    };
    for seed in 0..10 {
        let bn = random_dag(10, 3, (2, 3), 6000 + seed).unwrap();
        let data = forward_sample(&bn, 50_000, 7000 + seed);
        let learner = LocalLearner::new(&data, cfg()).unwrap();
        let dag = bn.dag();
        for t in 0..10 {
            let nb = dag.neighbors(t).unwrap();
            let sp = dag.spouses(t).unwrap();
            s.pairs += 1;
            s.pn_contains += usize::from(nb.is_subset(&learner.potential_neighbors(t).unwrap().set));
            s.nb_exact += usize::from(learner.find_neighbors(t).unwrap().set == nb);
            let ps = learner.potential_spouses(t).unwrap().spouses;
            s.ps_no_false += usize::from(ps.is_subset(&sp));
            s.ps_contains += usize::from(sp.is_subset(&ps));
            s.sp_exact += usize::from(learner.find_spouses(t).unwrap().set == sp);
        }
    }
    s.secs = start.elapsed().as_secs_f64();
    s
}

fn lemma3(s: &LocalStats) -> Check {
    let r = rate(s.pn_contains, s.pairs);
    (
        r >= 0.95 && s.secs < 600.0,
        format!("true neighbors inside potential neighbors for {}/{} pairs ({r:.2}), {:.1}s", s.pn_contains, s.pairs, s.secs),
    )
}

fn symmetry_correction(s: &LocalStats) -> Check {
    let r = rate(s.nb_exact, s.pairs);
    let [t, _, _, _, v] = PATHOLOGY_FALSE_NEIGHBOR;
    let mut removed = 0;
    for seed in 0..20 {
        let bn = pathology_network(PATHOLOGY_FALSE_NEIGHBOR, seed);
        let data = forward_sample(&bn, 50_000, 8000 + seed);
        let learner = LocalLearner::new(&data, cfg()).unwrap();
        let pn = learner.potential_neighbors(t).unwrap().set;
        let nb = learner.find_neighbors(t).unwrap().set;
        if pn.contains(v) && !nb.contains(v) {
            removed += 1;
        }
    }
    (
        r >= 0.90 && removed >= 18,
        format!(
            "neighbors exact for {}/{} pairs ({r:.2}); pathology false positive found and removed in {removed}/20 seeds",
            s.nb_exact, s.pairs
        ),
    )
}

fn spouse_recovery(s: &LocalStats) -> Check {
    let clean = rate(s.ps_no_false, s.pairs);
    let exact = rate(s.sp_exact, s.pairs);
    (
        clean >= 0.90 && exact >= 0.85,
        format!(
            "no non-spouse among potential spouses for {}/{} pairs ({clean:.2}); spouses exact for {}/{} ({exact:.2}); true spouses inside potential spouses for {}/{}",
            s.ps_no_false, s.pairs, s.sp_exact, s.pairs, s.ps_contains, s.pairs
        ),
    )
}

fn random15_spec(sizes: Vec<usize>) -> BenchmarkSpec {
    BenchmarkSpec {
        sample_sizes: sizes,
        replicates: 10,
        seed: 15,
        ..BenchmarkSpec::new(NetworkSource::Random {
            n: 15,
            max_indegree: 3,
            arity: [2, 3],
        })
    }
}

fn slhd_trend() -> Check {
    let start = Instant::now();
    let report = run_benchmark(&random15_spec(vec![500, 5000]), &[Method::SllLocal]).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let agg = |m: usize| report.aggregates.iter().find(|a| a.m == m).unwrap();
    let (lo, hi) = (agg(500), agg(5000));
    let nb = (lo.slhd_neighbors.unwrap().mean, hi.slhd_neighbors.unwrap().mean);
    let mb = (lo.slhd_blankets.unwrap().mean, hi.slhd_blankets.unwrap().mean);
    (
        nb.1 < nb.0 && mb.1 < mb.0 && secs < 1800.0,
        format!(
            "mean SLHD neighbors {:.2} -> {:.2}, blankets {:.2} -> {:.2} (m = 500 -> 5000), {secs:.1}s",
            nb.0, nb.1, mb.0, mb.1
        ),
    )
}

fn normalized_score_anchor() -> Check {
    let mut worst: f64 = 0.0;
    let mut fixtures = 0;
    for seed in 0..10u64 {
        for (n, k) in [(4, 3), (8, 3), (15, 3)] {
            let bn = random_dag(n, k, (2, 3), 9000 + seed * 31 + n as u64).unwrap();
            let data = forward_sample(&bn, 2000, seed);
            let v = normalized_score(&dag_to_cpdag(bn.dag()), bn.dag(), &data, &params()).unwrap();
            worst = worst.max((v - 1.0).abs());
            fixtures += 1;
        }
    }
    let report = run_benchmark(&random15_spec(vec![5000]), &[Method::SllG]).unwrap();
    let scores: Vec<f64> = report.cells.iter().map(|c| c.normalized_score.unwrap()).collect();
    let good = scores.iter().filter(|&&x| x <= 1.10).count();
    (
        worst <= 1e-9 && rate(good, scores.len()) >= 0.80,
        format!(
            "true CPDAG max |score - 1| = {worst:.2e} over {fixtures} fixtures; SLL+G <= 1.10 in {good}/{} replicates (max {:.4})",
            scores.len(),
            scores.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        ),
    )
}

fn shd_anchor() -> Check {
    let mut zero = 0;
    for seed in 0..20 {
        let bn = identifiable_network(seed);
        let data = forward_sample(&bn, 50_000, 10_000 + seed);
        let learned = sll_plus_c(&data, &cfg()).unwrap();
        if shd(&dag_to_cpdag(&learned.dag), &dag_to_cpdag(bn.dag())).unwrap() == 0 {
            zero += 1;
        }
    }
    let mut rng = common::rng(99);
    let mut axioms = true;
    for _ in 0..1000 {
        let n = rng.random_range(2..8);
        let a = common::random_pdag(&mut rng, n, 0.5);
        let b = common::random_pdag(&mut rng, n, 0.5);
        axioms &= shd(&a, &a).unwrap() == 0;
        axioms &= shd(&a, &b).unwrap() == shd(&b, &a).unwrap();
        axioms &= (shd(&a, &b).unwrap() == 0) == (a == b);
    }
    (
        zero >= 16 && axioms,
        format!("SLL+C SHD = 0 in {zero}/20 seeds; SHD identity and symmetry hold on 1000 pairs: {axioms}"),
    )
}

fn cpdag_correctness() -> Check {
    let start = Instant::now();
    let dags = common::all_dags(4);
    let cpdags: Vec<_> = dags.iter().map(dag_to_cpdag).collect();
    let keys: Vec<_> = dags.iter().map(common::class_key).collect();
    let mut wrong = 0;
    for i in 0..dags.len() {
        for j in 0..dags.len() {
            if (cpdags[i] == cpdags[j]) != (keys[i] == keys[j]) {
                wrong += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    (
        wrong == 0 && secs < 5.0,
        format!("{} DAG pairs, {wrong} disagreements, {secs:.2}s", dags.len() * dags.len()),
    )
}

fn cache_consistency() -> Check {
    let mut identical = 0;
    for seed in 0..3 {
        let bn = random_dag(8, 3, (2, 3), 11_000 + seed).unwrap();
        let data = forward_sample(&bn, 5000, 12_000 + seed);
        let shared = LocalLearner::new(&data, cfg()).unwrap().all_blankets().unwrap();
        let separate: Vec<_> = (0..8)
            .map(|t| LocalLearner::new(&data, cfg()).unwrap().markov_blanket(t).unwrap())
            .collect();
        if shared == separate {
            identical += 1;
        }
    }
    (identical == 3, format!("{identical}/3 fixtures identical"))
}

fn run_cli(args: &[&str], dir: &Path) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_sll"))
        .args(args)
        .current_dir(dir)
        .env("SLL_LOG", "error")
        .output()
        .expect("binary runs");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn cli_determinism() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let bn = random_dag(6, 2, (2, 3), 13).unwrap();
    sll::io::write_network(&bn, &d.join("net.json")).unwrap();
    std::fs::write(d.join("learned.json"), r#"[["X0","X1"],["X2","X3"]]"#).unwrap();
    std::fs::write(
        d.join("spec.json"),
        r#"{"network":{"kind":"file","path":"net.json"},"sample_sizes":[200,400],"replicates":2,"seed":5,"methods":["sll-local","sll-c","sll-g","greedy","exact"]}"#,
    )
    .unwrap();
    let first = run_cli(&["sample", "--network", "net.json", "-m", "1500", "--seed", "3", "-o", "data.csv"], d);
    let commands: Vec<Vec<&str>> = vec![
        vec!["sample", "--network", "net.json", "-m", "300", "--seed", "3"],
        vec!["score", "--network", "net.json", "--data", "data.csv"],
        vec!["score", "--network", "net.json", "--data", "data.csv", "--dump-table", "X1"],
        vec!["learn-exact", "--data", "data.csv"],
        vec!["learn-greedy", "--data", "data.csv"],
        vec!["learn-local", "--data", "data.csv", "--target", "X0"],
        vec!["learn-local", "--data", "data.csv", "--all-targets"],
        vec!["learn-global", "--data", "data.csv", "--method", "sll-c"],
        vec!["learn-global", "--data", "data.csv", "--method", "sll-g"],
        vec!["learn-global", "--data", "data.csv", "--method", "greedy"],
        vec!["evaluate", "--truth", "net.json", "--learned", "learned.json", "--data", "data.csv"],
        vec!["bench", "--spec", "spec.json", "-o", "report"],
        vec!["bench", "--plot", "report/cells.csv", "-o", "plots"],
    ];
    let mut failures = Vec::new();
    if first.0 != 0 {
        failures.push("sample -o".to_string());
    }
    for args in &commands {
        let a = run_cli(args, d);
        let files_a = snapshot(d);
        let b = run_cli(args, d);
        let files_b = snapshot(d);
        if a.0 != 0 || a != b || files_a != files_b {
            failures.push(args[..2].join(" "));
        }
    }
    (
        failures.is_empty(),
        format!("{} invocations repeated; differing: {failures:?}", commands.len()),
    )
}

/// Contents of every regular file under `dir` except wall-time logs.
fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(p) = stack.pop() {
        for entry in std::fs::read_dir(&p).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if path.file_name().is_some_and(|n| n != "timings.csv") {
                out.push((path.display().to_string(), std::fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn main() {
    let mut results: Vec<(usize, &str, Check)> = Vec::new();
    let mut record = |id: usize, name: &'static str, check: Check| {
        let (pass, detail) = &check;
        println!("[{}] {id:>2} {name}: {detail}", if *pass { "PASS" } else { "FAIL" });
        results.push((id, name, check));
    };
    record(1, "exact-search optimality", exact_optimality());
    record(2, "score equivalence", score_equivalence());
    record(3, "d-separation oracle", dsep_oracle());
    let stats = local_stats();
    record(4, "potential-neighbor containment", lemma3(&stats));
    record(5, "symmetry correction", symmetry_correction(&stats));
    record(6, "spouse recovery", spouse_recovery(&stats));
    record(7, "SLHD trend", slhd_trend());
    record(8, "normalized score anchor", normalized_score_anchor());
    record(9, "SHD anchor", shd_anchor());
    record(10, "CPDAG correctness", cpdag_correctness());
    record(11, "cache consistency", cache_consistency());
    record(12, "CLI determinism", cli_determinism());
    let failed = results.iter().filter(|r| !r.2 .0).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
