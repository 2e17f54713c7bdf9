mod common;

use std::collections::BTreeSet;

use rand::Rng;
use sll::bench::fixtures::identifiable_network;
use sll::bench::{
    aggregate, blanket_sets, forward_sample, neighbor_sets, normalized_score, random_dag, run_benchmark, shd, slhd,
    BenchmarkSpec, Method, NetworkSource,
};
use sll::global::dag_to_cpdag;
use sll::model::{BayesianNetwork, Dag, NodeSubset, Pdag, Variable};
use sll::scoring::BdeuParams;

#[test]
fn fair_coin_frequency_is_concentrated() {
    let bn = BayesianNetwork::new(vec![Variable::new("A", 2)], Dag::new(1), vec![vec![vec![0.5, 0.5]]]).unwrap();
    let m = 10_000;
    for seed in 0..5 {
        let data = forward_sample(&bn, m, seed);
        let freq = data.column(0).iter().filter(|&&x| x == 1).count() as f64 / m as f64;
        assert!((freq - 0.5).abs() <= 3.0 * (0.25 / m as f64).sqrt());
    }
    let a = forward_sample(&bn, 200, 1);
    assert_eq!(a, forward_sample(&bn, 200, 1));
    assert_ne!(a, forward_sample(&bn, 200, 2));
}

#[test]
fn forced_cpts_give_constant_rows() {
    let dag = Dag::from_arcs(2, [(0, 1)]).unwrap();
    let vars = vec![Variable::new("A", 2), Variable::new("B", 3)];
    let cpts = vec![vec![vec![0.0, 1.0]], vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]]];
    let data = forward_sample(&BayesianNetwork::new(vars, dag, cpts).unwrap(), 50, 0);
    assert!(data.column(0).iter().all(|&x| x == 1));
    assert!(data.column(1).iter().all(|&x| x == 2));
}

fn random_sets(rng: &mut impl Rng, n: usize) -> Vec<NodeSubset> {
    (0..n).map(|_| (0..n).filter(|_| rng.random_bool(0.3)).collect()).collect()
}

#[test]
fn slhd_matches_set_differences_and_is_a_metric() {
    let mut r = common::rng(41);
    for _ in 0..200 {
        let n = r.random_range(1..10);
        let (a, b, c) = (random_sets(&mut r, n), random_sets(&mut r, n), random_sets(&mut r, n));
        let brute: usize = a
            .iter()
            .zip(&b)
            .map(|(x, y)| {
                let x: BTreeSet<usize> = x.iter().collect();
                let y: BTreeSet<usize> = y.iter().collect();
                x.symmetric_difference(&y).count()
            })
            .sum();
        let ab = slhd(&a, &b).unwrap();
        assert_eq!(ab, brute);
        assert_eq!(ab, slhd(&b, &a).unwrap());
        assert_eq!(slhd(&a, &a).unwrap(), 0);
        assert!(slhd(&a, &c).unwrap() <= ab + slhd(&b, &c).unwrap());
    }
    assert!(slhd(&[NodeSubset::new()], &[]).is_err());
    let one = |v: usize| vec![NodeSubset::singleton(v)];
    assert_eq!(slhd(&one(0), &one(1)).unwrap(), 2);
}

#[test]
fn shd_is_a_metric_and_counts_types() {
    let mut r = common::rng(42);
    for _ in 0..300 {
        let n = r.random_range(2..7);
        let a = common::random_pdag(&mut r, n, 0.5);
        let b = common::random_pdag(&mut r, n, 0.5);
        let c = common::random_pdag(&mut r, n, 0.5);
        let ab = shd(&a, &b).unwrap();
        assert_eq!(shd(&a, &a).unwrap(), 0);
        assert_eq!(ab, shd(&b, &a).unwrap());
        assert!(shd(&a, &c).unwrap() <= ab + shd(&b, &c).unwrap());
    }
    let d = Pdag::from_edges(2, [(0, 1)], []).unwrap();
    let u = Pdag::from_edges(2, [], [(0, 1)]).unwrap();
    let rev = Pdag::from_edges(2, [(1, 0)], []).unwrap();
    assert_eq!(shd(&d, &u).unwrap(), 1);
    assert_eq!(shd(&d, &rev).unwrap(), 1);
    assert!(shd(&d, &Pdag::new(3)).is_err());
    // extend then reconvert changes nothing
    for _ in 0..100 {
        let g = common::random_graph(&mut r, 6, 0.4);
        let c = dag_to_cpdag(&g);
        let ext = sll::global::pdag_extend_to_dag(&c).unwrap().dag;
        assert_eq!(shd(&c, &dag_to_cpdag(&ext)).unwrap(), 0);
    }
}

#[test]
fn normalized_score_examples() {
    let p = BdeuParams::<f64>::default();
    for seed in 0..5 {
        let bn = identifiable_network(seed);
        let data = forward_sample(&bn, 5000, seed);
        let truth = bn.dag();
        let one = normalized_score(&dag_to_cpdag(truth), truth, &data, &p).unwrap();
        assert!((one - 1.0).abs() < 1e-9);
        assert!(normalized_score(&Pdag::new(6), truth, &data, &p).unwrap() > 1.0);
        // adding true arcs one at a time never raises the ratio
        let mut learned = Dag::new(6);
        let mut last = normalized_score(&Pdag::from_dag(&learned), truth, &data, &p).unwrap();
        for (u, v) in truth.arcs() {
            learned.add_arc(u, v).unwrap();
            let next = normalized_score(&Pdag::from_dag(&learned), truth, &data, &p).unwrap();
            assert!(next <= last + 1e-12);
            last = next;
        }
    }
    let empty = sll::model::Dataset::from_columns(vec![vec![]]).unwrap();
    assert!(normalized_score(&Pdag::new(1), &Dag::new(1), &empty, &p).is_err());
}

#[test]
fn exact_method_recovers_four_node_classes() {
    let mut hits = 0;
    for seed in 0..20 {
        let mut spec = BenchmarkSpec::new(NetworkSource::Random {
            n: 4,
            max_indegree: 3,
            arity: [2, 3],
        });
        spec.sample_sizes = vec![50_000];
        spec.replicates = 1;
        spec.seed = seed;
        let report = run_benchmark(&spec, &[Method::Exact]).unwrap();
        let cell = &report.cells[0];
        let ns = cell.normalized_score.unwrap();
        assert!(ns > 0.0 && ns <= 1.05, "normalized score {ns}");
        if cell.shd == Some(0) {
            hits += 1;
        }
    }
    assert!(hits >= 18, "SHD 0 in {hits}/20 seeds");
}

#[test]
fn aggregates_are_means_of_cells() {
    let mut spec = BenchmarkSpec::new(NetworkSource::Random {
        n: 6,
        max_indegree: 2,
        arity: [2, 3],
    });
    spec.sample_sizes = vec![300, 900];
    spec.replicates = 3;
    spec.seed = 5;
    let methods = [Method::SllLocal, Method::SllC, Method::Greedy];
    let report = run_benchmark(&spec, &methods).unwrap();
    assert_eq!(report.cells.len(), 3 * 2 * 3);
    assert_eq!(report.aggregates, aggregate(&report.cells));
    for a in &report.aggregates {
        let cells: Vec<_> = report.cells.iter().filter(|c| c.method == a.method && c.m == a.m).collect();
        let vals: Vec<f64> = cells.iter().filter_map(|c| c.slhd_blankets).map(|x| x as f64).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        assert!((a.slhd_blankets.unwrap().mean - mean).abs() < 1e-12);
        assert_eq!(a.shd.is_some(), a.method != Method::SllLocal);
    }
    let again = run_benchmark(&spec, &methods).unwrap();
    // wall times are not serialized, everything else must match
    assert_eq!(serde_json::to_string(&report.aggregates).unwrap(), serde_json::to_string(&again.aggregates).unwrap());
    let strip = |cs: &[sll::bench::Cell]| cs.iter().map(|c| (c.slhd_neighbors, c.slhd_blankets, c.shd, c.normalized_score.map(f64::to_bits))).collect::<Vec<_>>();
    assert_eq!(strip(&report.cells), strip(&again.cells));
}

#[test]
fn random_networks_respect_their_bounds() {
    let bn = random_dag(37, 4, (2, 4), 1).unwrap();
    assert_eq!(bn.n(), 37);
    assert!(bn.dag().max_indegree() <= 4);
    assert!((0..37).all(|v| (2..=4).contains(&bn.arity(v))));
    let single = random_dag(1, 3, (2, 3), 2).unwrap();
    assert_eq!(single.n(), 1);
    assert!(random_dag(0, 3, (2, 3), 2).is_err());
    let truth = blanket_sets(bn.dag());
    assert_eq!(slhd(&truth, &truth).unwrap(), 0);
    assert!(neighbor_sets(bn.dag()).iter().zip(&truth).all(|(n, b)| n.is_subset(b)));
}
