//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sll::model::{BayesianNetwork, Dag, Dataset, Pdag};

/// Every DAG on `n` labelled nodes, by filtering all arc subsets.
pub fn all_dags(n: usize) -> Vec<Dag> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v)))
        .collect();
    (0u64..1 << pairs.len())
        .filter_map(|mask| {
            let arcs = pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &a)| a);
            Dag::from_arcs(n, arcs).ok()
        })
        .collect()
}

/// BDeu straight from the counting formula, with hashed counts.
pub fn naive_bdeu(dag: &Dag, data: &Dataset, ess: f64) -> f64 {
    let lg = libm::lgamma;
    let mut total = 0.0;
    for v in 0..dag.n() {
        let parents = dag.parents(v).unwrap().to_vec();
        let r = data.arity(v) as f64;
        let q: f64 = parents.iter().map(|&p| data.arity(p) as f64).product();
        let mut nij: HashMap<Vec<u16>, f64> = HashMap::new();
        let mut nijk: HashMap<(Vec<u16>, u16), f64> = HashMap::new();
        for row in 0..data.rows() {
            let key: Vec<u16> = parents.iter().map(|&p| data.column(p)[row]).collect();
            *nij.entry(key.clone()).or_default() += 1.0;
            *nijk.entry((key, data.column(v)[row])).or_default() += 1.0;
        }
        let aj = ess / q;
        let ajk = ess / (q * r);
        for n in nij.values() {
            total += lg(aj) - lg(aj + n);
        }
        for n in nijk.values() {
            total += lg(ajk + n) - lg(ajk);
        }
    }
    total
}

/// Equivalence-class key: skeleton and v-structures.
pub fn class_key(dag: &Dag) -> (BTreeSet<(usize, usize)>, Vec<(usize, usize, usize)>) {
    (dag.skeleton(), dag.v_structures())
}

/// Full joint distribution as `(assignment, probability)` pairs.
pub fn joint_table(bn: &BayesianNetwork) -> Vec<(Vec<usize>, f64)> {
    let n = bn.n();
    let mut out = Vec::new();
    let mut a = vec![0usize; n];
    loop {
        out.push((a.clone(), bn.joint(&a)));
        let mut i = 0;
        loop {
            if i == n {
                return out;
            }
            a[i] += 1;
            if a[i] < bn.arity(i) {
                break;
            }
            a[i] = 0;
            i += 1;
        }
    }
}

/// Whether `u` and `v` are independent given `z` in the enumerated joint:
/// `P(u,v,z) P(z) = P(u,z) P(v,z)` for every assignment, within `tol`.
pub fn conditionally_independent(joint: &[(Vec<usize>, f64)], u: usize, v: usize, z: &[usize], tol: f64) -> bool {
    let mut puvz: HashMap<(usize, usize, Vec<usize>), f64> = HashMap::new();
    let mut puz: HashMap<(usize, Vec<usize>), f64> = HashMap::new();
    let mut pvz: HashMap<(usize, Vec<usize>), f64> = HashMap::new();
    let mut pz: HashMap<Vec<usize>, f64> = HashMap::new();
    for (a, p) in joint {
        let zk: Vec<usize> = z.iter().map(|&i| a[i]).collect();
        *puvz.entry((a[u], a[v], zk.clone())).or_default() += p;
        *puz.entry((a[u], zk.clone())).or_default() += p;
        *pvz.entry((a[v], zk.clone())).or_default() += p;
        *pz.entry(zk).or_default() += p;
    }
    for ((xu, zk), pu) in &puz {
        for ((xv, zk2), pv) in &pvz {
            if zk != zk2 {
                continue;
            }
            let puv = puvz.get(&(*xu, *xv, zk.clone())).copied().unwrap_or(0.0);
            if (puv * pz[zk] - pu * pv).abs() > tol {
                return false;
            }
        }
    }
    true
}

/// A random PDAG: random order, each pair joined with probability `p`,
/// each edge directed along the order or left undirected at random.
pub fn random_pdag(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Pdag {
    let mut order: Vec<usize> = (0..n).collect();
    rand::seq::SliceRandom::shuffle(order.as_mut_slice(), rng);
    let mut pdag = Pdag::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                let (u, v) = (order[i], order[j]);
                if rng.random_bool(0.5) {
                    pdag.add_directed(u, v).unwrap();
                } else {
                    pdag.add_undirected(u, v).unwrap();
                }
            }
        }
    }
    pdag
}

/// A random DAG where each forward pair is an arc with probability `p`.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Dag {
    let mut order: Vec<usize> = (0..n).collect();
    rand::seq::SliceRandom::shuffle(order.as_mut_slice(), rng);
    let mut d = Dag::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                d.add_arc(order[i], order[j]).unwrap();
            }
        }
    }
    d
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Binary network on `dag` with margin-checked random CPTs.
pub fn binary_network(dag: Dag, seed: u64) -> BayesianNetwork {
    let n = dag.n();
    let mut r = rng(seed);
    let cpts = sll::bench::random_cpts(&dag, &vec![2; n], 1.0, &mut r);
    let vars = (0..n).map(|i| sll::model::Variable::new(format!("X{i}"), 2)).collect();
    BayesianNetwork::new(vars, dag, cpts).unwrap()
}

/// `m` rows of `n` mutually independent binary columns.
pub fn independent_data(n: usize, m: usize, seed: u64) -> Dataset {
    sll::bench::forward_sample(&binary_network(Dag::new(n), seed), m, seed ^ 0x5eed)
}

/// Number of seeds in `0..seeds` for which `hit` holds.
pub fn hits(seeds: u64, hit: impl Fn(u64) -> bool) -> usize {
    (0..seeds).filter(|&s| hit(s)).count()
}
