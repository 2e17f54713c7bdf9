//! Small hand-built networks with known local structure.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::sample::random_cpts;
use crate::model::{d_separated, BayesianNetwork, Dag, NodeSubset, Variable};

/// Node roles of the pathology network, in the order `[t, u, s, w, v]`.
///
/// Arcs are `t -> u`, `w -> u`, `w -> v`, `u -> v`, `t -> s` and `v -> s`.
/// `t` and `v` are not adjacent, yet no subset of `t`'s neighbors
/// separates them, and `v` is a spouse of `t` through `s`. Without `w`,
/// an optimal network over the rest must join `t` and `v`.
pub type PathologyRoles = [usize; 5];

/// Labels under which ascending visits reach `w` before `v`, so `w` is
/// discarded from `t`'s search and `v` becomes a false-positive neighbor.
pub const PATHOLOGY_FALSE_NEIGHBOR: PathologyRoles = [0, 1, 2, 3, 4];

/// Labels under which `v` is visited before `w` while searching spouses.
pub const PATHOLOGY_LATE_WITNESS: PathologyRoles = [0, 1, 2, 4, 3];

/// Smallest change in a child's marginal distribution that switching one
/// parent must cause, with all other variables marginalized out.
pub const FIXTURE_ARC_MARGIN: f64 = 0.2;

const MAX_FIXTURE_ATTEMPTS: usize = 10_000;

/// Whether every arc carries a marginal parent-child dependence of at least
/// `margin` in max-abs distance, by enumerating the joint.
fn arc_margins_hold(bn: &BayesianNetwork, margin: f64) -> bool {
    let n = bn.n();
    let arcs = bn.dag().arcs();
    // pair[(arc, parent value, child value)] accumulates joint mass
    let mut pair: Vec<Vec<Vec<f64>>> = arcs
        .iter()
        .map(|&(p, c)| vec![vec![0.0; bn.arity(c)]; bn.arity(p)])
        .collect();
    let mut a = vec![0usize; n];
    'outer: loop {
        let pr = bn.joint(&a);
        for (i, &(p, c)) in arcs.iter().enumerate() {
            pair[i][a[p]][a[c]] += pr;
        }
        for i in 0..n {
            a[i] += 1;
            if a[i] < bn.arity(i) {
                continue 'outer;
            }
            a[i] = 0;
        }
        break;
    }
    pair.iter().all(|table| {
        let cond: Vec<Vec<f64>> = table
            .iter()
            .map(|row| {
                let s: f64 = row.iter().sum();
                row.iter().map(|x| x / s).collect()
            })
            .collect();
        let mut best: f64 = 0.0;
        for x in 0..cond.len() {
            for y in x + 1..cond.len() {
                let gap = cond[x].iter().zip(&cond[y]).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
                best = best.max(gap);
            }
        }
        best >= margin
    })
}

/// Every assignment of a small network with its probability.
fn joint_table(bn: &BayesianNetwork) -> Vec<(Vec<usize>, f64)> {
    let n = bn.n();
    let mut out = Vec::new();
    let mut x = vec![0usize; n];
    'outer: loop {
        out.push((x.clone(), bn.joint(&x)));
        for i in 0..n {
            x[i] += 1;
            if x[i] < bn.arity(i) {
                continue 'outer;
            }
            x[i] = 0;
        }
        return out;
    }
}

fn cmi_from_joint(joint: &[(Vec<usize>, f64)], a: usize, b: usize, z: &[usize]) -> f64 {
    use std::collections::HashMap;
    let mut pabz: HashMap<(usize, usize, Vec<usize>), f64> = HashMap::new();
    for (x, p) in joint {
        let key: Vec<usize> = z.iter().map(|&i| x[i]).collect();
        *pabz.entry((x[a], x[b], key)).or_default() += p;
    }
    let mut paz: HashMap<(usize, Vec<usize>), f64> = HashMap::new();
    let mut pbz: HashMap<(usize, Vec<usize>), f64> = HashMap::new();
    let mut pz: HashMap<Vec<usize>, f64> = HashMap::new();
    for ((va, vb, key), p) in &pabz {
        *paz.entry((*va, key.clone())).or_default() += p;
        *pbz.entry((*vb, key.clone())).or_default() += p;
        *pz.entry(key.clone()).or_default() += p;
    }
    pabz.iter()
        .filter(|(_, &p)| p > 0.0)
        .map(|((va, vb, key), &p)| p * (p * pz[key] / (paz[&(*va, key.clone())] * pbz[&(*vb, key.clone())])).ln())
        .sum()
}

/// Conditional mutual information `I(a; b | z)` in nats, from the exact
/// joint of a small network.
pub fn conditional_mutual_information(bn: &BayesianNetwork, a: usize, b: usize, z: &[usize]) -> f64 {
    cmi_from_joint(&joint_table(bn), a, b, z)
}

/// Least `I(a; b | Z)`, in nats, accepted for any pair `a, b` in each
/// other's Markov blanket that the DAG d-connects given `Z`.
pub const FIXTURE_MIN_CMI: f64 = 0.01;

/// Whether every d-connection between blanket members shows up as a
/// conditional dependence of at least `min_cmi`.
pub fn dependences_hold(bn: &BayesianNetwork, min_cmi: f64) -> bool {
    let n = bn.n();
    let joint = joint_table(bn);
    for a in 0..n {
        let blanket = bn.dag().markov_blanket(a).expect("valid node");
        for b in (a + 1..n).filter(|&b| blanket.contains(b)) {
            let rest: Vec<usize> = (0..n).filter(|&x| x != a && x != b).collect();
            for mask in 0u32..1 << rest.len() {
                let z: Vec<usize> = rest
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &x)| x)
                    .collect();
                let zs: NodeSubset = z.iter().copied().collect();
                let separated = d_separated(bn.dag(), a, b, &zs).expect("distinct nodes outside z");
                if !separated && cmi_from_joint(&joint, a, b, &z) < min_cmi {
                    return false;
                }
            }
        }
    }
    true
}

/// Binary network on `dag` whose CPTs are redrawn until every arc clears
/// [`FIXTURE_ARC_MARGIN`] and every d-connection clears
/// [`FIXTURE_MIN_CMI`], so each dependence is visible at moderate sample
/// sizes.
fn binary_network(dag: Dag, alpha: f64, seed: u64) -> BayesianNetwork {
    let n = dag.n();
    let arities = vec![2; n];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let variables: Vec<Variable> = (0..n).map(|i| Variable::new(format!("X{i}"), 2)).collect();
    let mut bn = None;
    for _ in 0..MAX_FIXTURE_ATTEMPTS {
        let cpts = random_cpts(&dag, &arities, alpha, &mut rng);
        let candidate = BayesianNetwork::new(variables.clone(), dag.clone(), cpts).expect("fixture is well formed");
        let ok = arc_margins_hold(&candidate, FIXTURE_ARC_MARGIN) && dependences_hold(&candidate, FIXTURE_MIN_CMI);
        bn = Some(candidate);
        if ok {
            break;
        }
    }
    bn.expect("at least one attempt")
}

/// Binary network with the pathology structure under `roles`.
pub fn pathology_network(roles: PathologyRoles, seed: u64) -> BayesianNetwork {
    let [t, u, s, w, v] = roles;
    let dag = Dag::from_arcs(5, [(t, u), (w, u), (w, v), (u, v), (t, s), (v, s)]).expect("acyclic");
    binary_network(dag, 0.5, seed)
}

/// Binary network whose every arc lies in a v-structure:
/// `0 -> 2 <- 1`, `2 -> 5 <- 3` and `4 -> 5`.
pub fn identifiable_network(seed: u64) -> BayesianNetwork {
    let dag = Dag::from_arcs(6, [(0, 2), (1, 2), (2, 5), (3, 5), (4, 5)]).expect("acyclic");
    binary_network(dag, 0.5, seed)
}

/// Binary collider `0 -> 2 <- 1`.
pub fn collider_network(seed: u64) -> BayesianNetwork {
    let dag = Dag::from_arcs(3, [(0, 2), (1, 2)]).expect("acyclic");
    binary_network(dag, 0.5, seed)
}

/// Binary chain `0 -> 1 -> 2`.
pub fn chain_network(seed: u64) -> BayesianNetwork {
    let dag = Dag::from_arcs(3, [(0, 1), (1, 2)]).expect("acyclic");
    binary_network(dag, 0.5, seed)
}
