//! Random networks and forward sampling.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Gamma;

use crate::error::{Error, Result};
use crate::model::{BayesianNetwork, Dag, Dataset, Variable};

/// Minimum max-abs gap between child distributions that every parent must be
/// able to produce, in every configuration of the other parents.
pub const FAITHFULNESS_MARGIN: f64 = 0.05;

const MAX_CPT_ATTEMPTS: usize = 1000;

/// `m` rows drawn by ancestral sampling, deterministic in `seed`.
pub fn forward_sample(bn: &BayesianNetwork, m: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = bn.n();
    let order = bn.dag().topological_order();
    let mut columns = vec![vec![0u16; m]; n];
    let mut row = vec![0usize; n];
    for i in 0..m {
        for &v in &order {
            let probs = &bn.cpt(v)[bn.parent_config(v, &row)];
            let u: f64 = rng.random();
            let mut acc = 0.0;
            // fall back to the last positive entry against rounding
            let mut value = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
            for (k, &p) in probs.iter().enumerate() {
                acc += p;
                if u < acc {
                    value = k;
                    break;
                }
            }
            row[v] = value;
            columns[v][i] = value as u16;
        }
    }
    Dataset::new(bn.variables().to_vec(), columns).expect("sampled values lie within arities")
}

fn dirichlet_row(rng: &mut ChaCha8Rng, k: usize, alpha: f64) -> Vec<f64> {
    let gamma = Gamma::new(alpha, 1.0).expect("positive shape");
    loop {
        let draws: Vec<f64> = (0..k).map(|_| rng.sample(gamma)).collect();
        let total: f64 = draws.iter().sum();
        if total > 0.0 {
            return draws.iter().map(|x| x / total).collect();
        }
    }
}

/// Whether each parent, with the others held fixed, can move the child's
/// distribution by at least `margin` in max-abs distance.
fn respects_margin(cpt: &[Vec<f64>], parent_arities: &[usize], margin: f64) -> bool {
    let q = cpt.len();
    // stride of parent i in the mixed-radix row index
    let mut strides = vec![1; parent_arities.len()];
    for i in (0..parent_arities.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * parent_arities[i + 1];
    }
    for (i, &r) in parent_arities.iter().enumerate() {
        let stride = strides[i];
        for base in (0..q).filter(|j| (j / stride) % r == 0) {
            let rows: Vec<&Vec<f64>> = (0..r).map(|x| &cpt[base + x * stride]).collect();
            let mut best: f64 = 0.0;
            for a in 0..r {
                for b in a + 1..r {
                    let gap = rows[a]
                        .iter()
                        .zip(rows[b])
                        .map(|(x, y)| (x - y).abs())
                        .fold(0.0, f64::max);
                    best = best.max(gap);
                }
            }
            if best < margin {
                return false;
            }
        }
    }
    true
}

/// CPT for a child of the given arity and parents, rows from a symmetric
/// Dirichlet with concentration `alpha`, redrawn until every parent clears
/// the faithfulness margin.
pub fn margin_cpt(rng: &mut ChaCha8Rng, arity: usize, parent_arities: &[usize], alpha: f64) -> Vec<Vec<f64>> {
    let q: usize = parent_arities.iter().product();
    let mut cpt = Vec::new();
    for _ in 0..MAX_CPT_ATTEMPTS {
        cpt = (0..q).map(|_| dirichlet_row(rng, arity, alpha)).collect();
        if respects_margin(&cpt, parent_arities, FAITHFULNESS_MARGIN) {
            break;
        }
    }
    cpt
}

/// CPTs for every node of `dag`, drawn with [`margin_cpt`].
pub fn random_cpts(dag: &Dag, arities: &[usize], alpha: f64, rng: &mut ChaCha8Rng) -> Vec<Vec<Vec<f64>>> {
    (0..dag.n())
        .map(|v| {
            let pa: Vec<usize> = dag.pa(v).iter().map(|p| arities[p]).collect();
            margin_cpt(rng, arities[v], &pa, alpha)
        })
        .collect()
}

/// A random network: uniform topological order, a uniform number of parents
/// up to `max_indegree` chosen uniformly among predecessors, arities uniform
/// in `arity_range` and margin-checked Dirichlet(1) CPT rows.
pub fn random_dag(n: usize, max_indegree: usize, arity_range: (usize, usize), seed: u64) -> Result<BayesianNetwork> {
    let (lo, hi) = arity_range;
    if n == 0 {
        return Err(Error::Config("random network needs at least one node".into()));
    }
    if lo < 2 || hi < lo {
        return Err(Error::Config(format!("arity range {lo}..={hi} is empty or below 2")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut dag = Dag::new(n);
    for (i, &v) in order.iter().enumerate() {
        let k = rng.random_range(0..=max_indegree.min(i));
        for &p in order[..i].choose_multiple(&mut rng, k) {
            dag.add_arc(p, v)?;
        }
    }
    let arities: Vec<usize> = (0..n).map(|_| rng.random_range(lo..=hi)).collect();
    let cpts = random_cpts(&dag, &arities, 1.0, &mut rng);
    let variables = arities
        .iter()
        .enumerate()
        .map(|(i, &a)| Variable::new(format!("X{i}"), a))
        .collect();
    BayesianNetwork::new(variables, dag, cpts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_cpts_force_rows() {
        let dag = Dag::from_arcs(2, [(0, 1)]).unwrap();
        let vars = vec![Variable::new("a", 2), Variable::new("b", 2)];
        let bn = BayesianNetwork::new(vars, dag, vec![vec![vec![0.0, 1.0]], vec![vec![1.0, 0.0], vec![0.0, 1.0]]]).unwrap();
        let d = forward_sample(&bn, 50, 3);
        assert!(d.column(0).iter().all(|&x| x == 1));
        assert!(d.column(1).iter().all(|&x| x == 1));
    }

    #[test]
    fn fair_coin_frequency() {
        let bn = BayesianNetwork::new(vec![Variable::new("a", 2)], Dag::new(1), vec![vec![vec![0.5, 0.5]]]).unwrap();
        let m = 10_000;
        let d = forward_sample(&bn, m, 42);
        let freq = d.column(0).iter().filter(|&&x| x == 1).count() as f64 / m as f64;
        assert!((freq - 0.5).abs() <= 3.0 * (0.25 / m as f64).sqrt());
    }

    #[test]
    fn seeds_control_output() {
        let bn = random_dag(6, 2, (2, 3), 9).unwrap();
        assert_eq!(forward_sample(&bn, 100, 1), forward_sample(&bn, 100, 1));
        assert_ne!(forward_sample(&bn, 100, 1), forward_sample(&bn, 100, 2));
        assert_eq!(random_dag(6, 2, (2, 3), 9).unwrap(), bn);
    }

    #[test]
    fn generator_respects_bounds() {
        for seed in 0..20 {
            let bn = random_dag(12, 3, (2, 4), seed).unwrap();
            assert!(bn.dag().max_indegree() <= 3);
            assert!(bn.variables().iter().all(|v| (2..=4).contains(&v.arity)));
            for v in 0..12 {
                let pa: Vec<usize> = bn.dag().pa(v).iter().map(|p| bn.arity(p)).collect();
                assert!(respects_margin(bn.cpt(v), &pa, FAITHFULNESS_MARGIN));
            }
        }
        let one = random_dag(1, 3, (3, 3), 0).unwrap();
        assert_eq!(one.n(), 1);
        assert_eq!(one.arity(0), 3);
        assert!(random_dag(0, 1, (2, 2), 0).is_err());
        assert!(random_dag(3, 1, (1, 2), 0).is_err());
    }

    #[test]
    fn margin_check_detects_ignored_parent() {
        let flat = vec![vec![0.3, 0.7], vec![0.3, 0.7]];
        assert!(!respects_margin(&flat, &[2], 0.05));
        let strong = vec![vec![0.3, 0.7], vec![0.8, 0.2]];
        assert!(respects_margin(&strong, &[2], 0.05));
        // second parent only matters when the first is 1
        let partial = vec![vec![0.5, 0.5], vec![0.5, 0.5], vec![0.1, 0.9], vec![0.9, 0.1]];
        assert!(!respects_margin(&partial, &[2, 2], 0.05));
    }
}
