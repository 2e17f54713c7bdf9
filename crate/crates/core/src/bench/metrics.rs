//! Structural and score-based distances between learned and true models.

use crate::error::{invalid, Result};
use crate::global::pdag_extend_to_dag;
use crate::model::{Dag, Dataset, NodeSubset, Pdag};
use crate::num::Real;
use crate::scoring::{score_dag, BdeuParams};

/// Sum over targets of the symmetric difference between learned and true
/// local sets.
pub fn slhd(learned: &[NodeSubset], truth: &[NodeSubset]) -> Result<usize> {
    if learned.len() != truth.len() {
        return invalid(format!("{} learned targets but {} true targets", learned.len(), truth.len()));
    }
    Ok(learned
        .iter()
        .zip(truth)
        .map(|(a, b)| a.symmetric_difference_len(b))
        .sum())
}

/// Structural Hamming distance: one for every pair that is an edge in only
/// one PDAG or carries a different edge type in each.
pub fn shd(p1: &Pdag, p2: &Pdag) -> Result<usize> {
    if p1.n() != p2.n() {
        return invalid(format!("pdags over {} and {} nodes", p1.n(), p2.n()));
    }
    let n = p1.n();
    let kind = |p: &Pdag, u: usize, v: usize| -> u8 {
        if p.has_undirected(u, v) {
            1
        } else if p.has_directed(u, v) {
            2
        } else if p.has_directed(v, u) {
            3
        } else {
            0
        }
    };
    let mut d = 0;
    for u in 0..n {
        for v in u + 1..n {
            if kind(p1, u, v) != kind(p2, u, v) {
                d += 1;
            }
        }
    }
    Ok(d)
}

/// Score of a DAG extension of `learned` divided by the score of `truth`.
/// Scores are negative, so values below one beat the true structure.
pub fn normalized_score<T: Real>(learned: &Pdag, truth: &Dag, data: &Dataset, params: &BdeuParams<T>) -> Result<T> {
    if data.rows() == 0 {
        return invalid("normalized score needs at least one row");
    }
    if learned.n() != truth.n() {
        return invalid("learned and true structures differ in size");
    }
    let ext = pdag_extend_to_dag(learned)?;
    let s = score_dag(&ext.dag, data, params)?;
    let base = score_dag(truth, data, params)?;
    Ok(s / base)
}

/// Neighbor set of every node.
pub fn neighbor_sets(dag: &Dag) -> Vec<NodeSubset> {
    (0..dag.n()).map(|v| dag.nb(v)).collect()
}

/// Markov blanket of every node.
pub fn blanket_sets(dag: &Dag) -> Vec<NodeSubset> {
    (0..dag.n()).map(|v| dag.nb(v).union(&dag.sp(v))).collect()
}
