//! Globally optimal DAGs on small node sets by dynamic programming over
//! subsets.
//!
//! Two tables are built over a local reindexing of the node set `Z`:
//! for every node the best parent set within each candidate subset, then for
//! every subset `W ⊆ Z` the best sink and the score of an optimal DAG on `W`.
//! The network is read back by peeling sinks from `Z` down to the empty set.
//! Time is `O(|Z|² 2^|Z|)` and memory `O(|Z| 2^|Z|)`.

use log::warn;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::greedy::{greedy_search_on, EdgeConstraint, GreedyParams};
use crate::model::{remove_bit, subsets_by_cardinality, Dag, Dataset, NodeSubset};
use crate::num::Real;
use crate::scoring::{BdeuParams, LocalScoreTable, Scorer};

/// Largest node set handed to the exact search by default.
pub const DEFAULT_EXACT_LIMIT: usize = 20;
/// Hard cap on the exact path regardless of the configured limit.
pub const EXACT_HARD_CAP: usize = 25;

/// A learned structure, flagged when a heuristic replaced the exact search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LearnedDag {
    pub dag: Dag,
    pub inexact: bool,
}

/// For one node `v`, the best parent set inside every subset of `Z \ {v}`.
#[derive(Clone, Debug)]
pub struct BestParents<T> {
    node: usize,
    /// `Z \ {v}` in ascending order; masks index into this.
    others: Vec<usize>,
    sets: Vec<u32>,
    scores: Vec<T>,
}

impl<T: Real> BestParents<T> {
    pub fn node(&self) -> usize {
        self.node
    }

    pub fn others(&self) -> &[usize] {
        &self.others
    }

    /// Best parent set and its score within the candidates selected by `mask`.
    pub fn by_mask(&self, mask: u64) -> (u32, T) {
        (self.sets[mask as usize], self.scores[mask as usize])
    }

    /// Best parent set within `candidates`, which must lie inside `Z \ {v}`.
    pub fn best_within(&self, candidates: &NodeSubset) -> Option<(NodeSubset, T)> {
        let mut mask = 0u64;
        for c in candidates {
            mask |= 1 << self.others.binary_search(&c).ok()?;
        }
        let (set, score) = self.by_mask(mask);
        Some((self.expand(set), score))
    }

    fn expand(&self, set: u32) -> NodeSubset {
        (0..self.others.len())
            .filter(|i| set & (1 << i) != 0)
            .map(|i| self.others[i])
            .collect()
    }
}

/// Whether `(a, a_set)` beats `(b, b_set)`: higher score, then fewer
/// parents, then the smaller bitmask.
#[inline]
fn better<T: Real>(a: T, a_set: u32, b: T, b_set: u32) -> bool {
    a > b || (a == b && (a_set.count_ones(), a_set) < (b_set.count_ones(), b_set))
}

/// Fills the best-parents row of `v` from its local score table with one
/// upward sweep over subsets of `Z \ {v}` in increasing cardinality.
pub fn build_best_parents<T: Real>(
    v: usize,
    z: &NodeSubset,
    table: &LocalScoreTable<T>,
) -> Result<BestParents<T>> {
    if table.node() != v {
        return invalid(format!("score table belongs to node {}, not {v}", table.node()));
    }
    let others: Vec<usize> = z.without(v).to_vec();
    let width = others.len();
    if width >= 32 {
        return invalid(format!("node set of {} exceeds the exact-search width", width + 1));
    }
    // position of each candidate in the table's own indexing
    let positions: Vec<Option<usize>> = others
        .iter()
        .map(|o| table.candidates().binary_search(o).ok())
        .collect();
    let k = table.max_indegree();
    let own_score = |mask: u64| -> Result<T> {
        let mut tmask = 0u64;
        for (i, pos) in positions.iter().enumerate() {
            if mask & (1 << i) != 0 {
                let p = pos.ok_or_else(|| missing(v, mask))?;
                tmask |= 1 << p;
            }
        }
        table.get_mask(tmask).ok_or_else(|| missing(v, mask))
    };

    let size = 1usize << width;
    let mut sets = vec![0u32; size];
    let mut scores = vec![T::neg_infinity(); size];
    for mask in subsets_by_cardinality(width, width) {
        let (mut best_set, mut best) = (u32::MAX, T::neg_infinity());
        if mask.count_ones() as usize <= k {
            best_set = mask as u32;
            best = own_score(mask)?;
        }
        let mut rest = mask;
        while rest != 0 {
            let bit = rest & rest.wrapping_neg();
            rest ^= bit;
            let sub = (mask ^ bit) as usize;
            if better(scores[sub], sets[sub], best, best_set) {
                best = scores[sub];
                best_set = sets[sub];
            }
        }
        sets[mask as usize] = best_set;
        scores[mask as usize] = best;
    }
    Ok(BestParents {
        node: v,
        others,
        sets,
        scores,
    })
}

fn missing(v: usize, mask: u64) -> Error {
    Error::Internal(format!("score table of node {v} misses parent mask {mask:#b}"))
}

/// Best sink and optimal score for every subset of `Z`.
#[derive(Clone, Debug)]
pub struct SinkTable<T> {
    nodes: Vec<usize>,
    scores: Vec<T>,
    sinks: Vec<u8>,
}

impl<T: Real> SinkTable<T> {
    /// Builds the table from one best-parents row per member of `Z`, given
    /// in ascending node order.
    pub fn build(best: &[BestParents<T>]) -> Self {
        let nodes: Vec<usize> = best.iter().map(BestParents::node).collect();
        let size = 1usize << nodes.len();
        let mut scores = vec![T::zero(); size];
        let mut sinks = vec![0u8; size];
        for w in 1..size as u64 {
            let mut best_total = T::neg_infinity();
            let mut best_sink = 0u8;
            let mut rest = w;
            while rest != 0 {
                let s = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let without = w & !(1 << s);
                let (_, parents) = best[s].by_mask(remove_bit(without, s));
                let total = scores[without as usize] + parents;
                if total > best_total {
                    best_total = total;
                    best_sink = s as u8;
                }
            }
            scores[w as usize] = best_total;
            sinks[w as usize] = best_sink;
        }
        Self {
            nodes,
            scores,
            sinks,
        }
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    /// Score of an optimal DAG on the whole node set.
    pub fn best_score(&self) -> T {
        *self.scores.last().unwrap()
    }

    /// Score and last sink (local position) for the subset given by `mask`.
    pub fn entry(&self, mask: u64) -> (T, usize) {
        (self.scores[mask as usize], self.sinks[mask as usize] as usize)
    }
}

/// Peels sinks off `Z`, giving each its recorded best parent set.
pub fn reconstruct_dag<T: Real>(n: usize, sinks: &SinkTable<T>, best: &[BestParents<T>]) -> Dag {
    let mut dag = Dag::new(n);
    let mut w = (1u64 << sinks.nodes.len()) - 1;
    while w != 0 {
        let s = sinks.sinks[w as usize] as usize;
        w &= !(1 << s);
        let (set, _) = best[s].by_mask(remove_bit(w, s));
        let sink = sinks.nodes[s];
        for p in &best[s].expand(set) {
            // every parent is still in w, so it precedes `sink` in the peeling order
            dag.add_arc(p, sink).expect("peeling order is topological");
        }
    }
    dag
}

/// Highest-scoring DAG on `z` with in-degree at most `max_indegree`.
///
/// Node sets larger than `exact_limit` (or [`EXACT_HARD_CAP`]) are handed to
/// unconstrained TABU hill-climbing and the result is flagged inexact.
pub fn optimal_network<T: Real>(
    z: &NodeSubset,
    data: &Dataset,
    params: &BdeuParams<T>,
    max_indegree: usize,
    exact_limit: usize,
) -> Result<LearnedDag> {
    let scorer = Scorer::new(data, *params);
    optimal_network_with(&scorer, z, max_indegree, exact_limit)
}

/// [`optimal_network`] sharing a memoizing scorer across calls.
pub fn optimal_network_with<T: Real>(
    scorer: &Scorer<'_, T>,
    z: &NodeSubset,
    max_indegree: usize,
    exact_limit: usize,
) -> Result<LearnedDag> {
    let n = scorer.data().n_vars();
    if z.is_empty() {
        return invalid("optimal network needs a nonempty node set");
    }
    if exact_limit == 0 {
        return invalid("exact limit must be at least 1");
    }
    if z.bound() > n {
        return invalid("node set refers to columns outside the data");
    }
    if z.len() > exact_limit.min(EXACT_HARD_CAP) {
        warn!(
            "{} nodes exceed the exact limit {}; falling back to TABU hill-climbing",
            z.len(),
            exact_limit.min(EXACT_HARD_CAP)
        );
        let params = GreedyParams {
            max_indegree,
            ..GreedyParams::default()
        };
        let dag = greedy_search_on(scorer, z, &params, &EdgeConstraint::Unconstrained).dag;
        return Ok(LearnedDag { dag, inexact: true });
    }
    let nodes = z.to_vec();
    let best = nodes
        .par_iter()
        .map(|&v| {
            let table = scorer.score_table(v, &z.without(v), max_indegree)?;
            build_best_parents(v, z, &table)
        })
        .collect::<Result<Vec<_>>>()?;
    let sinks = SinkTable::build(&best);
    Ok(LearnedDag {
        dag: reconstruct_dag(n, &sinks, &best),
        inexact: false,
    })
}
