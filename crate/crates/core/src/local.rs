//! Score-based local learning of neighbor sets, spouse sets and Markov
//! blankets.
//!
//! A target's potential neighbors are grown by repeatedly learning an optimal
//! network on the target, the current candidates and one new node, keeping
//! only the target's neighbors in that network. Symmetry correction keeps a
//! neighbor only when the relation holds from both ends. Spouses are found
//! the same way among neighbors of neighbors, and the spouse relation is then
//! closed from the other side.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::RwLock;

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::exact::{optimal_network_with, LearnedDag, DEFAULT_EXACT_LIMIT};
use crate::model::{Dataset, NodeSubset};
use crate::num::Real;
use crate::scoring::{BdeuParams, Scorer, DEFAULT_MAX_INDEGREE};

/// Order in which candidate nodes are taken from the pool.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum VisitOrder {
    /// Ascending node index.
    #[default]
    AscendingIndex,
    /// The order in which candidates enter the pool: column order for
    /// neighbor search, discovery order through the neighbors for spouses.
    DataOrder,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SllConfig<T> {
    pub scoring: BdeuParams<T>,
    pub max_indegree: usize,
    /// Node sets above this size go to hill-climbing instead of the exact search.
    pub exact_limit: usize,
    pub visit_order: VisitOrder,
}

impl<T: Real> Default for SllConfig<T> {
    fn default() -> Self {
        Self {
            scoring: BdeuParams::default(),
            max_indegree: DEFAULT_MAX_INDEGREE,
            exact_limit: DEFAULT_EXACT_LIMIT,
            visit_order: VisitOrder::AscendingIndex,
        }
    }
}

impl<T: Real> SllConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.exact_limit < 3 {
            return invalid(format!("exact limit must be at least 3, got {}", self.exact_limit));
        }
        Ok(())
    }
}

/// A learned node set, flagged when any network behind it was not exact.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LocalSet {
    pub set: NodeSubset,
    pub inexact: bool,
}

/// Output of the potential-spouse search for one target.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PotentialSpouses {
    pub spouses: NodeSubset,
    /// For each spouse, its common children with the target in the last
    /// network learned.
    pub common_children: BTreeMap<usize, NodeSubset>,
    pub inexact: bool,
}

/// Per-run memo of potential neighbor and spouse sets.
///
/// Reads are shared; inserts are serialized and idempotent, since every entry
/// is a pure function of the data and configuration.
#[derive(Debug, Default)]
pub struct SllCache {
    potential_neighbors: RwLock<HashMap<usize, LocalSet>>,
    potential_spouses: RwLock<HashMap<usize, PotentialSpouses>>,
}

impl SllCache {
    pub fn potential_neighbors(&self, t: usize) -> Option<LocalSet> {
        self.potential_neighbors.read().unwrap().get(&t).cloned()
    }

    pub fn potential_spouses(&self, t: usize) -> Option<PotentialSpouses> {
        self.potential_spouses.read().unwrap().get(&t).cloned()
    }

    pub fn len(&self) -> usize {
        self.potential_neighbors.read().unwrap().len() + self.potential_spouses.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Neighbors and spouses learned for one target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TargetReport {
    pub target: usize,
    pub neighbors: NodeSubset,
    pub spouses: NodeSubset,
    pub inexact: bool,
}

impl TargetReport {
    pub fn blanket(&self) -> NodeSubset {
        self.neighbors.union(&self.spouses)
    }
}

/// Runs the local searches over one dataset, sharing a score memo and an
/// [`SllCache`] across targets.
pub struct LocalLearner<'a, T> {
    scorer: Scorer<'a, T>,
    cfg: SllConfig<T>,
    cache: SllCache,
    network_calls: AtomicUsize,
}

impl<'a, T: Real> LocalLearner<'a, T> {
    pub fn new(data: &'a Dataset, cfg: SllConfig<T>) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            scorer: Scorer::new(data, cfg.scoring),
            cfg,
            cache: SllCache::default(),
            network_calls: AtomicUsize::new(0),
        })
    }

    pub fn data(&self) -> &'a Dataset {
        self.scorer.data()
    }

    pub fn config(&self) -> &SllConfig<T> {
        &self.cfg
    }

    pub fn scorer(&self) -> &Scorer<'a, T> {
        &self.scorer
    }

    pub fn cache(&self) -> &SllCache {
        &self.cache
    }

    /// Optimal-network invocations so far.
    pub fn network_calls(&self) -> usize {
        self.network_calls.load(Ordering::Relaxed)
    }

    fn check(&self, t: usize) -> Result<()> {
        if t >= self.data().n_vars() {
            return invalid(format!("target {t} out of range for {} variables", self.data().n_vars()));
        }
        Ok(())
    }

    fn learn(&self, z: &NodeSubset) -> Result<LearnedDag> {
        self.network_calls.fetch_add(1, Ordering::Relaxed);
        optimal_network_with(&self.scorer, z, self.cfg.max_indegree, self.cfg.exact_limit)
    }

    /// Potential neighbors of `t`, always recomputed.
    pub fn find_potential_neighbors(&self, t: usize) -> Result<LocalSet> {
        self.check(t)?;
        let mut h = NodeSubset::new();
        let mut inexact = false;
        // column order and ascending index coincide for this pool
        for v in (0..self.data().n_vars()).filter(|&v| v != t) {
            let z = h.with(t).with(v);
            let net = self.learn(&z)?;
            inexact |= net.inexact;
            h = net.dag.nb(t);
        }
        Ok(LocalSet { set: h, inexact })
    }

    /// Potential neighbors of `t` through the cache.
    pub fn potential_neighbors(&self, t: usize) -> Result<LocalSet> {
        if let Some(hit) = self.cache.potential_neighbors(t) {
            return Ok(hit);
        }
        let found = self.find_potential_neighbors(t)?;
        self.cache
            .potential_neighbors
            .write()
            .unwrap()
            .entry(t)
            .or_insert_with(|| found.clone());
        Ok(found)
    }

    /// Potential neighbors of `t` that also name `t` as a potential neighbor.
    pub fn find_neighbors(&self, t: usize) -> Result<LocalSet> {
        let mut out = self.potential_neighbors(t)?;
        for v in out.set.clone().iter() {
            let theirs = self.potential_neighbors(v)?;
            out.inexact |= theirs.inexact;
            if !theirs.set.contains(t) {
                out.set.remove(v);
            }
        }
        Ok(out)
    }

    /// Potential spouses of `t` given its neighbor set, always recomputed.
    pub fn find_potential_spouses(&self, t: usize, h_star: &NodeSubset) -> Result<PotentialSpouses> {
        self.check(t)?;
        if h_star.contains(t) {
            return invalid(format!("target {t} is listed among its own neighbors"));
        }
        let mut inexact = false;
        let mut pool: Vec<usize> = Vec::new();
        let mut pooled = h_star.with(t);
        for u in h_star {
            let nb = self.find_neighbors(u)?;
            inexact |= nb.inexact;
            for v in &nb.set {
                if pooled.insert(v) {
                    pool.push(v);
                }
            }
        }
        if self.cfg.visit_order == VisitOrder::AscendingIndex {
            pool.sort_unstable();
        }

        let mut s = NodeSubset::new();
        let mut common_children = BTreeMap::new();
        for v in pool {
            let z = h_star.union(&s).with(t).with(v);
            let net = self.learn(&z)?;
            inexact |= net.inexact;
            s = net.dag.sp(t).difference(h_star);
            common_children = s
                .iter()
                .map(|x| (x, net.dag.ch(t).intersection(net.dag.ch(x))))
                .collect();
        }
        Ok(PotentialSpouses {
            spouses: s,
            common_children,
            inexact,
        })
    }

    /// Potential spouses of `t` under its symmetry-corrected neighbors,
    /// through the cache.
    pub fn potential_spouses(&self, t: usize) -> Result<PotentialSpouses> {
        if let Some(hit) = self.cache.potential_spouses(t) {
            return Ok(hit);
        }
        let h_star = self.find_neighbors(t)?;
        let mut found = self.find_potential_spouses(t, &h_star.set)?;
        found.inexact |= h_star.inexact;
        self.cache
            .potential_spouses
            .write()
            .unwrap()
            .entry(t)
            .or_insert_with(|| found.clone());
        Ok(found)
    }

    /// Potential spouses of `t` plus every non-neighbor that names `t` as a
    /// potential spouse.
    pub fn find_spouses(&self, t: usize) -> Result<LocalSet> {
        let h_star = self.find_neighbors(t)?;
        let own = self.potential_spouses(t)?;
        let mut out = LocalSet {
            set: own.spouses,
            inexact: own.inexact || h_star.inexact,
        };
        for v in 0..self.data().n_vars() {
            if v == t || h_star.set.contains(v) {
                continue;
            }
            let theirs = self.potential_spouses(v)?;
            out.inexact |= theirs.inexact;
            if theirs.spouses.contains(t) {
                out.set.insert(v);
            }
        }
        Ok(out)
    }

    /// Neighbors and spouses of `t`; the blanket is their union.
    pub fn markov_blanket(&self, t: usize) -> Result<TargetReport> {
        let neighbors = self.find_neighbors(t)?;
        let spouses = self.find_spouses(t)?;
        Ok(TargetReport {
            target: t,
            neighbors: neighbors.set,
            spouses: spouses.set,
            inexact: neighbors.inexact || spouses.inexact,
        })
    }

    /// Blankets of every node, fanning targets out across workers.
    pub fn all_blankets(&self) -> Result<Vec<TargetReport>> {
        let n = self.data().n_vars();
        (0..n)
            .into_par_iter()
            .map(|t| self.potential_neighbors(t).map(|_| ()))
            .collect::<Result<()>>()?;
        (0..n)
            .into_par_iter()
            .map(|t| self.potential_spouses(t).map(|_| ()))
            .collect::<Result<()>>()?;
        (0..n).into_par_iter().map(|t| self.markov_blanket(t)).collect()
    }
}

/// Potential neighbors of `t` with a fresh learner.
pub fn find_potential_neighbors<T: Real>(data: &Dataset, t: usize, cfg: &SllConfig<T>) -> Result<NodeSubset> {
    Ok(LocalLearner::new(data, cfg.clone())?.find_potential_neighbors(t)?.set)
}

/// Markov blanket of `t` with a fresh learner.
pub fn markov_blanket<T: Real>(data: &Dataset, t: usize, cfg: &SllConfig<T>) -> Result<TargetReport> {
    LocalLearner::new(data, cfg.clone())?.markov_blanket(t)
}

/// Blankets of every node, sharing one cache.
pub fn all_blankets<T: Real>(data: &Dataset, cfg: &SllConfig<T>) -> Result<Vec<TargetReport>> {
    LocalLearner::new(data, cfg.clone())?.all_blankets()
}
