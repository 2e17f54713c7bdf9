//! BDeu local scores, decomposable DAG scores and parent-set score caches.
//!
//! For node `v` with arity `r` and parents with `q` joint configurations,
//!
//! ```text
//! score = Σ_j [lnΓ(α/q) − lnΓ(α/q + N_j)] + Σ_{j,k} [lnΓ(α/(q·r) + N_jk) − lnΓ(α/(q·r))]
//! ```
//!
//! where `α` is the equivalent sample size and `N_jk` counts rows with parent
//! configuration `j` and child value `k`. Configurations that never occur
//! contribute zero and are skipped.

use std::collections::HashMap;
use std::iter;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::RwLock;

use crate::error::{invalid, Result};
use crate::model::{subsets_by_cardinality, Dag, Dataset, NodeSubset};
use crate::num::Real;

/// Parent-set size limit applied wherever none is given.
pub const DEFAULT_MAX_INDEGREE: usize = 5;

/// BDeu prior parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BdeuParams<T> {
    ess: T,
}

impl<T: Real> BdeuParams<T> {
    pub fn new(ess: T) -> Result<Self> {
        if !(ess > T::zero()) || !ess.is_finite() {
            return invalid(format!("equivalent sample size must be positive, got {ess}"));
        }
        Ok(Self { ess })
    }

    pub fn ess(&self) -> T {
        self.ess
    }
}

impl<T: Real> Default for BdeuParams<T> {
    fn default() -> Self {
        Self { ess: T::one() }
    }
}

/// Dense count arrays are used while the key space stays below this many
/// cells per row of data (or this absolute floor); otherwise keys are sorted.
const DENSE_FACTOR: u64 = 4;
const DENSE_FLOOR: u64 = 1 << 12;

/// Family score from raw columns. Counts are grouped by a mixed-radix key
/// over `(parents..., child)`; when the radix would overflow, keys are first
/// replaced by their ranks, which preserves the grouping.
fn family_score<T: Real>(data: &Dataset, v: usize, parents: &[usize], ess: T) -> T {
    let m = data.rows();
    if m == 0 {
        return T::zero();
    }
    let r = data.arity(v) as u64;
    let q = parents
        .iter()
        .fold(T::one(), |q, &p| q * T::from_usize_lossy(data.arity(p)));

    let mut keys = vec![0u64; m];
    let mut radix: u64 = 1;
    for &col in parents.iter().chain(iter::once(&v)) {
        let a = data.arity(col) as u64;
        if radix.checked_mul(a).is_none() {
            radix = compress_keys(&mut keys);
        }
        for (k, &x) in keys.iter_mut().zip(data.column(col)) {
            *k = *k * a + x as u64;
        }
        radix *= a;
    }

    let alpha_j = ess / q;
    let alpha_jk = alpha_j / T::from_u64(r).unwrap();
    let lg_j = alpha_j.lgamma();
    let lg_jk = alpha_jk.lgamma();
    let mut total = T::zero();
    let mut add_config = |cells: &mut dyn Iterator<Item = u64>| {
        let mut n_j = 0u64;
        let mut cell_sum = T::zero();
        for n_jk in cells {
            if n_jk > 0 {
                n_j += n_jk;
                cell_sum = cell_sum + (alpha_jk + T::from_u64(n_jk).unwrap()).lgamma() - lg_jk;
            }
        }
        if n_j > 0 {
            total = total + lg_j - (alpha_j + T::from_u64(n_j).unwrap()).lgamma() + cell_sum;
        }
    };

    if radix <= DENSE_FLOOR.max(DENSE_FACTOR * m as u64) {
        let mut counts = vec![0u32; radix as usize];
        for &k in &keys {
            counts[k as usize] += 1;
        }
        for config in counts.chunks_exact(r as usize) {
            add_config(&mut config.iter().map(|&c| c as u64));
        }
    } else {
        keys.sort_unstable();
        let mut i = 0;
        while i < keys.len() {
            let j = keys[i] / r;
            let mut cells = Vec::with_capacity(r as usize);
            while i < keys.len() && keys[i] / r == j {
                let k = keys[i];
                let start = i;
                while i < keys.len() && keys[i] == k {
                    i += 1;
                }
                cells.push((i - start) as u64);
            }
            add_config(&mut cells.into_iter());
        }
    }
    total
}

/// Replaces keys by their dense ranks; returns the number of distinct keys.
fn compress_keys(keys: &mut [u64]) -> u64 {
    let mut distinct = keys.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    for k in keys.iter_mut() {
        *k = distinct.binary_search(k).unwrap() as u64;
    }
    distinct.len() as u64
}

fn check_family(data: &Dataset, v: usize, parents: &NodeSubset) -> Result<()> {
    let n = data.n_vars();
    if v >= n || parents.bound() > n {
        return invalid(format!("family of node {v} refers to columns outside 0..{n}"));
    }
    if parents.contains(v) {
        return invalid(format!("node {v} cannot be its own parent"));
    }
    Ok(())
}

/// BDeu log score of node `v` with the given parent set.
pub fn bdeu_local_score<T: Real>(
    v: usize,
    parents: &NodeSubset,
    data: &Dataset,
    params: &BdeuParams<T>,
) -> Result<T> {
    check_family(data, v, parents)?;
    Ok(family_score(data, v, &parents.to_vec(), params.ess))
}

/// Sum of local scores over every node of `dag`.
pub fn score_dag<T: Real>(dag: &Dag, data: &Dataset, params: &BdeuParams<T>) -> Result<T> {
    if dag.n() != data.n_vars() {
        return invalid(format!(
            "graph has {} nodes but data has {} variables",
            dag.n(),
            data.n_vars()
        ));
    }
    Ok((0..dag.n())
        .map(|v| family_score(data, v, &dag.pa(v).to_vec(), params.ess))
        .sum())
}

/// Local scores of one node over every parent set drawn from `candidates`
/// with at most `max_indegree` members.
#[derive(Clone, Debug)]
pub struct LocalScoreTable<T> {
    node: usize,
    candidates: Vec<usize>,
    max_indegree: usize,
    /// Keyed by bitmask over positions in `candidates`.
    entries: HashMap<u64, T>,
}

impl<T: Real> LocalScoreTable<T> {
    pub fn node(&self) -> usize {
        self.node
    }

    pub fn candidates(&self) -> &[usize] {
        &self.candidates
    }

    pub fn max_indegree(&self) -> usize {
        self.max_indegree
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn local_mask(&self, parents: &NodeSubset) -> Option<u64> {
        let mut mask = 0u64;
        for p in parents {
            let pos = self.candidates.binary_search(&p).ok()?;
            mask |= 1 << pos;
        }
        Some(mask)
    }

    /// Score by bitmask over positions in [`Self::candidates`].
    pub fn get_mask(&self, mask: u64) -> Option<T> {
        self.entries.get(&mask).copied()
    }

    /// Score of `parents`, if it is covered by the table.
    pub fn get(&self, parents: &NodeSubset) -> Option<T> {
        self.entries.get(&self.local_mask(parents)?).copied()
    }

    /// Entries as `(parent set, score)`, by cardinality then local bitmask.
    pub fn entries(&self) -> Vec<(NodeSubset, T)> {
        let mut masks: Vec<u64> = self.entries.keys().copied().collect();
        masks.sort_unstable_by_key(|&m| (m.count_ones(), m));
        masks
            .into_iter()
            .map(|m| {
                let set = (0..self.candidates.len())
                    .filter(|i| m & (1 << i) != 0)
                    .map(|i| self.candidates[i])
                    .collect();
                (set, self.entries[&m])
            })
            .collect()
    }
}

fn table_with<T: Real>(
    v: usize,
    candidates: &NodeSubset,
    max_indegree: usize,
    mut score: impl FnMut(&NodeSubset) -> T,
) -> Result<LocalScoreTable<T>> {
    if candidates.contains(v) {
        return invalid(format!("node {v} is among its own parent candidates"));
    }
    let cand = candidates.to_vec();
    if cand.len() >= 64 {
        return invalid(format!("{} parent candidates exceed the 63-node table limit", cand.len()));
    }
    let mut entries = HashMap::new();
    for mask in subsets_by_cardinality(cand.len(), max_indegree) {
        let parents: NodeSubset = (0..cand.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| cand[i])
            .collect();
        entries.insert(mask, score(&parents));
    }
    Ok(LocalScoreTable {
        node: v,
        candidates: cand,
        max_indegree,
        entries,
    })
}

/// Builds a complete score table, computing every entry from the data.
pub fn build_score_table<T: Real>(
    v: usize,
    candidates: &NodeSubset,
    data: &Dataset,
    params: &BdeuParams<T>,
    max_indegree: usize,
) -> Result<LocalScoreTable<T>> {
    check_family(data, v, candidates)?;
    table_with(v, candidates, max_indegree, |ps| {
        family_score(data, v, &ps.to_vec(), params.ess)
    })
}

/// Memoizing BDeu scorer over one dataset.
///
/// Completed local scores are kept in a map with shared reads and serialized
/// inserts; concurrent computations of the same family insert identical
/// values.
pub struct Scorer<'a, T> {
    data: &'a Dataset,
    params: BdeuParams<T>,
    memo: RwLock<HashMap<(usize, NodeSubset), T>>,
    evaluations: AtomicUsize,
}

impl<'a, T: Real> Scorer<'a, T> {
    pub fn new(data: &'a Dataset, params: BdeuParams<T>) -> Self {
        Self {
            data,
            params,
            memo: RwLock::new(HashMap::new()),
            evaluations: AtomicUsize::new(0),
        }
    }

    pub fn data(&self) -> &'a Dataset {
        self.data
    }

    pub fn params(&self) -> &BdeuParams<T> {
        &self.params
    }

    /// Number of families scored from the data (cache misses).
    pub fn evaluations(&self) -> usize {
        self.evaluations.load(Ordering::Relaxed)
    }

    /// Local score of `v` given `parents`. Panics if `v ∈ parents`.
    pub fn local(&self, v: usize, parents: &NodeSubset) -> T {
        assert!(!parents.contains(v), "node {v} cannot be its own parent");
        let key = (v, parents.clone());
        if let Some(&s) = self.memo.read().unwrap().get(&key) {
            return s;
        }
        let s = family_score(self.data, v, &parents.to_vec(), self.params.ess);
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        self.memo.write().unwrap().entry(key).or_insert(s);
        s
    }

    pub fn score_dag(&self, dag: &Dag) -> T {
        (0..dag.n()).map(|v| self.local(v, dag.pa(v))).sum()
    }

    /// Memoized counterpart of [`build_score_table`].
    pub fn score_table(
        &self,
        v: usize,
        candidates: &NodeSubset,
        max_indegree: usize,
    ) -> Result<LocalScoreTable<T>> {
        check_family(self.data, v, candidates)?;
        table_with(v, candidates, max_indegree, |ps| self.local(v, ps))
    }
}
