//! Whole-network structure learning built from the local searches.
//!
//! [`sll_plus_c`] derives the skeleton from symmetry-corrected neighbor sets,
//! directs the colliders found during the spouse search and completes the
//! orientation with Meek's rules. [`sll_plus_g`] instead hands a looser
//! skeleton to constrained hill-climbing.

mod meek;

use std::collections::BTreeSet;

use log::debug;
use rayon::prelude::*;

use crate::error::Result;
use crate::exact::LearnedDag;
use crate::greedy::{greedy_search_on, EdgeConstraint, GreedyParams};
use crate::local::{LocalLearner, SllConfig};
use crate::model::{Dataset, NodeSubset, Pdag};
use crate::num::Real;

pub use meek::{dag_to_cpdag, meek_orient, pdag_extend_to_dag, Extension, OrientationState};

/// Whether orienting `a -> b` would form a collider at `b` with a parent
/// not adjacent to `a`.
fn makes_collider(p: &Pdag, a: usize, b: usize) -> bool {
    p.parents(b).iter().any(|c| c != a && !p.adjacent(c, a))
}

/// Orients the leftover undirected edges one at a time, smallest first,
/// avoiding new cycles and colliders where possible and propagating after
/// each choice.
fn orient_leftovers(state: &mut OrientationState) {
    while let Some(&(a, b)) = state.pdag.undirected_edges().first() {
        let ok = |p: &Pdag, x: usize, y: usize| !p.directed_reaches(y, x) && !makes_collider(p, x, y);
        let (x, y) = if ok(&state.pdag, a, b) {
            (a, b)
        } else if ok(&state.pdag, b, a) {
            (b, a)
        } else if !state.pdag.directed_reaches(b, a) {
            (a, b)
        } else {
            (b, a)
        };
        state.pdag.orient(x, y).expect("edge is undirected");
        meek_orient(state);
    }
}

/// Builds the skeleton from symmetry-corrected neighbor sets, commits the
/// v-structures witnessed during the spouse searches and completes the
/// orientation.
pub fn sll_plus_c<T: Real>(data: &Dataset, cfg: &SllConfig<T>) -> Result<LearnedDag> {
    let learner = LocalLearner::new(data, cfg.clone())?;
    sll_plus_c_with(&learner)
}

/// [`sll_plus_c`] reusing an existing learner and its cache.
pub fn sll_plus_c_with<T: Real>(learner: &LocalLearner<'_, T>) -> Result<LearnedDag> {
    let n = learner.data().n_vars();
    let potential = (0..n)
        .into_par_iter()
        .map(|t| learner.potential_neighbors(t))
        .collect::<Result<Vec<_>>>()?;
    let mut inexact = potential.iter().any(|p| p.inexact);

    let mut state = OrientationState::new(Pdag::new(n));
    for v in 0..n {
        for u in potential[v].set.iter().filter(|&u| u > v) {
            if potential[u].set.contains(v) {
                state.pdag.add_undirected(v, u)?;
            }
        }
    }

    let spouses = (0..n)
        .into_par_iter()
        .map(|t| learner.potential_spouses(t))
        .collect::<Result<Vec<_>>>()?;
    inexact |= spouses.iter().any(|s| s.inexact);

    for v in 0..n {
        for (&u, witnesses) in &spouses[v].common_children {
            for w in witnesses {
                let p = &state.pdag;
                let present = |x: usize| p.has_undirected(x, w) || p.has_directed(x, w);
                if !present(v) || !present(u) {
                    debug!("collider {v} -> {w} <- {u} skipped: edge missing from skeleton");
                    continue;
                }
                if p.directed_reaches(w, v) || p.directed_reaches(w, u) {
                    debug!("collider {v} -> {w} <- {u} skipped: conflicts with earlier orientations");
                    continue;
                }
                for x in [v, u] {
                    if state.pdag.has_undirected(x, w) {
                        state.pdag.orient(x, w)?;
                    }
                }
                state.committed.push((v.min(u), w, v.max(u)));
            }
        }
    }
    meek_orient(&mut state);
    orient_leftovers(&mut state);
    Ok(LearnedDag {
        dag: state.pdag.to_dag()?,
        inexact,
    })
}

/// Restricts hill-climbing to pairs where either endpoint names the other
/// as a potential neighbor.
pub fn sll_plus_g<T: Real>(data: &Dataset, cfg: &SllConfig<T>, greedy: &GreedyParams) -> Result<LearnedDag> {
    let learner = LocalLearner::new(data, cfg.clone())?;
    sll_plus_g_with(&learner, greedy)
}

/// [`sll_plus_g`] reusing an existing learner and its cache.
pub fn sll_plus_g_with<T: Real>(learner: &LocalLearner<'_, T>, greedy: &GreedyParams) -> Result<LearnedDag> {
    let n = learner.data().n_vars();
    let potential = (0..n)
        .into_par_iter()
        .map(|t| learner.potential_neighbors(t))
        .collect::<Result<Vec<_>>>()?;
    let inexact = potential.iter().any(|p| p.inexact);
    let edges: BTreeSet<(usize, usize)> = potential
        .iter()
        .enumerate()
        .flat_map(|(v, p)| p.set.iter().map(move |u| (v.min(u), v.max(u))))
        .collect();
    let run = greedy_search_on(
        learner.scorer(),
        &NodeSubset::full(n),
        greedy,
        &EdgeConstraint::Allowed(edges),
    );
    Ok(LearnedDag { dag: run.dag, inexact })
}
