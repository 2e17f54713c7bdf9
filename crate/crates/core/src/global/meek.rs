//! Orientation propagation, CPDAGs and consistent extensions.

use crate::error::Result;
use crate::model::{Dag, Pdag};

/// A PDAG under construction plus the v-structures committed so far.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrientationState {
    pub pdag: Pdag,
    /// Committed colliders `(a, c, b)` meaning `a -> c <- b`, with `a < b`.
    pub committed: Vec<(usize, usize, usize)>,
}

impl OrientationState {
    pub fn new(pdag: Pdag) -> Self {
        Self {
            pdag,
            committed: Vec::new(),
        }
    }
}

/// Whether orienting the undirected edge `a - b` as `a -> b` is forced by
/// one of Meek's four rules.
fn forced(p: &Pdag, a: usize, b: usize) -> bool {
    // R1: c -> a - b with c, b non-adjacent
    if p.parents(a).iter().any(|c| c != b && !p.adjacent(c, b)) {
        return true;
    }
    // R2: a -> c -> b
    if !p.children(a).intersection(p.parents(b)).is_empty() {
        return true;
    }
    // R3: a - c -> b and a - d -> b with c, d non-adjacent
    let mids: Vec<usize> = p.undirected_neighbors(a).intersection(p.parents(b)).to_vec();
    for (i, &c) in mids.iter().enumerate() {
        if mids[i + 1..].iter().any(|&d| !p.adjacent(c, d)) {
            return true;
        }
    }
    // R4: c -> d -> b with a adjacent to c and d, and c, b non-adjacent
    for d in p.parents(b) {
        if d == a || !p.adjacent(a, d) {
            continue;
        }
        if p
            .parents(d)
            .iter()
            .any(|c| c != a && c != b && p.adjacent(a, c) && !p.adjacent(c, b))
        {
            return true;
        }
    }
    false
}

/// Applies Meek's rules until none orients another edge.
///
/// Undirected edges are visited in ascending order and the first forced
/// orientation is applied before rescanning. Orientations that would close a
/// directed cycle are never made. Returns the number of edges oriented.
pub fn meek_orient(state: &mut OrientationState) -> usize {
    let mut oriented = 0;
    'scan: loop {
        for (a, b) in state.pdag.undirected_edges() {
            for (x, y) in [(a, b), (b, a)] {
                if forced(&state.pdag, x, y) && !state.pdag.directed_reaches(y, x) {
                    state.pdag.orient(x, y).expect("edge is undirected");
                    oriented += 1;
                    continue 'scan;
                }
            }
        }
        return oriented;
    }
}

/// The completed PDAG of `dag`'s Markov equivalence class: the skeleton with
/// every v-structure directed, closed under Meek's rules.
pub fn dag_to_cpdag(dag: &Dag) -> Pdag {
    let mut p = Pdag::new(dag.n());
    for (u, v) in dag.skeleton() {
        p.add_undirected(u, v).expect("skeleton edges are distinct");
    }
    for (s, c, t) in dag.v_structures() {
        for x in [s, t] {
            if p.has_undirected(x, c) {
                p.orient(x, c).expect("edge is undirected");
            }
        }
    }
    let mut state = OrientationState::new(p);
    meek_orient(&mut state);
    state.pdag
}

/// A DAG drawn from a PDAG.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Extension {
    pub dag: Dag,
    /// False when no DAG keeps the PDAG's arcs and v-structures; the DAG is
    /// then a best-effort acyclic orientation.
    pub consistent: bool,
}

/// Orients the remaining undirected edges of `pdag` without creating cycles
/// or v-structures absent from it.
///
/// Repeatedly removes a node that has no outgoing arcs and whose undirected
/// neighbors are adjacent to all its other neighbors, directing its
/// undirected edges toward it. The smallest such node is taken first.
pub fn pdag_extend_to_dag(pdag: &Pdag) -> Result<Extension> {
    let n = pdag.n();
    let mut work = pdag.clone();
    let mut arcs = pdag.directed_arcs();
    let mut alive = vec![true; n];
    for _ in 0..n {
        let sink = (0..n).find(|&x| {
            alive[x] && work.children(x).is_empty() && {
                let adj = work.adjacents(x);
                work.undirected_neighbors(x)
                    .iter()
                    .all(|y| adj.iter().all(|z| z == y || work.adjacent(y, z)))
            }
        });
        let Some(x) = sink else {
            return Ok(Extension {
                dag: acyclic_orientation(pdag),
                consistent: false,
            });
        };
        arcs.extend(work.undirected_neighbors(x).iter().map(|y| (y, x)));
        for y in work.adjacents(x).to_vec() {
            work.remove_edge(x, y);
        }
        alive[x] = false;
    }
    Ok(Extension {
        dag: Dag::from_arcs(n, arcs)?,
        consistent: true,
    })
}

/// Keeps every arc and then every undirected edge that can be added in
/// ascending order without closing a cycle.
fn acyclic_orientation(pdag: &Pdag) -> Dag {
    let mut dag = Dag::new(pdag.n());
    for (u, v) in pdag.directed_arcs() {
        let _ = dag.add_arc(u, v);
    }
    for (u, v) in pdag.undirected_edges() {
        if dag.add_arc(u, v).is_err() {
            let _ = dag.add_arc(v, u);
        }
    }
    dag
}
