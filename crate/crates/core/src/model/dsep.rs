use super::{Dag, NodeSubset};
use crate::error::{invalid, Result};

/// Whether `u` and `v` are d-separated by `z` in `dag`.
///
/// Uses the reachability ("Bayes ball") formulation: a trail is followed
/// through a node `y` arriving from a child only when `y` is unobserved, and
/// arriving from a parent it continues to children when `y` is unobserved and
/// back up to parents when `y` is in `z` or has a descendant in `z`.
pub fn d_separated(dag: &Dag, u: usize, v: usize, z: &NodeSubset) -> Result<bool> {
    let n = dag.n();
    if u >= n || v >= n || z.bound() > n {
        return invalid("node index out of range");
    }
    if u == v {
        return invalid("d-separation needs two distinct nodes");
    }
    if z.contains(u) || z.contains(v) {
        return invalid("endpoints may not be in the conditioning set");
    }
    let with_observed_descendant = dag.ancestors_of(z);

    // (node, arrived_from_child)
    let mut visited_up = NodeSubset::new();
    let mut visited_down = NodeSubset::new();
    let mut stack = vec![(u, true)];
    while let Some((y, up)) = stack.pop() {
        let seen = if up { &mut visited_up } else { &mut visited_down };
        if !seen.insert(y) {
            continue;
        }
        if y == v {
            return Ok(false);
        }
        let observed = z.contains(y);
        if up {
            if !observed {
                stack.extend(dag.pa(y).iter().map(|p| (p, true)));
                stack.extend(dag.ch(y).iter().map(|c| (c, false)));
            }
        } else {
            if !observed {
                stack.extend(dag.ch(y).iter().map(|c| (c, false)));
            }
            if with_observed_descendant.contains(y) {
                stack.extend(dag.pa(y).iter().map(|p| (p, true)));
            }
        }
    }
    Ok(true)
}
