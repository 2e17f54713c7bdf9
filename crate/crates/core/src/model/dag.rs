use std::collections::{BTreeSet, VecDeque};

use super::NodeSubset;
use crate::error::{invalid, Error, Result};

/// A directed acyclic graph over nodes `0..n`.
///
/// Every mutator keeps the graph acyclic; an insertion that would close a
/// cycle is rejected with [`Error::Cycle`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dag {
    n: usize,
    parents: Vec<NodeSubset>,
    children: Vec<NodeSubset>,
}

impl Dag {
    /// The empty graph on `n` nodes.
    pub fn new(n: usize) -> Self {
        Self {
            n,
            parents: vec![NodeSubset::new(); n],
            children: vec![NodeSubset::new(); n],
        }
    }

    pub fn from_arcs(n: usize, arcs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut dag = Self::new(n);
        for (u, v) in arcs {
            dag.add_arc(u, v)?;
        }
        Ok(dag)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn check(&self, v: usize) -> Result<()> {
        if v >= self.n {
            return invalid(format!("node {v} out of range for a graph on {} nodes", self.n));
        }
        Ok(())
    }

    /// Adds `u -> v`. Adding an existing arc is a no-op.
    pub fn add_arc(&mut self, u: usize, v: usize) -> Result<()> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return invalid(format!("self-arc on node {u}"));
        }
        if self.has_arc(u, v) {
            return Ok(());
        }
        if self.reaches(v, u) {
            return Err(Error::Cycle(u, v));
        }
        self.parents[v].insert(u);
        self.children[u].insert(v);
        Ok(())
    }

    /// Removes `u -> v`; returns whether it was present.
    pub fn remove_arc(&mut self, u: usize, v: usize) -> bool {
        if u >= self.n || v >= self.n || !self.parents[v].remove(u) {
            return false;
        }
        self.children[u].remove(v);
        true
    }

    /// Replaces `u -> v` with `v -> u`, leaving the graph unchanged on failure.
    pub fn reverse_arc(&mut self, u: usize, v: usize) -> Result<()> {
        if !self.has_arc(u, v) {
            return invalid(format!("no arc {u} -> {v} to reverse"));
        }
        self.remove_arc(u, v);
        if let Err(e) = self.add_arc(v, u) {
            self.parents[v].insert(u);
            self.children[u].insert(v);
            return Err(e);
        }
        Ok(())
    }

    pub fn has_arc(&self, u: usize, v: usize) -> bool {
        v < self.n && self.parents[v].contains(u)
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.has_arc(u, v) || self.has_arc(v, u)
    }

    /// Arcs sorted by `(parent, child)`.
    pub fn arcs(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|u| self.children[u].iter().map(move |v| (u, v)))
            .collect()
    }

    pub fn arc_count(&self) -> usize {
        self.parents.iter().map(NodeSubset::len).sum()
    }

    pub(crate) fn pa(&self, v: usize) -> &NodeSubset {
        &self.parents[v]
    }

    pub(crate) fn ch(&self, v: usize) -> &NodeSubset {
        &self.children[v]
    }

    pub fn parents(&self, v: usize) -> Result<&NodeSubset> {
        self.check(v)?;
        Ok(&self.parents[v])
    }

    pub fn children(&self, v: usize) -> Result<&NodeSubset> {
        self.check(v)?;
        Ok(&self.children[v])
    }

    /// Parents and children of `v`.
    pub fn neighbors(&self, v: usize) -> Result<NodeSubset> {
        self.check(v)?;
        Ok(self.nb(v))
    }

    pub(crate) fn nb(&self, v: usize) -> NodeSubset {
        self.parents[v].union(&self.children[v])
    }

    /// Nodes sharing a child with `v` that are not adjacent to `v`.
    pub fn spouses(&self, v: usize) -> Result<NodeSubset> {
        self.check(v)?;
        Ok(self.sp(v))
    }

    pub(crate) fn sp(&self, v: usize) -> NodeSubset {
        let mut out = NodeSubset::new();
        for c in &self.children[v] {
            for u in &self.parents[c] {
                if u != v && !self.adjacent(u, v) {
                    out.insert(u);
                }
            }
        }
        out
    }

    /// Parents, children and spouses of `t`.
    pub fn markov_blanket(&self, t: usize) -> Result<NodeSubset> {
        self.check(t)?;
        Ok(self.nb(t).union(&self.sp(t)))
    }

    /// Unshielded colliders `(s, u, t)` with `s < t`, sorted.
    pub fn v_structures(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            let pa = self.parents[u].to_vec();
            for (i, &s) in pa.iter().enumerate() {
                for &t in &pa[i + 1..] {
                    if !self.adjacent(s, t) {
                        out.push((s, u, t));
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Undirected edges `(u, v)` with `u < v`.
    pub fn skeleton(&self) -> BTreeSet<(usize, usize)> {
        self.arcs()
            .into_iter()
            .map(|(u, v)| (u.min(v), u.max(v)))
            .collect()
    }

    /// Whether a directed path leads from `from` to `to` (a node reaches itself).
    pub fn reaches(&self, from: usize, to: usize) -> bool {
        if from == to {
            return true;
        }
        let mut seen = NodeSubset::singleton(from);
        let mut stack = vec![from];
        while let Some(x) = stack.pop() {
            for c in &self.children[x] {
                if c == to {
                    return true;
                }
                if seen.insert(c) {
                    stack.push(c);
                }
            }
        }
        false
    }

    /// Kahn order, smallest available index first.
    pub fn topological_order(&self) -> Vec<usize> {
        let mut indeg: Vec<usize> = self.parents.iter().map(NodeSubset::len).collect();
        let mut ready: BTreeSet<usize> = (0..self.n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(self.n);
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for c in &self.children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        order
    }

    /// Ancestors of the members of `set`, including the members themselves.
    pub fn ancestors_of(&self, set: &NodeSubset) -> NodeSubset {
        let mut seen = set.clone();
        let mut queue: VecDeque<usize> = set.iter().collect();
        while let Some(x) = queue.pop_front() {
            for p in &self.parents[x] {
                if seen.insert(p) {
                    queue.push_back(p);
                }
            }
        }
        seen
    }

    pub fn max_indegree(&self) -> usize {
        self.parents.iter().map(NodeSubset::len).max().unwrap_or(0)
    }
}
