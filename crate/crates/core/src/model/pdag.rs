use std::collections::BTreeSet;

use super::{Dag, NodeSubset};
use crate::error::{invalid, Result};

/// A partially directed graph over nodes `0..n`.
///
/// Each unordered pair carries at most one edge, which is either directed or
/// undirected. Acyclicity of the directed part is not enforced here; callers
/// that need it check [`Pdag::directed_reaches`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pdag {
    n: usize,
    parents: Vec<NodeSubset>,
    children: Vec<NodeSubset>,
    undirected: Vec<NodeSubset>,
}

impl Pdag {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            parents: vec![NodeSubset::new(); n],
            children: vec![NodeSubset::new(); n],
            undirected: vec![NodeSubset::new(); n],
        }
    }

    /// Every arc of `dag` as a directed edge.
    pub fn from_dag(dag: &Dag) -> Self {
        let mut p = Self::new(dag.n());
        for (u, v) in dag.arcs() {
            p.parents[v].insert(u);
            p.children[u].insert(v);
        }
        p
    }

    pub fn from_edges(
        n: usize,
        directed: impl IntoIterator<Item = (usize, usize)>,
        undirected: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut p = Self::new(n);
        for (u, v) in directed {
            p.add_directed(u, v)?;
        }
        for (u, v) in undirected {
            p.add_undirected(u, v)?;
        }
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn check_pair(&self, u: usize, v: usize) -> Result<()> {
        if u >= self.n || v >= self.n {
            return invalid(format!("edge {u}-{v} out of range for {} nodes", self.n));
        }
        if u == v {
            return invalid(format!("self-edge on node {u}"));
        }
        Ok(())
    }

    pub fn add_directed(&mut self, u: usize, v: usize) -> Result<()> {
        self.check_pair(u, v)?;
        if self.has_directed(v, u) || self.has_undirected(u, v) {
            return invalid(format!("pair {u}-{v} already carries a different edge"));
        }
        self.parents[v].insert(u);
        self.children[u].insert(v);
        Ok(())
    }

    pub fn add_undirected(&mut self, u: usize, v: usize) -> Result<()> {
        self.check_pair(u, v)?;
        if self.has_directed(u, v) || self.has_directed(v, u) {
            return invalid(format!("pair {u}-{v} already carries a directed edge"));
        }
        self.undirected[u].insert(v);
        self.undirected[v].insert(u);
        Ok(())
    }

    /// Turns the undirected edge `u - v` into `u -> v`.
    pub fn orient(&mut self, u: usize, v: usize) -> Result<()> {
        if !self.has_undirected(u, v) {
            return invalid(format!("no undirected edge {u}-{v} to orient"));
        }
        self.undirected[u].remove(v);
        self.undirected[v].remove(u);
        self.parents[v].insert(u);
        self.children[u].insert(v);
        Ok(())
    }

    /// Drops whatever edge joins `u` and `v`.
    pub fn remove_edge(&mut self, u: usize, v: usize) {
        if u >= self.n || v >= self.n {
            return;
        }
        self.undirected[u].remove(v);
        self.undirected[v].remove(u);
        self.parents[v].remove(u);
        self.children[u].remove(v);
        self.parents[u].remove(v);
        self.children[v].remove(u);
    }

    pub fn has_directed(&self, u: usize, v: usize) -> bool {
        v < self.n && self.parents[v].contains(u)
    }

    pub fn has_undirected(&self, u: usize, v: usize) -> bool {
        u < self.n && self.undirected[u].contains(v)
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.has_undirected(u, v) || self.has_directed(u, v) || self.has_directed(v, u)
    }

    /// Tails of directed edges into `v`.
    pub fn parents(&self, v: usize) -> &NodeSubset {
        &self.parents[v]
    }

    pub fn children(&self, v: usize) -> &NodeSubset {
        &self.children[v]
    }

    pub fn undirected_neighbors(&self, v: usize) -> &NodeSubset {
        &self.undirected[v]
    }

    /// All nodes joined to `v` by any edge.
    pub fn adjacents(&self, v: usize) -> NodeSubset {
        self.parents[v]
            .union(&self.children[v])
            .union(&self.undirected[v])
    }

    /// Directed edges sorted by `(tail, head)`.
    pub fn directed_arcs(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|u| self.children[u].iter().map(move |v| (u, v)))
            .collect()
    }

    /// Undirected edges `(u, v)` with `u < v`, sorted.
    pub fn undirected_edges(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|u| self.undirected[u].iter().filter(move |&v| v > u).map(move |v| (u, v)))
            .collect()
    }

    pub fn skeleton(&self) -> BTreeSet<(usize, usize)> {
        self.directed_arcs()
            .into_iter()
            .map(|(u, v)| (u.min(v), u.max(v)))
            .chain(self.undirected_edges())
            .collect()
    }

    pub fn is_fully_directed(&self) -> bool {
        self.undirected.iter().all(NodeSubset::is_empty)
    }

    /// Whether a path of directed edges leads from `from` to `to`.
    pub fn directed_reaches(&self, from: usize, to: usize) -> bool {
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

    pub fn directed_part_is_acyclic(&self) -> bool {
        let mut indeg: Vec<usize> = self.parents.iter().map(NodeSubset::len).collect();
        let mut stack: Vec<usize> = (0..self.n).filter(|&v| indeg[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = stack.pop() {
            seen += 1;
            for c in &self.children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    stack.push(c);
                }
            }
        }
        seen == self.n
    }

    /// Converts a fully directed, acyclic PDAG into a [`Dag`].
    pub fn to_dag(&self) -> Result<Dag> {
        if !self.is_fully_directed() {
            return invalid("pdag still has undirected edges");
        }
        Dag::from_arcs(self.n, self.directed_arcs())
    }
}
