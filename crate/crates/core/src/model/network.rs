use super::{Dag, Variable};
use crate::error::{Error, Result};

/// A discrete Bayesian network: structure plus one CPT per node.
///
/// The CPT of node `v` has one row per parent configuration and `arity(v)`
/// columns. Parents are taken in ascending index order and the configuration
/// index is mixed-radix with the lowest-index parent as the most significant
/// digit.
#[derive(Clone, Debug, PartialEq)]
pub struct BayesianNetwork {
    variables: Vec<Variable>,
    dag: Dag,
    cpts: Vec<Vec<Vec<f64>>>,
}

const ROW_SUM_TOL: f64 = 1e-9;

impl BayesianNetwork {
    pub fn new(variables: Vec<Variable>, dag: Dag, cpts: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let n = variables.len();
        if dag.n() != n || cpts.len() != n {
            return Err(Error::Format(format!(
                "{n} variables, {} graph nodes, {} cpts",
                dag.n(),
                cpts.len()
            )));
        }
        for (v, var) in variables.iter().enumerate() {
            if var.arity < 2 {
                return Err(Error::Format(format!("variable {} has arity below 2", var.name)));
            }
            let q: usize = dag.pa(v).iter().map(|p| variables[p].arity).product();
            let cpt = &cpts[v];
            if cpt.len() != q {
                return Err(Error::Format(format!(
                    "cpt of {} has {} rows, expected {q}",
                    var.name,
                    cpt.len()
                )));
            }
            for (j, row) in cpt.iter().enumerate() {
                if row.len() != var.arity {
                    return Err(Error::Format(format!(
                        "cpt of {} row {j} has {} entries, expected {}",
                        var.name,
                        row.len(),
                        var.arity
                    )));
                }
                let sum: f64 = row.iter().sum();
                if row.iter().any(|&p| !(p >= 0.0)) || (sum - 1.0).abs() > ROW_SUM_TOL {
                    return Err(Error::Format(format!(
                        "cpt of {} row {j} is not a probability vector",
                        var.name
                    )));
                }
            }
        }
        Ok(Self {
            variables,
            dag,
            cpts,
        })
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn n(&self) -> usize {
        self.variables.len()
    }

    pub fn arity(&self, v: usize) -> usize {
        self.variables[v].arity
    }

    pub fn cpt(&self, v: usize) -> &[Vec<f64>] {
        &self.cpts[v]
    }

    /// Row index of the parent configuration of `v` under `assignment`.
    pub fn parent_config(&self, v: usize, assignment: &[usize]) -> usize {
        self.dag
            .pa(v)
            .iter()
            .fold(0, |j, p| j * self.variables[p].arity + assignment[p])
    }

    /// Probability of a full joint assignment.
    pub fn joint(&self, assignment: &[usize]) -> f64 {
        (0..self.n())
            .map(|v| self.cpts[v][self.parent_config(v, assignment)][assignment[v]])
            .product()
    }
}
