use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A categorical random variable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub arity: usize,
}

impl Variable {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        Self {
            name: name.into(),
            arity,
        }
    }
}

/// Column-major table of categorical observations.
///
/// Variable `v` occupies column `v`; every cell of that column lies in
/// `0..arity(v)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    variables: Vec<Variable>,
    rows: usize,
    columns: Vec<Vec<u16>>,
}

/// Values are stored as `u16`.
pub const MAX_ARITY: usize = u16::MAX as usize + 1;

impl Dataset {
    pub fn new(variables: Vec<Variable>, columns: Vec<Vec<u16>>) -> Result<Self> {
        if variables.len() != columns.len() {
            return Err(Error::Format(format!(
                "{} variables but {} columns",
                variables.len(),
                columns.len()
            )));
        }
        let rows = columns.first().map_or(0, Vec::len);
        for (v, (var, col)) in variables.iter().zip(&columns).enumerate() {
            if var.arity < 2 || var.arity > MAX_ARITY {
                return Err(Error::Format(format!(
                    "variable {} has arity {}, expected 2..={MAX_ARITY}",
                    var.name, var.arity
                )));
            }
            if col.len() != rows {
                return Err(Error::Format(format!(
                    "column {v} has {} rows, expected {rows}",
                    col.len()
                )));
            }
            if let Some(row) = col.iter().position(|&x| x as usize >= var.arity) {
                return Err(Error::Format(format!(
                    "row {row}, column {}: value {} outside 0..{}",
                    var.name, col[row], var.arity
                )));
            }
        }
        Ok(Self {
            variables,
            rows,
            columns,
        })
    }

    /// Binary variables named `X0, X1, ...`, arity inferred as at least two.
    pub fn from_columns(columns: Vec<Vec<u16>>) -> Result<Self> {
        let variables = columns
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let arity = c.iter().map(|&x| x as usize + 1).max().unwrap_or(0).max(2);
                Variable::new(format!("X{i}"), arity)
            })
            .collect();
        Self::new(variables, columns)
    }

    pub fn n_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn arity(&self, v: usize) -> usize {
        self.variables[v].arity
    }

    pub fn name(&self, v: usize) -> &str {
        &self.variables[v].name
    }

    pub fn column(&self, v: usize) -> &[u16] {
        &self.columns[v]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    /// Rows reordered by `perm`; `perm[i]` is the source row of row `i`.
    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        let columns = self
            .columns
            .iter()
            .map(|c| perm.iter().map(|&r| c[r]).collect())
            .collect();
        Self {
            variables: self.variables.clone(),
            rows: perm.len(),
            columns,
        }
    }

    /// The first `m` rows.
    pub fn head(&self, m: usize) -> Self {
        let m = m.min(self.rows);
        Self {
            variables: self.variables.clone(),
            rows: m,
            columns: self.columns.iter().map(|c| c[..m].to_vec()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range_cells() {
        let err = Dataset::new(vec![Variable::new("a", 2)], vec![vec![0, 1, 2]]).unwrap_err();
        assert!(err.to_string().contains("row 2"));
        assert!(Dataset::new(vec![Variable::new("a", 1)], vec![vec![0]]).is_err());
        assert!(Dataset::new(
            vec![Variable::new("a", 2), Variable::new("b", 2)],
            vec![vec![0, 1], vec![0]]
        )
        .is_err());
    }

    #[test]
    fn infers_arities() {
        let d = Dataset::from_columns(vec![vec![0, 0], vec![0, 3]]).unwrap();
        assert_eq!(d.arity(0), 2);
        assert_eq!(d.arity(1), 4);
        assert_eq!(d.index_of("X1"), Some(1));
        assert_eq!(d.head(1).column(1), &[0]);
    }
}
