//! File formats: networks as JSON, datasets as CSV with a header row.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BayesianNetwork, Dag, Dataset, Variable, MAX_ARITY};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    variables: Vec<Variable>,
    arcs: Vec<[usize; 2]>,
    cpts: BTreeMap<String, Vec<Vec<f64>>>,
}

/// Parses a network from its JSON form.
pub fn network_from_json(text: &str) -> Result<BayesianNetwork> {
    let file: NetworkFile = serde_json::from_str(text)?;
    let n = file.variables.len();
    let dag = Dag::from_arcs(n, file.arcs.iter().map(|a| (a[0], a[1])))
        .map_err(|e| Error::Format(format!("network arcs: {e}")))?;
    let mut cpts = vec![None; n];
    for (key, table) in file.cpts {
        let v: usize = key
            .parse()
            .ok()
            .filter(|&v| v < n)
            .ok_or_else(|| Error::Format(format!("cpt key {key:?} is not a node index")))?;
        cpts[v] = Some(table);
    }
    let cpts = cpts
        .into_iter()
        .enumerate()
        .map(|(v, c)| c.ok_or_else(|| Error::Format(format!("missing cpt for node {v}"))))
        .collect::<Result<Vec<_>>>()?;
    BayesianNetwork::new(file.variables, dag, cpts)
}

pub fn network_to_json(bn: &BayesianNetwork) -> String {
    let file = NetworkFile {
        variables: bn.variables().to_vec(),
        arcs: bn.dag().arcs().into_iter().map(|(u, v)| [u, v]).collect(),
        cpts: (0..bn.n()).map(|v| (v.to_string(), bn.cpt(v).to_vec())).collect(),
    };
    serde_json::to_string_pretty(&file).expect("network serializes") + "\n"
}

pub fn read_network(path: &Path) -> Result<BayesianNetwork> {
    network_from_json(&std::fs::read_to_string(path)?)
}

pub fn write_network(bn: &BayesianNetwork, path: &Path) -> Result<()> {
    Ok(std::fs::write(path, network_to_json(bn))?)
}

/// Header and integer columns of a CSV table, before arities are known.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawTable {
    pub names: Vec<String>,
    pub columns: Vec<Vec<u16>>,
}

/// Reads a CSV table, rejecting duplicate names and non-integer cells.
/// Rows and columns in messages are 1-based, counting data rows only.
pub fn read_table(reader: impl Read) -> Result<RawTable> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let names: Vec<String> = rdr.headers()?.iter().map(|s| s.trim().to_string()).collect();
    let mut seen = HashMap::new();
    for (i, name) in names.iter().enumerate() {
        if name.is_empty() {
            return Err(Error::Format(format!("column {} has an empty name", i + 1)));
        }
        if let Some(j) = seen.insert(name.as_str(), i) {
            return Err(Error::Format(format!(
                "duplicate variable name {name:?} in columns {} and {}",
                j + 1,
                i + 1
            )));
        }
    }
    let mut columns = vec![Vec::new(); names.len()];
    for (r, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Format(format!("row {}: {e}", r + 1)))?;
        for (c, cell) in record.iter().enumerate() {
            let value: u16 = cell.trim().parse().map_err(|_| {
                Error::Format(format!("row {}, column {}: {cell:?} is not a value in 0..{MAX_ARITY}", r + 1, names[c]))
            })?;
            columns[c].push(value);
        }
    }
    Ok(RawTable { names, columns })
}

impl RawTable {
    /// Dataset with arities inferred as one above the largest value, at
    /// least two.
    pub fn infer(self) -> Result<Dataset> {
        let variables = self
            .names
            .into_iter()
            .zip(&self.columns)
            .map(|(name, col)| {
                let arity = col.iter().map(|&x| x as usize + 1).max().unwrap_or(0).max(2);
                Variable::new(name, arity)
            })
            .collect();
        Dataset::new(variables, self.columns)
    }

    /// Dataset laid out by `variables`, matching columns by name.
    pub fn conform(self, variables: &[Variable]) -> Result<Dataset> {
        let index: HashMap<&str, usize> = self.names.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        if self.names.len() != variables.len() {
            return Err(Error::Format(format!(
                "data has {} columns but the network has {} variables",
                self.names.len(),
                variables.len()
            )));
        }
        let mut columns = Vec::with_capacity(variables.len());
        for var in variables {
            let &c = index
                .get(var.name.as_str())
                .ok_or_else(|| Error::Format(format!("data has no column named {:?}", var.name)))?;
            if let Some(r) = self.columns[c].iter().position(|&x| x as usize >= var.arity) {
                return Err(Error::Format(format!(
                    "row {}, column {}: value {} outside 0..{}",
                    r + 1,
                    var.name,
                    self.columns[c][r],
                    var.arity
                )));
            }
            columns.push(self.columns[c].clone());
        }
        Dataset::new(variables.to_vec(), columns)
    }
}

pub fn read_dataset(path: &Path, variables: Option<&[Variable]>) -> Result<Dataset> {
    let table = read_table(std::fs::File::open(path)?)?;
    match variables {
        Some(vars) => table.conform(vars),
        None => table.infer(),
    }
}

pub fn write_dataset(data: &Dataset, writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(data.variables().iter().map(|v| v.name.as_str()))?;
    let mut record = Vec::with_capacity(data.n_vars());
    for r in 0..data.rows() {
        record.clear();
        record.extend((0..data.n_vars()).map(|v| data.column(v)[r].to_string()));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// `x` rounded to 12 significant digits.
pub fn round_sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// Rounds every float in a JSON tree to 12 significant digits.
pub fn round_json_floats(value: &mut serde_json::Value) {
    match value {
        serde_json::Value::Number(num) if num.is_f64() => {
            if let Some(n) = num.as_f64().and_then(|x| serde_json::Number::from_f64(round_sig12(x))) {
                *num = n;
            }
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(round_json_floats),
        serde_json::Value::Object(map) => map.values_mut().for_each(round_json_floats),
        _ => {}
    }
}
