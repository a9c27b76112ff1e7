//! Experience-sampling dataset ingestion and normalization.
//!
//! Input is a UTF-8 CSV with a header row, an ID column, a diagnosis column
//! (`GAD`, `MDD` or `COMORBID`) and one column per symptom. Rows are grouped
//! by ID in order of first appearance. A row whose symptom cells contain an
//! empty value or the literal `NA` is dropped; surviving rows keep their
//! relative order, and `time_index` is the row position within the
//! individual after dropping.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::stats::{mean, sample_sd};
use crate::{Error, Result};

/// Display names of the 22 symptom items of the experience-sampling survey.
pub const SYMPTOM_ITEMS: [&str; 22] = [
    "Felt energetic",
    "Felt enthusiastic",
    "Felt content",
    "Felt irritable",
    "Felt restless",
    "Felt worried",
    "Felt worthless or guilty",
    "Felt frightened or afraid",
    "Loss of interest or pleasure",
    "Felt angry",
    "Procrastinated",
    "Felt hopeless",
    "Felt down or depressed",
    "Felt positive overall",
    "Felt fatigued or low energy",
    "Experienced muscle tension",
    "Had difficulty concentrating",
    "Felt accepted or supported",
    "Felt threatened, judged, or intimidated",
    "Dwelled on the past",
    "Avoided activities",
    "Avoided people",
];

/// lower_snake_case identifier for a display name
/// (`"Felt threatened, judged, or intimidated"` → `felt_threatened_judged_or_intimidated`).
pub fn canonical_symptom_name(display: &str) -> String {
    let mut out = String::with_capacity(display.len());
    let mut pending_sep = false;
    for c in display.chars() {
        if c.is_alphanumeric() {
            if pending_sep && !out.is_empty() {
                out.push('_');
            }
            pending_sep = false;
            out.extend(c.to_lowercase());
        } else {
            pending_sep = true;
        }
    }
    out
}

/// A T×N real matrix with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    columns: Vec<Vec<f64>>,
    var_names: Vec<String>,
    time_index: Vec<usize>,
}

impl TimeSeries {
    /// Build from column vectors. All columns must have the same length and
    /// contain only finite values; names must be unique.
    pub fn from_columns(var_names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if var_names.is_empty() {
            return Err(Error::data("a time series needs at least one variable"));
        }
        if var_names.len() != columns.len() {
            return Err(Error::data(format!(
                "{} names for {} columns",
                var_names.len(),
                columns.len()
            )));
        }
        let mut seen = HashSet::new();
        for name in &var_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::data(format!("duplicate variable name '{name}'")));
            }
        }
        let t = columns[0].len();
        for (name, col) in var_names.iter().zip(&columns) {
            if col.len() != t {
                return Err(Error::data(format!("column '{name}' has a different length")));
            }
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::data(format!("column '{name}' has non-finite values")));
            }
        }
        Ok(TimeSeries {
            columns,
            var_names,
            time_index: (0..t).collect(),
        })
    }

    pub fn from_rows(var_names: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let n = var_names.len();
        let mut columns = vec![Vec::with_capacity(rows.len()); n];
        for (t, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::data(format!("row {t} has {} values, expected {n}", row.len())));
            }
            for (c, v) in columns.iter_mut().zip(row) {
                c.push(*v);
            }
        }
        Self::from_columns(var_names, columns)
    }

    pub fn n_vars(&self) -> usize {
        self.columns.len()
    }

    pub fn len(&self) -> usize {
        self.time_index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time_index.is_empty()
    }

    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    pub fn time_index(&self) -> &[usize] {
        &self.time_index
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn row(&self, t: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[t]).collect()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.var_names.iter().position(|n| n == name)
    }

    fn map_columns(&self, columns: Vec<Vec<f64>>) -> TimeSeries {
        TimeSeries {
            columns,
            var_names: self.var_names.clone(),
            time_index: self.time_index.clone(),
        }
    }

    /// Read a plain numeric CSV (header = variable names).
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let names: Vec<String> = rdr.headers()?.iter().map(|s| s.trim().to_string()).collect();
        if names.is_empty() || names.iter().all(|s| s.is_empty()) {
            return Err(Error::data("no header"));
        }
        let mut rows = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|cell| {
                    cell.trim().parse::<f64>().map_err(|_| {
                        Error::data(format!("row {}: cannot parse '{cell}' as a number", line + 1))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Self::from_rows(names, &rows)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.var_names)?;
        for t in 0..self.len() {
            w.write_record(self.columns.iter().map(|c| format!("{}", c[t])))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Primary diagnosis category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Diagnosis {
    #[serde(rename = "GAD")]
    Gad,
    #[serde(rename = "MDD")]
    Mdd,
    #[serde(rename = "COMORBID")]
    Comorbid,
}

impl Diagnosis {
    pub const ALL: [Diagnosis; 3] = [Diagnosis::Gad, Diagnosis::Mdd, Diagnosis::Comorbid];

    pub fn as_str(self) -> &'static str {
        match self {
            Diagnosis::Gad => "GAD",
            Diagnosis::Mdd => "MDD",
            Diagnosis::Comorbid => "COMORBID",
        }
    }
}

impl fmt::Display for Diagnosis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Diagnosis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "GAD" => Ok(Diagnosis::Gad),
            "MDD" => Ok(Diagnosis::Mdd),
            "COMORBID" => Ok(Diagnosis::Comorbid),
            other => Err(Error::data(format!("unknown diagnosis label '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub id: String,
    pub diagnosis: Diagnosis,
    pub series: TimeSeries,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub individuals: Vec<Individual>,
}

/// Which columns of the input CSV hold what.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Schema {
    pub id_column: String,
    pub diagnosis_column: String,
    /// Symptom columns to keep, in output order. `None` keeps every other column.
    pub symptom_columns: Option<Vec<String>>,
    /// Source header → output variable name.
    pub rename: BTreeMap<String, String>,
}

impl Default for Schema {
    fn default() -> Self {
        Schema {
            id_column: "id".into(),
            diagnosis_column: "diagnosis".into(),
            symptom_columns: None,
            rename: BTreeMap::new(),
        }
    }
}

fn is_missing(cell: &str) -> bool {
    let c = cell.trim();
    c.is_empty() || c == "NA"
}

/// Load the experience-sampling CSV at `path`.
pub fn load_dataset(path: impl AsRef<Path>, schema: &Schema) -> Result<Dataset> {
    read_dataset(std::fs::File::open(path)?, schema)
}

pub fn read_dataset<R: Read>(reader: R, schema: &Schema) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .from_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        Some(h) => h?,
        None => return Err(Error::data("no header")),
    };
    let header: Vec<String> = header.iter().map(|s| s.trim().to_string()).collect();
    let mut positions = HashMap::new();
    for (i, h) in header.iter().enumerate() {
        if positions.insert(h.as_str(), i).is_some() {
            return Err(Error::data(format!("duplicate header '{h}'")));
        }
    }
    let find = |name: &str| {
        positions
            .get(name)
            .copied()
            .ok_or_else(|| Error::data(format!("missing header '{name}'")))
    };
    let id_pos = find(&schema.id_column)?;
    let diag_pos = find(&schema.diagnosis_column)?;
    let symptom_pos: Vec<usize> = match &schema.symptom_columns {
        Some(cols) => cols.iter().map(|c| find(c)).collect::<Result<_>>()?,
        None => (0..header.len()).filter(|&i| i != id_pos && i != diag_pos).collect(),
    };
    if symptom_pos.is_empty() {
        return Err(Error::data("no symptom columns"));
    }
    let var_names: Vec<String> = symptom_pos
        .iter()
        .map(|&i| schema.rename.get(&header[i]).cloned().unwrap_or_else(|| header[i].clone()))
        .collect();

    struct Acc {
        diagnosis: Diagnosis,
        rows: Vec<Vec<f64>>,
    }
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, Acc> = HashMap::new();
    for (line, rec) in records.enumerate() {
        let rec = rec?;
        let line = line + 2;
        let id = rec.get(id_pos).unwrap_or("").trim().to_string();
        if id.is_empty() {
            return Err(Error::data(format!("line {line}: empty id")));
        }
        let diagnosis: Diagnosis = rec
            .get(diag_pos)
            .unwrap_or("")
            .parse()
            .map_err(|e: Error| Error::data(format!("line {line}: {e}")))?;
        let acc = match groups.get_mut(&id) {
            Some(acc) => {
                if acc.diagnosis != diagnosis {
                    return Err(Error::data(format!(
                        "line {line}: individual '{id}' has conflicting diagnoses"
                    )));
                }
                acc
            }
            None => {
                order.push(id.clone());
                groups.entry(id.clone()).or_insert(Acc {
                    diagnosis,
                    rows: Vec::new(),
                })
            }
        };
        let cells: Vec<&str> = symptom_pos.iter().map(|&i| rec.get(i).unwrap_or("")).collect();
        if cells.iter().any(|c| is_missing(c)) {
            continue;
        }
        let row = cells
            .iter()
            .map(|c| {
                c.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::data(format!("line {line}: cannot parse '{c}'")))
            })
            .collect::<Result<Vec<f64>>>()?;
        acc.rows.push(row);
    }
    let individuals = order
        .into_iter()
        .map(|id| {
            let acc = groups.remove(&id).expect("grouped id");
            let series = if acc.rows.is_empty() {
                TimeSeries::from_columns(var_names.clone(), vec![Vec::new(); var_names.len()])?
            } else {
                TimeSeries::from_rows(var_names.clone(), &acc.rows)?
            };
            Ok(Individual {
                id,
                diagnosis: acc.diagnosis,
                series,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset { individuals })
}

fn zscore_column(name: &str, col: &[f64], m: f64, sd: f64) -> Result<Vec<f64>> {
    if !(sd > 0.0) {
        return Err(Error::ConstantColumn(name.to_string()));
    }
    Ok(col.iter().map(|v| (v - m) / sd).collect())
}

/// Column-wise z-scoring with the sample (n-1) standard deviation.
///
/// A constant column is an error naming the column.
pub fn zscore_normalize(ts: &TimeSeries) -> Result<TimeSeries> {
    if ts.len() < 2 {
        return Err(Error::data("z-scoring needs at least two rows"));
    }
    let cols = ts
        .var_names
        .iter()
        .zip(&ts.columns)
        .map(|(name, c)| zscore_column(name, c, mean(c), sample_sd(c)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ts.map_columns(cols))
}

/// Whether normalization statistics are computed per individual or over
/// the pooled rows of all individuals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormScope {
    #[default]
    Individual,
    Pooled,
}

impl FromStr for NormScope {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "individual" => Ok(NormScope::Individual),
            "pooled" => Ok(NormScope::Pooled),
            other => Err(Error::config(format!("unknown normalization scope '{other}'"))),
        }
    }
}

impl Dataset {
    pub fn total_rows(&self) -> usize {
        self.individuals.iter().map(|i| i.series.len()).sum()
    }

    pub fn var_names(&self) -> &[String] {
        self.individuals
            .first()
            .map(|i| i.series.var_names())
            .unwrap_or(&[])
    }

    pub fn get(&self, id: &str) -> Option<&Individual> {
        self.individuals.iter().find(|i| i.id == id)
    }

    pub fn group(&self, diagnosis: Diagnosis) -> impl Iterator<Item = &Individual> {
        self.individuals.iter().filter(move |i| i.diagnosis == diagnosis)
    }

    /// Drop individuals with fewer than `min_rows` rows.
    pub fn retain_min_rows(&mut self, min_rows: usize) -> Vec<String> {
        let mut dropped = Vec::new();
        self.individuals.retain(|i| {
            let keep = i.series.len() >= min_rows;
            if !keep {
                dropped.push(i.id.clone());
            }
            keep
        });
        dropped
    }

    pub fn normalize(&self, scope: NormScope) -> Result<Dataset> {
        let individuals = match scope {
            NormScope::Individual => self
                .individuals
                .iter()
                .map(|ind| {
                    let series = zscore_normalize(&ind.series).map_err(|e| match e {
                        Error::ConstantColumn(c) => {
                            Error::ConstantColumn(format!("{c}' of individual '{}", ind.id))
                        }
                        other => other,
                    })?;
                    Ok(Individual { series, ..ind.clone() })
                })
                .collect::<Result<Vec<_>>>()?,
            NormScope::Pooled => {
                let names = self.var_names().to_vec();
                let stats: Vec<(f64, f64)> = (0..names.len())
                    .map(|j| {
                        let pooled: Vec<f64> = self
                            .individuals
                            .iter()
                            .flat_map(|i| i.series.column(j).iter().copied())
                            .collect();
                        (mean(&pooled), sample_sd(&pooled))
                    })
                    .collect();
                self.individuals
                    .iter()
                    .map(|ind| {
                        let cols = names
                            .iter()
                            .enumerate()
                            .map(|(j, name)| {
                                zscore_column(name, ind.series.column(j), stats[j].0, stats[j].1)
                            })
                            .collect::<Result<Vec<_>>>()?;
                        Ok(Individual {
                            series: ind.series.map_columns(cols),
                            ..ind.clone()
                        })
                    })
                    .collect::<Result<Vec<_>>>()?
            }
        };
        Ok(Dataset { individuals })
    }
}
