//! Complexity features of symptom time series.
//!
//! Nineteen univariate metrics are computed per variable and ten
//! cross-recurrence metrics per variable pair, for every configuration of a
//! [`ParamGrid`]. Each (individual, configuration) becomes one row of a
//! [`FeatureMatrix`].

mod entropy;
mod fractal;
mod recurrence;

pub use entropy::{permutation_entropy, regularity_entropy, zero_crossings, RegularityKind};
pub use fractal::{
    fractal_dimension, scaling_exponent, FractalKind, ScalingKind, MIN_CORRELATION_LEN, MIN_FRACTAL_LEN,
    MIN_SCALING_LEN,
};
pub use recurrence::{recurrence_plot, rqa, RadiusPolicy, RecurrencePlot, RecurrenceResult, RqaResult};

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::Path;

use log::{debug, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataio::{Dataset, Diagnosis, Individual};
use crate::{Error, Result};

pub const UNIVARIATE_METRICS: [&str; 19] = [
    "zero_crossings",
    "perm_entropy",
    "approx_entropy",
    "sample_entropy",
    "hurst",
    "dfa",
    "corr_dim",
    "higuchi",
    "petrosian",
    "rr",
    "det",
    "lam",
    "tt",
    "l_max",
    "v_max",
    "div",
    "entr",
    "l_mean",
    "v_mean",
];

/// Which variable pairs get cross-recurrence features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairMode {
    /// Every `(a, b)` with `a != b`.
    #[default]
    Ordered,
    /// Every `(a, b)` with `a < b`.
    Unordered,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ParamGrid {
    /// Embedding dimension (also permutation order and template length).
    pub m: Vec<usize>,
    pub delay: Vec<usize>,
    /// Recurrence radius as a fraction of the largest pairwise distance.
    pub q: Vec<f64>,
    /// Entropy tolerance as a multiple of the series SD.
    pub r: Vec<f64>,
    pub l_min: usize,
    pub v_min: usize,
    pub k_max: usize,
    pub pairs: PairMode,
}

impl Default for ParamGrid {
    fn default() -> Self {
        ParamGrid {
            m: vec![2, 3],
            delay: vec![1, 2],
            q: vec![0.10, 0.15, 0.20],
            r: vec![0.15, 0.2, 0.25],
            l_min: 2,
            v_min: 2,
            k_max: 8,
            pairs: PairMode::Ordered,
        }
    }
}

/// One point of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamConfig {
    pub id: usize,
    pub m: usize,
    pub delay: usize,
    pub q: f64,
    pub r: f64,
    pub l_min: usize,
    pub v_min: usize,
    pub k_max: usize,
}

impl ParamGrid {
    /// Cartesian product in `m`, `delay`, `q`, `r` order.
    pub fn configs(&self) -> Result<Vec<ParamConfig>> {
        let mut out = Vec::new();
        for &m in &self.m {
            for &delay in &self.delay {
                for &q in &self.q {
                    for &r in &self.r {
                        out.push(ParamConfig {
                            id: out.len(),
                            m,
                            delay,
                            q,
                            r,
                            l_min: self.l_min,
                            v_min: self.v_min,
                            k_max: self.k_max,
                        });
                    }
                }
            }
        }
        if out.is_empty() {
            return Err(Error::config("parameter grid is empty"));
        }
        Ok(out)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn pairs(&self, n_vars: usize) -> Vec<(usize, usize)> {
        (0..n_vars)
            .flat_map(|a| (0..n_vars).map(move |b| (a, b)))
            .filter(|&(a, b)| match self.pairs {
                PairMode::Ordered => a != b,
                PairMode::Unordered => a < b,
            })
            .collect()
    }
}

/// Column names in extraction order.
pub fn feature_names(var_names: &[String], grid: &ParamGrid) -> Vec<String> {
    let mut names: Vec<String> = var_names
        .iter()
        .flat_map(|v| UNIVARIATE_METRICS.iter().map(move |m| format!("{m}__{v}")))
        .collect();
    for (a, b) in grid.pairs(var_names.len()) {
        for m in RqaResult::NAMES {
            names.push(format!("cross_{m}__{}__{}", var_names[a], var_names[b]));
        }
    }
    names
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub id: String,
    pub config_id: usize,
    pub diagnosis: Option<Diagnosis>,
    pub values: Vec<f64>,
}

/// Rows of (individual, configuration) by named feature columns.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureMatrix {
    pub columns: Vec<String>,
    pub rows: Vec<FeatureRow>,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Keep the given columns, in the given order.
    pub fn select(&self, cols: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            columns: cols.iter().map(|&c| self.columns[c].clone()).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| FeatureRow {
                    values: cols.iter().map(|&c| r.values[c]).collect(),
                    ..r.clone()
                })
                .collect(),
        }
    }

    /// Keep rows for which `keep` holds.
    pub fn filter_rows(&self, keep: impl Fn(&FeatureRow) -> bool) -> FeatureMatrix {
        FeatureMatrix {
            columns: self.columns.clone(),
            rows: self.rows.iter().filter(|r| keep(r)).cloned().collect(),
        }
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["id".to_string(), "config_id".into(), "diagnosis".into()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![
                r.id.clone(),
                r.config_id.to_string(),
                r.diagnosis.map(|d| d.as_str().to_string()).unwrap_or_default(),
            ];
            rec.extend(r.values.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let header = rdr.headers()?.clone();
        if header.len() < 3 || &header[0] != "id" || &header[1] != "config_id" || &header[2] != "diagnosis" {
            return Err(Error::data("feature CSV must start with id, config_id, diagnosis"));
        }
        let columns: Vec<String> = header.iter().skip(3).map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let parse = |s: &str| -> Result<f64> {
                let v: f64 = s
                    .trim()
                    .parse()
                    .map_err(|_| Error::data(format!("non-numeric feature value '{s}'")))?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::data("non-finite feature value"))
                }
            };
            let diagnosis = match rec[2].trim() {
                "" => None,
                s => Some(s.parse()?),
            };
            rows.push(FeatureRow {
                id: rec[0].to_string(),
                config_id: rec[1]
                    .trim()
                    .parse()
                    .map_err(|_| Error::data("config_id must be an integer"))?,
                diagnosis,
                values: rec.iter().skip(3).map(parse).collect::<Result<_>>()?,
            });
        }
        Ok(FeatureMatrix { columns, rows })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

/// Map a metric outcome to a cell: too-short input skips the cell,
/// degenerate input (e.g. a constant series) yields 0.
fn cell(name: &str, r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        Ok(_) => {
            warn!("{name}: non-finite value replaced by 0");
            Ok(Some(0.0))
        }
        Err(Error::Data(msg)) => {
            debug!("{name}: skipped ({msg})");
            Ok(None)
        }
        Err(Error::Numerical(msg)) => {
            warn!("{name}: degenerate input ({msg}), value set to 0");
            Ok(Some(0.0))
        }
        Err(e) => Err(e),
    }
}

fn rqa_cells(name: &str, x: &[f64], y: Option<&[f64]>, c: &ParamConfig) -> Result<Vec<Option<f64>>> {
    match recurrence_plot(x, y, c.m, c.delay, RadiusPolicy::FractionOfMax(c.q)) {
        Ok(rp) => Ok(rqa(&rp.plot, c.l_min, c.v_min).values().iter().map(|&v| Some(v)).collect()),
        Err(e) => {
            let v = cell(name, Err(e))?;
            Ok(vec![v; 10])
        }
    }
}

/// The 19 univariate cells of one series for every configuration.
fn univariate(name: &str, x: &[f64], configs: &[ParamConfig]) -> Result<Vec<Vec<Option<f64>>>> {
    let zc = Some(zero_crossings(x) as f64);
    let hurst = cell(name, scaling_exponent(x, ScalingKind::HurstRs))?;
    let dfa = cell(name, scaling_exponent(x, ScalingKind::Dfa))?;
    let petrosian = cell(name, fractal_dimension(x, FractalKind::Petrosian))?;
    let mut higuchi = BTreeMap::new();
    let mut embedded: BTreeMap<(usize, usize), (Option<f64>, Option<f64>)> = BTreeMap::new();
    let mut entropies: BTreeMap<(usize, u64), (Option<f64>, Option<f64>)> = BTreeMap::new();
    let mut recurrence: BTreeMap<(usize, usize, u64), Vec<Option<f64>>> = BTreeMap::new();
    let mut out = Vec::with_capacity(configs.len());
    for c in configs {
        let hg = match higuchi.get(&c.k_max) {
            Some(&v) => v,
            None => {
                let v = cell(name, fractal_dimension(x, FractalKind::Higuchi { k_max: c.k_max }))?;
                higuchi.insert(c.k_max, v);
                v
            }
        };
        let (pe, cd) = match embedded.get(&(c.m, c.delay)) {
            Some(&v) => v,
            None => {
                let v = (
                    cell(name, permutation_entropy(x, c.m, c.delay))?,
                    cell(name, fractal_dimension(x, FractalKind::Correlation { m: c.m, delay: c.delay }))?,
                );
                embedded.insert((c.m, c.delay), v);
                v
            }
        };
        let (ap, se) = match entropies.get(&(c.m, c.r.to_bits())) {
            Some(&v) => v,
            None => {
                let v = (
                    cell(name, regularity_entropy(x, RegularityKind::Approximate, c.m, c.r))?,
                    cell(name, regularity_entropy(x, RegularityKind::Sample, c.m, c.r))?,
                );
                entropies.insert((c.m, c.r.to_bits()), v);
                v
            }
        };
        let key = (c.m, c.delay, c.q.to_bits());
        if !recurrence.contains_key(&key) {
            recurrence.insert(key, rqa_cells(name, x, None, c)?);
        }
        let mut row = vec![zc, pe, ap, se, hurst, dfa, cd, hg, petrosian];
        row.extend(recurrence[&key].iter().copied());
        out.push(row);
    }
    Ok(out)
}

fn cross(name: &str, x: &[f64], y: &[f64], configs: &[ParamConfig]) -> Result<Vec<Vec<Option<f64>>>> {
    let mut memo: BTreeMap<(usize, usize, u64), Vec<Option<f64>>> = BTreeMap::new();
    configs
        .iter()
        .map(|c| {
            let key = (c.m, c.delay, c.q.to_bits());
            if !memo.contains_key(&key) {
                memo.insert(key, rqa_cells(name, x, Some(y), c)?);
            }
            Ok(memo[&key].clone())
        })
        .collect()
}

/// Cells for one individual; `None` marks a skipped (too short) cell.
fn extract_cells(ind: &Individual, grid: &ParamGrid) -> Result<(Vec<ParamConfig>, Vec<Vec<Option<f64>>>)> {
    let configs = grid.configs()?;
    let ts = &ind.series;
    let names = ts.var_names();
    let uni = (0..ts.n_vars())
        .into_par_iter()
        .map(|j| univariate(&format!("{}/{}", ind.id, names[j]), ts.column(j), &configs))
        .collect::<Result<Vec<_>>>()?;
    let pairs = grid.pairs(ts.n_vars());
    let crs = pairs
        .par_iter()
        .map(|&(a, b)| {
            let name = format!("{}/{}x{}", ind.id, names[a], names[b]);
            cross(&name, ts.column(a), ts.column(b), &configs)
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = (0..configs.len())
        .map(|k| {
            uni.iter()
                .chain(&crs)
                .flat_map(|block| block[k].iter().copied())
                .collect()
        })
        .collect();
    Ok((configs, rows))
}

fn assemble(
    columns: &[String],
    per_ind: Vec<(&Individual, Vec<ParamConfig>, Vec<Vec<Option<f64>>>)>,
) -> FeatureMatrix {
    let keep: Vec<usize> = (0..columns.len())
        .filter(|&c| per_ind.iter().all(|(_, _, rows)| rows.iter().all(|r| r[c].is_some())))
        .collect();
    let dropped: BTreeSet<&str> = (0..columns.len())
        .filter(|c| !keep.contains(c))
        .map(|c| columns[c].as_str())
        .collect();
    if !dropped.is_empty() {
        warn!(
            "{} feature columns dropped because some series are too short (e.g. {})",
            dropped.len(),
            dropped.iter().next().copied().unwrap_or_default()
        );
    }
    let rows = per_ind
        .into_iter()
        .flat_map(|(ind, configs, rows)| {
            let keep = &keep;
            configs.into_iter().zip(rows).map(move |(c, r)| FeatureRow {
                id: ind.id.clone(),
                config_id: c.id,
                diagnosis: Some(ind.diagnosis),
                values: keep.iter().map(|&k| r[k].expect("kept cells are present")).collect(),
            })
        })
        .collect();
    FeatureMatrix {
        columns: keep.iter().map(|&k| columns[k].clone()).collect(),
        rows,
    }
}

/// Feature rows of one individual, one per grid configuration.
///
/// Columns that cannot be computed for this series length are dropped.
pub fn extract_features(ind: &Individual, grid: &ParamGrid) -> Result<FeatureMatrix> {
    let columns = feature_names(ind.series.var_names(), grid);
    let (configs, rows) = extract_cells(ind, grid)?;
    Ok(assemble(&columns, vec![(ind, configs, rows)]))
}

/// Feature rows of every individual. Only columns available for all
/// individuals are kept, in extraction order.
pub fn extract_dataset(data: &Dataset, grid: &ParamGrid) -> Result<FeatureMatrix> {
    if data.individuals.is_empty() {
        return Err(Error::data("dataset has no individuals"));
    }
    let columns = feature_names(data.var_names(), grid);
    let cells = data
        .individuals
        .par_iter()
        .map(|ind| extract_cells(ind, grid).map(|(c, r)| (ind, c, r)))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(&columns, cells))
}
