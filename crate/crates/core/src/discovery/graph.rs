use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Mark on a contemporaneous edge between `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Orientation {
    #[serde(rename = "a->b")]
    AToB,
    #[serde(rename = "b->a")]
    BToA,
    #[serde(rename = "undirected")]
    Undirected,
    #[serde(rename = "conflicting")]
    Conflicting,
}

impl Orientation {
    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::AToB => "a->b",
            Orientation::BToA => "b->a",
            Orientation::Undirected => "undirected",
            Orientation::Conflicting => "conflicting",
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Orientation::AToB => Orientation::BToA,
            Orientation::BToA => Orientation::AToB,
            o => o,
        }
    }
}

/// `source(t - lag) -> target(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaggedEdge {
    pub source: usize,
    pub target: usize,
    pub lag: usize,
    pub statistic: f64,
    pub p_value: f64,
}

/// Same-time edge; always stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContempEdge {
    pub a: usize,
    pub b: usize,
    pub orientation: Orientation,
    pub statistic: f64,
    pub p_value: f64,
}

/// Mixed causal graph over named variables.
#[derive(Debug, Clone, PartialEq)]
pub struct CausalGraph {
    var_names: Vec<String>,
    tau_max: usize,
    lagged: Vec<LaggedEdge>,
    contemporaneous: Vec<ContempEdge>,
    pub meta: serde_json::Value,
}

impl CausalGraph {
    /// Build a graph, normalising edge order and checking its invariants.
    pub fn new(
        var_names: Vec<String>,
        tau_max: usize,
        mut lagged: Vec<LaggedEdge>,
        mut contemporaneous: Vec<ContempEdge>,
        meta: serde_json::Value,
    ) -> Result<Self> {
        let n = var_names.len();
        for e in &lagged {
            if e.source >= n || e.target >= n {
                return Err(Error::data("lagged edge refers to an unknown variable"));
            }
            if e.lag == 0 || e.lag > tau_max {
                return Err(Error::data(format!("lagged edge with lag {} outside 1..={tau_max}", e.lag)));
            }
        }
        for e in contemporaneous.iter_mut() {
            if e.a >= n || e.b >= n {
                return Err(Error::data("contemporaneous edge refers to an unknown variable"));
            }
            if e.a == e.b {
                return Err(Error::data("contemporaneous self-edge"));
            }
            if e.a > e.b {
                std::mem::swap(&mut e.a, &mut e.b);
                e.orientation = e.orientation.reversed();
            }
        }
        lagged.sort_by_key(|e| (e.target, e.source, e.lag));
        contemporaneous.sort_by_key(|e| (e.a, e.b));
        if lagged
            .windows(2)
            .any(|w| (w[0].source, w[0].target, w[0].lag) == (w[1].source, w[1].target, w[1].lag))
        {
            return Err(Error::data("duplicate lagged edge"));
        }
        if contemporaneous.windows(2).any(|w| (w[0].a, w[0].b) == (w[1].a, w[1].b)) {
            return Err(Error::data("duplicate contemporaneous edge"));
        }
        Ok(CausalGraph {
            var_names,
            tau_max,
            lagged,
            contemporaneous,
            meta,
        })
    }

    pub fn n_vars(&self) -> usize {
        self.var_names.len()
    }

    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    pub fn tau_max(&self) -> usize {
        self.tau_max
    }

    /// Sorted by `(target, source, lag)`.
    pub fn lagged_edges(&self) -> &[LaggedEdge] {
        &self.lagged
    }

    /// Sorted by `(a, b)`.
    pub fn contemporaneous_edges(&self) -> &[ContempEdge] {
        &self.contemporaneous
    }

    pub fn has_lagged(&self, source: usize, target: usize, lag: usize) -> bool {
        self.lagged
            .binary_search_by_key(&(target, source, lag), |e| (e.target, e.source, e.lag))
            .is_ok()
    }

    /// `(source, target, lag)` triples of all lagged edges.
    pub fn lagged_set(&self) -> BTreeSet<(usize, usize, usize)> {
        self.lagged.iter().map(|e| (e.source, e.target, e.lag)).collect()
    }

    /// Orientation of the pair seen from `x` to `y`, so `AToB` means `x -> y`.
    pub fn contemporaneous(&self, x: usize, y: usize) -> Option<Orientation> {
        let (a, b) = if x < y { (x, y) } else { (y, x) };
        let e = self
            .contemporaneous
            .binary_search_by_key(&(a, b), |e| (e.a, e.b))
            .ok()
            .map(|i| self.contemporaneous[i])?;
        Some(if x < y { e.orientation } else { e.orientation.reversed() })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: GraphFile = serde_json::from_str(text)?;
        Self::from_file(f)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    fn to_file(&self) -> GraphFile {
        let name = |i: usize| self.var_names[i].clone();
        GraphFile {
            vars: self.var_names.clone(),
            tau_max: self.tau_max,
            lagged_edges: self
                .lagged
                .iter()
                .map(|e| LaggedRecord {
                    src: name(e.source),
                    dst: name(e.target),
                    lag: e.lag,
                    stat: e.statistic,
                    p: e.p_value,
                })
                .collect(),
            contemporaneous_edges: self
                .contemporaneous
                .iter()
                .map(|e| ContempRecord {
                    a: name(e.a),
                    b: name(e.b),
                    orientation: e.orientation,
                    stat: e.statistic,
                    p: e.p_value,
                })
                .collect(),
            meta: self.meta.clone(),
        }
    }

    fn from_file(f: GraphFile) -> Result<Self> {
        let index = |s: &str| {
            f.vars
                .iter()
                .position(|v| v == s)
                .ok_or_else(|| Error::data(format!("edge refers to unknown variable '{s}'")))
        };
        let lagged = f
            .lagged_edges
            .iter()
            .map(|r| {
                Ok(LaggedEdge {
                    source: index(&r.src)?,
                    target: index(&r.dst)?,
                    lag: r.lag,
                    statistic: r.stat,
                    p_value: r.p,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let contemporaneous = f
            .contemporaneous_edges
            .iter()
            .map(|r| {
                Ok(ContempEdge {
                    a: index(&r.a)?,
                    b: index(&r.b)?,
                    orientation: r.orientation,
                    statistic: r.stat,
                    p_value: r.p,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let tau_max = f
            .tau_max
            .max(lagged.iter().map(|e| e.lag).max().unwrap_or(0));
        CausalGraph::new(f.vars, tau_max, lagged, contemporaneous, f.meta)
    }
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    vars: Vec<String>,
    #[serde(default)]
    tau_max: usize,
    lagged_edges: Vec<LaggedRecord>,
    contemporaneous_edges: Vec<ContempRecord>,
    #[serde(default)]
    meta: serde_json::Value,
}

#[derive(Serialize, Deserialize)]
struct LaggedRecord {
    src: String,
    dst: String,
    lag: usize,
    stat: f64,
    p: f64,
}

#[derive(Serialize, Deserialize)]
struct ContempRecord {
    a: String,
    b: String,
    orientation: Orientation,
    stat: f64,
    p: f64,
}
