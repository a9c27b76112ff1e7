//! Degree-histogram and Weisfeiler-Lehman graph kernels.
//!
//! Kernels act on undirected simple graphs. A [`MixedGraph`] is flattened by
//! taking the union of all edge classes and dropping self-loops.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graphnet::MixedGraph;
use crate::{Error, Result};

/// Undirected simple graph with labelled nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleGraph {
    pub node_names: Vec<String>,
    adj: Vec<BTreeSet<usize>>,
}

impl SimpleGraph {
    pub fn new(node_names: Vec<String>, edges: &[(usize, usize)]) -> Result<Self> {
        let n = node_names.len();
        let mut adj = vec![BTreeSet::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::config("edge refers to a missing node"));
            }
            if a != b {
                adj[a].insert(b);
                adj[b].insert(a);
            }
        }
        Ok(SimpleGraph { node_names, adj })
    }

    pub fn from_mixed(g: &MixedGraph) -> Self {
        let edges: Vec<(usize, usize)> = g.arcs.iter().chain(&g.undirected).copied().collect();
        Self::new(g.var_names.clone(), &edges).expect("mixed graph edges are in range")
    }

    pub fn n_nodes(&self) -> usize {
        self.adj.len()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// `hist[d]` = number of nodes of degree `d`.
    pub fn degree_histogram(&self) -> Vec<u64> {
        let max = (0..self.n_nodes()).map(|v| self.degree(v)).max().unwrap_or(0);
        let mut h = vec![0; max + 1];
        for v in 0..self.n_nodes() {
            h[self.degree(v)] += 1;
        }
        h
    }
}

/// Dot product of the degree histograms.
pub fn degree_kernel(g1: &SimpleGraph, g2: &SimpleGraph) -> f64 {
    g1.degree_histogram()
        .iter()
        .zip(g2.degree_histogram())
        .map(|(&a, b)| (a * b) as f64)
        .sum()
}

/// Colour-count histograms of both graphs for iterations `0..=h`, with a
/// colour dictionary shared by the pair.
fn wl_histograms(g1: &SimpleGraph, g2: &SimpleGraph, h: usize, uniform_init: bool) -> Vec<[BTreeMap<u32, u64>; 2]> {
    let graphs = [g1, g2];
    let mut dict: BTreeMap<String, u32> = BTreeMap::new();
    let mut colours: Vec<Vec<u32>> = graphs
        .iter()
        .map(|g| {
            g.node_names
                .iter()
                .map(|name| {
                    let key = if uniform_init { String::new() } else { name.clone() };
                    let next = dict.len() as u32;
                    *dict.entry(key).or_insert(next)
                })
                .collect()
        })
        .collect();
    let count = |colours: &[Vec<u32>]| -> [BTreeMap<u32, u64>; 2] {
        let mut out = [BTreeMap::new(), BTreeMap::new()];
        for (k, cs) in colours.iter().enumerate() {
            for &c in cs {
                *out[k].entry(c).or_insert(0) += 1;
            }
        }
        out
    };
    let mut hist = vec![count(&colours)];
    for _ in 0..h {
        let mut dict: BTreeMap<(u32, Vec<u32>), u32> = BTreeMap::new();
        colours = graphs
            .iter()
            .zip(&colours)
            .map(|(g, cs)| {
                (0..g.n_nodes())
                    .map(|v| {
                        let mut nb: Vec<u32> = g.adj[v].iter().map(|&u| cs[u]).collect();
                        nb.sort_unstable();
                        let next = dict.len() as u32;
                        *dict.entry((cs[v], nb)).or_insert(next)
                    })
                    .collect()
            })
            .collect();
        hist.push(count(&colours));
    }
    hist
}

/// Weisfeiler-Lehman subtree kernel with `h` refinement rounds.
pub fn wl_kernel(g1: &SimpleGraph, g2: &SimpleGraph, h: usize, uniform_init: bool) -> f64 {
    wl_histograms(g1, g2, h, uniform_init)
        .iter()
        .map(|[a, b]| {
            a.iter()
                .map(|(c, &x)| (x * b.get(c).copied().unwrap_or(0)) as f64)
                .sum::<f64>()
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Degree,
    #[default]
    Wl,
}

impl std::str::FromStr for KernelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "degree" => Ok(KernelKind::Degree),
            "wl" => Ok(KernelKind::Wl),
            other => Err(Error::config(format!("unknown kernel '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelParams {
    pub kind: KernelKind,
    /// WL refinement rounds.
    pub h: usize,
    /// Start WL from a single colour instead of node names.
    pub uniform_init: bool,
}

impl Default for KernelParams {
    fn default() -> Self {
        KernelParams {
            kind: KernelKind::Wl,
            h: 3,
            uniform_init: false,
        }
    }
}

impl KernelParams {
    pub fn eval(&self, g1: &SimpleGraph, g2: &SimpleGraph) -> f64 {
        match self.kind {
            KernelKind::Degree => degree_kernel(g1, g2),
            KernelKind::Wl => wl_kernel(g1, g2, self.h, self.uniform_init),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub labels: Vec<String>,
    pub values: DMatrix<f64>,
}

impl KernelMatrix {
    /// Cosine normalisation; rows of zero self-similarity stay zero.
    pub fn normalized(&self) -> KernelMatrix {
        let n = self.labels.len();
        let d: Vec<f64> = (0..n).map(|i| self.values[(i, i)]).collect();
        let values = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                if d[i] > 0.0 { 1.0 } else { 0.0 }
            } else if d[i] > 0.0 && d[j] > 0.0 {
                self.values[(i, j)] / (d[i] * d[j]).sqrt()
            } else {
                0.0
            }
        });
        KernelMatrix {
            labels: self.labels.clone(),
            values,
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.values.clone())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Smallest eigenvalue no lower than `-1e-8 * trace`.
    pub fn is_psd(&self) -> bool {
        self.min_eigenvalue() >= -1e-8 * self.values.trace().abs()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec![String::new()];
        header.extend(self.labels.iter().cloned());
        w.write_record(&header)?;
        for (i, label) in self.labels.iter().enumerate() {
            let mut row = vec![label.clone()];
            row.extend((0..self.labels.len()).map(|j| self.values[(i, j)].to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Pairwise kernel values over graphs sharing one node set.
pub fn kernel_matrix(labels: Vec<String>, graphs: &[SimpleGraph], params: &KernelParams) -> Result<KernelMatrix> {
    let first = graphs.first().ok_or_else(|| Error::config("no graphs to compare"))?;
    if labels.len() != graphs.len() {
        return Err(Error::config("one label per graph is required"));
    }
    if graphs.iter().any(|g| g.node_names != first.node_names) {
        return Err(Error::data("graphs do not share the same node set"));
    }
    let n = graphs.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let vals: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| params.eval(&graphs[i], &graphs[j]))
        .collect();
    let mut values = DMatrix::zeros(n, n);
    for (&(i, j), v) in pairs.iter().zip(vals) {
        values[(i, j)] = v;
        values[(j, i)] = v;
    }
    Ok(KernelMatrix { labels, values })
}
