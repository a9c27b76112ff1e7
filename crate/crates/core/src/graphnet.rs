//! Group fusion networks and node centralities.
//!
//! A [`FusionNetwork`] counts, per group, how many individual graphs contain
//! each edge. Centralities are computed on an unweighted [`MixedGraph`]
//! derived from either a single [`CausalGraph`] or a fusion network's support.

use std::collections::{BTreeSet, VecDeque};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::discovery::{CausalGraph, Orientation};
use crate::{Error, Result};

/// Edge counts of a group of causal graphs over the same variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionNetwork {
    pub var_names: Vec<String>,
    pub tau_max: usize,
    pub group_size: u32,
    /// `lagged_counts[lag - 1][source][target]`.
    pub lagged_counts: Vec<Vec<Vec<u32>>>,
    /// `contemp_directed[a][b]` counts `a -> b`.
    pub contemp_directed: Vec<Vec<u32>>,
    /// Symmetric.
    pub contemp_undirected: Vec<Vec<u32>>,
    /// Symmetric.
    pub contemp_conflicting: Vec<Vec<u32>>,
}

impl FusionNetwork {
    pub fn n_vars(&self) -> usize {
        self.var_names.len()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: FusionNetwork = serde_json::from_str(text)?;
        let n = f.n_vars();
        let square = |m: &Vec<Vec<u32>>| m.len() == n && m.iter().all(|r| r.len() == n);
        if f.lagged_counts.len() != f.tau_max
            || !f.lagged_counts.iter().all(square)
            || !square(&f.contemp_directed)
            || !square(&f.contemp_undirected)
            || !square(&f.contemp_conflicting)
        {
            return Err(Error::data("fusion network dimensions do not match its variables"));
        }
        Ok(f)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Element-wise sum of the binarized graphs.
pub fn fuse(graphs: &[CausalGraph]) -> Result<FusionNetwork> {
    let first = graphs
        .first()
        .ok_or_else(|| Error::config("cannot fuse an empty list of graphs"))?;
    let names = first.var_names().to_vec();
    if graphs.iter().any(|g| g.var_names() != names.as_slice()) {
        return Err(Error::data("graphs do not share the same variables"));
    }
    let n = names.len();
    let tau_max = graphs.iter().map(CausalGraph::tau_max).max().unwrap_or(0);
    let zeros = || vec![vec![0u32; n]; n];
    let mut f = FusionNetwork {
        var_names: names,
        tau_max,
        group_size: graphs.len() as u32,
        lagged_counts: (0..tau_max).map(|_| zeros()).collect(),
        contemp_directed: zeros(),
        contemp_undirected: zeros(),
        contemp_conflicting: zeros(),
    };
    for g in graphs {
        for e in g.lagged_edges() {
            f.lagged_counts[e.lag - 1][e.source][e.target] += 1;
        }
        for e in g.contemporaneous_edges() {
            let (a, b) = (e.a, e.b);
            match e.orientation {
                Orientation::AToB => f.contemp_directed[a][b] += 1,
                Orientation::BToA => f.contemp_directed[b][a] += 1,
                Orientation::Undirected => {
                    f.contemp_undirected[a][b] += 1;
                    f.contemp_undirected[b][a] += 1;
                }
                Orientation::Conflicting => {
                    f.contemp_conflicting[a][b] += 1;
                    f.contemp_conflicting[b][a] += 1;
                }
            }
        }
    }
    Ok(f)
}

/// Which edges enter a centrality computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CentralityMode {
    /// Lagged edges only, merged over lags.
    DirectedLagged,
    /// Lagged and contemporaneous edges; unresolved contemporaneous edges
    /// count as undirected.
    #[default]
    Mixed,
}

impl std::str::FromStr for CentralityMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "directed-lagged" => Ok(CentralityMode::DirectedLagged),
            "mixed" => Ok(CentralityMode::Mixed),
            other => Err(Error::config(format!("unknown centrality mode '{other}'"))),
        }
    }
}

/// Unweighted simple graph with directed arcs and undirected edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedGraph {
    pub var_names: Vec<String>,
    /// `(u, v)` with `u != v`.
    pub arcs: BTreeSet<(usize, usize)>,
    /// `(a, b)` with `a < b`.
    pub undirected: BTreeSet<(usize, usize)>,
    /// Per node: whether it carries a lagged self-link.
    pub self_loops: Vec<bool>,
}

impl MixedGraph {
    pub fn empty(var_names: Vec<String>) -> Self {
        let n = var_names.len();
        MixedGraph {
            var_names,
            arcs: BTreeSet::new(),
            undirected: BTreeSet::new(),
            self_loops: vec![false; n],
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.var_names.len()
    }

    fn add_arc(&mut self, u: usize, v: usize) {
        if u == v {
            self.self_loops[u] = true;
        } else {
            self.arcs.insert((u, v));
        }
    }

    fn add_undirected(&mut self, a: usize, b: usize) {
        if a != b {
            self.undirected.insert((a.min(b), a.max(b)));
        }
    }

    pub fn from_causal(g: &CausalGraph, mode: CentralityMode) -> Self {
        let mut m = MixedGraph::empty(g.var_names().to_vec());
        for e in g.lagged_edges() {
            m.add_arc(e.source, e.target);
        }
        if mode == CentralityMode::Mixed {
            for e in g.contemporaneous_edges() {
                match e.orientation {
                    Orientation::AToB => m.add_arc(e.a, e.b),
                    Orientation::BToA => m.add_arc(e.b, e.a),
                    Orientation::Undirected | Orientation::Conflicting => m.add_undirected(e.a, e.b),
                }
            }
        }
        m
    }

    /// Support of a fusion network: edges whose count is at least `min_count`.
    pub fn from_fusion(f: &FusionNetwork, mode: CentralityMode, min_count: u32) -> Self {
        let min_count = min_count.max(1);
        let n = f.n_vars();
        let mut m = MixedGraph::empty(f.var_names.clone());
        for layer in &f.lagged_counts {
            for u in 0..n {
                for v in 0..n {
                    if layer[u][v] >= min_count {
                        m.add_arc(u, v);
                    }
                }
            }
        }
        if mode == CentralityMode::Mixed {
            for u in 0..n {
                for v in 0..n {
                    if f.contemp_directed[u][v] >= min_count {
                        m.add_arc(u, v);
                    }
                    if u < v && f.contemp_undirected[u][v] + f.contemp_conflicting[u][v] >= min_count {
                        m.add_undirected(u, v);
                    }
                }
            }
        }
        m
    }

    /// Out-neighbours, with undirected edges traversable both ways.
    pub fn successors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_nodes()];
        for &(u, v) in &self.arcs {
            adj[u].push(v);
        }
        for &(a, b) in &self.undirected {
            adj[a].push(b);
            adj[b].push(a);
        }
        for a in adj.iter_mut() {
            a.sort_unstable();
            a.dedup();
        }
        adj
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityReport {
    pub var_names: Vec<String>,
    pub in_degree: Vec<u32>,
    pub out_degree: Vec<u32>,
    pub degree: Vec<u32>,
    pub closeness: Vec<f64>,
    /// Nodes whose closeness used the harmonic form.
    pub closeness_harmonic: Vec<bool>,
    pub betweenness: Vec<f64>,
    pub self_loops: Vec<bool>,
}

impl CentralityReport {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "node",
            "in_degree",
            "out_degree",
            "degree",
            "closeness",
            "betweenness",
            "closeness_kind",
            "self_loop",
        ])?;
        for i in 0..self.var_names.len() {
            w.write_record([
                self.var_names[i].clone(),
                self.in_degree[i].to_string(),
                self.out_degree[i].to_string(),
                self.degree[i].to_string(),
                self.closeness[i].to_string(),
                self.betweenness[i].to_string(),
                if self.closeness_harmonic[i] { "harmonic" } else { "standard" }.to_string(),
                u8::from(self.self_loops[i]).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// BFS distances from `s` along `adj`; `usize::MAX` when unreachable.
fn bfs(adj: &[Vec<usize>], s: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[s] = 0;
    let mut q = VecDeque::from([s]);
    while let Some(u) = q.pop_front() {
        for &v in &adj[u] {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                q.push_back(v);
            }
        }
    }
    dist
}

/// Unnormalized betweenness over ordered pairs (Brandes).
pub fn betweenness(adj: &[Vec<usize>]) -> Vec<f64> {
    let n = adj.len();
    let mut cb = vec![0.0; n];
    for s in 0..n {
        let mut stack = Vec::with_capacity(n);
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut sigma = vec![0.0f64; n];
        let mut dist = vec![usize::MAX; n];
        sigma[s] = 1.0;
        dist[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            stack.push(v);
            for &w in &adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    q.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        let mut delta = vec![0.0; n];
        while let Some(w) = stack.pop() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                cb[w] += delta[w];
            }
        }
    }
    cb
}

/// Degree, closeness and betweenness of every node.
///
/// Degrees ignore self-loops. Closeness uses distances *into* the node:
/// `(n - 1) / sum(d)` when every other node reaches it, otherwise the
/// harmonic form `sum(1 / d) / (n - 1)`.
pub fn centralities(g: &MixedGraph) -> CentralityReport {
    let n = g.n_nodes();
    let mut in_degree = vec![0u32; n];
    let mut out_degree = vec![0u32; n];
    let mut undirected = vec![0u32; n];
    for &(u, v) in &g.arcs {
        out_degree[u] += 1;
        in_degree[v] += 1;
    }
    for &(a, b) in &g.undirected {
        undirected[a] += 1;
        undirected[b] += 1;
    }
    let degree = (0..n).map(|i| in_degree[i] + out_degree[i] + undirected[i]).collect();

    // reverse adjacency gives incoming distances
    let succ = g.successors();
    let mut pred = vec![Vec::new(); n];
    for (u, vs) in succ.iter().enumerate() {
        for &v in vs {
            pred[v].push(u);
        }
    }
    let mut closeness = vec![0.0; n];
    let mut closeness_harmonic = vec![false; n];
    if n > 1 {
        for v in 0..n {
            let d = bfs(&pred, v);
            let reach: Vec<usize> = (0..n).filter(|&u| u != v && d[u] != usize::MAX).map(|u| d[u]).collect();
            if reach.len() == n - 1 {
                closeness[v] = (n - 1) as f64 / reach.iter().sum::<usize>() as f64;
            } else {
                closeness_harmonic[v] = true;
                // fold from +0 so an unreachable node prints as 0, not -0
                closeness[v] = reach.iter().fold(0.0, |acc, &x| acc + 1.0 / x as f64) / (n - 1) as f64;
            }
        }
    }
    CentralityReport {
        var_names: g.var_names.clone(),
        in_degree,
        out_degree,
        degree,
        closeness,
        closeness_harmonic,
        betweenness: betweenness(&succ),
        self_loops: g.self_loops.clone(),
    }
}
