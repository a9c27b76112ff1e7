//! PCMCI+: lagged PC1 skeleton, MCI pruning, contemporaneous skeleton and
//! orientation.
//!
//! All tests run on a common window that drops the first `2 * tau_max`
//! samples, so the lagged parents of a lagged source are always available.
//! Within a level, tests only read the state snapshot taken at the start of
//! that level and removals are applied afterwards, which makes results
//! independent of the order in which tests run.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::graph::{CausalGraph, ContempEdge, LaggedEdge, Orientation};
use crate::citest::{CondIndTest, TestResult};
use crate::dataio::TimeSeries;
use crate::rng::derive;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PcmciParams {
    pub tau_max: usize,
    pub alpha: f64,
    /// Strongest parents of the source added to each MCI conditioning set.
    pub p_j: usize,
    /// Cap on PC1 conditioning-set size; `None` runs until exhaustion.
    pub max_conds_dim: Option<usize>,
    /// Cap on contemporaneous conditioning-set size.
    pub max_contemp_conds: usize,
    /// Conditioning subsets tried per link and level; `None` tries all.
    pub max_combinations: Option<usize>,
    pub seed: u64,
}

impl Default for PcmciParams {
    fn default() -> Self {
        PcmciParams {
            tau_max: 1,
            alpha: 0.01,
            p_j: 3,
            max_conds_dim: None,
            max_contemp_conds: 3,
            max_combinations: Some(1),
            seed: 0,
        }
    }
}

impl PcmciParams {
    fn validate(&self) -> Result<()> {
        if self.tau_max == 0 {
            return Err(Error::config("tau_max must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::config("alpha must lie in (0, 1)"));
        }
        if self.max_combinations == Some(0) {
            return Err(Error::config("max_combinations must be positive"));
        }
        Ok(())
    }
}

/// A retained lagged parent `var(t - lag)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Parent {
    pub var: usize,
    pub lag: usize,
    /// Statistic of the weakest test (smallest magnitude).
    pub statistic: f64,
    /// Largest p-value seen across tests.
    pub p_value: f64,
}

/// Lagged parent candidates per target, strongest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParentSets {
    pub tau_max: usize,
    parents: Vec<Vec<Parent>>,
}

impl ParentSets {
    pub fn empty(n_vars: usize, tau_max: usize) -> Self {
        ParentSets {
            tau_max,
            parents: vec![Vec::new(); n_vars],
        }
    }

    /// Build from unordered lists; sorts by descending |statistic|.
    pub fn from_lists(tau_max: usize, mut parents: Vec<Vec<Parent>>) -> Result<Self> {
        for list in parents.iter_mut() {
            list.sort_by(strength_order);
            let mut seen = BTreeSet::new();
            for p in list.iter() {
                if p.lag == 0 || p.lag > tau_max {
                    return Err(Error::config(format!("parent lag {} outside 1..={tau_max}", p.lag)));
                }
                if !seen.insert((p.var, p.lag)) {
                    return Err(Error::config("duplicate parent"));
                }
            }
        }
        Ok(ParentSets { tau_max, parents })
    }

    pub fn n_vars(&self) -> usize {
        self.parents.len()
    }

    pub fn of(&self, target: usize) -> &[Parent] {
        &self.parents[target]
    }

    pub fn contains(&self, target: usize, var: usize, lag: usize) -> bool {
        self.parents[target].iter().any(|p| p.var == var && p.lag == lag)
    }

    pub fn total(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }
}

fn strength_order(a: &Parent, b: &Parent) -> std::cmp::Ordering {
    b.statistic
        .abs()
        .total_cmp(&a.statistic.abs())
        .then((a.lag, a.var).cmp(&(b.lag, b.var)))
}

/// `var(t - lag)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Node {
    var: usize,
    lag: usize,
}

impl Node {
    fn new(var: usize, lag: usize) -> Self {
        Node { var, lag }
    }
}

struct Ctx<'a> {
    cols: Vec<&'a [f64]>,
    start: usize,
    test: &'a dyn CondIndTest,
    seed: u64,
}

impl<'a> Ctx<'a> {
    fn new(ts: &'a TimeSeries, tau_max: usize, test: &'a dyn CondIndTest, seed: u64) -> Result<Self> {
        super::check_not_degenerate(ts)?;
        if ts.len() <= 2 * tau_max + 3 {
            return Err(Error::data(format!(
                "series of length {} is too short for tau_max = {tau_max}",
                ts.len()
            )));
        }
        Ok(Ctx {
            cols: (0..ts.n_vars()).map(|j| ts.column(j)).collect(),
            start: 2 * tau_max,
            test,
            seed,
        })
    }

    fn series(&self, n: Node) -> &'a [f64] {
        let c = self.cols[n.var];
        &c[self.start - n.lag..c.len() - n.lag]
    }

    /// Test `x ⫫ y(t) | cond`; the seed depends only on the test itself.
    fn run(&self, x: Node, y: usize, cond: &[Node]) -> Result<TestResult> {
        let mut cond = cond.to_vec();
        cond.sort();
        cond.dedup();
        cond.retain(|&c| c != x && c != Node::new(y, 0));
        let mut keys = vec![y as u64, x.var as u64, x.lag as u64];
        keys.extend(cond.iter().flat_map(|c| [c.var as u64, c.lag as u64]));
        let z: Vec<&[f64]> = cond.iter().map(|&c| self.series(c)).collect();
        self.test
            .run(self.series(x), self.series(Node::new(y, 0)), &z, derive(self.seed, &keys))
    }
}

/// Top `p_j` parents of `x`, shifted to `x`'s time.
fn source_parents(parents: &ParentSets, x: Node, p_j: usize) -> impl Iterator<Item = Node> + '_ {
    parents.of(x.var).iter().take(p_j).map(move |p| Node::new(p.var, p.lag + x.lag))
}

/// PC1 lagged skeleton phase.
///
/// Level 0 tests every candidate unconditionally; level `p` conditions each
/// surviving candidate on the `p` strongest other survivors. Candidates with
/// `p_value >= alpha` are dropped at the end of each level.
pub fn pc1_lagged(ts: &TimeSeries, test: &dyn CondIndTest, params: &PcmciParams) -> Result<ParentSets> {
    params.validate()?;
    let ctx = Ctx::new(ts, params.tau_max, test, params.seed)?;
    let lists = (0..ts.n_vars())
        .into_par_iter()
        .map(|j| pc1_target(&ctx, j, params))
        .collect::<Result<Vec<_>>>()?;
    ParentSets::from_lists(params.tau_max, lists)
}

fn pc1_target(ctx: &Ctx, target: usize, params: &PcmciParams) -> Result<Vec<Parent>> {
    let n = ctx.cols.len();
    let mut alive: Vec<Parent> = (1..=params.tau_max)
        .flat_map(|lag| {
            (0..n).map(move |var| Parent {
                var,
                lag,
                statistic: f64::INFINITY,
                p_value: 0.0,
            })
        })
        .collect();
    let mut level = 0;
    while !alive.is_empty() {
        if level > 0 && alive.len() <= level {
            break;
        }
        if params.max_conds_dim.is_some_and(|m| level > m) {
            break;
        }
        alive.sort_by(strength_order);
        let results = (0..alive.len())
            .into_par_iter()
            .map(|c| {
                let cond: Vec<Node> = alive
                    .iter()
                    .enumerate()
                    .filter(|&(o, _)| o != c)
                    .take(level)
                    .map(|(_, p)| Node::new(p.var, p.lag))
                    .collect();
                ctx.run(Node::new(alive[c].var, alive[c].lag), target, &cond)
            })
            .collect::<Result<Vec<_>>>()?;
        for (p, r) in alive.iter_mut().zip(&results) {
            if r.statistic.abs() < p.statistic.abs() {
                p.statistic = r.statistic;
            }
            p.p_value = p.p_value.max(r.p_value);
        }
        let mut keep = results.iter().map(|r| r.dependent(params.alpha));
        alive.retain(|_| keep.next().unwrap_or(false));
        level += 1;
    }
    Ok(alive)
}

/// MCI pruning of PC1 candidates.
///
/// `x(t - tau) -> y(t)` is kept when the pair is dependent given the other
/// candidates of `y` and the `p_j` strongest candidates of `x` shifted by `tau`.
pub fn mci_prune(
    ts: &TimeSeries,
    parents: &ParentSets,
    test: &dyn CondIndTest,
    params: &PcmciParams,
) -> Result<Vec<LaggedEdge>> {
    params.validate()?;
    if parents.n_vars() != ts.n_vars() {
        return Err(Error::config("parent sets do not match the series"));
    }
    let ctx = Ctx::new(ts, params.tau_max.max(parents.tau_max), test, params.seed)?;
    mci_with(&ctx, parents, params)
}

fn mci_with(ctx: &Ctx, parents: &ParentSets, params: &PcmciParams) -> Result<Vec<LaggedEdge>> {
    let links: Vec<(usize, Parent)> = (0..parents.n_vars())
        .flat_map(|j| parents.of(j).iter().map(move |&p| (j, p)))
        .collect();
    let results = links
        .par_iter()
        .map(|&(j, p)| {
            let x = Node::new(p.var, p.lag);
            let cond: Vec<Node> = parents
                .of(j)
                .iter()
                .map(|q| Node::new(q.var, q.lag))
                .chain(source_parents(parents, x, params.p_j))
                .collect();
            ctx.run(x, j, &cond)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(links
        .iter()
        .zip(results)
        .filter(|(_, r)| r.dependent(params.alpha))
        .map(|(&(j, p), r)| LaggedEdge {
            source: p.var,
            target: j,
            lag: p.lag,
            statistic: r.statistic,
            p_value: r.p_value,
        })
        .collect())
}

/// Running summary of the tests on one link.
#[derive(Debug, Clone, Copy)]
struct LinkStat {
    min_abs: f64,
    statistic: f64,
    p_value: f64,
}

impl LinkStat {
    fn untested() -> Self {
        LinkStat {
            min_abs: f64::INFINITY,
            statistic: 0.0,
            p_value: f64::NEG_INFINITY,
        }
    }

    fn update(&mut self, r: &TestResult) {
        self.min_abs = self.min_abs.min(r.statistic.abs());
        if r.p_value > self.p_value {
            self.p_value = r.p_value;
            self.statistic = r.statistic;
        }
    }
}

/// Lexicographic `k`-subsets of `0..n`, at most `limit` of them.
fn combinations(n: usize, k: usize, limit: Option<usize>) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        if limit.is_some_and(|l| out.len() >= l) {
            return out;
        }
        let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else {
            return out;
        };
        idx[i] += 1;
        for m in i + 1..k {
            idx[m] = idx[m - 1] + 1;
        }
    }
}

/// Key of a link: source node and target variable (at lag 0).
/// Contemporaneous pairs use the smaller variable as source.
type LinkKey = (Node, usize);

fn contemp_key(a: usize, b: usize) -> LinkKey {
    (Node::new(a.min(b), 0), a.max(b))
}

/// Full PCMCI+ run returning a mixed graph.
pub fn pcmci_plus(ts: &TimeSeries, test: &dyn CondIndTest, params: &PcmciParams) -> Result<CausalGraph> {
    params.validate()?;
    let ctx = Ctx::new(ts, params.tau_max, test, params.seed)?;
    let n = ts.n_vars();
    let lists = (0..n)
        .into_par_iter()
        .map(|j| pc1_target(&ctx, j, params))
        .collect::<Result<Vec<_>>>()?;
    let parents = ParentSets::from_lists(params.tau_max, lists)?;
    let mci = mci_with(&ctx, &parents, params)?;

    let mut links: BTreeMap<LinkKey, LinkStat> = BTreeMap::new();
    for e in &mci {
        let mut s = LinkStat::untested();
        s.update(&TestResult::new(e.statistic, e.p_value));
        links.insert((Node::new(e.source, e.lag), e.target), s);
    }
    for a in 0..n {
        for b in a + 1..n {
            links.insert(contemp_key(a, b), LinkStat::untested());
        }
    }
    let sepsets = contemporaneous_skeleton(&ctx, &parents, params, &mut links)?;

    let mut lagged = Vec::new();
    let mut contemp = BTreeMap::new();
    for (&(x, y), s) in &links {
        if x.lag == 0 {
            contemp.insert((x.var, y), Orientation::Undirected);
        } else {
            lagged.push(LaggedEdge {
                source: x.var,
                target: y,
                lag: x.lag,
                statistic: s.statistic,
                p_value: s.p_value,
            });
        }
    }
    let lagged_set: BTreeSet<(usize, usize, usize)> =
        lagged.iter().map(|e| (e.source, e.lag, e.target)).collect();
    orient(n, &lagged_set, &sepsets, &mut contemp);

    let contemporaneous = contemp
        .iter()
        .map(|(&(a, b), &orientation)| {
            let s = links[&contemp_key(a, b)];
            ContempEdge {
                a,
                b,
                orientation,
                statistic: s.statistic,
                p_value: s.p_value,
            }
        })
        .collect();
    let meta = serde_json::json!({
        "method": "pcmci+",
        "test": test.name(),
        "test_params": test.params(),
        "params": params,
        "pc1_candidates": parents.total(),
    });
    CausalGraph::new(ts.var_names().to_vec(), params.tau_max, lagged, contemporaneous, meta)
}

/// Contemporaneous conditioning phase over lag-0 pairs and surviving lagged
/// links. Returns the lag-0 members of the separating set of every removed
/// link.
fn contemporaneous_skeleton(
    ctx: &Ctx,
    parents: &ParentSets,
    params: &PcmciParams,
    links: &mut BTreeMap<LinkKey, LinkStat>,
) -> Result<BTreeMap<LinkKey, Vec<usize>>> {
    let n = ctx.cols.len();
    let mut sepsets = BTreeMap::new();
    for level in 0..=params.max_contemp_conds {
        // lag-0 neighbours of each variable, strongest first
        let adj: Vec<Vec<usize>> = (0..n)
            .map(|j| {
                let mut v: Vec<usize> = (0..n)
                    .filter(|&i| i != j && links.contains_key(&contemp_key(i, j)))
                    .collect();
                v.sort_by(|&a, &b| {
                    links[&contemp_key(a, j)]
                        .min_abs
                        .total_cmp(&links[&contemp_key(b, j)].min_abs)
                        .reverse()
                        .then(a.cmp(&b))
                });
                v
            })
            .collect();
        let mut items: Vec<(Node, usize, Vec<usize>)> = Vec::new();
        for &(x, y) in links.keys() {
            let dirs: &[(Node, usize)] = if x.lag == 0 {
                &[(x, y), (Node::new(y, 0), x.var)]
            } else if level > 0 {
                &[(x, y)]
            } else {
                &[]
            };
            for &(src, tgt) in dirs {
                let pool: Vec<usize> = adj[tgt]
                    .iter()
                    .copied()
                    .filter(|&i| !(src.lag == 0 && i == src.var))
                    .collect();
                if pool.len() >= level {
                    items.push((src, tgt, pool));
                }
            }
        }
        if items.is_empty() {
            break;
        }
        let outcomes = items
            .par_iter()
            .map(|(src, tgt, pool)| {
                let base: Vec<Node> = parents
                    .of(*tgt)
                    .iter()
                    .map(|p| Node::new(p.var, p.lag))
                    .chain(source_parents(parents, *src, params.p_j))
                    .collect();
                let mut results = Vec::new();
                for combo in combinations(pool.len(), level, params.max_combinations) {
                    let s: Vec<usize> = combo.iter().map(|&c| pool[c]).collect();
                    let mut cond = base.clone();
                    cond.extend(s.iter().map(|&v| Node::new(v, 0)));
                    let r = ctx.run(*src, *tgt, &cond)?;
                    results.push(r);
                    if !r.dependent(params.alpha) {
                        return Ok((results, Some(s)));
                    }
                }
                Ok((results, None))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut removed = Vec::new();
        for ((src, tgt, _), (results, sep)) in items.iter().zip(outcomes) {
            let key = if src.lag == 0 { contemp_key(src.var, *tgt) } else { (*src, *tgt) };
            let stat = links.get_mut(&key).expect("tested link exists");
            for r in &results {
                stat.update(r);
            }
            if let Some(s) = sep {
                if !sepsets.contains_key(&key) {
                    sepsets.insert(key, s);
                    removed.push(key);
                }
            }
        }
        for key in removed {
            links.remove(&key);
        }
    }
    Ok(sepsets)
}

/// Collider rule followed by Meek rules R1-R3 on the contemporaneous edges.
///
/// `contemp` maps `(a, b)` with `a < b` to its mark and is updated in place.
fn orient(
    n: usize,
    lagged: &BTreeSet<(usize, usize, usize)>,
    sepsets: &BTreeMap<LinkKey, Vec<usize>>,
    contemp: &mut BTreeMap<(usize, usize), Orientation>,
) {
    let adjacent = |c: &BTreeMap<(usize, usize), Orientation>, a: usize, b: usize| {
        c.contains_key(&(a.min(b), a.max(b)))
    };
    let neighbours = |c: &BTreeMap<(usize, usize), Orientation>, k: usize| -> Vec<usize> {
        (0..n).filter(|&i| i != k && adjacent(c, i, k)).collect()
    };
    // lagged parents of each variable
    let lag_parents: Vec<Vec<(usize, usize)>> = (0..n)
        .map(|k| {
            lagged
                .iter()
                .filter(|&&(_, _, t)| t == k)
                .map(|&(s, l, _)| (s, l))
                .collect()
        })
        .collect();

    let mut proposals = BTreeSet::new();
    for k in 0..n {
        let nb = neighbours(contemp, k);
        for (ii, &i) in nb.iter().enumerate() {
            for &j in &nb[ii + 1..] {
                if adjacent(contemp, i, j) {
                    continue;
                }
                let sep = sepsets.get(&contemp_key(i, j)).map_or(&[][..], |s| &s[..]);
                if !sep.contains(&k) {
                    proposals.insert((i, k));
                    proposals.insert((j, k));
                }
            }
        }
        for &(s, l) in &lag_parents[k] {
            for &j in &nb {
                if lagged.contains(&(s, l, j)) {
                    continue;
                }
                let sep = sepsets.get(&(Node::new(s, l), j)).map_or(&[][..], |v| &v[..]);
                if !sep.contains(&k) {
                    proposals.insert((j, k));
                }
            }
        }
    }
    apply(contemp, &proposals);

    loop {
        let rules: [&dyn Fn(&BTreeMap<(usize, usize), Orientation>) -> BTreeSet<(usize, usize)>; 3] = [
            &|c| rule1(n, c, &lag_parents, lagged),
            &|c| rule2(n, c),
            &|c| rule3(n, c),
        ];
        let mut changed = false;
        for rule in rules {
            let p = rule(contemp);
            if apply(contemp, &p) {
                changed = true;
                break;
            }
        }
        if !changed {
            break;
        }
    }
}

fn mark(c: &BTreeMap<(usize, usize), Orientation>, x: usize, y: usize) -> Option<Orientation> {
    let o = *c.get(&(x.min(y), x.max(y)))?;
    Some(if x < y { o } else { o.reversed() })
}

fn directed(c: &BTreeMap<(usize, usize), Orientation>, x: usize, y: usize) -> bool {
    mark(c, x, y) == Some(Orientation::AToB)
}

fn undirected(c: &BTreeMap<(usize, usize), Orientation>, x: usize, y: usize) -> bool {
    mark(c, x, y) == Some(Orientation::Undirected)
}

/// Orient undirected edges as proposed; opposite proposals give `Conflicting`.
fn apply(c: &mut BTreeMap<(usize, usize), Orientation>, proposals: &BTreeSet<(usize, usize)>) -> bool {
    let mut changed = false;
    for &(x, y) in proposals {
        let Some(o) = c.get_mut(&(x.min(y), x.max(y))) else {
            continue;
        };
        if *o != Orientation::Undirected {
            continue;
        }
        *o = if proposals.contains(&(y, x)) {
            Orientation::Conflicting
        } else if x < y {
            Orientation::AToB
        } else {
            Orientation::BToA
        };
        changed = true;
    }
    changed
}

/// R1: `a -> b - c` with `a`, `c` non-adjacent gives `b -> c`.
fn rule1(
    n: usize,
    c: &BTreeMap<(usize, usize), Orientation>,
    lag_parents: &[Vec<(usize, usize)>],
    lagged: &BTreeSet<(usize, usize, usize)>,
) -> BTreeSet<(usize, usize)> {
    let mut out = BTreeSet::new();
    for b in 0..n {
        for cc in 0..n {
            if b == cc || !undirected(c, b, cc) {
                continue;
            }
            let contemp_arrow = (0..n).any(|a| a != cc && directed(c, a, b) && mark(c, a, cc).is_none());
            let lagged_arrow = lag_parents[b].iter().any(|&(s, l)| !lagged.contains(&(s, l, cc)));
            if contemp_arrow || lagged_arrow {
                out.insert((b, cc));
            }
        }
    }
    out
}

/// R2: `a -> c -> b` with `a - b` gives `a -> b`.
fn rule2(n: usize, c: &BTreeMap<(usize, usize), Orientation>) -> BTreeSet<(usize, usize)> {
    let mut out = BTreeSet::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && undirected(c, a, b) && (0..n).any(|m| directed(c, a, m) && directed(c, m, b)) {
                out.insert((a, b));
            }
        }
    }
    out
}

/// R3: `a - c -> b`, `a - d -> b`, `a - b`, `c`, `d` non-adjacent gives `a -> b`.
fn rule3(n: usize, c: &BTreeMap<(usize, usize), Orientation>) -> BTreeSet<(usize, usize)> {
    let mut out = BTreeSet::new();
    for a in 0..n {
        for b in 0..n {
            if a == b || !undirected(c, a, b) {
                continue;
            }
            let mids: Vec<usize> = (0..n)
                .filter(|&m| undirected(c, a, m) && directed(c, m, b))
                .collect();
            let found = mids
                .iter()
                .enumerate()
                .any(|(i, &x)| mids[i + 1..].iter().any(|&y| mark(c, x, y).is_none()));
            if found {
                out.insert((a, b));
            }
        }
    }
    out
}
