//! Synthetic structural causal time series with known ground truth.

use std::collections::BTreeSet;
use std::str::FromStr;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataio::TimeSeries;
use crate::rng::seeded;
use crate::{Error, Result};

/// Steps discarded before output when the model has lagged self-links.
pub const BURN_IN: usize = 100;

/// A (variable, lag) reference inside a structural equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LagRef {
    pub var: usize,
    pub lag: usize,
}

impl LagRef {
    pub fn new(var: usize, lag: usize) -> Self {
        LagRef { var, lag }
    }
}

/// Link functions available to structural equations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LinkFunction {
    /// `coeff * x`
    Linear { coeff: f64, source: LagRef },
    /// `coeff * x^2`
    Square { coeff: f64, source: LagRef },
    /// `coeff * a * b`
    Product { coeff: f64, a: LagRef, b: LagRef },
}

impl LinkFunction {
    fn sources(&self) -> Vec<LagRef> {
        match self {
            LinkFunction::Linear { source, .. } | LinkFunction::Square { source, .. } => {
                vec![*source]
            }
            LinkFunction::Product { a, b, .. } => vec![*a, *b],
        }
    }

    fn eval(&self, value: impl Fn(LagRef) -> f64) -> f64 {
        match self {
            LinkFunction::Linear { coeff, source } => coeff * value(*source),
            LinkFunction::Square { coeff, source } => coeff * value(*source).powi(2),
            LinkFunction::Product { coeff, a, b } => coeff * value(*a) * value(*b),
        }
    }
}

/// One additive term of the structural equation of `target`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScmTerm {
    pub target: usize,
    pub func: LinkFunction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScmSpec {
    pub var_names: Vec<String>,
    pub terms: Vec<ScmTerm>,
}

impl ScmSpec {
    pub fn new(n_vars: usize) -> Self {
        ScmSpec {
            var_names: (1..=n_vars).map(|i| format!("X{i}")).collect(),
            terms: Vec::new(),
        }
    }

    pub fn with_term(mut self, target: usize, func: LinkFunction) -> Self {
        self.terms.push(ScmTerm { target, func });
        self
    }

    pub fn linear(self, source: usize, target: usize, lag: usize, coeff: f64) -> Self {
        self.with_term(
            target,
            LinkFunction::Linear {
                coeff,
                source: LagRef::new(source, lag),
            },
        )
    }

    fn max_lag(&self) -> usize {
        self.terms
            .iter()
            .flat_map(|t| t.func.sources())
            .map(|s| s.lag)
            .max()
            .unwrap_or(0)
    }

    fn has_self_links(&self) -> bool {
        self.terms
            .iter()
            .any(|t| t.func.sources().iter().any(|s| s.var == t.target && s.lag > 0))
    }

    /// Topological order of the lag-0 dependency graph.
    fn contemporaneous_order(&self) -> Result<Vec<usize>> {
        let n = self.var_names.len();
        let mut indeg = vec![0usize; n];
        let mut children = vec![BTreeSet::new(); n];
        for t in &self.terms {
            for s in t.func.sources().into_iter().filter(|s| s.lag == 0) {
                if children[s.var].insert(t.target) {
                    indeg[t.target] += 1;
                }
            }
        }
        let mut ready: BTreeSet<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &c in &children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        if order.len() != n {
            return Err(Error::config("contemporaneous links form a cycle"));
        }
        Ok(order)
    }

    fn validate(&self) -> Result<()> {
        let n = self.var_names.len();
        if n == 0 {
            return Err(Error::config("a structural model needs at least one variable"));
        }
        for t in &self.terms {
            if t.target >= n || t.func.sources().iter().any(|s| s.var >= n) {
                return Err(Error::config("term references an unknown variable"));
            }
        }
        Ok(())
    }
}

/// Set of true `(source, target, lag)` links.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub var_names: Vec<String>,
    pub edges: BTreeSet<(usize, usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct TruthEdgeJson {
    src: String,
    dst: String,
    lag: usize,
}

#[derive(Serialize, Deserialize)]
struct TruthJson {
    vars: Vec<String>,
    edges: Vec<TruthEdgeJson>,
}

impl GroundTruth {
    pub fn contains(&self, source: usize, target: usize, lag: usize) -> bool {
        self.edges.contains(&(source, target, lag))
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = TruthJson {
            vars: self.var_names.clone(),
            edges: self
                .edges
                .iter()
                .map(|&(s, d, lag)| TruthEdgeJson {
                    src: self.var_names[s].clone(),
                    dst: self.var_names[d].clone(),
                    lag,
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TruthJson = serde_json::from_str(text)?;
        let idx = |name: &str| {
            doc.vars
                .iter()
                .position(|v| v == name)
                .ok_or_else(|| Error::data(format!("edge references unknown variable '{name}'")))
        };
        let edges = doc
            .edges
            .iter()
            .map(|e| Ok((idx(&e.src)?, idx(&e.dst)?, e.lag)))
            .collect::<Result<_>>()?;
        Ok(GroundTruth {
            var_names: doc.vars,
            edges,
        })
    }
}

/// Simulate `spec` for `t` output steps with Gaussian noise of s.d. `noise_sd`.
///
/// Noise is drawn per time step in variable-index order from a ChaCha8
/// stream seeded with `seed`; equations are evaluated in the topological
/// order of the lag-0 links. With lagged self-links the first
/// [`BURN_IN`] steps are discarded, otherwise only the `max_lag` pre-sample
/// steps are.
pub fn gen_scm(spec: &ScmSpec, t: usize, noise_sd: f64, seed: u64) -> Result<(TimeSeries, GroundTruth)> {
    spec.validate()?;
    let max_lag = spec.max_lag();
    if t < max_lag + 1 {
        return Err(Error::config(format!("need at least {} time steps", max_lag + 1)));
    }
    let order = spec.contemporaneous_order()?;
    let n = spec.var_names.len();
    let burn = if spec.has_self_links() { BURN_IN.max(max_lag) } else { max_lag };
    let total = burn + t;
    let mut rng = seeded(seed);
    let mut data = vec![vec![0.0; total]; n];
    let mut by_target: Vec<Vec<&LinkFunction>> = vec![Vec::new(); n];
    for term in &spec.terms {
        by_target[term.target].push(&term.func);
    }
    for s in 0..total {
        let noise: Vec<f64> = (0..n)
            .map(|_| {
                let e: f64 = StandardNormal.sample(&mut rng);
                noise_sd * e
            })
            .collect();
        for &v in &order {
            let mut x = noise[v];
            for f in &by_target[v] {
                x += f.eval(|r| if r.lag > s { 0.0 } else { data[r.var][s - r.lag] });
            }
            data[v][s] = x;
        }
    }
    let columns = data.into_iter().map(|c| c[burn..].to_vec()).collect();
    let ts = TimeSeries::from_columns(spec.var_names.clone(), columns)?;
    let edges = spec
        .terms
        .iter()
        .flat_map(|term| term.func.sources().into_iter().map(move |s| (s.var, term.target, s.lag)))
        .collect();
    Ok((
        ts,
        GroundTruth {
            var_names: spec.var_names.clone(),
            edges,
        },
    ))
}

/// The three three-variable benchmark scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// `X3_t = 3 X2_{t-1} + e`
    Linear,
    /// `X3_t = 3 X1_{t-1} X2_{t-1} + e`
    Interaction,
    /// `X3_t = 3 X2_{t-1}^2 + e`
    Quadratic,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::Linear, Scenario::Interaction, Scenario::Quadratic];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Linear => "linear",
            Scenario::Interaction => "interaction",
            Scenario::Quadratic => "quadratic",
        }
    }

    pub fn spec(self) -> ScmSpec {
        let x1 = LagRef::new(0, 1);
        let x2 = LagRef::new(1, 1);
        let func = match self {
            Scenario::Linear => LinkFunction::Linear { coeff: 3.0, source: x2 },
            Scenario::Interaction => LinkFunction::Product { coeff: 3.0, a: x1, b: x2 },
            Scenario::Quadratic => LinkFunction::Square { coeff: 3.0, source: x2 },
        };
        ScmSpec::new(3).with_term(2, func)
    }
}

impl FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" | "1" => Ok(Scenario::Linear),
            "interaction" | "2" => Ok(Scenario::Interaction),
            "quadratic" | "3" => Ok(Scenario::Quadratic),
            other => Err(Error::config(format!("unknown scenario '{other}'"))),
        }
    }
}

/// Generate one replicate of a benchmark scenario.
pub fn gen_scenario(scenario: Scenario, t: usize, seed: u64) -> Result<(TimeSeries, GroundTruth)> {
    if t < 2 {
        return Err(Error::config("scenarios need at least 2 time steps"));
    }
    gen_scm(&scenario.spec(), t, 1.0, seed)
}
