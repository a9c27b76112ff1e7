//! Pairwise lagged baselines: VAR-Granger and transfer entropy.

use rayon::prelude::*;

use super::graph::{CausalGraph, LaggedEdge};
use crate::citest::{transfer_entropy, TeParams};
use crate::dataio::TimeSeries;
use crate::rng::derive;
use crate::stats::{design, ols};
use crate::{Error, Result};

/// VAR(`lag`) fitted equation by equation with OLS and an intercept.
///
/// Edge `j -> i` at lag `tau` when the coefficient's two-sided t-test has
/// `p < alpha`. The edge statistic is the coefficient.
pub fn var_granger(ts: &TimeSeries, lag: usize, alpha: f64) -> Result<CausalGraph> {
    let n = ts.n_vars();
    if lag == 0 {
        return Err(Error::config("lag must be at least 1"));
    }
    if ts.len() <= n * lag + 3 {
        return Err(Error::data(format!(
            "series of length {} is too short for a VAR({lag}) in {n} variables",
            ts.len()
        )));
    }
    super::check_not_degenerate(ts)?;
    let rows = ts.len() - lag;
    let predictors: Vec<(usize, usize, &[f64])> = (1..=lag)
        .flat_map(|tau| (0..n).map(move |j| (j, tau)))
        .map(|(j, tau)| (j, tau, &ts.column(j)[lag - tau..ts.len() - tau]))
        .collect();
    let cols: Vec<&[f64]> = predictors.iter().map(|p| p.2).collect();
    let x = design(&cols, rows, true);
    let mut edges = Vec::new();
    for i in 0..n {
        let fit = ols(&ts.column(i)[lag..], &x)?;
        for (k, &(j, tau, _)) in predictors.iter().enumerate() {
            let p = fit.p_value(k + 1);
            if p < alpha {
                edges.push(LaggedEdge {
                    source: j,
                    target: i,
                    lag: tau,
                    statistic: fit.coef[k + 1],
                    p_value: p,
                });
            }
        }
    }
    let meta = serde_json::json!({"method": "var", "lag": lag, "alpha": alpha});
    CausalGraph::new(ts.var_names().to_vec(), lag, edges, vec![], meta)
}

/// Pairwise transfer entropy for every ordered pair of distinct variables
/// and every lag in `1..=lag`.
pub fn te_discovery(ts: &TimeSeries, lag: usize, alpha: f64, params: &TeParams, seed: u64) -> Result<CausalGraph> {
    if lag == 0 {
        return Err(Error::config("lag must be at least 1"));
    }
    let n = ts.n_vars();
    let pairs: Vec<(usize, usize, usize)> = (1..=lag)
        .flat_map(|tau| (0..n).flat_map(move |i| (0..n).map(move |j| (i, j, tau))))
        .filter(|&(i, j, _)| i != j)
        .collect();
    let results = pairs
        .par_iter()
        .map(|&(i, j, tau)| {
            let s = derive(seed, &[i as u64, j as u64, tau as u64]);
            transfer_entropy(ts.column(i), ts.column(j), tau, params, s)
        })
        .collect::<Result<Vec<_>>>()?;
    let edges = pairs
        .iter()
        .zip(results)
        .filter(|(_, r)| r.dependent(alpha))
        .map(|(&(i, j, tau), r)| LaggedEdge {
            source: i,
            target: j,
            lag: tau,
            statistic: r.statistic,
            p_value: r.p_value,
        })
        .collect();
    let meta = serde_json::json!({
        "method": "te",
        "lag": lag,
        "alpha": alpha,
        "te_params": params,
        "seed": seed,
    });
    CausalGraph::new(ts.var_names().to_vec(), lag, edges, vec![], meta)
}
