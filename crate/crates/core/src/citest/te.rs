//! Histogram transfer entropy with circular-shift surrogates.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::TestResult;
use crate::rng::seeded;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TeParams {
    /// Equal-frequency bins per dimension.
    pub bins: usize,
    pub n_surrogates: usize,
    /// Smallest circular shift; `None` uses `max(lag + 1, n / 10)`.
    pub min_shift: Option<usize>,
}

impl Default for TeParams {
    fn default() -> Self {
        TeParams {
            bins: 8,
            n_surrogates: 200,
            min_shift: None,
        }
    }
}

/// Equal-frequency bin labels. Equal values always share a bin.
pub(crate) fn equal_frequency_bins(x: &[f64], bins: usize) -> Vec<usize> {
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let edges: Vec<f64> = (1..bins).map(|q| sorted[(q * n / bins).min(n - 1)]).collect();
    x.iter()
        .map(|v| edges.partition_point(|e| e <= v))
        .collect()
}

fn populated(labels: &[usize], bins: usize) -> usize {
    let mut seen = vec![false; bins];
    labels.iter().for_each(|&l| seen[l] = true);
    seen.iter().filter(|&&s| s).count()
}

fn plugin_entropy(counts: &[u32], total: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.ln()
        })
        .sum()
}

/// Plug-in `I(A; B | C)` in nats for discrete labels below `bins`.
fn conditional_mi(a: &[usize], b: &[usize], c: &[usize], bins: usize) -> f64 {
    let n = a.len() as f64;
    let mut abc = vec![0u32; bins * bins * bins];
    let mut ac = vec![0u32; bins * bins];
    let mut bc = vec![0u32; bins * bins];
    let mut cc = vec![0u32; bins];
    for i in 0..a.len() {
        abc[(a[i] * bins + b[i]) * bins + c[i]] += 1;
        ac[a[i] * bins + c[i]] += 1;
        bc[b[i] * bins + c[i]] += 1;
        cc[c[i]] += 1;
    }
    plugin_entropy(&ac, n) + plugin_entropy(&bc, n) - plugin_entropy(&cc, n) - plugin_entropy(&abc, n)
}

fn te_from_labels(src: &[usize], tgt: &[usize], lag: usize, bins: usize) -> f64 {
    let start = lag.max(1);
    let n = tgt.len();
    let a = &tgt[start..];
    let b = &src[start - lag..n - lag];
    let c = &tgt[start - 1..n - 1];
    conditional_mi(a, b, c, bins)
}

/// `TE(source → target) = I(target_t ; source_{t-lag} | target_{t-1})`.
///
/// Both series are discretised into equal-frequency bins. The p-value is
/// `(1 + #{surrogates ≥ observed}) / (n_surrogates + 1)` where surrogates
/// circularly shift the binned source by a uniformly drawn offset.
pub fn transfer_entropy(source: &[f64], target: &[f64], lag: usize, params: &TeParams, seed: u64) -> Result<TestResult> {
    let n = source.len();
    if target.len() != n {
        return Err(Error::config("source and target differ in length"));
    }
    if lag == 0 {
        return Err(Error::config("transfer entropy needs lag >= 1"));
    }
    if n <= lag + 2 {
        return Err(Error::config(format!("series of length {n} too short for lag {lag}")));
    }
    if params.bins < 2 {
        return Err(Error::config("need at least two bins"));
    }
    let src = equal_frequency_bins(source, params.bins);
    let tgt = equal_frequency_bins(target, params.bins);
    if populated(&src, params.bins) < 3 || populated(&tgt, params.bins) < 3 {
        return Err(Error::numerical("fewer than 3 populated bins in a marginal"));
    }
    let observed = te_from_labels(&src, &tgt, lag, params.bins);
    let min_shift = params.min_shift.unwrap_or((lag + 1).max(n / 10)).max(1);
    if 2 * min_shift > n {
        return Err(Error::config("series too short for the surrogate shift range"));
    }
    let mut rng = seeded(seed);
    let mut shifted = vec![0usize; n];
    let mut exceed = 0usize;
    for _ in 0..params.n_surrogates {
        let s = rng.random_range(min_shift..=n - min_shift);
        for (t, v) in shifted.iter_mut().enumerate() {
            *v = src[(t + s) % n];
        }
        if te_from_labels(&shifted, &tgt, lag, params.bins) >= observed {
            exceed += 1;
        }
    }
    Ok(TestResult::new(
        observed,
        (1 + exceed) as f64 / (params.n_surrogates + 1) as f64,
    ))
}
