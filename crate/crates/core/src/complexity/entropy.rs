//! Sign changes, ordinal-pattern entropy and template-matching entropies.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::stats::{mean, population_sd};
use crate::{Error, Result};

/// Sign changes of `x - mean(x)`; zeros keep the previous sign.
pub fn zero_crossings(x: &[f64]) -> usize {
    let m = mean(x);
    let mut last = 0i8;
    let mut count = 0;
    for &v in x {
        let s = if v > m {
            1
        } else if v < m {
            -1
        } else {
            continue;
        };
        if last != 0 && s != last {
            count += 1;
        }
        last = s;
    }
    count
}

/// Ordinal pattern (argsort, ties by position) of every embedded window.
fn ordinal_patterns(x: &[f64], m: usize, delay: usize) -> Vec<Vec<u8>> {
    let span = (m - 1) * delay;
    (0..x.len() - span)
        .map(|i| {
            let mut idx: Vec<u8> = (0..m as u8).collect();
            idx.sort_by(|&a, &b| {
                x[i + a as usize * delay]
                    .total_cmp(&x[i + b as usize * delay])
                    .then(a.cmp(&b))
            });
            idx
        })
        .collect()
}

/// Shannon entropy of ordinal patterns of order `m`, normalised by `ln(m!)`.
pub fn permutation_entropy(x: &[f64], m: usize, delay: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::config("permutation entropy needs order m >= 2"));
    }
    if delay == 0 {
        return Err(Error::config("delay must be positive"));
    }
    if x.len() < m * delay + 1 {
        return Err(Error::data("series too short for permutation entropy"));
    }
    let mut counts: BTreeMap<Vec<u8>, usize> = BTreeMap::new();
    let patterns = ordinal_patterns(x, m, delay);
    for p in &patterns {
        *counts.entry(p.clone()).or_insert(0) += 1;
    }
    let n = patterns.len() as f64;
    let h: f64 = counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum();
    let log_fact: f64 = (2..=m).map(|k| (k as f64).ln()).sum();
    Ok((h / log_fact).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegularityKind {
    Approximate,
    Sample,
}

fn chebyshev_within(x: &[f64], i: usize, j: usize, len: usize, tol: f64) -> bool {
    (0..len).all(|k| (x[i + k] - x[j + k]).abs() <= tol)
}

/// Approximate or sample entropy with tolerance `r * SD(x)` (population SD)
/// and Chebyshev template distance.
///
/// Sample entropy without any match returns `ln((T-m)(T-m-1)/2)`, the
/// largest value resolvable from `T` samples.
pub fn regularity_entropy(x: &[f64], kind: RegularityKind, m: usize, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::config("tolerance r must be positive"));
    }
    if m == 0 {
        return Err(Error::config("template length m must be positive"));
    }
    let n = x.len();
    if n < m + 2 {
        return Err(Error::data("series too short for regularity entropy"));
    }
    let tol = r * population_sd(x);
    Ok(match kind {
        RegularityKind::Approximate => {
            let phi = |len: usize| {
                let count = n - len + 1;
                (0..count)
                    .map(|i| {
                        let c = (0..count).filter(|&j| chebyshev_within(x, i, j, len, tol)).count();
                        (c as f64 / count as f64).ln()
                    })
                    .sum::<f64>()
                    / count as f64
            };
            phi(m) - phi(m + 1)
        }
        RegularityKind::Sample => {
            // same n - m templates for both lengths
            let count = n - m;
            let (mut b, mut a) = (0usize, 0usize);
            for i in 0..count {
                for j in i + 1..count {
                    if chebyshev_within(x, i, j, m, tol) {
                        b += 1;
                        if (x[i + m] - x[j + m]).abs() <= tol {
                            a += 1;
                        }
                    }
                }
            }
            if a == 0 || b == 0 {
                ((n - m) as f64).ln() + ((n - m - 1) as f64).ln() - 2f64.ln()
            } else {
                -(a as f64 / b as f64).ln()
            }
        }
    })
}
