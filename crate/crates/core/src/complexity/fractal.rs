//! Scaling exponents and fractal dimensions.

use serde::{Deserialize, Serialize};

use crate::stats::{linear_slope, mean, population_sd};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingKind {
    HurstRs,
    Dfa,
}

pub const MIN_SCALING_LEN: usize = 64;

/// Hurst exponent (rescaled range) or DFA-1 exponent.
pub fn scaling_exponent(x: &[f64], kind: ScalingKind) -> Result<f64> {
    if x.len() < MIN_SCALING_LEN {
        return Err(Error::data(format!(
            "scaling exponents need at least {MIN_SCALING_LEN} samples"
        )));
    }
    match kind {
        ScalingKind::HurstRs => hurst_rs(x),
        ScalingKind::Dfa => dfa(x),
    }
}

fn fit_loglog(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 4 {
        return Err(Error::numerical("fewer than 4 usable window sizes"));
    }
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    Ok(linear_slope(&lx, &ly))
}

/// Mean R/S over non-overlapping windows of dyadic sizes `8..=T/2`.
fn hurst_rs(x: &[f64]) -> Result<f64> {
    let mut points = Vec::new();
    let mut n = 8;
    while n <= x.len() / 2 {
        let rs: Vec<f64> = x
            .chunks_exact(n)
            .filter_map(|w| {
                let m = mean(w);
                let s = population_sd(w);
                if s == 0.0 {
                    return None;
                }
                let (mut acc, mut lo, mut hi) = (0.0f64, 0.0f64, 0.0f64);
                for v in w {
                    acc += v - m;
                    lo = lo.min(acc);
                    hi = hi.max(acc);
                }
                Some((hi - lo) / s)
            })
            .collect();
        if !rs.is_empty() {
            points.push((n as f64, mean(&rs)));
        }
        n *= 2;
    }
    fit_loglog(&points)
}

/// Log-spaced integer window sizes in `[lo, hi]`.
fn log_sizes(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    if hi < lo {
        return Vec::new();
    }
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut v: Vec<usize> = (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp().round() as usize)
        .collect();
    v.dedup();
    v
}

/// DFA with linear detrending over log-spaced window sizes in `[4, T/4]`.
fn dfa(x: &[f64]) -> Result<f64> {
    let m = mean(x);
    let mut profile = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    for v in x {
        acc += v - m;
        profile.push(acc);
    }
    let mut points = Vec::new();
    for n in log_sizes(4, x.len() / 4, 16) {
        let t: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let tm = mean(&t);
        let stt: f64 = t.iter().map(|v| (v - tm).powi(2)).sum();
        let mut sq = 0.0;
        let mut cnt = 0usize;
        for w in profile.chunks_exact(n) {
            let wm = mean(w);
            let b = t.iter().zip(w).map(|(a, y)| (a - tm) * (y - wm)).sum::<f64>() / stt;
            for (ti, y) in t.iter().zip(w) {
                let r = y - (wm + b * (ti - tm));
                sq += r * r;
            }
            cnt += n;
        }
        let f = (sq / cnt as f64).sqrt();
        if f > 0.0 {
            points.push((n as f64, f));
        }
    }
    fit_loglog(&points)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FractalKind {
    Higuchi { k_max: usize },
    Petrosian,
    Correlation { m: usize, delay: usize },
}

pub const MIN_FRACTAL_LEN: usize = 16;
pub const MIN_CORRELATION_LEN: usize = 100;

pub fn fractal_dimension(x: &[f64], kind: FractalKind) -> Result<f64> {
    let need = match kind {
        FractalKind::Correlation { .. } => MIN_CORRELATION_LEN,
        _ => MIN_FRACTAL_LEN,
    };
    if x.len() < need {
        return Err(Error::data(format!("fractal dimension needs at least {need} samples")));
    }
    match kind {
        FractalKind::Higuchi { k_max } => higuchi(x, k_max),
        FractalKind::Petrosian => Ok(petrosian(x)),
        FractalKind::Correlation { m, delay } => correlation_dimension(x, m, delay),
    }
}

fn higuchi(x: &[f64], k_max: usize) -> Result<f64> {
    let n = x.len();
    if k_max < 2 || k_max >= n / 2 {
        return Err(Error::config("k_max must lie in 2..T/2"));
    }
    let mut points = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let mut total = 0.0;
        for m in 0..k {
            let steps = (n - 1 - m) / k;
            let len: f64 = (1..=steps).map(|i| (x[m + i * k] - x[m + (i - 1) * k]).abs()).sum();
            total += len * (n - 1) as f64 / (steps * k) as f64 / k as f64;
        }
        let l = total / k as f64;
        if !(l > 0.0) {
            return Err(Error::numerical("zero curve length"));
        }
        points.push(((1.0 / k as f64).ln(), l.ln()));
    }
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
    Ok(linear_slope(&lx, &ly))
}

fn petrosian(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let d: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let changes = d.windows(2).filter(|w| w[0] * w[1] < 0.0).count() as f64;
    n.log10() / (n.log10() + (n / (n + 0.4 * changes)).log10())
}

/// Delay embedding as rows of length `m`.
pub(crate) fn embed(x: &[f64], m: usize, delay: usize) -> Vec<Vec<f64>> {
    let span = (m - 1) * delay;
    if x.len() <= span {
        return Vec::new();
    }
    (0..x.len() - span)
        .map(|i| (0..m).map(|k| x[i + k * delay]).collect())
        .collect()
}

pub(crate) fn chebyshev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
}

/// Grassberger-Procaccia slope of `ln C(eps)` on `ln eps` over 10
/// log-spaced radii between the 2% and 25% quantiles of the positive
/// pairwise distances.
fn correlation_dimension(x: &[f64], m: usize, delay: usize) -> Result<f64> {
    if m == 0 || delay == 0 {
        return Err(Error::config("embedding dimension and delay must be positive"));
    }
    let pts = embed(x, m, delay);
    let mut d: Vec<f64> = Vec::with_capacity(pts.len() * pts.len() / 2);
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            d.push(chebyshev(&pts[i], &pts[j]));
        }
    }
    d.sort_by(f64::total_cmp);
    let first_pos = d.partition_point(|&v| v <= 0.0);
    let pos = &d[first_pos..];
    if pos.len() < 10 {
        return Err(Error::numerical("degenerate embedding"));
    }
    let q = |p: f64| pos[((pos.len() - 1) as f64 * p).round() as usize];
    let (lo, hi) = (q(0.02), q(0.25));
    if !(hi > lo) {
        return Err(Error::numerical("no scaling range in the distance distribution"));
    }
    let total = d.len() as f64;
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for i in 0..10 {
        let eps = (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / 9.0).exp();
        let c = d.partition_point(|&v| v <= eps) as f64 / total;
        lx.push(eps.ln());
        ly.push(c.ln());
    }
    Ok(linear_slope(&lx, &ly))
}
