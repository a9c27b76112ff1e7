//! Recurrence plots and recurrence quantification.

use serde::{Deserialize, Serialize};

use super::fractal::{chebyshev, embed};
use crate::{Error, Result};

/// How the recurrence threshold is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusPolicy {
    Fixed(f64),
    /// Fraction of the largest pairwise distance.
    FractionOfMax(f64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecurrencePlot {
    size: usize,
    points: Vec<bool>,
    pub m: usize,
    pub delay: usize,
    pub cross: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceResult {
    pub plot: RecurrencePlot,
    pub radius: f64,
}

impl RecurrencePlot {
    /// Build from an explicit square matrix (row-major).
    pub fn from_matrix(rows: &[Vec<bool>], cross: bool) -> Result<Self> {
        let size = rows.len();
        if size == 0 || rows.iter().any(|r| r.len() != size) {
            return Err(Error::config("recurrence matrix must be square and nonempty"));
        }
        Ok(RecurrencePlot {
            size,
            points: rows.concat(),
            m: 1,
            delay: 1,
            cross,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.points[i * self.size + j]
    }
}

/// Auto recurrence plot of `x`, or cross plot of `x` against `y`.
///
/// A cross plot of a series with an identical copy of itself is returned as
/// an auto plot, so both give the same quantification.
pub fn recurrence_plot(x: &[f64], y: Option<&[f64]>, m: usize, delay: usize, radius: RadiusPolicy) -> Result<RecurrenceResult> {
    if m == 0 || delay == 0 {
        return Err(Error::config("embedding dimension and delay must be positive"));
    }
    if x.len() < (m - 1) * delay + 2 {
        return Err(Error::data("series too short for the embedding"));
    }
    let y = y.filter(|y| *y != x);
    if let Some(y) = y {
        if y.len() != x.len() {
            return Err(Error::data("cross recurrence needs equal lengths"));
        }
    }
    let ex = embed(x, m, delay);
    let ey = y.map(|y| embed(y, m, delay));
    let other = ey.as_ref().unwrap_or(&ex);
    let size = ex.len();
    let mut dist = vec![0.0; size * size];
    for i in 0..size {
        for j in 0..size {
            dist[i * size + j] = chebyshev(&ex[i], &other[j]);
        }
    }
    let eps = match radius {
        RadiusPolicy::Fixed(e) => {
            if !(e > 0.0) {
                return Err(Error::config("recurrence radius must be positive"));
            }
            e
        }
        RadiusPolicy::FractionOfMax(q) => {
            if !(q > 0.0) {
                return Err(Error::config("radius fraction must be positive"));
            }
            let e = q * dist.iter().copied().fold(0.0, f64::max);
            if !(e > 0.0) {
                return Err(Error::numerical("all embedded points coincide"));
            }
            e
        }
    };
    Ok(RecurrenceResult {
        plot: RecurrencePlot {
            size,
            points: dist.iter().map(|&d| d <= eps).collect(),
            m,
            delay,
            cross: y.is_some(),
        },
        radius: eps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RqaResult {
    pub rr: f64,
    pub det: f64,
    pub lam: f64,
    pub tt: f64,
    pub l_max: f64,
    pub v_max: f64,
    pub div: f64,
    pub entr_diag: f64,
    pub l_mean: f64,
    pub v_mean: f64,
}

impl RqaResult {
    pub const NAMES: [&'static str; 10] = ["rr", "det", "lam", "tt", "l_max", "v_max", "div", "entr", "l_mean", "v_mean"];

    pub fn values(&self) -> [f64; 10] {
        [
            self.rr,
            self.det,
            self.lam,
            self.tt,
            self.l_max,
            self.v_max,
            self.div,
            self.entr_diag,
            self.l_mean,
            self.v_mean,
        ]
    }
}

/// Lengths of maximal runs of `true`.
fn runs(cells: impl Iterator<Item = bool>, out: &mut Vec<usize>) {
    let mut len = 0;
    for c in cells {
        if c {
            len += 1;
        } else if len > 0 {
            out.push(len);
            len = 0;
        }
    }
    if len > 0 {
        out.push(len);
    }
}

struct LineStats {
    qualifying_points: usize,
    all_points: usize,
    count: usize,
    max: usize,
    entropy: f64,
}

fn line_stats(lines: &[usize], min_len: usize) -> LineStats {
    let q: Vec<usize> = lines.iter().copied().filter(|&l| l >= min_len).collect();
    let mut hist = std::collections::BTreeMap::new();
    for &l in &q {
        *hist.entry(l).or_insert(0usize) += 1;
    }
    let entropy = hist
        .values()
        .map(|&c| {
            let p = c as f64 / q.len() as f64;
            -p * p.ln()
        })
        .sum::<f64>();
    LineStats {
        qualifying_points: q.iter().sum(),
        all_points: lines.iter().sum(),
        count: q.len(),
        max: q.iter().copied().max().unwrap_or(0),
        entropy: entropy.max(0.0),
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Recurrence quantification.
///
/// For auto plots the main diagonal is excluded from `rr` and from all
/// diagonal-line measures; vertical-line measures use every column in
/// full. `div` is `1 / l_max`, or the plot size when no diagonal line
/// reaches `l_min`.
pub fn rqa(rp: &RecurrencePlot, l_min: usize, v_min: usize) -> RqaResult {
    let n = rp.size;
    let l_min = l_min.max(1);
    let v_min = v_min.max(1);
    let mut diag = Vec::new();
    for k in -(n as isize - 1)..n as isize {
        if k == 0 && !rp.cross {
            continue;
        }
        let (i0, j0) = if k >= 0 { (0, k as usize) } else { ((-k) as usize, 0) };
        let len = n - k.unsigned_abs();
        runs((0..len).map(|t| rp.get(i0 + t, j0 + t)), &mut diag);
    }
    let mut vert = Vec::new();
    for j in 0..n {
        runs((0..n).map(|i| rp.get(i, j)), &mut vert);
    }
    let d = line_stats(&diag, l_min);
    let v = line_stats(&vert, v_min);
    let cells = if rp.cross { n * n } else { n * n - n };
    let v_mean = ratio(v.qualifying_points, v.count);
    RqaResult {
        rr: ratio(d.all_points, cells),
        det: ratio(d.qualifying_points, d.all_points),
        lam: ratio(v.qualifying_points, v.all_points),
        tt: v_mean,
        l_max: d.max as f64,
        v_max: v.max as f64,
        div: if d.max > 0 { 1.0 / d.max as f64 } else { n as f64 },
        entr_diag: d.entropy,
        l_mean: ratio(d.qualifying_points, d.count),
        v_mean,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Enumerate maximal segments by their start cells.
    fn oracle(m: &[Vec<bool>], cross: bool, l_min: usize, v_min: usize) -> RqaResult {
        let n = m.len();
        let on = |i: isize, j: isize| i >= 0 && j >= 0 && (i as usize) < n && (j as usize) < n && m[i as usize][j as usize];
        let on_diag = |i: isize, j: isize| on(i, j) && (cross || i != j);
        let mut diag = Vec::new();
        let mut vert = Vec::new();
        for i in 0..n as isize {
            for j in 0..n as isize {
                if on_diag(i, j) && !on_diag(i - 1, j - 1) {
                    let mut l = 0;
                    while on_diag(i + l, j + l) {
                        l += 1;
                    }
                    diag.push(l as usize);
                }
                if on(i, j) && !on(i - 1, j) {
                    let mut l = 0;
                    while on(i + l, j) {
                        l += 1;
                    }
                    vert.push(l as usize);
                }
            }
        }
        let off: usize = (0..n).map(|i| (0..n).filter(|&j| m[i][j] && (cross || i != j)).count()).sum();
        let cells = if cross { n * n } else { n * n - n };
        let dq: Vec<usize> = diag.iter().copied().filter(|&l| l >= l_min).collect();
        let vq: Vec<usize> = vert.iter().copied().filter(|&l| l >= v_min).collect();
        let sum = |v: &[usize]| v.iter().sum::<usize>() as f64;
        let div0 = |a: f64, b: f64| if b == 0.0 { 0.0 } else { a / b };
        let mut entr = 0.0;
        let mut distinct = dq.clone();
        distinct.sort();
        distinct.dedup();
        for l in distinct {
            let p = dq.iter().filter(|&&x| x == l).count() as f64 / dq.len() as f64;
            entr -= p * p.ln();
        }
        let l_max = dq.iter().copied().max().unwrap_or(0);
        RqaResult {
            rr: div0(off as f64, cells as f64),
            det: div0(sum(&dq), sum(&diag)),
            lam: div0(sum(&vq), sum(&vert)),
            tt: div0(sum(&vq), vq.len() as f64),
            l_max: l_max as f64,
            v_max: vq.iter().copied().max().unwrap_or(0) as f64,
            div: if l_max > 0 { 1.0 / l_max as f64 } else { n as f64 },
            entr_diag: entr.max(0.0),
            l_mean: div0(sum(&dq), dq.len() as f64),
            v_mean: div0(sum(&vq), vq.len() as f64),
        }
    }

    #[test]
    fn constant_series_saturates() {
        let r = recurrence_plot(&[2.0; 10], None, 1, 1, RadiusPolicy::Fixed(0.1)).unwrap();
        assert!((0..10).all(|i| (0..10).all(|j| r.plot.get(i, j))));
        let q = rqa(&r.plot, 2, 2);
        assert_eq!((q.rr, q.lam, q.l_max, q.v_max), (1.0, 1.0, 9.0, 10.0));
        // the two corner diagonals are single points
        assert_eq!(q.det, 88.0 / 90.0);
        assert_eq!(q.div, 1.0 / 9.0);
    }

    #[test]
    fn isolated_point() {
        let mut m = vec![vec![false; 5]; 5];
        m[1][3] = true;
        let q = rqa(&RecurrencePlot::from_matrix(&m, true).unwrap(), 2, 2);
        assert_eq!((q.det, q.entr_diag, q.l_max, q.div), (0.0, 0.0, 0.0, 5.0));
        assert_eq!(q.rr, 1.0 / 25.0);
    }

    #[test]
    fn hand_series_matches_distances() {
        let x = [0.0, 0.3, 1.0, 0.2, 0.9, 2.0];
        let r = recurrence_plot(&x, None, 1, 1, RadiusPolicy::Fixed(0.5)).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(r.plot.get(i, j), (x[i] - x[j]).abs() <= 0.5);
            }
        }
    }

    #[test]
    fn period_two_series() {
        let x: Vec<f64> = (0..12).map(|i| (i % 2) as f64).collect();
        let r = recurrence_plot(&x, None, 1, 1, RadiusPolicy::Fixed(0.1)).unwrap();
        let m: Vec<Vec<bool>> = (0..12).map(|i| (0..12).map(|j| r.plot.get(i, j)).collect()).collect();
        assert_eq!(rqa(&r.plot, 2, 2), oracle(&m, false, 2, 2));
        let q = rqa(&r.plot, 2, 2);
        assert_eq!(q.lam, 0.0);
        assert_eq!(q.l_max, 10.0);
    }

    #[test]
    fn cross_with_self_is_auto() {
        let x = [0.1, 0.5, 0.2, 0.9, 0.4, 0.45, 0.3];
        let a = recurrence_plot(&x, None, 2, 1, RadiusPolicy::FractionOfMax(0.3)).unwrap();
        let c = recurrence_plot(&x, Some(&x), 2, 1, RadiusPolicy::FractionOfMax(0.3)).unwrap();
        assert_eq!(a, c);
        assert_eq!(rqa(&a.plot, 2, 2), rqa(&c.plot, 2, 2));
    }

    #[test]
    fn errors() {
        let x = [1.0, 2.0, 3.0];
        assert!(recurrence_plot(&x, None, 1, 1, RadiusPolicy::Fixed(0.0)).is_err());
        assert!(recurrence_plot(&x, None, 3, 1, RadiusPolicy::Fixed(1.0)).is_err());
        assert!(recurrence_plot(&x, Some(&[1.0, 2.0]), 1, 1, RadiusPolicy::Fixed(1.0)).is_err());
        assert!(recurrence_plot(&[1.0; 5], None, 1, 1, RadiusPolicy::FractionOfMax(0.1)).is_err());
    }

    fn arb_matrix() -> impl Strategy<Value = (Vec<Vec<bool>>, bool)> {
        (1usize..=30, any::<bool>()).prop_flat_map(|(n, cross)| {
            (proptest::collection::vec(proptest::collection::vec(any::<bool>(), n), n), Just(cross))
        })
    }

    proptest! {
        #[test]
        fn rqa_matches_line_enumeration((m, cross) in arb_matrix(), l_min in 1usize..4, v_min in 1usize..4) {
            let rp = RecurrencePlot::from_matrix(&m, cross).unwrap();
            let q = rqa(&rp, l_min, v_min);
            prop_assert_eq!(q, oracle(&m, cross, l_min, v_min));
            for v in [q.rr, q.det, q.lam] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }

        #[test]
        fn wider_radius_never_lowers_rr(x in proptest::collection::vec(-5.0f64..5.0, 5..30), e in 0.01f64..2.0, extra in 0.0f64..2.0) {
            let a = rqa(&recurrence_plot(&x, None, 1, 1, RadiusPolicy::Fixed(e)).unwrap().plot, 2, 2);
            let b = rqa(&recurrence_plot(&x, None, 1, 1, RadiusPolicy::Fixed(e + extra)).unwrap().plot, 2, 2);
            prop_assert!(b.rr >= a.rr);
        }

        #[test]
        fn shift_invariance(x in proptest::collection::vec(-5.0f64..5.0, 8..30), c in -100.0f64..100.0) {
            let y: Vec<f64> = x.iter().map(|v| v + c).collect();
            let xr = recurrence_plot(&x, None, 2, 1, RadiusPolicy::Fixed(1.0)).unwrap();
            let yr = recurrence_plot(&y, None, 2, 1, RadiusPolicy::Fixed(1.0)).unwrap();
            // rounding can move a distance across the radius only when it sits on it
            let near: bool = {
                let e = embed(&x, 2, 1);
                e.iter().any(|a| e.iter().any(|b| (chebyshev(a, b) - 1.0).abs() < 1e-9))
            };
            if !near {
                prop_assert_eq!(rqa(&xr.plot, 2, 2), rqa(&yr.plot, 2, 2));
            }
        }
    }
}
