//! Nearest-neighbour conditional mutual information.
//!
//! The estimator is the digamma form
//! `ψ(k) − ⟨ψ(n_xz+1) + ψ(n_yz+1) − ψ(n_z+1)⟩` where, for each sample, the
//! ball radius is the distance to its k-th neighbour in the joint
//! `(x, y, z)` space under the max-norm and the `n_*` count points strictly
//! inside that radius in the respective subspaces. With empty `z` this
//! reduces to the KSG mutual information estimator.
//!
//! Significance comes from a local permutation test: each `x_i` is replaced
//! by the `x` of one of its `k_perm` nearest neighbours in `z`-space, drawn
//! without replacement where possible, so that the `x`–`z` dependence
//! survives while any `x`–`y | z` dependence is destroyed.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use statrs::distribution::{ContinuousCDF, Normal};

use super::{check_lengths, CondIndTest, TestResult};
use crate::rng::{derive, seeded};
use crate::stats::{mean, ranks, sample_sd};
use crate::{Error, Result};

/// Marginal preprocessing applied before neighbour search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankTransform {
    /// Replace every dimension by its ranks (copula transform).
    Ranks,
    /// Scale every dimension to zero mean and unit variance.
    Standardize,
    /// Ranks mapped through the standard normal quantile function.
    #[default]
    NormalScores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmiKnn {
    /// Neighbour count of the estimator.
    pub k: usize,
    /// Number of permutation surrogates.
    pub n_perm: usize,
    /// Size of the `z`-neighbourhood used by the local permutation.
    pub k_perm: usize,
    pub transform: RankTransform,
    /// Tie-breaking jitter amplitude, relative to each column's s.d.
    pub jitter: f64,
}

impl Default for CmiKnn {
    fn default() -> Self {
        CmiKnn {
            k: 4,
            n_perm: 200,
            k_perm: 5,
            transform: RankTransform::default(),
            jitter: 1e-10,
        }
    }
}

fn column_hash(c: &[f64]) -> u64 {
    c.iter()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, v| (h ^ v.to_bits()).wrapping_mul(0x100_0000_01b3))
}

/// Max-norm pairwise distance matrix (row-major `n×n`) over a set of columns.
fn max_norm_distances(cols: &[Vec<f64>], n: usize) -> Vec<f64> {
    let mut d = vec![0.0; n * n];
    for c in cols {
        for i in 0..n {
            for j in (i + 1)..n {
                let v = (c[i] - c[j]).abs();
                if v > d[i * n + j] {
                    d[i * n + j] = v;
                    d[j * n + i] = v;
                }
            }
        }
    }
    d
}

/// ψ(m) for m = 0..=n (index 0 unused).
fn digamma_table(n: usize) -> Vec<f64> {
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    let mut t = vec![f64::NAN; n + 2];
    t[1] = -EULER_GAMMA;
    for m in 1..=n {
        t[m + 1] = t[m] + 1.0 / m as f64;
    }
    t
}

/// Core estimator on preprocessed data. `dz` is the z-space distance matrix
/// or `None` when there are no conditions.
fn cmi_from_prepared(x: &[f64], y: &[f64], dz: Option<&[f64]>, k: usize, psi: &[f64]) -> f64 {
    let n = x.len();
    let mut best = vec![f64::INFINITY; k];
    let mut acc = 0.0;
    for i in 0..n {
        best.iter_mut().for_each(|b| *b = f64::INFINITY);
        let row = dz.map(|d| &d[i * n..(i + 1) * n]);
        for j in 0..n {
            if j == i {
                continue;
            }
            let mut d = (x[i] - x[j]).abs().max((y[i] - y[j]).abs());
            if let Some(r) = row {
                d = d.max(r[j]);
            }
            if d < best[k - 1] {
                let mut pos = k - 1;
                while pos > 0 && best[pos - 1] > d {
                    best[pos] = best[pos - 1];
                    pos -= 1;
                }
                best[pos] = d;
            }
        }
        let eps = best[k - 1];
        let (mut nxz, mut nyz, mut nz) = (0usize, 0usize, 0usize);
        for j in 0..n {
            if j == i {
                continue;
            }
            let dzj = row.map_or(0.0, |r| r[j]);
            if dzj < eps {
                nz += 1;
                if (x[i] - x[j]).abs() < eps {
                    nxz += 1;
                }
                if (y[i] - y[j]).abs() < eps {
                    nyz += 1;
                }
            }
        }
        acc += psi[nxz + 1] + psi[nyz + 1] - psi[nz + 1];
    }
    psi[k] - acc / n as f64
}

impl CmiKnn {
    pub fn with_k(k: usize) -> Self {
        CmiKnn { k, ..Self::default() }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.k == 0 {
            return Err(Error::config("k must be at least 1"));
        }
        if self.k >= n {
            return Err(Error::config(format!("k = {} must be below the sample count {n}", self.k)));
        }
        if n < self.k + 2 {
            return Err(Error::config(format!("need at least k + 2 = {} samples", self.k + 2)));
        }
        Ok(())
    }

    /// Jitter ties away and apply the marginal transform.
    ///
    /// The jitter stream of a column is keyed by the column's content, so
    /// the preprocessing of `x` does not depend on its argument position.
    fn prepare(&self, c: &[f64], seed: u64) -> Vec<f64> {
        let sd = sample_sd(c);
        if !(sd > 0.0) {
            return vec![0.0; c.len()];
        }
        let mut rng = seeded(derive(seed, &[column_hash(c)]));
        let amp = self.jitter * sd;
        let jittered: Vec<f64> = c.iter().map(|v| v + amp * rng.random::<f64>()).collect();
        match self.transform {
            RankTransform::Ranks => ranks(&jittered),
            RankTransform::NormalScores => {
                let n = jittered.len() as f64;
                let normal = Normal::standard();
                ranks(&jittered)
                    .iter()
                    .map(|r| normal.inverse_cdf((r + 1.0) / (n + 1.0)))
                    .collect()
            }
            RankTransform::Standardize => {
                let (m, s) = (mean(&jittered), sample_sd(&jittered));
                jittered.iter().map(|v| (v - m) / s).collect()
            }
        }
    }

    fn prepare_all(&self, x: &[f64], y: &[f64], z: &[&[f64]], seed: u64) -> (Vec<f64>, Vec<f64>, Option<Vec<f64>>) {
        let n = x.len();
        let jseed = derive(seed, &[0]);
        let px = self.prepare(x, jseed);
        let py = self.prepare(y, jseed);
        let dz = (!z.is_empty()).then(|| {
            let pz: Vec<Vec<f64>> = z.iter().map(|c| self.prepare(c, jseed)).collect();
            max_norm_distances(&pz, n)
        });
        (px, py, dz)
    }

    /// CMI estimate in nats. Symmetric in `x` and `y`.
    pub fn estimate(&self, x: &[f64], y: &[f64], z: &[&[f64]], seed: u64) -> Result<f64> {
        let n = check_lengths(x, y, z)?;
        self.validate(n)?;
        let (px, py, dz) = self.prepare_all(x, y, z, seed);
        Ok(cmi_from_prepared(&px, &py, dz.as_deref(), self.k, &digamma_table(n)))
    }

    /// Restricted permutation keeping each sample within its `z`-neighbourhood.
    fn local_permutation(&self, dz: &[f64], n: usize, rng: &mut impl Rng) -> Vec<usize> {
        let kp = self.k_perm.clamp(1, n);
        let mut neighbours: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                let row = &dz[i * n..(i + 1) * n];
                let mut idx: Vec<usize> = (0..n).collect();
                let cmp = |a: &usize, b: &usize| row[*a].total_cmp(&row[*b]).then(a.cmp(b));
                if kp < n {
                    idx.select_nth_unstable_by(kp - 1, cmp);
                    idx.truncate(kp);
                }
                idx.sort_by(cmp);
                idx
            })
            .collect();
        for nb in neighbours.iter_mut() {
            nb.shuffle(rng);
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut used = vec![false; n];
        let mut perm = vec![0usize; n];
        for &i in &order {
            let nb = &neighbours[i];
            let mut m = 0;
            let mut pick = nb[0];
            while used[pick] && m < nb.len() - 1 {
                m += 1;
                pick = nb[m];
            }
            perm[i] = pick;
            used[pick] = true;
        }
        perm
    }

    /// Local-permutation significance test.
    pub fn test(&self, x: &[f64], y: &[f64], z: &[&[f64]], seed: u64) -> Result<TestResult> {
        let n = check_lengths(x, y, z)?;
        self.validate(n)?;
        if self.n_perm < 1 {
            return Err(Error::config("n_perm must be positive"));
        }
        let psi = digamma_table(n);
        let (px, py, dz) = self.prepare_all(x, y, z, seed);
        let observed = cmi_from_prepared(&px, &py, dz.as_deref(), self.k, &psi);
        let mut rng = seeded(derive(seed, &[1]));
        let mut xs = px.clone();
        let mut exceed = 0usize;
        for _ in 0..self.n_perm {
            match dz.as_deref() {
                Some(d) => {
                    let perm = self.local_permutation(d, n, &mut rng);
                    for (dst, &src) in xs.iter_mut().zip(&perm) {
                        *dst = px[src];
                    }
                }
                None => xs.shuffle(&mut rng),
            }
            if cmi_from_prepared(&xs, &py, dz.as_deref(), self.k, &psi) >= observed {
                exceed += 1;
            }
        }
        Ok(TestResult::new(
            observed,
            (1 + exceed) as f64 / (self.n_perm + 1) as f64,
        ))
    }
}

impl CondIndTest for CmiKnn {
    fn name(&self) -> &'static str {
        "cmiknn"
    }

    fn run(&self, x: &[f64], y: &[f64], z: &[&[f64]], seed: u64) -> Result<TestResult> {
        self.test(x, y, z, seed)
    }

    fn params(&self) -> serde_json::Value {
        json!({
            "name": "cmiknn",
            "k": self.k,
            "n_perm": self.n_perm,
            "k_perm": self.k_perm,
            "transform": self.transform,
            "jitter": self.jitter,
        })
    }
}

/// CMI estimate with default preprocessing and a fixed jitter seed.
pub fn cmi_knn_estimate(x: &[f64], y: &[f64], z: &[&[f64]], k: usize) -> Result<f64> {
    CmiKnn::with_k(k).estimate(x, y, z, 0)
}

/// Local-permutation CMI test with default `k_perm` and preprocessing.
pub fn cmi_knn_test(x: &[f64], y: &[f64], z: &[&[f64]], k: usize, n_perm: usize, seed: u64) -> Result<TestResult> {
    if n_perm < 100 {
        return Err(Error::config("the permutation test needs n_perm >= 100"));
    }
    CmiKnn {
        k,
        n_perm,
        ..CmiKnn::default()
    }
    .test(x, y, z, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthgen::{gen_scm, ScmSpec};

    fn gaussian_pair(rho: f64, n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let (ts, _) = gen_scm(&ScmSpec::new(2), n, 1.0, seed).unwrap();
        let a = ts.column(0).to_vec();
        let b = a
            .iter()
            .zip(ts.column(1))
            .map(|(u, v)| rho * u + (1.0 - rho * rho).sqrt() * v)
            .collect();
        (a, b)
    }

    /// Brute-force reference: explicit sort of all joint distances per sample.
    fn brute_force_cmi(x: &[f64], y: &[f64], z: &[Vec<f64>], k: usize) -> f64 {
        let n = x.len();
        let dz = |i: usize, j: usize| z.iter().map(|c| (c[i] - c[j]).abs()).fold(0.0, f64::max);
        let mut acc = 0.0;
        for i in 0..n {
            let mut d: Vec<f64> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (x[i] - x[j]).abs().max((y[i] - y[j]).abs()).max(dz(i, j)))
                .collect();
            d.sort_by(f64::total_cmp);
            let eps = d[k - 1];
            let cnt = |f: &dyn Fn(usize) -> f64| (0..n).filter(|&j| j != i && f(j) < eps).count();
            let nxz = cnt(&|j| (x[i] - x[j]).abs().max(dz(i, j)));
            let nyz = cnt(&|j| (y[i] - y[j]).abs().max(dz(i, j)));
            let nz = cnt(&|j| dz(i, j));
            acc += statrs::function::gamma::digamma((nxz + 1) as f64)
                + statrs::function::gamma::digamma((nyz + 1) as f64)
                - statrs::function::gamma::digamma((nz + 1) as f64);
        }
        statrs::function::gamma::digamma(k as f64) - acc / n as f64
    }

    #[test]
    fn matches_brute_force_on_prepared_data() {
        let (ts, _) = gen_scm(&ScmSpec::new(3).linear(0, 1, 0, 0.7), 60, 1.0, 4).unwrap();
        let est = CmiKnn {
            transform: RankTransform::Standardize,
            jitter: 0.0,
            ..CmiKnn::with_k(3)
        };
        let p: Vec<Vec<f64>> = (0..3).map(|j| est.prepare(ts.column(j), 0)).collect();
        let dz = max_norm_distances(&p[2..], 60);
        let fast = cmi_from_prepared(&p[0], &p[1], Some(&dz), 3, &digamma_table(60));
        let slow = brute_force_cmi(&p[0], &p[1], &p[2..], 3);
        assert!((fast - slow).abs() < 1e-12, "{fast} vs {slow}");
    }

    #[test]
    fn gaussian_mutual_information() {
        let truth = -0.5 * (1.0f64 - 0.64).ln();
        let mean_est = |transform| {
            let est = CmiKnn { transform, ..CmiKnn::default() };
            (0..10)
                .map(|s| {
                    let (x, y) = gaussian_pair(0.8, 1000, 100 + s);
                    est.estimate(&x, &y, &[], 0).unwrap()
                })
                .sum::<f64>()
                / 10.0
        };
        // ranks carry a small upward bias at strong dependence
        let ranked = mean_est(RankTransform::Ranks);
        assert!(ranked > truth && ranked - truth < 0.08, "{ranked} vs {truth}");
        let standardized = mean_est(RankTransform::Standardize);
        assert!((standardized - truth).abs() < 0.03, "{standardized} vs {truth}");
        let scored = mean_est(RankTransform::NormalScores);
        assert!((scored - truth).abs() < 0.03, "{scored} vs {truth}");
    }

    #[test]
    fn rank_transform_is_monotone_invariant() {
        let (x, y) = gaussian_pair(0.6, 1000, 21);
        let ex: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        for transform in [RankTransform::Ranks, RankTransform::NormalScores] {
            let est = CmiKnn { transform, ..CmiKnn::default() };
            let a = est.estimate(&x, &y, &[], 0).unwrap();
            let b = est.estimate(&ex, &y, &[], 0).unwrap();
            assert!((a - b).abs() < 0.05, "{a} vs {b}");
        }
    }

    #[test]
    fn independent_noise_is_near_zero() {
        let (x, y) = gaussian_pair(0.0, 1000, 3);
        let est = cmi_knn_estimate(&x, &y, &[], 4).unwrap();
        assert!(est.abs() < 0.05, "{est}");
    }

    #[test]
    fn conditional_independence_given_common_cause() {
        let (ts, _) = gen_scm(&ScmSpec::new(3), 1000, 1.0, 8).unwrap();
        let w = ts.column(0);
        let x: Vec<f64> = w.iter().zip(ts.column(1)).map(|(a, b)| a + b).collect();
        let y: Vec<f64> = w.iter().zip(ts.column(2)).map(|(a, b)| a + b).collect();
        let est = cmi_knn_estimate(&x, &y, &[w], 4).unwrap();
        assert!(est.abs() < 0.06, "{est}");
    }

    #[test]
    fn symmetric_in_x_and_y() {
        let (ts, _) = gen_scm(&ScmSpec::new(3).linear(0, 1, 0, 0.5), 200, 1.0, 5).unwrap();
        let z = [ts.column(2)];
        for transform in [RankTransform::Ranks, RankTransform::Standardize, RankTransform::NormalScores] {
            let est = CmiKnn { transform, ..CmiKnn::default() };
            let a = est.estimate(ts.column(0), ts.column(1), &z, 9).unwrap();
            let b = est.estimate(ts.column(1), ts.column(0), &z, 9).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn identical_variables_hit_minimum_p() {
        let (x, _) = gaussian_pair(0.0, 200, 1);
        let r = cmi_knn_test(&x, &x, &[], 4, 200, 3).unwrap();
        assert_eq!(r.p_value, 1.0 / 201.0);
    }

    #[test]
    fn argument_errors() {
        let x = vec![0.0, 1.0, 2.0, 3.0];
        assert!(cmi_knn_estimate(&x, &x, &[], 4).is_err());
        assert!(cmi_knn_estimate(&x, &x, &[], 0).is_err());
        assert!(cmi_knn_test(&x, &x, &[], 1, 10, 0).is_err());
    }

    #[test]
    fn test_is_deterministic_per_seed() {
        let (ts, _) = gen_scm(&ScmSpec::new(3), 80, 1.0, 2).unwrap();
        let z = [ts.column(2)];
        let est = CmiKnn::default();
        let a = est.test(ts.column(0), ts.column(1), &z, 5).unwrap();
        let b = est.test(ts.column(0), ts.column(1), &z, 5).unwrap();
        assert_eq!(a, b);
        assert!((0.0..=1.0).contains(&a.p_value));
    }

    #[test]
    fn local_permutation_stays_in_neighbourhood() {
        let n = 50;
        let z: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let dz = max_norm_distances(&[z], n);
        let est = CmiKnn::default();
        let perm = est.local_permutation(&dz, n, &mut seeded(1));
        for (i, &p) in perm.iter().enumerate() {
            assert!((i as i64 - p as i64).abs() <= 4, "{i} -> {p}");
        }
    }
}
