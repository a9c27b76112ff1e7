//! Small numerical helpers shared by the estimators.

use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::{Error, Result};

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return f64::NAN;
    }
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample standard deviation (n-1 denominator).
pub fn sample_sd(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(x);
    (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
}

/// Population standard deviation (n denominator).
pub fn population_sd(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let m = mean(x);
    (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / x.len() as f64).sqrt()
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let mx = mean(x);
    let my = mean(y);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}

/// Least-squares slope of `y` on `x`.
pub fn linear_slope(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    sxy / sxx
}

/// Ranks 0..n-1, ties broken by index order.
pub fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
    let mut r = vec![0.0; x.len()];
    for (rank, &i) in idx.iter().enumerate() {
        r[i] = rank as f64;
    }
    r
}

pub fn digamma(x: f64) -> f64 {
    statrs::function::gamma::digamma(x)
}

/// Two-sided p-value of a t statistic with `dof` degrees of freedom.
pub fn t_two_sided_p(t: f64, dof: f64) -> f64 {
    if !t.is_finite() {
        return if t.is_nan() { 1.0 } else { 0.0 };
    }
    let dist = StudentsT::new(0.0, 1.0, dof).expect("positive degrees of freedom");
    (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0)
}

/// Least-squares fit with coefficient standard errors.
#[derive(Debug, Clone)]
pub struct OlsFit {
    pub coef: Vec<f64>,
    pub std_err: Vec<f64>,
    pub residuals: Vec<f64>,
    pub dof: usize,
}

impl OlsFit {
    pub fn t_stat(&self, i: usize) -> f64 {
        self.coef[i] / self.std_err[i]
    }

    pub fn p_value(&self, i: usize) -> f64 {
        t_two_sided_p(self.t_stat(i), self.dof as f64)
    }
}

/// Design matrix from an optional intercept and a list of columns.
pub fn design(columns: &[&[f64]], n: usize, intercept: bool) -> DMatrix<f64> {
    let p = columns.len() + usize::from(intercept);
    let mut m = DMatrix::<f64>::zeros(n, p);
    let off = usize::from(intercept);
    for i in 0..n {
        if intercept {
            m[(i, 0)] = 1.0;
        }
        for (j, c) in columns.iter().enumerate() {
            m[(i, j + off)] = c[i];
        }
    }
    m
}

/// Ordinary least squares via Householder QR.
///
/// Fails when the design is rank deficient (a diagonal entry of R is tiny
/// relative to its column norm) or has no residual degrees of freedom.
pub fn ols(y: &[f64], x: &DMatrix<f64>) -> Result<OlsFit> {
    let (n, p) = x.shape();
    if y.len() != n {
        return Err(Error::config("response and design lengths differ"));
    }
    if n <= p {
        return Err(Error::numerical(format!(
            "{n} observations cannot support {p} regressors"
        )));
    }
    let col_norms: Vec<f64> = (0..p).map(|j| x.column(j).norm()).collect();
    let qr = x.clone().qr();
    let r = qr.r();
    for j in 0..p {
        if col_norms[j] == 0.0 || r[(j, j)].abs() <= 1e-9 * col_norms[j] {
            return Err(Error::numerical("singular design matrix"));
        }
    }
    let yv = DVector::from_column_slice(y);
    let qty = qr.q().transpose() * &yv;
    let coef = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::numerical("singular design matrix"))?;
    let fitted = x * &coef;
    let residuals: Vec<f64> = (0..n).map(|i| y[i] - fitted[i]).collect();
    let dof = n - p;
    let sigma2 = residuals.iter().map(|e| e * e).sum::<f64>() / dof as f64;
    let rinv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or_else(|| Error::numerical("singular design matrix"))?;
    // diag((X'X)^-1) = row norms of R^-1
    let std_err = (0..p)
        .map(|i| (rinv.row(i).norm_squared() * sigma2).sqrt())
        .collect();
    Ok(OlsFit {
        coef: coef.iter().copied().collect(),
        std_err,
        residuals,
        dof,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ols_recovers_exact_line() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 + 0.5 * v + if (*v as i32) % 2 == 0 { 0.1 } else { -0.1 }).collect();
        let fit = ols(&y, &design(&[&x], 10, true)).unwrap();
        assert_abs_diff_eq!(fit.coef[1], 0.5, epsilon = 0.05);
        assert_eq!(fit.dof, 8);
    }

    #[test]
    fn ols_rejects_collinear_columns() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let x2: Vec<f64> = x.iter().map(|v| 3.0 * v).collect();
        let y = x.clone();
        assert!(matches!(
            ols(&y, &design(&[&x, &x2], 10, true)),
            Err(Error::Numerical(_))
        ));
    }

    #[test]
    fn ranks_break_ties_by_index() {
        assert_eq!(ranks(&[3.0, 1.0, 3.0, 0.0]), vec![2.0, 1.0, 3.0, 0.0]);
    }

    #[test]
    fn sd_conventions() {
        assert_abs_diff_eq!(sample_sd(&[1.0, 2.0, 3.0]), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(population_sd(&[1.0, 3.0]), 1.0, epsilon = 1e-15);
    }
}
