use nalgebra::DMatrix;
use serde_json::json;

use super::{check_lengths, CondIndTest, TestResult};
use crate::stats::{design, ols, pearson, t_two_sided_p};
use crate::{Error, Result};

/// Partial correlation via OLS residuals with a Student-t p-value on
/// `n - |z| - 2` degrees of freedom.
#[derive(Debug, Clone, Copy, Default)]
pub struct ParCorr;

fn residualize(v: &[f64], zmat: Option<&DMatrix<f64>>) -> Result<Vec<f64>> {
    match zmat {
        Some(m) => Ok(ols(v, m)?.residuals),
        None => {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            Ok(v.iter().map(|a| a - m).collect())
        }
    }
}

pub fn parcorr_test(x: &[f64], y: &[f64], z: &[&[f64]]) -> Result<TestResult> {
    let n = check_lengths(x, y, z)?;
    if n < z.len() + 3 {
        return Err(Error::config(format!(
            "partial correlation with {} conditions needs at least {} samples",
            z.len(),
            z.len() + 3
        )));
    }
    let zmat = (!z.is_empty()).then(|| design(z, n, true));
    let rx = residualize(x, zmat.as_ref())
        .map_err(|_| Error::numerical("rank-deficient conditioning matrix"))?;
    let ry = residualize(y, zmat.as_ref())
        .map_err(|_| Error::numerical("rank-deficient conditioning matrix"))?;
    let ssx: f64 = rx.iter().map(|v| v * v).sum();
    let ssy: f64 = ry.iter().map(|v| v * v).sum();
    let scale = x.iter().map(|v| v * v).sum::<f64>().max(y.iter().map(|v| v * v).sum::<f64>());
    if ssx <= 1e-24 * scale.max(1.0) || ssy <= 1e-24 * scale.max(1.0) {
        return Err(Error::numerical("zero residual variance in partial correlation"));
    }
    let r = pearson(&rx, &ry).clamp(-1.0, 1.0);
    let dof = (n - z.len() - 2) as f64;
    let p = if r.abs() >= 1.0 {
        0.0
    } else {
        t_two_sided_p(r * (dof / (1.0 - r * r)).sqrt(), dof)
    };
    Ok(TestResult::new(r, p))
}

impl CondIndTest for ParCorr {
    fn name(&self) -> &'static str {
        "parcorr"
    }

    fn run(&self, x: &[f64], y: &[f64], z: &[&[f64]], _seed: u64) -> Result<TestResult> {
        parcorr_test(x, y, z)
    }

    fn params(&self) -> serde_json::Value {
        json!({"name": "parcorr"})
    }
}
