//! Conditional-independence tests and information estimators.
//!
//! All tests share the [`CondIndTest`] interface: `x` and `y` are the two
//! variables under test and `z` holds zero or more conditioning columns, all
//! of the same length. Tests are pure functions of their inputs and seed.

mod cmiknn;
mod parcorr;
mod te;

pub use cmiknn::{cmi_knn_estimate, cmi_knn_test, CmiKnn, RankTransform};
pub use parcorr::{parcorr_test, ParCorr};
pub use te::{transfer_entropy, TeParams};

use serde::{Deserialize, Serialize};

use crate::Result;

/// Outcome of a single conditional-independence test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
}

impl TestResult {
    pub fn new(statistic: f64, p_value: f64) -> Self {
        TestResult {
            statistic,
            p_value: p_value.clamp(0.0, 1.0),
        }
    }

    /// Dependence is declared when `p_value < alpha`.
    pub fn dependent(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

/// A conditional-independence test `X ⫫ Y | Z`.
pub trait CondIndTest: Send + Sync {
    fn name(&self) -> &'static str;

    fn run(&self, x: &[f64], y: &[f64], z: &[&[f64]], seed: u64) -> Result<TestResult>;

    /// Parameters recorded in output metadata.
    fn params(&self) -> serde_json::Value;
}

pub(crate) fn check_lengths(x: &[f64], y: &[f64], z: &[&[f64]]) -> Result<usize> {
    let n = x.len();
    if y.len() != n || z.iter().any(|c| c.len() != n) {
        return Err(crate::Error::config("test inputs differ in length"));
    }
    Ok(n)
}
