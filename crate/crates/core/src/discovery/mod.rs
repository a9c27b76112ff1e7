//! Causal discovery on multivariate time series.
//!
//! [`pcmci_plus`] reconstructs a mixed graph with lagged links (oriented by
//! time) and contemporaneous links (oriented by collider and Meek rules).
//! [`var_granger`] and [`te_discovery`] are pairwise baselines that only
//! produce lagged links.

mod baselines;
mod graph;
mod pcmci;

pub use baselines::{te_discovery, var_granger};
pub use graph::{CausalGraph, ContempEdge, LaggedEdge, Orientation};
pub use pcmci::{mci_prune, pc1_lagged, pcmci_plus, Parent, ParentSets, PcmciParams};

use crate::dataio::TimeSeries;
use crate::stats::sample_sd;
use crate::{Error, Result};

/// Fail on columns without variation; CI tests are undefined there.
pub(crate) fn check_not_degenerate(ts: &TimeSeries) -> Result<()> {
    for (j, name) in ts.var_names().iter().enumerate() {
        let sd = sample_sd(ts.column(j));
        if !(sd > 0.0) {
            return Err(Error::ConstantColumn(name.clone()));
        }
    }
    Ok(())
}
