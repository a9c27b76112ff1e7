//! Causal discovery, graph comparison and complexity features for short
//! multivariate time series.
//!
//! The crate is organised around two analysis branches that share the data
//! layer:
//!
//! * [`discovery`] reconstructs lagged and contemporaneous causal graphs per
//!   individual (PCMCI+ with [`citest`] conditional-independence tests, plus
//!   VAR-Granger and transfer-entropy baselines). [`graphnet`] fuses those
//!   graphs into group networks and computes centralities, and
//!   [`graphkernel`] compares graphs with degree and Weisfeiler-Lehman
//!   kernels.
//! * [`complexity`] turns each individual's series into a feature matrix and
//!   [`ensemble`] classifies individuals with a bagged-tree model, OOB
//!   permutation importance, Boruta-style selection and leave-one-individual-out
//!   validation.
//!
//! [`synthgen`] generates structural causal time series with known ground
//! truth for validation.

pub mod citest;
pub mod complexity;
pub mod dataio;
pub mod discovery;
pub mod ensemble;
pub mod error;
pub mod graphkernel;
pub mod graphnet;
pub mod rng;
pub mod stats;
pub mod synthgen;

pub use error::{Error, Result};
