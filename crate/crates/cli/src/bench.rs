//! Detection benchmark on the three synthetic scenarios, and the matching
//! false-positive check on independent noise.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use symdyn_core::citest::{CmiKnn, ParCorr, TeParams};
use symdyn_core::dataio::TimeSeries;
use symdyn_core::discovery::{pcmci_plus, te_discovery, var_granger, CausalGraph, PcmciParams};
use symdyn_core::rng::derive;
use symdyn_core::synthgen::{gen_scenario, gen_scm, GroundTruth, Scenario, ScmSpec};
use symdyn_core::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    PcmciCmiKnn,
    PcmciParCorr,
    VarGranger,
    TransferEntropy,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::PcmciCmiKnn,
        Method::PcmciParCorr,
        Method::VarGranger,
        Method::TransferEntropy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::PcmciCmiKnn => "PCMCI+ (CMIknn)",
            Method::PcmciParCorr => "PCMCI+ (ParCorr)",
            Method::VarGranger => "VAR",
            Method::TransferEntropy => "TE",
        }
    }

    /// Candidate links a method can report on `n` variables with lags `1..=tau_max`.
    pub fn n_links(self, n: usize, tau_max: usize) -> usize {
        match self {
            Method::PcmciCmiKnn | Method::PcmciParCorr => n * n * tau_max + n * (n - 1) / 2,
            Method::VarGranger => n * n * tau_max,
            Method::TransferEntropy => n * (n - 1) * tau_max,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub t: usize,
    pub n_seeds: usize,
    pub alpha: f64,
    pub tau_max: usize,
    /// Nearest neighbours of the CMIknn estimator.
    pub k: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            t: 100,
            n_seeds: 100,
            alpha: 0.01,
            tau_max: 1,
            k: 4,
            seed: 0,
            methods: Method::ALL.to_vec(),
        }
    }
}

pub fn discover(method: Method, ts: &TimeSeries, cfg: &BenchConfig, seed: u64) -> Result<CausalGraph> {
    let params = PcmciParams {
        tau_max: cfg.tau_max,
        alpha: cfg.alpha,
        seed,
        ..PcmciParams::default()
    };
    match method {
        Method::PcmciCmiKnn => pcmci_plus(ts, &CmiKnn::with_k(cfg.k), &params),
        Method::PcmciParCorr => pcmci_plus(ts, &ParCorr, &params),
        Method::VarGranger => var_granger(ts, cfg.tau_max, cfg.alpha),
        Method::TransferEntropy => te_discovery(ts, cfg.tau_max, cfg.alpha, &TeParams::default(), seed),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkRate {
    pub link: String,
    pub detected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRow {
    pub scenario: Scenario,
    pub method: Method,
    pub n_seeds: usize,
    /// Seeds in which every true link was found.
    pub detected: usize,
    pub per_link: Vec<LinkRate>,
    /// Seeds reporting any lagged link that is not in the ground truth.
    pub spurious: usize,
}

impl DetectionRow {
    pub fn rate(&self) -> f64 {
        self.detected as f64 / self.n_seeds as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table3Report {
    pub config: BenchConfig,
    pub rows: Vec<DetectionRow>,
}

impl Table3Report {
    pub fn row(&self, scenario: Scenario, method: Method) -> Option<&DetectionRow> {
        self.rows.iter().find(|r| r.scenario == scenario && r.method == method)
    }

    /// Plain-text table of detection rates.
    pub fn render(&self) -> String {
        let mut s = format!("{:<18}", "method");
        for sc in Scenario::ALL {
            s.push_str(&format!("{:>14}", sc.name()));
        }
        s.push('\n');
        for &m in &self.config.methods {
            s.push_str(&format!("{:<18}", m.name()));
            for sc in Scenario::ALL {
                match self.row(sc, m) {
                    Some(r) => s.push_str(&format!("{:>14}", format!("{}/{}", r.detected, r.n_seeds))),
                    None => s.push_str(&format!("{:>14}", "-")),
                }
            }
            s.push('\n');
        }
        s
    }
}

fn link_name(truth: &GroundTruth, (s, d, lag): (usize, usize, usize)) -> String {
    format!("{}(t-{lag})->{}", truth.var_names[s], truth.var_names[d])
}

/// Every method on `n_seeds` replicates of every scenario.
pub fn run_table3(cfg: &BenchConfig) -> Result<Table3Report> {
    if cfg.n_seeds == 0 {
        return Err(Error::Config("n_seeds must be positive".into()));
    }
    let mut rows = Vec::new();
    for (si, sc) in Scenario::ALL.into_iter().enumerate() {
        let truth = gen_scenario(sc, cfg.t, 0)?.1;
        let links: Vec<(usize, usize, usize)> = truth.edges.iter().copied().collect();
        for &m in &cfg.methods {
            let per_seed = (0..cfg.n_seeds)
                .into_par_iter()
                .map(|i| {
                    let data_seed = derive(cfg.seed, &[si as u64, i as u64]);
                    let (ts, _) = gen_scenario(sc, cfg.t, data_seed)?;
                    let g = discover(m, &ts, cfg, derive(data_seed, &[m as u64]))?;
                    let found: Vec<bool> = links.iter().map(|&(s, d, l)| g.has_lagged(s, d, l)).collect();
                    let spurious = g.lagged_set().iter().any(|e| !truth.edges.contains(e));
                    Ok((found, spurious))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(DetectionRow {
                scenario: sc,
                method: m,
                n_seeds: cfg.n_seeds,
                detected: per_seed.iter().filter(|(f, _)| f.iter().all(|&b| b)).count(),
                per_link: links
                    .iter()
                    .enumerate()
                    .map(|(k, &l)| LinkRate {
                        link: link_name(&truth, l),
                        detected: per_seed.iter().filter(|(f, _)| f[k]).count(),
                    })
                    .collect(),
                spurious: per_seed.iter().filter(|(_, s)| *s).count(),
            });
        }
    }
    Ok(Table3Report { config: cfg.clone(), rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullCalibration {
    pub method: Method,
    pub false_positives: usize,
    pub trials: usize,
}

impl NullCalibration {
    pub fn rate(&self) -> f64 {
        self.false_positives as f64 / self.trials as f64
    }
}

/// False-positive counts on independent white noise: every reported link is
/// false, and each run offers `Method::n_links` chances.
pub fn run_null_calibration(cfg: &BenchConfig, n_vars: usize) -> Result<Vec<NullCalibration>> {
    cfg.methods
        .iter()
        .map(|&m| {
            let counts = (0..cfg.n_seeds)
                .into_par_iter()
                .map(|i| {
                    let data_seed = derive(cfg.seed, &[u64::MAX, i as u64]);
                    let (ts, _) = gen_scm(&ScmSpec::new(n_vars), cfg.t, 1.0, data_seed)?;
                    let g = discover(m, &ts, cfg, derive(data_seed, &[m as u64]))?;
                    Ok(g.lagged_edges().len() + g.contemporaneous_edges().len())
                })
                .collect::<Result<Vec<usize>>>()?;
            Ok(NullCalibration {
                method: m,
                false_positives: counts.iter().sum(),
                trials: cfg.n_seeds * m.n_links(n_vars, cfg.tau_max),
            })
        })
        .collect()
}
