//! Run configuration shared by the pipelines.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use symdyn_core::citest::{CmiKnn, CondIndTest, ParCorr};
use symdyn_core::complexity::ParamGrid;
use symdyn_core::dataio::{NormScope, Schema};
use symdyn_core::discovery::PcmciParams;
use symdyn_core::ensemble::ForestParams;
use symdyn_core::graphkernel::{KernelKind, KernelParams};
use symdyn_core::graphnet::CentralityMode;
use symdyn_core::rng::derive_named;
use symdyn_core::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestKind {
    ParCorr,
    #[default]
    CmiKnn,
}

impl std::str::FromStr for TestKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "parcorr" => Ok(TestKind::ParCorr),
            "cmiknn" => Ok(TestKind::CmiKnn),
            other => Err(Error::Config(format!("unknown test '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct DiscoveryConfig {
    pub test: TestKind,
    pub cmiknn: CmiKnn,
    /// `seed` is replaced by a stage seed derived from the master seed.
    pub pcmci: PcmciParams,
}

impl DiscoveryConfig {
    pub fn test(&self) -> Box<dyn CondIndTest> {
        match self.test {
            TestKind::ParCorr => Box::new(ParCorr),
            TestKind::CmiKnn => Box::new(self.cmiknn.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphConfig {
    pub centrality_mode: CentralityMode,
    /// Fusion edges with fewer occurrences are ignored by centralities and kernels.
    pub min_count: u32,
    /// WL refinement rounds.
    pub wl_h: usize,
    pub wl_uniform_init: bool,
    pub normalize_kernel: bool,
}

impl GraphConfig {
    pub fn kernel(&self, kind: KernelKind) -> KernelParams {
        KernelParams {
            kind,
            h: self.wl_h,
            uniform_init: self.wl_uniform_init,
        }
    }
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig {
            centrality_mode: CentralityMode::default(),
            min_count: 1,
            wl_h: 3,
            wl_uniform_init: false,
            normalize_kernel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierConfig {
    pub forest: ForestParams,
    pub boruta: bool,
    pub max_rounds: usize,
    /// Score by leave-one-individual-out and pick the ROC threshold.
    pub loocv: bool,
    /// Decision threshold used when `loocv` is off.
    pub threshold: f64,
    /// Also score a model on the raw normalized survey rows.
    pub baseline: bool,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            forest: ForestParams::default(),
            boruta: true,
            max_rounds: 20,
            loocv: true,
            threshold: 0.5,
            baseline: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; every stochastic stage derives its own from it.
    pub seed: u64,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub schema: Schema,
    pub norm_scope: NormScope,
    pub discovery: DiscoveryConfig,
    pub graphs: GraphConfig,
    pub features: ParamGrid,
    pub classifier: ClassifierConfig,
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.as_ref().display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("bad config: {e}")))
    }

    pub fn stage_seed(&self, stage: &str) -> u64 {
        derive_named(self.seed, stage)
    }

    pub fn input(&self) -> Result<&Path> {
        self.input
            .as_deref()
            .ok_or_else(|| Error::Config("no input path given".into()))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config is serializable")
    }

    /// Config as recorded next to the outputs: the output directory is left
    /// out so the files do not depend on where they are written.
    pub fn manifest_json(&self) -> serde_json::Value {
        RunConfig { output: None, ..self.clone() }.to_json()
    }
}
