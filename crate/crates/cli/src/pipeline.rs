//! The two end-to-end pipelines.
//!
//! Pipeline A: per-individual causal graphs, group fusion networks,
//! centralities and graph kernels between groups. Pipeline B: complexity
//! features, feature selection, leave-one-individual-out classification and
//! holdout predictions.
//!
//! Both pipelines derive every stage seed from the master seed and write
//! their outputs in a fixed order, so reruns produce identical files
//! whatever the number of worker threads.

use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use symdyn_core::complexity::{extract_dataset, FeatureMatrix};
use symdyn_core::dataio::{load_dataset, Dataset, Diagnosis, Individual, NormScope, TimeSeries};
use symdyn_core::discovery::{pcmci_plus, CausalGraph, ContempEdge, LaggedEdge, PcmciParams};
use symdyn_core::ensemble::{
    boruta_select, loocv_by_individual, predict_holdout, roc_and_threshold, BorutaParams, BorutaResult, Ensemble,
    HoldoutPrediction, LoocvReport, RocReport, Samples,
};
use symdyn_core::graphkernel::{kernel_matrix, KernelKind, KernelMatrix, SimpleGraph};
use symdyn_core::graphnet::{centralities, fuse, CentralityReport, FusionNetwork, MixedGraph};
use symdyn_core::rng::{derive, derive_named};
use symdyn_core::stats::{mean, sample_sd};
use symdyn_core::{Error, Result};

use crate::config::{ClassifierConfig, DiscoveryConfig, RunConfig};
use crate::error::{StageResult, Tag};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Z-score every column; columns with zero spread become all zeros and are
/// reported as `(individual id, variable)` pairs instead of failing.
pub fn normalize_lenient(data: &Dataset, scope: NormScope) -> Result<(Dataset, Vec<(String, String)>)> {
    let names = data.var_names().to_vec();
    let pooled: Vec<(f64, f64)> = (0..names.len())
        .map(|j| {
            let col: Vec<f64> = data
                .individuals
                .iter()
                .flat_map(|i| i.series.column(j).iter().copied())
                .collect();
            (mean(&col), sample_sd(&col))
        })
        .collect();
    let mut constant = Vec::new();
    let mut individuals = Vec::with_capacity(data.individuals.len());
    for ind in &data.individuals {
        let ts = &ind.series;
        let cols = (0..ts.n_vars())
            .map(|j| {
                let col = ts.column(j);
                let (m, sd) = match scope {
                    NormScope::Individual => (mean(col), sample_sd(col)),
                    NormScope::Pooled => pooled[j],
                };
                if sd > 0.0 && sd.is_finite() {
                    col.iter().map(|v| (v - m) / sd).collect()
                } else {
                    constant.push((ind.id.clone(), names[j].clone()));
                    vec![0.0; col.len()]
                }
            })
            .collect();
        individuals.push(Individual {
            series: TimeSeries::from_columns(names.clone(), cols)?,
            ..ind.clone()
        });
    }
    for (id, var) in &constant {
        warn!("individual '{id}': constant column '{var}' set to zero");
    }
    Ok((Dataset { individuals }, constant))
}

/// PCMCI+ on the non-constant columns; constant columns stay in the graph
/// as isolated variables.
pub fn discover_individual(ts: &TimeSeries, cfg: &DiscoveryConfig, seed: u64) -> Result<CausalGraph> {
    let params = PcmciParams { seed, ..cfg.pcmci.clone() };
    let test = cfg.test();
    let live: Vec<usize> = (0..ts.n_vars()).filter(|&j| sample_sd(ts.column(j)) > 0.0).collect();
    if live.len() == ts.n_vars() {
        return pcmci_plus(ts, test.as_ref(), &params);
    }
    let names = ts.var_names().to_vec();
    let constant: Vec<&str> = (0..ts.n_vars())
        .filter(|j| !live.contains(j))
        .map(|j| names[j].as_str())
        .collect();
    let meta_extra = json!({ "constant_vars": constant });
    if live.is_empty() {
        return CausalGraph::new(names, params.tau_max, vec![], vec![], meta_extra);
    }
    let sub = TimeSeries::from_columns(
        live.iter().map(|&j| names[j].clone()).collect(),
        live.iter().map(|&j| ts.column(j).to_vec()).collect(),
    )?;
    let g = pcmci_plus(&sub, test.as_ref(), &params)?;
    let lagged = g
        .lagged_edges()
        .iter()
        .map(|e| LaggedEdge {
            source: live[e.source],
            target: live[e.target],
            ..*e
        })
        .collect();
    let contemp = g
        .contemporaneous_edges()
        .iter()
        .map(|e| ContempEdge {
            a: live[e.a],
            b: live[e.b],
            ..*e
        })
        .collect();
    let mut meta = g.meta.clone();
    meta["constant_vars"] = meta_extra["constant_vars"].clone();
    CausalGraph::new(names, g.tau_max(), lagged, contemp, meta)
}

fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn load_and_normalize(cfg: &RunConfig) -> StageResult<(Dataset, Vec<(String, String)>)> {
    let path = cfg.input().stage("config")?;
    let data = load_dataset(path, &cfg.schema).stage("load")?;
    if data.individuals.is_empty() {
        return Err(Error::Data("dataset has no individuals".into())).stage("load");
    }
    info!("loaded {} individuals, {} rows", data.individuals.len(), data.total_rows());
    normalize_lenient(&data, cfg.norm_scope).stage("normalize")
}

pub struct PipelineA {
    pub graphs: Vec<(String, Diagnosis, CausalGraph)>,
    pub fusions: Vec<(Diagnosis, FusionNetwork)>,
    pub centralities: Vec<(Diagnosis, CentralityReport)>,
    pub degree_kernel: KernelMatrix,
    pub wl_kernel: KernelMatrix,
    pub constant_columns: Vec<(String, String)>,
}

pub fn pipeline_a_on(data: &Dataset, cfg: &RunConfig) -> StageResult<PipelineA> {
    let seed = cfg.stage_seed("discovery");
    let graphs = data
        .individuals
        .par_iter()
        .enumerate()
        .map(|(i, ind)| {
            let mut g = discover_individual(&ind.series, &cfg.discovery, derive(seed, &[i as u64]))?;
            g.meta["individual"] = json!(ind.id);
            g.meta["diagnosis"] = json!(ind.diagnosis);
            Ok((ind.id.clone(), ind.diagnosis, g))
        })
        .collect::<Result<Vec<_>>>()
        .stage("discovery")?;
    let mut fusions = Vec::new();
    for d in Diagnosis::ALL {
        let members: Vec<CausalGraph> = graphs
            .iter()
            .filter(|(_, g, _)| *g == d)
            .map(|(_, _, g)| g.clone())
            .collect();
        if !members.is_empty() {
            fusions.push((d, fuse(&members).stage("fusion")?));
        }
    }
    let mixed: Vec<MixedGraph> = fusions
        .iter()
        .map(|(_, f)| MixedGraph::from_fusion(f, cfg.graphs.centrality_mode, cfg.graphs.min_count))
        .collect();
    let centralities = fusions.iter().zip(&mixed).map(|((d, _), m)| (*d, centralities(m))).collect();
    let labels: Vec<String> = fusions.iter().map(|(d, _)| d.to_string()).collect();
    let simple: Vec<SimpleGraph> = mixed.iter().map(SimpleGraph::from_mixed).collect();
    let kernel = |kind| -> StageResult<KernelMatrix> {
        let k = kernel_matrix(labels.clone(), &simple, &cfg.graphs.kernel(kind)).stage("kernel")?;
        Ok(if cfg.graphs.normalize_kernel { k.normalized() } else { k })
    };
    Ok(PipelineA {
        degree_kernel: kernel(KernelKind::Degree)?,
        wl_kernel: kernel(KernelKind::Wl)?,
        graphs,
        fusions,
        centralities,
        constant_columns: Vec::new(),
    })
}

/// Load, normalize, discover, fuse and compare; writes artifacts when the
/// config names an output directory.
pub fn run_pipeline_a(cfg: &RunConfig) -> StageResult<PipelineA> {
    let (data, constant) = load_and_normalize(cfg)?;
    let mut out = pipeline_a_on(&data, cfg)?;
    out.constant_columns = constant;
    if let Some(dir) = &cfg.output {
        write_pipeline_a(&out, cfg, dir).stage("write")?;
    }
    Ok(out)
}

fn group_file(d: Diagnosis) -> String {
    d.as_str().to_ascii_lowercase()
}

pub fn write_pipeline_a(out: &PipelineA, cfg: &RunConfig, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir.join("graphs"))?;
    let mut individuals = Vec::new();
    for (id, d, g) in &out.graphs {
        let file = PathBuf::from("graphs").join(format!("{}.json", file_stem(id)));
        g.save(dir.join(&file))?;
        individuals.push(json!({
            "id": id,
            "diagnosis": d,
            "graph": file,
            "lagged_edges": g.lagged_edges().len(),
            "contemporaneous_edges": g.contemporaneous_edges().len(),
        }));
    }
    for (d, f) in &out.fusions {
        f.save(dir.join(format!("fusion_{}.json", group_file(*d))))?;
    }
    for (d, c) in &out.centralities {
        c.write_csv(fs::File::create(dir.join(format!("centrality_{}.csv", group_file(*d))))?)?;
    }
    out.degree_kernel.write_csv(fs::File::create(dir.join("kernel_degree.csv"))?)?;
    out.wl_kernel.write_csv(fs::File::create(dir.join("kernel_wl.csv"))?)?;
    let manifest = json!({
        "pipeline": "a",
        "version": VERSION,
        "config": cfg.manifest_json(),
        "seeds": { "discovery": cfg.stage_seed("discovery") },
        "individuals": individuals,
        "groups": out.fusions.iter().map(|(d, f)| json!({ "group": d, "size": f.group_size })).collect::<Vec<_>>(),
        "constant_columns": out.constant_columns,
        "wl_kernel_psd": out.wl_kernel.is_psd(),
        "degree_kernel_psd": out.degree_kernel.is_psd(),
    });
    write_json(&dir.join("run_a.json"), &manifest)
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyReport {
    pub n_training_individuals: usize,
    pub n_features_in: usize,
    pub selection: Option<BorutaResult>,
    pub features_used: Vec<String>,
    pub loocv: Option<LoocvReport>,
    pub roc: Option<RocReport>,
    pub threshold: f64,
    pub holdout: Vec<HoldoutPrediction>,
}

fn is_labelled(d: Option<Diagnosis>) -> bool {
    matches!(d, Some(Diagnosis::Gad | Diagnosis::Mdd))
}

/// Selection, leave-one-individual-out scoring, ROC threshold, and a final
/// model applied to every individual that is neither GAD nor MDD.
pub fn classify(fm: &FeatureMatrix, cfg: &ClassifierConfig, seed: u64) -> StageResult<ClassifyReport> {
    let train = Samples::from_features(fm, is_labelled).stage("classify")?;
    let selection = if cfg.boruta && train.n_cols() >= 2 {
        let params = BorutaParams {
            forest: cfg.forest.clone(),
            max_rounds: cfg.max_rounds,
        };
        Some(boruta_select(&train, &params, derive_named(seed, "boruta")).stage("selection")?)
    } else {
        None
    };
    let used: Vec<usize> = match &selection {
        Some(s) if !s.selected.is_empty() => s
            .selected
            .iter()
            .map(|c| train.columns.iter().position(|t| t == c).expect("selected from train"))
            .collect(),
        Some(_) => {
            warn!("selection eliminated every feature; classifying on all of them");
            (0..train.n_cols()).collect()
        }
        None => (0..train.n_cols()).collect(),
    };
    let train = train.select_columns(&used);
    let (loocv, roc) = if cfg.loocv {
        let loocv = loocv_by_individual(&train, &cfg.forest, derive_named(seed, "loocv")).stage("loocv")?;
        let roc = roc_and_threshold(&loocv.scores(), &loocv.labels()).stage("roc")?;
        (Some(loocv), Some(roc))
    } else {
        (None, None)
    };
    let threshold = roc.as_ref().map_or(cfg.threshold, |r| r.optimal_threshold);
    let rest = fm.filter_rows(|r| !is_labelled(r.diagnosis));
    let holdout = if rest.rows.is_empty() {
        Vec::new()
    } else {
        let model = Ensemble::train(&train, &cfg.forest, derive_named(seed, "final")).stage("final model")?;
        let rest = Samples::from_features(&rest.select(&used), |_| true).stage("holdout")?;
        predict_holdout(&model, threshold, &rest).stage("holdout")?
    };
    Ok(ClassifyReport {
        n_training_individuals: train.n_groups(),
        n_features_in: fm.n_cols(),
        selection,
        features_used: train.columns.clone(),
        loocv,
        roc,
        threshold,
        holdout,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BaselineReport {
    pub n_rows: usize,
    pub auc: f64,
    pub loocv: Vec<symdyn_core::ensemble::IndividualPrediction>,
}

/// Each normalized survey response of a GAD or MDD individual is one row.
pub fn raw_baseline(data: &Dataset, cfg: &ClassifierConfig, seed: u64) -> Result<BaselineReport> {
    let mut rows = Vec::new();
    let mut y = Vec::new();
    let mut ids = Vec::new();
    for ind in data.individuals.iter().filter(|i| is_labelled(Some(i.diagnosis))) {
        for t in 0..ind.series.len() {
            rows.push(ind.series.row(t));
            y.push(ind.diagnosis == Diagnosis::Mdd);
            ids.push(ind.id.clone());
        }
    }
    let s = Samples::new(data.var_names().to_vec(), &rows, y, &ids)?;
    let loocv = loocv_by_individual(&s, &cfg.forest, seed)?;
    let roc = roc_and_threshold(&loocv.scores(), &loocv.labels())?;
    Ok(BaselineReport {
        n_rows: s.n_rows(),
        auc: roc.auc,
        loocv: loocv.individuals,
    })
}

pub struct PipelineB {
    pub features: FeatureMatrix,
    pub report: ClassifyReport,
    pub baseline: Option<BaselineReport>,
    pub constant_columns: Vec<(String, String)>,
}

pub fn pipeline_b_on(data: &Dataset, cfg: &RunConfig) -> StageResult<PipelineB> {
    let features = extract_dataset(data, &cfg.features).stage("features")?;
    info!("{} feature rows x {} columns", features.n_rows(), features.n_cols());
    let report = classify(&features, &cfg.classifier, cfg.stage_seed("classifier"))?;
    let baseline = if cfg.classifier.baseline {
        Some(raw_baseline(data, &cfg.classifier, cfg.stage_seed("baseline")).stage("baseline")?)
    } else {
        None
    };
    Ok(PipelineB {
        features,
        report,
        baseline,
        constant_columns: Vec::new(),
    })
}

pub fn run_pipeline_b(cfg: &RunConfig) -> StageResult<PipelineB> {
    let (data, constant) = load_and_normalize(cfg)?;
    let mut out = pipeline_b_on(&data, cfg)?;
    out.constant_columns = constant;
    if let Some(dir) = &cfg.output {
        write_pipeline_b(&out, cfg, dir).stage("write")?;
    }
    Ok(out)
}

pub fn write_pipeline_b(out: &PipelineB, cfg: &RunConfig, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    out.features.save(dir.join("features.csv"))?;
    let report = json!({
        "pipeline": "b",
        "version": VERSION,
        "config": cfg.manifest_json(),
        "seeds": {
            "classifier": cfg.stage_seed("classifier"),
            "baseline": cfg.stage_seed("baseline"),
        },
        "features": { "rows": out.features.n_rows(), "columns": out.features.n_cols() },
        "constant_columns": out.constant_columns,
        "classification": out.report,
        "baseline": out.baseline,
    });
    write_json(&dir.join("report_b.json"), &report)
}
