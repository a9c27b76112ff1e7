use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;
use symdyn_cli::bench::{run_table3, BenchConfig};
use symdyn_cli::config::{ClassifierConfig, DiscoveryConfig, RunConfig, TestKind};
use symdyn_cli::error::{StageResult, Tag};
use symdyn_cli::pipeline::{classify, discover_individual, normalize_lenient, run_pipeline_a, run_pipeline_b, VERSION};
use symdyn_cli::with_jobs;
use symdyn_core::citest::TeParams;
use symdyn_core::complexity::{extract_dataset, FeatureMatrix, ParamGrid};
use symdyn_core::dataio::{load_dataset, NormScope, Schema, TimeSeries};
use symdyn_core::discovery::{te_discovery, var_granger, CausalGraph};
use symdyn_core::ensemble::BootstrapUnit;
use symdyn_core::graphkernel::{kernel_matrix, KernelKind, KernelParams, SimpleGraph};
use symdyn_core::graphnet::{centralities, fuse, CentralityMode, FusionNetwork, MixedGraph};
use symdyn_core::synthgen::{gen_scenario, Scenario};
use symdyn_core::Error;

#[derive(Parser)]
#[command(name = "symdyn", version, about = "Causal discovery and complexity-feature classification of symptom time series")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate one replicate of a synthetic scenario.
    Gen {
        #[arg(long)]
        scenario: Scenario,
        #[arg(long, default_value_t = 100)]
        t: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Discover a causal graph from one series CSV.
    Discover {
        #[arg(long = "in")]
        input: PathBuf,
        /// pcmci, var or te.
        #[arg(long, default_value = "pcmci")]
        method: String,
        #[arg(long, default_value = "cmiknn")]
        test: TestKind,
        #[arg(long, default_value_t = 1)]
        tau_max: usize,
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
        /// CMIknn neighbours.
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sum graphs into a fusion network.
    Fuse {
        /// Keep only graphs whose metadata diagnosis matches.
        #[arg(long)]
        group: Option<String>,
        #[arg(long = "in", num_args = 1.., required = true)]
        input: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Centralities of a fusion network or a single graph.
    Centrality {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "mixed")]
        mode: CentralityMode,
        #[arg(long, default_value_t = 1)]
        min_count: u32,
    },
    /// Kernel matrix between graphs or fusion networks.
    Kernel {
        #[arg(long, default_value = "wl")]
        kind: KernelKind,
        #[arg(long, default_value_t = 3)]
        h: usize,
        #[arg(long)]
        uniform_init: bool,
        #[arg(long)]
        normalize: bool,
        #[arg(long, default_value_t = 1)]
        min_count: u32,
        #[arg(long = "in", num_args = 1.., required = true)]
        input: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Complexity feature matrix of a dataset.
    Features {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long)]
        schema: Option<PathBuf>,
        #[arg(long, default_value = "individual")]
        norm_scope: NormScope,
        #[arg(long)]
        out: PathBuf,
    },
    /// Select features, cross-validate and predict holdout individuals.
    Classify {
        #[arg(long)]
        features: PathBuf,
        #[arg(long, default_value_t = 300)]
        trees: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Score by leave-one-individual-out and choose the ROC threshold.
        #[arg(long)]
        loocv: bool,
        /// Threshold used without --loocv.
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        #[arg(long)]
        no_boruta: bool,
        #[arg(long, default_value_t = 20)]
        max_rounds: usize,
        #[arg(long)]
        individual_bootstrap: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Causal graphs, fusion networks, centralities and kernels.
    PipelineA(PipelineArgs),
    /// Complexity features, selection, cross-validation and holdout.
    PipelineB(PipelineArgs),
    /// Detection rates of every method on the three scenarios.
    BenchTable3 {
        #[arg(long, default_value_t = 100)]
        t: usize,
        #[arg(long, default_value_t = 100)]
        seeds: usize,
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
        #[arg(long, default_value_t = 1)]
        tau_max: usize,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    norm_scope: Option<NormScope>,
    #[arg(long)]
    individual_bootstrap: bool,
}

impl PipelineArgs {
    fn resolve(&self) -> StageResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p).stage("config")?,
            None => RunConfig::default(),
        };
        if let Some(p) = &self.input {
            cfg.input = Some(p.clone());
        }
        if let Some(p) = &self.out {
            cfg.output = Some(p.clone());
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(n) = self.norm_scope {
            cfg.norm_scope = n;
        }
        if self.individual_bootstrap {
            cfg.classifier.forest.bootstrap = BootstrapUnit::Individuals;
        }
        Ok(cfg)
    }
}

fn write_json(path: &Path, value: &serde_json::Value) -> symdyn_core::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn load_graph_like(path: &Path) -> symdyn_core::Result<MixedGraphSource> {
    let text = fs::read_to_string(path)?;
    match FusionNetwork::from_json(&text) {
        Ok(f) => Ok(MixedGraphSource::Fusion(f)),
        Err(_) => Ok(MixedGraphSource::Graph(CausalGraph::from_json(&text)?)),
    }
}

enum MixedGraphSource {
    Fusion(FusionNetwork),
    Graph(CausalGraph),
}

impl MixedGraphSource {
    fn mixed(&self, mode: CentralityMode, min_count: u32) -> MixedGraph {
        match self {
            MixedGraphSource::Fusion(f) => MixedGraph::from_fusion(f, mode, min_count),
            MixedGraphSource::Graph(g) => MixedGraph::from_causal(g, mode),
        }
    }
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn run(cmd: Cmd) -> StageResult<()> {
    match cmd {
        Cmd::Gen { scenario, t, seed, out, truth } => {
            let (ts, gt) = gen_scenario(scenario, t, seed).stage("gen")?;
            ts.write_csv(fs::File::create(&out).map_err(Error::from).stage("gen")?)
                .stage("gen")?;
            if let Some(p) = truth {
                fs::write(p, gt.to_json().stage("gen")?).map_err(Error::from).stage("gen")?;
            }
        }
        Cmd::Discover { input, method, test, tau_max, alpha, k, seed, out } => {
            let ts = TimeSeries::load_csv(&input).stage("load")?;
            let g = match method.as_str() {
                "pcmci" => {
                    let mut cfg = DiscoveryConfig { test, ..DiscoveryConfig::default() };
                    cfg.cmiknn.k = k;
                    cfg.pcmci.tau_max = tau_max;
                    cfg.pcmci.alpha = alpha;
                    discover_individual(&ts, &cfg, seed)
                }
                "var" => var_granger(&ts, tau_max, alpha),
                "te" => te_discovery(&ts, tau_max, alpha, &TeParams::default(), seed),
                other => Err(Error::Config(format!("unknown method '{other}'"))),
            }
            .stage("discovery")?;
            g.save(&out).stage("write")?;
        }
        Cmd::Fuse { group, input, out } => {
            let mut graphs = Vec::new();
            for p in &input {
                let g = CausalGraph::load(p).stage("load")?;
                let keep = match &group {
                    Some(want) => g.meta["diagnosis"].as_str().is_some_and(|d| d.eq_ignore_ascii_case(want)),
                    None => true,
                };
                if keep {
                    graphs.push(g);
                }
            }
            if graphs.is_empty() {
                return Err(Error::Data("no graph matches the requested group".into())).stage("fusion");
            }
            fuse(&graphs).stage("fusion")?.save(&out).stage("write")?;
        }
        Cmd::Centrality { input, out, mode, min_count } => {
            let g = load_graph_like(&input).stage("load")?;
            let report = centralities(&g.mixed(mode, min_count));
            report
                .write_csv(fs::File::create(&out).map_err(Error::from).stage("write")?)
                .stage("write")?;
        }
        Cmd::Kernel { kind, h, uniform_init, normalize, min_count, input, out } => {
            let mut graphs = Vec::new();
            for p in &input {
                let g = load_graph_like(p).stage("load")?;
                graphs.push(SimpleGraph::from_mixed(&g.mixed(CentralityMode::Mixed, min_count)));
            }
            let labels = input.iter().map(|p| stem(p)).collect();
            let params = KernelParams { kind, h, uniform_init };
            let mut k = kernel_matrix(labels, &graphs, &params).stage("kernel")?;
            if normalize {
                k = k.normalized();
            }
            k.write_csv(fs::File::create(&out).map_err(Error::from).stage("write")?)
                .stage("write")?;
        }
        Cmd::Features { input, grid, schema, norm_scope, out } => {
            let grid = match grid {
                Some(p) => ParamGrid::load(p).stage("config")?,
                None => ParamGrid::default(),
            };
            let schema: Schema = match schema {
                Some(p) => serde_json::from_str(&fs::read_to_string(p).map_err(Error::from).stage("config")?)
                    .map_err(|e| Error::Config(format!("bad schema: {e}")))
                    .stage("config")?,
                None => Schema::default(),
            };
            let data = load_dataset(&input, &schema).stage("load")?;
            let (data, _) = normalize_lenient(&data, norm_scope).stage("normalize")?;
            extract_dataset(&data, &grid).stage("features")?.save(&out).stage("write")?;
        }
        Cmd::Classify {
            features,
            trees,
            seed,
            loocv,
            threshold,
            no_boruta,
            max_rounds,
            individual_bootstrap,
            out,
        } => {
            let fm = FeatureMatrix::load(&features).stage("load")?;
            let mut cfg = ClassifierConfig {
                boruta: !no_boruta,
                max_rounds,
                loocv,
                threshold,
                baseline: false,
                ..ClassifierConfig::default()
            };
            cfg.forest.n_trees = trees;
            if individual_bootstrap {
                cfg.forest.bootstrap = BootstrapUnit::Individuals;
            }
            let report = classify(&fm, &cfg, seed)?;
            let doc = serde_json::json!({
                "version": VERSION,
                "seed": seed,
                "config": cfg,
                "report": report,
            });
            write_json(&out, &doc).stage("write")?;
        }
        Cmd::PipelineA(args) => {
            let cfg = args.resolve()?;
            let out = run_pipeline_a(&cfg)?;
            info!("{} graphs, {} fusion networks", out.graphs.len(), out.fusions.len());
        }
        Cmd::PipelineB(args) => {
            let cfg = args.resolve()?;
            let out = run_pipeline_b(&cfg)?;
            if let Some(roc) = &out.report.roc {
                println!("AUC {:.3} at threshold {:.3}", roc.auc, roc.optimal_threshold);
            }
            if let Some(b) = &out.baseline {
                println!("raw-data baseline AUC {:.3}", b.auc);
            }
        }
        Cmd::BenchTable3 { t, seeds, alpha, tau_max, k, seed, out } => {
            let cfg = BenchConfig {
                t,
                n_seeds: seeds,
                alpha,
                tau_max,
                k,
                seed,
                ..BenchConfig::default()
            };
            let report = run_table3(&cfg).stage("bench")?;
            print!("{}", report.render());
            if let Some(p) = out {
                let doc = serde_json::json!({ "version": VERSION, "report": report });
                write_json(&p, &doc).stage("write")?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match with_jobs(cli.jobs, || run(cli.cmd)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
