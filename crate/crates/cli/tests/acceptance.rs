//! Acceptance suite. Prints one PASS/FAIL/SKIP line per criterion and exits
//! nonzero if a criterion fails that is not listed in `KNOWN_SHORTFALLS`.

mod common;

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use serde_json::Value;
use statrs::distribution::{Binomial, DiscreteCDF};
use symdyn_cli::bench::{run_null_calibration, run_table3, BenchConfig, Method};
use symdyn_core::citest::cmi_knn_estimate;
use symdyn_core::complexity::{
    fractal_dimension, permutation_entropy, recurrence_plot, rqa, scaling_exponent, FractalKind, RadiusPolicy,
    RecurrencePlot, RqaResult, ScalingKind,
};
use symdyn_core::ensemble::{boruta_select, roc_and_threshold, BorutaParams, Ensemble, ForestParams, Samples};
use symdyn_core::graphkernel::{degree_kernel, kernel_matrix, wl_kernel, KernelKind, KernelParams, SimpleGraph};
use symdyn_core::graphnet::{centralities, MixedGraph};
use symdyn_core::rng::seeded;
use symdyn_core::synthgen::Scenario;

/// Criteria expected to fail; see the project notes for the analysis.
const KNOWN_SHORTFALLS: &[u32] = &[1];

struct Outcome {
    pass: Option<bool>,
    detail: String,
}

impl Outcome {
    fn check(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass: Some(pass), detail: detail.into() }
    }

    fn skip(detail: impl Into<String>) -> Self {
        Outcome { pass: None, detail: detail.into() }
    }
}

fn normals(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

// ---------------------------------------------------------------- 1

fn table3() -> Outcome {
    let rep = run_table3(&BenchConfig::default()).expect("benchmark runs");
    println!("{}", rep.render());
    let mut misses = Vec::new();
    for sc in Scenario::ALL {
        for m in Method::ALL {
            let rate = rep.row(sc, m).unwrap().rate();
            let ok = if m == Method::PcmciCmiKnn || sc == Scenario::Linear {
                rate >= 0.8
            } else {
                rate < 0.5
            };
            if !ok {
                misses.push(format!("{} on {}: {:.2}", m.name(), sc.name(), rate));
            }
        }
    }
    Outcome::check(misses.is_empty(), if misses.is_empty() { "pattern reproduced".into() } else { misses.join("; ") })
}

// ---------------------------------------------------------------- 2

/// Central 95% interval of a binomial count.
fn binomial_band(n: u64, p: f64) -> (u64, u64) {
    let b = Binomial::new(p, n).unwrap();
    let lo = (0..=n).find(|&k| b.cdf(k) >= 0.025).unwrap();
    let hi = (0..=n).find(|&k| b.cdf(k) >= 0.975).unwrap();
    (lo, hi)
}

fn null_calibration() -> Outcome {
    let cfg = BenchConfig::default();
    let res = run_null_calibration(&cfg, 4).expect("null runs");
    let mut ok = true;
    let mut parts = Vec::new();
    for r in &res {
        let (lo, hi) = binomial_band(r.trials as u64, cfg.alpha);
        let inside = (lo..=hi).contains(&(r.false_positives as u64));
        ok &= inside;
        parts.push(format!("{} {}/{} in [{lo},{hi}]: {inside}", r.method.name(), r.false_positives, r.trials));
    }
    Outcome::check(ok, parts.join("; "))
}

// ---------------------------------------------------------------- 3

fn cmi_oracle() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for rho in [0.3f64, 0.6, 0.8] {
        let truth = -0.5 * (1.0 - rho * rho).ln();
        let est: Vec<f64> = (0..50u64)
            .map(|seed| {
                let mut rng = seeded(seed);
                let x = normals(&mut rng, 1000);
                let e = normals(&mut rng, 1000);
                let y: Vec<f64> = x.iter().zip(&e).map(|(a, b)| rho * a + (1.0 - rho * rho).sqrt() * b).collect();
                cmi_knn_estimate(&x, &y, &[], 4).unwrap()
            })
            .collect();
        let m = mean(&est);
        ok &= (m - truth).abs() <= 0.05;
        parts.push(format!("rho {rho}: {m:.4} vs {truth:.4}"));
    }
    Outcome::check(ok, parts.join("; "))
}

// ---------------------------------------------------------------- 4

fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("v{i}")).collect()
}

/// Every simple path from `s` to `t`, as node lists.
fn simple_paths(adj: &[Vec<usize>], s: usize, t: usize) -> Vec<Vec<usize>> {
    fn go(adj: &[Vec<usize>], path: &mut Vec<usize>, t: usize, out: &mut Vec<Vec<usize>>) {
        let u = *path.last().unwrap();
        if u == t {
            out.push(path.clone());
            return;
        }
        for &v in &adj[u] {
            if !path.contains(&v) {
                path.push(v);
                go(adj, path, t, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(adj, &mut vec![s], t, &mut out);
    out
}

/// Betweenness and incoming closeness by exhaustive path enumeration.
fn centrality_oracle(g: &MixedGraph) -> (Vec<f64>, Vec<f64>) {
    let n = g.n_nodes();
    let mut adj = vec![BTreeSet::new(); n];
    for &(u, v) in &g.arcs {
        adj[u].insert(v);
    }
    for &(a, b) in &g.undirected {
        adj[a].insert(b);
        adj[b].insert(a);
    }
    let adj: Vec<Vec<usize>> = adj.into_iter().map(|s| s.into_iter().collect()).collect();
    let mut between = vec![0.0; n];
    let mut dist = vec![vec![None; n]; n];
    for s in 0..n {
        for t in (0..n).filter(|&t| t != s) {
            let paths = simple_paths(&adj, s, t);
            let Some(shortest) = paths.iter().map(Vec::len).min() else { continue };
            dist[s][t] = Some(shortest - 1);
            let best: Vec<&Vec<usize>> = paths.iter().filter(|p| p.len() == shortest).collect();
            for v in 0..n {
                let through = best.iter().filter(|p| p[1..p.len() - 1].contains(&v)).count();
                between[v] += through as f64 / best.len() as f64;
            }
        }
    }
    let closeness = (0..n)
        .map(|v| {
            if n < 2 {
                return 0.0;
            }
            let d: Vec<usize> = (0..n).filter(|&u| u != v).filter_map(|u| dist[u][v]).collect();
            if d.len() == n - 1 {
                (n - 1) as f64 / d.iter().sum::<usize>() as f64
            } else {
                d.iter().map(|&x| 1.0 / x as f64).sum::<f64>() / (n - 1) as f64
            }
        })
        .collect();
    (between, closeness)
}

/// Equal up to the last bits of floating-point summation order.
fn same_values(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12 * x.abs().max(1.0))
}

/// Small-graph corpus: every directed graph on 3 nodes plus random mixed
/// graphs on 4 to 6 nodes.
fn graph_corpus() -> Vec<MixedGraph> {
    let mut out = Vec::new();
    let pairs3: Vec<(usize, usize)> = (0..3).flat_map(|u| (0..3).map(move |v| (u, v))).filter(|(u, v)| u != v).collect();
    for mask in 0u32..1 << pairs3.len() {
        let mut g = MixedGraph::empty(names(3));
        for (k, &p) in pairs3.iter().enumerate() {
            if mask >> k & 1 == 1 {
                g.arcs.insert(p);
            }
        }
        out.push(g);
    }
    let mut rng = seeded(4);
    for i in 0..400 {
        let n = 4 + i % 3;
        let mut g = MixedGraph::empty(names(n));
        let density = rng.random_range(0.1..0.6);
        for u in 0..n {
            for v in 0..n {
                if u != v && rng.random_bool(density) {
                    g.arcs.insert((u, v));
                }
                if u < v && rng.random_bool(density / 3.0) {
                    g.undirected.insert((u, v));
                }
            }
        }
        out.push(g);
    }
    out
}

fn wl_oracle(g1: &SimpleGraph, e1: &[(usize, usize)], g2: &SimpleGraph, e2: &[(usize, usize)], h: usize, uniform: bool) -> f64 {
    let neighbours = |n: usize, edges: &[(usize, usize)]| {
        let mut nb = vec![BTreeSet::new(); n];
        for &(a, b) in edges {
            if a != b {
                nb[a].insert(b);
                nb[b].insert(a);
            }
        }
        nb
    };
    let nb = [neighbours(g1.n_nodes(), e1), neighbours(g2.n_nodes(), e2)];
    let mut labels: [Vec<String>; 2] = [g1, g2].map(|g| {
        g.node_names.iter().map(|s| if uniform { "*".to_string() } else { s.clone() }).collect()
    });
    let matches = |l: &[Vec<String>; 2]| {
        l[0].iter().map(|a| l[1].iter().filter(|b| *b == a).count()).sum::<usize>() as f64
    };
    let mut k = matches(&labels);
    for _ in 0..h {
        labels = [0, 1].map(|g| {
            (0..labels[g].len())
                .map(|v| {
                    let mut ns: Vec<&String> = nb[g][v].iter().map(|&u| &labels[g][u]).collect();
                    ns.sort();
                    let joined: Vec<&str> = ns.iter().map(|s| s.as_str()).collect();
                    format!("{}({})", labels[g][v], joined.join(","))
                })
                .collect()
        });
        k += matches(&labels);
    }
    k
}

fn random_edges(rng: &mut impl Rng, n: usize) -> Vec<(usize, usize)> {
    let p = rng.random_range(0.1..0.7);
    (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .filter(|_| rng.random_bool(p))
        .collect()
}

/// Maximal line segments found from their start cells.
fn rqa_oracle(rp: &RecurrencePlot, l_min: usize, v_min: usize) -> RqaResult {
    let n = rp.size() as isize;
    let cross = rp.cross;
    let on = |i: isize, j: isize| i >= 0 && j >= 0 && i < n && j < n && rp.get(i as usize, j as usize);
    let on_diag = |i: isize, j: isize| on(i, j) && (cross || i != j);
    let (mut diag, mut vert) = (Vec::new(), Vec::new());
    let mut off = 0usize;
    for i in 0..n {
        for j in 0..n {
            off += on_diag(i, j) as usize;
            if on_diag(i, j) && !on_diag(i - 1, j - 1) {
                diag.push((0..).take_while(|&l| on_diag(i + l, j + l)).count());
            }
            if on(i, j) && !on(i - 1, j) {
                vert.push((0..).take_while(|&l| on(i + l, j)).count());
            }
        }
    }
    let n = n as usize;
    let cells = if cross { n * n } else { n * n - n };
    let dq: Vec<usize> = diag.iter().copied().filter(|&l| l >= l_min).collect();
    let vq: Vec<usize> = vert.iter().copied().filter(|&l| l >= v_min).collect();
    let total = |v: &[usize]| v.iter().sum::<usize>() as f64;
    let frac = |a: f64, b: f64| if b == 0.0 { 0.0 } else { a / b };
    let mut lengths = dq.clone();
    lengths.sort();
    lengths.dedup();
    let entr = lengths
        .iter()
        .map(|&l| {
            let p = dq.iter().filter(|&&x| x == l).count() as f64 / dq.len() as f64;
            -p * p.ln()
        })
        .sum::<f64>()
        .max(0.0);
    let l_max = dq.iter().copied().max().unwrap_or(0);
    RqaResult {
        rr: frac(off as f64, cells as f64),
        det: frac(total(&dq), total(&diag)),
        lam: frac(total(&vq), total(&vert)),
        tt: frac(total(&vq), vq.len() as f64),
        l_max: l_max as f64,
        v_max: vq.iter().copied().max().unwrap_or(0) as f64,
        div: if l_max > 0 { 1.0 / l_max as f64 } else { n as f64 },
        entr_diag: entr,
        l_mean: frac(total(&dq), dq.len() as f64),
        v_mean: frac(total(&vq), vq.len() as f64),
    }
}

fn brute_force() -> Outcome {
    let mut failures = Vec::new();

    let corpus = graph_corpus();
    for (i, g) in corpus.iter().enumerate() {
        let rep = centralities(g);
        let (b, c) = centrality_oracle(g);
        if !same_values(&rep.betweenness, &b) || !same_values(&rep.closeness, &c) {
            failures.push(format!("centrality graph {i}: {:?}/{:?} vs {b:?}/{c:?}", rep.betweenness, rep.closeness));
        }
    }

    // hand-computed values: path a-b-c and triangle
    let path = SimpleGraph::new(names(3), &[(0, 1), (1, 2)]).unwrap();
    let tri = SimpleGraph::new(names(3), &[(0, 1), (1, 2), (0, 2)]).unwrap();
    let hand = [
        (degree_kernel(&path, &path), 5.0),
        (degree_kernel(&path, &tri), 3.0),
        (degree_kernel(&tri, &tri), 9.0),
        (wl_kernel(&tri, &tri, 1, true), 18.0),
        (wl_kernel(&path, &path, 1, true), 14.0),
        (wl_kernel(&path, &tri, 1, true), 12.0),
        (wl_kernel(&path, &tri, 1, false), 4.0),
    ];
    for (k, (got, want)) in hand.iter().enumerate() {
        if got != want {
            failures.push(format!("hand kernel case {k}: {got} vs {want}"));
        }
    }

    let mut rng = seeded(8);
    for _ in 0..300 {
        let n = rng.random_range(1..=6);
        let (e1, e2) = (random_edges(&mut rng, n), random_edges(&mut rng, n));
        let (g1, g2) = (SimpleGraph::new(names(n), &e1).unwrap(), SimpleGraph::new(names(n), &e2).unwrap());
        let pairs_equal_degree = (0..n)
            .flat_map(|u| (0..n).map(move |v| (u, v)))
            .filter(|&(u, v)| g1.degree(u) == g2.degree(v))
            .count() as f64;
        if degree_kernel(&g1, &g2) != pairs_equal_degree {
            failures.push(format!("degree kernel {e1:?} {e2:?}"));
        }
        for h in 0..=3 {
            for uniform in [false, true] {
                let want = wl_oracle(&g1, &e1, &g2, &e2, h, uniform);
                let got = wl_kernel(&g1, &g2, h, uniform);
                if got != want {
                    failures.push(format!("wl h={h} uniform={uniform} {e1:?} {e2:?}: {got} vs {want}"));
                }
            }
        }
    }

    let mut worst_psd = f64::INFINITY;
    for set in 0..30 {
        let n = 6;
        let graphs: Vec<SimpleGraph> = (0..2 + set % 10)
            .map(|_| SimpleGraph::new(names(n), &random_edges(&mut rng, n)).unwrap())
            .collect();
        let labels: Vec<String> = (0..graphs.len()).map(|i| format!("g{i}")).collect();
        for kind in [KernelKind::Degree, KernelKind::Wl] {
            for uniform_init in [false, true] {
                let km = kernel_matrix(labels.clone(), &graphs, &KernelParams { kind, h: 3, uniform_init }).unwrap();
                for m in [km.clone(), km.normalized()] {
                    let ratio = m.min_eigenvalue() / m.values.trace().abs().max(f64::MIN_POSITIVE);
                    worst_psd = worst_psd.min(ratio);
                    if !m.is_psd() {
                        failures.push(format!("kernel set {set} {kind:?} not PSD: {}", m.min_eigenvalue()));
                    }
                }
            }
        }
    }

    let mut n_plots = 0;
    for seed in 0..300u64 {
        let mut rng = seeded(1000 + seed);
        let m = rng.random_range(1..=3);
        let delay = rng.random_range(1..=2);
        let len = rng.random_range(((m - 1) * delay + 2)..=30 + (m - 1) * delay);
        let x = normals(&mut rng, len);
        let y = normals(&mut rng, len);
        let q = rng.random_range(0.05..0.6);
        for other in [None, Some(y.as_slice())] {
            let res = recurrence_plot(&x, other, m, delay, RadiusPolicy::FractionOfMax(q)).unwrap();
            if res.plot.size() > 30 {
                continue;
            }
            n_plots += 1;
            for (l_min, v_min) in [(1, 1), (2, 2), (3, 2)] {
                let got = rqa(&res.plot, l_min, v_min);
                let want = rqa_oracle(&res.plot, l_min, v_min);
                if got != want {
                    failures.push(format!("rqa seed {seed} l_min {l_min}: {got:?} vs {want:?}"));
                }
            }
        }
    }

    let detail = format!(
        "{} graphs, 300 kernel pairs, 30 kernel sets (worst min-eig/trace {worst_psd:.2e}), {n_plots} recurrence plots",
        corpus.len()
    );
    if failures.is_empty() {
        Outcome::check(true, detail)
    } else {
        failures.truncate(5);
        Outcome::check(false, format!("{detail}; {}", failures.join("; ")))
    }
}

// ---------------------------------------------------------------- 5

fn complexity_targets() -> Outcome {
    let (mut white, mut integrated) = (Vec::new(), Vec::new());
    for seed in 0..20 {
        let x = normals(&mut seeded(seed), 4000);
        let walk: Vec<f64> = x
            .iter()
            .scan(0.0, |acc, v| {
                *acc += v;
                Some(*acc)
            })
            .collect();
        white.push(scaling_exponent(&x, ScalingKind::Dfa).unwrap());
        integrated.push(scaling_exponent(&walk, ScalingKind::Dfa).unwrap());
    }
    let (w, i) = (mean(&white), mean(&integrated));
    let up: Vec<f64> = (0..200).map(|t| (t as f64).powf(1.5) + 0.5 * t as f64).collect();
    let down: Vec<f64> = up.iter().rev().copied().collect();
    let pfd = [fractal_dimension(&up, FractalKind::Petrosian).unwrap(), fractal_dimension(&down, FractalKind::Petrosian).unwrap()];
    let pe: Vec<f64> = [(3, 1), (4, 2), (5, 1)]
        .iter()
        .flat_map(|&(m, d)| [permutation_entropy(&up, m, d).unwrap(), permutation_entropy(&down, m, d).unwrap()])
        .collect();
    let ok = (w - 0.5).abs() <= 0.1 && (i - 1.5).abs() <= 0.1 && pfd.iter().all(|&p| p == 1.0) && pe.iter().all(|&p| p == 0.0);
    Outcome::check(ok, format!("DFA white {w:.3}, integrated {i:.3}; Petrosian {pfd:?}; PE {pe:?}"))
}

// ---------------------------------------------------------------- 6

fn ensemble_properties() -> Outcome {
    let cols = |p: usize| (0..p).map(|j| format!("f{j}")).collect::<Vec<_>>();

    let mut first = 0;
    for seed in 0..100u64 {
        let mut rng = seeded(seed);
        let rows: Vec<Vec<f64>> = (0..100).map(|_| normals(&mut rng, 6)).collect();
        let y: Vec<bool> = rows.iter().map(|r| (r[0] > 0.0) ^ rng.random_bool(0.1)).collect();
        let ids: Vec<String> = (0..100).map(|i| format!("r{i}")).collect();
        let s = Samples::new(cols(6), &rows, y, &ids).unwrap();
        let imp = Ensemble::train(&s, &ForestParams::default(), seed).unwrap().oob_importance(&s, seed).unwrap();
        if (1..6).all(|j| imp[0] > imp[j]) {
            first += 1;
        }
    }

    let mut kept_informative = 0;
    let mut eliminated = Vec::new();
    let n_boruta = 10;
    for seed in 0..n_boruta {
        let mut rng = seeded(500 + seed);
        let (mut rows, mut y, mut ids) = (Vec::new(), Vec::new(), Vec::new());
        for i in 0..10 {
            let label = i % 2 == 0;
            for _ in 0..6 {
                let mut r = normals(&mut rng, 21);
                r[0] += if label { 1.5 } else { -1.5 };
                rows.push(r);
                y.push(label);
                ids.push(format!("p{i}"));
            }
        }
        let s = Samples::new(cols(21), &rows, y, &ids).unwrap();
        let params = BorutaParams { forest: ForestParams::default(), max_rounds: 5 };
        let res = boruta_select(&s, &params, seed).unwrap();
        let noise_left = res.selected.iter().filter(|c| *c != "f0").count();
        eliminated.push(20 - noise_left);
        if res.selected.iter().any(|c| c == "f0") {
            kept_informative += 1;
        }
    }

    let y = [false, false, true, true];
    let perfect = roc_and_threshold(&[0.1, 0.2, 0.8, 0.9], &y).unwrap().auc;
    let inverted = roc_and_threshold(&[0.9, 0.8, 0.2, 0.1], &y).unwrap().auc;
    let tied = roc_and_threshold(&[0.5; 4], &y).unwrap().auc;
    let roc_ok = perfect == 1.0 && inverted == 0.0 && tied == 0.5;

    let frac = eliminated.iter().sum::<usize>() as f64 / (20 * n_boruta) as f64;
    Outcome::check(
        first >= 95 && kept_informative == n_boruta && frac >= 0.8 && roc_ok,
        format!(
            "planted feature first in {first}/100; selection kept the informative column in {kept_informative}/{n_boruta} \
             and eliminated {:.1}% of noise (per run {eliminated:?}); AUC {perfect}/{inverted}/{tied}",
            100.0 * frac
        ),
    )
}

// ---------------------------------------------------------------- 7, 8

fn symdyn(args: &[&str]) -> std::process::Output {
    let out = Command::new(env!("CARGO_BIN_EXE_symdyn")).args(args).output().expect("binary runs");
    assert!(out.status.success(), "symdyn {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Runs pipeline-b twice with different worker counts; returns
/// (feature AUC, baseline AUC, identical outputs).
fn pipeline_b_twice(config: Option<&Path>, input: &Path, work: &Path) -> (f64, f64, bool) {
    let mut snaps = Vec::new();
    for jobs in ["1", "4"] {
        let out = work.join(format!("b_jobs{jobs}"));
        let (inp, outp) = (input.to_string_lossy(), out.to_string_lossy());
        let mut args = vec!["--jobs", jobs, "pipeline-b", "--in", &inp, "--out", &outp];
        let cfg = config.map(|c| c.to_string_lossy().into_owned());
        if let Some(c) = &cfg {
            args.extend(["--config", c.as_str()]);
        }
        symdyn(&args);
        snaps.push(common::snapshot(&out));
    }
    let rep = read_json(&work.join("b_jobs1").join("report_b.json"));
    let auc = rep["classification"]["roc"]["auc"].as_f64().unwrap_or(f64::NAN);
    let base = rep["baseline"]["auc"].as_f64().unwrap_or(f64::NAN);
    (auc, base, snaps[0] == snaps[1])
}

fn clinical() -> Outcome {
    let Ok(path) = std::env::var("SYMDYN_CLINICAL_CSV") else {
        return Outcome::skip("SYMDYN_CLINICAL_CSV not set");
    };
    let dir = tempfile::tempdir().unwrap();
    let (auc, base, same) = pipeline_b_twice(None, Path::new(&path), dir.path());
    Outcome::check(same && auc - base >= 0.3, format!("AUC {auc:.3} vs baseline {base:.3}; deterministic {same}"))
}

fn write_small_config(dir: &Path, test: &str) -> std::path::PathBuf {
    let path = dir.join("config.json");
    let text = format!(
        r#"{{
            "seed": 21,
            "discovery": {{"test": "{test}"}},
            "features": {{"m": [2], "delay": [1], "q": [0.1, 0.2], "r": [0.2]}},
            "classifier": {{"forest": {{"n_trees": 100}}, "max_rounds": 5}}
        }}"#
    );
    std::fs::write(&path, text).unwrap();
    path
}

fn clinical_surrogate() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    common::write_dataset(&d.join("data.csv"), 6, 2, 80, 4, 7);
    let cfg = write_small_config(d, "parcorr");
    let (auc, base, same) = pipeline_b_twice(Some(&cfg), &d.join("data.csv"), d);
    Outcome::check(same && auc - base >= 0.3, format!("AUC {auc:.3} vs baseline {base:.3}; deterministic {same}"))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    common::write_dataset(&d.join("data.csv"), 3, 1, 60, 3, 5);
    let cfg = write_small_config(d, "cmiknn");
    let (cfg_s, data_s) = (cfg.to_string_lossy().into_owned(), d.join("data.csv").to_string_lossy().into_owned());
    let mut parts = Vec::new();
    let mut ok = true;
    for pipeline in ["pipeline-a", "pipeline-b"] {
        let runs: Vec<_> = [("1", "r1"), ("4", "r2"), ("4", "r3")]
            .iter()
            .map(|(jobs, tag)| {
                let out = d.join(format!("{pipeline}_{tag}"));
                symdyn(&["--jobs", jobs, pipeline, "--config", &cfg_s, "--in", &data_s, "--out", &out.to_string_lossy()]);
                common::snapshot(&out)
            })
            .collect();
        let same = !runs[0].is_empty() && runs.iter().all(|r| *r == runs[0]);
        ok &= same;
        parts.push(format!("{pipeline}: {} files identical across 3 runs: {same}", runs[0].len()));
    }
    Outcome::check(ok, parts.join("; "))
}

// ----------------------------------------------------------------

fn main() {
    let criteria: Vec<(u32, &str, fn() -> Outcome)> = vec![
        (1, "detection benchmark pattern", table3),
        (2, "null calibration", null_calibration),
        (3, "CMI estimator oracle", cmi_oracle),
        (4, "brute-force equivalence suites", brute_force),
        (5, "complexity theoretical targets", complexity_targets),
        (6, "ensemble properties", ensemble_properties),
        (7, "clinical pipeline", clinical),
        (7, "clinical pipeline (synthetic surrogate)", clinical_surrogate),
        (8, "determinism across worker counts", determinism),
    ];
    let only: Option<Vec<u32>> = std::env::var("SYMDYN_ACCEPT_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let mut unexpected = Vec::new();
    for (id, name, run) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let out = run();
        let secs = start.elapsed().as_secs_f64();
        let tag = match out.pass {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "SKIP",
        };
        println!("{tag} [{id}] {name} ({secs:.1}s): {}", out.detail);
        if out.pass == Some(false) && !KNOWN_SHORTFALLS.contains(&id) {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
