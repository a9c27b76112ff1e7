//! Bagged decision trees for the two-class GAD/MDD task.
//!
//! The positive class is MDD. Trees are grown without depth cap or feature
//! subsampling on bootstrap samples; class weights enter both the Gini
//! impurity and the leaf votes. Around the forest sit out-of-bag
//! permutation importance, an iterative elimination loop, leave-one-
//! individual-out cross-validation and ROC threshold selection.

use std::collections::BTreeSet;

use log::warn;
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complexity::FeatureMatrix;
use crate::dataio::Diagnosis;
use crate::rng::{derive, seeded};
use crate::stats::{mean, sample_sd};
use crate::{Error, Result};

/// Labelled rows with individual membership.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    pub columns: Vec<String>,
    /// Rows are observations.
    pub x: DMatrix<f64>,
    /// `true` is the positive class (MDD).
    pub y: Vec<bool>,
    /// Individual index of each row into `ids`.
    pub groups: Vec<usize>,
    /// Individual ids in first-appearance order.
    pub ids: Vec<String>,
}

impl Samples {
    pub fn new(columns: Vec<String>, rows: &[Vec<f64>], y: Vec<bool>, row_ids: &[String]) -> Result<Self> {
        if rows.len() != y.len() || rows.len() != row_ids.len() {
            return Err(Error::data("rows, labels and ids differ in length"));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != columns.len()) {
            return Err(Error::data(format!(
                "row has {} values but there are {} columns",
                r.len(),
                columns.len()
            )));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::data("feature values must be finite"));
        }
        let mut ids: Vec<String> = Vec::new();
        let groups = row_ids
            .iter()
            .map(|id| match ids.iter().position(|g| g == id) {
                Some(g) => g,
                None => {
                    ids.push(id.clone());
                    ids.len() - 1
                }
            })
            .collect();
        let x = DMatrix::from_fn(rows.len(), columns.len(), |i, j| rows[i][j]);
        Ok(Samples { columns, x, y, groups, ids })
    }

    /// Rows whose diagnosis passes `keep`; the label is `diagnosis == MDD`.
    pub fn from_features(fm: &FeatureMatrix, keep: impl Fn(Option<Diagnosis>) -> bool) -> Result<Self> {
        let rows: Vec<_> = fm.rows.iter().filter(|r| keep(r.diagnosis)).collect();
        let values: Vec<Vec<f64>> = rows.iter().map(|r| r.values.clone()).collect();
        let y = rows.iter().map(|r| r.diagnosis == Some(Diagnosis::Mdd)).collect();
        let ids: Vec<String> = rows.iter().map(|r| r.id.clone()).collect();
        Samples::new(fm.columns.clone(), &values, y, &ids)
    }

    pub fn n_rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.x.ncols()
    }

    pub fn n_groups(&self) -> usize {
        self.ids.len()
    }

    pub fn select_columns(&self, cols: &[usize]) -> Samples {
        Samples {
            columns: cols.iter().map(|&c| self.columns[c].clone()).collect(),
            x: self.x.select_columns(cols),
            ..self.clone()
        }
    }

    /// Keep the given rows; individuals are renumbered.
    pub fn select_rows(&self, rows: &[usize]) -> Samples {
        let vals: Vec<Vec<f64>> = rows
            .iter()
            .map(|&r| self.x.row(r).iter().copied().collect())
            .collect();
        let ids: Vec<String> = rows.iter().map(|&r| self.ids[self.groups[r]].clone()).collect();
        let y = rows.iter().map(|&r| self.y[r]).collect();
        Samples::new(self.columns.clone(), &vals, y, &ids).expect("subset of valid samples")
    }

    fn rows_of(&self, group: usize) -> Vec<usize> {
        (0..self.n_rows()).filter(|&r| self.groups[r] == group).collect()
    }
}

/// What a bootstrap draw resamples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BootstrapUnit {
    #[default]
    Rows,
    /// Whole individuals, for sensitivity analysis.
    Individuals,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Inverse-frequency class weights; `false` uses unit weights.
    pub class_weighting: bool,
    pub bootstrap: BootstrapUnit,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 300,
            class_weighting: true,
            bootstrap: BootstrapUnit::Rows,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node {
    /// Vote for the positive class: 1, 0, or 0.5 on a weighted tie.
    Leaf { vote: f64 },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn vote(&self, value: impl Fn(usize) -> f64) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { vote } => return vote,
                Node::Split { feature, threshold, left, right } => {
                    i = if value(feature) <= threshold { left } else { right };
                }
            }
        }
    }

    fn features(&self) -> BTreeSet<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split { feature, .. } => Some(*feature),
                Node::Leaf { .. } => None,
            })
            .collect()
    }
}

/// Weighted Gini impurity scaled by node weight: `W (1 - p^2 - q^2)`.
fn gini(pos: f64, neg: f64) -> f64 {
    let w = pos + neg;
    if w <= 0.0 {
        0.0
    } else {
        w - (pos * pos + neg * neg) / w
    }
}

struct Split {
    feature: usize,
    threshold: f64,
    left: Vec<usize>,
    right: Vec<usize>,
}

fn best_split<R: Rng>(x: &DMatrix<f64>, y: &[bool], w: &[f64], rows: &[usize], rng: &mut R) -> Option<Split> {
    let (tp, tn) = rows.iter().fold((0.0, 0.0), |(p, n), &r| {
        if y[r] {
            (p + w[r], n)
        } else {
            (p, n + w[r])
        }
    });
    if tp == 0.0 || tn == 0.0 {
        return None;
    }
    let mut best: Option<(f64, usize, f64)> = None;
    let mut ties = 0u32;
    let mut buf: Vec<(f64, usize)> = Vec::with_capacity(rows.len());
    for j in 0..x.ncols() {
        let col = x.column(j);
        buf.clear();
        buf.extend(rows.iter().map(|&r| (col[r], r)));
        buf.sort_by(|a, b| a.0.total_cmp(&b.0));
        if buf[0].0 == buf[buf.len() - 1].0 {
            continue;
        }
        let (mut lp, mut ln) = (0.0, 0.0);
        let mut feat_best: Option<(f64, f64)> = None;
        for i in 0..buf.len() - 1 {
            let r = buf[i].1;
            if y[r] {
                lp += w[r];
            } else {
                ln += w[r];
            }
            let (a, b) = (buf[i].0, buf[i + 1].0);
            if a == b {
                continue;
            }
            let imp = gini(lp, ln) + gini(tp - lp, tn - ln);
            if feat_best.is_none_or(|(bi, _)| imp < bi) {
                let mid = 0.5 * (a + b);
                feat_best = Some((imp, if mid < b { mid } else { a }));
            }
        }
        let Some((imp, thr)) = feat_best else { continue };
        match best {
            Some((bi, _, _)) if imp > bi => {}
            Some((bi, _, _)) if imp == bi => {
                // equal splits on different columns are chosen uniformly
                ties += 1;
                if rng.random_range(0..ties) == 0 {
                    best = Some((imp, j, thr));
                }
            }
            _ => {
                best = Some((imp, j, thr));
                ties = 1;
            }
        }
    }
    let (_, feature, threshold) = best?;
    let (left, right) = rows.iter().partition(|&&r| x[(r, feature)] <= threshold);
    Some(Split { feature, threshold, left, right })
}

fn grow<R: Rng>(x: &DMatrix<f64>, y: &[bool], w: &[f64], rows: Vec<usize>, rng: &mut R) -> Tree {
    let mut nodes = vec![Node::Leaf { vote: 0.0 }];
    let mut work = vec![(0usize, rows)];
    while let Some((id, rows)) = work.pop() {
        match best_split(x, y, w, &rows, rng) {
            Some(s) => {
                let l = nodes.len();
                nodes.push(Node::Leaf { vote: 0.0 });
                nodes.push(Node::Leaf { vote: 0.0 });
                nodes[id] = Node::Split {
                    feature: s.feature,
                    threshold: s.threshold,
                    left: l,
                    right: l + 1,
                };
                work.push((l, s.left));
                work.push((l + 1, s.right));
            }
            None => {
                let (p, n) = rows.iter().fold((0.0, 0.0), |(p, n), &r| {
                    if y[r] {
                        (p + w[r], n)
                    } else {
                        (p, n + w[r])
                    }
                });
                let vote = if p > n {
                    1.0
                } else if n > p {
                    0.0
                } else {
                    0.5
                };
                nodes[id] = Node::Leaf { vote };
            }
        }
    }
    Tree { nodes }
}

/// A trained forest. Immutable after training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub columns: Vec<String>,
    trees: Vec<Tree>,
    /// Per tree, how often each training row was drawn.
    pub bootstrap_counts: Vec<Vec<u32>>,
    /// Weights of the negative and positive class.
    pub class_weights: [f64; 2],
    pub n_trees: usize,
    pub seed: u64,
}

fn class_weights(y: &[bool], weighted: bool) -> [f64; 2] {
    if !weighted {
        return [1.0, 1.0];
    }
    let pos = y.iter().filter(|&&v| v).count() as f64;
    let n = y.len() as f64;
    [n / (2.0 * (n - pos)), n / (2.0 * pos)]
}

fn bootstrap_counts<R: Rng>(s: &Samples, unit: BootstrapUnit, rng: &mut R) -> Vec<u32> {
    let n = s.n_rows();
    let mut counts = vec![0u32; n];
    match unit {
        BootstrapUnit::Rows => {
            for _ in 0..n {
                counts[rng.random_range(0..n)] += 1;
            }
        }
        BootstrapUnit::Individuals => {
            let g = s.n_groups();
            let mut draws = vec![0u32; g];
            for _ in 0..g {
                draws[rng.random_range(0..g)] += 1;
            }
            for (r, c) in counts.iter_mut().enumerate() {
                *c = draws[s.groups[r]];
            }
        }
    }
    counts
}

impl Ensemble {
    pub fn train(s: &Samples, params: &ForestParams, seed: u64) -> Result<Self> {
        if s.n_rows() == 0 || s.y.iter().all(|&v| v) || s.y.iter().all(|&v| !v) {
            return Err(Error::data("training data must contain both classes"));
        }
        if params.n_trees == 0 {
            return Err(Error::config("n_trees must be positive"));
        }
        let cw = class_weights(&s.y, params.class_weighting);
        let (trees, counts): (Vec<Tree>, Vec<Vec<u32>>) = (0..params.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = seeded(derive(seed, &[t as u64]));
                let counts = bootstrap_counts(s, params.bootstrap, &mut rng);
                let w: Vec<f64> = (0..s.n_rows())
                    .map(|r| counts[r] as f64 * cw[s.y[r] as usize])
                    .collect();
                let rows = (0..s.n_rows()).filter(|&r| counts[r] > 0).collect();
                (grow(&s.x, &s.y, &w, rows, &mut rng), counts)
            })
            .unzip();
        Ok(Ensemble {
            columns: s.columns.clone(),
            trees,
            bootstrap_counts: counts,
            class_weights: cw,
            n_trees: params.n_trees,
            seed,
        })
    }

    fn check_schema(&self, s: &Samples) -> Result<()> {
        if s.columns != self.columns {
            return Err(Error::data("feature columns do not match the training schema"));
        }
        Ok(())
    }

    /// Probability of the positive class for each row: the fraction of
    /// trees voting positive.
    pub fn predict_proba(&self, s: &Samples) -> Result<Vec<f64>> {
        self.check_schema(s)?;
        Ok((0..s.n_rows())
            .map(|r| {
                let row = s.x.row(r);
                self.trees.iter().map(|t| t.vote(|j| row[j])).sum::<f64>() / self.trees.len() as f64
            })
            .collect())
    }

    /// Out-of-bag probability per training row, `None` if in every bag.
    pub fn oob_proba(&self, s: &Samples) -> Result<Vec<Option<f64>>> {
        self.check_training(s)?;
        Ok((0..s.n_rows())
            .map(|r| {
                let row = s.x.row(r);
                let votes: Vec<f64> = self
                    .trees
                    .iter()
                    .zip(&self.bootstrap_counts)
                    .filter(|(_, c)| c[r] == 0)
                    .map(|(t, _)| t.vote(|j| row[j]))
                    .collect();
                (!votes.is_empty()).then(|| mean(&votes))
            })
            .collect())
    }

    fn check_training(&self, s: &Samples) -> Result<()> {
        self.check_schema(s)?;
        if self.bootstrap_counts.first().is_some_and(|c| c.len() != s.n_rows()) {
            return Err(Error::data("samples are not the training rows of this model"));
        }
        Ok(())
    }

    /// Permuted-predictor delta error per column.
    ///
    /// Per tree, the OOB error after permuting one column among the OOB rows
    /// minus the unpermuted OOB error; the score is the mean of these deltas
    /// over trees divided by their standard deviation. Columns a tree never
    /// splits on contribute a delta of 0.
    pub fn oob_importance(&self, s: &Samples, seed: u64) -> Result<Vec<f64>> {
        self.check_training(s)?;
        let p = s.n_cols();
        let deltas: Vec<Option<Vec<f64>>> = self
            .trees
            .par_iter()
            .zip(&self.bootstrap_counts)
            .enumerate()
            .map(|(t, (tree, counts))| {
                let oob: Vec<usize> = (0..s.n_rows()).filter(|&r| counts[r] == 0).collect();
                if oob.is_empty() {
                    return None;
                }
                let error = |perm: Option<(usize, &[f64])>| {
                    oob.iter()
                        .enumerate()
                        .map(|(k, &r)| {
                            let v = tree.vote(|j| match perm {
                                Some((pj, vals)) if pj == j => vals[k],
                                _ => s.x[(r, j)],
                            });
                            (v - s.y[r] as u8 as f64).abs()
                        })
                        .sum::<f64>()
                        / oob.len() as f64
                };
                let base = error(None);
                let mut d = vec![0.0; p];
                for j in tree.features() {
                    let mut vals: Vec<f64> = oob.iter().map(|&r| s.x[(r, j)]).collect();
                    vals.shuffle(&mut seeded(derive(seed, &[t as u64, j as u64])));
                    d[j] = error(Some((j, &vals))) - base;
                }
                Some(d)
            })
            .collect();
        let used: Vec<&Vec<f64>> = deltas.iter().flatten().collect();
        let skipped = deltas.len() - used.len();
        if skipped > 0 {
            warn!("{skipped} trees have no out-of-bag rows and were skipped");
        }
        if used.is_empty() {
            return Err(Error::data("no tree has out-of-bag rows"));
        }
        Ok((0..p)
            .map(|j| {
                let d: Vec<f64> = used.iter().map(|v| v[j]).collect();
                let m = mean(&d);
                let sd = if d.len() > 1 { sample_sd(&d) } else { 0.0 };
                if sd > 0.0 {
                    m / sd
                } else {
                    m
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndividualPrediction {
    pub id: String,
    pub positive: bool,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoocvReport {
    pub individuals: Vec<IndividualPrediction>,
    /// Held-out probability of every row.
    pub row_probabilities: Vec<f64>,
}

impl LoocvReport {
    pub fn scores(&self) -> Vec<f64> {
        self.individuals.iter().map(|i| i.probability).collect()
    }

    pub fn labels(&self) -> Vec<bool> {
        self.individuals.iter().map(|i| i.positive).collect()
    }
}

fn group_labels(s: &Samples) -> Result<Vec<bool>> {
    (0..s.n_groups())
        .map(|g| {
            let rows = s.rows_of(g);
            let first = s.y[rows[0]];
            if rows.iter().any(|&r| s.y[r] != first) {
                Err(Error::data(format!("individual '{}' has mixed labels", s.ids[g])))
            } else {
                Ok(first)
            }
        })
        .collect()
}

/// One trained fold per individual, holding that individual out.
fn folds<T: Send>(
    s: &Samples,
    f: impl Fn(usize, &Samples, &Samples) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    if s.n_groups() < 3 {
        return Err(Error::data("leave-one-out needs at least 3 individuals"));
    }
    (0..s.n_groups())
        .into_par_iter()
        .map(|g| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..s.n_rows()).partition(|&r| s.groups[r] == g);
            f(g, &s.select_rows(&train), &s.select_rows(&test))
        })
        .collect()
}

/// Held-out probability per individual: the mean over its rows of the
/// probabilities from a model trained on every other individual.
pub fn loocv_by_individual(s: &Samples, params: &ForestParams, seed: u64) -> Result<LoocvReport> {
    let labels = group_labels(s)?;
    let per_fold = folds(s, |g, train, test| {
        let model = Ensemble::train(train, params, derive(seed, &[g as u64]))?;
        model.predict_proba(test)
    })?;
    let mut row_probabilities = vec![0.0; s.n_rows()];
    let mut individuals = Vec::with_capacity(s.n_groups());
    for (g, probs) in per_fold.into_iter().enumerate() {
        for (r, p) in s.rows_of(g).into_iter().zip(&probs) {
            row_probabilities[r] = *p;
        }
        individuals.push(IndividualPrediction {
            id: s.ids[g].clone(),
            positive: labels[g],
            probability: mean(&probs),
        });
    }
    Ok(LoocvReport { individuals, row_probabilities })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BorutaParams {
    pub forest: ForestParams,
    pub max_rounds: usize,
}

impl Default for BorutaParams {
    fn default() -> Self {
        BorutaParams {
            forest: ForestParams::default(),
            max_rounds: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BorutaRound {
    pub columns: Vec<String>,
    /// Fold-averaged importance of `columns`.
    pub importance: Vec<f64>,
    pub dropped: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BorutaResult {
    /// Survivors ranked by last-round importance; empty if all were eliminated.
    pub selected: Vec<String>,
    pub rounds: Vec<BorutaRound>,
}

/// Repeatedly drop every column whose leave-one-individual-out averaged
/// importance is not positive.
pub fn boruta_select(s: &Samples, params: &BorutaParams, seed: u64) -> Result<BorutaResult> {
    if s.n_cols() < 2 {
        return Err(Error::data("selection needs at least 2 columns"));
    }
    let mut alive: Vec<usize> = (0..s.n_cols()).collect();
    let mut rounds = Vec::new();
    let mut last_importance = Vec::new();
    for round in 0..params.max_rounds.max(1) {
        let sub = s.select_columns(&alive);
        let per_fold = folds(&sub, |g, train, _| {
            let fs = derive(seed, &[round as u64, g as u64]);
            Ensemble::train(train, &params.forest, fs)?.oob_importance(train, derive(fs, &[u64::MAX]))
        })?;
        let importance: Vec<f64> = (0..alive.len())
            .map(|j| per_fold.iter().map(|v| v[j]).sum::<f64>() / per_fold.len() as f64)
            .collect();
        let (keep, drop): (Vec<usize>, Vec<usize>) = (0..alive.len()).partition(|&j| importance[j] > 0.0);
        rounds.push(BorutaRound {
            columns: sub.columns.clone(),
            importance: importance.clone(),
            dropped: drop.iter().map(|&j| sub.columns[j].clone()).collect(),
        });
        if drop.is_empty() {
            last_importance = importance;
            break;
        }
        last_importance = keep.iter().map(|&j| importance[j]).collect();
        alive = keep.iter().map(|&j| alive[j]).collect();
        if alive.is_empty() {
            warn!("every feature was eliminated");
            break;
        }
    }
    let mut order: Vec<usize> = (0..alive.len()).collect();
    order.sort_by(|&a, &b| last_importance[b].total_cmp(&last_importance[a]).then(a.cmp(&b)));
    Ok(BorutaResult {
        selected: order.into_iter().map(|k| s.columns[alive[k]].clone()).collect(),
        rounds,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Scores at or above this value count as positive.
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocReport {
    /// One point per distinct score, ascending by threshold.
    pub points: Vec<RocPoint>,
    pub auc: f64,
    pub optimal_threshold: f64,
    pub sensitivity: f64,
    pub specificity: f64,
}

/// ROC curve over the distinct scores, trapezoidal AUC (the curve starts at
/// (0, 0)) and the threshold closest to (0, 1), ties going to the higher
/// threshold.
pub fn roc_and_threshold(scores: &[f64], labels: &[bool]) -> Result<RocReport> {
    if scores.len() != labels.len() {
        return Err(Error::data("scores and labels differ in length"));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::data("scores must be finite"));
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::data("ROC needs both classes"));
    }
    let mut thresholds: Vec<f64> = scores.to_vec();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    let mut desc = Vec::with_capacity(thresholds.len());
    for &t in &thresholds {
        let tp = scores.iter().zip(labels).filter(|(s, l)| **l && **s >= t).count();
        let fp = scores.iter().zip(labels).filter(|(s, l)| !**l && **s >= t).count();
        desc.push(RocPoint {
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
            threshold: t,
        });
    }
    let mut auc = 0.0;
    let (mut fx, mut fy) = (0.0, 0.0);
    for p in &desc {
        auc += (p.fpr - fx) * (p.tpr + fy) / 2.0;
        (fx, fy) = (p.fpr, p.tpr);
    }
    // descending order: the first minimum has the highest threshold
    let dist = |p: &RocPoint| (p.fpr * p.fpr + (1.0 - p.tpr) * (1.0 - p.tpr)).sqrt();
    let best = desc
        .iter()
        .copied()
        .reduce(|b, p| if dist(&p) < dist(&b) { p } else { b })
        .expect("at least one threshold");
    desc.reverse();
    Ok(RocReport {
        points: desc,
        auc,
        optimal_threshold: best.threshold,
        sensitivity: best.tpr,
        specificity: 1.0 - best.fpr,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldoutPrediction {
    pub id: String,
    pub probability: f64,
    pub class: Diagnosis,
}

/// Mean probability per individual; at or above `threshold` is MDD.
pub fn predict_holdout(model: &Ensemble, threshold: f64, s: &Samples) -> Result<Vec<HoldoutPrediction>> {
    let probs = model.predict_proba(s)?;
    Ok((0..s.n_groups())
        .map(|g| {
            let p: Vec<f64> = s.rows_of(g).iter().map(|&r| probs[r]).collect();
            let probability = mean(&p);
            HoldoutPrediction {
                id: s.ids[g].clone(),
                probability,
                class: classify(probability, threshold),
            }
        })
        .collect())
}

pub fn classify(probability: f64, threshold: f64) -> Diagnosis {
    if probability >= threshold {
        Diagnosis::Mdd
    } else {
        Diagnosis::Gad
    }
}
