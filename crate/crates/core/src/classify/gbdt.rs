//! Gradient-boosted regression trees on the logistic loss.
//!
//! Newton boosting with exact splits: every distinct feature value is a
//! candidate threshold. Each round's step is halved until the training loss
//! does not increase, so the recorded loss curve is non-increasing.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::FeatureMatrix;
use super::metrics::{binary_metrics, MetricsReport};
use crate::dataset::rng;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtConfig {
    pub trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_samples_leaf: usize,
    /// L2 penalty on leaf values.
    pub lambda: f64,
    /// Row fraction drawn (without replacement) for each tree.
    pub subsample: f64,
    pub seed: u64,
}

impl Default for GbdtConfig {
    fn default() -> Self {
        Self {
            trees: 200,
            max_depth: 4,
            learning_rate: 0.1,
            min_samples_leaf: 20,
            lambda: 1.0,
            subsample: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    /// `x[feature] <= threshold` goes left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, row: &[f64]) -> f64 {
        self.predict_with(row, usize::MAX, 0.0)
    }

    /// Prediction with `row[feature]` replaced by `value`.
    fn predict_with(&self, row: &[f64], feature: usize, value: f64) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature: f,
                    threshold,
                    left,
                    right,
                } => {
                    let x = if f == feature { value } else { row[f] };
                    i = if x <= threshold { left } else { right };
                }
            }
        }
    }

    fn uses(&self, feature: usize) -> bool {
        self.nodes
            .iter()
            .any(|n| matches!(n, Node::Split { feature: f, .. } if *f == feature))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedTreesModel {
    pub features: Vec<String>,
    pub class_low: u32,
    pub class_high: u32,
    pub base_score: f64,
    pub trees: Vec<Tree>,
    /// Mean training loss before the first tree and after each tree.
    pub train_loss: Vec<f64>,
    pub config: GbdtConfig,
}

fn sigmoid(m: f64) -> f64 {
    1.0 / (1.0 + (-m).exp())
}

/// `log(1 + e^m) - y m`.
fn logistic_loss(m: f64, y: f64) -> f64 {
    let softplus = if m > 0.0 { m + (-m).exp().ln_1p() } else { m.exp().ln_1p() };
    softplus - y * m
}

fn mean_loss(margins: &[f64], y: &[f64]) -> f64 {
    margins.iter().zip(y).map(|(&m, &y)| logistic_loss(m, y)).sum::<f64>() / y.len() as f64
}

/// Per-feature sorted distinct values and row-major bin indices.
struct Binned {
    values: Vec<Vec<f64>>,
    bins: Vec<u32>,
    /// Start of each feature's slots in a flat histogram.
    offsets: Vec<usize>,
}

impl Binned {
    fn new(x: &FeatureMatrix) -> Self {
        let cols = x.cols();
        let mut values = Vec::with_capacity(cols);
        let mut bins = vec![0u32; x.rows * cols];
        let mut offsets = vec![0];
        for j in 0..cols {
            let column = x.column(j);
            let mut distinct = column.clone();
            distinct.sort_by(f64::total_cmp);
            distinct.dedup();
            for (i, v) in column.iter().enumerate() {
                bins[i * cols + j] = distinct.binary_search_by(|p| p.total_cmp(v)).unwrap() as u32;
            }
            offsets.push(offsets[j] + distinct.len());
            values.push(distinct);
        }
        Self { values, bins, offsets }
    }

    fn cols(&self) -> usize {
        self.values.len()
    }

    fn bin(&self, row: u32, feature: usize) -> usize {
        self.bins[row as usize * self.cols() + feature] as usize
    }

    fn threshold(&self, feature: usize, bin: usize) -> f64 {
        let (lo, hi) = (self.values[feature][bin], self.values[feature][bin + 1]);
        let mid = lo + (hi - lo) / 2.0;
        if mid < hi {
            mid
        } else {
            lo
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Slot {
    g: f64,
    h: f64,
    n: u32,
}

struct Grower<'a> {
    binned: &'a Binned,
    /// Gradient and hessian per row.
    gh: &'a [(f64, f64)],
    config: &'a GbdtConfig,
    nodes: Vec<Node>,
}

struct SplitChoice {
    feature: usize,
    bin: usize,
    gain: f64,
}

impl Grower<'_> {
    fn score(&self, g: f64, h: f64) -> f64 {
        g * g / (h + self.config.lambda)
    }

    fn histogram(&self, rows: &[u32]) -> Vec<Slot> {
        let cols = self.binned.cols();
        let offsets = &self.binned.offsets;
        let mut hist = vec![Slot::default(); offsets[cols]];
        for &r in rows {
            let (g, h) = self.gh[r as usize];
            let row = &self.binned.bins[r as usize * cols..(r as usize + 1) * cols];
            for (&b, &off) in row.iter().zip(offsets) {
                let e = &mut hist[off + b as usize];
                e.g += g;
                e.h += h;
                e.n += 1;
            }
        }
        hist
    }

    fn best_split(&self, hist: &[Slot], count: usize, g: f64, h: f64) -> Option<SplitChoice> {
        let min_leaf = self.config.min_samples_leaf.max(1);
        let parent = self.score(g, h);
        let mut best: Option<SplitChoice> = None;
        for j in 0..self.binned.cols() {
            let slots = &hist[self.binned.offsets[j]..self.binned.offsets[j + 1]];
            let (mut gl, mut hl, mut nl) = (0.0, 0.0, 0usize);
            for (b, s) in slots[..slots.len().saturating_sub(1)].iter().enumerate() {
                gl += s.g;
                hl += s.h;
                nl += s.n as usize;
                if s.n == 0 || nl < min_leaf {
                    continue;
                }
                if count - nl < min_leaf {
                    break;
                }
                let gain = self.score(gl, hl) + self.score(g - gl, h - hl) - parent;
                if gain > 1e-12 && best.as_ref().is_none_or(|s| gain > s.gain) {
                    best = Some(SplitChoice { feature: j, bin: b, gain });
                }
            }
        }
        best
    }

    fn can_split(&self, count: usize, depth: usize) -> bool {
        depth < self.config.max_depth && count >= 2 * self.config.min_samples_leaf.max(1)
    }

    /// `hist` is the node's histogram when it may split.
    fn grow(&mut self, rows: Vec<u32>, hist: Option<Vec<Slot>>, depth: usize) -> usize {
        let (g, h) = rows
            .iter()
            .fold((0.0, 0.0), |(g, h), &r| (g + self.gh[r as usize].0, h + self.gh[r as usize].1));
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            value: -g / (h + self.config.lambda),
        });
        let Some(hist) = hist else {
            return id;
        };
        let Some(split) = self.best_split(&hist, rows.len(), g, h) else {
            return id;
        };
        let (left_rows, right_rows): (Vec<u32>, Vec<u32>) =
            rows.iter().partition(|&&r| self.binned.bin(r, split.feature) <= split.bin);
        drop(rows);
        let split_left = self.can_split(left_rows.len(), depth + 1);
        let split_right = self.can_split(right_rows.len(), depth + 1);
        // Build the smaller child's histogram; the sibling's is the difference.
        let (left_hist, right_hist) = match (split_left, split_right) {
            (false, false) => (None, None),
            (true, false) => (Some(self.histogram(&left_rows)), None),
            (false, true) => (None, Some(self.histogram(&right_rows))),
            (true, true) => {
                let left_small = left_rows.len() <= right_rows.len();
                let small = self.histogram(if left_small { &left_rows } else { &right_rows });
                let mut large = hist;
                for (l, s) in large.iter_mut().zip(&small) {
                    l.g -= s.g;
                    l.h -= s.h;
                    l.n -= s.n;
                }
                if left_small {
                    (Some(small), Some(large))
                } else {
                    (Some(large), Some(small))
                }
            }
        };
        let left = self.grow(left_rows, left_hist, depth + 1);
        let right = self.grow(right_rows, right_hist, depth + 1);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: self.binned.threshold(split.feature, split.bin),
            left,
            right,
        };
        id
    }
}

/// Trains a binary model; rows labelled `class_high` are the `1` targets.
pub fn gbdt_train(
    x: &FeatureMatrix,
    class_low: u32,
    class_high: u32,
    config: &GbdtConfig,
) -> Result<BoostedTreesModel> {
    if config.trees == 0 || config.max_depth == 0 || !(config.learning_rate > 0.0) {
        return Err(Error::InvalidArgument(
            "trees, depth and learning rate must be positive".into(),
        ));
    }
    if !(config.subsample > 0.0 && config.subsample <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "subsample {} outside (0, 1]",
            config.subsample
        )));
    }
    let mut y = Vec::with_capacity(x.rows);
    for &h in &x.labels {
        if h == class_high {
            y.push(1.0);
        } else if h == class_low {
            y.push(0.0);
        } else {
            return Err(Error::InvalidArgument(format!(
                "label {h} is neither {class_low} nor {class_high}"
            )));
        }
    }
    let positives = y.iter().filter(|&&v| v == 1.0).count();
    if positives == 0 || positives == y.len() {
        return Err(Error::InvalidArgument(
            "training data must contain both classes".into(),
        ));
    }
    let prior = positives as f64 / y.len() as f64;
    let base_score = (prior / (1.0 - prior)).ln();

    let binned = Binned::new(x);
    let mut margins = vec![base_score; x.rows];
    let mut loss = mean_loss(&margins, &y);
    let mut train_loss = vec![loss];
    let mut trees = Vec::with_capacity(config.trees);
    let mut rng = rng(config.seed);
    let all_rows: Vec<u32> = (0..x.rows as u32).collect();
    let take = ((config.subsample * x.rows as f64).round() as usize).max(1);

    for _ in 0..config.trees {
        let p: Vec<f64> = margins.iter().map(|&m| sigmoid(m)).collect();
        let gh: Vec<(f64, f64)> = p
            .iter()
            .zip(&y)
            .map(|(p, y)| (p - y, (p * (1.0 - p)).max(1e-16)))
            .collect();
        let rows = if take < x.rows {
            let mut r = all_rows.clone();
            r.shuffle(&mut rng);
            r.truncate(take);
            r.sort_unstable();
            r
        } else {
            all_rows.clone()
        };
        let mut grower = Grower {
            binned: &binned,
            gh: &gh,
            config,
            nodes: Vec::new(),
        };
        let hist = grower.can_split(rows.len(), 0).then(|| grower.histogram(&rows));
        grower.grow(rows, hist, 0);
        let mut tree = Tree { nodes: grower.nodes };
        let raw: Vec<f64> = (0..x.rows).map(|i| tree.predict(x.row(i))).collect();

        let mut scale = config.learning_rate;
        let mut accepted = None;
        for _ in 0..30 {
            let candidate: Vec<f64> = margins.iter().zip(&raw).map(|(m, r)| m + scale * r).collect();
            let new_loss = mean_loss(&candidate, &y);
            if new_loss <= loss {
                accepted = Some((candidate, new_loss));
                break;
            }
            scale /= 2.0;
        }
        match accepted {
            Some((candidate, new_loss)) => {
                margins = candidate;
                loss = new_loss;
            }
            None => scale = 0.0,
        }
        for node in &mut tree.nodes {
            if let Node::Leaf { value } = node {
                *value *= scale;
            }
        }
        trees.push(tree);
        train_loss.push(loss);
    }

    Ok(BoostedTreesModel {
        features: x.features.iter().map(|f| f.to_string()).collect(),
        class_low,
        class_high,
        base_score,
        trees,
        train_loss,
        config: config.clone(),
    })
}

impl BoostedTreesModel {
    pub fn margin(&self, row: &[f64]) -> f64 {
        self.base_score + self.trees.iter().map(|t| t.predict(row)).sum::<f64>()
    }

    /// Probability of `class_high`.
    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        sigmoid(self.margin(row))
    }

    pub fn predict(&self, row: &[f64]) -> u32 {
        if self.margin(row) >= 0.0 {
            self.class_high
        } else {
            self.class_low
        }
    }

    fn check_columns(&self, x: &FeatureMatrix) -> Result<()> {
        let names: Vec<String> = x.features.iter().map(|f| f.to_string()).collect();
        if names != self.features {
            return Err(Error::InvalidArgument(
                "feature matrix columns differ from the trained features".into(),
            ));
        }
        Ok(())
    }

    pub fn accuracy(&self, x: &FeatureMatrix) -> Result<f64> {
        self.check_columns(x)?;
        let correct = (0..x.rows).filter(|&i| self.predict(x.row(i)) == x.labels[i]).count();
        Ok(correct as f64 / x.rows.max(1) as f64)
    }

    /// Metrics with `class_low` as the positive class.
    pub fn evaluate(&self, x: &FeatureMatrix) -> Result<MetricsReport> {
        self.check_columns(x)?;
        let mut actual = Vec::with_capacity(x.rows);
        let mut predicted = Vec::with_capacity(x.rows);
        let mut prob = Vec::with_capacity(x.rows);
        for i in 0..x.rows {
            let label = x.labels[i];
            if label != self.class_low && label != self.class_high {
                return Err(Error::InvalidArgument(format!("label {label} outside the model's classes")));
            }
            let p_high = self.predict_proba(x.row(i));
            actual.push(label == self.class_low);
            predicted.push(p_high < 0.5);
            prob.push(1.0 - p_high);
        }
        binary_metrics(self.class_low, self.class_high, &actual, &predicted, &prob)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Importance {
    pub feature: String,
    pub mean_drop: f64,
    pub std_drop: f64,
}

fn feature_seed(seed: u64, feature: usize) -> u64 {
    seed ^ (feature as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Mean accuracy drop when a column is permuted, over `repeats` seeded
/// permutations; sorted by decreasing importance, ties by column order.
pub fn permutation_importance(
    model: &BoostedTreesModel,
    x: &FeatureMatrix,
    seed: u64,
    repeats: usize,
) -> Result<Vec<Importance>> {
    if repeats == 0 {
        return Err(Error::InvalidArgument("repeats must be at least 1".into()));
    }
    model.check_columns(x)?;
    let margins: Vec<f64> = (0..x.rows).map(|i| model.margin(x.row(i))).collect();
    let correct = |m: f64, i: usize| {
        let class = if m >= 0.0 { model.class_high } else { model.class_low };
        class == x.labels[i]
    };
    let base = (0..x.rows).filter(|&i| correct(margins[i], i)).count() as f64 / x.rows.max(1) as f64;

    let mut out: Vec<(usize, Importance)> = (0..x.cols())
        .into_par_iter()
        .map(|j| {
            let using: Vec<&Tree> = model.trees.iter().filter(|t| t.uses(j)).collect();
            let mut drops = Vec::with_capacity(repeats);
            if using.is_empty() {
                drops.resize(repeats, 0.0);
            } else {
                let mut rng = rng(feature_seed(seed, j));
                let column = x.column(j);
                let mut perm: Vec<usize> = (0..x.rows).collect();
                for _ in 0..repeats {
                    perm.shuffle(&mut rng);
                    let hits = (0..x.rows)
                        .filter(|&i| {
                            let row = x.row(i);
                            let v = column[perm[i]];
                            let delta: f64 = using
                                .iter()
                                .map(|t| t.predict_with(row, j, v) - t.predict(row))
                                .sum();
                            correct(margins[i] + delta, i)
                        })
                        .count();
                    drops.push(base - hits as f64 / x.rows.max(1) as f64);
                }
            }
            let mean = drops.iter().sum::<f64>() / repeats as f64;
            let var = drops.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / repeats as f64;
            (
                j,
                Importance {
                    feature: x.features[j].to_string(),
                    mean_drop: mean,
                    std_drop: var.sqrt(),
                },
            )
        })
        .collect();
    out.sort_by(|a, b| b.1.mean_drop.total_cmp(&a.1.mean_drop).then(a.0.cmp(&b.0)));
    Ok(out.into_iter().map(|(_, imp)| imp).collect())
}
