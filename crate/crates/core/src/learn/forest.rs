//! Bagged CART classifiers with Gini impurity and mean-decrease-in-impurity
//! feature importance.

use std::io::Write;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{fail_target, Dataset};
use crate::cohort::Outcome;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub trees: usize,
    pub max_depth: usize,
    pub min_samples_split: usize,
    /// Features tried per split; `None` = ceil(sqrt(p)).
    pub max_features: Option<usize>,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            trees: 100,
            max_depth: 8,
            min_samples_split: 2,
            max_features: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf {
        fail_prob: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
struct Tree {
    nodes: Vec<Node>,
    /// Weighted impurity decrease per feature, unnormalized.
    decrease: Vec<f64>,
    /// Rows never drawn into this tree's bootstrap sample.
    out_of_bag: Vec<usize>,
}

impl Tree {
    fn predict(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { fail_prob } => return fail_prob,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[feature] <= threshold { left } else { right },
            }
        }
    }
}

fn gini(fail: f64, total: f64) -> f64 {
    if total == 0.0 {
        return 0.0;
    }
    let p = fail / total;
    2.0 * p * (1.0 - p)
}

struct Grower<'a> {
    rows: &'a [Vec<f64>],
    y: &'a [f64],
    cfg: &'a ForestConfig,
    mtry: usize,
    nodes: Vec<Node>,
    decrease: Vec<f64>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    decrease: f64,
}

impl Grower<'_> {
    fn grow(&mut self, samples: &mut [usize], depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let n = samples.len() as f64;
        let fails: f64 = samples.iter().map(|&i| self.y[i]).sum();
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            fail_prob: fails / n,
        });
        let pure = fails == 0.0 || fails == n;
        if pure || depth >= self.cfg.max_depth || samples.len() < self.cfg.min_samples_split {
            return id;
        }
        let Some(best) = self.best_split(samples, fails, rng) else {
            return id;
        };
        self.decrease[best.feature] += best.decrease;

        let mut cut = 0;
        for i in 0..samples.len() {
            if self.rows[samples[i]][best.feature] <= best.threshold {
                samples.swap(i, cut);
                cut += 1;
            }
        }
        let (l, r) = samples.split_at_mut(cut);
        let left = self.grow(l, depth + 1, rng);
        let right = self.grow(r, depth + 1, rng);
        self.nodes[id] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        id
    }

    fn best_split(&self, samples: &[usize], fails: f64, rng: &mut ChaCha8Rng) -> Option<BestSplit> {
        let n = samples.len() as f64;
        let parent = n * gini(fails, n);
        let p = self.rows[0].len();
        let mut best: Option<BestSplit> = None;
        let mut sorted: Vec<(f64, f64)> = Vec::with_capacity(samples.len());
        for feature in sample(rng, p, self.mtry).into_iter() {
            sorted.clear();
            sorted.extend(samples.iter().map(|&i| (self.rows[i][feature], self.y[i])));
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left_n = 0.0;
            let mut left_fail = 0.0;
            for k in 0..sorted.len() - 1 {
                left_n += 1.0;
                left_fail += sorted[k].1;
                if sorted[k].0 == sorted[k + 1].0 {
                    continue;
                }
                let right_n = n - left_n;
                let child = left_n * gini(left_fail, left_n)
                    + right_n * gini(fails - left_fail, right_n);
                let decrease = parent - child;
                if decrease > 1e-12 && best.as_ref().is_none_or(|b| decrease > b.decrease) {
                    best = Some(BestSplit {
                        feature,
                        threshold: 0.5 * (sorted[k].0 + sorted[k + 1].0),
                        decrease,
                    });
                }
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomForest {
    trees: Vec<Tree>,
    names: Vec<String>,
}

pub fn rf_fit(train: &Dataset, cfg: &ForestConfig) -> Result<RandomForest> {
    if train.n_rows() == 0 || train.n_features() == 0 {
        return Err(Error::Dataset("random forest needs rows and features".into()));
    }
    train.require_both_classes()?;
    if cfg.trees == 0 || cfg.max_depth == 0 {
        return Err(Error::Config("forest needs trees >= 1 and max_depth >= 1".into()));
    }
    let p = train.n_features();
    let mtry = cfg
        .max_features
        .unwrap_or_else(|| (p as f64).sqrt().ceil() as usize)
        .clamp(1, p);
    let y = train.targets();
    let n = train.n_rows();

    let trees = (0..cfg.trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(t as u64);
            let mut samples: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let mut drawn = vec![false; n];
            samples.iter().for_each(|&i| drawn[i] = true);
            let out_of_bag = (0..n).filter(|&i| !drawn[i]).collect();
            let mut g = Grower {
                rows: train.rows(),
                y: &y,
                cfg,
                mtry,
                nodes: Vec::new(),
                decrease: vec![0.0; p],
            };
            g.grow(&mut samples, 0, &mut rng);
            Tree {
                nodes: g.nodes,
                decrease: g.decrease,
                out_of_bag,
            }
        })
        .collect();

    Ok(RandomForest {
        trees,
        names: train.names().to_vec(),
    })
}

impl RandomForest {
    /// Mean of the trees' leaf Fail fractions.
    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(row)).sum::<f64>() / self.trees.len() as f64
    }

    pub fn predict(&self, row: &[f64]) -> Outcome {
        if self.predict_proba(row) >= 0.5 {
            Outcome::Fail
        } else {
            Outcome::Pass
        }
    }

    /// Out-of-bag accuracy on the training data the forest was fitted to;
    /// `None` if no row was ever out of bag.
    pub fn oob_accuracy(&self, train: &Dataset) -> Option<f64> {
        let n = train.n_rows();
        let mut votes = vec![(0.0, 0usize); n];
        for t in &self.trees {
            for &i in &t.out_of_bag {
                votes[i].0 += t.predict(&train.rows()[i]);
                votes[i].1 += 1;
            }
        }
        let mut scored = 0;
        let mut correct = 0;
        for (i, (sum, count)) in votes.iter().enumerate() {
            if *count == 0 {
                continue;
            }
            scored += 1;
            let pred = if sum / *count as f64 >= 0.5 { 1.0 } else { 0.0 };
            if pred == fail_target(train.labels()[i]) {
                correct += 1;
            }
        }
        (scored > 0).then(|| correct as f64 / scored as f64)
    }
}

/// Features with normalized importances, most important first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceRanking {
    pub entries: Vec<(String, f64)>,
}

impl ImportanceRanking {
    pub fn names(&self) -> Vec<String> {
        self.entries.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v).sum()
    }
}

/// Per-tree impurity decreases normalized to sum to one, averaged over the
/// trees that split at all, then renormalized. Ties keep column order.
pub fn rf_importance(model: &RandomForest) -> ImportanceRanking {
    let p = model.names.len();
    let mut acc = vec![0.0; p];
    for t in &model.trees {
        let total: f64 = t.decrease.iter().sum();
        if total > 0.0 {
            for (a, d) in acc.iter_mut().zip(&t.decrease) {
                *a += d / total;
            }
        }
    }
    let total: f64 = acc.iter().sum();
    if total > 0.0 {
        acc.iter_mut().for_each(|a| *a /= total);
    } else {
        acc.iter_mut().for_each(|a| *a = 1.0 / p as f64);
    }
    let mut entries: Vec<(String, f64)> = model.names.iter().cloned().zip(acc).collect();
    entries.sort_by(|a, b| b.1.total_cmp(&a.1));
    let ranking = ImportanceRanking { entries };
    assert!(
        (ranking.total() - 1.0).abs() <= 1e-9,
        "importances must sum to 1, got {}",
        ranking.total()
    );
    ranking
}

/// Writes `feature,importance`.
pub fn write_importance_csv<W: Write>(out: W, ranking: &ImportanceRanking) -> Result<()> {
    let ctx = "importance";
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["feature", "importance"])
        .map_err(|e| Error::csv(ctx, e))?;
    for (name, v) in &ranking.entries {
        w.write_record([name.as_str(), &format!("{v:.6}")])
            .map_err(|e| Error::csv(ctx, e))?;
    }
    w.flush().map_err(|e| Error::io(ctx, e))
}
