use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cohort::Outcome;
use crate::diaglex::CompileFeatureVector;
use crate::error::{Error, Result};

/// Row-major feature matrix with pass/fail labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    rows: Vec<Vec<f64>>,
    labels: Vec<Outcome>,
    names: Vec<String>,
}

impl Dataset {
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<Outcome>, names: Vec<String>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::Dataset(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != names.len() {
                return Err(Error::Dataset(format!(
                    "row {i} has {} columns, expected {}",
                    r.len(),
                    names.len()
                )));
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::Dataset(format!("row {i} has a non-finite entry")));
            }
        }
        Ok(Dataset {
            rows,
            labels,
            names,
        })
    }

    /// One row per student present in `labels`, in key order.
    pub fn from_features(
        features: &BTreeMap<String, CompileFeatureVector>,
        labels: &BTreeMap<String, Outcome>,
        names: Vec<String>,
    ) -> Result<Self> {
        let mut rows = Vec::with_capacity(labels.len());
        let mut ys = Vec::with_capacity(labels.len());
        for (id, &label) in labels {
            let v = features
                .get(id)
                .ok_or_else(|| Error::Dataset(format!("no feature vector for student {id}")))?;
            rows.push(v.counts.iter().map(|&c| f64::from(c)).collect());
            ys.push(label);
        }
        Dataset::new(rows, ys, names)
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.names.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn labels(&self) -> &[Outcome] {
        &self.labels
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// 1.0 for Fail, 0.0 for Pass.
    pub fn targets(&self) -> Vec<f64> {
        self.labels.iter().map(|&l| fail_target(l)).collect()
    }

    /// (fail, pass) counts.
    pub fn class_counts(&self) -> (usize, usize) {
        let fail = self.labels.iter().filter(|&&l| l == Outcome::Fail).count();
        (fail, self.labels.len() - fail)
    }

    pub fn require_both_classes(&self) -> Result<()> {
        match self.class_counts() {
            (0, _) | (_, 0) => Err(Error::Dataset(
                "training data must contain both Fail and Pass rows".into(),
            )),
            _ => Ok(()),
        }
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            names: self.names.clone(),
        }
    }

    pub fn select_columns(&self, columns: &[usize]) -> Dataset {
        Dataset {
            rows: self
                .rows
                .iter()
                .map(|r| columns.iter().map(|&c| r[c]).collect())
                .collect(),
            labels: self.labels.clone(),
            names: columns.iter().map(|&c| self.names[c].clone()).collect(),
        }
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn select_named(&self, names: &[String]) -> Result<Dataset> {
        let cols = names
            .iter()
            .map(|n| {
                self.column_index(n)
                    .ok_or_else(|| Error::Dataset(format!("unknown feature `{n}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.select_columns(&cols))
    }
}

pub(crate) fn fail_target(label: Outcome) -> f64 {
    match label {
        Outcome::Fail => 1.0,
        Outcome::Pass => 0.0,
    }
}

/// Train/test row indices of a stratified split, each sorted ascending.
pub fn split_indices(
    labels: &[Outcome],
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Config(format!(
            "train fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    let mut by_class: Vec<Vec<usize>> = [Outcome::Fail, Outcome::Pass]
        .iter()
        .map(|&c| (0..labels.len()).filter(|&i| labels[i] == c).collect())
        .collect();
    for (class, members) in [Outcome::Fail, Outcome::Pass].iter().zip(&by_class) {
        if members.len() < 2 {
            return Err(Error::Dataset(format!(
                "class {class} has {} rows; a split needs at least 2",
                members.len()
            )));
        }
    }

    let n = labels.len();
    let n_train = (n as f64 * train_fraction).round() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::Dataset(format!(
            "fraction {train_fraction} of {n} rows leaves one side empty"
        )));
    }

    // Largest-remainder apportionment keeps each class within one row of its
    // exact share while hitting the overall train size.
    let exact: Vec<f64> = by_class
        .iter()
        .map(|m| m.len() as f64 * train_fraction)
        .collect();
    let mut quota: Vec<usize> = exact.iter().map(|q| q.floor() as usize).collect();
    let mut order: Vec<usize> = (0..by_class.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())));
    let mut remaining = n_train - quota.iter().sum::<usize>();
    for c in order {
        if remaining == 0 {
            break;
        }
        quota[c] += 1;
        remaining -= 1;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::with_capacity(n_train);
    let mut test = Vec::with_capacity(n - n_train);
    for (members, q) in by_class.iter_mut().zip(quota) {
        members.shuffle(&mut rng);
        train.extend_from_slice(&members[..q]);
        test.extend_from_slice(&members[q..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn split(dataset: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(dataset.labels(), train_fraction, seed)?;
    Ok((dataset.subset(&train), dataset.subset(&test)))
}

/// Z-score transform fitted on one dataset and applied to others.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(ds: &Dataset) -> Self {
        let n = ds.n_rows().max(1) as f64;
        let p = ds.n_features();
        let mut mean = vec![0.0; p];
        for r in ds.rows() {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; p];
        for r in ds.rows() {
            for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
                *s += (v - m).powi(2);
            }
        }
        // Constant columns pass through centred but unscaled.
        let scale = var
            .iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, scale }
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn transform(&self, ds: &Dataset) -> Dataset {
        Dataset {
            rows: ds.rows().iter().map(|r| self.transform_row(r)).collect(),
            labels: ds.labels.clone(),
            names: ds.names.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    /// Recall of the Fail class; `None` when no row is truly Fail.
    pub recall: Option<f64>,
}

pub fn evaluate(predicted: &[Outcome], truth: &[Outcome]) -> Result<Metrics> {
    if predicted.len() != truth.len() || truth.is_empty() {
        return Err(Error::Dataset(format!(
            "cannot evaluate {} predictions against {} labels",
            predicted.len(),
            truth.len()
        )));
    }
    let correct = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    let fails = truth.iter().filter(|&&t| t == Outcome::Fail).count();
    let caught = predicted
        .iter()
        .zip(truth)
        .filter(|(&p, &t)| t == Outcome::Fail && p == Outcome::Fail)
        .count();
    Ok(Metrics {
        accuracy: correct as f64 / truth.len() as f64,
        recall: (fails > 0).then(|| caught as f64 / fails as f64),
    })
}
