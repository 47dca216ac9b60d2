//! Comparison classifiers: Gaussian naive Bayes, L2 logistic regression, and a
//! linear hinge-loss SVM.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::{evaluate, Dataset, Metrics, Standardizer};
use crate::cohort::Outcome;
use crate::error::{Error, Result};

pub const VARIANCE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    NaiveBayes,
    LogisticRegression,
    LinearSvm,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 3] = [
        BaselineKind::NaiveBayes,
        BaselineKind::LogisticRegression,
        BaselineKind::LinearSvm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BaselineKind::NaiveBayes => "naive_bayes",
            BaselineKind::LogisticRegression => "logistic_regression",
            BaselineKind::LinearSvm => "linear_svm",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianNb {
    /// Index 0 = Fail, 1 = Pass.
    log_prior: [f64; 2],
    mean: [Vec<f64>; 2],
    var: [Vec<f64>; 2],
}

impl GaussianNb {
    pub fn fit(train: &Dataset) -> Result<Self> {
        train.require_both_classes()?;
        let p = train.n_features();
        let mut count = [0usize; 2];
        let mut mean = [vec![0.0; p], vec![0.0; p]];
        let mut var = [vec![0.0; p], vec![0.0; p]];
        let class = |l: Outcome| usize::from(l == Outcome::Pass);
        for (r, &l) in train.rows().iter().zip(train.labels()) {
            let c = class(l);
            count[c] += 1;
            mean[c].iter_mut().zip(r).for_each(|(m, v)| *m += v);
        }
        for c in 0..2 {
            mean[c].iter_mut().for_each(|m| *m /= count[c] as f64);
        }
        for (r, &l) in train.rows().iter().zip(train.labels()) {
            let c = class(l);
            for ((s, v), m) in var[c].iter_mut().zip(r).zip(&mean[c]) {
                *s += (v - m).powi(2);
            }
        }
        for c in 0..2 {
            var[c]
                .iter_mut()
                .for_each(|s| *s = (*s / count[c] as f64).max(VARIANCE_FLOOR));
        }
        let n = train.n_rows() as f64;
        Ok(GaussianNb {
            log_prior: [(count[0] as f64 / n).ln(), (count[1] as f64 / n).ln()],
            mean,
            var,
        })
    }

    /// Posterior (P(Fail), P(Pass)) for one row.
    pub fn posterior(&self, row: &[f64]) -> (f64, f64) {
        let mut ll = [0.0; 2];
        for c in 0..2 {
            ll[c] = self.log_prior[c]
                + row
                    .iter()
                    .zip(self.mean[c].iter().zip(&self.var[c]))
                    .map(|(x, (m, v))| {
                        -0.5 * ((2.0 * std::f64::consts::PI * v).ln() + (x - m).powi(2) / v)
                    })
                    .sum::<f64>();
        }
        let top = ll[0].max(ll[1]);
        let (a, b) = ((ll[0] - top).exp(), (ll[1] - top).exp());
        (a / (a + b), b / (a + b))
    }

    pub fn predict(&self, row: &[f64]) -> Outcome {
        let (fail, pass) = self.posterior(row);
        if fail >= pass {
            Outcome::Fail
        } else {
            Outcome::Pass
        }
    }
}

/// Linear decision function `w·x + b`, positive = Fail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    pub fn score(&self, row: &[f64]) -> f64 {
        self.bias + self.weights.iter().zip(row).map(|(w, x)| w * x).sum::<f64>()
    }

    pub fn predict(&self, row: &[f64]) -> Outcome {
        if self.score(row) >= 0.0 {
            Outcome::Fail
        } else {
            Outcome::Pass
        }
    }

    pub fn weight_norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticConfig {
    pub learning_rate: f64,
    pub iterations: usize,
    pub l2: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig {
            learning_rate: 0.5,
            iterations: 2000,
            l2: 1e-3,
        }
    }
}

/// Full-batch gradient descent on mean log-loss plus `l2/2 · |w|²`.
pub fn fit_logistic(train: &Dataset, cfg: &LogisticConfig) -> Result<LinearModel> {
    train.require_both_classes()?;
    let p = train.n_features();
    let n = train.n_rows() as f64;
    let y = train.targets();
    let mut m = LinearModel {
        weights: vec![0.0; p],
        bias: 0.0,
    };
    let mut gw = vec![0.0; p];
    for _ in 0..cfg.iterations {
        gw.iter_mut().for_each(|g| *g = 0.0);
        let mut gb = 0.0;
        for (r, &t) in train.rows().iter().zip(&y) {
            let z = m.score(r);
            let err = 1.0 / (1.0 + (-z).exp()) - t;
            gw.iter_mut().zip(r).for_each(|(g, x)| *g += err * x);
            gb += err;
        }
        for (w, g) in m.weights.iter_mut().zip(&gw) {
            *w -= cfg.learning_rate * (g / n + cfg.l2 * *w);
        }
        m.bias -= cfg.learning_rate * gb / n;
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    pub lambda: f64,
    pub epochs: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            lambda: 1e-2,
            epochs: 200,
        }
    }
}

/// Stochastic sub-gradient descent on `λ/2 · |w|² + mean hinge`, step 1/(λt).
/// Returns the average of the iterates, which is far less noisy than the last.
pub fn fit_linear_svm(train: &Dataset, cfg: &SvmConfig, seed: u64) -> Result<LinearModel> {
    train.require_both_classes()?;
    if !(cfg.lambda > 0.0) || cfg.epochs == 0 {
        return Err(Error::Config("svm needs lambda > 0 and epochs >= 1".into()));
    }
    let p = train.n_features();
    let y: Vec<f64> = train
        .labels()
        .iter()
        .map(|&l| if l == Outcome::Fail { 1.0 } else { -1.0 })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = vec![0.0; p];
    let mut b = 0.0;
    let mut avg_w = vec![0.0; p];
    let mut avg_b = 0.0;
    let mut order: Vec<usize> = (0..train.n_rows()).collect();
    let mut t = 0.0;
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1.0;
            let eta = 1.0 / (cfg.lambda * t);
            let x = &train.rows()[i];
            let margin = y[i] * (b + w.iter().zip(x).map(|(a, c)| a * c).sum::<f64>());
            w.iter_mut().for_each(|v| *v *= 1.0 - eta * cfg.lambda);
            if margin < 1.0 {
                w.iter_mut().zip(x).for_each(|(v, xi)| *v += eta * y[i] * xi);
                b += eta * y[i];
            }
            let k = 1.0 / t;
            avg_w.iter_mut().zip(&w).for_each(|(a, v)| *a += k * (v - *a));
            avg_b += k * (b - avg_b);
        }
    }
    Ok(LinearModel {
        weights: avg_w,
        bias: avg_b,
    })
}

/// Fits one baseline on `train` and scores it on `test`. Naive Bayes sees raw
/// features; the linear models see features standardized with train statistics.
pub fn baseline_fit_predict(
    kind: BaselineKind,
    train: &Dataset,
    test: &Dataset,
    seed: u64,
) -> Result<Metrics> {
    let predicted: Vec<Outcome> = match kind {
        BaselineKind::NaiveBayes => {
            let nb = GaussianNb::fit(train)?;
            test.rows().iter().map(|r| nb.predict(r)).collect()
        }
        BaselineKind::LogisticRegression | BaselineKind::LinearSvm => {
            let s = Standardizer::fit(train);
            let (tr, te) = (s.transform(train), s.transform(test));
            let model = if kind == BaselineKind::LogisticRegression {
                fit_logistic(&tr, &LogisticConfig::default())?
            } else {
                fit_linear_svm(&tr, &SvmConfig::default(), seed)?
            };
            te.rows().iter().map(|r| model.predict(r)).collect()
        }
    };
    evaluate(&predicted, test.labels())
}
