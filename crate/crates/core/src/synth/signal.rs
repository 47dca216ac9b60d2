//! Independent-Poisson compile-error count datasets with a known Bayes rate.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::cohort::Outcome;
use crate::error::{Error, Result};
use crate::learn::Dataset;

/// One feature: (name, mean count for Fail students, mean count for Pass students).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalConfig {
    pub n: usize,
    pub fail_fraction: f64,
    pub rates: Vec<(String, f64, f64)>,
    pub seed: u64,
}

impl SignalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config("signal dataset needs n >= 2".into()));
        }
        if !(0.0..=1.0).contains(&self.fail_fraction) {
            return Err(Error::Config("fail_fraction must lie in [0, 1]".into()));
        }
        if self.rates.is_empty() {
            return Err(Error::Config("signal dataset needs at least one feature".into()));
        }
        for (name, f, p) in &self.rates {
            if !(f.is_finite() && p.is_finite() && *f >= 0.0 && *p >= 0.0) {
                return Err(Error::Config(format!("rates for `{name}` must be finite and >= 0")));
            }
        }
        Ok(())
    }
}

fn draw(rate: f64, rng: &mut ChaCha8Rng) -> f64 {
    if rate == 0.0 {
        0.0
    } else {
        Poisson::new(rate).expect("validated rate").sample(rng)
    }
}

/// Exactly round(n·f) Fail rows in shuffled order; each feature is an
/// independent Poisson count whose mean depends on the row's class.
pub fn gen_compile_dataset(cfg: &SignalConfig) -> Result<Dataset> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n_fail = (cfg.n as f64 * cfg.fail_fraction).round() as usize;
    let mut labels: Vec<Outcome> = (0..cfg.n)
        .map(|i| if i < n_fail { Outcome::Fail } else { Outcome::Pass })
        .collect();
    labels.shuffle(&mut rng);
    let rows = labels
        .iter()
        .map(|&l| {
            cfg.rates
                .iter()
                .map(|(_, f, p)| draw(if l == Outcome::Fail { *f } else { *p }, &mut rng))
                .collect()
        })
        .collect();
    let names = cfg.rates.iter().map(|(n, _, _)| n.clone()).collect();
    Dataset::new(rows, labels, names)
}

fn log_poisson(k: u64, rate: f64) -> f64 {
    if rate == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    let lgamma: f64 = (1..=k).map(|i| (i as f64).ln()).sum();
    k as f64 * rate.ln() - rate - lgamma
}

/// Accuracy of the Bayes classifier for a single Poisson feature:
/// sum over k of max(π_f·Pois(k; λ_f), π_p·Pois(k; λ_p)).
pub fn poisson_bayes_accuracy(prior_fail: f64, rate_fail: f64, rate_pass: f64) -> f64 {
    let top = rate_fail.max(rate_pass);
    let kmax = (top + 12.0 * top.sqrt() + 30.0).ceil() as u64;
    (0..=kmax)
        .map(|k| {
            let a = prior_fail * log_poisson(k, rate_fail).exp();
            let b = (1.0 - prior_fail) * log_poisson(k, rate_pass).exp();
            a.max(b)
        })
        .sum()
}
