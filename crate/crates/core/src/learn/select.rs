use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::forest::ImportanceRanking;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub selected: Vec<String>,
    /// Test accuracy with the top-1, top-2, ... features, up to and including
    /// the first step that failed to improve.
    pub trajectory: Vec<f64>,
}

/// Number of leading features kept for a trajectory: stop at the first step
/// whose accuracy is not strictly greater than the one before it.
pub fn selection_size(trajectory: &[f64]) -> usize {
    if trajectory.is_empty() {
        return 0;
    }
    trajectory
        .windows(2)
        .position(|w| w[1] <= w[0])
        .map_or(trajectory.len(), |i| i + 1)
}

/// Greedy forward selection in importance order. `score` trains on the first
/// dataset and returns accuracy on the second.
pub fn forward_select<F>(
    train: &Dataset,
    test: &Dataset,
    ranking: &ImportanceRanking,
    seed: u64,
    mut score: F,
) -> Result<Selection>
where
    F: FnMut(&Dataset, &Dataset, u64) -> Result<f64>,
{
    let order = ranking.names();
    if order.is_empty() {
        return Err(Error::Dataset("ranking is empty".into()));
    }
    for name in &order {
        if train.column_index(name).is_none() {
            return Err(Error::Dataset(format!("ranked feature `{name}` not in dataset")));
        }
    }
    let mut trajectory: Vec<f64> = Vec::new();
    for k in 1..=order.len() {
        let cols = &order[..k];
        let acc = score(&train.select_named(cols)?, &test.select_named(cols)?, seed)?;
        trajectory.push(acc);
        if selection_size(&trajectory) < k {
            break;
        }
    }
    let keep = selection_size(&trajectory);
    Ok(Selection {
        selected: order[..keep].to_vec(),
        trajectory,
    })
}
