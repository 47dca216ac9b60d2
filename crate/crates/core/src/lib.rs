//! Behavior-sequence mining and pass/fail prediction from programming-course
//! submission logs.
//!
//! The pipeline: load a [`cohort::Cohort`] from CSV logs, standardize it into
//! per-student [`discretize::SequenceSet`]s, mine failure-predictive
//! gap-wildcard patterns with [`patmine::mine`], turn compiler diagnostics
//! into feature vectors with [`diaglex`], and rank/select/classify those with
//! [`learn`]. [`synth`] builds seeded cohorts with planted signal and holds
//! the brute-force oracles the miner is checked against.

pub mod cohort;
pub mod csvio;
pub mod diaglex;
pub mod discretize;
pub mod error;
pub mod learn;
pub mod patmine;
pub mod synth;

pub use error::{Error, Result};
