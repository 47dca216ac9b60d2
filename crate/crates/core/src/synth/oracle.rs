//! Brute-force references for the matcher and the miner. Deliberately naive:
//! a reachability table for matching and full enumeration for mining.

use std::cmp::Ordering;

use crate::discretize::FeatureSequence;
use crate::error::{Error, Result};
use crate::patmine::{BoundaryGap, GapPolicy, InteriorGap, MinedPattern, MiningConfig, Pattern, PatternStats};

pub const ORACLE_MAX_ALPHABET: usize = 5;
pub const ORACLE_MAX_LENGTH: usize = 4;
pub const ORACLE_MAX_STUDENTS: usize = 60;

/// `reach[k][i]`: the first k+1 pattern symbols embed with symbol k at index i.
pub fn oracle_match(seq: &[i32], pattern: &[i32], policy: GapPolicy) -> bool {
    assert!(!pattern.is_empty(), "patterns are non-empty");
    let g = seq.len();
    let allowed = |i: usize| match policy.boundary {
        BoundaryGap::Required => i >= 1 && i + 1 < g,
        BoundaryGap::Free => true,
    };
    let gap_ok = |prev: usize, next: usize| match policy.interior {
        InteriorGap::OneOrMore => next >= prev + 2,
        InteriorGap::ZeroOrMore => next > prev,
    };
    let mut reach = vec![vec![false; g]; pattern.len()];
    for i in 0..g {
        reach[0][i] = allowed(i) && seq[i] == pattern[0];
    }
    for k in 1..pattern.len() {
        for i in 0..g {
            if !allowed(i) || seq[i] != pattern[k] {
                continue;
            }
            reach[k][i] = (0..i).any(|j| reach[k - 1][j] && gap_ok(j, i));
        }
    }
    reach[pattern.len() - 1].iter().any(|&r| r)
}

fn oracle_order(a: &MinedPattern, b: &MinedPattern) -> Ordering {
    let acc_a = a.stats.fail_matches as f64 / (a.stats.fail_matches + a.stats.pass_matches) as f64;
    let acc_b = b.stats.fail_matches as f64 / (b.stats.fail_matches + b.stats.pass_matches) as f64;
    let rec_a = a.stats.fail_matches as f64 / a.stats.fail_total as f64;
    let rec_b = b.stats.fail_matches as f64 / b.stats.fail_total as f64;
    acc_b
        .partial_cmp(&acc_a)
        .unwrap()
        .then(rec_b.partial_cmp(&rec_a).unwrap())
        .then(a.pattern.len().cmp(&b.pattern.len()))
        .then_with(|| a.pattern.symbols().cmp(b.pattern.symbols()))
}

/// Every pattern up to the configured length, scored directly.
pub fn oracle_mine(
    fail: &[&FeatureSequence],
    pass: &[&FeatureSequence],
    cfg: &MiningConfig,
) -> Result<Vec<MinedPattern>> {
    if fail.is_empty() || pass.is_empty() {
        return Err(Error::Cohort("oracle needs non-empty fail and pass groups".into()));
    }
    let kind = fail[0].kind();
    let alphabet = kind.alphabet();
    if alphabet.len() > ORACLE_MAX_ALPHABET
        || cfg.max_pattern_length > ORACLE_MAX_LENGTH
        || fail.len() + pass.len() > ORACLE_MAX_STUDENTS
    {
        return Err(Error::Config(format!(
            "oracle bounds: alphabet <= {ORACLE_MAX_ALPHABET}, length <= {ORACLE_MAX_LENGTH}, \
             students <= {ORACLE_MAX_STUDENTS}"
        )));
    }

    let mut out = Vec::new();
    for len in 1..=cfg.max_pattern_length {
        let total = alphabet.len().pow(len as u32);
        for code in 0..total {
            // Base-|alphabet| digits of `code`, most significant first.
            let mut symbols = vec![0; len];
            let mut rest = code;
            for slot in symbols.iter_mut().rev() {
                *slot = alphabet[rest % alphabet.len()];
                rest /= alphabet.len();
            }
            let fail_matches = fail
                .iter()
                .filter(|s| oracle_match(s.symbols(), &symbols, cfg.gap_policy))
                .count();
            let pass_matches = pass
                .iter()
                .filter(|s| oracle_match(s.symbols(), &symbols, cfg.gap_policy))
                .count();
            if fail_matches + pass_matches == 0 {
                continue;
            }
            let accuracy = fail_matches as f64 / (fail_matches + pass_matches) as f64;
            let recall = fail_matches as f64 / fail.len() as f64;
            if recall >= cfg.min_recall && accuracy >= cfg.min_accuracy {
                out.push(MinedPattern {
                    pattern: Pattern::new(kind, symbols)?,
                    stats: PatternStats {
                        fail_matches,
                        pass_matches,
                        fail_total: fail.len(),
                        pass_total: pass.len(),
                    },
                });
            }
        }
    }
    out.sort_by(oracle_order);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::SequenceKind;

    #[test]
    fn worked_example() {
        let seq = [-2, 2, 1, 1, 2, -2, -1, -1, -2, 1, -2, 1, 2, -1];
        assert!(oracle_match(&seq, &[2, 2, -2, -2], GapPolicy::default()));
        assert!(!oracle_match(&seq, &[2, 2, 2, -2, -2], GapPolicy::default()));
    }

    #[test]
    #[should_panic]
    fn empty_pattern_panics() {
        oracle_match(&[1, 2, 3], &[], GapPolicy::default());
    }

    #[test]
    fn bounds_enforced() {
        let s = FeatureSequence::new(SequenceKind::Order, vec![1, 2, 3, 1]).unwrap();
        let cfg = MiningConfig {
            max_pattern_length: 5,
            ..Default::default()
        };
        assert!(oracle_mine(&[&s], &[&s], &cfg).is_err());
        assert!(oracle_mine(&[], &[&s], &MiningConfig::default()).is_err());
    }

    #[test]
    fn enumerates_all_lengths() {
        let a = FeatureSequence::new(SequenceKind::Order, vec![1, 1, 1, 1, 1, 1, 1]).unwrap();
        let cfg = MiningConfig {
            min_recall: 0.0,
            min_accuracy: 0.0,
            max_pattern_length: 4,
            gap_policy: GapPolicy::default(),
        };
        let got = oracle_mine(&[&a], &[&a], &cfg).unwrap();
        // G = 7 admits [1], [1,1], [1,1,1] under the default policy.
        assert_eq!(got.len(), 3);
    }
}
