use std::cmp::Ordering;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pattern::{embeds, next_at, GapPolicy, Pattern};
use crate::discretize::{FeatureSequence, SequenceKind};
use crate::error::{Error, Result};

/// Match counts of one pattern over the fail and pass groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PatternStats {
    pub fail_matches: usize,
    pub pass_matches: usize,
    pub fail_total: usize,
    pub pass_total: usize,
}

impl PatternStats {
    /// Fraction of matching students who failed; `None` when nobody matches.
    pub fn accuracy(&self) -> Option<f64> {
        let matched = self.fail_matches + self.pass_matches;
        (matched > 0).then(|| self.fail_matches as f64 / matched as f64)
    }

    /// Fraction of the fail group the pattern matches.
    pub fn recall(&self) -> f64 {
        if self.fail_total == 0 {
            0.0
        } else {
            self.fail_matches as f64 / self.fail_total as f64
        }
    }

    pub fn is_supported(&self) -> bool {
        self.fail_matches + self.pass_matches > 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiningConfig {
    pub min_recall: f64,
    pub min_accuracy: f64,
    pub max_pattern_length: usize,
    pub gap_policy: GapPolicy,
}

impl Default for MiningConfig {
    fn default() -> Self {
        MiningConfig {
            min_recall: 0.70,
            min_accuracy: 0.70,
            max_pattern_length: 6,
            gap_policy: GapPolicy::default(),
        }
    }
}

impl MiningConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("min_recall", self.min_recall), ("min_accuracy", self.min_accuracy)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Config(format!("{name} must be a finite value >= 0, got {v}")));
            }
        }
        if self.max_pattern_length < 1 {
            return Err(Error::Config("max_pattern_length must be >= 1".into()));
        }
        Ok(())
    }

    fn accepts(&self, stats: &PatternStats) -> bool {
        stats.recall() >= self.min_recall
            && stats.accuracy().is_some_and(|a| a >= self.min_accuracy)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinedPattern {
    pub pattern: Pattern,
    pub stats: PatternStats,
}

/// Output order: accuracy desc, recall desc, length asc, then symbols.
pub fn canonical_order(a: &MinedPattern, b: &MinedPattern) -> Ordering {
    let acc = |m: &MinedPattern| m.stats.accuracy().unwrap_or(f64::NEG_INFINITY);
    acc(b)
        .total_cmp(&acc(a))
        .then_with(|| b.stats.recall().total_cmp(&a.stats.recall()))
        .then_with(|| a.pattern.len().cmp(&b.pattern.len()))
        .then_with(|| a.pattern.symbols().cmp(b.pattern.symbols()))
}

fn check_group(seqs: &[&FeatureSequence], kind: SequenceKind, name: &str) -> Result<()> {
    if seqs.is_empty() {
        return Err(Error::Cohort(format!("{name} group is empty")));
    }
    if let Some(s) = seqs.iter().find(|s| s.kind() != kind) {
        return Err(Error::KindMismatch {
            expected: kind.to_string(),
            found: s.kind().to_string(),
        });
    }
    Ok(())
}

pub fn pattern_stats(
    p: &Pattern,
    fail: &[&FeatureSequence],
    pass: &[&FeatureSequence],
    policy: GapPolicy,
) -> Result<PatternStats> {
    check_group(fail, p.kind(), "fail")?;
    check_group(pass, p.kind(), "pass")?;
    let count = |group: &[&FeatureSequence]| {
        group
            .iter()
            .filter(|s| embeds(s.symbols(), p.symbols(), policy))
            .count()
    };
    Ok(PatternStats {
        fail_matches: count(fail),
        pass_matches: count(pass),
        fail_total: fail.len(),
        pass_total: pass.len(),
    })
}

/// A pattern together with, per sequence, the index where its earliest
/// embedding ends (`None` = no embedding).
struct Frontier {
    symbols: Vec<i32>,
    fail_ends: Vec<Option<usize>>,
    pass_ends: Vec<Option<usize>>,
}

impl Frontier {
    fn stats(&self) -> PatternStats {
        PatternStats {
            fail_matches: self.fail_ends.iter().flatten().count(),
            pass_matches: self.pass_ends.iter().flatten().count(),
            fail_total: self.fail_ends.len(),
            pass_total: self.pass_ends.len(),
        }
    }
}

/// Level-wise search for fail-predictive patterns.
///
/// Level 1 is every single symbol of the alphabet. A level-k pattern is
/// extended (by appending one symbol) only while its recall over the fail
/// group stays at or above `min_recall`; appending can only shrink the match
/// set, so nothing pruned could have qualified. Every explored pattern that
/// meets both thresholds is reported, sorted by [`canonical_order`].
pub fn mine(
    fail: &[&FeatureSequence],
    pass: &[&FeatureSequence],
    cfg: &MiningConfig,
) -> Result<Vec<MinedPattern>> {
    cfg.validate()?;
    let kind = fail
        .first()
        .map(|s| s.kind())
        .ok_or_else(|| Error::Cohort("fail group is empty".into()))?;
    check_group(fail, kind, "fail")?;
    check_group(pass, kind, "pass")?;
    let len = fail[0].len();
    if let Some(s) = fail.iter().chain(pass).find(|s| s.len() != len) {
        return Err(Error::Cohort(format!(
            "sequences must share one length ({len} vs {})",
            s.len()
        )));
    }

    let policy = cfg.gap_policy;
    let Some((lo, hi)) = policy.window(len) else {
        return Ok(Vec::new());
    };
    let step = policy.step();
    let alphabet = kind.alphabet();
    let max_len = cfg.max_pattern_length.min(policy.max_embeddable(len));

    let advance = |group: &[&FeatureSequence], ends: Option<&[Option<usize>]>, sym: i32| {
        group
            .iter()
            .enumerate()
            .map(|(i, s)| match ends {
                None => next_at(s.symbols(), sym, lo, hi),
                Some(prev) => prev[i].and_then(|e| next_at(s.symbols(), sym, e + step, hi)),
            })
            .collect::<Vec<_>>()
    };

    let mut out = Vec::new();
    let mut level: Vec<Frontier> = alphabet
        .par_iter()
        .map(|&sym| Frontier {
            symbols: vec![sym],
            fail_ends: advance(fail, None, sym),
            pass_ends: advance(pass, None, sym),
        })
        .collect();
    let mut depth = 1;

    while !level.is_empty() && depth <= max_len {
        let mut survivors = Vec::new();
        for f in level {
            let stats = f.stats();
            if !stats.is_supported() || stats.recall() < cfg.min_recall {
                continue;
            }
            if cfg.accepts(&stats) {
                out.push(MinedPattern {
                    pattern: Pattern::new(kind, f.symbols.clone())?,
                    stats,
                });
            }
            survivors.push(f);
        }
        depth += 1;
        if depth > max_len {
            break;
        }
        level = survivors
            .par_iter()
            .flat_map_iter(|parent| {
                alphabet.iter().map(move |&sym| {
                    let mut symbols = parent.symbols.clone();
                    symbols.push(sym);
                    (parent, sym, symbols)
                })
            })
            .map(|(parent, sym, symbols)| Frontier {
                symbols,
                fail_ends: advance(fail, Some(&parent.fail_ends), sym),
                pass_ends: advance(pass, Some(&parent.pass_ends), sym),
            })
            .collect();
    }

    out.sort_by(canonical_order);
    Ok(out)
}

/// Writes `kind,pattern,accuracy,recall,fail_matches,pass_matches`.
pub fn write_patterns_csv<W: Write>(
    out: W,
    rows: &[(SequenceKind, Vec<MinedPattern>)],
) -> Result<()> {
    let ctx = "patterns";
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["kind", "pattern", "accuracy", "recall", "fail_matches", "pass_matches"])
        .map_err(|e| Error::csv(ctx, e))?;
    for (kind, mined) in rows {
        for m in mined {
            w.write_record([
                kind.as_str(),
                &m.pattern.to_string(),
                &format!("{:.4}", m.stats.accuracy().unwrap_or(0.0)),
                &format!("{:.4}", m.stats.recall()),
                &m.stats.fail_matches.to_string(),
                &m.stats.pass_matches.to_string(),
            ])
            .map_err(|e| Error::csv(ctx, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(ctx, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order(v: &[i32]) -> FeatureSequence {
        FeatureSequence::new(SequenceKind::Order, v.to_vec()).unwrap()
    }

    fn cfg(max_len: usize, min: f64) -> MiningConfig {
        MiningConfig {
            min_recall: min,
            min_accuracy: min,
            max_pattern_length: max_len,
            gap_policy: GapPolicy::default(),
        }
    }

    #[test]
    fn stats_from_match_sets() {
        // Only [.,2,.] interior positions matter for pattern (*)2(*) with G = 3.
        let yes = order(&[1, 2, 1]);
        let no = order(&[2, 1, 2]);
        let p = Pattern::new(SequenceKind::Order, vec![2]).unwrap();
        let fail = [&yes, &yes, &no];
        let pass = [&yes, &no];
        let s = pattern_stats(&p, &fail, &pass, GapPolicy::default()).unwrap();
        assert_eq!((s.fail_matches, s.pass_matches), (2, 1));
        assert_eq!(s.accuracy(), Some(2.0 / 3.0));
        assert_eq!(s.recall(), 2.0 / 3.0);

        let perfect = pattern_stats(&p, &[&yes, &yes], &[&no], GapPolicy::default()).unwrap();
        assert_eq!(perfect.accuracy(), Some(1.0));
        assert_eq!(perfect.recall(), 1.0);

        let none = pattern_stats(&p, &[&no], &[&no], GapPolicy::default()).unwrap();
        assert!(!none.is_supported());
        assert_eq!(none.accuracy(), None);
    }

    #[test]
    fn stats_reject_empty_group() {
        let p = Pattern::new(SequenceKind::Order, vec![2]).unwrap();
        let s = order(&[1, 2, 1]);
        assert!(pattern_stats(&p, &[], &[&s], GapPolicy::default()).is_err());
    }

    #[test]
    fn single_symbol_example() {
        let f1 = order(&[1, 2, 1, 1]);
        let f2 = order(&[3, 2, 1, 3]);
        let p1 = order(&[2, 1, 3, 3]);
        let fail = [&f1, &f2];
        let pass = [&p1];
        let got = mine(&fail, &pass, &cfg(1, 1.0)).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].pattern.to_string(), "(*)2(*)");
        assert_eq!(got[0].stats.accuracy(), Some(1.0));
        assert_eq!(got[0].stats.recall(), 1.0);

        let longer = mine(&fail, &pass, &cfg(2, 1.0)).unwrap();
        assert_eq!(longer, got);
    }

    #[test]
    fn unsatisfiable_threshold_is_empty() {
        let f1 = order(&[1, 2, 1, 1]);
        let got = mine(&[&f1], &[&f1], &cfg(3, 1.01)).unwrap();
        assert!(got.is_empty());
    }

    #[test]
    fn empty_group_is_error() {
        let f1 = order(&[1, 2, 1, 1]);
        assert!(mine(&[], &[&f1], &cfg(3, 0.5)).is_err());
        assert!(mine(&[&f1], &[], &cfg(3, 0.5)).is_err());
    }

    #[test]
    fn output_is_sorted() {
        let a = order(&[1, 3, 2, 3, 1, 3, 1]);
        let b = order(&[2, 3, 1, 3, 2, 1, 1]);
        let c = order(&[1, 1, 2, 2, 3, 3, 1]);
        let got = mine(&[&a, &b], &[&c], &cfg(3, 0.0)).unwrap();
        assert!(!got.is_empty());
        for w in got.windows(2) {
            assert_ne!(canonical_order(&w[0], &w[1]), Ordering::Greater);
        }
    }
}
