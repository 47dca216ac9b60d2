//! Seeded synthetic cohorts with planted sequence patterns and compile-signal,
//! plus brute-force oracles for the matcher and the miner.
//!
//! All randomness comes from one `ChaCha8Rng` seeded with
//! `SeedableRng::seed_from_u64(seed)`, consumed in a fixed order, so a config
//! reproduces the same files on every platform.
//!
//! Generated sequences are exact: the submission log is constructed so that
//! [`build_sequences`] recovers every target symbol, and students who do not
//! carry a planted pattern are redrawn until they do not match it either.

mod oracle;
mod signal;

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index::sample;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cohort::{assemble_cohort, Cohort, CompileStatus, Grouping, Outcome, SubmissionRecord};
use crate::csvio;
use crate::diaglex::{default_taxonomy, DiagnosticTaxonomy};
use crate::discretize::{build_sequences, OrderThresholds, SequenceKind, SequenceSet};
use crate::error::{Error, Result};
use crate::patmine::{GapPolicy, Pattern};

pub use oracle::{
    oracle_match, oracle_mine, ORACLE_MAX_ALPHABET, ORACLE_MAX_LENGTH, ORACLE_MAX_STUDENTS,
};
pub use signal::{gen_compile_dataset, poisson_bayes_accuracy, SignalConfig};

const MAX_ATTEMPTS: usize = 200;
const MAX_REDRAWS: usize = 2000;
const MAX_SWAPS: usize = 200_000;

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedPattern {
    pub pattern: Pattern,
    /// Probability a (latent) failing student carries the pattern.
    pub fail_rate: f64,
    pub pass_rate: f64,
}

/// Relative per-submission rate of one compile category for each class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryRate {
    pub category: String,
    pub fail_rate: f64,
    pub pass_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_students: usize,
    /// Sequence length G.
    pub groups: usize,
    pub fail_fraction: f64,
    pub planted: Vec<PlantedPattern>,
    /// Empty means every submission compiles.
    pub compile_signal: Vec<CategoryRate>,
    pub label_noise: f64,
    pub assignments_per_group: usize,
    /// Cohort mean of per-group submission totals; even.
    pub mean_group_submissions: u32,
    /// Defaults to (floor(n/3), floor(2n/3)).
    pub order_thresholds: Option<OrderThresholds>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 0,
            n_students: 40,
            groups: 14,
            fail_fraction: 0.4,
            planted: Vec::new(),
            compile_signal: Vec::new(),
            label_noise: 0.0,
            assignments_per_group: 2,
            mean_group_submissions: 10,
            order_thresholds: None,
        }
    }
}

impl SynthConfig {
    pub fn thresholds(&self) -> OrderThresholds {
        self.order_thresholds.unwrap_or(OrderThresholds {
            low: (self.n_students / 3) as f64,
            high: (2 * self.n_students / 3) as f64,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_students < 2 {
            return bad("synthetic cohort needs at least 2 students".into());
        }
        if self.groups < 1 || self.assignments_per_group < 1 {
            return bad("groups and assignments_per_group must be >= 1".into());
        }
        if !(self.fail_fraction > 0.0 && self.fail_fraction < 1.0) {
            return bad(format!("fail_fraction must be in (0, 1), got {}", self.fail_fraction));
        }
        if !(0.0..0.5).contains(&self.label_noise) {
            return bad(format!("label_noise must be in [0, 0.5), got {}", self.label_noise));
        }
        let floor = 2 * self.assignments_per_group.max(3) as u32 + 2;
        if !self.mean_group_submissions.is_multiple_of(2) || self.mean_group_submissions < floor {
            return bad(format!(
                "mean_group_submissions must be even and >= {floor}, got {}",
                self.mean_group_submissions
            ));
        }
        self.thresholds().validate()?;
        let policy = GapPolicy::default();
        for p in &self.planted {
            for r in [p.fail_rate, p.pass_rate] {
                if !(0.0..=1.0).contains(&r) {
                    return bad(format!("carrier rate {r} outside [0, 1]"));
                }
            }
            if p.pattern.len() > policy.max_embeddable(self.groups) {
                return Err(Error::Synth(format!(
                    "pattern {} cannot embed in a sequence of length {}",
                    p.pattern, self.groups
                )));
            }
        }
        let names = default_taxonomy().feature_names();
        let mut seen = HashSet::new();
        for c in &self.compile_signal {
            if !names.contains(&c.category) {
                return bad(format!("unknown compile category `{}`", c.category));
            }
            if !seen.insert(c.category.as_str()) {
                return bad(format!("compile category `{}` listed twice", c.category));
            }
            if !(c.fail_rate >= 0.0 && c.pass_rate >= 0.0) || !(c.fail_rate + c.pass_rate).is_finite()
            {
                return bad(format!("compile rates for `{}` must be >= 0", c.category));
            }
        }
        if !self.compile_signal.is_empty() {
            let fail: f64 = self.compile_signal.iter().map(|c| c.fail_rate).sum();
            let pass: f64 = self.compile_signal.iter().map(|c| c.pass_rate).sum();
            if fail <= 0.0 || pass <= 0.0 {
                return bad("each class needs a positive total compile rate".into());
            }
        }
        Ok(())
    }
}

/// Ground truth for one planted pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedTruth {
    pub kind: SequenceKind,
    pub pattern: String,
    pub fail_rate: f64,
    pub pass_rate: f64,
    /// Carriers among latent-fail students.
    pub fail_carriers: Vec<String>,
    /// Carriers among latent-pass students.
    pub pass_carriers: Vec<String>,
    /// Match counts under the observed labels (carriers are exactly the
    /// students that match).
    pub expected_fail_matches: usize,
    pub expected_pass_matches: usize,
    pub expected_accuracy: Option<f64>,
    pub expected_recall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub n_students: usize,
    pub groups: usize,
    pub fail_fraction: f64,
    pub label_noise: f64,
    pub assignments_per_group: usize,
    pub mean_group_submissions: u32,
    pub order_thresholds: OrderThresholds,
    pub compile_signal: Vec<CategoryRate>,
    /// Students whose observed label differs from the latent class.
    pub flipped_labels: Vec<String>,
    pub planted: Vec<PlantedTruth>,
}

#[derive(Debug, Clone)]
pub struct SynthCohort {
    pub cohort: Cohort,
    pub sequences: SequenceSet,
    pub manifest: Manifest,
    pub thresholds: OrderThresholds,
    pub taxonomy: DiagnosticTaxonomy,
}

/// Signals that a random draw could not be realized and should be redrawn.
struct Retry;

fn kind_slot(kind: SequenceKind) -> usize {
    match kind {
        SequenceKind::Times => 0,
        SequenceKind::Order => 1,
        SequenceKind::Plagiarism => 2,
    }
}

/// Every index tuple where the pattern can sit under the default policy.
fn valid_tuples(len: usize, groups: usize) -> Vec<Vec<usize>> {
    let policy = GapPolicy::default();
    let Some((lo, hi)) = policy.window(groups) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(len);
    fn rec(from: usize, hi: usize, step: usize, len: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for i in from..=hi {
            cur.push(i);
            rec(i + step, hi, step, len, cur, out);
            cur.pop();
        }
    }
    rec(lo, hi, policy.step(), len, &mut cur, &mut out);
    out
}

struct Plan<'a> {
    cfg: &'a SynthConfig,
    fail: Vec<bool>,
    /// `carriers[p][student]`.
    carriers: Vec<Vec<bool>>,
    tuples: Vec<Vec<Vec<usize>>>,
}

impl Plan<'_> {
    fn n(&self) -> usize {
        self.fail.len()
    }

    /// Patterns of `kind` the student must not match.
    fn forbidden(&self, kind: SequenceKind, student: usize) -> Vec<&[i32]> {
        self.cfg
            .planted
            .iter()
            .enumerate()
            .filter(|(p, pp)| pp.pattern.kind() == kind && !self.carriers[*p][student])
            .map(|(_, pp)| pp.pattern.symbols())
            .collect()
    }

    fn violations(&self, kind: SequenceKind, student: usize, seq: &[i32]) -> usize {
        self.forbidden(kind, student)
            .iter()
            .filter(|p| crate::patmine::pattern::embeds(seq, p, GapPolicy::default()))
            .count()
    }

    /// Positions fixed by planting, per kind, per student.
    fn fix_positions(&self, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<Vec<Option<i32>>>>, Retry> {
        let g = self.cfg.groups;
        let mut fixed = vec![vec![vec![None; g]; self.n()]; 3];
        for (p, planted) in self.cfg.planted.iter().enumerate() {
            let slot = kind_slot(planted.pattern.kind());
            let symbols = planted.pattern.symbols();
            for s in 0..self.n() {
                if !self.carriers[p][s] {
                    continue;
                }
                let row = &mut fixed[slot][s];
                let compatible: Vec<&Vec<usize>> = self.tuples[p]
                    .iter()
                    .filter(|t| t.iter().zip(symbols).all(|(&i, &v)| row[i].is_none_or(|x| x == v)))
                    .collect();
                let Some(t) = compatible.choose(rng) else {
                    return Err(Retry);
                };
                for (&i, &v) in t.iter().zip(symbols) {
                    row[i] = Some(v);
                }
            }
        }
        Ok(fixed)
    }

    /// Times and plagiarism symbols: free positions drawn per student, redrawn
    /// while the student matches a pattern it must not carry.
    fn free_kind(
        &self,
        kind: SequenceKind,
        fixed: &[Vec<Option<i32>>],
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<Vec<i32>>, Retry> {
        let alphabet = kind.alphabet();
        let weights: &[f64] = match kind {
            SequenceKind::Plagiarism => &[0.6, 0.25, 0.15],
            _ => &[1.0; 5][..alphabet.len()],
        };
        let dist = WeightedIndex::new(weights).expect("static weights");
        let mut out = Vec::with_capacity(self.n());
        for (s, row) in fixed.iter().enumerate() {
            let mut seq = vec![0; row.len()];
            let mut ok = false;
            for _ in 0..MAX_REDRAWS {
                for (v, f) in seq.iter_mut().zip(row) {
                    *v = f.unwrap_or_else(|| alphabet[dist.sample(rng)]);
                }
                if self.violations(kind, s, &seq) == 0 {
                    ok = true;
                    break;
                }
            }
            if !ok {
                return Err(Retry);
            }
            out.push(seq);
        }
        Ok(out)
    }

    /// Order symbols: each group has exactly `capacity[s]` students per symbol
    /// (ranks form a permutation), so free slots are dealt from that multiset
    /// and forbidden matches are removed by swapping symbols within a group.
    fn order_kind(
        &self,
        fixed: &[Vec<Option<i32>>],
        capacity: [usize; 3],
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<Vec<i32>>, Retry> {
        let n = self.n();
        let g = self.cfg.groups;
        let mut seq = vec![vec![0; g]; n];
        for j in 0..g {
            let mut left = capacity;
            for (s, row) in fixed.iter().enumerate() {
                if let Some(v) = row[j] {
                    let k = (v - 1) as usize;
                    if left[k] == 0 {
                        return Err(Retry);
                    }
                    left[k] -= 1;
                    seq[s][j] = v;
                }
            }
            let mut pool: Vec<i32> = (0..3)
                .flat_map(|k| std::iter::repeat_n(k as i32 + 1, left[k]))
                .collect();
            pool.shuffle(rng);
            let mut pool = pool.into_iter();
            for (s, row) in fixed.iter().enumerate() {
                if row[j].is_none() {
                    seq[s][j] = pool.next().expect("capacity covers every student");
                }
            }
        }

        let kind = SequenceKind::Order;
        let mut viol: Vec<usize> = (0..n).map(|s| self.violations(kind, s, &seq[s])).collect();
        for _ in 0..MAX_SWAPS {
            let bad: Vec<usize> = (0..n).filter(|&s| viol[s] > 0).collect();
            let Some(&a) = bad.choose(rng) else {
                return Ok(seq);
            };
            let free: Vec<usize> = (0..g).filter(|&j| fixed[a][j].is_none()).collect();
            let Some(&j) = free.choose(rng) else {
                return Err(Retry);
            };
            let partners: Vec<usize> = (0..n)
                .filter(|&b| b != a && fixed[b][j].is_none() && seq[b][j] != seq[a][j])
                .collect();
            let Some(&b) = partners.choose(rng) else {
                continue;
            };
            let (ta, tb) = (seq[a][j], seq[b][j]);
            seq[a][j] = tb;
            seq[b][j] = ta;
            let (va, vb) = (self.violations(kind, a, &seq[a]), self.violations(kind, b, &seq[b]));
            if va + vb <= viol[a] + viol[b] {
                viol[a] = va;
                viol[b] = vb;
            } else {
                seq[a][j] = ta;
                seq[b][j] = tb;
            }
        }
        Err(Retry)
    }
}

/// Inclusive bounds on a per-group submission total for a times symbol,
/// kept strictly inside each difference-rate bucket.
fn total_bounds(symbol: i32, mean: u32, assignments: u32) -> (u32, u32) {
    let half = mean / 2;
    match symbol {
        -2 => (assignments.max(3), half - 1),
        -1 => (half + 1, mean - 1),
        0 => (mean, mean),
        1 => (mean + 1, mean + half - 1),
        _ => (mean + half + 1, 4 * mean),
    }
}

/// Per-student totals for one group: within each symbol's bounds and
/// averaging exactly `mean`.
fn balance_totals(symbols: &[i32], mean: u32, assignments: u32, rng: &mut ChaCha8Rng) -> Result<Vec<u32>, Retry> {
    let bounds: Vec<(u32, u32)> = symbols.iter().map(|&s| total_bounds(s, mean, assignments)).collect();
    let mut totals: Vec<u32> = bounds.iter().map(|&(lo, hi)| rng.random_range(lo..=hi)).collect();
    let target = i64::from(mean) * symbols.len() as i64;
    let mut gap = target - totals.iter().map(|&t| i64::from(t)).sum::<i64>();
    let mut order: Vec<usize> = (0..symbols.len()).collect();
    order.shuffle(rng);
    for &i in &order {
        if gap == 0 {
            break;
        }
        let (lo, hi) = bounds[i];
        let t = i64::from(totals[i]);
        let moved = if gap > 0 {
            gap.min(i64::from(hi) - t)
        } else {
            gap.max(i64::from(lo) - t)
        };
        totals[i] = (t + moved) as u32;
        gap -= moved;
    }
    if gap == 0 {
        Ok(totals)
    } else {
        Err(Retry)
    }
}

fn diagnostic_for(category: usize, tax: &DiagnosticTaxonomy, line: u32) -> Result<String> {
    let text = if category <= tax.rules().len() {
        let rule = &tax.rules()[category - 1];
        let kw = rule.keyword_text().ok_or_else(|| {
            Error::Synth(format!("category `{}` is regex-based; cannot synthesize", rule.name()))
        })?;
        format!("main.c:{line}:5: error: {kw}")
    } else {
        format!("main.c:{line}:1: error: expected ';' before '}}' token")
    };
    if tax.classify_index(&text) != category {
        return Err(Error::Synth(format!("synthesized diagnostic `{text}` misclassifies")));
    }
    Ok(text)
}

fn course_start() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2019, 3, 4, 0, 0, 0).unwrap()
}

pub fn assignment_id(group: usize, k: usize) -> String {
    format!("g{group:02}a{k}")
}

pub fn gen_cohort(cfg: &SynthConfig) -> Result<SynthCohort> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.n_students;
    let g = cfg.groups;
    let width = n.to_string().len().max(3);
    let ids: Vec<String> = (1..=n).map(|i| format!("s{i:0width$}")).collect();

    let n_fail = ((n as f64) * cfg.fail_fraction).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut fail = vec![false; n];
    order[..n_fail].iter().for_each(|&i| fail[i] = true);
    let flipped: Vec<bool> = (0..n).map(|_| rng.random_bool(cfg.label_noise)).collect();
    let observed_fail: Vec<bool> = (0..n).map(|i| fail[i] != flipped[i]).collect();
    let outcomes: BTreeMap<String, f64> = (0..n)
        .map(|i| {
            let tenths = if observed_fail[i] {
                rng.random_range(0..600)
            } else {
                rng.random_range(600..=1000)
            };
            (ids[i].clone(), f64::from(tenths) / 10.0)
        })
        .collect();

    let carriers: Vec<Vec<bool>> = cfg
        .planted
        .iter()
        .map(|p| {
            (0..n)
                .map(|i| rng.random_bool(if fail[i] { p.fail_rate } else { p.pass_rate }))
                .collect()
        })
        .collect();
    let plan = Plan {
        cfg,
        tuples: cfg.planted.iter().map(|p| valid_tuples(p.pattern.len(), g)).collect(),
        fail,
        carriers,
    };

    let thresholds = cfg.thresholds();
    let c1 = (thresholds.low.floor() as usize).min(n);
    let c12 = (thresholds.high.floor() as usize).min(n);
    let capacity = [c1, c12 - c1, n - c12];
    let assignments = cfg.assignments_per_group as u32;

    let mut realized = None;
    for _ in 0..MAX_ATTEMPTS {
        let attempt = (|| -> Result<_, Retry> {
            let fixed = plan.fix_positions(&mut rng)?;
            let times = plan.free_kind(SequenceKind::Times, &fixed[0], &mut rng)?;
            let order = plan.order_kind(&fixed[1], capacity, &mut rng)?;
            let plag = plan.free_kind(SequenceKind::Plagiarism, &fixed[2], &mut rng)?;
            let mut totals = vec![vec![0u32; g]; n];
            for j in 0..g {
                let column: Vec<i32> = times.iter().map(|row| row[j]).collect();
                let t = balance_totals(&column, cfg.mean_group_submissions, assignments, &mut rng)?;
                for (row, v) in totals.iter_mut().zip(t) {
                    row[j] = v;
                }
            }
            Ok((times, order, plag, totals))
        })();
        if let Ok(r) = attempt {
            realized = Some(r);
            break;
        }
    }
    let (times, order_syms, plag, totals) = realized.ok_or_else(|| {
        Error::Synth(format!(
            "could not realize the planted patterns in {MAX_ATTEMPTS} attempts; \
             lower carrier rates or lengthen the sequences"
        ))
    })?;

    let taxonomy = default_taxonomy();
    let dims = taxonomy.dimension();
    let names = taxonomy.feature_names();
    let class_weights = |pick_fail: bool| -> Vec<f64> {
        let mut w = vec![0.0; dims];
        if cfg.compile_signal.is_empty() {
            w[0] = 1.0;
        }
        for c in &cfg.compile_signal {
            let idx = names.iter().position(|n| *n == c.category).expect("validated");
            w[idx] = if pick_fail { c.fail_rate } else { c.pass_rate };
        }
        w
    };
    let fail_dist = WeightedIndex::new(class_weights(true)).expect("validated rates");
    let pass_dist = WeightedIndex::new(class_weights(false)).expect("validated rates");

    // Ranks per group: symbol-1 students first, then 2, then 3.
    let mut ranks = vec![vec![0u32; g]; n];
    for j in 0..g {
        let mut slots: Vec<usize> = (0..n).collect();
        slots.shuffle(&mut rng);
        slots.sort_by_key(|&s| order_syms[s][j]);
        for (r, &s) in slots.iter().enumerate() {
            ranks[s][j] = r as u32 + 1;
        }
    }

    let mut submissions = Vec::new();
    let start = course_start();
    for s in 0..n {
        let dist = if plan.fail[s] { &fail_dist } else { &pass_dist };
        for j in 0..g {
            let total = totals[s][j] as usize;
            let mut per_assignment = vec![1usize; cfg.assignments_per_group];
            for _ in cfg.assignments_per_group..total {
                per_assignment[rng.random_range(0..cfg.assignments_per_group)] += 1;
            }
            let flags = match plag[s][j] {
                0 => 0,
                1 => rng.random_range(1..=2),
                _ => rng.random_range(3..=total.min(5)),
            };
            let flagged: HashSet<usize> = sample(&mut rng, total, flags).into_iter().collect();
            let mut nth = 0;
            for (k, &count) in per_assignment.iter().enumerate() {
                let first = start
                    + Duration::days(7 * j as i64 + k as i64)
                    + Duration::minutes(i64::from(ranks[s][j]));
                for m in 0..count {
                    let category = dist.sample(&mut rng);
                    let (status, text) = if category == 0 {
                        (CompileStatus::Ok, String::new())
                    } else {
                        (CompileStatus::Error, diagnostic_for(category, &taxonomy, 3 + m as u32)?)
                    };
                    submissions.push(SubmissionRecord {
                        student_id: ids[s].clone(),
                        assignment_id: assignment_id(j + 1, k + 1),
                        timestamp: first + Duration::minutes(7 * m as i64),
                        submission_order: ranks[s][j],
                        plagiarism_flag: flagged.contains(&nth),
                        compile_status: status,
                        diagnostic_text: text,
                    });
                    nth += 1;
                }
            }
        }
    }

    let grouping = Grouping::new(
        (1..=g)
            .flat_map(|j| (1..=cfg.assignments_per_group).map(move |k| (assignment_id(j, k), j)))
            .collect(),
    )?;
    let cohort = assemble_cohort(submissions, outcomes, grouping)?;
    let sequences = build_sequences(&cohort, &thresholds)?;
    for (s, st) in sequences.students().iter().enumerate() {
        if st.times.symbols() != times[s].as_slice()
            || st.order.symbols() != order_syms[s].as_slice()
            || st.plagiarism.symbols() != plag[s].as_slice()
        {
            return Err(Error::Synth(format!(
                "student {}: realized sequences differ from targets",
                st.student_id
            )));
        }
    }

    let planted = cfg
        .planted
        .iter()
        .enumerate()
        .map(|(p, pp)| {
            let carriers = &plan.carriers[p];
            let pick = |latent_fail: bool| -> Vec<String> {
                (0..n)
                    .filter(|&i| carriers[i] && plan.fail[i] == latent_fail)
                    .map(|i| ids[i].clone())
                    .collect()
            };
            let fail_matches = (0..n).filter(|&i| carriers[i] && observed_fail[i]).count();
            let pass_matches = (0..n).filter(|&i| carriers[i] && !observed_fail[i]).count();
            let fail_total = observed_fail.iter().filter(|&&f| f).count();
            PlantedTruth {
                kind: pp.pattern.kind(),
                pattern: pp.pattern.to_string(),
                fail_rate: pp.fail_rate,
                pass_rate: pp.pass_rate,
                fail_carriers: pick(true),
                pass_carriers: pick(false),
                expected_fail_matches: fail_matches,
                expected_pass_matches: pass_matches,
                expected_accuracy: (fail_matches + pass_matches > 0)
                    .then(|| fail_matches as f64 / (fail_matches + pass_matches) as f64),
                expected_recall: if fail_total == 0 {
                    0.0
                } else {
                    fail_matches as f64 / fail_total as f64
                },
            }
        })
        .collect();

    let manifest = Manifest {
        seed: cfg.seed,
        n_students: n,
        groups: g,
        fail_fraction: cfg.fail_fraction,
        label_noise: cfg.label_noise,
        assignments_per_group: cfg.assignments_per_group,
        mean_group_submissions: cfg.mean_group_submissions,
        order_thresholds: thresholds,
        compile_signal: cfg.compile_signal.clone(),
        flipped_labels: (0..n).filter(|&i| flipped[i]).map(|i| ids[i].clone()).collect(),
        planted,
    };

    Ok(SynthCohort {
        cohort,
        sequences,
        manifest,
        thresholds,
        taxonomy,
    })
}

impl SynthCohort {
    /// Labels by student id, as observed in the outcomes.
    pub fn labels(&self) -> BTreeMap<String, Outcome> {
        self.cohort
            .students()
            .iter()
            .map(|s| (s.clone(), self.cohort.label(s).expect("labelled")))
            .collect()
    }

    /// Writes `submissions.csv`, `outcomes.csv`, `grouping.csv`,
    /// `taxonomy.cfg` and `manifest.json` into `dir`.
    pub fn write_files(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        csvio::save_submissions(&dir.join("submissions.csv"), self.cohort.submissions())?;
        csvio::save_outcomes(&dir.join("outcomes.csv"), self.cohort.outcomes())?;
        csvio::save_grouping(&dir.join("grouping.csv"), self.cohort.grouping())?;
        self.taxonomy.save(&dir.join("taxonomy.cfg"))?;
        let path = dir.join("manifest.json");
        let mut json = serde_json::to_string_pretty(&self.manifest)?;
        json.push('\n');
        fs::write(&path, json).map_err(|e| Error::io(path, e))
    }
}
