//! Standardized per-student behavior sequences: submission times, submission
//! order and plagiarism, one symbol per assignment group.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cohort::{Cohort, Outcome};
use crate::error::{Error, Result};

/// `|dr|` below this counts as exactly zero.
pub const ZERO_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SequenceKind {
    Times,
    Order,
    Plagiarism,
}

impl SequenceKind {
    pub const ALL: [SequenceKind; 3] = [
        SequenceKind::Times,
        SequenceKind::Order,
        SequenceKind::Plagiarism,
    ];

    pub fn alphabet(self) -> &'static [i32] {
        match self {
            SequenceKind::Times => &[-2, -1, 0, 1, 2],
            SequenceKind::Order => &[1, 2, 3],
            SequenceKind::Plagiarism => &[0, 1, 2],
        }
    }

    pub fn contains(self, symbol: i32) -> bool {
        self.alphabet().contains(&symbol)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SequenceKind::Times => "times",
            SequenceKind::Order => "order",
            SequenceKind::Plagiarism => "plagiarism",
        }
    }
}

impl fmt::Display for SequenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SequenceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "times" => Ok(SequenceKind::Times),
            "order" => Ok(SequenceKind::Order),
            "plagiarism" => Ok(SequenceKind::Plagiarism),
            other => Err(Error::Config(format!(
                "unknown sequence kind `{other}` (expected times|order|plagiarism)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FeatureSequence {
    kind: SequenceKind,
    symbols: Vec<i32>,
}

impl FeatureSequence {
    pub fn new(kind: SequenceKind, symbols: Vec<i32>) -> Result<Self> {
        if let Some(bad) = symbols.iter().find(|&&s| !kind.contains(s)) {
            return Err(Error::Pattern(format!(
                "symbol {bad} is outside the {kind} alphabet"
            )));
        }
        Ok(FeatureSequence { kind, symbols })
    }

    pub fn kind(&self) -> SequenceKind {
        self.kind
    }

    pub fn symbols(&self) -> &[i32] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Average-order cut points. `avg <= low` → 1, `avg <= high` → 2, else 3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderThresholds {
    pub low: f64,
    pub high: f64,
}

impl Default for OrderThresholds {
    fn default() -> Self {
        OrderThresholds {
            low: 500.0,
            high: 1000.0,
        }
    }
}

impl OrderThresholds {
    pub fn validate(&self) -> Result<()> {
        if !(self.low.is_finite() && self.high.is_finite() && 0.0 <= self.low && self.low < self.high)
        {
            return Err(Error::Config(format!(
                "order thresholds must satisfy 0 <= low < high (got {}, {})",
                self.low, self.high
            )));
        }
        Ok(())
    }
}

/// Relative deviation of a student's mean submission count from the cohort mean.
pub fn difference_rate(x_ij: f64, x_j: f64) -> Result<f64> {
    if x_j <= 0.0 {
        return Err(Error::Config(format!(
            "difference rate needs a positive cohort mean, got {x_j}"
        )));
    }
    Ok((x_ij - x_j) / x_j)
}

pub fn discretize_times(dr: f64) -> i32 {
    if dr.abs() < ZERO_TOLERANCE {
        0
    } else if dr <= -0.5 {
        -2
    } else if dr < 0.0 {
        -1
    } else if dr < 0.5 {
        1
    } else {
        2
    }
}

pub fn discretize_order(avg_order: f64, thresholds: &OrderThresholds) -> i32 {
    if avg_order <= thresholds.low {
        1
    } else if avg_order <= thresholds.high {
        2
    } else {
        3
    }
}

pub fn discretize_plagiarism(count: u32) -> i32 {
    match count {
        0 => 0,
        1 | 2 => 1,
        _ => 2,
    }
}

/// Raw per-(student, group) quantities the symbols are derived from.
/// Indexed `[student][group]` with groups 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupAggregates {
    pub students: Vec<String>,
    pub mean_submission_count: Vec<Vec<f64>>,
    pub mean_submission_order: Vec<Vec<f64>>,
    pub plagiarism_sum: Vec<Vec<u32>>,
    /// Raw submission counts summed over each group's assignments.
    pub submission_total: Vec<Vec<u64>>,
    /// Cohort mean of `mean_submission_count` per group.
    pub cohort_mean_count: Vec<f64>,
}

impl GroupAggregates {
    pub fn compute(cohort: &Cohort) -> Self {
        let groups = cohort.grouping().groups();
        let students = cohort.students().to_vec();
        let cohort_size = students.len() as f64;
        let index: HashMap<&str, usize> = students
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();

        let assignments: Vec<Vec<&str>> = (1..=groups)
            .map(|g| cohort.grouping().assignments_in(g))
            .collect();
        let assignment_slot: HashMap<&str, (usize, usize)> = assignments
            .iter()
            .enumerate()
            .flat_map(|(g, list)| list.iter().enumerate().map(move |(k, a)| (*a, (g, k))))
            .collect();

        // [student][group][assignment-in-group]
        let mut counts: Vec<Vec<Vec<u32>>> = students
            .iter()
            .map(|_| assignments.iter().map(|l| vec![0; l.len()]).collect())
            .collect();
        let mut orders: Vec<Vec<Vec<Option<u32>>>> = students
            .iter()
            .map(|_| assignments.iter().map(|l| vec![None; l.len()]).collect())
            .collect();
        let mut plagiarism_sum = vec![vec![0u32; groups]; students.len()];

        for rec in cohort.submissions() {
            let s = index[rec.student_id.as_str()];
            let (g, k) = assignment_slot[rec.assignment_id.as_str()];
            counts[s][g][k] += 1;
            orders[s][g][k] = Some(rec.submission_order);
            plagiarism_sum[s][g] += u32::from(rec.plagiarism_flag);
        }

        let submission_total: Vec<Vec<u64>> = counts
            .iter()
            .map(|per_group| {
                per_group
                    .iter()
                    .map(|c| c.iter().map(|&v| u64::from(v)).sum())
                    .collect()
            })
            .collect();
        let mean_submission_count: Vec<Vec<f64>> = counts
            .iter()
            .map(|per_group| {
                per_group
                    .iter()
                    .map(|c| c.iter().map(|&v| v as f64).sum::<f64>() / c.len() as f64)
                    .collect()
            })
            .collect();
        let mean_submission_order: Vec<Vec<f64>> = orders
            .iter()
            .map(|per_group| {
                per_group
                    .iter()
                    .map(|o| {
                        o.iter()
                            .map(|v| v.map_or(cohort_size, f64::from))
                            .sum::<f64>()
                            / o.len() as f64
                    })
                    .collect()
            })
            .collect();
        let cohort_mean_count = (0..groups)
            .map(|g| {
                if students.is_empty() {
                    0.0
                } else {
                    mean_submission_count.iter().map(|row| row[g]).sum::<f64>() / cohort_size
                }
            })
            .collect();

        GroupAggregates {
            students,
            mean_submission_count,
            mean_submission_order,
            plagiarism_sum,
            submission_total,
            cohort_mean_count,
        }
    }

    /// Difference rate of student `s` in 0-based group `g`. Since every
    /// student shares the group's assignment count, this equals
    /// (n·T_sg − ΣT_g) / ΣT_g over integer totals, which rounds once and so
    /// is exactly invariant under scaling every count.
    pub fn difference_rate(&self, s: usize, g: usize) -> Result<f64> {
        let sum: u64 = self.submission_total.iter().map(|row| row[g]).sum();
        if sum == 0 {
            return Err(Error::DegenerateGroup { group: g + 1 });
        }
        let n = self.students.len() as u64;
        let num = i128::from(n * self.submission_total[s][g]) - i128::from(sum);
        Ok(num as f64 / sum as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudentSequences {
    pub student_id: String,
    pub label: Outcome,
    pub times: FeatureSequence,
    pub order: FeatureSequence,
    pub plagiarism: FeatureSequence,
}

impl StudentSequences {
    pub fn get(&self, kind: SequenceKind) -> &FeatureSequence {
        match kind {
            SequenceKind::Times => &self.times,
            SequenceKind::Order => &self.order,
            SequenceKind::Plagiarism => &self.plagiarism,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSet {
    length: usize,
    students: Vec<StudentSequences>,
}

impl SequenceSet {
    pub fn new(length: usize, students: Vec<StudentSequences>) -> Result<Self> {
        for s in &students {
            for kind in SequenceKind::ALL {
                let seq = s.get(kind);
                if seq.len() != length || seq.kind() != kind {
                    return Err(Error::Cohort(format!(
                        "student {}: {kind} sequence must have length {length}",
                        s.student_id
                    )));
                }
            }
        }
        Ok(SequenceSet { length, students })
    }

    /// Sequence length G.
    pub fn length(&self) -> usize {
        self.length
    }

    pub fn students(&self) -> &[StudentSequences] {
        &self.students
    }

    /// Sequences of one kind for students with the given label, in student order.
    pub fn by_label(&self, kind: SequenceKind, label: Outcome) -> Vec<&FeatureSequence> {
        self.students
            .iter()
            .filter(|s| s.label == label)
            .map(|s| s.get(kind))
            .collect()
    }
}

pub fn build_sequences(cohort: &Cohort, thresholds: &OrderThresholds) -> Result<SequenceSet> {
    thresholds.validate()?;
    let agg = GroupAggregates::compute(cohort);
    let groups = cohort.grouping().groups();
    // With no submissions at all every student sits exactly at the (zero)
    // cohort mean; only a partially empty cohort makes a group degenerate.
    let inactive_cohort = cohort.submissions().is_empty();
    if !inactive_cohort {
        if let Some(g) = agg.cohort_mean_count.iter().position(|&m| m <= 0.0) {
            return Err(Error::DegenerateGroup { group: g + 1 });
        }
    }

    let mut students = Vec::with_capacity(agg.students.len());
    for (s, id) in agg.students.iter().enumerate() {
        let mut times = Vec::with_capacity(groups);
        let mut order = Vec::with_capacity(groups);
        let mut plagiarism = Vec::with_capacity(groups);
        for g in 0..groups {
            times.push(if inactive_cohort {
                0
            } else {
                discretize_times(agg.difference_rate(s, g)?)
            });
            order.push(discretize_order(agg.mean_submission_order[s][g], thresholds));
            plagiarism.push(discretize_plagiarism(agg.plagiarism_sum[s][g]));
        }
        students.push(StudentSequences {
            student_id: id.clone(),
            label: cohort.label(id).expect("every student has an outcome"),
            times: FeatureSequence::new(SequenceKind::Times, times)?,
            order: FeatureSequence::new(SequenceKind::Order, order)?,
            plagiarism: FeatureSequence::new(SequenceKind::Plagiarism, plagiarism)?,
        });
    }
    SequenceSet::new(groups, students)
}

/// Writes `student_id,kind,s1,...,sG`, one row per (student, kind).
pub fn write_sequences_csv<W: Write>(out: W, set: &SequenceSet) -> Result<()> {
    let ctx = "sequences";
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["student_id".to_string(), "kind".to_string()];
    header.extend((1..=set.length()).map(|i| format!("s{i}")));
    w.write_record(&header).map_err(|e| Error::csv(ctx, e))?;
    for s in set.students() {
        for kind in SequenceKind::ALL {
            let mut row = vec![s.student_id.clone(), kind.to_string()];
            row.extend(s.get(kind).symbols().iter().map(|v| v.to_string()));
            w.write_record(&row).map_err(|e| Error::csv(ctx, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(ctx, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn difference_rate_arithmetic() {
        assert_eq!(difference_rate(6.0, 4.0).unwrap(), 0.5);
        assert_eq!(difference_rate(4.0, 4.0).unwrap(), 0.0);
        assert_eq!(difference_rate(1.0, 4.0).unwrap(), -0.75);
        assert!(difference_rate(1.0, 0.0).is_err());
    }

    #[test]
    fn times_boundary_table() {
        let grid = [-0.51, -0.5, -0.49, -1e-12, 0.0, 1e-12, 0.49, 0.5, 0.51];
        let want = [-2, -2, -1, -1, 0, 1, 1, 2, 2];
        for (dr, w) in grid.iter().zip(want) {
            assert_eq!(discretize_times(*dr), w, "dr = {dr}");
        }
        assert_eq!(discretize_times(-0.6), -2);
    }

    #[test]
    fn order_boundaries() {
        let t = OrderThresholds::default();
        assert_eq!(discretize_order(0.0, &t), 1);
        assert_eq!(discretize_order(500.0, &t), 1);
        assert_eq!(discretize_order(500.5, &t), 2);
        assert_eq!(discretize_order(750.0, &t), 2);
        assert_eq!(discretize_order(1000.0, &t), 2);
        assert_eq!(discretize_order(1000.5, &t), 3);
        assert_eq!(discretize_order(1001.0, &t), 3);
    }

    #[test]
    fn plagiarism_buckets() {
        let want = [0, 1, 1, 2, 2, 2];
        for (c, w) in want.iter().enumerate() {
            assert_eq!(discretize_plagiarism(c as u32), *w);
        }
    }

    #[test]
    fn feature_sequence_rejects_foreign_symbols() {
        assert!(FeatureSequence::new(SequenceKind::Order, vec![1, 2, 0]).is_err());
        assert!(FeatureSequence::new(SequenceKind::Times, vec![-2, 2, 0]).is_ok());
    }

    #[test]
    fn bad_thresholds_rejected() {
        let t = OrderThresholds { low: 5.0, high: 5.0 };
        assert!(t.validate().is_err());
    }
}
