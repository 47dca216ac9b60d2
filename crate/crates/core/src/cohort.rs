//! Canonical data model: submission events, outcomes, assignment grouping,
//! and the validated [`Cohort`] every later stage consumes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of assignment groups (sequence length).
pub const DEFAULT_GROUPS: usize = 14;

/// Scores strictly below this are a failing outcome.
pub const PASS_MARK: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompileStatus {
    Ok,
    Error,
}

impl CompileStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CompileStatus::Ok => "ok",
            CompileStatus::Error => "error",
        }
    }
}

impl std::str::FromStr for CompileStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ok" => Ok(CompileStatus::Ok),
            "error" => Ok(CompileStatus::Error),
            other => Err(format!("unknown compile status `{other}` (expected ok|error)")),
        }
    }
}

/// One submission event.
#[derive(Debug, Clone, PartialEq)]
pub struct SubmissionRecord {
    pub student_id: String,
    pub assignment_id: String,
    pub timestamp: DateTime<Utc>,
    /// Rank of this student's first submission to the assignment among all
    /// students' first submissions to it (1 = earliest).
    pub submission_order: u32,
    pub plagiarism_flag: bool,
    pub compile_status: CompileStatus,
    /// Compiler output; empty iff the compile succeeded.
    pub diagnostic_text: String,
}

impl SubmissionRecord {
    /// Checks the per-record invariants, returning the offending field name.
    pub fn check(&self) -> std::result::Result<(), (&'static str, String)> {
        if self.submission_order < 1 {
            return Err(("submission_order", "must be >= 1".into()));
        }
        match (self.compile_status, self.diagnostic_text.is_empty()) {
            (CompileStatus::Ok, false) => Err((
                "diagnostic_text",
                "must be empty when compile_status is ok".into(),
            )),
            (CompileStatus::Error, true) => Err((
                "diagnostic_text",
                "must be non-empty when compile_status is error".into(),
            )),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    Pass,
    Fail,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
        })
    }
}

/// Fail iff `score < 60`.
pub fn label_outcome(score: f64) -> Outcome {
    if score < PASS_MARK {
        Outcome::Fail
    } else {
        Outcome::Pass
    }
}

/// Assignment → group mapping. Group indices are 1-based and contiguous.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grouping {
    assignments: BTreeMap<String, usize>,
    groups: usize,
}

impl Grouping {
    pub fn new(assignments: BTreeMap<String, usize>) -> Result<Self> {
        let used: BTreeSet<usize> = assignments.values().copied().collect();
        if used.is_empty() {
            return Err(Error::Cohort("grouping is empty".into()));
        }
        if used.contains(&0) {
            return Err(Error::Cohort("group indices are 1-based; found 0".into()));
        }
        let groups = *used.iter().next_back().unwrap();
        if used.len() != groups {
            let missing: Vec<String> = (1..=groups)
                .filter(|g| !used.contains(g))
                .map(|g| g.to_string())
                .collect();
            return Err(Error::Cohort(format!(
                "group indices must form 1..{groups}; missing {}",
                missing.join(",")
            )));
        }
        Ok(Grouping {
            assignments,
            groups,
        })
    }

    /// Number of groups, i.e. the sequence length.
    pub fn groups(&self) -> usize {
        self.groups
    }

    pub fn group_of(&self, assignment_id: &str) -> Option<usize> {
        self.assignments.get(assignment_id).copied()
    }

    /// Assignments of a 1-based group, in lexicographic order.
    pub fn assignments_in(&self, group: usize) -> Vec<&str> {
        self.assignments
            .iter()
            .filter(|(_, &g)| g == group)
            .map(|(a, _)| a.as_str())
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.assignments.iter().map(|(a, &g)| (a.as_str(), g))
    }
}

/// All students' records, outcomes, and the grouping. Immutable once built.
#[derive(Debug, Clone)]
pub struct Cohort {
    submissions: Vec<SubmissionRecord>,
    outcomes: BTreeMap<String, f64>,
    grouping: Grouping,
    students: Vec<String>,
}

impl Cohort {
    pub fn submissions(&self) -> &[SubmissionRecord] {
        &self.submissions
    }

    pub fn outcomes(&self) -> &BTreeMap<String, f64> {
        &self.outcomes
    }

    pub fn grouping(&self) -> &Grouping {
        &self.grouping
    }

    /// Student universe in lexicographic order.
    pub fn students(&self) -> &[String] {
        &self.students
    }

    pub fn score(&self, student_id: &str) -> Option<f64> {
        self.outcomes.get(student_id).copied()
    }

    pub fn label(&self, student_id: &str) -> Option<Outcome> {
        self.score(student_id).map(label_outcome)
    }

    /// Submissions grouped by student, in universe order; students without
    /// activity get an empty slice.
    pub fn submissions_by_student(&self) -> Vec<(&str, Vec<&SubmissionRecord>)> {
        let mut by: BTreeMap<&str, Vec<&SubmissionRecord>> = self
            .students
            .iter()
            .map(|s| (s.as_str(), Vec::new()))
            .collect();
        for rec in &self.submissions {
            by.get_mut(rec.student_id.as_str())
                .expect("submitting students are in the universe")
                .push(rec);
        }
        by.into_iter().collect()
    }
}

/// Cross-validates the three inputs into a [`Cohort`].
pub fn assemble_cohort(
    submissions: Vec<SubmissionRecord>,
    outcomes: BTreeMap<String, f64>,
    grouping: Grouping,
) -> Result<Cohort> {
    for (i, rec) in submissions.iter().enumerate() {
        if let Err((field, msg)) = rec.check() {
            return Err(Error::Cohort(format!("submission #{}: {field} {msg}", i + 1)));
        }
    }
    for (id, &score) in &outcomes {
        if !(0.0..=100.0).contains(&score) {
            return Err(Error::Cohort(format!(
                "student {id}: score {score} outside [0, 100]"
            )));
        }
    }

    let mut missing_outcome = BTreeSet::new();
    let mut ungrouped = BTreeSet::new();
    let mut orders: BTreeMap<(&str, &str), u32> = BTreeMap::new();
    for rec in &submissions {
        if !outcomes.contains_key(&rec.student_id) {
            missing_outcome.insert(rec.student_id.as_str());
        }
        if grouping.group_of(&rec.assignment_id).is_none() {
            ungrouped.insert(rec.assignment_id.as_str());
        }
        let key = (rec.student_id.as_str(), rec.assignment_id.as_str());
        match orders.get(&key) {
            Some(&o) if o != rec.submission_order => {
                return Err(Error::Cohort(format!(
                    "student {} assignment {}: inconsistent submission_order ({} vs {})",
                    key.0, key.1, o, rec.submission_order
                )));
            }
            Some(_) => {}
            None => {
                orders.insert(key, rec.submission_order);
            }
        }
    }
    if !missing_outcome.is_empty() {
        return Err(Error::Cohort(format!(
            "students with submissions but no outcome: {}",
            missing_outcome.into_iter().collect::<Vec<_>>().join(", ")
        )));
    }
    if !ungrouped.is_empty() {
        return Err(Error::Cohort(format!(
            "assignments missing from grouping: {}",
            ungrouped.into_iter().collect::<Vec<_>>().join(", ")
        )));
    }

    // Outcomes already cover every submitting student.
    let students: Vec<String> = outcomes.keys().cloned().collect();

    Ok(Cohort {
        submissions,
        outcomes,
        grouping,
        students,
    })
}
