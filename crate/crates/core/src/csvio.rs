//! Readers and writers for `submissions.csv`, `outcomes.csv`, `grouping.csv`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};

use crate::cohort::{Grouping, SubmissionRecord};
use crate::error::{Error, Result};

pub const SUBMISSIONS_HEADER: [&str; 7] = [
    "student_id",
    "assignment_id",
    "timestamp",
    "submission_order",
    "plagiarism_flag",
    "compile_status",
    "diagnostic_text",
];
pub const OUTCOMES_HEADER: [&str; 2] = ["student_id", "final_score"];
pub const GROUPING_HEADER: [&str; 2] = ["assignment_id", "group_index"];

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::io(path, e))
}

fn file_name(path: &Path) -> String {
    path.display().to_string()
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(input)
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, file: &str, expected: &[&str]) -> Result<()> {
    let found = rdr.headers().map_err(|e| Error::csv(file, e))?;
    if found.iter().ne(expected.iter().copied()) {
        return Err(Error::Header {
            file: file.to_string(),
            expected: expected.join(","),
            found: found.iter().collect::<Vec<_>>().join(","),
        });
    }
    Ok(())
}

fn row_err(file: &str, line: u64, field: &'static str, message: impl Into<String>) -> Error {
    Error::Row {
        file: file.to_string(),
        line,
        field,
        message: message.into(),
    }
}

fn non_empty<'a>(file: &str, line: u64, field: &'static str, v: &'a str) -> Result<&'a str> {
    if v.is_empty() {
        Err(row_err(file, line, field, "must not be empty"))
    } else {
        Ok(v)
    }
}

pub fn read_submissions<R: Read>(input: R, file: &str) -> Result<Vec<SubmissionRecord>> {
    let mut rdr = reader(input);
    check_header(&mut rdr, file, &SUBMISSIONS_HEADER)?;
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::csv(file, e))?;
        let line = row.position().map_or(0, |p| p.line());
        let student_id = non_empty(file, line, "student_id", &row[0])?.to_string();
        let assignment_id = non_empty(file, line, "assignment_id", &row[1])?.to_string();
        let timestamp = DateTime::parse_from_rfc3339(&row[2])
            .map_err(|e| row_err(file, line, "timestamp", format!("`{}`: {e}", &row[2])))?
            .with_timezone(&Utc);
        let submission_order: u32 = row[3]
            .parse()
            .map_err(|_| row_err(file, line, "submission_order", format!("`{}` is not an integer", &row[3])))?;
        let plagiarism_flag = match &row[4] {
            "0" => false,
            "1" => true,
            other => {
                return Err(row_err(file, line, "plagiarism_flag", format!("`{other}` is not 0 or 1")))
            }
        };
        let compile_status = row[5]
            .parse()
            .map_err(|e: String| row_err(file, line, "compile_status", e))?;
        let rec = SubmissionRecord {
            student_id,
            assignment_id,
            timestamp,
            submission_order,
            plagiarism_flag,
            compile_status,
            diagnostic_text: row[6].to_string(),
        };
        rec.check().map_err(|(field, msg)| row_err(file, line, field, msg))?;
        out.push(rec);
    }
    Ok(out)
}

pub fn load_submissions(path: &Path) -> Result<Vec<SubmissionRecord>> {
    read_submissions(open(path)?, &file_name(path))
}

pub fn write_submissions<W: Write>(out: W, records: &[SubmissionRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let ctx = "submissions";
    w.write_record(SUBMISSIONS_HEADER).map_err(|e| Error::csv(ctx, e))?;
    for r in records {
        let order = r.submission_order.to_string();
        w.write_record([
            r.student_id.as_str(),
            r.assignment_id.as_str(),
            &r.timestamp.to_rfc3339_opts(SecondsFormat::AutoSi, true),
            &order,
            if r.plagiarism_flag { "1" } else { "0" },
            r.compile_status.as_str(),
            r.diagnostic_text.as_str(),
        ])
        .map_err(|e| Error::csv(ctx, e))?;
    }
    w.flush().map_err(|e| Error::io(ctx, e))
}

pub fn save_submissions(path: &Path, records: &[SubmissionRecord]) -> Result<()> {
    write_submissions(create(path)?, records)
}

pub fn read_outcomes<R: Read>(input: R, file: &str) -> Result<BTreeMap<String, f64>> {
    let mut rdr = reader(input);
    check_header(&mut rdr, file, &OUTCOMES_HEADER)?;
    let mut out = BTreeMap::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::csv(file, e))?;
        let line = row.position().map_or(0, |p| p.line());
        let id = non_empty(file, line, "student_id", &row[0])?;
        let score: f64 = row[1]
            .parse()
            .map_err(|_| row_err(file, line, "final_score", format!("`{}` is not a number", &row[1])))?;
        if !(0.0..=100.0).contains(&score) {
            return Err(row_err(file, line, "final_score", format!("{score} outside [0, 100]")));
        }
        if out.insert(id.to_string(), score).is_some() {
            return Err(row_err(file, line, "student_id", format!("duplicate student `{id}`")));
        }
    }
    Ok(out)
}

pub fn load_outcomes(path: &Path) -> Result<BTreeMap<String, f64>> {
    read_outcomes(open(path)?, &file_name(path))
}

pub fn write_outcomes<W: Write>(out: W, outcomes: &BTreeMap<String, f64>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let ctx = "outcomes";
    w.write_record(OUTCOMES_HEADER).map_err(|e| Error::csv(ctx, e))?;
    for (id, score) in outcomes {
        w.write_record([id.as_str(), &score.to_string()])
            .map_err(|e| Error::csv(ctx, e))?;
    }
    w.flush().map_err(|e| Error::io(ctx, e))
}

pub fn save_outcomes(path: &Path, outcomes: &BTreeMap<String, f64>) -> Result<()> {
    write_outcomes(create(path)?, outcomes)
}

pub fn read_grouping<R: Read>(input: R, file: &str) -> Result<Grouping> {
    let mut rdr = reader(input);
    check_header(&mut rdr, file, &GROUPING_HEADER)?;
    let mut map = BTreeMap::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::csv(file, e))?;
        let line = row.position().map_or(0, |p| p.line());
        let id = non_empty(file, line, "assignment_id", &row[0])?;
        let group: usize = row[1]
            .parse()
            .map_err(|_| row_err(file, line, "group_index", format!("`{}` is not a positive integer", &row[1])))?;
        if map.insert(id.to_string(), group).is_some() {
            return Err(row_err(file, line, "assignment_id", format!("duplicate assignment `{id}`")));
        }
    }
    Grouping::new(map)
}

pub fn load_grouping(path: &Path) -> Result<Grouping> {
    read_grouping(open(path)?, &file_name(path))
}

pub fn write_grouping<W: Write>(out: W, grouping: &Grouping) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let ctx = "grouping";
    w.write_record(GROUPING_HEADER).map_err(|e| Error::csv(ctx, e))?;
    for (a, g) in grouping.iter() {
        w.write_record([a, &g.to_string()]).map_err(|e| Error::csv(ctx, e))?;
    }
    w.flush().map_err(|e| Error::io(ctx, e))
}

pub fn save_grouping(path: &Path, grouping: &Grouping) -> Result<()> {
    write_grouping(create(path)?, grouping)
}
