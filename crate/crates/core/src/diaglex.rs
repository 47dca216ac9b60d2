//! Compiler-diagnostic classification into an ordered keyword taxonomy and
//! per-student compile feature vectors.
//!
//! A taxonomy is a priority-ordered list of rules; the first rule whose
//! keyword (case-insensitive substring) or regex occurs in a diagnostic names
//! its category. Successful compiles count under `None` (index 0) and
//! unmatched errors fall through to `Other` (last index).

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::Path;

use regex::{Regex, RegexBuilder};

use crate::cohort::{Cohort, CompileStatus};
use crate::error::{Error, Result};

pub const NONE_CATEGORY: &str = "None";
pub const OTHER_CATEGORY: &str = "Other";
const REGEX_PREFIX: &str = "re:";

/// Error categories named in the course's feature table, with their keywords
/// and meanings, in table order.
const NAMED_CATEGORIES: [(&str, &str, &str); 9] = [
    ("Syntax error", "syntax error", "Illegal statement in code"),
    ("Redefinition of main", "redefinition of 'main'", "Main function repeatedly defined"),
    ("Undeclared", "undeclared", "The variable is not declared"),
    ("Invalid value", "invalid value", "Wrong data type or data size"),
    ("Stray", "stray", "Additional symbols appears"),
    ("Invalid operands", "invalid operands", "Invalid operands to binary"),
    ("Not a function", "not a function", "No correlation function defined"),
    ("Conflicting", "conflicting", "Inconsistent declaration of function"),
    ("Not use struct", "invalid use of 'struct'", "Invalid use of 'struct data'"),
];

/// Unnamed slots shipped so the default vector has 22 error categories.
const PLACEHOLDER_CATEGORIES: usize = 12;

/// Meaning of a named category, if it is one of the table's categories.
pub fn known_meaning(category: &str) -> Option<&'static str> {
    if category == NONE_CATEGORY {
        return Some("No errors at all");
    }
    NAMED_CATEGORIES
        .iter()
        .find(|(name, _, _)| *name == category)
        .map(|(_, _, meaning)| *meaning)
}

#[derive(Debug, Clone)]
enum Matcher {
    /// Lower-cased keyword.
    Keyword(String),
    Regex(Regex),
}

#[derive(Debug, Clone)]
pub struct Rule {
    name: String,
    /// Pattern text exactly as configured (`re:` prefix marks a regex).
    source: String,
    matcher: Matcher,
}

impl Rule {
    pub fn keyword(name: &str, keyword: &str) -> Result<Self> {
        Self::parse(name, keyword)
    }

    pub fn regex(name: &str, pattern: &str) -> Result<Self> {
        Self::parse(name, &format!("{REGEX_PREFIX}{pattern}"))
    }

    fn parse(name: &str, source: &str) -> Result<Self> {
        if name.is_empty() || name.contains(['\t', '\n']) {
            return Err(Error::Taxonomy(format!("invalid category name `{name}`")));
        }
        let matcher = match source.strip_prefix(REGEX_PREFIX) {
            Some(re) => Matcher::Regex(
                RegexBuilder::new(re)
                    .case_insensitive(true)
                    .build()
                    .map_err(|e| Error::Taxonomy(format!("category `{name}`: {e}")))?,
            ),
            None => {
                if source.is_empty() {
                    return Err(Error::Taxonomy(format!("category `{name}` has an empty keyword")));
                }
                Matcher::Keyword(source.to_lowercase())
            }
        };
        Ok(Rule {
            name: name.to_string(),
            source: source.to_string(),
            matcher,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Keyword text for keyword rules; `None` for regex rules.
    pub fn keyword_text(&self) -> Option<&str> {
        match self.matcher {
            Matcher::Keyword(_) => Some(&self.source),
            Matcher::Regex(_) => None,
        }
    }

    fn hits(&self, original: &str, lowered: &str) -> bool {
        match &self.matcher {
            Matcher::Keyword(k) => lowered.contains(k.as_str()),
            Matcher::Regex(re) => re.is_match(original),
        }
    }
}

impl PartialEq for Rule {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.source == other.source
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticTaxonomy {
    rules: Vec<Rule>,
}

impl DiagnosticTaxonomy {
    pub fn new(rules: Vec<Rule>) -> Result<Self> {
        let mut seen = HashSet::new();
        for r in &rules {
            if r.name == NONE_CATEGORY || r.name == OTHER_CATEGORY {
                return Err(Error::Taxonomy(format!("`{}` is a reserved category", r.name)));
            }
            if !seen.insert(r.name.as_str()) {
                return Err(Error::Taxonomy(format!("duplicate category `{}`", r.name)));
            }
        }
        Ok(DiagnosticTaxonomy { rules })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// Error categories: the rules in order, then `Other`.
    pub fn error_categories(&self) -> Vec<&str> {
        self.rules
            .iter()
            .map(|r| r.name.as_str())
            .chain(std::iter::once(OTHER_CATEGORY))
            .collect()
    }

    /// All feature names: `None`, the rules, `Other`.
    pub fn feature_names(&self) -> Vec<String> {
        std::iter::once(NONE_CATEGORY)
            .chain(self.error_categories())
            .map(str::to_string)
            .collect()
    }

    /// Length of a feature vector under this taxonomy.
    pub fn dimension(&self) -> usize {
        self.rules.len() + 2
    }

    /// Index in the feature vector of an error diagnostic.
    pub fn classify_index(&self, text: &str) -> usize {
        let lowered = text.to_lowercase();
        self.rules
            .iter()
            .position(|r| r.hits(text, &lowered))
            .map_or(self.rules.len() + 1, |i| i + 1)
    }

    pub fn parse_cfg(text: &str) -> Result<Self> {
        let mut rules = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.strip_suffix('\r').unwrap_or(line);
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let (name, source) = line.split_once('\t').ok_or_else(|| {
                Error::Taxonomy(format!("line {}: expected `name<TAB>keyword`", i + 1))
            })?;
            rules.push(
                Rule::parse(name, source)
                    .map_err(|e| Error::Taxonomy(format!("line {}: {e}", i + 1)))?,
            );
        }
        Self::new(rules)
    }

    pub fn to_cfg(&self) -> String {
        self.rules
            .iter()
            .map(|r| format!("{}\t{}\n", r.name, r.source))
            .collect()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_cfg(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_cfg()).map_err(|e| Error::io(path, e))
    }
}

/// The nine named categories in table order, twelve unlabeled placeholders
/// (keywords that never occur in real compiler output; replace them via a
/// taxonomy file), then the implicit `Other`: 22 error categories in all.
pub fn default_taxonomy() -> DiagnosticTaxonomy {
    let named = NAMED_CATEGORIES
        .iter()
        .map(|(name, kw, _)| Rule::keyword(name, kw).expect("static rule"));
    let placeholders = (1..=PLACEHOLDER_CATEGORIES).map(|i| {
        Rule::keyword(&format!("Unlabeled {i:02}"), &format!("[unlabeled-{i:02}]"))
            .expect("static rule")
    });
    DiagnosticTaxonomy::new(named.chain(placeholders).collect()).expect("static taxonomy")
}

pub fn classify_diagnostic<'t>(text: &str, tax: &'t DiagnosticTaxonomy) -> &'t str {
    let idx = tax.classify_index(text);
    if idx <= tax.rules.len() {
        &tax.rules[idx - 1].name
    } else {
        OTHER_CATEGORY
    }
}

/// Per-student counts: index 0 = successful compiles, then error categories.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompileFeatureVector {
    pub counts: Vec<u32>,
}

impl CompileFeatureVector {
    pub fn zeros(dimension: usize) -> Self {
        CompileFeatureVector {
            counts: vec![0; dimension],
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| u64::from(c)).sum()
    }
}

/// Feature vectors for every student in the cohort, keyed by student id.
pub fn extract_features(
    cohort: &Cohort,
    tax: &DiagnosticTaxonomy,
) -> BTreeMap<String, CompileFeatureVector> {
    let mut out: BTreeMap<String, CompileFeatureVector> = cohort
        .students()
        .iter()
        .map(|s| (s.clone(), CompileFeatureVector::zeros(tax.dimension())))
        .collect();
    // Repeated diagnostics are common; classify each distinct text once.
    let mut memo: HashMap<&str, usize> = HashMap::new();
    for rec in cohort.submissions() {
        let idx = match rec.compile_status {
            CompileStatus::Ok => 0,
            CompileStatus::Error => *memo
                .entry(rec.diagnostic_text.as_str())
                .or_insert_with(|| tax.classify_index(&rec.diagnostic_text)),
        };
        out.get_mut(&rec.student_id).expect("student in universe").counts[idx] += 1;
    }
    out
}

/// Snake-cased CSV column name for a category, e.g. `Syntax error` → `syntax_error`.
pub fn feature_column_name(category: &str) -> String {
    category
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
        .collect()
}

/// Writes `student_id,none,<cat1>,...` with snake-cased category columns.
pub fn write_features_csv<W: Write>(
    out: W,
    tax: &DiagnosticTaxonomy,
    features: &BTreeMap<String, CompileFeatureVector>,
) -> Result<()> {
    let ctx = "features";
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["student_id".to_string()];
    header.extend(tax.feature_names().iter().map(|n| feature_column_name(n)));
    w.write_record(&header).map_err(|e| Error::csv(ctx, e))?;
    for (id, v) in features {
        let mut row = vec![id.clone()];
        row.extend(v.counts.iter().map(|c| c.to_string()));
        w.write_record(&row).map_err(|e| Error::csv(ctx, e))?;
    }
    w.flush().map_err(|e| Error::io(ctx, e))
}
