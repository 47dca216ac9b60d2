use std::fmt;

use serde::{Deserialize, Serialize};

use crate::discretize::{FeatureSequence, SequenceKind};
use crate::error::{Error, Result};

const WILDCARD: &str = "(*)";

/// How many arbitrary elements a `(*)` between two symbols stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteriorGap {
    #[default]
    OneOrMore,
    ZeroOrMore,
}

/// Whether the leading/trailing `(*)` must cover at least one element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryGap {
    #[default]
    Required,
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct GapPolicy {
    pub interior: InteriorGap,
    pub boundary: BoundaryGap,
}

impl GapPolicy {
    /// Minimum index distance between consecutive matched symbols.
    pub fn step(&self) -> usize {
        match self.interior {
            InteriorGap::OneOrMore => 2,
            InteriorGap::ZeroOrMore => 1,
        }
    }

    /// Inclusive 0-based index window matched symbols may occupy in a
    /// sequence of length `len`, or `None` when the window is empty.
    pub fn window(&self, len: usize) -> Option<(usize, usize)> {
        let (lo, hi) = match self.boundary {
            BoundaryGap::Required => (1, len.checked_sub(2)?),
            BoundaryGap::Free => (0, len.checked_sub(1)?),
        };
        (lo <= hi).then_some((lo, hi))
    }

    /// Longest pattern that can embed in a sequence of length `len`.
    pub fn max_embeddable(&self, len: usize) -> usize {
        match self.window(len) {
            Some((lo, hi)) => 1 + (hi - lo) / self.step(),
            None => 0,
        }
    }
}

/// A gap-wildcard sequential pattern such as `(*)2(*)2(*)-2(*)-2(*)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern {
    kind: SequenceKind,
    symbols: Vec<i32>,
}

impl Pattern {
    pub fn new(kind: SequenceKind, symbols: Vec<i32>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::Pattern("pattern must have at least one symbol".into()));
        }
        if let Some(bad) = symbols.iter().find(|&&s| !kind.contains(s)) {
            return Err(Error::Pattern(format!(
                "symbol {bad} is outside the {kind} alphabet"
            )));
        }
        Ok(Pattern { kind, symbols })
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
        false
    }

    /// The pattern with `symbol` appended.
    pub fn extended(&self, symbol: i32) -> Result<Self> {
        let mut symbols = self.symbols.clone();
        symbols.push(symbol);
        Pattern::new(self.kind, symbols)
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(WILDCARD)?;
        for s in &self.symbols {
            write!(f, "{s}{WILDCARD}")?;
        }
        Ok(())
    }
}

/// Canonical text form: wildcards around and between symbols, no spaces.
pub fn format_pattern(p: &Pattern) -> String {
    p.to_string()
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl Cursor<'_> {
    fn skip_ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn at_end(&self) -> bool {
        self.pos == self.text.len()
    }

    fn eat_wildcard(&mut self) -> bool {
        if self.text[self.pos..].starts_with(WILDCARD) {
            self.pos += WILDCARD.len();
            true
        } else {
            false
        }
    }

    fn symbol(&mut self) -> Option<(usize, &str)> {
        let start = self.pos;
        let bytes = self.text.as_bytes();
        let mut end = start;
        if end < bytes.len() && bytes[end] == b'-' {
            end += 1;
        }
        let digits = end;
        while end < bytes.len() && bytes[end].is_ascii_digit() {
            end += 1;
        }
        if end == digits {
            return None;
        }
        self.pos = end;
        Some((start, &self.text[start..end]))
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::PatternParse {
            position: self.pos,
            message: message.into(),
        }
    }
}

/// Parses the table notation, tolerating whitespace between tokens.
pub fn parse_pattern(text: &str, kind: SequenceKind) -> Result<Pattern> {
    let mut cur = Cursor { text, pos: 0 };
    cur.skip_ws();
    if !cur.eat_wildcard() {
        return Err(cur.err("expected leading `(*)`"));
    }
    let mut symbols = Vec::new();
    loop {
        cur.skip_ws();
        if cur.at_end() {
            break;
        }
        let Some((at, tok)) = cur.symbol() else {
            return Err(cur.err("expected an integer symbol"));
        };
        let value: i32 = tok.parse().map_err(|_| Error::PatternParse {
            position: at,
            message: format!("`{tok}` is not a valid symbol"),
        })?;
        if !kind.contains(value) {
            return Err(Error::PatternParse {
                position: at,
                message: format!("symbol {value} is outside the {kind} alphabet"),
            });
        }
        symbols.push(value);
        cur.skip_ws();
        if !cur.eat_wildcard() {
            return Err(cur.err(if cur.at_end() {
                "expected trailing `(*)`"
            } else {
                "expected `(*)` between symbols"
            }));
        }
    }
    if symbols.is_empty() {
        return Err(cur.err("pattern has no symbols"));
    }
    Pattern::new(kind, symbols)
}

/// Greedy leftmost embedding. Earliest placement of each symbol leaves the
/// most room for the rest, so it finds an embedding whenever one exists.
pub fn matches(seq: &FeatureSequence, p: &Pattern, policy: GapPolicy) -> Result<bool> {
    if seq.kind() != p.kind() {
        return Err(Error::KindMismatch {
            expected: p.kind().to_string(),
            found: seq.kind().to_string(),
        });
    }
    Ok(embeds(seq.symbols(), p.symbols(), policy))
}

pub(crate) fn embeds(seq: &[i32], pattern: &[i32], policy: GapPolicy) -> bool {
    let Some((lo, hi)) = policy.window(seq.len()) else {
        return false;
    };
    let mut from = lo;
    for &sym in pattern {
        match next_at(seq, sym, from, hi) {
            Some(i) => from = i + policy.step(),
            None => return false,
        }
    }
    true
}

/// First index in `from..=hi` holding `sym`.
pub(crate) fn next_at(seq: &[i32], sym: i32, from: usize, hi: usize) -> Option<usize> {
    if from > hi {
        return None;
    }
    seq[from..=hi].iter().position(|&v| v == sym).map(|i| i + from)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn times(v: &[i32]) -> FeatureSequence {
        FeatureSequence::new(SequenceKind::Times, v.to_vec()).unwrap()
    }

    #[test]
    fn parse_table_forms() {
        let p = parse_pattern("(*)2(*)2(*)-2(*)-2(*)", SequenceKind::Times).unwrap();
        assert_eq!(p.symbols(), &[2, 2, -2, -2]);
        let q = parse_pattern("(*) 2 (*)", SequenceKind::Plagiarism).unwrap();
        assert_eq!(q.symbols(), &[2]);
        assert_eq!(format_pattern(&q), "(*)2(*)");
    }

    #[test]
    fn parse_errors_carry_position() {
        let e = parse_pattern("2(*)2", SequenceKind::Times).unwrap_err();
        assert!(matches!(e, Error::PatternParse { position: 0, .. }), "{e}");
        let e = parse_pattern("(*)2 2(*)", SequenceKind::Times).unwrap_err();
        assert!(matches!(e, Error::PatternParse { position: 5, .. }), "{e}");
        let e = parse_pattern("(*)2(*)2", SequenceKind::Times).unwrap_err();
        assert!(matches!(e, Error::PatternParse { position: 8, .. }), "{e}");
        let e = parse_pattern("(*)4(*)", SequenceKind::Order).unwrap_err();
        assert!(matches!(e, Error::PatternParse { position: 3, .. }), "{e}");
        assert!(parse_pattern("(*)", SequenceKind::Order).is_err());
        assert!(parse_pattern("(*)(*)", SequenceKind::Order).is_err());
        assert!(parse_pattern("", SequenceKind::Order).is_err());
    }

    #[test]
    fn worked_example_matches() {
        let seq = times(&[-2, 2, 1, 1, 2, -2, -1, -1, -2, 1, -2, 1, 2, -1]);
        let p = Pattern::new(SequenceKind::Times, vec![2, 2, -2, -2]).unwrap();
        assert!(matches(&seq, &p, GapPolicy::default()).unwrap());
    }

    #[test]
    fn boundary_and_gap_rules() {
        let policy = GapPolicy::default();
        let p = Pattern::new(SequenceKind::Times, vec![2]).unwrap();
        // Only at the boundaries.
        assert!(!matches(&times(&[2, 0, 0, 2]), &p, policy).unwrap());
        assert!(matches(&times(&[0, 2, 0, 0]), &p, policy).unwrap());
        let free = GapPolicy {
            boundary: BoundaryGap::Free,
            ..policy
        };
        assert!(matches(&times(&[2, 0, 0, 0]), &p, free).unwrap());

        let pp = Pattern::new(SequenceKind::Times, vec![1, 1]).unwrap();
        // Adjacent 1s need zero_or_more.
        let adj = times(&[0, 1, 1, 0]);
        assert!(!matches(&adj, &pp, policy).unwrap());
        let zero = GapPolicy {
            interior: InteriorGap::ZeroOrMore,
            ..policy
        };
        assert!(matches(&adj, &pp, zero).unwrap());
    }

    #[test]
    fn too_long_never_matches() {
        let policy = GapPolicy::default();
        assert_eq!(policy.max_embeddable(14), 6);
        assert_eq!(policy.max_embeddable(4), 1);
        assert_eq!(policy.max_embeddable(2), 0);
        let seq = times(&[0; 14]);
        let p = Pattern::new(SequenceKind::Times, vec![0; 7]).unwrap();
        assert!(!matches(&seq, &p, policy).unwrap());
        let p6 = Pattern::new(SequenceKind::Times, vec![0; 6]).unwrap();
        assert!(matches(&seq, &p6, policy).unwrap());
    }

    #[test]
    fn kind_mismatch_is_error() {
        let seq = FeatureSequence::new(SequenceKind::Order, vec![1, 2, 3]).unwrap();
        let p = Pattern::new(SequenceKind::Plagiarism, vec![2]).unwrap();
        assert!(matches(&seq, &p, GapPolicy::default()).is_err());
    }

    #[test]
    fn empty_pattern_rejected() {
        assert!(Pattern::new(SequenceKind::Order, vec![]).is_err());
    }
}
