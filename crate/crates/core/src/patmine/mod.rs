//! Gap-wildcard sequential patterns: grammar, matching, and level-wise mining
//! of failure-predictive patterns.

mod mine;
pub(crate) mod pattern;

pub use mine::{
    canonical_order, mine, pattern_stats, write_patterns_csv, MinedPattern, MiningConfig,
    PatternStats,
};
pub use pattern::{
    format_pattern, matches, parse_pattern, BoundaryGap, GapPolicy, InteriorGap, Pattern,
};
