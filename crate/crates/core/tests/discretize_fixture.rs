use std::collections::BTreeMap;
use std::path::PathBuf;

use assignmine::cohort::{assemble_cohort, CompileStatus, Grouping, SubmissionRecord};
use assignmine::csvio;
use assignmine::discretize::{
    build_sequences, difference_rate, discretize_order, discretize_plagiarism, discretize_times,
    write_sequences_csv, GroupAggregates, OrderThresholds, SequenceKind,
};
use chrono::{TimeZone, Utc};
use proptest::prelude::*;

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/four_students")
}

fn fixture_thresholds() -> OrderThresholds {
    OrderThresholds { low: 1.5, high: 3.0 }
}

fn load_fixture() -> assignmine::cohort::Cohort {
    let d = fixture_dir();
    assemble_cohort(
        csvio::load_submissions(&d.join("submissions.csv")).unwrap(),
        csvio::load_outcomes(&d.join("outcomes.csv")).unwrap(),
        csvio::load_grouping(&d.join("grouping.csv")).unwrap(),
    )
    .unwrap()
}

#[test]
fn four_student_table() {
    let set = build_sequences(&load_fixture(), &fixture_thresholds()).unwrap();
    // Hand computation (counts, ranks, flags per group):
    //   g1 counts 3,1,2,2 (mean 2); g2 per-assignment means .5,2,1,0 (mean .875)
    //   missing a2/a3 submissions rank 4 (cohort size)
    let expected: [(&str, [i32; 2], [i32; 2], [i32; 2]); 4] = [
        ("s1", [2, -1], [1, 3], [1, 0]),
        ("s2", [-2, 2], [3, 1], [0, 2]),
        ("s3", [0, 1], [2, 2], [0, 0]),
        ("s4", [0, -2], [2, 3], [0, 0]),
    ];
    assert_eq!(set.length(), 2);
    assert_eq!(set.students().len(), 4);
    for (s, (id, t, o, p)) in set.students().iter().zip(expected) {
        assert_eq!(s.student_id, id);
        assert_eq!(s.times.symbols(), t, "{id} times");
        assert_eq!(s.order.symbols(), o, "{id} order");
        assert_eq!(s.plagiarism.symbols(), p, "{id} plagiarism");
    }
}

#[test]
fn golden_sequences_csv() {
    let set = build_sequences(&load_fixture(), &fixture_thresholds()).unwrap();
    let mut buf = Vec::new();
    write_sequences_csv(&mut buf, &set).unwrap();
    let golden = std::fs::read_to_string(fixture_dir().join("sequences.csv")).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), golden);
}

#[test]
fn times_recomputed_from_aggregates() {
    let cohort = load_fixture();
    let set = build_sequences(&cohort, &fixture_thresholds()).unwrap();
    let agg = GroupAggregates::compute(&cohort);
    for (i, s) in set.students().iter().enumerate() {
        for g in 0..set.length() {
            let float_dr = difference_rate(
                agg.mean_submission_count[i][g],
                agg.cohort_mean_count[g],
            )
            .unwrap();
            let exact_dr = agg.difference_rate(i, g).unwrap();
            assert!((float_dr - exact_dr).abs() < 1e-12);
            assert_eq!(s.times.symbols()[g], discretize_times(exact_dr));
        }
    }
}

#[test]
fn boundary_tables() {
    let grid = [-0.51, -0.5, -0.49, -1e-12, 0.0, 1e-12, 0.49, 0.5, 0.51];
    let want = [-2, -2, -1, -1, 0, 1, 1, 2, 2];
    let got: Vec<i32> = grid.iter().map(|&d| discretize_times(d)).collect();
    assert_eq!(got, want);

    let th = OrderThresholds::default();
    for (avg, sym) in [(0.0, 1), (500.0, 1), (500.5, 2), (750.0, 2), (1000.0, 2), (1000.5, 3), (1001.0, 3)] {
        assert_eq!(discretize_order(avg, &th), sym, "order {avg}");
    }
    for (n, sym) in [(0, 0), (1, 1), (2, 1), (3, 2), (17, 2)] {
        assert_eq!(discretize_plagiarism(n), sym, "plagiarism {n}");
    }
}

#[test]
fn times_is_monotone_on_a_fine_grid() {
    let mut prev = i32::MIN;
    for i in -3000..=3000 {
        let s = discretize_times(i as f64 / 1000.0);
        assert!(s >= prev);
        prev = s;
    }
}

fn record(student: &str, assignment: &str, order: u32, flag: bool) -> SubmissionRecord {
    SubmissionRecord {
        student_id: student.into(),
        assignment_id: assignment.into(),
        timestamp: Utc.with_ymd_and_hms(2020, 1, 1, 0, 0, 0).unwrap(),
        submission_order: order,
        plagiarism_flag: flag,
        compile_status: CompileStatus::Ok,
        diagnostic_text: String::new(),
    }
}

#[test]
fn single_student_self_mean_is_zero() {
    let subs = vec![record("a", "x", 1, false); 3];
    let outcomes = BTreeMap::from([("a".to_string(), 70.0)]);
    let grouping = Grouping::new(BTreeMap::from([("x".to_string(), 1)])).unwrap();
    let set = build_sequences(&assemble_cohort(subs, outcomes, grouping).unwrap(), &OrderThresholds::default()).unwrap();
    assert_eq!(set.students()[0].times.symbols(), &[0]);
}

#[test]
fn three_flags_in_group_five() {
    let mut subs = Vec::new();
    let mut groups = BTreeMap::new();
    for g in 1..=6 {
        groups.insert(format!("a{g}"), g);
        subs.push(record("a", &format!("a{g}"), 1, false));
    }
    for _ in 0..3 {
        subs.push(record("a", "a5", 1, true));
    }
    let outcomes = BTreeMap::from([("a".to_string(), 70.0)]);
    let cohort = assemble_cohort(subs, outcomes, Grouping::new(groups).unwrap()).unwrap();
    let set = build_sequences(&cohort, &OrderThresholds::default()).unwrap();
    // Group 5 is index 4 when 0-based.
    assert_eq!(set.students()[0].plagiarism.symbols(), &[0, 0, 0, 0, 2, 0]);
}

#[test]
fn sequences_have_length_g_and_valid_symbols() {
    let set = build_sequences(&load_fixture(), &fixture_thresholds()).unwrap();
    for s in set.students() {
        for kind in SequenceKind::ALL {
            let seq = s.get(kind);
            assert_eq!(seq.len(), set.length());
            assert!(seq.symbols().iter().all(|&v| kind.contains(v)));
        }
    }
}

#[test]
fn loader_round_trip() {
    let cohort = load_fixture();
    let dir = tempfile::tempdir().unwrap();
    csvio::save_submissions(&dir.path().join("s.csv"), cohort.submissions()).unwrap();
    csvio::save_outcomes(&dir.path().join("o.csv"), cohort.outcomes()).unwrap();
    csvio::save_grouping(&dir.path().join("g.csv"), cohort.grouping()).unwrap();
    assert_eq!(
        csvio::load_submissions(&dir.path().join("s.csv")).unwrap(),
        cohort.submissions()
    );
    assert_eq!(&csvio::load_outcomes(&dir.path().join("o.csv")).unwrap(), cohort.outcomes());
    assert_eq!(&csvio::load_grouping(&dir.path().join("g.csv")).unwrap(), cohort.grouping());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn difference_rate_is_scale_invariant(
        x_ij in 0.0f64..1e4,
        x_j in 1e-3f64..1e4,
        scale in 1e-3f64..1e3,
    ) {
        let a = discretize_times(difference_rate(x_ij, x_j).unwrap());
        let b = discretize_times(difference_rate(x_ij * scale, x_j * scale).unwrap());
        // Rounding can only disagree within an ulp-scale band of a bucket edge.
        let dr = difference_rate(x_ij, x_j).unwrap();
        let near_edge = [-0.5, 0.0, 0.5].iter().any(|e| (dr - e).abs() < 1e-9);
        prop_assert!(a == b || near_edge, "dr {dr}: {a} vs {b}");
    }

    #[test]
    fn integer_counts_scale_exactly(
        counts in proptest::collection::vec(0u32..8, 2..8),
        k in 1u32..6,
    ) {
        prop_assume!(counts.iter().any(|&c| c > 0));
        let build = |mult: u32| {
            let mut subs = Vec::new();
            let mut outcomes = BTreeMap::new();
            for (i, &c) in counts.iter().enumerate() {
                let id = format!("s{i:02}");
                outcomes.insert(id.clone(), 50.0);
                for _ in 0..c * mult {
                    subs.push(record(&id, "x", i as u32 + 1, false));
                }
            }
            let grouping = Grouping::new(BTreeMap::from([("x".to_string(), 1)])).unwrap();
            let cohort = assemble_cohort(subs, outcomes, grouping).unwrap();
            build_sequences(&cohort, &OrderThresholds::default()).unwrap()
        };
        let (a, b) = (build(1), build(k));
        for (sa, sb) in a.students().iter().zip(b.students()) {
            prop_assert_eq!(sa.times.symbols(), sb.times.symbols());
        }
    }
}
