use std::collections::BTreeMap;

use assignmine::cohort::{CompileStatus, Outcome};
use assignmine::diaglex::{classify_diagnostic, default_taxonomy, extract_features, NONE_CATEGORY};
use assignmine::discretize::SequenceKind;
use assignmine::patmine::{mine, pattern_stats, GapPolicy, MiningConfig, Pattern};
use assignmine::synth::{
    gen_cohort, oracle_match, oracle_mine, CategoryRate, PlantedPattern, SynthConfig,
};

fn planted(kind: SequenceKind, symbols: Vec<i32>, f: f64, p: f64) -> PlantedPattern {
    PlantedPattern {
        pattern: Pattern::new(kind, symbols).unwrap(),
        fail_rate: f,
        pass_rate: p,
    }
}

fn signal() -> Vec<CategoryRate> {
    [("Undeclared", 3.0, 1.0), ("Syntax error", 2.0, 2.0), ("Stray", 0.5, 0.1), ("Other", 1.0, 1.0)]
        .iter()
        .map(|&(c, f, p)| CategoryRate {
            category: c.into(),
            fail_rate: f,
            pass_rate: p,
        })
        .collect()
}

fn read_dir(dir: &std::path::Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

#[test]
fn same_seed_gives_identical_files() {
    let cfg = SynthConfig {
        seed: 11,
        planted: vec![planted(SequenceKind::Times, vec![2, 2], 0.8, 0.1)],
        compile_signal: signal(),
        label_noise: 0.1,
        ..Default::default()
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    gen_cohort(&cfg).unwrap().write_files(a.path()).unwrap();
    gen_cohort(&cfg).unwrap().write_files(b.path()).unwrap();
    let (fa, fb) = (read_dir(a.path()), read_dir(b.path()));
    assert_eq!(fa.keys().count(), 5);
    assert_eq!(fa, fb);

    let other = tempfile::tempdir().unwrap();
    gen_cohort(&SynthConfig { seed: 12, ..cfg }).unwrap().write_files(other.path()).unwrap();
    assert_ne!(fa["submissions.csv"], read_dir(other.path())["submissions.csv"]);
}

#[test]
fn exact_fail_count() {
    let cfg = SynthConfig {
        seed: 3,
        n_students: 100,
        fail_fraction: 0.4,
        ..Default::default()
    };
    let synth = gen_cohort(&cfg).unwrap();
    let fails = synth.labels().values().filter(|&&l| l == Outcome::Fail).count();
    assert_eq!(fails, 40);
}

#[test]
fn perfect_plant_separates_classes() {
    for seed in 0..5 {
        let cfg = SynthConfig {
            seed,
            planted: vec![planted(SequenceKind::Times, vec![2, 2], 1.0, 0.0)],
            ..Default::default()
        };
        let synth = gen_cohort(&cfg).unwrap();
        for s in synth.sequences.students() {
            let hit = oracle_match(s.times.symbols(), &[2, 2], GapPolicy::default());
            assert_eq!(hit, s.label == Outcome::Fail, "seed {seed} {}", s.student_id);
        }
        let truth = &synth.manifest.planted[0];
        assert_eq!(truth.expected_fail_matches, 16);
        assert_eq!(truth.expected_pass_matches, 0);
    }
}

#[test]
fn manifest_counts_equal_oracle_counts() {
    let cfg = SynthConfig {
        seed: 8,
        planted: vec![
            planted(SequenceKind::Order, vec![3, 3, 3], 0.7, 0.2),
            planted(SequenceKind::Plagiarism, vec![2], 0.5, 0.0),
        ],
        label_noise: 0.15,
        ..Default::default()
    };
    let synth = gen_cohort(&cfg).unwrap();
    for (truth, plant) in synth.manifest.planted.iter().zip(&cfg.planted) {
        let kind = plant.pattern.kind();
        let fail = synth.sequences.by_label(kind, Outcome::Fail);
        let pass = synth.sequences.by_label(kind, Outcome::Pass);
        let stats = pattern_stats(&plant.pattern, &fail, &pass, GapPolicy::default()).unwrap();
        assert_eq!(stats.fail_matches, truth.expected_fail_matches);
        assert_eq!(stats.pass_matches, truth.expected_pass_matches);
        assert_eq!(
            truth.fail_carriers.len() + truth.pass_carriers.len(),
            stats.fail_matches + stats.pass_matches
        );
    }
}

#[test]
fn planted_pattern_is_mined_with_oracle_stats() {
    let cfg = SynthConfig {
        seed: 21,
        planted: vec![planted(SequenceKind::Order, vec![3, 1, 3], 1.0, 0.0)],
        ..Default::default()
    };
    let synth = gen_cohort(&cfg).unwrap();
    let fail = synth.sequences.by_label(SequenceKind::Order, Outcome::Fail);
    let pass = synth.sequences.by_label(SequenceKind::Order, Outcome::Pass);
    let mcfg = MiningConfig { max_pattern_length: 4, ..Default::default() };
    let mined = mine(&fail, &pass, &mcfg).unwrap();
    let hit = mined.iter().find(|m| m.pattern.symbols() == [3, 1, 3]).expect("planted pattern mined");
    assert_eq!(hit.stats.recall(), 1.0);
    assert_eq!(mined, oracle_mine(&fail, &pass, &mcfg).unwrap());

    let strict = MiningConfig { min_recall: 1.0, min_accuracy: 1.0, ..mcfg };
    let perfect = oracle_mine(&fail, &pass, &strict).unwrap();
    assert!(perfect.iter().any(|m| m.pattern.symbols() == [3, 1, 3]));
}

#[test]
fn unembeddable_plant_is_rejected() {
    let cfg = SynthConfig {
        planted: vec![planted(SequenceKind::Times, vec![1; 7], 1.0, 0.0)],
        ..Default::default()
    };
    assert!(gen_cohort(&cfg).is_err());
}

#[test]
fn feature_vectors_partition_compile_events() {
    let tax = default_taxonomy();
    for seed in 0..10 {
        let cfg = SynthConfig {
            seed,
            compile_signal: signal(),
            ..Default::default()
        };
        let synth = gen_cohort(&cfg).unwrap();
        let features = extract_features(&synth.cohort, &tax);
        // Independent recount straight from the records.
        let mut recount: BTreeMap<&str, BTreeMap<&str, u64>> = BTreeMap::new();
        for rec in synth.cohort.submissions() {
            let cat = match rec.compile_status {
                CompileStatus::Ok => NONE_CATEGORY,
                CompileStatus::Error => classify_diagnostic(&rec.diagnostic_text, &tax),
            };
            *recount.entry(&rec.student_id).or_default().entry(cat).or_default() += 1;
        }
        let names = tax.feature_names();
        for (id, v) in &features {
            let events = synth.cohort.submissions().iter().filter(|r| &r.student_id == id).count();
            assert_eq!(v.total(), events as u64, "seed {seed} {id}");
            for (name, &c) in names.iter().zip(&v.counts) {
                let want = recount.get(id.as_str()).and_then(|m| m.get(name.as_str())).copied().unwrap_or(0);
                assert_eq!(u64::from(c), want, "{id} {name}");
            }
        }
    }
}
