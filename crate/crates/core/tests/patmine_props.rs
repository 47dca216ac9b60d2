use assignmine::discretize::{FeatureSequence, SequenceKind};
use assignmine::patmine::{
    format_pattern, matches, mine, parse_pattern, BoundaryGap, GapPolicy, InteriorGap,
    MiningConfig, Pattern,
};
use assignmine::synth::{oracle_match, oracle_mine};
use proptest::prelude::*;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const POLICIES: [GapPolicy; 4] = [
    GapPolicy { interior: InteriorGap::OneOrMore, boundary: BoundaryGap::Required },
    GapPolicy { interior: InteriorGap::OneOrMore, boundary: BoundaryGap::Free },
    GapPolicy { interior: InteriorGap::ZeroOrMore, boundary: BoundaryGap::Required },
    GapPolicy { interior: InteriorGap::ZeroOrMore, boundary: BoundaryGap::Free },
];

fn seq(kind: SequenceKind, v: Vec<i32>) -> FeatureSequence {
    FeatureSequence::new(kind, v).unwrap()
}

fn random_symbols(kind: SequenceKind, len: usize, rng: &mut impl Rng) -> Vec<i32> {
    (0..len).map(|_| *kind.alphabet().choose(rng).unwrap()).collect()
}

/// Every word of length `len` over `alphabet`.
fn words(alphabet: &[i32], len: usize) -> Vec<Vec<i32>> {
    (0..len).fold(vec![Vec::new()], |acc, _| {
        acc.iter()
            .flat_map(|w| alphabet.iter().map(move |&a| [w.as_slice(), &[a]].concat()))
            .collect()
    })
}

#[test]
fn exhaustive_small_domain_agrees_with_oracle() {
    let kind = SequenceKind::Order;
    let seqs = words(&[1, 2, 3], 6);
    let pats: Vec<Vec<i32>> = (1..=3).flat_map(|l| words(&[1, 2, 3], l)).collect();
    assert_eq!((seqs.len(), pats.len()), (729, 39));
    for policy in POLICIES {
        for s in &seqs {
            let fs = seq(kind, s.clone());
            for p in &pats {
                let pat = Pattern::new(kind, p.clone()).unwrap();
                assert_eq!(
                    matches(&fs, &pat, policy).unwrap(),
                    oracle_match(s, p, policy),
                    "{s:?} {p:?} {policy:?}"
                );
            }
        }
    }
}

#[test]
fn random_pairs_agree_with_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for kind in SequenceKind::ALL {
        for _ in 0..10_000 {
            let s = random_symbols(kind, 14, &mut rng);
            let plen = rng.random_range(1..=7);
            let p = random_symbols(kind, plen, &mut rng);
            let fs = seq(kind, s.clone());
            let pat = Pattern::new(kind, p.clone()).unwrap();
            assert_eq!(
                matches(&fs, &pat, GapPolicy::default()).unwrap(),
                oracle_match(&s, &p, GapPolicy::default())
            );
        }
    }
}

#[test]
fn worked_example() {
    let s = seq(SequenceKind::Times, vec![-2, 2, 1, 1, 2, -2, -1, -1, -2, 1, -2, 1, 2, -1]);
    let p = parse_pattern("(*)2(*)2(*)-2(*)-2(*)", SequenceKind::Times).unwrap();
    assert!(matches(&s, &p, GapPolicy::default()).unwrap());
}

#[test]
fn too_long_patterns_never_match() {
    let policy = GapPolicy::default();
    assert_eq!(policy.max_embeddable(14), 6);
    let s = seq(SequenceKind::Order, vec![1; 14]);
    assert!(matches(&s, &Pattern::new(SequenceKind::Order, vec![1; 6]).unwrap(), policy).unwrap());
    assert!(!matches(&s, &Pattern::new(SequenceKind::Order, vec![1; 7]).unwrap(), policy).unwrap());
}

#[test]
fn table_patterns_round_trip() {
    let cases = [
        ("(*)2(*)2(*)-2(*)-2(*)", SequenceKind::Times, vec![2, 2, -2, -2]),
        ("(*)-2(*)-2(*)-2(*)-2(*)", SequenceKind::Times, vec![-2, -2, -2, -2]),
        ("(*)2(*)2(*)2(*)2(*)-2(*)", SequenceKind::Times, vec![2, 2, 2, 2, -2]),
        ("(*)3(*)3(*)", SequenceKind::Order, vec![3, 3]),
        ("(*)3(*)3(*)3(*)", SequenceKind::Order, vec![3, 3, 3]),
        ("(*) 2 (*)", SequenceKind::Plagiarism, vec![2]),
        ("(*) 2 (*) 2 (*)", SequenceKind::Plagiarism, vec![2, 2]),
    ];
    for (text, kind, symbols) in cases {
        let p = parse_pattern(text, kind).unwrap();
        assert_eq!(p.symbols(), symbols.as_slice(), "{text}");
        let canon = format_pattern(&p);
        assert_eq!(canon, text.replace(' ', ""));
        assert_eq!(parse_pattern(&canon, kind).unwrap(), p);
    }
    assert!(parse_pattern("2(*)2", SequenceKind::Times).is_err());
}

fn random_groups(rng: &mut ChaCha8Rng, kind: SequenceKind) -> (Vec<FeatureSequence>, Vec<FeatureSequence>) {
    let nf = rng.random_range(1..=20);
    let np = rng.random_range(1..=20);
    let mk = |rng: &mut ChaCha8Rng, n| (0..n).map(|_| seq(kind, random_symbols(kind, 14, rng))).collect();
    (mk(rng, nf), mk(rng, np))
}

#[test]
fn miner_equals_oracle_on_random_cohorts() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for round in 0..30 {
        let kind = SequenceKind::ALL[round % 3];
        let (f, p) = random_groups(&mut rng, kind);
        let (fr, pr): (Vec<_>, Vec<_>) = (f.iter().collect(), p.iter().collect());
        for (rec, acc) in [(0.7, 0.7), (0.3, 0.5), (0.0, 0.0)] {
            let cfg = MiningConfig {
                min_recall: rec,
                min_accuracy: acc,
                max_pattern_length: 4,
                gap_policy: GapPolicy::default(),
            };
            assert_eq!(mine(&fr, &pr, &cfg).unwrap(), oracle_mine(&fr, &pr, &cfg).unwrap());
        }
    }
}

#[test]
fn zero_thresholds_return_every_supported_pattern() {
    let kind = SequenceKind::Order;
    let f = [seq(kind, vec![1, 2, 3, 1, 2, 3, 1]), seq(kind, vec![3, 3, 2, 2, 1, 1, 3])];
    let p = [seq(kind, vec![2, 1, 3, 3, 1, 2, 2])];
    let (fr, pr): (Vec<_>, Vec<_>) = (f.iter().collect(), p.iter().collect());
    let cfg = MiningConfig {
        min_recall: 0.0,
        min_accuracy: 0.0,
        max_pattern_length: usize::MAX,
        gap_policy: GapPolicy::default(),
    };
    let got = mine(&fr, &pr, &cfg).unwrap();
    // G = 7 embeds at most 3 symbols; count supported words directly.
    let supported = (1..=3)
        .flat_map(|l| words(kind.alphabet(), l))
        .filter(|w| f.iter().chain(&p).any(|s| oracle_match(s.symbols(), w, cfg.gap_policy)))
        .count();
    assert_eq!(got.len(), supported);
    let capped = MiningConfig { max_pattern_length: 4, ..cfg };
    assert_eq!(got, oracle_mine(&fr, &pr, &capped).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn extension_shrinks_match_set(
        s in proptest::collection::vec(-2i32..=2, 14),
        p in proptest::collection::vec(-2i32..=2, 1..6),
        extra in -2i32..=2,
    ) {
        let fs = seq(SequenceKind::Times, s);
        let pat = Pattern::new(SequenceKind::Times, p).unwrap();
        let ext = pat.extended(extra).unwrap();
        for policy in POLICIES {
            if matches(&fs, &ext, policy).unwrap() {
                prop_assert!(matches(&fs, &pat, policy).unwrap());
            }
        }
    }

    #[test]
    fn format_parse_round_trip(
        kind_ix in 0usize..3,
        raw in proptest::collection::vec(0usize..5, 1..10),
    ) {
        let kind = SequenceKind::ALL[kind_ix];
        let a = kind.alphabet();
        let p = Pattern::new(kind, raw.iter().map(|&i| a[i % a.len()]).collect()).unwrap();
        let text = format_pattern(&p);
        prop_assert!(!text.contains(' '));
        prop_assert_eq!(parse_pattern(&text, kind).unwrap(), p);
    }

    #[test]
    fn mining_ignores_student_order(seed in 0u64..1000) {
        use rand::seq::SliceRandom;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (f, p) = random_groups(&mut rng, SequenceKind::Order);
        let cfg = MiningConfig { min_recall: 0.3, min_accuracy: 0.5, ..Default::default() };
        let mut fr: Vec<_> = f.iter().collect();
        let mut pr: Vec<_> = p.iter().collect();
        let before = mine(&fr, &pr, &cfg).unwrap();
        fr.shuffle(&mut rng);
        pr.shuffle(&mut rng);
        prop_assert_eq!(before, mine(&fr, &pr, &cfg).unwrap());
    }
}
