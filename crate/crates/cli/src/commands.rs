use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use assignmine::cohort::{assemble_cohort, Cohort, Outcome};
use assignmine::csvio;
use assignmine::diaglex::{default_taxonomy, extract_features, DiagnosticTaxonomy};
use assignmine::discretize::{build_sequences, write_sequences_csv, SequenceKind, SequenceSet};
use assignmine::learn::{
    baseline_fit_predict, evaluate, forward_select, rf_fit, rf_importance, split,
    write_importance_csv, BaselineKind, Dataset, LogisticConfig, MlpClassifier, MlpConfig,
    SvmConfig,
};
use assignmine::patmine::{mine, write_patterns_csv};
use assignmine::synth::gen_cohort;
use serde_json::json;

use crate::config::{load_synth_config, PipelineConfig};
use crate::report::{order_vs_grade, write_order_vs_grade};

fn write_output(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

pub fn load_cohort(cfg: &PipelineConfig) -> Result<Cohort> {
    let submissions = csvio::load_submissions(&cfg.submissions)?;
    let outcomes = csvio::load_outcomes(&cfg.outcomes)?;
    let grouping = csvio::load_grouping(&cfg.grouping)?;
    if let Some(g) = cfg.groups {
        if grouping.groups() != g {
            bail!(
                "sequence.length is {g} but {} defines {} groups",
                cfg.grouping.display(),
                grouping.groups()
            );
        }
    }
    Ok(assemble_cohort(submissions, outcomes, grouping)?)
}

fn sequences_for(cfg: &PipelineConfig) -> Result<(Cohort, SequenceSet)> {
    let cohort = load_cohort(cfg)?;
    let set = build_sequences(&cohort, &cfg.thresholds)?;
    Ok((cohort, set))
}

pub fn cmd_sequences(cfg: &PipelineConfig) -> Result<PathBuf> {
    let (_, set) = sequences_for(cfg)?;
    let mut buf = Vec::new();
    write_sequences_csv(&mut buf, &set)?;
    write_output(&cfg.output_dir, "sequences.csv", &buf)
}

pub fn cmd_mine(cfg: &PipelineConfig) -> Result<PathBuf> {
    let (_, set) = sequences_for(cfg)?;
    let mut rows = Vec::new();
    for kind in SequenceKind::ALL {
        let fail = set.by_label(kind, Outcome::Fail);
        let pass = set.by_label(kind, Outcome::Pass);
        let mined = mine(&fail, &pass, &cfg.mining)
            .with_context(|| format!("mining {kind} sequences"))?;
        rows.push((kind, mined));
    }
    let mut buf = Vec::new();
    write_patterns_csv(&mut buf, &rows)?;
    write_output(&cfg.output_dir, "patterns.csv", &buf)
}

fn taxonomy_for(cfg: &PipelineConfig) -> Result<DiagnosticTaxonomy> {
    match &cfg.taxonomy {
        Some(p) => Ok(DiagnosticTaxonomy::load(p)?),
        None => Ok(default_taxonomy()),
    }
}

fn mlp_accuracy(train: &Dataset, test: &Dataset, mlp: &MlpConfig) -> assignmine::Result<f64> {
    let clf = MlpClassifier::fit(train, mlp)?;
    Ok(evaluate(&clf.predict(test)?, test.labels())?.accuracy)
}

pub fn cmd_predict(cfg: &PipelineConfig) -> Result<Vec<PathBuf>> {
    let cohort = load_cohort(cfg)?;
    let tax = taxonomy_for(cfg)?;
    let features = extract_features(&cohort, &tax);
    let labels: BTreeMap<String, Outcome> = cohort
        .students()
        .iter()
        .map(|s| (s.clone(), cohort.label(s).expect("every student is labelled")))
        .collect();
    let dataset = Dataset::from_features(&features, &labels, tax.feature_names())?;
    dataset.require_both_classes()?;
    let learn = &cfg.learn;
    let (train, test) = split(&dataset, learn.train_fraction, learn.seed)?;

    let forest = rf_fit(&train, &learn.forest)?;
    let ranking = rf_importance(&forest);
    let selection = forward_select(&train, &test, &ranking, learn.seed, |tr, te, seed| {
        mlp_accuracy(tr, te, &MlpConfig { seed, ..learn.mlp.clone() })
    })?;

    let (tr, te) = (train.select_named(&selection.selected)?, test.select_named(&selection.selected)?);
    let clf = MlpClassifier::fit(&tr, &learn.mlp)?;
    let mut models = vec![("mlp", evaluate(&clf.predict(&te)?, te.labels())?)];
    for kind in BaselineKind::ALL {
        models.push((kind.as_str(), baseline_fit_predict(kind, &tr, &te, learn.seed)?));
    }
    let (train_fail, train_pass) = train.class_counts();
    let (test_fail, test_pass) = test.class_counts();
    let metrics = json!({
        "models": models
            .iter()
            .map(|(name, m)| json!({"model": name, "accuracy": m.accuracy, "recall": m.recall}))
            .collect::<Vec<_>>(),
        "selected_features": selection.selected,
        "trajectory": selection.trajectory,
        "split": {
            "train_fraction": learn.train_fraction,
            "train": {"fail": train_fail, "pass": train_pass},
            "test": {"fail": test_fail, "pass": test_pass},
        },
        "seeds": {
            "split": learn.seed,
            "forest": learn.forest.seed,
            "mlp": learn.mlp.seed,
            "linear_svm": learn.seed,
        },
        "config": {
            "forest": learn.forest,
            "mlp": learn.mlp,
            "logistic_regression": LogisticConfig::default(),
            "linear_svm": SvmConfig::default(),
        },
    });
    let mut importance = Vec::new();
    write_importance_csv(&mut importance, &ranking)?;
    let mut text = serde_json::to_string_pretty(&metrics)?;
    text.push('\n');
    Ok(vec![
        write_output(&cfg.output_dir, "importance.csv", &importance)?,
        write_output(&cfg.output_dir, "metrics.json", text.as_bytes())?,
    ])
}

pub fn cmd_report(cfg: &PipelineConfig) -> Result<PathBuf> {
    let (cohort, set) = sequences_for(cfg)?;
    let mut buf = Vec::new();
    write_order_vs_grade(&mut buf, &order_vs_grade(&cohort, &set))?;
    write_output(&cfg.output_dir, "order_vs_grade.csv", &buf)
}

pub fn cmd_run_all(cfg: &PipelineConfig) -> Result<Vec<PathBuf>> {
    let mut written = vec![cmd_sequences(cfg)?, cmd_mine(cfg)?];
    written.extend(cmd_predict(cfg)?);
    written.push(cmd_report(cfg)?);
    Ok(written)
}

/// Generates a cohort into `out` together with a `pipeline.cfg` that runs the
/// pipeline on it, writing results to `out/results`.
pub fn cmd_synth(config: &Path, out: &Path, seed: Option<u64>) -> Result<Vec<PathBuf>> {
    let mut cfg = load_synth_config(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let synth = gen_cohort(&cfg)?;
    synth.write_files(out)?;
    let th = synth.thresholds;
    let pipeline = format!(
        "# Generated for the synthetic cohort in this directory.\n\
         paths.submissions = submissions.csv\n\
         paths.outcomes = outcomes.csv\n\
         paths.grouping = grouping.csv\n\
         paths.taxonomy = taxonomy.cfg\n\
         sequence.length = {}\n\
         discretize.order_low = {}\n\
         discretize.order_high = {}\n\
         learn.seed = {}\n\
         output.dir = results\n",
        cfg.groups, th.low, th.high, cfg.seed
    );
    let mut written: Vec<PathBuf> = [
        "submissions.csv",
        "outcomes.csv",
        "grouping.csv",
        "taxonomy.cfg",
        "manifest.json",
    ]
    .iter()
    .map(|f| out.join(f))
    .collect();
    written.push(write_output(out, "pipeline.cfg", pipeline.as_bytes())?);
    Ok(written)
}
