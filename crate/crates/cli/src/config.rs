//! Line-oriented `key = value` configuration files.
//!
//! `#` starts a comment (whole line or trailing), blank lines are ignored and
//! dotted keys (`mine.min_recall`) name nested settings. Unknown keys are
//! rejected so typos surface immediately.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use assignmine::diaglex::{default_taxonomy, feature_column_name};
use assignmine::discretize::{OrderThresholds, SequenceKind};
use assignmine::learn::{ForestConfig, MlpConfig};
use assignmine::patmine::{parse_pattern, BoundaryGap, GapPolicy, InteriorGap, MiningConfig};
use assignmine::synth::{CategoryRate, PlantedPattern, SynthConfig};

/// Raw entries of a config file, consumed key by key.
#[derive(Debug)]
pub struct KeyValues {
    source: PathBuf,
    entries: BTreeMap<String, (usize, String)>,
}

impl KeyValues {
    pub fn parse(text: &str, source: &Path) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{}:{}: expected `key = value`", source.display(), i + 1))?;
            let key = key.trim();
            if key.is_empty() || key.split('.').any(str::is_empty) {
                bail!("{}:{}: malformed key `{key}`", source.display(), i + 1);
            }
            if entries
                .insert(key.to_string(), (i + 1, value.trim().to_string()))
                .is_some()
            {
                bail!("{}:{}: duplicate key `{key}`", source.display(), i + 1);
            }
        }
        Ok(KeyValues {
            source: source.to_path_buf(),
            entries,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text, path)
    }

    fn base_dir(&self) -> PathBuf {
        self.source
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default()
    }

    fn take_str(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.remove(key)
    }

    fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.take_str(key) {
            None => Ok(None),
            Some((line, v)) => v.parse().map(Some).map_err(|e| {
                anyhow!("{}:{line}: `{key}`: cannot parse `{v}`: {e}", self.source.display())
            }),
        }
    }

    fn take_or<T: FromStr>(&mut self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.take(key)?.unwrap_or(default))
    }

    /// A path resolved against the config file's directory.
    fn take_path(&mut self, key: &str) -> Option<PathBuf> {
        self.take_str(key).map(|(_, v)| self.base_dir().join(v))
    }

    /// Remaining keys starting with `prefix`, removed from the set.
    fn drain_prefix(&mut self, prefix: &str) -> Vec<(String, usize, String)> {
        let keys: Vec<String> = self
            .entries
            .keys()
            .filter(|k| k.starts_with(prefix))
            .cloned()
            .collect();
        keys.into_iter()
            .map(|k| {
                let (line, v) = self.entries.remove(&k).expect("key listed");
                (k, line, v)
            })
            .collect()
    }

    fn finish(self) -> Result<()> {
        if let Some((key, (line, _))) = self.entries.into_iter().next() {
            bail!("{}:{line}: unknown key `{key}`", self.source.display());
        }
        Ok(())
    }
}

fn parse_interior(v: &str) -> Result<InteriorGap> {
    match v {
        "one_or_more" => Ok(InteriorGap::OneOrMore),
        "zero_or_more" => Ok(InteriorGap::ZeroOrMore),
        _ => bail!("interior gap must be one_or_more or zero_or_more, got `{v}`"),
    }
}

fn parse_boundary(v: &str) -> Result<BoundaryGap> {
    match v {
        "required" => Ok(BoundaryGap::Required),
        "free" => Ok(BoundaryGap::Free),
        _ => bail!("boundary gap must be required or free, got `{v}`"),
    }
}

fn parse_widths(v: &str) -> Result<Vec<usize>> {
    v.split(',')
        .map(|w| {
            w.trim()
                .parse::<usize>()
                .map_err(|e| anyhow!("bad layer width `{w}`: {e}"))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnConfig {
    pub seed: u64,
    pub train_fraction: f64,
    pub forest: ForestConfig,
    pub mlp: MlpConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub submissions: PathBuf,
    pub outcomes: PathBuf,
    pub grouping: PathBuf,
    /// `None` uses the built-in taxonomy.
    pub taxonomy: Option<PathBuf>,
    /// Expected sequence length; `None` accepts whatever the grouping defines.
    pub groups: Option<usize>,
    pub thresholds: OrderThresholds,
    pub mining: MiningConfig,
    pub learn: LearnConfig,
    pub output_dir: PathBuf,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let mut kv = KeyValues::load(path)?;
        let required = |kv: &mut KeyValues, key: &str| {
            kv.take_path(key)
                .ok_or_else(|| anyhow!("{}: missing required key `{key}`", path.display()))
        };
        let submissions = required(&mut kv, "paths.submissions")?;
        let outcomes = required(&mut kv, "paths.outcomes")?;
        let grouping = required(&mut kv, "paths.grouping")?;
        let taxonomy = kv.take_path("paths.taxonomy");
        let groups = kv.take("sequence.length")?;

        let defaults = OrderThresholds::default();
        let thresholds = OrderThresholds {
            low: kv.take_or("discretize.order_low", defaults.low)?,
            high: kv.take_or("discretize.order_high", defaults.high)?,
        };
        thresholds.validate()?;

        let md = MiningConfig::default();
        let interior = match kv.take_str("mine.interior_gap") {
            Some((_, v)) => parse_interior(&v)?,
            None => md.gap_policy.interior,
        };
        let boundary = match kv.take_str("mine.boundary_gap") {
            Some((_, v)) => parse_boundary(&v)?,
            None => md.gap_policy.boundary,
        };
        let mining = MiningConfig {
            min_recall: kv.take_or("mine.min_recall", md.min_recall)?,
            min_accuracy: kv.take_or("mine.min_accuracy", md.min_accuracy)?,
            max_pattern_length: kv.take_or("mine.max_pattern_length", md.max_pattern_length)?,
            gap_policy: GapPolicy { interior, boundary },
        };
        mining.validate()?;

        let seed = kv.take_or("learn.seed", 0u64)?;
        let fd = ForestConfig::default();
        let forest = ForestConfig {
            trees: kv.take_or("learn.trees", fd.trees)?,
            max_depth: kv.take_or("learn.max_depth", fd.max_depth)?,
            min_samples_split: kv.take_or("learn.min_samples_split", fd.min_samples_split)?,
            max_features: kv.take("learn.max_features")?,
            seed,
        };
        let mdft = MlpConfig::default();
        let hidden = match kv.take_str("learn.hidden") {
            Some((_, v)) => parse_widths(&v)?,
            None => mdft.hidden.clone(),
        };
        let mlp = MlpConfig {
            hidden,
            learning_rate: kv.take_or("learn.learning_rate", mdft.learning_rate)?,
            momentum: kv.take_or("learn.momentum", mdft.momentum)?,
            epochs: kv.take_or("learn.epochs", mdft.epochs)?,
            batch_size: kv.take_or("learn.batch_size", mdft.batch_size)?,
            seed,
        };
        mlp.validate()?;
        let train_fraction = kv.take_or("learn.train_fraction", 0.8)?;
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            bail!("learn.train_fraction must be in (0, 1), got {train_fraction}");
        }

        let output_dir = kv.take_path("output.dir").unwrap_or_else(|| {
            path.parent().map(Path::to_path_buf).unwrap_or_default().join("out")
        });
        kv.finish()?;
        Ok(PipelineConfig {
            submissions,
            outcomes,
            grouping,
            taxonomy,
            groups,
            thresholds,
            mining,
            learn: LearnConfig {
                seed,
                train_fraction,
                forest,
                mlp,
            },
            output_dir,
        })
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.learn.seed = seed;
        self.learn.forest.seed = seed;
        self.learn.mlp.seed = seed;
    }
}

/// Synthetic cohort description.
///
/// ```text
/// seed = 7
/// n_students = 40
/// plant.1.kind = times
/// plant.1.pattern = (*)2(*)2(*)
/// plant.1.fail_rate = 1.0
/// plant.1.pass_rate = 0.0
/// compile.undeclared = 3, 1
/// ```
pub fn load_synth_config(path: &Path) -> Result<SynthConfig> {
    let mut kv = KeyValues::load(path)?;
    let d = SynthConfig::default();
    let low: Option<f64> = kv.take("order_low")?;
    let high: Option<f64> = kv.take("order_high")?;
    let order_thresholds = match (low, high) {
        (Some(low), Some(high)) => Some(OrderThresholds { low, high }),
        (None, None) => None,
        _ => bail!("{}: set both order_low and order_high or neither", path.display()),
    };
    let mut cfg = SynthConfig {
        seed: kv.take_or("seed", d.seed)?,
        n_students: kv.take_or("n_students", d.n_students)?,
        groups: kv.take_or("groups", d.groups)?,
        fail_fraction: kv.take_or("fail_fraction", d.fail_fraction)?,
        planted: Vec::new(),
        compile_signal: Vec::new(),
        label_noise: kv.take_or("label_noise", d.label_noise)?,
        assignments_per_group: kv.take_or("assignments_per_group", d.assignments_per_group)?,
        mean_group_submissions: kv.take_or("mean_group_submissions", d.mean_group_submissions)?,
        order_thresholds,
    };

    let mut plants: BTreeMap<u32, BTreeMap<String, (usize, String)>> = BTreeMap::new();
    for (key, line, value) in kv.drain_prefix("plant.") {
        let rest = &key["plant.".len()..];
        let (index, field) = rest
            .split_once('.')
            .ok_or_else(|| anyhow!("{}:{line}: expected plant.<n>.<field>", path.display()))?;
        let index: u32 = index
            .parse()
            .map_err(|_| anyhow!("{}:{line}: plant index `{index}` is not a number", path.display()))?;
        plants
            .entry(index)
            .or_default()
            .insert(field.to_string(), (line, value));
    }
    for (index, mut fields) in plants {
        let mut get = |f: &str| {
            fields
                .remove(f)
                .map(|(_, v)| v)
                .ok_or_else(|| anyhow!("{}: plant.{index}.{f} is missing", path.display()))
        };
        let kind: SequenceKind = get("kind")?.parse()?;
        let pattern = parse_pattern(&get("pattern")?, kind)?;
        let fail_rate: f64 = get("fail_rate")?.parse()?;
        let pass_rate: f64 = get("pass_rate")?.parse()?;
        if let Some(extra) = fields.keys().next() {
            bail!("{}: unknown key plant.{index}.{extra}", path.display());
        }
        cfg.planted.push(PlantedPattern {
            pattern,
            fail_rate,
            pass_rate,
        });
    }

    let names = default_taxonomy().feature_names();
    for (key, line, value) in kv.drain_prefix("compile.") {
        let column = &key["compile.".len()..];
        let category = names
            .iter()
            .find(|n| feature_column_name(n) == column)
            .ok_or_else(|| anyhow!("{}:{line}: unknown compile category `{column}`", path.display()))?;
        let (f, p) = value
            .split_once(',')
            .ok_or_else(|| anyhow!("{}:{line}: expected `fail_rate, pass_rate`", path.display()))?;
        cfg.compile_signal.push(CategoryRate {
            category: category.clone(),
            fail_rate: f.trim().parse()?,
            pass_rate: p.trim().parse()?,
        });
    }
    // Taxonomy order keeps the generated draws independent of key spelling.
    cfg.compile_signal
        .sort_by_key(|c| names.iter().position(|n| *n == c.category));
    kv.finish()?;
    cfg.validate()?;
    Ok(cfg)
}
