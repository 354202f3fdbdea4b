//! `run-experiment`: ingest → generate → split → (optionally) mock-predict
//! and score, driven by one JSON config.
//!
//! Output layout under `output_dir`:
//!
//! ```text
//! taxonomy/                       canonical copy of the input
//! data/<task>.jsonl, stats.json
//! <task>/<split>/                 train_k, dev_k, eval_set_<i>, split_report
//! <task>/<split>/predictions/     mock predictions and score_report.json
//! multitask/<a+b>/                mixed train_k and dev_k per task subset
//! experiment.json                 manifest of everything above
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{
    create_dir, generate_into, load_presets, predict_dir, read_text, score_dirs, write_json, write_jsonl, CliError,
    CliResult, MockPolicy, RunExperimentArgs, DEV_FILE, SCORE_REPORT_FILE, TRAIN_FILE,
};
use crate::datagen::{GenConfig, Task};
use crate::ingest::{self, ColumnMap, LoadMode};
use crate::jsonl;
use crate::score::MeanStd;
use crate::splitkit::{self, SplitBundle, SplitConfig};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "experiment.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Evaluation sets only.
    ZeroShot,
    /// K-shot train/dev/eval per task.
    KShot,
    /// K-shot per task plus mixed training sets for every task subset.
    Multitask,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "format", rename_all = "snake_case")]
pub enum TaxonomySource {
    Canonical {
        entities: PathBuf,
        relations: PathBuf,
        #[serde(default)]
        permissive: bool,
    },
    Esco {
        dir: PathBuf,
        #[serde(default)]
        column_map: Option<ColumnMap>,
        #[serde(default)]
        permissive: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSettings {
    pub seed: u64,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default = "nine")]
    pub eval_sets: usize,
    #[serde(default = "five_twelve")]
    pub eval_size: usize,
}

fn nine() -> usize {
    9
}

fn five_twelve() -> usize {
    512
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub mode: Mode,
    pub taxonomy: TaxonomySource,
    pub tasks: Vec<Task>,
    pub generation: GenConfig,
    pub split: SplitSettings,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub presets_dir: Option<PathBuf>,
    #[serde(default)]
    pub mock_policy: Option<MockPolicy>,
}

impl ExperimentConfig {
    /// Parses and checks a config. Relative paths are resolved against
    /// `base` (normally the config file's directory).
    pub fn parse(text: &str, strict: bool, base: &Path) -> CliResult<(Self, Vec<String>)> {
        let (mut cfg, extra): (ExperimentConfig, _) = jsonl::parse_config(text, strict).map_err(CliError::usage)?;
        cfg.resolve(base);
        cfg.validate()?;
        Ok((cfg, extra))
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        match &mut self.taxonomy {
            TaxonomySource::Canonical { entities, relations, .. } => {
                fix(entities);
                fix(relations);
            }
            TaxonomySource::Esco { dir, .. } => fix(dir),
        }
        fix(&mut self.output_dir);
        if let Some(p) = &mut self.presets_dir {
            fix(p);
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(CliError::usage(format!(
                "unsupported schema_version {} (expected {CONFIG_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.tasks.is_empty() {
            return Err(CliError::usage("tasks must not be empty"));
        }
        if self.task_set().len() != self.tasks.len() {
            return Err(CliError::usage("tasks contains duplicates"));
        }
        if self.mode != Mode::ZeroShot && self.split.k.unwrap_or(0) == 0 {
            return Err(CliError::usage("split.k (≥ 1) is required unless mode is zero_shot"));
        }
        if self.split.eval_sets == 0 || self.split.eval_size == 0 {
            return Err(CliError::usage("split.eval_sets and split.eval_size must be at least 1"));
        }
        let paths: Vec<&Path> = match &self.taxonomy {
            TaxonomySource::Canonical { entities, relations, .. } => vec![entities, relations],
            TaxonomySource::Esco { dir, .. } => vec![dir],
        };
        let presets = self.presets_dir.as_deref().into_iter();
        if let Some(p) = paths.into_iter().chain(presets).find(|p| !p.exists()) {
            return Err(CliError::usage(format!("MissingFile: {}", p.display())));
        }
        Ok(())
    }

    pub fn task_set(&self) -> BTreeSet<Task> {
        self.tasks.iter().copied().collect()
    }

    fn split_config(&self) -> SplitConfig {
        SplitConfig {
            seed: self.split.seed,
            k: self.split.k.unwrap_or(0),
            eval_sets: self.split.eval_sets,
            eval_size: self.split.eval_size,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEval {
    pub task: Task,
    /// Relative to the output directory.
    pub eval_dir: String,
    pub eval_sets: usize,
    pub eval_set_size: usize,
    #[serde(default)]
    pub predictions_dir: Option<String>,
    #[serde(default)]
    pub score: Option<MeanStd>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestTrain {
    pub name: String,
    pub tasks: BTreeSet<Task>,
    pub train: String,
    pub dev: String,
    pub train_size: usize,
    pub dev_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub mode: Mode,
    pub tasks: BTreeSet<Task>,
    pub generation_seed: u64,
    pub split_seed: u64,
    pub k: Option<usize>,
    pub mock_policy: Option<MockPolicy>,
    pub evaluations: Vec<ManifestEval>,
    pub training_sets: Vec<ManifestTrain>,
}

fn rel(path: &Path, base: &Path) -> String {
    path.strip_prefix(base).unwrap_or(path).to_string_lossy().replace('\\', "/")
}

pub fn run_experiment(cfg: &ExperimentConfig) -> CliResult<Manifest> {
    let out = &cfg.output_dir;
    create_dir(out)?;

    let (taxonomy, report) = match &cfg.taxonomy {
        TaxonomySource::Canonical {
            entities,
            relations,
            permissive,
        } => ingest::load_canonical(entities, relations, load_mode(*permissive))?,
        TaxonomySource::Esco {
            dir,
            column_map,
            permissive,
        } => ingest::load_esco_csv(dir, &column_map.clone().unwrap_or_default(), load_mode(*permissive))?,
    };
    for w in &report.warnings {
        eprintln!("warning: {}: {}", w.locator, w.message);
    }
    let tax_dir = out.join("taxonomy");
    create_dir(&tax_dir)?;
    ingest::write_canonical(&taxonomy, &tax_dir)?;

    let presets = load_presets(cfg.presets_dir.as_deref())?;
    let tasks: Vec<Task> = cfg.task_set().into_iter().collect();
    let data = generate_into(&taxonomy, &presets, &cfg.generation, &tasks, &out.join("data"))?;

    let split_cfg = cfg.split_config();
    let split_name = match cfg.mode {
        Mode::ZeroShot => "zero_shot".to_string(),
        _ => format!("k{}", split_cfg.k),
    };
    let mut bundles: BTreeMap<Task, SplitBundle> = BTreeMap::new();
    let mut evaluations = Vec::new();
    for (task, examples) in &data {
        let bundle = match cfg.mode {
            Mode::ZeroShot => splitkit::split_zero_shot(examples, &split_cfg)?,
            _ => splitkit::split_kshot(examples, &split_cfg)?,
        };
        let dir = out.join(task.as_str()).join(&split_name);
        super::write_split(&bundle, &dir)?;
        let mut eval = ManifestEval {
            task: *task,
            eval_dir: rel(&dir, out),
            eval_sets: bundle.report.eval_sets,
            eval_set_size: bundle.report.eval_set_size,
            predictions_dir: None,
            score: None,
        };
        if let Some(policy) = cfg.mock_policy {
            let pred_dir = dir.join("predictions");
            predict_dir(&dir, &pred_dir, policy)?;
            let mut report = score_dirs(&dir, &pred_dir)?;
            report.metadata.insert("policy".into(), serde_json::json!(policy.to_string()));
            report
                .metadata
                .insert("generation_seed".into(), serde_json::json!(cfg.generation.seed));
            write_json(&pred_dir.join(SCORE_REPORT_FILE), &report)?;
            println!("{task} ({split_name}, {policy})");
            print!("{}", report.table());
            eval.predictions_dir = Some(rel(&pred_dir, out));
            eval.score = Some(report.aggregate.combined);
        }
        evaluations.push(eval);
        bundles.insert(*task, bundle);
    }

    let mut training_sets = Vec::new();
    match cfg.mode {
        Mode::ZeroShot => {}
        Mode::KShot => {
            for (task, b) in &bundles {
                let dir = out.join(task.as_str()).join(&split_name);
                training_sets.push(ManifestTrain {
                    name: task.as_str().to_string(),
                    tasks: BTreeSet::from([*task]),
                    train: rel(&dir.join(TRAIN_FILE), out),
                    dev: rel(&dir.join(DEV_FILE), out),
                    train_size: b.train_k.len(),
                    dev_size: b.dev_k.len(),
                });
            }
        }
        Mode::Multitask => {
            for subset in splitkit::task_subsets(&cfg.task_set()) {
                let mixed = splitkit::mix_tasks(&bundles, &subset, split_cfg.seed)?;
                let dir = out.join("multitask").join(mixed.name());
                create_dir(&dir)?;
                write_jsonl(&dir.join(TRAIN_FILE), &mixed.examples)?;
                write_jsonl(&dir.join(DEV_FILE), &mixed.dev)?;
                training_sets.push(ManifestTrain {
                    name: mixed.name(),
                    tasks: subset,
                    train: rel(&dir.join(TRAIN_FILE), out),
                    dev: rel(&dir.join(DEV_FILE), out),
                    train_size: mixed.examples.len(),
                    dev_size: mixed.dev.len(),
                });
            }
        }
    }

    let manifest = Manifest {
        schema_version: CONFIG_SCHEMA_VERSION,
        mode: cfg.mode,
        tasks: cfg.task_set(),
        generation_seed: cfg.generation.seed,
        split_seed: split_cfg.seed,
        k: (cfg.mode != Mode::ZeroShot).then_some(split_cfg.k),
        mock_policy: cfg.mock_policy,
        evaluations,
        training_sets,
    };
    write_json(&out.join(MANIFEST_FILE), &manifest)?;
    eprintln!("wrote {}", out.display());
    Ok(manifest)
}

fn load_mode(permissive: bool) -> LoadMode {
    if permissive {
        LoadMode::Permissive
    } else {
        LoadMode::Strict
    }
}

pub fn cmd_run_experiment(args: &RunExperimentArgs) -> CliResult<()> {
    let text = read_text(&args.config)?;
    let base = args
        .config
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let (mut cfg, extra) = ExperimentConfig::parse(&text, !args.lenient, &base)?;
    for f in extra {
        eprintln!("warning: ignoring unknown config field `{f}`");
    }
    if let Some(o) = &args.out {
        cfg.output_dir = o.clone();
    }
    run_experiment(&cfg)?;
    Ok(())
}
