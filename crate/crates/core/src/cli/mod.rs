//! Command-line front end. Every stage reads and writes files so stages can
//! be run, inspected and replaced independently.

pub mod experiment;
pub mod mock;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::datagen::{self, dataset_stats, DatagenError, GenConfig, NegativeRatio, PromptExample, Task};
use crate::ingest::{self, ColumnMap, IngestError, LoadMode, ValidationReport};
use crate::jsonl::{self, JsonlError};
use crate::promptkit::{EcrcStyle, PresetError, Presets};
use crate::score::{self, ScoreError, ScoreReport};
use crate::splitkit::{self, SplitBundle, SplitConfig, SplitError};
use crate::taxonomy::Taxonomy;

pub use mock::{mock_predict, MockPolicy};

/// Environment variable holding the default output directory.
pub const OUT_ENV: &str = "TAXOPROMPT_OUT";

pub const STATS_FILE: &str = "stats.json";
pub const VALIDATION_FILE: &str = "validation_report.json";
pub const TRAIN_FILE: &str = "train_k.jsonl";
pub const DEV_FILE: &str = "dev_k.jsonl";
pub const SPLIT_REPORT_FILE: &str = "split_report.json";
pub const SCORE_REPORT_FILE: &str = "score_report.json";

pub fn eval_set_file(i: usize) -> String {
    format!("eval_set_{i}.jsonl")
}

pub fn predictions_file(i: usize) -> String {
    format!("predictions_{i}.jsonl")
}

#[derive(Debug, Parser)]
#[command(name = "taxoprompt", version, about = "Prompt datasets from occupation/skill taxonomies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load and validate a taxonomy, then write it in canonical form.
    Ingest(IngestArgs),
    /// Generate prompt datasets from a canonical taxonomy.
    Generate(GenerateArgs),
    /// Sample K-shot train/dev sets and evaluation sets.
    Split(SplitArgs),
    /// Write predictions from a stand-in policy.
    MockPredict(MockPredictArgs),
    /// Score prediction files against evaluation sets.
    Score(ScoreArgs),
    /// Run a whole experiment from a JSON config.
    RunExperiment(RunExperimentArgs),
    /// Export the built-in prompt presets for editing.
    Presets(PresetsArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["esco_dir", "entities"])))]
pub struct IngestArgs {
    /// Directory of ESCO CSV exports.
    #[arg(long)]
    pub esco_dir: Option<PathBuf>,
    /// Canonical entities JSONL (with --relations).
    #[arg(long, requires = "relations")]
    pub entities: Option<PathBuf>,
    #[arg(long, requires = "entities")]
    pub relations: Option<PathBuf>,
    /// JSON column map for ESCO CSVs.
    #[arg(long, requires = "esco_dir")]
    pub column_map: Option<PathBuf>,
    /// Skip invalid records instead of failing.
    #[arg(long)]
    pub permissive: bool,
    /// Print statistics without writing files.
    #[arg(long)]
    pub stats_only: bool,
    #[arg(long, env = OUT_ENV, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaskChoice {
    Ecrc,
    El,
    Qa,
    All,
}

impl TaskChoice {
    pub fn tasks(self) -> Vec<Task> {
        match self {
            TaskChoice::Ecrc => vec![Task::EcRc],
            TaskChoice::El => vec![Task::El],
            TaskChoice::Qa => vec![Task::Qa],
            TaskChoice::All => Task::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SingleTask {
    Ecrc,
    El,
    Qa,
}

impl From<SingleTask> for Task {
    fn from(t: SingleTask) -> Task {
        match t {
            SingleTask::Ecrc => Task::EcRc,
            SingleTask::El => Task::El,
            SingleTask::Qa => Task::Qa,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StyleChoice {
    Entity,
    Article,
}

impl From<StyleChoice> for EcrcStyle {
    fn from(s: StyleChoice) -> EcrcStyle {
        match s {
            StyleChoice::Entity => EcrcStyle::Entity,
            StyleChoice::Article => EcrcStyle::Article,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Directory holding entities.jsonl and relations.jsonl [default: output directory]
    #[arg(long)]
    pub taxonomy: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "all")]
    pub task: TaskChoice,
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON generation config; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub qa_positive_count: Option<usize>,
    /// Negatives per positive, e.g. `1` or `1/2`.
    #[arg(long)]
    pub negative_ratio: Option<NegativeRatio>,
    #[arg(long)]
    pub el_include_preferred_label_synonyms: bool,
    #[arg(long, value_enum)]
    pub ecrc_style: Option<StyleChoice>,
    /// Directory of preset overrides.
    #[arg(long)]
    pub presets: Option<PathBuf>,
    #[arg(long, env = OUT_ENV, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long, value_enum)]
    pub task: SingleTask,
    /// Directory containing `<task>.jsonl` [default: output directory]
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Explicit dataset file (overrides --data-dir).
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Train (and dev) examples per class.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), required_unless_present = "zero_shot", conflicts_with = "zero_shot")]
    pub k: Option<u64>,
    /// Export evaluation sets only, drawn from the whole dataset.
    #[arg(long)]
    pub zero_shot: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 9, value_parser = clap::value_parser!(u64).range(1..))]
    pub eval_sets: u64,
    #[arg(long, default_value_t = 512, value_parser = clap::value_parser!(u64).range(1..))]
    pub eval_size: u64,
    #[arg(long, env = OUT_ENV, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MockPredictArgs {
    /// An evaluation-set file or a directory of `eval_set_<i>.jsonl` files.
    #[arg(long)]
    pub input: PathBuf,
    /// gold_oracle, majority_class or uniform_random.
    #[arg(long, default_value = "gold_oracle")]
    pub policy: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory [default: the input directory]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub eval_dir: PathBuf,
    #[arg(long)]
    pub pred_dir: PathBuf,
    /// Where to write score_report.json [default: the predictions directory]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunExperimentArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Warn about unknown config fields instead of rejecting them.
    #[arg(long)]
    pub lenient: bool,
    /// Overrides the config's output_dir.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PresetsArgs {
    #[arg(long, env = OUT_ENV, default_value = "out")]
    pub out: PathBuf,
}

/// Failure of a command, carrying the process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    /// 1 for internal failures, 2 for bad input or usage.
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl fmt::Display) -> Self {
        CliError {
            code: 2,
            message: message.to_string(),
        }
    }

    pub fn internal(message: impl fmt::Display) -> Self {
        CliError {
            code: 1,
            message: message.to_string(),
        }
    }

    fn io(path: &Path, e: io::Error) -> Self {
        let msg = format!("{}: {e}", path.display());
        if e.kind() == io::ErrorKind::NotFound {
            CliError::usage(msg)
        } else {
            CliError::internal(msg)
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        let msg = match &e {
            IngestError::MissingFile(_) => format!("MissingFile: {e}"),
            IngestError::ValidationFailed(_) => format!("ValidationFailed: {e}"),
            _ => e.to_string(),
        };
        match e {
            IngestError::Io { source, .. } if source.kind() != io::ErrorKind::NotFound => CliError::internal(msg),
            _ => CliError::usage(msg),
        }
    }
}

impl From<JsonlError> for CliError {
    fn from(e: JsonlError) -> Self {
        match &e {
            JsonlError::Io { source, .. } if source.kind() != io::ErrorKind::NotFound => CliError::internal(e),
            _ => CliError::usage(e),
        }
    }
}

macro_rules! usage_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::usage(e)
            }
        }
    )*};
}

usage_from!(DatagenError, SplitError, PresetError);

impl From<ScoreError> for CliError {
    fn from(e: ScoreError) -> Self {
        let kind = match &e {
            ScoreError::MissingPrediction(_) => "MissingPrediction",
            ScoreError::UnknownExample(_) => "UnknownExample",
            ScoreError::DuplicatePrediction(_) => "DuplicatePrediction",
            ScoreError::MissingMask { .. } => "MissingMask",
            ScoreError::InvalidClass { .. } => "InvalidClass",
            ScoreError::EmptyRuns => "EmptyRuns",
        };
        CliError::usage(format!("{kind}: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Ingest(a) => cmd_ingest(&a),
        Command::Generate(a) => cmd_generate(&a),
        Command::Split(a) => cmd_split(&a),
        Command::MockPredict(a) => cmd_mock_predict(&a),
        Command::Score(a) => cmd_score(&a).map(|_| ()),
        Command::RunExperiment(a) => experiment::cmd_run_experiment(&a),
        Command::Presets(a) => cmd_presets(&a),
    }
}

pub(crate) fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::internal(format!("{}: {e}", dir.display())))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = jsonl::to_canonical_pretty(value).map_err(CliError::internal)?;
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub(crate) fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> CliResult<()> {
    jsonl::write_jsonl(path, items).map_err(|e| CliError::io(path, e))
}

pub(crate) fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn warn_issues(report: &ValidationReport) {
    for w in &report.warnings {
        eprintln!("warning: {}: {}", w.locator, w.message);
    }
}

/// Loads a taxonomy from ESCO CSVs or canonical JSONL files.
pub fn load_taxonomy(args: &IngestArgs) -> CliResult<(Taxonomy, ValidationReport)> {
    let mode = if args.permissive {
        LoadMode::Permissive
    } else {
        LoadMode::Strict
    };
    let result = match (&args.esco_dir, &args.entities, &args.relations) {
        (Some(dir), _, _) => {
            let map = match &args.column_map {
                Some(p) => {
                    let (m, _) = jsonl::parse_config::<ColumnMap>(&read_text(p)?, true)
                        .map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?;
                    m
                }
                None => ColumnMap::default(),
            };
            ingest::load_esco_csv(dir, &map, mode)
        }
        (None, Some(e), Some(r)) => ingest::load_canonical(e, r, mode),
        _ => return Err(CliError::usage("give --esco-dir or --entities with --relations")),
    };
    match result {
        Ok(v) => Ok(v),
        Err(IngestError::ValidationFailed(report)) => {
            for e in report.errors.iter().take(20) {
                eprintln!("error: {}: {}", e.locator, e.message);
            }
            Err(IngestError::ValidationFailed(report).into())
        }
        Err(e) => Err(e.into()),
    }
}

pub fn cmd_ingest(args: &IngestArgs) -> CliResult<()> {
    let (taxonomy, report) = load_taxonomy(args)?;
    warn_issues(&report);
    println!("{}", taxonomy.stats());
    if args.stats_only {
        return Ok(());
    }
    create_dir(&args.out)?;
    ingest::write_canonical(&taxonomy, &args.out)?;
    write_json(&args.out.join(VALIDATION_FILE), &report)?;
    eprintln!("wrote {}", args.out.display());
    Ok(())
}

pub fn load_presets(dir: Option<&Path>) -> CliResult<Presets> {
    match dir {
        Some(d) => Ok(Presets::load_dir(d)?),
        None => Ok(Presets::builtin()),
    }
}

#[derive(Debug, Serialize)]
struct GenerateStats<'a> {
    schema_version: u32,
    config: &'a GenConfig,
    taxonomy: crate::taxonomy::TaxonomyStats,
    tasks: BTreeMap<Task, datagen::DatasetStats>,
}

fn gen_config(args: &GenerateArgs) -> CliResult<GenConfig> {
    let mut cfg = match &args.config {
        Some(p) => {
            jsonl::parse_config::<GenConfig>(&read_text(p)?, true)
                .map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?
                .0
        }
        None => GenConfig::new(0),
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if args.qa_positive_count.is_some() {
        cfg.qa_positive_count = args.qa_positive_count;
    }
    if let Some(r) = args.negative_ratio {
        cfg.negative_ratio = r;
    }
    if args.el_include_preferred_label_synonyms {
        cfg.el_include_preferred_label_synonyms = true;
    }
    if let Some(s) = args.ecrc_style {
        cfg.ecrc_style = s.into();
    }
    Ok(cfg)
}

/// Generates the datasets for `tasks` into `out/<task>.jsonl` and writes
/// `out/stats.json`.
pub fn generate_into(
    taxonomy: &Taxonomy,
    presets: &Presets,
    cfg: &GenConfig,
    tasks: &[Task],
    out: &Path,
) -> CliResult<BTreeMap<Task, Vec<PromptExample>>> {
    create_dir(out)?;
    let mut data = BTreeMap::new();
    let mut stats = BTreeMap::new();
    for &task in tasks {
        let examples = datagen::generate(task, taxonomy, presets, cfg)?;
        write_jsonl(&out.join(format!("{task}.jsonl")), &examples)?;
        stats.insert(task, dataset_stats(&examples));
        data.insert(task, examples);
    }
    write_json(
        &out.join(STATS_FILE),
        &GenerateStats {
            schema_version: datagen::SCHEMA_VERSION,
            config: cfg,
            taxonomy: taxonomy.stats(),
            tasks: stats.clone(),
        },
    )?;
    for (task, s) in &stats {
        let classes: Vec<String> = s.by_class.iter().map(|(c, n)| format!("{c}={n}")).collect();
        println!(
            "{task:<5} total={} pos={} neg={} {}",
            s.total,
            s.positive,
            s.negative,
            classes.join(" ")
        );
    }
    Ok(data)
}

pub fn cmd_generate(args: &GenerateArgs) -> CliResult<()> {
    let cfg = gen_config(args)?;
    let dir = args.taxonomy.clone().unwrap_or_else(|| args.out.clone());
    let (taxonomy, report) = ingest::load_canonical_dir(&dir, LoadMode::Strict)?;
    warn_issues(&report);
    let presets = load_presets(args.presets.as_deref())?;
    generate_into(&taxonomy, &presets, &cfg, &args.task.tasks(), &args.out)?;
    Ok(())
}

/// Reads a single-task dataset file.
pub fn read_dataset(path: &Path, task: Task) -> CliResult<Vec<PromptExample>> {
    let examples: Vec<PromptExample> = jsonl::read_jsonl(path)?;
    if let Some(e) = examples.iter().find(|e| e.task != task) {
        return Err(CliError::usage(format!(
            "{}: example {} is a {} example, expected {task}",
            path.display(),
            e.example_id,
            e.task
        )));
    }
    Ok(examples)
}

/// Writes a split bundle: train/dev files (unless zero-shot), one file per
/// evaluation set and the split report.
pub fn write_split(bundle: &SplitBundle, dir: &Path) -> CliResult<()> {
    create_dir(dir)?;
    if bundle.report.mode != "zero_shot" {
        write_jsonl(&dir.join(TRAIN_FILE), &bundle.train_k)?;
        write_jsonl(&dir.join(DEV_FILE), &bundle.dev_k)?;
    }
    for (i, set) in bundle.eval_sets.iter().enumerate() {
        write_jsonl(&dir.join(eval_set_file(i + 1)), set)?;
    }
    write_json(&dir.join(SPLIT_REPORT_FILE), &bundle.report)
}

fn print_split(bundle: &SplitBundle, dir: &Path) {
    let r = &bundle.report;
    println!(
        "train={} dev={} pool={} removed_by_decontamination={} eval_sets={}x{}",
        r.train_size, r.dev_size, r.eval_pool_size, r.removed_by_decontamination, r.eval_sets, r.eval_set_size
    );
    if r.clamped {
        eprintln!("warning: evaluation pool smaller than the requested set size; sets clamped to {}", r.eval_set_size);
    }
    if r.eval_pool_size == 0 {
        eprintln!("warning: evaluation pool is empty after decontamination");
    }
    eprintln!("wrote {}", dir.display());
}

pub fn cmd_split(args: &SplitArgs) -> CliResult<()> {
    let task: Task = args.task.into();
    let path = match &args.dataset {
        Some(p) => p.clone(),
        None => args
            .data_dir
            .clone()
            .unwrap_or_else(|| args.out.clone())
            .join(format!("{task}.jsonl")),
    };
    let examples = read_dataset(&path, task)?;
    let cfg = SplitConfig {
        seed: args.seed,
        k: args.k.unwrap_or(0) as usize,
        eval_sets: args.eval_sets as usize,
        eval_size: args.eval_size as usize,
    };
    let bundle = if args.zero_shot {
        splitkit::split_zero_shot(&examples, &cfg)?
    } else {
        splitkit::split_kshot(&examples, &cfg)?
    };
    write_split(&bundle, &args.out)?;
    print_split(&bundle, &args.out);
    Ok(())
}

/// `eval_set_<i>.jsonl` files of `dir`, ordered by `i`.
pub fn eval_set_files(dir: &Path) -> CliResult<Vec<(usize, PathBuf)>> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    let mut out = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| CliError::io(dir, e))?;
        let name = entry.file_name();
        let Some(name) = name.to_str() else { continue };
        if let Some(i) = name
            .strip_prefix("eval_set_")
            .and_then(|r| r.strip_suffix(".jsonl"))
            .and_then(|n| n.parse::<usize>().ok())
        {
            out.push((i, entry.path()));
        }
    }
    out.sort();
    if out.is_empty() {
        return Err(CliError::usage(format!("{}: no eval_set_<i>.jsonl files", dir.display())));
    }
    Ok(out)
}

/// Runs `policy` over every evaluation set in `eval_dir`, writing
/// `predictions_<i>.jsonl` into `out`.
pub fn predict_dir(eval_dir: &Path, out: &Path, policy: MockPolicy) -> CliResult<usize> {
    let files = eval_set_files(eval_dir)?;
    create_dir(out)?;
    for (i, path) in &files {
        let set: Vec<PromptExample> = jsonl::read_jsonl(path)?;
        write_jsonl(&out.join(predictions_file(*i)), &mock_predict(&set, policy))?;
    }
    Ok(files.len())
}

pub fn cmd_mock_predict(args: &MockPredictArgs) -> CliResult<()> {
    let policy = MockPolicy::from_name(&args.policy, args.seed).map_err(CliError::usage)?;
    if args.input.is_dir() {
        let out = args.out.clone().unwrap_or_else(|| args.input.clone());
        let n = predict_dir(&args.input, &out, policy)?;
        eprintln!("wrote {n} prediction file(s) to {}", out.display());
        return Ok(());
    }
    let set: Vec<PromptExample> = jsonl::read_jsonl(&args.input)?;
    let name = args.input.file_name().and_then(|n| n.to_str()).unwrap_or_default();
    let file = match name
        .strip_prefix("eval_set_")
        .and_then(|r| r.strip_suffix(".jsonl"))
        .and_then(|n| n.parse::<usize>().ok())
    {
        Some(i) => predictions_file(i),
        None => format!("predictions_{}.jsonl", name.trim_end_matches(".jsonl")),
    };
    let out = match &args.out {
        Some(o) => o.clone(),
        None => args.input.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    create_dir(&out)?;
    write_jsonl(&out.join(&file), &mock_predict(&set, policy))?;
    eprintln!("wrote {}", out.join(file).display());
    Ok(())
}

/// Scores every evaluation set of `eval_dir` against the matching
/// predictions file of `pred_dir`.
pub fn score_dirs(eval_dir: &Path, pred_dir: &Path) -> CliResult<ScoreReport> {
    let files = eval_set_files(eval_dir)?;
    let mut runs = Vec::with_capacity(files.len());
    for (i, path) in &files {
        let pred_path = pred_dir.join(predictions_file(*i));
        if !pred_path.is_file() {
            return Err(CliError::usage(format!(
                "MissingPrediction: no predictions for eval set {i} ({})",
                pred_path.display()
            )));
        }
        let set: Vec<PromptExample> = jsonl::read_jsonl(path)?;
        let preds: Vec<score::PredictionRecord> = jsonl::read_jsonl(&pred_path)?;
        let run = score::score_run(&set, &preds)
            .map_err(|e| CliError::from(e).with_context(&format!("eval set {i}")))?;
        runs.push(run);
    }
    let mut metadata = BTreeMap::new();
    let report_path = eval_dir.join(SPLIT_REPORT_FILE);
    if report_path.is_file() {
        let split: splitkit::SplitReport = serde_json::from_str(&read_text(&report_path)?)
            .map_err(|e| CliError::usage(format!("{}: {e}", report_path.display())))?;
        if let Some(t) = split.task {
            metadata.insert("tasks".into(), serde_json::json!([t]));
        }
        metadata.insert("k".into(), serde_json::json!(split.k));
        metadata.insert("mode".into(), serde_json::json!(split.mode));
        metadata.insert("split_seed".into(), serde_json::json!(split.seed));
    }
    metadata.insert("eval_sets".into(), serde_json::json!(files.len()));
    Ok(score::aggregate(runs, metadata)?)
}

impl CliError {
    fn with_context(mut self, ctx: &str) -> Self {
        self.message = format!("{} ({ctx})", self.message);
        self
    }
}

pub fn cmd_score(args: &ScoreArgs) -> CliResult<ScoreReport> {
    let report = score_dirs(&args.eval_dir, &args.pred_dir)?;
    let out = args.out.clone().unwrap_or_else(|| args.pred_dir.clone());
    create_dir(&out)?;
    write_json(&out.join(SCORE_REPORT_FILE), &report)?;
    print!("{}", report.table());
    if report.runs.iter().any(|r| r.zero_division) {
        eprintln!("note: some classes had an empty predicted or gold set and were scored F1 = 0");
    }
    Ok(report)
}

pub fn cmd_presets(args: &PresetsArgs) -> CliResult<()> {
    create_dir(&args.out)?;
    Presets::builtin().write_dir(&args.out)?;
    eprintln!("wrote {}", args.out.display());
    Ok(())
}
