//! K-shot sampling, EC+RC decontamination, repeated evaluation sampling and
//! multitask mixing.
//!
//! All sampling is keyed on the configured seed and canonicalized by
//! `example_id`, so input order never affects the output.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datagen::{PromptExample, Task};
use crate::seed::derive_rng;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub seed: u64,
    /// Train (and, separately, dev) examples per class.
    pub k: usize,
    #[serde(default = "default_eval_sets")]
    pub eval_sets: usize,
    #[serde(default = "default_eval_size")]
    pub eval_size: usize,
}

fn default_eval_sets() -> usize {
    9
}

fn default_eval_size() -> usize {
    512
}

impl SplitConfig {
    pub fn new(seed: u64, k: usize) -> Self {
        SplitConfig {
            seed,
            k,
            eval_sets: default_eval_sets(),
            eval_size: default_eval_size(),
        }
    }

    pub fn validate(&self) -> Result<(), SplitError> {
        if self.k == 0 {
            return Err(SplitError::InvalidConfig("k must be at least 1".into()));
        }
        self.validate_eval()
    }

    fn validate_eval(&self) -> Result<(), SplitError> {
        if self.eval_sets == 0 {
            return Err(SplitError::InvalidConfig("eval_sets must be at least 1".into()));
        }
        if self.eval_size == 0 {
            return Err(SplitError::InvalidConfig("eval_size must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SplitError {
    #[error("class `{class}` has {have} examples, need {need} (2 × k)")]
    InsufficientClassExamples { class: String, have: usize, need: usize },
    #[error("example {0} has no gold class on its stratification mask")]
    MissingClass(String),
    #[error("evaluation pool is empty")]
    EmptyPool,
    #[error("task subset is empty")]
    EmptySubset,
    #[error("no split bundle for task {0}")]
    MissingTask(Task),
    #[error("invalid split config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KShot {
    pub train: Vec<PromptExample>,
    pub dev: Vec<PromptExample>,
    pub remainder: Vec<PromptExample>,
}

fn by_id(v: &mut [PromptExample]) {
    v.sort_by(|a, b| a.example_id.cmp(&b.example_id));
}

/// Draws `k` train and `k` dev examples per class, uniformly without
/// replacement. The class is the gold of the task's stratification mask.
pub fn sample_kshot(dataset: &[PromptExample], config: &SplitConfig) -> Result<KShot, SplitError> {
    config.validate()?;
    let mut classes: BTreeMap<&str, Vec<&PromptExample>> = BTreeMap::new();
    for e in dataset {
        let class = e.class().ok_or_else(|| SplitError::MissingClass(e.example_id.clone()))?;
        classes.entry(class).or_default().push(e);
    }
    let need = 2 * config.k;
    let mut out = KShot::default();
    for (class, mut members) in classes {
        if members.len() < need {
            return Err(SplitError::InsufficientClassExamples {
                class: class.to_string(),
                have: members.len(),
                need,
            });
        }
        members.sort_by(|a, b| a.example_id.cmp(&b.example_id));
        let mut rng = derive_rng(config.seed, "kshot", class);
        let picked = index::sample(&mut rng, members.len(), need).into_vec();
        let mut taken = vec![false; members.len()];
        for (n, &i) in picked.iter().enumerate() {
            taken[i] = true;
            let dst = if n < config.k { &mut out.train } else { &mut out.dev };
            dst.push(members[i].clone());
        }
        out.remainder
            .extend(members.iter().zip(&taken).filter(|(_, &t)| !t).map(|(e, _)| (*e).clone()));
    }
    by_id(&mut out.train);
    by_id(&mut out.dev);
    by_id(&mut out.remainder);
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Decontamination {
    pub kept: Vec<PromptExample>,
    pub removed: usize,
}

/// Drops every pool example that mentions an entity seen in `train`.
pub fn decontaminate_ecrc(train: &[PromptExample], pool: &[PromptExample]) -> Decontamination {
    let seen: BTreeSet<&str> = train.iter().flat_map(|e| e.entity_ids()).collect();
    let kept: Vec<PromptExample> = pool
        .iter()
        .filter(|e| e.entity_ids().is_disjoint(&seen))
        .cloned()
        .collect();
    Decontamination {
        removed: pool.len() - kept.len(),
        kept,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalSets {
    pub sets: Vec<Vec<PromptExample>>,
    /// True when the pool was smaller than `eval_size`.
    pub clamped: bool,
}

/// Draws `eval_sets` independent samples of `min(eval_size, |pool|)`
/// examples. Sets are without replacement internally but may overlap each
/// other.
pub fn sample_eval_sets(pool: &[PromptExample], config: &SplitConfig) -> Result<EvalSets, SplitError> {
    config.validate_eval()?;
    if pool.is_empty() {
        return Err(SplitError::EmptyPool);
    }
    let mut canonical: Vec<&PromptExample> = pool.iter().collect();
    canonical.sort_by(|a, b| a.example_id.cmp(&b.example_id));
    let size = config.eval_size.min(canonical.len());
    let sets = (1..=config.eval_sets)
        .map(|i| {
            let mut rng = derive_rng(config.seed, "eval", &i.to_string());
            let mut set: Vec<PromptExample> = index::sample(&mut rng, canonical.len(), size)
                .into_iter()
                .map(|j| canonical[j].clone())
                .collect();
            by_id(&mut set);
            set
        })
        .collect();
    Ok(EvalSets {
        sets,
        clamped: size < config.eval_size,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitReport {
    pub task: Option<Task>,
    pub mode: String,
    pub seed: u64,
    pub k: Option<usize>,
    pub train_size: usize,
    pub dev_size: usize,
    pub pool_before_decontamination: usize,
    pub removed_by_decontamination: usize,
    pub eval_pool_size: usize,
    pub eval_sets: usize,
    pub eval_set_size: usize,
    pub clamped: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitBundle {
    pub train_k: Vec<PromptExample>,
    pub dev_k: Vec<PromptExample>,
    pub eval_pool: Vec<PromptExample>,
    pub eval_sets: Vec<Vec<PromptExample>>,
    pub report: SplitReport,
}

fn task_of(examples: &[PromptExample]) -> Option<Task> {
    examples.first().map(|e| e.task)
}

/// K-shot split of one task's dataset: sample train/dev, decontaminate the
/// remainder when the task is EC+RC, then draw the evaluation sets.
pub fn split_kshot(examples: &[PromptExample], config: &SplitConfig) -> Result<SplitBundle, SplitError> {
    let kshot = sample_kshot(examples, config)?;
    let task = task_of(examples);
    let before = kshot.remainder.len();
    let (eval_pool, removed) = if task == Some(Task::EcRc) {
        let seen: Vec<PromptExample> = kshot.train.iter().chain(&kshot.dev).cloned().collect();
        let d = decontaminate_ecrc(&seen, &kshot.remainder);
        (d.kept, d.removed)
    } else {
        (kshot.remainder, 0)
    };
    let sets = sample_eval_sets(&eval_pool, config)?;
    Ok(SplitBundle {
        report: SplitReport {
            task,
            mode: "k_shot".into(),
            seed: config.seed,
            k: Some(config.k),
            train_size: kshot.train.len(),
            dev_size: kshot.dev.len(),
            pool_before_decontamination: before,
            removed_by_decontamination: removed,
            eval_pool_size: eval_pool.len(),
            eval_sets: sets.sets.len(),
            eval_set_size: sets.sets[0].len(),
            clamped: sets.clamped,
        },
        train_k: kshot.train,
        dev_k: kshot.dev,
        eval_pool,
        eval_sets: sets.sets,
    })
}

/// Zero-shot split: no training data, evaluation sets drawn from everything.
pub fn split_zero_shot(examples: &[PromptExample], config: &SplitConfig) -> Result<SplitBundle, SplitError> {
    let mut pool = examples.to_vec();
    by_id(&mut pool);
    let sets = sample_eval_sets(&pool, config)?;
    Ok(SplitBundle {
        report: SplitReport {
            task: task_of(examples),
            mode: "zero_shot".into(),
            seed: config.seed,
            k: None,
            train_size: 0,
            dev_size: 0,
            pool_before_decontamination: pool.len(),
            removed_by_decontamination: 0,
            eval_pool_size: pool.len(),
            eval_sets: sets.sets.len(),
            eval_set_size: sets.sets[0].len(),
            clamped: sets.clamped,
        },
        train_k: Vec::new(),
        dev_k: Vec::new(),
        eval_pool: pool,
        eval_sets: sets.sets,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedTrainSet {
    pub tasks: BTreeSet<Task>,
    pub examples: Vec<PromptExample>,
    pub dev: Vec<PromptExample>,
}

impl MixedTrainSet {
    /// e.g. `ecrc+qa`
    pub fn name(&self) -> String {
        subset_name(&self.tasks)
    }
}

pub fn subset_name(tasks: &BTreeSet<Task>) -> String {
    tasks.iter().map(|t| t.as_str()).collect::<Vec<_>>().join("+")
}

/// Every non-empty subset of `tasks`, smallest first.
pub fn task_subsets(tasks: &BTreeSet<Task>) -> Vec<BTreeSet<Task>> {
    let items: Vec<Task> = tasks.iter().copied().collect();
    let mut out: Vec<BTreeSet<Task>> = (1u32..(1 << items.len()))
        .map(|mask| {
            items
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, t)| *t)
                .collect()
        })
        .collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

fn shuffled(mut v: Vec<PromptExample>, seed: u64, key: &str) -> Vec<PromptExample> {
    by_id(&mut v);
    v.shuffle(&mut derive_rng(seed, "mix", key));
    v
}

/// Concatenates the member tasks' train (and dev) sets and shuffles them
/// under `seed`.
pub fn mix_tasks(
    bundles: &BTreeMap<Task, SplitBundle>,
    subset: &BTreeSet<Task>,
    seed: u64,
) -> Result<MixedTrainSet, SplitError> {
    if subset.is_empty() {
        return Err(SplitError::EmptySubset);
    }
    let mut train = Vec::new();
    let mut dev = Vec::new();
    for t in subset {
        let b = bundles.get(t).ok_or(SplitError::MissingTask(*t))?;
        train.extend(b.train_k.iter().cloned());
        dev.extend(b.dev_k.iter().cloned());
    }
    let name = subset_name(subset);
    Ok(MixedTrainSet {
        tasks: subset.clone(),
        examples: shuffled(train, seed, &format!("{name}/train")),
        dev: shuffled(dev, seed, &format!("{name}/dev")),
    })
}
