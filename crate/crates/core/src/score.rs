//! Scoring prediction files against gold masks.
//!
//! Each mask carries a role (the name of its verbalizer). Pairs of
//! `(gold, predicted)` are pooled per role, so the two entity masks of an
//! EC+RC prompt are scored together and the relation mask separately.
//! The per-role metric is macro-F1 over the classes that occur as gold or
//! prediction; a run's combined score is the unweighted mean over roles.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datagen::PromptExample;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub example_id: String,
    /// Mask index (as a decimal string) → predicted class.
    pub predictions: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<serde_json::Value>,
}

impl PredictionRecord {
    pub fn new(example_id: impl Into<String>, predictions: impl IntoIterator<Item = (usize, String)>) -> Self {
        PredictionRecord {
            example_id: example_id.into(),
            predictions: predictions.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            metadata: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScoreError {
    #[error("no prediction for example {0}")]
    MissingPrediction(String),
    #[error("prediction for unknown example {0}")]
    UnknownExample(String),
    #[error("example {0} is predicted more than once")]
    DuplicatePrediction(String),
    #[error("example {example_id}: no prediction for mask {mask}")]
    MissingMask { example_id: String, mask: usize },
    #[error("example {example_id}: class `{class}` is not valid for mask {mask}")]
    InvalidClass {
        example_id: String,
        mask: usize,
        class: String,
    },
    #[error("no runs to aggregate")]
    EmptyRuns,
}

/// Counts indexed `[gold][predicted]` over `labels`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub role: String,
    pub labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    fn new(role: &str, labels: Vec<String>) -> Self {
        let n = labels.len();
        ConfusionMatrix {
            role: role.to_string(),
            labels,
            counts: vec![vec![0; n]; n],
        }
    }

    fn add(&mut self, gold: &str, pred: &str) {
        let g = self.position(gold).expect("gold label in matrix");
        let p = self.position(pred).expect("predicted label in matrix");
        self.counts[g][p] += 1;
    }

    fn position(&self, label: &str) -> Option<usize> {
        self.labels.binary_search_by(|l| l.as_str().cmp(label)).ok()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn get(&self, gold: &str, pred: &str) -> u64 {
        match (self.position(gold), self.position(pred)) {
            (Some(g), Some(p)) => self.counts[g][p],
            _ => 0,
        }
    }

    /// Per-class precision/recall/F1 for every class that occurs as a gold
    /// label or a prediction.
    pub fn class_scores(&self) -> Vec<ClassScore> {
        let n = self.labels.len();
        (0..n)
            .filter_map(|i| {
                let tp = self.counts[i][i];
                let support: u64 = self.counts[i].iter().sum();
                let predicted: u64 = (0..n).map(|g| self.counts[g][i]).sum();
                if support == 0 && predicted == 0 {
                    return None;
                }
                let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
                let precision = ratio(tp, predicted);
                let recall = ratio(tp, support);
                let f1 = if precision + recall == 0.0 {
                    0.0
                } else {
                    2.0 * precision * recall / (precision + recall)
                };
                Some(ClassScore {
                    class: self.labels[i].clone(),
                    precision,
                    recall,
                    f1,
                    support,
                    zero_division: predicted == 0 || support == 0,
                })
            })
            .collect()
    }

    pub fn macro_f1(&self) -> f64 {
        let scores = self.class_scores();
        if scores.is_empty() {
            return 0.0;
        }
        scores.iter().map(|c| c.f1).sum::<f64>() / scores.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassScore {
    pub class: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
    /// Precision or recall had an empty denominator and was scored as 0.
    pub zero_division: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoleScore {
    pub macro_f1: f64,
    pub pairs: u64,
    pub classes: Vec<ClassScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunScore {
    pub roles: BTreeMap<String, RoleScore>,
    pub combined: f64,
    pub zero_division: bool,
}

/// Validated `(gold, predicted)` pairs grouped by role, with each role's
/// label set.
struct Pairs<'a> {
    by_role: BTreeMap<&'a str, (BTreeSet<&'a str>, Vec<(&'a str, &'a str)>)>,
}

fn collect_pairs<'a>(eval_set: &'a [PromptExample], predictions: &'a [PredictionRecord]) -> Result<Pairs<'a>, ScoreError> {
    let mut index: HashMap<&str, &PredictionRecord> = HashMap::with_capacity(predictions.len());
    for p in predictions {
        if index.insert(&p.example_id, p).is_some() {
            return Err(ScoreError::DuplicatePrediction(p.example_id.clone()));
        }
    }
    let known: BTreeSet<&str> = eval_set.iter().map(|e| e.example_id.as_str()).collect();
    // report unknown ids in a stable order
    let mut unknown: Vec<&str> = index.keys().copied().filter(|id| !known.contains(id)).collect();
    unknown.sort_unstable();
    if let Some(id) = unknown.first() {
        return Err(ScoreError::UnknownExample(id.to_string()));
    }

    let mut by_role: BTreeMap<&str, (BTreeSet<&str>, Vec<(&str, &str)>)> = BTreeMap::new();
    for e in eval_set {
        let rec = index
            .get(e.example_id.as_str())
            .ok_or_else(|| ScoreError::MissingPrediction(e.example_id.clone()))?;
        for m in &e.rendered.masks {
            let entry = by_role.entry(m.role.as_str()).or_default();
            entry.0.extend(m.label_words.keys().map(String::as_str));
            let Some(gold) = m.gold.as_deref() else { continue };
            let pred = rec
                .predictions
                .get(&m.index.to_string())
                .ok_or_else(|| ScoreError::MissingMask {
                    example_id: e.example_id.clone(),
                    mask: m.index,
                })?;
            if !m.has_class(pred) {
                return Err(ScoreError::InvalidClass {
                    example_id: e.example_id.clone(),
                    mask: m.index,
                    class: pred.clone(),
                });
            }
            entry.1.push((gold, pred.as_str()));
        }
    }
    Ok(Pairs { by_role })
}

fn matrix(role: &str, labels: &BTreeSet<&str>, pairs: &[(&str, &str)]) -> ConfusionMatrix {
    let mut m = ConfusionMatrix::new(role, labels.iter().map(|s| s.to_string()).collect());
    for (g, p) in pairs {
        m.add(g, p);
    }
    m
}

/// Confusion matrix of one role. Unknown roles and empty eval sets give an
/// empty matrix.
pub fn confusion(
    eval_set: &[PromptExample],
    predictions: &[PredictionRecord],
    role: &str,
) -> Result<ConfusionMatrix, ScoreError> {
    let pairs = collect_pairs(eval_set, predictions)?;
    Ok(match pairs.by_role.get(role) {
        Some((labels, p)) => matrix(role, labels, p),
        None => ConfusionMatrix::new(role, Vec::new()),
    })
}

pub fn score_run(eval_set: &[PromptExample], predictions: &[PredictionRecord]) -> Result<RunScore, ScoreError> {
    let pairs = collect_pairs(eval_set, predictions)?;
    let mut roles = BTreeMap::new();
    for (role, (labels, p)) in &pairs.by_role {
        if p.is_empty() {
            continue;
        }
        let m = matrix(role, labels, p);
        roles.insert(
            role.to_string(),
            RoleScore {
                macro_f1: m.macro_f1(),
                pairs: m.total(),
                classes: m.class_scores(),
            },
        );
    }
    let combined = if roles.is_empty() {
        0.0
    } else {
        roles.values().map(|r| r.macro_f1).sum::<f64>() / roles.len() as f64
    };
    let zero_division = roles.values().flat_map(|r| &r.classes).any(|c| c.zero_division);
    Ok(RunScore {
        roles,
        combined,
        zero_division,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation (n − 1); 0 for a single run.
    pub std: f64,
    pub n: usize,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Option<Self> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        Some(MeanStd { mean, std, n })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub roles: BTreeMap<String, MeanStd>,
    pub combined: MeanStd,
    pub single_run: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub schema_version: u32,
    /// Free-form run description (task subset, K, seeds, ...).
    pub metadata: BTreeMap<String, serde_json::Value>,
    pub runs: Vec<RunScore>,
    pub aggregate: Aggregate,
}

pub fn aggregate(runs: Vec<RunScore>, metadata: BTreeMap<String, serde_json::Value>) -> Result<ScoreReport, ScoreError> {
    let combined: Vec<f64> = runs.iter().map(|r| r.combined).collect();
    let combined = MeanStd::of(&combined).ok_or(ScoreError::EmptyRuns)?;
    let mut per_role: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in &runs {
        for (role, s) in &r.roles {
            per_role.entry(role.clone()).or_default().push(s.macro_f1);
        }
    }
    let roles = per_role
        .into_iter()
        .filter_map(|(role, v)| MeanStd::of(&v).map(|m| (role, m)))
        .collect();
    Ok(ScoreReport {
        schema_version: REPORT_SCHEMA_VERSION,
        metadata,
        aggregate: Aggregate {
            roles,
            combined,
            single_run: runs.len() == 1,
        },
        runs,
    })
}

impl ScoreReport {
    /// Plain-text summary: one row per role plus the combined score.
    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<12} {:>10} {:>10} {:>5}", "role", "mean F1", "std", "runs");
        for (role, m) in &self.aggregate.roles {
            let _ = writeln!(s, "{:<12} {:>10.4} {:>10.4} {:>5}", role, m.mean, m.std, m.n);
        }
        let c = &self.aggregate.combined;
        let _ = writeln!(s, "{:<12} {:>10.4} {:>10.4} {:>5}", "combined", c.mean, c.std, c.n);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{Polarity, Provenance, Task, SCHEMA_VERSION};
    use crate::promptkit::{MaskSlot, RenderedPrompt};

    fn binary(id: &str, gold: &str) -> PromptExample {
        PromptExample {
            schema_version: SCHEMA_VERSION,
            example_id: id.into(),
            task: Task::Qa,
            polarity: if gold == "yes" { Polarity::Positive } else { Polarity::Negative },
            rendered: RenderedPrompt {
                text: String::new(),
                masks: vec![MaskSlot {
                    index: 1,
                    role: "answer".into(),
                    label_words: BTreeMap::from([("no".into(), "no".into()), ("yes".into(), "yes".into())]),
                    gold: Some(gold.into()),
                }],
            },
            provenance: Provenance {
                subject: id.into(),
                object: id.into(),
                source: "description".into(),
                mention_of: None,
            },
        }
    }

    fn pred(id: &str, class: &str) -> PredictionRecord {
        PredictionRecord::new(id, [(1, class.to_string())])
    }

    /// (gold, pred) pairs → eval set + predictions.
    fn instance(pairs: &[(&str, &str)]) -> (Vec<PromptExample>, Vec<PredictionRecord>) {
        pairs
            .iter()
            .enumerate()
            .map(|(i, (g, p))| (binary(&format!("{i:03}"), g), pred(&format!("{i:03}"), p)))
            .unzip()
    }

    #[test]
    fn perfect_predictions() {
        let (e, p) = instance(&[("yes", "yes"), ("no", "no"), ("yes", "yes")]);
        let s = score_run(&e, &p).unwrap();
        assert_eq!(s.roles["answer"].macro_f1, 1.0);
        assert_eq!(s.combined, 1.0);
        let m = confusion(&e, &p, "answer").unwrap();
        assert_eq!(m.counts, vec![vec![1, 0], vec![0, 2]]);
    }

    #[test]
    fn binary_closed_form() {
        // TP=3 FP=1 FN=2 TN=4 with "yes" positive:
        // F1(yes) = 2/3, F1(no) = 8/11, macro = 23/33
        let mut pairs = vec![("yes", "yes"); 3];
        pairs.push(("no", "yes"));
        pairs.extend([("yes", "no"); 2]);
        pairs.extend([("no", "no"); 4]);
        let (e, p) = instance(&pairs);
        let s = score_run(&e, &p).unwrap();
        assert!((s.roles["answer"].macro_f1 - 23.0 / 33.0).abs() < 1e-15);
    }

    #[test]
    fn majority_on_balanced_binary() {
        let (e, p) = instance(&[("yes", "yes"), ("yes", "yes"), ("no", "yes"), ("no", "yes")]);
        let s = score_run(&e, &p).unwrap();
        assert!((s.combined - 1.0 / 3.0).abs() < 1e-15);
        assert!(s.zero_division);
        let no = s.roles["answer"].classes.iter().find(|c| c.class == "no").unwrap();
        assert!(no.zero_division);
        assert_eq!(no.f1, 0.0);
    }

    #[test]
    fn hand_tallied_matrix() {
        let (e, p) = instance(&[
            ("yes", "yes"),
            ("yes", "no"),
            ("no", "no"),
            ("no", "yes"),
            ("no", "no"),
            ("yes", "yes"),
        ]);
        let m = confusion(&e, &p, "answer").unwrap();
        assert_eq!(m.labels, vec!["no", "yes"]);
        assert_eq!(m.get("no", "no"), 2);
        assert_eq!(m.get("no", "yes"), 1);
        assert_eq!(m.get("yes", "no"), 1);
        assert_eq!(m.get("yes", "yes"), 2);
        assert_eq!(m.total(), 6);
    }

    #[test]
    fn empty_eval_set() {
        let m = confusion(&[], &[], "answer").unwrap();
        assert_eq!(m.total(), 0);
        assert!(m.counts.is_empty());
    }

    #[test]
    fn protocol_errors() {
        let (e, mut p) = instance(&[("yes", "yes"), ("no", "no")]);
        let mut extra = p.clone();
        extra.push(pred("zzz", "yes"));
        assert_eq!(score_run(&e, &extra), Err(ScoreError::UnknownExample("zzz".into())));
        let mut dup = p.clone();
        dup.push(p[0].clone());
        assert!(matches!(score_run(&e, &dup), Err(ScoreError::DuplicatePrediction(_))));
        assert_eq!(
            score_run(&e, &p[..1]),
            Err(ScoreError::MissingPrediction("001".into()))
        );
        p[1] = pred("001", "maybe");
        assert!(matches!(score_run(&e, &p), Err(ScoreError::InvalidClass { .. })));
        p[1] = PredictionRecord::new("001", []);
        assert!(matches!(score_run(&e, &p), Err(ScoreError::MissingMask { mask: 1, .. })));
    }

    #[test]
    fn aggregate_cases() {
        let run = |v: f64| RunScore {
            roles: BTreeMap::new(),
            combined: v,
            zero_division: false,
        };
        let r = aggregate(vec![run(0.5); 9], BTreeMap::new()).unwrap();
        assert_eq!((r.aggregate.combined.mean, r.aggregate.combined.std), (0.5, 0.0));

        let r = aggregate(vec![run(0.4), run(0.6)], BTreeMap::new()).unwrap();
        assert!((r.aggregate.combined.mean - 0.5).abs() < 1e-15);
        // sqrt(((0.1)^2 + (0.1)^2) / 1) = sqrt(0.02)
        assert!((r.aggregate.combined.std - 0.02f64.sqrt()).abs() < 1e-15);
        assert!((r.aggregate.combined.std - 0.1414).abs() < 1e-4);

        let r = aggregate(vec![run(0.7)], BTreeMap::new()).unwrap();
        assert_eq!(r.aggregate.combined.std, 0.0);
        assert!(r.aggregate.single_run);

        assert_eq!(aggregate(vec![], BTreeMap::new()), Err(ScoreError::EmptyRuns));
    }

    #[test]
    fn roles_pool_masks() {
        // two masks sharing the "entity" role are pooled
        let mut e = binary("a", "yes");
        let entity = |index, gold: &str| MaskSlot {
            index,
            role: "entity".into(),
            label_words: BTreeMap::from([("Occupation".into(), "occupation".into()), ("Skill".into(), "skill".into())]),
            gold: Some(gold.into()),
        };
        e.rendered.masks = vec![entity(1, "Skill"), entity(2, "Occupation")];
        let p = PredictionRecord::new("a", [(1, "Skill".to_string()), (2, "Skill".to_string())]);
        let s = score_run(&[e], &[p]).unwrap();
        assert_eq!(s.roles.len(), 1);
        assert_eq!(s.roles["entity"].pairs, 2);
        // Skill: P=1/2 R=1 F1=2/3; Occupation: F1=0
        assert!((s.roles["entity"].macro_f1 - 1.0 / 3.0).abs() < 1e-15);
    }
}
