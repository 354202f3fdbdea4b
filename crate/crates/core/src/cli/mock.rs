//! Stand-in predictors used to exercise the scoring path without a model.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use serde::{Deserialize, Serialize};

use crate::datagen::PromptExample;
use crate::score::PredictionRecord;
use crate::seed::derive_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum MockPolicy {
    GoldOracle,
    /// Most frequent gold class per mask within the set (ties → smallest).
    MajorityClass,
    UniformRandom { seed: u64 },
}

impl MockPolicy {
    pub fn name(self) -> &'static str {
        match self {
            MockPolicy::GoldOracle => "gold_oracle",
            MockPolicy::MajorityClass => "majority_class",
            MockPolicy::UniformRandom { .. } => "uniform_random",
        }
    }

    /// Builds a policy from its CLI name; `seed` is only used by
    /// `uniform_random`.
    pub fn from_name(name: &str, seed: u64) -> Result<Self, String> {
        match name {
            "gold_oracle" => Ok(MockPolicy::GoldOracle),
            "majority_class" => Ok(MockPolicy::MajorityClass),
            "uniform_random" => Ok(MockPolicy::UniformRandom { seed }),
            other => Err(format!(
                "unknown policy `{other}` (expected gold_oracle, majority_class or uniform_random)"
            )),
        }
    }
}

impl fmt::Display for MockPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MockPolicy::UniformRandom { seed } => write!(f, "uniform_random(seed={seed})"),
            p => f.write_str(p.name()),
        }
    }
}

impl FromStr for MockPolicy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        MockPolicy::from_name(s, 0)
    }
}

fn majority(eval_set: &[PromptExample]) -> BTreeMap<usize, String> {
    let mut counts: BTreeMap<usize, BTreeMap<&str, usize>> = BTreeMap::new();
    for e in eval_set {
        for m in &e.rendered.masks {
            if let Some(g) = &m.gold {
                *counts.entry(m.index).or_default().entry(g).or_default() += 1;
            }
        }
    }
    counts
        .into_iter()
        .filter_map(|(mask, c)| {
            // BTreeMap iterates classes in ascending order; keep the first max
            let best = c.iter().fold(None::<(&str, usize)>, |acc, (k, v)| match acc {
                Some((_, bv)) if bv >= *v => acc,
                _ => Some((k, *v)),
            });
            best.map(|(k, _)| (mask, k.to_string()))
        })
        .collect()
}

pub fn mock_predict(eval_set: &[PromptExample], policy: MockPolicy) -> Vec<PredictionRecord> {
    let majority = match policy {
        MockPolicy::MajorityClass => majority(eval_set),
        _ => BTreeMap::new(),
    };
    eval_set
        .iter()
        .map(|e| {
            let preds = e.rendered.masks.iter().filter_map(|m| {
                let class = match policy {
                    MockPolicy::GoldOracle => m.gold.clone()?,
                    MockPolicy::MajorityClass => majority.get(&m.index)?.clone(),
                    MockPolicy::UniformRandom { seed } => {
                        let classes: Vec<&String> = m.label_words.keys().collect();
                        let mut rng = derive_rng(seed, "mock", &format!("{}/{}", e.example_id, m.index));
                        (*classes.choose(&mut rng)?).clone()
                    }
                };
                Some((m.index, class))
            });
            PredictionRecord::new(e.example_id.clone(), preds)
        })
        .collect()
}
