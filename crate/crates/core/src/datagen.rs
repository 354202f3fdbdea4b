//! Dataset generation from a frozen taxonomy.
//!
//! * EC+RC: one prompt per skill → occupation triple, typing both entities
//!   and classifying the relation. Positives only.
//! * EL: one positive per (entity, alternative label); negatives pair an
//!   entity with a mention taken from a different entity.
//! * QA: yes/no question whether a description describes an entity;
//!   negatives use another entity's description.
//!
//! Negatives are drawn by keyed rejection sampling: the generator for the
//! j-th negative is derived from `(seed, base example, j)`, and a candidate
//! is rejected when it was already drawn or its text states something true
//! of any entity (including one that merely shares a label with the base).
//! The returned list is sorted by `example_id`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::promptkit::{EcrcStyle, PresetError, Presets, RenderedPrompt, TaskPrompt, TemplateError};
use crate::seed::{content_id, derive_rng};
use crate::taxonomy::{Entity, EntityKind, Taxonomy};

pub const SCHEMA_VERSION: u32 = 1;

/// Rejection attempts before falling back to enumerating every valid pair.
const MAX_REJECTIONS: usize = 64;

pub const ALTERNATIVE_LABEL: &str = "alternativeLabel";
pub const NO_ALTERNATIVE_LABEL: &str = "noAlternativeLabel";
pub const YES: &str = "yes";
pub const NO: &str = "no";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    EcRc,
    El,
    Qa,
}

impl Task {
    pub const ALL: [Task; 3] = [Task::EcRc, Task::El, Task::Qa];

    pub fn as_str(self) -> &'static str {
        match self {
            Task::EcRc => "ecrc",
            Task::El => "el",
            Task::Qa => "qa",
        }
    }

    /// Mask whose gold class is used for stratified sampling.
    pub fn class_mask(self) -> usize {
        match self {
            Task::EcRc => 2,
            Task::El | Task::Qa => 1,
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ecrc" | "ec+rc" => Ok(Task::EcRc),
            "el" => Ok(Task::El),
            "qa" => Ok(Task::Qa),
            other => Err(format!("unknown task `{other}` (expected ecrc, el or qa)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    fn as_str(self) -> &'static str {
        match self {
            Polarity::Positive => "positive",
            Polarity::Negative => "negative",
        }
    }
}

/// Which taxonomy facts an example was built from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    /// Entity id: the skill (EC+RC) or the linked/described entity.
    pub subject: String,
    /// Occupation id (EC+RC), mention text (EL) or id of the entity whose
    /// description is used (QA).
    pub object: String,
    /// Relation name, `altLabel`, `preferredLabel` or `description`.
    pub source: String,
    /// EL only: entity the mention belongs to.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mention_of: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptExample {
    pub schema_version: u32,
    pub example_id: String,
    pub task: Task,
    pub polarity: Polarity,
    #[serde(flatten)]
    pub rendered: RenderedPrompt,
    pub provenance: Provenance,
}

impl PromptExample {
    /// Gold class of the stratification mask (relation for EC+RC, the
    /// single mask otherwise).
    pub fn class(&self) -> Option<&str> {
        self.rendered.gold(self.task.class_mask())
    }

    /// Taxonomy entity ids this example mentions.
    pub fn entity_ids(&self) -> BTreeSet<&str> {
        let p = &self.provenance;
        let mut ids = BTreeSet::from([p.subject.as_str()]);
        match self.task {
            Task::EcRc | Task::Qa => {
                ids.insert(p.object.as_str());
            }
            Task::El => {}
        }
        if let Some(owner) = &p.mention_of {
            ids.insert(owner.as_str());
        }
        ids
    }
}

/// Number of negatives per positive, as an exact fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NegativeRatio {
    num: u64,
    den: u64,
}

impl NegativeRatio {
    pub const ONE: NegativeRatio = NegativeRatio { num: 1, den: 1 };

    pub fn new(num: u64, den: u64) -> Result<Self, String> {
        if num == 0 || den == 0 {
            return Err(format!("negative ratio {num}/{den} must be > 0"));
        }
        Ok(NegativeRatio { num, den })
    }

    /// `round(ratio × positives)`, halves rounding up.
    pub fn count(self, positives: usize) -> usize {
        let n = positives as u128;
        ((2 * self.num as u128 * n + self.den as u128) / (2 * self.den as u128)) as usize
    }
}

impl Default for NegativeRatio {
    fn default() -> Self {
        NegativeRatio::ONE
    }
}

impl fmt::Display for NegativeRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for NegativeRatio {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |t: &str| t.trim().parse::<u64>().map_err(|e| format!("bad ratio `{s}`: {e}"));
        match s.split_once('/') {
            Some((n, d)) => NegativeRatio::new(parse(n)?, parse(d)?),
            None => NegativeRatio::new(parse(s)?, 1),
        }
    }
}

impl Serialize for NegativeRatio {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for NegativeRatio {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(n) => NegativeRatio::new(n, 1),
            Raw::Str(s) => s.parse(),
        }
        .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenConfig {
    pub seed: u64,
    #[serde(default)]
    pub qa_positive_count: Option<usize>,
    #[serde(default)]
    pub el_include_preferred_label_synonyms: bool,
    #[serde(default)]
    pub negative_ratio: NegativeRatio,
    #[serde(default)]
    pub ecrc_style: EcrcStyle,
}

impl GenConfig {
    pub fn new(seed: u64) -> Self {
        GenConfig {
            seed,
            qa_positive_count: None,
            el_include_preferred_label_synonyms: false,
            negative_ratio: NegativeRatio::ONE,
            ecrc_style: EcrcStyle::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum DatagenError {
    #[error("entity linking needs at least two entities with alternative labels, found {0}")]
    InsufficientEntitiesForNegatives(usize),
    #[error("no entity has a description")]
    NoDescriptions,
    #[error("question answering negatives need at least two distinct descriptions, found {0}")]
    InsufficientDescriptionsForNegatives(usize),
    #[error("{task}: {needed} negatives requested but only {available} valid negative pairs exist")]
    InsufficientNegatives {
        task: Task,
        needed: usize,
        available: usize,
    },
    #[error(transparent)]
    Preset(#[from] PresetError),
    #[error("rendering failed: {0}")]
    Render(#[from] TemplateError),
}

struct Renderer<'p> {
    task: Task,
    prompt: &'p TaskPrompt,
    template_src: String,
}

impl<'p> Renderer<'p> {
    fn new(task: Task, prompt: &'p TaskPrompt) -> Self {
        Renderer {
            task,
            prompt,
            template_src: prompt.template.to_string(),
        }
    }

    fn example(
        &self,
        polarity: Polarity,
        bindings: &[(&str, &str)],
        golds: &[(usize, &str)],
        provenance: Provenance,
    ) -> Result<PromptExample, DatagenError> {
        let bindings: BTreeMap<String, String> =
            bindings.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        let golds: BTreeMap<usize, String> = golds.iter().map(|(k, v)| (*k, v.to_string())).collect();
        let rendered = self
            .prompt
            .template
            .render(&bindings, &self.prompt.space_refs(), &golds)?;
        let example_id = content_id(&[
            self.task.as_str(),
            &self.prompt.preset,
            &self.template_src,
            polarity.as_str(),
            &provenance.subject,
            &provenance.object,
            &provenance.source,
            provenance.mention_of.as_deref().unwrap_or(""),
        ]);
        Ok(PromptExample {
            schema_version: SCHEMA_VERSION,
            example_id,
            task: self.task,
            polarity,
            rendered,
            provenance,
        })
    }
}

fn sorted(mut v: Vec<PromptExample>) -> Vec<PromptExample> {
    v.sort_by(|a, b| a.example_id.cmp(&b.example_id));
    v
}

/// Entity + relation classification prompts, one per stored triple.
pub fn gen_ecrc(taxonomy: &Taxonomy, presets: &Presets, config: &GenConfig) -> Result<Vec<PromptExample>, DatagenError> {
    let prompt = presets.ecrc(config.ecrc_style)?;
    let r = Renderer::new(Task::EcRc, &prompt);
    let mut out = Vec::new();
    for t in taxonomy.triples() {
        let (Some(skill), Some(occupation)) = (taxonomy.entity(&t.subject), taxonomy.entity(&t.object)) else {
            unreachable!("frozen taxonomy triples resolve");
        };
        out.push(r.example(
            Polarity::Positive,
            &[
                ("skill", &skill.preferred_label),
                ("occupation", &occupation.preferred_label),
            ],
            &[
                (1, EntityKind::Skill.as_str()),
                (2, t.predicate.as_str()),
                (3, EntityKind::Occupation.as_str()),
            ],
            Provenance {
                subject: t.subject.clone(),
                object: t.object.clone(),
                source: t.predicate.as_str().to_string(),
                mention_of: None,
            },
        )?);
    }
    Ok(sorted(out))
}

/// Picks negatives for a list of bases. `candidates(base)` lists every
/// admissible candidate for a base in a fixed order; `valid(base, cand)`
/// is the rejection test used for fast random draws over `pool`.
///
/// The j-th negative is drawn with a generator keyed on `(seed, key(base_j), j)`
/// where `base_j = bases[j % bases.len()]`. A candidate is accepted when it
/// is valid and the `(base, candidate)` pair has not been drawn before. If
/// rejection sampling fails, every unused valid pair for that base is
/// enumerated; if the base has none left, every unused valid pair over all
/// bases is enumerated instead.
struct NegativeSampler<'a, B, C> {
    seed: u64,
    domain: &'static str,
    bases: &'a [B],
    pool: &'a [C],
}

impl<'a, B, C> NegativeSampler<'a, B, C> {
    fn sample<K, V, P>(&self, needed: usize, key: K, valid: V, pair_key: P) -> Option<Vec<(usize, usize)>>
    where
        K: Fn(&B) -> String,
        V: Fn(&B, &C) -> bool,
        P: Fn(&B, &C) -> (String, String),
    {
        let mut used: BTreeSet<(String, String)> = BTreeSet::new();
        let mut picks = Vec::with_capacity(needed);
        if self.pool.is_empty() || self.bases.is_empty() {
            return if needed == 0 { Some(picks) } else { None };
        }
        for j in 0..needed {
            let bi = j % self.bases.len();
            let base = &self.bases[bi];
            let mut rng = derive_rng(self.seed, self.domain, &format!("{}\u{1f}{j}", key(base)));
            let mut chosen = None;
            for _ in 0..MAX_REJECTIONS {
                let ci = rng.random_range(0..self.pool.len());
                let c = &self.pool[ci];
                if valid(base, c) && !used.contains(&pair_key(base, c)) {
                    chosen = Some((bi, ci));
                    break;
                }
            }
            if chosen.is_none() {
                let open: Vec<usize> = (0..self.pool.len())
                    .filter(|&ci| {
                        let c = &self.pool[ci];
                        valid(base, c) && !used.contains(&pair_key(base, c))
                    })
                    .collect();
                if !open.is_empty() {
                    chosen = Some((bi, open[rng.random_range(0..open.len())]));
                }
            }
            if chosen.is_none() {
                let open: Vec<(usize, usize)> = (0..self.bases.len())
                    .flat_map(|b| (0..self.pool.len()).map(move |c| (b, c)))
                    .filter(|&(b, c)| {
                        let (base, cand) = (&self.bases[b], &self.pool[c]);
                        valid(base, cand) && !used.contains(&pair_key(base, cand))
                    })
                    .collect();
                if !open.is_empty() {
                    chosen = Some(open[rng.random_range(0..open.len())]);
                }
            }
            let (b, c) = chosen?;
            used.insert(pair_key(&self.bases[b], &self.pool[c]));
            picks.push((b, c));
        }
        Some(picks)
    }
}

/// Entity linking prompts: `e [MASK] m`.
pub fn gen_el(taxonomy: &Taxonomy, presets: &Presets, config: &GenConfig) -> Result<Vec<PromptExample>, DatagenError> {
    let prompt = presets.el()?;
    let r = Renderer::new(Task::El, &prompt);
    let linked: Vec<&Entity> = taxonomy.entities().filter(|e| !e.alt_labels.is_empty()).collect();
    if linked.len() < 2 {
        return Err(DatagenError::InsufficientEntitiesForNegatives(linked.len()));
    }

    // (entity, surface shown for the entity, mention, source)
    let mut positives: Vec<(&Entity, &str, &str, &str)> = Vec::new();
    for e in &linked {
        for alt in &e.alt_labels {
            positives.push((e, &e.preferred_label, alt, "altLabel"));
        }
        if config.el_include_preferred_label_synonyms {
            positives.push((e, &e.alt_labels[0], &e.preferred_label, "preferredLabel"));
        }
    }

    let mut out = Vec::new();
    for &(e, surface, mention, source) in &positives {
        out.push(r.example(
            Polarity::Positive,
            &[("entity", surface), ("mention", mention)],
            &[(1, ALTERNATIVE_LABEL)],
            Provenance {
                subject: e.id.clone(),
                object: mention.to_string(),
                source: source.to_string(),
                mention_of: None,
            },
        )?);
    }

    // Mentions to re-pair: every alternative label with its owner.
    let pool: Vec<(&str, &Entity)> = linked
        .iter()
        .flat_map(|e| e.alt_labels.iter().map(move |m| (m.as_str(), *e)))
        .collect();
    let bases: Vec<&Entity> = positives.iter().map(|p| p.0).collect();
    let needed = config.negative_ratio.count(positives.len());
    let owners = LabelOwners::new(taxonomy);
    // "e is a synonym for m" is true when any entity carries both labels.
    let valid = |e: &&Entity, (m, _): &(&str, &Entity)| !owners.share_owner(&e.preferred_label, owners.of(m));
    let pair_key = |e: &&Entity, (m, _): &(&str, &Entity)| (e.id.clone(), m.to_string());
    let sampler = NegativeSampler {
        seed: config.seed,
        domain: "el-negative",
        bases: &bases,
        pool: &pool,
    };
    let picks = sampler
        .sample(needed, |e| e.id.clone(), valid, pair_key)
        .ok_or_else(|| DatagenError::InsufficientNegatives {
            task: Task::El,
            needed,
            available: count_valid(&bases, &pool, valid, pair_key),
        })?;
    for (b, c) in picks {
        let e = bases[b];
        let (mention, owner) = pool[c];
        out.push(r.example(
            Polarity::Negative,
            &[("entity", &e.preferred_label), ("mention", mention)],
            &[(1, NO_ALTERNATIVE_LABEL)],
            Provenance {
                subject: e.id.clone(),
                object: mention.to_string(),
                source: "altLabel".into(),
                mention_of: Some(owner.id.clone()),
            },
        )?);
    }
    Ok(sorted(out))
}

/// Label text → ids of the entities carrying it (preferred or alternative).
struct LabelOwners<'t> {
    owners: BTreeMap<&'t str, BTreeSet<&'t str>>,
}

impl<'t> LabelOwners<'t> {
    fn new(taxonomy: &'t Taxonomy) -> Self {
        let mut owners: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for e in taxonomy.entities() {
            for l in std::iter::once(&e.preferred_label).chain(&e.alt_labels) {
                owners.entry(l.as_str()).or_default().insert(e.id.as_str());
            }
        }
        LabelOwners { owners }
    }

    fn of(&self, label: &str) -> Option<&BTreeSet<&'t str>> {
        self.owners.get(label)
    }

    /// True when some entity carries `label` and is also in `ids`.
    fn share_owner(&self, label: &str, ids: Option<&BTreeSet<&str>>) -> bool {
        match (self.owners.get(label), ids) {
            (Some(a), Some(b)) => !a.is_disjoint(b),
            _ => false,
        }
    }
}

fn count_valid<B, C>(
    bases: &[B],
    pool: &[C],
    valid: impl Fn(&B, &C) -> bool,
    pair_key: impl Fn(&B, &C) -> (String, String),
) -> usize {
    let mut pairs = BTreeSet::new();
    for b in bases {
        for c in pool {
            if valid(b, c) {
                pairs.insert(pair_key(b, c));
            }
        }
    }
    pairs.len()
}

/// Instruction-prefixed yes/no questions over entity descriptions.
pub fn gen_qa(taxonomy: &Taxonomy, presets: &Presets, config: &GenConfig) -> Result<Vec<PromptExample>, DatagenError> {
    let prompt = presets.qa()?;
    let r = Renderer::new(Task::Qa, &prompt);
    let described: Vec<(&Entity, &str)> = taxonomy
        .entities()
        .filter_map(|e| e.description.as_deref().map(|d| (e, d)))
        .collect();
    if described.is_empty() {
        return Err(DatagenError::NoDescriptions);
    }
    let distinct: BTreeSet<&str> = described.iter().map(|(_, d)| *d).collect();
    if distinct.len() < 2 {
        return Err(DatagenError::InsufficientDescriptionsForNegatives(distinct.len()));
    }

    let positives: Vec<(&Entity, &str)> = match config.qa_positive_count {
        Some(cap) if cap < described.len() => {
            let mut rng = derive_rng(config.seed, "qa-positive", "");
            let mut idx = index::sample(&mut rng, described.len(), cap).into_vec();
            idx.sort_unstable();
            idx.into_iter().map(|i| described[i]).collect()
        }
        _ => described.clone(),
    };

    let mut out = Vec::new();
    for &(e, d) in &positives {
        out.push(r.example(
            Polarity::Positive,
            &[("description", d), ("entity", &e.preferred_label)],
            &[(1, YES)],
            Provenance {
                subject: e.id.clone(),
                object: e.id.clone(),
                source: "description".into(),
                mention_of: None,
            },
        )?);
    }

    let needed = config.negative_ratio.count(positives.len());
    let owners = LabelOwners::new(taxonomy);
    let mut by_description: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for (e, d) in &described {
        by_description.entry(d).or_default().insert(&e.id);
    }
    // "Does d describe e?" is true when an entity labelled like e has d.
    let valid = |(e, _): &(&Entity, &str), (_, d): &(&Entity, &str)| {
        !owners.share_owner(&e.preferred_label, by_description.get(d))
    };
    let pair_key = |(e, _): &(&Entity, &str), (other, _): &(&Entity, &str)| (e.id.clone(), other.id.clone());
    let sampler = NegativeSampler {
        seed: config.seed,
        domain: "qa-negative",
        bases: &positives,
        pool: &described,
    };
    let picks = sampler
        .sample(needed, |(e, _)| e.id.clone(), valid, pair_key)
        .ok_or_else(|| DatagenError::InsufficientNegatives {
            task: Task::Qa,
            needed,
            available: count_valid(&positives, &described, valid, pair_key),
        })?;
    for (b, c) in picks {
        let (e, _) = positives[b];
        let (other, d) = described[c];
        out.push(r.example(
            Polarity::Negative,
            &[("description", d), ("entity", &e.preferred_label)],
            &[(1, NO)],
            Provenance {
                subject: e.id.clone(),
                object: other.id.clone(),
                source: "description".into(),
                mention_of: None,
            },
        )?);
    }
    Ok(sorted(out))
}

pub fn generate(
    task: Task,
    taxonomy: &Taxonomy,
    presets: &Presets,
    config: &GenConfig,
) -> Result<Vec<PromptExample>, DatagenError> {
    match task {
        Task::EcRc => gen_ecrc(taxonomy, presets, config),
        Task::El => gen_el(taxonomy, presets, config),
        Task::Qa => gen_qa(taxonomy, presets, config),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub total: usize,
    pub positive: usize,
    pub negative: usize,
    /// Count per stratification class.
    pub by_class: BTreeMap<String, usize>,
}

pub fn dataset_stats(examples: &[PromptExample]) -> DatasetStats {
    let mut s = DatasetStats::default();
    for e in examples {
        s.total += 1;
        match e.polarity {
            Polarity::Positive => s.positive += 1,
            Polarity::Negative => s.negative += 1,
        }
        let class = e.class().unwrap_or("").to_string();
        *s.by_class.entry(class).or_default() += 1;
    }
    s
}
