//! Validated in-memory store of skill/occupation entities and the
//! skill-to-occupation relations between them.
//!
//! A [`TaxonomyBuilder`] accepts entities and triples one at a time and
//! rejects anything that would break the store invariants. Calling
//! [`TaxonomyBuilder::freeze`] yields an immutable [`Taxonomy`] that the
//! generators read from. All enumerations are ordered by id so that every
//! downstream artifact is byte-reproducible.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EntityKind {
    Skill,
    Occupation,
}

impl EntityKind {
    /// Class label used for the entity-typing masks.
    pub fn as_str(self) -> &'static str {
        match self {
            EntityKind::Skill => "Skill",
            EntityKind::Occupation => "Occupation",
        }
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntityKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Skill" => Ok(EntityKind::Skill),
            "Occupation" => Ok(EntityKind::Occupation),
            other => Err(format!("unknown entity kind `{other}`")),
        }
    }
}

/// Non-hierarchical skill → occupation relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RelationKind {
    #[serde(rename = "isEssentialFor")]
    IsEssentialFor,
    #[serde(rename = "isOptionalFor")]
    IsOptionalFor,
}

impl RelationKind {
    pub const ALL: [RelationKind; 2] = [RelationKind::IsEssentialFor, RelationKind::IsOptionalFor];

    pub fn as_str(self) -> &'static str {
        match self {
            RelationKind::IsEssentialFor => "isEssentialFor",
            RelationKind::IsOptionalFor => "isOptionalFor",
        }
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RelationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "isEssentialFor" => Ok(RelationKind::IsEssentialFor),
            "isOptionalFor" => Ok(RelationKind::IsOptionalFor),
            other => Err(format!("unknown relation `{other}`")),
        }
    }
}

/// Also the canonical JSONL entity record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Entity {
    pub id: String,
    pub kind: EntityKind,
    pub preferred_label: String,
    #[serde(default)]
    pub alt_labels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

impl Entity {
    pub fn new(id: impl Into<String>, kind: EntityKind, preferred_label: impl Into<String>) -> Self {
        Entity {
            id: id.into(),
            kind,
            preferred_label: preferred_label.into(),
            alt_labels: Vec::new(),
            description: None,
        }
    }

    pub fn skill(id: impl Into<String>, label: impl Into<String>) -> Self {
        Entity::new(id, EntityKind::Skill, label)
    }

    pub fn occupation(id: impl Into<String>, label: impl Into<String>) -> Self {
        Entity::new(id, EntityKind::Occupation, label)
    }

    pub fn with_alt_labels<I, S>(mut self, labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.alt_labels = labels.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        self.description = Some(description.into());
        self
    }

    /// Trims labels, drops empty or repeated alt labels and alt labels equal
    /// to the preferred label. Returns the alt labels that were dropped.
    ///
    /// Alt label order is preserved apart from the removals. An all-blank
    /// description becomes `None`.
    pub fn normalize(&mut self) -> Vec<String> {
        self.id = self.id.trim().to_string();
        self.preferred_label = self.preferred_label.trim().to_string();
        let mut seen = BTreeSet::new();
        seen.insert(self.preferred_label.clone());
        let mut dropped = Vec::new();
        let mut kept = Vec::with_capacity(self.alt_labels.len());
        for raw in self.alt_labels.drain(..) {
            let label = raw.trim().to_string();
            if label.is_empty() {
                continue;
            }
            if seen.insert(label.clone()) {
                kept.push(label);
            } else {
                dropped.push(label);
            }
        }
        self.alt_labels = kept;
        if let Some(d) = &self.description {
            let d = d.trim();
            self.description = if d.is_empty() { None } else { Some(d.to_string()) };
        }
        dropped
    }

    /// True when `text` is this entity's preferred label or one of its alt labels.
    pub fn has_label(&self, text: &str) -> bool {
        self.preferred_label == text || self.alt_labels.iter().any(|l| l == text)
    }
}

/// Also the canonical JSONL relation record.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Triple {
    pub subject: String,
    pub predicate: RelationKind,
    pub object: String,
}

impl Triple {
    pub fn new(subject: impl Into<String>, predicate: RelationKind, object: impl Into<String>) -> Self {
        Triple {
            subject: subject.into(),
            predicate,
            object: object.into(),
        }
    }

    fn sort_key(&self) -> (&str, &str, RelationKind) {
        (&self.subject, &self.object, self.predicate)
    }
}

// Canonical order: subject id, then object id, then predicate.
impl Ord for Triple {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl PartialOrd for Triple {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaxonomyStats {
    pub n_skills: usize,
    pub n_occupations: usize,
    pub n_essential: usize,
    pub n_optional: usize,
    pub n_alt_labels: usize,
    pub n_descriptions: usize,
}

impl TaxonomyStats {
    pub fn n_triples(&self) -> usize {
        self.n_essential + self.n_optional
    }
}

impl fmt::Display for TaxonomyStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<16}{:>10}", "# skills", self.n_skills)?;
        writeln!(f, "{:<16}{:>10}", "# occupations", self.n_occupations)?;
        writeln!(f, "{:<16}{:>10}", "# essential", self.n_essential)?;
        writeln!(f, "{:<16}{:>10}", "# optional", self.n_optional)?;
        writeln!(f, "{:<16}{:>10}", "# altlabels", self.n_alt_labels)?;
        write!(f, "{:<16}{:>10}", "# descriptions", self.n_descriptions)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TaxonomyError {
    #[error("duplicate entity id `{0}`")]
    DuplicateId(String),
    #[error("entity `{0}` has an empty preferred label")]
    EmptyLabel(String),
    #[error("entity id is empty")]
    EmptyId,
    #[error("unknown entity `{0}`")]
    UnknownEntity(String),
    #[error("{role} `{id}` is a {found}, expected a {expected}")]
    KindMismatch {
        role: &'static str,
        id: String,
        expected: EntityKind,
        found: EntityKind,
    },
    #[error("duplicate triple ({0}, {1}, {2})")]
    DuplicateTriple(String, RelationKind, String),
}

#[derive(Debug, Default, Clone)]
struct Store {
    entities: BTreeMap<String, Entity>,
    triples: BTreeSet<Triple>,
}

impl Store {
    fn query_triples(&self, filter: Option<RelationKind>) -> Vec<Triple> {
        self.triples
            .iter()
            .filter(|t| filter.is_none_or(|p| t.predicate == p))
            .cloned()
            .collect()
    }

    fn stats(&self) -> TaxonomyStats {
        let mut s = TaxonomyStats::default();
        for e in self.entities.values() {
            match e.kind {
                EntityKind::Skill => s.n_skills += 1,
                EntityKind::Occupation => s.n_occupations += 1,
            }
            s.n_alt_labels += e.alt_labels.len();
            if e.description.is_some() {
                s.n_descriptions += 1;
            }
        }
        for t in &self.triples {
            match t.predicate {
                RelationKind::IsEssentialFor => s.n_essential += 1,
                RelationKind::IsOptionalFor => s.n_optional += 1,
            }
        }
        s
    }
}

/// Single-writer ingestion stage of the store.
#[derive(Debug, Default, Clone)]
pub struct TaxonomyBuilder {
    store: Store,
}

impl TaxonomyBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an entity after normalizing it (see [`Entity::normalize`]).
    /// Returns the alt labels dropped during normalization.
    pub fn add_entity(&mut self, mut entity: Entity) -> Result<Vec<String>, TaxonomyError> {
        let dropped = entity.normalize();
        if entity.id.is_empty() {
            return Err(TaxonomyError::EmptyId);
        }
        if entity.preferred_label.is_empty() {
            return Err(TaxonomyError::EmptyLabel(entity.id));
        }
        if self.store.entities.contains_key(&entity.id) {
            return Err(TaxonomyError::DuplicateId(entity.id));
        }
        self.store.entities.insert(entity.id.clone(), entity);
        Ok(dropped)
    }

    pub fn add_relation(&mut self, triple: Triple) -> Result<(), TaxonomyError> {
        self.check_endpoint("subject", &triple.subject, EntityKind::Skill)?;
        self.check_endpoint("object", &triple.object, EntityKind::Occupation)?;
        if self.store.triples.contains(&triple) {
            return Err(TaxonomyError::DuplicateTriple(
                triple.subject,
                triple.predicate,
                triple.object,
            ));
        }
        self.store.triples.insert(triple);
        Ok(())
    }

    fn check_endpoint(&self, role: &'static str, id: &str, expected: EntityKind) -> Result<(), TaxonomyError> {
        let entity = self
            .store
            .entities
            .get(id)
            .ok_or_else(|| TaxonomyError::UnknownEntity(id.to_string()))?;
        if entity.kind != expected {
            return Err(TaxonomyError::KindMismatch {
                role,
                id: id.to_string(),
                expected,
                found: entity.kind,
            });
        }
        Ok(())
    }

    pub fn contains_entity(&self, id: &str) -> bool {
        self.store.entities.contains_key(id)
    }

    pub fn query_triples(&self, filter: Option<RelationKind>) -> Vec<Triple> {
        self.store.query_triples(filter)
    }

    pub fn stats(&self) -> TaxonomyStats {
        self.store.stats()
    }

    pub fn freeze(self) -> Taxonomy {
        Taxonomy { store: self.store }
    }
}

/// Sealed, read-only taxonomy. `Send + Sync`, so it can be shared by
/// reference across reader threads.
#[derive(Debug, Default, Clone)]
pub struct Taxonomy {
    store: Store,
}

impl Taxonomy {
    pub fn builder() -> TaxonomyBuilder {
        TaxonomyBuilder::new()
    }

    pub fn entity(&self, id: &str) -> Option<&Entity> {
        self.store.entities.get(id)
    }

    /// Entities in id order.
    pub fn entities(&self) -> impl Iterator<Item = &Entity> {
        self.store.entities.values()
    }

    /// Triples in canonical order (subject id, object id, predicate),
    /// optionally restricted to one relation kind.
    pub fn query_triples(&self, filter: Option<RelationKind>) -> Vec<Triple> {
        self.store.query_triples(filter)
    }

    pub fn triples(&self) -> impl Iterator<Item = &Triple> {
        self.store.triples.iter()
    }

    pub fn stats(&self) -> TaxonomyStats {
        self.store.stats()
    }

    pub fn len(&self) -> usize {
        self.store.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.store.entities.is_empty()
    }
}

impl PartialEq for Taxonomy {
    fn eq(&self, other: &Self) -> bool {
        self.store.entities == other.store.entities && self.store.triples == other.store.triples
    }
}

impl Eq for Taxonomy {}
