//! Loading taxonomies from disk.
//!
//! Two sources are supported: the canonical JSONL interchange format (one
//! entity or relation object per line) and ESCO-style CSV exports whose
//! layout is described by a [`ColumnMap`]. Both paths run the same
//! validation and produce a [`ValidationReport`] that points at the
//! offending record for every problem found.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jsonl::{self, JsonlError};
use crate::taxonomy::{Entity, EntityKind, RelationKind, Taxonomy, TaxonomyBuilder, TaxonomyError, TaxonomyStats, Triple};

pub const ENTITIES_FILE: &str = "entities.jsonl";
pub const RELATIONS_FILE: &str = "relations.jsonl";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoadMode {
    /// Any error fails the load.
    #[default]
    Strict,
    /// Bad records are dropped and reported as warnings.
    Permissive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueKind {
    Parse,
    DuplicateId,
    EmptyId,
    EmptyLabel,
    UnknownEntity,
    KindMismatch,
    DuplicateTriple,
    UnknownRelationType,
    DuplicateAltLabel,
}

impl From<&TaxonomyError> for IssueKind {
    fn from(e: &TaxonomyError) -> Self {
        match e {
            TaxonomyError::DuplicateId(_) => IssueKind::DuplicateId,
            TaxonomyError::EmptyLabel(_) => IssueKind::EmptyLabel,
            TaxonomyError::EmptyId => IssueKind::EmptyId,
            TaxonomyError::UnknownEntity(_) => IssueKind::UnknownEntity,
            TaxonomyError::KindMismatch { .. } => IssueKind::KindMismatch,
            TaxonomyError::DuplicateTriple(..) => IssueKind::DuplicateTriple,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    /// `file:line` of the offending record.
    pub locator: String,
    pub kind: IssueKind,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<Issue>,
    pub warnings: Vec<Issue>,
    pub counts: TaxonomyStats,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("missing file {0}")]
    MissingFile(PathBuf),
    #[error("{file}: missing column `{column}`")]
    MissingColumn { file: PathBuf, column: String },
    #[error("{locator}: unknown relation type `{value}`")]
    UnknownRelationType { locator: String, value: String },
    #[error("invalid column map: {0}")]
    InvalidColumnMap(String),
    #[error("{locator}: {message}")]
    Csv { locator: String, message: String },
    #[error("validation failed with {} error(s); first: {}", .0.errors.len(), first_error(.0))]
    ValidationFailed(Box<ValidationReport>),
}

fn first_error(report: &ValidationReport) -> String {
    report
        .errors
        .first()
        .map(|i| format!("{}: {}", i.locator, i.message))
        .unwrap_or_default()
}

/// Accumulates records into a builder while recording issues.
struct Loader {
    builder: TaxonomyBuilder,
    report: ValidationReport,
    mode: LoadMode,
}

impl Loader {
    fn new(mode: LoadMode) -> Self {
        Loader {
            builder: TaxonomyBuilder::new(),
            report: ValidationReport::default(),
            mode,
        }
    }

    fn issue(&mut self, locator: String, kind: IssueKind, message: String) {
        let issue = Issue { locator, kind, message };
        match self.mode {
            LoadMode::Strict => self.report.errors.push(issue),
            LoadMode::Permissive => self.report.warnings.push(issue),
        }
    }

    fn warn(&mut self, locator: String, kind: IssueKind, message: String) {
        self.report.warnings.push(Issue { locator, kind, message });
    }

    fn entity(&mut self, locator: String, entity: Entity) {
        let id = entity.id.clone();
        match self.builder.add_entity(entity) {
            Ok(dropped) => {
                for label in dropped {
                    self.warn(
                        locator.clone(),
                        IssueKind::DuplicateAltLabel,
                        format!("entity `{id}`: duplicate alt label `{label}` removed"),
                    );
                }
            }
            Err(e) => self.issue(locator, (&e).into(), e.to_string()),
        }
    }

    fn relation(&mut self, locator: String, triple: Triple) {
        if let Err(e) = self.builder.add_relation(triple) {
            self.issue(locator, (&e).into(), e.to_string());
        }
    }

    fn finish(mut self) -> Result<(Taxonomy, ValidationReport), IngestError> {
        self.report.counts = self.builder.stats();
        if self.mode == LoadMode::Strict && !self.report.errors.is_empty() {
            return Err(IngestError::ValidationFailed(Box::new(self.report)));
        }
        Ok((self.builder.freeze(), self.report))
    }
}

fn read_records<T: serde::de::DeserializeOwned>(
    path: &Path,
    loader: &mut Loader,
) -> Result<Vec<(String, T)>, IngestError> {
    if !path.exists() {
        return Err(IngestError::MissingFile(path.to_path_buf()));
    }
    let (ok, bad) = jsonl::read_jsonl_lenient::<T>(path).map_err(|e| match e {
        JsonlError::Io { source, .. } => IngestError::Io {
            path: path.to_path_buf(),
            source,
        },
        JsonlError::Parse { .. } => unreachable!("lenient read does not fail on parse errors"),
    })?;
    let name = path.display().to_string();
    for (line, message) in bad {
        loader.issue(format!("{name}:{line}"), IssueKind::Parse, message);
    }
    Ok(ok.into_iter().map(|(line, v)| (format!("{name}:{line}"), v)).collect())
}

/// Loads the canonical JSONL pair. Entities are inserted before relations,
/// so relation records may reference entities from anywhere in the entity file.
pub fn load_canonical(
    entities_path: &Path,
    relations_path: &Path,
    mode: LoadMode,
) -> Result<(Taxonomy, ValidationReport), IngestError> {
    let mut loader = Loader::new(mode);
    let entities = read_records::<Entity>(entities_path, &mut loader)?;
    let relations = read_records::<Triple>(relations_path, &mut loader)?;
    for (loc, e) in entities {
        loader.entity(loc, e);
    }
    for (loc, t) in relations {
        loader.relation(loc, t);
    }
    loader.finish()
}

/// Loads `entities.jsonl` and `relations.jsonl` from a directory.
pub fn load_canonical_dir(dir: &Path, mode: LoadMode) -> Result<(Taxonomy, ValidationReport), IngestError> {
    load_canonical(&dir.join(ENTITIES_FILE), &dir.join(RELATIONS_FILE), mode)
}

/// Writes the taxonomy in canonical form: entities by id, triples in
/// canonical triple order.
pub fn write_canonical(taxonomy: &Taxonomy, dir: &Path) -> Result<(PathBuf, PathBuf), IngestError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| IngestError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let ents = dir.join(ENTITIES_FILE);
    let rels = dir.join(RELATIONS_FILE);
    let entities: Vec<&Entity> = taxonomy.entities().collect();
    jsonl::write_jsonl(&ents, &entities).map_err(io(&ents))?;
    let triples: Vec<&Triple> = taxonomy.triples().collect();
    jsonl::write_jsonl(&rels, &triples).map_err(io(&rels))?;
    Ok((ents, rels))
}

/// Where to find each logical field in an ESCO CSV export.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnMap {
    pub occupations_file: String,
    pub skills_file: String,
    pub relations_file: String,
    pub id: String,
    pub preferred_label: String,
    pub alt_labels: String,
    pub description: String,
    pub subject: String,
    pub object: String,
    pub relation_type: String,
    pub alt_label_delimiter: String,
    /// Cell value → relation kind.
    pub relation_values: BTreeMap<String, RelationKind>,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            occupations_file: "occupations_en.csv".into(),
            skills_file: "skills_en.csv".into(),
            relations_file: "occupationSkillRelations_en.csv".into(),
            id: "conceptUri".into(),
            preferred_label: "preferredLabel".into(),
            alt_labels: "altLabels".into(),
            description: "description".into(),
            subject: "skillUri".into(),
            object: "occupationUri".into(),
            relation_type: "relationType".into(),
            alt_label_delimiter: "\n".into(),
            relation_values: BTreeMap::from([
                ("essential".to_string(), RelationKind::IsEssentialFor),
                ("optional".to_string(), RelationKind::IsOptionalFor),
            ]),
        }
    }
}

impl ColumnMap {
    pub fn validate(&self) -> Result<(), IngestError> {
        let fields = [
            ("occupations_file", &self.occupations_file),
            ("skills_file", &self.skills_file),
            ("relations_file", &self.relations_file),
            ("id", &self.id),
            ("preferred_label", &self.preferred_label),
            ("alt_labels", &self.alt_labels),
            ("description", &self.description),
            ("subject", &self.subject),
            ("object", &self.object),
            ("relation_type", &self.relation_type),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| v.trim().is_empty()) {
            return Err(IngestError::InvalidColumnMap(format!("`{name}` is not mapped")));
        }
        if self.alt_label_delimiter.is_empty() {
            return Err(IngestError::InvalidColumnMap("alt_label_delimiter is empty".into()));
        }
        if self.relation_values.is_empty() {
            return Err(IngestError::InvalidColumnMap("relation_values is empty".into()));
        }
        Ok(())
    }

    pub fn split_alt_labels(&self, cell: &str) -> Vec<String> {
        cell.split(self.alt_label_delimiter.as_str())
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect()
    }
}

struct CsvTable {
    path: PathBuf,
    reader: csv::Reader<fs::File>,
    columns: HashMap<String, usize>,
}

impl CsvTable {
    fn open(path: PathBuf) -> Result<Self, IngestError> {
        if !path.is_file() {
            return Err(IngestError::MissingFile(path));
        }
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_path(&path)
            .map_err(|e| IngestError::Csv {
                locator: path.display().to_string(),
                message: e.to_string(),
            })?;
        let headers = reader.headers().map_err(|e| IngestError::Csv {
            locator: path.display().to_string(),
            message: e.to_string(),
        })?;
        let columns = headers
            .iter()
            .enumerate()
            // exports sometimes start with a UTF-8 BOM
            .map(|(i, h)| (h.trim_start_matches('\u{feff}').to_string(), i))
            .collect();
        Ok(CsvTable { path, reader, columns })
    }

    fn column(&self, name: &str) -> Result<usize, IngestError> {
        self.columns.get(name).copied().ok_or_else(|| IngestError::MissingColumn {
            file: self.path.clone(),
            column: name.to_string(),
        })
    }

    /// Yields `(locator, record)` pairs.
    fn rows(&mut self) -> impl Iterator<Item = Result<(String, csv::StringRecord), IngestError>> + '_ {
        let name = self.path.display().to_string();
        self.reader.records().map(move |r| {
            r.map(|rec| {
                let line = rec.position().map(|p| p.line()).unwrap_or(0);
                (format!("{name}:{line}"), rec)
            })
            .map_err(|e| IngestError::Csv {
                locator: name.clone(),
                message: e.to_string(),
            })
        })
    }
}

fn cell<'r>(rec: &'r csv::StringRecord, idx: usize) -> &'r str {
    rec.get(idx).unwrap_or("")
}

fn load_entity_csv(
    loader: &mut Loader,
    path: PathBuf,
    kind: EntityKind,
    map: &ColumnMap,
) -> Result<(), IngestError> {
    let mut table = CsvTable::open(path)?;
    let id = table.column(&map.id)?;
    let label = table.column(&map.preferred_label)?;
    let alts = table.column(&map.alt_labels)?;
    let desc = table.column(&map.description)?;
    let rows: Vec<_> = table.rows().collect::<Result<_, _>>()?;
    for (loc, rec) in rows {
        let mut e = Entity::new(cell(&rec, id), kind, cell(&rec, label))
            .with_alt_labels(map.split_alt_labels(cell(&rec, alts)));
        e.description = Some(cell(&rec, desc).to_string());
        loader.entity(loc, e);
    }
    Ok(())
}

/// Loads an ESCO CSV export (occupations, skills and occupation-skill
/// relations) from `dir`.
///
/// Relation type cells are matched exactly against `relation_values`. In
/// strict mode an unmapped value aborts the load with
/// [`IngestError::UnknownRelationType`]; in permissive mode the row is
/// skipped with a warning.
pub fn load_esco_csv(
    dir: &Path,
    map: &ColumnMap,
    mode: LoadMode,
) -> Result<(Taxonomy, ValidationReport), IngestError> {
    map.validate()?;
    if !dir.is_dir() {
        return Err(IngestError::MissingFile(dir.to_path_buf()));
    }
    let mut loader = Loader::new(mode);
    load_entity_csv(&mut loader, dir.join(&map.occupations_file), EntityKind::Occupation, map)?;
    load_entity_csv(&mut loader, dir.join(&map.skills_file), EntityKind::Skill, map)?;

    let mut table = CsvTable::open(dir.join(&map.relations_file))?;
    let subject = table.column(&map.subject)?;
    let object = table.column(&map.object)?;
    let rel = table.column(&map.relation_type)?;
    let rows: Vec<_> = table.rows().collect::<Result<_, _>>()?;
    for (loc, rec) in rows {
        let value = cell(&rec, rel).trim();
        let Some(&predicate) = map.relation_values.get(value) else {
            if mode == LoadMode::Strict {
                return Err(IngestError::UnknownRelationType {
                    locator: loc,
                    value: value.to_string(),
                });
            }
            loader.warn(
                loc,
                IssueKind::UnknownRelationType,
                format!("unknown relation type `{value}`"),
            );
            continue;
        };
        let triple = Triple::new(cell(&rec, subject).trim(), predicate, cell(&rec, object).trim());
        loader.relation(loc, triple);
    }
    loader.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn canonical_fixture_loads() {
        let dir = tempfile::tempdir().unwrap();
        let e = write(
            dir.path(),
            "e.jsonl",
            concat!(
                r#"{"id":"s1","kind":"Skill","preferred_label":"ensure correct metal temperature","alt_labels":["keep metal hot"]}"#,
                "\n",
                r#"{"id":"o1","kind":"Occupation","preferred_label":"electron beam welder","description":"Operates electron beam welding machines."}"#,
                "\n"
            ),
        );
        let r = write(
            dir.path(),
            "r.jsonl",
            concat!(
                r#"{"subject":"s1","predicate":"isEssentialFor","object":"o1"}"#,
                "\n",
                r#"{"subject":"s1","predicate":"isOptionalFor","object":"o1"}"#,
                "\n"
            ),
        );
        let (tax, report) = load_canonical(&e, &r, LoadMode::Strict).unwrap();
        assert_eq!(tax.len(), 2);
        assert_eq!(tax.stats().n_triples(), 2);
        assert!(report.is_ok());
        assert_eq!(report.counts.n_descriptions, 1);
    }

    #[test]
    fn empty_files_empty_taxonomy() {
        let dir = tempfile::tempdir().unwrap();
        let e = write(dir.path(), "e.jsonl", "");
        let r = write(dir.path(), "r.jsonl", "");
        let (tax, report) = load_canonical(&e, &r, LoadMode::Strict).unwrap();
        assert!(tax.is_empty());
        assert!(report.errors.is_empty());
    }

    #[test]
    fn unknown_reference_fails_with_locator() {
        let dir = tempfile::tempdir().unwrap();
        let e = write(
            dir.path(),
            "e.jsonl",
            "{\"id\":\"s1\",\"kind\":\"Skill\",\"preferred_label\":\"a\"}\n",
        );
        let r = write(
            dir.path(),
            "r.jsonl",
            "\n{\"subject\":\"s1\",\"predicate\":\"isEssentialFor\",\"object\":\"o9\"}\n",
        );
        let err = load_canonical(&e, &r, LoadMode::Strict).unwrap_err();
        let IngestError::ValidationFailed(report) = err else {
            panic!("expected ValidationFailed, got {err:?}");
        };
        assert_eq!(report.errors.len(), 1);
        assert_eq!(report.errors[0].kind, IssueKind::UnknownEntity);
        assert!(report.errors[0].locator.ends_with("r.jsonl:2"));
    }

    #[test]
    fn malformed_lines_all_reported() {
        let dir = tempfile::tempdir().unwrap();
        let e = write(
            dir.path(),
            "e.jsonl",
            "{not json\n{\"id\":\"s1\",\"kind\":\"Skill\",\"preferred_label\":\"a\"}\n{\"id\":\"x\",\"kind\":\"Tool\",\"preferred_label\":\"b\"}\n",
        );
        let r = write(dir.path(), "r.jsonl", "");
        let Err(IngestError::ValidationFailed(report)) = load_canonical(&e, &r, LoadMode::Strict) else {
            panic!("expected failure");
        };
        let lines: Vec<_> = report.errors.iter().map(|i| i.locator.rsplit(':').next().unwrap().to_string()).collect();
        assert_eq!(lines, vec!["1", "3"]);
        assert!(report.errors.iter().all(|i| i.kind == IssueKind::Parse));

        let (tax, report) = load_canonical(&e, &r, LoadMode::Permissive).unwrap();
        assert_eq!(tax.len(), 1);
        assert_eq!(report.warnings.len(), 2);
    }

    #[test]
    fn unknown_field_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let e = write(
            dir.path(),
            "e.jsonl",
            "{\"id\":\"s1\",\"kind\":\"Skill\",\"preferred_label\":\"a\",\"colour\":\"red\"}\n",
        );
        let r = write(dir.path(), "r.jsonl", "");
        assert!(load_canonical(&e, &r, LoadMode::Strict).is_err());
    }

    #[test]
    fn missing_file() {
        let dir = tempfile::tempdir().unwrap();
        let r = write(dir.path(), "r.jsonl", "");
        assert!(matches!(
            load_canonical(&dir.path().join("nope.jsonl"), &r, LoadMode::Strict),
            Err(IngestError::MissingFile(_))
        ));
    }

    #[test]
    fn duplicate_alt_labels_warn() {
        let dir = tempfile::tempdir().unwrap();
        let e = write(
            dir.path(),
            "e.jsonl",
            "{\"id\":\"s1\",\"kind\":\"Skill\",\"preferred_label\":\"a\",\"alt_labels\":[\"a\",\"b\",\"b\"]}\n",
        );
        let r = write(dir.path(), "r.jsonl", "");
        let (tax, report) = load_canonical(&e, &r, LoadMode::Strict).unwrap();
        assert_eq!(tax.entity("s1").unwrap().alt_labels, vec!["b"]);
        assert_eq!(report.warnings.len(), 2);
        assert!(report.warnings.iter().all(|w| w.kind == IssueKind::DuplicateAltLabel));
    }

    #[test]
    fn newline_delimited_alt_labels() {
        let map = ColumnMap::default();
        assert_eq!(map.split_alt_labels("a\nb"), vec!["a", "b"]);
        assert_eq!(map.split_alt_labels(""), Vec::<String>::new());
        let pipe = ColumnMap {
            alt_label_delimiter: "|".into(),
            ..ColumnMap::default()
        };
        assert_eq!(pipe.split_alt_labels(" a | b |"), vec!["a", "b"]);
    }

    #[test]
    fn column_map_rejects_empty_delimiter() {
        let map = ColumnMap {
            alt_label_delimiter: String::new(),
            ..ColumnMap::default()
        };
        assert!(matches!(map.validate(), Err(IngestError::InvalidColumnMap(_))));
    }
}
