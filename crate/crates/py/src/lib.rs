//! Python bindings for `taxoprompt`.
//!
//! Records (entities, triples, examples, predictions, reports) cross the
//! boundary as plain dicts/lists with the same shape as the JSONL files.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyModule;
use serde::de::DeserializeOwned;
use serde::Serialize;

use taxoprompt::cli::MockPolicy;
use taxoprompt::datagen::{self, GenConfig, PromptExample, Task};
use taxoprompt::ingest::{self, ColumnMap, LoadMode};
use taxoprompt::promptkit::{EcrcStyle, PromptTemplate, Presets, Verbalizer};
use taxoprompt::score::{self, PredictionRecord, RunScore};
use taxoprompt::splitkit::{self, SplitConfig};
use taxoprompt::taxonomy::{Entity, RelationKind, Taxonomy, Triple};

create_exception!(taxoprompt_py, TaxopromptError, PyValueError);

fn err(e: impl Display) -> PyErr {
    TaxopromptError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(err)?;
    PyModule::import(py, "json")?.call_method1("loads", (text,))
}

fn from_py<T: DeserializeOwned>(obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = PyModule::import(obj.py(), "json")?
        .call_method1("dumps", (obj,))?
        .extract()?;
    serde_json::from_str(&text).map_err(err)
}

fn load_mode(permissive: bool) -> LoadMode {
    if permissive {
        LoadMode::Permissive
    } else {
        LoadMode::Strict
    }
}

fn presets(dir: Option<PathBuf>) -> PyResult<Presets> {
    match dir {
        Some(d) => Presets::load_dir(&d).map_err(err),
        None => Ok(Presets::builtin()),
    }
}

/// Immutable skill/occupation taxonomy.
#[pyclass(name = "Taxonomy", frozen)]
struct PyTaxonomy {
    inner: Taxonomy,
}

#[pymethods]
impl PyTaxonomy {
    /// Builds a taxonomy from entity and relation dicts.
    #[staticmethod]
    fn from_records(entities: &Bound<'_, PyAny>, relations: &Bound<'_, PyAny>) -> PyResult<Self> {
        let entities: Vec<Entity> = from_py(entities)?;
        let relations: Vec<Triple> = from_py(relations)?;
        let mut b = Taxonomy::builder();
        for e in entities {
            b.add_entity(e).map_err(err)?;
        }
        for t in relations {
            b.add_relation(t).map_err(err)?;
        }
        Ok(PyTaxonomy { inner: b.freeze() })
    }

    #[staticmethod]
    #[pyo3(signature = (entities, relations, permissive = false))]
    fn from_canonical(entities: PathBuf, relations: PathBuf, permissive: bool) -> PyResult<Self> {
        let (inner, _) = ingest::load_canonical(&entities, &relations, load_mode(permissive)).map_err(err)?;
        Ok(PyTaxonomy { inner })
    }

    /// Loads `entities.jsonl` and `relations.jsonl` from `dir`.
    #[staticmethod]
    #[pyo3(signature = (dir, permissive = false))]
    fn from_canonical_dir(dir: PathBuf, permissive: bool) -> PyResult<Self> {
        let (inner, _) = ingest::load_canonical_dir(&dir, load_mode(permissive)).map_err(err)?;
        Ok(PyTaxonomy { inner })
    }

    /// Loads ESCO CSV exports; `column_map` overrides default column names.
    #[staticmethod]
    #[pyo3(signature = (dir, column_map = None, permissive = false))]
    fn from_esco(dir: PathBuf, column_map: Option<&Bound<'_, PyAny>>, permissive: bool) -> PyResult<Self> {
        let map: ColumnMap = match column_map {
            Some(m) => from_py(m)?,
            None => ColumnMap::default(),
        };
        let (inner, _) = ingest::load_esco_csv(&dir, &map, load_mode(permissive)).map_err(err)?;
        Ok(PyTaxonomy { inner })
    }

    fn write_canonical(&self, dir: PathBuf) -> PyResult<()> {
        std::fs::create_dir_all(&dir).map_err(err)?;
        ingest::write_canonical(&self.inner, &dir).map_err(err)?;
        Ok(())
    }

    fn stats<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.stats())
    }

    fn entity<'py>(&self, py: Python<'py>, id: &str) -> PyResult<Option<Bound<'py, PyAny>>> {
        self.inner.entity(id).map(|e| to_py(py, e)).transpose()
    }

    fn entities<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.entities().collect::<Vec<_>>())
    }

    /// Triples in canonical order, optionally filtered by predicate name.
    #[pyo3(signature = (predicate = None))]
    fn triples<'py>(&self, py: Python<'py>, predicate: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
        let filter = match predicate {
            None => None,
            Some(p) => Some(
                RelationKind::ALL
                    .into_iter()
                    .find(|k| k.as_str() == p)
                    .ok_or_else(|| err(format!("unknown predicate `{p}`")))?,
            ),
        };
        to_py(py, &self.inner.query_triples(filter))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        let s = self.inner.stats();
        format!(
            "Taxonomy(skills={}, occupations={}, triples={})",
            s.n_skills,
            s.n_occupations,
            s.n_triples()
        )
    }
}

/// Bijective class ↔ label-word mapping.
#[pyclass(name = "Verbalizer", frozen)]
struct PyVerbalizer {
    inner: Verbalizer,
}

#[pymethods]
impl PyVerbalizer {
    #[new]
    fn new(name: &str, mapping: BTreeMap<String, String>) -> PyResult<Self> {
        Ok(PyVerbalizer {
            inner: Verbalizer::new(name, mapping).map_err(err)?,
        })
    }

    #[getter]
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn classes(&self) -> Vec<String> {
        self.inner.classes().map(str::to_string).collect()
    }

    fn verbalize(&self, class: &str) -> PyResult<String> {
        self.inner.verbalize(class).map(str::to_string).map_err(err)
    }

    fn unverbalize(&self, word: &str) -> PyResult<String> {
        self.inner.unverbalize(word).map(str::to_string).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Verbalizer({:?}, {} classes)", self.inner.name(), self.inner.len())
    }
}

/// Cloze template with `{slot}` placeholders and `[MASK:k]` masks.
#[pyclass(name = "PromptTemplate", frozen)]
struct PyPromptTemplate {
    inner: PromptTemplate,
}

#[pymethods]
impl PyPromptTemplate {
    #[new]
    fn new(source: &str) -> PyResult<Self> {
        Ok(PyPromptTemplate {
            inner: PromptTemplate::parse(source).map_err(err)?,
        })
    }

    /// Concatenates `parts` with `joiner` between them, renumbering masks.
    #[staticmethod]
    fn compose(parts: Vec<PyRef<'_, PyPromptTemplate>>, joiner: PyRef<'_, PyPromptTemplate>) -> PyResult<Self> {
        let parts: Vec<PromptTemplate> = parts.iter().map(|p| p.inner.clone()).collect();
        Ok(PyPromptTemplate {
            inner: PromptTemplate::compose(&parts, &joiner.inner).map_err(err)?,
        })
    }

    fn slot_names(&self) -> Vec<String> {
        self.inner.slot_names().into_iter().map(str::to_string).collect()
    }

    fn mask_count(&self) -> usize {
        self.inner.mask_count()
    }

    /// Returns `{"text": ..., "masks": [...]}`.
    #[pyo3(signature = (bindings, spaces, golds = None))]
    fn render<'py>(
        &self,
        py: Python<'py>,
        bindings: BTreeMap<String, String>,
        spaces: Vec<PyRef<'_, PyVerbalizer>>,
        golds: Option<BTreeMap<usize, String>>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let spaces: Vec<&Verbalizer> = spaces.iter().map(|v| &v.inner).collect();
        let rendered = self
            .inner
            .render(&bindings, &spaces, &golds.unwrap_or_default())
            .map_err(err)?;
        to_py(py, &rendered)
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("PromptTemplate({:?})", self.inner.to_string())
    }
}

fn parse_task(task: &str) -> PyResult<Task> {
    task.parse().map_err(err)
}

/// Template and class spaces used for `task` (`ecrc`, `el` or `qa`).
#[pyfunction]
#[pyo3(signature = (task, ecrc_style = "entity", presets_dir = None))]
fn task_prompt(
    task: &str,
    ecrc_style: &str,
    presets_dir: Option<PathBuf>,
) -> PyResult<(PyPromptTemplate, Vec<PyVerbalizer>)> {
    let p = presets(presets_dir)?;
    let style = match ecrc_style {
        "entity" => EcrcStyle::Entity,
        "article" => EcrcStyle::Article,
        other => return Err(err(format!("unknown style `{other}`"))),
    };
    let prompt = match parse_task(task)? {
        Task::EcRc => p.ecrc(style),
        Task::El => p.el(),
        Task::Qa => p.qa(),
    }
    .map_err(err)?;
    Ok((
        PyPromptTemplate {
            inner: prompt.template,
        },
        prompt.spaces.into_iter().map(|inner| PyVerbalizer { inner }).collect(),
    ))
}

/// Generates one task's dataset. `config` is a generation-config dict; when
/// omitted, defaults are used with `seed`.
#[pyfunction]
#[pyo3(signature = (taxonomy, task, seed = 0, config = None, presets_dir = None))]
fn generate<'py>(
    py: Python<'py>,
    taxonomy: PyRef<'_, PyTaxonomy>,
    task: &str,
    seed: u64,
    config: Option<&Bound<'_, PyAny>>,
    presets_dir: Option<PathBuf>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg: GenConfig = match config {
        Some(c) => from_py(c)?,
        None => GenConfig::new(seed),
    };
    let examples = datagen::generate(parse_task(task)?, &taxonomy.inner, &presets(presets_dir)?, &cfg).map_err(err)?;
    to_py(py, &examples)
}

#[pyfunction]
fn dataset_stats<'py>(py: Python<'py>, examples: &Bound<'_, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let examples: Vec<PromptExample> = from_py(examples)?;
    to_py(py, &datagen::dataset_stats(&examples))
}

/// K-shot split (or zero-shot when `k` is None). Returns a dict with
/// `train_k`, `dev_k`, `eval_pool`, `eval_sets` and `report`.
#[pyfunction]
#[pyo3(signature = (examples, k = None, seed = 0, eval_sets = 9, eval_size = 512))]
fn split<'py>(
    py: Python<'py>,
    examples: &Bound<'_, PyAny>,
    k: Option<usize>,
    seed: u64,
    eval_sets: usize,
    eval_size: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let examples: Vec<PromptExample> = from_py(examples)?;
    let cfg = SplitConfig {
        seed,
        k: k.unwrap_or(0),
        eval_sets,
        eval_size,
    };
    let b = match k {
        Some(_) => splitkit::split_kshot(&examples, &cfg),
        None => splitkit::split_zero_shot(&examples, &cfg),
    }
    .map_err(err)?;
    let out = serde_json::json!({
        "train_k": b.train_k,
        "dev_k": b.dev_k,
        "eval_pool": b.eval_pool,
        "eval_sets": b.eval_sets,
        "report": b.report,
    });
    to_py(py, &out)
}

/// Predictions from `gold_oracle`, `majority_class` or `uniform_random`.
#[pyfunction]
#[pyo3(signature = (eval_set, policy = "gold_oracle", seed = 0))]
fn mock_predict<'py>(
    py: Python<'py>,
    eval_set: &Bound<'_, PyAny>,
    policy: &str,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let eval_set: Vec<PromptExample> = from_py(eval_set)?;
    let policy = MockPolicy::from_name(policy, seed).map_err(err)?;
    to_py(py, &taxoprompt::cli::mock_predict(&eval_set, policy))
}

#[pyfunction]
fn score_run<'py>(
    py: Python<'py>,
    eval_set: &Bound<'_, PyAny>,
    predictions: &Bound<'_, PyAny>,
) -> PyResult<Bound<'py, PyAny>> {
    let eval_set: Vec<PromptExample> = from_py(eval_set)?;
    let predictions: Vec<PredictionRecord> = from_py(predictions)?;
    to_py(py, &score::score_run(&eval_set, &predictions).map_err(err)?)
}

#[pyfunction]
fn confusion<'py>(
    py: Python<'py>,
    eval_set: &Bound<'_, PyAny>,
    predictions: &Bound<'_, PyAny>,
    role: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let eval_set: Vec<PromptExample> = from_py(eval_set)?;
    let predictions: Vec<PredictionRecord> = from_py(predictions)?;
    to_py(py, &score::confusion(&eval_set, &predictions, role).map_err(err)?)
}

/// Mean and sample standard deviation over run scores.
#[pyfunction]
#[pyo3(signature = (runs, metadata = None))]
fn aggregate<'py>(
    py: Python<'py>,
    runs: &Bound<'_, PyAny>,
    metadata: Option<&Bound<'_, PyAny>>,
) -> PyResult<Bound<'py, PyAny>> {
    let runs: Vec<RunScore> = from_py(runs)?;
    let metadata = match metadata {
        Some(m) => from_py(m)?,
        None => BTreeMap::new(),
    };
    to_py(py, &score::aggregate(runs, metadata).map_err(err)?)
}

#[pymodule]
fn taxoprompt_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("TaxopromptError", m.py().get_type::<TaxopromptError>())?;
    m.add_class::<PyTaxonomy>()?;
    m.add_class::<PyVerbalizer>()?;
    m.add_class::<PyPromptTemplate>()?;
    m.add_function(wrap_pyfunction!(task_prompt, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(dataset_stats, m)?)?;
    m.add_function(wrap_pyfunction!(split, m)?)?;
    m.add_function(wrap_pyfunction!(mock_predict, m)?)?;
    m.add_function(wrap_pyfunction!(score_run, m)?)?;
    m.add_function(wrap_pyfunction!(confusion, m)?)?;
    m.add_function(wrap_pyfunction!(aggregate, m)?)?;
    Ok(())
}
