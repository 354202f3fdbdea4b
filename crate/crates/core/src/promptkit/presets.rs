//! Built-in templates and verbalizers for the three datasets.
//!
//! The wording lives in `presets/` as plain data: `*.tmpl` files in the
//! template mini-language and `*.json` verbalizer maps. The same files are
//! compiled in as defaults, and a directory with any subset of them can
//! override the defaults at run time.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::template::{PromptTemplate, Segment, TemplateError};
use super::verbalizer::{Verbalizer, VerbalizerError};

pub const ENTITY: &str = "entity";
pub const RELATION: &str = "relation";
pub const LINKING: &str = "linking";
pub const ANSWER: &str = "answer";

const BUILTIN_TEMPLATES: &[(&str, &str)] = &[
    ("ecrc.skill", include_str!("../../presets/ecrc.skill.tmpl")),
    ("ecrc.occupation", include_str!("../../presets/ecrc.occupation.tmpl")),
    ("ecrc.joiner", include_str!("../../presets/ecrc.joiner.tmpl")),
    ("ecrc_the.skill", include_str!("../../presets/ecrc_the.skill.tmpl")),
    ("ecrc_the.occupation", include_str!("../../presets/ecrc_the.occupation.tmpl")),
    ("ecrc_the.joiner", include_str!("../../presets/ecrc_the.joiner.tmpl")),
    ("el", include_str!("../../presets/el.tmpl")),
    ("qa.instruction", include_str!("../../presets/qa.instruction.tmpl")),
    ("qa.body", include_str!("../../presets/qa.body.tmpl")),
    ("qa.answer", include_str!("../../presets/qa.answer.tmpl")),
];

const BUILTIN_VERBALIZERS: &[(&str, &str)] = &[
    (ENTITY, include_str!("../../presets/entity.json")),
    (RELATION, include_str!("../../presets/relation.json")),
    (LINKING, include_str!("../../presets/linking.json")),
    (ANSWER, include_str!("../../presets/answer.json")),
];

#[derive(Debug, Error)]
pub enum PresetError {
    #[error("{name}: {source}")]
    Template { name: String, source: TemplateError },
    #[error("{name}: {source}")]
    Verbalizer { name: String, source: VerbalizerError },
    #[error("{0}: not a known preset file")]
    Unknown(String),
    #[error("{name}: {message}")]
    Shape { name: String, message: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// Which wording the EC+RC sub-prompts use.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EcrcStyle {
    /// `The [MASK] entity X [MASK] The [MASK] entity Y`
    #[default]
    Entity,
    /// `the [MASK] X [MASK] the [MASK] Y`
    Article,
}

impl EcrcStyle {
    pub fn preset_name(self) -> &'static str {
        match self {
            EcrcStyle::Entity => "ecrc",
            EcrcStyle::Article => "ecrc_the",
        }
    }
}

/// A composed template together with the class space of each mask.
#[derive(Debug, Clone)]
pub struct TaskPrompt {
    pub preset: String,
    pub template: PromptTemplate,
    pub spaces: Vec<Verbalizer>,
}

impl TaskPrompt {
    pub fn space_refs(&self) -> Vec<&Verbalizer> {
        self.spaces.iter().collect()
    }
}

#[derive(Debug, Clone)]
pub struct Presets {
    templates: BTreeMap<String, PromptTemplate>,
    verbalizers: BTreeMap<String, Verbalizer>,
}

impl Default for Presets {
    fn default() -> Self {
        Presets::builtin()
    }
}

/// Template files may end with one newline that is not part of the template.
fn strip_final_newline(s: &str) -> &str {
    s.strip_suffix("\r\n").or_else(|| s.strip_suffix('\n')).unwrap_or(s)
}

impl Presets {
    pub fn builtin() -> Self {
        let mut p = Presets {
            templates: BTreeMap::new(),
            verbalizers: BTreeMap::new(),
        };
        for (name, src) in BUILTIN_TEMPLATES {
            p.set_template(name, src).expect("built-in template is valid");
        }
        for (name, src) in BUILTIN_VERBALIZERS {
            p.set_verbalizer(name, src).expect("built-in verbalizer is valid");
        }
        p
    }

    /// Built-ins overridden by whatever `*.tmpl` / `*.json` files `dir` holds.
    pub fn load_dir(dir: &Path) -> Result<Self, PresetError> {
        let mut p = Presets::builtin();
        let io = |source| PresetError::Io {
            path: dir.display().to_string(),
            source,
        };
        let mut files: Vec<_> = fs::read_dir(dir)
            .map_err(io)?
            .collect::<Result<Vec<_>, _>>()
            .map_err(io)?
            .into_iter()
            .map(|e| e.path())
            .filter(|p| p.is_file())
            .collect();
        files.sort();
        for path in files {
            let file = path.file_name().and_then(|s| s.to_str()).unwrap_or_default().to_string();
            let read = || {
                fs::read_to_string(&path).map_err(|source| PresetError::Io {
                    path: path.display().to_string(),
                    source,
                })
            };
            if let Some(name) = file.strip_suffix(".tmpl") {
                if !p.templates.contains_key(name) {
                    return Err(PresetError::Unknown(file));
                }
                p.set_template(name, &read()?)?;
            } else if let Some(name) = file.strip_suffix(".json") {
                if !p.verbalizers.contains_key(name) {
                    return Err(PresetError::Unknown(file));
                }
                p.set_verbalizer(name, &read()?)?;
            }
        }
        // Fail early if an override breaks a task prompt's shape.
        p.ecrc(EcrcStyle::Entity)?;
        p.ecrc(EcrcStyle::Article)?;
        p.el()?;
        p.qa()?;
        Ok(p)
    }

    /// Writes every preset file into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<(), PresetError> {
        let io = |path: &Path| {
            let path = path.display().to_string();
            move |source| PresetError::Io { path, source }
        };
        fs::create_dir_all(dir).map_err(io(dir))?;
        for (name, t) in &self.templates {
            let path = dir.join(format!("{name}.tmpl"));
            fs::write(&path, format!("{t}\n")).map_err(io(&path))?;
        }
        for (name, v) in &self.verbalizers {
            let path = dir.join(format!("{name}.json"));
            fs::write(&path, v.to_json()).map_err(io(&path))?;
        }
        Ok(())
    }

    fn set_template(&mut self, name: &str, src: &str) -> Result<(), PresetError> {
        let t = PromptTemplate::parse(strip_final_newline(src)).map_err(|source| PresetError::Template {
            name: name.to_string(),
            source,
        })?;
        self.templates.insert(name.to_string(), t);
        Ok(())
    }

    fn set_verbalizer(&mut self, name: &str, src: &str) -> Result<(), PresetError> {
        let v = Verbalizer::from_json(name, src).map_err(|source| PresetError::Verbalizer {
            name: name.to_string(),
            source,
        })?;
        self.verbalizers.insert(name.to_string(), v);
        Ok(())
    }

    pub fn template(&self, name: &str) -> Option<&PromptTemplate> {
        self.templates.get(name)
    }

    pub fn verbalizer(&self, name: &str) -> Option<&Verbalizer> {
        self.verbalizers.get(name)
    }

    fn t(&self, name: &str) -> &PromptTemplate {
        &self.templates[name]
    }

    fn v(&self, name: &str) -> Verbalizer {
        self.verbalizers[name].clone()
    }

    /// `s1 [MASK] s2`: masks 1 and 3 type the entities, mask 2 the relation.
    pub fn ecrc(&self, style: EcrcStyle) -> Result<TaskPrompt, PresetError> {
        let name = style.preset_name();
        let parts = [
            self.t(&format!("{name}.skill")).clone(),
            self.t(&format!("{name}.occupation")).clone(),
        ];
        let joiner = self.t(&format!("{name}.joiner"));
        for (part, n) in [(&parts[0], 1), (joiner, 1), (&parts[1], 1)] {
            expect_masks(name, part, n)?;
        }
        let template = compose(name, &parts, joiner)?;
        expect_slots(name, &template, &["occupation", "skill"])?;
        Ok(TaskPrompt {
            preset: name.to_string(),
            template,
            spaces: vec![self.v(ENTITY), self.v(RELATION), self.v(ENTITY)],
        })
    }

    /// `e [MASK] m`
    pub fn el(&self) -> Result<TaskPrompt, PresetError> {
        let template = self.t("el").clone();
        expect_masks("el", &template, 1)?;
        expect_slots("el", &template, &["entity", "mention"])?;
        Ok(TaskPrompt {
            preset: "el".into(),
            template,
            spaces: vec![self.v(LINKING)],
        })
    }

    /// Instruction line, question body and answer cue, one per line.
    pub fn qa(&self) -> Result<TaskPrompt, PresetError> {
        let parts = [
            self.t("qa.instruction").clone(),
            self.t("qa.body").clone(),
            self.t("qa.answer").clone(),
        ];
        let newline = PromptTemplate::from_segments(vec![Segment::Literal("\n".into())])
            .expect("literal template is valid");
        let template = compose("qa", &parts, &newline)?;
        expect_masks("qa", &template, 1)?;
        expect_slots("qa", &template, &["description", "entity"])?;
        Ok(TaskPrompt {
            preset: "qa".into(),
            template,
            spaces: vec![self.v(ANSWER)],
        })
    }
}

fn compose(name: &str, parts: &[PromptTemplate], joiner: &PromptTemplate) -> Result<PromptTemplate, PresetError> {
    PromptTemplate::compose(parts, joiner).map_err(|source| PresetError::Template {
        name: name.to_string(),
        source,
    })
}

fn expect_masks(name: &str, t: &PromptTemplate, n: usize) -> Result<(), PresetError> {
    if t.mask_count() != n {
        return Err(PresetError::Shape {
            name: name.to_string(),
            message: format!("`{t}` has {} mask(s), expected {n}", t.mask_count()),
        });
    }
    Ok(())
}

fn expect_slots(name: &str, t: &PromptTemplate, slots: &[&str]) -> Result<(), PresetError> {
    let want: BTreeSet<&str> = slots.iter().copied().collect();
    if t.slot_names() != want {
        return Err(PresetError::Shape {
            name: name.to_string(),
            message: format!("`{t}` must use exactly the slots {want:?}"),
        });
    }
    Ok(())
}
