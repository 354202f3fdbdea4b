use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerbalizerError {
    #[error("verbalizer `{0}` has no classes")]
    Empty(String),
    #[error("class `{0}` has an empty label word")]
    EmptyWord(String),
    #[error("empty class label")]
    EmptyClass,
    #[error("class `{0}` is listed twice")]
    DuplicateClass(String),
    #[error("label word `{0}` is shared by several classes")]
    SharedWord(String),
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("unknown label word `{0}`")]
    UnknownWord(String),
    #[error("invalid verbalizer file: {0}")]
    Json(String),
}

/// One-to-one map between class labels and the label words a model fills
/// into a mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verbalizer {
    name: String,
    class_to_word: BTreeMap<String, String>,
    word_to_class: BTreeMap<String, String>,
}

impl Verbalizer {
    pub fn new<I, C, W>(name: impl Into<String>, pairs: I) -> Result<Self, VerbalizerError>
    where
        I: IntoIterator<Item = (C, W)>,
        C: Into<String>,
        W: Into<String>,
    {
        let name = name.into();
        let mut class_to_word = BTreeMap::new();
        let mut word_to_class = BTreeMap::new();
        for (c, w) in pairs {
            let (c, w) = (c.into(), w.into());
            if c.is_empty() {
                return Err(VerbalizerError::EmptyClass);
            }
            if w.trim().is_empty() {
                return Err(VerbalizerError::EmptyWord(c));
            }
            if class_to_word.contains_key(&c) {
                return Err(VerbalizerError::DuplicateClass(c));
            }
            if word_to_class.contains_key(&w) {
                return Err(VerbalizerError::SharedWord(w));
            }
            class_to_word.insert(c.clone(), w.clone());
            word_to_class.insert(w, c);
        }
        if class_to_word.is_empty() {
            return Err(VerbalizerError::Empty(name));
        }
        Ok(Verbalizer {
            name,
            class_to_word,
            word_to_class,
        })
    }

    /// Parses a JSON object of `class → word`.
    pub fn from_json(name: impl Into<String>, json: &str) -> Result<Self, VerbalizerError> {
        let map: BTreeMap<String, String> =
            serde_json::from_str(json).map_err(|e| VerbalizerError::Json(e.to_string()))?;
        Verbalizer::new(name, map)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.class_to_word).expect("string map serializes");
        s.push('\n');
        s
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn class_to_word(&self) -> &BTreeMap<String, String> {
        &self.class_to_word
    }

    pub fn word_to_class(&self) -> &BTreeMap<String, String> {
        &self.word_to_class
    }

    pub fn classes(&self) -> impl Iterator<Item = &str> {
        self.class_to_word.keys().map(String::as_str)
    }

    pub fn contains_class(&self, class: &str) -> bool {
        self.class_to_word.contains_key(class)
    }

    pub fn len(&self) -> usize {
        self.class_to_word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.class_to_word.is_empty()
    }

    pub fn verbalize(&self, class: &str) -> Result<&str, VerbalizerError> {
        self.class_to_word
            .get(class)
            .map(String::as_str)
            .ok_or_else(|| VerbalizerError::UnknownClass(class.to_string()))
    }

    pub fn unverbalize(&self, word: &str) -> Result<&str, VerbalizerError> {
        self.word_to_class
            .get(word)
            .map(String::as_str)
            .ok_or_else(|| VerbalizerError::UnknownWord(word.to_string()))
    }
}
