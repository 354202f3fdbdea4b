use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::verbalizer::Verbalizer;

const MASK_OPEN: &str = "[MASK:";

/// Surface form of mask `k` in rendered text.
pub fn mask_marker(k: usize) -> String {
    format!("<mask_{k}>")
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Segment {
    Literal(String),
    Slot(String),
    /// 1-based.
    Mask(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateError {
    #[error("template is empty")]
    Empty,
    #[error("slot `{{{0}}}` appears more than once")]
    DuplicateSlot(String),
    #[error("mask indices {0:?} are not distinct and contiguous from 1")]
    NonContiguousMaskIndices(Vec<usize>),
    #[error("unterminated `{{` at byte {0}")]
    UnterminatedBrace(usize),
    #[error("empty slot name at byte {0}")]
    EmptySlotName(usize),
    #[error("cannot compose zero templates")]
    NoParts,
    #[error("slot `{{{0}}}` is declared by more than one composed part")]
    SlotCollision(String),
    #[error("no binding for slot `{{{0}}}`")]
    MissingBinding(String),
    #[error("template has {expected} mask(s) but {got} class space(s) were given")]
    ClassSpaceCount { expected: usize, got: usize },
    #[error("gold class `{class}` for mask {mask} is not in class space `{space}`")]
    UnknownGoldClass { mask: usize, class: String, space: String },
    #[error("gold given for mask {0}, which does not exist")]
    UnknownMask(usize),
}

/// Ordered segments of a cloze prompt.
///
/// Mini-language: `{name}` is a slot, `[MASK:k]` is mask `k`, everything
/// else is literal text. Adjacent literals are always merged, so
/// `parse(t.to_string()) == t` holds for every valid template.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PromptTemplate {
    segments: Vec<Segment>,
}

impl PromptTemplate {
    pub fn parse(source: &str) -> Result<Self, TemplateError> {
        if source.is_empty() {
            return Err(TemplateError::Empty);
        }
        let mut segments = Vec::new();
        let mut literal = String::new();
        let mut i = 0;
        while i < source.len() {
            let rest = &source[i..];
            if rest.starts_with('{') {
                let close = rest.find('}').ok_or(TemplateError::UnterminatedBrace(i))?;
                let name = &rest[1..close];
                if name.is_empty() {
                    return Err(TemplateError::EmptySlotName(i));
                }
                if name.contains('{') {
                    return Err(TemplateError::UnterminatedBrace(i));
                }
                flush(&mut literal, &mut segments);
                segments.push(Segment::Slot(name.to_string()));
                i += close + 1;
                continue;
            }
            if let Some((k, len)) = parse_mask(rest) {
                flush(&mut literal, &mut segments);
                segments.push(Segment::Mask(k));
                i += len;
                continue;
            }
            let ch = rest.chars().next().expect("non-empty rest");
            literal.push(ch);
            i += ch.len_utf8();
        }
        flush(&mut literal, &mut segments);
        Self::from_segments(segments)
    }

    /// Validates and normalizes a segment list.
    pub fn from_segments(segments: Vec<Segment>) -> Result<Self, TemplateError> {
        let mut merged: Vec<Segment> = Vec::with_capacity(segments.len());
        for seg in segments {
            match (merged.last_mut(), seg) {
                (_, Segment::Literal(s)) if s.is_empty() => {}
                (Some(Segment::Literal(prev)), Segment::Literal(s)) => prev.push_str(&s),
                (_, seg) => merged.push(seg),
            }
        }
        let t = PromptTemplate { segments: merged };
        t.check()?;
        Ok(t)
    }

    fn check(&self) -> Result<(), TemplateError> {
        let mut slots = BTreeSet::new();
        let mut masks = Vec::new();
        for seg in &self.segments {
            match seg {
                Segment::Slot(name) => {
                    if !slots.insert(name.as_str()) {
                        return Err(TemplateError::DuplicateSlot(name.clone()));
                    }
                }
                Segment::Mask(k) => masks.push(*k),
                Segment::Literal(_) => {}
            }
        }
        let mut sorted = masks.clone();
        sorted.sort_unstable();
        if sorted.iter().enumerate().any(|(i, &k)| k != i + 1) {
            return Err(TemplateError::NonContiguousMaskIndices(masks));
        }
        Ok(())
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn slot_names(&self) -> BTreeSet<&str> {
        self.segments
            .iter()
            .filter_map(|s| match s {
                Segment::Slot(n) => Some(n.as_str()),
                _ => None,
            })
            .collect()
    }

    pub fn mask_count(&self) -> usize {
        self.segments.iter().filter(|s| matches!(s, Segment::Mask(_))).count()
    }

    /// Concatenates `parts` with `joiner` between consecutive parts.
    ///
    /// Each part's and each joiner instance's masks are shifted past all
    /// masks to their left, so the result is numbered 1..n in reading order.
    /// Slots must be unique across everything composed, including repeated
    /// joiner instances.
    pub fn compose(parts: &[PromptTemplate], joiner: &PromptTemplate) -> Result<Self, TemplateError> {
        let (first, rest) = parts.split_first().ok_or(TemplateError::NoParts)?;
        let mut segments = Vec::new();
        let mut offset = 0;
        let mut seen = BTreeSet::new();
        let mut push = |t: &PromptTemplate, segments: &mut Vec<Segment>, offset: &mut usize| {
            for seg in &t.segments {
                segments.push(match seg {
                    Segment::Mask(k) => Segment::Mask(k + *offset),
                    Segment::Slot(n) => {
                        if !seen.insert(n.clone()) {
                            return Err(TemplateError::SlotCollision(n.clone()));
                        }
                        seg.clone()
                    }
                    Segment::Literal(_) => seg.clone(),
                });
            }
            *offset += t.mask_count();
            Ok(())
        };
        push(first, &mut segments, &mut offset)?;
        for part in rest {
            push(joiner, &mut segments, &mut offset)?;
            push(part, &mut segments, &mut offset)?;
        }
        Self::from_segments(segments)
    }

    /// Substitutes slots and emits masks as `<mask_k>` markers.
    ///
    /// `spaces[k - 1]` is the class space of mask `k`. `golds` may be empty
    /// (inference-only rendering) or cover any subset of masks.
    pub fn render(
        &self,
        bindings: &BTreeMap<String, String>,
        spaces: &[&Verbalizer],
        golds: &BTreeMap<usize, String>,
    ) -> Result<RenderedPrompt, TemplateError> {
        let n = self.mask_count();
        if spaces.len() != n {
            return Err(TemplateError::ClassSpaceCount {
                expected: n,
                got: spaces.len(),
            });
        }
        if let Some(&k) = golds.keys().find(|&&k| k == 0 || k > n) {
            return Err(TemplateError::UnknownMask(k));
        }
        let mut text = String::new();
        for seg in &self.segments {
            match seg {
                Segment::Literal(s) => text.push_str(s),
                Segment::Slot(name) => {
                    let v = bindings
                        .get(name)
                        .ok_or_else(|| TemplateError::MissingBinding(name.clone()))?;
                    text.push_str(v);
                }
                Segment::Mask(k) => text.push_str(&mask_marker(*k)),
            }
        }
        let mut masks = Vec::with_capacity(n);
        for (i, space) in spaces.iter().enumerate() {
            let index = i + 1;
            let gold = golds.get(&index).cloned();
            if let Some(class) = &gold {
                if !space.contains_class(class) {
                    return Err(TemplateError::UnknownGoldClass {
                        mask: index,
                        class: class.clone(),
                        space: space.name().to_string(),
                    });
                }
            }
            masks.push(MaskSlot {
                index,
                role: space.name().to_string(),
                label_words: space.class_to_word().clone(),
                gold,
            });
        }
        Ok(RenderedPrompt { text, masks })
    }
}

fn flush(literal: &mut String, segments: &mut Vec<Segment>) {
    if !literal.is_empty() {
        segments.push(Segment::Literal(std::mem::take(literal)));
    }
}

/// `[MASK:k]` at the start of `s` → (k, byte length).
fn parse_mask(s: &str) -> Option<(usize, usize)> {
    let body = s.strip_prefix(MASK_OPEN)?;
    let digits = body.bytes().take_while(u8::is_ascii_digit).count();
    if digits == 0 || body.as_bytes().get(digits) != Some(&b']') {
        return None;
    }
    let k = body[..digits].parse().ok()?;
    Some((k, MASK_OPEN.len() + digits + 1))
}

impl fmt::Display for PromptTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for seg in &self.segments {
            match seg {
                Segment::Literal(s) => f.write_str(s)?,
                Segment::Slot(n) => write!(f, "{{{n}}}")?,
                Segment::Mask(k) => write!(f, "{MASK_OPEN}{k}]")?,
            }
        }
        Ok(())
    }
}

impl FromStr for PromptTemplate {
    type Err = TemplateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PromptTemplate::parse(s)
    }
}

/// One mask position of a rendered prompt together with its class space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaskSlot {
    pub index: usize,
    /// Name of the verbalizer; masks sharing a role are scored together.
    pub role: String,
    pub label_words: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold: Option<String>,
}

impl MaskSlot {
    pub fn has_class(&self, class: &str) -> bool {
        self.label_words.contains_key(class)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedPrompt {
    pub text: String,
    pub masks: Vec<MaskSlot>,
}

impl RenderedPrompt {
    pub fn gold(&self, index: usize) -> Option<&str> {
        self.masks
            .iter()
            .find(|m| m.index == index)
            .and_then(|m| m.gold.as_deref())
    }
}
