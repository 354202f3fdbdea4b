//! Cloze prompt templates, sub-prompt composition and verbalizers.

pub mod presets;
mod template;
mod verbalizer;

pub use presets::{EcrcStyle, PresetError, Presets, TaskPrompt};
pub use template::{mask_marker, MaskSlot, PromptTemplate, RenderedPrompt, Segment, TemplateError};
pub use verbalizer::{Verbalizer, VerbalizerError};
