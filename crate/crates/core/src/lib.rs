//! Benchmark forge for taxonomy-grounded cloze tasks.
//!
//! The pipeline reads an ESCO-style skill/occupation taxonomy, renders three
//! prompt datasets from it (entity + relation classification, entity
//! linking, yes/no question answering), splits them into K-shot training
//! data and repeated evaluation samples, and scores model predictions
//! exchanged as JSONL files.

pub mod ingest;
pub mod jsonl;
pub mod promptkit;
pub mod seed;
pub mod taxonomy;
pub mod datagen;
pub mod splitkit;
pub mod score;
pub mod cli;
