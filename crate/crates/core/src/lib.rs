//! Deterministic fusion of per-modality chemistry-extraction outputs
//! (figures, texts, tables) into complete reaction records: R-group
//! resolution for substrate-scope diagrams, reaction condition alignment,
//! and exact/soft-match scoring.

pub mod align;
pub mod docmodel;
pub mod element;
pub mod eval;
pub mod exec;
pub mod molgraph;
pub mod pipeline;
pub mod report;
pub mod rgroup;
