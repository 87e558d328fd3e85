//! Geometry-problem tooling: a small formal language for diagram facts (CDL),
//! evaluation metrics over it, rollout rewards, the lookup-free quantizer's
//! arithmetic, prompt sequence assembly, and file ingestion.

pub mod cdl;
pub mod cli;
pub mod ingest;
pub mod metrics;
pub mod prompting;
pub mod quantizer;
pub mod rewards;
