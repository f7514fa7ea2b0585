//! Infers per-author writing contributions in coauthored LaTeX papers.
//!
//! The pipeline mines macro definitions from LaTeX sources, keeps a
//! chronological per-author history of canonical macro keys, matches a
//! paper's macros against each coauthor's history to estimate contribution
//! shares, locates macro usages within `\section` spans to measure each
//! author's per-section attention, and fits rank regressions and validation
//! statistics over the resulting tables.

pub mod attribution;
pub mod db;
pub mod ingest;
pub mod pipeline;
pub mod scan;
pub mod stats;
pub mod tables;
