//! Per-paper scan orchestration shared by the corpus-level passes.

use std::collections::{BTreeMap, BTreeSet};

use crate::ingest::{ConcatenatedSource, IngestError, PaperRecord};
use crate::scan::{
    extract_macro_definitions, extract_macro_usages, segment_sections, strip_comments, MacroDef,
    Section, SectionCategory,
};

/// Everything the scanner learned about one paper's source.
#[derive(Debug, Clone)]
pub struct ScannedSource {
    /// Comment-stripped text; all offsets below refer to it.
    pub text: String,
    pub defs: Vec<MacroDef>,
    pub skipped_defs: u64,
    pub sections: Vec<Section>,
    /// Usage offsets for every defined macro name.
    pub usages: BTreeMap<String, Vec<usize>>,
    pub lossy_utf8: bool,
}

impl ScannedSource {
    /// Sections whose heading could not be classified.
    pub fn unmatched_titles(&self) -> u64 {
        self.sections
            .iter()
            .filter(|s| s.category == SectionCategory::Other)
            .count() as u64
    }
}

/// Strips comments, then extracts definitions, sections, and usages of the
/// defined names.
pub fn scan_source(source: &ConcatenatedSource) -> ScannedSource {
    let text = strip_comments(&source.text);
    let scan = extract_macro_definitions(&text);
    let sections = segment_sections(&text);
    let names: BTreeSet<String> = scan.defs.iter().map(|d| d.name.clone()).collect();
    let usages = if names.is_empty() {
        BTreeMap::new()
    } else {
        extract_macro_usages(&text, &names)
    };
    ScannedSource {
        text,
        defs: scan.defs,
        skipped_defs: scan.skipped_defs,
        sections,
        usages,
        lossy_utf8: source.lossy_utf8,
    }
}

/// Reads and scans one paper.
pub fn scan_record(record: &PaperRecord) -> Result<ScannedSource, IngestError> {
    let source = crate::ingest::resolve_paper_sources(record)?;
    Ok(scan_source(&source))
}

/// Runs `f` on a rayon pool with exactly `workers` threads. Output must not
/// depend on the worker count; this only bounds parallelism.
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> R {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("failed to build worker pool");
    pool.install(f)
}
