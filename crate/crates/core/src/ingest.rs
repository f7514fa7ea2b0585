//! Corpus manifest loading, validation, and source resolution.
//!
//! The manifest is JSON Lines: one paper per line. Source paths are stored
//! relative to a corpus root and resolved against it at load time.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest line {line}: {message}")]
    MalformedLine { line: usize, message: String },
    #[error("manifest line {line}: bad date {value:?} (expected YYYY-MM-DD)")]
    BadDate { line: usize, value: String },
    #[error("manifest line {line}: duplicate paper_id {paper_id:?}")]
    DuplicatePaperId { line: usize, paper_id: String },
    #[error("unreadable source file {path}")]
    UnreadableSource { path: PathBuf },
}

/// One paper of the corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PaperRecord {
    pub paper_id: String,
    pub date: NaiveDate,
    /// Ordered author ids; index 0 is rank 1 (first author).
    pub authors: Vec<String>,
    /// Discipline tag, e.g. "cs" or "econ".
    pub field: String,
    /// Resolved source file paths, in manifest order.
    pub sources: Vec<PathBuf>,
    /// Self-reported roles per author, when available.
    pub contribution_statement: Option<BTreeMap<String, BTreeSet<String>>>,
    /// Per-author edit counts from an editing history, when available.
    pub edit_counts: Option<BTreeMap<String, u64>>,
}

impl PaperRecord {
    pub fn team_size(&self) -> usize {
        self.authors.len()
    }
}

/// The merged source text of one paper.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcatenatedSource {
    pub paper_id: String,
    pub text: String,
    /// True when any source byte was not valid UTF-8 and was replaced.
    pub lossy_utf8: bool,
}

#[derive(Debug, Deserialize)]
struct RawRecord {
    paper_id: String,
    date: String,
    authors: Vec<String>,
    field: String,
    sources: Vec<String>,
    #[serde(default)]
    contribution_statement: Option<BTreeMap<String, Vec<String>>>,
    #[serde(default)]
    edit_counts: Option<BTreeMap<String, u64>>,
}

/// Loads a JSON Lines manifest, resolving source paths against `corpus_root`.
///
/// Records come back in file order; blank lines are skipped; unknown keys are
/// ignored. Errors carry the 1-based line number.
pub fn load_manifest(path: &Path, corpus_root: &Path) -> Result<Vec<PaperRecord>, IngestError> {
    let content = fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut records = Vec::new();
    let mut seen_ids: BTreeSet<String> = BTreeSet::new();
    for (idx, line) in content.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord =
            serde_json::from_str(line).map_err(|e| IngestError::MalformedLine {
                line: line_no,
                message: e.to_string(),
            })?;
        let date = NaiveDate::parse_from_str(&raw.date, "%Y-%m-%d").map_err(|_| {
            IngestError::BadDate {
                line: line_no,
                value: raw.date.clone(),
            }
        })?;
        if !seen_ids.insert(raw.paper_id.clone()) {
            return Err(IngestError::DuplicatePaperId {
                line: line_no,
                paper_id: raw.paper_id,
            });
        }
        records.push(PaperRecord {
            paper_id: raw.paper_id,
            date,
            authors: raw.authors,
            field: raw.field,
            sources: raw.sources.iter().map(|s| corpus_root.join(s)).collect(),
            contribution_statement: raw
                .contribution_statement
                .map(|m| m.into_iter().map(|(k, v)| (k, v.into_iter().collect())).collect()),
            edit_counts: raw.edit_counts,
        });
    }
    Ok(records)
}

/// Concatenates a paper's source files in manifest order, separated by a
/// newline. `\input`/`\include` directives are left as-is; the manifest is
/// expected to list every file.
///
/// Non-UTF-8 bytes are replaced with U+FFFD and the result is flagged lossy.
pub fn resolve_paper_sources(record: &PaperRecord) -> Result<ConcatenatedSource, IngestError> {
    let mut parts = Vec::with_capacity(record.sources.len());
    let mut lossy = false;
    for path in &record.sources {
        let bytes = fs::read(path).map_err(|_| IngestError::UnreadableSource {
            path: path.clone(),
        })?;
        match String::from_utf8_lossy(&bytes) {
            std::borrow::Cow::Borrowed(s) => parts.push(s.to_string()),
            std::borrow::Cow::Owned(s) => {
                lossy = true;
                parts.push(s);
            }
        }
    }
    Ok(ConcatenatedSource {
        paper_id: record.paper_id.clone(),
        text: parts.join("\n"),
        lossy_utf8: lossy,
    })
}

/// One rejected record and why.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rejection {
    pub paper_id: String,
    pub reason: String,
}

/// Summary of corpus validation. Rejected records are excluded downstream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub papers_total: usize,
    pub papers_accepted: usize,
    pub unique_authors: usize,
    pub date_min: Option<NaiveDate>,
    pub date_max: Option<NaiveDate>,
    pub rejected: Vec<Rejection>,
}

fn check_record(record: &PaperRecord) -> Result<(), String> {
    if record.authors.is_empty() {
        return Err("empty authors".to_string());
    }
    let mut seen = BTreeSet::new();
    for author in &record.authors {
        if !seen.insert(author) {
            return Err(format!("duplicate author id {author:?}"));
        }
    }
    for path in &record.sources {
        let readable = fs::File::open(path).is_ok() && path.is_file();
        if !readable {
            return Err(format!("unreadable source {}", path.display()));
        }
    }
    Ok(())
}

/// Validates records without mutating them; a pure function of the records
/// and the files they point at. Problems are reported, not raised.
pub fn validate_corpus(records: &[PaperRecord]) -> ValidationReport {
    let mut rejected = Vec::new();
    let mut authors: BTreeSet<&str> = BTreeSet::new();
    let mut date_min: Option<NaiveDate> = None;
    let mut date_max: Option<NaiveDate> = None;
    let mut accepted = 0usize;
    for record in records {
        match check_record(record) {
            Ok(()) => {
                accepted += 1;
                authors.extend(record.authors.iter().map(String::as_str));
                date_min = Some(date_min.map_or(record.date, |d| d.min(record.date)));
                date_max = Some(date_max.map_or(record.date, |d| d.max(record.date)));
            }
            Err(reason) => rejected.push(Rejection {
                paper_id: record.paper_id.clone(),
                reason,
            }),
        }
    }
    ValidationReport {
        papers_total: records.len(),
        papers_accepted: accepted,
        unique_authors: authors.len(),
        date_min,
        date_max,
        rejected,
    }
}

/// Splits records into the accepted subset and the validation report.
pub fn partition_valid(records: Vec<PaperRecord>) -> (Vec<PaperRecord>, ValidationReport) {
    let report = validate_corpus(&records);
    let rejected_ids: BTreeSet<&str> = report
        .rejected
        .iter()
        .map(|r| r.paper_id.as_str())
        .collect();
    let accepted = records
        .into_iter()
        .filter(|r| !rejected_ids.contains(r.paper_id.as_str()))
        .collect();
    (accepted, report)
}
