//! Per-author contribution shares and section attention.
//!
//! A paper's macro keys are matched against each author's prior history;
//! the count of matched unique keys, normalized across the team, is the
//! author's contribution share. Shares are exact rationals.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;

use crate::db::{canonical_key, AuthorMacroDB, MacroKey, TiePolicy};
use crate::ingest::PaperRecord;
use crate::pipeline::{scan_record, ScannedSource};
use crate::scan::{MacroDef, Section, SectionCategory};
use crate::tables::{SectionRow, ShareRow};

/// One author's slice of a paper's attribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthorAttribution {
    pub author_id: String,
    /// 1-based byline position.
    pub rank: u32,
    pub attributed_keys: BTreeSet<MacroKey>,
    pub unique_count: u64,
    /// `None` when the whole paper is unattributable (team total is zero).
    pub share: Option<Ratio<u64>>,
}

/// Attribution of one paper across its authors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributionResult {
    pub paper_id: String,
    pub per_author: Vec<AuthorAttribution>,
}

impl AttributionResult {
    /// False when no key matched any author's history.
    pub fn is_attributable(&self) -> bool {
        self.per_author.iter().any(|a| a.unique_count > 0)
    }

    pub fn team_size(&self) -> usize {
        self.per_author.len()
    }
}

/// Matches a paper's keys against each author's history and normalizes the
/// matched counts into shares.
///
/// Every definition in the source contributes a key; keys nobody knows
/// simply match no one. A key known to several authors is attributed to all
/// of them. When the team total is zero all shares are undefined.
pub fn attribute_paper(
    record: &PaperRecord,
    defs: &[MacroDef],
    db: &AuthorMacroDB,
    tie_policy: TiePolicy,
) -> AttributionResult {
    let paper_keys: BTreeSet<MacroKey> = defs.iter().map(canonical_key).collect();
    let mut per_author: Vec<AuthorAttribution> = record
        .authors
        .iter()
        .enumerate()
        .map(|(idx, author_id)| {
            let known = db.macros_known_before(author_id, record.date, tie_policy);
            let attributed_keys: BTreeSet<MacroKey> =
                paper_keys.intersection(&known).cloned().collect();
            let unique_count = attributed_keys.len() as u64;
            AuthorAttribution {
                author_id: author_id.clone(),
                rank: idx as u32 + 1,
                attributed_keys,
                unique_count,
                share: None,
            }
        })
        .collect();

    let total: u64 = per_author.iter().map(|a| a.unique_count).sum();
    if total > 0 {
        for author in &mut per_author {
            author.share = Some(Ratio::new(author.unique_count, total));
        }
    }
    AttributionResult {
        paper_id: record.paper_id.clone(),
        per_author,
    }
}

/// One (author, section) attention cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttentionRow {
    pub author_id: String,
    pub rank: u32,
    pub section: SectionCategory,
    /// Distinct attributed keys of this author used at least once in this
    /// section family.
    pub used_unique: u64,
    pub attention: Ratio<u64>,
}

/// Per-author distribution of attention over a paper's section families.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectionAttention {
    pub paper_id: String,
    pub rows: Vec<AttentionRow>,
}

fn section_of(sections: &[Section], offset: usize) -> Option<SectionCategory> {
    sections
        .iter()
        .find(|s| s.body_span.contains(&offset))
        .map(|s| s.category)
}

/// Counts, per author and section family, the distinct attributed keys with
/// at least one usage there, then normalizes within the author so each
/// author's attention sums to one. Authors with no used keys emit no rows.
pub fn section_attention(
    record: &PaperRecord,
    attribution: &AttributionResult,
    sections: &[Section],
    usages: &BTreeMap<String, Vec<usize>>,
) -> SectionAttention {
    let categories: BTreeSet<SectionCategory> = sections.iter().map(|s| s.category).collect();
    let mut rows = Vec::new();

    for author in &attribution.per_author {
        let mut used: BTreeMap<SectionCategory, BTreeSet<&MacroKey>> = BTreeMap::new();
        for key in &author.attributed_keys {
            let Some(offsets) = usages.get(key.name()) else {
                continue;
            };
            for &offset in offsets {
                if let Some(category) = section_of(sections, offset) {
                    used.entry(category).or_default().insert(key);
                }
            }
        }
        let total: u64 = used.values().map(|keys| keys.len() as u64).sum();
        if total == 0 {
            continue;
        }
        for &category in &categories {
            let count = used.get(&category).map_or(0, |keys| keys.len() as u64);
            rows.push(AttentionRow {
                author_id: author.author_id.clone(),
                rank: author.rank,
                section: category,
                used_unique: count,
                attention: Ratio::new(count, total),
            });
        }
    }
    SectionAttention {
        paper_id: record.paper_id.clone(),
        rows,
    }
}

/// Corpus-run options.
#[derive(Debug, Clone, Serialize)]
pub struct AttributionOptions {
    pub tie_policy: TiePolicy,
    /// Papers with fewer authors are counted but excluded from the tables.
    pub min_team_size: usize,
}

impl Default for AttributionOptions {
    fn default() -> Self {
        AttributionOptions {
            tie_policy: TiePolicy::Strict,
            min_team_size: 2,
        }
    }
}

/// Counters for a corpus attribution run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RunTally {
    pub papers_total: usize,
    pub papers_attributed: usize,
    pub below_min_team_size: usize,
    pub unattributable: usize,
    pub read_failures: Vec<String>,
    pub skipped_defs: u64,
    pub non_utf8_papers: u64,
    pub unmatched_titles: u64,
}

/// Output of a corpus attribution run: share and attention tables in
/// canonical order (paper id, then rank, then section), plus the tally.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusAttribution {
    pub share_rows: Vec<ShareRow>,
    pub section_rows: Vec<SectionRow>,
    pub tally: RunTally,
}

enum PaperOutcome {
    ReadFailed(String),
    Scanned {
        scanned: Box<ScannedSource>,
        result: AttributionResult,
    },
}

/// Attributes every paper of the corpus against a prebuilt database.
///
/// Papers are scanned in parallel; results are merged in a canonical order
/// so the output is identical for any worker count or manifest permutation.
pub fn run_corpus_attribution(
    records: &[PaperRecord],
    db: &AuthorMacroDB,
    options: &AttributionOptions,
) -> CorpusAttribution {
    let outcomes: Vec<(usize, PaperOutcome)> = records
        .par_iter()
        .enumerate()
        .map(|(idx, record)| {
            let outcome = match scan_record(record) {
                Err(e) => PaperOutcome::ReadFailed(format!("{}: {e}", record.paper_id)),
                Ok(scanned) => {
                    let result =
                        attribute_paper(record, &scanned.defs, db, options.tie_policy);
                    PaperOutcome::Scanned {
                        scanned: Box::new(scanned),
                        result,
                    }
                }
            };
            (idx, outcome)
        })
        .collect();

    let mut tally = RunTally {
        papers_total: records.len(),
        ..RunTally::default()
    };
    let mut share_rows = Vec::new();
    let mut section_rows = Vec::new();

    for (idx, outcome) in outcomes {
        let record = &records[idx];
        match outcome {
            PaperOutcome::ReadFailed(message) => tally.read_failures.push(message),
            PaperOutcome::Scanned { scanned, result } => {
                tally.skipped_defs += scanned.skipped_defs;
                tally.non_utf8_papers += u64::from(scanned.lossy_utf8);
                tally.unmatched_titles += scanned.unmatched_titles();
                if record.team_size() < options.min_team_size {
                    tally.below_min_team_size += 1;
                    continue;
                }
                if !result.is_attributable() {
                    tally.unattributable += 1;
                    continue;
                }
                tally.papers_attributed += 1;
                let team_size = result.team_size() as u32;
                for author in &result.per_author {
                    share_rows.push(ShareRow {
                        paper_id: record.paper_id.clone(),
                        author_id: author.author_id.clone(),
                        rank: author.rank,
                        team_size,
                        unique_macros: author.unique_count,
                        share: author.share.expect("attributable paper has shares"),
                    });
                }
                let attention =
                    section_attention(record, &result, &scanned.sections, &scanned.usages);
                for row in attention.rows {
                    section_rows.push(SectionRow {
                        paper_id: record.paper_id.clone(),
                        author_id: row.author_id,
                        rank: row.rank,
                        team_size,
                        section: row.section,
                        used_unique: row.used_unique,
                        attention: row.attention,
                    });
                }
            }
        }
    }

    share_rows.sort_by(|a, b| (&a.paper_id, a.rank).cmp(&(&b.paper_id, b.rank)));
    section_rows.sort_by(|a, b| {
        (&a.paper_id, a.rank, a.section).cmp(&(&b.paper_id, b.rank, b.section))
    });
    tally.read_failures.sort();

    CorpusAttribution {
        share_rows,
        section_rows,
        tally,
    }
}
