//! Top-level section segmentation and heading classification.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::{brace_group_at, bracket_group_at, control_word_at, skip_ws, verbatim_spans};

/// Canonical section families of a scientific paper.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionCategory {
    FrontMatter,
    Introduction,
    RelatedWork,
    Preliminaries,
    Methods,
    Experiments,
    Results,
    Discussion,
    Conclusion,
    Acknowledgments,
    Appendix,
    Other,
}

pub const ALL_CATEGORIES: [SectionCategory; 12] = [
    SectionCategory::FrontMatter,
    SectionCategory::Introduction,
    SectionCategory::RelatedWork,
    SectionCategory::Preliminaries,
    SectionCategory::Methods,
    SectionCategory::Experiments,
    SectionCategory::Results,
    SectionCategory::Discussion,
    SectionCategory::Conclusion,
    SectionCategory::Acknowledgments,
    SectionCategory::Appendix,
    SectionCategory::Other,
];

impl SectionCategory {
    pub fn as_str(&self) -> &'static str {
        match self {
            SectionCategory::FrontMatter => "front_matter",
            SectionCategory::Introduction => "introduction",
            SectionCategory::RelatedWork => "related_work",
            SectionCategory::Preliminaries => "preliminaries",
            SectionCategory::Methods => "methods",
            SectionCategory::Experiments => "experiments",
            SectionCategory::Results => "results",
            SectionCategory::Discussion => "discussion",
            SectionCategory::Conclusion => "conclusion",
            SectionCategory::Acknowledgments => "acknowledgments",
            SectionCategory::Appendix => "appendix",
            SectionCategory::Other => "other",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        ALL_CATEGORIES.iter().copied().find(|c| c.as_str() == s)
    }
}

impl fmt::Display for SectionCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One top-level section of a document.
///
/// `body_span` is the full tile of text the section owns, from the `\section`
/// command's backslash (or position 0 for front matter) up to the next
/// section or end of text. Tiles are disjoint, ordered, and cover the text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    pub category: SectionCategory,
    pub raw_title: String,
    pub body_span: Range<usize>,
}

/// Synonym table mapping normalized headings to categories. Longer entries
/// take precedence in the substring pass, so "experimental results" wins
/// over "results".
const SYNONYMS: [(&str, SectionCategory); 38] = [
    ("introduction", SectionCategory::Introduction),
    ("intro", SectionCategory::Introduction),
    ("related work", SectionCategory::RelatedWork),
    ("related works", SectionCategory::RelatedWork),
    ("prior work", SectionCategory::RelatedWork),
    ("previous work", SectionCategory::RelatedWork),
    ("literature review", SectionCategory::RelatedWork),
    ("preliminaries", SectionCategory::Preliminaries),
    ("preliminary", SectionCategory::Preliminaries),
    ("background", SectionCategory::Preliminaries),
    ("notation", SectionCategory::Preliminaries),
    ("problem setting", SectionCategory::Preliminaries),
    ("methods", SectionCategory::Methods),
    ("method", SectionCategory::Methods),
    ("methodology", SectionCategory::Methods),
    ("materials and methods", SectionCategory::Methods),
    ("approach", SectionCategory::Methods),
    ("experiments", SectionCategory::Experiments),
    ("experiment", SectionCategory::Experiments),
    ("experimental setup", SectionCategory::Experiments),
    ("experimental results", SectionCategory::Experiments),
    ("evaluation", SectionCategory::Experiments),
    ("results", SectionCategory::Results),
    ("result", SectionCategory::Results),
    ("discussion", SectionCategory::Discussion),
    ("discussions", SectionCategory::Discussion),
    ("conclusion", SectionCategory::Conclusion),
    ("conclusions", SectionCategory::Conclusion),
    ("concluding remarks", SectionCategory::Conclusion),
    ("summary", SectionCategory::Conclusion),
    ("acknowledgments", SectionCategory::Acknowledgments),
    ("acknowledgements", SectionCategory::Acknowledgments),
    ("acknowledgment", SectionCategory::Acknowledgments),
    ("acknowledgement", SectionCategory::Acknowledgments),
    ("appendix", SectionCategory::Appendix),
    ("appendices", SectionCategory::Appendix),
    ("supplementary material", SectionCategory::Appendix),
    ("supplemental material", SectionCategory::Appendix),
];

/// Maps a raw heading to its category: lowercase, strip punctuation and
/// digits, then look up the synonym table (exact match first, then longest
/// contained synonym). Unmatched headings map to `Other`.
///
/// "conception" is deliberately absent from the table and classifies as
/// `Other`.
pub fn canonicalize_section_title(raw_title: &str) -> SectionCategory {
    let normalized: String = raw_title
        .to_lowercase()
        .chars()
        .map(|c| if c.is_alphabetic() { c } else { ' ' })
        .collect();
    let normalized = normalized.split_whitespace().collect::<Vec<_>>().join(" ");

    for (key, cat) in SYNONYMS {
        if normalized == key {
            return cat;
        }
    }
    // Longest synonym first; ties broken alphabetically for determinism.
    let mut by_len: Vec<_> = SYNONYMS.to_vec();
    by_len.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.0.cmp(b.0)));
    for (key, cat) in by_len {
        if contains_phrase(&normalized, key) {
            return cat;
        }
    }
    SectionCategory::Other
}

/// Whole-word phrase containment: "results" matches inside "main results"
/// but not inside "resultsx".
fn contains_phrase(haystack: &str, phrase: &str) -> bool {
    let mut start = 0;
    while let Some(pos) = haystack[start..].find(phrase) {
        let at = start + pos;
        let before_ok = at == 0 || haystack.as_bytes()[at - 1] == b' ';
        let end = at + phrase.len();
        let after_ok = end == haystack.len() || haystack.as_bytes()[end] == b' ';
        if before_ok && after_ok {
            return true;
        }
        start = at + 1;
    }
    false
}

/// Splits comment-stripped text at `\section` and `\section*` commands.
///
/// `\subsection` and deeper levels never open a new span. An `\appendix`
/// switch reclassifies every subsequent section as appendix. The region
/// before the first `\section` is always emitted as front matter, and the
/// returned spans tile the input exactly.
pub fn segment_sections(text: &str) -> Vec<Section> {
    let bytes = text.as_bytes();
    let verbatim = verbatim_spans(text);

    struct Heading {
        start: usize,
        raw_title: String,
        in_appendix: bool,
    }

    let mut headings: Vec<Heading> = Vec::new();
    let mut in_appendix = false;
    let mut v = 0;
    let mut i = 0;
    while i < bytes.len() {
        if v < verbatim.len() && i >= verbatim[v].start {
            i = verbatim[v].end;
            v += 1;
            continue;
        }
        if bytes[i] != b'\\' {
            i += 1;
            continue;
        }
        let (word, past) = control_word_at(bytes, i);
        match word {
            b"appendix" => {
                in_appendix = true;
                i = past;
            }
            b"section" => {
                let mut j = past;
                if j < bytes.len() && bytes[j] == b'*' {
                    j += 1;
                }
                j = skip_ws(bytes, j);
                // `\section[short]{long}` classifies by the long title.
                if j < bytes.len() && bytes[j] == b'[' {
                    match bracket_group_at(bytes, j) {
                        Some((_, after)) => j = skip_ws(bytes, after),
                        None => {
                            i = past;
                            continue;
                        }
                    }
                }
                match brace_group_at(bytes, j) {
                    Some((title, after)) => {
                        headings.push(Heading {
                            start: i,
                            raw_title: text[title].to_string(),
                            in_appendix,
                        });
                        i = after;
                    }
                    // No title group: not a section heading.
                    None => i = past,
                }
            }
            [] => i = past + 1,
            _ => i = past,
        }
    }

    let mut sections = Vec::with_capacity(headings.len() + 1);
    let first_start = headings.first().map_or(text.len(), |h| h.start);
    sections.push(Section {
        category: SectionCategory::FrontMatter,
        raw_title: String::new(),
        body_span: 0..first_start,
    });
    for (idx, heading) in headings.iter().enumerate() {
        let end = headings.get(idx + 1).map_or(text.len(), |h| h.start);
        let category = if heading.in_appendix {
            SectionCategory::Appendix
        } else {
            canonicalize_section_title(&heading.raw_title)
        };
        sections.push(Section {
            category,
            raw_title: heading.raw_title.clone(),
            body_span: heading.start..end,
        });
    }
    sections
}
