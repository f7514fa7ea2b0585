//! Precision/recall of predicted contributor sets against self-reported ones.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use serde::Serialize;

/// Role substrings that mark a writing contribution, matched
/// case-insensitively. "writ" covers "writing", "wrote", "Writing – original
/// draft", and the other statement phrasings seen in practice.
pub const DEFAULT_WRITING_MATCHERS: [&str; 1] = ["writ"];

/// Authors whose reported roles include a writing role.
pub fn writing_authors(
    statement: &BTreeMap<String, BTreeSet<String>>,
    matchers: &[&str],
) -> BTreeSet<String> {
    statement
        .iter()
        .filter(|(_, roles)| {
            roles.iter().any(|role| {
                let role = role.to_lowercase();
                matchers.iter().any(|m| role.contains(&m.to_lowercase()))
            })
        })
        .map(|(author, _)| author.clone())
        .collect()
}

/// Confusion counts for one group of papers.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PRGroup {
    pub group: String,
    pub n_papers: usize,
    pub true_pos: u64,
    pub false_pos: u64,
    pub false_neg: u64,
}

impl PRGroup {
    /// TP / (TP + FP); `None` when undefined (no positive predictions).
    pub fn precision(&self) -> Option<Ratio<u64>> {
        let denom = self.true_pos + self.false_pos;
        (denom > 0).then(|| Ratio::new(self.true_pos, denom))
    }

    /// TP / (TP + FN); `None` when undefined (no positive truth).
    pub fn recall(&self) -> Option<Ratio<u64>> {
        let denom = self.true_pos + self.false_neg;
        (denom > 0).then(|| Ratio::new(self.true_pos, denom))
    }
}

/// Precision/recall per group plus a pooled total.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PRReport {
    pub per_group: Vec<PRGroup>,
    pub total: PRGroup,
    /// Truth papers absent from the predicted corpus; their authors counted
    /// as false negatives.
    pub missing_predicted: Vec<String>,
    /// Groups whose precision or recall was 0/0.
    pub undefined_flagged: Vec<String>,
}

/// Compares predicted contributor sets to ground-truth sets, paper by paper,
/// pooling confusion counts per group (and overall).
///
/// Every truth paper is scored; one missing from `predicted` counts all its
/// truth authors as false negatives and is flagged. Papers without ground
/// truth are ignored.
pub fn precision_recall(
    predicted: &BTreeMap<String, BTreeSet<String>>,
    truth: &BTreeMap<String, BTreeSet<String>>,
    groups: &BTreeMap<String, String>,
) -> PRReport {
    let empty = BTreeSet::new();
    let mut by_group: BTreeMap<String, PRGroup> = BTreeMap::new();
    let mut total = PRGroup {
        group: "total".to_string(),
        ..PRGroup::default()
    };
    let mut missing = Vec::new();

    for (paper_id, truth_set) in truth {
        let predicted_set = match predicted.get(paper_id) {
            Some(set) => set,
            None => {
                missing.push(paper_id.clone());
                &empty
            }
        };
        let tp = predicted_set.intersection(truth_set).count() as u64;
        let fp = predicted_set.difference(truth_set).count() as u64;
        let fn_count = truth_set.difference(predicted_set).count() as u64;

        let group_name = groups
            .get(paper_id)
            .cloned()
            .unwrap_or_else(|| "unknown".to_string());
        let group = by_group.entry(group_name.clone()).or_insert_with(|| PRGroup {
            group: group_name,
            ..PRGroup::default()
        });
        group.n_papers += 1;
        group.true_pos += tp;
        group.false_pos += fp;
        group.false_neg += fn_count;
        total.n_papers += 1;
        total.true_pos += tp;
        total.false_pos += fp;
        total.false_neg += fn_count;
    }

    let per_group: Vec<PRGroup> = by_group.into_values().collect();
    let undefined_flagged = per_group
        .iter()
        .chain(std::iter::once(&total))
        .filter(|g| g.precision().is_none() || g.recall().is_none())
        .map(|g| g.group.clone())
        .collect();

    PRReport {
        per_group,
        total,
        missing_predicted: missing,
        undefined_flagged,
    }
}
