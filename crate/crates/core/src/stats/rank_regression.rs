//! Regressions of contribution on author rank, stratified by group.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::ols::{ols_fit, DesignMatrix, RegressionReport};
use super::StatsError;
use crate::scan::SectionCategory;

/// What the regressions predict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseKind {
    UniqueMacros,
    Log1pUniqueMacros,
    Attention,
}

impl ResponseKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "unique-macros" => Some(ResponseKind::UniqueMacros),
            "log1p-unique-macros" => Some(ResponseKind::Log1pUniqueMacros),
            "attention" => Some(ResponseKind::Attention),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ResponseKind::UniqueMacros => "unique-macros",
            ResponseKind::Log1pUniqueMacros => "log1p-unique-macros",
            ResponseKind::Attention => "attention",
        }
    }
}

/// How author rank enters the design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RankEncoding {
    /// One dummy per rank 2..team size; rank 1 is the reference.
    PerRank,
    /// Dummies for middle and last authors; first author is the reference.
    FirstMiddleLast,
}

impl RankEncoding {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "per-rank" => Some(RankEncoding::PerRank),
            "first-middle-last" => Some(RankEncoding::FirstMiddleLast),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            RankEncoding::PerRank => "per-rank",
            RankEncoding::FirstMiddleLast => "first-middle-last",
        }
    }
}

/// Stratification variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Grouping {
    TeamSize,
    Section,
    Field,
}

impl Grouping {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "team-size" => Some(Grouping::TeamSize),
            "section" => Some(Grouping::Section),
            "field" => Some(Grouping::Field),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Grouping::TeamSize => "team_size",
            Grouping::Section => "section",
            Grouping::Field => "field",
        }
    }
}

/// One author-paper observation.
#[derive(Debug, Clone)]
pub struct ObsRow {
    pub paper_id: String,
    pub rank: u32,
    pub team_size: u32,
    pub section: Option<SectionCategory>,
    pub field: Option<String>,
    pub unique_macros: u64,
    pub attention: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RankRegressionOutput {
    pub reports: Vec<RegressionReport>,
    pub warnings: Vec<String>,
}

/// Default team sizes covered by the team-size stratification.
pub const DEFAULT_TEAM_SIZES: std::ops::RangeInclusive<u32> = 2..=8;

fn group_value(row: &ObsRow, grouping: Grouping) -> Option<String> {
    match grouping {
        Grouping::TeamSize => Some(row.team_size.to_string()),
        Grouping::Section => row.section.map(|s| s.as_str().to_string()),
        Grouping::Field => row.field.clone(),
    }
}

fn response_value(row: &ObsRow, response: ResponseKind) -> Option<f64> {
    match response {
        ResponseKind::UniqueMacros => Some(row.unique_macros as f64),
        ResponseKind::Log1pUniqueMacros => Some((row.unique_macros as f64).ln_1p()),
        ResponseKind::Attention => row.attention,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum RankClass {
    First,
    Middle,
    Last,
}

fn rank_class(row: &ObsRow) -> RankClass {
    if row.rank == 1 {
        RankClass::First
    } else if row.rank == row.team_size {
        RankClass::Last
    } else {
        RankClass::Middle
    }
}

/// Fits one model per group: response on rank dummies with rank 1 (the first
/// author) as the reference level.
///
/// Groups with a single rank category, no observations, or a deficient
/// design are skipped with a warning. Reports come back sorted by group
/// (numerically for team sizes).
pub fn rank_regression(
    rows: &[ObsRow],
    response: ResponseKind,
    encoding: RankEncoding,
    grouping: Grouping,
    groups: Option<&BTreeSet<String>>,
) -> Result<RankRegressionOutput, StatsError> {
    if rows.is_empty() {
        return Err(StatsError::EmptyTable);
    }

    let mut buckets: BTreeMap<String, Vec<&ObsRow>> = BTreeMap::new();
    for row in rows {
        if let (Some(group), Some(_)) = (group_value(row, grouping), response_value(row, response))
        {
            buckets.entry(group).or_default().push(row);
        }
    }

    let selected: Vec<String> = match groups {
        Some(wanted) => wanted.iter().cloned().collect(),
        None => match grouping {
            Grouping::TeamSize => DEFAULT_TEAM_SIZES.map(|t| t.to_string()).collect(),
            _ => buckets.keys().cloned().collect(),
        },
    };

    let mut reports = Vec::new();
    let mut warnings = Vec::new();
    for group in &selected {
        let Some(bucket) = buckets.get(group) else {
            warnings.push(format!("group {group}: no observations, skipped"));
            continue;
        };
        match fit_group(bucket, response, encoding) {
            Ok(mut report) => {
                report.grouping = grouping.as_str().to_string();
                report.group = group.clone();
                report.reference_term = "rank=1".to_string();
                reports.push(report);
            }
            Err(message) => warnings.push(format!("group {group}: {message}")),
        }
    }

    reports.sort_by(|a, b| match grouping {
        Grouping::TeamSize => {
            let na: u64 = a.group.parse().unwrap_or(u64::MAX);
            let nb: u64 = b.group.parse().unwrap_or(u64::MAX);
            na.cmp(&nb).then_with(|| a.group.cmp(&b.group))
        }
        _ => a.group.cmp(&b.group),
    });

    Ok(RankRegressionOutput { reports, warnings })
}

fn fit_group(
    bucket: &[&ObsRow],
    response: ResponseKind,
    encoding: RankEncoding,
) -> Result<RegressionReport, String> {
    let y: Vec<f64> = bucket
        .iter()
        .filter_map(|row| response_value(row, response))
        .collect();

    let (names, design_rows): (Vec<String>, Vec<Vec<f64>>) = match encoding {
        RankEncoding::PerRank => {
            let ranks: BTreeSet<u32> = bucket.iter().map(|r| r.rank).collect();
            if ranks.len() < 2 {
                return Err("single rank category, skipped".to_string());
            }
            let reference = *ranks.iter().next().unwrap();
            let dummies: Vec<u32> = ranks.iter().copied().filter(|r| *r != reference).collect();
            let mut names = vec!["intercept".to_string()];
            names.extend(dummies.iter().map(|r| format!("rank={r}")));
            let rows = bucket
                .iter()
                .map(|row| {
                    let mut design_row = vec![1.0];
                    design_row
                        .extend(dummies.iter().map(|r| f64::from(u8::from(row.rank == *r))));
                    design_row
                })
                .collect();
            (names, rows)
        }
        RankEncoding::FirstMiddleLast => {
            let classes: BTreeSet<RankClass> = bucket.iter().map(|r| rank_class(r)).collect();
            if classes.len() < 2 {
                return Err("single rank category, skipped".to_string());
            }
            let mut names = vec!["intercept".to_string()];
            let has_middle = classes.contains(&RankClass::Middle);
            let has_last = classes.contains(&RankClass::Last);
            if has_middle {
                names.push("middle".to_string());
            }
            if has_last {
                names.push("last".to_string());
            }
            let rows = bucket
                .iter()
                .map(|row| {
                    let class = rank_class(row);
                    let mut design_row = vec![1.0];
                    if has_middle {
                        design_row.push(f64::from(u8::from(class == RankClass::Middle)));
                    }
                    if has_last {
                        design_row.push(f64::from(u8::from(class == RankClass::Last)));
                    }
                    design_row
                })
                .collect();
            (names, rows)
        }
    };

    let design = DesignMatrix::from_rows(&design_rows).map_err(|e| e.to_string())?;
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    ols_fit(&design, &y, &name_refs).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(rank: u32, team_size: u32, unique: u64) -> ObsRow {
        ObsRow {
            paper_id: format!("p{rank}"),
            rank,
            team_size,
            section: None,
            field: None,
            unique_macros: unique,
            attention: None,
        }
    }

    fn section_obs(rank: u32, team_size: u32, section: SectionCategory, attention: f64) -> ObsRow {
        ObsRow {
            paper_id: "p".to_string(),
            rank,
            team_size,
            section: Some(section),
            field: None,
            unique_macros: 0,
            attention: Some(attention),
        }
    }

    #[test]
    fn team_sizes_two_to_eight_give_seven_reports() {
        let mut rows = Vec::new();
        for team in 2..=8u32 {
            for paper in 0..4 {
                for rank in 1..=team {
                    let mut row = obs(rank, team, (20 - rank as u64) + paper % 2);
                    row.paper_id = format!("t{team}p{paper}");
                    rows.push(row);
                }
            }
        }
        let output = rank_regression(
            &rows,
            ResponseKind::UniqueMacros,
            RankEncoding::PerRank,
            Grouping::TeamSize,
            None,
        )
        .unwrap();
        assert_eq!(output.reports.len(), 7);
        assert!(output.warnings.is_empty());
        let labels: Vec<String> = output.reports.iter().map(|r| r.group_label()).collect();
        assert_eq!(labels[0], "team_size=2");
        assert_eq!(labels[6], "team_size=8");
    }

    #[test]
    fn identical_contribution_across_ranks_is_null() {
        let mut rows = Vec::new();
        for paper in 0..10 {
            for rank in 1..=3u32 {
                let mut row = obs(rank, 3, 5);
                row.paper_id = format!("p{paper}");
                rows.push(row);
            }
        }
        let output = rank_regression(
            &rows,
            ResponseKind::UniqueMacros,
            RankEncoding::PerRank,
            Grouping::TeamSize,
            None,
        )
        .unwrap();
        let report = output
            .reports
            .iter()
            .find(|r| r.group == "3")
            .expect("team size 3 fitted");
        for term in report.terms.iter().filter(|t| t.name.starts_with("rank=")) {
            assert!(term.coef.abs() < 1e-12);
            assert!((term.p_value - 1.0).abs() < 1e-12);
        }
    }

    // Planted section effect: first authors put 0.8 of their attention in
    // methods, last authors 0.2. The last-author coefficient must be about
    // -0.6 and decisively significant.
    #[test]
    fn planted_methods_effect_is_recovered() {
        let mut rows = Vec::new();
        for paper in 0..40 {
            let jitter = if paper % 2 == 0 { 0.01 } else { -0.01 };
            rows.push(section_obs(1, 2, SectionCategory::Methods, 0.8 + jitter));
            rows.push(section_obs(2, 2, SectionCategory::Methods, 0.2 - jitter));
        }
        let output = rank_regression(
            &rows,
            ResponseKind::Attention,
            RankEncoding::FirstMiddleLast,
            Grouping::Section,
            None,
        )
        .unwrap();
        let report = &output.reports[0];
        assert_eq!(report.group_label(), "section=methods");
        let last = report.term("last").unwrap();
        assert!((last.coef + 0.6).abs() < 1e-9, "coef {}", last.coef);
        assert!(last.p_value < 0.01);
    }

    #[test]
    fn single_rank_group_is_skipped_with_warning() {
        let rows: Vec<ObsRow> = (0..5).map(|_| obs(1, 1, 3)).collect();
        let output = rank_regression(
            &rows,
            ResponseKind::UniqueMacros,
            RankEncoding::PerRank,
            Grouping::TeamSize,
            Some(&std::iter::once("1".to_string()).collect()),
        )
        .unwrap();
        assert!(output.reports.is_empty());
        assert_eq!(output.warnings.len(), 1);
        assert!(output.warnings[0].contains("single rank category"));
    }

    #[test]
    fn empty_table_errors() {
        assert!(matches!(
            rank_regression(
                &[],
                ResponseKind::UniqueMacros,
                RankEncoding::PerRank,
                Grouping::TeamSize,
                None
            ),
            Err(StatsError::EmptyTable)
        ));
    }

    // With a saturated per-rank design the dummy coefficients are exactly
    // the group-mean differences from rank 1.
    #[test]
    fn per_rank_coefs_equal_mean_differences()  {
        let responses: [(u32, &[f64]); 3] = [
            (1, &[4.0, 6.0, 5.0, 5.0]),
            (2, &[2.0, 3.0, 2.5, 4.5]),
            (3, &[1.0, 1.5, 0.5, 1.0]),
        ];
        let mut rows = Vec::new();
        for (rank, values) in responses {
            for (i, v) in values.iter().enumerate() {
                let mut row = obs(rank, 3, 0);
                row.paper_id = format!("p{i}");
                row.attention = Some(*v);
                rows.push(row);
            }
        }
        let output = rank_regression(
            &rows,
            ResponseKind::Attention,
            RankEncoding::PerRank,
            Grouping::TeamSize,
            None,
        )
        .unwrap();
        let report = &output.reports[0];
        let mean = |values: &[f64]| values.iter().sum::<f64>() / values.len() as f64;
        let mean_1 = mean(responses[0].1);
        for (rank, values) in &responses[1..] {
            let term = report.term(&format!("rank={rank}")).unwrap();
            let expected = mean(values) - mean_1;
            assert!(
                (term.coef - expected).abs() < 1e-9,
                "rank {rank}: {} vs {expected}",
                term.coef
            );
        }
        assert!((report.term("intercept").unwrap().coef - mean_1).abs() < 1e-9);
    }

    #[test]
    fn field_grouping_splits_by_tag() {
        let mut rows = Vec::new();
        for field in ["cs", "econ"] {
            for paper in 0..6 {
                for rank in 1..=2u32 {
                    let mut row = obs(rank, 2, if field == "cs" { 10 - rank as u64 } else { 5 });
                    row.paper_id = format!("{field}{paper}");
                    row.field = Some(field.to_string());
                    row.unique_macros += paper % 2;
                    rows.push(row);
                }
            }
        }
        let output = rank_regression(
            &rows,
            ResponseKind::UniqueMacros,
            RankEncoding::PerRank,
            Grouping::Field,
            None,
        )
        .unwrap();
        assert_eq!(output.reports.len(), 2);
        assert_eq!(output.reports[0].group, "cs");
        assert_eq!(output.reports[1].group, "econ");
    }
}
