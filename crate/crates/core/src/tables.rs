//! CSV table schemas for the pipeline outputs.
//!
//! All files are RFC 4180 with LF line endings, UTF-8, headers always
//! present. Exact rationals are serialized as numerator/denominator columns
//! next to a 15-significant-digit decimal.

use std::collections::BTreeMap;

use num_rational::Ratio;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::scan::SectionCategory;
use crate::stats::{CorrelationReport, ObsRow, PRReport, RegressionReport};

#[derive(Debug, Error)]
pub enum TableError {
    #[error("csv: {0}")]
    Csv(String),
    #[error("unexpected header: expected {expected:?}, found {found:?}")]
    Header { expected: String, found: String },
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
}

impl From<csv::Error> for TableError {
    fn from(e: csv::Error) -> Self {
        TableError::Csv(e.to_string())
    }
}

pub const SHARES_HEADER: [&str; 8] = [
    "paper_id",
    "author_id",
    "rank",
    "team_size",
    "unique_macros",
    "share_num",
    "share_den",
    "share",
];

pub const SECTIONS_HEADER: [&str; 9] = [
    "paper_id",
    "author_id",
    "rank",
    "team_size",
    "section",
    "used_unique",
    "attention_num",
    "attention_den",
    "attention",
];

pub const REGRESSION_HEADER: [&str; 10] = [
    "grouping", "group", "term", "coef", "std_err", "t", "p", "ci_lo", "ci_hi", "n",
];

pub const VALIDATION_HEADER: [&str; 4] = ["group", "n_papers", "precision", "recall"];

pub const CORRELATION_HEADER: [&str; 3] = ["n", "rho", "p"];

/// One row of `shares.csv`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareRow {
    pub paper_id: String,
    pub author_id: String,
    pub rank: u32,
    pub team_size: u32,
    pub unique_macros: u64,
    pub share: Ratio<u64>,
}

/// One row of `sections.csv`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectionRow {
    pub paper_id: String,
    pub author_id: String,
    pub rank: u32,
    pub team_size: u32,
    pub section: SectionCategory,
    pub used_unique: u64,
    pub attention: Ratio<u64>,
}

/// Plain decimal with the given number of significant digits.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format_float(x);
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - exponent).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Deterministic float rendering: shortest round-trip form, normalized
/// negative zero, lowercase specials.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    format!("{x}")
}

fn ratio_decimal(r: Ratio<u64>) -> String {
    let value = r.to_f64().unwrap_or(f64::NAN);
    format_sig(value, 15)
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String, TableError> {
    let bytes = w.into_inner().map_err(|e| TableError::Csv(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| TableError::Csv(e.to_string()))
}

pub fn write_shares_csv(rows: &[ShareRow]) -> Result<String, TableError> {
    let mut w = writer();
    w.write_record(SHARES_HEADER)?;
    for row in rows {
        w.write_record([
            row.paper_id.as_str(),
            row.author_id.as_str(),
            &row.rank.to_string(),
            &row.team_size.to_string(),
            &row.unique_macros.to_string(),
            &row.share.numer().to_string(),
            &row.share.denom().to_string(),
            &ratio_decimal(row.share),
        ])?;
    }
    finish(w)
}

pub fn write_sections_csv(rows: &[SectionRow]) -> Result<String, TableError> {
    let mut w = writer();
    w.write_record(SECTIONS_HEADER)?;
    for row in rows {
        w.write_record([
            row.paper_id.as_str(),
            row.author_id.as_str(),
            &row.rank.to_string(),
            &row.team_size.to_string(),
            row.section.as_str(),
            &row.used_unique.to_string(),
            &row.attention.numer().to_string(),
            &row.attention.denom().to_string(),
            &ratio_decimal(row.attention),
        ])?;
    }
    finish(w)
}

fn check_header(found: &csv::StringRecord, expected: &[&str]) -> Result<(), TableError> {
    let found_vec: Vec<&str> = found.iter().collect();
    if found_vec != expected {
        return Err(TableError::Header {
            expected: expected.join(","),
            found: found_vec.join(","),
        });
    }
    Ok(())
}

fn parse_field<T: std::str::FromStr>(
    record: &csv::StringRecord,
    idx: usize,
    row: usize,
) -> Result<T, TableError> {
    record
        .get(idx)
        .ok_or_else(|| TableError::Row {
            row,
            message: format!("missing column {idx}"),
        })?
        .parse()
        .map_err(|_| TableError::Row {
            row,
            message: format!("bad value in column {idx}"),
        })
}

fn parse_ratio(
    record: &csv::StringRecord,
    num_idx: usize,
    row: usize,
) -> Result<Ratio<u64>, TableError> {
    let numer: u64 = parse_field(record, num_idx, row)?;
    let denom: u64 = parse_field(record, num_idx + 1, row)?;
    if denom == 0 {
        return Err(TableError::Row {
            row,
            message: "zero denominator".to_string(),
        });
    }
    Ok(Ratio::new(numer, denom))
}

pub fn read_shares_csv(text: &str) -> Result<Vec<ShareRow>, TableError> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    check_header(reader.headers()?, &SHARES_HEADER)?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 2;
        rows.push(ShareRow {
            paper_id: parse_field(&record, 0, row)?,
            author_id: parse_field(&record, 1, row)?,
            rank: parse_field(&record, 2, row)?,
            team_size: parse_field(&record, 3, row)?,
            unique_macros: parse_field(&record, 4, row)?,
            share: parse_ratio(&record, 5, row)?,
        });
    }
    Ok(rows)
}

pub fn read_sections_csv(text: &str) -> Result<Vec<SectionRow>, TableError> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    check_header(reader.headers()?, &SECTIONS_HEADER)?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 2;
        let section_name: String = parse_field(&record, 4, row)?;
        let section = SectionCategory::parse(&section_name).ok_or_else(|| TableError::Row {
            row,
            message: format!("unknown section {section_name:?}"),
        })?;
        rows.push(SectionRow {
            paper_id: parse_field(&record, 0, row)?,
            author_id: parse_field(&record, 1, row)?,
            rank: parse_field(&record, 2, row)?,
            team_size: parse_field(&record, 3, row)?,
            section,
            used_unique: parse_field(&record, 5, row)?,
            attention: parse_ratio(&record, 6, row)?,
        });
    }
    Ok(rows)
}

/// Observations for the team-size and field regressions (response: unique
/// macro count). Field tags come from a paper-id lookup when provided.
pub fn obs_from_share_rows(
    rows: &[ShareRow],
    fields: Option<&BTreeMap<String, String>>,
) -> Vec<ObsRow> {
    rows.iter()
        .map(|row| ObsRow {
            paper_id: row.paper_id.clone(),
            rank: row.rank,
            team_size: row.team_size,
            section: None,
            field: fields.and_then(|m| m.get(&row.paper_id).cloned()),
            unique_macros: row.unique_macros,
            attention: None,
        })
        .collect()
}

/// Observations for the per-section regressions (response: attention).
pub fn obs_from_section_rows(rows: &[SectionRow]) -> Vec<ObsRow> {
    rows.iter()
        .map(|row| ObsRow {
            paper_id: row.paper_id.clone(),
            rank: row.rank,
            team_size: row.team_size,
            section: Some(row.section),
            field: None,
            unique_macros: row.used_unique,
            attention: row.attention.to_f64(),
        })
        .collect()
}

pub fn write_regression_csv(reports: &[RegressionReport]) -> Result<String, TableError> {
    let mut w = writer();
    w.write_record(REGRESSION_HEADER)?;
    for report in reports {
        for term in &report.terms {
            w.write_record([
                report.grouping.as_str(),
                report.group.as_str(),
                term.name.as_str(),
                &format_float(term.coef),
                &format_float(term.std_err),
                &format_float(term.t_stat),
                &format_float(term.p_value),
                &format_float(term.ci_lo),
                &format_float(term.ci_hi),
                &report.n.to_string(),
            ])?;
        }
    }
    finish(w)
}

pub fn write_validation_csv(report: &PRReport) -> Result<String, TableError> {
    let mut w = writer();
    w.write_record(VALIDATION_HEADER)?;
    for group in report.per_group.iter().chain(std::iter::once(&report.total)) {
        let precision = group
            .precision()
            .map_or_else(|| "NA".to_string(), ratio_decimal);
        let recall = group
            .recall()
            .map_or_else(|| "NA".to_string(), ratio_decimal);
        w.write_record([
            group.group.as_str(),
            &group.n_papers.to_string(),
            &precision,
            &recall,
        ])?;
    }
    finish(w)
}

pub fn write_correlation_csv(report: &CorrelationReport) -> Result<String, TableError> {
    let mut w = writer();
    w.write_record(CORRELATION_HEADER)?;
    w.write_record([
        report.n.to_string(),
        format_float(report.rho),
        format_float(report.p_value),
    ])?;
    finish(w)
}
