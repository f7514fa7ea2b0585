//! Regression and validation statistics over the attribution tables.

mod ols;
mod precision_recall;
mod rank_regression;
mod spearman;
pub mod ttest;

pub use ols::{ols_fit, DesignMatrix, RegressionReport, Term};
pub use precision_recall::{
    precision_recall, writing_authors, PRGroup, PRReport, DEFAULT_WRITING_MATCHERS,
};
pub use rank_regression::{
    rank_regression, Grouping, ObsRow, RankEncoding, RankRegressionOutput, ResponseKind,
    DEFAULT_TEAM_SIZES,
};
pub use spearman::{average_ranks, spearman, CorrelationReport};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("not enough observations: n={n} must exceed k={k}")]
    NotEnoughRows { n: usize, k: usize },
    #[error("rank-deficient design; collinear columns: {columns}")]
    RankDeficient { columns: String },
    #[error("too few observations: {n} (need at least {minimum})")]
    TooFewObservations { n: usize, minimum: usize },
    #[error("zero rank variance")]
    ZeroRankVariance,
    #[error("empty input table")]
    EmptyTable,
}
