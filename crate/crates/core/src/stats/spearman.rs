//! Spearman rank correlation with average-rank tie handling.

use serde::Serialize;

use super::ttest::student_t_two_sided_p;
use super::StatsError;

#[derive(Debug, Clone, Serialize)]
pub struct CorrelationReport {
    pub rho: f64,
    pub p_value: f64,
    pub n: usize,
}

/// 1-based ranks; tied values share the average of the ranks they occupy.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len()
            && values[order[j + 1]].total_cmp(&values[order[i]]) == std::cmp::Ordering::Equal
        {
            j += 1;
        }
        // Positions i..=j hold ranks i+1..=j+1; everyone gets the mean.
        let avg = (i + j + 2) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman's rho: Pearson correlation of average-ranked values. The p-value
/// uses t = rho * sqrt((n-2)/(1-rho^2)) against Student-t(n-2), two-sided;
/// a perfect |rho| = 1 reports the tail limit p = 0.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<CorrelationReport, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let n = x.len();
    if n < 3 {
        return Err(StatsError::TooFewObservations { n, minimum: 3 });
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);

    let mean = (n as f64 + 1.0) / 2.0; // ranks always average to (n+1)/2
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for i in 0..n {
        let dx = rx[i] - mean;
        let dy = ry[i] - mean;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Err(StatsError::ZeroRankVariance);
    }
    let rho = (cov / (var_x * var_y).sqrt()).clamp(-1.0, 1.0);

    let p_value = if rho.abs() >= 1.0 {
        0.0
    } else {
        let df = (n - 2) as f64;
        let t = rho * (df / (1.0 - rho * rho)).sqrt();
        student_t_two_sided_p(t, df)
    };
    Ok(CorrelationReport { rho, p_value, n })
}
