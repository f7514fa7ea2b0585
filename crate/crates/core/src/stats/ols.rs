//! Ordinary least squares with Householder QR.

use serde::Serialize;

use super::ttest::{student_t_quantile, student_t_two_sided_p};
use super::StatsError;

/// Row-major dense design matrix. The caller supplies the intercept column.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    n: usize,
    k: usize,
    data: Vec<f64>,
}

impl DesignMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, StatsError> {
        let n = rows.len();
        let k = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n * k);
        for row in rows {
            if row.len() != k {
                return Err(StatsError::DimensionMismatch {
                    expected: k,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(DesignMatrix { n, k, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.k + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.k + j] = v;
    }
}

/// One fitted coefficient.
#[derive(Debug, Clone, Serialize)]
pub struct Term {
    pub name: String,
    pub coef: f64,
    pub std_err: f64,
    pub t_stat: f64,
    pub p_value: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// A fitted model for one group of observations.
#[derive(Debug, Clone, Serialize)]
pub struct RegressionReport {
    /// Kind of grouping this report belongs to ("team_size", "section", ...).
    pub grouping: String,
    /// Group value within the grouping ("3", "methods", "cs").
    pub group: String,
    pub n: usize,
    pub terms: Vec<Term>,
    pub reference_term: String,
    pub rss: f64,
}

impl RegressionReport {
    pub fn group_label(&self) -> String {
        if self.grouping.is_empty() {
            self.group.clone()
        } else {
            format!("{}={}", self.grouping, self.group)
        }
    }

    pub fn term(&self, name: &str) -> Option<&Term> {
        self.terms.iter().find(|t| t.name == name)
    }
}

/// Residual sum of squares below which a fit is treated as exact, relative
/// to the response's sum of squares.
const PERFECT_FIT_REL: f64 = 1e-24;
/// Coefficients this small relative to the largest are zero in an exact fit.
const ZERO_COEF_REL: f64 = 1e-8;

/// Fits response = design * beta by least squares.
///
/// Standard errors come from sigma^2 (X'X)^-1 with sigma^2 = RSS/(n-k);
/// p-values are two-sided Student-t with n-k degrees of freedom, and the
/// confidence bounds are coef +/- t(0.975, n-k) * std_err.
///
/// An exact fit (RSS ~ 0) has no residual variance; its coefficients are
/// reported with p = 1 for zero coefficients and p = 0 otherwise.
pub fn ols_fit(
    design: &DesignMatrix,
    response: &[f64],
    term_names: &[&str],
) -> Result<RegressionReport, StatsError> {
    let n = design.n();
    let k = design.k();
    if response.len() != n {
        return Err(StatsError::DimensionMismatch {
            expected: n,
            got: response.len(),
        });
    }
    if term_names.len() != k {
        return Err(StatsError::DimensionMismatch {
            expected: k,
            got: term_names.len(),
        });
    }
    if n <= k {
        return Err(StatsError::NotEnoughRows { n, k });
    }

    // Householder QR, applied in place to a working copy and the response.
    let mut a = design.clone();
    let mut qty = response.to_vec();
    let col_norms: Vec<f64> = (0..k)
        .map(|j| (0..n).map(|i| design.get(i, j).powi(2)).sum::<f64>().sqrt())
        .collect();
    let mut deficient: Vec<String> = Vec::new();

    for j in 0..k {
        let norm = (j..n).map(|i| a.get(i, j).powi(2)).sum::<f64>().sqrt();
        if norm <= 1e-12 * col_norms[j].max(1.0) {
            deficient.push(term_names[j].to_string());
            a.set(j, j, 0.0);
            continue;
        }
        let alpha = if a.get(j, j) >= 0.0 { -norm } else { norm };
        // v = x - alpha * e_j, stored in the column below the diagonal.
        let mut v = vec![0.0; n - j];
        for i in j..n {
            v[i - j] = a.get(i, j);
        }
        v[0] -= alpha;
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        if vtv == 0.0 {
            deficient.push(term_names[j].to_string());
            a.set(j, j, 0.0);
            continue;
        }
        for col in j..k {
            let dot: f64 = (j..n).map(|i| v[i - j] * a.get(i, col)).sum();
            let scale = 2.0 * dot / vtv;
            for i in j..n {
                let updated = a.get(i, col) - scale * v[i - j];
                a.set(i, col, updated);
            }
        }
        let dot: f64 = (j..n).map(|i| v[i - j] * qty[i]).sum();
        let scale = 2.0 * dot / vtv;
        for i in j..n {
            qty[i] -= scale * v[i - j];
        }
        a.set(j, j, alpha);
    }

    if !deficient.is_empty() {
        return Err(StatsError::RankDeficient {
            columns: deficient.join(", "),
        });
    }

    // Back-substitute R beta = Q'y.
    let mut coefs = vec![0.0; k];
    for j in (0..k).rev() {
        let mut acc = qty[j];
        for m in j + 1..k {
            acc -= a.get(j, m) * coefs[m];
        }
        coefs[j] = acc / a.get(j, j);
    }

    // Residuals against the original design.
    let mut rss = 0.0;
    for i in 0..n {
        let fitted: f64 = (0..k).map(|j| design.get(i, j) * coefs[j]).sum();
        let r = response[i] - fitted;
        rss += r * r;
    }

    // (X'X)^-1 = R^-1 R^-T; only the diagonal is needed.
    // Columns of R^-1 by back-substitution against unit vectors.
    let mut xtx_inv_diag = vec![0.0; k];
    for col in 0..k {
        let mut e = vec![0.0; k];
        e[col] = 1.0;
        let mut inv_col = vec![0.0; k];
        for j in (0..k).rev() {
            let mut acc = e[j];
            for m in j + 1..k {
                acc -= a.get(j, m) * inv_col[m];
            }
            inv_col[j] = acc / a.get(j, j);
        }
        // Row j of R^-1 contributes (R^-1)[j][col]^2 to diag element j.
        for j in 0..k {
            xtx_inv_diag[j] += inv_col[j] * inv_col[j];
        }
    }

    let df = (n - k) as f64;
    let response_scale: f64 = response.iter().map(|y| y * y).sum();
    let exact_fit = rss <= PERFECT_FIT_REL * response_scale.max(f64::MIN_POSITIVE);
    let sigma2 = if exact_fit { 0.0 } else { rss / df };
    let t_crit = student_t_quantile(0.975, df);
    let coef_scale = coefs.iter().fold(0.0f64, |m, c| m.max(c.abs()));

    let terms = (0..k)
        .map(|j| {
            let coef = coefs[j];
            let std_err = (sigma2 * xtx_inv_diag[j]).sqrt();
            let (t_stat, p_value) = if exact_fit {
                if coef.abs() <= ZERO_COEF_REL * coef_scale.max(f64::MIN_POSITIVE) {
                    (0.0, 1.0)
                } else if coef > 0.0 {
                    (f64::INFINITY, 0.0)
                } else {
                    (f64::NEG_INFINITY, 0.0)
                }
            } else {
                let t = coef / std_err;
                (t, student_t_two_sided_p(t, df))
            };
            Term {
                name: term_names[j].to_string(),
                coef,
                std_err,
                t_stat,
                p_value,
                ci_lo: coef - t_crit * std_err,
                ci_hi: coef + t_crit * std_err,
            }
        })
        .collect();

    Ok(RegressionReport {
        grouping: String::new(),
        group: String::new(),
        n,
        terms,
        reference_term: String::new(),
        rss,
    })
}
