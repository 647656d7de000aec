//! Ordinary least squares with t and F inference, backward elimination and
//! formula rendering.

mod simulate;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::stats::{f_sf, student_t_two_tailed, StatsError};

pub use simulate::{simulate_cl, REFERENCE_CL_INTERCEPT, REFERENCE_CL_TERMS};

/// Default p-value threshold of the elimination.
pub const DEFAULT_THRESHOLD: f64 = 0.4;

/// Relative size below which a diagonal entry of R marks a dependent column.
const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegressionError {
    #[error("design matrix is rank deficient at column `{0}`")]
    RankDeficient(String),
    #[error("too few observations: n = {n} with {k} predictors (need n >= k + 2)")]
    TooFewObservations { n: usize, k: usize },
    #[error("record lacks predictor `{0}`")]
    MissingPredictor(String),
    #[error("response is constant")]
    ConstantResponse,
    #[error("row {row} has {found} values, expected {expected}")]
    Ragged { row: usize, found: usize, expected: usize },
    #[error("non-finite value in column `{0}`")]
    NonFinite(String),
    #[error(transparent)]
    Numeric(#[from] StatsError),
}

/// Predictor columns and a response, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationMatrix {
    pub target: String,
    pub predictors: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub response: Vec<f64>,
}

impl ObservationMatrix {
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    /// Keeps only the named predictors, in the given order.
    pub fn select(&self, names: &[String]) -> ObservationMatrix {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| self.predictors.iter().position(|p| p == n).expect("known predictor"))
            .collect();
        ObservationMatrix {
            target: self.target.clone(),
            predictors: names.to_vec(),
            rows: self
                .rows
                .iter()
                .map(|r| idx.iter().map(|&j| r[j]).collect())
                .collect(),
            response: self.response.clone(),
        }
    }

    fn validate(&self) -> Result<(), RegressionError> {
        let k = self.predictors.len();
        if self.response.len() != self.rows.len() {
            return Err(RegressionError::Ragged {
                row: self.rows.len(),
                found: self.response.len(),
                expected: self.rows.len(),
            });
        }
        for (i, r) in self.rows.iter().enumerate() {
            if r.len() != k {
                return Err(RegressionError::Ragged {
                    row: i + 1,
                    found: r.len(),
                    expected: k,
                });
            }
            if let Some(j) = r.iter().position(|v| !v.is_finite()) {
                return Err(RegressionError::NonFinite(self.predictors[j].clone()));
            }
        }
        if self.response.iter().any(|v| !v.is_finite()) {
            return Err(RegressionError::NonFinite(self.target.clone()));
        }
        if self.n() < k + 2 {
            return Err(RegressionError::TooFewObservations { n: self.n(), k });
        }
        Ok(())
    }

    fn design(&self) -> DMatrix<f64> {
        let k = self.predictors.len();
        DMatrix::from_fn(self.n(), k + 1, |i, j| if j == 0 { 1.0 } else { self.rows[i][j - 1] })
    }
}

fn null_as_nan<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

/// Estimate with inference. Non-finite values serialize as `null`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    #[serde(deserialize_with = "null_as_nan")]
    pub coeff: f64,
    #[serde(deserialize_with = "null_as_nan")]
    pub se: f64,
    #[serde(deserialize_with = "null_as_nan")]
    pub t: f64,
    #[serde(deserialize_with = "null_as_nan")]
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub name: String,
    #[serde(flatten)]
    pub estimate: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dropped {
    pub name: String,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EliminationRound {
    pub round: usize,
    pub dropped: Vec<Dropped>,
}

/// A predictor removed before fitting, with the reason.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Excluded {
    pub name: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionModel {
    pub target: String,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    pub intercept: Estimate,
    pub terms: Vec<Term>,
    #[serde(deserialize_with = "null_as_nan")]
    pub r2: f64,
    #[serde(deserialize_with = "null_as_nan")]
    pub adj_r2: f64,
    #[serde(deserialize_with = "null_as_nan")]
    pub f: f64,
    #[serde(deserialize_with = "null_as_nan")]
    pub sig_f: f64,
    pub residual_df: usize,
    #[serde(default)]
    pub trace: Vec<EliminationRound>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub excluded: Vec<Excluded>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl RegressionModel {
    pub fn term(&self, name: &str) -> Option<&Term> {
        self.terms.iter().find(|t| t.name == name)
    }

    pub fn term_names(&self) -> Vec<&str> {
        self.terms.iter().map(|t| t.name.as_str()).collect()
    }
}

fn estimate(coeff: f64, se: f64, df: f64) -> Result<Estimate, RegressionError> {
    let (t, p) = if se > 0.0 {
        let t = coeff / se;
        (t, student_t_two_tailed(t, df)?)
    } else if coeff == 0.0 {
        (0.0, 1.0)
    } else {
        (coeff.signum() * f64::INFINITY, 0.0)
    };
    Ok(Estimate { coeff, se, t, p })
}

/// Least squares through a QR decomposition of the design matrix
/// (intercept column first).
pub fn ols_fit(data: &ObservationMatrix) -> Result<RegressionModel, RegressionError> {
    data.validate()?;
    let n = data.n();
    let k = data.predictors.len();
    let y = DVector::from_column_slice(&data.response);
    let mean = y.mean();
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    if tss == 0.0 {
        return Err(RegressionError::ConstantResponse);
    }

    let x = data.design();
    let qr = x.clone().qr();
    let r = qr.r();
    for j in 0..=k {
        let norm = x.column(j).norm();
        if r[(j, j)].abs() <= RANK_TOLERANCE * norm.max(f64::MIN_POSITIVE) {
            let name = if j == 0 { "intercept".to_string() } else { data.predictors[j - 1].clone() };
            return Err(RegressionError::RankDeficient(name));
        }
    }
    let qty = qr.q().transpose() * &y;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| RegressionError::RankDeficient("intercept".into()))?;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k + 1, k + 1))
        .ok_or_else(|| RegressionError::RankDeficient("intercept".into()))?;

    let residuals = &y - &x * &beta;
    let rss = residuals.norm_squared();
    let df = n - k - 1;
    let sigma2 = rss / df as f64;
    let se: Vec<f64> = (0..=k)
        .map(|j| (sigma2 * r_inv.row(j).norm_squared()).sqrt())
        .collect();

    let intercept = estimate(beta[0], se[0], df as f64)?;
    let terms = (1..=k)
        .map(|j| {
            Ok(Term {
                name: data.predictors[j - 1].clone(),
                estimate: estimate(beta[j], se[j], df as f64)?,
            })
        })
        .collect::<Result<Vec<_>, RegressionError>>()?;

    let r2 = 1.0 - rss / tss;
    let adj_r2 = 1.0 - (1.0 - r2) * (n - 1) as f64 / df as f64;
    let (f, sig_f) = if k == 0 {
        (f64::NAN, f64::NAN)
    } else {
        let f = ((tss - rss) / k as f64) / (rss / df as f64);
        (f, f_sf(f, k as f64, df as f64)?)
    };
    Ok(RegressionModel {
        target: data.target.clone(),
        n,
        threshold: None,
        intercept,
        terms,
        r2,
        adj_r2,
        f,
        sig_f,
        residual_df: df,
        trace: Vec::new(),
        excluded: Vec::new(),
        warnings: Vec::new(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EliminationMode {
    /// Drop every predictor above the threshold in each round.
    #[default]
    AllAbove,
    /// Drop only the predictor with the largest p in each round.
    OneAtATime,
}

pub fn backward_eliminate(
    data: &ObservationMatrix,
    threshold: f64,
) -> Result<RegressionModel, RegressionError> {
    backward_eliminate_with(data, threshold, EliminationMode::AllAbove)
}

/// Refits after each removal until every remaining predictor has
/// p <= `threshold` or none remain. The intercept always stays.
pub fn backward_eliminate_with(
    data: &ObservationMatrix,
    threshold: f64,
    mode: EliminationMode,
) -> Result<RegressionModel, RegressionError> {
    let mut current = data.predictors.clone();
    let mut trace = Vec::new();
    loop {
        let mut model = ols_fit(&data.select(&current))?;
        let mut above: Vec<Dropped> = model
            .terms
            .iter()
            .filter(|t| t.estimate.p.is_nan() || t.estimate.p > threshold)
            .map(|t| Dropped {
                name: t.name.clone(),
                p: t.estimate.p,
            })
            .collect();
        if mode == EliminationMode::OneAtATime && above.len() > 1 {
            let worst = above
                .iter()
                .enumerate()
                .fold(0, |best, (i, d)| if d.p > above[best].p || d.p.is_nan() { i } else { best });
            above = vec![above.swap_remove(worst)];
        }
        if above.is_empty() {
            model.threshold = Some(threshold);
            model.trace = trace;
            return Ok(model);
        }
        current.retain(|name| !above.iter().any(|d| &d.name == name));
        trace.push(EliminationRound {
            round: trace.len() + 1,
            dropped: above,
        });
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BudgetCheck {
    Ok,
    Warning(String),
}

/// The number of predictors should not exceed one fifth of the sample size.
pub fn check_variable_budget(n: usize, k: usize) -> BudgetCheck {
    if 5 * k <= n {
        BudgetCheck::Ok
    } else {
        BudgetCheck::Warning(format!(
            "{k} predictors exceed one fifth of the sample size ({n} observations)"
        ))
    }
}

/// intercept + sum of coeff * value over the model terms.
pub fn predict(
    model: &RegressionModel,
    record: impl Fn(&str) -> Option<f64>,
) -> Result<f64, RegressionError> {
    let mut y = model.intercept.coeff;
    for t in &model.terms {
        let v = record(&t.name).ok_or_else(|| RegressionError::MissingPredictor(t.name.clone()))?;
        y += t.estimate.coeff * v;
    }
    Ok(y)
}

fn signed(c: f64) -> (bool, String) {
    let text = format!("{:.3}", c.abs());
    let zero = text.chars().all(|ch| ch == '0' || ch == '.');
    (c < 0.0 && !zero, text)
}

/// `TARGET(M) = c1*P1 - c2*P2 + c0`, coefficients to three decimals.
pub fn emit_formula(model: &RegressionModel) -> String {
    let mut out = format!("{}(M) =", model.target);
    let parts = model
        .terms
        .iter()
        .map(|t| (t.estimate.coeff, Some(t.name.as_str())))
        .chain(std::iter::once((model.intercept.coeff, None)));
    for (i, (c, name)) in parts.enumerate() {
        let (neg, text) = signed(c);
        let body = match name {
            Some(n) => format!("{text}*{n}"),
            None => text,
        };
        match (i, neg) {
            (0, false) => out.push_str(&format!(" {body}")),
            (0, true) => out.push_str(&format!(" -{body}")),
            (_, false) => out.push_str(&format!(" + {body}")),
            (_, true) => out.push_str(&format!(" - {body}")),
        }
    }
    out
}

/// Drops predictors that are constant or linearly dependent on earlier
/// kept ones, then keeps at most n - 2 in the given order so the model is
/// estimable. Dropped names are reported with a reason.
pub fn screen_predictors(data: &ObservationMatrix) -> (ObservationMatrix, Vec<Excluded>) {
    let mut kept: Vec<String> = Vec::new();
    let mut excluded = Vec::new();
    let limit = data.n().saturating_sub(2);
    for (j, name) in data.predictors.iter().enumerate() {
        let col = data.column(j);
        let reason = if col.iter().all(|v| *v == col[0]) {
            Some("constant column")
        } else if kept.len() >= limit {
            Some("exceeds the n - 2 predictors estimable from the sample")
        } else {
            let mut trial = kept.clone();
            trial.push(name.clone());
            if full_rank(&data.select(&trial)) {
                None
            } else {
                Some("linearly dependent on earlier predictors")
            }
        };
        match reason {
            Some(r) => excluded.push(Excluded {
                name: name.clone(),
                reason: r.to_string(),
            }),
            None => kept.push(name.clone()),
        }
    }
    (data.select(&kept), excluded)
}

fn full_rank(data: &ObservationMatrix) -> bool {
    let x = data.design();
    let r = x.clone().qr().r();
    (0..x.ncols()).all(|j| r[(j, j)].abs() > RANK_TOLERANCE * x.column(j).norm())
}
