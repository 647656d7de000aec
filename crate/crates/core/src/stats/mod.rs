//! Correlation tests with two-tailed p-values, association bins, and the
//! special functions they rest on.

mod correlation;
pub mod special;

use serde::Serialize;
use thiserror::Error;

pub use correlation::{
    classify_association, correlate, correlation_matrix, kendall, midranks, pearson, spearman,
    CorrelationRow,
};
pub use special::{f_sf, normal_sf, reg_inc_beta, student_t_sf, student_t_two_tailed};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("input `{0}` is constant")]
    ConstantInput(String),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("too few samples: {0} (at least 3 required)")]
    TooFewSamples(usize),
    #[error("correlation {0} outside [-1, 1]")]
    OutOfRange(f64),
    #[error("no convergence after {0} iterations")]
    NonConvergence(usize),
    #[error("argument outside the domain: {0}")]
    Domain(String),
    #[error("non-finite value in `{0}`")]
    NonFinite(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationTest {
    Pearson,
    Spearman,
    Kendall,
}

impl CorrelationTest {
    pub const ALL: [CorrelationTest; 3] = [
        CorrelationTest::Pearson,
        CorrelationTest::Spearman,
        CorrelationTest::Kendall,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CorrelationTest::Pearson => "pearson",
            CorrelationTest::Spearman => "spearman",
            CorrelationTest::Kendall => "kendall",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationResult {
    pub r: f64,
    pub p: f64,
    pub n: usize,
    pub test: CorrelationTest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AssociationClass {
    Strong,
    Moderate,
    Weak,
}

impl AssociationClass {
    pub fn name(self) -> &'static str {
        match self {
            AssociationClass::Strong => "strong",
            AssociationClass::Moderate => "moderate",
            AssociationClass::Weak => "weak",
        }
    }
}
