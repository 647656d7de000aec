//! Trace-unit pairing of code subprograms with specification schemas.
//!
//! A subprogram names its schema in a comment `-- trace_unit: Name`,
//! placed on the line right before its header, on the line right after
//! the header's `is`, or on the line right after `begin`.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::code::{comments, CodeError, CodeUnit};
use crate::code_metrics::CodeMetrics;
use crate::spec_metrics::SpecMetrics;

pub const TRACE_TAG: &str = "trace_unit:";

/// Default Levenshtein radius for spelling suggestions.
pub const DEFAULT_EDIT_DISTANCE: usize = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PairingError {
    #[error("line {0}: trace comment is not attached to any subprogram")]
    OrphanTraceComment(usize),
    #[error("line {0}: trace comment names no schema")]
    MalformedTraceComment(usize),
    #[error("no metrics for `{0}`")]
    MissingMetrics(String),
    #[error("non-finite metric {metric} for `{name}`")]
    NonFiniteMetric { name: String, metric: String },
    #[error(transparent)]
    Code(#[from] CodeError),
}

impl PairingError {
    pub fn line(&self) -> Option<usize> {
        match self {
            PairingError::OrphanTraceComment(l) | PairingError::MalformedTraceComment(l) => Some(*l),
            PairingError::Code(e) => e.line(),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct TraceLink {
    pub unit: String,
    pub schema: String,
    pub line: usize,
}

/// Trace links of the units parsed from `source`. Units without a trace
/// comment yield nothing.
pub fn extract_trace_units(units: &[CodeUnit], source: &str) -> Result<Vec<TraceLink>, PairingError> {
    let mut links = Vec::new();
    for (line, text) in comments(source)? {
        let Some(rest) = text.trim().strip_prefix(TRACE_TAG) else {
            continue;
        };
        let Some(schema) = rest.split_whitespace().next() else {
            return Err(PairingError::MalformedTraceComment(line));
        };
        let owner = units.iter().find(|u| {
            u.span.0 == line + 1 || u.header_end + 1 == line || u.begin_line + 1 == line
        });
        match owner {
            Some(u) => links.push(TraceLink {
                unit: u.name.clone(),
                schema: schema.to_string(),
                line,
            }),
            None => return Err(PairingError::OrphanTraceComment(line)),
        }
    }
    Ok(links)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    /// One unit per schema; schemas traced by several units are conflicts.
    #[default]
    Strict,
    /// Schemas traced by several units are paired with all of them and
    /// their code metrics are summed.
    Sum,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Pair {
    pub schema: String,
    pub units: Vec<String>,
}

impl Pair {
    /// Unit names joined with `+`.
    pub fn unit_label(&self) -> String {
        self.units.join("+")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Dangling {
    pub unit: String,
    pub schema: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Suggestion {
    pub unit: String,
    pub unknown: String,
    pub nearest: String,
    pub distance: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Conflict {
    pub schema: String,
    pub units: Vec<String>,
}

/// Every list is sorted, so equal inputs give equal reports regardless of
/// trace order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct PairingReport {
    pub pairs: Vec<Pair>,
    pub dangling: Vec<Dangling>,
    pub unreferenced: Vec<String>,
    pub suggestions: Vec<Suggestion>,
    pub conflicts: Vec<Conflict>,
}

/// Exact, case-sensitive matching of trace names to schema names. Unknown
/// names close to exactly one schema are reported as suggestions and never
/// paired.
pub fn match_pairs(
    schemas: &[String],
    traces: &[TraceLink],
    max_edit_distance: usize,
    aggregation: Aggregation,
) -> PairingReport {
    let known: BTreeSet<&str> = schemas.iter().map(String::as_str).collect();
    let mut by_schema: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut report = PairingReport::default();
    for t in traces {
        if known.contains(t.schema.as_str()) {
            by_schema.entry(&t.schema).or_default().insert(&t.unit);
            continue;
        }
        let near: Vec<(&str, usize)> = known
            .iter()
            .map(|s| (*s, strsim::levenshtein(s, &t.schema)))
            .filter(|(_, d)| *d <= max_edit_distance)
            .collect();
        match near.as_slice() {
            [(nearest, distance)] => report.suggestions.push(Suggestion {
                unit: t.unit.clone(),
                unknown: t.schema.clone(),
                nearest: nearest.to_string(),
                distance: *distance,
            }),
            _ => report.dangling.push(Dangling {
                unit: t.unit.clone(),
                schema: t.schema.clone(),
            }),
        }
    }
    for schema in &known {
        match by_schema.get(schema) {
            None => report.unreferenced.push(schema.to_string()),
            Some(units) => {
                let units: Vec<String> = units.iter().map(|u| u.to_string()).collect();
                if units.len() == 1 || aggregation == Aggregation::Sum {
                    report.pairs.push(Pair {
                        schema: schema.to_string(),
                        units,
                    });
                } else {
                    report.conflicts.push(Conflict {
                        schema: schema.to_string(),
                        units,
                    });
                }
            }
        }
    }
    report.dangling.sort();
    report.dangling.dedup();
    report.suggestions.sort();
    report.suggestions.dedup();
    report
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedObservation {
    pub pair_id: usize,
    pub schema: String,
    pub unit: String,
    pub spec: SpecMetrics,
    pub code: CodeMetrics,
}

impl PairedObservation {
    /// The 11 spec values followed by the 9 code values.
    pub fn values(&self) -> Vec<f64> {
        self.spec
            .values()
            .into_iter()
            .chain(self.code.values().into_iter().map(|v| v as f64))
            .collect()
    }
}

/// Joins each pair with its metric rows, ordered by schema name with
/// 1-based ids. Under summing, the units' code metrics are added up.
pub fn assemble_observations(
    report: &PairingReport,
    spec_table: &[(String, SpecMetrics)],
    code_table: &[(String, CodeMetrics)],
) -> Result<Vec<PairedObservation>, PairingError> {
    let spec: BTreeMap<&str, &SpecMetrics> = spec_table.iter().map(|(n, m)| (n.as_str(), m)).collect();
    let code: BTreeMap<&str, &CodeMetrics> = code_table.iter().map(|(n, m)| (n.as_str(), m)).collect();
    let mut pairs: Vec<&Pair> = report.pairs.iter().collect();
    pairs.sort();
    let mut out = Vec::with_capacity(pairs.len());
    for (i, pair) in pairs.into_iter().enumerate() {
        let s = *spec
            .get(pair.schema.as_str())
            .ok_or_else(|| PairingError::MissingMetrics(pair.schema.clone()))?;
        let mut sum = [0u64; 9];
        for unit in &pair.units {
            let c = code
                .get(unit.as_str())
                .ok_or_else(|| PairingError::MissingMetrics(unit.clone()))?;
            for (acc, v) in sum.iter_mut().zip(c.values()) {
                *acc += v;
            }
        }
        if let Some(j) = s.values().iter().position(|v| !v.is_finite()) {
            return Err(PairingError::NonFiniteMetric {
                name: pair.schema.clone(),
                metric: SpecMetrics::NAMES[j].into(),
            });
        }
        out.push(PairedObservation {
            pair_id: i + 1,
            schema: pair.schema.clone(),
            unit: pair.unit_label(),
            spec: *s,
            code: CodeMetrics::from_values(sum),
        });
    }
    Ok(out)
}
