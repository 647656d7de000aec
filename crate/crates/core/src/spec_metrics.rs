//! The eleven per-schema specification measures.
//!
//! Coverage and overlap are slice based: for every variable the schema
//! defines in its after state, a backward slice is taken from the
//! predicates defining it. Coupling is not defined in closed form in the
//! literature this tool follows; the normalised pairwise-flow average
//! implemented by [`coupling`] is this crate's own definition.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spec::ResolvedSpec;
use crate::srn::{build_srn, PrimeId, Srn};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SliceError {
    #[error("slicing criterion contains prime {0} outside schema `{1}`")]
    CriterionOutsideSchema(PrimeId, String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SpecMetrics {
    #[serde(rename = "CC")]
    pub cc: usize,
    #[serde(rename = "VL")]
    pub v_l: usize,
    #[serde(rename = "VU")]
    pub v_u: usize,
    #[serde(rename = "DU")]
    pub du: usize,
    #[serde(rename = "USE")]
    pub uses: usize,
    #[serde(rename = "DEF")]
    pub defs: usize,
    #[serde(rename = "AND")]
    pub ands: usize,
    #[serde(rename = "OR")]
    pub ors: usize,
    #[serde(rename = "COV")]
    pub coverage: f64,
    #[serde(rename = "OVL")]
    pub overlap: f64,
    #[serde(rename = "CHI")]
    pub coupling: f64,
}

impl SpecMetrics {
    pub const NAMES: [&'static str; 11] = [
        "CC", "VL", "VU", "DU", "USE", "DEF", "AND", "OR", "COV", "OVL", "CHI",
    ];

    pub fn values(&self) -> [f64; 11] {
        [
            self.cc as f64,
            self.v_l as f64,
            self.v_u as f64,
            self.du as f64,
            self.uses as f64,
            self.defs as f64,
            self.ands as f64,
            self.ors as f64,
            self.coverage,
            self.overlap,
            self.coupling,
        ]
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        Self::NAMES
            .iter()
            .position(|n| *n == name)
            .map(|i| self.values()[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasicMetrics {
    pub cc: usize,
    pub ands: usize,
    pub ors: usize,
    pub uses: usize,
    pub defs: usize,
}

pub fn basic_metrics(spec: &ResolvedSpec, srn: &Srn, schema: usize) -> BasicMetrics {
    let def = &spec.schemas[schema];
    let mut uses = BTreeSet::new();
    let mut defs = BTreeSet::new();
    for p in &def.predicates {
        p.expr.visit_idents(&mut |id| {
            if id.decoration.is_after_state() {
                defs.insert(id.name.as_str());
            } else {
                uses.insert(id.name.as_str());
            }
        });
    }
    BasicMetrics {
        cc: srn.schema_primes(schema).len(),
        ands: def.predicates.iter().map(|p| p.expr.and_count()).sum(),
        ors: def.predicates.iter().map(|p| p.expr.or_count()).sum(),
        uses: uses.len(),
        defs: defs.len(),
    }
}

/// `(v_l, v_u, DU)`
pub fn structure_metrics(srn: &Srn, schema: usize) -> (usize, usize, usize) {
    let control: Vec<_> = srn.control_arcs_of(schema).collect();
    let terminals: BTreeSet<PrimeId> = control.iter().map(|(_, d)| *d).collect();
    (
        1 + terminals.len(),
        1 + control.len(),
        srn.data_arcs_of(schema).count(),
    )
}

/// Backward closure of `criterion` over the schema's control and data arcs.
pub fn slice(
    srn: &Srn,
    schema: usize,
    criterion: &BTreeSet<PrimeId>,
) -> Result<BTreeSet<PrimeId>, SliceError> {
    let range = srn.schemas[schema].primes.clone();
    if let Some(&p) = criterion.iter().find(|p| !range.contains(p)) {
        return Err(SliceError::CriterionOutsideSchema(
            p,
            srn.schemas[schema].name.clone(),
        ));
    }
    let mut preds: BTreeMap<PrimeId, Vec<PrimeId>> = BTreeMap::new();
    for &(s, d) in srn.control_arcs_of(schema) {
        preds.entry(d).or_default().push(s);
    }
    for a in srn.data_arcs_of(schema) {
        preds.entry(a.dst).or_default().push(a.src);
    }
    let mut seen = criterion.clone();
    let mut queue: VecDeque<PrimeId> = criterion.iter().copied().collect();
    while let Some(p) = queue.pop_front() {
        for &q in preds.get(&p).into_iter().flatten() {
            if seen.insert(q) {
                queue.push_back(q);
            }
        }
    }
    Ok(seen)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SliceProfile {
    pub schema: usize,
    /// One criterion per defined variable, ordered by variable name.
    pub criteria: Vec<(String, BTreeSet<PrimeId>)>,
    pub slices: Vec<BTreeSet<PrimeId>>,
}

/// One slice per variable with an after-state occurrence. The criterion is
/// the set of predicate primes defining the variable primed or as output.
pub fn slice_profile(srn: &Srn, schema: usize) -> SliceProfile {
    let mut criteria: BTreeMap<String, BTreeSet<PrimeId>> = BTreeMap::new();
    for p in srn.schema_primes(schema) {
        if !p.kind.is_predicate() {
            continue;
        }
        for (name, _) in &p.def_set {
            criteria.entry(name.clone()).or_default().insert(p.id);
        }
    }
    let criteria: Vec<_> = criteria.into_iter().collect();
    let slices = criteria
        .iter()
        .map(|(_, c)| slice(srn, schema, c).expect("criterion drawn from schema"))
        .collect();
    SliceProfile {
        schema,
        criteria,
        slices,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemanticMetrics {
    pub coverage: f64,
    pub overlap: f64,
    /// No slices, or an empty schema; both ratios are reported as 0.
    pub degenerate: bool,
}

/// Coverage is the mean slice size relative to the schema size; overlap is
/// the mean share of each slice taken up by the intersection of all slices.
pub fn semantic_metrics(profile: &SliceProfile, schema_size: usize) -> SemanticMetrics {
    let m = profile.slices.len();
    if m == 0 || schema_size == 0 {
        return SemanticMetrics {
            coverage: 0.0,
            overlap: 0.0,
            degenerate: true,
        };
    }
    let mut common = profile.slices[0].clone();
    for s in &profile.slices[1..] {
        common = common.intersection(s).copied().collect();
    }
    let n = schema_size as f64;
    let coverage = profile
        .slices
        .iter()
        .map(|s| s.len() as f64 / n)
        .sum::<f64>()
        / m as f64;
    let overlap = profile
        .slices
        .iter()
        .map(|s| {
            if s.is_empty() {
                0.0
            } else {
                common.len() as f64 / s.len() as f64
            }
        })
        .sum::<f64>()
        / m as f64;
    SemanticMetrics {
        coverage,
        overlap,
        degenerate: false,
    }
}

/// Inter-schema information flow of `schema` against all others:
/// the mean over other schemas j of `(f(i->j) + f(j->i)) / (|i| + |j|)`,
/// with `f` the number of inter-schema arcs and `|.|` the prime count.
pub fn coupling(srn: &Srn, schema: usize) -> f64 {
    let k = srn.schemas.len();
    if k <= 1 {
        return 0.0;
    }
    let size = |s: usize| srn.schemas[s].primes.len();
    let mut flows = vec![0usize; k];
    for a in &srn.interschema_arcs {
        if a.src_schema == schema {
            flows[a.dst_schema] += 1;
        } else if a.dst_schema == schema {
            flows[a.src_schema] += 1;
        }
    }
    let total: f64 = (0..k)
        .filter(|&j| j != schema)
        .map(|j| {
            let denom = size(schema) + size(j);
            if denom == 0 {
                0.0
            } else {
                flows[j] as f64 / denom as f64
            }
        })
        .sum();
    total / (k - 1) as f64
}

pub fn schema_metrics(spec: &ResolvedSpec, srn: &Srn, schema: usize) -> SpecMetrics {
    let basic = basic_metrics(spec, srn, schema);
    let (v_l, v_u, du) = structure_metrics(srn, schema);
    let sem = semantic_metrics(&slice_profile(srn, schema), basic.cc);
    SpecMetrics {
        cc: basic.cc,
        v_l,
        v_u,
        du,
        uses: basic.uses,
        defs: basic.defs,
        ands: basic.ands,
        ors: basic.ors,
        coverage: sem.coverage,
        overlap: sem.overlap,
        coupling: coupling(srn, schema),
    }
}

/// Metrics for every schema, in specification order.
pub fn measure_specification(spec: &ResolvedSpec) -> Vec<(String, SpecMetrics)> {
    let srn = build_srn(spec);
    (0..spec.schemas.len())
        .map(|i| (spec.schemas[i].name.clone(), schema_metrics(spec, &srn, i)))
        .collect()
}
