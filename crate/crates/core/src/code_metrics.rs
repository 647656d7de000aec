//! The nine per-unit code measures.

use serde::{Deserialize, Serialize};

use crate::code::{build_call_graph, CallGraph, CodeUnit, Jump, LineClass, UnitKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeMetrics {
    #[serde(rename = "CL")]
    pub cl: u64,
    #[serde(rename = "CLC")]
    pub clc: u64,
    #[serde(rename = "CLCD")]
    pub clcd: u64,
    #[serde(rename = "CLCE")]
    pub clce: u64,
    #[serde(rename = "CYC")]
    pub cyc: u64,
    #[serde(rename = "KNOTS")]
    pub knots: u64,
    #[serde(rename = "FIN")]
    pub fin: u64,
    #[serde(rename = "FOUT")]
    pub fout: u64,
    #[serde(rename = "SI")]
    pub si: u64,
}

impl CodeMetrics {
    pub const NAMES: [&'static str; 9] = [
        "CL", "CLC", "CLCD", "CLCE", "CYC", "KNOTS", "FIN", "FOUT", "SI",
    ];

    pub fn values(&self) -> [u64; 9] {
        [
            self.cl, self.clc, self.clcd, self.clce, self.cyc, self.knots, self.fin, self.fout,
            self.si,
        ]
    }

    pub fn from_values(v: [u64; 9]) -> Self {
        CodeMetrics {
            cl: v[0],
            clc: v[1],
            clcd: v[2],
            clce: v[3],
            cyc: v[4],
            knots: v[5],
            fin: v[6],
            fout: v[7],
            si: v[8],
        }
    }

    pub fn get(&self, name: &str) -> Option<u64> {
        Self::NAMES
            .iter()
            .position(|n| *n == name)
            .map(|i| self.values()[i])
    }
}

/// `(CL, CLC, CLCD, CLCE)`
pub fn line_counts(unit: &CodeUnit) -> (u64, u64, u64, u64) {
    let count = |c| unit.class_count(c) as u64;
    let cl = unit.span_len() as u64;
    (
        cl,
        cl - count(LineClass::Blank) - count(LineClass::Comment),
        count(LineClass::Declarative),
        count(LineClass::Executable),
    )
}

/// One plus the binary decisions: `if`, `elsif`, `while`, `for`,
/// `exit when`, `and then`, `or else`, and `#when - 1` per `case`.
pub fn cyclomatic(unit: &CodeUnit) -> u64 {
    let d = &unit.decisions;
    let cases: usize = d
        .case_alternatives
        .iter()
        .map(|&w| w.saturating_sub(1))
        .sum();
    (1 + d.ifs + d.elsifs + d.whiles + d.fors + d.exit_whens + cases + d.and_thens + d.or_elses)
        as u64
}

/// Number of jump pairs whose line spans strictly interleave.
pub fn knots(jumps: &[Jump]) -> u64 {
    let spans: Vec<(usize, usize)> = jumps
        .iter()
        .map(|j| (j.source.min(j.target), j.source.max(j.target)))
        .collect();
    let mut count = 0;
    for (i, &(s1, t1)) in spans.iter().enumerate() {
        for &(s2, t2) in &spans[i + 1..] {
            if (s1 < s2 && s2 < t1 && t1 < t2) || (s2 < s1 && s1 < t2 && t2 < t1) {
                count += 1;
            }
        }
    }
    count
}

/// Which flow sources enter fan-in and fan-out. All are on by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlowPolicy {
    pub calls: bool,
    pub parameters: bool,
    pub globals: bool,
    pub function_result: bool,
}

impl Default for FlowPolicy {
    fn default() -> Self {
        FlowPolicy {
            calls: true,
            parameters: true,
            globals: true,
            function_result: true,
        }
    }
}

/// `(FIN, FOUT, SI)` with
/// FIN = distinct callers + `in`/`in out` parameters + distinct globals read,
/// FOUT = distinct callees + `out`/`in out` parameters + function result +
/// distinct globals written, and SI = (FIN * FOUT)^2.
pub fn information_flow(unit: &CodeUnit, graph: &CallGraph, policy: FlowPolicy) -> (u64, u64, u64) {
    let mut fin = 0;
    let mut fout = 0;
    if policy.calls {
        fin += graph.callers_of(&unit.name).count();
        fout += graph.callees_of(&unit.name).count();
    }
    if policy.parameters {
        fin += unit.params.iter().filter(|p| p.mode.is_input()).count();
        fout += unit.params.iter().filter(|p| p.mode.is_output()).count();
    }
    if policy.function_result && unit.kind == UnitKind::Function {
        fout += 1;
    }
    if policy.globals {
        fin += unit.global_reads.len();
        fout += unit.global_writes.len();
    }
    let (fin, fout) = (fin as u64, fout as u64);
    (fin, fout, (fin * fout).pow(2))
}

pub fn unit_metrics(unit: &CodeUnit, graph: &CallGraph, policy: FlowPolicy) -> CodeMetrics {
    let (cl, clc, clcd, clce) = line_counts(unit);
    let (fin, fout, si) = information_flow(unit, graph, policy);
    CodeMetrics {
        cl,
        clc,
        clcd,
        clce,
        cyc: cyclomatic(unit),
        knots: knots(&unit.jumps),
        fin,
        fout,
        si,
    }
}

/// Metrics for every unit of a linked corpus, in input order.
pub fn measure_units(units: &[CodeUnit]) -> Vec<(String, CodeMetrics)> {
    let graph = build_call_graph(units);
    units
        .iter()
        .map(|u| (u.name.clone(), unit_metrics(u, &graph, FlowPolicy::default())))
        .collect()
}
