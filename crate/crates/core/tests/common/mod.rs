//! Independent oracles and generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zmetrics::spec::{Decoration, PredExpr, ResolvedSpec, Term};

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

// ---------------------------------------------------------------------------
// Numerical integration

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    // The first levels always split, so a lucky agreement of the coarse
    // estimates cannot end the recursion early.
    if depth == 0 || (depth < MAX_DEPTH - MIN_SPLITS && delta.abs() <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    adaptive(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + adaptive(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

const MAX_DEPTH: u32 = 50;
const MIN_SPLITS: u32 = 6;

/// Adaptive Simpson quadrature of `f` over [a, b].
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = simpson(a, b, fa, fm, fb);
    adaptive(f, a, b, fa, fm, fb, whole, 1e-14, MAX_DEPTH)
}

/// P(T > t) with T ~ t(df), from t = sqrt(df) tan(theta): the density in
/// theta is proportional to cos^(df-1)(theta).
pub fn t_sf_oracle(t: f64, df: f64) -> f64 {
    let half = std::f64::consts::FRAC_PI_2;
    let g = |th: f64| th.cos().powf(df - 1.0);
    let theta = (t / df.sqrt()).atan();
    integrate(&g, theta, half) / integrate(&g, -half, half)
}

/// P(F > f) with F ~ F(d1, d2), through I_x(d2/2, d1/2), x = d2/(d2+d1 f),
/// written with x = sin^2(phi).
pub fn f_sf_oracle(f: f64, d1: f64, d2: f64) -> f64 {
    let g = |phi: f64| phi.sin().powf(d2 - 1.0) * phi.cos().powf(d1 - 1.0);
    let x = d2 / (d2 + d1 * f);
    integrate(&g, 0.0, x.sqrt().asin()) / integrate(&g, 0.0, std::f64::consts::FRAC_PI_2)
}

// ---------------------------------------------------------------------------
// Rank statistics

/// Kendall tau-b by enumerating all pairs.
pub fn kendall_oracle(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let (mut c, mut d, mut tx, mut ty) = (0i64, 0i64, 0u64, 0u64);
    for i in 0..n {
        for j in i + 1..n {
            let dx = x[i] - x[j];
            let dy = y[i] - y[j];
            if dx == 0.0 {
                tx += 1;
            }
            if dy == 0.0 {
                ty += 1;
            }
            if dx != 0.0 && dy != 0.0 {
                if (dx > 0.0) == (dy > 0.0) {
                    c += 1;
                } else {
                    d += 1;
                }
            }
        }
    }
    let n0 = (n * (n - 1) / 2) as u64;
    let s = c - d;
    s as f64 / ((n0 - tx) as f64 * (n0 - ty) as f64).sqrt()
}

/// Midranks by counting: rank = #smaller + (#equal + 1) / 2.
pub fn midranks_oracle(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|a| {
            let less = v.iter().filter(|b| *b < a).count() as f64;
            let equal = v.iter().filter(|b| *b == a).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

/// Random vector pair of length 3..=30 over a small value range, so ties
/// are common; neither vector is constant.
pub fn tied_vectors(rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    loop {
        let n = rng.random_range(3..=30);
        let range = rng.random_range(2..=12);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(0..range) as f64).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(0..range) as f64 * 0.5).collect();
        let constant = |v: &[f64]| v.iter().all(|a| *a == v[0]);
        if !constant(&x) && !constant(&y) {
            return (x, y);
        }
    }
}

// ---------------------------------------------------------------------------
// Random specifications

const STATE_VARS: [&str; 4] = ["a", "b", "c", "d"];

fn random_term(rng: &mut ChaCha8Rng, vars: &[String], depth: u32) -> String {
    let choice = if depth == 0 { rng.random_range(0..3) } else { rng.random_range(0..7) };
    match choice {
        0 | 1 => vars[rng.random_range(0..vars.len())].clone(),
        2 => rng.random_range(0..10).to_string(),
        3 => format!(
            "{} + {}",
            random_term(rng, vars, depth - 1),
            random_term(rng, vars, depth - 1)
        ),
        4 => format!("f({})", random_term(rng, vars, depth - 1)),
        5 => format!("{{{}, {}}}", random_term(rng, vars, 0), random_term(rng, vars, 0)),
        _ => format!("#{}", random_term(rng, vars, 0)),
    }
}

fn random_pred(rng: &mut ChaCha8Rng, vars: &[String], depth: u32) -> String {
    let choice = if depth == 0 { 0 } else { rng.random_range(0..6) };
    match choice {
        0 | 1 => {
            let op = ["=", "/=", "<", ">=", "in"][rng.random_range(0..5)];
            format!("{} {op} {}", random_term(rng, vars, 1), random_term(rng, vars, 1))
        }
        2 => format!("{} and {}", random_pred(rng, vars, depth - 1), random_pred(rng, vars, depth - 1)),
        3 => format!("({} or {})", random_pred(rng, vars, depth - 1), random_pred(rng, vars, depth - 1)),
        4 => format!("not ({})", random_pred(rng, vars, depth - 1)),
        _ => format!("({} implies {})", random_pred(rng, vars, depth - 1), random_pred(rng, vars, depth - 1)),
    }
}

/// Source text of a random specification with 1 to 4 schemas. Later
/// schemas may include earlier ones through delta, xi or includes; the
/// first schema is favoured as target so that siblings share state and
/// inter-schema arcs occur.
pub fn random_spec_text(rng: &mut ChaCha8Rng) -> String {
    let k = rng.random_range(1..=4);
    let mut out = String::from("given T\n");
    let mut state: Vec<(String, Vec<String>)> = Vec::new();
    for i in 0..k {
        let name = format!("S{i}");
        out.push_str(&format!("schema {name}\n"));
        let mut vars: Vec<String> = Vec::new();
        let mut own: Vec<String> = Vec::new();
        if i > 0 && rng.random_bool(0.85) {
            let pick = if rng.random_bool(0.6) { 0 } else { rng.random_range(0..state.len()) };
            let (target, tvars) = state[pick].clone();
            let kw = ["delta", "xi", "includes"][rng.random_range(0..3)];
            out.push_str(&format!("  {kw} {target}\n"));
            for v in &tvars {
                vars.push(v.clone());
                if kw != "includes" {
                    vars.push(format!("{v}'"));
                }
            }
            if rng.random_bool(0.2) && state.len() > 1 {
                let (other, ovars) = state[rng.random_range(0..state.len())].clone();
                if other != target {
                    out.push_str(&format!("  delta {other}\n"));
                    for v in &ovars {
                        vars.push(v.clone());
                        vars.push(format!("{v}'"));
                    }
                }
            }
        }
        let ndecl = if i == 0 { rng.random_range(1..=2) } else { rng.random_range(0..=2) };
        for _ in 0..ndecl {
            let base = STATE_VARS[rng.random_range(0..STATE_VARS.len())];
            let deco = if i == 0 { "" } else { ["", "?", "!", "'"][rng.random_range(0..4)] };
            let decl = format!("{base}{i}{deco}");
            if vars.contains(&decl) {
                continue;
            }
            out.push_str(&format!("  decl {decl} : T\n"));
            vars.push(decl.clone());
            if deco.is_empty() {
                own.push(decl);
            }
        }
        if vars.is_empty() {
            vars.push(format!("z{i}"));
            vars.push(format!("z{i}'"));
        }
        let npred = if i == 0 { rng.random_range(0..=1) } else { rng.random_range(0..=3) };
        for _ in 0..npred {
            let depth = rng.random_range(0..=2);
            out.push_str(&format!("  pred {}\n", random_pred(rng, &vars, depth)));
        }
        out.push_str("end\n");
        state.push((name, own));
    }
    out
}

// ---------------------------------------------------------------------------
// Brute-force SRN and metrics

#[derive(Debug, Clone)]
pub struct OraclePrime {
    pub schema: usize,
    pub decl: Option<String>,
    pub defs: BTreeSet<(String, Decoration)>,
    pub uses: BTreeSet<(String, Decoration)>,
}

impl OraclePrime {
    fn is_guard(&self) -> bool {
        self.decl.is_none() && self.defs.is_empty()
    }
}

fn after(d: Decoration) -> bool {
    matches!(d, Decoration::Primed | Decoration::Output)
}

fn term_idents(t: &Term, out: &mut Vec<(String, Decoration)>) {
    match t {
        Term::Ident(id) => out.push((id.name.clone(), id.decoration)),
        Term::Literal(_) => {}
        Term::Apply { func, args } => {
            out.push((func.name.clone(), func.decoration));
            for a in args {
                term_idents(a, out);
            }
        }
        Term::Binary { lhs, rhs, .. } => {
            term_idents(lhs, out);
            term_idents(rhs, out);
        }
        Term::Unary { operand, .. } => term_idents(operand, out),
        Term::Opaque { items, .. } => items.iter().for_each(|i| term_idents(i, out)),
    }
}

fn pred_idents(p: &PredExpr, out: &mut Vec<(String, Decoration)>) {
    match p {
        PredExpr::Relation { lhs, rhs, .. } => {
            term_idents(lhs, out);
            term_idents(rhs, out);
        }
        PredExpr::Atom(t) => term_idents(t, out),
        PredExpr::Not(q) => pred_idents(q, out),
        PredExpr::And(a, b) | PredExpr::Or(a, b) | PredExpr::Implies(a, b) => {
            pred_idents(a, out);
            pred_idents(b, out);
        }
    }
}

fn split_and<'a>(p: &'a PredExpr, out: &mut Vec<&'a PredExpr>) {
    match p {
        PredExpr::And(a, b) => {
            split_and(a, out);
            split_and(b, out);
        }
        other => out.push(other),
    }
}

fn count_nodes(p: &PredExpr, want_and: bool) -> usize {
    let own = match (p, want_and) {
        (PredExpr::And(..), true) | (PredExpr::Or(..), false) => 1,
        _ => 0,
    };
    own + match p {
        PredExpr::Not(q) => count_nodes(q, want_and),
        PredExpr::And(a, b) | PredExpr::Or(a, b) | PredExpr::Implies(a, b) => {
            count_nodes(a, want_and) + count_nodes(b, want_and)
        }
        _ => 0,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleNet {
    pub control: BTreeSet<(usize, usize)>,
    pub data: BTreeSet<(usize, usize, String)>,
    pub inter: BTreeSet<(usize, usize, String)>,
    /// Eleven values per schema, in the canonical measure order.
    pub metrics: Vec<[f64; 11]>,
}

pub fn srn_oracle(spec: &ResolvedSpec) -> OracleNet {
    let mut primes: Vec<OraclePrime> = Vec::new();
    for (si, s) in spec.schemas.iter().enumerate() {
        for d in &s.declarations {
            primes.push(OraclePrime {
                schema: si,
                decl: Some(d.name.clone()),
                defs: BTreeSet::from([(d.name.clone(), d.decoration)]),
                uses: BTreeSet::new(),
            });
        }
        for p in &s.predicates {
            let mut parts = Vec::new();
            split_and(&p.expr, &mut parts);
            for part in parts {
                let mut ids = Vec::new();
                pred_idents(part, &mut ids);
                primes.push(OraclePrime {
                    schema: si,
                    decl: None,
                    defs: ids.iter().filter(|(_, d)| after(*d)).cloned().collect(),
                    uses: ids.iter().filter(|(_, d)| !after(*d)).cloned().collect(),
                });
            }
        }
    }
    let names = |set: &BTreeSet<(String, Decoration)>| -> BTreeSet<String> {
        set.iter().map(|(n, _)| n.clone()).collect()
    };

    let mut control = BTreeSet::new();
    let mut data = BTreeSet::new();
    for (i, p) in primes.iter().enumerate() {
        for (j, q) in primes.iter().enumerate() {
            if i == j || p.schema != q.schema || q.decl.is_some() {
                continue;
            }
            if p.is_guard() && !q.is_guard() {
                control.insert((i, j));
            }
            match &p.decl {
                Some(v) => {
                    if names(&q.defs).contains(v) || names(&q.uses).contains(v) {
                        data.insert((i, j, v.clone()));
                    }
                }
                None => {
                    for v in names(&p.defs).intersection(&names(&q.uses)) {
                        data.insert((i, j, v.clone()));
                    }
                }
            }
        }
    }

    let included: Vec<BTreeSet<String>> = spec
        .schemas
        .iter()
        .map(|s| s.inclusions.iter().map(|i| i.target.clone()).collect())
        .collect();
    let declares = |schema: &str, v: &str| {
        spec.schemas
            .iter()
            .find(|s| s.name == schema)
            .is_some_and(|s| s.declarations.iter().any(|d| d.name == v))
    };
    let mut inter = BTreeSet::new();
    for (i, p) in primes.iter().enumerate() {
        if p.decl.is_some() {
            continue;
        }
        for (j, q) in primes.iter().enumerate() {
            if p.schema == q.schema {
                continue;
            }
            for (v, _) in &p.defs {
                let linked = included[p.schema]
                    .iter()
                    .any(|x| included[q.schema].contains(x) && declares(x, v));
                if linked && q.uses.contains(&(v.clone(), Decoration::Plain)) {
                    inter.insert((i, j, v.clone()));
                }
            }
        }
    }

    let k = spec.schemas.len();
    let size = |s: usize| primes.iter().filter(|p| p.schema == s).count();
    let mut metrics = Vec::new();
    for (si, s) in spec.schemas.iter().enumerate() {
        let ids: Vec<usize> = (0..primes.len()).filter(|&i| primes[i].schema == si).collect();
        let n = ids.len();
        let my_control: Vec<_> = control.iter().filter(|(a, _)| primes[*a].schema == si).collect();
        let targets: BTreeSet<usize> = my_control.iter().map(|(_, b)| *b).collect();
        let du = data.iter().filter(|(a, _, _)| primes[*a].schema == si).count();

        let mut uses = BTreeSet::new();
        let mut defs = BTreeSet::new();
        let (mut ands, mut ors) = (0, 0);
        for p in &s.predicates {
            let mut all = Vec::new();
            pred_idents(&p.expr, &mut all);
            for (name, d) in all {
                if after(d) {
                    defs.insert(name);
                } else {
                    uses.insert(name);
                }
            }
            ands += count_nodes(&p.expr, true);
            ors += count_nodes(&p.expr, false);
        }

        // Slices by fixpoint iteration over all intra-schema arcs.
        let mut criteria: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
        for &i in &ids {
            if primes[i].decl.is_none() {
                for (v, _) in &primes[i].defs {
                    criteria.entry(v.clone()).or_default().insert(i);
                }
            }
        }
        let arcs: Vec<(usize, usize)> = control
            .iter()
            .copied()
            .chain(data.iter().map(|(a, b, _)| (*a, *b)))
            .filter(|(a, _)| primes[*a].schema == si)
            .collect();
        let slices: Vec<BTreeSet<usize>> = criteria
            .values()
            .map(|c| {
                let mut sl = c.clone();
                loop {
                    let before = sl.len();
                    for (a, b) in &arcs {
                        if sl.contains(b) {
                            sl.insert(*a);
                        }
                    }
                    if sl.len() == before {
                        break sl;
                    }
                }
            })
            .collect();
        let m = slices.len();
        let (cov, ovl) = if m == 0 || n == 0 {
            (0.0, 0.0)
        } else {
            let common: BTreeSet<usize> = ids
                .iter()
                .copied()
                .filter(|i| slices.iter().all(|s| s.contains(i)))
                .collect();
            let cov = slices.iter().map(|s| s.len() as f64 / n as f64).sum::<f64>() / m as f64;
            let ovl = slices
                .iter()
                .map(|s| if s.is_empty() { 0.0 } else { common.len() as f64 / s.len() as f64 })
                .sum::<f64>()
                / m as f64;
            (cov, ovl)
        };

        let chi = if k <= 1 {
            0.0
        } else {
            (0..k)
                .filter(|&j| j != si)
                .map(|j| {
                    let f = inter
                        .iter()
                        .filter(|(a, b, _)| {
                            let (sa, sb) = (primes[*a].schema, primes[*b].schema);
                            (sa == si && sb == j) || (sa == j && sb == si)
                        })
                        .count();
                    let denom = size(si) + size(j);
                    if denom == 0 { 0.0 } else { f as f64 / denom as f64 }
                })
                .sum::<f64>()
                / (k - 1) as f64
        };

        metrics.push([
            n as f64,
            1.0 + targets.len() as f64,
            1.0 + my_control.len() as f64,
            du as f64,
            uses.len() as f64,
            defs.len() as f64,
            ands as f64,
            ors as f64,
            cov,
            ovl,
            chi,
        ]);
    }
    OracleNet { control, data, inter, metrics }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
