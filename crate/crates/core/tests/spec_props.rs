//! Properties of the specification front end, the SRN and the schema
//! measures over randomly generated specifications.

mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use zmetrics::spec::{
    load_specification, parse_specification, print_specification, resolve_inclusions,
    InclusionKind, PredicateKind, ResolvedSpec,
};
use zmetrics::spec_metrics::{measure_specification, schema_metrics, slice, slice_profile};
use zmetrics::srn::{build_srn, Srn};

fn spec_text(seed: u64) -> String {
    common::random_spec_text(&mut common::rng(seed))
}

/// Shuffles the `pred` lines of every schema, leaving everything else in
/// place.
fn shuffle_preds(text: &str, seed: u64) -> String {
    let mut rng = common::rng(seed);
    let mut out = Vec::new();
    let mut block: Vec<&str> = Vec::new();
    for line in text.lines() {
        if line.trim_start().starts_with("pred ") {
            block.push(line);
            continue;
        }
        block.shuffle(&mut rng);
        out.append(&mut block);
        out.push(line);
    }
    out.join("\n") + "\n"
}

type ArcBag = BTreeMap<(String, String, String, String), usize>;

/// Arc multisets keyed by prime text instead of prime id.
fn arcs_by_text(srn: &Srn) -> (ArcBag, ArcBag, ArcBag) {
    let key = |s: usize, d: usize, var: &str| {
        (
            srn.primes[s].schema.clone(),
            srn.primes[s].text.clone(),
            format!("{}::{}", srn.primes[d].schema, srn.primes[d].text),
            var.to_string(),
        )
    };
    let mut control = ArcBag::new();
    for &(s, d) in &srn.control_arcs {
        *control.entry(key(s, d, "")).or_default() += 1;
    }
    let mut data = ArcBag::new();
    for a in &srn.data_arcs {
        *data.entry(key(a.src, a.dst, &a.var)).or_default() += 1;
    }
    let mut inter = ArcBag::new();
    for a in &srn.interschema_arcs {
        *inter.entry(key(a.src, a.dst, &a.var)).or_default() += 1;
    }
    (control, data, inter)
}

fn expected_xi_equalities(spec: &ResolvedSpec, schema: usize) -> usize {
    spec.schemas[schema]
        .inclusions
        .iter()
        .map(|inc| {
            let target = spec.schema(&inc.target).expect("resolved target");
            match inc.kind {
                InclusionKind::Xi => target.state_variables().len(),
                InclusionKind::Delta => 0,
                InclusionKind::Includes => target
                    .predicates
                    .iter()
                    .filter(|p| p.kind == PredicateKind::XiEquality)
                    .count(),
            }
        })
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn print_then_parse_round_trips(seed in any::<u64>()) {
        let ast = parse_specification(&spec_text(seed)).unwrap();
        let printed = print_specification(&ast);
        let again = parse_specification(&printed).unwrap();
        prop_assert_eq!(again.without_positions(), ast.without_positions());
    }

    #[test]
    fn resolve_is_idempotent(seed in any::<u64>()) {
        let ast = parse_specification(&spec_text(seed)).unwrap();
        let once = resolve_inclusions(&ast).unwrap();
        let twice = resolve_inclusions(&once.clone().into_inner()).unwrap();
        prop_assert_eq!(twice, once);
    }

    #[test]
    fn xi_equality_count_follows_included_state(seed in any::<u64>()) {
        let spec = load_specification(&spec_text(seed)).unwrap();
        for (i, s) in spec.schemas.iter().enumerate() {
            let actual = s
                .predicates
                .iter()
                .filter(|p| p.kind == PredicateKind::XiEquality)
                .count();
            prop_assert_eq!(actual, expected_xi_equalities(&spec, i), "schema {}", s.name);
        }
    }

    #[test]
    fn arcs_are_well_formed(seed in any::<u64>()) {
        let spec = load_specification(&spec_text(seed)).unwrap();
        let srn = build_srn(&spec);
        for &(s, d) in &srn.control_arcs {
            let (src, dst) = (&srn.primes[s], &srn.primes[d]);
            prop_assert!(src.is_guard && src.kind.is_predicate());
            prop_assert!(!dst.is_guard && dst.kind.is_predicate());
            prop_assert_eq!(&src.schema, &dst.schema);
        }
        for a in &srn.data_arcs {
            let (src, dst) = (&srn.primes[a.src], &srn.primes[a.dst]);
            prop_assert!(src.def_names().contains(a.var.as_str()));
            prop_assert!(dst.kind.is_predicate());
            if src.kind.is_predicate() {
                prop_assert!(dst.use_set().contains(a.var.as_str()));
            } else {
                // Declarations reach every predicate mentioning the name.
                prop_assert!(dst.use_set().contains(a.var.as_str()) || dst.def_names().contains(a.var.as_str()));
            }
            prop_assert_eq!(&srn.primes[a.src].schema, &srn.primes[a.dst].schema);
        }
        for a in &srn.interschema_arcs {
            prop_assert!(srn.primes[a.src].def_names().contains(a.var.as_str()));
            prop_assert!(srn.primes[a.dst].use_set().contains(a.var.as_str()));
            prop_assert_ne!(a.src_schema, a.dst_schema);
        }
        for p in &srn.primes {
            if !p.kind.is_predicate() {
                prop_assert_eq!(p.def_set.len(), 1);
            }
        }
    }

    #[test]
    fn predicate_order_does_not_matter(seed in any::<u64>(), perm in any::<u64>()) {
        let text = spec_text(seed);
        let a = load_specification(&text).unwrap();
        let b = load_specification(&shuffle_preds(&text, perm)).unwrap();
        let (sa, sb) = (build_srn(&a), build_srn(&b));
        prop_assert_eq!(arcs_by_text(&sa), arcs_by_text(&sb));
        for ((na, ma), (nb, mb)) in measure_specification(&a).iter().zip(&measure_specification(&b)) {
            prop_assert_eq!(na, nb);
            for (x, y) in ma.values().iter().zip(mb.values()) {
                prop_assert!((x - y).abs() <= 1e-12, "{}: {:?} vs {:?}", na, ma, mb);
            }
        }
    }

    #[test]
    fn construction_is_deterministic(seed in any::<u64>()) {
        let spec = load_specification(&spec_text(seed)).unwrap();
        prop_assert_eq!(build_srn(&spec), build_srn(&spec));
    }

    #[test]
    fn slices_are_fixed_points(seed in any::<u64>()) {
        let spec = load_specification(&spec_text(seed)).unwrap();
        let srn = build_srn(&spec);
        for schema in 0..srn.schemas.len() {
            let profile = slice_profile(&srn, schema);
            let range = srn.schemas[schema].primes.clone();
            for ((_, criterion), s) in profile.criteria.iter().zip(&profile.slices) {
                prop_assert!(criterion.is_subset(s));
                prop_assert!(s.iter().all(|p| range.contains(p)));
                prop_assert_eq!(&slice(&srn, schema, s).unwrap(), s);
            }
        }
    }

    #[test]
    fn metric_ranges_hold(seed in any::<u64>()) {
        let spec = load_specification(&spec_text(seed)).unwrap();
        let srn = build_srn(&spec);
        for schema in 0..srn.schemas.len() {
            let m = schema_metrics(&spec, &srn, schema);
            prop_assert!(m.v_u >= m.v_l && m.v_l >= 1);
            if !srn.schemas[schema].primes.is_empty() {
                prop_assert!(m.cc >= 1);
            }
            prop_assert!((0.0..=1.0).contains(&m.coverage));
            prop_assert!((0.0..=1.0).contains(&m.overlap));
            prop_assert!(m.coupling >= 0.0);
            if slice_profile(&srn, schema).slices.len() == 1 {
                prop_assert_eq!(m.overlap, 1.0);
            }
        }
    }
}
