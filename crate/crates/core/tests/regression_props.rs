//! Least-squares and elimination properties on random well-conditioned
//! data, with an explicit normal-equations solve as the oracle.

mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::Rng;
use zmetrics::regression::{
    backward_eliminate_with, ols_fit, EliminationMode, ObservationMatrix, RegressionModel,
};

fn random_data(seed: u64, k: usize, extra: usize) -> ObservationMatrix {
    let mut rng = common::rng(seed);
    let n = k + 3 + extra;
    let beta: Vec<f64> = (0..=k).map(|_| rng.random_range(-3.0..3.0)).collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..k).map(|_| rng.random_range(-5.0..5.0)).collect())
        .collect();
    let response = rows
        .iter()
        .map(|r| {
            beta[0]
                + r.iter().zip(&beta[1..]).map(|(x, b)| x * b).sum::<f64>()
                + rng.random_range(-4.0..4.0)
        })
        .collect();
    ObservationMatrix {
        target: "Y".into(),
        predictors: (0..k).map(|j| format!("X{j}")).collect(),
        rows,
        response,
    }
}

fn design_row(row: &[f64]) -> Vec<f64> {
    std::iter::once(1.0).chain(row.iter().copied()).collect()
}

fn coefficients(model: &RegressionModel) -> Vec<f64> {
    std::iter::once(model.intercept.coeff)
        .chain(model.terms.iter().map(|t| t.estimate.coeff))
        .collect()
}

fn residuals(data: &ObservationMatrix, model: &RegressionModel) -> Vec<f64> {
    let b = coefficients(model);
    data.rows
        .iter()
        .zip(&data.response)
        .map(|(r, y)| y - design_row(r).iter().zip(&b).map(|(x, c)| x * c).sum::<f64>())
        .collect()
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
fn invert(mut a: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let m = a.len();
    let mut inv: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|j| f64::from(u8::from(i == j))).collect())
        .collect();
    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let d = a[col][col];
        for j in 0..m {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for i in 0..m {
            if i != col {
                let f = a[i][col];
                for j in 0..m {
                    a[i][j] -= f * a[col][j];
                    inv[i][j] -= f * inv[col][j];
                }
            }
        }
    }
    inv
}

/// Coefficients and standard errors from (X'X)^-1 X'y.
fn normal_equations(data: &ObservationMatrix) -> (Vec<f64>, Vec<f64>) {
    let x: Vec<Vec<f64>> = data.rows.iter().map(|r| design_row(r)).collect();
    let m = x[0].len();
    let xtx: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|j| x.iter().map(|r| r[i] * r[j]).sum()).collect())
        .collect();
    let xty: Vec<f64> = (0..m)
        .map(|i| x.iter().zip(&data.response).map(|(r, y)| r[i] * y).sum())
        .collect();
    let inv = invert(xtx);
    let beta: Vec<f64> = (0..m)
        .map(|i| (0..m).map(|j| inv[i][j] * xty[j]).sum())
        .collect();
    let sse: f64 = x
        .iter()
        .zip(&data.response)
        .map(|(r, y)| (y - r.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>()).powi(2))
        .sum();
    let s2 = sse / (data.n() - m) as f64;
    let se = (0..m).map(|i| (s2 * inv[i][i]).sqrt()).collect();
    (beta, se)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn residuals_are_orthogonal_to_the_design(seed in any::<u64>(), k in 1usize..7, extra in 0usize..50) {
        let data = random_data(seed, k, extra);
        let model = ols_fit(&data).unwrap();
        let e = residuals(&data, &model);
        let e_norm = e.iter().map(|v| v * v).sum::<f64>().sqrt();
        for j in 0..=k {
            let col: Vec<f64> = data.rows.iter().map(|r| design_row(r)[j]).collect();
            let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
            let dot: f64 = col.iter().zip(&e).map(|(a, b)| a * b).sum();
            prop_assert!(dot.abs() <= 1e-9 * norm * e_norm.max(1.0), "column {}: {}", j, dot);
        }
    }

    #[test]
    fn adding_a_predictor_never_lowers_r2(seed in any::<u64>(), k in 2usize..7, extra in 0usize..40) {
        let data = random_data(seed, k, extra);
        let mut previous = 0.0;
        for j in 1..=k {
            let model = ols_fit(&data.select(&data.predictors[..j])).unwrap();
            prop_assert!(model.r2 >= previous - 1e-12, "{} predictors: {} < {}", j, model.r2, previous);
            prop_assert!(model.adj_r2 <= model.r2 && model.r2 <= 1.0);
            prop_assert_eq!(model.residual_df, data.n() - j - 1);
            previous = model.r2;
        }
    }

    #[test]
    fn qr_matches_normal_equations(seed in any::<u64>(), k in 1usize..7, extra in 0usize..50) {
        let data = random_data(seed, k, extra);
        let model = ols_fit(&data).unwrap();
        let (beta, se) = normal_equations(&data);
        let ours = coefficients(&model);
        let our_se: Vec<f64> = std::iter::once(model.intercept.se)
            .chain(model.terms.iter().map(|t| t.estimate.se))
            .collect();
        for j in 0..=k {
            prop_assert!(close(ours[j], beta[j], 1e-9), "coeff {}: {} vs {}", j, ours[j], beta[j]);
            prop_assert!(close(our_se[j], se[j], 1e-9), "se {}: {} vs {}", j, our_se[j], se[j]);
        }
    }

    #[test]
    fn elimination_shrinks_monotonically(
        seed in any::<u64>(),
        k in 1usize..8,
        extra in 0usize..30,
        threshold in 0.01f64..0.9,
        one_at_a_time in any::<bool>(),
    ) {
        let mut data = random_data(seed, k, extra);
        // Pure-noise response so that elimination has work to do.
        let mut rng = common::rng(seed ^ 0x5eed);
        if rng.random_bool(0.5) {
            data.response = (0..data.n()).map(|_| rng.random_range(-1.0..1.0)).collect();
        }
        let mode = if one_at_a_time { EliminationMode::OneAtATime } else { EliminationMode::AllAbove };
        let model = backward_eliminate_with(&data, threshold, mode).unwrap();
        prop_assert!(model.trace.len() <= k);
        let mut remaining: BTreeSet<&str> = data.predictors.iter().map(String::as_str).collect();
        for round in &model.trace {
            prop_assert!(!round.dropped.is_empty());
            if one_at_a_time {
                prop_assert_eq!(round.dropped.len(), 1);
            }
            for d in &round.dropped {
                prop_assert!(remaining.remove(d.name.as_str()), "{} dropped twice", d.name);
                prop_assert!(d.p.is_nan() || d.p > threshold);
            }
        }
        let final_set: BTreeSet<&str> = model.term_names().into_iter().collect();
        prop_assert_eq!(&final_set, &remaining);
        for t in &model.terms {
            prop_assert!(t.estimate.p <= threshold);
        }
    }
}
