use std::cmp::Ordering;

use serde::Serialize;

use super::special::{normal_sf, student_t_two_tailed};
use super::{AssociationClass, CorrelationResult, CorrelationTest, StatsError};

fn validate(x: &[f64], y: &[f64]) -> Result<usize, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 3 {
        return Err(StatsError::TooFewSamples(n));
    }
    for (name, v) in [("x", x), ("y", y)] {
        if v.iter().any(|a| !a.is_finite()) {
            return Err(StatsError::NonFinite(name.into()));
        }
        if v.iter().all(|a| *a == v[0]) {
            return Err(StatsError::ConstantInput(name.into()));
        }
    }
    Ok(n)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Two-tailed p for a correlation coefficient through the t transform
/// with n - 2 degrees of freedom.
fn t_transform_p(r: f64, n: usize) -> Result<f64, StatsError> {
    if r.abs() >= 1.0 {
        return Ok(0.0);
    }
    let df = (n - 2) as f64;
    let t = r * (df / (1.0 - r * r)).sqrt();
    student_t_two_tailed(t, df)
}

fn pearson_r(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<CorrelationResult, StatsError> {
    let n = validate(x, y)?;
    let r = pearson_r(x, y);
    Ok(CorrelationResult {
        r,
        p: t_transform_p(r, n)?,
        n,
        test: CorrelationTest::Pearson,
    })
}

/// 1-based ranks; tied values share the mean of the ranks they span.
pub fn midranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson's r on midranks, with the p-value from the same t transform.
/// The t approximation is meant for moderate samples; no exact
/// permutation p-value is computed for very small n.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<CorrelationResult, StatsError> {
    let n = validate(x, y)?;
    let r = pearson_r(&midranks(x), &midranks(y));
    Ok(CorrelationResult {
        r,
        p: t_transform_p(r, n)?,
        n,
        test: CorrelationTest::Spearman,
    })
}

/// Sizes of the runs of equal values in a sorted slice.
fn tie_groups<T: PartialEq>(sorted: &[T]) -> Vec<u64> {
    let mut groups = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        if j - i > 1 {
            groups.push((j - i) as u64);
        }
        i = j;
    }
    groups
}

/// Sorts `v` and returns the number of strict inversions removed.
fn merge_sort_count(v: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = merge_sort_count(&mut v[..mid]) + merge_sort_count(&mut v[mid..]);
    let mut merged = Vec::with_capacity(n);
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[j] < v[i] {
            merged.push(v[j]);
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            merged.push(v[i]);
            i += 1;
        }
    }
    merged.extend_from_slice(&v[i..mid]);
    merged.extend_from_slice(&v[j..n]);
    v.copy_from_slice(&merged);
    swaps
}

/// Kendall's tau-b in O(n log n) (Knight's algorithm) with the
/// tie-adjusted normal approximation for p.
pub fn kendall(x: &[f64], y: &[f64]) -> Result<CorrelationResult, StatsError> {
    let n = validate(x, y)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])));

    let xs: Vec<f64> = order.iter().map(|&i| x[i]).collect();
    let xy: Vec<(f64, f64)> = order.iter().map(|&i| (x[i], y[i])).collect();
    let mut ys: Vec<f64> = order.iter().map(|&i| y[i]).collect();
    let x_ties = tie_groups(&xs);
    let joint_ties = tie_groups(&xy);
    let discordant = merge_sort_count(&mut ys);
    let y_ties = tie_groups(&ys);

    let pairs = |g: &[u64]| g.iter().map(|t| t * (t - 1) / 2).sum::<u64>();
    let nn = n as u64;
    let n0 = nn * (nn - 1) / 2;
    let (n1, n2, n3) = (pairs(&x_ties), pairs(&y_ties), pairs(&joint_ties));
    let s = n0 as i64 - n1 as i64 - n2 as i64 + n3 as i64 - 2 * discordant as i64;
    let tau = s as f64 / ((n0 - n1) as f64 * (n0 - n2) as f64).sqrt();

    let nf = n as f64;
    let sum = |g: &[u64], f: fn(f64) -> f64| g.iter().map(|&t| f(t as f64)).sum::<f64>();
    let v0 = nf * (nf - 1.0) * (2.0 * nf + 5.0);
    let vt = sum(&x_ties, |t| t * (t - 1.0) * (2.0 * t + 5.0));
    let vu = sum(&y_ties, |t| t * (t - 1.0) * (2.0 * t + 5.0));
    let v1 = sum(&x_ties, |t| t * (t - 1.0)) * sum(&y_ties, |t| t * (t - 1.0));
    let v2 = sum(&x_ties, |t| t * (t - 1.0) * (t - 2.0)) * sum(&y_ties, |t| t * (t - 1.0) * (t - 2.0));
    let var = (v0 - vt - vu) / 18.0
        + v1 / (2.0 * nf * (nf - 1.0))
        + v2 / (9.0 * nf * (nf - 1.0) * (nf - 2.0));
    let z = s as f64 / var.sqrt();
    let p = (2.0 * normal_sf(z.abs())).min(1.0);
    Ok(CorrelationResult {
        r: tau.clamp(-1.0, 1.0),
        p,
        n,
        test: CorrelationTest::Kendall,
    })
}

pub fn correlate(test: CorrelationTest, x: &[f64], y: &[f64]) -> Result<CorrelationResult, StatsError> {
    match test {
        CorrelationTest::Pearson => pearson(x, y),
        CorrelationTest::Spearman => spearman(x, y),
        CorrelationTest::Kendall => kendall(x, y),
    }
}

/// Bins |r| after rounding to three decimals: strong from 0.8, moderate
/// from 0.5, weak below.
pub fn classify_association(r: f64) -> Result<AssociationClass, StatsError> {
    if r.is_nan() || r.abs() > 1.0 {
        return Err(StatsError::OutOfRange(r));
    }
    let a = (r.abs() * 1000.0).round() / 1000.0;
    Ok(match a.partial_cmp(&0.8) {
        Some(Ordering::Less) if a < 0.5 => AssociationClass::Weak,
        Some(Ordering::Less) => AssociationClass::Moderate,
        _ => AssociationClass::Strong,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationRow {
    pub spec_metric: String,
    pub code_metric: String,
    pub test: CorrelationTest,
    pub r: f64,
    pub p: f64,
    pub association: AssociationClass,
    pub n: usize,
}

/// Every (spec metric, code metric, test) combination, ordered as given.
/// Columns are checked up front so a constant column is reported by name.
/// Rows for different spec metrics are computed on separate threads.
pub fn correlation_matrix(
    spec: &[(String, Vec<f64>)],
    code: &[(String, Vec<f64>)],
) -> Result<Vec<CorrelationRow>, StatsError> {
    for (name, col) in spec.iter().chain(code) {
        if col.len() >= 2 && col.iter().all(|v| *v == col[0]) {
            return Err(StatsError::ConstantInput(name.clone()));
        }
    }
    let per_spec: Vec<Result<Vec<CorrelationRow>, StatsError>> = std::thread::scope(|s| {
        let handles: Vec<_> = spec
            .iter()
            .map(|(sname, x)| {
                s.spawn(move || {
                    let mut rows = Vec::with_capacity(code.len() * 3);
                    for (cname, y) in code {
                        for test in CorrelationTest::ALL {
                            let res = correlate(test, x, y)?;
                            rows.push(CorrelationRow {
                                spec_metric: sname.clone(),
                                code_metric: cname.clone(),
                                test,
                                r: res.r,
                                p: res.p,
                                association: classify_association(res.r)?,
                                n: res.n,
                            });
                        }
                    }
                    Ok(rows)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("correlation worker panicked"))
            .collect()
    });
    let mut rows = Vec::new();
    for part in per_spec {
        rows.extend(part?);
    }
    Ok(rows)
}
