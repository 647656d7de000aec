//! Synthetic observations drawn from the reference CL(M) formula.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::ObservationMatrix;
use crate::spec_metrics::SpecMetrics;

/// CL(M) = 3.099*CC - 1.237*USE + 2.557*AND - 41.735*OR - 9.873
pub const REFERENCE_CL_TERMS: [(&str, f64); 4] =
    [("CC", 3.099), ("USE", -1.237), ("AND", 2.557), ("OR", -41.735)];
pub const REFERENCE_CL_INTERCEPT: f64 = -9.873;

fn draw(name: &str, rng: &mut ChaCha8Rng) -> f64 {
    match name {
        "CC" => rng.random_range(3..=60) as f64,
        "VL" | "VU" => rng.random_range(1..=12) as f64,
        "DU" => rng.random_range(0..=80) as f64,
        "USE" => rng.random_range(1..=25) as f64,
        "DEF" => rng.random_range(0..=10) as f64,
        "AND" => rng.random_range(0..=15) as f64,
        "OR" => rng.random_range(0..=5) as f64,
        _ => rng.random::<f64>(),
    }
}

/// `n` rows over all eleven spec measures, with CL computed from the
/// reference formula plus N(0, `noise_sd`) noise. Only CC, USE, AND and OR
/// carry signal. Identical seeds give identical matrices.
pub fn simulate_cl(n: usize, seed: u64, noise_sd: f64) -> ObservationMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_sd).expect("finite, non-negative noise");
    let names = SpecMetrics::NAMES;
    let mut rows = Vec::with_capacity(n);
    let mut response = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = names.iter().map(|name| draw(name, &mut rng)).collect();
        let mut y = REFERENCE_CL_INTERCEPT;
        for (name, c) in REFERENCE_CL_TERMS {
            let j = names.iter().position(|n| *n == name).expect("spec measure");
            y += c * row[j];
        }
        if noise_sd > 0.0 {
            y += noise.sample(&mut rng);
        }
        rows.push(row);
        response.push(y);
    }
    ObservationMatrix {
        target: "CL".into(),
        predictors: names.iter().map(|s| s.to_string()).collect(),
        rows,
        response,
    }
}
