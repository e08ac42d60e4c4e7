//! Seeded generators of random valid spaces, used by the test suites and
//! benchmarks. Deterministic for a given seed.

use crate::config::Tolerances;
use crate::space::{validate_space, FiniteMMSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random weights bounded away from zero (floor 0.05 before normalization).
pub fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| 0.05 + rng.gen::<f64>()).collect();
    let sum: f64 = raw.iter().sum();
    raw.iter().map(|w| w / sum).collect()
}

/// Random space from points in the unit cube under the max metric.
pub fn random_euclidean_space(rng: &mut ChaCha8Rng, n: usize) -> FiniteMMSpace {
    let dim = 3;
    let pts: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect())
        .collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    pts[i]
                        .iter()
                        .zip(&pts[j])
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                })
                .collect()
        })
        .collect();
    let weights = random_weights(rng, n);
    let labels = (0..n).map(|i| format!("p{i}")).collect();
    validate_space(labels, rows, weights, &Tolerances::default())
        .expect("cube samples satisfy the axioms")
}

/// Random generic metric: a symmetric positive matrix repaired into a metric
/// by shortest paths. Produces non-embeddable metrics, unlike cube samples.
pub fn random_metric_space(rng: &mut ChaCha8Rng, n: usize) -> FiniteMMSpace {
    let mut d = vec![0.0f64; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.1 + 0.9 * rng.gen::<f64>();
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    // Floyd–Warshall repair: replace each entry by the shortest path.
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i * n + k] + d[k * n + j];
                if via < d[i * n + j] {
                    d[i * n + j] = via;
                }
            }
        }
    }
    let rows: Vec<Vec<f64>> = (0..n).map(|i| d[i * n..(i + 1) * n].to_vec()).collect();
    let weights = random_weights(rng, n);
    let labels = (0..n).map(|i| format!("p{i}")).collect();
    validate_space(labels, rows, weights, &Tolerances::default())
        .expect("shortest-path repair yields a metric")
}

/// Alternates between the cube and generic generators.
pub fn random_space(rng: &mut ChaCha8Rng, n: usize) -> FiniteMMSpace {
    if rng.gen::<bool>() {
        random_euclidean_space(rng, n)
    } else {
        random_metric_space(rng, n)
    }
}

/// A random probability vector over `n` points, allowing zero entries.
pub fn random_measure(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n)
        .map(|_| if rng.gen::<f64>() < 0.2 { 0.0 } else { rng.gen::<f64>() })
        .collect();
    let sum: f64 = raw.iter().sum();
    if sum == 0.0 {
        let mut out = vec![0.0; n];
        out[0] = 1.0;
        out
    } else {
        raw.iter().map(|w| w / sum).collect()
    }
}
