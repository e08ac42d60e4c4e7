//! Concentration invariants: partial diameter (on the line and in a space),
//! the observable diameter, and the closed-form Gaussian and sphere
//! quantities.
//!
//! The exact observable diameter is computed by enumerating total orderings
//! of the points (the candidate order of the 1-Lipschitz image values): for
//! a fixed ordering, the best attainable minimal-window span is the optimum
//! of a system of difference constraints, solved by bisection with
//! Bellman–Ford feasibility. The maximum over orderings is the observable
//! diameter; a minimal-range mass window on the line may be taken over
//! order-contiguous atoms, which is what makes the reduction exact.

use crate::boxdist::{max_mass_subset_under, BoxError};
use crate::config::{SearchBudget, Tolerances, MASS_SLACK};
use crate::quadrature::{
    adaptive_simpson, gaussian_half_cdf_inverse, gaussian_quantile, QUAD_TOL,
};
use crate::space::{quotient_support_flat, FiniteMMSpace, SpaceError};
use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

pub const OBS_LOWER_SEED: u64 = 0x0D1A;

#[derive(Debug, Clone, Error)]
pub enum InvariantError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("search budget exceeded: {0}")]
    SearchBudgetExceeded(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Box(#[from] BoxError),
}

/// A finitely supported measure on the real line.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMeasure {
    /// (position, mass), sorted by position.
    atoms: Vec<(f64, f64)>,
}

impl RealMeasure {
    pub fn new(mut atoms: Vec<(f64, f64)>, tol: &Tolerances) -> Result<Self, InvariantError> {
        if atoms.is_empty() {
            return Err(InvariantError::InvalidParameter("empty measure".into()));
        }
        let mut sum = 0.0;
        for &(p, m) in &atoms {
            if !p.is_finite() {
                return Err(InvariantError::InvalidParameter(format!("position {p}")));
            }
            if !m.is_finite() || m <= 0.0 {
                return Err(InvariantError::InvalidParameter(format!("mass {m}")));
            }
            sum += m;
        }
        if (sum - 1.0).abs() > tol.mass {
            return Err(InvariantError::InvalidParameter(format!("total mass {sum}")));
        }
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }
}

/// Minimum length of a window `[a, b]` capturing mass at least `alpha`;
/// a sliding window over the sorted atoms. `alpha = 0` gives 0.
pub fn partial_diam_line(nu: &RealMeasure, alpha: f64) -> f64 {
    if alpha <= 0.0 {
        return 0.0;
    }
    let need = alpha - MASS_SLACK;
    let atoms = &nu.atoms;
    let mut best = f64::INFINITY;
    let mut i = 0;
    let mut mass = 0.0;
    for j in 0..atoms.len() {
        mass += atoms[j].1;
        while mass - atoms[i].1 >= need {
            mass -= atoms[i].1;
            i += 1;
        }
        if mass >= need {
            best = best.min(atoms[j].0 - atoms[i].0);
        }
    }
    if best.is_finite() {
        best
    } else {
        // alpha exceeds the total mass; the full support is the best window.
        atoms[atoms.len() - 1].0 - atoms[0].0
    }
}

/// A 1-Lipschitz real function on a finite space, stored by its values.
#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzVector {
    values: Vec<f64>,
}

impl LipschitzVector {
    pub fn new(
        values: Vec<f64>,
        space: &FiniteMMSpace,
        tol: &Tolerances,
    ) -> Result<Self, InvariantError> {
        if values.len() != space.n() {
            return Err(InvariantError::InvalidParameter(format!(
                "{} values for {} points",
                values.len(),
                space.n()
            )));
        }
        for i in 0..values.len() {
            for j in (i + 1)..values.len() {
                if (values[i] - values[j]).abs() > space.d(i, j) + tol.metric {
                    return Err(InvariantError::InvalidParameter(format!(
                        "values at {i}, {j} differ by more than the distance"
                    )));
                }
            }
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Push-forward of the space's weights along this function.
    pub fn push_measure(&self, space: &FiniteMMSpace, tol: &Tolerances) -> RealMeasure {
        let atoms = self
            .values
            .iter()
            .zip(space.weights())
            .map(|(&v, &w)| (v, w))
            .collect();
        RealMeasure::new(atoms, tol).expect("weights of a valid space form a measure")
    }
}

/// `diam(X; alpha)`: smallest diameter of a subset with mass ≥ alpha, by
/// threshold-graph clique search (shared with the one-point box formula).
pub fn partial_diam_space(
    x: &FiniteMMSpace,
    alpha: f64,
    budget: &SearchBudget,
) -> Result<f64, InvariantError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(InvariantError::InvalidParameter(format!("alpha {alpha}")));
    }
    if alpha <= 0.0 {
        return Ok(0.0);
    }
    let n = x.n();
    if n > budget.exact_points {
        return Err(InvariantError::SearchBudgetExceeded(format!(
            "{n} points beyond the exact regime ({})",
            budget.exact_points
        )));
    }
    let mut thresholds: Vec<f64> = vec![0.0];
    for i in 0..n {
        for j in (i + 1)..n {
            thresholds.push(x.d(i, j));
        }
    }
    thresholds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    thresholds.dedup();
    let mut nodes = 0u64;
    for &d in &thresholds {
        let found = max_mass_subset_under(
            x,
            d,
            0.0,
            alpha,
            budget.node_limit,
            &mut nodes,
        )
        .map_err(|e| InvariantError::SearchBudgetExceeded(e.to_string()))?;
        if let Some((mass, _)) = found {
            if mass >= alpha - MASS_SLACK {
                return Ok(d);
            }
        }
    }
    Ok(x.diam())
}

/// Result of the observable-diameter computation. `certified` is false when
/// the space was beyond the ordering-enumeration regime and the value is the
/// heuristic lower bound instead.
#[derive(Debug, Clone)]
pub struct ObsDiam {
    pub value: f64,
    pub witness: LipschitzVector,
    pub certified: bool,
}

/// Exact observable diameter `OD(X; -kappa)`: the supremum over 1-Lipschitz
/// `f: X → ℝ` of the partial diameter of `f_* μ` at mass `1 - kappa`.
pub fn obs_diam_exact(
    x: &FiniteMMSpace,
    kappa: f64,
    budget: &SearchBudget,
    tol: &Tolerances,
) -> Result<ObsDiam, InvariantError> {
    if !(0.0 < kappa && kappa < 1.0) {
        return Err(InvariantError::InvalidParameter(format!("kappa {kappa}")));
    }
    let n = x.n();
    if n > budget.exact_obs_points {
        let (value, witness) = obs_diam_lower(x, kappa, 64, OBS_LOWER_SEED, tol)?;
        return Ok(ObsDiam { value, witness, certified: false });
    }
    let alpha = 1.0 - kappa;
    let zero = LipschitzVector::new(vec![0.0; n], x, tol).expect("constant is Lipschitz");
    // A single atom of mass ≥ alpha forces a zero-length window for every f.
    let max_w = x.weights().iter().cloned().fold(0.0, f64::max);
    if max_w >= alpha - MASS_SLACK {
        return Ok(ObsDiam { value: 0.0, witness: zero, certified: true });
    }

    let orderings: Vec<Vec<usize>> = (0..n).permutations(n).collect();
    let best = orderings
        .par_iter()
        .enumerate()
        .map(|(idx, sigma)| {
            let (value, potentials) = ordering_optimum(x, sigma, alpha);
            (value, idx, potentials)
        })
        .reduce(
            || (f64::NEG_INFINITY, usize::MAX, Vec::new()),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        );
    let mut values = best.2;
    if values.is_empty() {
        values = vec![0.0; n];
    }
    let shift = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let shifted: Vec<f64> = values.iter().map(|v| v - shift).collect();
    let witness = LipschitzVector::new(shifted, x, tol)?;
    Ok(ObsDiam { value: best.0.max(0.0), witness, certified: true })
}

/// Best minimal-window span for a fixed value ordering: maximize `t` subject
/// to Lipschitz constraints, the ordering, and `t ≤ f_top - f_bot` for each
/// minimal window of mass ≥ alpha. The system is a set of difference
/// constraints, so feasibility for a given `t` is absence of a negative
/// cycle; the optimum is found by bisection on `[0, diam]`.
fn ordering_optimum(x: &FiniteMMSpace, sigma: &[usize], alpha: f64) -> (f64, Vec<f64>) {
    let n = x.n();
    let need = alpha - MASS_SLACK;
    let prefix: Vec<f64> = std::iter::once(0.0)
        .chain(sigma.iter().scan(0.0, |acc, &p| {
            *acc += x.weight(p);
            Some(*acc)
        }))
        .collect();
    // For each window end j, the largest start i keeping mass ≥ alpha.
    let mut windows: Vec<(usize, usize)> = Vec::new();
    let mut i = 0usize;
    for j in 0..n {
        if prefix[j + 1] - prefix[i] < need {
            continue;
        }
        while prefix[j + 1] - prefix[i + 1] >= need {
            i += 1;
        }
        windows.push((i, j));
    }
    debug_assert!(!windows.is_empty(), "alpha below total mass always yields windows");

    // Edges encode f_head - f_tail ≤ w as (tail, head, w).
    let mut fixed: Vec<(usize, usize, f64)> = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v {
                fixed.push((v, u, x.d(u, v)));
            }
        }
    }
    for k in 0..n - 1 {
        fixed.push((sigma[k + 1], sigma[k], 0.0));
    }
    let window_edges: Vec<(usize, usize)> = windows
        .iter()
        .map(|&(a, b)| (sigma[b], sigma[a]))
        .collect();

    let feasible = |t: f64| -> Option<Vec<f64>> {
        let mut dist = vec![0.0f64; n];
        for _ in 0..n {
            let mut changed = false;
            for &(tail, head, w) in &fixed {
                if dist[tail] + w < dist[head] - 1e-15 {
                    dist[head] = dist[tail] + w;
                    changed = true;
                }
            }
            for &(tail, head) in &window_edges {
                if dist[tail] - t < dist[head] - 1e-15 {
                    dist[head] = dist[tail] - t;
                    changed = true;
                }
            }
            if !changed {
                return Some(dist);
            }
        }
        // One more pass: any remaining relaxation means a negative cycle.
        for &(tail, head, w) in &fixed {
            if dist[tail] + w < dist[head] - 1e-15 {
                return None;
            }
        }
        for &(tail, head) in &window_edges {
            if dist[tail] - t < dist[head] - 1e-15 {
                return None;
            }
        }
        Some(dist)
    };

    let diam = x.diam();
    if let Some(pot) = feasible(diam) {
        return (diam, pot);
    }
    let mut lo = 0.0f64;
    let mut hi = diam;
    let mut pot = feasible(0.0).expect("t = 0 is satisfied by a constant function");
    while hi - lo > 1e-13 * diam.max(1.0) {
        let mid = 0.5 * (lo + hi);
        match feasible(mid) {
            Some(p) => {
                lo = mid;
                pot = p;
            }
            None => hi = mid,
        }
    }
    (lo, pot)
}

/// Certified lower bound on the observable diameter: evaluates the distance
/// functions `d(·, x)` (the Kuratowski coordinates) and `samples` random
/// 1-Lipschitz regularizations, and keeps the best partial diameter.
pub fn obs_diam_lower(
    x: &FiniteMMSpace,
    kappa: f64,
    samples: u32,
    seed: u64,
    tol: &Tolerances,
) -> Result<(f64, LipschitzVector), InvariantError> {
    if !(0.0 < kappa && kappa < 1.0) {
        return Err(InvariantError::InvalidParameter(format!("kappa {kappa}")));
    }
    let n = x.n();
    let alpha = 1.0 - kappa;
    let mut candidates: Vec<Vec<f64>> = (0..n)
        .map(|k| (0..n).map(|i| x.d(i, k)).collect())
        .collect();
    let diam = x.diam();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..=diam.max(1e-12))).collect();
        // Infimal convolution with the metric makes the sample 1-Lipschitz.
        let reg: Vec<f64> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| raw[j] + x.d(i, j))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        candidates.push(reg);
    }
    let mut best: Option<(f64, LipschitzVector)> = None;
    for values in candidates {
        let f = LipschitzVector::new(values, x, tol)?;
        let v = partial_diam_line(&f.push_measure(x, tol), alpha);
        if best.as_ref().map_or(true, |(bv, _)| v > *bv) {
            best = Some((v, f));
        }
    }
    Ok(best.expect("at least the distance-function candidates exist"))
}

/// `OD(X) = inf_{kappa > 0} max{OD(X; -kappa), kappa}`.
///
/// `OD(X; -kappa)` is a nonincreasing right-continuous step function of
/// kappa whose breakpoints are complements of subset masses, so scanning
/// those finitely many kappa values (plus one below the smallest) attains
/// the infimum exactly.
pub fn obs_diam_total(
    x: &FiniteMMSpace,
    budget: &SearchBudget,
    tol: &Tolerances,
) -> Result<(f64, bool), InvariantError> {
    let n = x.n();
    if n == 1 {
        return Ok((0.0, true));
    }
    let mut sums: Vec<f64> = vec![0.0];
    for &w in x.weights() {
        let mut next: Vec<f64> = sums.iter().map(|&s| s + w).collect();
        sums.append(&mut next);
        sums.sort_by(|a, b| a.partial_cmp(b).unwrap());
        sums.dedup_by(|a, b| (*a - *b).abs() <= MASS_SLACK);
    }
    let mut kappas: Vec<f64> = sums
        .iter()
        .map(|&s| 1.0 - s)
        .filter(|&k| k > MASS_SLACK && k < 1.0)
        .collect();
    kappas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut best = f64::INFINITY;
    let mut certified = true;
    // Below the first breakpoint OD is constant and kappa can be taken
    // arbitrarily small, so that interval contributes the OD value alone.
    let probe = kappas.first().map_or(0.5, |&k| k / 2.0);
    let od = obs_diam_exact(x, probe, budget, tol)?;
    certified &= od.certified;
    best = best.min(od.value);
    for &k in &kappas {
        let od = obs_diam_exact(x, k, budget, tol)?;
        certified &= od.certified;
        best = best.min(od.value.max(k));
    }
    Ok((best, certified))
}

/// Observable diameter of the virtual infinite-dimensional Gaussian space:
/// `2 λ I⁻¹((1-kappa)/2)` where `I` is the Gaussian half-CDF.
pub fn gaussian_obs_diam(lambda: f64, kappa: f64) -> Result<f64, InvariantError> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(InvariantError::InvalidParameter(format!("lambda {lambda}")));
    }
    if !(0.0 < kappa && kappa < 1.0) {
        return Err(InvariantError::InvalidParameter(format!("kappa {kappa}")));
    }
    Ok(lambda * gaussian_obs_diam_unit(kappa))
}

/// The λ = 1 value; `gaussian_obs_diam` is exactly linear in λ against this.
pub fn gaussian_obs_diam_unit(kappa: f64) -> f64 {
    2.0 * gaussian_half_cdf_inverse((1.0 - kappa) / 2.0)
}

/// Quantile-midpoint discretization of the centered Gaussian of standard
/// deviation λ into `m` equal-mass atoms on the line.
pub fn gaussian_quantile_measure(
    lambda: f64,
    m: usize,
    tol: &Tolerances,
) -> Result<RealMeasure, InvariantError> {
    if m == 0 {
        return Err(InvariantError::InvalidParameter("m = 0".into()));
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(InvariantError::InvalidParameter(format!("lambda {lambda}")));
    }
    let mass = 1.0 / m as f64;
    let atoms = (0..m)
        .map(|k| {
            let p = (k as f64 + 0.5) / m as f64;
            (lambda * gaussian_quantile(p), mass)
        })
        .collect();
    RealMeasure::new(atoms, tol)
}

/// Builds the line mm-space carried by a real measure (atoms as points,
/// absolute-difference metric); coincident atoms are merged by the quotient.
pub fn line_space_from_measure(
    nu: &RealMeasure,
    tol: &Tolerances,
) -> Result<FiniteMMSpace, InvariantError> {
    let n = nu.atoms.len();
    let labels = (0..n).map(|k| format!("x{k}")).collect();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            dist[i * n + j] = (nu.atoms[i].0 - nu.atoms[j].0).abs();
        }
    }
    let weight = nu.atoms.iter().map(|&(_, m)| m).collect();
    Ok(quotient_support_flat(labels, dist, weight, tol)?)
}

/// As [`gaussian_quantile_measure`], then realized as a line mm-space.
/// Validation is cubic in `m`, so this is meant for desk-scale `m`.
pub fn discretize_gaussian_1d(
    lambda: f64,
    m: usize,
    tol: &Tolerances,
) -> Result<FiniteMMSpace, InvariantError> {
    let nu = gaussian_quantile_measure(lambda, m, tol)?;
    line_space_from_measure(&nu, tol)
}

/// `∫_0^1 sin^{n-1} t dt / ∫_0^π sin^{n-1} t dt`: the mass an open unit ball
/// carries on the round n-sphere.
pub fn sphere_concentration_ratio(n: u32) -> Result<f64, InvariantError> {
    if n < 1 {
        return Err(InvariantError::InvalidParameter("sphere dimension 0".into()));
    }
    let p = (n - 1) as i32;
    let integrand = |t: f64| t.sin().powi(p);
    let numerator = adaptive_simpson(&integrand, 0.0, 1.0, QUAD_TOL);
    let denominator = adaptive_simpson(&integrand, 0.0, std::f64::consts::PI, QUAD_TOL);
    Ok(numerator / denominator)
}

/// Certified lower bound `1 - ratio(n)` on the box distance from the round
/// n-sphere to the one-point space.
pub fn sphere_box_lower(n: u32) -> Result<f64, InvariantError> {
    Ok(1.0 - sphere_concentration_ratio(n)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::validate_space;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn budget() -> SearchBudget {
        SearchBudget::default()
    }

    fn uniform_line(positions: &[f64]) -> FiniteMMSpace {
        let nu = RealMeasure::new(
            positions.iter().map(|&p| (p, 1.0 / positions.len() as f64)).collect(),
            &tol(),
        )
        .unwrap();
        line_space_from_measure(&nu, &tol()).unwrap()
    }

    fn uniform_measure(positions: &[f64]) -> RealMeasure {
        RealMeasure::new(
            positions.iter().map(|&p| (p, 1.0 / positions.len() as f64)).collect(),
            &tol(),
        )
        .unwrap()
    }

    #[test]
    fn partial_diam_line_examples() {
        let nu = uniform_measure(&[0.0, 1.0, 2.0]);
        // Sliding window: two adjacent atoms carry 2/3 ≥ 0.6.
        assert_eq!(partial_diam_line(&nu, 0.6), 1.0);
        assert_eq!(partial_diam_line(&nu, 0.0), 0.0);
        assert_eq!(partial_diam_line(&nu, 1.0), 2.0);
    }

    #[test]
    fn partial_diam_line_matches_subset_enumeration() {
        // Oracle: minimum span over all atom subsets with enough mass.
        let positions = [0.0, 0.3, 1.1, 2.0, 2.05];
        let masses = [0.1, 0.25, 0.3, 0.15, 0.2];
        let atoms: Vec<(f64, f64)> = positions.iter().cloned().zip(masses).collect();
        let nu = RealMeasure::new(atoms.clone(), &tol()).unwrap();
        for alpha in [0.2, 0.35, 0.5, 0.75, 0.9] {
            let mut oracle = f64::INFINITY;
            for mask in 1u32..(1 << atoms.len()) {
                let picked: Vec<(f64, f64)> = (0..atoms.len())
                    .filter(|&i| mask >> i & 1 == 1)
                    .map(|i| atoms[i])
                    .collect();
                let mass: f64 = picked.iter().map(|&(_, m)| m).sum();
                if mass >= alpha {
                    let lo = picked.iter().map(|&(p, _)| p).fold(f64::INFINITY, f64::min);
                    let hi = picked.iter().map(|&(p, _)| p).fold(f64::NEG_INFINITY, f64::max);
                    oracle = oracle.min(hi - lo);
                }
            }
            assert!((partial_diam_line(&nu, alpha) - oracle).abs() < 1e-12, "alpha {alpha}");
        }
    }

    #[test]
    fn partial_diam_space_examples() {
        let x = uniform_line(&[0.0, 1.0, 2.0]);
        assert_eq!(partial_diam_space(&x, 0.2, &budget()).unwrap(), 0.0);
        assert_eq!(partial_diam_space(&x, 0.5, &budget()).unwrap(), 1.0);
        let y = validate_space(
            vec!["a".into(), "b".into()],
            vec![vec![0.0, 2.0], vec![2.0, 0.0]],
            vec![0.5, 0.5],
            &tol(),
        )
        .unwrap();
        assert_eq!(partial_diam_space(&y, 0.6, &budget()).unwrap(), 2.0);
    }

    #[test]
    fn obs_diam_two_point_space() {
        let x = validate_space(
            vec!["a".into(), "b".into()],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![0.5, 0.5],
            &tol(),
        )
        .unwrap();
        let od = obs_diam_exact(&x, 0.4, &budget(), &tol()).unwrap();
        assert!((od.value - 1.0).abs() < 1e-9);
        assert!(od.certified);
        // kappa past the heavier atom's complement collapses to zero.
        let od = obs_diam_exact(&x, 0.6, &budget(), &tol()).unwrap();
        assert_eq!(od.value, 0.0);
    }

    #[test]
    fn obs_diam_three_point_line() {
        let x = uniform_line(&[0.0, 1.0, 2.0]);
        let od = obs_diam_exact(&x, 0.3, &budget(), &tol()).unwrap();
        assert!((od.value - 2.0).abs() < 1e-9);
        // The witness attains the value.
        let attained = partial_diam_line(&od.witness.push_measure(&x, &tol()), 0.7);
        assert!(attained >= od.value - 1e-9);
    }

    #[test]
    fn obs_diam_lower_is_below_exact() {
        let x = uniform_line(&[0.0, 0.4, 1.0, 2.2]);
        for kappa in [0.2, 0.35, 0.5] {
            let exact = obs_diam_exact(&x, kappa, &budget(), &tol()).unwrap();
            let (lower, _) = obs_diam_lower(&x, kappa, 32, OBS_LOWER_SEED, &tol()).unwrap();
            assert!(lower <= exact.value + 1e-9);
        }
    }

    #[test]
    fn obs_diam_total_two_point_examples() {
        let wide = validate_space(
            vec!["a".into(), "b".into()],
            vec![vec![0.0, 2.0], vec![2.0, 0.0]],
            vec![0.5, 0.5],
            &tol(),
        )
        .unwrap();
        let (v, certified) = obs_diam_total(&wide, &budget(), &tol()).unwrap();
        assert!(certified);
        assert!((v - 0.5).abs() < 1e-9);

        let narrow = validate_space(
            vec!["a".into(), "b".into()],
            vec![vec![0.0, 0.2], vec![0.2, 0.0]],
            vec![0.5, 0.5],
            &tol(),
        )
        .unwrap();
        let (v, _) = obs_diam_total(&narrow, &budget(), &tol()).unwrap();
        assert!((v - 0.2).abs() < 1e-9);

        let star = FiniteMMSpace::point("p");
        assert_eq!(obs_diam_total(&star, &budget(), &tol()).unwrap().0, 0.0);
    }

    #[test]
    fn gaussian_formula_examples() {
        // I⁻¹(0.25) = 0.674489750196082, the normal quartile.
        let v = gaussian_obs_diam(1.0, 0.5).unwrap();
        assert!((v - 2.0 * 0.674489750196082).abs() < 1e-7);
        let doubled = gaussian_obs_diam(2.0, 0.5).unwrap();
        assert_eq!(doubled, 2.0 * v);
        assert!(gaussian_obs_diam(1.0, 0.999999).unwrap() < 1e-4);
    }

    #[test]
    fn gaussian_discretization_degenerate_cases() {
        let star = discretize_gaussian_1d(1.0, 1, &tol()).unwrap();
        assert!(star.is_point());
        let star = discretize_gaussian_1d(0.0, 5, &tol()).unwrap();
        assert!(star.is_point());
    }

    #[test]
    fn sphere_ratio_examples() {
        let r1 = sphere_concentration_ratio(1).unwrap();
        assert!((r1 - 1.0 / std::f64::consts::PI).abs() < 1e-9);
        // Closed antiderivative (t - sin t cos t)/2 for n = 3.
        let oracle = {
            let prim = |t: f64| (t - t.sin() * t.cos()) / 2.0;
            prim(1.0) / prim(std::f64::consts::PI)
        };
        let r3 = sphere_concentration_ratio(3).unwrap();
        assert!((r3 - oracle).abs() < 1e-9);
        assert!((sphere_box_lower(3).unwrap() - (1.0 - oracle)).abs() < 1e-12);
    }
}
