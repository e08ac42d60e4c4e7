//! The two fundamental relations between finite mm-spaces: mm-isomorphism
//! and the Lipschitz order. Both are decided by exact backtracking with
//! multiset pruning; ties break lexicographically by point index so results
//! are deterministic.

use crate::config::Tolerances;
use crate::space::{FiniteMMSpace, PointMap, SpaceError};

/// Searches for a weight-preserving bijection `f` with
/// `|d_X(x, x') - d_Y(f x, f x')| ≤ tol.metric` for all pairs.
///
/// Returns the lexicographically first such bijection (as a vector of target
/// indices), or `None`; absence is a valid answer, not an error.
pub fn mm_isomorphic(
    x: &FiniteMMSpace,
    y: &FiniteMMSpace,
    tol: &Tolerances,
) -> Option<Vec<usize>> {
    let n = x.n();
    if y.n() != n {
        return None;
    }
    if !multisets_match(x.weights(), y.weights(), tol.mass) {
        return None;
    }
    let all_x: Vec<f64> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .map(|(i, j)| x.d(i, j))
        .collect();
    let all_y: Vec<f64> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .map(|(i, j)| y.d(i, j))
        .collect();
    if !multisets_match(&all_x, &all_y, tol.metric) {
        return None;
    }

    // Per-point signature: weight plus the sorted distance row.
    let sig = |s: &FiniteMMSpace, i: usize| -> (f64, Vec<f64>) {
        let mut row: Vec<f64> = (0..s.n()).map(|j| s.d(i, j)).collect();
        row.sort_by(|a, b| a.partial_cmp(b).unwrap());
        (s.weight(i), row)
    };
    let sig_x: Vec<_> = (0..n).map(|i| sig(x, i)).collect();
    let sig_y: Vec<_> = (0..n).map(|i| sig(y, i)).collect();
    let mut candidates: Vec<Vec<usize>> = Vec::with_capacity(n);
    for sx in &sig_x {
        let cs: Vec<usize> = (0..n)
            .filter(|&j| {
                (sx.0 - sig_y[j].0).abs() <= tol.mass
                    && sx.1
                        .iter()
                        .zip(&sig_y[j].1)
                        .all(|(a, b)| (a - b).abs() <= tol.metric)
            })
            .collect();
        if cs.is_empty() {
            return None;
        }
        candidates.push(cs);
    }

    let mut assigned = vec![usize::MAX; n];
    let mut used = vec![false; n];
    if assign_iso(x, y, tol, &candidates, 0, &mut assigned, &mut used) {
        Some(assigned)
    } else {
        None
    }
}

fn assign_iso(
    x: &FiniteMMSpace,
    y: &FiniteMMSpace,
    tol: &Tolerances,
    candidates: &[Vec<usize>],
    i: usize,
    assigned: &mut Vec<usize>,
    used: &mut Vec<bool>,
) -> bool {
    if i == x.n() {
        return true;
    }
    for &j in &candidates[i] {
        if used[j] {
            continue;
        }
        let consistent = (0..i).all(|k| {
            (x.d(i, k) - y.d(j, assigned[k])).abs() <= tol.metric
        });
        if !consistent {
            continue;
        }
        assigned[i] = j;
        used[j] = true;
        if assign_iso(x, y, tol, candidates, i + 1, assigned, used) {
            return true;
        }
        used[j] = false;
        assigned[i] = usize::MAX;
    }
    false
}

fn multisets_match(a: &[f64], b: &[f64], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|p, q| p.partial_cmp(q).unwrap());
    b.sort_by(|p, q| p.partial_cmp(q).unwrap());
    a.iter().zip(&b).all(|(p, q)| (p - q).abs() <= tol)
}

/// Decides the Lipschitz order `Y ≺ X`: searches for a 1-Lipschitz map
/// `f: X → Y` with `f_* μ_X = μ_Y` (fibers within `tol.mass`).
///
/// Exhaustive backtracking over assignments with Lipschitz and fiber-mass
/// pruning; the worst case explores `|Y|^|X|` assignments, so the search
/// refuses upfront when that exceeds `node_budget`.
pub fn dominates(
    x: &FiniteMMSpace,
    y: &FiniteMMSpace,
    tol: &Tolerances,
    node_budget: u64,
) -> Result<Option<PointMap>, SpaceError> {
    let (nx, ny) = (x.n(), y.n());
    if (ny as f64).powi(nx as i32) > node_budget as f64 {
        return Err(SpaceError::SearchBudgetExceeded(format!(
            "{ny}^{nx} assignments exceed the node budget {node_budget}"
        )));
    }
    let mut assignment = vec![0usize; nx];
    let mut fiber = vec![0.0f64; ny];
    let remaining: f64 = x.weights().iter().sum();
    if assign_dom(x, y, tol, 0, remaining, &mut assignment, &mut fiber) {
        Ok(Some(PointMap::new(x.clone(), y.clone(), assignment)?))
    } else {
        Ok(None)
    }
}

fn assign_dom(
    x: &FiniteMMSpace,
    y: &FiniteMMSpace,
    tol: &Tolerances,
    i: usize,
    remaining: f64,
    assignment: &mut Vec<usize>,
    fiber: &mut Vec<f64>,
) -> bool {
    if i == x.n() {
        return fiber
            .iter()
            .zip(y.weights())
            .all(|(&f, &w)| (f - w).abs() <= tol.mass);
    }
    // The mass still to place must cover every fiber deficit.
    let deficit: f64 = fiber
        .iter()
        .zip(y.weights())
        .map(|(&f, &w)| (w - f).max(0.0))
        .sum();
    if deficit > remaining + tol.mass {
        return false;
    }
    let wi = x.weight(i);
    for j in 0..y.n() {
        if fiber[j] + wi > y.weight(j) + tol.mass {
            continue;
        }
        let lipschitz = (0..i).all(|k| y.d(j, assignment[k]) <= x.d(i, k) + tol.metric);
        if !lipschitz {
            continue;
        }
        assignment[i] = j;
        fiber[j] += wi;
        if assign_dom(x, y, tol, i + 1, remaining - wi, assignment, fiber) {
            return true;
        }
        fiber[j] -= wi;
    }
    false
}
