//! Couplings, subtransport plans, and the two measure-level metrics:
//! Prokhorov (via its subtransport characterization) and Ky Fan.

use crate::config::{Tolerances, MASS_SLACK};
use crate::flow::max_flow_on_cells;
use crate::space::FiniteMMSpace;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum TransportError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid measure: {0}")]
    BadMeasure(String),
    #[error("coupling violates its marginals: {0}")]
    BadCoupling(String),
}

/// A nonnegative mass matrix with prescribed row and column marginals.
///
/// For a full coupling the row and column sums equal the marginals; a
/// subtransport plan only requires them to stay below. The deficiency of a
/// plan is one minus its total mass.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    matrix: Vec<f64>,
    row_marginal: Vec<f64>,
    col_marginal: Vec<f64>,
}

impl Coupling {
    /// Builds a subtransport plan: row/column sums may fall short of the
    /// marginals but must not exceed them beyond `tol.mass`.
    pub fn new_sub(
        matrix: Vec<Vec<f64>>,
        row_marginal: Vec<f64>,
        col_marginal: Vec<f64>,
        tol: &Tolerances,
    ) -> Result<Self, TransportError> {
        let c = Self::from_rows(matrix, row_marginal, col_marginal)?;
        c.check_sub(tol)?;
        Ok(c)
    }

    /// Builds a full coupling: row/column sums must match the marginals
    /// within `tol.mass`.
    pub fn new_full(
        matrix: Vec<Vec<f64>>,
        row_marginal: Vec<f64>,
        col_marginal: Vec<f64>,
        tol: &Tolerances,
    ) -> Result<Self, TransportError> {
        let c = Self::from_rows(matrix, row_marginal, col_marginal)?;
        c.check_sub(tol)?;
        if !c.is_full(tol) {
            return Err(TransportError::BadCoupling(
                "row or column sums fall short of the marginals".into(),
            ));
        }
        Ok(c)
    }

    fn from_rows(
        matrix: Vec<Vec<f64>>,
        row_marginal: Vec<f64>,
        col_marginal: Vec<f64>,
    ) -> Result<Self, TransportError> {
        let (m, n) = (row_marginal.len(), col_marginal.len());
        if matrix.len() != m {
            return Err(TransportError::ShapeMismatch(format!(
                "{} rows for {m} row marginals",
                matrix.len()
            )));
        }
        let mut flat = Vec::with_capacity(m * n);
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != n {
                return Err(TransportError::ShapeMismatch(format!(
                    "row {i} has {} entries for {n} column marginals",
                    row.len()
                )));
            }
            for &v in row {
                if !v.is_finite() || v < 0.0 {
                    return Err(TransportError::BadCoupling(format!("entry {v} in row {i}")));
                }
                flat.push(v);
            }
        }
        Ok(Self { matrix: flat, row_marginal, col_marginal })
    }

    pub(crate) fn from_cells(
        m: usize,
        n: usize,
        cells: &[(usize, usize)],
        flows: &[f64],
        row_marginal: Vec<f64>,
        col_marginal: Vec<f64>,
    ) -> Self {
        let mut matrix = vec![0.0; m * n];
        for (&(i, j), &f) in cells.iter().zip(flows) {
            matrix[i * n + j] += f;
        }
        Self { matrix, row_marginal, col_marginal }
    }

    fn check_sub(&self, tol: &Tolerances) -> Result<(), TransportError> {
        for (i, (&s, &w)) in self.row_sums().iter().zip(&self.row_marginal).enumerate() {
            if s > w + tol.mass {
                return Err(TransportError::BadCoupling(format!(
                    "row {i} carries {s} > marginal {w}"
                )));
            }
        }
        for (j, (&s, &w)) in self.col_sums().iter().zip(&self.col_marginal).enumerate() {
            if s > w + tol.mass {
                return Err(TransportError::BadCoupling(format!(
                    "column {j} carries {s} > marginal {w}"
                )));
            }
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.row_marginal.len()
    }

    pub fn n(&self) -> usize {
        self.col_marginal.len()
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.n() + j]
    }

    pub fn row_marginal(&self) -> &[f64] {
        &self.row_marginal
    }

    pub fn col_marginal(&self) -> &[f64] {
        &self.col_marginal
    }

    pub fn total_mass(&self) -> f64 {
        self.matrix.iter().sum()
    }

    /// `df π = 1 - π(X × Y)`.
    pub fn deficiency(&self) -> f64 {
        1.0 - self.total_mass()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let n = self.n();
        self.matrix.chunks(n).map(|row| row.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let n = self.n();
        let mut out = vec![0.0; n];
        for (k, &v) in self.matrix.iter().enumerate() {
            out[k % n] += v;
        }
        out
    }

    /// Mass the plan places on a set of cells.
    pub fn mass_on(&self, pairs: &[(usize, usize)]) -> f64 {
        pairs.iter().map(|&(i, j)| self.at(i, j)).sum()
    }

    pub fn is_full(&self, tol: &Tolerances) -> bool {
        self.row_sums()
            .iter()
            .zip(&self.row_marginal)
            .all(|(&s, &w)| (s - w).abs() <= tol.mass)
            && self
                .col_sums()
                .iter()
                .zip(&self.col_marginal)
                .all(|(&s, &w)| (s - w).abs() <= tol.mass)
    }

    /// Cells carrying strictly positive mass, in row-major order.
    pub fn support(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        (0..self.m())
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.at(i, j) > 0.0)
            .collect()
    }

    pub fn matrix_rows(&self) -> Vec<Vec<f64>> {
        self.matrix.chunks(self.n()).map(|r| r.to_vec()).collect()
    }
}

/// Two probability weight vectors over a common ambient metric space.
#[derive(Debug, Clone)]
pub struct MeasurePair {
    ambient: FiniteMMSpace,
    mu: Vec<f64>,
    nu: Vec<f64>,
}

impl MeasurePair {
    pub fn new(
        ambient: FiniteMMSpace,
        mu: Vec<f64>,
        nu: Vec<f64>,
        tol: &Tolerances,
    ) -> Result<Self, TransportError> {
        for (name, v) in [("mu", &mu), ("nu", &nu)] {
            if v.len() != ambient.n() {
                return Err(TransportError::ShapeMismatch(format!(
                    "{name} has {} entries for {} ambient points",
                    v.len(),
                    ambient.n()
                )));
            }
            let mut sum = 0.0;
            for &w in v.iter() {
                if !w.is_finite() || w < -tol.mass {
                    return Err(TransportError::BadMeasure(format!("{name} weight {w}")));
                }
                sum += w;
            }
            if (sum - 1.0).abs() > tol.mass {
                return Err(TransportError::BadMeasure(format!("{name} sums to {sum}")));
            }
        }
        Ok(Self { ambient, mu, nu })
    }

    pub fn ambient(&self) -> &FiniteMMSpace {
        &self.ambient
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    pub fn swapped(&self) -> Self {
        Self { ambient: self.ambient.clone(), mu: self.nu.clone(), nu: self.mu.clone() }
    }
}

/// Maximum total mass of a subtransport plan supported on
/// `{(x, y) : d(x, y) ≤ ε}`, with an optimal plan.
pub fn max_subtransport_mass(pair: &MeasurePair, eps: f64) -> (f64, Coupling) {
    let amb = &pair.ambient;
    let n = amb.n();
    let cells: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| amb.d(i, j) <= eps)
        .collect();
    let (mass, flows) = max_flow_on_cells(&pair.mu, &pair.nu, &cells);
    let plan = Coupling::from_cells(n, n, &cells, &flows, pair.mu.clone(), pair.nu.clone());
    (mass, plan)
}

/// Prokhorov distance between the two measures of a pair, computed by
/// scanning candidate thresholds `ε ∈ {0} ∪ {distance values}` and taking
/// the minimum of `max{ε, 1 - max_subtransport_mass(ε)}`.
///
/// The arguments are put in a canonical order first, so the result is
/// bit-exactly symmetric in (μ, ν).
pub fn prokhorov(pair: &MeasurePair) -> f64 {
    let canonical = if lex_le(&pair.mu, &pair.nu) { pair.clone() } else { pair.swapped() };
    let amb = &canonical.ambient;
    let n = amb.n();
    let mut candidates = vec![0.0];
    for i in 0..n {
        for j in (i + 1)..n {
            candidates.push(amb.d(i, j));
        }
    }
    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    candidates.dedup();

    let mut best = f64::INFINITY;
    for &eps in &candidates {
        if eps >= best {
            break;
        }
        let (mass, _) = max_subtransport_mass(&canonical, eps);
        // Deficiencies below the mass slack are flow summation dust.
        let df = if mass >= 1.0 - MASS_SLACK { 0.0 } else { 1.0 - mass };
        best = best.min(eps.max(df));
        if df == 0.0 {
            break;
        }
    }
    best
}

fn lex_le(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    true
}

/// Ky Fan distance between two maps into the ambient space, given by their
/// images `f`, `g` (ambient indices) over a finite base with `weights`.
///
/// Returns the smallest ε with `mass{x : d(f(x), g(x)) > ε} ≤ ε`. Candidates
/// are 0, the pointwise distances, and the tail masses (the infimum can be
/// attained where the tail-mass level crosses ε).
pub fn ky_fan(
    weights: &[f64],
    f: &[usize],
    g: &[usize],
    ambient: &FiniteMMSpace,
) -> Result<f64, TransportError> {
    if f.len() != weights.len() || g.len() != weights.len() {
        return Err(TransportError::ShapeMismatch(format!(
            "{} weights, {} f-images, {} g-images",
            weights.len(),
            f.len(),
            g.len()
        )));
    }
    if f.iter().chain(g).any(|&i| i >= ambient.n()) {
        return Err(TransportError::ShapeMismatch(
            "image index out of range for the ambient space".into(),
        ));
    }
    let dists: Vec<f64> = f
        .iter()
        .zip(g)
        .map(|(&a, &b)| ambient.d(a, b))
        .collect();
    let tail = |eps: f64| -> f64 {
        weights
            .iter()
            .zip(&dists)
            .filter(|(_, &d)| d > eps)
            .map(|(&w, _)| w)
            .sum()
    };
    let mut candidates = vec![0.0];
    candidates.extend_from_slice(&dists);
    let distance_levels: Vec<f64> = candidates.clone();
    for &c in &distance_levels {
        candidates.push(tail(c));
    }
    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    candidates.dedup();
    for &eps in &candidates {
        if tail(eps) <= eps {
            return Ok(eps);
        }
    }
    // mass{d > diam} = 0 ≤ diam, so the scan always terminates above.
    unreachable!("tail mass at the largest distance is zero");
}

/// Push-forward of `weights` along an index map into a space with
/// `target_len` points.
pub fn push_forward_measure(weights: &[f64], map: &[usize], target_len: usize) -> Vec<f64> {
    let mut out = vec![0.0; target_len];
    for (&w, &j) in weights.iter().zip(map) {
        out[j] += w;
    }
    out
}
