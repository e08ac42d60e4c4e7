//! Finite metric measure spaces: validation, quotienting, scaling.
//!
//! A [`FiniteMMSpace`] is a labeled point set with a symmetric distance
//! matrix and a fully supported probability weight vector. Every other
//! module computes on these; the constructors here are the only way to
//! build one, so downstream code can rely on the axioms holding.

use crate::config::Tolerances;
use thiserror::Error;

/// Violations of the metric-measure axioms, named after the first failed check.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum SpaceError {
    #[error("matrix is not square or weight length does not match ({0})")]
    ShapeMismatch(String),
    #[error("non-finite entry at ({i}, {j})")]
    NonFiniteEntry { i: usize, j: usize },
    #[error("negative distance {value} at ({i}, {j})")]
    NegativeDistance { i: usize, j: usize, value: f64 },
    #[error("diagonal entry {value} at index {i} is not zero")]
    NonzeroDiagonal { i: usize, value: f64 },
    #[error("matrix asymmetric at ({i}, {j}): {a} vs {b}")]
    AsymmetricMatrix { i: usize, j: usize, a: f64, b: f64 },
    #[error("triangle inequality violated: d({i},{k}) > d({i},{j}) + d({j},{k})")]
    TriangleViolation { i: usize, j: usize, k: usize },
    #[error("weights are not a strictly positive probability vector ({0})")]
    NonProbabilityWeights(String),
    #[error("distinct points {i} and {j} at distance zero (quotient_support merges these)")]
    ZeroDistanceDistinctPoints { i: usize, j: usize },
    #[error("points {i} and {j} are at distance zero but d({i},{k}) != d({j},{k})")]
    InconsistentCluster { i: usize, j: usize, k: usize },
    #[error("negative scale factor {0}")]
    NegativeScale(f64),
    #[error("search budget exceeded: {0}")]
    SearchBudgetExceeded(String),
}

/// A finite mm-space: labels, symmetric distance matrix, full-support
/// probability weights. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMMSpace {
    labels: Vec<String>,
    /// Row-major n×n distances.
    dist: Vec<f64>,
    weight: Vec<f64>,
}

impl FiniteMMSpace {
    /// The one-point space with trivial metric and Dirac measure.
    pub fn point(label: impl Into<String>) -> Self {
        Self {
            labels: vec![label.into()],
            dist: vec![0.0],
            weight: vec![1.0],
        }
    }

    pub fn n(&self) -> usize {
        self.weight.len()
    }

    pub fn is_point(&self) -> bool {
        self.n() == 1
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n() + j]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weight[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weight
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    /// Largest distance in the space; 0 for the one-point space.
    pub fn diam(&self) -> f64 {
        self.dist.iter().cloned().fold(0.0, f64::max)
    }

    /// Smallest strictly positive distance; `None` for the one-point space.
    pub fn min_positive_distance(&self) -> Option<f64> {
        let n = self.n();
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                best = best.min(self.d(i, j));
            }
        }
        if best.is_finite() {
            Some(best)
        } else {
            None
        }
    }

    /// Distance matrix as nested rows (for serialization).
    pub fn dist_rows(&self) -> Vec<Vec<f64>> {
        let n = self.n();
        (0..n).map(|i| (0..n).map(|j| self.d(i, j)).collect()).collect()
    }

    /// Internal constructor from a flat row-major matrix; runs full validation.
    pub(crate) fn from_flat(
        labels: Vec<String>,
        dist: Vec<f64>,
        weight: Vec<f64>,
        tol: &Tolerances,
    ) -> Result<Self, SpaceError> {
        let space = Self { labels, dist, weight };
        space.check_axioms(tol)?;
        Ok(space)
    }

    fn check_axioms(&self, tol: &Tolerances) -> Result<(), SpaceError> {
        let n = self.weight.len();
        if n == 0 {
            return Err(SpaceError::ShapeMismatch("empty space".into()));
        }
        if self.labels.len() != n {
            return Err(SpaceError::ShapeMismatch(format!(
                "{} labels for {} points",
                self.labels.len(),
                n
            )));
        }
        if self.dist.len() != n * n {
            return Err(SpaceError::ShapeMismatch(format!(
                "matrix has {} entries, expected {}",
                self.dist.len(),
                n * n
            )));
        }
        for i in 0..n {
            for j in 0..n {
                let v = self.d(i, j);
                if !v.is_finite() {
                    return Err(SpaceError::NonFiniteEntry { i, j });
                }
                if v < 0.0 {
                    return Err(SpaceError::NegativeDistance { i, j, value: v });
                }
            }
        }
        for i in 0..n {
            let v = self.d(i, i);
            if v.abs() > tol.metric {
                return Err(SpaceError::NonzeroDiagonal { i, value: v });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (self.d(i, j), self.d(j, i));
                if (a - b).abs() > tol.metric {
                    return Err(SpaceError::AsymmetricMatrix { i, j, a, b });
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if self.d(i, j) <= tol.metric {
                    return Err(SpaceError::ZeroDistanceDistinctPoints { i, j });
                }
            }
        }
        check_triangle(n, |i, j| self.d(i, j), tol)?;
        let mut sum = 0.0;
        for (i, &w) in self.weight.iter().enumerate() {
            if !w.is_finite() || w <= 0.0 || w > 1.0 + tol.mass {
                return Err(SpaceError::NonProbabilityWeights(format!(
                    "weight {w} at index {i}"
                )));
            }
            sum += w;
        }
        if (sum - 1.0).abs() > tol.mass {
            return Err(SpaceError::NonProbabilityWeights(format!("sum {sum}")));
        }
        Ok(())
    }
}

fn check_triangle(
    n: usize,
    d: impl Fn(usize, usize) -> f64,
    tol: &Tolerances,
) -> Result<(), SpaceError> {
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if d(i, k) > d(i, j) + d(j, k) + tol.metric {
                    return Err(SpaceError::TriangleViolation { i, j, k });
                }
            }
        }
    }
    Ok(())
}

fn flatten(rows: &[Vec<f64>]) -> Result<Vec<f64>, SpaceError> {
    let n = rows.len();
    let mut flat = Vec::with_capacity(n * n);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(SpaceError::ShapeMismatch(format!(
                "row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        flat.extend_from_slice(row);
    }
    Ok(flat)
}

/// Validates raw labels, distance rows, and weights into a [`FiniteMMSpace`],
/// or reports the first violated axiom. Distinct points at distance zero are
/// rejected here; use [`quotient_support`] to merge them.
pub fn validate_space(
    labels: Vec<String>,
    dist: Vec<Vec<f64>>,
    weight: Vec<f64>,
    tol: &Tolerances,
) -> Result<FiniteMMSpace, SpaceError> {
    let flat = flatten(&dist)?;
    FiniteMMSpace::from_flat(labels, flat, weight, tol)
}

/// Restricts raw data to the support of its measure: zero-weight points are
/// dropped and clusters of points at distance zero are merged, summing
/// weights. The merged point inherits the first label of its cluster.
pub fn quotient_support(
    labels: Vec<String>,
    dist: Vec<Vec<f64>>,
    weight: Vec<f64>,
    tol: &Tolerances,
) -> Result<FiniteMMSpace, SpaceError> {
    let flat = flatten(&dist)?;
    quotient_support_flat(labels, flat, weight, tol)
}

pub(crate) fn quotient_support_flat(
    labels: Vec<String>,
    dist: Vec<f64>,
    weight: Vec<f64>,
    tol: &Tolerances,
) -> Result<FiniteMMSpace, SpaceError> {
    quotient_with_map(labels, dist, weight, tol).map(|(space, _)| space)
}

/// As [`quotient_support`], also returning for each input index the index of
/// its class in the quotient (`None` for dropped null points).
pub(crate) fn quotient_with_map(
    labels: Vec<String>,
    dist: Vec<f64>,
    weight: Vec<f64>,
    tol: &Tolerances,
) -> Result<(FiniteMMSpace, Vec<Option<usize>>), SpaceError> {
    let n = weight.len();
    if n == 0 || labels.len() != n || dist.len() != n * n {
        return Err(SpaceError::ShapeMismatch(format!(
            "{} labels, {} weights, {} matrix entries",
            labels.len(),
            n,
            dist.len()
        )));
    }
    let d = |i: usize, j: usize| dist[i * n + j];
    for i in 0..n {
        for j in 0..n {
            if !d(i, j).is_finite() {
                return Err(SpaceError::NonFiniteEntry { i, j });
            }
            if d(i, j) < 0.0 {
                return Err(SpaceError::NegativeDistance { i, j, value: d(i, j) });
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (d(i, j) - d(j, i)).abs() > tol.metric {
                return Err(SpaceError::AsymmetricMatrix { i, j, a: d(i, j), b: d(j, i) });
            }
        }
    }
    let mut sum = 0.0;
    for (i, &w) in weight.iter().enumerate() {
        if !w.is_finite() || w < -tol.mass {
            return Err(SpaceError::NonProbabilityWeights(format!(
                "weight {w} at index {i}"
            )));
        }
        sum += w;
    }
    if (sum - 1.0).abs() > tol.mass {
        return Err(SpaceError::NonProbabilityWeights(format!("sum {sum}")));
    }

    let alive: Vec<usize> = (0..n).filter(|&i| weight[i] > 0.0).collect();

    // Union-find over points within metric tolerance of each other.
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    for (ai, &i) in alive.iter().enumerate() {
        for &j in &alive[ai + 1..] {
            if d(i, j) <= tol.metric {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }

    // Merged points must agree on distances to everything else.
    for (ai, &i) in alive.iter().enumerate() {
        for &j in &alive[ai + 1..] {
            if find(&mut parent, i) == find(&mut parent, j) {
                for &k in &alive {
                    if (d(i, k) - d(j, k)).abs() > 8.0 * tol.metric {
                        return Err(SpaceError::InconsistentCluster { i, j, k });
                    }
                }
            }
        }
    }

    let mut reps: Vec<usize> = alive
        .iter()
        .cloned()
        .filter(|&i| find(&mut parent, i) == i)
        .collect();
    reps.sort_unstable();

    let m = reps.len();
    let mut q_labels = Vec::with_capacity(m);
    let mut q_weight = vec![0.0; m];
    let mut q_dist = vec![0.0; m * m];
    for (a, &ra) in reps.iter().enumerate() {
        q_labels.push(labels[ra].clone());
        for (b, &rb) in reps.iter().enumerate() {
            q_dist[a * m + b] = if a == b { 0.0 } else { d(ra, rb) };
        }
    }
    let mut map: Vec<Option<usize>> = vec![None; n];
    for &i in &alive {
        let root = find(&mut parent, i);
        let a = reps.binary_search(&root).expect("root is a representative");
        q_weight[a] += weight[i];
        map[i] = Some(a);
    }

    let space = FiniteMMSpace::from_flat(q_labels, q_dist, q_weight, tol)?;
    Ok((space, map))
}

/// Multiplies every distance by `t ≥ 0`. `t = 0` yields the one-point space
/// exactly (keeping the first label).
pub fn scale(space: &FiniteMMSpace, t: f64, tol: &Tolerances) -> Result<FiniteMMSpace, SpaceError> {
    if !t.is_finite() || t < 0.0 {
        return Err(SpaceError::NegativeScale(t));
    }
    if t == 0.0 {
        return Ok(FiniteMMSpace::point(space.label(0)));
    }
    let dist = space.dist.iter().map(|&v| v * t).collect();
    FiniteMMSpace::from_flat(space.labels.clone(), dist, space.weight.clone(), tol)
}

/// Largest distance; alias so call sites read like the math.
pub fn diam(space: &FiniteMMSpace) -> f64 {
    space.diam()
}

/// A map between spaces given by a per-point assignment of target indices.
#[derive(Debug, Clone)]
pub struct PointMap {
    pub source: FiniteMMSpace,
    pub target: FiniteMMSpace,
    /// `assignment[i]` is the target index of source point `i`.
    pub assignment: Vec<usize>,
}

impl PointMap {
    pub fn new(
        source: FiniteMMSpace,
        target: FiniteMMSpace,
        assignment: Vec<usize>,
    ) -> Result<Self, SpaceError> {
        if assignment.len() != source.n() {
            return Err(SpaceError::ShapeMismatch(format!(
                "assignment length {} for {} source points",
                assignment.len(),
                source.n()
            )));
        }
        if let Some(&bad) = assignment.iter().find(|&&j| j >= target.n()) {
            return Err(SpaceError::ShapeMismatch(format!(
                "assignment index {bad} out of range for {} target points",
                target.n()
            )));
        }
        Ok(Self { source, target, assignment })
    }

    /// Push-forward of the source weights: sums over fibers.
    pub fn push_forward(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.target.n()];
        for (i, &j) in self.assignment.iter().enumerate() {
            out[j] += self.source.weight(i);
        }
        out
    }

    /// True when the map is 1-Lipschitz and measure-preserving within `tol`.
    pub fn is_lipschitz_measure_preserving(&self, tol: &Tolerances) -> bool {
        let n = self.source.n();
        for i in 0..n {
            for k in (i + 1)..n {
                let dy = self.target.d(self.assignment[i], self.assignment[k]);
                if dy > self.source.d(i, k) + tol.metric {
                    return false;
                }
            }
        }
        let fibers = self.push_forward();
        fibers
            .iter()
            .zip(self.target.weights())
            .all(|(&f, &w)| (f - w).abs() <= tol.mass)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn labels(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn one_point_space_is_valid() {
        let x = validate_space(labels(&["p"]), vec![vec![0.0]], vec![1.0], &tol()).unwrap();
        assert_eq!(x.n(), 1);
        assert_eq!(x.diam(), 0.0);
    }

    #[test]
    fn two_point_space_is_valid() {
        let x = validate_space(
            labels(&["a", "b"]),
            vec![vec![0.0, 2.0], vec![2.0, 0.0]],
            vec![0.5, 0.5],
            &tol(),
        )
        .unwrap();
        assert_eq!(x.diam(), 2.0);
        assert_eq!(x.min_positive_distance(), Some(2.0));
    }

    #[test]
    fn triangle_violation_is_reported() {
        let err = validate_space(
            labels(&["a", "b", "c"]),
            vec![
                vec![0.0, 1.0, 3.0],
                vec![1.0, 0.0, 1.0],
                vec![3.0, 1.0, 0.0],
            ],
            vec![0.25, 0.25, 0.5],
            &tol(),
        )
        .unwrap_err();
        assert!(matches!(err, SpaceError::TriangleViolation { .. }));
    }

    #[test]
    fn zero_distance_distinct_points_rejected() {
        let err = validate_space(
            labels(&["a", "b"]),
            vec![vec![0.0, 0.0], vec![0.0, 0.0]],
            vec![0.5, 0.5],
            &tol(),
        )
        .unwrap_err();
        assert!(matches!(err, SpaceError::ZeroDistanceDistinctPoints { .. }));
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        let err = validate_space(
            labels(&["a", "b"]),
            vec![vec![0.0, 1.0], vec![2.0, 0.0]],
            vec![0.5, 0.5],
            &tol(),
        )
        .unwrap_err();
        assert!(matches!(err, SpaceError::AsymmetricMatrix { .. }));
    }

    #[test]
    fn bad_weights_rejected() {
        let err = validate_space(
            labels(&["a", "b"]),
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![0.7, 0.7],
            &tol(),
        )
        .unwrap_err();
        assert!(matches!(err, SpaceError::NonProbabilityWeights(_)));
    }

    #[test]
    fn quotient_merges_zero_distance_pair() {
        let x = quotient_support(
            labels(&["a", "b"]),
            vec![vec![0.0, 0.0], vec![0.0, 0.0]],
            vec![0.3, 0.7],
            &tol(),
        )
        .unwrap();
        assert_eq!(x.n(), 1);
        assert_eq!(x.weight(0), 1.0);
        assert_eq!(x.label(0), "a");
    }

    #[test]
    fn quotient_drops_null_point() {
        let x = quotient_support(
            labels(&["a", "b"]),
            vec![vec![0.0, 5.0], vec![5.0, 0.0]],
            vec![1.0, 0.0],
            &tol(),
        )
        .unwrap();
        assert_eq!(x.n(), 1);
        assert_eq!(x.label(0), "a");
    }

    #[test]
    fn quotient_merges_cluster_and_sums_weights() {
        // d(a,b)=0, both at distance 1 from c.
        let x = quotient_support(
            labels(&["a", "b", "c"]),
            vec![
                vec![0.0, 0.0, 1.0],
                vec![0.0, 0.0, 1.0],
                vec![1.0, 1.0, 0.0],
            ],
            vec![0.2, 0.3, 0.5],
            &tol(),
        )
        .unwrap();
        assert_eq!(x.n(), 2);
        assert_eq!(x.weights(), &[0.5, 0.5]);
        assert_eq!(x.d(0, 1), 1.0);
        assert_eq!(x.labels(), &["a".to_string(), "c".to_string()]);
    }

    #[test]
    fn quotient_detects_inconsistent_cluster() {
        let err = quotient_support(
            labels(&["a", "b", "c"]),
            vec![
                vec![0.0, 0.0, 1.0],
                vec![0.0, 0.0, 5.0],
                vec![1.0, 5.0, 0.0],
            ],
            vec![0.25, 0.25, 0.5],
            &tol(),
        )
        .unwrap_err();
        assert!(matches!(err, SpaceError::InconsistentCluster { .. }));
    }

    #[test]
    fn quotient_is_idempotent() {
        let rows = vec![
            vec![0.0, 0.0, 1.0],
            vec![0.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
        ];
        let x = quotient_support(labels(&["a", "b", "c"]), rows, vec![0.2, 0.3, 0.5], &tol())
            .unwrap();
        let y = quotient_support(
            x.labels().to_vec(),
            x.dist_rows(),
            x.weights().to_vec(),
            &tol(),
        )
        .unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn scale_identity_and_zero() {
        let x = validate_space(
            labels(&["a", "b"]),
            vec![vec![0.0, 2.0], vec![2.0, 0.0]],
            vec![0.5, 0.5],
            &tol(),
        )
        .unwrap();
        assert_eq!(scale(&x, 1.0, &tol()).unwrap(), x);
        let star = scale(&x, 0.0, &tol()).unwrap();
        assert!(star.is_point());
        assert_eq!(star.label(0), "a");
        assert!(matches!(
            scale(&x, -0.5, &tol()),
            Err(SpaceError::NegativeScale(_))
        ));
    }

    #[test]
    fn point_map_push_forward_sums_fibers() {
        let x = validate_space(
            labels(&["a", "b", "c"]),
            vec![
                vec![0.0, 1.0, 2.0],
                vec![1.0, 0.0, 1.0],
                vec![2.0, 1.0, 0.0],
            ],
            vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
            &tol(),
        )
        .unwrap();
        let y = validate_space(
            labels(&["u", "v"]),
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![2.0 / 3.0, 1.0 / 3.0],
            &tol(),
        )
        .unwrap();
        let f = PointMap::new(x, y, vec![0, 0, 1]).unwrap();
        let pf = f.push_forward();
        assert!((pf[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((pf[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!(f.is_lipschitz_measure_preserving(&Tolerances::default()));
    }
}
