//! Explicit constructions in the space of mm-spaces: l_p products, metric
//! transforms, order-monotone interpolation, relation gluing, the Kuratowski
//! embedding, geodesic midpoints and dyadic geodesics, branching geodesic
//! families, and the equilateral discrete net.

use crate::boxdist::{
    box_exact, box_lower_functional, box_to_point, evaluate_pair, BoxBound, BoxError,
    BoxSolution, Relation,
};
use crate::config::{SearchBudget, Tolerances, SUPPORT_PRUNE};
use crate::space::{
    quotient_support_flat, quotient_with_map, scale, FiniteMMSpace, PointMap, SpaceError,
};
use crate::transport::Coupling;
use thiserror::Error;

/// Point-count cap for constructed spaces (products, midpoints, nets).
pub const DEFAULT_SIZE_CAP: usize = 10_000;

/// Slack allowed by the midpoint re-check over the ideal half distance.
pub const MIDPOINT_CHECK_TOL: f64 = 0.05;

#[derive(Debug, Clone, Error)]
pub enum ConstructError {
    #[error("constructed space would have {points} points (cap {cap})")]
    SizeOverflow { points: usize, cap: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("transform does not preserve the metric axioms: {0}")]
    MetricPreservationViolated(String),
    #[error("point map is not a 1-Lipschitz measure-preserving witness: {0}")]
    InvalidWitness(String),
    #[error("gluing constant {c} below the relation distortion {dis}")]
    RelationTooDistorted { c: f64, dis: f64 },
    #[error("midpoint re-check failed: distances ({d_left}, {d_right}) exceed {bound}")]
    MidpointCheckFailed { d_left: f64, d_right: f64, bound: f64 },
    #[error("search budget exceeded: {0}")]
    SearchBudgetExceeded(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Box(#[from] BoxError),
}

/// A nondecreasing metric-preserving function applied to distances.
#[derive(Debug, Clone, PartialEq)]
pub enum TransformSpec {
    /// `F(s) = t s`, `t ≥ 0`.
    Linear(f64),
    /// `F(s) = min{s, c}`, `c ≥ 0`.
    Truncate(f64),
    /// Concave piecewise-linear function through `(0, 0)` and the given
    /// breakpoints `(s, F(s))`, extended past the last one by its slope.
    ConcavePl(Vec<(f64, f64)>),
}

impl TransformSpec {
    /// The truncation family `F_t(s) = min{s, t/(1-t)}` for `t ∈ [0, 1]`,
    /// with `F_0 ≡ 0` and `F_1` the identity.
    pub fn retraction(t: f64) -> Result<Self, ConstructError> {
        if !(0.0..=1.0).contains(&t) {
            return Err(ConstructError::InvalidParameter(format!("retraction t {t}")));
        }
        if t == 1.0 {
            Ok(Self::Linear(1.0))
        } else {
            Ok(Self::Truncate(t / (1.0 - t)))
        }
    }

    pub fn validate(&self) -> Result<(), ConstructError> {
        match self {
            Self::Linear(t) => {
                if !(t.is_finite() && *t >= 0.0) {
                    return Err(ConstructError::MetricPreservationViolated(format!(
                        "linear factor {t}"
                    )));
                }
            }
            Self::Truncate(c) => {
                if !(c.is_finite() && *c >= 0.0) {
                    return Err(ConstructError::MetricPreservationViolated(format!(
                        "truncation level {c}"
                    )));
                }
            }
            Self::ConcavePl(points) => {
                if points.is_empty() {
                    return Err(ConstructError::MetricPreservationViolated(
                        "no breakpoints".into(),
                    ));
                }
                let mut prev = (0.0f64, 0.0f64);
                let mut prev_slope = f64::INFINITY;
                for &(x, y) in points {
                    if !(x.is_finite() && y.is_finite() && x > prev.0 && y >= prev.1) {
                        return Err(ConstructError::MetricPreservationViolated(format!(
                            "breakpoint ({x}, {y}) after ({}, {})",
                            prev.0, prev.1
                        )));
                    }
                    let slope = (y - prev.1) / (x - prev.0);
                    if slope > prev_slope + 1e-12 {
                        return Err(ConstructError::MetricPreservationViolated(format!(
                            "slope increases at breakpoint ({x}, {y})"
                        )));
                    }
                    prev_slope = slope;
                    prev = (x, y);
                }
            }
        }
        Ok(())
    }

    pub fn apply(&self, s: f64) -> f64 {
        match self {
            Self::Linear(t) => t * s,
            Self::Truncate(c) => s.min(*c),
            Self::ConcavePl(points) => {
                let mut prev = (0.0f64, 0.0f64);
                for &(x, y) in points {
                    if s <= x {
                        return prev.1 + (y - prev.1) * (s - prev.0) / (x - prev.0);
                    }
                    prev = (x, y);
                }
                let &(lx, ly) = points.last().expect("validated non-empty");
                let (px, py) = if points.len() >= 2 {
                    points[points.len() - 2]
                } else {
                    (0.0, 0.0)
                };
                ly + (ly - py) / (lx - px) * (s - lx)
            }
        }
    }
}

/// `F(X) = (X, F ∘ d_X, μ_X)`, quotiented when the transform collapses
/// distances to zero.
pub fn transform(
    x: &FiniteMMSpace,
    spec: &TransformSpec,
    tol: &Tolerances,
) -> Result<FiniteMMSpace, ConstructError> {
    spec.validate()?;
    let n = x.n();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                dist[i * n + j] = spec.apply(x.d(i, j));
            }
        }
    }
    quotient_support_flat(x.labels().to_vec(), dist, x.weights().to_vec(), tol)
        .map_err(|e| ConstructError::MetricPreservationViolated(e.to_string()))
}

/// The l_p product: point set X × Y, metric `(d_X^p + d_Y^p)^{1/p}`
/// (`max` for p = ∞), product measure. Points are laid out with the second
/// factor minor: `(i, j) ↦ i·|Y| + j`.
pub fn l_p_product(
    x: &FiniteMMSpace,
    y: &FiniteMMSpace,
    p: f64,
    tol: &Tolerances,
) -> Result<FiniteMMSpace, ConstructError> {
    if !(p >= 1.0) {
        return Err(ConstructError::InvalidParameter(format!("p {p}")));
    }
    let (nx, ny) = (x.n(), y.n());
    let n = nx * ny;
    if n > DEFAULT_SIZE_CAP {
        return Err(ConstructError::SizeOverflow { points: n, cap: DEFAULT_SIZE_CAP });
    }
    let combine = |a: f64, b: f64| -> f64 {
        if p.is_infinite() {
            a.max(b)
        } else if p == 1.0 {
            a + b
        } else if p == 2.0 {
            a.hypot(b)
        } else {
            (a.powf(p) + b.powf(p)).powf(1.0 / p)
        }
    };
    let mut labels = Vec::with_capacity(n);
    let mut weight = Vec::with_capacity(n);
    for i in 0..nx {
        for j in 0..ny {
            labels.push(format!("{}|{}", x.label(i), y.label(j)));
            weight.push(x.weight(i) * y.weight(j));
        }
    }
    let mut dist = vec![0.0; n * n];
    for i in 0..nx {
        for j in 0..ny {
            for i2 in 0..nx {
                for j2 in 0..ny {
                    let a = i * ny + j;
                    let b = i2 * ny + j2;
                    dist[a * n + b] = combine(x.d(i, i2), y.d(j, j2));
                }
            }
        }
    }
    Ok(FiniteMMSpace::from_flat(labels, dist, weight, tol)?)
}

/// Blended metric along a verified domination witness `f: X₁ → X₀`:
/// `d_t(x, x') = (1-t) d_{X₀}(f x, f x') + t d_{X₁}(x, x')` on X₁'s points.
/// `t = 0` is quotiented onto (a copy of) X₀.
pub fn interpolate_dominated(
    f: &PointMap,
    t: f64,
    tol: &Tolerances,
) -> Result<FiniteMMSpace, ConstructError> {
    if !(0.0..=1.0).contains(&t) {
        return Err(ConstructError::InvalidParameter(format!("t {t}")));
    }
    if !f.is_lipschitz_measure_preserving(tol) {
        return Err(ConstructError::InvalidWitness(
            "map fails the Lipschitz or push-forward check".into(),
        ));
    }
    let x1 = &f.source;
    let x0 = &f.target;
    let n = x1.n();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                dist[i * n + j] = (1.0 - t) * x0.d(f.assignment[i], f.assignment[j])
                    + t * x1.d(i, j);
            }
        }
    }
    Ok(quotient_support_flat(
        x1.labels().to_vec(),
        dist,
        x1.weights().to_vec(),
        tol,
    )?)
}

/// Two spaces glued along a relation into one ambient metric space carrying
/// both doubled copies isometrically.
#[derive(Debug, Clone)]
pub struct GluedSpace {
    /// Ambient space; its measure is the average of the two copies.
    pub ambient: FiniteMMSpace,
    /// Ambient index of each X₀ point.
    pub left_index: Vec<usize>,
    /// Ambient index of each X₁ point.
    pub right_index: Vec<usize>,
}

/// Extension metric on the disjoint union: within-copy distances are doubled,
/// and `cross(x, y) = min over (x', y') ∈ S of 2 d₀(x, x') + c + 2 d₁(y', y)`.
/// Requires `c ≥ dis S` (with respect to the original metrics), which makes
/// the cross formula a metric; points at cross distance zero are identified.
pub fn glue(
    x0: &FiniteMMSpace,
    x1: &FiniteMMSpace,
    s: &Relation,
    c: f64,
    tol: &Tolerances,
) -> Result<GluedSpace, ConstructError> {
    if s.is_empty() {
        return Err(ConstructError::InvalidParameter("empty gluing relation".into()));
    }
    let dis = s.distortion();
    if c < dis - tol.metric {
        return Err(ConstructError::RelationTooDistorted { c, dis });
    }
    let (n0, n1) = (x0.n(), x1.n());
    let n = n0 + n1;
    let mut dist = vec![0.0; n * n];
    for i in 0..n0 {
        for j in 0..n0 {
            dist[i * n + j] = 2.0 * x0.d(i, j);
        }
    }
    for i in 0..n1 {
        for j in 0..n1 {
            dist[(n0 + i) * n + n0 + j] = 2.0 * x1.d(i, j);
        }
    }
    for i in 0..n0 {
        for j in 0..n1 {
            let cross = s
                .pairs()
                .iter()
                .map(|&(a, b)| 2.0 * x0.d(i, a) + c + 2.0 * x1.d(b, j))
                .fold(f64::INFINITY, f64::min);
            dist[i * n + n0 + j] = cross;
            dist[(n0 + j) * n + i] = cross;
        }
    }
    let mut labels = Vec::with_capacity(n);
    let mut weight = Vec::with_capacity(n);
    for i in 0..n0 {
        labels.push(format!("0:{}", x0.label(i)));
        weight.push(0.5 * x0.weight(i));
    }
    for j in 0..n1 {
        labels.push(format!("1:{}", x1.label(j)));
        weight.push(0.5 * x1.weight(j));
    }
    let (ambient, map) = quotient_with_map(labels, dist, weight, tol)?;
    let left_index = (0..n0)
        .map(|i| map[i].expect("positive weight survives the quotient"))
        .collect();
    let right_index = (0..n1)
        .map(|j| map[n0 + j].expect("positive weight survives the quotient"))
        .collect();
    Ok(GluedSpace { ambient, left_index, right_index })
}

/// Kuratowski embedding of a finite space: row `x` is `(d(x, z_j))_j`.
/// Pairwise sup-norm distances of the rows reproduce the metric.
pub fn kuratowski(z: &FiniteMMSpace) -> Vec<Vec<f64>> {
    let n = z.n();
    (0..n).map(|i| (0..n).map(|j| z.d(i, j)).collect()).collect()
}

/// Sup-norm distance between two coordinate vectors.
pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Output of the midpoint construction, with the re-checked distances to
/// both endpoints and the certificates behind them.
#[derive(Debug, Clone)]
pub struct Midpoint {
    pub space: FiniteMMSpace,
    /// Box distance between the endpoints (from the base certificate).
    pub r: f64,
    pub d_left: f64,
    pub d_right: f64,
    pub base: BoxSolution,
    pub left_check: BoxSolution,
    pub right_check: BoxSolution,
    pub certified: bool,
}

/// Geodesic midpoint: glue the endpoints along an optimal box certificate,
/// embed via Kuratowski, average matched points under the sup norm, and
/// carry the unmatched mass halfway. Distances are halved sup-norm
/// distances; the construction is re-checked by solving the box distance to
/// both endpoints, which must come out at most `r/2 + MIDPOINT_CHECK_TOL`.
pub fn midpoint(
    x0: &FiniteMMSpace,
    x1: &FiniteMMSpace,
    budget: &SearchBudget,
    tol: &Tolerances,
) -> Result<Midpoint, ConstructError> {
    let base = box_exact(x0, x1, budget, tol)?;
    if !base.certified {
        return Err(ConstructError::SearchBudgetExceeded(
            "base box solve is not certified".into(),
        ));
    }
    let r = base.value();
    let relation = &base.bound.relation;
    let plan = &base.bound.plan;
    let glued = glue(x0, x1, relation, relation.distortion(), tol)?;
    let coords = kuratowski(&glued.ambient);

    struct Atom {
        label: String,
        coord: Vec<f64>,
        mass: f64,
    }
    let mut atoms: Vec<Atom> = Vec::new();
    let mut row_used = vec![0.0f64; x0.n()];
    let mut col_used = vec![0.0f64; x1.n()];
    for &(i, j) in relation.pairs() {
        let mass = plan.at(i, j);
        if mass <= SUPPORT_PRUNE {
            continue;
        }
        row_used[i] += mass;
        col_used[j] += mass;
        let left = &coords[glued.left_index[i]];
        let right = &coords[glued.right_index[j]];
        let coord: Vec<f64> = left.iter().zip(right).map(|(a, b)| 0.5 * (a + b)).collect();
        atoms.push(Atom {
            label: format!("m:{}|{}", x0.label(i), x1.label(j)),
            coord,
            mass,
        });
    }
    for i in 0..x0.n() {
        let mass = 0.5 * (x0.weight(i) - row_used[i]).max(0.0);
        if mass > SUPPORT_PRUNE {
            atoms.push(Atom {
                label: format!("l:{}", x0.label(i)),
                coord: coords[glued.left_index[i]].clone(),
                mass,
            });
        }
    }
    for j in 0..x1.n() {
        let mass = 0.5 * (x1.weight(j) - col_used[j]).max(0.0);
        if mass > SUPPORT_PRUNE {
            atoms.push(Atom {
                label: format!("r:{}", x1.label(j)),
                coord: coords[glued.right_index[j]].clone(),
                mass,
            });
        }
    }

    let total: f64 = atoms.iter().map(|a| a.mass).sum();
    let k = atoms.len();
    let mut dist = vec![0.0; k * k];
    for a in 0..k {
        for b in (a + 1)..k {
            let d = 0.5 * sup_distance(&atoms[a].coord, &atoms[b].coord);
            dist[a * k + b] = d;
            dist[b * k + a] = d;
        }
    }
    let labels = atoms.iter().map(|a| a.label.clone()).collect();
    let weights = atoms.iter().map(|a| a.mass / total).collect();
    let space = quotient_support_flat(labels, dist, weights, tol)?;

    let left_check = box_exact(x0, &space, budget, tol)?;
    let right_check = box_exact(x1, &space, budget, tol)?;
    let (d_left, d_right) = (left_check.value(), right_check.value());
    let bound = 0.5 * r + MIDPOINT_CHECK_TOL;
    if d_left > bound || d_right > bound {
        return Err(ConstructError::MidpointCheckFailed { d_left, d_right, bound });
    }
    let certified = left_check.certified && right_check.certified;
    Ok(Midpoint {
        space,
        r,
        d_left,
        d_right,
        base,
        left_check,
        right_check,
        certified,
    })
}

/// A sampled path in the space of mm-spaces: strictly increasing parameters
/// with both endpoints present.
#[derive(Debug, Clone)]
pub struct PathSample {
    pub entries: Vec<(f64, FiniteMMSpace)>,
    pub meta: String,
}

impl PathSample {
    pub fn new(entries: Vec<(f64, FiniteMMSpace)>, meta: String) -> Result<Self, ConstructError> {
        if entries.len() < 2 || entries[0].0 != 0.0 || entries[entries.len() - 1].0 != 1.0 {
            return Err(ConstructError::InvalidParameter(
                "path must run from t = 0 to t = 1".into(),
            ));
        }
        if entries.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(ConstructError::InvalidParameter(
                "path parameters must strictly increase".into(),
            ));
        }
        Ok(Self { entries, meta })
    }
}

/// Box distance between two sampled path entries, with its certificate.
#[derive(Debug, Clone)]
pub struct PairCheck {
    pub t_left: f64,
    pub t_right: f64,
    pub solution: BoxSolution,
}

#[derive(Debug, Clone)]
pub struct GeodesicRun {
    pub path: PathSample,
    /// Box distance between the endpoints.
    pub r: f64,
    /// Box distance for every sampled pair, for the `|t - t'| r` check.
    pub pairwise: Vec<PairCheck>,
}

/// Recursive midpointing to the dyadic parameters `k / 2^depth`, re-solving
/// the box distance for every sampled pair.
pub fn geodesic_dyadic(
    x0: &FiniteMMSpace,
    x1: &FiniteMMSpace,
    depth: u32,
    budget: &SearchBudget,
    tol: &Tolerances,
) -> Result<GeodesicRun, ConstructError> {
    if depth > 3 {
        return Err(ConstructError::InvalidParameter(format!(
            "depth {depth} beyond the supported 3"
        )));
    }
    let base = box_exact(x0, x1, budget, tol)?;
    let r = base.value();
    let mut entries: Vec<(f64, FiniteMMSpace)> = vec![(0.0, x0.clone()), (1.0, x1.clone())];
    for _ in 0..depth {
        let mut next: Vec<(f64, FiniteMMSpace)> = Vec::with_capacity(entries.len() * 2 - 1);
        for w in entries.windows(2) {
            let (ta, a) = (&w[0].0, &w[0].1);
            let (tb, b) = (&w[1].0, &w[1].1);
            let mid = midpoint(a, b, budget, tol)?;
            next.push((*ta, a.clone()));
            next.push((0.5 * (ta + tb), mid.space));
        }
        next.push(entries[entries.len() - 1].clone());
        entries = next;
    }
    let mut pairwise = Vec::new();
    for a in 0..entries.len() {
        for b in (a + 1)..entries.len() {
            let solution = box_exact(&entries[a].1, &entries[b].1, budget, tol)?;
            pairwise.push(PairCheck {
                t_left: entries[a].0,
                t_right: entries[b].0,
                solution,
            });
        }
    }
    let path = PathSample::new(entries, format!("geodesic(depth={depth})"))?;
    Ok(GeodesicRun { path, r, pairwise })
}

/// A branched copy of a geodesic: each entry is an l_∞ product with a scaled
/// factor that vanishes at the endpoints.
#[derive(Debug, Clone)]
pub struct BranchFamily {
    pub path: PathSample,
    /// Factor atom count per entry: 1 where the factor collapsed to a point.
    pub factor_sizes: Vec<usize>,
    /// Weights of the common factor space.
    pub factor_weights: Vec<f64>,
}

/// `Y_{s,t} = X_t ×_∞ scale(Z, s f(t))` with `f(t) = r min{t, 1-t}`.
/// Endpoints are returned unchanged since `f(0) = f(1) = 0`.
pub fn branch_family(
    path: &PathSample,
    s: f64,
    z: &FiniteMMSpace,
    r: f64,
    tol: &Tolerances,
) -> Result<BranchFamily, ConstructError> {
    if !(0.0..=1.0).contains(&s) {
        return Err(ConstructError::InvalidParameter(format!("s {s}")));
    }
    let dz = z.diam();
    if !(dz > 0.0 && dz <= 1.0) {
        return Err(ConstructError::InvalidParameter(format!(
            "factor diameter {dz} outside (0, 1]"
        )));
    }
    if !(r.is_finite() && r >= 0.0) {
        return Err(ConstructError::InvalidParameter(format!("r {r}")));
    }
    let mut entries = Vec::with_capacity(path.entries.len());
    let mut factor_sizes = Vec::with_capacity(path.entries.len());
    for (t, xt) in &path.entries {
        let gauge = s * r * t.min(1.0 - t);
        let factor = scale(z, gauge, tol)?;
        if factor.is_point() {
            entries.push((*t, xt.clone()));
            factor_sizes.push(1);
        } else {
            entries.push((*t, l_p_product(xt, &factor, f64::INFINITY, tol)?));
            factor_sizes.push(factor.n());
        }
    }
    let path = PathSample::new(entries, format!("branch(s={s})"))?;
    Ok(BranchFamily { path, factor_sizes, factor_weights: z.weights().to_vec() })
}

/// The proof's default factor: a 3-point uniform quantile discretization of
/// the unit interval (diameter 2/3).
pub fn default_branch_factor(tol: &Tolerances) -> FiniteMMSpace {
    let positions: [f64; 3] = [1.0 / 6.0, 0.5, 5.0 / 6.0];
    let n = positions.len();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            dist[i * n + j] = (positions[i] - positions[j]).abs();
        }
    }
    FiniteMMSpace::from_flat(
        (0..n).map(|k| format!("z{k}")).collect(),
        dist,
        vec![1.0 / n as f64; n],
        tol,
    )
    .expect("interval discretization is a valid space")
}

/// Lifts a box certificate for `(X_s, X_t)` to the product pair
/// `(X_s ×_∞ aZ, X_t ×_∞ bZ)`: the coupling matches factor atoms and the
/// relation pairs `((x, z), (y, z))` over `(x, y) ∈ S`. Either side may have
/// collapsed its factor (size 1), in which case the factor index is free.
pub fn lift_certificate(
    base: &BoxBound,
    left: &FiniteMMSpace,
    right: &FiniteMMSpace,
    nz_left: usize,
    nz_right: usize,
    factor_weights: &[f64],
) -> Result<(Coupling, Relation), ConstructError> {
    let nz = factor_weights.len();
    if (nz_left != 1 && nz_left != nz) || (nz_right != 1 && nz_right != nz) {
        return Err(ConstructError::InvalidParameter(format!(
            "factor sizes {nz_left}, {nz_right} do not match the factor ({nz} atoms)"
        )));
    }
    let (m, n) = (left.n(), right.n());
    if m % nz_left != 0 || n % nz_right != 0 {
        return Err(ConstructError::InvalidParameter(
            "product sizes are inconsistent with the factor".into(),
        ));
    }
    let mut matrix = vec![0.0f64; m * n];
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for &(i, j) in base.relation.pairs() {
        match (nz_left, nz_right) {
            (1, 1) => pairs.push((i, j)),
            (1, _) => pairs.extend((0..nz).map(|a| (i, j * nz + a))),
            (_, 1) => pairs.extend((0..nz).map(|a| (i * nz + a, j))),
            _ => pairs.extend((0..nz).map(|a| (i * nz + a, j * nz + a))),
        }
    }
    for i in 0..base.plan.m() {
        for j in 0..base.plan.n() {
            let mass = base.plan.at(i, j);
            if mass == 0.0 {
                continue;
            }
            match (nz_left, nz_right) {
                (1, 1) => matrix[i * n + j] += mass,
                (1, _) => {
                    for (a, &wz) in factor_weights.iter().enumerate() {
                        matrix[i * n + j * nz + a] += mass * wz;
                    }
                }
                (_, 1) => {
                    for (a, &wz) in factor_weights.iter().enumerate() {
                        matrix[(i * nz + a) * n + j] += mass * wz;
                    }
                }
                _ => {
                    for (a, &wz) in factor_weights.iter().enumerate() {
                        matrix[(i * nz + a) * n + j * nz + a] += mass * wz;
                    }
                }
            }
        }
    }
    let rows: Vec<Vec<f64>> = matrix.chunks(n).map(|r| r.to_vec()).collect();
    let plan = Coupling::new_sub(
        rows,
        left.weights().to_vec(),
        right.weights().to_vec(),
        &Tolerances::uniform(1e-6),
    )
    .map_err(|e| ConstructError::InvalidParameter(e.to_string()))?;
    Ok((plan, Relation::new(left, right, pairs)))
}

/// The equilateral discrete net around a finite base space, with its
/// separation and approximation report.
#[derive(Debug, Clone)]
pub struct DiscreteNet {
    /// The product spaces X_1 .. X_count.
    pub spaces: Vec<FiniteMMSpace>,
    /// The equilateral factors Y_1 .. Y_count.
    pub factors: Vec<FiniteMMSpace>,
    pub report: NetReport,
}

#[derive(Debug, Clone)]
pub struct NetReport {
    /// Required pairwise separation `min{ε, min positive distance, 1/2}`.
    pub separation_target: f64,
    /// Certified lower bounds on the pairwise box distances (indices into
    /// `spaces`), exact where the pair fits the exact regime.
    pub pairwise_lower: Vec<(usize, usize, f64)>,
    /// Certified upper bounds on the box distance from each X_n to the base,
    /// from the explicit projection certificate.
    pub to_base_upper: Vec<f64>,
    /// Distance of each factor Y_n to the one-point space.
    pub factor_radius: Vec<f64>,
}

/// Maximum number of factor atoms, so subset searches stay in the exact
/// regime.
const NET_FACTOR_CAP: usize = 128;

/// Builds the net spaces `X_n = Ẋ ×_∞ Y_n`, where `Y_n` has `(2N)^n` points
/// at mutual distance ε, and verifies their pairwise separation and their
/// distance to the base.
pub fn discrete_net(
    xdot: &FiniteMMSpace,
    eps: f64,
    count: usize,
    budget: &SearchBudget,
    tol: &Tolerances,
) -> Result<DiscreteNet, ConstructError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(ConstructError::InvalidParameter(format!("eps {eps}")));
    }
    if count == 0 {
        return Err(ConstructError::InvalidParameter("count 0".into()));
    }
    let base_n = xdot.n();
    let mut factors = Vec::with_capacity(count);
    let mut spaces = Vec::with_capacity(count);
    for level in 1..=count {
        let size = (2 * base_n).checked_pow(level as u32).ok_or(
            ConstructError::SizeOverflow { points: usize::MAX, cap: NET_FACTOR_CAP },
        )?;
        if size > NET_FACTOR_CAP {
            return Err(ConstructError::SizeOverflow { points: size, cap: NET_FACTOR_CAP });
        }
        let mut dist = vec![eps; size * size];
        for i in 0..size {
            dist[i * size + i] = 0.0;
        }
        let factor = FiniteMMSpace::from_flat(
            (0..size).map(|i| format!("y{i}")).collect(),
            dist,
            vec![1.0 / size as f64; size],
            tol,
        )?;
        spaces.push(l_p_product(xdot, &factor, f64::INFINITY, tol)?);
        factors.push(factor);
    }

    let separation_target = eps
        .min(xdot.min_positive_distance().unwrap_or(f64::INFINITY))
        .min(0.5);

    let mut pairwise_lower = Vec::new();
    for a in 0..count {
        for b in (a + 1)..count {
            let (xa, xb) = (&spaces[a], &spaces[b]);
            let lower = if xa.n() * xb.n() <= budget.exact_cells {
                box_exact(xa, xb, budget, tol)?.value()
            } else {
                box_lower_functional(xa, xb)
            };
            pairwise_lower.push((a, b, lower));
        }
    }

    let mut to_base_upper = Vec::with_capacity(count);
    for (level, xn) in spaces.iter().enumerate() {
        let fsize = factors[level].n();
        // Projection certificate: couple (x, k) to x with the product mass
        // and relate every (x, k) to its base point.
        let mut rows = vec![vec![0.0f64; base_n]; xn.n()];
        let mut pairs = Vec::with_capacity(xn.n());
        for i in 0..base_n {
            for k in 0..fsize {
                let idx = i * fsize + k;
                rows[idx][i] = xn.weight(idx);
                pairs.push((idx, i));
            }
        }
        let plan = Coupling::new_sub(rows, xn.weights().to_vec(), xdot.weights().to_vec(), tol)
            .map_err(|e| ConstructError::InvalidParameter(e.to_string()))?;
        let relation = Relation::new(xn, xdot, pairs);
        let value = evaluate_pair(xn, xdot, &plan, &relation, tol)?;
        to_base_upper.push(value);
    }

    let factor_radius = factors
        .iter()
        .map(|y| {
            box_to_point(y, &budget.with_exact_points(NET_FACTOR_CAP)).map(|s| s.value)
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(DiscreteNet {
        spaces,
        factors,
        report: NetReport { separation_target, pairwise_lower, to_base_upper, factor_radius },
    })
}
