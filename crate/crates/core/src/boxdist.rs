//! The box distance between finite mm-spaces.
//!
//! The exact solver minimizes `max{dis S, 1 - π(S)}` over relations
//! `S ⊂ X × Y` and couplings `π`. Distortion thresholds are enumerated from
//! the finite set of pairwise discrepancies; for a fixed threshold the
//! admissible relations are the cliques of a compatibility graph over matrix
//! cells, and the best coupling mass on a clique is a transportation flow.
//! Branch-and-bound over cliques with the flow value as upper bound, an
//! incumbent seeded by the `box_upper` heuristic, and early exit once a
//! clique reaches the mass target `1 - δ`.
//!
//! Inputs are put in a canonical orientation before solving, so the distance
//! is bit-exactly symmetric.

use crate::config::{SearchBudget, Tolerances, MASS_SLACK};
use crate::flow::max_flow_on_cells;
use crate::space::{scale, FiniteMMSpace, SpaceError};
use crate::transport::Coupling;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Default number of heuristic trials used to seed the exact search.
pub const DEFAULT_UPPER_TRIALS: u32 = 8;
/// Default seed for the heuristic's random couplings.
pub const DEFAULT_SEED: u64 = 0xB0C5;

/// Cells fit in a `u128` clique mask; beyond this the exact solver falls
/// back to the heuristic bound flagged non-certified.
const MAX_EXACT_CELLS: usize = 128;

#[derive(Debug, Clone, Error)]
pub enum BoxError {
    #[error("search budget exceeded: {0}")]
    SearchBudgetExceeded(String),
    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// A relation `S ⊂ X × Y` with its distortion cached at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Relation {
    pairs: Vec<(usize, usize)>,
    cached_distortion: f64,
}

impl Relation {
    /// Builds a relation over the given spaces; pairs are sorted and
    /// deduplicated, and the distortion is computed once here.
    pub fn new(x: &FiniteMMSpace, y: &FiniteMMSpace, mut pairs: Vec<(usize, usize)>) -> Self {
        pairs.sort_unstable();
        pairs.dedup();
        let cached_distortion = distortion(x, y, &pairs);
        Self { pairs, cached_distortion }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// `dis S`, the largest metric discrepancy over pairs of pairs.
    pub fn distortion(&self) -> f64 {
        self.cached_distortion
    }

    pub fn transposed(&self, x: &FiniteMMSpace, y: &FiniteMMSpace) -> Relation {
        let pairs = self.pairs.iter().map(|&(i, j)| (j, i)).collect();
        Relation::new(y, x, pairs)
    }
}

/// `dis S = max |d_X(x, x') - d_Y(y, y')|` over pairs of pairs in `S`;
/// the empty (and any singleton) relation has distortion 0.
pub fn distortion(x: &FiniteMMSpace, y: &FiniteMMSpace, pairs: &[(usize, usize)]) -> f64 {
    let mut dis = 0.0f64;
    for (a, &(i, j)) in pairs.iter().enumerate() {
        for &(i2, j2) in &pairs[a..] {
            dis = dis.max((x.d(i, i2) - y.d(j, j2)).abs());
        }
    }
    dis
}

/// A feasible `(π, S)` pair together with the objective it attains. Any
/// such pair upper-bounds the box distance.
#[derive(Debug, Clone)]
pub struct BoxBound {
    pub value: f64,
    pub plan: Coupling,
    pub relation: Relation,
}

/// Result of the exact solver. `certified` is false when the node budget ran
/// out (the bound is still feasible, hence a valid upper bound).
#[derive(Debug, Clone)]
pub struct BoxSolution {
    pub bound: BoxBound,
    pub certified: bool,
    pub nodes: u64,
}

impl BoxSolution {
    pub fn value(&self) -> f64 {
        self.bound.value
    }
}

/// Recomputes the objective of a `(plan, relation)` pair from scratch,
/// checking that the plan is a full coupling of the two weight vectors.
/// This is the verifier used for reports and lifted certificates.
pub fn evaluate_pair(
    x: &FiniteMMSpace,
    y: &FiniteMMSpace,
    plan: &Coupling,
    relation: &Relation,
    tol: &Tolerances,
) -> Result<f64, BoxError> {
    if plan.m() != x.n() || plan.n() != y.n() {
        return Err(BoxError::InvalidCertificate(format!(
            "plan is {}x{} for spaces of sizes {} and {}",
            plan.m(),
            plan.n(),
            x.n(),
            y.n()
        )));
    }
    for (i, (&s, &w)) in plan.row_sums().iter().zip(x.weights()).enumerate() {
        if (s - w).abs() > tol.mass {
            return Err(BoxError::InvalidCertificate(format!(
                "row {i} sums to {s}, marginal is {w}"
            )));
        }
    }
    for (j, (&s, &w)) in plan.col_sums().iter().zip(y.weights()).enumerate() {
        if (s - w).abs() > tol.mass {
            return Err(BoxError::InvalidCertificate(format!(
                "column {j} sums to {s}, marginal is {w}"
            )));
        }
    }
    if relation.pairs().iter().any(|&(i, j)| i >= x.n() || j >= y.n()) {
        return Err(BoxError::InvalidCertificate("relation index out of range".into()));
    }
    let dis = distortion(x, y, relation.pairs());
    Ok(dis.max(1.0 - plan.mass_on(relation.pairs())))
}

/// Maximum of `π(S)` over full couplings `π ∈ Π(μ_X, μ_Y)`, with an optimal
/// coupling. The empty relation yields mass 0.
pub fn max_coupling_mass_on(
    x: &FiniteMMSpace,
    y: &FiniteMMSpace,
    relation: &Relation,
) -> (f64, Coupling) {
    let (mass, flows) = max_flow_on_cells(x.weights(), y.weights(), relation.pairs());
    let plan = complete_to_full(x, y, relation.pairs(), &flows);
    (mass, plan)
}

/// Extends a sub-coupling on `cells` to a full coupling by routing the
/// marginal deficits northwest-corner style in index order. At a maximal
/// flow no deficit pair can sit on a relation cell, so the relation mass is
/// unchanged.
fn complete_to_full(
    x: &FiniteMMSpace,
    y: &FiniteMMSpace,
    cells: &[(usize, usize)],
    flows: &[f64],
) -> Coupling {
    let (m, n) = (x.n(), y.n());
    let mut matrix = vec![0.0f64; m * n];
    for (&(i, j), &f) in cells.iter().zip(flows) {
        matrix[i * n + j] += f;
    }
    let mut row_def: Vec<f64> = (0..m)
        .map(|i| (x.weight(i) - matrix[i * n..(i + 1) * n].iter().sum::<f64>()).max(0.0))
        .collect();
    let mut col_def: Vec<f64> = (0..n)
        .map(|j| (y.weight(j) - (0..m).map(|i| matrix[i * n + j]).sum::<f64>()).max(0.0))
        .collect();
    let (mut i, mut j) = (0, 0);
    while i < m && j < n {
        let t = row_def[i].min(col_def[j]);
        if t > 0.0 {
            matrix[i * n + j] += t;
            row_def[i] -= t;
            col_def[j] -= t;
        }
        if row_def[i] <= MASS_SLACK {
            i += 1;
        } else {
            j += 1;
        }
    }
    let rows = matrix.chunks(n).map(|r| r.to_vec()).collect();
    Coupling::new_sub(rows, x.weights().to_vec(), y.weights().to_vec(), &Tolerances::uniform(1e-6))
        .expect("completion respects marginals")
}

/// Deterministic total order on spaces used to fix the solver orientation.
fn canonical_le(x: &FiniteMMSpace, y: &FiniteMMSpace) -> bool {
    if x.n() != y.n() {
        return x.n() < y.n();
    }
    for (a, b) in x.weights().iter().zip(y.weights()) {
        if a != b {
            return a < b;
        }
    }
    for i in 0..x.n() {
        for j in 0..x.n() {
            let (a, b) = (x.d(i, j), y.d(i, j));
            if a != b {
                return a < b;
            }
        }
    }
    true
}

/// Exact box distance with certificate.
pub fn box_exact(
    x: &FiniteMMSpace,
    y: &FiniteMMSpace,
    budget: &SearchBudget,
    tol: &Tolerances,
) -> Result<BoxSolution, BoxError> {
    if canonical_le(x, y) {
        box_exact_oriented(x, y, budget, tol)
    } else {
        let sol = box_exact_oriented(y, x, budget, tol)?;
        Ok(BoxSolution {
            bound: BoxBound {
                value: sol.bound.value,
                plan: transpose_plan(&sol.bound.plan),
                relation: sol.bound.relation.transposed(y, x),
            },
            certified: sol.certified,
            nodes: sol.nodes,
        })
    }
}

fn transpose_plan(plan: &Coupling) -> Coupling {
    let rows: Vec<Vec<f64>> = (0..plan.n())
        .map(|j| (0..plan.m()).map(|i| plan.at(i, j)).collect())
        .collect();
    Coupling::new_sub(
        rows,
        plan.col_marginal().to_vec(),
        plan.row_marginal().to_vec(),
        &Tolerances::uniform(1e-6),
    )
    .expect("transpose preserves marginals")
}

fn box_exact_oriented(
    x: &FiniteMMSpace,
    y: &FiniteMMSpace,
    budget: &SearchBudget,
    tol: &Tolerances,
) -> Result<BoxSolution, BoxError> {
    let mut incumbent = box_upper(x, y, DEFAULT_UPPER_TRIALS, DEFAULT_SEED, tol)?;
    let cell_count = x.n() * y.n();
    if cell_count > MAX_EXACT_CELLS {
        return Ok(BoxSolution { bound: incumbent, certified: false, nodes: 0 });
    }

    let problem = CellProblem::new(x, y);
    let mut thresholds: Vec<f64> = vec![0.0];
    for a in 0..cell_count {
        for b in (a + 1)..cell_count {
            thresholds.push(problem.discrepancy[a * cell_count + b]);
        }
    }
    thresholds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    thresholds.dedup();

    let mut nodes: u64 = 0;
    let mut exhausted = false;
    let mut warm_mass = 0.0f64;
    for &delta in &thresholds {
        if exhausted || delta >= incumbent.value - 1e-15 {
            break;
        }
        let compat = problem.compat_masks(delta);
        let mut search = CliqueSearch {
            problem: &problem,
            compat: &compat,
            need: (1.0 - incumbent.value).max(warm_mass),
            target: 1.0 - delta,
            best_mass: f64::NEG_INFINITY,
            best_set: None,
            nodes: &mut nodes,
            node_limit: budget.node_limit,
            exhausted: &mut exhausted,
            done: false,
        };
        let full: u128 = if cell_count == 128 { !0 } else { (1u128 << cell_count) - 1 };
        search.run(0, full);
        let (best_mass, best_set) = (search.best_mass, search.best_set);
        if let Some(set) = best_set {
            warm_mass = warm_mass.max(best_mass);
            let obj = delta.max(1.0 - best_mass);
            if obj < incumbent.value {
                let cells = problem.cells_of(set);
                let (_, flows) = max_flow_on_cells(x.weights(), y.weights(), &cells);
                let plan = complete_to_full(x, y, &cells, &flows);
                let relation = Relation::new(x, y, cells);
                incumbent = BoxBound { value: obj, plan, relation };
            }
        }
    }

    Ok(BoxSolution { bound: incumbent, certified: !exhausted, nodes })
}

struct CellProblem {
    mu: Vec<f64>,
    nu: Vec<f64>,
    /// Cells ordered by coupling-mass potential μ_i·ν_j descending.
    cells: Vec<(usize, usize)>,
    /// Pairwise |d_X(i,i') - d_Y(j,j')| over cells, row-major.
    discrepancy: Vec<f64>,
}

impl CellProblem {
    fn new(x: &FiniteMMSpace, y: &FiniteMMSpace) -> Self {
        let mut cells: Vec<(usize, usize)> = (0..x.n())
            .flat_map(|i| (0..y.n()).map(move |j| (i, j)))
            .collect();
        cells.sort_by(|&(i1, j1), &(i2, j2)| {
            let m1 = x.weight(i1) * y.weight(j1);
            let m2 = x.weight(i2) * y.weight(j2);
            m2.partial_cmp(&m1).unwrap().then((i1, j1).cmp(&(i2, j2)))
        });
        let k = cells.len();
        let mut discrepancy = vec![0.0; k * k];
        for a in 0..k {
            let (i1, j1) = cells[a];
            for b in 0..k {
                let (i2, j2) = cells[b];
                discrepancy[a * k + b] = (x.d(i1, i2) - y.d(j1, j2)).abs();
            }
        }
        Self { mu: x.weights().to_vec(), nu: y.weights().to_vec(), cells, discrepancy }
    }

    fn compat_masks(&self, delta: f64) -> Vec<u128> {
        let k = self.cells.len();
        (0..k)
            .map(|a| {
                let mut mask = 0u128;
                for b in 0..k {
                    if self.discrepancy[a * k + b] <= delta {
                        mask |= 1u128 << b;
                    }
                }
                mask
            })
            .collect()
    }

    fn cells_of(&self, set: u128) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = (0..self.cells.len())
            .filter(|&a| set >> a & 1 == 1)
            .map(|a| self.cells[a])
            .collect();
        out.sort_unstable();
        out
    }

    fn flow_bound(&self, set: u128) -> f64 {
        let cells = self.cells_of(set);
        // Cheap marginal bound before the flow.
        let mut rows = vec![false; self.mu.len()];
        let mut cols = vec![false; self.nu.len()];
        for &(i, j) in &cells {
            rows[i] = true;
            cols[j] = true;
        }
        let row_mass: f64 = self.mu.iter().zip(&rows).filter(|(_, &r)| r).map(|(&w, _)| w).sum();
        let col_mass: f64 = self.nu.iter().zip(&cols).filter(|(_, &c)| c).map(|(&w, _)| w).sum();
        let cheap = row_mass.min(col_mass);
        if cells.is_empty() {
            return 0.0;
        }
        cheap.min(max_flow_on_cells(&self.mu, &self.nu, &cells).0)
    }

    fn cheap_bound(&self, set: u128) -> f64 {
        let mut row_mass = vec![false; self.mu.len()];
        let mut col_mass = vec![false; self.nu.len()];
        for a in 0..self.cells.len() {
            if set >> a & 1 == 1 {
                let (i, j) = self.cells[a];
                row_mass[i] = true;
                col_mass[j] = true;
            }
        }
        let r: f64 = self.mu.iter().zip(&row_mass).filter(|(_, &t)| t).map(|(&w, _)| w).sum();
        let c: f64 = self.nu.iter().zip(&col_mass).filter(|(_, &t)| t).map(|(&w, _)| w).sum();
        r.min(c)
    }
}

struct CliqueSearch<'a> {
    problem: &'a CellProblem,
    compat: &'a [u128],
    /// Cliques must strictly exceed this mass to be recorded.
    need: f64,
    /// Early exit once a clique reaches this mass (objective hits δ).
    target: f64,
    best_mass: f64,
    best_set: Option<u128>,
    nodes: &'a mut u64,
    node_limit: u64,
    exhausted: &'a mut bool,
    done: bool,
}

impl CliqueSearch<'_> {
    fn run(&mut self, included: u128, cand: u128) {
        if self.done || *self.exhausted {
            return;
        }
        *self.nodes += 1;
        if *self.nodes > self.node_limit {
            *self.exhausted = true;
            return;
        }
        let floor = self.best_mass.max(self.need);
        let union = included | cand;
        if self.problem.cheap_bound(union) <= floor + MASS_SLACK {
            return;
        }
        let ub = self.problem.flow_bound(union);
        if ub <= floor + MASS_SLACK {
            return;
        }
        if cand == 0 {
            // ub is now the exact coupling mass of the included clique.
            self.best_mass = ub;
            self.best_set = Some(included);
            if ub >= self.target - MASS_SLACK {
                self.done = true;
            }
            return;
        }
        let c = cand.trailing_zeros() as usize;
        let bit = 1u128 << c;
        self.run(included | bit, (cand & !bit) & self.compat[c]);
        if self.done || *self.exhausted {
            return;
        }
        self.run(included, cand & !bit);
    }
}

/// Box distance to the one-point space with a witness subset:
/// `min_A max{diam A, 1 - μ(A)}` by threshold-graph clique search.
#[derive(Debug, Clone)]
pub struct PointSolution {
    pub value: f64,
    pub witness: Vec<usize>,
}

pub fn box_to_point(
    x: &FiniteMMSpace,
    budget: &SearchBudget,
) -> Result<PointSolution, BoxError> {
    let n = x.n();
    if n > budget.exact_points || n > MAX_EXACT_CELLS {
        return Err(BoxError::SearchBudgetExceeded(format!(
            "{n} points beyond the exact regime ({})",
            budget.exact_points.min(MAX_EXACT_CELLS)
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

    let mut best_value = x.diam();
    let mut best_witness: Vec<usize> = (0..n).collect();
    let mut nodes: u64 = 0;
    let mut warm_mass = 0.0f64;
    for &d in &thresholds {
        if d >= best_value - 1e-15 {
            break;
        }
        let floor = (1.0 - best_value).max(warm_mass);
        let found =
            max_mass_subset_under(x, d, floor, 1.0 - d, budget.node_limit, &mut nodes)?;
        if let Some((mass, set)) = found {
            warm_mass = warm_mass.max(mass);
            let obj = d.max(1.0 - mass);
            if obj < best_value {
                best_value = obj;
                best_witness = set;
            }
        }
    }
    best_witness.sort_unstable();
    Ok(PointSolution { value: best_value, witness: best_witness })
}

/// Max-weight clique in the threshold graph `{d ≤ threshold}`: the heaviest
/// subset of points of diameter at most `threshold`. Records a result only
/// strictly above `floor` and stops early once `target` mass is reached.
/// Shared by the one-point box formula and the partial-diameter search.
pub(crate) fn max_mass_subset_under(
    x: &FiniteMMSpace,
    threshold: f64,
    floor: f64,
    target: f64,
    node_limit: u64,
    nodes: &mut u64,
) -> Result<Option<(f64, Vec<usize>)>, BoxError> {
    let n = x.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        x.weight(b).partial_cmp(&x.weight(a)).unwrap().then(a.cmp(&b))
    });
    let mut search = SubsetSearch {
        x,
        order: &order,
        need: floor,
        target,
        threshold,
        best_mass: f64::NEG_INFINITY,
        best_set: None,
        nodes,
        node_limit,
    };
    search.run(0, &mut Vec::new(), 1.0)?;
    let best_mass = search.best_mass;
    Ok(search.best_set.map(|mut set| {
        set.sort_unstable();
        (best_mass, set)
    }))
}

struct SubsetSearch<'a> {
    x: &'a FiniteMMSpace,
    order: &'a [usize],
    need: f64,
    target: f64,
    threshold: f64,
    best_mass: f64,
    best_set: Option<Vec<usize>>,
    nodes: &'a mut u64,
    node_limit: u64,
}

impl SubsetSearch<'_> {
    /// Max-weight clique in the graph {d ≤ threshold}, branching over
    /// `order[idx..]` with the remaining-weight bound.
    fn run(&mut self, idx: usize, included: &mut Vec<usize>, remaining: f64) -> Result<(), BoxError> {
        *self.nodes += 1;
        if *self.nodes > self.node_limit {
            return Err(BoxError::SearchBudgetExceeded(format!(
                "clique search past {} nodes",
                self.node_limit
            )));
        }
        if self.best_mass >= self.target - MASS_SLACK {
            return Ok(());
        }
        let current: f64 = included.iter().map(|&p| self.x.weight(p)).sum();
        if current > self.best_mass.max(self.need) {
            self.best_mass = current;
            self.best_set = Some(included.clone());
        }
        if idx == self.order.len() || current + remaining <= self.best_mass.max(self.need) + MASS_SLACK {
            return Ok(());
        }
        let p = self.order[idx];
        let rest = remaining - self.x.weight(p);
        if included.iter().all(|&q| self.x.d(p, q) <= self.threshold) {
            included.push(p);
            self.run(idx + 1, included, rest)?;
            included.pop();
        }
        self.run(idx + 1, included, rest)
    }
}

/// One-sided estimate from below: `1 - max_x μ(U_1(x))` with the open unit
/// ball. Always a valid lower bound for the distance to the one-point space.
pub fn box_point_lower(x: &FiniteMMSpace) -> f64 {
    let n = x.n();
    let best_ball = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| x.d(i, j) < 1.0)
                .map(|j| x.weight(j))
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    1.0 - best_ball
}

/// Gromov–Prokhorov distance, computed as the box distance of the halved
/// spaces.
pub fn gromov_prokhorov(
    x: &FiniteMMSpace,
    y: &FiniteMMSpace,
    budget: &SearchBudget,
    tol: &Tolerances,
) -> Result<BoxSolution, BoxError> {
    let hx = scale(x, 0.5, tol)?;
    let hy = scale(y, 0.5, tol)?;
    box_exact(&hx, &hy, budget, tol)
}

/// Heuristic upper bound: greedy relation growth over a family of full
/// couplings (sorted greedy, the diagonal when applicable, and seeded random
/// ones). The returned pair is feasible, so the value always dominates the
/// true distance.
pub fn box_upper(
    x: &FiniteMMSpace,
    y: &FiniteMMSpace,
    trials: u32,
    seed: u64,
    tol: &Tolerances,
) -> Result<BoxBound, BoxError> {
    let (m, n) = (x.n(), y.n());
    let mut couplings: Vec<Coupling> = Vec::new();

    let by_weight_desc = |w: &[f64]| -> Vec<usize> {
        let mut idx: Vec<usize> = (0..w.len()).collect();
        idx.sort_by(|&a, &b| w[b].partial_cmp(&w[a]).unwrap().then(a.cmp(&b)));
        idx
    };
    couplings.push(northwest_fill(
        x.weights(),
        y.weights(),
        &by_weight_desc(x.weights()),
        &by_weight_desc(y.weights()),
    ));
    if m == n
        && x.weights()
            .iter()
            .zip(y.weights())
            .all(|(&a, &b)| (a - b).abs() <= tol.mass)
    {
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|i| (0..n).map(|j| if i == j { x.weight(i) } else { 0.0 }).collect())
            .collect();
        couplings.push(
            Coupling::new_sub(rows, x.weights().to_vec(), y.weights().to_vec(), tol)
                .expect("diagonal respects marginals"),
        );
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials.max(1) {
        let mut rows: Vec<usize> = (0..m).collect();
        let mut cols: Vec<usize> = (0..n).collect();
        rows.shuffle(&mut rng);
        cols.shuffle(&mut rng);
        couplings.push(northwest_fill(x.weights(), y.weights(), &rows, &cols));
    }

    let mut best: Option<BoxBound> = None;
    for plan in couplings {
        // Grow the relation over positive-mass cells, heaviest first, and
        // take the best prefix under the box objective.
        let mut cells: Vec<(usize, usize)> = (0..m)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| plan.at(i, j) > 0.0)
            .collect();
        cells.sort_by(|&a, &b| {
            plan.at(b.0, b.1)
                .partial_cmp(&plan.at(a.0, a.1))
                .unwrap()
                .then(a.cmp(&b))
        });
        let mut dis = 0.0f64;
        let mut mass = 0.0f64;
        let mut best_prefix = (f64::INFINITY, 0usize);
        for (k, &(i, j)) in cells.iter().enumerate() {
            for &(i2, j2) in &cells[..k] {
                dis = dis.max((x.d(i, i2) - y.d(j, j2)).abs());
            }
            mass += plan.at(i, j);
            let obj = dis.max(1.0 - mass);
            if obj < best_prefix.0 {
                best_prefix = (obj, k + 1);
            }
        }
        if cells.is_empty() {
            continue;
        }
        let relation = Relation::new(x, y, cells[..best_prefix.1].to_vec());
        let value = relation.distortion().max(1.0 - plan.mass_on(relation.pairs()));
        if best.as_ref().map_or(true, |b| value < b.value) {
            best = Some(BoxBound { value, plan, relation });
        }
    }
    best.ok_or_else(|| BoxError::InvalidCertificate("no feasible coupling produced".into()))
}

fn northwest_fill(mu: &[f64], nu: &[f64], rows: &[usize], cols: &[usize]) -> Coupling {
    let (m, n) = (mu.len(), nu.len());
    let mut matrix = vec![0.0f64; m * n];
    let mut row_rem: Vec<f64> = mu.to_vec();
    let mut col_rem: Vec<f64> = nu.to_vec();
    let (mut a, mut b) = (0usize, 0usize);
    while a < m && b < n {
        let (i, j) = (rows[a], cols[b]);
        let t = row_rem[i].min(col_rem[j]);
        matrix[i * n + j] += t;
        row_rem[i] -= t;
        col_rem[j] -= t;
        if row_rem[i] <= MASS_SLACK {
            a += 1;
        } else {
            b += 1;
        }
    }
    let rows_vec = matrix.chunks(n).map(|r| r.to_vec()).collect();
    Coupling::new_sub(rows_vec, mu.to_vec(), nu.to_vec(), &Tolerances::uniform(1e-6))
        .expect("northwest fill respects marginals")
}

/// Certified lower bound from the functional-relation argument: below the
/// smallest positive distance of one space, no relation of small distortion
/// may pair two of its points with the same point of the other space, which
/// caps the coupling mass any admissible relation can carry.
pub fn box_lower_functional(x: &FiniteMMSpace, y: &FiniteMMSpace) -> f64 {
    let max_mu = x.weights().iter().cloned().fold(0.0, f64::max);
    let max_nu = y.weights().iter().cloned().fold(0.0, f64::max);
    let bound_with = |threshold: Option<f64>, cap: f64| -> f64 {
        let t = threshold.unwrap_or(f64::INFINITY);
        t.min(1.0 - cap)
    };
    // Each y used at most once: π(S) ≤ Σ_y min(max μ, ν_y).
    let cap1: f64 = y.weights().iter().map(|&w| w.min(max_mu)).sum();
    // Each x used at most once: π(S) ≤ Σ_x min(max ν, μ_x).
    let cap2: f64 = x.weights().iter().map(|&w| w.min(max_nu)).sum();
    let b1 = bound_with(x.min_positive_distance(), cap1.min(1.0));
    let b2 = bound_with(y.min_positive_distance(), cap2.min(1.0));
    b1.max(b2).max(0.0)
}
