//! Comparison tolerances and search budgets shared by every solver.

/// Slacks used when checking metric and mass axioms.
///
/// Every comparison against an axiom goes through one of these two fields;
/// there are no ad-hoc epsilons in the validators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Slack for distance comparisons (symmetry, triangle inequality,
    /// Lipschitz constraints, isometry checks).
    pub metric: f64,
    /// Slack for mass comparisons (weight sums, marginals, fibers).
    pub mass: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { metric: 1e-9, mass: 1e-9 }
    }
}

impl Tolerances {
    /// Same slack for metric and mass comparisons.
    pub fn uniform(t: f64) -> Self {
        Self { metric: t, mass: t }
    }
}

/// Internal slack used when testing whether a set of atoms reaches a mass
/// threshold (partial diameters, observable-diameter windows). Keeps window
/// selection stable when a requested mass sits exactly on a cumulative sum.
pub const MASS_SLACK: f64 = 1e-12;

/// Atoms below this mass are dropped before quotienting constructed spaces.
pub const SUPPORT_PRUNE: f64 = 1e-12;

/// Size and node limits for the exact searches.
///
/// Exact solvers run unconditionally inside their guaranteed regime and keep
/// going on larger inputs until `node_limit` branch-and-bound nodes have been
/// explored; past that they return their best bound flagged non-certified
/// (or report budget exhaustion, depending on the operation).
#[derive(Debug, Clone, Copy)]
pub struct SearchBudget {
    /// Cap on explored search nodes across one solver call.
    pub node_limit: u64,
    /// Guaranteed regime for the box-distance solver, in matrix cells |X|·|Y|.
    pub exact_cells: usize,
    /// Guaranteed regime for subset searches (distance to the one-point
    /// space, partial diameter), in points.
    pub exact_points: usize,
    /// Guaranteed regime for the ordering-enumeration observable-diameter
    /// solver, in points.
    pub exact_obs_points: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            node_limit: 20_000_000,
            exact_cells: 16,
            exact_points: 15,
            exact_obs_points: 7,
        }
    }
}

impl SearchBudget {
    pub fn with_node_limit(mut self, limit: u64) -> Self {
        self.node_limit = limit;
        self
    }

    pub fn with_exact_points(mut self, points: usize) -> Self {
        self.exact_points = points;
        self
    }
}
