//! Computable metric geometry of finite metric measure spaces.
//!
//! The crate provides exact distances with certificates (box,
//! Gromov–Prokhorov, Prokhorov, Ky Fan), concentration invariants (partial
//! and observable diameter, Gaussian and sphere formulas), the two order
//! relations (mm-isomorphism and Lipschitz domination), and the explicit
//! constructions that make the space of mm-spaces navigable: products,
//! transforms, interpolation paths, geodesic midpoints, branching geodesic
//! families, and discrete nets. Every solver either returns a certificate
//! that can be re-checked independently or flags its result non-certified.

pub mod boxdist;
pub mod config;
pub mod construct;
mod flow;
pub mod invariants;
pub mod order;
pub mod quadrature;
pub mod space;
pub mod testkit;
pub mod transport;

pub use boxdist::{
    box_exact, box_lower_functional, box_point_lower, box_to_point, box_upper,
    evaluate_pair, gromov_prokhorov, max_coupling_mass_on, BoxBound, BoxError, BoxSolution,
    PointSolution, Relation,
};
pub use config::{SearchBudget, Tolerances};
pub use construct::{
    branch_family, default_branch_factor, discrete_net, geodesic_dyadic, glue,
    interpolate_dominated, kuratowski, l_p_product, lift_certificate, midpoint, sup_distance,
    transform, BranchFamily, ConstructError, DiscreteNet, GeodesicRun, GluedSpace, Midpoint,
    PathSample, TransformSpec,
};
pub use invariants::{
    discretize_gaussian_1d, gaussian_obs_diam, gaussian_quantile_measure,
    line_space_from_measure, obs_diam_exact, obs_diam_lower, obs_diam_total,
    partial_diam_line, partial_diam_space, sphere_box_lower, sphere_concentration_ratio,
    InvariantError, LipschitzVector, ObsDiam, RealMeasure,
};
pub use order::{dominates, mm_isomorphic};
pub use space::{
    diam, quotient_support, scale, validate_space, FiniteMMSpace, PointMap, SpaceError,
};
pub use transport::{
    ky_fan, max_subtransport_mass, prokhorov, push_forward_measure, Coupling, MeasurePair,
    TransportError,
};
