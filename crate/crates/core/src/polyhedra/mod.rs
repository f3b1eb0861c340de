//! Exact rational polyhedra, normal fans, spherical complexes and the
//! tropical limit set of a hypersurface.

mod bounds;
mod complex;
mod dd;
mod fan;
mod linalg;
mod polytope;
mod tropical;

use thiserror::Error;

pub use bounds::{
    balance_check, balance_of_points, newton_bound_from_vertices, support_halfspace_violations, BalanceReport,
    NewtonBound, RANDOM_NORMALS,
};
pub use complex::{complex_dim_and_homogeneity, polyline_distance, slerp_samples, Cell, CellKind, ConeSpan, SphericalComplex};
pub use fan::{faces, normal_cone, normal_fan, Cone, Face, Fan};
pub use polytope::{
    convex_hull, halfspace_intersection, RationalConvexPolyhedron, RationalHalfspace, RationalPolytope, MAX_EXACT_DIM,
};
pub use tropical::tropical_limit_set;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PolyhedraError {
    #[error("empty support")]
    EmptySupport,
    #[error("dimension {0} exceeds the exact enumeration limit of {MAX_EXACT_DIM}")]
    DimensionTooLarge(usize),
    #[error("ambient dimension must be at least 1")]
    ZeroDimension,
    #[error("expected vectors of length {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("halfspace normal is zero")]
    ZeroNormal,
    #[error("polyhedron is not compact")]
    NotCompact,
    #[error("a monomial has empty zero set in the torus")]
    MonomialInput,
    #[error("halfspace bound is not finite")]
    NonFiniteBound,
}
