//! Estimated logarithmic limit sets and the algebraicity verdict.

mod classify;
mod cloud;
mod estimate;
mod verdict;

use thiserror::Error;

pub use classify::{
    arc_cell, box_counting_dim, classify_component, default_scales, extract_arcs, normalized, vertex_cell,
    ClassifyParams, ComponentClass, ComponentKind, FittedArc,
};
pub use cloud::{
    angular_diameter, cluster_directions, cluster_points, direction_cloud, mean_direction, median_nn_gap, CloudPoint,
    DirectionCloud,
};
pub use estimate::{clustering_eps, estimate_from_samples, estimate_limit_set, EstimateConfig, LimitSetEstimate, EPS_FLOOR, SHELL_WIDTH};
pub use verdict::{
    algebraicity_verdict, certify_newton_bound, CellReport, Certificate, Decision, Diagnostics, OracleAgreement, ViolationReport, ORACLE_TOLERANCE,
    Verdict,
};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum LimitSetError {
    #[error("no sample points with log-norm at least {0}")]
    EmptyAfterCutoff(f64),
    #[error("box counting needs at least 3 distinct positive scales")]
    DegenerateScales,
    #[error("box counting needs at least 100 points, got {0}")]
    TooFewPoints(usize),
    #[error("certificate needs an estimate made only of vertices with rational slopes")]
    NotRationalVertices,
    #[error(transparent)]
    Sampler(#[from] crate::sampler::SamplerError),
    #[error(transparent)]
    Series(#[from] crate::expr::SeriesError),
    #[error(transparent)]
    Polyhedra(#[from] crate::polyhedra::PolyhedraError),
}
