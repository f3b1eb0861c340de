//! The algebraicity decision and the Newton-bound certificate.

use serde::Serialize;

use crate::expr::{Exponent, Expression};
use crate::geometry::RationalSlope;
use crate::polyhedra::{
    balance_check, complex_dim_and_homogeneity, newton_bound_from_vertices, support_halfspace_violations,
    tropical_limit_set, BalanceReport, CellKind, SphericalComplex,
};
use crate::sampler::{Mode, VarietySpec};

use super::classify::{ClassifyParams, ComponentKind};
use super::estimate::LimitSetEstimate;
use super::LimitSetError;

/// Largest Hausdorff distance at which the estimate agrees with the oracle.
pub const ORACLE_TOLERANCE: f64 = 2e-2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Decision {
    AlgebraicConsistent,
    NotAlgebraic,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellReport {
    pub kind: CellKind,
    pub dim: usize,
    /// Vertex slope or arc endpoint slopes were all recovered.
    pub rational: bool,
    pub slopes: Vec<RationalSlope>,
    /// A representative direction of the cell.
    pub direction: Vec<f64>,
    /// Box-counting dimension of the cell's component, when measured.
    pub dim_estimate: Option<f64>,
    pub low_confidence: bool,
    /// Points in the component the cell came from.
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleAgreement {
    pub vertex_hausdorff: f64,
    pub hausdorff: f64,
    pub agrees: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostics {
    pub declared_dim: usize,
    pub radii: Vec<f64>,
    pub points_per_shell: Vec<usize>,
    pub eps: f64,
    pub tolerances: ClassifyParams,
    pub homogeneous: bool,
    /// `(vertices, arcs, higher cells)` on the second-largest and largest shells.
    pub shell_counts: [(usize, usize, usize); 2],
    pub stable: bool,
    pub irrational_vertices: usize,
    pub low_confidence_cells: usize,
    pub oracle: Option<OracleAgreement>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub decision: Decision,
    pub dim_estimate: f64,
    pub cells: Vec<CellReport>,
    pub balance: BalanceReport,
    pub diagnostics: Diagnostics,
}

impl Verdict {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("verdict serializes")
    }
}

fn near_half_integer(d: f64) -> bool {
    let f = d - d.floor();
    (f - 0.5).abs() < 0.25
}

/// Decides whether the estimate is consistent with an algebraic variety of
/// complex dimension `k`.
///
/// With the variety given, polynomial input is compared with its exact tropical
/// limit set and implicit transcendental input carries a warning that its
/// zero set may have infinitely many components.
pub fn algebraicity_verdict(est: &LimitSetEstimate, k: usize, spec: Option<&VarietySpec>) -> Verdict {
    let mut cells = Vec::new();
    for comp in &est.components {
        for c in &comp.cells {
            let rational = match c.kind {
                CellKind::Vertex => c.slopes.len() == 1,
                CellKind::Arc | CellKind::Circle => c.slopes.len() == 2,
                CellKind::Higher => false,
            };
            cells.push(CellReport {
                kind: c.kind,
                dim: c.dim,
                rational,
                slopes: c.slopes.clone(),
                direction: c.samples[c.samples.len() / 2].clone(),
                dim_estimate: (comp.kind == ComponentKind::Higher).then_some(comp.dim_estimate),
                low_confidence: comp.low_confidence,
                points: comp.points,
            });
        }
    }

    let mut warnings = Vec::new();
    let oracle = spec.and_then(|s| s.polynomial()).and_then(|p| tropical_limit_set(&p).ok()).map(|o| {
        let hausdorff = est.complex.hausdorff(&o);
        OracleAgreement {
            vertex_hausdorff: est.complex.vertex_hausdorff(&o),
            hausdorff,
            agrees: hausdorff <= ORACLE_TOLERANCE,
        }
    });
    if let Some(s) = spec {
        if matches!(s.mode, Mode::Implicit { .. }) && s.is_transcendental() {
            warnings.push(
                "transcendental equation: the estimate covers the union of all its irreducible components; \
                 select one with `component` to classify it alone"
                    .to_string(),
            );
        }
    }

    let balance = balance_check(&est.complex);
    let (_, homogeneous) = complex_dim_and_homogeneity(&est.complex);
    let d = est.dim_estimate;
    let low_confidence_cells = cells.iter().filter(|c| c.low_confidence).count();

    let confirmed_high = est.stable
        && est.components.iter().any(|c| match c.kind {
            ComponentKind::Vertex => false,
            ComponentKind::Arcs => 1 >= k,
            ComponentKind::Higher => !c.low_confidence && c.dim_estimate.round() >= k as f64,
        });
    let box_dims_ambiguous = est
        .components
        .iter()
        .any(|c| c.kind == ComponentKind::Higher && (!c.dim_estimate.is_finite() || near_half_integer(c.dim_estimate)));

    let decision = if confirmed_high || est.irrational_vertices > 0 {
        Decision::NotAlgebraic
    } else if d.round() == k as f64 - 1.0
        && cells.iter().all(|c| c.rational)
        && low_confidence_cells == 0
        && est.stable
        && balance.balanced
        && !box_dims_ambiguous
        && oracle.as_ref().is_none_or(|o| o.agrees)
    {
        Decision::AlgebraicConsistent
    } else {
        Decision::Inconclusive
    };

    Verdict {
        decision,
        dim_estimate: d,
        cells,
        balance,
        diagnostics: Diagnostics {
            declared_dim: k,
            radii: est.samples.iter().map(|s| s.radius).collect(),
            points_per_shell: est.samples.iter().map(|s| s.points.len()).collect(),
            eps: est.eps,
            tolerances: ClassifyParams::default(),
            homogeneous,
            shell_counts: est.shell_counts,
            stable: est.stable,
            irrational_vertices: est.irrational_vertices,
            low_confidence_cells,
            oracle,
            warnings,
        },
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ViolationReport {
    pub degree: u32,
    pub count: usize,
    /// The first few violating exponents, in support order.
    pub examples: Vec<Exponent>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub degree: u32,
    /// `(u, b̂_u)`: the bound is `⟨u, α⟩ ≤ b̂_u` for each vertex slope.
    pub halfspaces: Vec<(RationalSlope, f64)>,
    /// Vertices of the bounding polyhedron, as exact rationals in string form.
    pub vertices: Vec<Vec<String>>,
    pub compact: bool,
    pub compact_in_span: bool,
    pub span_dim: usize,
    /// Violations of the degree-`D` bound by truncations of degree `D`, `2D`, `3D` and `4D`.
    pub violations: Vec<ViolationReport>,
    /// The truncation at degree `D` dropped nonzero terms.
    pub tail_nonzero: bool,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}

/// Bounds the support of `f` by the halfspaces dual to the vertex slopes of
/// `complex`, with offsets read off the degree-`degree` truncation, and
/// counts how much of the support of deeper truncations escapes the bound.
pub fn certify_newton_bound(f: &Expression, complex: &SphericalComplex, degree: u32) -> Result<Certificate, LimitSetError> {
    if complex.cells.is_empty()
        || complex.cells.iter().any(|c| c.kind != CellKind::Vertex || c.slopes.len() != 1)
    {
        return Err(LimitSetError::NotRationalVertices);
    }
    let trunc = f.truncate_series(degree)?;
    let support = trunc.poly.support();
    let mut halfspaces = Vec::new();
    for c in complex.vertices() {
        let u = &c.slopes[0];
        let b = support
            .iter()
            .map(|a| a.iter().zip(u.as_slice()).map(|(x, w)| x * w).sum::<i64>())
            .max()
            .ok_or(crate::polyhedra::PolyhedraError::EmptySupport)?;
        halfspaces.push((u.clone(), b as f64));
    }
    let neg: Vec<(RationalSlope, f64)> = halfspaces.iter().map(|(u, b)| (u.clone(), -b)).collect();
    let bound = newton_bound_from_vertices(&neg)?;
    let vertices = bound
        .polyhedron
        .vertices()
        .iter()
        .map(|v| v.iter().map(|x| x.to_string()).collect())
        .collect();
    let mut violations = Vec::new();
    for m in 1..=4u32 {
        let d = degree.saturating_mul(m);
        let t = f.truncate_series(d)?;
        let mut bad: Vec<Exponent> = Vec::new();
        for (u, b) in &neg {
            for e in support_halfspace_violations(&t, u, *b) {
                if !bad.contains(&e) {
                    bad.push(e);
                }
            }
        }
        bad.sort();
        violations.push(ViolationReport { degree: d, count: bad.len(), examples: bad.into_iter().take(8).collect() });
    }
    Ok(Certificate {
        degree,
        halfspaces,
        vertices,
        compact: bound.compact,
        compact_in_span: bound.compact_in_span,
        span_dim: bound.span_dim,
        violations,
        tail_nonzero: trunc.tail_nonzero,
    })
}
