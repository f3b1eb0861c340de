//! H- and V-representations of rational convex polyhedra.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::dd::{cone_generators, primitive, IVec};
use super::linalg::rank;
use super::PolyhedraError;
use crate::scalar::Rational;

/// Largest ambient dimension accepted by the exact enumeration.
pub const MAX_EXACT_DIM: usize = 6;

/// `{x : <normal, x> <= bound}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct RationalHalfspace {
    pub normal: Vec<Rational>,
    pub bound: Rational,
}

impl RationalHalfspace {
    pub fn new(normal: Vec<Rational>, bound: Rational) -> Result<Self, PolyhedraError> {
        if normal.iter().all(Zero::is_zero) {
            return Err(PolyhedraError::ZeroNormal);
        }
        Ok(Self { normal, bound })
    }

    pub fn from_ints(normal: &[i64], bound: i64) -> Result<Self, PolyhedraError> {
        Self::new(normal.iter().map(|&x| q(x)).collect(), q(bound))
    }

    pub fn slack(&self, x: &[Rational]) -> Rational {
        &self.bound - dot_q(&self.normal, x)
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        !self.slack(x).is_negative()
    }
}

pub(crate) fn q(x: i64) -> Rational {
    Rational::from_integer(x.into())
}

pub(crate) fn dot_q(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub(crate) fn int_to_q(v: &[BigInt]) -> Vec<Rational> {
    v.iter().map(|x| Rational::from_integer(x.clone())).collect()
}

/// Clears denominators of a rational row.
fn integer_row(v: &[Rational]) -> IVec {
    let l = v.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    let scale = Rational::from_integer(l);
    primitive(v.iter().map(|x| (x * &scale).to_integer()).collect())
}

/// A convex polyhedron given by halfspaces together with its exact
/// generators: `conv(vertices) + cone(rays) + span(lines)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalConvexPolyhedron {
    dim: usize,
    halfspaces: Vec<RationalHalfspace>,
    vertices: Vec<Vec<Rational>>,
    rays: Vec<IVec>,
    lines: Vec<IVec>,
}

/// A bounded polyhedron.
pub type RationalPolytope = RationalConvexPolyhedron;

impl RationalConvexPolyhedron {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> &[RationalHalfspace] {
        &self.halfspaces
    }

    /// Vertices in lexicographic order. When the polyhedron has lineality
    /// these are representatives of its minimal faces.
    pub fn vertices(&self) -> &[Vec<Rational>] {
        &self.vertices
    }

    pub fn rays(&self) -> &[IVec] {
        &self.rays
    }

    pub fn lines(&self) -> &[IVec] {
        &self.lines
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// True iff the recession cone is `{0}`.
    pub fn is_compact(&self) -> bool {
        self.rays.is_empty() && self.lines.is_empty()
    }

    /// Membership via the H-representation.
    pub fn contains(&self, x: &[Rational]) -> bool {
        self.halfspaces.iter().all(|h| h.contains(x))
    }

    /// Dimension of the affine hull.
    pub fn affine_dim(&self) -> usize {
        if self.vertices.is_empty() {
            return 0;
        }
        let v0 = &self.vertices[0];
        let mut dirs: Vec<Vec<Rational>> = self.vertices[1..]
            .iter()
            .map(|v| v.iter().zip(v0).map(|(a, b)| a - b).collect())
            .collect();
        dirs.extend(self.rays.iter().map(|r| int_to_q(r)));
        dirs.extend(self.lines.iter().map(|l| int_to_q(l)));
        rank(&dirs)
    }

    /// Vertices as integer vectors, when all of them are integral.
    pub fn integer_vertices(&self) -> Option<Vec<Vec<i64>>> {
        self.vertices
            .iter()
            .map(|v| {
                v.iter()
                    .map(|x| if x.is_integer() { i64::try_from(x.to_integer()).ok() } else { None })
                    .collect()
            })
            .collect()
    }

    /// Recomputes an H-representation from the generators alone.
    pub fn rederive_halfspaces(&self) -> Result<Vec<RationalHalfspace>, PolyhedraError> {
        let (facets, eqs) = facets_of_generators(self.dim, &self.vertices, &self.rays, &self.lines)?;
        let mut hs = facets;
        for e in eqs {
            hs.push(RationalHalfspace { normal: e.normal.iter().map(|x| -x).collect(), bound: -&e.bound });
            hs.push(e);
        }
        Ok(hs)
    }
}

/// Exact V-representation of an intersection of halfspaces in `ℚ^dim`.
pub fn halfspace_intersection(
    dim: usize,
    hs: &[RationalHalfspace],
) -> Result<RationalConvexPolyhedron, PolyhedraError> {
    if dim > MAX_EXACT_DIM {
        return Err(PolyhedraError::DimensionTooLarge(dim));
    }
    if dim == 0 {
        return Err(PolyhedraError::ZeroDimension);
    }
    // Homogenize: (t, x) with bound*t - normal.x >= 0 and t >= 0.
    let mut rows: Vec<IVec> = Vec::with_capacity(hs.len() + 1);
    for h in hs {
        if h.normal.len() != dim {
            return Err(PolyhedraError::ArityMismatch { expected: dim, got: h.normal.len() });
        }
        let mut row = vec![h.bound.clone()];
        row.extend(h.normal.iter().map(|x| -x));
        rows.push(integer_row(&row));
    }
    let mut t = vec![BigInt::zero(); dim + 1];
    t[0] = BigInt::one();
    rows.push(t);
    let g = cone_generators(dim + 1, &rows);

    let mut vertices = Vec::new();
    let mut rays = Vec::new();
    for r in &g.rays {
        if r[0].is_positive() {
            let t = Rational::from_integer(r[0].clone());
            vertices.push(r[1..].iter().map(|x| Rational::from_integer(x.clone()) / &t).collect::<Vec<_>>());
        } else {
            rays.push(r[1..].to_vec());
        }
    }
    let mut lines: Vec<IVec> = g.lines.iter().map(|l| l[1..].to_vec()).collect();
    if vertices.is_empty() {
        rays.clear();
        lines.clear();
    }
    vertices.sort();
    vertices.dedup();
    rays.sort();
    Ok(RationalConvexPolyhedron { dim, halfspaces: hs.to_vec(), vertices, rays, lines })
}

type Facets = (Vec<RationalHalfspace>, Vec<RationalHalfspace>);

/// Facet inequalities and affine-hull equalities of
/// `conv(points) + cone(rays) + span(lines)`.
fn facets_of_generators(
    dim: usize,
    points: &[Vec<Rational>],
    rays: &[IVec],
    lines: &[IVec],
) -> Result<Facets, PolyhedraError> {
    // A row (a0, a) of the dual cone encodes a0 + a.x >= 0 on the polyhedron.
    let mut rows: Vec<IVec> = Vec::new();
    for p in points {
        let mut row = vec![Rational::one()];
        row.extend(p.iter().cloned());
        rows.push(integer_row(&row));
    }
    for r in rays {
        let mut row = vec![BigInt::zero()];
        row.extend(r.iter().cloned());
        rows.push(row);
    }
    for l in lines {
        let mut row = vec![BigInt::zero()];
        row.extend(l.iter().cloned());
        rows.push(row.clone());
        rows.push(row.iter().map(|x| -x).collect());
    }
    let g = cone_generators(dim + 1, &rows);
    let to_hs = |v: &IVec| -> Option<RationalHalfspace> {
        if v[1..].iter().all(Zero::is_zero) {
            return None;
        }
        Some(RationalHalfspace {
            normal: v[1..].iter().map(|x| Rational::from_integer(-x)).collect(),
            bound: Rational::from_integer(v[0].clone()),
        })
    };
    let mut facets: Vec<RationalHalfspace> = g.rays.iter().filter_map(to_hs).collect();
    let mut eqs: Vec<RationalHalfspace> = g.lines.iter().filter_map(to_hs).collect();
    facets.sort();
    eqs.sort();
    Ok((facets, eqs))
}

/// Exact convex hull of integer points, with facets and equalities as the
/// H-representation and the extreme points as sorted vertices.
pub fn convex_hull(dim: usize, points: &[Vec<i64>]) -> Result<RationalPolytope, PolyhedraError> {
    if points.is_empty() {
        return Err(PolyhedraError::EmptySupport);
    }
    if dim > MAX_EXACT_DIM {
        return Err(PolyhedraError::DimensionTooLarge(dim));
    }
    if dim == 0 {
        return Err(PolyhedraError::ZeroDimension);
    }
    if let Some(p) = points.iter().find(|p| p.len() != dim) {
        return Err(PolyhedraError::ArityMismatch { expected: dim, got: p.len() });
    }
    let mut pts: Vec<Vec<Rational>> = points.iter().map(|p| p.iter().map(|&x| q(x)).collect()).collect();
    pts.sort();
    pts.dedup();
    let (facets, eqs) = facets_of_generators(dim, &pts, &[], &[])?;
    let eq_normals: Vec<Vec<Rational>> = eqs.iter().map(|e| e.normal.clone()).collect();
    let vertices: Vec<Vec<Rational>> = pts
        .iter()
        .filter(|p| {
            let mut tight = eq_normals.clone();
            tight.extend(facets.iter().filter(|f| f.slack(p).is_zero()).map(|f| f.normal.clone()));
            rank(&tight) == dim
        })
        .cloned()
        .collect();
    let mut halfspaces = facets;
    for e in eqs {
        halfspaces.push(RationalHalfspace { normal: e.normal.iter().map(|x| -x).collect(), bound: -&e.bound });
        halfspaces.push(e);
    }
    Ok(RationalConvexPolyhedron { dim, halfspaces, vertices, rays: Vec::new(), lines: Vec::new() })
}
