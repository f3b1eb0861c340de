//! Face lattices of polytopes and their outer normal fans.

use std::collections::BTreeSet;

use num_traits::Zero;

use super::dd::{cone_generators, IVec};
use super::linalg::{affine_rank, to_integer_vector};
use super::polytope::RationalPolytope;
use super::PolyhedraError;
use crate::scalar::Rational;

/// A nonempty face of a polytope, as indices into its vertex list.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Face {
    pub vertices: Vec<usize>,
    pub dim: usize,
}

/// All nonempty faces, including the polytope itself, sorted by dimension
/// and then by vertex set.
pub fn faces(p: &RationalPolytope) -> Vec<Face> {
    let verts = p.vertices();
    let all: Vec<usize> = (0..verts.len()).collect();
    let mut sets: BTreeSet<Vec<usize>> = BTreeSet::new();
    sets.insert(all.clone());
    for (i, _) in verts.iter().enumerate() {
        sets.insert(vec![i]);
    }
    let mut frontier: Vec<Vec<usize>> = Vec::new();
    for h in p.halfspaces() {
        let tight: Vec<usize> = all.iter().copied().filter(|&i| h.slack(&verts[i]).is_zero()).collect();
        if !tight.is_empty() && tight.len() < verts.len() && sets.insert(tight.clone()) {
            frontier.push(tight);
        }
    }
    let facets: Vec<Vec<usize>> = frontier.clone();
    while let Some(f) = frontier.pop() {
        for g in &facets {
            let meet: Vec<usize> = f.iter().copied().filter(|i| g.contains(i)).collect();
            if !meet.is_empty() && sets.insert(meet.clone()) {
                frontier.push(meet);
            }
        }
    }
    let mut out: Vec<Face> = sets
        .into_iter()
        .map(|vs| {
            let pts: Vec<Vec<Rational>> = vs.iter().map(|&i| verts[i].clone()).collect();
            Face { dim: affine_rank(&pts), vertices: vs }
        })
        .collect();
    out.sort_by(|a, b| (a.dim, &a.vertices).cmp(&(b.dim, &b.vertices)));
    out
}

/// A rational polyhedral cone: `cone(rays) + span(lineality)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cone {
    pub rays: Vec<IVec>,
    pub lineality: Vec<IVec>,
    pub dim: usize,
    /// The polytope face this cone is normal to.
    pub face: Face,
}

impl Cone {
    pub fn is_pointed(&self) -> bool {
        self.lineality.is_empty()
    }
}

/// Outer normal cone of a face: directions `u` for which `<u, .>` is
/// maximized on the polytope exactly along a superset of the face.
pub fn normal_cone(p: &RationalPolytope, face: &Face) -> Cone {
    let n = p.dim();
    let verts = p.vertices();
    let v0 = &verts[face.vertices[0]];
    let diff = |a: &[Rational], b: &[Rational]| -> IVec {
        let d: Vec<Rational> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        to_integer_vector(&d)
    };
    let mut rows: Vec<IVec> = Vec::new();
    for w in verts {
        let r = diff(v0, w);
        if !r.iter().all(Zero::is_zero) {
            rows.push(r);
        }
    }
    for &i in &face.vertices[1..] {
        let r = diff(&verts[i], v0);
        rows.push(r.iter().map(|x| -x).collect());
        rows.push(r);
    }
    let g = cone_generators(n, &rows);
    Cone { dim: n - face.dim, rays: g.rays, lineality: g.lines, face: face.clone() }
}

/// A complete fan with its face relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fan {
    pub ambient_dim: usize,
    /// Cones ordered by decreasing dimension.
    pub cones: Vec<Cone>,
}

impl Fan {
    pub fn maximal_cones(&self) -> impl Iterator<Item = &Cone> {
        self.cones.iter().filter(|c| c.dim == self.ambient_dim)
    }

    pub fn cones_of_dim(&self, d: usize) -> impl Iterator<Item = &Cone> {
        self.cones.iter().filter(move |c| c.dim == d)
    }

    /// Whether cone `i` is a face of cone `j`; normal cones reverse the
    /// inclusion of the faces they come from.
    pub fn is_face_of(&self, i: usize, j: usize) -> bool {
        let fi = &self.cones[i].face.vertices;
        let fj = &self.cones[j].face.vertices;
        fj.iter().all(|v| fi.contains(v))
    }

    /// All distinct extreme rays of the fan's cones.
    pub fn rays(&self) -> Vec<IVec> {
        let mut out: BTreeSet<IVec> = BTreeSet::new();
        for c in &self.cones {
            out.extend(c.rays.iter().cloned());
        }
        out.into_iter().collect()
    }
}

pub fn normal_fan(p: &RationalPolytope) -> Result<Fan, PolyhedraError> {
    if !p.is_compact() {
        return Err(PolyhedraError::NotCompact);
    }
    if p.is_empty() {
        return Err(PolyhedraError::EmptySupport);
    }
    let mut cones: Vec<Cone> = faces(p).iter().map(|f| normal_cone(p, f)).collect();
    cones.sort_by(|a, b| b.dim.cmp(&a.dim).then_with(|| a.face.vertices.cmp(&b.face.vertices)));
    Ok(Fan { ambient_dim: p.dim(), cones })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyhedra::convex_hull;
    use num_bigint::BigInt;

    fn ints(v: &[i64]) -> IVec {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn triangle_fan() {
        let t = convex_hull(2, &[vec![0, 0], vec![1, 0], vec![0, 1]]).unwrap();
        assert_eq!(faces(&t).len(), 7);
        let fan = normal_fan(&t).unwrap();
        assert_eq!(fan.maximal_cones().count(), 3);
        let rays: Vec<IVec> = fan.cones_of_dim(1).flat_map(|c| c.rays.clone()).collect();
        let mut want = vec![ints(&[-1, 0]), ints(&[0, -1]), ints(&[1, 1])];
        want.sort();
        let mut got = rays;
        got.sort();
        assert_eq!(got, want);
        assert_eq!(fan.rays(), want);
    }

    #[test]
    fn segment_fan() {
        let s = convex_hull(2, &[vec![0, 0], vec![1, 1]]).unwrap();
        let fan = normal_fan(&s).unwrap();
        let halves: Vec<&Cone> = fan.maximal_cones().collect();
        assert_eq!(halves.len(), 2);
        for h in halves {
            assert_eq!(h.lineality, vec![ints(&[1, -1])]);
        }
        let shared: Vec<&Cone> = fan.cones_of_dim(1).collect();
        assert_eq!(shared.len(), 1);
        assert_eq!(shared[0].lineality, vec![ints(&[1, -1])]);
        assert!(shared[0].rays.is_empty());
    }

    #[test]
    fn square_fan() {
        let sq = convex_hull(2, &[vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1]]).unwrap();
        let fan = normal_fan(&sq).unwrap();
        assert_eq!(fan.maximal_cones().count(), 4);
        let mut want = vec![ints(&[1, 0]), ints(&[-1, 0]), ints(&[0, 1]), ints(&[0, -1])];
        want.sort();
        assert_eq!(fan.rays(), want);
        // The normal cone of an edge is a face of the cones of its endpoints.
        let edge = fan.cones.iter().position(|c| c.dim == 1).unwrap();
        let maximal: Vec<usize> = (0..fan.cones.len()).filter(|&j| fan.cones[j].dim == 2).collect();
        assert_eq!(maximal.iter().filter(|&&j| fan.is_face_of(edge, j)).count(), 2);
    }

    #[test]
    fn tetrahedron_faces() {
        let t = convex_hull(3, &[vec![0, 0, 0], vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]).unwrap();
        let f = faces(&t);
        let count = |d| f.iter().filter(|x| x.dim == d).count();
        assert_eq!((count(0), count(1), count(2), count(3)), (4, 6, 4, 1));
    }
}
