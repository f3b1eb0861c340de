//! Exact logarithmic limit sets of hypersurfaces from the normal fan of the
//! Newton polytope.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::complex::{Cell, CellKind, ConeSpan, SphericalComplex};
use super::dd::IVec;
use super::fan::{normal_fan, Cone};
use super::PolyhedraError;
use crate::expr::LaurentPolynomial;
use crate::geometry::{norm2, RationalSlope};

pub(crate) fn slope_of(v: &[BigInt]) -> RationalSlope {
    let ints: Vec<i64> = v.iter().map(|x| x.to_i64().expect("slope entries fit in i64")).collect();
    RationalSlope::primitive_of(&ints).expect("fan generators are nonzero")
}

fn float(v: &IVec) -> Vec<f64> {
    let f: Vec<f64> = v.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect();
    let n = norm2(&f);
    f.iter().map(|x| x / n).collect()
}

/// Random interior directions of a cone, for representative samples.
fn cone_samples(c: &ConeSpan, count: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let n = c.rays.first().or(c.lines.first()).map_or(0, Vec::len);
    (0..count)
        .map(|_| {
            let mut v = vec![0.0; n];
            for r in &c.rays {
                let w: f64 = rng.random();
                v.iter_mut().zip(r).for_each(|(a, b)| *a += w * b);
            }
            for l in &c.lines {
                let w: f64 = rng.random_range(-1.0..1.0);
                v.iter_mut().zip(l).for_each(|(a, b)| *a += w * b);
            }
            let m = norm2(&v);
            v.iter().map(|x| x / m).collect()
        })
        .collect()
}

fn cells_of_cone(c: &Cone) -> Vec<Cell> {
    let d = c.dim - 1;
    match (d, c.lineality.len(), c.rays.len()) {
        (0, 0, 1) => vec![Cell::vertex(slope_of(&c.rays[0]))],
        (0, 1, 0) => {
            let l = slope_of(&c.lineality[0]);
            vec![Cell::vertex(l.neg()), Cell::vertex(l)]
        }
        (1, 0, 2) => vec![Cell::arc(slope_of(&c.rays[0]), slope_of(&c.rays[1]))],
        (1, 1, 1) => vec![Cell::semicircle(slope_of(&c.lineality[0]), &float(&c.rays[0]))],
        (1, 2, 0) => vec![Cell::circle(slope_of(&c.lineality[0]), slope_of(&c.lineality[1]))],
        _ => {
            let span = ConeSpan {
                rays: c.rays.iter().map(float).collect(),
                lines: c.lineality.iter().map(float).collect(),
            };
            let mut slopes: Vec<RationalSlope> = c.rays.iter().map(|r| slope_of(r)).collect();
            for l in &c.lineality {
                let s = slope_of(l);
                slopes.push(s.neg());
                slopes.push(s);
            }
            slopes.sort();
            let samples = cone_samples(&span, 32);
            vec![Cell { kind: CellKind::Higher, dim: d, slopes, samples, cone: Some(span) }]
        }
    }
}

/// The intersection with the unit sphere of the outer normal cones of all
/// positive-dimensional faces of the Newton polytope.
pub fn tropical_limit_set(p: &LaurentPolynomial) -> Result<SphericalComplex, PolyhedraError> {
    if p.is_zero() {
        return Err(PolyhedraError::EmptySupport);
    }
    if p.len() == 1 {
        return Err(PolyhedraError::MonomialInput);
    }
    let poly = p.newton_polytope()?;
    let fan = normal_fan(&poly)?;
    let cells = fan
        .cones
        .iter()
        .filter(|c| c.face.dim >= 1 && c.dim >= 1)
        .flat_map(cells_of_cone)
        .collect();
    Ok(SphericalComplex::new(cells))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;
    use crate::polyhedra::complex_dim_and_homogeneity;

    fn oracle(text: &str, n: usize) -> SphericalComplex {
        let p = parse_expression(text, n).unwrap().to_laurent().unwrap();
        tropical_limit_set(&p).unwrap()
    }

    fn vertex_slopes(s: &SphericalComplex) -> Vec<Vec<i64>> {
        let mut v: Vec<Vec<i64>> = s.vertices().map(|c| c.slopes[0].as_slice().to_vec()).collect();
        v.sort();
        v
    }

    #[test]
    fn line() {
        let s = oracle("1+z1+z2", 2);
        assert_eq!(s.cells.len(), 3);
        assert_eq!(vertex_slopes(&s), vec![vec![-1, 0], vec![0, -1], vec![1, 1]]);
    }

    #[test]
    fn binomial() {
        let s = oracle("z1*z2-1", 2);
        assert_eq!(vertex_slopes(&s), vec![vec![-1, 1], vec![1, -1]]);
    }

    #[test]
    fn plane_in_three_space() {
        let s = oracle("1+z1+z2+z3", 3);
        assert_eq!(s.count(CellKind::Vertex), 4);
        assert_eq!(s.count(CellKind::Arc), 6);
        assert_eq!(complex_dim_and_homogeneity(&s), (1, true));
    }

    #[test]
    fn degenerate_polytope_in_three_space() {
        // Newton polytope is a triangle in a plane: lineality e3.
        let s = oracle("1+z1+z2", 3);
        assert_eq!(vertex_slopes(&s), vec![vec![0, 0, -1], vec![0, 0, 1]]);
        assert_eq!(s.count(CellKind::Arc), 3);
        assert_eq!(complex_dim_and_homogeneity(&s), (1, true));
    }

    #[test]
    fn monomial_rejected() {
        let p = parse_expression("3*z1^2", 2).unwrap().to_laurent().unwrap();
        assert_eq!(tropical_limit_set(&p), Err(PolyhedraError::MonomialInput));
    }

    #[test]
    fn four_dimensional_simplex_has_higher_cells() {
        let s = oracle("1+z1+z2+z3+z4", 4);
        assert_eq!(s.count(CellKind::Vertex), 5);
        assert_eq!(s.count(CellKind::Arc), 10);
        assert_eq!(s.count(CellKind::Higher), 10);
        assert_eq!(complex_dim_and_homogeneity(&s), (2, true));
    }
}
