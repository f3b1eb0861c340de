//! Small exact linear algebra over the rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::scalar::Rational;

/// Reduced row echelon form; returns the pivot columns.
pub(crate) fn rref(m: &mut [Vec<Rational>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let d = &f * &m[r][j];
                    m[i][j] -= d;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub(crate) fn rank(rows: &[Vec<Rational>]) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m).len()
}

/// Integer basis (primitive vectors) of `{x : row . x = 0 for every row}`.
pub(crate) fn nullspace(dim: usize, rows: &[Vec<Rational>]) -> Vec<Vec<BigInt>> {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m);
    let free: Vec<usize> = (0..dim).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); dim];
            v[f] = Rational::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -m[r][f].clone();
            }
            to_integer_vector(&v)
        })
        .collect()
}

/// Scales a rational vector to a primitive integer vector with the same
/// direction.
pub(crate) fn to_integer_vector(v: &[Rational]) -> Vec<BigInt> {
    let l = v.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * Rational::from(l.clone())).to_integer()).collect();
    super::dd::primitive(ints)
}

pub(crate) fn affine_rank(points: &[Vec<Rational>]) -> usize {
    let Some(p0) = points.first() else { return 0 };
    let diffs: Vec<Vec<Rational>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(p0).map(|(a, b)| a - b).collect())
        .collect();
    rank(&diffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| Rational::from_integer(x.into())).collect()
    }

    #[test]
    fn rank_and_nullspace() {
        let rows = vec![q(&[1, 1, 0]), q(&[2, 2, 0])];
        assert_eq!(rank(&rows), 1);
        let ns = nullspace(3, &rows);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            let s: BigInt = v[0].clone() + v[1].clone();
            assert!(s.is_zero());
        }
    }

    #[test]
    fn affine_rank_of_segment() {
        assert_eq!(affine_rank(&[q(&[0, 0]), q(&[1, 1]), q(&[2, 2])]), 1);
        assert_eq!(affine_rank(&[q(&[0, 0]), q(&[1, 0]), q(&[0, 1])]), 2);
    }
}
