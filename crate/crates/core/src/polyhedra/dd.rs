//! Exact double-description enumeration for cones `{x : A x >= 0}`.
//!
//! Vectors are kept as primitive integer vectors; every combination step is
//! an integer combination followed by division by the content, so no
//! rational arithmetic is needed inside the loop.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

pub(crate) type IVec = Vec<BigInt>;

pub(crate) fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Divides out the gcd of the entries. Zero vectors are returned unchanged.
pub(crate) fn primitive(mut v: IVec) -> IVec {
    let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if !g.is_zero() && g != BigInt::from(1) {
        for x in v.iter_mut() {
            *x /= &g;
        }
    }
    v
}

fn combine(ca: &BigInt, a: &[BigInt], cb: &BigInt, b: &[BigInt]) -> IVec {
    primitive(a.iter().zip(b).map(|(x, y)| ca * x + cb * y).collect())
}

fn is_zero_vec(v: &[BigInt]) -> bool {
    v.iter().all(Zero::is_zero)
}

/// Minimal generators of a polyhedral cone: a basis of its lineality space
/// plus one primitive vector per extreme ray of the pointed quotient.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub(crate) struct ConeGenerators {
    pub lines: Vec<IVec>,
    pub rays: Vec<IVec>,
}

#[derive(Clone)]
struct Ray {
    v: IVec,
    /// Indices of processed constraints that are tight on `v`.
    zero: Vec<u64>,
}

fn bit_set(set: &mut Vec<u64>, i: usize) {
    let w = i / 64;
    if set.len() <= w {
        set.resize(w + 1, 0);
    }
    set[w] |= 1 << (i % 64);
}

fn intersect(a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter().zip(b).map(|(x, y)| x & y).collect()
}

fn subset(a: &[u64], b: &[u64]) -> bool {
    a.iter().enumerate().all(|(i, x)| x & !b.get(i).copied().unwrap_or(0) == 0)
}

/// Generators of `{x in Z^dim : row . x >= 0 for every row}`.
pub(crate) fn cone_generators(dim: usize, rows: &[IVec]) -> ConeGenerators {
    let mut lines: Vec<IVec> = (0..dim)
        .map(|i| (0..dim).map(|j| BigInt::from((i == j) as i32)).collect())
        .collect();
    let mut rays: Vec<Ray> = Vec::new();

    for (idx, a) in rows.iter().enumerate() {
        debug_assert_eq!(a.len(), dim);
        if is_zero_vec(a) {
            for r in rays.iter_mut() {
                bit_set(&mut r.zero, idx);
            }
            continue;
        }
        let values: Vec<BigInt> = lines.iter().map(|l| dot(a, l)).collect();
        if let Some(pivot) = values.iter().position(|v| !v.is_zero()) {
            // A line leaves the hyperplane: use it to project everything
            // else onto `a . x = 0`, then keep its positive half as a ray.
            let l = lines[pivot].clone();
            let vl = values[pivot].clone();
            let s = if vl.is_positive() { BigInt::from(1) } else { BigInt::from(-1) };
            let abs_vl = vl.abs();
            let mut new_lines = Vec::with_capacity(lines.len() - 1);
            for (k, line) in lines.iter().enumerate() {
                if k == pivot {
                    continue;
                }
                if values[k].is_zero() {
                    new_lines.push(line.clone());
                } else {
                    new_lines.push(combine(&vl, line, &(-&values[k]), &l));
                }
            }
            for r in rays.iter_mut() {
                let ar = dot(a, &r.v);
                if !ar.is_zero() {
                    r.v = combine(&abs_vl, &r.v, &(-(&s * &ar)), &l);
                }
                bit_set(&mut r.zero, idx);
            }
            let mut zero = Vec::new();
            for j in 0..idx {
                bit_set(&mut zero, j);
            }
            rays.push(Ray { v: l.iter().map(|x| x * &s).collect(), zero });
            lines = new_lines;
            continue;
        }

        let vals: Vec<BigInt> = rays.iter().map(|r| dot(a, &r.v)).collect();
        let mut next: Vec<Ray> = Vec::new();
        for (r, v) in rays.iter().zip(&vals) {
            if !v.is_negative() {
                let mut r = r.clone();
                if v.is_zero() {
                    bit_set(&mut r.zero, idx);
                }
                next.push(r);
            }
        }
        for (i, (p, vp)) in rays.iter().zip(&vals).enumerate() {
            if !vp.is_positive() {
                continue;
            }
            for (j, (q, vq)) in rays.iter().zip(&vals).enumerate() {
                if !vq.is_negative() {
                    continue;
                }
                let common = intersect(&p.zero, &q.zero);
                let adjacent = rays
                    .iter()
                    .enumerate()
                    .all(|(k, r)| k == i || k == j || !subset(&common, &r.zero));
                if !adjacent {
                    continue;
                }
                let v = combine(vp, &q.v, &(-vq), &p.v);
                let mut zero = common;
                bit_set(&mut zero, idx);
                next.push(Ray { v, zero });
            }
        }
        rays = next;
    }

    let mut rays: Vec<IVec> = rays.into_iter().map(|r| r.v).filter(|v| !is_zero_vec(v)).collect();
    rays.sort();
    rays.dedup();
    let mut lines: Vec<IVec> = lines.into_iter().map(primitive).collect();
    for l in lines.iter_mut() {
        if l.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
            for x in l.iter_mut() {
                *x = -&*x;
            }
        }
    }
    ConeGenerators { lines, rays }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(v: &[i64]) -> IVec {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn positive_orthant() {
        let g = cone_generators(2, &[iv(&[1, 0]), iv(&[0, 1])]);
        assert!(g.lines.is_empty());
        assert_eq!(g.rays, vec![iv(&[0, 1]), iv(&[1, 0])]);
    }

    #[test]
    fn halfplane_has_lineality() {
        let g = cone_generators(2, &[iv(&[1, 1])]);
        assert_eq!(g.lines, vec![iv(&[1, -1])]);
        assert_eq!(g.rays.len(), 1);
        assert!(dot(&g.rays[0], &iv(&[1, 1])) > BigInt::zero());
    }

    #[test]
    fn square_cone() {
        // Homogenized square |x|,|y| <= t.
        let rows = [iv(&[1, -1, 0]), iv(&[1, 1, 0]), iv(&[1, 0, -1]), iv(&[1, 0, 1])];
        let g = cone_generators(3, &rows);
        assert!(g.lines.is_empty());
        assert_eq!(g.rays.len(), 4);
        for r in &g.rays {
            assert_eq!(r[0], BigInt::from(1));
            assert_eq!(r[1].abs(), BigInt::from(1));
            assert_eq!(r[2].abs(), BigInt::from(1));
        }
    }

    #[test]
    fn redundant_constraints_do_not_add_rays() {
        let rows = [iv(&[1, 0]), iv(&[0, 1]), iv(&[1, 1]), iv(&[2, 1])];
        let g = cone_generators(2, &rows);
        assert_eq!(g.rays.len(), 2);
    }

    #[test]
    fn cube_cone_in_four_dims() {
        let mut rows = Vec::new();
        for i in 1..4 {
            let mut a = vec![1i64, 0, 0, 0];
            a[i] = 1;
            rows.push(iv(&a));
            a[i] = -1;
            rows.push(iv(&a));
        }
        let g = cone_generators(4, &rows);
        assert_eq!(g.rays.len(), 8);
    }
}
