mod common;

use num_bigint::BigInt;
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::Config;
use tropiscope::expr::{parse_expression, Expr, Expression, LaurentPolynomial};
use tropiscope::geometry::{direction_of, log_map, rational_slope_of, rho, rho_inverse, RationalSlope};
use tropiscope::phase::{detect_geodesic_circles, PhaseCloud, CIRCLE_TOL};
use tropiscope::polyhedra::{
    balance_check, halfspace_intersection, newton_bound_from_vertices, tropical_limit_set, RationalHalfspace,
    SphericalComplex,
};
use tropiscope::raster::{rasterize_points, rho_disk_image, rho_inside_disk};
use tropiscope::Rational;

fn leaf(n: usize, negative_powers: bool) -> BoxedStrategy<Expr> {
    let lo = if negative_powers { -3 } else { 1 };
    prop_oneof![
        (0u32..16).prop_map(|k| Expr::Const(Complex64::new(k as f64 * 0.25, 0.0))),
        (0..n).prop_map(Expr::Var),
        (0..n, lo..=3i32).prop_map(|(i, k)| Expr::Pow(Box::new(Expr::Var(i)), k)),
    ]
    .boxed()
}

fn arb_expr(n: usize, transcendental: bool, negative_powers: bool) -> BoxedStrategy<Expr> {
    leaf(n, negative_powers)
        .prop_recursive(3, 20, 3, move |inner| {
            let mut options = vec![
                prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::Sum).boxed(),
                prop::collection::vec(inner.clone(), 2..3).prop_map(Expr::Product).boxed(),
                inner.clone().prop_map(|e| Expr::Neg(Box::new(e))).boxed(),
                (inner.clone(), 0i32..3).prop_map(|(e, k)| Expr::Pow(Box::new(e), k)).boxed(),
            ];
            if transcendental {
                options.push(inner.clone().prop_map(|e| Expr::Exp(Box::new(e))).boxed());
                options.push(inner.clone().prop_map(|e| Expr::Sin(Box::new(e))).boxed());
                options.push(inner.prop_map(|e| Expr::Cos(Box::new(e))).boxed());
            }
            proptest::strategy::Union::new(options)
        })
        .boxed()
}

fn torus_point(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(0.0..std::f64::consts::TAU, n).prop_map(|a| a.into_iter().map(Complex64::cis).collect())
}

fn arb_poly(n: usize) -> impl Strategy<Value = LaurentPolynomial> {
    prop::collection::vec((prop::collection::vec(-3i64..=3, n), -2.0..2.0f64), 1..6).prop_map(move |terms| {
        LaurentPolynomial::from_terms(n, terms.into_iter().map(|(e, c)| (e, Complex64::new(c, 0.0))))
    })
}

fn vertex_set(p: &tropiscope::polyhedra::RationalConvexPolyhedron) -> Vec<Vec<Rational>> {
    let mut v = p.vertices().to_vec();
    v.sort();
    v
}

fn coefficient_gap(a: &LaurentPolynomial, b: &LaurentPolynomial) -> f64 {
    let mut gap: f64 = 0.0;
    for (e, c) in a.terms() {
        let d = b.coefficient(e).unwrap_or_default();
        gap = gap.max((c - d).norm() / (1.0 + c.norm()));
    }
    for (e, c) in b.terms() {
        if a.coefficient(e).is_none() {
            gap = gap.max(c.norm() / (1.0 + c.norm()));
        }
    }
    gap
}

/// Whether the nonzero vectors positively span their linear span in the plane.
fn positively_spans_2d(s: &[[i64; 2]]) -> bool {
    let cross = |a: [i64; 2], b: [i64; 2]| a[0] * b[1] - a[1] * b[0];
    let full = s.iter().any(|&a| s.iter().any(|&b| cross(a, b) != 0));
    if full {
        s.iter().all(|&a| s.iter().any(|&b| cross(a, b) > 0) && s.iter().any(|&b| cross(a, b) < 0))
    } else {
        s.iter().all(|&a| s.iter().any(|&b| a[0] * b[0] + a[1] * b[1] < 0))
    }
}

proptest! {
    #![proptest_config(Config::with_cases(200))]

    #[test]
    fn printing_round_trips(e in arb_expr(3, true, true)) {
        let f = Expression::new(e, 3).unwrap();
        let g = parse_expression(&f.to_string(), 3).unwrap();
        prop_assert_eq!(g.root(), f.root());
    }

    #[test]
    fn laurent_form_agrees_with_evaluation(e in arb_expr(2, false, true), z in torus_point(2)) {
        let f = Expression::new(e, 2).unwrap();
        let p = f.to_laurent().unwrap();
        let direct = f.eval(&z).unwrap();
        let via = p.eval(&z);
        let scale = 1.0 + p.terms().map(|(_, c)| c.norm()).sum::<f64>();
        prop_assert!((direct - via).norm() <= 1e-10 * scale);
    }

    #[test]
    fn series_truncations_nest(e in arb_expr(2, true, false), d in 0u32..4, extra in 1u32..3) {
        let f = Expression::new(e, 2).unwrap();
        if let (Ok(low), Ok(high)) = (f.truncate_series(d), f.truncate_series(d + extra)) {
            prop_assert!(coefficient_gap(&high.restrict(d), &low.poly) <= 1e-10);
        }
    }

    #[test]
    fn newton_polytope_ignores_scalars_and_follows_shifts(
        p in arb_poly(2),
        c in 0.1..5.0f64,
        beta in prop::collection::vec(-4i64..=4, 2),
    ) {
        prop_assume!(!p.is_zero());
        let base = p.newton_polytope().unwrap();
        prop_assert_eq!(vertex_set(&p.scale(Complex64::new(-c, c)).newton_polytope().unwrap()), vertex_set(&base));
        let mut moved: Vec<Vec<Rational>> = base
            .vertices()
            .iter()
            .map(|v| v.iter().zip(&beta).map(|(x, b)| x + Rational::from_integer(BigInt::from(*b))).collect())
            .collect();
        moved.sort();
        prop_assert_eq!(vertex_set(&p.shift(&beta).newton_polytope().unwrap()), moved);
    }

    #[test]
    fn log_map_is_multiplicative(
        a in prop::collection::vec((-20.0..20.0f64, -3.0..3.0f64), 3),
        b in prop::collection::vec((-20.0..20.0f64, -3.0..3.0f64), 3),
    ) {
        let z: Vec<Complex64> = a.iter().map(|&(r, t)| Complex64::from_polar(r.exp(), t)).collect();
        let w: Vec<Complex64> = b.iter().map(|&(r, t)| Complex64::from_polar(r.exp(), t)).collect();
        let zw: Vec<Complex64> = z.iter().zip(&w).map(|(x, y)| x * y).collect();
        let (lz, lw, lzw) = (log_map(&z), log_map(&w), log_map(&zw));
        for j in 0..3 {
            prop_assert!((lzw[j] - lz[j] - lw[j]).abs() <= 1e-9);
        }
    }

    #[test]
    fn rho_stays_inside_and_inverts(x in prop::collection::vec(-1e6..1e6f64, 1..5)) {
        let y = rho(&x);
        prop_assert!(y.iter().map(|v| v * v).sum::<f64>().sqrt() < 1.0);
        let back = rho_inverse(&y).unwrap();
        let scale = x.iter().map(|v| v.abs()).fold(1.0, f64::max);
        for (a, b) in back.iter().zip(&x) {
            prop_assert!((a - b).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn direction_ignores_positive_scale(
        x in prop::collection::vec(-100.0..100.0f64, 2..5),
        s in 1e-3..1e3f64,
    ) {
        prop_assume!(x.iter().any(|v| v.abs() > 1e-3));
        let scaled: Vec<f64> = x.iter().map(|v| v * s).collect();
        let (a, b) = (direction_of(&x).unwrap(), direction_of(&scaled).unwrap());
        for (p, q) in a.as_slice().iter().zip(b.as_slice()) {
            prop_assert!((p - q).abs() <= 1e-12);
        }
    }

    #[test]
    fn halfspace_descriptions_agree(
        rows in prop::collection::vec((prop::collection::vec(-3i64..=3, 3), -4i64..=4), 1..6),
    ) {
        let mut hs: Vec<RationalHalfspace> = Vec::new();
        for j in 0..3 {
            let mut e = vec![0i64; 3];
            e[j] = 1;
            hs.push(RationalHalfspace::from_ints(&e, 5).unwrap());
            e[j] = -1;
            hs.push(RationalHalfspace::from_ints(&e, 5).unwrap());
        }
        for (n, b) in &rows {
            if let Ok(h) = RationalHalfspace::from_ints(n, *b) {
                hs.push(h);
            }
        }
        let p = halfspace_intersection(3, &hs).unwrap();
        prop_assume!(!p.is_empty());
        let again = halfspace_intersection(3, &p.rederive_halfspaces().unwrap()).unwrap();
        for v in p.vertices() {
            prop_assert!(again.contains(v));
        }
        for v in again.vertices() {
            prop_assert!(hs.iter().all(|h| h.contains(v)));
        }
        prop_assert!(again.rays().is_empty() && again.lines().is_empty());
    }

    #[test]
    fn tropical_vertices_are_rational_and_balanced(p in arb_poly(2), q in arb_poly(3)) {
        for p in [p, q] {
            let Ok(c) = tropical_limit_set(&p) else { continue };
            if c.cells.is_empty() {
                continue;
            }
            for v in c.vertices() {
                prop_assert_eq!(v.slopes.len(), 1);
            }
            prop_assert!(balance_check(&c).balanced);
        }
    }

    #[test]
    fn newton_bound_compact_iff_positive_span(s in prop::collection::vec(prop::collection::vec(-3i64..=3, 2), 1..5)) {
        let slopes: Vec<RationalSlope> = s.iter().filter_map(|v| RationalSlope::primitive_of(v)).collect();
        prop_assume!(!slopes.is_empty());
        let verts: Vec<(RationalSlope, f64)> = slopes.iter().map(|u| (u.clone(), -1.0)).collect();
        let bound = newton_bound_from_vertices(&verts).unwrap();
        let ints: Vec<[i64; 2]> = slopes.iter().map(|u| [u.as_slice()[0], u.as_slice()[1]]).collect();
        prop_assert_eq!(bound.compact_in_span, positively_spans_2d(&ints));
    }

    #[test]
    fn tropical_set_of_a_product_is_the_union(p in arb_poly(2), q in arb_poly(2)) {
        let pq = p.mul(&q);
        let (Ok(a), Ok(b), Ok(ab)) = (tropical_limit_set(&p), tropical_limit_set(&q), tropical_limit_set(&pq)) else {
            return Ok(());
        };
        let union = SphericalComplex::new(a.cells.iter().chain(&b.cells).cloned().collect());
        if union.cells.is_empty() {
            prop_assert!(ab.cells.is_empty());
        } else {
            prop_assert!(ab.hausdorff(&union) <= 1e-6);
        }
    }

    #[test]
    fn raster_occupancy_is_monotone(
        a in prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 1..200),
        b in prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 0..200),
    ) {
        let pa: Vec<[f64; 2]> = a.iter().map(|&(x, y)| [x, y]).collect();
        let mut pab = pa.clone();
        pab.extend(b.iter().map(|&(x, y)| [x, y]));
        let bbox = [-8.0, 8.0, -8.0, 8.0];
        let ra = rasterize_points(&pa, bbox, (64, 64), "a").unwrap();
        let rab = rasterize_points(&pab, bbox, (64, 64), "ab").unwrap();
        for row in 0..64 {
            for col in 0..64 {
                prop_assert!(!ra.get(col, row) || rab.get(col, row));
            }
        }
    }

    #[test]
    fn rho_image_lies_in_the_disk(pts in prop::collection::vec((-1e4..1e4f64, -1e4..1e4f64), 1..300)) {
        let p: Vec<[f64; 2]> = pts.iter().map(|&(x, y)| [x, y]).collect();
        let mapped: Vec<[f64; 2]> = p.iter().map(|v| { let r = rho(v); [r[0], r[1]] }).collect();
        prop_assert!(rho_inside_disk(&mapped));
        let img = rho_disk_image(&p, (64, 64), "rho").unwrap();
        for row in 0..64 {
            for col in 0..64 {
                if img.get(col, row) {
                    let (x, y) = img.center(col, row);
                    prop_assert!(x.hypot(y) < 1.0 + 2.0 / 64.0);
                }
            }
        }
    }

    #[test]
    fn circle_detection_ignores_translation(
        shift in prop::collection::vec(0.0..std::f64::consts::TAU, 2),
        off in prop::collection::vec(0.0..std::f64::consts::TAU, 3),
    ) {
        let mut angles = Vec::new();
        let slopes = [[1.0, 1.0], [1.0, 0.0], [0.0, 1.0]];
        for (k, s) in slopes.iter().enumerate() {
            for i in 0..300 {
                let t = i as f64 / 300.0 * std::f64::consts::TAU;
                let base = if s[0] == 0.0 { [off[k], t] } else { [t, t * s[1] + off[k]] };
                angles.push(base.iter().map(|a| a.rem_euclid(std::f64::consts::TAU)).collect());
            }
        }
        let radii = vec![100.0; angles.len()];
        let cloud = PhaseCloud { angles, radii };
        let found = detect_geodesic_circles(&cloud, 1, CIRCLE_TOL);
        let moved = detect_geodesic_circles(&cloud.translated(&shift), 1, CIRCLE_TOL);
        let key = |c: &Vec<tropiscope::phase::GeodesicCircle>| {
            let mut v: Vec<(Vec<i64>, usize)> = c.iter().map(|g| (g.slope.as_slice().to_vec(), g.points)).collect();
            v.sort();
            v
        };
        prop_assert_eq!(found.len(), 3);
        prop_assert_eq!(key(&found), key(&moved));
    }
}

#[test]
fn rational_slopes_are_recovered_exhaustively() {
    let q = 10i64;
    let rng = -q..=q;
    for a in rng.clone() {
        for b in rng.clone() {
            if let Some(s) = RationalSlope::new(vec![a, b]) {
                assert_eq!(rational_slope_of::<f64>(&s.direction(), q, 1e-9), Some(s));
            }
            for c in rng.clone() {
                if let Some(s) = RationalSlope::new(vec![a, b, c]) {
                    assert_eq!(rational_slope_of::<f64>(&s.direction(), q, 1e-9), Some(s));
                }
            }
        }
    }
    for a in rng {
        if let Some(s) = RationalSlope::new(vec![a]) {
            assert_eq!(rational_slope_of::<f64>(&s.direction(), q, 1e-9), Some(s));
        }
    }
}

#[test]
fn random_corpus_is_reproducible() {
    let a = common::corpus(5, 2, 3);
    let b = common::corpus(5, 2, 3);
    assert_eq!(a.iter().map(|x| &x.0).collect::<Vec<_>>(), b.iter().map(|x| &x.0).collect::<Vec<_>>());
}
