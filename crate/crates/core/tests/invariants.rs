use approx::assert_relative_eq;
use proptest::prelude::*;

use hgreen::solver::{volume_potential, QuadratureRule, QuadratureSpec, SupportedField};
use hgreen::{
    gamma_pole, green_eval, reflect, strip_tail_bound, wedge_images, CoordBox, DomainSpec, FnField,
    FundamentalSolutionParams, GroupSpec, Point, Sign, TruncationPolicy,
};

fn groups() -> Vec<GroupSpec> {
    vec![
        GroupSpec::heisenberg(1).unwrap(),
        GroupSpec::heisenberg(2).unwrap(),
        GroupSpec::quaternionic(),
        GroupSpec::abelian(3).unwrap(),
    ]
}

fn point(g: &GroupSpec, c: &[f64]) -> Point {
    Point::from_coords(&c[..g.dim()], g.m())
}

fn coords() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, 7)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_axioms(gi in 0..4usize, a in coords(), b in coords(), c in coords()) {
        let g = &groups()[gi];
        let (p, q, r) = (point(g, &a), point(g, &b), point(g, &c));
        let left = g.compose(&g.compose(&p, &q).unwrap(), &r).unwrap();
        let right = g.compose(&p, &g.compose(&q, &r).unwrap()).unwrap();
        prop_assert!(left.max_abs_diff(&right) < 1e-12);
        let e = g.compose(&p, &g.inverse(&p)).unwrap();
        prop_assert!(e.max_abs_diff(&g.origin()) < 1e-14);
        prop_assert_eq!(g.compose(&g.origin(), &p).unwrap(), p);
    }

    #[test]
    fn dilation_is_an_automorphism(gi in 0..4usize, a in coords(), b in coords(), lambda in 0.1..5.0f64) {
        let g = &groups()[gi];
        let (p, q) = (point(g, &a), point(g, &b));
        let lhs = g.dilate(lambda, &g.compose(&p, &q).unwrap()).unwrap();
        let rhs = g.compose(&g.dilate(lambda, &p).unwrap(), &g.dilate(lambda, &q).unwrap()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-10 * (1.0 + lambda * lambda));
    }

    #[test]
    fn gamma_left_invariant(gi in 0..4usize, a in coords(), b in coords(), h in coords()) {
        let g = &groups()[gi];
        let params = FundamentalSolutionParams::unit(g).unwrap();
        let (xi, zeta, shift) = (point(g, &a), point(g, &b), point(g, &h));
        prop_assume!(xi.max_abs_diff(&zeta) > 0.1);
        let v = gamma_pole(&params, g, &xi, &zeta).unwrap();
        let w = gamma_pole(&params, g, &g.compose(&shift, &xi).unwrap(), &g.compose(&shift, &zeta).unwrap()).unwrap();
        assert_relative_eq!(v, w, max_relative = 1e-10);
    }

    #[test]
    fn reflections_are_commuting_involutions(a in coords(), i in 0..4usize, j in 0..4usize, s in -1.0..1.0f64) {
        let p = Point::from_coords(&a, 4);
        prop_assert_eq!(reflect(&reflect(&p, i, s), i, s).max_abs_diff(&p) < 1e-14, true);
        prop_assume!(i != j);
        prop_assert_eq!(reflect(&reflect(&p, i, s), j, 0.0), reflect(&reflect(&p, j, 0.0), i, s));
    }

    #[test]
    fn wedge_image_signs_cancel(l in 1..=4usize, a in prop::collection::vec(0.1..2.0f64, 4), t in prop::collection::vec(-1.0..1.0f64, 3)) {
        let g = GroupSpec::quaternionic();
        let zeta = Point::new(a, t);
        let images = wedge_images(&g, &zeta, &DomainSpec::wedge(l)).unwrap();
        prop_assert_eq!(images.len(), 1 << l);
        let net: i32 = images.iter().map(|im| if im.sign == Sign::Plus { 1 } else { -1 }).sum();
        prop_assert_eq!(net, 0);
    }

    #[test]
    fn strip_truncation_within_bound(gi in 0..4usize, a in coords(), b in coords(), fx in 0.1..0.9f64, fy in 0.0..1.0f64, width in 0.5..2.0f64, cutoff in 2..10usize) {
        let g = &groups()[gi];
        let params = FundamentalSolutionParams::unit(g).unwrap();
        let domain = DomainSpec::strip(0, width);
        let (mut zeta, mut xi) = (point(g, &a), point(g, &b));
        zeta.x[0] = fx * width;
        xi.x[0] = fy * width;
        prop_assume!(xi.max_abs_diff(&zeta) > 0.05);
        let s1 = green_eval(&params, g, &domain, &xi, &zeta, TruncationPolicy::Fixed { cutoff }).unwrap();
        let s2 = green_eval(&params, g, &domain, &xi, &zeta, TruncationPolicy::Fixed { cutoff: 2 * cutoff }).unwrap();
        let bound = strip_tail_bound(&params, g, &domain, &zeta, &xi, cutoff).unwrap();
        prop_assert!((s1 - s2).abs() <= bound);
    }

    #[test]
    fn abelian_green_is_symmetric(a in prop::collection::vec(0.05..2.0f64, 3), b in prop::collection::vec(0.05..2.0f64, 3), l in 1..=3usize) {
        let g = GroupSpec::abelian(3).unwrap();
        let params = FundamentalSolutionParams::unit(&g).unwrap();
        let domain = DomainSpec::wedge(l);
        let (xi, zeta) = (Point::new(a, vec![]), Point::new(b, vec![]));
        prop_assume!(xi.max_abs_diff(&zeta) > 0.05);
        let u = green_eval(&params, &g, &domain, &xi, &zeta, TruncationPolicy::default()).unwrap();
        let v = green_eval(&params, &g, &domain, &zeta, &xi, TruncationPolicy::default()).unwrap();
        assert_relative_eq!(u, v, max_relative = 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn volume_potential_is_linear(alpha in -3.0..3.0f64, x in 0.3..1.5f64) {
        let g = GroupSpec::heisenberg(1).unwrap();
        let params = FundamentalSolutionParams::unit(&g).unwrap();
        let domain = DomainSpec::half_space(0);
        let support = CoordBox::new(vec![0.0, -1.0, -1.0], vec![2.0, 1.0, 1.0]).unwrap();
        let bump = |p: &Point| (-(p.x[0] - 1.0).powi(2) - p.x[1].powi(2) - p.t[0].powi(2)).exp();
        let f = SupportedField { field: std::sync::Arc::new(FnField::new("f", bump)), support: support.clone() };
        let scaled = SupportedField {
            field: std::sync::Arc::new(FnField::new("alpha f", move |p: &Point| alpha * bump(p))),
            support,
        };
        let quad = QuadratureSpec::uniform(&g, QuadratureRule::Midpoint, 12, 2);
        let xi = Point::new(vec![x, 0.1], vec![0.2]);
        let u = volume_potential(&params, &g, &domain, &f, &xi, &quad).unwrap();
        let v = volume_potential(&params, &g, &domain, &scaled, &xi, &quad).unwrap();
        assert_relative_eq!(v, alpha * u, epsilon = 1e-12, max_relative = 1e-12);
    }
}
