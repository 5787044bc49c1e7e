use std::f64::consts::PI;
use std::sync::Arc;

use hgreen::solver::{
    solve, verify_solution, volume_potential, ProblemSpec, QuadratureRule, QuadratureSpec, SupportedField,
};
use hgreen::suite::manufactured_half_space;
use hgreen::{
    calibrate_c, gauge, green_eval, quasi_distance, strip_tail_bound, CoordBox, DomainSpec, FnField,
    FundamentalSolutionParams, GroupSpec, Point, StencilSpec, TruncationPolicy,
};

fn unit_box(g: &GroupSpec) -> CoordBox {
    CoordBox::symmetric(g, 1.0, 0.25).unwrap()
}

#[test]
fn calibrated_constants_match_closed_forms() {
    let h1 =
        calibrate_c(&GroupSpec::heisenberg(1).unwrap(), &unit_box(&GroupSpec::heisenberg(1).unwrap()), 24).unwrap();
    assert!((h1.c - 1.0 / (2.0 * PI)).abs() < 1e-10, "{}", h1.c);
    let g2 = GroupSpec::heisenberg(2).unwrap();
    let h2 = calibrate_c(&g2, &unit_box(&g2), 24).unwrap();
    assert!((h2.c - 1.0 / PI.powi(3)).abs() < 1e-10, "{}", h2.c);
}

#[test]
fn calibration_self_converges_on_h1() {
    let g = GroupSpec::heisenberg(1).unwrap();
    let coarse = calibrate_c(&g, &unit_box(&g), 12).unwrap().c;
    let fine = calibrate_c(&g, &unit_box(&g), 24).unwrap().c;
    assert!((coarse - fine).abs() < 1e-5);
}

#[test]
fn quasi_distance_examples() {
    let g = GroupSpec::heisenberg(1).unwrap();
    let p = FundamentalSolutionParams::unit(&g).unwrap();
    let xi = Point::new(vec![0.0, 1.0], vec![1.0]);
    let zeta = Point::new(vec![1.0, 0.0], vec![0.0]);
    let d = quasi_distance(&p, &g, &xi, &zeta).unwrap();
    assert!((d - 40f64.powf(0.25)).abs() < 1e-14);
    assert!((quasi_distance(&p, &g, &zeta, &xi).unwrap() - d).abs() < 1e-14);
    assert_eq!(quasi_distance(&p, &g, &xi, &xi).unwrap(), 0.0);
    let q = Point::new(vec![0.3, -0.8], vec![0.45]);
    for lambda in [0.5, 2.0, 5.0] {
        let a = gauge(&g, &g.dilate(lambda, &q).unwrap()).unwrap().value;
        let b = lambda * gauge(&g, &q).unwrap().value;
        assert!((a - b).abs() < 1e-13 * b);
    }
}

#[test]
fn strip_bound_is_monotone_and_dominates() {
    let g = GroupSpec::heisenberg(1).unwrap();
    let p = FundamentalSolutionParams::unit(&g).unwrap();
    let domain = DomainSpec::strip(0, 1.0);
    let zeta = Point::new(vec![0.3, 0.2], vec![-0.1]);
    let xi = Point::new(vec![0.8, -0.4], vec![0.5]);
    let bounds: Vec<f64> = (2..20).map(|j| strip_tail_bound(&p, &g, &domain, &zeta, &xi, j).unwrap()).collect();
    assert!(bounds.windows(2).all(|w| w[1] < w[0]));
    for cutoff in [2usize, 3, 5, 8] {
        let s1 = green_eval(&p, &g, &domain, &xi, &zeta, TruncationPolicy::Fixed { cutoff }).unwrap();
        let s3 = green_eval(&p, &g, &domain, &xi, &zeta, TruncationPolicy::Fixed { cutoff: 3 * cutoff }).unwrap();
        assert!((s1 - s3).abs() <= bounds[cutoff - 2]);
    }
}

#[test]
fn tolerance_mode_meets_its_target() {
    let g = GroupSpec::quaternionic();
    let p = FundamentalSolutionParams::unit(&g).unwrap();
    let domain = DomainSpec::strip(1, 1.5);
    let zeta = Point::new(vec![0.1, 0.7, -0.2, 0.4], vec![0.1, 0.0, -0.3]);
    let xi = Point::new(vec![-0.5, 0.2, 0.3, 0.0], vec![0.2, 0.4, 0.1]);
    let tol = 1e-8;
    let v = green_eval(&p, &g, &domain, &xi, &zeta, TruncationPolicy::Tolerance { tol }).unwrap();
    let reference = green_eval(&p, &g, &domain, &xi, &zeta, TruncationPolicy::Fixed { cutoff: 4000 }).unwrap();
    let principal = hgreen::gamma_pole(&p, &g, &xi, &zeta).unwrap();
    assert!((v - reference).abs() <= tol * principal.abs());
}

fn gaussian_source(g: &GroupSpec) -> SupportedField {
    SupportedField {
        field: FnField::shared("f", move |q: &Point| {
            let r2: f64 = (q.x[0] - 1.0).powi(2) + q.x[1..].iter().chain(&q.t).map(|v| v * v).sum::<f64>();
            (-r2 / (2.0 * 0.15 * 0.15)).exp()
        }),
        support: CoordBox::new(
            [vec![0.1], vec![-0.9; g.dim() - 1]].concat(),
            [vec![1.9], vec![0.9; g.dim() - 1]].concat(),
        )
        .unwrap(),
    }
}

#[test]
fn abelian_volume_potential_converges_at_second_order() {
    let g = GroupSpec::abelian(3).unwrap();
    let p = FundamentalSolutionParams::new(&g, 1.0 / (4.0 * PI)).unwrap();
    let domain = DomainSpec::half_space(0);
    let f = gaussian_source(&g);
    let xi = Point::new(vec![0.6, 0.13, -0.07], vec![]);
    let v: Vec<f64> = [20usize, 40, 80, 160]
        .iter()
        .map(|&n| {
            let quad = QuadratureSpec::uniform(&g, QuadratureRule::Midpoint, n, 2);
            volume_potential(&p, &g, &domain, &f, &xi, &quad).unwrap()
        })
        .collect();
    let ratios: Vec<f64> = v.windows(3).map(|w| (w[1] - w[0]).abs() / (w[2] - w[1]).abs()).collect();
    assert!(ratios.iter().all(|&r| r > 3.0), "successive differences shrink by {ratios:?}");
}

#[test]
fn h1_half_space_solve_reports_diagnostics() {
    let g = GroupSpec::heisenberg(1).unwrap();
    let p = FundamentalSolutionParams::new(&g, 1.0 / (2.0 * PI)).unwrap();
    let problem = ProblemSpec { domain: DomainSpec::half_space(0), f: Some(gaussian_source(&g)), phi: Vec::new() };
    let quad = QuadratureSpec::uniform(&g, QuadratureRule::Midpoint, 24, 2);
    let points = vec![Point::new(vec![1.0, 0.0], vec![0.0]), Point::new(vec![0.7, 0.2], vec![0.1])];
    let report = solve(&p, &g, &problem, &points, &quad).unwrap();
    assert!(report.values.iter().all(|v| v.is_finite() && *v < 0.0));
    assert!(report.self_convergence.unwrap().is_finite());
    assert!(report.pde_residual.max_abs.is_finite());
    assert_eq!(report.boundary_offset, 0.0);
}

#[test]
fn manufactured_exact_field_has_small_residual() {
    let case = manufactured_half_space().unwrap();
    let g = GroupSpec::abelian(3).unwrap();
    let f = case.problem.f.as_ref().unwrap().field.clone();
    let fmax = case.points.iter().map(|q| f.eval(q).abs()).fold(0.0, f64::max);
    let report =
        verify_solution(&g, &case.problem, case.exact.as_ref(), &case.points, StencilSpec::new(1e-3).unwrap()).unwrap();
    assert!(report.pde_residual.max_abs <= 1e-2 * fmax);
    assert!(report.boundary_mismatch < 1e-15);
}

#[test]
fn zero_problem_verifies_to_zero() {
    let g = GroupSpec::heisenberg(1).unwrap();
    let zero = Arc::new(FnField::new("0", |_: &Point| 0.0));
    let points = vec![Point::new(vec![0.5, 0.0], vec![0.3])];
    let report = verify_solution(
        &g,
        &ProblemSpec::zero(DomainSpec::half_space(0)),
        zero.as_ref(),
        &points,
        StencilSpec::default(),
    )
    .unwrap();
    assert_eq!(report.pde_residual.max_abs, 0.0);
    assert_eq!(report.boundary_mismatch, 0.0);
}
