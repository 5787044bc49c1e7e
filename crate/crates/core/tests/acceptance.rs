//! One line per acceptance criterion. Exits nonzero if any fails.

use std::f64::consts::PI;
use std::time::Instant;

use hgreen::suite::{
    builtin_groups, check_abelian_traces, check_center_manifold_trace, check_flux_calibration, check_gamma_harmonicity,
    check_gamma_homogeneity, check_green_harmonicity, check_group_law, check_image_combinatorics,
    check_layer_reduction, check_linear_harmonic, check_nonabelian_trace, check_strip_series, manufactured_error,
    manufactured_half_space, manufactured_strip, CheckResult, Profile, Status, DEFAULT_SEED,
};
use hgreen::{
    calibrate_c, green_eval, wedge_images, CoordBox, DomainSpec, FundamentalSolutionParams, GroupSpec, Point, Sign,
    TruncationPolicy,
};

struct Line {
    pass: bool,
    detail: String,
}

impl Line {
    fn from_checks(checks: &[CheckResult]) -> Self {
        let pass = checks.iter().all(|c| c.status == Status::Pass);
        let detail = checks
            .iter()
            .map(|c| format!("{} {:?} {:.3e} <= {:.1e}", c.name, c.status, c.metric, c.threshold))
            .collect::<Vec<_>>()
            .join("; ");
        Self { pass, detail }
    }

    fn and(mut self, pass: bool, detail: String) -> Self {
        self.pass &= pass;
        self.detail = format!("{}; {detail}", self.detail);
        self
    }

    fn error(e: hgreen::Error) -> Self {
        Self { pass: false, detail: format!("error: {e}") }
    }
}

fn run(f: impl FnOnce() -> hgreen::Result<Line>) -> Line {
    f().unwrap_or_else(Line::error)
}

fn calibrated(spec: &GroupSpec) -> hgreen::Result<f64> {
    let bx = CoordBox::symmetric(spec, 1.0, 0.25)?;
    Ok(calibrate_c(spec, &bx, 24)?.c)
}

fn criterion_4() -> hgreen::Result<Line> {
    let start = Instant::now();
    let line = Line::from_checks(&check_flux_calibration(Profile::Full)?);
    let frozen = [
        ("abelian3", GroupSpec::abelian(3)?, 1.0 / (4.0 * PI), 1e-4),
        ("heisenberg1", GroupSpec::heisenberg(1)?, 1.0 / (2.0 * PI), 1e-6),
        ("heisenberg2", GroupSpec::heisenberg(2)?, 1.0 / PI.powi(3), 1e-6),
    ];
    let mut line = line;
    for (name, g, c, tol) in frozen {
        let got = calibrated(&g)?;
        line = line.and((got - c).abs() <= tol, format!("{name} c {got:.10} vs {c:.10}"));
    }
    let secs = start.elapsed().as_secs_f64();
    Ok(line.and(secs <= 120.0, format!("runtime {secs:.1}s <= 120s")))
}

fn criterion_5() -> hgreen::Result<Line> {
    let line = Line::from_checks(&[check_image_combinatorics(DEFAULT_SEED)?]);
    let g = GroupSpec::quaternionic();
    let zeta = Point::new(vec![0.3, 0.7, 1.1, 1.9], vec![0.2, -0.4, 0.5]);
    let mut ok = true;
    for l in 1..=4usize {
        let images = wedge_images(&g, &zeta, &DomainSpec::wedge(l))?;
        let mut expect: Vec<(Vec<f64>, f64)> = (0..1u32 << l)
            .map(|mask| {
                let mut x = zeta.x.clone();
                for (a, xa) in x.iter_mut().enumerate().take(l) {
                    if mask & (1 << a) != 0 {
                        *xa = -*xa;
                    }
                }
                (x, if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 })
            })
            .collect();
        let mut got: Vec<(Vec<f64>, f64)> = images
            .iter()
            .map(|im| {
                assert_eq!(im.point.t, zeta.t);
                (im.point.x.clone(), if im.sign == Sign::Plus { 1.0 } else { -1.0 })
            })
            .collect();
        let key = |v: &(Vec<f64>, f64)| format!("{:?}", v);
        expect.sort_by_key(key);
        got.sort_by_key(key);
        ok &= expect == got;
    }
    Ok(line.and(ok, "inline subset enumeration l = 1..4".into()))
}

fn criterion_9() -> hgreen::Result<Line> {
    let start = Instant::now();
    let mut checks = Vec::new();
    for (name, case) in
        [("manufactured_half_space", manufactured_half_space()?), ("manufactured_strip", manufactured_strip()?)]
    {
        let (err, _) = manufactured_error(&case)?;
        checks.push(CheckResult::bounded(name, err, 1e-3, ""));
    }
    checks.push(check_abelian_traces(DEFAULT_SEED)?);
    let secs = start.elapsed().as_secs_f64();
    Ok(Line::from_checks(&checks).and(secs <= 300.0, format!("runtime {secs:.1}s <= 300s")))
}

fn criterion_10() -> hgreen::Result<Line> {
    let checks = check_nonabelian_trace()?;
    let pinned = checks.iter().find(|c| c.name == "nonabelian_trace_pinned").expect("pinned check");
    let g = GroupSpec::heisenberg(1)?;
    let xi = ([0.0, 1.0], 1.0);
    let fourth = |zx: [f64; 2], zt: f64| {
        let dx = [xi.0[0] - zx[0], xi.0[1] - zx[1]];
        let bil: f64 =
            (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| g.entry(0, i, j) * zx[j] * xi.0[i]).sum();
        let dt = xi.1 - zt - 0.5 * bil;
        (dx[0] * dx[0] + dx[1] * dx[1]).powi(2) + 16.0 * dt * dt
    };
    let (direct, image) = (fourth([1.0, 0.0], 0.0), fourth([-1.0, 0.0], 0.0));
    let c = 1.0 / (2.0 * PI);
    let p = FundamentalSolutionParams::new(&g, c)?;
    let trace = green_eval(
        &p,
        &g,
        &DomainSpec::half_space(0),
        &Point::new(xi.0.to_vec(), vec![xi.1]),
        &Point::new(vec![1.0, 0.0], vec![0.0]),
        TruncationPolicy::default(),
    )?;
    let expect = c * (40f64.powf(-0.5) - 8f64.powf(-0.5));
    let ok = (direct - 40.0).abs() <= 1e-12
        && (image - 8.0).abs() <= 1e-12
        && (trace - expect).abs() <= 1e-12 * expect.abs()
        && pinned.status == Status::Reported;
    Ok(Line {
        pass: ok,
        detail: format!(
            "gauge^4 {direct} and {image}; trace {trace:.12e} vs {expect:.12e}; status {:?}",
            pinned.status
        ),
    })
}

type Criterion = (&'static str, Box<dyn FnOnce() -> Line>);

fn main() {
    let seed = DEFAULT_SEED;
    let criteria: Vec<Criterion> = vec![
        ("group law", Box::new(move || run(|| Ok(Line::from_checks(&[check_group_law(seed, 1000)?]))))),
        ("gamma homogeneity", Box::new(move || run(|| Ok(Line::from_checks(&[check_gamma_homogeneity(seed, 100)?]))))),
        ("gamma harmonicity", Box::new(move || run(|| Ok(Line::from_checks(&[check_gamma_harmonicity(seed, 50)?]))))),
        ("flux calibration", Box::new(|| run(criterion_4))),
        ("image combinatorics", Box::new(|| run(criterion_5))),
        ("green harmonicity", Box::new(move || run(|| Ok(Line::from_checks(&[check_green_harmonicity(seed, 25)?]))))),
        ("strip series", Box::new(move || run(|| Ok(Line::from_checks(&check_strip_series(seed, 50)?))))),
        (
            "center-manifold trace",
            Box::new(move || run(|| Ok(Line::from_checks(&[check_center_manifold_trace(seed)?])))),
        ),
        ("abelian end-to-end", Box::new(|| run(criterion_9))),
        ("non-abelian trace diagnostic", Box::new(|| run(criterion_10))),
        (
            "linear harmonic reference",
            Box::new(move || run(|| Ok(Line::from_checks(&[check_linear_harmonic(seed, 100)?])))),
        ),
        ("layer reduction", Box::new(move || run(|| Ok(Line::from_checks(&[check_layer_reduction(seed, 100)?]))))),
    ];
    let groups: Vec<_> = builtin_groups().into_iter().map(|(n, _)| n).collect();
    println!("acceptance: seed {seed}, groups {}", groups.join(", "));
    let mut failed = 0;
    for (i, (name, f)) in criteria.into_iter().enumerate() {
        let line = f();
        println!("criterion {:2} {}: {name}: {}", i + 1, if line.pass { "PASS" } else { "FAIL" }, line.detail);
        failed += usize::from(!line.pass);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
