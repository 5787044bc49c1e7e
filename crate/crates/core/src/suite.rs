//! Property suite over the built-in groups. Every check is seeded and
//! deterministic; results are ordered by check name.
//!
//! Checks with status [`Status::Reported`] record a measurement without a
//! pass/fail verdict (boundary traces and symmetry on non-abelian groups).

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::{calibrate_c, flux, gamma_pole, gauge, CoordBox, FundamentalSolutionParams};
use crate::group::{GroupSpec, Point};
use crate::images::{
    boundary_trace_scan, green_eval, green_symmetry_check, strip_pair, strip_tail_bound, wedge_images, BoundaryGrid,
    DomainSpec, Face, Sign, TruncationPolicy,
};
use crate::numerics::linspace;
use crate::operator::{apply_sublaplacian, harmonicity_residual, FnField, ScalarField, StencilSpec};
use crate::solver::{
    layer_kernel, layer_kernel_full_contraction, solve, verify_solution, ProblemSpec, QuadratureRule, QuadratureSpec,
    SupportedField,
};

pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Reported,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub status: Status,
    pub metric: f64,
    pub threshold: f64,
    pub note: String,
}

impl CheckResult {
    /// Pass iff `metric <= threshold`.
    pub fn bounded(name: &str, metric: f64, threshold: f64, note: impl Into<String>) -> Self {
        let status = if metric <= threshold { Status::Pass } else { Status::Fail };
        Self { name: name.into(), status, metric, threshold, note: note.into() }
    }

    pub fn reported(name: &str, metric: f64, threshold: f64, note: impl Into<String>) -> Self {
        Self { name: name.into(), status: Status::Reported, metric, threshold, note: note.into() }
    }

    fn failed(name: &str, err: &Error) -> Self {
        Self { name: name.into(), status: Status::Fail, metric: f64::NAN, threshold: f64::NAN, note: err.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

impl SuiteResult {
    pub fn new(seed: u64, mut checks: Vec<CheckResult>) -> Self {
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        let passed = checks.iter().all(|c| c.status != Status::Fail);
        Self { seed, checks, passed }
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Every check at full size.
    #[default]
    Full,
    /// Skips the quaternionic flux and the end-to-end solves.
    Quick,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub profile: Profile,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { seed: DEFAULT_SEED, profile: Profile::Full }
    }
}

/// H^1, H^2, the quaternionic group and abelian R^3.
pub fn builtin_groups() -> Vec<(&'static str, GroupSpec)> {
    vec![
        ("heisenberg1", GroupSpec::heisenberg(1).expect("H1")),
        ("heisenberg2", GroupSpec::heisenberg(2).expect("H2")),
        ("quaternionic", GroupSpec::quaternionic()),
        ("abelian3", GroupSpec::abelian(3).expect("R3")),
    ]
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn random_point(r: &mut ChaCha8Rng, spec: &GroupSpec, half: f64) -> Point {
    let coords: Vec<f64> = (0..spec.dim()).map(|_| r.random_range(-half..half)).collect();
    Point::from_coords(&coords, spec.m())
}

/// A point at gauge distance `dist` from `zeta` in a random direction.
fn point_at_distance(r: &mut ChaCha8Rng, spec: &GroupSpec, zeta: &Point, dist: f64) -> Result<Point> {
    loop {
        let eta = random_point(r, spec, 1.0);
        let n = gauge(spec, &eta)?.value;
        if n > 0.1 {
            let eta = spec.dilate(dist / n, &eta)?;
            return spec.compose(zeta, &eta);
        }
    }
}

fn params_for(spec: &GroupSpec) -> Result<FundamentalSolutionParams> {
    if spec.is_abelian() && spec.m() == 3 {
        FundamentalSolutionParams::new(spec, 1.0 / (4.0 * PI))
    } else {
        FundamentalSolutionParams::unit(spec)
    }
}

/// Group axioms and the dilation automorphism.
pub fn check_group_law(seed: u64, samples: usize) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    for (gi, (_, g)) in builtin_groups().iter().enumerate() {
        let mut r = rng(seed, 100 + gi as u64);
        let e = g.origin();
        for _ in 0..samples {
            let (p, q, s) = (random_point(&mut r, g, 2.0), random_point(&mut r, g, 2.0), random_point(&mut r, g, 2.0));
            let lambda = r.random_range(0.1..3.0);
            let lhs = g.compose(&g.compose(&p, &q)?, &s)?;
            let rhs = g.compose(&p, &g.compose(&q, &s)?)?;
            worst = worst.max(lhs.max_abs_diff(&rhs));
            worst = worst.max(g.compose(&p, &e)?.max_abs_diff(&p));
            worst = worst.max(g.compose(&e, &p)?.max_abs_diff(&p));
            let inv = g.inverse(&p);
            worst = worst.max(g.compose(&p, &inv)?.max_abs_diff(&e));
            worst = worst.max(g.compose(&inv, &p)?.max_abs_diff(&e));
            let d1 = g.dilate(lambda, &g.compose(&p, &q)?)?;
            let d2 = g.compose(&g.dilate(lambda, &p)?, &g.dilate(lambda, &q)?)?;
            worst = worst.max(d1.max_abs_diff(&d2));
        }
    }
    Ok(CheckResult::bounded(
        "group_law",
        worst,
        1e-10,
        format!("associativity, identity, inverse, dilation; {samples} samples per group"),
    ))
}

/// `Gamma(delta_l p) = l^{2-Q} Gamma(p)`.
pub fn check_gamma_homogeneity(seed: u64, samples: usize) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    for (gi, (_, g)) in builtin_groups().iter().enumerate() {
        let p = params_for(g)?;
        let q = g.homogeneous_dimension() as f64;
        let mut r = rng(seed, 200 + gi as u64);
        let mut taken = 0;
        while taken < samples {
            let x = random_point(&mut r, g, 2.0);
            if gauge(g, &x)?.value < 0.1 {
                continue;
            }
            taken += 1;
            let base = crate::gauge::gamma(&p, g, &x)?;
            for lambda in [0.5, 2.0, 5.0] {
                let scaled = crate::gauge::gamma(&p, g, &g.dilate(lambda, &x)?)?;
                let expect = lambda.powf(2.0 - q) * base;
                worst = worst.max(((scaled - expect) / expect).abs());
            }
        }
    }
    Ok(CheckResult::bounded("gamma_homogeneity", worst, 1e-10, "relative, lambda in {0.5, 2, 5}"))
}

fn ratio_check(name: &str, ratios: &[(String, f64)]) -> CheckResult {
    let worst = ratios.iter().map(|(_, q)| (q - 4.0).abs()).fold(0.0f64, f64::max);
    let note = ratios.iter().map(|(k, q)| format!("{k}: {q:.4}")).collect::<Vec<_>>().join(", ");
    CheckResult::bounded(name, worst, 0.5, format!("|ratio - 4| for h 1e-3 -> 5e-4; {note}"))
}

/// Stencil residual of `L Gamma_zeta` shrinks by about 4 when `h` halves.
pub fn check_gamma_harmonicity(seed: u64, points: usize) -> Result<CheckResult> {
    let mut ratios = Vec::new();
    for (gi, (name, g)) in builtin_groups().iter().enumerate() {
        if !matches!(*name, "heisenberg1" | "quaternionic") {
            continue;
        }
        let p = params_for(g)?;
        let mut r = rng(seed, 300 + gi as u64);
        let zeta = random_point(&mut r, g, 0.5);
        let samples = (0..points)
            .map(|_| {
                let d = r.random_range(0.5..1.5);
                point_at_distance(&mut r, g, &zeta, d)
            })
            .collect::<Result<Vec<_>>>()?;
        let (pp, gg, zz) = (p, g.clone(), zeta.clone());
        let field = FnField::new("gamma", move |x: &Point| gamma_pole(&pp, &gg, x, &zz).unwrap_or(f64::NAN));
        let rep = harmonicity_residual(g, &field, &samples, StencilSpec::new(1e-3)?)?;
        ratios.push((name.to_string(), rep.reduction_factor().unwrap_or(f64::NAN)));
    }
    Ok(ratio_check("gamma_harmonicity", &ratios))
}

/// Box used for calibration and a second box of different proportions.
pub fn calibration_boxes(spec: &GroupSpec) -> Result<(CoordBox, CoordBox)> {
    let (m, n) = (spec.m(), spec.n());
    let first = CoordBox::symmetric(spec, 1.0, 0.25)?;
    let lo = [vec![-1.2; m], vec![-0.4; n]].concat();
    let hi = [vec![1.6; m], vec![0.5; n]].concat();
    Ok((first, CoordBox::new(lo, hi)?))
}

/// Gauss-Legendre nodes per axis for the flux check.
pub fn calibration_nodes(spec: &GroupSpec) -> usize {
    if spec.dim() > 5 {
        12
    } else {
        24
    }
}

/// Abelian `c = 1/(4 pi)` and flux `-1` on a second box for every group.
pub fn check_flux_calibration(profile: Profile) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let mut worst = 0.0f64;
    let mut notes = Vec::new();
    for (name, g) in builtin_groups() {
        if profile == Profile::Quick && g.dim() > 5 {
            continue;
        }
        let (b1, b2) = calibration_boxes(&g)?;
        let nodes = calibration_nodes(&g);
        let cal = calibrate_c(&g, &b1, nodes)?;
        let p = FundamentalSolutionParams::new(&g, cal.c)?;
        let f2 = flux(&p, &g, &b2, nodes)?;
        worst = worst.max((f2 + 1.0).abs());
        notes.push(format!("{name}: c = {:.15e}", cal.c));
        if g.is_abelian() {
            out.push(CheckResult::bounded(
                "flux_calibration_abelian",
                (cal.c - 1.0 / (4.0 * PI)).abs(),
                1e-4,
                format!("c = {:.15e} against 1/(4 pi)", cal.c),
            ));
        }
    }
    out.push(CheckResult::bounded("flux_second_box", worst, 1e-6, notes.join("; ")));
    Ok(out)
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Wedge images against brute-force subset enumeration.
pub fn check_image_combinatorics(seed: u64) -> Result<CheckResult> {
    let g = GroupSpec::quaternionic();
    let mut r = rng(seed, 500);
    let mut defects = 0usize;
    for l in 1..=4usize {
        for shifted in [false, true] {
            let faces: Vec<Face> = (0..l)
                .map(|axis| Face { axis, offset: if shifted { r.random_range(-1.0..1.0) } else { 0.0 } })
                .collect();
            let mut zeta = random_point(&mut r, &g, 1.0);
            for f in &faces {
                zeta.x[f.axis] = f.offset + r.random_range(0.2..1.5);
            }
            let domain = DomainSpec::shifted_wedge(faces.clone());
            let images = wedge_images(&g, &zeta, &domain)?;
            if images.len() != 1 << l {
                defects += 1;
            }
            // brute force: every subset, reflections applied in a shuffled order
            let mut matched = vec![false; images.len()];
            let mut level_counts = vec![0usize; l + 1];
            for subset in 0..1usize << l {
                let mut members: Vec<usize> = (0..l).filter(|r_| subset >> r_ & 1 == 1).collect();
                for i in (1..members.len()).rev() {
                    members.swap(i, r.random_range(0..=i));
                }
                let mut p = zeta.clone();
                for &i in &members {
                    p.x[faces[i].axis] = 2.0 * faces[i].offset - p.x[faces[i].axis];
                }
                let sign = if members.len().is_multiple_of(2) { Sign::Plus } else { Sign::Minus };
                match images.iter().position(|c| c.point == p && c.sign == sign) {
                    Some(i) if !matched[i] => matched[i] = true,
                    _ => defects += 1,
                }
            }
            for c in &images {
                let moved = (0..g.m()).filter(|&a| c.point.x[a] != zeta.x[a]).count();
                level_counts[moved] += 1;
                if c.sign != if moved % 2 == 0 { Sign::Plus } else { Sign::Minus } {
                    defects += 1;
                }
                if !domain.contains(&c.point) && moved == 0 {
                    defects += 1;
                }
                if moved > 0 && domain.contains(&c.point) {
                    defects += 1;
                }
            }
            for (j, &count) in level_counts.iter().enumerate() {
                if count != binomial(l, j) {
                    defects += 1;
                }
            }
        }
    }
    // level two of the three-face wedge: zeta_{x1x2}, zeta_{x1x3}, zeta_{x3x2}
    let p = params_for(&g)?;
    let domain = DomainSpec::wedge(3);
    let mut zeta = random_point(&mut r, &g, 1.0);
    for a in 0..3 {
        zeta.x[a] = r.random_range(0.2..1.5);
    }
    let xi = random_point(&mut r, &g, 1.0);
    let flip = |axes: &[usize]| {
        let mut q = zeta.clone();
        for &a in axes {
            q.x[a] = -q.x[a];
        }
        q
    };
    let listed = [flip(&[0, 1]), flip(&[0, 2]), flip(&[2, 1])];
    let level_two: Vec<Point> = wedge_images(&g, &zeta, &domain)?
        .into_iter()
        .filter(|c| (0..3).filter(|&a| c.point.x[a] != zeta.x[a]).count() == 2)
        .map(|c| c.point)
        .collect();
    if level_two.len() != 3 || listed.iter().any(|q| !level_two.contains(q)) {
        defects += 1;
    }
    let sum_lib: f64 = level_two.iter().map(|q| gamma_pole(&p, &g, &xi, q)).sum::<Result<f64>>()?;
    let sum_listed: f64 = listed.iter().map(|q| gamma_pole(&p, &g, &xi, q)).sum::<Result<f64>>()?;
    if (sum_lib - sum_listed).abs() > 1e-14 * sum_listed.abs() {
        defects += 1;
    }
    Ok(CheckResult::bounded(
        "image_combinatorics",
        defects as f64,
        0.0,
        "count, level sizes, signs and positions against subset enumeration, l = 1..4",
    ))
}

/// Test domains for a group, each with a pole at distance 1 from its faces.
fn test_domains(spec: &GroupSpec) -> Vec<(&'static str, DomainSpec)> {
    let mut out = vec![("half_space", DomainSpec::half_space(0)), ("quadrant", DomainSpec::quadrant(0, 1))];
    if spec.m() >= 3 {
        out.push(("wedge3", DomainSpec::wedge(3)));
    }
    out.push(("strip", DomainSpec::strip(0, 2.0)));
    out
}

fn pole_for(r: &mut ChaCha8Rng, spec: &GroupSpec, domain: &DomainSpec) -> Point {
    let mut zeta = random_point(r, spec, 0.3);
    for face in domain.boundary_faces() {
        zeta.x[face.axis] = 1.0;
    }
    zeta
}

/// Second-order convergence of the stencil residual of every Green candidate.
pub fn check_green_harmonicity(seed: u64, points: usize) -> Result<CheckResult> {
    let mut ratios = Vec::new();
    let truncation = TruncationPolicy::Fixed { cutoff: 8 };
    for (gi, (name, g)) in builtin_groups().iter().enumerate() {
        if !matches!(*name, "heisenberg1" | "quaternionic") {
            continue;
        }
        let p = params_for(g)?;
        for (di, (dname, domain)) in test_domains(g).into_iter().enumerate() {
            let mut r = rng(seed, 600 + 10 * gi as u64 + di as u64);
            let zeta = pole_for(&mut r, g, &domain);
            let mut samples = Vec::with_capacity(points);
            while samples.len() < points {
                let d = r.random_range(0.5..0.9);
                let xi = point_at_distance(&mut r, g, &zeta, d)?;
                if domain.contains(&xi) && domain.boundary_distance(&xi) >= 0.3 {
                    samples.push(xi);
                }
            }
            let (pp, gg, dd, zz) = (p, g.clone(), domain.clone(), zeta.clone());
            let field = FnField::new("green", move |x: &Point| {
                green_eval(&pp, &gg, &dd, x, &zz, truncation).unwrap_or(f64::NAN)
            });
            let rep = harmonicity_residual(g, &field, &samples, StencilSpec::new(1e-3)?)?;
            ratios.push((format!("{name}/{dname}"), rep.reduction_factor().unwrap_or(f64::NAN)));
        }
    }
    Ok(ratio_check("green_harmonicity", &ratios))
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.abs().ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Truncation bound against `|S_J - S_2J|`, and the decay exponent of the pairs.
pub fn check_strip_series(seed: u64, configs: usize) -> Result<Vec<CheckResult>> {
    let groups = builtin_groups();
    let mut r = rng(seed, 700);
    let mut worst = 0.0f64;
    for _ in 0..configs {
        let (_, g) = &groups[r.random_range(0..groups.len())];
        let p = params_for(g)?;
        let width = r.random_range(0.5..2.0);
        let axis = r.random_range(0..g.m());
        let domain = DomainSpec::strip(axis, width);
        let mut zeta = random_point(&mut r, g, 1.0);
        zeta.x[axis] = r.random_range(0.1..0.9) * width;
        let mut xi = random_point(&mut r, g, 1.0);
        xi.x[axis] = r.random_range(0.0..1.0) * width;
        let cutoff = r.random_range(2..=12usize);
        let s1 = green_eval(&p, g, &domain, &xi, &zeta, TruncationPolicy::Fixed { cutoff })?;
        let s2 = green_eval(&p, g, &domain, &xi, &zeta, TruncationPolicy::Fixed { cutoff: 2 * cutoff })?;
        let bound = strip_tail_bound(&p, g, &domain, &zeta, &xi, cutoff)?;
        worst = worst.max((s1 - s2).abs() / bound);
    }
    let mut out = vec![CheckResult::bounded(
        "strip_tail_bound",
        worst,
        1.0,
        format!("max |S_J - S_2J| / bound over {configs} configurations"),
    )];
    let mut fits = Vec::new();
    let mut dev = 0.0f64;
    for (name, g) in &groups {
        let p = params_for(g)?;
        let domain = DomainSpec::strip(0, 1.0);
        let mut zeta = random_point(&mut r, g, 0.5);
        zeta.x[0] = 0.4;
        let mut xi = random_point(&mut r, g, 0.5);
        xi.x[0] = 0.7;
        let js: Vec<f64> = (0..12).map(|i| (20.0 * 1.25f64.powi(i)).round()).collect();
        let pairs = js.iter().map(|&j| strip_pair(&p, g, &domain, &xi, &zeta, j as i64)).collect::<Result<Vec<_>>>()?;
        let slope = loglog_slope(&js, &pairs);
        let expect = 1.0 - g.homogeneous_dimension() as f64;
        dev = dev.max((slope - expect).abs());
        fits.push(format!("{name}: {slope:.3} vs {expect}"));
    }
    out.push(CheckResult::bounded("strip_pair_decay", dev, 0.3, fits.join(", ")));
    Ok(out)
}

/// Trace relative to the principal term at boundary samples with `x = 0`.
pub fn check_center_manifold_trace(seed: u64) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let mut zero_samples = 0usize;
    for (gi, (_, g)) in builtin_groups().iter().enumerate() {
        let p = params_for(g)?;
        for (di, (_, domain)) in test_domains(g).into_iter().enumerate() {
            let mut r = rng(seed, 800 + 10 * gi as u64 + di as u64);
            let zeta = pole_for(&mut r, g, &domain);
            let (m, n) = (g.m(), g.n());
            let grid = BoundaryGrid {
                lo: [vec![-1.0; m], vec![-1.0; n]].concat(),
                hi: [vec![1.0; m], vec![1.0; n]].concat(),
                counts: [vec![3; m], vec![4; n]].concat(),
            };
            let rep = boundary_trace_scan(&p, g, &domain, &zeta, &grid, TruncationPolicy::default())?;
            zero_samples += rep.samples.iter().filter(|s| s.x.iter().all(|&v| v == 0.0)).count();
            worst = worst.max(rep.zero_subset_relative);
        }
    }
    if zero_samples == 0 {
        return Err(Error::InvalidArgument("no boundary sample on x = 0".into()));
    }
    Ok(CheckResult::bounded(
        "center_manifold_trace",
        worst,
        1e-12,
        format!("|G| / |principal| over {zero_samples} samples with x = 0"),
    ))
}

/// A manufactured problem with known solution.
pub struct Manufactured {
    pub problem: ProblemSpec,
    pub exact: std::sync::Arc<dyn ScalarField>,
    pub points: Vec<Point>,
    pub quad: QuadratureSpec,
}

fn eval_grid(x0: (f64, f64), half: f64) -> Vec<Point> {
    let mut pts = Vec::with_capacity(125);
    for a in linspace(x0.0, x0.1, 5) {
        for b in linspace(-half, half, 5) {
            for c in linspace(-half, half, 5) {
                pts.push(Point::new(vec![a, b, c], vec![]));
            }
        }
    }
    pts
}

/// `u* = x_1 exp(-|x|^2 / (2 s^2))`, `s = 0.4`, on `{x_1 > 0}` in `R^3`;
/// `f = Delta u* = u* (|x|^2 / s^4 - 5 / s^2)`, `phi = 0`. Support box
/// `[0, 5s] x [-5s, 5s]^2`, midpoint grid `56 x 112 x 112`.
pub fn manufactured_half_space() -> Result<Manufactured> {
    let g = GroupSpec::abelian(3)?;
    let s = 0.4;
    let exact = FnField::shared("u*", move |q: &Point| {
        let r2: f64 = q.x.iter().map(|v| v * v).sum();
        q.x[0] * (-r2 / (2.0 * s * s)).exp()
    });
    let f = FnField::shared("f", move |q: &Point| {
        let r2: f64 = q.x.iter().map(|v| v * v).sum();
        q.x[0] * (-r2 / (2.0 * s * s)).exp() * (r2 / s.powi(4) - 5.0 / (s * s))
    });
    let support = CoordBox::new(vec![0.0, -5.0 * s, -5.0 * s], vec![5.0 * s, 5.0 * s, 5.0 * s])?;
    let mut quad = QuadratureSpec::uniform(&g, QuadratureRule::Midpoint, 112, 2);
    quad.volume_nodes = vec![56, 112, 112];
    Ok(Manufactured {
        problem: ProblemSpec {
            domain: DomainSpec::half_space(0),
            f: Some(SupportedField { field: f, support }),
            phi: Vec::new(),
        },
        exact,
        points: eval_grid((0.2, 1.0), 0.5),
        quad,
    })
}

/// `u* = exp(1 - 1/(1 - |x - c|^2/R^2))` (zero outside the ball), `c = (1, 0, 0)`,
/// `R = 0.9`, on the strip `{0 < x_1 < 2}` in `R^3`; `phi = 0`. Midpoint grid
/// `96^3` over the ball's bounding box, strip series cut at `J = 1` (image
/// terms integrate to zero against the Laplacian of a bump supported inside).
pub fn manufactured_strip() -> Result<Manufactured> {
    let g = GroupSpec::abelian(3)?;
    let rad = 0.9;
    let ratio = move |q: &Point| ((q.x[0] - 1.0).powi(2) + q.x[1] * q.x[1] + q.x[2] * q.x[2]) / (rad * rad);
    let exact = FnField::shared("u*", move |q: &Point| {
        let s = ratio(q);
        if s < 1.0 {
            (1.0 - 1.0 / (1.0 - s)).exp()
        } else {
            0.0
        }
    });
    let f = FnField::shared("f", move |q: &Point| {
        let s = ratio(q);
        if s >= 1.0 {
            return 0.0;
        }
        // u = F(s): Delta u = F'' 4 r^2 / R^4 + F' 2 d / R^2 with r^2 = s R^2, d = 3
        let u = (1.0 - 1.0 / (1.0 - s)).exp();
        let d1 = -1.0 / (1.0 - s).powi(2);
        let d2 = -2.0 / (1.0 - s).powi(3);
        u * (d1 * d1 + d2) * 4.0 * s / (rad * rad) + u * d1 * 6.0 / (rad * rad)
    });
    let support = CoordBox::new(vec![1.0 - rad, -rad, -rad], vec![1.0 + rad, rad, rad])?;
    let quad = QuadratureSpec::uniform(&g, QuadratureRule::Midpoint, 96, 2)
        .with_truncation(TruncationPolicy::Fixed { cutoff: 1 });
    Ok(Manufactured {
        problem: ProblemSpec {
            domain: DomainSpec::strip(0, 2.0),
            f: Some(SupportedField { field: f, support }),
            phi: Vec::new(),
        },
        exact,
        points: eval_grid((0.2, 1.8), 0.5),
        quad,
    })
}

/// Max error of the representation formula against the manufactured solution.
pub fn manufactured_error(case: &Manufactured) -> Result<(f64, crate::solver::SolveReport)> {
    let g = GroupSpec::abelian(3)?;
    let p = params_for(&g)?;
    let report = solve(&p, &g, &case.problem, &case.points, &case.quad)?;
    let err =
        case.points.iter().zip(&report.values).map(|(q, v)| (v - case.exact.eval(q)).abs()).fold(0.0f64, f64::max);
    Ok((err, report))
}

/// Abelian boundary traces of every candidate, strip summed to `tol = 1e-11`.
pub fn check_abelian_traces(seed: u64) -> Result<CheckResult> {
    let g = GroupSpec::abelian(3)?;
    let p = params_for(&g)?;
    let mut r = rng(seed, 900);
    let mut domains = test_domains(&g);
    domains.push((
        "shifted_wedge",
        DomainSpec::shifted_wedge(vec![Face { axis: 0, offset: 0.3 }, Face { axis: 2, offset: -0.4 }]),
    ));
    let mut worst = 0.0f64;
    for (_, domain) in domains {
        let mut zeta = pole_for(&mut r, &g, &domain);
        for f in domain.boundary_faces() {
            zeta.x[f.axis] = if f.value > 1.0 { 1.0 } else { f.value + 0.8 };
        }
        let grid = BoundaryGrid { lo: vec![-1.5; 3], hi: vec![1.5; 3], counts: vec![7; 3] };
        let rep = boundary_trace_scan(&p, &g, &domain, &zeta, &grid, TruncationPolicy::Tolerance { tol: 1e-11 })?;
        worst = worst.max(rep.max_abs);
    }
    Ok(CheckResult::bounded("abelian_trace", worst, 1e-10, "max |G| on sampled faces, c = 1/(4 pi)"))
}

/// Abelian symmetry `G(xi, zeta) = G(zeta, xi)`.
pub fn check_abelian_symmetry(seed: u64) -> Result<CheckResult> {
    let g = GroupSpec::abelian(3)?;
    let p = params_for(&g)?;
    let mut r = rng(seed, 950);
    let mut worst = 0.0f64;
    for (_, domain) in test_domains(&g) {
        let mut pairs = Vec::with_capacity(20);
        for _ in 0..20 {
            let mut a = pole_for(&mut r, &g, &domain);
            let mut b = pole_for(&mut r, &g, &domain);
            for f in domain.boundary_faces() {
                a.x[f.axis] = r.random_range(0.2..1.8);
                b.x[f.axis] = r.random_range(0.2..1.8);
            }
            pairs.push((a, b));
        }
        let rep = green_symmetry_check(&p, &g, &domain, &pairs, TruncationPolicy::Fixed { cutoff: 50 })?;
        worst = worst.max(rep.max_abs);
    }
    Ok(CheckResult::bounded("abelian_symmetry", worst, 1e-12, "max |G(xi,zeta) - G(zeta,xi)|"))
}

/// `N^4` of `zeta^{-1} o xi` on H^1 with the law written out by hand.
fn h1_fourth(zeta: (f64, f64, f64), xi: (f64, f64, f64)) -> f64 {
    // zeta^{-1} = -zeta; <A x, y> with A = [[0, 1], [-1, 0]] is x2 y1 - x1 y2
    let (a1, a2, s) = (-zeta.0, -zeta.1, -zeta.2);
    let (b1, b2, t) = xi;
    let x1 = a1 + b1;
    let x2 = a2 + b2;
    let tt = s + t + 0.5 * (a2 * b1 - a1 * b2);
    let r2 = x1 * x1 + x2 * x2;
    r2 * r2 + 16.0 * tt * tt
}

/// The pinned H^1 half-space configuration: gauges 40 and 8 and a nonzero trace.
pub fn check_nonabelian_trace() -> Result<Vec<CheckResult>> {
    let g = GroupSpec::heisenberg(1)?;
    let p = params_for(&g)?;
    let zeta = Point::new(vec![1.0, 0.0], vec![0.0]);
    let star = Point::new(vec![-1.0, 0.0], vec![0.0]);
    let xi = Point::new(vec![0.0, 1.0], vec![1.0]);
    let lib = |z: &Point| -> Result<f64> { Ok(gauge(&g, &g.compose(&g.inverse(z), &xi)?)?.fourth_power) };
    let (n_direct, n_image) = (lib(&zeta)?, lib(&star)?);
    let (o_direct, o_image) =
        (h1_fourth((1.0, 0.0, 0.0), (0.0, 1.0, 1.0)), h1_fourth((-1.0, 0.0, 0.0), (0.0, 1.0, 1.0)));
    let trace = green_eval(&p, &g, &DomainSpec::half_space(0), &xi, &zeta, TruncationPolicy::default())?;
    let expect = p.c * (40f64.powf(-0.5) - 8f64.powf(-0.5));
    let mismatch = (n_direct - 40.0)
        .abs()
        .max((n_image - 8.0).abs())
        .max((o_direct - 40.0).abs())
        .max((o_image - 8.0).abs())
        .max((trace - expect).abs());
    let mut out = Vec::new();
    let note = format!(
        "gauge^4 {n_direct} and {n_image}; trace {trace:.16e} = c (40^-1/2 - 8^-1/2); the images do not \
         cancel off x = 0 because reflection does not preserve the bilinear term of the law"
    );
    out.push(if mismatch <= 1e-12 {
        CheckResult::reported("nonabelian_trace_pinned", trace, 1e-12, note)
    } else {
        CheckResult::bounded("nonabelian_trace_pinned", mismatch, 1e-12, note)
    });
    // sampled traces on the test domains, relative to the principal term
    let mut notes = Vec::new();
    let mut worst = 0.0f64;
    for (name, g) in builtin_groups() {
        if g.is_abelian() {
            continue;
        }
        let p = params_for(&g)?;
        let mut r = rng(DEFAULT_SEED, 1000);
        for (dname, domain) in test_domains(&g) {
            let zeta = pole_for(&mut r, &g, &domain);
            let (m, n) = (g.m(), g.n());
            let grid = BoundaryGrid {
                lo: [vec![-1.0; m], vec![-1.0; n]].concat(),
                hi: [vec![1.0; m], vec![1.0; n]].concat(),
                counts: [vec![3; m], vec![3; n]].concat(),
            };
            let rep = boundary_trace_scan(&p, &g, &domain, &zeta, &grid, TruncationPolicy::default())?;
            worst = worst.max(rep.max_relative);
            notes.push(format!("{name}/{dname}: {:.3e}", rep.max_relative));
        }
    }
    out.push(CheckResult::reported(
        "nonabelian_trace_scan",
        worst,
        f64::NAN,
        format!("max |G| / |principal| on boundary samples; {}", notes.join(", ")),
    ));
    Ok(out)
}

/// H^1 half-space symmetry residuals, checked against a hand-written evaluation.
pub fn check_nonabelian_symmetry(seed: u64) -> Result<CheckResult> {
    let g = GroupSpec::heisenberg(1)?;
    let p = params_for(&g)?;
    let domain = DomainSpec::half_space(0);
    let mut r = rng(seed, 1100);
    let mut worst = 0.0f64;
    let mut oracle_gap = 0.0f64;
    let direct = |xi: &Point, zeta: &Point| {
        let a = (xi.x[0], xi.x[1], xi.t[0]);
        let z = (zeta.x[0], zeta.x[1], zeta.t[0]);
        let zs = (-zeta.x[0], zeta.x[1], zeta.t[0]);
        p.c * (h1_fourth(z, a).powf(-0.5) - h1_fourth(zs, a).powf(-0.5))
    };
    for _ in 0..50 {
        let mut a = random_point(&mut r, &g, 1.0);
        let mut b = random_point(&mut r, &g, 1.0);
        a.x[0] = r.random_range(0.2..1.5);
        b.x[0] = r.random_range(0.2..1.5);
        let rep = green_symmetry_check(&p, &g, &domain, &[(a.clone(), b.clone())], TruncationPolicy::default())?;
        let oracle = direct(&a, &b) - direct(&b, &a);
        oracle_gap = oracle_gap.max((rep.residuals[0] - oracle).abs());
        worst = worst.max(rep.max_abs);
    }
    let note = format!("max |G(xi,zeta) - G(zeta,xi)|; hand evaluation agrees to {oracle_gap:.1e}");
    Ok(if oracle_gap <= 1e-12 {
        CheckResult::reported("nonabelian_symmetry", worst, 1e-12, note)
    } else {
        CheckResult::bounded("nonabelian_symmetry", oracle_gap, 1e-12, note)
    })
}

/// `u = x_1`: `L u = 0` and `u = 0` on `{x_1 = 0}` on every group.
pub fn check_linear_harmonic(seed: u64, points: usize) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    for (gi, (_, g)) in builtin_groups().iter().enumerate() {
        let mut r = rng(seed, 1200 + gi as u64);
        let u = FnField::new("x1", |p: &Point| p.x[0]);
        let samples: Vec<Point> = (0..points).map(|_| random_point(&mut r, g, 1.0)).collect();
        for s in &samples {
            worst = worst.max(apply_sublaplacian(g, &u, s, StencilSpec::default())?.abs());
        }
        let inside: Vec<Point> = samples
            .into_iter()
            .map(|mut s| {
                s.x[0] = s.x[0].abs() + 0.1;
                s
            })
            .collect();
        let rep =
            verify_solution(g, &ProblemSpec::zero(DomainSpec::half_space(0)), &u, &inside, StencilSpec::default())?;
        worst = worst.max(rep.boundary_mismatch);
    }
    Ok(CheckResult::bounded("linear_harmonic", worst, 1e-9, "max |L x_1| and |x_1| on {x_1 = 0}"))
}

/// Face-reduced layer kernel against the full contraction.
pub fn check_layer_reduction(seed: u64, points: usize) -> Result<CheckResult> {
    let groups = builtin_groups();
    let mut r = rng(seed, 1300);
    let mut worst = 0.0f64;
    let truncation = TruncationPolicy::Fixed { cutoff: 4 };
    for _ in 0..points {
        let (_, g) = &groups[r.random_range(0..groups.len())];
        let p = params_for(g)?;
        let domains = test_domains(g);
        let (_, domain) = &domains[r.random_range(0..domains.len())];
        let faces = domain.boundary_faces();
        let fi = r.random_range(0..faces.len());
        let mut zeta = random_point(&mut r, g, 1.0);
        let mut xi = random_point(&mut r, g, 1.0);
        for f in &faces {
            zeta.x[f.axis] = r.random_range(0.3..1.7);
            xi.x[f.axis] = r.random_range(0.3..1.7);
        }
        zeta.x[faces[fi].axis] = faces[fi].value;
        let a = layer_kernel(&p, g, domain, fi, &xi, &zeta, truncation)?;
        let b = layer_kernel_full_contraction(&p, g, domain, fi, &xi, &zeta, truncation)?;
        worst = worst.max((a - b).abs() / a.abs().max(1.0));
    }
    Ok(CheckResult::bounded(
        "layer_reduction",
        worst,
        1e-12,
        format!("max |reduced - full| / max(1, |reduced|) at {points} face points"),
    ))
}

fn collect(out: &mut Vec<CheckResult>, name: &str, r: Result<CheckResult>) {
    out.push(r.unwrap_or_else(|e| CheckResult::failed(name, &e)));
}

fn collect_many(out: &mut Vec<CheckResult>, name: &str, r: Result<Vec<CheckResult>>) {
    match r {
        Ok(v) => out.extend(v),
        Err(e) => out.push(CheckResult::failed(name, &e)),
    }
}

/// Runs every check.
pub fn run_suite(config: &SuiteConfig) -> SuiteResult {
    let seed = config.seed;
    let mut out = Vec::new();
    collect(&mut out, "group_law", check_group_law(seed, 1000));
    collect(&mut out, "gamma_homogeneity", check_gamma_homogeneity(seed, 100));
    collect(&mut out, "gamma_harmonicity", check_gamma_harmonicity(seed, 50));
    collect_many(&mut out, "flux_second_box", check_flux_calibration(config.profile));
    collect(&mut out, "image_combinatorics", check_image_combinatorics(seed));
    collect(&mut out, "green_harmonicity", check_green_harmonicity(seed, 25));
    collect_many(&mut out, "strip_tail_bound", check_strip_series(seed, 50));
    collect(&mut out, "center_manifold_trace", check_center_manifold_trace(seed));
    collect(&mut out, "abelian_trace", check_abelian_traces(seed));
    collect(&mut out, "abelian_symmetry", check_abelian_symmetry(seed));
    if config.profile == Profile::Full {
        for (name, case) in
            [("manufactured_half_space", manufactured_half_space()), ("manufactured_strip", manufactured_strip())]
        {
            collect(
                &mut out,
                name,
                case.and_then(|c| manufactured_error(&c)).map(|(err, rep)| {
                    CheckResult::bounded(
                        name,
                        err,
                        1e-3,
                        format!(
                            "max |u - u*| on a 5^3 grid; self-convergence {:.3e}",
                            rep.self_convergence.unwrap_or(f64::NAN)
                        ),
                    )
                }),
            );
        }
    }
    collect_many(&mut out, "nonabelian_trace_pinned", check_nonabelian_trace());
    collect(&mut out, "nonabelian_symmetry", check_nonabelian_symmetry(seed));
    collect(&mut out, "linear_harmonic", check_linear_harmonic(seed, 100));
    collect(&mut out, "layer_reduction", check_layer_reduction(seed, 100));
    SuiteResult::new(seed, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!((0..=4).map(|k| binomial(4, k)).collect::<Vec<_>>(), vec![1, 4, 6, 4, 1]);
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-2.5)).collect();
        assert!((loglog_slope(&xs, &ys) + 2.5).abs() < 1e-12);
    }

    #[test]
    fn hand_gauge_matches_pinned_values() {
        assert_eq!(h1_fourth((1.0, 0.0, 0.0), (0.0, 1.0, 1.0)), 40.0);
        assert_eq!(h1_fourth((-1.0, 0.0, 0.0), (0.0, 1.0, 1.0)), 8.0);
    }

    #[test]
    fn suite_ordering_and_verdict() {
        let r = SuiteResult::new(
            1,
            vec![CheckResult::bounded("b", 1.0, 0.5, ""), CheckResult::reported("a", 3.0, 0.0, "")],
        );
        assert_eq!(r.checks[0].name, "a");
        assert!(!r.passed);
        let ok = SuiteResult::new(1, vec![CheckResult::reported("a", 3.0, 0.0, "")]);
        assert!(ok.passed);
    }
}
