//! Quadrature evaluation of the Dirichlet representation formula
//!
//! ```text
//! u(xi) = -int_D G(xi, zeta) f(zeta) dnu(zeta)
//!         + sum_faces int_face (-s) phi(zeta) (X_{l,zeta} G)(xi, zeta) dsigma(zeta)
//! ```
//!
//! where `{x_l = a}` is a reflecting face and `s` its outward sign. With
//! `L Gamma = -delta` the volume term solves `L u = f`; the face sign makes
//! the abelian half-space kernel the classical (nonnegative) Poisson kernel.
//!
//! Integrals are restricted to the declared compact supports of `f` and `phi`.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::{CoordBox, FundamentalSolutionParams, Observer};
use crate::group::{GroupSpec, Point};
use crate::images::{BoundaryFace, DomainConfig, DomainSpec, GreenKernel, TruncationPolicy};
use crate::numerics::{CompensatedSum, MultiIndex};
use crate::operator::{apply_sublaplacian, pde_residual, ResidualReport, ScalarField, StencilSpec};

/// A right-hand side together with the box outside which it vanishes.
#[derive(Clone)]
pub struct SupportedField {
    pub field: Arc<dyn ScalarField>,
    pub support: CoordBox,
}

/// Boundary datum on one face. `face` indexes [`DomainSpec::boundary_faces`];
/// the support box spans all coordinates, the face-normal one is ignored.
#[derive(Clone)]
pub struct BoundaryDatum {
    pub face: usize,
    pub field: Arc<dyn ScalarField>,
    pub support: CoordBox,
}

#[derive(Clone)]
pub struct ProblemSpec {
    pub domain: DomainSpec,
    pub f: Option<SupportedField>,
    pub phi: Vec<BoundaryDatum>,
}

impl ProblemSpec {
    pub fn zero(domain: DomainSpec) -> Self {
        Self { domain, f: None, phi: Vec::new() }
    }

    pub fn check(&self, spec: &GroupSpec) -> Result<()> {
        self.domain.check(spec)?;
        let dim = spec.dim();
        if let Some(f) = &self.f {
            check_volume_support(spec, &self.domain, &f.support)?;
            debug_assert_eq!(f.support.dim(), dim);
        }
        let faces = self.domain.boundary_faces();
        for d in &self.phi {
            if d.face >= faces.len() {
                return Err(Error::InvalidArgument(format!(
                    "boundary datum on face {} but the domain has {} faces",
                    d.face,
                    faces.len()
                )));
            }
            if d.support.dim() != dim {
                return Err(Error::Dimension(format!("datum support must span {dim} coordinates")));
            }
        }
        Ok(())
    }
}

fn check_volume_support(spec: &GroupSpec, domain: &DomainSpec, support: &CoordBox) -> Result<()> {
    if support.dim() != spec.dim() {
        return Err(Error::Dimension(format!("support box must span {} coordinates", spec.dim())));
    }
    for face in domain.boundary_faces() {
        let (lo, hi) = (support.lo[face.axis], support.hi[face.axis]);
        let inside = if face.outward < 0.0 { lo >= face.value } else { hi <= face.value };
        if !inside {
            return Err(Error::InvalidArgument(format!(
                "support box leaves the domain across x_{} = {}",
                face.axis + 1,
                face.value
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadratureRule {
    /// Cell midpoints; the cell holding the evaluation point is split once
    /// into `2^d` sub-cells and the sub-cell holding the pole is dropped.
    Midpoint,
    /// Tensor trapezoid; nodes within the pole exclusion radius are dropped.
    Trapezoid,
}

fn default_truncation() -> TruncationPolicy {
    TruncationPolicy::Fixed { cutoff: 16 }
}

fn default_residual_samples() -> usize {
    5
}

/// Quadrature resolution. Node counts span all `m + n` coordinates; for
/// surface grids the face-normal count is ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rule: QuadratureRule,
    pub volume_nodes: Vec<usize>,
    pub surface_nodes: Vec<usize>,
    /// Strip-series truncation used inside the quadrature.
    #[serde(default = "default_truncation")]
    pub truncation: TruncationPolicy,
    /// Inward offset of the boundary check points; defaults to four surface
    /// cells when any boundary datum is present, zero otherwise.
    #[serde(default)]
    pub boundary_offset: Option<f64>,
    /// Number of evaluation points at which the stencil residual of `u` is taken.
    #[serde(default = "default_residual_samples")]
    pub residual_samples: usize,
}

impl QuadratureSpec {
    pub fn uniform(spec: &GroupSpec, rule: QuadratureRule, volume: usize, surface: usize) -> Self {
        Self {
            rule,
            volume_nodes: vec![volume; spec.dim()],
            surface_nodes: vec![surface; spec.dim()],
            truncation: default_truncation(),
            boundary_offset: None,
            residual_samples: default_residual_samples(),
        }
    }

    pub fn with_truncation(mut self, truncation: TruncationPolicy) -> Self {
        self.truncation = truncation;
        self
    }

    /// Every node count halved (at least 2).
    pub fn coarsened(&self) -> Self {
        let half = |v: &[usize]| v.iter().map(|&c| (c / 2).max(2)).collect();
        Self { volume_nodes: half(&self.volume_nodes), surface_nodes: half(&self.surface_nodes), ..self.clone() }
    }

    fn check(&self, spec: &GroupSpec) -> Result<()> {
        let dim = spec.dim();
        if self.volume_nodes.len() != dim || self.surface_nodes.len() != dim {
            return Err(Error::Dimension(format!("node counts must span {dim} coordinates")));
        }
        if self.volume_nodes.iter().chain(&self.surface_nodes).any(|&c| c < 2) {
            return Err(Error::InvalidArgument("node counts must be >= 2".into()));
        }
        self.truncation.check()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub points: Vec<Point>,
    pub values: Vec<f64>,
    /// `L u - f` by central differences on re-evaluated `u`.
    pub pde_residual: ResidualReport,
    pub boundary_points: Vec<Point>,
    /// `max |u - phi|` over `boundary_points`.
    pub boundary_mismatch: f64,
    pub boundary_offset: f64,
    /// `max |u - u_coarse|` against the grid with halved node counts.
    pub self_convergence: Option<f64>,
}

struct Node {
    flat: usize,
    coords: Vec<f64>,
    wf: f64,
}

/// Tensor grid over a box with `f` premultiplied into the weights.
struct Grid {
    lo: Vec<f64>,
    h: Vec<f64>,
    counts: Vec<usize>,
    active: Vec<bool>,
    rule: QuadratureRule,
    nodes: Vec<Node>,
    max_spacing: f64,
}

impl Grid {
    fn new(
        support: &CoordBox,
        counts: &[usize],
        rule: QuadratureRule,
        fixed: Option<(usize, f64)>,
        field: &dyn ScalarField,
        m: usize,
    ) -> Self {
        let dim = support.dim();
        let active: Vec<bool> = (0..dim).map(|a| fixed.is_none_or(|(l, _)| l != a)).collect();
        let counts: Vec<usize> = (0..dim).map(|a| if active[a] { counts[a] } else { 1 }).collect();
        let h: Vec<f64> = (0..dim)
            .map(|a| {
                let span = support.hi[a] - support.lo[a];
                match (active[a], rule) {
                    (false, _) => 0.0,
                    (true, QuadratureRule::Midpoint) => span / counts[a] as f64,
                    (true, QuadratureRule::Trapezoid) => span / (counts[a] - 1) as f64,
                }
            })
            .collect();
        let max_spacing = h.iter().cloned().fold(0.0, f64::max);
        let mut nodes = Vec::new();
        for (flat, idx) in MultiIndex::new(&counts).enumerate() {
            let mut coords = Vec::with_capacity(dim);
            let mut w = 1.0;
            for a in 0..dim {
                if !active[a] {
                    coords.push(fixed.expect("fixed axis").1);
                    continue;
                }
                let i = idx[a];
                match rule {
                    QuadratureRule::Midpoint => {
                        coords.push(support.lo[a] + (i as f64 + 0.5) * h[a]);
                        w *= h[a];
                    }
                    QuadratureRule::Trapezoid => {
                        coords.push(support.lo[a] + i as f64 * h[a]);
                        w *= if i == 0 || i + 1 == counts[a] { 0.5 * h[a] } else { h[a] };
                    }
                }
            }
            let wf = w * field.eval(&Point::from_coords(&coords, m));
            if wf != 0.0 {
                nodes.push(Node { flat, coords, wf });
            }
        }
        Self { lo: support.lo.clone(), h, counts, active, rule, nodes, max_spacing }
    }

    /// Flat index and lower corner of the midpoint cell that holds `p`.
    fn cell_of(&self, p: &[f64]) -> Option<(usize, Vec<f64>)> {
        if self.rule != QuadratureRule::Midpoint {
            return None;
        }
        let mut flat = 0;
        let mut corner = Vec::with_capacity(p.len());
        for a in 0..p.len() {
            if !self.active[a] {
                corner.push(p[a]);
                continue;
            }
            let s = (p[a] - self.lo[a]) / self.h[a];
            if !(s >= 0.0 && s <= self.counts[a] as f64) {
                return None;
            }
            let i = (s.floor() as usize).min(self.counts[a] - 1);
            flat = flat * self.counts[a] + i;
            corner.push(self.lo[a] + i as f64 * self.h[a]);
        }
        Some((flat, corner))
    }
}

/// The representation formula for one problem at one resolution.
struct Representation<'a> {
    spec: &'a GroupSpec,
    domain: &'a DomainSpec,
    kernel: GreenKernel<'a>,
    volume: Option<(Grid, Arc<dyn ScalarField>)>,
    surfaces: Vec<(BoundaryFace, Grid)>,
}

impl<'a> Representation<'a> {
    fn new(
        params: &'a FundamentalSolutionParams,
        spec: &'a GroupSpec,
        problem: &'a ProblemSpec,
        quad: &QuadratureSpec,
    ) -> Result<Self> {
        problem.check(spec)?;
        quad.check(spec)?;
        let kernel = GreenKernel::new(params, spec, &problem.domain, quad.truncation)?;
        let m = spec.m();
        let volume = problem.f.as_ref().map(|f| {
            let grid = Grid::new(&f.support, &quad.volume_nodes, quad.rule, None, f.field.as_ref(), m);
            (grid, f.field.clone())
        });
        let faces = problem.domain.boundary_faces();
        let surfaces = problem
            .phi
            .iter()
            .map(|d| {
                let face = faces[d.face];
                let grid = Grid::new(
                    &d.support,
                    &quad.surface_nodes,
                    quad.rule,
                    Some((face.axis, face.value)),
                    d.field.as_ref(),
                    m,
                );
                (face, grid)
            })
            .collect();
        Ok(Self { spec, domain: &problem.domain, kernel, volume, surfaces })
    }

    fn max_surface_spacing(&self) -> f64 {
        self.surfaces.iter().map(|(_, g)| g.max_spacing).fold(0.0, f64::max)
    }

    fn max_spacing(&self) -> f64 {
        let v = self.volume.as_ref().map_or(0.0, |(g, _)| g.max_spacing);
        v.max(self.max_surface_spacing())
    }

    fn check_point(&self, xi: &Point) -> Result<()> {
        self.spec.check_point(xi)?;
        if !self.domain.contains_closure(xi) {
            return Err(Error::OutsideDomain(format!("{:?} / {:?}", xi.x, xi.t)));
        }
        Ok(())
    }

    fn volume_at(&self, xi: &Point) -> Result<f64> {
        let Some((grid, field)) = &self.volume else {
            return Ok(0.0);
        };
        let m = self.spec.m();
        let obs = Observer::new(self.spec, xi);
        let mut scratch = Vec::with_capacity(m);
        let xc = xi.coords();
        let pole_cell = grid.cell_of(&xc);
        let mut acc = CompensatedSum::new();
        let mut add = |coords: &[f64], wf: f64, acc: &mut CompensatedSum| -> Result<()> {
            match self.kernel.value(&obs, &coords[..m], &coords[m..], &mut scratch) {
                Ok(g) => {
                    acc.add(-g * wf);
                    Ok(())
                }
                Err(Error::Pole { .. }) => Ok(()),
                Err(e) => Err(e),
            }
        };
        for node in &grid.nodes {
            if pole_cell.as_ref().is_some_and(|(flat, _)| *flat == node.flat) {
                continue;
            }
            add(&node.coords, node.wf, &mut acc)?;
        }
        if let Some((_, corner)) = pole_cell {
            let active: Vec<usize> = (0..xc.len()).filter(|&a| grid.active[a]).collect();
            let sub_w: f64 = active.iter().map(|&a| 0.5 * grid.h[a]).product();
            let mut coords = corner.clone();
            for mask in 0..1usize << active.len() {
                let mut holds_pole = true;
                for (r, &a) in active.iter().enumerate() {
                    let upper = mask >> r & 1 == 1;
                    coords[a] = corner[a] + if upper { 0.75 } else { 0.25 } * grid.h[a];
                    let pole_upper = xc[a] >= corner[a] + 0.5 * grid.h[a];
                    holds_pole &= upper == pole_upper;
                }
                if holds_pole {
                    continue;
                }
                let fv = field.eval(&Point::from_coords(&coords, m));
                if fv != 0.0 {
                    add(&coords, sub_w * fv, &mut acc)?;
                }
            }
        }
        Ok(acc.total())
    }

    fn layer_at(&self, xi: &Point) -> Result<f64> {
        let m = self.spec.m();
        let obs = Observer::new(self.spec, xi);
        let mut scratch = Vec::with_capacity(m);
        let mut acc = CompensatedSum::new();
        for (face, grid) in &self.surfaces {
            for node in &grid.nodes {
                let (y, tau) = node.coords.split_at(m);
                match self.kernel.pole_derivative(&obs, y, tau, face.axis, &mut scratch) {
                    Ok(d) => acc.add(-face.outward * node.wf * d),
                    Err(Error::Pole { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
        }
        Ok(acc.total())
    }

    fn eval(&self, xi: &Point) -> Result<f64> {
        self.check_point(xi)?;
        Ok(self.volume_at(xi)? + self.layer_at(xi)?)
    }
}

impl ScalarField for Representation<'_> {
    fn eval(&self, p: &Point) -> f64 {
        Representation::eval(self, p).unwrap_or(f64::NAN)
    }

    fn label(&self) -> &str {
        "representation"
    }
}

/// `-int G(xi, .) f` over the support of `f`.
pub fn volume_potential(
    params: &FundamentalSolutionParams,
    spec: &GroupSpec,
    domain: &DomainSpec,
    f: &SupportedField,
    xi: &Point,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let problem = ProblemSpec { domain: domain.clone(), f: Some(f.clone()), phi: Vec::new() };
    let rep = Representation::new(params, spec, &problem, quad)?;
    rep.check_point(xi)?;
    rep.volume_at(xi)
}

/// `sum_faces int (-s) phi X_{l,zeta} G(xi, .)` over the supports of the data.
pub fn layer_potential(
    params: &FundamentalSolutionParams,
    spec: &GroupSpec,
    domain: &DomainSpec,
    phi: &[BoundaryDatum],
    xi: &Point,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let problem = ProblemSpec { domain: domain.clone(), f: None, phi: phi.to_vec() };
    let rep = Representation::new(params, spec, &problem, quad)?;
    rep.check_point(xi)?;
    rep.layer_at(xi)
}

/// Layer kernel on face `face`: `-s (X_{l,zeta} G)(xi, zeta)`, `s` the outward sign.
pub fn layer_kernel(
    params: &FundamentalSolutionParams,
    spec: &GroupSpec,
    domain: &DomainSpec,
    face: usize,
    xi: &Point,
    zeta: &Point,
    truncation: TruncationPolicy,
) -> Result<f64> {
    let faces = domain.boundary_faces();
    let f = faces.get(face).ok_or_else(|| Error::InvalidArgument(format!("no face {face}")))?;
    let d = crate::images::green_pole_derivative(params, spec, domain, xi, zeta, f.axis, truncation)?;
    Ok(-f.outward * d)
}

/// The same kernel from the full contraction `-sum_k (X_{k,zeta} G) <X_k, dnu>`,
/// with `<X_k, dnu>` computed as the determinant of `X_k(zeta)` against a
/// positively oriented tangent frame of the face.
pub fn layer_kernel_full_contraction(
    params: &FundamentalSolutionParams,
    spec: &GroupSpec,
    domain: &DomainSpec,
    face: usize,
    xi: &Point,
    zeta: &Point,
    truncation: TruncationPolicy,
) -> Result<f64> {
    let faces = domain.boundary_faces();
    let f = *faces.get(face).ok_or_else(|| Error::InvalidArgument(format!("no face {face}")))?;
    let (m, n, dim) = (spec.m(), spec.n(), spec.dim());
    // tangent frame: coordinate vectors except e_l, in order; orient it so that
    // det[outward normal, frame] = +1
    let tangents: Vec<usize> = (0..dim).filter(|&a| a != f.axis).collect();
    let column_det = |first: &[f64]| {
        let mut mat = DMatrix::<f64>::zeros(dim, dim);
        for r in 0..dim {
            mat[(r, 0)] = first[r];
        }
        for (c, &a) in tangents.iter().enumerate() {
            mat[(a, c + 1)] = 1.0;
        }
        mat.determinant()
    };
    let mut normal = vec![0.0; dim];
    normal[f.axis] = f.outward;
    let orientation = column_det(&normal).signum();
    let mut ax = vec![0.0; m];
    let mut acc = CompensatedSum::new();
    for k in 0..m {
        // X_k(zeta) = e_k + 1/2 sum_j (A^(j) y)_k e_{m+j}
        let mut v = vec![0.0; dim];
        v[k] = 1.0;
        for j in 0..n {
            spec.apply(j, &zeta.x, &mut ax);
            v[m + j] = 0.5 * ax[k];
        }
        let pairing = orientation * column_det(&v);
        if pairing != 0.0 {
            let d = crate::images::green_pole_derivative(params, spec, domain, xi, zeta, k, truncation)?;
            acc.add(-d * pairing);
        }
    }
    Ok(acc.total())
}

fn boundary_checks(
    domain: &DomainSpec,
    phi: &[BoundaryDatum],
    points: &[Point],
    offset: f64,
    m: usize,
) -> Vec<(Point, f64)> {
    let faces = domain.boundary_faces();
    let mut out = Vec::new();
    for (fi, face) in faces.iter().enumerate() {
        for p in points {
            let mut on_face = p.clone();
            on_face.x[face.axis] = face.value;
            if !domain.contains_closure(&on_face) {
                continue;
            }
            let target: f64 = phi
                .iter()
                .filter(|d| d.face == fi)
                .filter(|d| {
                    let c = on_face.coords();
                    (0..c.len()).filter(|&a| a != face.axis).all(|a| d.support.lo[a] <= c[a] && c[a] <= d.support.hi[a])
                })
                .map(|d| d.field.eval(&on_face))
                .sum();
            let mut check = on_face;
            check.x[face.axis] -= face.outward * offset;
            debug_assert_eq!(check.x.len(), m);
            if !out.iter().any(|(q, _): &(Point, f64)| *q == check) {
                out.push((check, target));
            }
        }
    }
    out
}

/// Evaluates the representation formula at `points` and fills the diagnostics.
pub fn solve(
    params: &FundamentalSolutionParams,
    spec: &GroupSpec,
    problem: &ProblemSpec,
    points: &[Point],
    quad: &QuadratureSpec,
) -> Result<SolveReport> {
    let rep = Representation::new(params, spec, problem, quad)?;
    let values = points.iter().map(|p| rep.eval(p)).collect::<Result<Vec<_>>>()?;

    let coarse_quad = quad.coarsened();
    let self_convergence = if coarse_quad != *quad {
        let coarse = Representation::new(params, spec, problem, &coarse_quad)?;
        let mut worst = 0.0f64;
        for (p, v) in points.iter().zip(&values) {
            worst = worst.max((coarse.eval(p)? - v).abs());
        }
        Some(worst)
    } else {
        None
    };

    // residual step balances O(h^2) quadrature noise against O(H^2) truncation
    let step = rep.max_spacing().sqrt().max(1e-3);
    let samples: Vec<Point> = points
        .iter()
        .filter(|p| problem.domain.boundary_distance(p) > step)
        .take(quad.residual_samples)
        .cloned()
        .collect();
    let rhs = problem.f.as_ref().map(|f| f.field.clone());
    let pde = pde_residual(spec, &rep, rhs.as_deref(), &samples, StencilSpec::new(step)?, false)?;

    let offset =
        quad.boundary_offset.unwrap_or_else(
            || {
                if problem.phi.is_empty() {
                    0.0
                } else {
                    4.0 * rep.max_surface_spacing()
                }
            },
        );
    let checks = boundary_checks(&problem.domain, &problem.phi, points, offset, spec.m());
    let mut mismatch = 0.0f64;
    let mut boundary_points = Vec::with_capacity(checks.len());
    for (p, target) in checks {
        mismatch = mismatch.max((rep.eval(&p)? - target).abs());
        boundary_points.push(p);
    }

    Ok(SolveReport {
        points: points.to_vec(),
        values,
        pde_residual: pde,
        boundary_points,
        boundary_mismatch: mismatch,
        boundary_offset: offset,
        self_convergence,
    })
}

/// Checks a candidate solution `u` directly: stencil residual `L u - f` at
/// interior `points` and `|u - phi|` at their projections onto the faces.
pub fn verify_solution(
    spec: &GroupSpec,
    problem: &ProblemSpec,
    u: &dyn ScalarField,
    points: &[Point],
    stencil: StencilSpec,
) -> Result<SolveReport> {
    problem.check(spec)?;
    for p in points {
        spec.check_point(p)?;
    }
    let values = points.iter().map(|p| u.eval(p)).collect();
    let rhs = problem.f.as_ref().map(|f| f.field.clone());
    let pde = pde_residual(spec, u, rhs.as_deref(), points, stencil, true)?;
    let checks = boundary_checks(&problem.domain, &problem.phi, points, 0.0, spec.m());
    let mut mismatch = 0.0f64;
    let mut boundary_points = Vec::with_capacity(checks.len());
    for (p, target) in checks {
        mismatch = mismatch.max((u.eval(&p) - target).abs());
        boundary_points.push(p);
    }
    Ok(SolveReport {
        points: points.to_vec(),
        values,
        pde_residual: pde,
        boundary_points,
        boundary_mismatch: mismatch,
        boundary_offset: 0.0,
        self_convergence: None,
    })
}

/// `L u` at `p` for a representation-formula field, for callers that want
/// their own residual sampling.
pub fn representation_sublaplacian(
    params: &FundamentalSolutionParams,
    spec: &GroupSpec,
    problem: &ProblemSpec,
    quad: &QuadratureSpec,
    p: &Point,
    stencil: StencilSpec,
) -> Result<f64> {
    let rep = Representation::new(params, spec, problem, quad)?;
    apply_sublaplacian(spec, &rep, p, stencil)
}

/// `amplitude * exp(-|p - center|^2 / (2 radius^2))` in the flat coordinates.
/// Its declared support is `center +- 6 radius`, where it has dropped
/// below `1.6e-8` of its peak.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianBump {
    pub center: Vec<f64>,
    pub radius: f64,
    pub amplitude: f64,
}

pub const BUMP_SUPPORT_RADII: f64 = 6.0;

impl GaussianBump {
    pub fn check(&self, dim: usize) -> Result<()> {
        if self.center.len() != dim {
            return Err(Error::Dimension(format!("bump center must have {dim} coordinates")));
        }
        if !(self.radius > 0.0) {
            return Err(Error::InvalidArgument("bump radius must be > 0".into()));
        }
        Ok(())
    }

    pub fn support(&self) -> CoordBox {
        let r = BUMP_SUPPORT_RADII * self.radius;
        CoordBox { lo: self.center.iter().map(|c| c - r).collect(), hi: self.center.iter().map(|c| c + r).collect() }
    }

    pub fn field(&self) -> Arc<dyn ScalarField> {
        let b = self.clone();
        crate::operator::FnField::shared("gaussian_bump", move |p: &Point| {
            let r2: f64 = p.coords().iter().zip(&b.center).map(|(a, c)| (a - c) * (a - c)).sum();
            b.amplitude * (-r2 / (2.0 * b.radius * b.radius)).exp()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldConfig {
    GaussianBump(GaussianBump),
}

/// Boundary datum in JSON; `face` is one-based in the order of the domain's
/// faces (for a strip: 1 is `x_l = 0`, 2 is `x_l = width`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiConfig {
    pub face: usize,
    #[serde(flatten)]
    pub field: FieldConfig,
}

/// JSON problem description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    pub domain: DomainConfig,
    #[serde(default)]
    pub f: Option<FieldConfig>,
    #[serde(default)]
    pub phi: Vec<PhiConfig>,
}

fn clip_to_domain(mut bx: CoordBox, domain: &DomainSpec) -> Result<CoordBox> {
    for face in domain.boundary_faces() {
        if face.outward < 0.0 {
            bx.lo[face.axis] = bx.lo[face.axis].max(face.value);
        } else {
            bx.hi[face.axis] = bx.hi[face.axis].min(face.value);
        }
    }
    CoordBox::new(bx.lo, bx.hi).map_err(|_| Error::InvalidArgument("source support misses the domain".into()))
}

impl ProblemConfig {
    pub fn build(&self, spec: &GroupSpec) -> Result<ProblemSpec> {
        let domain = self.domain.build(spec)?;
        let dim = spec.dim();
        let f = match &self.f {
            None => None,
            Some(FieldConfig::GaussianBump(b)) => {
                b.check(dim)?;
                Some(SupportedField { field: b.field(), support: clip_to_domain(b.support(), &domain)? })
            }
        };
        let faces = domain.boundary_faces();
        let phi = self
            .phi
            .iter()
            .map(|p| {
                let FieldConfig::GaussianBump(b) = &p.field;
                b.check(dim)?;
                let face = p
                    .face
                    .checked_sub(1)
                    .filter(|&i| i < faces.len())
                    .ok_or_else(|| Error::InvalidArgument(format!("no face {} (one-based)", p.face)))?;
                let mut b = b.clone();
                b.center[faces[face].axis] = faces[face].value;
                Ok(BoundaryDatum { face, field: b.field(), support: b.support() })
            })
            .collect::<Result<Vec<_>>>()?;
        let problem = ProblemSpec { domain, f, phi };
        problem.check(spec)?;
        Ok(problem)
    }
}
