//! Finite-difference application of the horizontal vector fields
//!
//! ```text
//! X_j = d/dx_j + 1/2 sum_k (A^(k) x)_j d/dt_k
//! ```
//!
//! and of the sub-Laplacian in its expanded form
//!
//! ```text
//! L = Delta_x + 1/4 |x|^2 Delta_t + sum_k <A^(k) x, grad_x> d/dt_k
//! ```
//!
//! All derivatives are second-order central differences; the variable
//! coefficients are evaluated exactly at the stencil center.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GroupSpec, Point};

/// A scalar function on the group. Implementations are called from
/// several threads at once and must be safe for that.
pub trait ScalarField: Send + Sync {
    fn eval(&self, p: &Point) -> f64;

    fn label(&self) -> &str {
        "field"
    }
}

/// Closure-backed [`ScalarField`].
pub struct FnField<F> {
    f: F,
    label: String,
}

impl<F> FnField<F>
where
    F: Fn(&Point) -> f64 + Send + Sync,
{
    pub fn new(label: impl Into<String>, f: F) -> Self {
        Self { f, label: label.into() }
    }

    pub fn shared(label: impl Into<String>, f: F) -> Arc<dyn ScalarField>
    where
        F: 'static,
    {
        Arc::new(Self::new(label, f))
    }
}

impl<F> ScalarField for FnField<F>
where
    F: Fn(&Point) -> f64 + Send + Sync,
{
    fn eval(&self, p: &Point) -> f64 {
        (self.f)(p)
    }

    fn label(&self) -> &str {
        &self.label
    }
}

impl<T: ScalarField + ?Sized> ScalarField for Arc<T> {
    fn eval(&self, p: &Point) -> f64 {
        (**self).eval(p)
    }

    fn label(&self) -> &str {
        (**self).label()
    }
}

impl<T: ScalarField + ?Sized> ScalarField for &T {
    fn eval(&self, p: &Point) -> f64 {
        (**self).eval(p)
    }

    fn label(&self) -> &str {
        (**self).label()
    }
}

/// Central-difference step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StencilSpec {
    pub h: f64,
}

impl StencilSpec {
    pub fn new(h: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidArgument(format!("stencil step must be > 0, got {h}")));
        }
        Ok(Self { h })
    }

    /// `h = min(1e-3, 0.01 d)` for gauge distance `d` to the nearest pole.
    pub fn near_poles(distance_to_pole: f64) -> Result<Self> {
        Self::new(f64::min(1e-3, 0.01 * distance_to_pole))
    }

    pub fn halved(&self) -> Self {
        Self { h: 0.5 * self.h }
    }
}

impl Default for StencilSpec {
    fn default() -> Self {
        Self { h: 1e-3 }
    }
}

fn shifted(p: &Point, moves: &[(usize, f64)]) -> Point {
    let mut q = p.clone();
    for &(axis, delta) in moves {
        *q.coord_mut(axis) += delta;
    }
    q
}

fn central_first(u: &dyn ScalarField, p: &Point, axis: usize, h: f64) -> f64 {
    (u.eval(&shifted(p, &[(axis, h)])) - u.eval(&shifted(p, &[(axis, -h)]))) / (2.0 * h)
}

/// `X_j u (p)`, `j` zero-based.
pub fn apply_vector_field(
    spec: &GroupSpec,
    j: usize,
    u: &dyn ScalarField,
    p: &Point,
    stencil: StencilSpec,
) -> Result<f64> {
    spec.check_point(p)?;
    let m = spec.m();
    if j >= m {
        return Err(Error::InvalidArgument(format!("vector field index {j} >= m = {m}")));
    }
    let h = stencil.h;
    let mut value = central_first(u, p, j, h);
    let mut ax = vec![0.0; m];
    for k in 0..spec.n() {
        spec.apply(k, &p.x, &mut ax);
        let coeff = 0.5 * ax[j];
        if coeff != 0.0 {
            value += coeff * central_first(u, p, m + k, h);
        }
    }
    Ok(value)
}

/// `(X_1 u, ..., X_m u)(p)`.
pub fn horizontal_gradient(spec: &GroupSpec, u: &dyn ScalarField, p: &Point, stencil: StencilSpec) -> Result<Vec<f64>> {
    (0..spec.m()).map(|j| apply_vector_field(spec, j, u, p, stencil)).collect()
}

/// Expanded-form sub-Laplacian `L u (p)`.
///
/// The mixed term uses the four-point cross stencil for `d^2/dx_i dt_k`
/// with the coefficient `(A^(k) x)_i` frozen at `p`.
pub fn apply_sublaplacian(spec: &GroupSpec, u: &dyn ScalarField, p: &Point, stencil: StencilSpec) -> Result<f64> {
    spec.check_point(p)?;
    let (m, n) = (spec.m(), spec.n());
    let h = stencil.h;
    let h2 = h * h;
    let center = u.eval(p);
    let second =
        |axis: usize| (u.eval(&shifted(p, &[(axis, h)])) - 2.0 * center + u.eval(&shifted(p, &[(axis, -h)]))) / h2;
    let lap_x: f64 = (0..m).map(second).sum();
    let lap_t: f64 = (m..m + n).map(second).sum();
    let r2: f64 = p.x.iter().map(|v| v * v).sum();
    let mut mixed = 0.0;
    let mut ax = vec![0.0; m];
    for k in 0..n {
        spec.apply(k, &p.x, &mut ax);
        let tk = m + k;
        for (i, &coeff) in ax.iter().enumerate() {
            if coeff == 0.0 {
                continue;
            }
            let cross = u.eval(&shifted(p, &[(i, h), (tk, h)]))
                - u.eval(&shifted(p, &[(i, h), (tk, -h)]))
                - u.eval(&shifted(p, &[(i, -h), (tk, h)]))
                + u.eval(&shifted(p, &[(i, -h), (tk, -h)]));
            mixed += coeff * cross / (4.0 * h2);
        }
    }
    Ok(lap_x + 0.25 * r2 * lap_t + mixed)
}

/// `sum_j X_j (X_j u)` by nested central differences; a cross-check for
/// [`apply_sublaplacian`].
pub fn apply_sublaplacian_composed(
    spec: &GroupSpec,
    u: &dyn ScalarField,
    p: &Point,
    stencil: StencilSpec,
) -> Result<f64> {
    spec.check_point(p)?;
    let mut total = 0.0;
    for j in 0..spec.m() {
        let inner = FnField::new("X_j u", |q: &Point| apply_vector_field(spec, j, u, q, stencil).unwrap_or(f64::NAN));
        total += apply_vector_field(spec, j, &inner, p, stencil)?;
    }
    Ok(total)
}

/// Stencil residuals at a set of sample points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub samples: Vec<Point>,
    pub residuals: Vec<f64>,
    pub max_abs: f64,
    pub step: f64,
    /// `max_abs` recomputed with the step halved, when requested.
    pub refined_max_abs: Option<f64>,
    /// `log2(max_abs / refined_max_abs)`.
    pub convergence_order: Option<f64>,
}

impl ResidualReport {
    pub fn empty() -> Self {
        Self {
            samples: Vec::new(),
            residuals: Vec::new(),
            max_abs: 0.0,
            step: 0.0,
            refined_max_abs: None,
            convergence_order: None,
        }
    }

    /// Factor by which the maximum residual shrinks when the step halves.
    pub fn reduction_factor(&self) -> Option<f64> {
        self.refined_max_abs.map(|r| self.max_abs / r)
    }

    /// Builds a report from precomputed residuals.
    pub fn from_residuals(samples: Vec<Point>, residuals: Vec<f64>, step: f64) -> Self {
        let max_abs = residuals.iter().fold(0.0f64, |a, r| a.max(r.abs()));
        Self { samples, residuals, max_abs, step, refined_max_abs: None, convergence_order: None }
    }
}

fn residuals_at(
    spec: &GroupSpec,
    u: &dyn ScalarField,
    rhs: Option<&dyn ScalarField>,
    samples: &[Point],
    stencil: StencilSpec,
) -> Result<Vec<f64>> {
    samples
        .iter()
        .map(|p| {
            let lu = apply_sublaplacian(spec, u, p, stencil)?;
            Ok(lu - rhs.map_or(0.0, |f| f.eval(p)))
        })
        .collect()
}

/// Residuals `L u - f` at `samples` (with `f = 0` when `rhs` is `None`),
/// optionally repeated at half the step to estimate the convergence order.
pub fn pde_residual(
    spec: &GroupSpec,
    u: &dyn ScalarField,
    rhs: Option<&dyn ScalarField>,
    samples: &[Point],
    stencil: StencilSpec,
    refine: bool,
) -> Result<ResidualReport> {
    let residuals = residuals_at(spec, u, rhs, samples, stencil)?;
    let mut report = ResidualReport::from_residuals(samples.to_vec(), residuals, stencil.h);
    if refine {
        let fine = residuals_at(spec, u, rhs, samples, stencil.halved())?;
        let fine_max = fine.iter().fold(0.0f64, |a, r| a.max(r.abs()));
        report.refined_max_abs = Some(fine_max);
        report.convergence_order = Some((report.max_abs / fine_max).log2());
    }
    Ok(report)
}

/// `L u` at each sample, with a second pass at `h/2` for the convergence order.
pub fn harmonicity_residual(
    spec: &GroupSpec,
    u: &dyn ScalarField,
    samples: &[Point],
    stencil: StencilSpec,
) -> Result<ResidualReport> {
    pde_residual(spec, u, None, samples, stencil, true)
}
