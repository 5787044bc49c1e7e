//! Korányi-type gauge, the fundamental solution `c N^{2-Q}` and the induced
//! quasi-distance.
//!
//! ```text
//! N(x, t)^4 = |x|^4 + 16 |t|^2
//! Gamma(x, t) = c N^{2 - Q}
//! Gamma_zeta(xi) = Gamma(zeta^{-1} o xi)
//! d(xi, zeta) = Gamma(zeta^{-1} o xi)^{1 / (2 - Q)}
//! ```
//!
//! The constant `c` is fixed by unit outward flux of the horizontal gradient
//! through any surface around the pole; [`calibrate_c`] computes it over a
//! coordinate box with tensor Gauss-Legendre quadrature on each face.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GroupSpec, Point};
use crate::numerics::CompensatedSum;

/// Operations taking a pole reject evaluation points closer than this in gauge distance.
pub const POLE_EXCLUSION: f64 = 1e-9;

/// Normalization constant and cached homogeneous dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FundamentalSolutionParams {
    pub c: f64,
    pub q: usize,
}

impl FundamentalSolutionParams {
    pub fn new(spec: &GroupSpec, c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidArgument(format!("constant c must be positive, got {c}")));
        }
        let q = spec.homogeneous_dimension();
        if q < 3 {
            return Err(Error::InvalidArgument(format!("homogeneous dimension {q} < 3")));
        }
        Ok(Self { c, q })
    }

    /// `c = 1`, the default for ratio and symmetry checks.
    pub fn unit(spec: &GroupSpec) -> Result<Self> {
        Self::new(spec, 1.0)
    }

    /// `c N^{2-Q}` from `N^4`.
    #[inline]
    pub fn gamma_from_fourth(&self, fourth: f64) -> f64 {
        let r = fourth.sqrt().sqrt();
        self.c * r.powi(2 - self.q as i32)
    }

    /// `c (2-Q)/4 N^{-(Q+2)}`, the factor multiplying derivatives of `N^4`.
    #[inline]
    pub fn derivative_factor(&self, fourth: f64) -> f64 {
        let r = fourth.sqrt().sqrt();
        self.c * (2.0 - self.q as f64) * 0.25 * r.powi(-(self.q as i32 + 2))
    }
}

/// The gauge `N` together with `N^4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaugeValue {
    pub value: f64,
    pub fourth_power: f64,
}

impl GaugeValue {
    pub fn from_fourth_power(fourth_power: f64) -> Self {
        Self { value: fourth_power.sqrt().sqrt(), fourth_power }
    }
}

fn fourth_power(x: &[f64], t: &[f64]) -> f64 {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let s2: f64 = t.iter().map(|v| v * v).sum();
    r2 * r2 + 16.0 * s2
}

/// `N(p)`; in abelian mode `N = |x|`.
pub fn gauge(spec: &GroupSpec, p: &Point) -> Result<GaugeValue> {
    spec.check_point(p)?;
    Ok(GaugeValue::from_fourth_power(fourth_power(&p.x, &p.t)))
}

fn pole_check(fourth: f64) -> Result<()> {
    let distance = fourth.sqrt().sqrt();
    if distance < POLE_EXCLUSION {
        return Err(Error::Pole { distance });
    }
    Ok(())
}

/// `Gamma(p) = c N(p)^{2-Q}`.
pub fn gamma(params: &FundamentalSolutionParams, spec: &GroupSpec, p: &Point) -> Result<f64> {
    let g = gauge(spec, p)?;
    pole_check(g.fourth_power)?;
    Ok(params.gamma_from_fourth(g.fourth_power))
}

/// Evaluation frame anchored at an observation point `xi`.
///
/// Caches `A^(k)^T x` so that the gauge of `zeta^{-1} o xi` costs `O(m n)`
/// per pole without allocating.
pub(crate) struct Observer<'a> {
    spec: &'a GroupSpec,
    pub(crate) x: &'a [f64],
    pub(crate) t: &'a [f64],
    /// row k: `A^(k)^T x`, so that `<A^(k) y, x> = <y, row_k>`.
    atx: Vec<f64>,
}

/// `N^4` of `eta = zeta^{-1} o xi`.
pub(crate) struct Relative {
    pub(crate) fourth: f64,
}

impl<'a> Observer<'a> {
    pub(crate) fn new(spec: &'a GroupSpec, xi: &'a Point) -> Self {
        let (m, n) = (spec.m(), spec.n());
        let mut atx = vec![0.0; n * m];
        for k in 0..n {
            for i in 0..m {
                atx[k * m + i] = (0..m).map(|r| spec.entry(k, r, i) * xi.x[r]).sum();
            }
        }
        Self { spec, x: &xi.x, t: &xi.t, atx }
    }

    pub(crate) fn spec(&self) -> &GroupSpec {
        self.spec
    }

    pub(crate) fn atx(&self, k: usize) -> &[f64] {
        let m = self.spec.m();
        &self.atx[k * m..(k + 1) * m]
    }

    /// `eta_t,k = t_k - tau_k - 1/2 <A^(k) y, x>`.
    #[inline]
    pub(crate) fn eta_t(&self, k: usize, y: &[f64], tau: &[f64]) -> f64 {
        let d: f64 = y.iter().zip(self.atx(k)).map(|(a, b)| a * b).sum();
        self.t[k] - tau[k] - 0.5 * d
    }

    /// `N^4` of `(y, tau)^{-1} o xi`.
    #[inline]
    pub(crate) fn fourth(&self, y: &[f64], tau: &[f64]) -> Relative {
        let r2: f64 = self.x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        let mut s2 = 0.0;
        for k in 0..self.spec.n() {
            let e = self.eta_t(k, y, tau);
            s2 += e * e;
        }
        Relative { fourth: r2 * r2 + 16.0 * s2 }
    }
}

/// `Gamma(zeta^{-1} o xi)`.
pub fn gamma_pole(params: &FundamentalSolutionParams, spec: &GroupSpec, xi: &Point, zeta: &Point) -> Result<f64> {
    spec.check_point(xi)?;
    spec.check_point(zeta)?;
    let rel = Observer::new(spec, xi).fourth(&zeta.x, &zeta.t);
    pole_check(rel.fourth)?;
    Ok(params.gamma_from_fourth(rel.fourth))
}

/// `d(xi, zeta) = c^{1/(2-Q)} N(zeta^{-1} o xi)`; zero on the diagonal.
pub fn quasi_distance(params: &FundamentalSolutionParams, spec: &GroupSpec, xi: &Point, zeta: &Point) -> Result<f64> {
    spec.check_point(xi)?;
    spec.check_point(zeta)?;
    let rel = Observer::new(spec, xi).fourth(&zeta.x, &zeta.t);
    let scale = params.c.powf(1.0 / (2.0 - params.q as f64));
    Ok(scale * rel.fourth.sqrt().sqrt())
}

/// `X_j Gamma` at a point `eta` (pole at the origin), written into `out`.
///
/// `X_j(N^4) = 4 |x|^2 x_j + 16 sum_k t_k (A^(k) x)_j`.
pub(crate) fn horizontal_gradient_at(
    params: &FundamentalSolutionParams,
    spec: &GroupSpec,
    ex: &[f64],
    et: &[f64],
    out: &mut [f64],
) -> f64 {
    let m = spec.m();
    let r2: f64 = ex.iter().map(|v| v * v).sum();
    let s2: f64 = et.iter().map(|v| v * v).sum();
    let fourth = r2 * r2 + 16.0 * s2;
    let g = params.derivative_factor(fourth);
    for (o, v) in out.iter_mut().zip(ex) {
        *o = 4.0 * r2 * v;
    }
    let mut buf = vec![0.0; m];
    for (k, tk) in et.iter().enumerate() {
        spec.apply(k, ex, &mut buf);
        for (o, b) in out.iter_mut().zip(&buf) {
            *o += 16.0 * tk * b;
        }
    }
    for o in out.iter_mut() {
        *o *= g;
    }
    fourth
}

/// Analytic horizontal gradient `(X_j Gamma_zeta)(xi)`, `j = 1..m`.
///
/// Left-invariance of the `X_j` reduces this to the gradient at
/// `eta = zeta^{-1} o xi`.
pub fn horizontal_gradient_gamma(
    params: &FundamentalSolutionParams,
    spec: &GroupSpec,
    xi: &Point,
    zeta: &Point,
) -> Result<Vec<f64>> {
    let eta = spec.compose(&spec.inverse(zeta), xi)?;
    let mut out = vec![0.0; spec.m()];
    let fourth = horizontal_gradient_at(params, spec, &eta.x, &eta.t, &mut out);
    pole_check(fourth)?;
    Ok(out)
}

/// Axis-aligned box in the flat `(x, t)` coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl CoordBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::Dimension("box corners differ in length".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(Error::InvalidArgument("box needs lo < hi on every axis".into()));
        }
        Ok(Self { lo, hi })
    }

    /// `[-hx, hx]^m x [-ht, ht]^n`.
    pub fn symmetric(spec: &GroupSpec, hx: f64, ht: f64) -> Result<Self> {
        let (m, n) = (spec.m(), spec.n());
        let lo = std::iter::repeat_n(-hx, m).chain(std::iter::repeat_n(-ht, n)).collect();
        let hi = std::iter::repeat_n(hx, m).chain(std::iter::repeat_n(ht, n)).collect();
        Self::new(lo, hi)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains_strictly(&self, coords: &[f64]) -> bool {
        coords.iter().zip(self.lo.iter().zip(&self.hi)).all(|(c, (a, b))| a < c && c < b)
    }

    pub fn contains(&self, coords: &[f64]) -> bool {
        coords.iter().zip(self.lo.iter().zip(&self.hi)).all(|(c, (a, b))| a <= c && c <= b)
    }
}

/// Result of [`calibrate_c`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub c: f64,
    /// Flux of the horizontal gradient of `Gamma` with `c = 1`.
    pub unit_flux: f64,
    pub nodes: usize,
}

/// Outward flux of the horizontal gradient of `Gamma` (pole at the origin)
/// through the boundary of `bx`.
///
/// On a face `{x_j = const}` the integrand is `+-X_j Gamma`; on a face
/// `{t_k = const}` it is `+-sum_j (X_j Gamma) (A^(k) x)_j / 2`. Faces are
/// integrated in order (axis, then low side before high side) with a tensor
/// Gauss-Legendre rule of `nodes` points per axis.
pub fn flux(params: &FundamentalSolutionParams, spec: &GroupSpec, bx: &CoordBox, nodes: usize) -> Result<f64> {
    let (m, n) = (spec.m(), spec.n());
    let dim = m + n;
    if bx.dim() != dim {
        return Err(Error::Dimension(format!("box has {} axes, group has {dim}", bx.dim())));
    }
    if !bx.contains_strictly(&vec![0.0; dim]) {
        return Err(Error::InvalidArgument("origin must lie strictly inside the box".into()));
    }
    let nodes =
        NonZeroUsize::new(nodes).ok_or_else(|| Error::InvalidArgument("flux grid needs at least one node".into()))?;
    let rule = GaussLegendre::new(nodes);
    let ref_pairs = rule.as_node_weight_pairs();

    let mut total = CompensatedSum::new();
    let mut p = vec![0.0; dim];
    let mut grad = vec![0.0; m];
    let mut ax = vec![0.0; m];
    for axis in 0..dim {
        let free: Vec<usize> = (0..dim).filter(|&a| a != axis).collect();
        // Scaled nodes and weights per free axis.
        let scaled: Vec<Vec<(f64, f64)>> = free
            .iter()
            .map(|&a| {
                let (lo, hi) = (bx.lo[a], bx.hi[a]);
                let half = 0.5 * (hi - lo);
                let mid = 0.5 * (hi + lo);
                ref_pairs.iter().map(|&(x, w)| (mid + half * x, half * w)).collect()
            })
            .collect();
        for (side, sign) in [(bx.lo[axis], -1.0), (bx.hi[axis], 1.0)] {
            p[axis] = side;
            let mut face = CompensatedSum::new();
            let mut idx = vec![0usize; free.len()];
            'cells: loop {
                let mut w = 1.0;
                for (slot, &a) in free.iter().enumerate() {
                    let (c, wt) = scaled[slot][idx[slot]];
                    p[a] = c;
                    w *= wt;
                }
                let (x, t) = p.split_at(m);
                horizontal_gradient_at(params, spec, x, t, &mut grad);
                let integrand = if axis < m {
                    grad[axis]
                } else {
                    spec.apply(axis - m, x, &mut ax);
                    0.5 * grad.iter().zip(&ax).map(|(g, a)| g * a).sum::<f64>()
                };
                face.add(sign * w * integrand);
                // odometer, last free axis fastest
                let mut s = free.len();
                loop {
                    if s == 0 {
                        break 'cells;
                    }
                    s -= 1;
                    idx[s] += 1;
                    if idx[s] < nodes.get() {
                        break;
                    }
                    idx[s] = 0;
                }
            }
            total.add(face.total());
        }
    }
    Ok(total.total())
}

/// Normalization `c` making the flux of the horizontal gradient of `Gamma`
/// through `bx` equal to `-1`.
pub fn calibrate_c(spec: &GroupSpec, bx: &CoordBox, nodes: usize) -> Result<Calibration> {
    let unit = FundamentalSolutionParams::unit(spec)?;
    let f = flux(&unit, spec, bx, nodes)?;
    if !f.is_finite() || f.abs() < f64::MIN_POSITIVE {
        return Err(Error::Calibration(format!("degenerate flux {f}")));
    }
    let c = -1.0 / f;
    if !(c > 0.0) {
        return Err(Error::Calibration(format!("flux {f} has the wrong sign")));
    }
    Ok(Calibration { c, unit_flux: f, nodes })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h1() -> GroupSpec {
        GroupSpec::heisenberg(1).unwrap()
    }

    fn pt(x: &[f64], t: &[f64]) -> Point {
        Point::new(x.to_vec(), t.to_vec())
    }

    #[test]
    fn gauge_values() {
        let g = h1();
        assert_eq!(gauge(&g, &pt(&[1.0, 0.0], &[0.0])).unwrap().fourth_power, 1.0);
        assert_eq!(gauge(&g, &pt(&[0.0, 0.0], &[1.0])).unwrap().fourth_power, 16.0);
        let a = GroupSpec::abelian(3).unwrap();
        assert_eq!(gauge(&a, &pt(&[1.0, 1.0, 0.0], &[])).unwrap().fourth_power, 4.0);
    }

    #[test]
    fn gamma_values_and_pole() {
        let g = h1();
        let p = FundamentalSolutionParams::unit(&g).unwrap();
        assert_eq!(gamma(&p, &g, &pt(&[1.0, 0.0], &[0.0])).unwrap(), 1.0);
        let v = gamma(&p, &g, &pt(&[0.0, 1.0], &[1.0])).unwrap();
        assert!((v - 17f64.powf(-0.5)).abs() < 1e-15);
        assert!(matches!(gamma(&p, &g, &g.origin()), Err(Error::Pole { .. })));
    }

    #[test]
    fn pole_translate_hand_value() {
        // zeta^{-1} o xi = ((-1,1), 3/2): N^4 = 4 + 36 = 40.
        let g = h1();
        let p = FundamentalSolutionParams::unit(&g).unwrap();
        let zeta = pt(&[1.0, 0.0], &[0.0]);
        let xi = pt(&[0.0, 1.0], &[1.0]);
        let eta = g.compose(&g.inverse(&zeta), &xi).unwrap();
        assert_eq!(eta, pt(&[-1.0, 1.0], &[1.5]));
        let v = gamma_pole(&p, &g, &xi, &zeta).unwrap();
        assert!((v - 40f64.powf(-0.5)).abs() < 1e-15);
        let d = quasi_distance(&p, &g, &xi, &zeta).unwrap();
        assert!((d - 40f64.powf(0.25)).abs() < 1e-14);
        assert_eq!(quasi_distance(&p, &g, &xi, &xi).unwrap(), 0.0);
        assert!(matches!(gamma_pole(&p, &g, &xi, &xi), Err(Error::Pole { .. })));
        let w = gamma_pole(&p, &g, &xi, &g.origin()).unwrap();
        assert_eq!(w, gamma(&p, &g, &xi).unwrap());
    }

    #[test]
    fn params_reject_bad_constants() {
        let g = h1();
        assert!(FundamentalSolutionParams::new(&g, 0.0).is_err());
        assert!(FundamentalSolutionParams::new(&g, -1.0).is_err());
    }

    #[test]
    fn gradient_along_radial_direction() {
        // t = 0, x = (r, 0): X_1 Gamma = c (2 - Q) r^{1-Q}.
        for g in [h1(), GroupSpec::quaternionic(), GroupSpec::abelian(3).unwrap()] {
            let p = FundamentalSolutionParams::new(&g, 0.7).unwrap();
            let r = 1.3;
            let mut x = vec![0.0; g.m()];
            x[0] = r;
            let xi = Point::new(x, vec![0.0; g.n()]);
            let grad = horizontal_gradient_gamma(&p, &g, &xi, &g.origin()).unwrap();
            let q = g.homogeneous_dimension() as f64;
            let expect = 0.7 * (2.0 - q) * r.powf(1.0 - q);
            assert!((grad[0] - expect).abs() < 1e-14 * expect.abs());
            assert!(grad[1..].iter().all(|v| v.abs() < 1e-15));
        }
    }

    #[test]
    fn abelian_gradient_is_euclidean() {
        let g = GroupSpec::abelian(3).unwrap();
        let p = FundamentalSolutionParams::unit(&g).unwrap();
        let xi = pt(&[0.3, -1.2, 0.5], &[]);
        let zeta = pt(&[-0.1, 0.2, 0.4], &[]);
        let grad = horizontal_gradient_gamma(&p, &g, &xi, &zeta).unwrap();
        let d: Vec<f64> = xi.x.iter().zip(&zeta.x).map(|(a, b)| a - b).collect();
        let r: f64 = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        for j in 0..3 {
            assert!((grad[j] + d[j] / r.powi(3)).abs() < 1e-14);
        }
    }

    #[test]
    fn abelian_calibration_is_newtonian() {
        let g = GroupSpec::abelian(3).unwrap();
        let bx = CoordBox::symmetric(&g, 1.0, 1.0).unwrap();
        let cal = calibrate_c(&g, &bx, 16).unwrap();
        assert!((cal.c - 1.0 / (4.0 * std::f64::consts::PI)).abs() < 1e-4);
        let other = CoordBox::new(vec![-0.7, -1.5, -1.1], vec![1.8, 1.2, 0.9]).unwrap();
        let p = FundamentalSolutionParams::new(&g, cal.c).unwrap();
        let f = flux(&p, &g, &other, 24).unwrap();
        assert!((f + 1.0).abs() < 1e-6, "flux {f}");
    }

    #[test]
    fn flux_rejects_origin_outside() {
        let g = h1();
        let p = FundamentalSolutionParams::unit(&g).unwrap();
        let bx = CoordBox::new(vec![0.1, -1.0, -1.0], vec![1.0, 1.0, 1.0]).unwrap();
        assert!(flux(&p, &g, &bx, 4).is_err());
    }
}
