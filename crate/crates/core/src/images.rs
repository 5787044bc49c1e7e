//! Method-of-images Green-function candidates on l-wedges (half-spaces,
//! quadrants, shifted wedges) and on strips.
//!
//! Wedge `{x_k > a_k, k in S}`: one charge per subset of the reflecting
//! faces, reflected across every face in the subset, with sign
//! `(-1)^{|subset|}`.
//!
//! Strip `{0 < x_l < a}`: charges `zeta_{+,j}` (l-coordinate `y_l - 2aj`, sign +)
//! and `zeta_{-,j}` (l-coordinate `-y_l + 2aj`, sign -), `j` in `Z`, summed
//! pairwise per `j` in the order `j = 0, 1, -1, 2, -2, ...`.
//!
//! Boundary traces are *measured* here, not assumed to vanish. Away from
//! the center `x = 0` the bilinear term of the group law makes the trace
//! nonzero on non-abelian groups.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::{FundamentalSolutionParams, Observer, POLE_EXCLUSION};
use crate::group::{GroupSpec, Point};
use crate::numerics::{linspace, power_tail, CompensatedSum, MultiIndex};
use crate::operator::ResidualReport;

/// Hard cap on the strip cutoff in tolerance mode.
pub const MAX_STRIP_CUTOFF: usize = 10_000_000;

/// Reflecting hyperplane `{x_axis = offset}` of a wedge; the wedge is the side `x_axis > offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Face {
    pub axis: usize,
    pub offset: f64,
}

/// Unbounded domain carrying an image Green function. Axes are zero-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DomainSpec {
    Wedge { faces: Vec<Face> },
    Strip { axis: usize, width: f64 },
}

/// A boundary hyperplane with its outward normal sign (`-1` when the domain
/// lies on the side of increasing coordinate).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFace {
    pub axis: usize,
    pub value: f64,
    pub outward: f64,
}

impl DomainSpec {
    pub fn half_space(axis: usize) -> Self {
        DomainSpec::Wedge { faces: vec![Face { axis, offset: 0.0 }] }
    }

    pub fn quadrant(first: usize, second: usize) -> Self {
        DomainSpec::Wedge { faces: vec![Face { axis: first, offset: 0.0 }, Face { axis: second, offset: 0.0 }] }
    }

    /// `{x_k > 0, k = 0..l}`.
    pub fn wedge(l: usize) -> Self {
        DomainSpec::Wedge { faces: (0..l).map(|axis| Face { axis, offset: 0.0 }).collect() }
    }

    pub fn shifted_wedge(faces: Vec<Face>) -> Self {
        DomainSpec::Wedge { faces }
    }

    pub fn strip(axis: usize, width: f64) -> Self {
        DomainSpec::Strip { axis, width }
    }

    pub fn check(&self, spec: &GroupSpec) -> Result<()> {
        let m = spec.m();
        match self {
            DomainSpec::Wedge { faces } => {
                if faces.is_empty() {
                    return Err(Error::InvalidArgument("wedge needs at least one face".into()));
                }
                for (i, f) in faces.iter().enumerate() {
                    if f.axis >= m {
                        return Err(Error::InvalidArgument(format!("face axis {} outside 0..{m}", f.axis)));
                    }
                    if !f.offset.is_finite() {
                        return Err(Error::InvalidArgument("face offset must be finite".into()));
                    }
                    if faces[..i].iter().any(|g| g.axis == f.axis) {
                        return Err(Error::InvalidArgument(format!("axis {} reflected twice", f.axis)));
                    }
                }
                Ok(())
            }
            DomainSpec::Strip { axis, width } => {
                if *axis >= m {
                    return Err(Error::InvalidArgument(format!("strip axis {axis} outside 0..{m}")));
                }
                if !(*width > 0.0) || !width.is_finite() {
                    return Err(Error::InvalidArgument(format!("strip width must be > 0, got {width}")));
                }
                Ok(())
            }
        }
    }

    pub fn boundary_faces(&self) -> Vec<BoundaryFace> {
        match self {
            DomainSpec::Wedge { faces } => {
                faces.iter().map(|f| BoundaryFace { axis: f.axis, value: f.offset, outward: -1.0 }).collect()
            }
            DomainSpec::Strip { axis, width } => vec![
                BoundaryFace { axis: *axis, value: 0.0, outward: -1.0 },
                BoundaryFace { axis: *axis, value: *width, outward: 1.0 },
            ],
        }
    }

    /// Open domain membership.
    pub fn contains(&self, p: &Point) -> bool {
        match self {
            DomainSpec::Wedge { faces } => faces.iter().all(|f| p.x[f.axis] > f.offset),
            DomainSpec::Strip { axis, width } => p.x[*axis] > 0.0 && p.x[*axis] < *width,
        }
    }

    /// Closed domain membership.
    pub fn contains_closure(&self, p: &Point) -> bool {
        match self {
            DomainSpec::Wedge { faces } => faces.iter().all(|f| p.x[f.axis] >= f.offset),
            DomainSpec::Strip { axis, width } => p.x[*axis] >= 0.0 && p.x[*axis] <= *width,
        }
    }

    /// Euclidean distance from `p` to the nearest boundary hyperplane (signed
    /// negative when outside).
    pub fn boundary_distance(&self, p: &Point) -> f64 {
        self.boundary_faces().iter().map(|f| -f.outward * (p.x[f.axis] - f.value)).fold(f64::INFINITY, f64::min)
    }
}

/// JSON form of a domain; axes are one-based, as in `x_1 .. x_m`.
///
/// ```json
/// {"kind": "wedge", "faces": [{"axis": 1, "offset": 0.0}, {"axis": 2}]}
/// {"kind": "strip", "axis": 1, "width": 2.0}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DomainConfig {
    Wedge { faces: Vec<FaceConfig> },
    Strip { axis: usize, width: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceConfig {
    pub axis: usize,
    #[serde(default)]
    pub offset: f64,
}

impl DomainConfig {
    pub fn build(&self, spec: &GroupSpec) -> Result<DomainSpec> {
        let zero_based =
            |axis: usize| axis.checked_sub(1).ok_or_else(|| Error::InvalidArgument("axes are one-based".into()));
        let d = match self {
            DomainConfig::Wedge { faces } => DomainSpec::Wedge {
                faces: faces
                    .iter()
                    .map(|f| Ok(Face { axis: zero_based(f.axis)?, offset: f.offset }))
                    .collect::<Result<_>>()?,
            },
            DomainConfig::Strip { axis, width } => DomainSpec::Strip { axis: zero_based(*axis)?, width: *width },
        };
        d.check(spec)?;
        Ok(d)
    }
}

/// Sign of an image charge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    fn parity(count: usize) -> Self {
        if count.is_multiple_of(2) {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

/// A reflected pole and its sign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageCharge {
    pub point: Point,
    pub sign: Sign,
}

/// Mirror image of `zeta` across `{x_axis = offset}`: `y_axis -> 2 offset - y_axis`.
pub fn reflect(zeta: &Point, axis: usize, offset: f64) -> Point {
    let mut p = zeta.clone();
    p.x[axis] = 2.0 * offset - p.x[axis];
    p
}

fn require_pole(spec: &GroupSpec, domain: &DomainSpec, zeta: &Point) -> Result<()> {
    spec.check_point(zeta)?;
    domain.check(spec)?;
    if !domain.contains(zeta) {
        return Err(Error::InvalidPole(format!("pole {:?} is not strictly inside the domain", zeta.x)));
    }
    Ok(())
}

/// All `2^l` wedge charges. Charge `i` is reflected across the faces whose
/// bit is set in `i` (bit `r` = `faces[r]`), so charge 0 is the principal pole.
pub fn wedge_images(spec: &GroupSpec, zeta: &Point, domain: &DomainSpec) -> Result<Vec<ImageCharge>> {
    let DomainSpec::Wedge { faces } = domain else {
        return Err(Error::InvalidArgument("wedge_images needs a wedge domain".into()));
    };
    require_pole(spec, domain, zeta)?;
    if faces.len() >= usize::BITS as usize {
        return Err(Error::InvalidArgument("too many faces".into()));
    }
    Ok((0..1usize << faces.len())
        .map(|mask| {
            let mut p = zeta.clone();
            for (r, f) in faces.iter().enumerate() {
                if mask >> r & 1 == 1 {
                    p.x[f.axis] = 2.0 * f.offset - p.x[f.axis];
                }
            }
            ImageCharge { point: p, sign: Sign::parity(mask.count_ones() as usize) }
        })
        .collect())
}

/// Order in which strip indices are visited: `0, 1, -1, 2, -2, ...`.
pub fn strip_order(cutoff: usize) -> impl Iterator<Item = i64> {
    std::iter::once(0).chain((1..=cutoff as i64).flat_map(|j| [j, -j]))
}

/// Strip charges for `j` in `[-cutoff, cutoff]`, as pairs `(+,j), (-,j)`.
pub fn strip_images(spec: &GroupSpec, zeta: &Point, domain: &DomainSpec, cutoff: usize) -> Result<Vec<ImageCharge>> {
    let DomainSpec::Strip { axis, width } = *domain else {
        return Err(Error::InvalidArgument("strip_images needs a strip domain".into()));
    };
    require_pole(spec, domain, zeta)?;
    let y = zeta.x[axis];
    let mut out = Vec::with_capacity(2 * (2 * cutoff + 1));
    for j in strip_order(cutoff) {
        let shift = 2.0 * width * j as f64;
        let mut plus = zeta.clone();
        plus.x[axis] = y - shift;
        let mut minus = zeta.clone();
        minus.x[axis] = -y + shift;
        out.push(ImageCharge { point: plus, sign: Sign::Plus });
        out.push(ImageCharge { point: minus, sign: Sign::Minus });
    }
    Ok(out)
}

/// How many strip terms to keep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum TruncationPolicy {
    /// Keep `j` in `[-J, J]`.
    Fixed {
        #[serde(rename = "J")]
        cutoff: usize,
    },
    /// Smallest symmetric cutoff whose tail bound is below `tol` times the
    /// principal term.
    Tolerance { tol: f64 },
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy::Tolerance { tol: 1e-8 }
    }
}

impl TruncationPolicy {
    pub fn check(&self) -> Result<()> {
        match *self {
            TruncationPolicy::Fixed { cutoff: 0 } => Err(Error::InvalidArgument("fixed cutoff must be >= 1".into())),
            TruncationPolicy::Tolerance { tol } if !(tol > 0.0) => {
                Err(Error::InvalidArgument("truncation tolerance must be > 0".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Geometry of a strip pair sum seen from one observation point.
///
/// Every strip charge differs from `zeta` only in the l-coordinate `s`, so
/// `|eta_x|^2 = rho2 + (x_l - s)^2` and `eta_t = t0 - s beta / 2`.
struct StripFrame {
    xl: f64,
    yl: f64,
    width: f64,
    rho2: f64,
    t0: Vec<f64>,
    beta: Vec<f64>,
}

impl StripFrame {
    fn new(obs: &Observer<'_>, y: &[f64], tau: &[f64], axis: usize, width: f64) -> Self {
        let spec = obs.spec();
        let rho2 =
            obs.x.iter().zip(y).enumerate().filter(|(i, _)| *i != axis).map(|(_, (a, b))| (a - b) * (a - b)).sum();
        let n = spec.n();
        let mut t0 = Vec::with_capacity(n);
        let mut beta = Vec::with_capacity(n);
        for k in 0..n {
            let atx = obs.atx(k);
            let d: f64 = y.iter().zip(atx).enumerate().filter(|(i, _)| *i != axis).map(|(_, (a, b))| a * b).sum();
            t0.push(obs.t[k] - tau[k] - 0.5 * d);
            beta.push(atx[axis]);
        }
        Self { xl: obs.x[axis], yl: y[axis], width, rho2, t0, beta }
    }

    #[inline]
    fn fourth(&self, s: f64) -> f64 {
        let e = self.xl - s;
        let r2 = self.rho2 + e * e;
        let mut s2 = 0.0;
        for (t0, b) in self.t0.iter().zip(&self.beta) {
            let v = t0 - 0.5 * s * b;
            s2 += v * v;
        }
        r2 * r2 + 16.0 * s2
    }

    fn plus(&self, j: i64) -> f64 {
        self.yl - 2.0 * self.width * j as f64
    }

    fn minus(&self, j: i64) -> f64 {
        -self.yl + 2.0 * self.width * j as f64
    }

    /// Bound on the vertical-part correction summed over `|j| > cutoff`.
    fn vertical_correction(&self, params: &FundamentalSolutionParams, cutoff: usize) -> f64 {
        if self.t0.is_empty() {
            return 0.0;
        }
        let q = params.q as f64;
        let a = self.width;
        let t0n = self.t0.iter().map(|v| v * v).sum::<f64>().sqrt();
        let bn = self.beta.iter().map(|v| v * v).sum::<f64>().sqrt();
        let a0 = t0n + 1.5 * a * bn;
        let b = a * bn;
        let p = (q - 2.0) / 4.0;
        let start = cutoff as f64;
        64.0 * params.c
            * p
            * (2.0 * a).powf(-(q + 2.0))
            * (2.0 * a0 * a0 * power_tail(start, q + 2.0) + 2.0 * b * b * power_tail(start, q))
    }

    fn xl_clamped(&self) -> f64 {
        self.xl.clamp(0.0, self.width)
    }

    /// Bound on `sum_{|j| > J} |pair_j|`.
    fn pair_tail_bound(&self, params: &FundamentalSolutionParams, cutoff: usize) -> f64 {
        let q = params.q as f64;
        let a = self.width;
        let big_c = params.c * (q - 2.0) * 2.0 * self.xl_clamped();
        let main = 2.0 * big_c * (2.0 * a).powf(1.0 - q) * ((cutoff - 1) as f64).powf(2.0 - q) / (q - 2.0);
        main + self.vertical_correction(params, cutoff - 1)
    }

    /// Bound on `|sum_{|j| > J} pair_j|` using the cancellation between `j` and `-j`.
    fn symmetric_tail_bound(&self, params: &FundamentalSolutionParams, cutoff: usize) -> f64 {
        let q = params.q as f64;
        let a = self.width;
        let main = params.c
            * 4.0
            * self.xl_clamped()
            * self.yl
            * (q - 2.0)
            * (q + 1.0)
            * (2.0 * a).powf(-q)
            * power_tail(cutoff as f64, q);
        main + self.vertical_correction(params, cutoff)
    }
}

/// Fast evaluator of a Green candidate for one domain and truncation.
pub(crate) struct GreenKernel<'a> {
    pub(crate) params: &'a FundamentalSolutionParams,
    pub(crate) spec: &'a GroupSpec,
    pub(crate) domain: &'a DomainSpec,
    pub(crate) truncation: TruncationPolicy,
}

impl<'a> GreenKernel<'a> {
    pub(crate) fn new(
        params: &'a FundamentalSolutionParams,
        spec: &'a GroupSpec,
        domain: &'a DomainSpec,
        truncation: TruncationPolicy,
    ) -> Result<Self> {
        domain.check(spec)?;
        truncation.check()?;
        Ok(Self { params, spec, domain, truncation })
    }

    fn strip_frame(&self, obs: &Observer<'_>, y: &[f64], tau: &[f64]) -> Option<StripFrame> {
        match *self.domain {
            DomainSpec::Strip { axis, width } => Some(StripFrame::new(obs, y, tau, axis, width)),
            DomainSpec::Wedge { .. } => None,
        }
    }

    fn cutoff_for(&self, frame: &StripFrame, obs: &Observer<'_>, y: &[f64], tau: &[f64]) -> Result<usize> {
        match self.truncation {
            TruncationPolicy::Fixed { cutoff } => Ok(cutoff),
            TruncationPolicy::Tolerance { tol } => {
                let principal = self.params.gamma_from_fourth(obs.fourth(y, tau).fourth);
                let target = tol * principal.abs();
                let ok = |j: usize| frame.symmetric_tail_bound(self.params, j) <= target;
                if ok(1) {
                    return Ok(1);
                }
                let mut hi = 2usize;
                while !ok(hi) {
                    if hi >= MAX_STRIP_CUTOFF {
                        return Err(Error::Truncation {
                            cutoff: hi,
                            bound: frame.symmetric_tail_bound(self.params, hi),
                            target,
                        });
                    }
                    hi = (hi * 2).min(MAX_STRIP_CUTOFF);
                }
                let mut lo = hi / 2;
                while hi - lo > 1 {
                    let mid = (lo + hi) / 2;
                    if ok(mid) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                Ok(hi)
            }
        }
    }

    /// Strip cutoff that [`GreenKernel::value`] would use for this pair.
    pub(crate) fn strip_cutoff(&self, xi: &Point, zeta: &Point) -> Result<Option<usize>> {
        let obs = Observer::new(self.spec, xi);
        match self.strip_frame(&obs, &zeta.x, &zeta.t) {
            Some(frame) => Ok(Some(self.cutoff_for(&frame, &obs, &zeta.x, &zeta.t)?)),
            None => Ok(None),
        }
    }

    fn gamma_checked(&self, fourth: f64) -> Result<f64> {
        let d = fourth.sqrt().sqrt();
        if d < POLE_EXCLUSION {
            return Err(Error::Pole { distance: d });
        }
        Ok(self.params.gamma_from_fourth(fourth))
    }

    /// `G(xi, zeta)` with `xi` given through its observer.
    pub(crate) fn value(&self, obs: &Observer<'_>, y: &[f64], tau: &[f64], scratch: &mut Vec<f64>) -> Result<f64> {
        match self.domain {
            DomainSpec::Wedge { faces } => {
                let mut acc = CompensatedSum::new();
                for mask in 0..1usize << faces.len() {
                    scratch.clear();
                    scratch.extend_from_slice(y);
                    for (r, f) in faces.iter().enumerate() {
                        if mask >> r & 1 == 1 {
                            scratch[f.axis] = 2.0 * f.offset - scratch[f.axis];
                        }
                    }
                    let g = self.gamma_checked(obs.fourth(scratch, tau).fourth)?;
                    acc.add(Sign::parity(mask.count_ones() as usize).value() * g);
                }
                Ok(acc.total())
            }
            DomainSpec::Strip { .. } => {
                let frame = self.strip_frame(obs, y, tau).expect("strip");
                let cutoff = self.cutoff_for(&frame, obs, y, tau)?;
                let mut acc = CompensatedSum::new();
                for j in strip_order(cutoff) {
                    let gp = self.gamma_checked(frame.fourth(frame.plus(j)))?;
                    let gm = self.gamma_checked(frame.fourth(frame.minus(j)))?;
                    acc.add(gp - gm);
                }
                Ok(acc.total())
            }
        }
    }

    /// Principal term `Gamma(zeta^{-1} o xi)`.
    pub(crate) fn principal(&self, obs: &Observer<'_>, y: &[f64], tau: &[f64]) -> Result<f64> {
        self.gamma_checked(obs.fourth(y, tau).fourth)
    }

    /// `X_{l,zeta}` of `zeta -> Gamma(M(zeta)^{-1} o xi)` where `M` moves
    /// only x-coordinates, producing `image_y`; `scale` is `dM_l/dy_l` (+-1).
    ///
    /// With `eta = w^{-1} o xi`, `w = M(zeta)`:
    /// `dN^4/dw_y,i = -4|eta_x|^2 eta_x,i - 16 sum_k eta_t,k (A^(k)^T x)_i`,
    /// `dN^4/dw_tau,k = -32 eta_t,k`, and
    /// `X_l = scale d/dw_y,l + 1/2 sum_k (A^(k) y)_l d/dw_tau,k`.
    fn image_pole_derivative(
        &self,
        obs: &Observer<'_>,
        image_y: &[f64],
        tau: &[f64],
        ay_l: &[f64],
        axis: usize,
        scale: f64,
    ) -> Result<f64> {
        let n = self.spec.n();
        let ex_l = obs.x[axis] - image_y[axis];
        let r2: f64 = obs.x.iter().zip(image_y).map(|(a, b)| (a - b) * (a - b)).sum();
        let mut s2 = 0.0;
        let mut d_wy = -4.0 * r2 * ex_l;
        let mut d_tau_part = 0.0;
        for k in 0..n {
            let et = obs.eta_t(k, image_y, tau);
            s2 += et * et;
            d_wy -= 16.0 * et * obs.atx(k)[axis];
            d_tau_part += 0.5 * ay_l[k] * (-32.0 * et);
        }
        let fourth = r2 * r2 + 16.0 * s2;
        let d = fourth.sqrt().sqrt();
        if d < POLE_EXCLUSION {
            return Err(Error::Pole { distance: d });
        }
        let g = self.params.derivative_factor(fourth);
        Ok(g * (scale * d_wy + d_tau_part))
    }

    /// `(X_{axis} G(xi, .))(zeta)`: horizontal derivative in the pole variable.
    pub(crate) fn pole_derivative(
        &self,
        obs: &Observer<'_>,
        y: &[f64],
        tau: &[f64],
        axis: usize,
        scratch: &mut Vec<f64>,
    ) -> Result<f64> {
        let n = self.spec.n();
        let m = self.spec.m();
        // (A^(k) y)_axis for the unreflected pole
        let mut ay_l = Vec::with_capacity(n);
        let mut buf = vec![0.0; m];
        for k in 0..n {
            self.spec.apply(k, y, &mut buf);
            ay_l.push(buf[axis]);
        }
        let mut acc = CompensatedSum::new();
        match self.domain {
            DomainSpec::Wedge { faces } => {
                for mask in 0..1usize << faces.len() {
                    scratch.clear();
                    scratch.extend_from_slice(y);
                    let mut scale = 1.0;
                    for (r, f) in faces.iter().enumerate() {
                        if mask >> r & 1 == 1 {
                            scratch[f.axis] = 2.0 * f.offset - scratch[f.axis];
                            if f.axis == axis {
                                scale = -1.0;
                            }
                        }
                    }
                    let dv = self.image_pole_derivative(obs, scratch, tau, &ay_l, axis, scale)?;
                    acc.add(Sign::parity(mask.count_ones() as usize).value() * dv);
                }
            }
            &DomainSpec::Strip { axis: l, .. } => {
                let frame = self.strip_frame(obs, y, tau).expect("strip");
                let cutoff = self.cutoff_for(&frame, obs, y, tau)?;
                let moved_scale = |s: f64| if l == axis { s } else { 1.0 };
                for j in strip_order(cutoff) {
                    scratch.clear();
                    scratch.extend_from_slice(y);
                    scratch[l] = frame.plus(j);
                    let dp = self.image_pole_derivative(obs, scratch, tau, &ay_l, axis, moved_scale(1.0))?;
                    scratch[l] = frame.minus(j);
                    let dm = self.image_pole_derivative(obs, scratch, tau, &ay_l, axis, moved_scale(-1.0))?;
                    acc.add(dp - dm);
                }
            }
        }
        Ok(acc.total())
    }
}

/// `G(xi, zeta)`: signed sum of `Gamma` over the images of `zeta`.
///
/// `zeta` must be strictly inside the domain; `xi` may lie on its closure so
/// that boundary traces can be evaluated.
pub fn green_eval(
    params: &FundamentalSolutionParams,
    spec: &GroupSpec,
    domain: &DomainSpec,
    xi: &Point,
    zeta: &Point,
    truncation: TruncationPolicy,
) -> Result<f64> {
    spec.check_point(xi)?;
    require_pole(spec, domain, zeta)?;
    if !domain.contains_closure(xi) {
        return Err(Error::OutsideDomain(format!("{:?}", xi.x)));
    }
    let kernel = GreenKernel::new(params, spec, domain, truncation)?;
    let obs = Observer::new(spec, xi);
    kernel.value(&obs, &zeta.x, &zeta.t, &mut Vec::with_capacity(spec.m()))
}

/// Strip cutoff `J` that [`green_eval`] uses for this pair (`None` on wedges).
pub fn strip_cutoff(
    params: &FundamentalSolutionParams,
    spec: &GroupSpec,
    domain: &DomainSpec,
    xi: &Point,
    zeta: &Point,
    truncation: TruncationPolicy,
) -> Result<Option<usize>> {
    require_pole(spec, domain, zeta)?;
    spec.check_point(xi)?;
    GreenKernel::new(params, spec, domain, truncation)?.strip_cutoff(xi, zeta)
}

/// `(X_{axis} G(xi, .))(zeta)`, the horizontal derivative in the pole
/// variable that enters the layer potential.
pub fn green_pole_derivative(
    params: &FundamentalSolutionParams,
    spec: &GroupSpec,
    domain: &DomainSpec,
    xi: &Point,
    zeta: &Point,
    axis: usize,
    truncation: TruncationPolicy,
) -> Result<f64> {
    spec.check_point(xi)?;
    spec.check_point(zeta)?;
    domain.check(spec)?;
    if axis >= spec.m() {
        return Err(Error::InvalidArgument(format!("axis {axis} >= m")));
    }
    let kernel = GreenKernel::new(params, spec, domain, truncation)?;
    let obs = Observer::new(spec, xi);
    kernel.pole_derivative(&obs, &zeta.x, &zeta.t, axis, &mut Vec::with_capacity(spec.m()))
}

fn strip_frame_for(spec: &GroupSpec, domain: &DomainSpec, xi: &Point, zeta: &Point) -> Result<(StripFrame, usize)> {
    let DomainSpec::Strip { axis, width } = *domain else {
        return Err(Error::InvalidArgument("strip domain required".into()));
    };
    require_pole(spec, domain, zeta)?;
    spec.check_point(xi)?;
    let obs = Observer::new(spec, xi);
    Ok((StripFrame::new(&obs, &zeta.x, &zeta.t, axis, width), axis))
}

/// Upper bound on `sum_{|j| > J} |pair_j|` for the strip series.
///
/// Radial part: the two gauges of a pair differ only through the
/// l-coordinate, whose distances differ by `2 x_l` and are at least
/// `2a(|j|-1)`; the mean-value bound on `r -> r^{2-Q}` then gives
/// `2 C (2a)^{1-Q} (J-1)^{2-Q} / (Q-2)` with `C = c (Q-2) 2 x_l`.
/// On non-abelian groups the vertical part `16|eta_t|^2` of each gauge is
/// bounded separately and added. Requires `J >= 2`.
pub fn strip_tail_bound(
    params: &FundamentalSolutionParams,
    spec: &GroupSpec,
    domain: &DomainSpec,
    zeta: &Point,
    xi: &Point,
    cutoff: usize,
) -> Result<f64> {
    if cutoff < 2 {
        return Err(Error::InvalidArgument(format!("tail bound is infinite for J = {cutoff}; increase J")));
    }
    let (frame, _) = strip_frame_for(spec, domain, xi, zeta)?;
    Ok(frame.pair_tail_bound(params, cutoff))
}

/// Upper bound on `|sum_{|j| > J} pair_j|` using the cancellation between
/// `pair_j` and `pair_{-j}`; decays like `J^{1-Q}`. Used for tolerance-mode
/// truncation. Requires `J >= 1`.
pub fn strip_symmetric_tail_bound(
    params: &FundamentalSolutionParams,
    spec: &GroupSpec,
    domain: &DomainSpec,
    zeta: &Point,
    xi: &Point,
    cutoff: usize,
) -> Result<f64> {
    if cutoff < 1 {
        return Err(Error::InvalidArgument("J must be >= 1".into()));
    }
    let (frame, _) = strip_frame_for(spec, domain, xi, zeta)?;
    Ok(frame.symmetric_tail_bound(params, cutoff))
}

/// `pair_j = Gamma(zeta_{+,j}^{-1} o xi) - Gamma(zeta_{-,j}^{-1} o xi)`.
pub fn strip_pair(
    params: &FundamentalSolutionParams,
    spec: &GroupSpec,
    domain: &DomainSpec,
    xi: &Point,
    zeta: &Point,
    j: i64,
) -> Result<f64> {
    let (frame, _) = strip_frame_for(spec, domain, xi, zeta)?;
    Ok(params.gamma_from_fourth(frame.fourth(frame.plus(j))) - params.gamma_from_fourth(frame.fourth(frame.minus(j))))
}

/// Product grid on the boundary hyperplanes of a domain.
///
/// `lo`, `hi` and `counts` span all `m + n` coordinates; the coordinate
/// normal to each face is overwritten with the face value and points that
/// fall outside the closed domain are dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryGrid {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub counts: Vec<usize>,
}

impl BoundaryGrid {
    pub fn samples(&self, spec: &GroupSpec, domain: &DomainSpec) -> Result<Vec<(usize, Point)>> {
        let dim = spec.dim();
        if self.lo.len() != dim || self.hi.len() != dim || self.counts.len() != dim {
            return Err(Error::Dimension(format!("boundary grid must span {dim} coordinates")));
        }
        let axes: Vec<Vec<f64>> = (0..dim).map(|a| linspace(self.lo[a], self.hi[a], self.counts[a])).collect();
        let mut out = Vec::new();
        for (fi, face) in domain.boundary_faces().iter().enumerate() {
            let mut counts: Vec<usize> = self.counts.clone();
            counts[face.axis] = 1;
            for idx in MultiIndex::new(&counts) {
                let coords: Vec<f64> = idx
                    .iter()
                    .enumerate()
                    .map(|(a, &i)| if a == face.axis { face.value } else { axes[a][i] })
                    .collect();
                let p = Point::from_coords(&coords, spec.m());
                if domain.contains_closure(&p) {
                    out.push((fi, p));
                }
            }
        }
        Ok(out)
    }
}

/// Measured boundary trace of a Green candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub samples: Vec<Point>,
    /// Index into [`DomainSpec::boundary_faces`] for each sample.
    pub faces: Vec<usize>,
    pub values: Vec<f64>,
    /// Principal term `Gamma(zeta^{-1} o xi)` at each sample.
    pub principal: Vec<f64>,
    pub max_abs: f64,
    /// Maximum of `|G|` over samples with `x = 0`.
    pub zero_subset_max: f64,
    /// Maximum of `|G| / |principal|` over all samples.
    pub max_relative: f64,
    /// Maximum of `|G| / |principal|` over samples with `x = 0`.
    pub zero_subset_relative: f64,
}

/// Evaluates `G(., zeta)` on boundary samples and summarizes the trace.
pub fn boundary_trace_scan(
    params: &FundamentalSolutionParams,
    spec: &GroupSpec,
    domain: &DomainSpec,
    zeta: &Point,
    grid: &BoundaryGrid,
    truncation: TruncationPolicy,
) -> Result<TraceReport> {
    require_pole(spec, domain, zeta)?;
    let kernel = GreenKernel::new(params, spec, domain, truncation)?;
    let samples = grid.samples(spec, domain)?;
    let mut report = TraceReport {
        samples: Vec::with_capacity(samples.len()),
        faces: Vec::with_capacity(samples.len()),
        values: Vec::with_capacity(samples.len()),
        principal: Vec::with_capacity(samples.len()),
        max_abs: 0.0,
        zero_subset_max: 0.0,
        max_relative: 0.0,
        zero_subset_relative: 0.0,
    };
    let mut scratch = Vec::with_capacity(spec.m());
    for (face, p) in samples {
        let obs = Observer::new(spec, &p);
        let v = kernel.value(&obs, &zeta.x, &zeta.t, &mut scratch)?;
        let g0 = kernel.principal(&obs, &zeta.x, &zeta.t)?;
        let rel = v.abs() / g0.abs();
        report.max_abs = report.max_abs.max(v.abs());
        report.max_relative = report.max_relative.max(rel);
        if p.x.iter().all(|&c| c == 0.0) {
            report.zero_subset_max = report.zero_subset_max.max(v.abs());
            report.zero_subset_relative = report.zero_subset_relative.max(rel);
        }
        report.samples.push(p);
        report.faces.push(face);
        report.values.push(v);
        report.principal.push(g0);
    }
    Ok(report)
}

/// Residuals `G(xi, zeta) - G(zeta, xi)` over interior pairs.
pub fn green_symmetry_check(
    params: &FundamentalSolutionParams,
    spec: &GroupSpec,
    domain: &DomainSpec,
    pairs: &[(Point, Point)],
    truncation: TruncationPolicy,
) -> Result<ResidualReport> {
    let mut residuals = Vec::with_capacity(pairs.len());
    for (xi, zeta) in pairs {
        if xi == zeta {
            return Err(Error::InvalidArgument("symmetry check needs xi != zeta".into()));
        }
        let a = green_eval(params, spec, domain, xi, zeta, truncation)?;
        let b = green_eval(params, spec, domain, zeta, xi, truncation)?;
        residuals.push(a - b);
    }
    Ok(ResidualReport::from_residuals(pairs.iter().map(|p| p.0.clone()).collect(), residuals, 0.0))
}

/// Coordinate hyperplane (zero-based axes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Hyperplane {
    /// `{x_axis = value}`
    X { axis: usize, value: f64 },
    /// `{t_axis = value}`
    T { axis: usize, value: f64 },
    /// `{<normal, (x, t)> = offset}`; only coordinate hyperplanes are classified.
    General { normal: Vec<f64>, offset: f64 },
}

/// Points of a hyperplane where every `X_j` is tangent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CharacteristicSet {
    Empty,
    /// Exactly the points with `x = 0`.
    CenterManifold,
}

/// `{x_l = c}`: `X_l` always has unit `d/dx_l` component, so nothing is
/// characteristic. `{t_k = c}`: all `X_j` are tangent iff `A^(k) x = 0`,
/// i.e. iff `x = 0` since `A^(k)` is orthogonal.
pub fn characteristic_points(spec: &GroupSpec, plane: &Hyperplane) -> Result<CharacteristicSet> {
    match plane {
        Hyperplane::X { axis, .. } if *axis < spec.m() => Ok(CharacteristicSet::Empty),
        Hyperplane::T { axis, .. } if *axis < spec.n() => Ok(CharacteristicSet::CenterManifold),
        Hyperplane::X { .. } | Hyperplane::T { .. } => {
            Err(Error::InvalidArgument("hyperplane axis out of range".into()))
        }
        Hyperplane::General { .. } => Err(Error::Unsupported("only coordinate hyperplanes are classified".into())),
    }
}

/// Pointwise test: are all `X_j` tangent to `plane` at `p`?
pub fn is_characteristic_at(spec: &GroupSpec, plane: &Hyperplane, p: &Point) -> Result<bool> {
    spec.check_point(p)?;
    let m = spec.m();
    let mut ax = vec![0.0; m];
    match plane {
        Hyperplane::X { axis, .. } if *axis < m => {
            // normal component of X_j is delta_{j, axis}
            Ok(false)
        }
        Hyperplane::T { axis, .. } if *axis < spec.n() => {
            spec.apply(*axis, &p.x, &mut ax);
            Ok(ax.iter().all(|v| v.abs() <= 1e-14))
        }
        Hyperplane::General { .. } => Err(Error::Unsupported("only coordinate hyperplanes".into())),
        _ => Err(Error::InvalidArgument("hyperplane axis out of range".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::gamma_pole;

    fn pt(x: &[f64], t: &[f64]) -> Point {
        Point::new(x.to_vec(), t.to_vec())
    }

    #[test]
    fn reflect_examples() {
        let z = pt(&[1.0, 2.0], &[3.0]);
        assert_eq!(reflect(&z, 0, 0.0), pt(&[-1.0, 2.0], &[3.0]));
        assert_eq!(reflect(&reflect(&z, 1, 0.7), 1, 0.7), z);
        assert_eq!(reflect(&pt(&[1.0, 5.0], &[0.0]), 0, 1.0).x[0], 1.0);
    }

    #[test]
    fn half_space_and_quadrant_signs() {
        let g = GroupSpec::heisenberg(1).unwrap();
        let z = pt(&[1.0, 2.0], &[0.5]);
        let hs = wedge_images(&g, &z, &DomainSpec::half_space(0)).unwrap();
        assert_eq!(hs.len(), 2);
        assert_eq!((hs[0].point.clone(), hs[0].sign), (z.clone(), Sign::Plus));
        assert_eq!((hs[1].point.clone(), hs[1].sign), (pt(&[-1.0, 2.0], &[0.5]), Sign::Minus));

        let q = wedge_images(&g, &z, &DomainSpec::quadrant(0, 1)).unwrap();
        let find = |x: [f64; 2]| q.iter().find(|c| c.point.x == x.to_vec()).unwrap().sign;
        assert_eq!(find([1.0, 2.0]), Sign::Plus);
        assert_eq!(find([-1.0, -2.0]), Sign::Plus);
        assert_eq!(find([-1.0, 2.0]), Sign::Minus);
        assert_eq!(find([1.0, -2.0]), Sign::Minus);
    }

    #[test]
    fn invalid_poles_rejected() {
        let g = GroupSpec::heisenberg(1).unwrap();
        let on_plane = pt(&[0.0, 1.0], &[0.0]);
        assert!(matches!(wedge_images(&g, &on_plane, &DomainSpec::half_space(0)), Err(Error::InvalidPole(_))));
        let outside = pt(&[3.0, 1.0], &[0.0]);
        assert!(matches!(strip_images(&g, &outside, &DomainSpec::strip(0, 2.0), 3), Err(Error::InvalidPole(_))));
    }

    #[test]
    fn strip_image_layout() {
        let g = GroupSpec::heisenberg(1).unwrap();
        let d = DomainSpec::strip(0, 2.0);
        let z = pt(&[0.5, 1.0], &[0.0]);
        let im = strip_images(&g, &z, &d, 3).unwrap();
        assert_eq!(im.len(), 2 * (2 * 3 + 1));
        assert_eq!(im[0].point.x[0], 0.5);
        assert_eq!(im[1].point.x[0], -0.5);
        assert_eq!(im[1].sign, Sign::Minus);
        // j = 1 then j = -1
        assert_eq!(im[2].point.x[0], 0.5 - 4.0);
        assert_eq!(im[4].point.x[0], 0.5 + 4.0);
        for c in &im[1..] {
            let v = c.point.x[0];
            assert!(!(0.0 < v && v < 2.0), "image at {v} inside strip");
        }
    }

    #[test]
    fn half_space_hand_value() {
        // gauge^4 of the two translates: 40 and 8.
        let g = GroupSpec::heisenberg(1).unwrap();
        let p = FundamentalSolutionParams::unit(&g).unwrap();
        let xi = pt(&[0.0, 1.0], &[1.0]);
        let zeta = pt(&[1.0, 0.0], &[0.0]);
        let v = green_eval(&p, &g, &DomainSpec::half_space(0), &xi, &zeta, TruncationPolicy::default()).unwrap();
        let expect = 40f64.powf(-0.5) - 8f64.powf(-0.5);
        assert!((v - expect).abs() < 1e-15);
    }

    #[test]
    fn abelian_half_space_is_classical() {
        let g = GroupSpec::abelian(3).unwrap();
        let c = 1.0 / (4.0 * std::f64::consts::PI);
        let p = FundamentalSolutionParams::new(&g, c).unwrap();
        let xi = pt(&[0.4, 1.0, -0.3], &[]);
        let zeta = pt(&[1.1, -0.2, 0.5], &[]);
        let v = green_eval(&p, &g, &DomainSpec::half_space(0), &xi, &zeta, TruncationPolicy::default()).unwrap();
        let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt();
        let star = [-1.1, -0.2, 0.5];
        let expect = c * (1.0 / dist(&xi.x, &zeta.x) - 1.0 / dist(&xi.x, &star));
        assert!((v - expect).abs() < 1e-15);
    }

    #[test]
    fn green_eval_rejects_outside_and_pole() {
        let g = GroupSpec::heisenberg(1).unwrap();
        let p = FundamentalSolutionParams::unit(&g).unwrap();
        let d = DomainSpec::half_space(0);
        let zeta = pt(&[1.0, 0.0], &[0.0]);
        assert!(matches!(
            green_eval(&p, &g, &d, &pt(&[-1.0, 0.0], &[0.0]), &zeta, TruncationPolicy::default()),
            Err(Error::OutsideDomain(_))
        ));
        assert!(matches!(green_eval(&p, &g, &d, &zeta, &zeta, TruncationPolicy::default()), Err(Error::Pole { .. })));
    }

    #[test]
    fn strip_matches_explicit_image_sum() {
        let g = GroupSpec::heisenberg(1).unwrap();
        let p = FundamentalSolutionParams::unit(&g).unwrap();
        let d = DomainSpec::strip(1, 1.5);
        let xi = pt(&[0.3, 0.4], &[0.2]);
        let zeta = pt(&[-0.5, 1.1], &[-0.3]);
        let cutoff = 6;
        let fast = green_eval(&p, &g, &d, &xi, &zeta, TruncationPolicy::Fixed { cutoff }).unwrap();
        let slow: f64 = strip_images(&g, &zeta, &d, cutoff)
            .unwrap()
            .iter()
            .map(|c| c.sign.value() * gamma_pole(&p, &g, &xi, &c.point).unwrap())
            .sum();
        assert!((fast - slow).abs() < 1e-14, "{fast} vs {slow}");
    }

    #[test]
    fn characteristic_sets() {
        let g = GroupSpec::heisenberg(1).unwrap();
        assert_eq!(
            characteristic_points(&g, &Hyperplane::X { axis: 0, value: 0.0 }).unwrap(),
            CharacteristicSet::Empty
        );
        assert_eq!(
            characteristic_points(&g, &Hyperplane::T { axis: 0, value: 0.0 }).unwrap(),
            CharacteristicSet::CenterManifold
        );
        let a = GroupSpec::abelian(3).unwrap();
        assert_eq!(
            characteristic_points(&a, &Hyperplane::X { axis: 0, value: 1.0 }).unwrap(),
            CharacteristicSet::Empty
        );
        assert!(characteristic_points(&a, &Hyperplane::T { axis: 0, value: 0.0 }).is_err());
        assert!(matches!(
            characteristic_points(&g, &Hyperplane::General { normal: vec![1.0, 1.0, 0.0], offset: 0.0 }),
            Err(Error::Unsupported(_))
        ));
        let plane = Hyperplane::T { axis: 0, value: 0.3 };
        assert!(is_characteristic_at(&g, &plane, &pt(&[0.0, 0.0], &[0.3])).unwrap());
        assert!(!is_characteristic_at(&g, &plane, &pt(&[0.1, 0.0], &[0.3])).unwrap());
    }

    #[test]
    fn domain_config_is_one_based() {
        let g = GroupSpec::heisenberg(1).unwrap();
        let cfg: DomainConfig =
            serde_json::from_str(r#"{"kind":"wedge","faces":[{"axis":1},{"axis":2,"offset":0.5}]}"#).unwrap();
        let d = cfg.build(&g).unwrap();
        assert_eq!(d, DomainSpec::Wedge { faces: vec![Face { axis: 0, offset: 0.0 }, Face { axis: 1, offset: 0.5 }] });
        let bad: DomainConfig = serde_json::from_str(r#"{"kind":"strip","axis":3,"width":1.0}"#).unwrap();
        assert!(bad.build(&g).is_err());
        let dup = DomainSpec::Wedge { faces: vec![Face { axis: 0, offset: 0.0 }; 2] };
        assert!(dup.check(&g).is_err());
    }

    #[test]
    fn tail_bound_requires_two_terms() {
        let g = GroupSpec::heisenberg(1).unwrap();
        let p = FundamentalSolutionParams::unit(&g).unwrap();
        let d = DomainSpec::strip(0, 1.0);
        let z = pt(&[0.5, 0.0], &[0.0]);
        assert!(strip_tail_bound(&p, &g, &d, &z, &z, 1).is_err());
        let b2 = strip_tail_bound(&p, &g, &d, &z, &pt(&[0.2, 0.1], &[0.1]), 2).unwrap();
        let b3 = strip_tail_bound(&p, &g, &d, &z, &pt(&[0.2, 0.1], &[0.1]), 3).unwrap();
        assert!(b2.is_finite() && b3 < b2);
    }
}
