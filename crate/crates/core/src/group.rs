//! Prototype H-type groups: `R^{m+n}` with the step-two law
//!
//! ```text
//! (x, t) o (y, tau) = (x + y, t_k + tau_k + 1/2 <A^(k) x, y>)
//! ```
//!
//! and dilations `delta_l(x, t) = (l x, l^2 t)`. The matrices `A^(k)` are
//! skew-symmetric, orthogonal and pairwise anticommuting.
//!
//! Matrix orientation: `A^(k)` is stored row-major and `(A x)_i = sum_j A_ij x_j`.
//! For the Heisenberg generator `[[0, 1], [-1, 0]]` this gives
//! `A (1, 0) = (0, -1)`, hence `((1,0),0) o ((0,1),0) = ((1,1), -1/2)`.
//!
//! With `n = 0` the group is abelian `(R^m, +)`. That mode exists only as a
//! classical reference instance and requires `m >= 3`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_MATRIX_TOLERANCE: f64 = 1e-12;

/// A group element `(x, t)`, `x` in `R^m`, `t` in `R^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: Vec<f64>,
    pub t: Vec<f64>,
}

impl Point {
    pub fn new(x: Vec<f64>, t: Vec<f64>) -> Self {
        Self { x, t }
    }

    pub fn origin(m: usize, n: usize) -> Self {
        Self { x: vec![0.0; m], t: vec![0.0; n] }
    }

    /// Splits a flat coordinate vector `(x_1..x_m, t_1..t_n)`.
    pub fn from_coords(coords: &[f64], m: usize) -> Self {
        Self { x: coords[..m].to_vec(), t: coords[m..].to_vec() }
    }

    pub fn coords(&self) -> Vec<f64> {
        let mut c = self.x.clone();
        c.extend_from_slice(&self.t);
        c
    }

    pub fn dim(&self) -> usize {
        self.x.len() + self.t.len()
    }

    /// Coordinate `i` of the flat `(x, t)` vector.
    pub fn coord(&self, i: usize) -> f64 {
        if i < self.x.len() {
            self.x[i]
        } else {
            self.t[i - self.x.len()]
        }
    }

    pub fn coord_mut(&mut self, i: usize) -> &mut f64 {
        let m = self.x.len();
        if i < m {
            &mut self.x[i]
        } else {
            &mut self.t[i - m]
        }
    }

    /// Largest componentwise absolute difference.
    pub fn max_abs_diff(&self, other: &Point) -> f64 {
        self.x.iter().zip(&other.x).chain(self.t.iter().zip(&other.t)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Dimensions and defining matrices of a prototype H-type group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    m: usize,
    n: usize,
    /// `n` row-major `m x m` blocks.
    matrices: Vec<f64>,
    tolerance: f64,
}

/// Per-property maximum deviations of the defining matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub skew_defects: Vec<(usize, f64)>,
    pub orthogonality_defects: Vec<(usize, f64)>,
    pub anticommutation_defects: Vec<((usize, usize), f64)>,
    pub tolerance: f64,
    pub passed: bool,
}

impl GroupSpec {
    /// Builds a group from explicit matrices, checking only their shapes.
    /// Use [`GroupSpec::validate`] for the algebraic constraints.
    pub fn from_matrices(m: usize, n: usize, matrices: &[Vec<Vec<f64>>]) -> Result<Self> {
        if m == 0 {
            return Err(Error::Dimension("horizontal dimension m must be positive".into()));
        }
        if matrices.len() != n {
            return Err(Error::Dimension(format!("expected {n} matrices, got {}", matrices.len())));
        }
        if n == 0 && m < 3 {
            return Err(Error::InvalidArgument(format!("abelian mode needs m >= 3 (got m = {m})")));
        }
        let mut flat = Vec::with_capacity(n * m * m);
        for (k, a) in matrices.iter().enumerate() {
            if a.len() != m || a.iter().any(|row| row.len() != m) {
                return Err(Error::Dimension(format!("matrix {} is not {m}x{m}", k + 1)));
            }
            for row in a {
                flat.extend_from_slice(row);
            }
        }
        Ok(Self { m, n, matrices: flat, tolerance: DEFAULT_MATRIX_TOLERANCE })
    }

    /// The Heisenberg group `H^d`: `m = 2d`, `n = 1`, `A` block-diagonal in
    /// copies of `[[0, 1], [-1, 0]]`.
    pub fn heisenberg(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("Heisenberg index d must be >= 1".into()));
        }
        let m = 2 * d;
        let mut a = vec![vec![0.0; m]; m];
        for b in 0..d {
            a[2 * b][2 * b + 1] = 1.0;
            a[2 * b + 1][2 * b] = -1.0;
        }
        Self::from_matrices(m, 1, &[a])
    }

    /// `m = 4`, `n = 3`: left multiplication by the quaternion units i, j, k
    /// in the basis `(1, i, j, k)`.
    pub fn quaternionic() -> Self {
        let li = vec![
            vec![0.0, -1.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, -1.0],
            vec![0.0, 0.0, 1.0, 0.0],
        ];
        let lj = vec![
            vec![0.0, 0.0, -1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, -1.0, 0.0, 0.0],
        ];
        let lk = vec![
            vec![0.0, 0.0, 0.0, -1.0],
            vec![0.0, 0.0, -1.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0, 0.0],
        ];
        Self::from_matrices(4, 3, &[li, lj, lk]).expect("static quaternion matrices")
    }

    /// Abelian reference group `(R^m, +)`, `m >= 3`.
    pub fn abelian(m: usize) -> Result<Self> {
        Self::from_matrices(m, 0, &[])
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Result<Self> {
        if !(tolerance >= 0.0) {
            return Err(Error::InvalidArgument("tolerance must be non-negative".into()));
        }
        self.tolerance = tolerance;
        Ok(self)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.m + self.n
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn is_abelian(&self) -> bool {
        self.n == 0
    }

    /// `Q = m + 2n`.
    pub fn homogeneous_dimension(&self) -> usize {
        self.m + 2 * self.n
    }

    /// Entry `(i, j)` of `A^(k)` (all indices zero-based).
    #[inline]
    pub fn entry(&self, k: usize, i: usize, j: usize) -> f64 {
        self.matrices[(k * self.m + i) * self.m + j]
    }

    pub fn matrix(&self, k: usize) -> Vec<Vec<f64>> {
        (0..self.m).map(|i| (0..self.m).map(|j| self.entry(k, i, j)).collect()).collect()
    }

    /// `out = A^(k) v`.
    #[inline]
    pub fn apply(&self, k: usize, v: &[f64], out: &mut [f64]) {
        let m = self.m;
        let block = &self.matrices[k * m * m..(k + 1) * m * m];
        for (i, o) in out.iter_mut().enumerate().take(m) {
            let row = &block[i * m..(i + 1) * m];
            *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }

    /// `<A^(k) u, v>`.
    #[inline]
    pub fn bilinear(&self, k: usize, u: &[f64], v: &[f64]) -> f64 {
        let m = self.m;
        let block = &self.matrices[k * m * m..(k + 1) * m * m];
        let mut acc = 0.0;
        for i in 0..m {
            let row = &block[i * m..(i + 1) * m];
            let au: f64 = row.iter().zip(u).map(|(a, b)| a * b).sum();
            acc += au * v[i];
        }
        acc
    }

    pub fn check_point(&self, p: &Point) -> Result<()> {
        if p.x.len() != self.m || p.t.len() != self.n {
            return Err(Error::Dimension(format!(
                "point has shape ({}, {}), group expects ({}, {})",
                p.x.len(),
                p.t.len(),
                self.m,
                self.n
            )));
        }
        Ok(())
    }

    pub fn origin(&self) -> Point {
        Point::origin(self.m, self.n)
    }

    /// Checks skew-symmetry, orthogonality and pairwise anticommutation.
    pub fn validate(&self) -> ValidationReport {
        let m = self.m;
        let mut skew = Vec::with_capacity(self.n);
        let mut orth = Vec::with_capacity(self.n);
        for k in 0..self.n {
            let mut s: f64 = 0.0;
            let mut o: f64 = 0.0;
            for i in 0..m {
                for j in 0..m {
                    s = s.max((self.entry(k, i, j) + self.entry(k, j, i)).abs());
                    // (A^T A)_ij = sum_r A_ri A_rj
                    let ata: f64 = (0..m).map(|r| self.entry(k, r, i) * self.entry(k, r, j)).sum();
                    let id = if i == j { 1.0 } else { 0.0 };
                    o = o.max((ata - id).abs());
                }
            }
            skew.push((k, s));
            orth.push((k, o));
        }
        let mut anti = Vec::new();
        for k in 0..self.n {
            for l in (k + 1)..self.n {
                let mut d: f64 = 0.0;
                for i in 0..m {
                    for j in 0..m {
                        let kl: f64 = (0..m).map(|r| self.entry(k, i, r) * self.entry(l, r, j)).sum();
                        let lk: f64 = (0..m).map(|r| self.entry(l, i, r) * self.entry(k, r, j)).sum();
                        d = d.max((kl + lk).abs());
                    }
                }
                anti.push(((k, l), d));
            }
        }
        let tol = self.tolerance;
        let passed = skew.iter().chain(orth.iter()).all(|&(_, d)| d <= tol) && anti.iter().all(|&(_, d)| d <= tol);
        ValidationReport {
            skew_defects: skew,
            orthogonality_defects: orth,
            anticommutation_defects: anti,
            tolerance: tol,
            passed,
        }
    }

    /// Group law `p o q`; the bilinear term uses `p.x` as the argument of `A^(k)`.
    pub fn compose(&self, p: &Point, q: &Point) -> Result<Point> {
        self.check_point(p)?;
        self.check_point(q)?;
        let x: Vec<f64> = p.x.iter().zip(&q.x).map(|(a, b)| a + b).collect();
        let t = (0..self.n).map(|k| p.t[k] + q.t[k] + 0.5 * self.bilinear(k, &p.x, &q.x)).collect();
        Ok(Point { x, t })
    }

    /// `(x, t)^{-1} = (-x, -t)`.
    pub fn inverse(&self, p: &Point) -> Point {
        Point { x: p.x.iter().map(|v| -v).collect(), t: p.t.iter().map(|v| -v).collect() }
    }

    /// `delta_lambda(x, t) = (lambda x, lambda^2 t)`.
    pub fn dilate(&self, lambda: f64, p: &Point) -> Result<Point> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("dilation factor must be > 0, got {lambda}")));
        }
        self.check_point(p)?;
        let l2 = lambda * lambda;
        Ok(Point { x: p.x.iter().map(|v| lambda * v).collect(), t: p.t.iter().map(|v| l2 * v).collect() })
    }
}

/// JSON description of a group.
///
/// ```json
/// {"type": "heisenberg", "d": 1}
/// {"type": "quaternionic"}
/// {"type": "abelian", "m": 3}
/// {"type": "matrices", "m": 2, "n": 1, "A": [[[0, 1], [-1, 0]]]}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum GroupConfig {
    Heisenberg {
        d: usize,
    },
    Quaternionic,
    Abelian {
        m: usize,
    },
    Matrices {
        m: usize,
        n: usize,
        #[serde(rename = "A")]
        a: Vec<Vec<Vec<f64>>>,
        #[serde(default)]
        tolerance: Option<f64>,
    },
}

impl GroupConfig {
    pub fn build(&self) -> Result<GroupSpec> {
        match self {
            GroupConfig::Heisenberg { d } => GroupSpec::heisenberg(*d),
            GroupConfig::Quaternionic => Ok(GroupSpec::quaternionic()),
            GroupConfig::Abelian { m } => GroupSpec::abelian(*m),
            GroupConfig::Matrices { m, n, a, tolerance } => {
                let g = GroupSpec::from_matrices(*m, *n, a)?;
                match tolerance {
                    Some(tol) => g.with_tolerance(*tol),
                    None => Ok(g),
                }
            }
        }
    }
}
