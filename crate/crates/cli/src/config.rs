//! JSON payloads of the subcommands.

use std::path::Path;

use hgreen::images::{BoundaryGrid, DomainConfig, TruncationPolicy};
use hgreen::solver::{FieldConfig, PhiConfig, ProblemConfig, QuadratureSpec};
use hgreen::{calibrate_c, linspace, CoordBox, FundamentalSolutionParams, GroupConfig, GroupSpec, MultiIndex, Point};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Normalization of `Gamma`: a number, `"unit"` (c = 1) or `"calibrated"`
/// (unit outward flux through `[-1, 1]^m x [-1/4, 1/4]^n`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Normalization {
    Value(f64),
    Named(NamedNormalization),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedNormalization {
    Unit,
    Calibrated,
}

impl Default for Normalization {
    fn default() -> Self {
        Normalization::Named(NamedNormalization::Unit)
    }
}

pub const CALIBRATION_HALF_X: f64 = 1.0;
pub const CALIBRATION_HALF_T: f64 = 0.25;

pub fn calibration_nodes(spec: &GroupSpec) -> usize {
    hgreen::suite::calibration_nodes(spec)
}

impl Normalization {
    pub fn params(&self, spec: &GroupSpec) -> Result<FundamentalSolutionParams, CliError> {
        let c = match self {
            Normalization::Value(c) => *c,
            Normalization::Named(NamedNormalization::Unit) => 1.0,
            Normalization::Named(NamedNormalization::Calibrated) => {
                let bx = CoordBox::symmetric(spec, CALIBRATION_HALF_X, CALIBRATION_HALF_T)?;
                calibrate_c(spec, &bx, calibration_nodes(spec))?.c
            }
        };
        Ok(FundamentalSolutionParams::new(spec, c)?)
    }
}

/// Flat `(x, t)` coordinates of a point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointConfig {
    pub x: Vec<f64>,
    #[serde(default)]
    pub t: Vec<f64>,
}

impl PointConfig {
    pub fn point(&self, spec: &GroupSpec) -> Result<Point, CliError> {
        let p = Point::new(self.x.clone(), self.t.clone());
        spec.check_point(&p)?;
        Ok(p)
    }
}

/// Product grid `linspace(lo_a, hi_a, counts_a)` over all coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub counts: Vec<usize>,
}

impl GridConfig {
    pub fn points(&self, spec: &GroupSpec) -> Result<Vec<Point>, CliError> {
        let dim = spec.dim();
        if self.lo.len() != dim || self.hi.len() != dim || self.counts.len() != dim {
            return Err(CliError::Usage(format!("grid must span {dim} coordinates")));
        }
        let axes: Vec<Vec<f64>> = (0..dim).map(|a| linspace(self.lo[a], self.hi[a], self.counts[a])).collect();
        Ok(MultiIndex::new(&self.counts)
            .map(|idx| {
                let coords: Vec<f64> = idx.iter().enumerate().map(|(a, &i)| axes[a][i]).collect();
                Point::from_coords(&coords, spec.m())
            })
            .collect())
    }
}

/// Evaluation points: an explicit list of flat coordinates or a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointSet {
    List { points: Vec<Vec<f64>> },
    Grid { grid: GridConfig },
}

impl PointSet {
    pub fn points(&self, spec: &GroupSpec) -> Result<Vec<Point>, CliError> {
        match self {
            PointSet::Grid { grid } => grid.points(spec),
            PointSet::List { points } => points
                .iter()
                .map(|c| {
                    if c.len() != spec.dim() {
                        return Err(CliError::Usage(format!("point {c:?} needs {} coordinates", spec.dim())));
                    }
                    Ok(Point::from_coords(c, spec.m()))
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrateConfig {
    #[serde(default)]
    pub group: Option<GroupConfig>,
    #[serde(default)]
    pub half_x: Option<f64>,
    #[serde(default)]
    pub half_t: Option<f64>,
    #[serde(default)]
    pub nodes: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalKind {
    #[default]
    Gamma,
    Green,
}

/// `eval`: `Gamma(pole^{-1} o xi)` or `G(xi, pole)` at each point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    #[serde(default)]
    pub group: Option<GroupConfig>,
    #[serde(default)]
    pub kind: EvalKind,
    #[serde(default)]
    pub c: Normalization,
    pub pole: PointConfig,
    #[serde(default)]
    pub domain: Option<DomainConfig>,
    #[serde(default)]
    pub truncation: TruncationPolicy,
    #[serde(flatten)]
    pub points: PointSet,
}

/// `trace`: `G(., pole)` on the faces of `domain`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceConfig {
    #[serde(default)]
    pub group: Option<GroupConfig>,
    #[serde(default)]
    pub c: Normalization,
    pub domain: DomainConfig,
    pub pole: PointConfig,
    pub grid: BoundaryGrid,
    #[serde(default)]
    pub truncation: TruncationPolicy,
}

/// `solve`: representation formula on `eval_grid`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    #[serde(default)]
    pub group: Option<GroupConfig>,
    #[serde(default)]
    pub c: Normalization,
    pub domain: DomainConfig,
    #[serde(default)]
    pub f: Option<FieldConfig>,
    #[serde(default)]
    pub phi: Vec<PhiConfig>,
    pub quad: QuadratureSpec,
    pub eval_grid: GridConfig,
}

impl SolveConfig {
    pub fn problem(&self) -> ProblemConfig {
        ProblemConfig { domain: self.domain.clone(), f: self.f.clone(), phi: self.phi.clone() }
    }
}
