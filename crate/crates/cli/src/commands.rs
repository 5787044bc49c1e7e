use std::path::{Path, PathBuf};

use hgreen::images::{boundary_trace_scan, green_eval};
use hgreen::solver::solve;
use hgreen::suite::{run_suite, SuiteConfig};
use hgreen::{calibrate_c, flux, gamma_pole, CoordBox, FundamentalSolutionParams, GroupConfig, GroupSpec};
use serde::Serialize;
use serde_json::Value;

use crate::config::{
    read_json, CalibrateConfig, EvalConfig, EvalKind, SolveConfig, TraceConfig, CALIBRATION_HALF_T, CALIBRATION_HALF_X,
};
use crate::output;
use crate::CliError;

pub struct Options {
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub group: Option<PathBuf>,
}

impl Options {
    fn config<T: serde::de::DeserializeOwned>(&self) -> Result<T, CliError> {
        let path = self.config.as_deref().ok_or_else(|| CliError::Usage("--config <path> is required".into()))?;
        read_json(path)
    }

    fn out(&self) -> Option<&Path> {
        self.out.as_deref()
    }
}

/// Group from `--group`, else from the payload's `group` field.
fn resolve_group(opts: &Options, inline: Option<&GroupConfig>) -> Result<GroupSpec, CliError> {
    let cfg = match (&opts.group, inline) {
        (Some(path), _) => read_json::<GroupConfig>(path)?,
        (None, Some(cfg)) => cfg.clone(),
        (None, None) => return Err(CliError::Usage("no group: pass --group <path> or a \"group\" field".into())),
    };
    let spec = cfg.build()?;
    let report = spec.validate();
    if !report.passed {
        return Err(CliError::Domain(format!(
            "group matrices fail validation: {}",
            serde_json::to_string(&report).unwrap_or_default()
        )));
    }
    Ok(spec)
}

pub fn validate(opts: &Options) -> Result<(), CliError> {
    let path = opts
        .group
        .as_deref()
        .or(opts.config.as_deref())
        .ok_or_else(|| CliError::Usage("validate needs --group <path> or --config <path>".into()))?;
    let raw: Value = read_json(path)?;
    let inner = raw.get("group").cloned().unwrap_or(raw);
    let cfg: GroupConfig =
        serde_json::from_value(inner).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let spec = cfg.build()?;
    let report = spec.validate();
    output::write(opts.out(), &output::json(&report)?)?;
    if report.passed {
        Ok(())
    } else {
        Err(CliError::CheckFailed)
    }
}

#[derive(Serialize)]
struct BoxOutput {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

#[derive(Serialize)]
struct GridOutput {
    rule: &'static str,
    nodes_per_axis: usize,
}

#[derive(Serialize)]
struct CalibrationOutput {
    c: f64,
    /// Flux of `c * N^{2-Q}` through `check_box`; `-1` up to quadrature error.
    flux_check: f64,
    #[serde(rename = "box")]
    bx: BoxOutput,
    grid: GridOutput,
    unit_flux: f64,
    check_box: BoxOutput,
}

pub fn calibrate(opts: &Options) -> Result<(), CliError> {
    let cfg: CalibrateConfig = match &opts.config {
        Some(p) => read_json(p)?,
        None => CalibrateConfig { group: None, half_x: None, half_t: None, nodes: None },
    };
    let spec = resolve_group(opts, cfg.group.as_ref())?;
    let bx =
        CoordBox::symmetric(&spec, cfg.half_x.unwrap_or(CALIBRATION_HALF_X), cfg.half_t.unwrap_or(CALIBRATION_HALF_T))?;
    let nodes = cfg.nodes.unwrap_or_else(|| hgreen::suite::calibration_nodes(&spec));
    let cal = calibrate_c(&spec, &bx, nodes)?;
    let (_, second) = hgreen::suite::calibration_boxes(&spec)?;
    let second_flux = flux(&FundamentalSolutionParams::new(&spec, cal.c)?, &spec, &second, nodes)?;
    let out = CalibrationOutput {
        c: cal.c,
        flux_check: second_flux,
        bx: BoxOutput { lo: bx.lo, hi: bx.hi },
        grid: GridOutput { rule: "gauss-legendre", nodes_per_axis: nodes },
        unit_flux: cal.unit_flux,
        check_box: BoxOutput { lo: second.lo, hi: second.hi },
    };
    output::write(opts.out(), &output::json(&out)?)
}

pub fn eval(opts: &Options) -> Result<(), CliError> {
    let cfg: EvalConfig = opts.config()?;
    let spec = resolve_group(opts, cfg.group.as_ref())?;
    let params = cfg.c.params(&spec)?;
    let pole = cfg.pole.point(&spec)?;
    let points = cfg.points.points(&spec)?;
    let values = match cfg.kind {
        EvalKind::Gamma => {
            points.iter().map(|p| gamma_pole(&params, &spec, p, &pole)).collect::<Result<Vec<_>, _>>()?
        }
        EvalKind::Green => {
            let domain = cfg
                .domain
                .as_ref()
                .ok_or_else(|| CliError::Usage("kind \"green\" needs a domain".into()))?
                .build(&spec)?;
            points
                .iter()
                .map(|p| green_eval(&params, &spec, &domain, p, &pole, cfg.truncation))
                .collect::<Result<Vec<_>, _>>()?
        }
    };
    let last = match cfg.kind {
        EvalKind::Gamma => "gamma",
        EvalKind::Green => "green",
    };
    output::write(opts.out(), &output::csv(&spec, last, &points, &values))
}

#[derive(Serialize)]
struct TraceSummary {
    c: f64,
    samples: usize,
    max_abs: f64,
    zero_subset_max: f64,
    max_relative: f64,
    zero_subset_relative: f64,
}

pub fn trace(opts: &Options) -> Result<(), CliError> {
    let cfg: TraceConfig = opts.config()?;
    let spec = resolve_group(opts, cfg.group.as_ref())?;
    let params = cfg.c.params(&spec)?;
    let domain = cfg.domain.build(&spec)?;
    let pole = cfg.pole.point(&spec)?;
    let rep = boundary_trace_scan(&params, &spec, &domain, &pole, &cfg.grid, cfg.truncation)?;
    if let Some(path) = opts.out() {
        output::write(Some(path), &output::csv(&spec, "trace", &rep.samples, &rep.values))?;
    }
    let summary = TraceSummary {
        c: params.c,
        samples: rep.samples.len(),
        max_abs: rep.max_abs,
        zero_subset_max: rep.zero_subset_max,
        max_relative: rep.max_relative,
        zero_subset_relative: rep.zero_subset_relative,
    };
    output::write(None, &output::json(&summary)?)
}

pub fn solve_cmd(opts: &Options) -> Result<(), CliError> {
    let cfg: SolveConfig = opts.config()?;
    let spec = resolve_group(opts, cfg.group.as_ref())?;
    let params = cfg.c.params(&spec)?;
    let problem = cfg.problem().build(&spec)?;
    let points = cfg.eval_grid.points(&spec)?;
    let report = solve(&params, &spec, &problem, &points, &cfg.quad)?;
    if let Some(path) = opts.out() {
        output::write(Some(path), &output::csv(&spec, "u", &report.points, &report.values))?;
    }
    output::write(None, &output::json(&report)?)
}

pub fn verify(opts: &Options) -> Result<(), CliError> {
    let mut cfg: SuiteConfig = match &opts.config {
        Some(p) => read_json(p)?,
        None => SuiteConfig::default(),
    };
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    let result = run_suite(&cfg);
    output::write(opts.out(), &output::json(&result)?)?;
    if result.passed {
        Ok(())
    } else {
        Err(CliError::CheckFailed)
    }
}
