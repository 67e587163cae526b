//! Run configuration: optional TOML file, overridden key-by-key by flags.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use archi_core::chardet::TilingId;
use archi_core::hill::SolverConfig;
use archi_core::potentials::{InterpolationOrder, PotentialSpec};
use archi_core::tolerances::{BAND_EDGE_LAMBDA_TOL, FLAT_BAND_RESIDUAL_TOL, WRONSKIAN_TOL};

use crate::CliError;

/// Output format for the command's artifact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
    Svg,
}

impl OutputFormat {
    pub fn parse(name: &str) -> Result<Self, CliError> {
        match name {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "svg" => Ok(OutputFormat::Svg),
            other => Err(CliError::Config(format!(
                "unknown output format {other:?} (expected csv, json, or svg)"
            ))),
        }
    }
}

pub fn parse_tiling(name: &str) -> Result<TilingId, CliError> {
    TilingId::ALL
        .into_iter()
        .find(|t| t.name() == name)
        .ok_or_else(|| {
            let names: Vec<&str> = TilingId::ALL.iter().map(|t| t.name()).collect();
            CliError::Config(format!("unknown tiling {name:?} (expected one of {names:?})"))
        })
}

/// `[potential]` section of the config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct PotentialSection {
    pub kind: Option<String>,
    pub a: Option<f64>,
    /// Graphene-model bond length; defaults to the edge length.
    pub bond: Option<f64>,
    pub breakpoints: Option<Vec<f64>>,
    pub values: Option<Vec<f64>>,
    pub samples: Option<Vec<f64>>,
    /// Interpolation order for sampled potentials: "linear" or "cubic".
    pub order: Option<String>,
    pub even: Option<bool>,
}

/// `[tolerances]` section.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ToleranceSection {
    pub wronskian: Option<f64>,
    pub band_edge: Option<f64>,
    pub residual: Option<f64>,
}

/// `[output]` section.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct OutputSection {
    pub format: Option<String>,
    pub path: Option<PathBuf>,
}

/// `[solver]` section.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SolverSection {
    /// "rk4" (fixed step) or "adaptive".
    pub method: Option<String>,
    pub step_count: Option<usize>,
    pub tolerance: Option<f64>,
}

/// The on-disk configuration: top-level keys plus sections.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub tiling: Option<String>,
    pub lambda_max: Option<f64>,
    pub theta_grid: Option<usize>,
    pub lambda_grid: Option<usize>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    #[serde(default)]
    pub potential: PotentialSection,
    pub tolerances: Option<ToleranceSection>,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub solver: SolverSection,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))
    }
}

/// Tolerance knobs after merging defaults, file, and flags.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub wronskian: f64,
    pub band_edge: f64,
    pub residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            wronskian: WRONSKIAN_TOL,
            band_edge: BAND_EDGE_LAMBDA_TOL,
            residual: FLAT_BAND_RESIDUAL_TOL,
        }
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub tiling: Option<TilingId>,
    pub potential: PotentialSpec,
    pub lambda_max: f64,
    pub theta_grid: usize,
    pub lambda_grid: usize,
    pub seed: u64,
    pub trials: u64,
    pub tolerances: Tolerances,
    pub format: Option<OutputFormat>,
    pub out: Option<PathBuf>,
    pub solver: SolverConfig,
}

/// Flag values that shadow config-file keys (all optional).
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub tiling: Option<String>,
    pub q: Option<String>,
    pub a: Option<f64>,
    pub bond: Option<f64>,
    pub lambda_max: Option<f64>,
    pub theta_grid: Option<usize>,
    pub lambda_grid: Option<usize>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
}

/// Whether the edge length may fall back to 1 when neither flag nor config
/// provides it.  The `basis` command requires it explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeLengthPolicy {
    Required,
    DefaultOne,
}

fn build_potential(
    section: &PotentialSection,
    ov: &Overrides,
    policy: EdgeLengthPolicy,
) -> Result<PotentialSpec, CliError> {
    let a = match ov.a.or(section.a) {
        Some(a) => a,
        None => match policy {
            EdgeLengthPolicy::DefaultOne => 1.0,
            EdgeLengthPolicy::Required => {
                return Err(CliError::Config(
                    "this command requires an edge length: pass --a or set potential.a".into(),
                ))
            }
        },
    };
    let kind = ov
        .q
        .clone()
        .or_else(|| section.kind.clone())
        .unwrap_or_else(|| "zero".to_string());
    let spec = match kind.as_str() {
        "zero" => PotentialSpec::zero(a)?,
        "graphene" => match ov.bond.or(section.bond) {
            Some(d) => PotentialSpec::graphene_with_bond(a, d)?,
            None => PotentialSpec::graphene(a)?,
        },
        "piecewise-constant" => {
            let breakpoints = section.breakpoints.clone().ok_or_else(|| {
                CliError::Config("piecewise-constant potential needs potential.breakpoints".into())
            })?;
            let values = section.values.clone().ok_or_else(|| {
                CliError::Config("piecewise-constant potential needs potential.values".into())
            })?;
            PotentialSpec::piecewise_constant(a, breakpoints, values, section.even.unwrap_or(false))?
        }
        "sampled" => {
            let samples = section.samples.clone().ok_or_else(|| {
                CliError::Config("sampled potential needs potential.samples".into())
            })?;
            let order = match section.order.as_deref() {
                None | Some("cubic") => InterpolationOrder::Cubic,
                Some("linear") => InterpolationOrder::Linear,
                Some(other) => {
                    return Err(CliError::Config(format!(
                        "unknown interpolation order {other:?} (expected linear or cubic)"
                    )))
                }
            };
            PotentialSpec::sampled(a, samples, order, section.even.unwrap_or(false))?
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown potential kind {other:?} (expected zero, graphene, piecewise-constant, or sampled)"
            )))
        }
    };
    Ok(spec)
}

fn build_solver(section: &SolverSection) -> Result<SolverConfig, CliError> {
    let mut cfg = SolverConfig::default();
    match section.method.as_deref() {
        None | Some("rk4") => {}
        Some("adaptive") => cfg.method = archi_core::hill::SolverMethod::AdaptiveRk,
        Some(other) => {
            return Err(CliError::Config(format!(
                "unknown solver method {other:?} (expected rk4 or adaptive)"
            )))
        }
    }
    if let Some(n) = section.step_count {
        if n < 2 {
            return Err(CliError::Config("solver.step-count must be at least 2".into()));
        }
        cfg.step_count = n;
    }
    if let Some(t) = section.tolerance {
        if !(t.is_finite() && t > 0.0) {
            return Err(CliError::Config("solver.tolerance must be positive".into()));
        }
        cfg.tolerance = t;
    }
    Ok(cfg)
}

/// Merge defaults <- config file <- flags and validate the result.
pub fn resolve(
    file: &FileConfig,
    ov: &Overrides,
    a_policy: EdgeLengthPolicy,
) -> Result<RunConfig, CliError> {
    let tiling = match ov.tiling.as_deref().or(file.tiling.as_deref()) {
        Some(name) => Some(parse_tiling(name)?),
        None => None,
    };
    let potential = build_potential(&file.potential, ov, a_policy)?;
    let lambda_max = ov.lambda_max.or(file.lambda_max).unwrap_or(100.0);
    if !(lambda_max.is_finite() && lambda_max > 0.0) {
        return Err(CliError::Config(format!("lambda-max must be positive, got {lambda_max}")));
    }
    let theta_grid = ov.theta_grid.or(file.theta_grid).unwrap_or(41);
    let lambda_grid = ov.lambda_grid.or(file.lambda_grid).unwrap_or(4000);
    if theta_grid < 2 || lambda_grid < 2 {
        return Err(CliError::Config(format!(
            "grids must have at least 2 points (theta-grid {theta_grid}, lambda-grid {lambda_grid})"
        )));
    }
    let mut tolerances = Tolerances::default();
    if let Some(t) = &file.tolerances {
        if let Some(v) = t.wronskian {
            tolerances.wronskian = v;
        }
        if let Some(v) = t.band_edge {
            tolerances.band_edge = v;
        }
        if let Some(v) = t.residual {
            tolerances.residual = v;
        }
    }
    for (name, v) in [
        ("wronskian", tolerances.wronskian),
        ("band-edge", tolerances.band_edge),
        ("residual", tolerances.residual),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(CliError::Config(format!("tolerances.{name} must be positive, got {v}")));
        }
    }
    let format = match ov.format.as_deref() {
        Some(name) => Some(OutputFormat::parse(name)?),
        None => match file.output.format.as_deref() {
            Some(name) => Some(OutputFormat::parse(name)?),
            None => None,
        },
    };
    let out = ov.out.clone().or_else(|| file.output.path.clone());
    Ok(RunConfig {
        tiling,
        potential,
        lambda_max,
        theta_grid,
        lambda_grid,
        seed: ov.seed.or(file.seed).unwrap_or(0),
        trials: ov.trials.or(file.trials).unwrap_or(1000),
        tolerances,
        format,
        out,
        solver: build_solver(&file.solver)?,
    })
}

impl RunConfig {
    pub fn require_tiling(&self) -> Result<TilingId, CliError> {
        self.tiling
            .ok_or_else(|| CliError::Config("this command requires --tiling".into()))
    }

    /// Format with a per-command default.
    pub fn format_or(&self, default: OutputFormat) -> OutputFormat {
        self.format.unwrap_or(default)
    }
}
