//! Declarative experiment configuration: a single JSON file selects the
//! experiment kind and its parameters. Every field is validated before any
//! computation starts and unknown keys are rejected; `--set` overrides use
//! dotted paths into the same document.

use crate::error::{Error, Result};
use crate::grid::TorusGrid;
use crate::gspec::GSpec;
use crate::heat::KernelEvalConfig;
use crate::initial::InitialFieldSpec;
use crate::solver::SolverConfig;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::path::{Path, PathBuf};

/// Solver section of a config file (the grid lives at top level).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default)]
    pub dt: Option<f64>,
    pub end_time: f64,
    #[serde(default = "default_true")]
    pub dealias: bool,
    #[serde(default)]
    pub blowup_threshold: Option<f64>,
    #[serde(default = "default_one")]
    pub sample_every: usize,
    #[serde(default = "default_jmax")]
    pub jmax_diagnostics: u32,
    #[serde(default)]
    pub store_fields: bool,
}

fn default_true() -> bool {
    true
}
fn default_one() -> usize {
    1
}
fn default_jmax() -> u32 {
    1
}

impl SolverSection {
    pub fn build(&self, grid: TorusGrid) -> Result<SolverConfig> {
        let cfg = SolverConfig {
            grid,
            dt: self.dt,
            end_time: self.end_time,
            dealias: self.dealias,
            blowup_threshold: self.blowup_threshold,
            sample_every: self.sample_every,
            store_fields: self.store_fields,
            jmax_diagnostics: self.jmax_diagnostics,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateParams {
    pub grid: TorusGrid,
    pub initial: InitialFieldSpec,
    pub solver: SolverSection,
    /// Write PFLD snapshots of the retained samples.
    #[serde(default)]
    pub write_snapshots: bool,
    /// Previously written report JSON supplying a measured c₀ for the
    /// existence-window warning in `describe`.
    #[serde(default)]
    pub constants_file: Option<PathBuf>,
}

/// One `D_i ℙ g(u)` term given explicitly.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GTermConfig {
    pub advected_axis: usize,
    pub tensor: Vec<Vec<Vec<f64>>>,
}

/// Either the built-in Navier-Stokes encoding or explicit terms.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GTermsConfig {
    Named(String),
    Explicit(Vec<GTermConfig>),
}

impl GTermsConfig {
    pub fn build(&self, dim: usize) -> Result<Vec<GSpec>> {
        match self {
            GTermsConfig::Named(name) if name == "navier_stokes" => {
                GSpec::navier_stokes_encoding(dim)
            }
            GTermsConfig::Named(other) => Err(Error::Config(format!(
                "unknown g_terms name {other:?}; expected \"navier_stokes\" or a list of terms"
            ))),
            GTermsConfig::Explicit(terms) => terms
                .iter()
                .map(|t| GSpec::new(dim, t.advected_axis, t.tensor.clone()))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GSystemParams {
    pub grid: TorusGrid,
    pub initial: InitialFieldSpec,
    pub solver: SolverSection,
    pub g_terms: GTermsConfig,
    #[serde(default)]
    pub write_snapshots: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyKernelParams {
    #[serde(default = "default_dims")]
    pub dims: Vec<usize>,
    #[serde(default = "default_t_min")]
    pub t_min: f64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_points")]
    pub x_points: usize,
    #[serde(default = "default_points")]
    pub t_points: usize,
    #[serde(default)]
    pub kernel: KernelEvalConfig,
    #[serde(default = "default_kernel_tol")]
    pub tolerance: f64,
}

fn default_dims() -> Vec<usize> {
    vec![1, 2, 3]
}
fn default_t_min() -> f64 {
    0.05
}
fn default_t_max() -> f64 {
    5.0
}
fn default_points() -> usize {
    20
}
fn default_kernel_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySemigroupParams {
    pub grid: TorusGrid,
    #[serde(default = "default_j4")]
    pub j_max: u32,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_kmax")]
    pub kmax: u32,
    #[serde(default = "default_semigroup_t_min")]
    pub t_min: f64,
    #[serde(default = "default_semigroup_t_max")]
    pub t_max: f64,
    #[serde(default = "default_t_count")]
    pub t_points: usize,
    #[serde(default = "default_seed")]
    pub seed0: u64,
    /// Stability tolerance for the trial-doubling check.
    #[serde(default = "default_stability")]
    pub stability_tolerance: f64,
}

fn default_j4() -> u32 {
    4
}
fn default_trials() -> usize {
    50
}
fn default_kmax() -> u32 {
    4
}
fn default_semigroup_t_min() -> f64 {
    1e-4
}
fn default_semigroup_t_max() -> f64 {
    10.0
}
fn default_t_count() -> usize {
    16
}
fn default_seed() -> u64 {
    1000
}
fn default_stability() -> f64 {
    0.05
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyEstimatesParams {
    pub grid: TorusGrid,
    pub amplitudes: Vec<f64>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_j3")]
    pub j_max: u32,
    #[serde(default = "default_kmax_init")]
    pub kmax_init: u32,
    #[serde(default = "default_trials")]
    pub forced_trials: usize,
    #[serde(default = "default_seed")]
    pub forced_seed0: u64,
    #[serde(default = "default_kmax")]
    pub forced_kmax: u32,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_samples_per_run")]
    pub samples_per_run: usize,
}

fn default_j3() -> u32 {
    3
}
fn default_kmax_init() -> u32 {
    4
}
fn default_samples_per_run() -> usize {
    64
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingCheckParams {
    pub grid: TorusGrid,
    pub initial: InitialFieldSpec,
    #[serde(default = "default_lambda")]
    pub lambda: u32,
    #[serde(default = "default_j2")]
    pub j_max: u32,
    pub dt: f64,
    pub end_time: f64,
    #[serde(default = "default_one")]
    pub sample_every: usize,
    #[serde(default = "default_scaling_tol")]
    pub tolerance: f64,
}

fn default_lambda() -> u32 {
    2
}
fn default_j2() -> u32 {
    2
}
fn default_scaling_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PicardCrosscheckParams {
    pub grid: TorusGrid,
    pub initial: InitialFieldSpec,
    #[serde(default = "default_picard_t")]
    pub t: f64,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_nodes")]
    pub quadrature_nodes: usize,
    #[serde(default = "default_picard_tol")]
    pub tolerance: f64,
    #[serde(default)]
    pub dt: Option<f64>,
    /// Sample spacings (in steps) for the Duhamel-residual refinement.
    #[serde(default = "default_cadences")]
    pub residual_cadences: Vec<usize>,
    #[serde(default = "default_residual_end")]
    pub residual_end_time: f64,
}

fn default_picard_t() -> f64 {
    0.01
}
fn default_iterations() -> usize {
    6
}
fn default_nodes() -> usize {
    8
}
fn default_picard_tol() -> f64 {
    1e-8
}
fn default_cadences() -> Vec<usize> {
    vec![8, 4, 2]
}
fn default_residual_end() -> f64 {
    0.1
}

/// The experiment selected by a config file.
#[derive(Debug, Clone)]
pub enum ExperimentKind {
    Simulate(SimulateParams),
    GSystem(GSystemParams),
    VerifyKernel(VerifyKernelParams),
    VerifySemigroup(VerifySemigroupParams),
    VerifyEstimates(VerifyEstimatesParams),
    ScalingCheck(ScalingCheckParams),
    PicardCrosscheck(PicardCrosscheckParams),
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Simulate(_) => "simulate",
            ExperimentKind::GSystem(_) => "g-system",
            ExperimentKind::VerifyKernel(_) => "verify-kernel",
            ExperimentKind::VerifySemigroup(_) => "verify-semigroup",
            ExperimentKind::VerifyEstimates(_) => "verify-estimates",
            ExperimentKind::ScalingCheck(_) => "scaling-check",
            ExperimentKind::PicardCrosscheck(_) => "picard-crosscheck",
        }
    }
}

/// Parsed and validated experiment configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub output_dir: PathBuf,
    pub parallelism: Option<usize>,
    pub deterministic: bool,
    /// The full document after overrides, for hashing and provenance.
    pub document: Value,
}

impl ExperimentConfig {
    /// Seeds referenced by the experiment, for provenance.
    pub fn seeds(&self) -> Vec<u64> {
        fn initial_seed(spec: &InitialFieldSpec) -> Vec<u64> {
            match spec {
                InitialFieldSpec::RandomBandlimited { seed, .. } => vec![*seed],
                InitialFieldSpec::TaylorGreen { .. } => vec![],
            }
        }
        match &self.kind {
            ExperimentKind::Simulate(p) => initial_seed(&p.initial),
            ExperimentKind::GSystem(p) => initial_seed(&p.initial),
            ExperimentKind::VerifyKernel(_) => vec![],
            ExperimentKind::VerifySemigroup(p) => {
                (0..p.trials as u64).map(|i| p.seed0 + i).collect()
            }
            ExperimentKind::VerifyEstimates(p) => {
                let mut s = p.seeds.clone();
                s.extend((0..p.forced_trials as u64).map(|i| p.forced_seed0 + i));
                s
            }
            ExperimentKind::ScalingCheck(p) => initial_seed(&p.initial),
            ExperimentKind::PicardCrosscheck(p) => initial_seed(&p.initial),
        }
    }
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Apply one dotted-path override; the value string is parsed as JSON when
/// possible and kept as a string otherwise.
pub fn apply_override(document: &mut Value, path: &str, raw_value: &str) -> Result<()> {
    let parsed: Value = serde_json::from_str(raw_value)
        .unwrap_or_else(|_| Value::String(raw_value.to_string()));
    let segments: Vec<&str> = path.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(config_err(format!("malformed override path {path:?}")));
    }
    let mut cursor = document;
    for seg in &segments[..segments.len() - 1] {
        let map = cursor
            .as_object_mut()
            .ok_or_else(|| config_err(format!("override path {path:?} crosses a non-object")))?;
        cursor = map
            .entry(seg.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    let map = cursor
        .as_object_mut()
        .ok_or_else(|| config_err(format!("override path {path:?} crosses a non-object")))?;
    map.insert(segments.last().unwrap().to_string(), parsed);
    Ok(())
}

/// Parse a config document into a validated [`ExperimentConfig`].
pub fn parse_config(mut document: Value, overrides: &[(String, String)]) -> Result<ExperimentConfig> {
    for (path, value) in overrides {
        apply_override(&mut document, path, value)?;
    }
    let obj = document
        .as_object()
        .ok_or_else(|| config_err("config root must be a JSON object"))?
        .clone();

    let kind_name = obj
        .get("experiment")
        .and_then(|v| v.as_str())
        .ok_or_else(|| config_err("missing or non-string key \"experiment\""))?
        .to_string();

    let output_dir = match obj.get("output_dir") {
        None => PathBuf::from("out"),
        Some(Value::String(s)) => PathBuf::from(s),
        Some(_) => return Err(config_err("output_dir must be a string")),
    };
    let parallelism = match obj.get("parallelism") {
        None | Some(Value::Null) => None,
        Some(v) => Some(
            v.as_u64()
                .filter(|&p| p >= 1)
                .ok_or_else(|| config_err("parallelism must be a positive integer"))?
                as usize,
        ),
    };
    let deterministic = match obj.get("deterministic") {
        None => false,
        Some(Value::Bool(b)) => *b,
        Some(_) => return Err(config_err("deterministic must be a boolean")),
    };

    let mut params = obj.clone();
    for reserved in ["experiment", "output_dir", "parallelism", "deterministic"] {
        params.remove(reserved);
    }
    let params = Value::Object(params);
    let detail = |e: serde_json::Error| config_err(format!("in experiment {kind_name:?}: {e}"));

    let kind = match kind_name.as_str() {
        "simulate" => ExperimentKind::Simulate(
            serde_json::from_value::<SimulateParams>(params).map_err(detail)?,
        ),
        "g-system" => {
            ExperimentKind::GSystem(serde_json::from_value::<GSystemParams>(params).map_err(detail)?)
        }
        "verify-kernel" => ExperimentKind::VerifyKernel(
            serde_json::from_value::<VerifyKernelParams>(params).map_err(detail)?,
        ),
        "verify-semigroup" => ExperimentKind::VerifySemigroup(
            serde_json::from_value::<VerifySemigroupParams>(params).map_err(detail)?,
        ),
        "verify-estimates" => ExperimentKind::VerifyEstimates(
            serde_json::from_value::<VerifyEstimatesParams>(params).map_err(detail)?,
        ),
        "scaling-check" => ExperimentKind::ScalingCheck(
            serde_json::from_value::<ScalingCheckParams>(params).map_err(detail)?,
        ),
        "picard-crosscheck" => ExperimentKind::PicardCrosscheck(
            serde_json::from_value::<PicardCrosscheckParams>(params).map_err(detail)?,
        ),
        other => {
            return Err(config_err(format!(
                "unknown experiment {other:?}; expected one of simulate, g-system, \
                 verify-kernel, verify-semigroup, verify-estimates, scaling-check, \
                 picard-crosscheck"
            )))
        }
    };

    validate_kind(&kind)?;
    Ok(ExperimentConfig {
        kind,
        output_dir,
        parallelism,
        deterministic,
        document,
    })
}

/// Load, override, and validate a config file.
pub fn load_config(path: &Path, overrides: &[(String, String)]) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    let document: Value = serde_json::from_str(&text)
        .map_err(|e| config_err(format!("cannot parse {}: {e}", path.display())))?;
    parse_config(document, overrides)
}

fn validate_kind(kind: &ExperimentKind) -> Result<()> {
    match kind {
        ExperimentKind::Simulate(p) => {
            p.solver.build(p.grid)?;
            check_amplitude(p.initial.amplitude())?;
        }
        ExperimentKind::GSystem(p) => {
            p.solver.build(p.grid)?;
            check_amplitude(p.initial.amplitude())?;
            p.g_terms.build(p.grid.dim())?;
        }
        ExperimentKind::VerifyKernel(p) => {
            p.kernel.validate()?;
            if p.dims.iter().any(|&d| !(1..=3).contains(&d)) {
                return Err(config_err("kernel dims must lie in {1,2,3}"));
            }
            if !(p.t_min > 0.0) || p.t_max <= p.t_min {
                return Err(config_err("need 0 < t_min < t_max"));
            }
            if p.x_points < 2 || p.t_points < 2 {
                return Err(config_err("need at least 2 x and t points"));
            }
            if !(p.tolerance > 0.0) {
                return Err(config_err("tolerance must be positive"));
            }
        }
        ExperimentKind::VerifySemigroup(p) => {
            if p.trials < 2 {
                return Err(config_err("need at least 2 trials"));
            }
            if !(p.t_min > 0.0) || p.t_max <= p.t_min || p.t_points < 2 {
                return Err(config_err("need 0 < t_min < t_max and >= 2 t points"));
            }
            check_kmax(p.grid, p.kmax)?;
        }
        ExperimentKind::VerifyEstimates(p) => {
            if p.amplitudes.is_empty() || p.amplitudes.iter().any(|&a| !(a > 0.0)) {
                return Err(config_err("amplitudes must be a nonempty positive list"));
            }
            if p.seeds.is_empty() {
                return Err(config_err("seeds must be nonempty"));
            }
            if p.forced_trials < 1 {
                return Err(config_err("forced_trials must be >= 1"));
            }
            check_kmax(p.grid, p.kmax_init)?;
            check_kmax(p.grid, p.forced_kmax)?;
            if let Some(dt) = p.dt {
                if !(dt > 0.0) {
                    return Err(config_err("dt must be positive"));
                }
            }
        }
        ExperimentKind::ScalingCheck(p) => {
            if p.lambda < 1 {
                return Err(config_err("lambda must be a positive integer"));
            }
            if !(p.dt > 0.0) || !(p.end_time > 0.0) {
                return Err(config_err("dt and end_time must be positive"));
            }
            check_amplitude(p.initial.amplitude())?;
        }
        ExperimentKind::PicardCrosscheck(p) => {
            if !(p.t > 0.0) || p.iterations < 1 || p.quadrature_nodes < 2 {
                return Err(config_err(
                    "need t > 0, iterations >= 1, quadrature_nodes >= 2",
                ));
            }
            if p.residual_cadences.len() < 2 || p.residual_cadences.iter().any(|&c| c == 0) {
                return Err(config_err("residual_cadences needs >= 2 nonzero entries"));
            }
            check_amplitude(p.initial.amplitude())?;
        }
    }
    Ok(())
}

fn check_amplitude(a: f64) -> Result<()> {
    if !(a > 0.0) {
        return Err(config_err("initial amplitude must be positive"));
    }
    Ok(())
}

fn check_kmax(grid: TorusGrid, kmax: u32) -> Result<()> {
    if kmax < 1 || kmax as usize >= grid.modes() / 2 {
        return Err(config_err(format!(
            "max wavenumber {kmax} must lie in [1, M/2) for M = {}",
            grid.modes()
        )));
    }
    Ok(())
}
