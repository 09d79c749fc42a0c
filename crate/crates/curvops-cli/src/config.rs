//! Experiment configuration schemas and the provenance block.
//!
//! Every command reads a versioned JSON config (or falls back to defaults),
//! applies command-line overrides, and embeds the fully resolved config plus
//! its hash in each output, so a result file identifies the run that made it.

use anyhow::{bail, Context, Result};
use curvops::cones::{ConeId, SearchBudget};
use curvops::ode::{Method, OutputGrid, SolverConfig};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

fn default_schema() -> u32 {
    SCHEMA_VERSION
}
fn default_seed() -> u64 {
    0
}
fn default_tol() -> f64 {
    1e-8
}
fn default_starts() -> usize {
    64
}
fn default_iters() -> usize {
    500
}
fn default_samples() -> usize {
    100
}
fn default_delta() -> f64 {
    1e-3
}
fn default_horizon_fraction() -> f64 {
    0.5
}
fn default_rtol() -> f64 {
    1e-9
}
fn default_checkpoints() -> usize {
    64
}
fn default_eps() -> f64 {
    0.5
}
fn default_a() -> f64 {
    0.1
}
fn default_b() -> f64 {
    1.0
}
fn default_grid_points() -> usize {
    1000
}
fn default_t_end() -> f64 {
    0.2
}
fn default_method() -> String {
    "rkf45-adaptive".into()
}
fn default_norm_cap_factor() -> f64 {
    1e6
}
fn default_max_steps() -> usize {
    1_000_000
}

/// How a command obtains its input operator.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
#[derive(Default)]
pub enum OperatorSpec {
    /// The identity operator (round sphere).
    #[default]
    Identity,
    /// Load from an operator JSON file.
    File { path: String },
    /// Seed-deterministic random draw.
    Random {
        mode: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cone: Option<String>,
        #[serde(default = "default_delta")]
        delta: f64,
    },
}


#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeTestConfig {
    #[serde(default = "default_schema")]
    pub schema: u32,
    pub n: usize,
    /// Cone name or "all".
    pub cone: String,
    #[serde(default)]
    pub operator: OperatorSpec,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_starts")]
    pub starts: usize,
    #[serde(default = "default_iters")]
    pub iters: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrateConfig {
    #[serde(default = "default_schema")]
    pub schema: u32,
    pub n: usize,
    #[serde(default)]
    pub r0: OperatorSpec,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    /// "rk4-fixed" or "rkf45-adaptive".
    #[serde(default = "default_method")]
    pub method: String,
    #[serde(default)]
    pub step: Option<f64>,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_rtol")]
    pub atol: f64,
    #[serde(default = "default_norm_cap_factor")]
    pub norm_cap_factor: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    /// Uniform output nodes; 0 keeps the solver's natural grid.
    #[serde(default)]
    pub output_points: usize,
    /// Cone margins to append to the trajectory table.
    #[serde(default)]
    pub margins: Vec<String>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_starts")]
    pub starts: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    #[serde(default = "default_schema")]
    pub schema: u32,
    /// "tangency", "invariance", "defect-psd" or "theorem".
    pub kind: String,
    pub n: usize,
    pub cone: String,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_horizon_fraction")]
    pub horizon_fraction: f64,
    #[serde(default = "default_a")]
    pub a: f64,
    #[serde(default = "default_b")]
    pub b: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_starts")]
    pub starts: usize,
    #[serde(default = "default_iters")]
    pub iters: usize,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_rtol")]
    pub atol: f64,
    #[serde(default = "default_checkpoints")]
    pub checkpoints: usize,
    /// Exit with a check failure when the probe reports violations.
    #[serde(default)]
    pub expect_clean: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsConfig {
    #[serde(default = "default_schema")]
    pub schema: u32,
    pub n: usize,
    #[serde(default = "default_a")]
    pub a: f64,
    #[serde(default = "default_b")]
    pub b: f64,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
}

pub fn load_config<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let value: T = serde_json::from_str(&text)
        .with_context(|| format!("cannot parse config {}", path.display()))?;
    Ok(value)
}

pub fn check_schema(schema: u32) -> Result<()> {
    if schema != SCHEMA_VERSION {
        bail!("unsupported config schema {schema}, this build expects {SCHEMA_VERSION}");
    }
    Ok(())
}

pub fn parse_cone(name: &str) -> Result<ConeId> {
    name.parse::<ConeId>()
        .map_err(|_| anyhow::anyhow!("unknown cone name {name:?} (expected one of co, 2co, ic1, ic2, ric, scal, sec)"))
}

pub fn budget_from(starts: usize, iters: usize, seed: u64) -> SearchBudget {
    SearchBudget {
        starts,
        iters,
        seed,
        ..SearchBudget::default()
    }
}

pub fn solver_from(
    method: &str,
    step: Option<f64>,
    rtol: f64,
    atol: f64,
    norm_cap_factor: f64,
    max_steps: usize,
    output_points: usize,
) -> Result<SolverConfig> {
    let method = match method {
        "rk4-fixed" => {
            let step = step.ok_or_else(|| anyhow::anyhow!("rk4-fixed requires a step"))?;
            Method::Rk4Fixed { step }
        }
        "rkf45-adaptive" => Method::Rkf45 { rtol, atol },
        other => bail!("unknown method {other:?} (expected rk4-fixed or rkf45-adaptive)"),
    };
    Ok(SolverConfig {
        method,
        norm_cap_factor,
        max_steps,
        output: if output_points == 0 {
            OutputGrid::Natural
        } else {
            OutputGrid::Uniform(output_points)
        },
        ..SolverConfig::default()
    })
}

/// FNV-1a over the canonical JSON of the resolved config.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let text = serde_json::to_string(config).expect("config serializes");
    let mut hash: u64 = 0xcbf29ce484222325;
    for byte in text.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x100000001b3);
    }
    format!("{hash:016x}")
}

/// Provenance header embedded in every output file.
#[derive(Debug, Serialize)]
pub struct Provenance<T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema: u32,
    pub seed: u64,
    pub config_hash: String,
    pub config: T,
}

impl<T: Serialize> Provenance<T> {
    pub fn new(seed: u64, config: T) -> Self {
        let config_hash = config_hash(&config);
        Provenance {
            tool: "curvops",
            version: env!("CARGO_PKG_VERSION"),
            schema: SCHEMA_VERSION,
            seed,
            config_hash,
            config,
        }
    }

    pub fn csv_comments(&self) -> Vec<String> {
        vec![
            format!("curvops v{} schema={}", self.version, self.schema),
            format!("config_hash={} seed={}", self.config_hash, self.seed),
        ]
    }
}
