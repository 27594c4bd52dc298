//! Versioned JSON configuration. Unknown keys are rejected everywhere.

use anyhow::{bail, Context, Result};
use anyonlab_core::manybody::{CondensateKind, CondensateSpec};
use anyonlab_core::meanfield::GridSpec;
use anyonlab_core::twobody::{schedule_params, ScalingSchedule};
use anyonlab_core::Potential;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

fn zero_potential() -> Potential {
    Potential::Zero
}

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn check_version(v: u32) -> Result<()> {
    if v != SCHEMA_VERSION {
        bail!("unsupported config version {v}, expected {SCHEMA_VERSION}");
    }
    Ok(())
}

/// Truncated Gaussian condensate on the disk of radius `supportRadius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct CondensateConfig {
    pub support_radius: f64,
    /// Defaults to a third of the support radius.
    #[serde(default)]
    pub sigma: Option<f64>,
}

impl CondensateConfig {
    pub fn spec(&self) -> CondensateSpec {
        let sigma = self.sigma.unwrap_or(self.support_radius / 3.0);
        CondensateSpec { kind: CondensateKind::TruncatedGaussian { sigma }, support_radius: self.support_radius }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct SamplerConfig {
    pub burn_in: usize,
    pub sweeps: usize,
    pub chains: usize,
    #[serde(default)]
    pub rao_blackwell: bool,
}

/// Points `(N, omega, g)` of a schedule with fixed `beta` and `bExponent`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct ScheduleScan {
    #[serde(rename = "N")]
    pub n: Vec<usize>,
    pub beta: f64,
    pub omega: Vec<f64>,
    pub b_exponent: f64,
    pub g: Vec<f64>,
    pub condensate: CondensateConfig,
    #[serde(default = "zero_potential")]
    pub potential: Potential,
    pub sampler: SamplerConfig,
    /// Grid for the mean-field prediction; defaults to `L = 4 R1`, `n = 256`.
    #[serde(default)]
    pub grid: Option<GridSpec>,
}

impl ScheduleScan {
    pub fn schedules(&self) -> Vec<ScalingSchedule> {
        let mut out = Vec::new();
        for &omega in &self.omega {
            for &g in &self.g {
                for &n in &self.n {
                    out.push(ScalingSchedule { n, beta: self.beta, omega, b_exponent: self.b_exponent, g });
                }
            }
        }
        out
    }

    pub fn grid(&self) -> GridSpec {
        self.grid.unwrap_or(GridSpec { l: 4.0 * self.condensate.support_radius, n: 256 })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct NllSuite {
    pub betas: Vec<f64>,
    pub pairs_per_beta: usize,
    pub grid: GridSpec,
    /// Inner radius of the edge taper as a fraction of `L/2`; `null` disables it.
    #[serde(default)]
    pub taper: Option<f64>,
    #[serde(default = "default_identity_tol")]
    pub tol: f64,
}

fn default_identity_tol() -> f64 {
    1e-5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct GammaStarScan {
    pub betas: Vec<f64>,
    pub grid: GridSpec,
    pub restarts: usize,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    Convergence(ScheduleScan),
    GScan(ScheduleScan),
    OmegaScan(ScheduleScan),
    NllSuite(NllSuite),
    GammastarScan(GammaStarScan),
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Convergence(_) => "convergence",
            Experiment::GScan(_) => "g-scan",
            Experiment::OmegaScan(_) => "omega-scan",
            Experiment::NllSuite(_) => "nll-suite",
            Experiment::GammastarScan(_) => "gammastar-scan",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct ExperimentConfig {
    pub version: u32,
    pub seed: u64,
    pub experiment: Experiment,
    #[serde(default)]
    pub out_dir: Option<std::path::PathBuf>,
}

impl ExperimentConfig {
    /// Grids non-empty and every schedule tuple well formed. Tuples that
    /// only raise schedule warnings are flagged later in their records.
    pub fn validate(&self) -> Result<()> {
        check_version(self.version)?;
        match &self.experiment {
            Experiment::Convergence(s) | Experiment::GScan(s) | Experiment::OmegaScan(s) => {
                if s.n.is_empty() || s.omega.is_empty() || s.g.is_empty() {
                    bail!("N, omega and g grids must be non-empty");
                }
                if s.sampler.chains == 0 || s.sampler.sweeps == 0 {
                    bail!("sampler needs at least one chain and one sweep");
                }
                if !(s.condensate.support_radius > 0.0) {
                    bail!("supportRadius must be positive");
                }
                for sch in s.schedules() {
                    schedule_params(&sch).with_context(|| format!("schedule {sch:?}"))?;
                }
            }
            Experiment::NllSuite(s) => {
                if s.betas.is_empty() || s.pairs_per_beta == 0 {
                    bail!("nll-suite needs betas and pairsPerBeta > 0");
                }
                for &b in &s.betas {
                    if !(b >= 2.0 && (0.5 * b).fract() == 0.0) {
                        bail!("NLL states exist only for beta = 2d, got {b}");
                    }
                }
            }
            Experiment::GammastarScan(s) => {
                if s.betas.is_empty() || s.restarts == 0 {
                    bail!("gammastar-scan needs betas and restarts > 0");
                }
            }
        }
        Ok(())
    }
}

/// `twobody` subcommand input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct TwoBodyConfig {
    #[serde(default = "schema_version")]
    pub version: u32,
    pub alpha: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub b: f64,
    pub g: f64,
    #[serde(default = "default_cells")]
    pub n_outer: usize,
}

fn default_cells() -> usize {
    800
}

/// `vmc` subcommand input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct VmcRunConfig {
    #[serde(default = "schema_version")]
    pub version: u32,
    #[serde(rename = "N")]
    pub n: usize,
    pub alpha: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub b: f64,
    pub g: f64,
    pub condensate: CondensateConfig,
    #[serde(default = "zero_potential")]
    pub potential: Potential,
    pub sampler: SamplerConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub rel_err_ceiling: Option<f64>,
}

/// `css` subcommand input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct CssConfig {
    #[serde(default = "schema_version")]
    pub version: u32,
    pub beta: f64,
    pub gamma: f64,
    #[serde(rename = "V", default = "zero_potential")]
    pub v: Potential,
    #[serde(rename = "L")]
    pub l: f64,
    pub n: usize,
    pub tol: f64,
    pub max_iter: usize,
    #[serde(default)]
    pub seed: u64,
    /// Width of the random start; defaults to `L / 32`.
    #[serde(default)]
    pub start_width: Option<f64>,
}

/// `nll` subcommand input; coefficients are `[re, im]` pairs, lowest degree first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct NllConfig {
    #[serde(default = "schema_version")]
    pub version: u32,
    #[serde(rename = "P")]
    pub p: Vec<[f64; 2]>,
    #[serde(rename = "Q")]
    pub q: Vec<[f64; 2]>,
    #[serde(rename = "L")]
    pub l: f64,
    pub n: usize,
    #[serde(default)]
    pub taper: Option<f64>,
    #[serde(default = "default_identity_tol")]
    pub tol: f64,
}

/// `gammastar` subcommand input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct GammaStarConfig {
    #[serde(default = "schema_version")]
    pub version: u32,
    pub betas: Vec<f64>,
    #[serde(rename = "L")]
    pub l: f64,
    pub n: usize,
    pub restarts: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub max_iter: Option<usize>,
}

macro_rules! versioned {
    ($($t:ty),*) => {$(
        impl $t {
            pub fn check(&self) -> Result<()> {
                check_version(self.version)
            }
        }
    )*};
}

versioned!(TwoBodyConfig, VmcRunConfig, CssConfig, NllConfig, GammaStarConfig);
