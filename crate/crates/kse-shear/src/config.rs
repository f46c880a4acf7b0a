//! TOML-facing configuration types for the command-line front end.
//!
//! All physical quantities carry explicit keys; nothing is positional.
//! Validation errors name the offending key.

use crate::error::{KseError, Result};
use crate::shear::ShearProfile;
use crate::solver::{stability_cap, InitSpec, Scheme, SolverConfig};
use crate::spectral::Grid2D;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridConfig {
    pub nx: usize,
    pub ny: usize,
    pub l1: f64,
    pub l2: f64,
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid2D> {
        Grid2D::new(self.nx, self.ny, self.l1, self.l2)
    }
}

/// Shear profile selector. In a simulate config `l2`/`ny` are inherited
/// from the grid; in sweep configs they must be given.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileConfig {
    SinPower {
        m: usize,
        l2: Option<f64>,
        ny: Option<usize>,
    },
    Constant {
        value: f64,
        l2: Option<f64>,
        ny: Option<usize>,
    },
    Zero {
        l2: Option<f64>,
        ny: Option<usize>,
    },
    Csv {
        path: PathBuf,
        declared_order: usize,
        ny: Option<usize>,
        label: Option<String>,
    },
}

impl ProfileConfig {
    pub fn build(&self, default_l2: Option<f64>, default_ny: Option<usize>) -> Result<ShearProfile> {
        let need = |v: Option<f64>, key: &str| -> Result<f64> {
            v.or(default_l2).ok_or_else(|| KseError::Config {
                key: format!("profile.{key}"),
                message: "missing and no grid default available".into(),
            })
        };
        let need_ny = |v: Option<usize>, key: &str| -> Result<usize> {
            v.or(default_ny).ok_or_else(|| KseError::Config {
                key: format!("profile.{key}"),
                message: "missing and no grid default available".into(),
            })
        };
        match self {
            ProfileConfig::SinPower { m, l2, ny } => {
                ShearProfile::sin_power(*m, need(*l2, "l2")?, need_ny(*ny, "ny")?)
            }
            ProfileConfig::Constant { value, l2, ny } => Ok(ShearProfile::constant(
                *value,
                need(*l2, "l2")?,
                need_ny(*ny, "ny")?,
            )),
            ProfileConfig::Zero { l2, ny } => {
                Ok(ShearProfile::zero(need(*l2, "l2")?, need_ny(*ny, "ny")?))
            }
            ProfileConfig::Csv {
                path,
                declared_order,
                ny,
                label,
            } => {
                let file = std::fs::File::open(path).map_err(|e| KseError::Config {
                    key: "profile.path".into(),
                    message: format!("{}: {e}", path.display()),
                })?;
                let name = label.clone().unwrap_or_else(|| {
                    path.file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_else(|| "csv".into())
                });
                ShearProfile::from_csv_reader(file, &name, need_ny(*ny, "ny")?, *declared_order)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitConfig {
    File {
        path: PathBuf,
    },
    RandomSpectrum {
        decay_exponent: f64,
        amplitude: f64,
        target_norm: Option<f64>,
    },
    ModeList {
        modes: Vec<(i64, i64, f64, f64)>,
    },
}

impl InitConfig {
    pub fn build(&self) -> InitSpec {
        match self {
            InitConfig::File { path } => InitSpec::File(path.clone()),
            InitConfig::RandomSpectrum {
                decay_exponent,
                amplitude,
                target_norm,
            } => InitSpec::RandomSpectrum {
                decay_exponent: *decay_exponent,
                amplitude: *amplitude,
                target_norm: *target_norm,
            },
            InitConfig::ModeList { modes } => InitSpec::ModeList(modes.clone()),
        }
    }
}

fn default_true() -> bool {
    true
}
fn default_ledger_interval() -> f64 {
    0.015
}
fn default_rate_threshold() -> f64 {
    (-2.0f64).exp()
}
fn default_audit_j() -> usize {
    64
}
fn default_mean_decay_tol() -> f64 {
    1e-5
}
fn default_energy_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSection {
    pub nu: f64,
    /// Time step; defaults to 0.9x the stability cap.
    pub dt: Option<f64>,
    pub t_end: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_true")]
    pub dealias: bool,
    #[serde(default = "default_ledger_interval")]
    pub ledger_interval: f64,
    #[serde(default)]
    pub checkpoint_times: Vec<f64>,
    #[serde(default = "default_true")]
    pub energy_series: bool,
    #[serde(default)]
    pub invariant_check_every: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditSection {
    #[serde(default = "default_true")]
    pub enabled: bool,
    /// Mode-operator truncation used to measure the decay rate lambda.
    #[serde(default = "default_audit_j")]
    pub j_trunc: usize,
    #[serde(default = "default_rate_threshold")]
    pub rate_threshold: f64,
    #[serde(default = "default_mean_decay_tol")]
    pub mean_decay_tol: f64,
    #[serde(default = "default_energy_tol")]
    pub energy_tol: f64,
}

impl Default for AuditSection {
    fn default() -> Self {
        Self {
            enabled: true,
            j_trunc: default_audit_j(),
            rate_threshold: default_rate_threshold(),
            mean_decay_tol: default_mean_decay_tol(),
            energy_tol: default_energy_tol(),
        }
    }
}

/// `simulate` subcommand configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub grid: GridConfig,
    pub profile: ProfileConfig,
    pub run: RunSection,
    pub init: InitConfig,
    #[serde(default)]
    pub audits: AuditSection,
}

impl SimulateConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| KseError::Config {
            key: "config".into(),
            message: format!("{}: {e}", path.display()),
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(config_error)
    }

    pub fn build(&self, seed_override: Option<u64>) -> Result<SolverConfig> {
        let grid = self.grid.build()?;
        let profile = self.profile.build(Some(grid.l2()), Some(grid.ny()))?;
        let dt = match self.run.dt {
            Some(dt) => dt,
            None => 0.9 * stability_cap(&grid, self.run.nu, &profile),
        };
        let config = SolverConfig {
            grid,
            nu: self.run.nu,
            profile,
            dt,
            t_end: self.run.t_end,
            scheme: Scheme::Etdrk4,
            dealias: self.run.dealias,
            seed: seed_override.unwrap_or(self.run.seed),
            init: self.init.build(),
            ledger_interval: self.run.ledger_interval,
            checkpoint_times: self.run.checkpoint_times.clone(),
            energy_series: self.run.energy_series,
            invariant_check_every: self.run.invariant_check_every,
        };
        config.validate()?;
        Ok(config)
    }
}

fn default_sweep_j() -> usize {
    128
}
fn default_gp_times() -> Vec<f64> {
    vec![1.0, 10.0, 100.0]
}
fn default_search_tol_rel() -> f64 {
    1e-9
}

/// `psi-sweep` subcommand configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub profiles: Vec<ProfileConfig>,
    /// "full" and/or "hypoelliptic".
    #[serde(default = "default_variants")]
    pub variants: Vec<String>,
    pub nus: Vec<f64>,
    pub kappas: Vec<f64>,
    #[serde(default = "default_sweep_j")]
    pub j_trunc: usize,
    /// Psi search tolerance relative to the trial-mode upper bound.
    #[serde(default = "default_search_tol_rel")]
    pub search_tol_rel: f64,
    /// Semigroup threshold for measured decay rates; omit to skip rates.
    pub rate_threshold: Option<f64>,
    #[serde(default = "default_gp_times")]
    pub gp_times: Vec<f64>,
}

fn default_variants() -> Vec<String> {
    vec!["full".into()]
}

impl SweepConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| KseError::Config {
            key: "config".into(),
            message: format!("{}: {e}", path.display()),
        })?;
        toml::from_str(&text).map_err(config_error)
    }
}

/// `assumption-check` subcommand configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssumptionConfig {
    pub profile: ProfileConfig,
    pub m: usize,
    pub n_centers: usize,
    /// Defaults to min(L2/6, L2/(4N)).
    pub delta0: Option<f64>,
    #[serde(default)]
    pub fine_grid: Option<usize>,
    /// Search downward for the largest passing delta0 instead of a single
    /// audit.
    #[serde(default)]
    pub search_delta0: bool,
}

impl AssumptionConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| KseError::Config {
            key: "config".into(),
            message: format!("{}: {e}", path.display()),
        })?;
        toml::from_str(&text).map_err(config_error)
    }
}

fn config_error(e: toml::de::Error) -> KseError {
    KseError::Config {
        key: e
            .span()
            .map(|s| format!("offset {}..{}", s.start, s.end))
            .unwrap_or_else(|| "?".into()),
        message: e.message().to_string(),
    }
}
