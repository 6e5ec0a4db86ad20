//! Experiment configuration schema and its validating loader.
//!
//! Configs are JSON documents; the full schema with defaults:
//!
//! ```json
//! {
//!   "workload": {"kind": "random_matrix", "rows": 128, "cols": 16, "weight_bits": 8},
//!   "pipelines": ["conventional", "iac", "vecom"],
//!   "sigma": [0.0, 0.04, 0.08],
//!   "naw": [128],
//!   "r_ratio": [300.0],
//!   "bits_per_cell": [2],
//!   "trials": 10,
//!   "master_seed": 42,
//!   "activation_bits": 8,
//!   "g_max": 1.0,
//!   "v_read": 1.0,
//!   "analog_bias_count": false,
//!   "energy": {"k_adc": 0.01, "adc_exponent_base": 2.0}
//! }
//! ```
//!
//! The MLP workload replaces the `workload` object:
//!
//! ```json
//! {"kind": "mlp", "classes": 3, "feature_dim": 16, "hidden_dims": [16],
//!  "train_samples": 240, "test_samples": 120, "epochs": 150,
//!  "data_seed": 7, "train_seed": 11, "weight_bits": 8}
//! ```

use serde::{Deserialize, Serialize};

use crate::device::ProgrammingScheme;
use crate::encode::EncodingScheme;
use crate::error::{Error, Result};
use crate::metrics::EnergyModel;
use crate::xbar::{Compensation, TILE_DIM};

/// A named end-to-end configuration bundling the encoding, the programming
/// scheme and the compensation mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    /// Bias-by-half-range mapping, proportional targets, no compensation.
    Conventional,
    /// Conventional mapping plus HRS-column subtraction.
    Iac,
    /// Bias control + redundant mapping, offset-compensated targets,
    /// HRS-column subtraction.
    Vecom,
}

impl Pipeline {
    pub fn encoding(self) -> EncodingScheme {
        match self {
            Pipeline::Conventional | Pipeline::Iac => EncodingScheme::Conventional,
            Pipeline::Vecom => EncodingScheme::Vecom,
        }
    }

    pub fn programming(self) -> ProgrammingScheme {
        match self {
            Pipeline::Conventional | Pipeline::Iac => ProgrammingScheme::Proportional,
            Pipeline::Vecom => ProgrammingScheme::OffsetCompensated,
        }
    }

    pub fn compensation(self) -> Compensation {
        match self {
            Pipeline::Conventional => Compensation::None,
            Pipeline::Iac => Compensation::IacSubtract,
            Pipeline::Vecom => Compensation::VecomSubtract,
        }
    }

    /// Extra columns the pipeline actually reads (the HRS column).
    pub fn extra_columns(self) -> usize {
        match self {
            Pipeline::Conventional => 0,
            Pipeline::Iac | Pipeline::Vecom => 1,
        }
    }

    pub const ALL: [Pipeline; 3] = [Pipeline::Conventional, Pipeline::Iac, Pipeline::Vecom];
}

impl std::fmt::Display for Pipeline {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Pipeline::Conventional => write!(f, "conventional"),
            Pipeline::Iac => write!(f, "iac"),
            Pipeline::Vecom => write!(f, "vecom"),
        }
    }
}

impl std::str::FromStr for Pipeline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "conventional" => Ok(Pipeline::Conventional),
            "iac" => Ok(Pipeline::Iac),
            "vecom" => Ok(Pipeline::Vecom),
            other => Err(Error::Config(format!(
                "unknown pipeline '{other}' (expected conventional | iac | vecom)"
            ))),
        }
    }
}

fn default_weight_bits() -> u8 {
    8
}

/// What gets multiplied on the crossbars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WorkloadSpec {
    /// Per-trial Gaussian int weights (range spans four standard
    /// deviations) against uniform activations.
    RandomMatrix {
        rows: usize,
        cols: usize,
        #[serde(default = "default_weight_bits")]
        weight_bits: u8,
    },
    /// A tiny MLP trained once per config on synthetic blobs, evaluated on
    /// a held-out split each trial.
    Mlp {
        classes: usize,
        feature_dim: usize,
        hidden_dims: Vec<usize>,
        train_samples: usize,
        test_samples: usize,
        epochs: usize,
        data_seed: u64,
        train_seed: u64,
        #[serde(default = "default_weight_bits")]
        weight_bits: u8,
    },
}

impl WorkloadSpec {
    pub fn weight_bits(&self) -> u8 {
        match self {
            WorkloadSpec::RandomMatrix { weight_bits, .. }
            | WorkloadSpec::Mlp { weight_bits, .. } => *weight_bits,
        }
    }

    pub fn is_mlp(&self) -> bool {
        matches!(self, WorkloadSpec::Mlp { .. })
    }

    fn validate(&self) -> Result<()> {
        match self {
            WorkloadSpec::RandomMatrix {
                rows,
                cols,
                weight_bits,
            } => {
                if *rows == 0 || *rows > TILE_DIM {
                    return Err(Error::Config(format!(
                        "workload.rows = {rows} must be in [1, {TILE_DIM}]"
                    )));
                }
                if *cols == 0 || *cols > TILE_DIM {
                    return Err(Error::Config(format!(
                        "workload.cols = {cols} must be in [1, {TILE_DIM}]"
                    )));
                }
                check_weight_bits(*weight_bits)
            }
            WorkloadSpec::Mlp {
                classes,
                feature_dim,
                hidden_dims,
                train_samples,
                test_samples,
                epochs: _,
                weight_bits,
                ..
            } => {
                if *classes < 2 {
                    return Err(Error::Config(format!(
                        "workload.classes = {classes} must be >= 2"
                    )));
                }
                if *feature_dim < 2 || *feature_dim > TILE_DIM {
                    return Err(Error::Config(format!(
                        "workload.feature_dim = {feature_dim} must be in [2, {TILE_DIM}]"
                    )));
                }
                if hidden_dims.iter().any(|&h| h == 0 || h > TILE_DIM) {
                    return Err(Error::Config(format!(
                        "workload.hidden_dims = {hidden_dims:?} must be in [1, {TILE_DIM}]"
                    )));
                }
                if *train_samples < *classes {
                    return Err(Error::Config(format!(
                        "workload.train_samples = {train_samples} must be >= classes"
                    )));
                }
                if *test_samples == 0 {
                    return Err(Error::Config(
                        "workload.test_samples must be >= 1".into(),
                    ));
                }
                check_weight_bits(*weight_bits)
            }
        }
    }
}

fn check_weight_bits(bits: u8) -> Result<()> {
    if bits == 4 || bits == 8 {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "workload.weight_bits = {bits} must be 4 or 8"
        )))
    }
}

fn default_activation_bits() -> u8 {
    8
}

fn default_unit() -> f64 {
    1.0
}

/// One experiment: a workload crossed with sweep axes, evaluated for a
/// number of Monte-Carlo trials per point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub workload: WorkloadSpec,
    pub pipelines: Vec<Pipeline>,
    pub sigma: Vec<f64>,
    pub naw: Vec<usize>,
    pub r_ratio: Vec<f64>,
    pub bits_per_cell: Vec<u8>,
    pub trials: usize,
    pub master_seed: u64,
    #[serde(default = "default_activation_bits")]
    pub activation_bits: u8,
    #[serde(default = "default_unit")]
    pub g_max: f64,
    #[serde(default = "default_unit")]
    pub v_read: f64,
    #[serde(default)]
    pub analog_bias_count: bool,
    #[serde(default)]
    pub energy: EnergyModel,
    /// Default result path; the CLI's `--out` flag overrides it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<std::path::PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Rejects any out-of-range axis value, naming the offending field.
    pub fn validate(&self) -> Result<()> {
        self.workload.validate()?;
        if self.pipelines.is_empty() {
            return Err(Error::Config("pipelines must not be empty".into()));
        }
        if self.sigma.is_empty() {
            return Err(Error::Config("sigma axis must not be empty".into()));
        }
        for (i, &s) in self.sigma.iter().enumerate() {
            if !s.is_finite() || s < 0.0 {
                return Err(Error::Config(format!(
                    "sigma[{i}] = {s} out of range (must be >= 0)"
                )));
            }
        }
        if self.naw.is_empty() {
            return Err(Error::Config("naw axis must not be empty".into()));
        }
        for (i, &n) in self.naw.iter().enumerate() {
            if n == 0 || n > TILE_DIM {
                return Err(Error::Config(format!(
                    "naw[{i}] = {n} out of range [1, {TILE_DIM}]"
                )));
            }
        }
        if self.r_ratio.is_empty() {
            return Err(Error::Config("r_ratio axis must not be empty".into()));
        }
        for (i, &r) in self.r_ratio.iter().enumerate() {
            if !r.is_finite() || r <= 1.0 {
                return Err(Error::Config(format!(
                    "r_ratio[{i}] = {r} out of range (must be > 1)"
                )));
            }
        }
        if self.bits_per_cell.is_empty() {
            return Err(Error::Config("bits_per_cell axis must not be empty".into()));
        }
        for (i, &b) in self.bits_per_cell.iter().enumerate() {
            if b == 0 || b > 6 {
                return Err(Error::Config(format!(
                    "bits_per_cell[{i}] = {b} out of range [1, 6]"
                )));
            }
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if self.activation_bits == 0 || self.activation_bits > 8 {
            return Err(Error::Config(format!(
                "activation_bits = {} out of range [1, 8]",
                self.activation_bits
            )));
        }
        if !self.g_max.is_finite() || self.g_max <= 0.0 {
            return Err(Error::Config(format!("g_max = {} must be > 0", self.g_max)));
        }
        if !self.v_read.is_finite() || self.v_read <= 0.0 {
            return Err(Error::Config(format!(
                "v_read = {} must be > 0",
                self.v_read
            )));
        }
        self.energy.validate()
    }
}
