//! Conductance-level device model: nominal per-level targets under two
//! programming schemes, finite R-ratio, and log-normal programming
//! variation.
//!
//! Units are normalized: `g_max = 1.0` is the fully-on (LRS) conductance and
//! `v_read = 1.0` the read voltage, so everything downstream is a unit-free
//! ratio. A cell programmed to nominal conductance `G0` reads back
//! `G0 * exp(theta)` with `theta ~ N(0, sigma^2)`; write-and-verify is
//! modeled as exact nominal targeting plus that single log-normal sample.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn default_unit() -> f64 {
    1.0
}

/// Everything needed to turn a digit level into a (noisy) conductance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    /// LRS conductance bound (normalized).
    #[serde(default = "default_unit")]
    pub g_max: f64,
    /// LRS/HRS conductance ratio; the HRS floor is `g_max / r_ratio`.
    pub r_ratio: f64,
    pub bits_per_cell: u8,
    /// Log-normal deviation of programmed conductance.
    pub sigma: f64,
    /// Read voltage (normalized).
    #[serde(default = "default_unit")]
    pub v_read: f64,
}

impl DeviceParams {
    /// Normalized parameters (`g_max = v_read = 1`).
    pub fn new(r_ratio: f64, bits_per_cell: u8, sigma: f64) -> Self {
        Self {
            g_max: 1.0,
            r_ratio,
            bits_per_cell,
            sigma,
            v_read: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.g_max.is_finite() || self.g_max <= 0.0 {
            return Err(Error::Config(format!("g_max = {} must be > 0", self.g_max)));
        }
        if !self.r_ratio.is_finite() || self.r_ratio <= 1.0 {
            return Err(Error::Config(format!(
                "r_ratio = {} must be > 1",
                self.r_ratio
            )));
        }
        if self.bits_per_cell == 0 || self.bits_per_cell > 6 {
            return Err(Error::Config(format!(
                "bits_per_cell = {} must be in [1, 6]",
                self.bits_per_cell
            )));
        }
        if !self.sigma.is_finite() || self.sigma < 0.0 {
            return Err(Error::Config(format!("sigma = {} must be >= 0", self.sigma)));
        }
        if !self.v_read.is_finite() || self.v_read <= 0.0 {
            return Err(Error::Config(format!(
                "v_read = {} must be > 0",
                self.v_read
            )));
        }
        Ok(())
    }

    /// HRS conductance floor.
    pub fn g_hrs(&self) -> f64 {
        self.g_max / self.r_ratio
    }

    /// Number of distinct cell levels, `L = 2^bits_per_cell`.
    pub fn levels(&self) -> u8 {
        1 << self.bits_per_cell
    }

    /// Conductance gap between adjacent offset-compensated levels; one ADC
    /// LSB under the offset scheme.
    pub fn level_step(&self) -> f64 {
        (self.g_max - self.g_hrs()) / f64::from(self.levels() - 1)
    }
}

/// How digit levels map to nominal conductance targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProgrammingScheme {
    /// Intended current proportional to the level, floored at the HRS
    /// conductance: `G(v) = max(g_hrs, v * g_max / (L-1))`.
    Proportional,
    /// Every level shifted up by the HRS conductance:
    /// `G'(v) = g_hrs + v * step`, so `G'(0) = g_hrs` and `G'(L-1) = g_max`.
    /// Subtracting the HRS column current then cancels the offset exactly.
    OffsetCompensated,
}

impl std::fmt::Display for ProgrammingScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProgrammingScheme::Proportional => write!(f, "proportional"),
            ProgrammingScheme::OffsetCompensated => write!(f, "offset_compensated"),
        }
    }
}

/// Nominal conductance target for a digit level.
pub fn target_conductance(
    level: u8,
    params: &DeviceParams,
    scheme: ProgrammingScheme,
) -> Result<f64> {
    let levels = params.levels();
    if level >= levels {
        return Err(Error::Validation(format!(
            "level {level} out of range [0, {}]",
            levels - 1
        )));
    }
    let top = f64::from(levels - 1);
    Ok(match scheme {
        ProgrammingScheme::OffsetCompensated => {
            if level == levels - 1 {
                // The top level targets the LRS bound itself.
                params.g_max
            } else {
                params.g_hrs() + f64::from(level) * params.level_step()
            }
        }
        ProgrammingScheme::Proportional => {
            let proportional = f64::from(level) * params.g_max / top;
            proportional.max(params.g_hrs())
        }
    })
}

/// One write-and-verify outcome: `G0 * exp(sigma * z)`, `z ~ N(0, 1)`.
/// `sigma = 0` returns the nominal exactly; the generator is always
/// advanced so call sequences stay aligned across sigma values.
pub fn sample_conductance<R: Rng + ?Sized>(nominal: f64, sigma: f64, rng: &mut R) -> f64 {
    debug_assert!(nominal > 0.0 && sigma >= 0.0);
    let z: f64 = rng.sample(StandardNormal);
    nominal * (sigma * z).exp()
}

/// Ohmic read current.
pub fn cell_current(conductance: f64, v_read: f64) -> f64 {
    conductance * v_read
}
