//! Error metrics, SAR-ADC cycle/speedup models, normalized energy model,
//! and small statistics helpers for aggregating Monte-Carlo trials.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// MAC output error against an exact integer oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorStats {
    pub rmse: f64,
    pub max_abs: f64,
    /// Fraction of outputs differing from the oracle.
    pub code_error_rate: f64,
}

pub fn mac_error_stats(simulated: &[i64], exact: &[i64]) -> Result<ErrorStats> {
    if simulated.len() != exact.len() || simulated.is_empty() {
        return Err(Error::Dimension(format!(
            "comparing {} simulated outputs against {} exact ones",
            simulated.len(),
            exact.len()
        )));
    }
    let mut sq_sum = 0.0f64;
    let mut max_abs = 0.0f64;
    let mut wrong = 0usize;
    for (&s, &e) in simulated.iter().zip(exact) {
        let d = (s - e) as f64;
        sq_sum += d * d;
        max_abs = max_abs.max(d.abs());
        wrong += usize::from(s != e);
    }
    Ok(ErrorStats {
        rmse: (sq_sum / simulated.len() as f64).sqrt(),
        max_abs,
        code_error_rate: wrong as f64 / simulated.len() as f64,
    })
}

/// Latency model of one layer's MAC on a crossbar tile. A SAR ADC resolves
/// one bit per cycle, so a conversion costs `adc_bits` cycles and the ADC is
/// the only cycle consumer; planes convert in parallel, so latency is
/// per-plane while `planes` scales conversion counts (energy), not cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PerfModel {
    pub input_bits: u8,
    pub rows: usize,
    pub naw: usize,
    pub adc_bits: u8,
    pub planes: usize,
}

impl PerfModel {
    pub fn validate(&self) -> Result<()> {
        if self.input_bits == 0 || self.rows == 0 || self.naw == 0 || self.adc_bits == 0
            || self.planes == 0
        {
            return Err(Error::Config(
                "perf model fields must all be positive".into(),
            ));
        }
        Ok(())
    }

    /// Cycles to drain one layer: input bits x wordline groups x bits per
    /// SAR conversion.
    pub fn cycles(&self) -> u64 {
        u64::from(self.input_bits) * self.rows.div_ceil(self.naw) as u64 * u64::from(self.adc_bits)
    }
}

/// Cycle ratio of baseline over candidate. With `include_plane_overhead`
/// the candidate is additionally charged its plane-count ratio (e.g. 5/4
/// when a redundant plane is added).
pub fn speedup(
    baseline: &PerfModel,
    candidate: &PerfModel,
    include_plane_overhead: bool,
) -> Result<f64> {
    baseline.validate()?;
    candidate.validate()?;
    if baseline.rows != candidate.rows || baseline.input_bits != candidate.input_bits {
        return Err(Error::Config(
            "speedup compares models with equal rows and input_bits".into(),
        ));
    }
    if include_plane_overhead {
        Ok((baseline.cycles() * baseline.planes as u64) as f64
            / (candidate.cycles() * candidate.planes as u64) as f64)
    } else {
        Ok(baseline.cycles() as f64 / candidate.cycles() as f64)
    }
}

fn default_k_adc() -> f64 {
    0.01
}

fn default_base() -> f64 {
    2.0
}

/// Normalized energy model. Crossbar dynamic energy is the integral of
/// driven conductance times `v_read^2` accumulated by the simulator; each
/// ADC conversion costs `k_adc * adc_exponent_base^resolution_bits`. Both
/// constants are configuration, not asserted facts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyModel {
    #[serde(default = "default_k_adc")]
    pub k_adc: f64,
    #[serde(default = "default_base")]
    pub adc_exponent_base: f64,
}

impl Default for EnergyModel {
    fn default() -> Self {
        Self {
            k_adc: default_k_adc(),
            adc_exponent_base: default_base(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    pub e_xbar: f64,
    pub e_adc: f64,
    pub e_total: f64,
}

impl EnergyModel {
    pub fn validate(&self) -> Result<()> {
        if !self.k_adc.is_finite() || self.k_adc < 0.0 {
            return Err(Error::Config(format!(
                "energy.k_adc = {} must be >= 0",
                self.k_adc
            )));
        }
        if !self.adc_exponent_base.is_finite() || self.adc_exponent_base < 1.0 {
            return Err(Error::Config(format!(
                "energy.adc_exponent_base = {} must be >= 1",
                self.adc_exponent_base
            )));
        }
        Ok(())
    }

    pub fn breakdown(&self, xbar_energy: f64, conversions: u64, adc_bits: u8) -> EnergyBreakdown {
        let e_adc = self.k_adc * self.adc_exponent_base.powi(i32::from(adc_bits)) * conversions as f64;
        EnergyBreakdown {
            e_xbar: xbar_energy,
            e_adc,
            e_total: xbar_energy + e_adc,
        }
    }
}

/// Total-energy ratio of a candidate run against a named baseline run.
pub fn energy_ratio(candidate: &EnergyBreakdown, baseline: &EnergyBreakdown) -> f64 {
    candidate.e_total / baseline.e_total
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n-1 denominator); 0 for fewer than 2 points.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Percentile bootstrap confidence interval for the mean, deterministic per
/// seed.
pub fn bootstrap_mean_ci(
    xs: &[f64],
    resamples: usize,
    alpha: f64,
    seed: u64,
) -> (f64, f64) {
    assert!(!xs.is_empty() && resamples > 0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut means = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let s: f64 = (0..xs.len())
            .map(|_| xs[rng.random_range(0..xs.len())])
            .sum();
        means.push(s / xs.len() as f64);
    }
    means.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let lo_idx = ((alpha / 2.0) * (resamples - 1) as f64).round() as usize;
    let hi_idx = ((1.0 - alpha / 2.0) * (resamples - 1) as f64).round() as usize;
    (means[lo_idx], means[hi_idx])
}

/// Largest `naw` whose accuracy stays within `max_drop` of `reference`,
/// found by direct search over measured sweep points.
pub fn max_naw_within_drop(
    points: &[(usize, f64)],
    reference: f64,
    max_drop: f64,
) -> Option<usize> {
    points
        .iter()
        .filter(|(_, acc)| *acc >= reference - max_drop)
        .map(|(naw, _)| *naw)
        .max()
}
