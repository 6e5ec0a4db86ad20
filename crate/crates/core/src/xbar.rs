//! Crossbar-array MAC simulation.
//!
//! A programmed plane is a matrix of sampled cell conductances plus two
//! extra columns: an all-HRS column whose digital code cancels the HRS
//! leakage of the data columns, and an all-level-1 column that counts input
//! ones for bias removal. Activations arrive bit-serially through 1-bit
//! DACs; wordlines are driven in contiguous groups of at most `naw` rows;
//! every bitline is converted by an ADC of `ceil(log2(naw)) + bits_per_cell`
//! bits whose LSB equals one level step; and group codes are accumulated and
//! recombined digitally (shift-and-add over input bits and planes, then bias
//! subtraction).
//!
//! A `CrossbarInstance` is immutable once programmed and may be shared by
//! any number of concurrent readers; Monte-Carlo trials each own an
//! independent generator.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::device::{sample_conductance, target_conductance, DeviceParams, ProgrammingScheme};
use crate::encode::EncodedPlanes;
use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::quant::{bit_planes, ActivationVector};

/// Crossbar tile bound; arrays larger than this are out of scope.
pub const TILE_DIM: usize = 128;

/// Uniform ADC: `resolution_bits` wide, one code per `lsb_current`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdcConfig {
    pub resolution_bits: u8,
    pub lsb_current: f64,
}

/// Outcome of one conversion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdcReading {
    pub code: u32,
    pub saturated: bool,
}

impl AdcConfig {
    /// Accumulated f64 rounding can leave a noiseless group current a few
    /// ulps off a code boundary; anything this close (in LSB units) is
    /// treated as sitting on the boundary.
    const BOUNDARY_SNAP: f64 = 1e-6;

    pub fn new(resolution_bits: u8, lsb_current: f64) -> Result<Self> {
        if resolution_bits == 0 || resolution_bits > 16 {
            return Err(Error::Config(format!(
                "adc resolution_bits = {resolution_bits} must be in [1, 16]"
            )));
        }
        if !lsb_current.is_finite() || lsb_current <= 0.0 {
            return Err(Error::Config(format!(
                "adc lsb_current = {lsb_current} must be > 0"
            )));
        }
        Ok(Self {
            resolution_bits,
            lsb_current,
        })
    }

    /// ADC provisioned for `naw`-row groups of `params` cells:
    /// `ceil(log2(naw)) + bits_per_cell` bits, LSB equal to one MAC unit of
    /// the programming scheme.
    pub fn for_mac(naw: usize, params: &DeviceParams, scheme: ProgrammingScheme) -> Self {
        let group_bits = usize::BITS - naw.next_power_of_two().leading_zeros() - 1;
        let resolution_bits = group_bits as u8 + params.bits_per_cell;
        let lsb_current = match scheme {
            ProgrammingScheme::OffsetCompensated => params.level_step() * params.v_read,
            ProgrammingScheme::Proportional => {
                params.g_max / f64::from(params.levels() - 1) * params.v_read
            }
        };
        Self {
            resolution_bits,
            lsb_current,
        }
    }

    pub fn saturation_code(&self) -> u32 {
        (1u32 << self.resolution_bits) - 1
    }

    /// Quantizes a current: round-half-away-from-zero in LSB units, clamped
    /// to the code range. Saturation is reported, not an error.
    pub fn convert(&self, current: f64) -> AdcReading {
        let units = (current / self.lsb_current).max(0.0);
        let boundary = (units - 0.5).round() + 0.5;
        let snapped = if (units - boundary).abs() < Self::BOUNDARY_SNAP {
            boundary
        } else {
            units
        };
        let code = snapped.round();
        let sat = self.saturation_code();
        if code > f64::from(sat) {
            AdcReading {
                code: sat,
                saturated: true,
            }
        } else {
            AdcReading {
                code: code as u32,
                saturated: false,
            }
        }
    }
}

/// A programmed conductance matrix with its extra columns. Both extra
/// columns are always programmed; whether their codes are used is decided
/// per MAC call.
#[derive(Debug, Clone)]
pub struct CrossbarInstance {
    conductances: Mat<f64>,
    extra_hrs_column: Vec<f64>,
    bias_column: Vec<f64>,
    pub params: DeviceParams,
    pub scheme: ProgrammingScheme,
}

/// Currents integrated at the bottom of every bitline for one wordline
/// activation pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct BitlineCurrents {
    pub data: Vec<f64>,
    pub hrs: f64,
    pub bias_count: f64,
}

/// Compensation applied to the data-column codes. `IacSubtract` and
/// `VecomSubtract` perform the same digital subtraction of the HRS-column
/// code; they differ only in the programming scheme used upstream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Compensation {
    None,
    IacSubtract,
    VecomSubtract,
}

/// MAC execution parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MacConfig {
    /// Max wordlines activated per analog step (1..=128).
    pub naw: usize,
    pub compensation: Compensation,
    /// Count input ones through the level-1 extra column instead of
    /// digitally (an ablation; the default digital count is exact).
    pub analog_bias_count: bool,
}

impl MacConfig {
    pub fn new(naw: usize, compensation: Compensation) -> Self {
        Self {
            naw,
            compensation,
            analog_bias_count: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.naw == 0 || self.naw > TILE_DIM {
            return Err(Error::Config(format!(
                "naw = {} must be in [1, {TILE_DIM}]",
                self.naw
            )));
        }
        Ok(())
    }
}

/// Per-plane MAC outcome: compensated digital codes accumulated over all
/// wordline groups.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneMacResult {
    pub column_codes: Vec<i64>,
    /// Ones count extracted from the bias-count column over all groups.
    pub bias_count_code: i64,
    pub saturations: u64,
    /// Sum over analog steps of total driven current times `v_read`
    /// (the crossbar's dynamic-energy integral, unit time step).
    pub xbar_energy: f64,
    pub conversions: u64,
    pub adc_bits: u8,
}

/// One wordline group's raw analog/digital observables.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupTrace {
    pub group: usize,
    pub row_start: usize,
    pub row_end: usize,
    pub active_rows: usize,
    pub data_currents: Vec<f64>,
    pub data_codes: Vec<u32>,
    pub hrs_current: f64,
    pub hrs_code: u32,
    pub bias_current: f64,
    pub bias_code: u32,
}

impl CrossbarInstance {
    pub fn rows(&self) -> usize {
        self.conductances.rows()
    }

    pub fn cols(&self) -> usize {
        self.conductances.cols()
    }

    pub fn conductances(&self) -> &Mat<f64> {
        &self.conductances
    }

    pub fn extra_hrs_column(&self) -> &[f64] {
        &self.extra_hrs_column
    }

    pub fn bias_column(&self) -> &[f64] {
        &self.bias_column
    }

    /// Bitline currents for an arbitrary activation pattern (1 = driven),
    /// summed in fixed row order.
    pub fn bitline_currents(&self, active_rows: &[u8]) -> Result<BitlineCurrents> {
        if active_rows.len() != self.rows() {
            return Err(Error::Dimension(format!(
                "activation length {} != rows {}",
                active_rows.len(),
                self.rows()
            )));
        }
        let mut out = BitlineCurrents {
            data: vec![0.0; self.cols()],
            hrs: 0.0,
            bias_count: 0.0,
        };
        self.accumulate_rows(0..self.rows(), active_rows, &mut out);
        Ok(out)
    }

    fn accumulate_rows(
        &self,
        rows: std::ops::Range<usize>,
        active: &[u8],
        out: &mut BitlineCurrents,
    ) {
        let v = self.params.v_read;
        for r in rows {
            if active[r] == 0 {
                continue;
            }
            let row = self.conductances.row(r);
            for (c, g) in row.iter().enumerate() {
                out.data[c] += g * v;
            }
            out.hrs += self.extra_hrs_column[r] * v;
            out.bias_count += self.bias_column[r] * v;
        }
    }

    /// Bit-serial MAC of one input bit plane against this plane's digits.
    pub fn mac_plane(&self, input_bits: &[u8], cfg: &MacConfig) -> Result<PlaneMacResult> {
        self.mac_plane_inner(input_bits, cfg, None)
    }

    /// Same as [`mac_plane`](Self::mac_plane) but records per-group currents
    /// and codes.
    pub fn mac_plane_traced(
        &self,
        input_bits: &[u8],
        cfg: &MacConfig,
    ) -> Result<(PlaneMacResult, Vec<GroupTrace>)> {
        let mut traces = Vec::new();
        let result = self.mac_plane_inner(input_bits, cfg, Some(&mut traces))?;
        Ok((result, traces))
    }

    fn mac_plane_inner(
        &self,
        input_bits: &[u8],
        cfg: &MacConfig,
        mut traces: Option<&mut Vec<GroupTrace>>,
    ) -> Result<PlaneMacResult> {
        cfg.validate()?;
        if input_bits.len() != self.rows() {
            return Err(Error::Dimension(format!(
                "input bit vector length {} != rows {}",
                input_bits.len(),
                self.rows()
            )));
        }
        let adc = AdcConfig::for_mac(cfg.naw, &self.params, self.scheme);
        let cols = self.cols();
        let mut result = PlaneMacResult {
            column_codes: vec![0; cols],
            bias_count_code: 0,
            saturations: 0,
            xbar_energy: 0.0,
            conversions: 0,
            adc_bits: adc.resolution_bits,
        };

        let mut group = 0usize;
        let mut start = 0usize;
        while start < self.rows() {
            let end = (start + cfg.naw).min(self.rows());
            let mut currents = BitlineCurrents {
                data: vec![0.0; cols],
                hrs: 0.0,
                bias_count: 0.0,
            };
            self.accumulate_rows(start..end, input_bits, &mut currents);

            let mut data_codes = Vec::with_capacity(cols);
            for &i in &currents.data {
                let reading = adc.convert(i);
                result.saturations += u64::from(reading.saturated);
                data_codes.push(reading.code);
            }
            let hrs_reading = adc.convert(currents.hrs);
            let bias_reading = adc.convert(currents.bias_count);
            result.saturations += u64::from(hrs_reading.saturated);
            result.saturations += u64::from(bias_reading.saturated);
            // Every present column is converted each step: data columns for
            // the MAC, the HRS column for compensation, the level-1 column
            // for the ones count.
            result.conversions += cols as u64 + 2;

            let subtract = match cfg.compensation {
                Compensation::None => 0i64,
                Compensation::IacSubtract | Compensation::VecomSubtract => {
                    i64::from(hrs_reading.code)
                }
            };
            for (c, &code) in data_codes.iter().enumerate() {
                result.column_codes[c] += i64::from(code) - subtract;
            }
            // The level-1 column counts ones directly under the proportional
            // map; the offset map shifts it by the HRS code.
            result.bias_count_code += match self.scheme {
                ProgrammingScheme::Proportional => i64::from(bias_reading.code),
                ProgrammingScheme::OffsetCompensated => {
                    i64::from(bias_reading.code) - i64::from(hrs_reading.code)
                }
            };

            result.xbar_energy += (currents.data.iter().sum::<f64>()
                + currents.hrs
                + currents.bias_count)
                * self.params.v_read;

            if let Some(ts) = traces.as_deref_mut() {
                let active_rows = input_bits[start..end].iter().filter(|&&b| b != 0).count();
                ts.push(GroupTrace {
                    group,
                    row_start: start,
                    row_end: end,
                    active_rows,
                    data_currents: currents.data,
                    data_codes,
                    hrs_current: currents.hrs,
                    hrs_code: hrs_reading.code,
                    bias_current: currents.bias_count,
                    bias_code: bias_reading.code,
                });
            }
            group += 1;
            start = end;
        }
        Ok(result)
    }
}

/// Programs one digit plane: target each cell's level, then draw the
/// log-normal programming outcome. Cells are sampled row-major, then the
/// HRS column, then the bias column, so the result is a pure function of
/// the generator state.
pub fn program_plane<R: Rng + ?Sized>(
    plane: &Mat<u8>,
    params: &DeviceParams,
    scheme: ProgrammingScheme,
    rng: &mut R,
) -> Result<CrossbarInstance> {
    params.validate()?;
    if plane.rows() > TILE_DIM || plane.cols() > TILE_DIM {
        return Err(Error::Dimension(format!(
            "plane {}x{} exceeds the {TILE_DIM}x{TILE_DIM} tile",
            plane.rows(),
            plane.cols()
        )));
    }
    let levels = params.levels();
    if let Some(&bad) = plane.iter().find(|&&v| v >= levels) {
        return Err(Error::Validation(format!(
            "digit {bad} out of range [0, {}]",
            levels - 1
        )));
    }
    let targets: Vec<f64> = (0..levels)
        .map(|v| target_conductance(v, params, scheme))
        .collect::<Result<_>>()?;

    let sigma = params.sigma;
    let conductances = Mat::from_fn(plane.rows(), plane.cols(), |r, c| {
        sample_conductance(targets[plane[(r, c)] as usize], sigma, rng)
    });
    let extra_hrs_column = (0..plane.rows())
        .map(|_| sample_conductance(targets[0], sigma, rng))
        .collect();
    let bias_column = (0..plane.rows())
        .map(|_| sample_conductance(targets[1], sigma, rng))
        .collect();
    Ok(CrossbarInstance {
        conductances,
        extra_hrs_column,
        bias_column,
        params: *params,
        scheme,
    })
}

/// All planes of one encoded weight matrix programmed onto crossbars.
#[derive(Debug, Clone)]
pub struct ProgrammedLayer {
    pub planes: Vec<CrossbarInstance>,
    pub plane_weights: Vec<i64>,
    pub bias: u32,
    pub clip_count: u64,
}

impl ProgrammedLayer {
    pub fn rows(&self) -> usize {
        self.planes[0].rows()
    }

    pub fn cols(&self) -> usize {
        self.planes[0].cols()
    }
}

/// Programs every plane of an encoding, in plane order.
pub fn program_layer<R: Rng + ?Sized>(
    encoded: &EncodedPlanes,
    params: &DeviceParams,
    scheme: ProgrammingScheme,
    rng: &mut R,
) -> Result<ProgrammedLayer> {
    if encoded.planes.levels_per_cell != params.levels() {
        return Err(Error::Dimension(format!(
            "encoding uses {} levels per cell but the device stores {}",
            encoded.planes.levels_per_cell,
            params.levels()
        )));
    }
    let planes = encoded
        .planes
        .planes
        .iter()
        .map(|p| program_plane(p, params, scheme, rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(ProgrammedLayer {
        planes,
        plane_weights: encoded.planes.plane_weights.clone(),
        bias: encoded.planes.bias,
        clip_count: encoded.planes.clip_count,
    })
}

/// Full signed matrix-vector product through the analog pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct MatvecOutput {
    pub values: Vec<i64>,
    pub saturations: u64,
    pub xbar_energy: f64,
    pub conversions: u64,
    pub adc_bits: u8,
}

pub fn matvec(
    layer: &ProgrammedLayer,
    activations: &ActivationVector,
    cfg: &MacConfig,
) -> Result<MatvecOutput> {
    matvec_inner(layer, activations, cfg, None)
}

/// One trace row per (input bit, plane, group).
#[derive(Debug, Clone, PartialEq)]
pub struct MatvecTrace {
    pub input_bit: u8,
    pub plane: usize,
    pub group: GroupTrace,
}

pub fn matvec_traced(
    layer: &ProgrammedLayer,
    activations: &ActivationVector,
    cfg: &MacConfig,
) -> Result<(MatvecOutput, Vec<MatvecTrace>)> {
    let mut traces = Vec::new();
    let out = matvec_inner(layer, activations, cfg, Some(&mut traces))?;
    Ok((out, traces))
}

fn matvec_inner(
    layer: &ProgrammedLayer,
    activations: &ActivationVector,
    cfg: &MacConfig,
    mut traces: Option<&mut Vec<MatvecTrace>>,
) -> Result<MatvecOutput> {
    if activations.len() != layer.rows() {
        return Err(Error::Dimension(format!(
            "activation length {} != layer rows {}",
            activations.len(),
            layer.rows()
        )));
    }
    let cols = layer.cols();
    let planes_of_bits = bit_planes(activations);
    let mut out = MatvecOutput {
        values: vec![0; cols],
        saturations: 0,
        xbar_energy: 0.0,
        conversions: 0,
        adc_bits: 0,
    };
    // Sum over bits of 2^bit * ones(bit); equals the plain activation total.
    let mut analog_ones_weighted = 0i64;

    for (bit, bits) in planes_of_bits.iter().enumerate() {
        let bit_weight = 1i64 << bit;
        for (p, xbar) in layer.planes.iter().enumerate() {
            let result = if let Some(ts) = traces.as_deref_mut() {
                let (result, groups) = xbar.mac_plane_traced(bits, cfg)?;
                ts.extend(groups.into_iter().map(|group| MatvecTrace {
                    input_bit: bit as u8,
                    plane: p,
                    group,
                }));
                result
            } else {
                xbar.mac_plane(bits, cfg)?
            };
            let plane_weight = layer.plane_weights[p];
            for (c, &code) in result.column_codes.iter().enumerate() {
                out.values[c] += bit_weight * plane_weight * code;
            }
            out.saturations += result.saturations;
            out.xbar_energy += result.xbar_energy;
            out.conversions += result.conversions;
            out.adc_bits = result.adc_bits;
            if p == 0 {
                analog_ones_weighted += bit_weight * result.bias_count_code;
            }
        }
    }

    let ones_weighted = if cfg.analog_bias_count {
        analog_ones_weighted
    } else {
        activations.total()
    };
    let bias_term = i64::from(layer.bias) * ones_weighted;
    for v in &mut out.values {
        *v -= bias_term;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encode::{encode, EncodingScheme};
    use crate::quant::QuantizedMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn plane(data: Vec<u8>) -> Mat<u8> {
        let n = data.len();
        Mat::from_vec(n, 1, data).unwrap()
    }

    fn ideal(r: f64, bpc: u8) -> DeviceParams {
        DeviceParams::new(r, bpc, 0.0)
    }

    fn q8(rows: usize, cols: usize, data: Vec<i32>) -> QuantizedMatrix {
        QuantizedMatrix::new(Mat::from_vec(rows, cols, data).unwrap(), 8, true, 1.0).unwrap()
    }

    /// Exact integer oracle for one plane-by-bits dot product.
    fn plane_dot(plane: &Mat<u8>, bits: &[u8]) -> Vec<i64> {
        (0..plane.cols())
            .map(|c| {
                (0..plane.rows())
                    .filter(|&r| bits[r] != 0)
                    .map(|r| i64::from(plane[(r, c)]))
                    .sum()
            })
            .collect()
    }

    #[test]
    fn worked_bitline_example_offset_r10() {
        // Levels [3,2,1,0] at r=10 offset: currents 1.0+0.7+0.4+0.1 = 2.2,
        // HRS column 4*0.1 = 0.4, difference 1.8 = 0.3*(3+2+1+0).
        let p = ideal(10.0, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let xb = program_plane(
            &plane(vec![3, 2, 1, 0]),
            &p,
            ProgrammingScheme::OffsetCompensated,
            &mut rng,
        )
        .unwrap();
        let currents = xb.bitline_currents(&[1, 1, 1, 1]).unwrap();
        assert!((currents.data[0] - 2.2).abs() < 1e-12);
        assert!((currents.hrs - 0.4).abs() < 1e-12);
        assert!((currents.data[0] - currents.hrs - 1.8).abs() < 1e-12);

        let adc = AdcConfig::for_mac(4, &p, ProgrammingScheme::OffsetCompensated);
        assert_eq!(adc.resolution_bits, 4);
        assert!((adc.lsb_current - 0.3).abs() < 1e-12);
        assert_eq!(adc.convert(currents.data[0] - currents.hrs).code, 6);
    }

    #[test]
    fn proportional_iac_undercounts() {
        // Same levels, proportional: 1.0 + 2/3 + 1/3 + 0.1 = 2.1; after
        // subtracting the HRS column, 1.7 < 1.8.
        let p = ideal(10.0, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let xb = program_plane(
            &plane(vec![3, 2, 1, 0]),
            &p,
            ProgrammingScheme::Proportional,
            &mut rng,
        )
        .unwrap();
        let currents = xb.bitline_currents(&[1, 1, 1, 1]).unwrap();
        assert!((currents.data[0] - 2.1).abs() < 1e-12);
        let compensated = currents.data[0] - currents.hrs;
        assert!((compensated - 1.7).abs() < 1e-12);
        assert!(compensated < 1.8);
    }

    #[test]
    fn no_active_rows_gives_zero() {
        let p = ideal(10.0, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let xb = program_plane(
            &plane(vec![3, 2, 1, 0]),
            &p,
            ProgrammingScheme::OffsetCompensated,
            &mut rng,
        )
        .unwrap();
        let currents = xb.bitline_currents(&[0, 0, 0, 0]).unwrap();
        assert_eq!(currents.data[0], 0.0);
        assert_eq!(currents.hrs, 0.0);
    }

    #[test]
    fn adc_clamps_and_counts_saturation() {
        let adc = AdcConfig::new(4, 0.3).unwrap();
        assert_eq!(adc.convert(0.0).code, 0);
        let over = adc.convert(100.0);
        assert_eq!(over.code, 15);
        assert!(over.saturated);
        assert!(!adc.convert(1.8).saturated);
    }

    #[test]
    fn sigma_zero_programs_exact_targets() {
        let p = ideal(10.0, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let xb = program_plane(
            &plane(vec![0, 0, 0]),
            &p,
            ProgrammingScheme::OffsetCompensated,
            &mut rng,
        )
        .unwrap();
        assert!(xb.conductances().iter().all(|&g| g == p.g_hrs()));
        assert!(xb.extra_hrs_column().iter().all(|&g| g == p.g_hrs()));
    }

    #[test]
    fn programming_is_seed_deterministic() {
        let mut params = ideal(10.0, 2);
        params.sigma = 0.1;
        let once = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            program_plane(
                &plane(vec![3, 2, 1, 0]),
                &params,
                ProgrammingScheme::OffsetCompensated,
                &mut rng,
            )
            .unwrap()
        };
        let a = once(42);
        let b = once(42);
        assert_eq!(a.conductances().as_slice(), b.conductances().as_slice());
        assert_eq!(a.extra_hrs_column(), b.extra_hrs_column());
    }

    #[test]
    fn mac_plane_ideal_matches_integer_dot() {
        let digits = plane(vec![3, 2, 1, 0, 2, 3, 0, 1]);
        let bits = vec![1, 0, 1, 1, 0, 1, 1, 0];
        let p = ideal(1e9, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for scheme in [
            ProgrammingScheme::Proportional,
            ProgrammingScheme::OffsetCompensated,
        ] {
            let xb = program_plane(&digits, &p, scheme, &mut rng).unwrap();
            let cfg = MacConfig::new(8, Compensation::None);
            let got = xb.mac_plane(&bits, &cfg).unwrap();
            assert_eq!(got.column_codes, plane_dot(&digits, &bits));
        }
    }

    #[test]
    fn offset_subtraction_exact_at_r7() {
        // Eq-style exactness: offset-programmed MLC plus HRS-code
        // subtraction reproduces the integer dot product at low R-ratio.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = ideal(7.0, 2);
        for trial in 0..20 {
            let rows = 128;
            let digits = Mat::from_fn(rows, 3, |_, _| rng.random_range(0..4u8));
            let bits: Vec<u8> = (0..rows).map(|_| rng.random_range(0..=1u8)).collect();
            let mut prng = ChaCha8Rng::seed_from_u64(1000 + trial);
            let xb = program_plane(
                &digits,
                &p,
                ProgrammingScheme::OffsetCompensated,
                &mut prng,
            )
            .unwrap();
            for naw in [128usize, 32, 8] {
                let cfg = MacConfig::new(naw, Compensation::VecomSubtract);
                let got = xb.mac_plane(&bits, &cfg).unwrap();
                assert_eq!(got.column_codes, plane_dot(&digits, &bits), "naw={naw}");
                assert_eq!(got.saturations, 0);
            }
        }
    }

    #[test]
    fn iac_deficit_matches_per_cell_model() {
        // Proportional + HRS subtraction on MLC: each active unclamped cell
        // with level >= 1 leaks one HRS unit, (L-1)/r codes.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let p = ideal(7.0, 2);
        let rows = 128;
        let digits = Mat::from_fn(rows, 4, |_, _| rng.random_range(0..4u8));
        let bits: Vec<u8> = (0..rows).map(|_| rng.random_range(0..=1u8)).collect();
        let mut prng = ChaCha8Rng::seed_from_u64(77);
        let xb = program_plane(&digits, &p, ProgrammingScheme::Proportional, &mut prng).unwrap();
        let cfg = MacConfig::new(32, Compensation::IacSubtract);
        let (_, groups) = xb.mac_plane_traced(&bits, &cfg).unwrap();
        let per_cell = 3.0 / 7.0;
        for g in &groups {
            for c in 0..digits.cols() {
                let exact: i64 = (g.row_start..g.row_end)
                    .filter(|&r| bits[r] != 0)
                    .map(|r| i64::from(digits[(r, c)]))
                    .sum();
                let n_plus = (g.row_start..g.row_end)
                    .filter(|&r| bits[r] != 0 && digits[(r, c)] >= 1)
                    .count();
                let simulated = i64::from(g.data_codes[c]) - i64::from(g.hrs_code);
                let deficit = exact - simulated;
                let model = (n_plus as f64 * per_cell).round() as i64;
                assert!(
                    (deficit - model).abs() <= 1,
                    "group {} col {c}: deficit {deficit} model {model}",
                    g.group
                );
            }
        }
    }

    /// Exact signed matmul oracle with the encoding's clip floor applied.
    fn matmul_oracle(w: &QuantizedMatrix, a: &ActivationVector, floor: Option<i32>) -> Vec<i64> {
        (0..w.cols())
            .map(|c| {
                (0..w.rows())
                    .map(|r| {
                        let mut v = w.values[(r, c)];
                        if let Some(f) = floor {
                            v = v.max(f);
                        }
                        i64::from(v) * i64::from(a.values[r])
                    })
                    .sum()
            })
            .collect()
    }

    #[allow(clippy::too_many_arguments)]
    fn run_matvec(
        w: &QuantizedMatrix,
        a: &ActivationVector,
        encoding: EncodingScheme,
        scheme: ProgrammingScheme,
        comp: Compensation,
        params: &DeviceParams,
        naw: usize,
        seed: u64,
    ) -> MatvecOutput {
        let enc = encode(w, encoding, params.bits_per_cell).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layer = program_layer(&enc, params, scheme, &mut rng).unwrap();
        matvec(&layer, a, &MacConfig::new(naw, comp)).unwrap()
    }

    #[test]
    fn matvec_single_cell_sanity() {
        let w = q8(1, 1, vec![14]);
        let a = ActivationVector::new(vec![5], 8).unwrap();
        let got = run_matvec(
            &w,
            &a,
            EncodingScheme::Conventional,
            ProgrammingScheme::Proportional,
            Compensation::None,
            &ideal(1e9, 2),
            1,
            3,
        );
        assert_eq!(got.values, vec![70]);
    }

    #[test]
    fn matvec_clips_under_vecom() {
        let w = q8(1, 1, vec![-70]);
        let a = ActivationVector::new(vec![3], 8).unwrap();
        let got = run_matvec(
            &w,
            &a,
            EncodingScheme::Vecom,
            ProgrammingScheme::OffsetCompensated,
            Compensation::VecomSubtract,
            &ideal(1e9, 2),
            1,
            3,
        );
        assert_eq!(got.values, vec![-192]);
    }

    #[test]
    fn matvec_full_stack_vecom_exact_at_r7() {
        let mut rng = ChaCha8Rng::seed_from_u64(100);
        let w = q8(
            128,
            16,
            (0..128 * 16).map(|_| rng.random_range(-128..=127)).collect(),
        );
        let a = ActivationVector::new((0..128).map(|_| rng.random_range(0..=255)).collect(), 8)
            .unwrap();
        let got = run_matvec(
            &w,
            &a,
            EncodingScheme::Vecom,
            ProgrammingScheme::OffsetCompensated,
            Compensation::VecomSubtract,
            &ideal(7.0, 2),
            128,
            9,
        );
        assert_eq!(got.values, matmul_oracle(&w, &a, Some(-64)));
        assert_eq!(got.saturations, 0);
    }

    #[test]
    fn matvec_supports_narrow_activations() {
        let w = q8(6, 2, vec![14, -3, 0, 127, -128, 64, -64, 1, 2, 3, 4, 5]);
        let a = ActivationVector::new(vec![15, 0, 7, 3, 1, 8], 4).unwrap();
        let got = run_matvec(
            &w,
            &a,
            EncodingScheme::Conventional,
            ProgrammingScheme::OffsetCompensated,
            Compensation::VecomSubtract,
            &ideal(30.0, 2),
            6,
            4,
        );
        assert_eq!(got.values, matmul_oracle(&w, &a, None));
    }

    #[test]
    fn matvec_handles_ragged_last_group() {
        let w = q8(5, 2, vec![3, -4, 10, 0, -1, 7, 127, -128, 5, 5]);
        let a = ActivationVector::new(vec![9, 0, 255, 3, 17], 8).unwrap();
        let got = run_matvec(
            &w,
            &a,
            EncodingScheme::Conventional,
            ProgrammingScheme::OffsetCompensated,
            Compensation::VecomSubtract,
            &ideal(30.0, 2),
            2,
            4,
        );
        assert_eq!(got.values, matmul_oracle(&w, &a, None));
    }

    #[test]
    fn analog_bias_count_matches_digital_when_ideal() {
        let w = q8(8, 2, vec![14, -3, 0, 127, -128, 64, -64, 1, 2, 3, 4, 5, 6, 7, 8, 9]);
        let a = ActivationVector::new(vec![255, 1, 2, 3, 4, 5, 6, 7], 8).unwrap();
        let p = ideal(300.0, 2);
        let enc = encode(&w, EncodingScheme::Vecom, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let layer = program_layer(&enc, &p, ProgrammingScheme::OffsetCompensated, &mut rng).unwrap();
        let mut cfg = MacConfig::new(8, Compensation::VecomSubtract);
        let digital = matvec(&layer, &a, &cfg).unwrap();
        cfg.analog_bias_count = true;
        let analog = matvec(&layer, &a, &cfg).unwrap();
        assert_eq!(digital.values, analog.values);
    }

    #[test]
    fn low_r_saturates_offset_scheme() {
        // r < 4 shrinks the ADC full scale below the worst-case group
        // current; the clamp engages and is reported.
        let p = ideal(2.0, 2);
        let digits = Mat::from_fn(16, 1, |_, _| 3u8);
        let bits = vec![1u8; 16];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let xb = program_plane(&digits, &p, ProgrammingScheme::OffsetCompensated, &mut rng).unwrap();
        let got = xb
            .mac_plane(&bits, &MacConfig::new(16, Compensation::VecomSubtract))
            .unwrap();
        assert!(got.saturations > 0);
    }

    #[test]
    fn mismatched_dims_rejected() {
        let p = ideal(10.0, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let xb = program_plane(
            &plane(vec![1, 2]),
            &p,
            ProgrammingScheme::OffsetCompensated,
            &mut rng,
        )
        .unwrap();
        assert!(xb.bitline_currents(&[1]).is_err());
        assert!(xb
            .mac_plane(&[1, 0, 1], &MacConfig::new(2, Compensation::None))
            .is_err());
    }

    #[test]
    fn oversized_plane_rejected() {
        let p = ideal(10.0, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let big = Mat::<u8>::zeros(129, 1);
        assert!(program_plane(&big, &p, ProgrammingScheme::Proportional, &mut rng).is_err());
    }

    #[test]
    fn naw_out_of_range_rejected() {
        let cfg = MacConfig::new(0, Compensation::None);
        assert!(cfg.validate().is_err());
        let cfg = MacConfig::new(129, Compensation::None);
        assert!(cfg.validate().is_err());
    }
}
