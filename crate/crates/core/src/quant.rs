//! Fixed-point quantization, biased unsigned representation, and slicing of
//! weights into per-cell digit planes.
//!
//! An MLC cell stores `bits_per_cell` bits, so an unsigned `b`-bit weight is
//! spread over `ceil(b / bits_per_cell)` cells holding base
//! `L = 2^bits_per_cell` digits. Planes are kept LSB-first and
//! `plane_weights[k]` is the digital multiplier that recombines plane `k` in
//! the shift-and-add stage. Activations stay unsigned and are decomposed into
//! bit planes for the bit-serial 1-bit DAC front end.
//!
//! All operations are pure functions on immutable inputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::Mat;

/// Integer weight matrix (rows = input dimension, cols = output dimension);
/// the software-side ground truth of the pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedMatrix {
    pub values: Mat<i32>,
    pub bit_width: u8,
    pub signed: bool,
    /// Quantization step; carried for reporting, the integer pipeline never
    /// reads it.
    pub scale: f64,
}

/// On-disk schema for weight/activation files. Integer data round-trips
/// exactly.
#[derive(Debug, Serialize, Deserialize)]
struct MatrixFile {
    rows: usize,
    cols: usize,
    bit_width: u8,
    signed: bool,
    data: Vec<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scale: Option<f64>,
}

fn check_bit_width(bit_width: u8) -> Result<()> {
    if bit_width == 4 || bit_width == 8 {
        Ok(())
    } else {
        Err(Error::Validation(format!(
            "bit_width must be 4 or 8, got {bit_width}"
        )))
    }
}

/// Inclusive value range of a `bit_width`-bit integer.
pub fn value_range(bit_width: u8, signed: bool) -> (i32, i32) {
    if signed {
        (-(1 << (bit_width - 1)), (1 << (bit_width - 1)) - 1)
    } else {
        (0, (1 << bit_width) - 1)
    }
}

impl QuantizedMatrix {
    pub fn new(values: Mat<i32>, bit_width: u8, signed: bool, scale: f64) -> Result<Self> {
        check_bit_width(bit_width)?;
        let (lo, hi) = value_range(bit_width, signed);
        for &v in values.iter() {
            if v < lo || v > hi {
                return Err(Error::Validation(format!(
                    "entry {v} outside {bit_width}-bit {} range [{lo}, {hi}]",
                    if signed { "signed" } else { "unsigned" }
                )));
            }
        }
        Ok(Self {
            values,
            bit_width,
            signed,
            scale,
        })
    }

    pub fn rows(&self) -> usize {
        self.values.rows()
    }

    pub fn cols(&self) -> usize {
        self.values.cols()
    }

    pub fn to_json(&self) -> String {
        let file = MatrixFile {
            rows: self.rows(),
            cols: self.cols(),
            bit_width: self.bit_width,
            signed: self.signed,
            data: self.values.as_slice().to_vec(),
            scale: Some(self.scale),
        };
        serde_json::to_string_pretty(&file).expect("matrix file serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: MatrixFile = serde_json::from_str(text)?;
        let values = Mat::from_vec(file.rows, file.cols, file.data)?;
        Self::new(values, file.bit_width, file.signed, file.scale.unwrap_or(1.0))
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Unsigned activation vector driven into the wordlines bit-serially.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivationVector {
    pub values: Vec<u8>,
    pub bit_width: u8,
}

impl ActivationVector {
    pub fn new(values: Vec<u8>, bit_width: u8) -> Result<Self> {
        if bit_width == 0 || bit_width > 8 {
            return Err(Error::Validation(format!(
                "activation bit_width must be in [1, 8], got {bit_width}"
            )));
        }
        if bit_width < 8 {
            let hi = (1u16 << bit_width) - 1;
            if let Some(&v) = values.iter().find(|&&v| u16::from(v) > hi) {
                return Err(Error::Validation(format!(
                    "activation {v} exceeds {bit_width}-bit range [0, {hi}]"
                )));
            }
        }
        Ok(Self { values, bit_width })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sum of all entries, used for digital bias removal.
    pub fn total(&self) -> i64 {
        self.values.iter().map(|&v| i64::from(v)).sum()
    }

    /// Activation files share the weight-file schema as an n x 1 unsigned
    /// column.
    pub fn to_json(&self) -> String {
        let file = MatrixFile {
            rows: self.len(),
            cols: 1,
            bit_width: self.bit_width,
            signed: false,
            data: self.values.iter().map(|&v| i32::from(v)).collect(),
            scale: None,
        };
        serde_json::to_string_pretty(&file).expect("activation file serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: MatrixFile = serde_json::from_str(text)?;
        if file.signed || file.cols != 1 {
            return Err(Error::Validation(
                "activation files are unsigned single-column matrices".into(),
            ));
        }
        let values = file
            .data
            .iter()
            .map(|&v| {
                u8::try_from(v).map_err(|_| {
                    Error::Validation(format!("activation {v} outside [0, 255]"))
                })
            })
            .collect::<Result<_>>()?;
        Self::new(values, file.bit_width)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Per-significance digit planes of a biased weight matrix, plus the
/// metadata needed to recombine them digitally.
#[derive(Debug, Clone, PartialEq)]
pub struct DigitPlaneSet {
    /// LSB-first digit planes; every entry lies in `[0, levels_per_cell)`.
    pub planes: Vec<Mat<u8>>,
    pub levels_per_cell: u8,
    /// Bias that was added to the signed weights before slicing.
    pub bias: u32,
    /// Digital recombination multiplier per plane
    /// (digit significance x redundant factor).
    pub plane_weights: Vec<i64>,
    /// Number of weights clipped to zero while biasing.
    pub clip_count: u64,
}

impl DigitPlaneSet {
    pub fn rows(&self) -> usize {
        self.planes[0].rows()
    }

    pub fn cols(&self) -> usize {
        self.planes[0].cols()
    }

    /// Recombines the planes with their weights back into biased integers.
    pub fn recombine(&self) -> Mat<i64> {
        Mat::from_fn(self.rows(), self.cols(), |r, c| {
            self.planes
                .iter()
                .zip(&self.plane_weights)
                .map(|(p, &w)| i64::from(p[(r, c)]) * w)
                .sum()
        })
    }
}

/// Symmetric uniform quantization of a real matrix.
///
/// For signed output the scale is `max(|entries|) / (2^(b-1) - 1)`; an
/// all-zero matrix gets scale 1. Rounding is half-away-from-zero.
pub fn quantize(reals: &Mat<f64>, bit_width: u8, signed: bool) -> Result<QuantizedMatrix> {
    check_bit_width(bit_width)?;
    if let Some(&bad) = reals.iter().find(|v| !v.is_finite()) {
        return Err(Error::Validation(format!(
            "matrix contains non-finite entry {bad}"
        )));
    }
    if !signed {
        if let Some(&neg) = reals.iter().find(|&&v| v < 0.0) {
            return Err(Error::Validation(format!(
                "unsigned quantization rejects negative entry {neg}"
            )));
        }
    }
    let (lo, hi) = value_range(bit_width, signed);
    let peak = reals.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let scale = if peak == 0.0 { 1.0 } else { peak / f64::from(hi) };
    let values = reals.map(|&v| ((v / scale).round() as i32).clamp(lo, hi));
    QuantizedMatrix::new(values, bit_width, signed, scale)
}

/// Shifts every signed entry by `bias`, optionally clipping results below
/// zero to zero. Returns the shifted matrix and the clip count.
///
/// Allowed biases are the two schemes' values, `2^(b-1)` and `2^(b-2)`.
/// With the full bias no clipping can occur; with the reduced bias the
/// caller must pass `clip_negative = true` before slicing.
pub fn apply_bias(
    q: &QuantizedMatrix,
    bias: u32,
    clip_negative: bool,
) -> Result<(Mat<i32>, u64)> {
    if !q.signed {
        return Err(Error::Validation(
            "bias applies to signed weight matrices only".into(),
        ));
    }
    let full = 1u32 << (q.bit_width - 1);
    let half = 1u32 << (q.bit_width - 2);
    if bias != full && bias != half {
        return Err(Error::Validation(format!(
            "bias {bias} not allowed for {}-bit weights (expected {full} or {half})",
            q.bit_width
        )));
    }
    let mut clip_count = 0u64;
    let biased = q.values.map(|&v| {
        let shifted = v + bias as i32;
        if shifted < 0 && clip_negative {
            clip_count += 1;
            0
        } else {
            shifted
        }
    });
    Ok((biased, clip_count))
}

/// Slices a biased matrix into base-`2^bits_per_cell` digit planes,
/// LSB-first. When `bit_width` is not divisible by `bits_per_cell` the top
/// plane holds the remaining (zero-padded) most significant bits.
pub fn slice_digits(
    biased: &Mat<i32>,
    bit_width: u8,
    bits_per_cell: u8,
    bias: u32,
    clip_count: u64,
) -> Result<DigitPlaneSet> {
    check_bit_width(bit_width)?;
    if bits_per_cell == 0 || bits_per_cell > 6 {
        return Err(Error::Validation(format!(
            "bits_per_cell must be in [1, 6], got {bits_per_cell}"
        )));
    }
    let hi = (1i32 << bit_width) - 1;
    if let Some(&bad) = biased.iter().find(|&&v| v < 0 || v > hi) {
        return Err(Error::Validation(format!(
            "biased entry {bad} outside [0, {hi}]"
        )));
    }
    let levels = 1u8 << bits_per_cell;
    let n_planes = (bit_width as usize).div_ceil(bits_per_cell as usize);
    let mask = i32::from(levels) - 1;
    let planes = (0..n_planes)
        .map(|k| biased.map(|&v| ((v >> (k as u32 * u32::from(bits_per_cell))) & mask) as u8))
        .collect();
    let plane_weights = (0..n_planes)
        .map(|k| i64::from(levels).pow(k as u32))
        .collect();
    Ok(DigitPlaneSet {
        planes,
        levels_per_cell: levels,
        bias,
        plane_weights,
        clip_count,
    })
}

/// LSB-first bit planes of an activation vector; feeding plane `b` through
/// the 1-bit DAC and weighting the result by `2^b` reconstructs the
/// activation exactly.
pub fn bit_planes(a: &ActivationVector) -> Vec<Vec<u8>> {
    (0..a.bit_width)
        .map(|b| a.values.iter().map(|&v| (v >> b) & 1).collect())
        .collect()
}
