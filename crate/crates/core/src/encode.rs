//! Weight-mapping schemes applied to digit planes before programming, plus
//! cell-area accounting.
//!
//! Two mappings are provided. The conventional mapping biases signed weights
//! by half the range so every value becomes non-negative. The VECOM mapping
//! lowers the bias to a quarter of the range (clipping the rare weights below
//! the new floor to zero) and splits the second-most-significant base-4 digit
//! `v` into an origin digit `a` in {0, 1} and a redundant digit `r` in
//! {0, 1, 2} with `v = 3a + r`, recombined digitally as `3a + r`. Both steps
//! move the accuracy-dominant digits onto low conductance levels.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::quant::{apply_bias, slice_digits, DigitPlaneSet, QuantizedMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingScheme {
    Conventional,
    Vecom,
}

impl EncodingScheme {
    /// Bias added to signed `bit_width`-bit weights under this scheme.
    pub fn bias(self, bit_width: u8) -> u32 {
        match self {
            EncodingScheme::Conventional => 1 << (bit_width - 1),
            EncodingScheme::Vecom => 1 << (bit_width - 2),
        }
    }

    /// Whether the scheme adds a redundant plane.
    pub fn redundant(self) -> bool {
        matches!(self, EncodingScheme::Vecom)
    }

    /// Lowest signed weight representable after encoding; values below it
    /// clip to it.
    pub fn clip_floor(self, bit_width: u8) -> i32 {
        -(self.bias(bit_width) as i32)
    }
}

impl fmt::Display for EncodingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EncodingScheme::Conventional => write!(f, "conventional"),
            EncodingScheme::Vecom => write!(f, "vecom"),
        }
    }
}

impl std::str::FromStr for EncodingScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "conventional" => Ok(EncodingScheme::Conventional),
            "vecom" => Ok(EncodingScheme::Vecom),
            other => Err(Error::Validation(format!(
                "unknown encoding scheme '{other}' (expected 'conventional' or 'vecom')"
            ))),
        }
    }
}

/// Digit planes ready for programming. Under VECOM one digit position is
/// held by two planes: `origin_index` (entries 0..=1, weighted 3x) and
/// `redundant_index` (entries 0..=2).
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedPlanes {
    pub planes: DigitPlaneSet,
    pub scheme: EncodingScheme,
    pub bit_width: u8,
    pub origin_index: Option<usize>,
    pub redundant_index: Option<usize>,
}

impl EncodedPlanes {
    pub fn rows(&self) -> usize {
        self.planes.rows()
    }

    pub fn cols(&self) -> usize {
        self.planes.cols()
    }

    pub fn plane_count(&self) -> usize {
        self.planes.planes.len()
    }

    /// Highest digit value plane `k` may legally contain.
    pub fn digit_bound(&self, k: usize) -> u8 {
        if Some(k) == self.origin_index {
            1
        } else if Some(k) == self.redundant_index {
            2
        } else {
            self.planes.levels_per_cell - 1
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct PlaneFile {
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

/// On-disk schema of an encoded-plane dump.
#[derive(Debug, Serialize, Deserialize)]
struct EncodedFile {
    scheme: EncodingScheme,
    bit_width: u8,
    levels_per_cell: u8,
    bias: u32,
    clip_count: u64,
    plane_weights: Vec<i64>,
    origin_index: Option<usize>,
    redundant_index: Option<usize>,
    planes: Vec<PlaneFile>,
}

impl EncodedPlanes {
    pub fn to_json(&self) -> String {
        let file = EncodedFile {
            scheme: self.scheme,
            bit_width: self.bit_width,
            levels_per_cell: self.planes.levels_per_cell,
            bias: self.planes.bias,
            clip_count: self.planes.clip_count,
            plane_weights: self.planes.plane_weights.clone(),
            origin_index: self.origin_index,
            redundant_index: self.redundant_index,
            planes: self
                .planes
                .planes
                .iter()
                .map(|p| PlaneFile {
                    rows: p.rows(),
                    cols: p.cols(),
                    data: p.as_slice().to_vec(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("encoded plane serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: EncodedFile = serde_json::from_str(text)?;
        if file.planes.is_empty() || file.plane_weights.len() != file.planes.len() {
            return Err(Error::Validation(
                "encoded dump needs one weight per plane".into(),
            ));
        }
        let planes = file
            .planes
            .into_iter()
            .map(|p| Mat::from_vec(p.rows, p.cols, p.data))
            .collect::<Result<Vec<_>>>()?;
        let decoded = EncodedPlanes {
            planes: DigitPlaneSet {
                planes,
                levels_per_cell: file.levels_per_cell,
                bias: file.bias,
                plane_weights: file.plane_weights,
                clip_count: file.clip_count,
            },
            scheme: file.scheme,
            bit_width: file.bit_width,
            origin_index: file.origin_index,
            redundant_index: file.redundant_index,
        };
        decode_planes(&decoded)?; // digit-range validation
        Ok(decoded)
    }
}

/// Unique decomposition `v = 3a + r` with `a` in {0,1}, `r` in {0,1,2}.
fn split_digit(v: u8) -> (u8, u8) {
    if v == 3 {
        (1, 0)
    } else {
        (0, v)
    }
}

pub fn encode(
    q: &QuantizedMatrix,
    scheme: EncodingScheme,
    bits_per_cell: u8,
) -> Result<EncodedPlanes> {
    match scheme {
        EncodingScheme::Conventional => encode_conventional(q, bits_per_cell),
        EncodingScheme::Vecom => encode_vecom(q, bits_per_cell),
    }
}

/// Conventional mapping: bias by half the range (no clipping possible),
/// slice into digit planes.
pub fn encode_conventional(q: &QuantizedMatrix, bits_per_cell: u8) -> Result<EncodedPlanes> {
    let bias = EncodingScheme::Conventional.bias(q.bit_width);
    let (biased, clips) = apply_bias(q, bias, false)?;
    debug_assert_eq!(clips, 0);
    let planes = slice_digits(&biased, q.bit_width, bits_per_cell, bias, clips)?;
    Ok(EncodedPlanes {
        planes,
        scheme: EncodingScheme::Conventional,
        bit_width: q.bit_width,
        origin_index: None,
        redundant_index: None,
    })
}

/// VECOM mapping: bias control (quarter-range bias with clipping) followed
/// by the redundant split of the second-most-significant digit. The split is
/// defined for 2-bit cells; at other cell widths only bias control applies.
pub fn encode_vecom(q: &QuantizedMatrix, bits_per_cell: u8) -> Result<EncodedPlanes> {
    let bias = EncodingScheme::Vecom.bias(q.bit_width);
    let (biased, clips) = apply_bias(q, bias, true)?;
    let sliced = slice_digits(&biased, q.bit_width, bits_per_cell, bias, clips)?;
    let n = sliced.planes.len();
    if bits_per_cell != 2 || n < 2 {
        return Ok(EncodedPlanes {
            planes: sliced,
            scheme: EncodingScheme::Vecom,
            bit_width: q.bit_width,
            origin_index: None,
            redundant_index: None,
        });
    }

    let split_at = n - 2;
    let source = &sliced.planes[split_at];
    let origin = source.map(|&v| split_digit(v).0);
    let redundant = source.map(|&v| split_digit(v).1);

    let mut planes = Vec::with_capacity(n + 1);
    let mut weights = Vec::with_capacity(n + 1);
    for (k, plane) in sliced.planes.iter().enumerate() {
        let significance = sliced.plane_weights[k];
        if k == split_at {
            planes.push(origin.clone());
            weights.push(3 * significance);
            planes.push(redundant.clone());
            weights.push(significance);
        } else {
            planes.push(plane.clone());
            weights.push(significance);
        }
    }

    Ok(EncodedPlanes {
        planes: DigitPlaneSet {
            planes,
            levels_per_cell: sliced.levels_per_cell,
            bias,
            plane_weights: weights,
            clip_count: clips,
        },
        scheme: EncodingScheme::Vecom,
        bit_width: q.bit_width,
        origin_index: Some(split_at),
        redundant_index: Some(split_at + 1),
    })
}

/// Inverse of the encoders; returns the clipped signed weights and the bias.
/// Used by tests and file tooling, not by the analog pipeline.
pub fn decode_planes(e: &EncodedPlanes) -> Result<(Mat<i32>, u32)> {
    for (k, plane) in e.planes.planes.iter().enumerate() {
        let bound = e.digit_bound(k);
        if let Some(&bad) = plane.iter().find(|&&v| v > bound) {
            return Err(Error::Validation(format!(
                "digit {bad} out of range [0, {bound}] in plane {k}"
            )));
        }
    }
    let bias = e.planes.bias;
    let biased = e.planes.recombine();
    let signed = biased.map(|&v| (v - i64::from(bias)) as i32);
    Ok((signed, bias))
}

/// Crossbar cell count and area overhead of a scheme on a square
/// `rows x rows` tile, relative to the conventional mapping with no extra
/// columns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellArea {
    pub cells: u64,
    pub overhead_vs_conventional: f64,
}

/// Number of digit planes (crossbar arrays) a scheme spreads one weight
/// matrix over.
pub fn plane_count(scheme: EncodingScheme, bit_width: u8, bits_per_cell: u8) -> usize {
    let base = (bit_width as usize).div_ceil(bits_per_cell as usize);
    if scheme.redundant() && bits_per_cell == 2 && base >= 2 {
        base + 1
    } else {
        base
    }
}

pub fn area_cells(
    scheme: EncodingScheme,
    bit_width: u8,
    bits_per_cell: u8,
    rows: usize,
    extra_columns: usize,
) -> CellArea {
    let planes = plane_count(scheme, bit_width, bits_per_cell) as u64;
    let conv_planes = plane_count(EncodingScheme::Conventional, bit_width, bits_per_cell) as u64;
    let cells = planes * rows as u64 * (rows + extra_columns) as u64;
    let baseline = conv_planes * rows as u64 * rows as u64;
    CellArea {
        cells,
        overhead_vs_conventional: cells as f64 / baseline as f64 - 1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::Mat;

    fn q8(data: Vec<i32>) -> QuantizedMatrix {
        let n = data.len();
        QuantizedMatrix::new(Mat::from_vec(n, 1, data).unwrap(), 8, true, 1.0).unwrap()
    }

    fn digits_of(e: &EncodedPlanes, r: usize, c: usize) -> Vec<u8> {
        e.planes.planes.iter().map(|p| p[(r, c)]).collect()
    }

    #[test]
    fn split_digit_table() {
        assert_eq!(split_digit(0), (0, 0));
        assert_eq!(split_digit(1), (0, 1));
        assert_eq!(split_digit(2), (0, 2));
        assert_eq!(split_digit(3), (1, 0));
    }

    #[test]
    fn conventional_w14_matches_worked_value() {
        // 14 + 128 = 142, base-4 MSB-first [2, 0, 3, 2].
        let e = encode_conventional(&q8(vec![14]), 2).unwrap();
        assert_eq!(digits_of(&e, 0, 0), vec![2, 3, 0, 2]);
        assert_eq!(e.planes.plane_weights, vec![1, 4, 16, 64]);
        assert_eq!(e.planes.bias, 128);
    }

    #[test]
    fn conventional_range_extremes() {
        let e = encode_conventional(&q8(vec![-128, 127]), 2).unwrap();
        assert_eq!(digits_of(&e, 0, 0), vec![0, 0, 0, 0]);
        assert_eq!(digits_of(&e, 1, 0), vec![3, 3, 3, 3]);
    }

    #[test]
    fn vecom_w14_splits_zero_digit() {
        // 14 + 64 = 78, base-4 LSB-first [2, 3, 0, 1]; split digit 0 -> (0, 0).
        let e = encode_vecom(&q8(vec![14]), 2).unwrap();
        assert_eq!(digits_of(&e, 0, 0), vec![2, 3, 0, 0, 1]);
        assert_eq!(e.planes.plane_weights, vec![1, 4, 48, 16, 64]);
        assert_eq!(e.origin_index, Some(2));
        assert_eq!(e.redundant_index, Some(3));
        assert_eq!(e.planes.bias, 64);
    }

    #[test]
    fn vecom_clips_below_floor() {
        let e = encode_vecom(&q8(vec![-70]), 2).unwrap();
        assert!(digits_of(&e, 0, 0).iter().all(|&d| d == 0));
        assert_eq!(e.planes.clip_count, 1);
    }

    #[test]
    fn vecom_4bit_uses_quarter_bias() {
        let q = QuantizedMatrix::new(Mat::from_vec(1, 1, vec![7]).unwrap(), 4, true, 1.0).unwrap();
        let e = encode_vecom(&q, 2).unwrap();
        assert_eq!(e.planes.bias, 4);
        // 7 + 4 = 11 = 2*4 + 3 -> LSB digit 3 is the split one for 4-bit.
        assert_eq!(e.origin_index, Some(0));
        let (decoded, _) = decode_planes(&e).unwrap();
        assert_eq!(decoded[(0, 0)], 7);
    }

    #[test]
    fn vecom_split_disabled_off_mlc() {
        for bpc in [1u8, 3, 4] {
            let e = encode_vecom(&q8(vec![14]), bpc).unwrap();
            assert_eq!(e.origin_index, None, "bpc={bpc}");
            assert_eq!(e.plane_count(), (8usize).div_ceil(bpc as usize));
        }
    }

    #[test]
    fn decode_roundtrip_exhaustive() {
        let q = q8((-128..=127).collect());
        let conv = encode_conventional(&q, 2).unwrap();
        let (w_conv, bias_conv) = decode_planes(&conv).unwrap();
        let vec_enc = encode_vecom(&q, 2).unwrap();
        let (w_vecom, bias_vecom) = decode_planes(&vec_enc).unwrap();
        assert_eq!(bias_conv, 128);
        assert_eq!(bias_vecom, 64);
        for (i, w) in (-128..=127).enumerate() {
            assert_eq!(w_conv[(i, 0)], w);
            assert_eq!(w_vecom[(i, 0)], w.max(-64));
        }
        assert_eq!(vec_enc.planes.clip_count, 64);
    }

    #[test]
    fn vecom_msb_and_origin_stay_low_exhaustive() {
        let q = q8((-128..=127).collect());
        let e = encode_vecom(&q, 2).unwrap();
        let msb = e.planes.planes.last().unwrap();
        let origin = &e.planes.planes[e.origin_index.unwrap()];
        for i in 0..256 {
            assert!(msb[(i, 0)] <= 2);
            assert!(origin[(i, 0)] <= 1);
        }
    }

    #[test]
    fn decode_rejects_out_of_range_digit() {
        let mut e = encode_vecom(&q8(vec![14]), 2).unwrap();
        let idx = e.origin_index.unwrap();
        e.planes.planes[idx][(0, 0)] = 2; // origin digits may only be 0 or 1
        assert!(decode_planes(&e).is_err());
    }

    #[test]
    fn area_overhead_examples() {
        let vecom = area_cells(EncodingScheme::Vecom, 8, 2, 128, 0);
        assert_eq!(vecom.overhead_vs_conventional, 0.25);
        let iac = area_cells(EncodingScheme::Conventional, 8, 2, 128, 1);
        assert_eq!(iac.overhead_vs_conventional, 1.0 / 128.0);
        let base = area_cells(EncodingScheme::Conventional, 8, 2, 128, 0);
        assert_eq!(base.overhead_vs_conventional, 0.0);
        assert_eq!(base.cells, 4 * 128 * 128);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn decode_is_clip_of_input(
                data in proptest::collection::vec(-128i32..=127, 1..64),
                scheme in prop_oneof![Just(EncodingScheme::Conventional), Just(EncodingScheme::Vecom)],
                bpc in 1u8..=6,
            ) {
                let q = QuantizedMatrix::new(
                    Mat::from_vec(data.len(), 1, data.clone()).unwrap(), 8, true, 1.0).unwrap();
                let e = encode(&q, scheme, bpc).unwrap();
                let (decoded, _) = decode_planes(&e).unwrap();
                let floor = scheme.clip_floor(8);
                for (i, &w) in data.iter().enumerate() {
                    prop_assert_eq!(decoded[(i, 0)], w.max(floor));
                }
            }
        }
    }
}
