//! Desk-scale simulator of a multi-level-cell ReRAM crossbar accelerator
//! for fixed-point neural-network inference.
//!
//! The crate models the full analog MAC pipeline: signed weights are biased
//! into the unsigned domain, sliced into per-cell digit planes, programmed
//! onto crossbar arrays as conductances with log-normal programming
//! variation, driven bit-serially through 1-bit DACs, accumulated along
//! bitlines, quantized by per-group ADCs, and recombined digitally with
//! shift-and-add. Two weight mappings are implemented — the conventional
//! bias-by-half-range mapping and the variation-resilient VECOM mapping
//! (bias control plus redundant splitting of the second-most-significant
//! digit) — together with two programming schemes: proportional level
//! targets and offset-compensated targets whose HRS leakage cancels exactly
//! against an extra all-HRS column.
//!
//! A Monte-Carlo harness sweeps device variation, R-ratio, wordline
//! parallelism and cell precision over random-matrix or tiny-MLP workloads
//! and reports MAC error, classification accuracy, and area/cycle/energy
//! models as deterministic CSV. Every sampled quantity is driven by an
//! explicit seed; identical configurations produce byte-identical outputs
//! regardless of worker count.
//!
//! Start with the runnable examples (`cargo run --example exact_mac`, see
//! `examples/`), or the `vecom` binary for the file-based workflow.

pub mod device;
pub mod encode;
pub mod error;
pub mod harness;
pub mod mat;
pub mod metrics;
pub mod nn;
pub mod quant;
pub mod seed;
pub mod xbar;

pub use error::{Error, Result};
