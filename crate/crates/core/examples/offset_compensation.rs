//! R-ratio endurance of the three pipelines at the raw MAC level.
//!
//! The HRS leakage grows as the R-ratio falls. Plain IAC subtraction
//! removes the leakage of level-0 cells but under-counts every nonzero MLC
//! level by one HRS unit; offset-compensated targets make the subtraction
//! exact at any ratio.
//!
//!     cargo run --example offset_compensation

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vecom_sim::device::DeviceParams;
use vecom_sim::encode::encode;
use vecom_sim::harness::Pipeline;
use vecom_sim::mat::Mat;
use vecom_sim::quant::{ActivationVector, QuantizedMatrix};
use vecom_sim::xbar::{matvec, program_layer, MacConfig};

fn main() {
    let r_ratios = [1000.0, 300.0, 100.0, 30.0, 7.0];
    let trials = 10;
    println!("mean |MAC error| per output, 128x16 int8 weights, sigma = 0, NAW = 128\n");
    println!(
        "{:>8}  {:>14} {:>14} {:>14}",
        "r_ratio", "conventional", "iac", "vecom"
    );
    for &r in &r_ratios {
        let mut line = format!("{r:>8.0}");
        for pipeline in Pipeline::ALL {
            let mut total = 0.0;
            for t in 0..trials {
                let mut rng = ChaCha8Rng::seed_from_u64(100 + t);
                let w = QuantizedMatrix::new(
                    Mat::from_fn(128, 16, |_, _| rng.random_range(-128..=127)),
                    8,
                    true,
                    1.0,
                )
                .unwrap();
                let a = ActivationVector::new(
                    (0..128).map(|_| rng.random_range(0..=255)).collect(),
                    8,
                )
                .unwrap();
                let params = DeviceParams::new(r, 2, 0.0);
                let enc = encode(&w, pipeline.encoding(), 2).unwrap();
                let mut prng = ChaCha8Rng::seed_from_u64(200 + t);
                let layer =
                    program_layer(&enc, &params, pipeline.programming(), &mut prng).unwrap();
                let got = matvec(
                    &layer,
                    &a,
                    &MacConfig::new(128, pipeline.compensation()),
                )
                .unwrap()
                .values;
                let floor = pipeline.encoding().clip_floor(8);
                let exact: Vec<i64> = (0..w.cols())
                    .map(|c| {
                        (0..w.rows())
                            .map(|row| {
                                i64::from(w.values[(row, c)].max(floor))
                                    * i64::from(a.values[row])
                            })
                            .sum()
                    })
                    .collect();
                total += got
                    .iter()
                    .zip(&exact)
                    .map(|(&g, &e)| ((g - e) as f64).abs())
                    .sum::<f64>()
                    / got.len() as f64;
            }
            line.push_str(&format!(" {:>14.1}", total / trials as f64));
        }
        println!("{line}");
    }
    println!("\nconventional: clip floor none (bias 128); vecom clips below -64.");
    println!("vecom stays exact down to r = 7; iac's deficit grows as r falls.");
}
