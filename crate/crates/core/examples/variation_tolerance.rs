//! MAC error growth under programming variation: conventional mapping vs
//! the variation-resilient encoding.
//!
//! The encoding moves the accuracy-dominant high-significance digits onto
//! low conductance levels, whose absolute log-normal spread is smaller, so
//! the weighted error grows more slowly in sigma.
//!
//!     cargo run --example variation_tolerance

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use vecom_sim::device::DeviceParams;
use vecom_sim::encode::encode;
use vecom_sim::harness::Pipeline;
use vecom_sim::mat::Mat;
use vecom_sim::metrics::mac_error_stats;
use vecom_sim::quant::{ActivationVector, QuantizedMatrix};
use vecom_sim::xbar::{matvec, program_layer, MacConfig};

fn main() {
    let sigmas = [0.0, 0.02, 0.04, 0.06, 0.08, 0.10, 0.12];
    let trials = 16;
    println!("MAC RMSE vs variation, Gaussian int8 128x16 weights, r = 300, NAW = 128\n");
    println!("{:>6}  {:>14} {:>14}", "sigma", "conventional", "vecom");
    for &sigma in &sigmas {
        let mut rmse = [0.0f64; 2];
        for (i, pipeline) in [Pipeline::Conventional, Pipeline::Vecom].iter().enumerate() {
            for t in 0..trials {
                let mut rng = ChaCha8Rng::seed_from_u64(300 + t);
                let w = QuantizedMatrix::new(
                    Mat::from_fn(128, 16, |_, _| {
                        let z: f64 = rng.sample(StandardNormal);
                        ((32.0 * z).round() as i32).clamp(-128, 127)
                    }),
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
                let params = DeviceParams::new(300.0, 2, sigma);
                let enc = encode(&w, pipeline.encoding(), 2).unwrap();
                let mut prng = ChaCha8Rng::seed_from_u64(1000 * (i as u64 + 1) + t);
                let layer =
                    program_layer(&enc, &params, pipeline.programming(), &mut prng).unwrap();
                let got = matvec(&layer, &a, &MacConfig::new(128, pipeline.compensation()))
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
                rmse[i] += mac_error_stats(&got, &exact).unwrap().rmse;
            }
        }
        println!(
            "{sigma:>6.2}  {:>14.1} {:>14.1}",
            rmse[0] / trials as f64,
            rmse[1] / trials as f64
        );
    }
}
