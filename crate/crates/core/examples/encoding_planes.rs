//! How a signed weight becomes MLC digit planes under the two mappings,
//! and what the redundant split does to the level distribution.
//!
//!     cargo run --example encoding_planes

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use vecom_sim::encode::{decode_planes, encode_conventional, encode_vecom};
use vecom_sim::mat::Mat;
use vecom_sim::quant::QuantizedMatrix;

fn main() {
    let samples = [14i32, -14, 127, -128, -70, 0];
    println!("digit planes (MSB -> LSB) of sample 8-bit weights, 2 bits/cell:\n");
    println!(
        "{:>6}  {:<22} {:<30}",
        "w", "conventional (bias 128)", "vecom (bias 64, origin/redun)"
    );
    for &w in &samples {
        let q = QuantizedMatrix::new(Mat::from_vec(1, 1, vec![w]).unwrap(), 8, true, 1.0).unwrap();
        let conv = encode_conventional(&q, 2).unwrap();
        let vec = encode_vecom(&q, 2).unwrap();
        let digits = |planes: &vecom_sim::encode::EncodedPlanes| -> Vec<u8> {
            planes
                .planes
                .planes
                .iter()
                .rev()
                .map(|p| p[(0, 0)])
                .collect()
        };
        let (decoded, _) = decode_planes(&vec).unwrap();
        println!(
            "{w:>6}  {:<22} {:<30} decodes to {}",
            format!("{:?}", digits(&conv)),
            format!("{:?}", digits(&vec)),
            decoded[(0, 0)]
        );
    }
    println!("\nvecom plane weights {:?} (origin carries 3x its significance)", {
        let q =
            QuantizedMatrix::new(Mat::from_vec(1, 1, vec![14]).unwrap(), 8, true, 1.0).unwrap();
        encode_vecom(&q, 2).unwrap().planes.plane_weights
    });

    // Level histogram of the two most significant positions on Gaussian
    // weights: the mapping drains the high levels.
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let q = QuantizedMatrix::new(
        Mat::from_fn(4096, 1, |_, _| {
            let z: f64 = rng.sample(StandardNormal);
            ((32.0 * z).round() as i32).clamp(-128, 127)
        }),
        8,
        true,
        1.0,
    )
    .unwrap();
    let conv = encode_conventional(&q, 2).unwrap();
    let vec = encode_vecom(&q, 2).unwrap();
    println!("\nlevel histograms over 4096 Gaussian weights (level: share):");
    let show = |label: &str, plane: &Mat<u8>| {
        let mut counts = [0usize; 4];
        for &d in plane.iter() {
            counts[d as usize] += 1;
        }
        let total = plane.rows() as f64;
        println!(
            "  {label:<26} 0: {:>5.1}%  1: {:>5.1}%  2: {:>5.1}%  3: {:>5.1}%",
            100.0 * counts[0] as f64 / total,
            100.0 * counts[1] as f64 / total,
            100.0 * counts[2] as f64 / total,
            100.0 * counts[3] as f64 / total
        );
    };
    show("conventional MSB plane", conv.planes.planes.last().unwrap());
    show("vecom MSB plane", vec.planes.planes.last().unwrap());
    show(
        "conventional [5:4] plane",
        &conv.planes.planes[conv.planes.planes.len() - 2],
    );
    show("vecom origin plane", &vec.planes.planes[vec.origin_index.unwrap()]);
    show(
        "vecom redundant plane",
        &vec.planes.planes[vec.redundant_index.unwrap()],
    );
    println!("\nclipped weights (below -64): {}", vec.planes.clip_count);
}
