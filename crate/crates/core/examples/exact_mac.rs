//! Walk one column of cells through the analog MAC by hand, then check the
//! full pipeline against an exact integer matmul at ideal conditions.
//!
//!     cargo run --example exact_mac

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vecom_sim::device::{DeviceParams, ProgrammingScheme};
use vecom_sim::encode::{encode, EncodingScheme};
use vecom_sim::mat::Mat;
use vecom_sim::quant::{ActivationVector, QuantizedMatrix};
use vecom_sim::xbar::{matvec, program_layer, program_plane, AdcConfig, Compensation, MacConfig};

fn main() {
    // Four cells on one bitline, levels 3/2/1/0, r = 10, offset-compensated:
    // targets are 1.0, 0.7, 0.4, 0.1 and the HRS column carries 4 x 0.1.
    let params = DeviceParams::new(10.0, 2, 0.0);
    let plane = Mat::from_vec(4, 1, vec![3u8, 2, 1, 0]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let xbar = program_plane(
        &plane,
        &params,
        ProgrammingScheme::OffsetCompensated,
        &mut rng,
    )
    .unwrap();
    let currents = xbar.bitline_currents(&[1, 1, 1, 1]).unwrap();
    let adc = AdcConfig::for_mac(4, &params, ProgrammingScheme::OffsetCompensated);
    let compensated = currents.data[0] - currents.hrs;
    println!("one bitline, levels [3,2,1,0], r = 10, offset-compensated targets:");
    println!("  column current      {:>8.4}", currents.data[0]);
    println!("  HRS column current  {:>8.4}", currents.hrs);
    println!("  compensated         {:>8.4}", compensated);
    println!(
        "  ADC ({} bits, lsb {:.2}) -> code {} = 3+2+1+0",
        adc.resolution_bits,
        adc.lsb_current,
        adc.convert(compensated).code
    );

    // Full stack: random weights, both encodings, zero variation, huge
    // R-ratio. The analog result must equal the integer matmul exactly.
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let weights = QuantizedMatrix::new(
        Mat::from_fn(128, 4, |_, _| rng.random_range(-128..=127)),
        8,
        true,
        1.0,
    )
    .unwrap();
    let acts =
        ActivationVector::new((0..128).map(|_| rng.random_range(0..=255)).collect(), 8).unwrap();

    println!("\n128x4 int8 weights, 8-bit activations, sigma = 0, r = 1e9:");
    for (name, scheme, programming, compensation, floor) in [
        (
            "conventional",
            EncodingScheme::Conventional,
            ProgrammingScheme::Proportional,
            Compensation::None,
            None,
        ),
        (
            "vecom",
            EncodingScheme::Vecom,
            ProgrammingScheme::OffsetCompensated,
            Compensation::VecomSubtract,
            Some(-64),
        ),
    ] {
        let ideal = DeviceParams::new(1e9, 2, 0.0);
        let encoded = encode(&weights, scheme, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let layer = program_layer(&encoded, &ideal, programming, &mut rng).unwrap();
        let got = matvec(&layer, &acts, &MacConfig::new(128, compensation))
            .unwrap()
            .values;
        let exact: Vec<i64> = (0..weights.cols())
            .map(|c| {
                (0..weights.rows())
                    .map(|r| {
                        let w = floor.map_or(weights.values[(r, c)], |f: i32| {
                            weights.values[(r, c)].max(f)
                        });
                        i64::from(w) * i64::from(acts.values[r])
                    })
                    .sum()
            })
            .collect();
        println!(
            "  {name:<13} analog {got:?}\n  {:<13} exact  {exact:?}  match: {}",
            "",
            got == exact
        );
    }
}
