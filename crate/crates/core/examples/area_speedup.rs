//! The closed-form hardware models: crossbar cell-area overhead and the
//! SAR-ADC cycle model.
//!
//!     cargo run --example area_speedup

use vecom_sim::encode::{area_cells, EncodingScheme};
use vecom_sim::metrics::{speedup, PerfModel};

fn main() {
    println!("cell-area overhead vs the conventional 8-bit MLC baseline (128x128 tile):\n");
    let rows = 128;
    let cases = [
        ("conventional 8-bit MLC", EncodingScheme::Conventional, 8u8, 2u8, 0usize),
        ("iac (one extra column)", EncodingScheme::Conventional, 8, 2, 1),
        ("vecom 8-bit MLC", EncodingScheme::Vecom, 8, 2, 0),
        ("vecom 8-bit MLC + column", EncodingScheme::Vecom, 8, 2, 1),
        ("conventional 4-bit MLC", EncodingScheme::Conventional, 4, 2, 0),
        ("vecom 4-bit MLC", EncodingScheme::Vecom, 4, 2, 0),
    ];
    println!("{:<28} {:>12} {:>10}", "mapping", "cells", "overhead");
    for (name, scheme, bits, bpc, extra) in cases {
        let area = area_cells(scheme, bits, bpc, rows, extra);
        println!(
            "{name:<28} {:>12} {:>9.2}%",
            area.cells,
            area.overhead_vs_conventional * 100.0
        );
    }

    println!("\nSAR cycle model (8 input bits, 128 rows; ADC = ceil(log2(naw)) + 2 bits):\n");
    println!("{:>6} {:>9} {:>8}", "naw", "adc bits", "cycles");
    for naw in [8usize, 16, 32, 64, 128] {
        let adc_bits = (naw.ilog2() + 2) as u8;
        let m = PerfModel {
            input_bits: 8,
            rows: 128,
            naw,
            adc_bits,
            planes: 4,
        };
        println!("{naw:>6} {adc_bits:>9} {:>8}", m.cycles());
    }

    let baseline = PerfModel {
        input_bits: 8,
        rows: 128,
        naw: 8,
        adc_bits: 5,
        planes: 4,
    };
    let candidate = PerfModel {
        input_bits: 8,
        rows: 128,
        naw: 128,
        adc_bits: 9,
        planes: 5,
    };
    println!(
        "\nbaseline naw 8 -> resilient naw 128: {:.2}x speedup plain, {:.2}x after the 5/4 plane factor",
        speedup(&baseline, &candidate, false).unwrap(),
        speedup(&baseline, &candidate, true).unwrap()
    );
}
