//! Accuracy vs the number of simultaneously activated wordlines, the
//! operating-point search, and the resulting cycle-model speedup.
//!
//! The search picks, per pipeline, the largest NAW whose mean accuracy
//! stays within one percentage point of its ideal value; the SAR cycle
//! model then converts the two operating points into a speedup.
//!
//!     cargo run --example wordline_parallelism

use vecom_sim::device::DeviceParams;
use vecom_sim::encode::plane_count;
use vecom_sim::harness::Pipeline;
use vecom_sim::metrics::{max_naw_within_drop, speedup, PerfModel};
use vecom_sim::nn::{generate_dataset, infer_sim, train_reference};
use vecom_sim::xbar::{AdcConfig, MacConfig};

fn main() {
    let data = generate_dataset(3, 64, 360, 7).unwrap();
    let (train, test) = data.split(240).unwrap();
    let model = train_reference(&train, &[32], 150, 11, 8).unwrap();
    let sw = model.accuracy_software(&data, vecom_sim::encode::EncodingScheme::Vecom);
    println!("tiny MLP 64-16-3, software accuracy {sw:.3}, sigma = 0.12, r = 300\n");

    let naws = [4usize, 8, 16, 32, 64];
    let trials = 8;
    println!(
        "{:>6}  {:>14} {:>14}",
        "naw", "conventional", "vecom"
    );
    let mut curves: Vec<Vec<(usize, f64)>> = vec![Vec::new(), Vec::new()];
    for &naw in &naws {
        let mut line = format!("{naw:>6}");
        for (i, pipeline) in [Pipeline::Conventional, Pipeline::Vecom].iter().enumerate() {
            let params = DeviceParams::new(300.0, 2, 0.12);
            let mac = MacConfig::new(naw, pipeline.compensation());
            let stats = infer_sim(
                &model,
                &test,
                pipeline.encoding(),
                &params,
                pipeline.programming(),
                &mac,
                trials,
                404,
            )
            .unwrap();
            curves[i].push((naw, stats.mean));
            line.push_str(&format!(" {:>14.4}", stats.mean));
        }
        println!("{line}");
    }

    // Operating point: largest NAW within 1 ppt of each pipeline's own
    // best measured accuracy.
    let mut points = Vec::new();
    for (i, pipeline) in [Pipeline::Conventional, Pipeline::Vecom].iter().enumerate() {
        let best = curves[i]
            .iter()
            .map(|&(_, a)| a)
            .fold(f64::NEG_INFINITY, f64::max);
        let naw = max_naw_within_drop(&curves[i], best, 0.01).unwrap_or(naws[0]);
        println!("\n{pipeline}: largest NAW within 1 ppt of best -> {naw}");
        points.push(naw);
    }

    let perf = |pipeline: Pipeline, naw: usize| -> PerfModel {
        let params = DeviceParams::new(300.0, 2, 0.12);
        PerfModel {
            input_bits: 8,
            rows: 64,
            naw,
            adc_bits: AdcConfig::for_mac(naw, &params, pipeline.programming()).resolution_bits,
            planes: plane_count(pipeline.encoding(), 8, 2),
        }
    };
    let baseline = perf(Pipeline::Conventional, points[0]);
    let candidate = perf(Pipeline::Vecom, points[1]);
    println!(
        "\ncycle model: conventional@naw{} = {} cycles, vecom@naw{} = {} cycles",
        points[0],
        baseline.cycles(),
        points[1],
        candidate.cycles()
    );
    println!(
        "speedup {:.2}x plain, {:.2}x charging the extra-plane factor",
        speedup(&baseline, &candidate, false).unwrap(),
        speedup(&baseline, &candidate, true).unwrap()
    );

    // The reference operating points (conventional limited to 8 rows, the
    // resilient encoding running all 128) under the same model arithmetic.
    let reference_base = PerfModel {
        input_bits: 8,
        rows: 128,
        naw: 8,
        adc_bits: 5,
        planes: 4,
    };
    let reference_cand = PerfModel {
        input_bits: 8,
        rows: 128,
        naw: 128,
        adc_bits: 9,
        planes: 5,
    };
    println!(
        "\nfull-tile reference points (naw 8 vs 128): {:.2}x plain, {:.2}x with plane overhead",
        speedup(&reference_base, &reference_cand, false).unwrap(),
        speedup(&reference_base, &reference_cand, true).unwrap()
    );
}
