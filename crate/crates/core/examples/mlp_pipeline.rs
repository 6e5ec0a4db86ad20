//! End-to-end workflow: synthesize a dataset, train the float reference,
//! quantize it, and evaluate the quantized model on simulated crossbars
//! across a variation sweep.
//!
//!     cargo run --example mlp_pipeline

use vecom_sim::device::DeviceParams;
use vecom_sim::harness::Pipeline;
use vecom_sim::nn::{generate_dataset, infer_sim, quantize_model, train_float};
use vecom_sim::xbar::MacConfig;

fn main() {
    let data = generate_dataset(3, 16, 360, 7).unwrap();
    let (train, test) = data.split(240).unwrap();
    println!(
        "dataset: {} classes, dim {}, {} train / {} test",
        data.class_count,
        data.feature_dim,
        train.len(),
        test.len()
    );

    let float = train_float(&train, &[16], 150, 11).unwrap();
    println!("float model accuracy: train {:.3}, test {:.3}", float.accuracy(&train), float.accuracy(&test));

    let model = quantize_model(&float, &train, 8).unwrap();
    for pipeline in [Pipeline::Conventional, Pipeline::Vecom] {
        println!(
            "quantized software accuracy ({pipeline} clip): {:.3}",
            model.accuracy_software(&test, pipeline.encoding())
        );
    }

    println!("\nsimulated accuracy (mean +- std over 10 trials), r = 300, NAW = 128:\n");
    println!("{:>6}  {:>20} {:>20}", "sigma", "conventional", "vecom");
    for sigma in [0.0, 0.04, 0.08, 0.12, 0.16] {
        let mut line = format!("{sigma:>6.2}");
        for pipeline in [Pipeline::Conventional, Pipeline::Vecom] {
            let params = DeviceParams::new(300.0, 2, sigma);
            let mac = MacConfig::new(128, pipeline.compensation());
            let stats = infer_sim(
                &model,
                &test,
                pipeline.encoding(),
                &params,
                pipeline.programming(),
                &mac,
                10,
                2024,
            )
            .unwrap();
            line.push_str(&format!("   {:>8.4} +- {:<7.4}", stats.mean, stats.std_dev));
        }
        println!("{line}");
    }
}
