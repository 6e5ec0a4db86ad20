//! Cross-module invariants of the full pipeline.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use vecom_sim::device::{DeviceParams, ProgrammingScheme};
use vecom_sim::encode::{encode, EncodingScheme};
use vecom_sim::harness::{run_sweep, ExperimentConfig, Pipeline, WorkloadSpec};
use vecom_sim::mat::Mat;
use vecom_sim::metrics::{bootstrap_mean_ci, energy_ratio, mean, EnergyModel};
use vecom_sim::nn::{generate_dataset, infer_sim, train_reference};
use vecom_sim::quant::{ActivationVector, QuantizedMatrix};
use vecom_sim::xbar::{matvec, program_layer, Compensation, MacConfig};

fn gaussian_weights(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> QuantizedMatrix {
    let values = Mat::from_fn(rows, cols, |_, _| {
        let z: f64 = rng.sample(rand_distr::StandardNormal);
        ((32.0 * z).round() as i32).clamp(-128, 127)
    });
    QuantizedMatrix::new(values, 8, true, 1.0).unwrap()
}

fn random_activations(len: usize, rng: &mut ChaCha8Rng) -> ActivationVector {
    ActivationVector::new((0..len).map(|_| rng.random_range(0..=255)).collect(), 8).unwrap()
}

fn oracle(w: &QuantizedMatrix, a: &ActivationVector, floor: Option<i32>) -> Vec<i64> {
    (0..w.cols())
        .map(|c| {
            (0..w.rows())
                .map(|r| {
                    let mut v = w.values[(r, c)];
                    if let Some(f) = floor {
                        v = v.max(f);
                    }
                    i64::from(v) * i64::from(a.values[r])
                })
                .sum()
        })
        .collect()
}

#[test]
fn offset_exactness_holds_from_r4_to_r1000() {
    for &r in &[4.0, 7.0, 10.0, 30.0, 100.0, 300.0, 1000.0] {
        for i in 0..10u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(300 + i);
            let w = gaussian_weights(128, 8, &mut rng);
            let a = random_activations(128, &mut rng);
            let params = DeviceParams::new(r, 2, 0.0);
            let enc = encode(&w, EncodingScheme::Vecom, 2).unwrap();
            let mut prng = ChaCha8Rng::seed_from_u64(400 + i);
            let layer = program_layer(
                &enc,
                &params,
                ProgrammingScheme::OffsetCompensated,
                &mut prng,
            )
            .unwrap();
            let got = matvec(&layer, &a, &MacConfig::new(128, Compensation::VecomSubtract))
                .unwrap()
                .values;
            assert_eq!(got, oracle(&w, &a, Some(-64)), "r={r}, instance {i}");
        }
    }
}

#[test]
fn mean_error_is_monotone_in_sigma() {
    // Paired seeds across the sigma grid; consecutive means may not drop
    // beyond the 95% bootstrap slack of their paired differences.
    let sigmas = [0.0, 0.02, 0.04, 0.06, 0.08, 0.1, 0.12];
    let trials = 24;
    let mut mean_abs: Vec<Vec<f64>> = Vec::new();
    for &sigma in &sigmas {
        let mut per_trial = Vec::with_capacity(trials);
        for t in 0..trials as u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(500 + t);
            let w = gaussian_weights(128, 8, &mut rng);
            let a = random_activations(128, &mut rng);
            let params = DeviceParams::new(300.0, 2, sigma);
            let enc = encode(&w, EncodingScheme::Vecom, 2).unwrap();
            let mut prng = ChaCha8Rng::seed_from_u64(600 + t);
            let layer = program_layer(
                &enc,
                &params,
                ProgrammingScheme::OffsetCompensated,
                &mut prng,
            )
            .unwrap();
            let got = matvec(&layer, &a, &MacConfig::new(128, Compensation::VecomSubtract))
                .unwrap()
                .values;
            let exact = oracle(&w, &a, Some(-64));
            let abs_err = got
                .iter()
                .zip(&exact)
                .map(|(&g, &e)| ((g - e) as f64).abs())
                .sum::<f64>()
                / got.len() as f64;
            per_trial.push(abs_err);
        }
        mean_abs.push(per_trial);
    }
    for i in 0..sigmas.len() - 1 {
        let diffs: Vec<f64> = mean_abs[i + 1]
            .iter()
            .zip(&mean_abs[i])
            .map(|(hi, lo)| hi - lo)
            .collect();
        let (_, upper) = bootstrap_mean_ci(&diffs, 1000, 0.05, 42 + i as u64);
        assert!(
            upper >= 0.0,
            "mean |error| dropped from sigma {} to {}: CI upper {upper}",
            sigmas[i],
            sigmas[i + 1]
        );
        assert!(
            mean(&mean_abs[i + 1]) >= mean(&mean_abs[i]) - upper.abs().max(1e-9),
            "non-monotone beyond bootstrap slack at sigma {}",
            sigmas[i + 1]
        );
    }
}

#[test]
fn vecom_accuracy_within_epsilon_of_conventional_or_better() {
    // Accuracy(vecom) >= accuracy(conventional) - 1 ppt at sigma = 0.08,
    // NAW = 128, MLC, r = 300, over 30 trials.
    let data = generate_dataset(3, 16, 360, 7).unwrap();
    let (train, test) = data.split(240).unwrap();
    let model = train_reference(&train, &[16], 150, 11, 8).unwrap();
    let params = DeviceParams::new(300.0, 2, 0.08);
    let conventional = infer_sim(
        &model,
        &test,
        EncodingScheme::Conventional,
        &params,
        ProgrammingScheme::Proportional,
        &MacConfig::new(128, Compensation::None),
        30,
        21,
    )
    .unwrap();
    let vecom = infer_sim(
        &model,
        &test,
        EncodingScheme::Vecom,
        &params,
        ProgrammingScheme::OffsetCompensated,
        &MacConfig::new(128, Compensation::VecomSubtract),
        30,
        22,
    )
    .unwrap();
    assert!(
        vecom.mean >= conventional.mean - 0.01,
        "vecom {} vs conventional {}",
        vecom.mean,
        conventional.mean
    );
}

#[test]
fn vecom_mlp_accuracy_flat_across_r_ratio() {
    // At fixed sigma = 0.04 the offset mapping removes the nominal
    // R-ratio dependence; accuracy may move less than 1 ppt across r.
    let cfg = ExperimentConfig {
        workload: WorkloadSpec::Mlp {
            classes: 3,
            feature_dim: 16,
            hidden_dims: vec![16],
            train_samples: 240,
            test_samples: 120,
            epochs: 150,
            data_seed: 7,
            train_seed: 11,
            weight_bits: 8,
        },
        pipelines: vec![Pipeline::Vecom],
        sigma: vec![0.04],
        naw: vec![128],
        r_ratio: vec![1000.0, 100.0, 30.0, 7.0],
        bits_per_cell: vec![2],
        trials: 12,
        master_seed: 42,
        activation_bits: 8,
        g_max: 1.0,
        v_read: 1.0,
        analog_bias_count: false,
        energy: EnergyModel::default(),
        out: None,
    };
    let rows = run_sweep(&cfg, 0).unwrap();
    let mut acc_by_r: Vec<(f64, Vec<f64>)> = Vec::new();
    for row in &rows {
        let acc = row.accuracy.unwrap();
        match acc_by_r.iter_mut().find(|(r, _)| *r == row.point.r_ratio) {
            Some((_, v)) => v.push(acc),
            None => acc_by_r.push((row.point.r_ratio, vec![acc])),
        }
    }
    let means: Vec<f64> = acc_by_r.iter().map(|(_, v)| mean(v)).collect();
    let spread = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - means.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread < 0.01, "accuracy spread across r = {spread}: {means:?}");
}

#[test]
fn vecom_code_error_rate_flat_up_to_qlc() {
    // Random-matrix workload, bpc swept 1..6: vecom's exact-match rate at
    // bpc <= 4 stays within 1 ppt of the bpc = 1 value.
    let cfg = ExperimentConfig {
        workload: WorkloadSpec::RandomMatrix {
            rows: 128,
            cols: 8,
            weight_bits: 8,
        },
        pipelines: vec![Pipeline::Vecom],
        sigma: vec![0.04],
        naw: vec![128],
        r_ratio: vec![300.0],
        bits_per_cell: vec![1, 2, 3, 4, 5, 6],
        trials: 10,
        master_seed: 77,
        activation_bits: 8,
        g_max: 1.0,
        v_read: 1.0,
        analog_bias_count: false,
        energy: EnergyModel::default(),
        out: None,
    };
    let rows = run_sweep(&cfg, 0).unwrap();
    let rate_for = |bpc: u8| -> f64 {
        let v: Vec<f64> = rows
            .iter()
            .filter(|r| r.point.bits_per_cell == bpc)
            .map(|r| r.code_error_rate)
            .collect();
        mean(&v)
    };
    let baseline = rate_for(1);
    for bpc in 2..=4 {
        let rate = rate_for(bpc);
        assert!(
            (rate - baseline).abs() <= 0.01,
            "bpc {bpc} code_error_rate {rate} vs baseline {baseline}"
        );
    }
}

#[test]
fn vecom_full_pipeline_energy_below_conventional() {
    // Conventional runs at its variation-limited NAW = 8; vecom exploits
    // NAW = 128. Lower conductance levels plus fewer, wider conversions
    // land below the baseline's total energy despite the higher ADC
    // resolution.
    let model = EnergyModel::default();
    let mut conv_total = 0.0;
    let mut vecom_total = 0.0;
    for t in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(900 + t);
        let w = gaussian_weights(128, 16, &mut rng);
        let a = random_activations(128, &mut rng);
        let params = DeviceParams::new(300.0, 2, 0.04);

        let enc = encode(&w, EncodingScheme::Conventional, 2).unwrap();
        let mut prng = ChaCha8Rng::seed_from_u64(910 + t);
        let layer =
            program_layer(&enc, &params, ProgrammingScheme::Proportional, &mut prng).unwrap();
        let out = matvec(&layer, &a, &MacConfig::new(8, Compensation::None)).unwrap();
        let conv = model.breakdown(out.xbar_energy, out.conversions, out.adc_bits);

        let enc = encode(&w, EncodingScheme::Vecom, 2).unwrap();
        let mut prng = ChaCha8Rng::seed_from_u64(920 + t);
        let layer = program_layer(
            &enc,
            &params,
            ProgrammingScheme::OffsetCompensated,
            &mut prng,
        )
        .unwrap();
        let out = matvec(&layer, &a, &MacConfig::new(128, Compensation::VecomSubtract)).unwrap();
        let vecom = model.breakdown(out.xbar_energy, out.conversions, out.adc_bits);

        conv_total += conv.e_total;
        vecom_total += vecom.e_total;
    }
    let baseline = vecom_sim::metrics::EnergyBreakdown {
        e_xbar: conv_total,
        e_adc: 0.0,
        e_total: conv_total,
    };
    let candidate = vecom_sim::metrics::EnergyBreakdown {
        e_xbar: vecom_total,
        e_adc: 0.0,
        e_total: vecom_total,
    };
    let ratio = energy_ratio(&candidate, &baseline);
    assert!(ratio < 1.0, "energy ratio vecom/conventional = {ratio}");
}

#[test]
fn mlp_sweep_is_deterministic_across_workers() {
    let cfg = ExperimentConfig {
        workload: WorkloadSpec::Mlp {
            classes: 2,
            feature_dim: 8,
            hidden_dims: vec![8],
            train_samples: 40,
            test_samples: 20,
            epochs: 30,
            data_seed: 3,
            train_seed: 5,
            weight_bits: 8,
        },
        pipelines: vec![Pipeline::Conventional, Pipeline::Vecom],
        sigma: vec![0.0, 0.08],
        naw: vec![8],
        r_ratio: vec![300.0],
        bits_per_cell: vec![2],
        trials: 3,
        master_seed: 31,
        activation_bits: 8,
        g_max: 1.0,
        v_read: 1.0,
        analog_bias_count: false,
        energy: EnergyModel::default(),
        out: None,
    };
    let one = vecom_sim::harness::csv_bytes(&run_sweep(&cfg, 1).unwrap()).unwrap();
    let eight = vecom_sim::harness::csv_bytes(&run_sweep(&cfg, 8).unwrap()).unwrap();
    assert_eq!(one, eight);
}

#[test]
fn gaussian_weights_clip_near_two_sigma_tail() {
    // Weights drawn so the int8 range spans 4 standard deviations: the
    // fraction below -64 sits near the 2-sigma Gaussian tail (~2.3%).
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let w = gaussian_weights(128, 128, &mut rng);
    let enc = encode(&w, EncodingScheme::Vecom, 2).unwrap();
    let fraction = enc.planes.clip_count as f64 / (128.0 * 128.0);
    assert!(
        (0.013..=0.035).contains(&fraction),
        "clip fraction {fraction} far from the 2-sigma tail"
    );
}
