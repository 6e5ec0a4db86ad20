//! Monte-Carlo sweep driver.
//!
//! The sweep is the Cartesian product of the configured axes; every
//! (point, trial) job derives its own generator seed from the master seed,
//! so outputs are identical regardless of worker count or scheduling.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::device::DeviceParams;
use crate::encode::{area_cells, encode, plane_count};
use crate::error::{Error, Result};
use crate::harness::config::{ExperimentConfig, Pipeline, WorkloadSpec};
use crate::mat::Mat;
use crate::metrics::{mac_error_stats, PerfModel};
use crate::nn::{generate_dataset, infer_sim_trial, train_reference, Dataset, MlpModel};
use crate::quant::{value_range, ActivationVector, QuantizedMatrix};
use crate::seed::derive_seed3;
use crate::xbar::{matvec, matvec_traced, program_layer, MacConfig, TILE_DIM};

/// One Cartesian axis point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub pipeline: Pipeline,
    pub sigma: f64,
    pub naw: usize,
    pub r_ratio: f64,
    pub bits_per_cell: u8,
}

/// One (point, trial) outcome; a CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub point: SweepPoint,
    pub trial: usize,
    pub seed: u64,
    pub rmse: f64,
    pub max_abs_err: f64,
    pub code_error_rate: f64,
    pub accuracy: Option<f64>,
    pub cycles: u64,
    pub e_xbar: f64,
    pub e_adc: f64,
    pub e_total: f64,
    pub saturation_count: u64,
    pub clip_count: u64,
    pub area_overhead: f64,
}

/// Deterministic axis-point enumeration order: pipeline, sigma, naw,
/// r_ratio, bits_per_cell (outer to inner).
pub fn sweep_points(cfg: &ExperimentConfig) -> Vec<SweepPoint> {
    let mut points = Vec::new();
    for &pipeline in &cfg.pipelines {
        for &sigma in &cfg.sigma {
            for &naw in &cfg.naw {
                for &r_ratio in &cfg.r_ratio {
                    for &bits_per_cell in &cfg.bits_per_cell {
                        points.push(SweepPoint {
                            pipeline,
                            sigma,
                            naw,
                            r_ratio,
                            bits_per_cell,
                        });
                    }
                }
            }
        }
    }
    points
}

/// Gaussian integer weights whose signed range spans four standard
/// deviations (std = 2^(bits-1) / 4).
pub fn gaussian_weights<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    weight_bits: u8,
    rng: &mut R,
) -> QuantizedMatrix {
    let (lo, hi) = value_range(weight_bits, true);
    let std = f64::from(1u32 << (weight_bits - 1)) / 4.0;
    let values = Mat::from_fn(rows, cols, |_, _| {
        let z: f64 = rng.sample(rand_distr::StandardNormal);
        ((std * z).round() as i32).clamp(lo, hi)
    });
    QuantizedMatrix::new(values, weight_bits, true, 1.0).expect("generated weights in range")
}

/// Uniform activations over the full unsigned range.
pub fn uniform_activations<R: Rng + ?Sized>(
    len: usize,
    bits: u8,
    rng: &mut R,
) -> ActivationVector {
    let hi = ((1u16 << bits) - 1) as u8;
    let values = (0..len).map(|_| rng.random_range(0..=hi)).collect();
    ActivationVector::new(values, bits).expect("generated activations in range")
}

/// Exact signed matmul the analog pipeline is scored against, with the
/// encoding's clip floor applied.
pub fn exact_matvec(w: &QuantizedMatrix, a: &ActivationVector, floor: Option<i32>) -> Vec<i64> {
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

fn device_for(cfg: &ExperimentConfig, point: &SweepPoint) -> DeviceParams {
    DeviceParams {
        g_max: cfg.g_max,
        r_ratio: point.r_ratio,
        bits_per_cell: point.bits_per_cell,
        sigma: point.sigma,
        v_read: cfg.v_read,
    }
}

fn mac_for(cfg: &ExperimentConfig, point: &SweepPoint) -> MacConfig {
    MacConfig {
        naw: point.naw,
        compensation: point.pipeline.compensation(),
        analog_bias_count: cfg.analog_bias_count,
    }
}

/// MLP workloads train once per config; trials only resample variation.
struct MlpContext {
    model: MlpModel,
    test: Dataset,
}

fn prepare_mlp(cfg: &ExperimentConfig) -> Result<Option<MlpContext>> {
    let WorkloadSpec::Mlp {
        classes,
        feature_dim,
        ref hidden_dims,
        train_samples,
        test_samples,
        epochs,
        data_seed,
        train_seed,
        weight_bits,
    } = cfg.workload
    else {
        return Ok(None);
    };
    let data = generate_dataset(classes, feature_dim, train_samples + test_samples, data_seed)?;
    let (train, test) = data.split(train_samples)?;
    let model = train_reference(&train, hidden_dims, epochs, train_seed, weight_bits)?;
    Ok(Some(MlpContext { model, test }))
}

fn evaluate(
    cfg: &ExperimentConfig,
    mlp: Option<&MlpContext>,
    point_index: usize,
    point: &SweepPoint,
    trial: usize,
) -> Result<ResultRow> {
    let seed = derive_seed3(cfg.master_seed, point_index as u64, trial as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = device_for(cfg, point);
    let mac = mac_for(cfg, point);
    let encoding = point.pipeline.encoding();
    let programming = point.pipeline.programming();
    let weight_bits = cfg.workload.weight_bits();

    let planes = plane_count(encoding, weight_bits, point.bits_per_cell);
    let area = area_cells(
        encoding,
        weight_bits,
        point.bits_per_cell,
        TILE_DIM,
        point.pipeline.extra_columns(),
    );

    let (stats, accuracy, rows, saturations, clip_count, xbar_energy, conversions, adc_bits) =
        match (&cfg.workload, mlp) {
            (WorkloadSpec::RandomMatrix { rows, cols, .. }, _) => {
                let w = gaussian_weights(*rows, *cols, weight_bits, &mut rng);
                let a = uniform_activations(*rows, cfg.activation_bits, &mut rng);
                let enc = encode(&w, encoding, point.bits_per_cell)?;
                let clip_count = enc.planes.clip_count;
                let layer = program_layer(&enc, &params, programming, &mut rng)?;
                let out = matvec(&layer, &a, &mac)?;
                let oracle = exact_matvec(&w, &a, Some(encoding.clip_floor(weight_bits)));
                let stats = mac_error_stats(&out.values, &oracle)?;
                (
                    stats,
                    None,
                    *rows,
                    out.saturations,
                    clip_count,
                    out.xbar_energy,
                    out.conversions,
                    out.adc_bits,
                )
            }
            (WorkloadSpec::Mlp { feature_dim, .. }, Some(ctx)) => {
                let eval = infer_sim_trial(
                    &ctx.model,
                    &ctx.test,
                    encoding,
                    &params,
                    programming,
                    &mac,
                    &mut rng,
                )?;
                (
                    eval.logit_stats,
                    Some(eval.accuracy),
                    *feature_dim,
                    eval.saturations,
                    eval.clip_count,
                    eval.xbar_energy,
                    eval.conversions,
                    eval.adc_bits,
                )
            }
            (WorkloadSpec::Mlp { .. }, None) => {
                return Err(Error::Config("mlp workload missing trained context".into()))
            }
        };

    let perf = PerfModel {
        input_bits: cfg.activation_bits,
        rows,
        naw: point.naw,
        adc_bits,
        planes,
    };
    let breakdown = cfg.energy.breakdown(xbar_energy, conversions, adc_bits);

    Ok(ResultRow {
        point: *point,
        trial,
        seed,
        rmse: stats.rmse,
        max_abs_err: stats.max_abs,
        code_error_rate: stats.code_error_rate,
        accuracy,
        cycles: perf.cycles(),
        e_xbar: breakdown.e_xbar,
        e_adc: breakdown.e_adc,
        e_total: breakdown.e_total,
        saturation_count: saturations,
        clip_count,
        area_overhead: area.overhead_vs_conventional,
    })
}

/// Runs the full sweep on `workers` threads (0 = library default) and
/// returns rows sorted by (axis point, trial).
pub fn run_sweep(cfg: &ExperimentConfig, workers: usize) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let mlp = prepare_mlp(cfg)?;
    let points = sweep_points(cfg);
    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..cfg.trials).map(move |t| (p, t)))
        .collect();

    let run = || -> Result<Vec<ResultRow>> {
        let mut indexed = jobs
            .par_iter()
            .map(|&(p, t)| evaluate(cfg, mlp.as_ref(), p, &points[p], t).map(|row| (p, t, row)))
            .collect::<Result<Vec<_>>>()?;
        // Parallel collect already preserves order; the sort pins it down.
        indexed.sort_by_key(|&(p, t, _)| (p, t));
        Ok(indexed.into_iter().map(|(_, _, row)| row).collect())
    };

    if workers == 0 {
        run()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
        pool.install(run)
    }
}

/// Per-group analog observables of a single-point, single-trial run as CSV
/// (random-matrix workloads only).
pub fn run_simulate_trace(cfg: &ExperimentConfig) -> Result<String> {
    cfg.validate()?;
    let WorkloadSpec::RandomMatrix { rows, cols, .. } = cfg.workload else {
        return Err(Error::Config(
            "trace dumps are defined for random_matrix workloads".into(),
        ));
    };
    let points = sweep_points(cfg);
    let point = &points[0];
    let seed = derive_seed3(cfg.master_seed, 0, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = device_for(cfg, point);
    let mac = mac_for(cfg, point);
    let w = gaussian_weights(rows, cols, cfg.workload.weight_bits(), &mut rng);
    let a = uniform_activations(rows, cfg.activation_bits, &mut rng);
    let enc = encode(&w, point.pipeline.encoding(), point.bits_per_cell)?;
    let layer = program_layer(&enc, &params, point.pipeline.programming(), &mut rng)?;
    let (_, traces) = matvec_traced(&layer, &a, &mac)?;

    let mut out = String::from(
        "input_bit,plane,group,row_start,row_end,active_rows,column,current,code,hrs_current,hrs_code,bias_current,bias_code\n",
    );
    for t in &traces {
        for (c, (&current, &code)) in t
            .group
            .data_currents
            .iter()
            .zip(&t.group.data_codes)
            .enumerate()
        {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{:.9e},{},{:.9e},{},{:.9e},{}\n",
                t.input_bit,
                t.plane,
                t.group.group,
                t.group.row_start,
                t.group.row_end,
                t.group.active_rows,
                c,
                current,
                code,
                t.group.hrs_current,
                t.group.hrs_code,
                t.group.bias_current,
                t.group.bias_code,
            ));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::EnergyModel;

    fn tiny_config() -> ExperimentConfig {
        ExperimentConfig {
            workload: WorkloadSpec::RandomMatrix {
                rows: 16,
                cols: 4,
                weight_bits: 8,
            },
            pipelines: vec![Pipeline::Conventional, Pipeline::Vecom],
            sigma: vec![0.0, 0.04],
            naw: vec![16],
            r_ratio: vec![300.0],
            bits_per_cell: vec![2],
            trials: 3,
            master_seed: 42,
            activation_bits: 8,
            g_max: 1.0,
            v_read: 1.0,
            analog_bias_count: false,
            energy: EnergyModel::default(),
            out: None,
        }
    }

    #[test]
    fn row_count_is_product_of_axes_trials_schemes() {
        let cfg = tiny_config();
        let rows = run_sweep(&cfg, 1).unwrap();
        // 2 pipelines x 2 sigmas x 3 trials, single-valued other axes
        assert_eq!(rows.len(), 2 * 2 * 3);
    }

    #[test]
    fn ideal_point_has_zero_rmse() {
        let mut cfg = tiny_config();
        cfg.sigma = vec![0.0];
        cfg.r_ratio = vec![1e9];
        cfg.pipelines = vec![Pipeline::Vecom];
        let rows = run_sweep(&cfg, 1).unwrap();
        assert!(rows.iter().all(|r| r.rmse == 0.0));
        assert!(rows.iter().all(|r| r.code_error_rate == 0.0));
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let cfg = tiny_config();
        let serial = run_sweep(&cfg, 1).unwrap();
        let parallel = run_sweep(&cfg, 8).unwrap();
        assert_eq!(serial, parallel);
    }

    #[test]
    fn invalid_axis_rejected_before_work() {
        let mut cfg = tiny_config();
        cfg.r_ratio = vec![0.5];
        assert!(run_sweep(&cfg, 1).is_err());
    }

    #[test]
    fn trace_has_expected_header_and_rows() {
        let mut cfg = tiny_config();
        cfg.pipelines = vec![Pipeline::Vecom];
        let trace = run_simulate_trace(&cfg).unwrap();
        let mut lines = trace.lines();
        assert!(lines.next().unwrap().starts_with("input_bit,plane,group"));
        // 8 input bits x 5 planes x 1 group x 4 columns
        assert_eq!(trace.lines().count() - 1, 8 * 5 * 4);
    }
}
