//! Thin command-line front end over the library.
//!
//! Exit codes: 0 success, 2 config/validation error, 3 I/O error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use vecom_sim::encode::{decode_planes, encode, EncodingScheme};
use vecom_sim::error::{Error, Result};
use vecom_sim::harness::{
    csv_bytes, emit_csv, parse_csv, run_simulate_trace, run_sweep, summarize, write_charts,
    ExperimentConfig, Pipeline, WorkloadSpec,
};
use vecom_sim::mat::Mat;
use vecom_sim::metrics::EnergyModel;
use vecom_sim::nn::{generate_dataset, train_reference, MlpModel};
use vecom_sim::quant::{quantize, QuantizedMatrix};

#[derive(Parser)]
#[command(
    name = "vecom",
    version,
    about = "MLC ReRAM crossbar MAC simulator: quantize, encode, simulate, sweep, nn-eval, report"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Quantize a real-valued JSON matrix to fixed point.
    Quantize {
        /// JSON file {"rows", "cols", "data": row-major floats}.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 8)]
        bit_width: u8,
        /// Produce an unsigned matrix (default is signed).
        #[arg(long)]
        unsigned: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encode a quantized weight file into digit planes.
    Encode {
        /// Quantized matrix JSON ({"rows","cols","bit_width","signed","data"}).
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "vecom")]
        scheme: String,
        #[arg(long, default_value_t = 2)]
        bits_per_cell: u8,
        #[arg(long)]
        out: PathBuf,
        /// Decode the planes back and print the clipped weights (sanity check).
        #[arg(long)]
        verify: bool,
    },
    /// Run a single sweep point on a random-matrix workload.
    Simulate {
        #[arg(long, default_value = "vecom")]
        pipeline: String,
        #[arg(long, default_value_t = 128)]
        rows: usize,
        #[arg(long, default_value_t = 16)]
        cols: usize,
        #[arg(long, default_value_t = 0.04)]
        sigma: f64,
        #[arg(long, default_value_t = 128)]
        naw: usize,
        #[arg(long, default_value_t = 300.0)]
        r_ratio: f64,
        #[arg(long, default_value_t = 2)]
        bits_per_cell: u8,
        #[arg(long, default_value_t = 8)]
        weight_bits: u8,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also dump per-group currents and codes of trial 0 as CSV.
        #[arg(long)]
        trace: bool,
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Run a config-file sweep and write the result CSV.
    Sweep {
        /// Experiment config JSON (schema documented in the library).
        #[arg(long)]
        config: PathBuf,
        /// Override the config's master_seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Result CSV path; falls back to the config's "out" field.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (0 = library default).
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Train the tiny MLP workload of a config and evaluate it on simulated
    /// crossbars.
    NnEval {
        /// Experiment config JSON with an "mlp" workload.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Optional per-trial result CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Save the trained quantized model as JSON.
        #[arg(long)]
        model_out: Option<PathBuf>,
        /// Save the generated dataset as CSV ("label, f0, f1, ...").
        #[arg(long)]
        dataset_out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Summarize a result CSV; optionally render SVG line charts.
    Report {
        #[arg(long)]
        input: PathBuf,
        /// Directory for chart files.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Render one chart per metric per swept axis.
        #[arg(long)]
        charts: bool,
    },
}

#[derive(serde::Deserialize)]
struct RealMatrixFile {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

fn run() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Quantize {
            input,
            bit_width,
            unsigned,
            out,
        } => {
            let file: RealMatrixFile = serde_json::from_str(&std::fs::read_to_string(&input)?)?;
            let reals = Mat::from_vec(file.rows, file.cols, file.data)?;
            let q = quantize(&reals, bit_width, !unsigned)?;
            q.save(&out)?;
            println!(
                "quantized {}x{} to {} bits, scale {:.6e} -> {}",
                q.rows(),
                q.cols(),
                q.bit_width,
                q.scale,
                out.display()
            );
        }
        Cmd::Encode {
            input,
            scheme,
            bits_per_cell,
            out,
            verify,
        } => {
            let q = QuantizedMatrix::load(&input)?;
            let scheme: EncodingScheme = scheme.parse()?;
            let encoded = encode(&q, scheme, bits_per_cell)?;
            std::fs::write(&out, encoded.to_json())?;
            println!(
                "{} planes (bias {}, {} clipped) -> {}",
                encoded.plane_count(),
                encoded.planes.bias,
                encoded.planes.clip_count,
                out.display()
            );
            if verify {
                let (decoded, bias) = decode_planes(&encoded)?;
                println!("decode check: bias {bias}, first weight {}", decoded[(0, 0)]);
            }
        }
        Cmd::Simulate {
            pipeline,
            rows,
            cols,
            sigma,
            naw,
            r_ratio,
            bits_per_cell,
            weight_bits,
            trials,
            seed,
            out,
            trace,
            workers,
        } => {
            let pipeline: Pipeline = pipeline.parse()?;
            let cfg = ExperimentConfig {
                workload: WorkloadSpec::RandomMatrix {
                    rows,
                    cols,
                    weight_bits,
                },
                pipelines: vec![pipeline],
                sigma: vec![sigma],
                naw: vec![naw],
                r_ratio: vec![r_ratio],
                bits_per_cell: vec![bits_per_cell],
                trials,
                master_seed: seed,
                activation_bits: 8,
                g_max: 1.0,
                v_read: 1.0,
                analog_bias_count: false,
                energy: EnergyModel::default(),
                out: None,
            };
            let results = run_sweep(&cfg, workers)?;
            let text = csv_bytes(&results)?;
            match &out {
                Some(path) => {
                    std::fs::write(path, &text)?;
                    println!("wrote {} rows -> {}", results.len(), path.display());
                }
                None => print!("{text}"),
            }
            if trace {
                let trace_text = run_simulate_trace(&cfg)?;
                let trace_path = match &out {
                    Some(path) => path.with_extension("trace.csv"),
                    None => PathBuf::from("trace.csv"),
                };
                std::fs::write(&trace_path, trace_text)?;
                println!("trace -> {}", trace_path.display());
            }
        }
        Cmd::Sweep {
            config,
            seed,
            out,
            workers,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(seed) = seed {
                cfg.master_seed = seed;
            }
            let out = out.or(cfg.out.clone()).ok_or_else(|| {
                Error::Config("no output path: pass --out or set \"out\" in the config".into())
            })?;
            let results = run_sweep(&cfg, workers)?;
            emit_csv(&results, &out)?;
            println!("wrote {} rows -> {}", results.len(), out.display());
        }
        Cmd::NnEval {
            config,
            seed,
            out,
            model_out,
            dataset_out,
            workers,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(seed) = seed {
                cfg.master_seed = seed;
            }
            if !cfg.workload.is_mlp() {
                return Err(Error::Config(
                    "nn-eval needs a config with an mlp workload".into(),
                ));
            }
            if model_out.is_some() || dataset_out.is_some() {
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
                    unreachable!()
                };
                let data =
                    generate_dataset(classes, feature_dim, train_samples + test_samples, data_seed)?;
                if let Some(path) = &dataset_out {
                    data.save(path)?;
                    println!("dataset -> {}", path.display());
                }
                if let Some(path) = &model_out {
                    let (train, _) = data.split(train_samples)?;
                    let model: MlpModel =
                        train_reference(&train, hidden_dims, epochs, train_seed, weight_bits)?;
                    model.save(path)?;
                    println!("model -> {}", path.display());
                }
            }
            let results = run_sweep(&cfg, workers)?;
            let table = parse_csv(&csv_bytes(&results)?)?;
            print!("{}", summarize(&table)?);
            if let Some(path) = &out {
                emit_csv(&results, path)?;
                println!("wrote {} rows -> {}", results.len(), path.display());
            }
        }
        Cmd::Report {
            input,
            out_dir,
            charts,
        } => {
            let table = parse_csv(&std::fs::read_to_string(&input)?)?;
            let summary = summarize(&table)?;
            print!("{summary}");
            if let Some(dir) = &out_dir {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join("summary.txt"), &summary)?;
                if charts {
                    let written = write_charts(&table, dir)?;
                    println!("{} charts -> {}", written.len(), dir.display());
                }
            } else if charts {
                return Err(Error::Config("--charts needs --out-dir".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    // Die quietly when a downstream pipe closes (vecom report | head).
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
