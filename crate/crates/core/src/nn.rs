//! Tiny fully-connected network inference mapped onto simulated crossbars,
//! with a synthetic blob dataset and a minimal float reference trainer.
//!
//! The quantized software pipeline (integer matmul, ReLU, static requantize)
//! is the oracle the hardware path is checked against: at zero variation and
//! negligible HRS leakage the two produce identical integer logits.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::device::{DeviceParams, ProgrammingScheme};
use crate::encode::{encode, EncodingScheme};
use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::metrics::{mac_error_stats, mean, std_dev, ErrorStats};
use crate::quant::{quantize, ActivationVector, QuantizedMatrix};
use crate::seed::derive_seed2;
use crate::xbar::{matvec, program_layer, MacConfig};

/// Per-class blob spread of the synthetic dataset.
const BLOB_SIGMA: f64 = 0.05;
/// Class centers are placed at least this far apart (6 sigma).
const MIN_CENTER_DIST: f64 = 6.0 * BLOB_SIGMA;

/// Labeled feature vectors in `[0, 1]^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub feature_dim: usize,
    pub class_count: usize,
    pub generator_seed: u64,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// 8-bit activations for one sample.
    pub fn quantized_sample(&self, i: usize) -> ActivationVector {
        let values = self.features[i]
            .iter()
            .map(|&f| (f * 255.0).round() as u8)
            .collect();
        ActivationVector::new(values, 8).expect("features are clamped to [0, 1]")
    }

    /// Splits off the first `n` samples (generation interleaves classes, so
    /// both halves stay balanced).
    pub fn split(&self, n: usize) -> Result<(Dataset, Dataset)> {
        if n == 0 || n >= self.len() {
            return Err(Error::Validation(format!(
                "split point {n} outside (0, {})",
                self.len()
            )));
        }
        let head = Dataset {
            features: self.features[..n].to_vec(),
            labels: self.labels[..n].to_vec(),
            ..self.clone()
        };
        let tail = Dataset {
            features: self.features[n..].to_vec(),
            labels: self.labels[n..].to_vec(),
            ..self.clone()
        };
        Ok((head, tail))
    }

    /// Writes `label, f0, f1, ...` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (feat, &label) in self.features.iter().zip(&self.labels) {
            out.push_str(&label.to_string());
            for f in feat {
                out.push(',');
                out.push_str(&f.to_string());
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Dataset> {
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let label: usize = fields
                .next()
                .unwrap()
                .trim()
                .parse()
                .map_err(|_| Error::Validation(format!("bad label on line {}", lineno + 1)))?;
            let feat: Vec<f64> = fields
                .map(|f| {
                    f.trim().parse().map_err(|_| {
                        Error::Validation(format!("bad feature on line {}", lineno + 1))
                    })
                })
                .collect::<Result<_>>()?;
            labels.push(label);
            features.push(feat);
        }
        if features.is_empty() {
            return Err(Error::Validation("dataset file has no rows".into()));
        }
        let feature_dim = features[0].len();
        if features.iter().any(|f| f.len() != feature_dim) {
            return Err(Error::Validation("ragged dataset rows".into()));
        }
        let class_count = labels.iter().max().unwrap() + 1;
        Ok(Dataset {
            features,
            labels,
            feature_dim,
            class_count,
            generator_seed: 0,
        })
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Dataset> {
        Self::from_csv(&std::fs::read_to_string(path)?)
    }
}

/// Deterministic Gaussian blobs, one per class, features scaled to `[0, 1]`.
pub fn generate_dataset(classes: usize, dim: usize, n: usize, seed: u64) -> Result<Dataset> {
    if classes < 2 {
        return Err(Error::Validation(format!("classes = {classes} must be >= 2")));
    }
    if dim < 2 {
        return Err(Error::Validation(format!("dim = {dim} must be >= 2")));
    }
    if n < classes {
        return Err(Error::Validation(format!(
            "n = {n} must be >= classes = {classes}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(classes);
    let mut attempts = 0;
    while centers.len() < classes {
        let cand: Vec<f64> = (0..dim).map(|_| rng.random_range(0.2..0.8)).collect();
        let ok = centers.iter().all(|c| {
            let d2: f64 = c.iter().zip(&cand).map(|(a, b)| (a - b) * (a - b)).sum();
            d2.sqrt() >= MIN_CENTER_DIST
        });
        if ok {
            centers.push(cand);
        }
        attempts += 1;
        if attempts > 10_000 {
            return Err(Error::Validation(format!(
                "could not place {classes} class centers {MIN_CENTER_DIST} apart in [0,1]^{dim}"
            )));
        }
    }
    let mut features = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % classes;
        let feat: Vec<f64> = centers[class]
            .iter()
            .map(|&c| {
                let z: f64 = rng.sample(StandardNormal);
                (c + BLOB_SIGMA * z).clamp(0.0, 1.0)
            })
            .collect();
        features.push(feat);
        labels.push(class);
    }
    Ok(Dataset {
        features,
        labels,
        feature_dim: dim,
        class_count: classes,
        generator_seed: seed,
    })
}

/// Float MLP with ReLU hidden layers; layer matrices are (in x out).
#[derive(Debug, Clone)]
pub struct FloatMlp {
    pub weights: Vec<Mat<f64>>,
}

impl FloatMlp {
    /// Activations entering each layer for one sample; last entry is the
    /// logit vector.
    fn forward_trace(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = vec![x.to_vec()];
        for (l, w) in self.weights.iter().enumerate() {
            let input = acts.last().unwrap();
            let mut z = vec![0.0; w.cols()];
            for (r, &h) in input.iter().enumerate() {
                if h == 0.0 {
                    continue;
                }
                for (c, zc) in z.iter_mut().enumerate() {
                    *zc += w[(r, c)] * h;
                }
            }
            if l + 1 < self.weights.len() {
                for zc in &mut z {
                    *zc = zc.max(0.0);
                }
            }
            acts.push(z);
        }
        acts
    }

    pub fn logits(&self, x: &[f64]) -> Vec<f64> {
        self.forward_trace(x).pop().unwrap()
    }

    pub fn accuracy(&self, data: &Dataset) -> f64 {
        let correct = data
            .features
            .iter()
            .zip(&data.labels)
            .filter(|(x, &label)| argmax_f64(&self.logits(x)) == label)
            .count();
        correct as f64 / data.len() as f64
    }
}

fn argmax_f64(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

fn argmax_i64(xs: &[i64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// Full-batch gradient descent with softmax cross-entropy, fixed learning
/// rate, deterministic per seed.
pub fn train_float(
    data: &Dataset,
    hidden_dims: &[usize],
    epochs: usize,
    seed: u64,
) -> Result<FloatMlp> {
    let mut dims = vec![data.feature_dim];
    dims.extend_from_slice(hidden_dims);
    dims.push(data.class_count);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights: Vec<Mat<f64>> = dims
        .windows(2)
        .map(|d| {
            let limit = (6.0 / (d[0] + d[1]) as f64).sqrt();
            Mat::from_fn(d[0], d[1], |_, _| rng.random_range(-limit..limit))
        })
        .collect();

    let n = data.len() as f64;
    let lr = 0.5;
    for epoch in 0..epochs {
        let mut grads: Vec<Mat<f64>> = weights
            .iter()
            .map(|w| Mat::zeros(w.rows(), w.cols()))
            .collect();
        let mut loss = 0.0;
        let model = FloatMlp {
            weights: weights.clone(),
        };
        for (x, &label) in data.features.iter().zip(&data.labels) {
            let acts = model.forward_trace(x);
            let logits = acts.last().unwrap();
            let max = logits.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
            let exps: Vec<f64> = logits.iter().map(|&v| (v - max).exp()).collect();
            let sum: f64 = exps.iter().sum();
            loss -= (exps[label] / sum).ln();

            // delta at the output, then backpropagate through ReLU.
            let mut delta: Vec<f64> = exps
                .iter()
                .enumerate()
                .map(|(c, &e)| e / sum - f64::from(u8::from(c == label)))
                .collect();
            for l in (0..weights.len()).rev() {
                let input = &acts[l];
                for (r, &h) in input.iter().enumerate() {
                    if h == 0.0 {
                        continue;
                    }
                    for (c, &d) in delta.iter().enumerate() {
                        grads[l][(r, c)] += h * d;
                    }
                }
                if l > 0 {
                    let mut prev = vec![0.0; weights[l].rows()];
                    for (r, p) in prev.iter_mut().enumerate() {
                        if acts[l][r] > 0.0 {
                            *p = delta
                                .iter()
                                .enumerate()
                                .map(|(c, &d)| weights[l][(r, c)] * d)
                                .sum();
                        }
                    }
                    delta = prev;
                }
            }
        }
        if !loss.is_finite() {
            return Err(Error::Validation(format!(
                "training diverged: non-finite loss at epoch {epoch}"
            )));
        }
        for (w, g) in weights.iter_mut().zip(&grads) {
            for r in 0..w.rows() {
                for c in 0..w.cols() {
                    w[(r, c)] -= lr * g[(r, c)] / n;
                }
            }
        }
    }
    Ok(FloatMlp { weights })
}

/// Quantized model: per-layer int weights plus the static activation scales
/// captured from the float model on the training data.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub layers: Vec<QuantizedMatrix>,
    /// `activation_scales[l]` is the real value of one activation LSB
    /// entering layer `l`.
    pub activation_scales: Vec<f64>,
    pub input_dim: usize,
    pub class_count: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelFileLayer {
    rows: usize,
    cols: usize,
    bit_width: u8,
    signed: bool,
    scale: f64,
    data: Vec<i32>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    input_dim: usize,
    class_count: usize,
    activation_scales: Vec<f64>,
    layers: Vec<ModelFileLayer>,
}

impl MlpModel {
    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    /// Integer-to-integer rescale factor between layer `l`'s MAC output and
    /// layer `l + 1`'s activation grid.
    pub fn requant_factor(&self, l: usize) -> f64 {
        self.layers[l].scale * self.activation_scales[l] / self.activation_scales[l + 1]
    }

    /// Software forward pass on the integer pipeline; `clip_floor` mirrors
    /// the encoding clip so tests isolate analog effects.
    pub fn forward_quantized(&self, x: &ActivationVector, clip_floor: Option<i32>) -> Vec<i64> {
        let mut acts = x.values.clone();
        for (l, layer) in self.layers.iter().enumerate() {
            let mut mac = vec![0i64; layer.cols()];
            for (r, &a) in acts.iter().enumerate() {
                if a == 0 {
                    continue;
                }
                for (c, m) in mac.iter_mut().enumerate() {
                    let mut w = layer.values[(r, c)];
                    if let Some(floor) = clip_floor {
                        w = w.max(floor);
                    }
                    *m += i64::from(w) * i64::from(a);
                }
            }
            if l + 1 == self.layers.len() {
                return mac;
            }
            acts = self.requantize(l, &mac);
        }
        unreachable!("model has at least one layer")
    }

    /// ReLU then static rescale onto the next layer's 8-bit grid.
    pub fn requantize(&self, l: usize, mac: &[i64]) -> Vec<u8> {
        let factor = self.requant_factor(l);
        mac.iter()
            .map(|&m| ((m.max(0) as f64 * factor).round().clamp(0.0, 255.0)) as u8)
            .collect()
    }

    pub fn accuracy_software(&self, data: &Dataset, encoding: EncodingScheme) -> f64 {
        let floor = clip_floor_for(encoding, &self.layers);
        let correct = (0..data.len())
            .filter(|&i| {
                let logits = self.forward_quantized(&data.quantized_sample(i), floor);
                argmax_i64(&logits) == data.labels[i]
            })
            .count();
        correct as f64 / data.len() as f64
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            input_dim: self.input_dim,
            class_count: self.class_count,
            activation_scales: self.activation_scales.clone(),
            layers: self
                .layers
                .iter()
                .map(|l| ModelFileLayer {
                    rows: l.rows(),
                    cols: l.cols(),
                    bit_width: l.bit_width,
                    signed: l.signed,
                    scale: l.scale,
                    data: l.values.as_slice().to_vec(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("model serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.layers.is_empty() {
            return Err(Error::Validation("model file has no layers".into()));
        }
        if file.activation_scales.len() != file.layers.len() + 1 {
            return Err(Error::Validation(
                "model file needs layers + 1 activation scales".into(),
            ));
        }
        let layers = file
            .layers
            .into_iter()
            .map(|l| {
                QuantizedMatrix::new(
                    Mat::from_vec(l.rows, l.cols, l.data)?,
                    l.bit_width,
                    l.signed,
                    l.scale,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MlpModel {
            input_dim: layers[0].rows(),
            class_count: layers.last().unwrap().cols(),
            activation_scales: file.activation_scales,
            layers,
        })
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Clip floor the encoding imposes on the weights (the software oracle
/// applies the same floor).
pub fn clip_floor_for(encoding: EncodingScheme, layers: &[QuantizedMatrix]) -> Option<i32> {
    match encoding {
        EncodingScheme::Conventional => None,
        EncodingScheme::Vecom => Some(EncodingScheme::Vecom.clip_floor(layers[0].bit_width)),
    }
}

/// Quantizes a float model and captures per-layer activation scales from
/// its response to the training data.
pub fn quantize_model(float: &FloatMlp, data: &Dataset, weight_bits: u8) -> Result<MlpModel> {
    let layers = float
        .weights
        .iter()
        .map(|w| quantize(w, weight_bits, true))
        .collect::<Result<Vec<_>>>()?;

    // Input features live on the [0, 1] / 255 grid.
    let mut scales = vec![1.0 / 255.0];
    for l in 1..float.weights.len() {
        let mut peak = 0.0f64;
        for x in &data.features {
            let acts = float.forward_trace(x);
            peak = acts[l].iter().fold(peak, |m, &v| m.max(v));
        }
        scales.push(if peak > 0.0 { peak / 255.0 } else { 1.0 / 255.0 });
    }
    scales.push(1.0); // logits are consumed as raw integers

    Ok(MlpModel {
        input_dim: data.feature_dim,
        class_count: data.class_count,
        activation_scales: scales,
        layers,
    })
}

/// Trains the float reference and quantizes it.
pub fn train_reference(
    data: &Dataset,
    hidden_dims: &[usize],
    epochs: usize,
    seed: u64,
    weight_bits: u8,
) -> Result<MlpModel> {
    let float = train_float(data, hidden_dims, epochs, seed)?;
    quantize_model(&float, data, weight_bits)
}

/// Accuracy over Monte-Carlo variation trials.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyStats {
    pub per_trial: Vec<f64>,
    pub mean: f64,
    pub std_dev: f64,
}

/// One trial's evaluation through the crossbar pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialEval {
    pub accuracy: f64,
    /// Final-layer logit error against the software oracle.
    pub logit_stats: ErrorStats,
    pub saturations: u64,
    pub xbar_energy: f64,
    pub conversions: u64,
    pub adc_bits: u8,
    pub clip_count: u64,
}

/// Programs every layer once with `rng`, then runs the whole dataset.
#[allow(clippy::too_many_arguments)]
pub fn infer_sim_trial<R: Rng + ?Sized>(
    model: &MlpModel,
    data: &Dataset,
    encoding: EncodingScheme,
    params: &DeviceParams,
    programming: ProgrammingScheme,
    mac: &MacConfig,
    rng: &mut R,
) -> Result<TrialEval> {
    if data.feature_dim != model.input_dim {
        return Err(Error::Dimension(format!(
            "dataset dim {} != model input dim {}",
            data.feature_dim, model.input_dim
        )));
    }
    let mut clip_count = 0;
    let mut layers = Vec::with_capacity(model.layer_count());
    for q in &model.layers {
        let enc = encode(q, encoding, params.bits_per_cell)?;
        clip_count += enc.planes.clip_count;
        layers.push(program_layer(&enc, params, programming, rng)?);
    }

    let floor = clip_floor_for(encoding, &model.layers);
    let mut correct = 0usize;
    let mut sim_logits = Vec::with_capacity(data.len() * model.class_count);
    let mut oracle_logits = Vec::with_capacity(data.len() * model.class_count);
    let mut saturations = 0u64;
    let mut xbar_energy = 0.0;
    let mut conversions = 0u64;
    let mut adc_bits = 0u8;

    for i in 0..data.len() {
        let mut acts = data.quantized_sample(i);
        let mut logits = Vec::new();
        for (l, layer) in layers.iter().enumerate() {
            let out = matvec(layer, &acts, mac)?;
            saturations += out.saturations;
            xbar_energy += out.xbar_energy;
            conversions += out.conversions;
            adc_bits = out.adc_bits;
            if l + 1 == layers.len() {
                logits = out.values;
            } else {
                acts = ActivationVector::new(model.requantize(l, &out.values), 8)?;
            }
        }
        if argmax_i64(&logits) == data.labels[i] {
            correct += 1;
        }
        sim_logits.extend_from_slice(&logits);
        oracle_logits.extend(model.forward_quantized(&data.quantized_sample(i), floor));
    }

    Ok(TrialEval {
        accuracy: correct as f64 / data.len() as f64,
        logit_stats: mac_error_stats(&sim_logits, &oracle_logits)?,
        saturations,
        xbar_energy,
        conversions,
        adc_bits,
        clip_count,
    })
}

/// Monte-Carlo accuracy: variation is resampled per trial from seeds
/// derived off `master_seed`.
#[allow(clippy::too_many_arguments)]
pub fn infer_sim(
    model: &MlpModel,
    data: &Dataset,
    encoding: EncodingScheme,
    params: &DeviceParams,
    programming: ProgrammingScheme,
    mac: &MacConfig,
    trials: usize,
    master_seed: u64,
) -> Result<AccuracyStats> {
    if trials == 0 {
        return Err(Error::Validation("trials must be >= 1".into()));
    }
    let mut per_trial = Vec::with_capacity(trials);
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed2(master_seed, t as u64));
        let eval = infer_sim_trial(model, data, encoding, params, programming, mac, &mut rng)?;
        per_trial.push(eval.accuracy);
    }
    Ok(AccuracyStats {
        mean: mean(&per_trial),
        std_dev: std_dev(&per_trial),
        per_trial,
    })
}
