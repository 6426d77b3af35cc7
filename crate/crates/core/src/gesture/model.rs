//! Feed-forward gesture classifier: ReLU hidden layers, softmax output,
//! trained with mini-batch Adam on cross-entropy.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{extract_features, FeatureVector, GestureClass, GestureDataset, Sample, Split};
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;
const MODEL_FORMAT_NAME: &str = "dronepaint-gesture-model";

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            hidden: vec![64, 32],
            epochs: 100,
            batch_size: 32,
            learning_rate: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    pub seed: u64,
    pub hyper: Hyperparams,
    /// Mean cross-entropy over each epoch's mini-batches.
    pub train_loss: Vec<f64>,
    /// Held-out cross-entropy after each epoch; empty without a test split.
    pub test_loss: Vec<f64>,
    /// Set when the training split held fewer than two classes.
    pub degenerate_training: bool,
    /// Seed of the synthetic dataset the model was trained on, when known.
    #[serde(default)]
    pub dataset_seed: Option<u64>,
}

/// Fully connected layer; `weights` is `outputs x inputs`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl DenseLayer {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
        }
    }

    fn forward_into(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(
            self.weights
                .chunks_exact(self.inputs)
                .zip(&self.biases)
                .map(|(row, b)| b + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()),
        );
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GestureModel {
    pub format: String,
    pub version: u32,
    pub layers: Vec<DenseLayer>,
    /// Per-feature standardization applied before the first layer.
    pub input_mean: Vec<f64>,
    pub input_scale: Vec<f64>,
    pub metadata: TrainingMetadata,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub class: GestureClass,
    pub confidence: f64,
    pub probabilities: [f64; GestureClass::COUNT],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub accuracy: f64,
    pub total: usize,
    /// `confusion[true][predicted]`
    pub confusion: [[usize; GestureClass::COUNT]; GestureClass::COUNT],
}

impl GestureModel {
    /// Assembles a model from explicit layers with identity input scaling.
    pub fn from_layers(layers: Vec<DenseLayer>, metadata: TrainingMetadata) -> Result<Self> {
        let width = layers
            .first()
            .map(|l| l.inputs)
            .ok_or_else(|| Error::Model("model has no layers".into()))?;
        let model = Self {
            format: MODEL_FORMAT_NAME.to_string(),
            version: MODEL_FORMAT_VERSION,
            layers,
            input_mean: vec![0.0; width],
            input_scale: vec![1.0; width],
            metadata,
        };
        model.check()?;
        Ok(model)
    }

    pub fn input_width(&self) -> usize {
        self.layers.first().map_or(0, |l| l.inputs)
    }

    fn check(&self) -> Result<()> {
        if self.format != MODEL_FORMAT_NAME {
            return Err(Error::Model(format!("unknown model format '{}'", self.format)));
        }
        if self.version != MODEL_FORMAT_VERSION {
            return Err(Error::Model(format!(
                "unsupported model version {} (expected {MODEL_FORMAT_VERSION})",
                self.version
            )));
        }
        let Some(last) = self.layers.last() else {
            return Err(Error::Model("model has no layers".into()));
        };
        if last.outputs != GestureClass::COUNT {
            return Err(Error::Model(format!(
                "output width {} != {}",
                last.outputs,
                GestureClass::COUNT
            )));
        }
        for (i, l) in self.layers.iter().enumerate() {
            if l.weights.len() != l.inputs * l.outputs || l.biases.len() != l.outputs {
                return Err(Error::Model(format!("layer {i} has inconsistent shape")));
            }
            if i > 0 && self.layers[i - 1].outputs != l.inputs {
                return Err(Error::Model(format!("layer {i} input width mismatch")));
            }
            if l.weights.iter().chain(&l.biases).any(|w| !w.is_finite()) {
                return Err(Error::Model(format!("layer {i} has non-finite weights")));
            }
        }
        let w = self.input_width();
        if self.input_mean.len() != w || self.input_scale.len() != w {
            return Err(Error::Model("input scaling width mismatch".into()));
        }
        Ok(())
    }

    /// Raw output-layer activations.
    pub fn logits(&self, features: &FeatureVector) -> Result<Vec<f64>> {
        if features.len() != self.input_width() {
            return Err(Error::Model(format!(
                "feature width {} != model input width {}",
                features.len(),
                self.input_width()
            )));
        }
        let mut x = self.standardize(features.as_slice());
        let mut out = Vec::new();
        for (i, layer) in self.layers.iter().enumerate() {
            layer.forward_into(&x, &mut out);
            if i + 1 < self.layers.len() {
                out.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            std::mem::swap(&mut x, &mut out);
        }
        Ok(x)
    }

    fn standardize(&self, raw: &[f64]) -> Vec<f64> {
        raw.iter()
            .zip(&self.input_mean)
            .zip(&self.input_scale)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }

    /// SHA-256 over every weight and bias, little-endian, layer order.
    pub fn weights_checksum(&self) -> String {
        let mut h = Sha256::new();
        for l in &self.layers {
            for v in l.weights.iter().chain(&l.biases) {
                h.update(v.to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses a model document, rejecting unknown formats and versions.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value.get("version").and_then(|v| v.as_u64()) {
            Some(v) if v == MODEL_FORMAT_VERSION as u64 => {}
            Some(v) => {
                return Err(Error::Model(format!(
                    "unsupported model version {v} (expected {MODEL_FORMAT_VERSION})"
                )))
            }
            None => return Err(Error::Model("model document has no version".into())),
        }
        let model: GestureModel = serde_json::from_value(value).map_err(|e| Error::Model(e.to_string()))?;
        model.check()?;
        Ok(model)
    }
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

pub fn classify(model: &GestureModel, features: &FeatureVector) -> Result<Classification> {
    let probs = softmax(&model.logits(features)?);
    let mut best = 0;
    for (i, p) in probs.iter().enumerate() {
        if *p > probs[best] {
            best = i;
        }
    }
    let mut probabilities = [0.0; GestureClass::COUNT];
    probabilities.copy_from_slice(&probs);
    Ok(Classification {
        class: GestureClass::from_index(best).expect("output width is 8"),
        confidence: probs[best],
        probabilities,
    })
}

pub fn evaluate<'a>(model: &GestureModel, samples: impl IntoIterator<Item = &'a Sample>) -> Result<Evaluation> {
    let mut confusion = [[0usize; GestureClass::COUNT]; GestureClass::COUNT];
    let mut total = 0;
    for s in samples {
        let pred = classify(model, &extract_features(&s.frame)?)?;
        confusion[s.label.index()][pred.class.index()] += 1;
        total += 1;
    }
    if total == 0 {
        return Err(Error::config("evaluation split is empty"));
    }
    let correct: usize = (0..GestureClass::COUNT).map(|i| confusion[i][i]).sum();
    Ok(Evaluation {
        accuracy: correct as f64 / total as f64,
        total,
        confusion,
    })
}

struct Adam {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    step: i32,
}

/// Per-layer forward activations kept for backprop.
struct Trace {
    /// `acts[0]` is the standardized input, `acts[l + 1]` the output of layer `l`
    /// (post-ReLU for hidden layers, logits for the last).
    acts: Vec<Vec<f64>>,
}

fn forward_trace(layers: &[DenseLayer], input: &[f64], trace: &mut Trace) {
    trace.acts[0].clear();
    trace.acts[0].extend_from_slice(input);
    for (l, layer) in layers.iter().enumerate() {
        let (prev, rest) = trace.acts.split_at_mut(l + 1);
        layer.forward_into(&prev[l], &mut rest[0]);
        if l + 1 < layers.len() {
            rest[0].iter_mut().for_each(|v| *v = v.max(0.0));
        }
    }
}

fn cross_entropy(logits: &[f64], label: usize) -> f64 {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
    lse - logits[label]
}

fn mean_loss(layers: &[DenseLayer], xs: &[Vec<f64>], ys: &[usize]) -> f64 {
    let mut trace = Trace {
        acts: vec![Vec::new(); layers.len() + 1],
    };
    let total: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            forward_trace(layers, x, &mut trace);
            cross_entropy(&trace.acts[layers.len()], *y)
        })
        .sum();
    total / xs.len() as f64
}

fn features_of<'a>(samples: impl Iterator<Item = &'a Sample>) -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for s in samples {
        xs.push(extract_features(&s.frame)?.as_slice().to_vec());
        ys.push(s.label.index());
    }
    Ok((xs, ys))
}

pub fn train_classifier(data: &GestureDataset, hyper: &Hyperparams, seed: u64) -> Result<GestureModel> {
    if hyper.epochs == 0 || hyper.batch_size == 0 {
        return Err(Error::config("epochs and batch_size must be > 0"));
    }
    if !(hyper.learning_rate > 0.0) {
        return Err(Error::config("learning_rate must be > 0"));
    }
    if hyper.hidden.contains(&0) {
        return Err(Error::config("hidden layer widths must be > 0"));
    }
    let (train_x, train_y) = features_of(data.split(Split::Train))?;
    if train_x.is_empty() {
        return Err(Error::config("training split is empty"));
    }
    let (test_x, test_y) = features_of(data.split(Split::Test))?;
    let mut seen = [false; GestureClass::COUNT];
    train_y.iter().for_each(|y| seen[*y] = true);
    let degenerate = seen.iter().filter(|s| **s).count() < 2;

    let width = train_x[0].len();
    let n = train_x.len() as f64;
    let mut mean = vec![0.0; width];
    for x in &train_x {
        mean.iter_mut().zip(x).for_each(|(m, v)| *m += v / n);
    }
    let mut scale = vec![0.0; width];
    for x in &train_x {
        scale
            .iter_mut()
            .zip(x.iter().zip(&mean))
            .for_each(|(s, (v, m))| *s += (v - m) * (v - m) / n);
    }
    scale
        .iter_mut()
        .for_each(|s| *s = if *s > 1e-16 { s.sqrt() } else { 1.0 });
    let standardize = |xs: &[Vec<f64>]| -> Vec<Vec<f64>> {
        xs.iter()
            .map(|x| x.iter().zip(&mean).zip(&scale).map(|((v, m), s)| (v - m) / s).collect())
            .collect()
    };
    let train_x = standardize(&train_x);
    let test_x = standardize(&test_x);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut widths = vec![width];
    widths.extend(&hyper.hidden);
    widths.push(GestureClass::COUNT);
    let mut layers: Vec<DenseLayer> = widths
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let (fan_in, fan_out) = (w[0], w[1]);
            let last = i + 2 == widths.len();
            // He for ReLU layers, Glorot for the softmax layer
            let limit = if last {
                (6.0 / (fan_in + fan_out) as f64).sqrt()
            } else {
                (6.0 / fan_in as f64).sqrt()
            };
            let mut layer = DenseLayer::zeros(fan_in, fan_out);
            layer.weights.iter_mut().for_each(|w| *w = rng.gen_range(-limit..limit));
            layer
        })
        .collect();

    let n_layers = layers.len();
    let mut adam = Adam {
        m: layers
            .iter()
            .map(|l| vec![0.0; l.weights.len() + l.biases.len()])
            .collect(),
        v: layers
            .iter()
            .map(|l| vec![0.0; l.weights.len() + l.biases.len()])
            .collect(),
        step: 0,
    };
    let mut grads: Vec<Vec<f64>> = adam.m.iter().map(|m| vec![0.0; m.len()]).collect();
    let mut trace = Trace {
        acts: vec![Vec::new(); n_layers + 1],
    };
    let mut deltas: Vec<Vec<f64>> = widths.iter().map(|w| vec![0.0; *w]).collect();
    let mut order: Vec<usize> = (0..train_x.len()).collect();
    let mut train_loss = Vec::with_capacity(hyper.epochs);
    let mut test_loss = Vec::with_capacity(hyper.epochs);

    for _epoch in 0..hyper.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(hyper.batch_size) {
            grads.iter_mut().for_each(|g| g.iter_mut().for_each(|v| *v = 0.0));
            for &idx in batch {
                forward_trace(&layers, &train_x[idx], &mut trace);
                let label = train_y[idx];
                let logits = &trace.acts[n_layers];
                epoch_loss += cross_entropy(logits, label);
                let probs = softmax(logits);
                let out_delta = &mut deltas[n_layers];
                out_delta.copy_from_slice(&probs);
                out_delta[label] -= 1.0;

                for l in (0..n_layers).rev() {
                    let layer = &layers[l];
                    let (lower, upper) = deltas.split_at_mut(l + 1);
                    let delta = &upper[0];
                    let input = &trace.acts[l];
                    let g = &mut grads[l];
                    let (gw, gb) = g.split_at_mut(layer.weights.len());
                    for (o, d) in delta.iter().enumerate() {
                        if *d == 0.0 {
                            continue;
                        }
                        gb[o] += d;
                        gw[o * layer.inputs..(o + 1) * layer.inputs]
                            .iter_mut()
                            .zip(input)
                            .for_each(|(gw, x)| *gw += d * x);
                    }
                    if l > 0 {
                        let prev = &mut lower[l];
                        prev.iter_mut().for_each(|v| *v = 0.0);
                        for (o, d) in delta.iter().enumerate() {
                            if *d == 0.0 {
                                continue;
                            }
                            prev.iter_mut()
                                .zip(&layer.weights[o * layer.inputs..(o + 1) * layer.inputs])
                                .for_each(|(p, w)| *p += w * d);
                        }
                        // ReLU gate: post-activation of layer l-1 is zero where inactive
                        prev.iter_mut().zip(input).for_each(|(p, a)| {
                            if *a <= 0.0 {
                                *p = 0.0
                            }
                        });
                    }
                }
            }

            adam.step += 1;
            let bias1 = 1.0 - ADAM_BETA1.powi(adam.step);
            let bias2 = 1.0 - ADAM_BETA2.powi(adam.step);
            let inv_batch = 1.0 / batch.len() as f64;
            for (l, layer) in layers.iter_mut().enumerate() {
                let nw = layer.weights.len();
                let params = layer.weights.iter_mut().chain(layer.biases.iter_mut());
                for (((p, g), m), v) in params
                    .zip(&grads[l])
                    .zip(adam.m[l].iter_mut())
                    .zip(adam.v[l].iter_mut())
                {
                    let g = g * inv_batch;
                    *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
                    *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
                    let m_hat = *m / bias1;
                    let v_hat = *v / bias2;
                    *p -= hyper.learning_rate * m_hat / (v_hat.sqrt() + ADAM_EPS);
                }
                debug_assert_eq!(nw + layer.biases.len(), grads[l].len());
            }
        }
        train_loss.push(epoch_loss / train_x.len() as f64);
        if !test_x.is_empty() {
            test_loss.push(mean_loss(&layers, &test_x, &test_y));
        }
    }

    let model = GestureModel {
        format: MODEL_FORMAT_NAME.to_string(),
        version: MODEL_FORMAT_VERSION,
        layers,
        input_mean: mean,
        input_scale: scale,
        metadata: TrainingMetadata {
            seed,
            hyper: hyper.clone(),
            train_loss,
            test_loss,
            degenerate_training: degenerate,
            dataset_seed: None,
        },
    };
    model.check()?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gesture::{canonical_pose, synth_dataset, ClassCount, DatasetSpec, FEATURE_LEN};

    fn meta() -> TrainingMetadata {
        TrainingMetadata {
            seed: 0,
            hyper: Hyperparams::default(),
            train_loss: vec![],
            test_loss: vec![],
            degenerate_training: false,
            dataset_seed: None,
        }
    }

    fn bias_only_model(biases: [f64; 8]) -> GestureModel {
        let mut out = DenseLayer::zeros(FEATURE_LEN, 8);
        out.biases = biases.to_vec();
        GestureModel::from_layers(vec![out], meta()).unwrap()
    }

    fn small_spec(per_class: usize) -> DatasetSpec {
        DatasetSpec {
            classes: GestureClass::ALL
                .iter()
                .map(|c| ClassCount {
                    class: c.name().into(),
                    count: per_class,
                })
                .collect(),
            ..DatasetSpec::default()
        }
    }

    fn quick_hyper() -> Hyperparams {
        Hyperparams {
            epochs: 15,
            ..Hyperparams::default()
        }
    }

    #[test]
    fn uniform_logits_give_one_eighth() {
        let m = bias_only_model([0.0; 8]);
        let f = extract_features(&canonical_pose(GestureClass::Okay)).unwrap();
        let c = classify(&m, &f).unwrap();
        assert_eq!(c.class, GestureClass::One, "ties go to the lowest index");
        assert!((c.confidence - 0.125).abs() < 1e-15);
        assert!((c.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn logit_shift_does_not_change_argmax() {
        let base = [0.3, -1.0, 2.5, 0.0, 1.0, -0.5, 2.4, 0.1];
        let shifted = base.map(|b| b + 17.0);
        let f = extract_features(&canonical_pose(GestureClass::Two)).unwrap();
        let a = classify(&bias_only_model(base), &f).unwrap();
        let b = classify(&bias_only_model(shifted), &f).unwrap();
        assert_eq!(a.class, GestureClass::Three);
        assert_eq!(a.class, b.class);
        assert!((a.confidence - b.confidence).abs() < 1e-12);
    }

    #[test]
    fn width_mismatch_is_model_error() {
        let m = bias_only_model([0.0; 8]);
        let short = FeatureVector::from_values(vec![0.0; 10]);
        assert!(matches!(classify(&m, &short), Err(Error::Model(_))));
    }

    #[test]
    fn always_one_model_scores_one_eighth() {
        let mut b = [0.0; 8];
        b[0] = 5.0;
        let m = bias_only_model(b);
        let data = synth_dataset(&small_spec(5), 1).unwrap();
        let e = evaluate(&m, &data.samples).unwrap();
        assert!((e.accuracy - 0.125).abs() < 1e-15);
        for (i, row) in e.confusion.iter().enumerate() {
            assert_eq!(row.iter().sum::<usize>(), 5, "row {i}");
            assert_eq!(row[0], 5);
        }
    }

    #[test]
    fn evaluate_empty_is_config_error() {
        let m = bias_only_model([0.0; 8]);
        assert!(matches!(evaluate(&m, &[]), Err(Error::Config(_))));
    }

    #[test]
    fn training_is_reproducible_and_learns() {
        let data = synth_dataset(&small_spec(60), 5).unwrap();
        let a = train_classifier(&data, &quick_hyper(), 11).unwrap();
        let b = train_classifier(&data, &quick_hyper(), 11).unwrap();
        assert_eq!(a.weights_checksum(), b.weights_checksum());
        assert_eq!(a.metadata.train_loss, b.metadata.train_loss);
        let c = train_classifier(&data, &quick_hyper(), 12).unwrap();
        assert_ne!(a.weights_checksum(), c.weights_checksum());
        let first = a.metadata.train_loss[0];
        let last = *a.metadata.train_loss.last().unwrap();
        assert!(last < first * 0.5, "loss {first} -> {last}");
        assert_eq!(a.metadata.test_loss.len(), 15);
        let e = evaluate(&a, data.split(Split::Test)).unwrap();
        assert!(e.accuracy > 0.9, "accuracy {}", e.accuracy);
        let five = extract_features(&canonical_pose(GestureClass::Five)).unwrap();
        assert_eq!(classify(&a, &five).unwrap().class, GestureClass::Five);
    }

    #[test]
    fn single_class_training_is_flagged() {
        let spec = DatasetSpec {
            classes: vec![ClassCount {
                class: "ROCK".into(),
                count: 50,
            }],
            ..DatasetSpec::default()
        };
        let data = synth_dataset(&spec, 2).unwrap();
        let m = train_classifier(&data, &quick_hyper(), 1).unwrap();
        assert!(m.metadata.degenerate_training);
        let e = evaluate(&m, &data.samples).unwrap();
        assert_eq!(e.accuracy, 1.0);
    }

    #[test]
    fn model_file_round_trip_and_version_check() {
        let data = synth_dataset(&small_spec(10), 5).unwrap();
        let hyper = Hyperparams {
            epochs: 2,
            ..Hyperparams::default()
        };
        let m = train_classifier(&data, &hyper, 3).unwrap();
        let text = m.to_json().unwrap();
        let back = GestureModel::from_json(&text).unwrap();
        assert_eq!(back, m);

        let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        doc["version"] = serde_json::json!(2);
        let err = GestureModel::from_json(&doc.to_string()).unwrap_err();
        assert!(matches!(err, Error::Model(_)));
        doc["version"] = serde_json::json!(1);
        doc["layers"][0]["biases"] = serde_json::json!([1.0]);
        assert!(GestureModel::from_json(&doc.to_string()).is_err());
    }
}
