//! Deep feedforward network: tansig hidden layers, a purelin (identity)
//! scalar output regressing class codes, trained by plain mini-batch SGD
//! on mean squared error. Training is deterministic given the config and
//! dataset; the seed drives both initialization and shuffling.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fmt::g17;
use crate::preprocess::{self, NormalizerStats};
use crate::signal::LabeledPointSet;

/// Hyperbolic-tangent sigmoid, `2/(1+e^(-2x)) - 1`. Saturates for large
/// |x| instead of overflowing.
pub fn tansig(x: f64) -> f64 {
    2.0 / (1.0 + (-2.0 * x).exp()) - 1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tansig,
    Purelin,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tansig => tansig(x),
            Activation::Purelin => x,
        }
    }

    /// Derivative expressed through the post-activation value.
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tansig => 1.0 - y * y,
            Activation::Purelin => 1.0,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Activation::Tansig => "tansig",
            Activation::Purelin => "purelin",
        }
    }

    fn from_name(name: &str) -> Result<Activation> {
        match name {
            "tansig" => Ok(Activation::Tansig),
            "purelin" => Ok(Activation::Purelin),
            other => Err(Error::ModelFormat(format!("unknown activation {other:?}"))),
        }
    }
}

/// Network shape and SGD hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MLPConfig {
    /// Neuron counts including input and the single output.
    pub layer_sizes: Vec<usize>,
    pub learning_rate: f64,
    /// Epoch-MSE training goal; reaching it stops training.
    pub goal_mse: f64,
    pub max_epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for MLPConfig {
    fn default() -> Self {
        MLPConfig {
            layer_sizes: vec![4, 16, 16, 16, 16, 16, 16, 16, 16, 16, 1],
            learning_rate: 0.01,
            goal_mse: 1e-4,
            max_epochs: 2000,
            batch_size: 32,
            seed: 42,
        }
    }
}

impl MLPConfig {
    fn validate(&self) -> Result<()> {
        if self.layer_sizes.len() < 3 {
            return Err(Error::InvalidArgument("need at least one hidden layer".into()));
        }
        if *self.layer_sizes.last().unwrap() != 1 {
            return Err(Error::InvalidArgument("output layer must have exactly 1 neuron".into()));
        }
        if self.layer_sizes.iter().any(|&n| n == 0) {
            return Err(Error::InvalidArgument("layer sizes must be positive".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidArgument("learning rate must be positive".into()));
        }
        if !(self.goal_mse > 0.0) {
            return Err(Error::InvalidArgument("goal MSE must be positive".into()));
        }
        if self.batch_size == 0 || self.max_epochs == 0 {
            return Err(Error::InvalidArgument("batch size and max epochs must be >= 1".into()));
        }
        Ok(())
    }

    /// Activations per weighted layer: tansig everywhere, purelin last.
    pub fn activations(&self) -> Vec<Activation> {
        let n = self.layer_sizes.len() - 1;
        (0..n)
            .map(|l| if l + 1 == n { Activation::Purelin } else { Activation::Tansig })
            .collect()
    }
}

/// A trained classifier: layer parameters plus the embedded normalizer.
/// Immutable; safe for concurrent prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct MLPModel {
    /// Row-major weight matrices; `weights[l]` has `layer_sizes[l+1]` rows
    /// of `layer_sizes[l]` columns.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub config: MLPConfig,
    pub normalizer: NormalizerStats,
    pub class_count: usize,
}

/// Parameter-shaped gradient buffers.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl MLPModel {
    pub fn input_dim(&self) -> usize {
        self.config.layer_sizes[0]
    }

    fn zero_gradients(&self) -> Gradients {
        Gradients {
            weights: self.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: self.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }
}

/// Forward pass on an already-normalized input. Returns the scalar f(x).
pub fn forward(model: &MLPModel, x_normalized: &[f64]) -> Result<f64> {
    if x_normalized.len() != model.input_dim() {
        return Err(Error::InvalidArgument(format!(
            "input has {} features, model expects {}",
            x_normalized.len(),
            model.input_dim()
        )));
    }
    let trace = forward_trace(model, x_normalized);
    Ok(trace.last().unwrap()[0])
}

/// Per-layer post-activation values, input first. Internal to training
/// but exposed for gradient checking.
pub fn forward_trace(model: &MLPModel, x: &[f64]) -> Vec<Vec<f64>> {
    let acts = model.config.activations();
    let mut values = Vec::with_capacity(model.weights.len() + 1);
    values.push(x.to_vec());
    for (l, act) in acts.iter().enumerate() {
        let rows = model.config.layer_sizes[l + 1];
        let cols = model.config.layer_sizes[l];
        let out = {
            let prev = values.last().unwrap();
            let mut out = Vec::with_capacity(rows);
            for r in 0..rows {
                let w = &model.weights[l][r * cols..(r + 1) * cols];
                let mut s = model.biases[l][r];
                for (wi, xi) in w.iter().zip(prev) {
                    s += wi * xi;
                }
                out.push(act.apply(s));
            }
            out
        };
        values.push(out);
    }
    values
}

/// Exact gradient of the batch-mean squared error with respect to every
/// weight and bias. Inputs must already be normalized.
pub fn backprop(model: &MLPModel, batch: &[(Vec<f64>, f64)]) -> Result<Gradients> {
    if batch.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    let acts = model.config.activations();
    let sizes = &model.config.layer_sizes;
    let mut grads = model.zero_gradients();
    let scale = 1.0 / batch.len() as f64;
    for (x, target) in batch {
        if x.len() != model.input_dim() {
            return Err(Error::InvalidArgument("batch input dimension mismatch".into()));
        }
        let values = forward_trace(model, x);
        let out = values.last().unwrap()[0];
        // delta at the output of the last layer
        let mut delta = vec![2.0 * (out - target) * scale];
        for l in (0..model.weights.len()).rev() {
            let cols = sizes[l];
            let prev = &values[l];
            // d(loss)/d(pre-activation)
            for (r, d) in delta.iter_mut().enumerate() {
                *d *= acts[l].derivative_from_output(values[l + 1][r]);
            }
            for (r, d) in delta.iter().enumerate() {
                grads.biases[l][r] += d;
                let row = &mut grads.weights[l][r * cols..(r + 1) * cols];
                for (g, p) in row.iter_mut().zip(prev) {
                    *g += d * p;
                }
            }
            if l > 0 {
                let mut prev_delta = vec![0.0; cols];
                for (r, d) in delta.iter().enumerate() {
                    let row = &model.weights[l][r * cols..(r + 1) * cols];
                    for (pd, w) in prev_delta.iter_mut().zip(row) {
                        *pd += d * w;
                    }
                }
                delta = prev_delta;
            }
        }
    }
    Ok(grads)
}

/// Training outcome bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub epochs_run: usize,
    pub mse_history: Vec<f64>,
    pub final_train_accuracy: f64,
    pub stop_reason: StopReason,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    GoalReached,
    MaxEpochs,
}

/// Fits the normalizer on `data`, initializes weights from the seed and
/// runs mini-batch SGD until the epoch MSE reaches the goal or the epoch
/// budget runs out. Deterministic given (config, data).
pub fn train(config: &MLPConfig, data: &LabeledPointSet) -> Result<(MLPModel, TrainReport)> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::InvalidArgument("training set is empty".into()));
    }
    if data.feature_names.len() != config.layer_sizes[0] {
        return Err(Error::InvalidArgument(format!(
            "{} features but input layer has {} neurons",
            data.feature_names.len(),
            config.layer_sizes[0]
        )));
    }
    let class_count = data.points.iter().map(|(_, c)| *c as usize + 1).max().unwrap();

    let normalizer = preprocess::fit(data, -1.0, 1.0)?;
    let samples: Vec<(Vec<f64>, f64)> = data
        .points
        .iter()
        .map(|(v, c)| Ok((preprocess::apply(&normalizer, v)?, *c as f64)))
        .collect::<Result<_>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for l in 0..config.layer_sizes.len() - 1 {
        let fan_in = config.layer_sizes[l];
        let rows = config.layer_sizes[l + 1];
        let bound = 1.0 / (fan_in as f64).sqrt();
        weights.push((0..rows * fan_in).map(|_| rng.gen_range(-bound..bound)).collect::<Vec<f64>>());
        biases.push((0..rows).map(|_| rng.gen_range(-bound..bound)).collect::<Vec<f64>>());
    }
    let mut model = MLPModel { weights, biases, config: config.clone(), normalizer, class_count };

    let n = samples.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut mse_history = Vec::new();
    let mut stop_reason = StopReason::MaxEpochs;
    for _epoch in 0..config.max_epochs {
        // Fisher-Yates from the same seeded stream as initialization
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        let mut sse = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<(Vec<f64>, f64)> =
                chunk.iter().map(|&i| samples[i].clone()).collect();
            for &(ref x, t) in &batch {
                let out = forward(&model, x)?;
                sse += (out - t) * (out - t);
            }
            let grads = backprop(&model, &batch)?;
            for l in 0..model.weights.len() {
                for (w, g) in model.weights[l].iter_mut().zip(&grads.weights[l]) {
                    *w -= config.learning_rate * g;
                }
                for (b, g) in model.biases[l].iter_mut().zip(&grads.biases[l]) {
                    *b -= config.learning_rate * g;
                }
            }
        }
        let mse = sse / n as f64;
        mse_history.push(mse);
        if mse <= config.goal_mse {
            stop_reason = StopReason::GoalReached;
            break;
        }
    }

    let mut correct = 0usize;
    for (x, t) in &samples {
        if (forward(&model, x)? - t).abs() < 0.5 {
            correct += 1;
        }
    }
    let report = TrainReport {
        epochs_run: mse_history.len(),
        mse_history,
        final_train_accuracy: correct as f64 / n as f64,
        stop_reason,
    };
    Ok((model, report))
}

/// Normalizes a raw compressed point with the embedded statistics, then
/// runs the forward pass. The decision rule lives in the diagnose module.
pub fn predict(model: &MLPModel, raw_compressed_point: &[f64]) -> Result<f64> {
    let x = preprocess::apply(&model.normalizer, raw_compressed_point)?;
    forward(model, &x)
}

const MODEL_MAGIC: &str = "DFNMODEL v1";

/// Writes the line-oriented text model format. All reals carry 17
/// significant digits, so a load reproduces the parameters exactly.
pub fn save_model(model: &MLPModel, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path.as_ref(), model_to_string(model))?;
    Ok(())
}

pub fn model_to_string(model: &MLPModel) -> String {
    let mut out = String::new();
    out.push_str(MODEL_MAGIC);
    out.push('\n');
    out.push_str("layers:");
    for s in &model.config.layer_sizes {
        out.push_str(&format!(" {s}"));
    }
    out.push('\n');
    out.push_str("activations:");
    for a in model.config.activations() {
        out.push_str(&format!(" {}", a.name()));
    }
    out.push('\n');
    out.push_str(&format!("classes: {}\n", model.class_count));
    let nz = &model.normalizer;
    out.push_str(&format!(
        "normalizer: {} {} {}\n",
        nz.dim(),
        g17(nz.target_lo),
        g17(nz.target_hi)
    ));
    for i in 0..nz.dim() {
        out.push_str(&format!(
            "feature {} {} {} {}\n",
            nz.feature_names[i],
            g17(nz.x_min[i]),
            g17(nz.x_max[i]),
            nz.degenerate_flags[i] as u8
        ));
    }
    for l in 0..model.weights.len() {
        let cols = model.config.layer_sizes[l];
        let rows = model.config.layer_sizes[l + 1];
        for r in 0..rows {
            out.push_str(&format!("W {l} {r} :"));
            for v in &model.weights[l][r * cols..(r + 1) * cols] {
                out.push_str(&format!(" {}", g17(*v)));
            }
            out.push('\n');
        }
        out.push_str(&format!("b {l} :"));
        for v in &model.biases[l] {
            out.push_str(&format!(" {}", g17(*v)));
        }
        out.push('\n');
    }
    out
}

pub fn load_model(path: impl AsRef<Path>) -> Result<MLPModel> {
    let text = fs::read_to_string(path.as_ref())?;
    model_from_string(&text)
}

pub fn model_from_string(text: &str) -> Result<MLPModel> {
    let mut lines = text.lines();
    let mut next = |what: &str| -> Result<&str> {
        lines
            .next()
            .ok_or_else(|| Error::ModelFormat(format!("file truncated before {what}")))
    };

    if next("header")? != MODEL_MAGIC {
        return Err(Error::ModelFormat(format!("bad header, expected {MODEL_MAGIC:?}")));
    }

    let parse_f64 = |tok: &str| -> Result<f64> {
        let v: f64 = tok
            .parse()
            .map_err(|_| Error::ModelFormat(format!("bad number {tok:?}")))?;
        if !v.is_finite() {
            return Err(Error::ModelFormat(format!("non-finite parameter {tok:?}")));
        }
        // Every real is written in the canonical 17-significant-digit form;
        // anything else (e.g. a value whose tail was cut off) is rejected.
        if crate::fmt::g17(v) != tok {
            return Err(Error::ModelFormat(format!("non-canonical number {tok:?}")));
        }
        Ok(v)
    };

    let layers_line = next("layers")?;
    let layer_sizes: Vec<usize> = layers_line
        .strip_prefix("layers:")
        .ok_or_else(|| Error::ModelFormat("missing 'layers:' line".into()))?
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::ModelFormat(format!("bad layer size {t:?}"))))
        .collect::<Result<_>>()?;
    if layer_sizes.len() < 3 || *layer_sizes.last().unwrap() != 1 {
        return Err(Error::ModelFormat("layer sizes must name input, hidden layers and a 1-neuron output".into()));
    }

    let acts_line = next("activations")?;
    let acts: Vec<Activation> = acts_line
        .strip_prefix("activations:")
        .ok_or_else(|| Error::ModelFormat("missing 'activations:' line".into()))?
        .split_whitespace()
        .map(Activation::from_name)
        .collect::<Result<_>>()?;
    if acts.len() != layer_sizes.len() - 1 {
        return Err(Error::ModelFormat("activation count does not match layer count".into()));
    }
    let expected: Vec<Activation> = {
        let n = acts.len();
        (0..n).map(|l| if l + 1 == n { Activation::Purelin } else { Activation::Tansig }).collect()
    };
    if acts != expected {
        return Err(Error::ModelFormat("activations must be tansig hidden layers with a purelin output".into()));
    }

    let classes_line = next("classes")?;
    let class_count: usize = classes_line
        .strip_prefix("classes:")
        .ok_or_else(|| Error::ModelFormat("missing 'classes:' line".into()))?
        .trim()
        .parse()
        .map_err(|_| Error::ModelFormat("bad class count".into()))?;
    if class_count == 0 {
        return Err(Error::ModelFormat("class count must be >= 1".into()));
    }

    let nz_line = next("normalizer")?;
    let toks: Vec<&str> = nz_line
        .strip_prefix("normalizer:")
        .ok_or_else(|| Error::ModelFormat("missing 'normalizer:' line".into()))?
        .split_whitespace()
        .collect();
    if toks.len() != 3 {
        return Err(Error::ModelFormat("normalizer line needs count, target_lo, target_hi".into()));
    }
    let nfeat: usize = toks[0]
        .parse()
        .map_err(|_| Error::ModelFormat("bad normalizer feature count".into()))?;
    if nfeat != layer_sizes[0] {
        return Err(Error::ModelFormat(format!(
            "normalizer has {nfeat} features but input layer has {}",
            layer_sizes[0]
        )));
    }
    let target_lo = parse_f64(toks[1])?;
    let target_hi = parse_f64(toks[2])?;
    if !(target_lo < target_hi) {
        return Err(Error::ModelFormat("normalizer target interval is empty".into()));
    }

    let mut feature_names = Vec::with_capacity(nfeat);
    let mut x_min = Vec::with_capacity(nfeat);
    let mut x_max = Vec::with_capacity(nfeat);
    let mut degenerate_flags = Vec::with_capacity(nfeat);
    for i in 0..nfeat {
        let line = next(&format!("feature {i}"))?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 5 || toks[0] != "feature" {
            return Err(Error::ModelFormat(format!("bad feature line {line:?}")));
        }
        feature_names.push(toks[1].to_string());
        let lo = parse_f64(toks[2])?;
        let hi = parse_f64(toks[3])?;
        if lo > hi {
            return Err(Error::ModelFormat(format!("feature {:?} has min > max", toks[1])));
        }
        let flag = match toks[4] {
            "0" => false,
            "1" => true,
            other => return Err(Error::ModelFormat(format!("bad degenerate flag {other:?}"))),
        };
        if flag != (lo == hi) {
            return Err(Error::ModelFormat(format!(
                "degenerate flag inconsistent with extrema for feature {:?}",
                toks[1]
            )));
        }
        x_min.push(lo);
        x_max.push(hi);
        degenerate_flags.push(flag);
    }

    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for l in 0..layer_sizes.len() - 1 {
        let cols = layer_sizes[l];
        let rows = layer_sizes[l + 1];
        let mut w = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let line = next(&format!("W {l} {r}"))?;
            let mut toks = line.split_whitespace();
            if toks.next() != Some("W")
                || toks.next() != Some(l.to_string().as_str())
                || toks.next() != Some(r.to_string().as_str())
                || toks.next() != Some(":")
            {
                return Err(Error::ModelFormat(format!("expected 'W {l} {r} :', got {line:?}")));
            }
            let row: Vec<f64> = toks.map(parse_f64).collect::<Result<_>>()?;
            if row.len() != cols {
                return Err(Error::ModelFormat(format!(
                    "W {l} {r} has {} values, expected {cols}",
                    row.len()
                )));
            }
            w.extend(row);
        }
        let line = next(&format!("b {l}"))?;
        let mut toks = line.split_whitespace();
        if toks.next() != Some("b") || toks.next() != Some(l.to_string().as_str()) || toks.next() != Some(":") {
            return Err(Error::ModelFormat(format!("expected 'b {l} :', got {line:?}")));
        }
        let b: Vec<f64> = toks.map(parse_f64).collect::<Result<_>>()?;
        if b.len() != rows {
            return Err(Error::ModelFormat(format!("b {l} has {} values, expected {rows}", b.len())));
        }
        weights.push(w);
        biases.push(b);
    }
    if lines.next().is_some() {
        return Err(Error::ModelFormat("trailing content after parameters".into()));
    }

    let config = MLPConfig { layer_sizes, ..MLPConfig::default() };
    Ok(MLPModel {
        weights,
        biases,
        config,
        normalizer: NormalizerStats {
            feature_names,
            x_min,
            x_max,
            target_lo,
            target_hi,
            degenerate_flags,
        },
        class_count,
    })
}
