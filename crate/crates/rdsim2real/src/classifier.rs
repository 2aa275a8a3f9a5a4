//! Small from-scratch convolutional classifier.
//!
//! Architecture: 3x3 stride-2 conv (3 -> 8 channels), ReLU, 3x3 stride-2
//! conv (8 -> 16), ReLU, global average pool, dense head with 2 or 3
//! outputs. Valid convolutions, so 64x64 inputs shrink to 31x31 and then
//! 15x15. Everything runs in f64 on a single thread; training is
//! bit-reproducible for a fixed seed.

use std::path::Path;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rd::{clip_normalize, colormap_viridis, ClipRange, RdImage, RdMap};
use crate::scene::Domain;

pub const INPUT_SIZE: usize = 64;
pub const IN_CHANNELS: usize = 3;
pub const CONV1_OUT: usize = 8;
pub const CONV2_OUT: usize = 16;
pub const KERNEL: usize = 3;
pub const STRIDE: usize = 2;
/// 64 -> 31 under a valid stride-2 3x3 convolution.
pub const CONV1_SPATIAL: usize = (INPUT_SIZE - KERNEL) / STRIDE + 1;
/// 31 -> 15.
pub const CONV2_SPATIAL: usize = (CONV1_SPATIAL - KERNEL) / STRIDE + 1;

/// Classification task; fixes the head width and the label remapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// Empty vs occupied (2 classes).
    Occupancy,
    /// Empty / one person / two people (3 classes).
    Counting,
}

impl Task {
    pub fn classes(self) -> usize {
        match self {
            Task::Occupancy => 2,
            Task::Counting => 3,
        }
    }

    /// Maps a scene occupancy label into this task's class index.
    pub fn remap(self, occupancy_label: u8) -> u8 {
        match self {
            Task::Occupancy => occupancy_label.min(1),
            Task::Counting => occupancy_label,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Task::Occupancy => "occupancy",
            Task::Counting => "counting",
        }
    }
}

/// Training hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub task: Task,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            epochs: 30,
            batch_size: 32,
            seed: 0,
            task: Task::Occupancy,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::Training("learning_rate must be positive".into()));
        }
        if self.epochs == 0 {
            return Err(Error::Training("epochs must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Training("batch_size must be >= 1".into()));
        }
        Ok(())
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let config: TrainConfig = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        config.validate()?;
        Ok(config)
    }
}

/// Dataset split tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

/// Class-labeled 64x64x3 images.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    pub items: Vec<(RdImage, u8)>,
    pub split: Split,
}

impl LabeledDataset {
    /// Builds classifier inputs from labeled RD maps: clip, normalize,
    /// colormap, and average row pairs down to 64x64.
    ///
    /// The train split accepts only sim-domain maps and the test split only
    /// pseudo-real maps, mirroring the held-out evaluation protocol.
    pub fn from_maps(maps: &[RdMap], clip: &ClipRange, split: Split) -> Result<Self> {
        let mut items = Vec::with_capacity(maps.len());
        for (idx, map) in maps.iter().enumerate() {
            let expected = match split {
                Split::Train => Domain::Sim,
                Split::Test => Domain::PseudoReal,
            };
            if map.domain != expected {
                return Err(Error::Dataset(format!(
                    "map {idx} has domain {} but the {split:?} split requires {expected}",
                    map.domain
                )));
            }
            let label = map
                .label
                .ok_or_else(|| Error::Dataset(format!("map {idx} is unlabeled")))?;
            let image = prepare_input(map, clip)?;
            items.push((image, label));
        }
        Ok(Self { items, split })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Clip + normalize + colormap + downsample one map to a classifier input.
pub fn prepare_input(map: &RdMap, clip: &ClipRange) -> Result<RdImage> {
    let image = colormap_viridis(&clip_normalize(map, clip))?;
    let image = if image.height == 2 * image.width {
        image.average_row_pairs()?
    } else {
        image
    };
    if image.height != INPUT_SIZE || image.width != INPUT_SIZE {
        return Err(Error::Processing(format!(
            "classifier input must be {INPUT_SIZE}x{INPUT_SIZE}, got {}x{}",
            image.height, image.width
        )));
    }
    Ok(image)
}

/// All weights and biases. The same structure doubles as the gradient
/// container returned by [`loss_and_grads`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierParams {
    /// `[CONV1_OUT][IN_CHANNELS][KERNEL][KERNEL]`, flattened.
    pub conv1_weights: Vec<f64>,
    pub conv1_bias: Vec<f64>,
    /// `[CONV2_OUT][CONV1_OUT][KERNEL][KERNEL]`, flattened.
    pub conv2_weights: Vec<f64>,
    pub conv2_bias: Vec<f64>,
    /// `[classes][CONV2_OUT]`, flattened.
    pub head_weights: Vec<f64>,
    pub head_bias: Vec<f64>,
    pub classes: usize,
}

impl ClassifierParams {
    /// Zero-initialized parameters for `classes` outputs.
    pub fn zeros(classes: usize) -> Self {
        Self {
            conv1_weights: vec![0.0; CONV1_OUT * IN_CHANNELS * KERNEL * KERNEL],
            conv1_bias: vec![0.0; CONV1_OUT],
            conv2_weights: vec![0.0; CONV2_OUT * CONV1_OUT * KERNEL * KERNEL],
            conv2_bias: vec![0.0; CONV2_OUT],
            head_weights: vec![0.0; classes * CONV2_OUT],
            head_bias: vec![0.0; classes],
            classes,
        }
    }

    /// Glorot-style uniform initialization, biases zero.
    pub fn init(classes: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut params = Self::zeros(classes);
        let fill = |values: &mut Vec<f64>, fan_in: usize, fan_out: usize, rng: &mut ChaCha8Rng| {
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for v in values.iter_mut() {
                *v = rng.random_range(-bound..=bound);
            }
        };
        let k2 = KERNEL * KERNEL;
        fill(&mut params.conv1_weights, IN_CHANNELS * k2, CONV1_OUT * k2, rng);
        fill(&mut params.conv2_weights, CONV1_OUT * k2, CONV2_OUT * k2, rng);
        fill(&mut params.head_weights, CONV2_OUT, classes, rng);
        params
    }

    pub fn all_finite(&self) -> bool {
        self.tensor_views().iter().all(|(_, t)| t.iter().all(|v| v.is_finite()))
    }

    /// Named views over every tensor, in serialization order.
    pub fn tensor_views(&self) -> [(&'static str, &Vec<f64>); 6] {
        [
            ("conv1_weights", &self.conv1_weights),
            ("conv1_bias", &self.conv1_bias),
            ("conv2_weights", &self.conv2_weights),
            ("conv2_bias", &self.conv2_bias),
            ("head_weights", &self.head_weights),
            ("head_bias", &self.head_bias),
        ]
    }

    /// Mutable tensor access in the same order as [`Self::tensor_views`];
    /// used by the finite-difference checks.
    pub fn tensors_mut(&mut self) -> [&mut Vec<f64>; 6] {
        [
            &mut self.conv1_weights,
            &mut self.conv1_bias,
            &mut self.conv2_weights,
            &mut self.conv2_bias,
            &mut self.head_weights,
            &mut self.head_bias,
        ]
    }

    fn sgd_step(&mut self, grads: &ClassifierParams, learning_rate: f64) {
        for (param, grad) in self.tensors_mut().into_iter().zip(grads.tensor_views()) {
            for (p, g) in param.iter_mut().zip(grad.1.iter()) {
                *p -= learning_rate * g;
            }
        }
    }

    fn tensor_shapes(&self) -> [(&'static str, Vec<usize>); 6] {
        [
            ("conv1_weights", vec![CONV1_OUT, IN_CHANNELS, KERNEL, KERNEL]),
            ("conv1_bias", vec![CONV1_OUT]),
            ("conv2_weights", vec![CONV2_OUT, CONV1_OUT, KERNEL, KERNEL]),
            ("conv2_bias", vec![CONV2_OUT]),
            ("head_weights", vec![self.classes, CONV2_OUT]),
            ("head_bias", vec![self.classes]),
        ]
    }
}

struct Activations {
    planes0: Vec<f64>,
    pre1: Vec<f64>,
    act1: Vec<f64>,
    pre2: Vec<f64>,
    act2: Vec<f64>,
    pooled: Vec<f64>,
    logits: Vec<f64>,
}

impl Activations {
    fn new(classes: usize) -> Self {
        Self {
            planes0: vec![0.0; IN_CHANNELS * INPUT_SIZE * INPUT_SIZE],
            pre1: vec![0.0; CONV1_OUT * CONV1_SPATIAL * CONV1_SPATIAL],
            act1: vec![0.0; CONV1_OUT * CONV1_SPATIAL * CONV1_SPATIAL],
            pre2: vec![0.0; CONV2_OUT * CONV2_SPATIAL * CONV2_SPATIAL],
            act2: vec![0.0; CONV2_OUT * CONV2_SPATIAL * CONV2_SPATIAL],
            pooled: vec![0.0; CONV2_OUT],
            logits: vec![0.0; classes],
        }
    }
}

fn check_input(image: &RdImage) -> Result<()> {
    if image.height != INPUT_SIZE || image.width != INPUT_SIZE {
        return Err(Error::Processing(format!(
            "classifier input must be {INPUT_SIZE}x{INPUT_SIZE}x3, got {}x{}",
            image.height, image.width
        )));
    }
    Ok(())
}

/// Valid stride-2 convolution of `input` ([in_ch][in_size][in_size]) into
/// `output` ([out_ch][out_size][out_size]) preloaded with biases.
fn conv_forward(
    input: &[f64],
    in_ch: usize,
    in_size: usize,
    weights: &[f64],
    bias: &[f64],
    output: &mut [f64],
    out_ch: usize,
    out_size: usize,
) {
    for o in 0..out_ch {
        let out_plane = &mut output[o * out_size * out_size..(o + 1) * out_size * out_size];
        out_plane.fill(bias[o]);
        for c in 0..in_ch {
            let in_plane = &input[c * in_size * in_size..(c + 1) * in_size * in_size];
            for ky in 0..KERNEL {
                for kx in 0..KERNEL {
                    let w = weights[((o * in_ch + c) * KERNEL + ky) * KERNEL + kx];
                    for oy in 0..out_size {
                        let in_row = &in_plane[(STRIDE * oy + ky) * in_size..];
                        let out_row = &mut out_plane[oy * out_size..(oy + 1) * out_size];
                        for (ox, out_v) in out_row.iter_mut().enumerate() {
                            *out_v += w * in_row[STRIDE * ox + kx];
                        }
                    }
                }
            }
        }
    }
}

/// Gradient of a valid stride-2 convolution: accumulates weight/bias grads
/// and, when `grad_input` is provided, the input gradient.
#[allow(clippy::too_many_arguments)]
fn conv_backward(
    input: &[f64],
    in_ch: usize,
    in_size: usize,
    weights: &[f64],
    grad_output: &[f64],
    out_ch: usize,
    out_size: usize,
    grad_weights: &mut [f64],
    grad_bias: &mut [f64],
    mut grad_input: Option<&mut [f64]>,
) {
    for o in 0..out_ch {
        let gout_plane = &grad_output[o * out_size * out_size..(o + 1) * out_size * out_size];
        grad_bias[o] += gout_plane.iter().sum::<f64>();
        for c in 0..in_ch {
            let in_plane = &input[c * in_size * in_size..(c + 1) * in_size * in_size];
            for ky in 0..KERNEL {
                for kx in 0..KERNEL {
                    let w_idx = ((o * in_ch + c) * KERNEL + ky) * KERNEL + kx;
                    let mut grad_w = 0.0;
                    for oy in 0..out_size {
                        let in_row = &in_plane[(STRIDE * oy + ky) * in_size..];
                        let gout_row = &gout_plane[oy * out_size..(oy + 1) * out_size];
                        for (ox, g) in gout_row.iter().enumerate() {
                            grad_w += g * in_row[STRIDE * ox + kx];
                        }
                    }
                    grad_weights[w_idx] += grad_w;
                    if let Some(gin) = grad_input.as_deref_mut() {
                        let w = weights[w_idx];
                        let gin_plane =
                            &mut gin[c * in_size * in_size..(c + 1) * in_size * in_size];
                        for oy in 0..out_size {
                            let gin_row = &mut gin_plane[(STRIDE * oy + ky) * in_size..];
                            let gout_row = &gout_plane[oy * out_size..(oy + 1) * out_size];
                            for (ox, g) in gout_row.iter().enumerate() {
                                gin_row[STRIDE * ox + kx] += w * g;
                            }
                        }
                    }
                }
            }
        }
    }
}

fn forward_into(params: &ClassifierParams, image: &RdImage, acts: &mut Activations) {
    // channel-major f64 planes from the interleaved f32 image
    for c in 0..IN_CHANNELS {
        for y in 0..INPUT_SIZE {
            for x in 0..INPUT_SIZE {
                acts.planes0[(c * INPUT_SIZE + y) * INPUT_SIZE + x] =
                    image.pixels[(y * INPUT_SIZE + x) * 3 + c] as f64;
            }
        }
    }
    conv_forward(
        &acts.planes0,
        IN_CHANNELS,
        INPUT_SIZE,
        &params.conv1_weights,
        &params.conv1_bias,
        &mut acts.pre1,
        CONV1_OUT,
        CONV1_SPATIAL,
    );
    for (a, p) in acts.act1.iter_mut().zip(&acts.pre1) {
        *a = p.max(0.0);
    }
    conv_forward(
        &acts.act1,
        CONV1_OUT,
        CONV1_SPATIAL,
        &params.conv2_weights,
        &params.conv2_bias,
        &mut acts.pre2,
        CONV2_OUT,
        CONV2_SPATIAL,
    );
    for (a, p) in acts.act2.iter_mut().zip(&acts.pre2) {
        *a = p.max(0.0);
    }
    let area = (CONV2_SPATIAL * CONV2_SPATIAL) as f64;
    for p in 0..CONV2_OUT {
        acts.pooled[p] = acts.act2[p * CONV2_SPATIAL * CONV2_SPATIAL
            ..(p + 1) * CONV2_SPATIAL * CONV2_SPATIAL]
            .iter()
            .sum::<f64>()
            / area;
    }
    for k in 0..params.classes {
        let mut logit = params.head_bias[k];
        for p in 0..CONV2_OUT {
            logit += params.head_weights[k * CONV2_OUT + p] * acts.pooled[p];
        }
        acts.logits[k] = logit;
    }
}

/// Deterministic forward pass returning the raw logits.
pub fn forward(params: &ClassifierParams, image: &RdImage) -> Result<Vec<f64>> {
    check_input(image)?;
    let mut acts = Activations::new(params.classes);
    forward_into(params, image, &mut acts);
    Ok(acts.logits.clone())
}

/// Mean cross-entropy of a batch without gradients (forward only).
pub fn batch_loss(params: &ClassifierParams, batch: &[(&RdImage, u8)]) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::Training("empty batch".into()));
    }
    let mut acts = Activations::new(params.classes);
    let mut total = 0.0;
    for &(image, label) in batch {
        check_input(image)?;
        forward_into(params, image, &mut acts);
        let probs = softmax(&acts.logits);
        total -= probs[label as usize].max(f64::MIN_POSITIVE).ln();
    }
    Ok(total / batch.len() as f64)
}

/// Smallest |preactivation| over both conv layers for a batch. A
/// finite-difference gradient check is only well-posed when this margin
/// comfortably exceeds the probe step, since crossing a ReLU kink turns
/// the loss non-differentiable along that coordinate.
pub fn kink_margin(params: &ClassifierParams, batch: &[(&RdImage, u8)]) -> Result<f64> {
    let mut acts = Activations::new(params.classes);
    let mut margin = f64::INFINITY;
    for &(image, _) in batch {
        check_input(image)?;
        forward_into(params, image, &mut acts);
        for pre in acts.pre1.iter().chain(acts.pre2.iter()) {
            margin = margin.min(pre.abs());
        }
    }
    Ok(margin)
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Mean softmax cross-entropy over the batch and gradients for every
/// parameter, computed by backpropagation.
pub fn loss_and_grads(
    params: &ClassifierParams,
    batch: &[(&RdImage, u8)],
) -> Result<(f64, ClassifierParams)> {
    if batch.is_empty() {
        return Err(Error::Training("empty batch".into()));
    }
    let mut grads = ClassifierParams::zeros(params.classes);
    let mut acts = Activations::new(params.classes);
    let mut grad_act2 = vec![0.0; CONV2_OUT * CONV2_SPATIAL * CONV2_SPATIAL];
    let mut grad_act1 = vec![0.0; CONV1_OUT * CONV1_SPATIAL * CONV1_SPATIAL];
    let mut total_loss = 0.0;
    let scale = 1.0 / batch.len() as f64;
    let area = (CONV2_SPATIAL * CONV2_SPATIAL) as f64;

    for &(image, label) in batch {
        check_input(image)?;
        if label as usize >= params.classes {
            return Err(Error::Training(format!(
                "label {label} out of range for {} classes",
                params.classes
            )));
        }
        forward_into(params, image, &mut acts);
        let probs = softmax(&acts.logits);
        total_loss -= probs[label as usize].max(f64::MIN_POSITIVE).ln();

        // dL/dlogit = softmax - onehot, averaged over the batch.
        let mut grad_pooled = vec![0.0; CONV2_OUT];
        for k in 0..params.classes {
            let g = (probs[k] - if k == label as usize { 1.0 } else { 0.0 }) * scale;
            grads.head_bias[k] += g;
            for p in 0..CONV2_OUT {
                grads.head_weights[k * CONV2_OUT + p] += g * acts.pooled[p];
                grad_pooled[p] += g * params.head_weights[k * CONV2_OUT + p];
            }
        }
        // through GAP and the second ReLU
        for p in 0..CONV2_OUT {
            let g = grad_pooled[p] / area;
            let base = p * CONV2_SPATIAL * CONV2_SPATIAL;
            for i in 0..CONV2_SPATIAL * CONV2_SPATIAL {
                grad_act2[base + i] = if acts.pre2[base + i] > 0.0 { g } else { 0.0 };
            }
        }
        grad_act1.fill(0.0);
        conv_backward(
            &acts.act1,
            CONV1_OUT,
            CONV1_SPATIAL,
            &params.conv2_weights,
            &grad_act2,
            CONV2_OUT,
            CONV2_SPATIAL,
            &mut grads.conv2_weights,
            &mut grads.conv2_bias,
            Some(&mut grad_act1),
        );
        // first ReLU; no input gradient needed below conv1
        for (g, pre) in grad_act1.iter_mut().zip(&acts.pre1) {
            if *pre <= 0.0 {
                *g = 0.0;
            }
        }
        conv_backward(
            &acts.planes0,
            IN_CHANNELS,
            INPUT_SIZE,
            &params.conv1_weights,
            &grad_act1,
            CONV1_OUT,
            CONV1_SPATIAL,
            &mut grads.conv1_weights,
            &mut grads.conv1_bias,
            None,
        );
    }
    Ok((total_loss * scale, grads))
}

/// Class prediction: argmax of logits, ties broken toward the smaller
/// class index.
pub fn predict(params: &ClassifierParams, image: &RdImage) -> Result<u8> {
    let logits = forward(params, image)?;
    let mut best = 0usize;
    for (k, &logit) in logits.iter().enumerate() {
        if logit > logits[best] {
            best = k;
        }
    }
    Ok(best as u8)
}

/// Mini-batch SGD with seed-driven initialization and shuffling. Labels are
/// remapped through `config.task` before training. Returns the trained
/// parameters and the per-epoch mean loss history.
pub fn train(dataset: &LabeledDataset, config: &TrainConfig) -> Result<(ClassifierParams, Vec<f64>)> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(Error::Training("empty training dataset".into()));
    }
    let classes = config.task.classes();
    let labels: Vec<u8> = dataset
        .items
        .iter()
        .map(|(_, label)| config.task.remap(*label))
        .collect();
    if let Some(bad) = labels.iter().find(|&&l| l as usize >= classes) {
        return Err(Error::Training(format!(
            "label {bad} out of range for task {:?}",
            config.task
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = ClassifierParams::init(classes, &mut rng);
    let n = dataset.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        // Fisher-Yates driven by the same seeded stream.
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            order.swap(i, j);
        }
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<(&RdImage, u8)> = chunk
                .iter()
                .map(|&i| (&dataset.items[i].0, labels[i]))
                .collect();
            let (loss, grads) = loss_and_grads(&params, &batch)?;
            if !loss.is_finite() {
                return Err(Error::Training(format!(
                    "training diverged at epoch {epoch}: loss = {loss}"
                )));
            }
            params.sgd_step(&grads, config.learning_rate);
            epoch_loss += loss * chunk.len() as f64;
        }
        if !params.all_finite() {
            return Err(Error::Training(format!(
                "training diverged at epoch {epoch}: non-finite parameters"
            )));
        }
        history.push(epoch_loss / n as f64);
    }
    Ok((params, history))
}

/// Optional provenance carried in the model file header.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct TensorRecord {
    name: String,
    shape: Vec<usize>,
    /// Byte offset into the data section.
    offset: usize,
    /// Element count.
    len: usize,
}

#[derive(Serialize, Deserialize)]
struct ModelHeader {
    version: u32,
    classes: usize,
    #[serde(flatten)]
    meta: ModelMeta,
    tensors: Vec<TensorRecord>,
}

const MODEL_VERSION: u32 = 1;

/// Writes parameters as little-endian f32 values prefixed by a JSON header
/// (u32 header length, header bytes, then the flat data section).
pub fn save_model(params: &ClassifierParams, meta: &ModelMeta, path: &Path) -> Result<()> {
    let mut tensors = Vec::new();
    let mut offset = 0usize;
    for (name, shape) in params.tensor_shapes() {
        let len = shape.iter().product::<usize>();
        tensors.push(TensorRecord {
            name: name.to_string(),
            shape,
            offset,
            len,
        });
        offset += len * 4;
    }
    let header = ModelHeader {
        version: MODEL_VERSION,
        classes: params.classes,
        meta: meta.clone(),
        tensors,
    };
    let header_bytes = serde_json::to_vec(&header)?;
    let mut out = Vec::with_capacity(4 + header_bytes.len() + offset);
    out.extend_from_slice(&(header_bytes.len() as u32).to_le_bytes());
    out.extend_from_slice(&header_bytes);
    for (_, tensor) in params.tensor_views() {
        for &v in tensor.iter() {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Loads a model written by [`save_model`].
pub fn load_model(path: &Path) -> Result<(ClassifierParams, ModelMeta)> {
    let bytes = std::fs::read(path)?;
    if bytes.len() < 4 {
        return Err(Error::Dataset(format!("model file {} is truncated", path.display())));
    }
    let header_len = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
    let data_start = 4 + header_len;
    if bytes.len() < data_start {
        return Err(Error::Dataset(format!("model file {} is truncated", path.display())));
    }
    let header: ModelHeader = serde_json::from_slice(&bytes[4..data_start])?;
    if header.version != MODEL_VERSION {
        return Err(Error::ManifestVersion {
            expected: MODEL_VERSION,
            found: header.version,
        });
    }
    let mut params = ClassifierParams::zeros(header.classes);
    for record in &header.tensors {
        let dest: &mut Vec<f64> = match record.name.as_str() {
            "conv1_weights" => &mut params.conv1_weights,
            "conv1_bias" => &mut params.conv1_bias,
            "conv2_weights" => &mut params.conv2_weights,
            "conv2_bias" => &mut params.conv2_bias,
            "head_weights" => &mut params.head_weights,
            "head_bias" => &mut params.head_bias,
            other => {
                return Err(Error::Dataset(format!("unknown tensor {other} in model file")))
            }
        };
        if dest.len() != record.len {
            return Err(Error::Dataset(format!(
                "tensor {} has {} elements, expected {}",
                record.name,
                record.len,
                dest.len()
            )));
        }
        let start = data_start + record.offset;
        let end = start + record.len * 4;
        if bytes.len() < end {
            return Err(Error::Dataset(format!("model file {} is truncated", path.display())));
        }
        for (i, chunk) in bytes[start..end].chunks_exact(4).enumerate() {
            dest[i] = f32::from_le_bytes(chunk.try_into().unwrap()) as f64;
        }
    }
    Ok((params, header.meta))
}
