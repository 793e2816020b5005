//! A small fully connected image classifier with exact backpropagation.
//!
//! Images are flattened row-major RGB vectors; hidden layers use `tanh`.

use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{camera_pose, CameraIntrinsics, Vec3, Viewpoint};
use crate::optim::{Adam, OptimizerKind};
use crate::oracle::ViewpointOracle;
use crate::renderer::{render_image, RenderedImage, SceneField};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub classes: usize,
}

impl Architecture {
    /// Two hidden layers of 64 units over an RGB image.
    pub fn for_image(width: usize, height: usize, classes: usize) -> Self {
        Architecture {
            input_dim: width * height * 3,
            hidden: vec![64, 64],
            classes,
        }
    }

    fn layer_dims(&self) -> Vec<(usize, usize)> {
        let mut dims = Vec::with_capacity(self.hidden.len() + 1);
        let mut fan_in = self.input_dim;
        for &h in self.hidden.iter().chain(std::iter::once(&self.classes)) {
            dims.push((h, fan_in));
            fan_in = h;
        }
        dims
    }

    pub fn parameter_count(&self) -> usize {
        self.layer_dims().iter().map(|(o, i)| o * i + o).sum()
    }
}

/// Dense layer, `weights` is `outputs x inputs` row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    fn zeros(outputs: usize, inputs: usize) -> Self {
        Layer {
            weights: vec![0.0; outputs * inputs],
            biases: vec![0.0; outputs],
        }
    }

    fn inputs(&self) -> usize {
        self.weights.len() / self.biases.len()
    }

    fn apply(&self, x: &[f64], out: &mut Vec<f64>) {
        let n_in = x.len();
        out.clear();
        out.extend(self.weights.chunks_exact(n_in).zip(&self.biases).map(|(row, b)| {
            b + row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>()
        }));
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierParams {
    pub architecture: Architecture,
    pub layers: Vec<Layer>,
}

impl ClassifierParams {
    pub fn zeros(architecture: Architecture) -> Self {
        let layers = architecture
            .layer_dims()
            .into_iter()
            .map(|(o, i)| Layer::zeros(o, i))
            .collect();
        ClassifierParams {
            architecture,
            layers,
        }
    }

    /// Gaussian weights scaled by `1/sqrt(fan_in)`, zero biases.
    pub fn init(architecture: Architecture, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Self::zeros(architecture);
        for layer in &mut params.layers {
            let scale = 1.0 / (layer.inputs() as f64).sqrt();
            for w in &mut layer.weights {
                let z: f64 = StandardNormal.sample(&mut rng);
                *w = z * scale;
            }
        }
        params
    }

    pub fn classes(&self) -> usize {
        self.architecture.classes
    }

    pub fn validate(&self) -> Result<()> {
        let dims = self.architecture.layer_dims();
        if dims.len() != self.layers.len() {
            return Err(Error::ShapeMismatch {
                expected: dims.len(),
                got: self.layers.len(),
            });
        }
        for ((o, i), layer) in dims.iter().zip(&self.layers) {
            if layer.weights.len() != o * i {
                return Err(Error::ShapeMismatch {
                    expected: o * i,
                    got: layer.weights.len(),
                });
            }
            if layer.biases.len() != *o {
                return Err(Error::ShapeMismatch {
                    expected: *o,
                    got: layer.biases.len(),
                });
            }
            if layer.weights.iter().chain(&layer.biases).any(|x| !x.is_finite()) {
                return Err(Error::NonFiniteInput("classifier parameters"));
            }
        }
        Ok(())
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.architecture.input_dim {
            return Err(Error::ShapeMismatch {
                expected: self.architecture.input_dim,
                got: input.len(),
            });
        }
        Ok(self.activations(input).pop().expect("at least one layer"))
    }

    pub fn forward_image(&self, image: &RenderedImage) -> Result<Vec<f64>> {
        self.forward(&image.pixels)
    }

    pub fn predict(&self, image: &RenderedImage) -> Result<usize> {
        Ok(argmax(&self.forward_image(image)?))
    }

    /// Outputs of every layer; hidden entries are post-activation, the last
    /// entry is the logit vector.
    fn activations(&self, input: &[f64]) -> Vec<Vec<f64>> {
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let x = if l == 0 { input } else { &acts[l - 1] };
            let mut out = Vec::with_capacity(layer.biases.len());
            layer.apply(x, &mut out);
            if l != last {
                out.iter_mut().for_each(|z| *z = z.tanh());
            }
            acts.push(out);
        }
        acts
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.biases).copied())
            .collect()
    }

    pub fn assign_flat(&mut self, flat: &[f64]) -> Result<()> {
        let total: usize = self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum();
        if flat.len() != total {
            return Err(Error::ShapeMismatch {
                expected: total,
                got: flat.len(),
            });
        }
        let mut it = flat.iter();
        for l in &mut self.layers {
            for w in l.weights.iter_mut().chain(l.biases.iter_mut()) {
                *w = *it.next().expect("length checked");
            }
        }
        Ok(())
    }

    /// Mean cross-entropy over `(input, label)` pairs and its exact gradient,
    /// flattened in the same order as [`ClassifierParams::flatten`].
    pub fn loss_and_gradient(&self, inputs: &[&[f64]], labels: &[usize]) -> Result<(f64, Vec<f64>)> {
        if inputs.is_empty() || inputs.len() != labels.len() {
            return Err(Error::ShapeMismatch {
                expected: inputs.len().max(1),
                got: labels.len(),
            });
        }
        let mut grads: Vec<Layer> = self
            .architecture
            .layer_dims()
            .into_iter()
            .map(|(o, i)| Layer::zeros(o, i))
            .collect();
        let scale = 1.0 / inputs.len() as f64;
        let mut total = 0.0;
        for (x, &y) in inputs.iter().zip(labels) {
            let logits = self.forward(x)?;
            total += cross_entropy(&logits, y)?;
            let acts = self.activations(x);
            let mut delta = softmax(&logits);
            delta[y] -= 1.0;
            delta.iter_mut().for_each(|d| *d *= scale);
            for l in (0..self.layers.len()).rev() {
                let input: &[f64] = if l == 0 { x } else { &acts[l - 1] };
                let g = &mut grads[l];
                for (o, d) in delta.iter().enumerate() {
                    g.biases[o] += d;
                    let row = &mut g.weights[o * input.len()..(o + 1) * input.len()];
                    row.iter_mut().zip(input).for_each(|(gw, xi)| *gw += d * xi);
                }
                if l > 0 {
                    let w = &self.layers[l].weights;
                    let n_in = input.len();
                    let mut back = vec![0.0; n_in];
                    for (o, d) in delta.iter().enumerate() {
                        back.iter_mut()
                            .zip(&w[o * n_in..(o + 1) * n_in])
                            .for_each(|(b, wi)| *b += d * wi);
                    }
                    // tanh'(z) = 1 - tanh(z)^2
                    for (b, h) in back.iter_mut().zip(input) {
                        *b *= 1.0 - h * h;
                    }
                    delta = back;
                }
            }
        }
        let flat = grads
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.biases).copied())
            .collect();
        Ok((total * scale, flat))
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = CheckpointRef {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            architecture: &self.architecture,
            layers: &self.layers,
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: Checkpoint = serde_json::from_str(s)?;
        if doc.version != CHECKPOINT_VERSION || doc.format != CHECKPOINT_FORMAT {
            return Err(Error::UnsupportedVersion(doc.version));
        }
        let params = ClassifierParams {
            architecture: doc.architecture,
            layers: doc.layers,
        };
        params.validate()?;
        Ok(params)
    }
}

const CHECKPOINT_FORMAT: &str = "viewlab-classifier";

#[derive(Serialize)]
struct CheckpointRef<'a> {
    format: String,
    version: u32,
    architecture: &'a Architecture,
    layers: &'a [Layer],
}

#[derive(Deserialize)]
struct Checkpoint {
    format: String,
    version: u32,
    architecture: Architecture,
    layers: Vec<Layer>,
}

/// Index of the largest entry; the lowest index wins ties.
pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let lse = log_sum_exp(logits);
    logits.iter().map(|x| (x - lse).exp()).collect()
}

/// `-log softmax(logits)[label]`, stabilized with log-sum-exp.
pub fn cross_entropy(logits: &[f64], label: usize) -> Result<f64> {
    if label >= logits.len() {
        return Err(Error::LabelOutOfRange {
            label,
            classes: logits.len(),
        });
    }
    Ok((log_sum_exp(logits) - logits[label]).max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleSource {
    Adversarial,
    Clean,
}

#[derive(Clone, Debug, Default)]
pub struct TrainBatch {
    pub images: Vec<RenderedImage>,
    pub labels: Vec<usize>,
    pub sources: Vec<SampleSource>,
}

impl TrainBatch {
    pub fn push(&mut self, image: RenderedImage, label: usize, source: SampleSource) {
        self.images.push(image);
        self.labels.push(label);
        self.sources.push(source);
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn count(&self, source: SampleSource) -> usize {
        self.sources.iter().filter(|&&s| s == source).count()
    }
}

/// Optimizer state owned by a single training loop.
#[derive(Clone, Debug)]
pub enum TrainerState {
    Sgd,
    Adam(Adam),
}

impl TrainerState {
    pub fn new(kind: OptimizerKind, params: &ClassifierParams) -> Self {
        match kind {
            OptimizerKind::Sgd => TrainerState::Sgd,
            OptimizerKind::Adam => TrainerState::Adam(Adam::new(params.architecture.parameter_count())),
        }
    }
}

/// One descent step on the batch's mean cross-entropy; returns the loss
/// measured before the step.
pub fn train_step(
    params: &mut ClassifierParams,
    batch: &TrainBatch,
    lr: f64,
    state: &mut TrainerState,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::InvalidConfig("empty training batch".into()));
    }
    if batch.labels.len() != batch.images.len() {
        return Err(Error::ShapeMismatch {
            expected: batch.images.len(),
            got: batch.labels.len(),
        });
    }
    let inputs: Vec<&[f64]> = batch.images.iter().map(|im| im.pixels.as_slice()).collect();
    let (loss, grad) = params.loss_and_gradient(&inputs, &batch.labels)?;
    let step = match state {
        TrainerState::Sgd => grad,
        TrainerState::Adam(adam) => adam.direction(&grad),
    };
    let mut offset = 0;
    for layer in &mut params.layers {
        for w in layer.weights.iter_mut().chain(layer.biases.iter_mut()) {
            *w -= lr * step[offset];
            offset += 1;
        }
    }
    Ok(loss)
}

/// Black-box classification loss of one object as a function of viewpoint.
///
/// Renders the scene, runs the classifier and scores cross-entropy against
/// the object's label. Only the scalar loss is exposed.
pub struct ClassifierOracle<'a> {
    params: &'a ClassifierParams,
    scene: &'a SceneField,
    label: usize,
    intr: CameraIntrinsics,
    base_position: Vec3,
    queries: AtomicU64,
}

impl<'a> ClassifierOracle<'a> {
    pub fn new(
        params: &'a ClassifierParams,
        scene: &'a SceneField,
        label: usize,
        intr: CameraIntrinsics,
        base_position: Vec3,
    ) -> Result<Self> {
        intr.validate()?;
        if intr.pixel_count() * 3 != params.architecture.input_dim {
            return Err(Error::ShapeMismatch {
                expected: params.architecture.input_dim,
                got: intr.pixel_count() * 3,
            });
        }
        if label >= params.classes() {
            return Err(Error::LabelOutOfRange {
                label,
                classes: params.classes(),
            });
        }
        Ok(ClassifierOracle {
            params,
            scene,
            label,
            intr,
            base_position,
            queries: AtomicU64::new(0),
        })
    }

    pub fn render(&self, v: &Viewpoint) -> Result<RenderedImage> {
        let pose = camera_pose(v, &self.base_position)?;
        Ok(render_image(self.scene, &pose, &self.intr))
    }
}

impl ViewpointOracle for ClassifierOracle<'_> {
    fn loss(&self, v: &Viewpoint) -> f64 {
        self.queries.fetch_add(1, Ordering::Relaxed);
        let image = self.render(v).expect("viewpoint sampled inside finite bounds");
        let logits = self
            .params
            .forward_image(&image)
            .expect("image size checked at construction");
        cross_entropy(&logits, self.label).expect("label checked at construction")
    }

    fn queries(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }
}
