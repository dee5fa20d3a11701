//! A small multilayer perceptron trained with a penalized cross-entropy loss.
//!
//! Hidden layers use ReLU, the output layer is linear and feeds a softmax
//! cross-entropy. The training objective for one mini-batch is
//! `mean cross-entropy + λ·Σ P(w)` with the penalty applied to weights only.
//! Training uses a triangular cyclic learning rate, validation-based early
//! stopping with patience, and keeps the weights of the best validation epoch.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::datasets::LabeledDataset;
use crate::linalg::{LinalgError, Matrix};
use crate::math;
use crate::penalty::{KinkRule, Penalty, PenaltyError, PenaltySpec};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NeuralError {
    #[error("invalid architecture: {0}")]
    Architecture(&'static str),
    #[error("invalid training configuration: {0}")]
    Config(&'static str),
    #[error("input has {found} features, the network expects {expected}")]
    InputWidth { expected: usize, found: usize },
    #[error("label {label} does not fit {outputs} output units")]
    Label { label: usize, outputs: usize },
    #[error("evaluation set is empty")]
    EmptyEvaluation,
    #[error("loss became non-finite in epoch {epoch}")]
    Divergence { epoch: usize },
    #[error(transparent)]
    Penalty(#[from] PenaltyError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Layer widths `[input, hidden…, output]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MlpArchitecture {
    layer_sizes: Vec<usize>,
}

impl MlpArchitecture {
    /// Needs at least one hidden layer and no zero-width layer.
    pub fn new(layer_sizes: Vec<usize>) -> Result<Self, NeuralError> {
        if layer_sizes.len() < 3 {
            return Err(NeuralError::Architecture("need input, at least one hidden and an output layer"));
        }
        if layer_sizes.contains(&0) {
            return Err(NeuralError::Architecture("layer sizes must be >= 1"));
        }
        Ok(Self { layer_sizes })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn inputs(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn outputs(&self) -> usize {
        *self.layer_sizes.last().expect("validated")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// `inputs × outputs`, so a batch maps as `A·W + b`.
    pub weights: Matrix,
    pub biases: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<Layer>,
}

impl Mlp {
    pub fn zeros(arch: &MlpArchitecture) -> Self {
        let layers = arch
            .layer_sizes
            .windows(2)
            .map(|w| Layer { weights: Matrix::zeros(w[0], w[1]), biases: alloc::vec![0.0; w[1]] })
            .collect();
        Self { layers }
    }

    /// Builds a network from explicit layers; consecutive shapes must chain.
    pub fn from_layers(layers: Vec<Layer>) -> Result<Self, NeuralError> {
        if layers.len() < 2 {
            return Err(NeuralError::Architecture("need at least one hidden layer"));
        }
        for (i, layer) in layers.iter().enumerate() {
            if layer.biases.len() != layer.weights.cols() {
                return Err(NeuralError::Architecture("bias length must equal layer width"));
            }
            if i > 0 && layers[i - 1].weights.cols() != layer.weights.rows() {
                return Err(NeuralError::Architecture("layer shapes do not chain"));
            }
        }
        Ok(Self { layers })
    }

    pub fn architecture(&self) -> MlpArchitecture {
        let mut sizes = alloc::vec![self.layers[0].weights.rows()];
        sizes.extend(self.layers.iter().map(|l| l.weights.cols()));
        MlpArchitecture { layer_sizes: sizes }
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    /// `λ·Σ P(w)` over all weights (biases excluded).
    pub fn penalty_sum(&self, penalty: &Penalty) -> f64 {
        self.layers.iter().map(|l| penalty.sum(l.weights.as_slice())).sum()
    }
}

/// Weights drawn from `N(0, 4/(n_in + n_out))` per layer, biases zero.
pub fn init_weights(arch: &MlpArchitecture, seed: u64) -> Mlp {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mlp = Mlp::zeros(arch);
    for layer in &mut mlp.layers {
        let (fan_in, fan_out) = layer.weights.shape();
        let sd = math::sqrt(4.0 / (fan_in + fan_out) as f64);
        let normal = Normal::new(0.0, sd).expect("positive standard deviation");
        for w in layer.weights.as_mut_slice() {
            *w = normal.sample(&mut rng);
        }
    }
    mlp
}

/// Activations kept by [`forward`] for [`backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Input to each layer: the batch, then every hidden activation.
    inputs: Vec<Matrix>,
    logits: Matrix,
}

impl ForwardCache {
    pub fn logits(&self) -> &Matrix {
        &self.logits
    }
}

pub fn forward(mlp: &Mlp, batch: &Matrix) -> Result<(Matrix, ForwardCache), NeuralError> {
    let expected = mlp.layers[0].weights.rows();
    if batch.cols() != expected {
        return Err(NeuralError::InputWidth { expected, found: batch.cols() });
    }
    let mut inputs = Vec::with_capacity(mlp.layers.len());
    let mut current = batch.clone();
    let last = mlp.layers.len() - 1;
    for (i, layer) in mlp.layers.iter().enumerate() {
        let mut z = current.matmul(&layer.weights)?;
        for r in 0..z.rows() {
            for (v, b) in z.row_mut(r).iter_mut().zip(&layer.biases) {
                *v += b;
            }
        }
        if i < last {
            z.as_mut_slice().iter_mut().for_each(|v| *v = v.max(0.0));
        }
        inputs.push(core::mem::replace(&mut current, z));
    }
    let cache = ForwardCache { inputs, logits: current.clone() };
    Ok((current, cache))
}

fn check_labels(labels: &[usize], outputs: usize) -> Result<(), NeuralError> {
    match labels.iter().find(|&&l| l >= outputs) {
        Some(&label) => Err(NeuralError::Label { label, outputs }),
        None => Ok(()),
    }
}

/// Per-example `−log softmax(logits)[label]`, computed with the max shift.
fn example_losses<'a>(logits: &'a Matrix, labels: &'a [usize]) -> impl Iterator<Item = f64> + 'a {
    (0..logits.rows()).map(move |i| {
        let row = logits.row(i);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_sum = math::ln_sum_exp(row, max);
        log_sum - row[labels[i]]
    })
}

/// Sum of cross-entropy losses over the rows of `logits`.
pub fn total_cross_entropy(logits: &Matrix, labels: &[usize]) -> Result<f64, NeuralError> {
    check_labels(labels, logits.cols())?;
    Ok(example_losses(logits, labels).sum())
}

pub fn mean_cross_entropy(logits: &Matrix, labels: &[usize]) -> Result<f64, NeuralError> {
    Ok(total_cross_entropy(logits, labels)? / logits.rows() as f64)
}

/// `mean cross-entropy + λ·Σ P(w)` on one batch.
pub fn composite_objective(
    mlp: &Mlp,
    batch: &Matrix,
    labels: &[usize],
    penalty: &Penalty,
    lambda: f64,
) -> Result<f64, NeuralError> {
    let (logits, _) = forward(mlp, batch)?;
    let loss = mean_cross_entropy(&logits, labels)?;
    let reg = if lambda == 0.0 { 0.0 } else { lambda * mlp.penalty_sum(penalty) };
    Ok(loss + reg)
}

/// Gradient of [`composite_objective`], laid out like the network.
pub fn backward(
    mlp: &Mlp,
    cache: &ForwardCache,
    labels: &[usize],
    penalty: &Penalty,
    lambda: f64,
    kink: KinkRule,
) -> Result<Mlp, NeuralError> {
    let logits = &cache.logits;
    check_labels(labels, logits.cols())?;
    if labels.len() != logits.rows() {
        return Err(NeuralError::Config("label count must match the batch"));
    }
    let m = logits.rows() as f64;
    // d(mean CE)/d logits = (softmax − onehot)/m.
    let mut delta = logits.clone();
    for (i, &label) in labels.iter().enumerate() {
        let row = delta.row_mut(i);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = math::exp(*v - max);
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum * m;
        }
        row[label] -= 1.0 / m;
    }

    let mut grads: Vec<Layer> = Vec::with_capacity(mlp.layers.len());
    for (idx, layer) in mlp.layers.iter().enumerate().rev() {
        let input = &cache.inputs[idx];
        let mut dw = input.t_matmul(&delta)?;
        if lambda != 0.0 {
            for (g, &w) in dw.as_mut_slice().iter_mut().zip(layer.weights.as_slice()) {
                *g += lambda * penalty.grad(w, kink)?;
            }
        }
        let mut db = alloc::vec![0.0; delta.cols()];
        for r in 0..delta.rows() {
            for (b, v) in db.iter_mut().zip(delta.row(r)) {
                *b += v;
            }
        }
        grads.push(Layer { weights: dw, biases: db });
        if idx > 0 {
            let mut upstream = delta.matmul_t(&layer.weights)?;
            for (u, &a) in upstream.as_mut_slice().iter_mut().zip(input.as_slice()) {
                if a <= 0.0 {
                    *u = 0.0;
                }
            }
            delta = upstream;
        }
    }
    grads.reverse();
    Ok(Mlp { layers: grads })
}

/// Fraction of rows whose arg-max logit (lowest index on ties) misses the label.
pub fn evaluate(mlp: &Mlp, data: &LabeledDataset) -> Result<f64, NeuralError> {
    if data.is_empty() {
        return Err(NeuralError::EmptyEvaluation);
    }
    let (logits, _) = forward(mlp, &data.features)?;
    let wrong = (0..logits.rows())
        .filter(|&i| argmax(logits.row(i)) != data.labels[i])
        .count();
    Ok(wrong as f64 / data.len() as f64)
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub penalty: PenaltySpec,
    pub lambda: f64,
    pub lr_min: f64,
    pub lr_max: f64,
    /// Iterations per half cycle; `None` means four epochs' worth.
    pub cycle_length: Option<usize>,
    pub batch_size: usize,
    pub patience: usize,
    pub max_epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            penalty: PenaltySpec::none(),
            lambda: 0.0,
            lr_min: 0.01,
            lr_max: 0.25,
            cycle_length: None,
            batch_size: 64,
            patience: 20,
            max_epochs: 250,
            seed: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<Penalty, NeuralError> {
        if !(self.lr_min > 0.0 && self.lr_min < self.lr_max && self.lr_max.is_finite()) {
            return Err(NeuralError::Config("need 0 < lr_min < lr_max"));
        }
        if self.patience == 0 || self.max_epochs == 0 || self.batch_size == 0 {
            return Err(NeuralError::Config("patience, max_epochs and batch_size must be >= 1"));
        }
        if self.cycle_length == Some(0) {
            return Err(NeuralError::Config("cycle_length must be >= 1"));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(NeuralError::Config("lambda must be finite and >= 0"));
        }
        Ok(self.penalty.validate()?)
    }
}

/// Triangular cyclic schedule: rises linearly from `lr_min` to `lr_max` over
/// `cycle_length` iterations, falls back over the next `cycle_length`, repeats.
pub fn triangular_lr(iteration: usize, lr_min: f64, lr_max: f64, cycle_length: usize) -> f64 {
    let cycle = cycle_length.max(1);
    let position = iteration % (2 * cycle);
    let (rising, offset) = if position <= cycle { (true, position) } else { (false, position - cycle) };
    if offset == 0 {
        return if rising { lr_min } else { lr_max };
    }
    if offset == cycle {
        return if rising { lr_max } else { lr_min };
    }
    let frac = offset as f64 / cycle as f64;
    let up = lr_min + (lr_max - lr_min) * frac;
    if rising {
        up
    } else {
        lr_max - (lr_max - lr_min) * frac
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Patience,
    MaxEpochs,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::Patience => "patience",
            StopReason::MaxEpochs => "max_epochs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Progress {
    Improved,
    Waiting,
    Stop,
}

/// Patience counter over epoch validation losses; any strict decrease counts.
#[derive(Debug, Clone, PartialEq)]
pub struct EarlyStopping {
    patience: usize,
    best: f64,
    best_epoch: usize,
    since_best: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        Self { patience, best: f64::INFINITY, best_epoch: 0, since_best: 0 }
    }

    pub fn observe(&mut self, epoch: usize, loss: f64) -> Progress {
        if loss < self.best {
            self.best = loss;
            self.best_epoch = epoch;
            self.since_best = 0;
            Progress::Improved
        } else {
            self.since_best += 1;
            if self.since_best >= self.patience {
                Progress::Stop
            } else {
                Progress::Waiting
            }
        }
    }

    pub fn best(&self) -> f64 {
        self.best
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    /// Mean mini-batch cross-entropy during the epoch.
    pub train_loss: f64,
    /// Total cross-entropy over the validation split after the epoch.
    pub validation_loss: f64,
    /// Learning rate of the epoch's first iteration.
    pub learning_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainRun {
    pub epoch_log: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_validation_loss: f64,
    pub stop_reason: StopReason,
    /// Weights after `best_epoch`.
    pub best_weights: Mlp,
    /// Test error of `best_weights`.
    pub test_error_rate: f64,
}

/// Total validation cross-entropy of `mlp`, the quantity early stopping tracks.
pub fn validation_loss(mlp: &Mlp, data: &LabeledDataset) -> Result<f64, NeuralError> {
    let (logits, _) = forward(mlp, &data.features)?;
    total_cross_entropy(&logits, &data.labels)
}

/// Mini-batch gradient descent with a triangular learning rate and early
/// stopping. Initialization and batch shuffling are seeded by `config.seed`.
pub fn train(
    train_set: &LabeledDataset,
    validation_set: &LabeledDataset,
    test_set: &LabeledDataset,
    arch: &MlpArchitecture,
    config: &TrainConfig,
) -> Result<TrainRun, NeuralError> {
    let penalty = config.validate()?;
    for data in [train_set, validation_set, test_set] {
        if data.dim() != arch.inputs() {
            return Err(NeuralError::InputWidth { expected: arch.inputs(), found: data.dim() });
        }
        check_labels(&data.labels, arch.outputs())?;
    }
    if validation_set.is_empty() || train_set.is_empty() {
        return Err(NeuralError::EmptyEvaluation);
    }

    let mut mlp = init_weights(arch, config.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);
    let n = train_set.len();
    let batches_per_epoch = n.div_ceil(config.batch_size);
    let cycle = config.cycle_length.unwrap_or(4 * batches_per_epoch);

    let mut order: Vec<usize> = (0..n).collect();
    let mut stopper = EarlyStopping::new(config.patience);
    let mut best_weights = mlp.clone();
    let mut epoch_log = Vec::new();
    let mut iteration = 0usize;
    let mut stop_reason = StopReason::MaxEpochs;

    for epoch in 1..=config.max_epochs {
        let learning_rate = triangular_lr(iteration, config.lr_min, config.lr_max, cycle);
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let batch = train_set.subset(chunk, None);
            let (logits, cache) = forward(&mlp, &batch.features)?;
            let loss = mean_cross_entropy(&logits, &batch.labels)?;
            if !loss.is_finite() {
                return Err(NeuralError::Divergence { epoch });
            }
            loss_sum += loss;
            let grads = backward(&mlp, &cache, &batch.labels, &penalty, config.lambda, KinkRule::ZeroAtKink)?;
            let lr = triangular_lr(iteration, config.lr_min, config.lr_max, cycle);
            for (layer, grad) in mlp.layers.iter_mut().zip(&grads.layers) {
                for (w, g) in layer.weights.as_mut_slice().iter_mut().zip(grad.weights.as_slice()) {
                    *w -= lr * g;
                }
                for (b, g) in layer.biases.iter_mut().zip(&grad.biases) {
                    *b -= lr * g;
                }
            }
            iteration += 1;
        }
        let val = validation_loss(&mlp, validation_set)?;
        if !val.is_finite() {
            return Err(NeuralError::Divergence { epoch });
        }
        epoch_log.push(EpochRecord {
            epoch,
            train_loss: loss_sum / batches_per_epoch as f64,
            validation_loss: val,
            learning_rate,
        });
        match stopper.observe(epoch, val) {
            Progress::Improved => best_weights = mlp.clone(),
            Progress::Waiting => {}
            Progress::Stop => {
                stop_reason = StopReason::Patience;
                break;
            }
        }
    }

    let test_error_rate = evaluate(&best_weights, test_set)?;
    Ok(TrainRun {
        epoch_log,
        best_epoch: stopper.best_epoch(),
        best_validation_loss: stopper.best(),
        stop_reason,
        best_weights,
        test_error_rate,
    })
}
