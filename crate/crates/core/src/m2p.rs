//! The mapping-to-parameter pipeline.
//!
//! Function-on-function regression is reduced to ordinary supervised
//! learning in three steps: represent the input and output function sets on
//! common bases (one knot sequence per side, shared by every subject), learn
//! the map between the two coefficient vectors, and evaluate the predicted
//! output coefficients back into a curve. The default learner is a
//! closed-form ridge map with intercept; a small from-scratch feedforward
//! network trained by full-batch gradient descent is available for
//! nonlinear problems.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bspline::{design_matrix, fit_least_squares, FunctionSet, KnotSequence, SampledFunction};
use crate::error::Error;
use crate::linalg;
use crate::metrics;
use crate::placement::{derivative_envelope, equidistant_knots, ilp_place_knots};
use crate::Result;

/// How the common knot sequence of a representation is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Placement {
    /// Error-bounded free placement at tolerance `epsilon`.
    Ilp { epsilon: f64 },
    /// Uniform interior knots.
    Equidistant { interior_count: usize },
}

/// Per-function fit residual summary attached to a representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitQuality {
    pub max_abs_error: f64,
    pub rmse: f64,
}

/// A function set projected onto one common basis: the knots, one
/// coefficient row per function, and the per-function residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct Representation {
    pub knots: KnotSequence,
    pub coefficients: Vec<Vec<f64>>,
    pub fit_quality: Vec<FitQuality>,
}

/// Builds the common knot sequence for `set` (free placement driven by the
/// set's derivative envelope, or the equidistant baseline) and
/// least-squares-fits every function on it.
pub fn fit_representation(
    set: &FunctionSet,
    degree: usize,
    placement: Placement,
) -> Result<Representation> {
    let knots = match placement {
        Placement::Ilp { epsilon } => {
            let envelope = derivative_envelope(set, degree)?;
            ilp_place_knots(&envelope, degree, epsilon)?.knots
        }
        Placement::Equidistant { interior_count } => {
            let grid = set.grid();
            equidistant_knots(grid[0], grid[grid.len() - 1], degree, interior_count)?
        }
    };
    let design = design_matrix(&knots, set.grid())?;
    let model = fit_least_squares(&design, set.rows(), 0.0)?;
    let mut fit_quality = Vec::with_capacity(set.function_count());
    for i in 0..set.function_count() {
        let fitted = model.evaluate_on(i, set.grid())?;
        fit_quality.push(FitQuality {
            max_abs_error: metrics::max_abs_error(set.row(i), &fitted)?,
            rmse: metrics::rmse(set.row(i), &fitted)?,
        });
    }
    Ok(Representation {
        knots,
        coefficients: model.coefficients().to_vec(),
        fit_quality,
    })
}

/// Affine value scaling `y = (x - center) / half_range`, invertible exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueScaling {
    pub center: f64,
    pub half_range: f64,
}

impl ValueScaling {
    pub fn apply(&self, x: f64) -> f64 {
        (x - self.center) / self.half_range
    }

    pub fn invert(&self, y: f64) -> f64 {
        y * self.half_range + self.center
    }
}

/// Linearly rescales all values of the set onto `[-1, 1]`, returning the
/// scaled set and the parameters needed to invert the map.
pub fn normalize(set: &FunctionSet) -> Result<(FunctionSet, ValueScaling)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for row in set.rows() {
        for &v in row {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if hi <= lo {
        return Err(Error::DegenerateData(format!(
            "value range [{lo}, {hi}] has zero width; nothing to scale"
        )));
    }
    let scaling = ValueScaling {
        center: 0.5 * (hi + lo),
        half_range: 0.5 * (hi - lo),
    };
    let scaled = set
        .rows()
        .iter()
        .map(|row| row.iter().map(|&v| scaling.apply(v)).collect())
        .collect();
    Ok((FunctionSet::new(set.grid().to_vec(), scaled)?, scaling))
}

/// A seeded shuffle-and-prefix split of subject indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainTestSplit {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
}

/// Splits `subject_count` indices into train and test sets; deterministic
/// per seed, with the train share within one subject of the requested
/// fraction and neither side empty.
pub fn split(subject_count: usize, train_fraction: f64, seed: u64) -> Result<TrainTestSplit> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "train fraction must lie strictly between 0 and 1, got {train_fraction}"
        )));
    }
    if subject_count < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: subject_count,
        });
    }
    let mut indices: Vec<usize> = (0..subject_count).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    let train_count =
        ((subject_count as f64 * train_fraction).round() as usize).clamp(1, subject_count - 1);
    let mut train = indices[..train_count].to_vec();
    let mut test = indices[train_count..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok(TrainTestSplit { train, test, seed })
}

impl FunctionSet {
    /// The sub-set holding only the given subject rows.
    pub fn subset(&self, indices: &[usize]) -> Result<FunctionSet> {
        let rows = indices
            .iter()
            .map(|&i| {
                if i < self.function_count() {
                    Ok(self.row(i).to_vec())
                } else {
                    Err(Error::InvalidInput(format!(
                        "subject index {i} out of range for {} functions",
                        self.function_count()
                    )))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        FunctionSet::new(self.grid().to_vec(), rows)
    }
}

/// Activation applied to hidden layers of the feedforward learner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Identity,
    Tanh,
    Relu,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.max(0.0),
        }
    }

    fn derivative(self, x: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Tanh => 1.0 - x.tanh().powi(2),
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Hyperparameters of the feedforward learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedforwardConfig {
    pub hidden_layers: Vec<usize>,
    pub activation: Activation,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Share of training subjects held out to monitor the loss; 0 disables
    /// monitoring and the full budget of epochs is spent.
    pub validation_fraction: f64,
    /// Epochs without validation improvement before training stops early.
    pub patience: Option<usize>,
}

impl Default for FeedforwardConfig {
    fn default() -> Self {
        FeedforwardConfig {
            hidden_layers: vec![32, 32],
            activation: Activation::Tanh,
            learning_rate: 0.05,
            epochs: 500,
            seed: 0,
            validation_fraction: 0.0,
            patience: None,
        }
    }
}

/// Which learner maps input coefficients to output coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LearnerConfig {
    /// Closed-form regularized linear map with intercept.
    Ridge { lambda: f64 },
    /// From-scratch fully connected network trained by gradient descent.
    Feedforward(FeedforwardConfig),
}

/// Trained ridge map: weight matrix `(input_dim + 1) x output_dim` whose
/// last row is the intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRidgeMap", into = "RawRidgeMap")]
pub struct RidgeMap {
    weights: DMatrix<f64>,
    lambda: f64,
}

#[derive(Serialize, Deserialize)]
struct RawRidgeMap {
    lambda: f64,
    weights: Vec<Vec<f64>>,
}

impl TryFrom<RawRidgeMap> for RidgeMap {
    type Error = Error;

    fn try_from(raw: RawRidgeMap) -> Result<Self> {
        let weights = rows_to_matrix(&raw.weights)?;
        if weights.nrows() < 2 {
            return Err(Error::InvalidInput(
                "ridge weight matrix needs at least one input row plus the intercept".into(),
            ));
        }
        Ok(RidgeMap {
            weights,
            lambda: raw.lambda,
        })
    }
}

impl From<RidgeMap> for RawRidgeMap {
    fn from(map: RidgeMap) -> Self {
        RawRidgeMap {
            lambda: map.lambda,
            weights: matrix_to_rows(&map.weights),
        }
    }
}

impl RidgeMap {
    pub fn input_dim(&self) -> usize {
        self.weights.nrows() - 1
    }

    pub fn output_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    fn predict(&self, input: &[f64]) -> Vec<f64> {
        let d = self.input_dim();
        let mut out = vec![0.0; self.output_dim()];
        for (c, o) in out.iter_mut().enumerate() {
            let mut acc = self.weights[(d, c)];
            for (r, &x) in input.iter().enumerate() {
                acc += self.weights[(r, c)] * x;
            }
            *o = acc;
        }
        out
    }
}

fn train_ridge(inputs: &DMatrix<f64>, outputs: &DMatrix<f64>, lambda: f64) -> Result<RidgeMap> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "ridge regularization must be a non-negative finite number, got {lambda}"
        )));
    }
    let n = inputs.nrows();
    let d = inputs.ncols();
    // Design [X 1], plus sqrt(lambda) rows penalizing the non-intercept
    // weights. With lambda = 0 the rank check rejects N <= d.
    let extra = if lambda > 0.0 { d } else { 0 };
    let mut a = DMatrix::zeros(n + extra, d + 1);
    a.view_mut((0, 0), (n, d)).copy_from(inputs);
    for r in 0..n {
        a[(r, d)] = 1.0;
    }
    if lambda > 0.0 {
        let s = lambda.sqrt();
        for k in 0..d {
            a[(n + k, k)] = s;
        }
    }
    let mut b = DMatrix::zeros(n + extra, outputs.ncols());
    b.view_mut((0, 0), (n, outputs.ncols())).copy_from(outputs);
    let weights = linalg::solve_least_squares(&a, &b)?;
    Ok(RidgeMap { weights, lambda })
}

type LayerGradient = (DMatrix<f64>, DVector<f64>);

/// Fully connected network. Hidden layers use the configured activation;
/// the output layer is linear.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNetwork", into = "RawNetwork")]
pub struct Network {
    dims: Vec<usize>,
    weights: Vec<DMatrix<f64>>,
    biases: Vec<DVector<f64>>,
    activation: Activation,
}

#[derive(Serialize, Deserialize)]
struct RawNetwork {
    dims: Vec<usize>,
    activation: Activation,
    weights: Vec<Vec<Vec<f64>>>,
    biases: Vec<Vec<f64>>,
}

impl TryFrom<RawNetwork> for Network {
    type Error = Error;

    fn try_from(raw: RawNetwork) -> Result<Self> {
        if raw.dims.len() < 2 {
            return Err(Error::InvalidInput(
                "network needs input and output layers".into(),
            ));
        }
        let layers = raw.dims.len() - 1;
        if raw.weights.len() != layers || raw.biases.len() != layers {
            return Err(Error::InvalidInput(format!(
                "network with {layers} layers has {} weight and {} bias blocks",
                raw.weights.len(),
                raw.biases.len()
            )));
        }
        let mut weights = Vec::with_capacity(layers);
        let mut biases = Vec::with_capacity(layers);
        for l in 0..layers {
            let (rows, cols) = (raw.dims[l + 1], raw.dims[l]);
            let w = rows_to_matrix(&raw.weights[l])?;
            if w.nrows() != rows || w.ncols() != cols {
                return Err(Error::InvalidInput(format!(
                    "layer {l} weights are {}x{}, expected {rows}x{cols}",
                    w.nrows(),
                    w.ncols()
                )));
            }
            if raw.biases[l].len() != rows || raw.biases[l].iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("layer {l} biases are invalid")));
            }
            weights.push(w);
            biases.push(DVector::from_row_slice(&raw.biases[l]));
        }
        Ok(Network {
            dims: raw.dims,
            weights,
            biases,
            activation: raw.activation,
        })
    }
}

impl From<Network> for RawNetwork {
    fn from(net: Network) -> Self {
        RawNetwork {
            dims: net.dims,
            activation: net.activation,
            weights: net.weights.iter().map(matrix_to_rows).collect(),
            biases: net
                .biases
                .iter()
                .map(|b| b.iter().copied().collect())
                .collect(),
        }
    }
}

impl Network {
    /// Seeded initialization: weights uniform in `±1/sqrt(fan_in)`, biases
    /// zero. The sampling order is fixed, so a seed pins the network.
    pub fn new(dims: Vec<usize>, activation: Activation, seed: u64) -> Result<Self> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(Error::InvalidConfig(
                "network layer sizes must be positive, with input and output layers".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::with_capacity(dims.len() - 1);
        let mut biases = Vec::with_capacity(dims.len() - 1);
        for l in 0..dims.len() - 1 {
            let (rows, cols) = (dims[l + 1], dims[l]);
            let scale = 1.0 / (cols as f64).sqrt();
            let mut w = DMatrix::zeros(rows, cols);
            for r in 0..rows {
                for c in 0..cols {
                    w[(r, c)] = rng.gen_range(-scale..=scale);
                }
            }
            weights.push(w);
            biases.push(DVector::zeros(rows));
        }
        Ok(Network {
            dims,
            weights,
            biases,
            activation,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().unwrap()
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    /// All parameters flattened: per layer, row-major weights then biases.
    pub fn parameters(&self) -> Vec<f64> {
        let mut flat = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            for r in 0..w.nrows() {
                for c in 0..w.ncols() {
                    flat.push(w[(r, c)]);
                }
            }
            flat.extend(b.iter().copied());
        }
        flat
    }

    /// Writes back a flat parameter vector in [`Network::parameters`] order.
    pub fn set_parameters(&mut self, flat: &[f64]) -> Result<()> {
        let expected: usize = self
            .weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| w.len() + b.len())
            .sum();
        if flat.len() != expected {
            return Err(Error::LengthMismatch {
                left: expected,
                right: flat.len(),
            });
        }
        let mut i = 0;
        for (w, b) in self.weights.iter_mut().zip(&mut self.biases) {
            for r in 0..w.nrows() {
                for c in 0..w.ncols() {
                    w[(r, c)] = flat[i];
                    i += 1;
                }
            }
            for v in b.iter_mut() {
                *v = flat[i];
                i += 1;
            }
        }
        Ok(())
    }

    pub fn predict(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.input_dim() {
            return Err(Error::LengthMismatch {
                left: self.input_dim(),
                right: input.len(),
            });
        }
        let x = DMatrix::from_column_slice(input.len(), 1, input);
        let out = self.forward(&x).pop().unwrap().1;
        Ok(out.column(0).iter().copied().collect())
    }

    /// Forward pass over a batch stored one sample per column; returns the
    /// (pre-activation, post-activation) pair per layer.
    fn forward(&self, x: &DMatrix<f64>) -> Vec<(DMatrix<f64>, DMatrix<f64>)> {
        let layers = self.weights.len();
        let mut states = Vec::with_capacity(layers);
        let mut current = x.clone();
        for l in 0..layers {
            let mut z = &self.weights[l] * &current;
            for c in 0..z.ncols() {
                for r in 0..z.nrows() {
                    z[(r, c)] += self.biases[l][r];
                }
            }
            let act = if l + 1 == layers {
                Activation::Identity
            } else {
                self.activation
            };
            let a = z.map(|v| act.apply(v));
            current = a.clone();
            states.push((z, a));
        }
        states
    }

    /// Mean squared error over all output entries of a batch.
    pub fn loss(&self, inputs: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<f64> {
        let (x, y) = self.batch(inputs, targets)?;
        let states = self.forward(&x);
        let out = &states.last().unwrap().1;
        let diff = out - &y;
        Ok(diff.iter().map(|v| v * v).sum::<f64>() / (y.nrows() * y.ncols()) as f64)
    }

    /// Loss and its analytic gradient with respect to every parameter, in
    /// [`Network::parameters`] order.
    pub fn loss_gradient(
        &self,
        inputs: &[Vec<f64>],
        targets: &[Vec<f64>],
    ) -> Result<(f64, Vec<f64>)> {
        let (x, y) = self.batch(inputs, targets)?;
        let (loss, grads) = self.backprop(&x, &y);
        let mut flat = Vec::new();
        for (dw, db) in grads {
            for r in 0..dw.nrows() {
                for c in 0..dw.ncols() {
                    flat.push(dw[(r, c)]);
                }
            }
            flat.extend(db.iter().copied());
        }
        Ok((loss, flat))
    }

    fn batch(
        &self,
        inputs: &[Vec<f64>],
        targets: &[Vec<f64>],
    ) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        if inputs.len() != targets.len() {
            return Err(Error::LengthMismatch {
                left: inputs.len(),
                right: targets.len(),
            });
        }
        if inputs.is_empty() {
            return Err(Error::InvalidInput("empty training batch".into()));
        }
        let x = columns_from_rows(inputs, self.input_dim())?;
        let y = columns_from_rows(targets, self.output_dim())?;
        Ok((x, y))
    }

    fn backprop(&self, x: &DMatrix<f64>, y: &DMatrix<f64>) -> (f64, Vec<LayerGradient>) {
        let layers = self.weights.len();
        let states = self.forward(x);
        let out = &states[layers - 1].1;
        let diff = out - y;
        let count = (y.nrows() * y.ncols()) as f64;
        let loss = diff.iter().map(|v| v * v).sum::<f64>() / count;

        let mut grads: Vec<LayerGradient> = Vec::with_capacity(layers);
        let mut delta = diff * (2.0 / count);
        for l in (0..layers).rev() {
            let previous = if l == 0 { x } else { &states[l - 1].1 };
            let dw = &delta * previous.transpose();
            let db = DVector::from_iterator(
                delta.nrows(),
                (0..delta.nrows()).map(|r| delta.row(r).sum()),
            );
            grads.push((dw, db));
            if l > 0 {
                let mut back = self.weights[l].transpose() * &delta;
                let z_prev = &states[l - 1].0;
                for c in 0..back.ncols() {
                    for r in 0..back.nrows() {
                        back[(r, c)] *= self.activation.derivative(z_prev[(r, c)]);
                    }
                }
                delta = back;
            }
        }
        grads.reverse();
        (loss, grads)
    }

    fn apply_gradients(&mut self, grads: &[LayerGradient], learning_rate: f64) {
        for (l, (dw, db)) in grads.iter().enumerate() {
            self.weights[l] -= dw * learning_rate;
            self.biases[l] -= db * learning_rate;
        }
    }
}

fn train_feedforward(
    inputs: &[Vec<f64>],
    targets: &[Vec<f64>],
    config: &FeedforwardConfig,
) -> Result<Network> {
    if !(config.learning_rate.is_finite() && config.learning_rate > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "learning rate must be positive, got {}",
            config.learning_rate
        )));
    }
    if !(0.0..1.0).contains(&config.validation_fraction) {
        return Err(Error::InvalidConfig(format!(
            "validation fraction must lie in [0, 1), got {}",
            config.validation_fraction
        )));
    }
    if config.patience.is_some() && config.validation_fraction == 0.0 {
        return Err(Error::InvalidConfig(
            "early stopping needs a positive validation fraction".into(),
        ));
    }

    let mut dims = Vec::with_capacity(config.hidden_layers.len() + 2);
    dims.push(inputs[0].len());
    dims.extend_from_slice(&config.hidden_layers);
    dims.push(targets[0].len());
    let mut network = Network::new(dims, config.activation, config.seed)?;

    // Deterministic monitor split drawn from its own stream.
    let (train_idx, val_idx) = if config.validation_fraction > 0.0 {
        let n = inputs.len();
        let val_count = ((n as f64 * config.validation_fraction).round() as usize).max(1);
        if val_count >= n {
            return Err(Error::InvalidConfig(
                "validation fraction leaves no training subjects".into(),
            ));
        }
        let mut indices: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(0x9e37_79b9));
        indices.shuffle(&mut rng);
        (indices[val_count..].to_vec(), indices[..val_count].to_vec())
    } else {
        ((0..inputs.len()).collect(), Vec::new())
    };
    let gather =
        |idx: &[usize], rows: &[Vec<f64>]| -> Vec<Vec<f64>> { idx.iter().map(|&i| rows[i].clone()).collect() };
    let train_x = gather(&train_idx, inputs);
    let train_y = gather(&train_idx, targets);
    let val_x = gather(&val_idx, inputs);
    let val_y = gather(&val_idx, targets);

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut stale = 0usize;
    for epoch in 0..config.epochs {
        let (x, y) = network.batch(&train_x, &train_y)?;
        let (loss, grads) = network.backprop(&x, &y);
        if !loss.is_finite() {
            return Err(Error::TrainingDiverged { epoch });
        }
        network.apply_gradients(&grads, config.learning_rate);

        if !val_idx.is_empty() {
            let val_loss = network.loss(&val_x, &val_y)?;
            if !val_loss.is_finite() {
                return Err(Error::TrainingDiverged { epoch });
            }
            let improved = best.as_ref().is_none_or(|(b, _)| val_loss < *b);
            if improved {
                best = Some((val_loss, network.parameters()));
                stale = 0;
            } else {
                stale += 1;
                if config.patience.is_some_and(|p| stale > p) {
                    break;
                }
            }
        }
    }
    if let Some((_, params)) = best {
        network.set_parameters(&params)?;
    }
    let final_loss = network.loss(inputs, targets)?;
    if !final_loss.is_finite() {
        return Err(Error::TrainingDiverged {
            epoch: config.epochs,
        });
    }
    Ok(network)
}

/// A trained coefficient-space learner plus the configuration that built it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LearnerState {
    Ridge(RidgeMap),
    Feedforward {
        network: Network,
        config: FeedforwardConfig,
    },
}

impl LearnerState {
    pub fn input_dim(&self) -> usize {
        match self {
            LearnerState::Ridge(map) => map.input_dim(),
            LearnerState::Feedforward { network, .. } => network.input_dim(),
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            LearnerState::Ridge(map) => map.output_dim(),
            LearnerState::Feedforward { network, .. } => network.output_dim(),
        }
    }

    /// Maps one input coefficient vector to output coefficients.
    pub fn predict(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.input_dim() {
            return Err(Error::LengthMismatch {
                left: self.input_dim(),
                right: input.len(),
            });
        }
        match self {
            LearnerState::Ridge(map) => Ok(map.predict(input)),
            LearnerState::Feedforward { network, .. } => network.predict(input),
        }
    }
}

/// Trains the configured learner on paired coefficient rows.
pub fn train(
    inputs: &[Vec<f64>],
    outputs: &[Vec<f64>],
    config: &LearnerConfig,
) -> Result<LearnerState> {
    if inputs.len() != outputs.len() {
        return Err(Error::LengthMismatch {
            left: inputs.len(),
            right: outputs.len(),
        });
    }
    if inputs.is_empty() {
        return Err(Error::InvalidInput("no training subjects".into()));
    }
    match config {
        LearnerConfig::Ridge { lambda } => {
            let x = rows_to_matrix(inputs)?;
            let y = rows_to_matrix(outputs)?;
            Ok(LearnerState::Ridge(train_ridge(&x, &y, *lambda)?))
        }
        LearnerConfig::Feedforward(ff) => {
            rows_to_matrix(inputs)?;
            rows_to_matrix(outputs)?;
            Ok(LearnerState::Feedforward {
                network: train_feedforward(inputs, outputs, ff)?,
                config: ff.clone(),
            })
        }
    }
}

/// Full pipeline configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct M2PConfig {
    pub degree_input: usize,
    pub degree_output: usize,
    pub placement_input: Placement,
    pub placement_output: Placement,
    pub learner: LearnerConfig,
    /// Rescale input and output values onto `[-1, 1]` before fitting; the
    /// scaling is computed from the training data only and inverted on
    /// prediction.
    pub normalize: bool,
}

/// A trained pipeline: both knot sequences, the learner, the value scalings
/// when normalization was requested, and the training output grid used as
/// the default prediction grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawM2PModel", into = "RawM2PModel")]
pub struct M2PModel {
    input_knots: KnotSequence,
    output_knots: KnotSequence,
    learner: LearnerState,
    input_scaling: Option<ValueScaling>,
    output_scaling: Option<ValueScaling>,
    output_grid: Vec<f64>,
    config: M2PConfig,
}

#[derive(Serialize, Deserialize)]
struct RawM2PModel {
    input_knots: KnotSequence,
    output_knots: KnotSequence,
    input_dim: usize,
    output_dim: usize,
    learner: LearnerState,
    input_scaling: Option<ValueScaling>,
    output_scaling: Option<ValueScaling>,
    output_grid: Vec<f64>,
    config: M2PConfig,
}

impl TryFrom<RawM2PModel> for M2PModel {
    type Error = Error;

    fn try_from(raw: RawM2PModel) -> Result<Self> {
        if raw.input_dim != raw.input_knots.basis_count()
            || raw.learner.input_dim() != raw.input_knots.basis_count()
        {
            return Err(Error::InvalidInput(
                "input dimension does not match the input basis".into(),
            ));
        }
        if raw.output_dim != raw.output_knots.basis_count()
            || raw.learner.output_dim() != raw.output_knots.basis_count()
        {
            return Err(Error::InvalidInput(
                "output dimension does not match the output basis".into(),
            ));
        }
        if raw.output_grid.is_empty()
            || raw.output_grid.windows(2).any(|w| w[1] <= w[0])
            || !raw.output_grid.iter().all(|&s| raw.output_knots.contains(s))
        {
            return Err(Error::InvalidInput(
                "stored output grid is not an increasing sequence inside the output domain".into(),
            ));
        }
        Ok(M2PModel {
            input_knots: raw.input_knots,
            output_knots: raw.output_knots,
            learner: raw.learner,
            input_scaling: raw.input_scaling,
            output_scaling: raw.output_scaling,
            output_grid: raw.output_grid,
            config: raw.config,
        })
    }
}

impl From<M2PModel> for RawM2PModel {
    fn from(model: M2PModel) -> Self {
        RawM2PModel {
            input_dim: model.input_knots.basis_count(),
            output_dim: model.output_knots.basis_count(),
            input_knots: model.input_knots,
            output_knots: model.output_knots,
            learner: model.learner,
            input_scaling: model.input_scaling,
            output_scaling: model.output_scaling,
            output_grid: model.output_grid,
            config: model.config,
        }
    }
}

impl M2PModel {
    pub fn input_knots(&self) -> &KnotSequence {
        &self.input_knots
    }

    pub fn output_knots(&self) -> &KnotSequence {
        &self.output_knots
    }

    pub fn input_dim(&self) -> usize {
        self.input_knots.basis_count()
    }

    pub fn output_dim(&self) -> usize {
        self.output_knots.basis_count()
    }

    pub fn learner(&self) -> &LearnerState {
        &self.learner
    }

    pub fn output_grid(&self) -> &[f64] {
        &self.output_grid
    }

    pub fn config(&self) -> &M2PConfig {
        &self.config
    }

    /// Projects a new input function onto the input basis, maps its
    /// coefficients through the learner, and evaluates the output spline on
    /// `output_grid` (default: the training output grid).
    pub fn predict(
        &self,
        input: &SampledFunction,
        output_grid: Option<&[f64]>,
    ) -> Result<SampledFunction> {
        let scaled: Vec<f64> = match &self.input_scaling {
            Some(s) => input.values().iter().map(|&v| s.apply(v)).collect(),
            None => input.values().to_vec(),
        };
        let design = design_matrix(&self.input_knots, input.grid())?;
        let projected = fit_least_squares(&design, &[scaled], 0.0)?;
        let output_coeffs = self.learner.predict(&projected.coefficients()[0])?;

        let grid = output_grid.unwrap_or(&self.output_grid);
        let mut values = Vec::with_capacity(grid.len());
        for &s in grid {
            let row = self.output_knots.basis_row(s)?;
            let mut v: f64 = row.iter().zip(&output_coeffs).map(|(b, c)| b * c).sum();
            if let Some(sc) = &self.output_scaling {
                v = sc.invert(v);
            }
            values.push(v);
        }
        SampledFunction::new(grid.to_vec(), values)
    }
}

/// Fits the whole pipeline on paired training sets (same subject order on
/// both sides).
pub fn fit_m2p(
    inputs: &FunctionSet,
    outputs: &FunctionSet,
    config: &M2PConfig,
) -> Result<M2PModel> {
    if inputs.function_count() != outputs.function_count() {
        return Err(Error::LengthMismatch {
            left: inputs.function_count(),
            right: outputs.function_count(),
        });
    }
    let (input_set, input_scaling) = if config.normalize {
        let (set, scaling) = normalize(inputs)?;
        (set, Some(scaling))
    } else {
        (inputs.clone(), None)
    };
    let (output_set, output_scaling) = if config.normalize {
        let (set, scaling) = normalize(outputs)?;
        (set, Some(scaling))
    } else {
        (outputs.clone(), None)
    };

    let rep_in = fit_representation(&input_set, config.degree_input, config.placement_input)?;
    let rep_out = fit_representation(&output_set, config.degree_output, config.placement_output)?;
    let learner = train(&rep_in.coefficients, &rep_out.coefficients, &config.learner)?;

    Ok(M2PModel {
        input_knots: rep_in.knots,
        output_knots: rep_out.knots,
        learner,
        input_scaling,
        output_scaling,
        output_grid: outputs.grid().to_vec(),
        config: config.clone(),
    })
}

/// One subject's contribution to the evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubjectReport {
    pub subject: usize,
    /// Squared difference of curve means.
    pub mean_error_sq: f64,
    /// Mean squared pointwise residual over the subject's samples.
    pub pointwise_mse: f64,
}

/// Aggregated prediction quality over a test set.
#[derive(Debug, Clone, PartialEq)]
pub struct M2PEvaluation {
    pub mspe_mean: f64,
    pub mspe_function: f64,
    pub subjects: Vec<SubjectReport>,
}

/// Predicts every test subject on the test output grid and aggregates the
/// mean-level and pointwise prediction errors.
pub fn evaluate(
    model: &M2PModel,
    test_inputs: &FunctionSet,
    test_outputs: &FunctionSet,
) -> Result<M2PEvaluation> {
    if test_inputs.function_count() != test_outputs.function_count() {
        return Err(Error::LengthMismatch {
            left: test_inputs.function_count(),
            right: test_outputs.function_count(),
        });
    }
    let grid = test_outputs.grid();
    let mut predicted = Vec::with_capacity(test_inputs.function_count());
    for i in 0..test_inputs.function_count() {
        let input = test_inputs.function(i)?;
        predicted.push(model.predict(&input, Some(grid))?.values().to_vec());
    }
    let actual: Vec<Vec<f64>> = test_outputs.rows().to_vec();
    let mspe_mean = metrics::mspe_mean(&actual, &predicted)?;
    let mspe_function = metrics::mspe_function(&actual, &predicted)?;
    let subjects = actual
        .iter()
        .zip(&predicted)
        .enumerate()
        .map(|(i, (a, p))| {
            let r = a.len() as f64;
            let ma = a.iter().sum::<f64>() / r;
            let mp = p.iter().sum::<f64>() / r;
            let mse = a.iter().zip(p).map(|(x, y)| (y - x) * (y - x)).sum::<f64>() / r;
            SubjectReport {
                subject: i,
                mean_error_sq: (mp - ma) * (mp - ma),
                pointwise_mse: mse,
            }
        })
        .collect();
    Ok(M2PEvaluation {
        mspe_mean,
        mspe_function,
        subjects,
    })
}

fn rows_to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    if rows.is_empty() {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    let cols = rows[0].len();
    if cols == 0 {
        return Err(Error::InvalidInput("matrix rows are empty".into()));
    }
    let mut m = DMatrix::zeros(rows.len(), cols);
    for (r, row) in rows.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::InvalidInput(format!(
                "row {r} has {} entries, expected {cols}",
                row.len()
            )));
        }
        for (c, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "row {r} contains a non-finite value"
                )));
            }
            m[(r, c)] = v;
        }
    }
    Ok(m)
}

fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|r| m.row(r).iter().copied().collect())
        .collect()
}

fn columns_from_rows(rows: &[Vec<f64>], dim: usize) -> Result<DMatrix<f64>> {
    let mut m = DMatrix::zeros(dim, rows.len());
    for (c, row) in rows.iter().enumerate() {
        if row.len() != dim {
            return Err(Error::LengthMismatch {
                left: dim,
                right: row.len(),
            });
        }
        for (r, &v) in row.iter().enumerate() {
            m[(r, c)] = v;
        }
    }
    Ok(m)
}
