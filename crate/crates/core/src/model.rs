//! A small ReLU classifier with exact input gradients, minibatch SGD training,
//! a synthetic blob dataset, and an input-quantization defense wrapper.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::rng::Rng;
use crate::vector::Vector;

/// Dense row-major matrix, sized rows×cols (output×input for a layer).
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix shape mismatch");
        assert!(data.iter().all(|v| v.is_finite()), "matrix entries must be finite");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    /// `W·x`.
    pub fn mul_vec(&self, x: &Vector) -> Vector {
        assert_eq!(x.dim(), self.cols, "matrix-vector dimension mismatch");
        let mut out = Vec::with_capacity(self.rows);
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            out.push(row.iter().zip(x.iter()).map(|(w, v)| w * v).sum());
        }
        Vector::new(out)
    }

    /// `Wᵀ·d`.
    pub fn transpose_mul_vec(&self, d: &Vector) -> Vector {
        assert_eq!(d.dim(), self.rows, "matrix-vector dimension mismatch");
        let mut out = vec![0.0; self.cols];
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            for (o, w) in out.iter_mut().zip(row.iter()) {
                *o += w * d[r];
            }
        }
        Vector::new(out)
    }

    /// Rank-one accumulation `self += d ⊗ a`.
    fn add_outer(&mut self, d: &Vector, a: &Vector) {
        assert_eq!(d.dim(), self.rows);
        assert_eq!(a.dim(), self.cols);
        for r in 0..self.rows {
            let row = &mut self.data[r * self.cols..(r + 1) * self.cols];
            for (w, v) in row.iter_mut().zip(a.iter()) {
                *w += d[r] * v;
            }
        }
    }

    fn step_against(&mut self, grad: &Matrix, lr: f64) {
        for (w, g) in self.data.iter_mut().zip(grad.data.iter()) {
            *w -= lr * g;
        }
    }
}

/// One dense layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: Matrix,
    pub bias: Vector,
}

/// Numerically stable softmax.
pub fn softmax(logits: &Vector) -> Vector {
    let max = logits.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let exps: Vec<f64> = logits.iter().map(|&l| libm::exp(l - max)).collect();
    let sum: f64 = exps.iter().sum();
    Vector::new(exps.into_iter().map(|e| e / sum).collect())
}

/// Cross-entropy of `softmax(logits)` at class `y`, via log-sum-exp.
pub fn cross_entropy(logits: &Vector, y: usize) -> f64 {
    assert!(y < logits.dim(), "label out of range");
    let max = logits.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let lse = max + libm::log(logits.iter().map(|&l| libm::exp(l - max)).sum::<f64>());
    lse - logits[y]
}

/// Anything that maps an input vector to class logits and can report the
/// gradient of the cross-entropy loss with respect to that input.
pub trait Classifier {
    fn input_dim(&self) -> usize;
    fn class_count(&self) -> usize;
    fn logits(&self, x: &Vector) -> Vector;
    /// Gradient of `cross_entropy(logits(x), y)` with respect to `x`.
    fn input_grad(&self, x: &Vector, y: usize) -> Vector;

    /// Logits and softmax probabilities in one pass.
    fn forward(&self, x: &Vector) -> (Vector, Vector) {
        let logits = self.logits(x);
        let probs = softmax(&logits);
        (logits, probs)
    }

    fn loss(&self, x: &Vector, y: usize) -> f64 {
        cross_entropy(&self.logits(x), y)
    }

    fn predict(&self, x: &Vector) -> usize {
        self.logits(x).argmax()
    }
}

/// Fully connected ReLU network; hidden layers use ReLU, the output is linear.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<Layer>,
}

struct Trace {
    /// Preactivations per layer.
    pre: Vec<Vector>,
    /// Activations per layer (last entry is the logits).
    act: Vec<Vector>,
}

impl Mlp {
    /// He-initialized network with the given layer widths, e.g. `[16, 32, 32, 4]`.
    pub fn init(dims: &[usize], rng: &mut Rng) -> Self {
        assert!(dims.len() >= 2, "need at least input and output dims");
        assert!(dims.iter().all(|&d| d > 0), "layer widths must be positive");
        let layers = dims
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let std = libm::sqrt(2.0 / fan_in as f64);
                let data = (0..fan_in * fan_out).map(|_| std * rng.normal()).collect();
                Layer {
                    weights: Matrix::from_rows(fan_out, fan_in, data),
                    bias: Vector::zeros(fan_out),
                }
            })
            .collect();
        Self { layers }
    }

    /// Builds a network from explicit layers, validating that dimensions chain.
    pub fn from_layers(layers: Vec<Layer>) -> Self {
        assert!(!layers.is_empty(), "network needs at least one layer");
        for pair in layers.windows(2) {
            assert_eq!(
                pair[0].weights.rows(),
                pair[1].weights.cols(),
                "consecutive layer dimensions must chain"
            );
        }
        for layer in &layers {
            assert_eq!(layer.bias.dim(), layer.weights.rows(), "bias dimension mismatch");
        }
        Self { layers }
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut dims = vec![self.layers[0].weights.cols()];
        dims.extend(self.layers.iter().map(|l| l.weights.rows()));
        dims
    }

    fn trace(&self, x: &Vector) -> Trace {
        let last = self.layers.len() - 1;
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut act = Vec::with_capacity(self.layers.len());
        let mut current = x.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            let z = layer.weights.mul_vec(&current).add(&layer.bias);
            current = if i == last { z.clone() } else { z.map(|v| v.max(0.0)) };
            pre.push(z);
            act.push(current.clone());
        }
        Trace { pre, act }
    }

    /// Smallest |preactivation| over hidden units at `x`.
    ///
    /// Points where this is tiny sit on a ReLU kink, where finite-difference
    /// gradient checks are ill-conditioned.
    pub fn relu_margin(&self, x: &Vector) -> f64 {
        let trace = self.trace(x);
        let mut margin = f64::INFINITY;
        for z in &trace.pre[..self.layers.len() - 1] {
            for v in z.iter() {
                margin = margin.min(v.abs());
            }
        }
        margin
    }

    /// Loss, input gradient, and (optionally) per-layer weight/bias gradients.
    fn backprop(&self, x: &Vector, y: usize, want_weights: bool) -> (f64, Vector, Option<Vec<Layer>>) {
        let trace = self.trace(x);
        let last = self.layers.len() - 1;
        let logits = &trace.act[last];
        let loss = cross_entropy(logits, y);
        let probs = softmax(logits);
        // d(loss)/d(logits) = probs - onehot(y)
        let mut d_pre = Vector::new(
            (0..probs.dim())
                .map(|i| probs[i] - if i == y { 1.0 } else { 0.0 })
                .collect(),
        );
        let mut weight_grads = want_weights.then(Vec::new);
        for l in (0..self.layers.len()).rev() {
            if let Some(grads) = weight_grads.as_mut() {
                let below = if l == 0 { x } else { &trace.act[l - 1] };
                let mut gw = Matrix::zeros(self.layers[l].weights.rows(), self.layers[l].weights.cols());
                gw.add_outer(&d_pre, below);
                grads.push(Layer { weights: gw, bias: d_pre.clone() });
            }
            let d_below = self.layers[l].weights.transpose_mul_vec(&d_pre);
            if l == 0 {
                if let Some(grads) = weight_grads.as_mut() {
                    grads.reverse();
                }
                return (loss, d_below, weight_grads);
            }
            // ReLU backward: pass where the preactivation was positive.
            d_pre = Vector::new(
                d_below
                    .iter()
                    .zip(trace.pre[l - 1].iter())
                    .map(|(&d, &z)| if z > 0.0 { d } else { 0.0 })
                    .collect(),
            );
        }
        unreachable!("network has at least one layer");
    }
}

impl Classifier for Mlp {
    fn input_dim(&self) -> usize {
        self.layers[0].weights.cols()
    }

    fn class_count(&self) -> usize {
        self.layers[self.layers.len() - 1].weights.rows()
    }

    fn logits(&self, x: &Vector) -> Vector {
        assert_eq!(x.dim(), self.input_dim(), "input dimension mismatch");
        let last = self.layers.len() - 1;
        let mut current = x.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            let z = layer.weights.mul_vec(&current).add(&layer.bias);
            current = if i == last { z } else { z.map(|v| v.max(0.0)) };
        }
        current
    }

    fn input_grad(&self, x: &Vector, y: usize) -> Vector {
        assert_eq!(x.dim(), self.input_dim(), "input dimension mismatch");
        assert!(y < self.class_count(), "label out of range");
        self.backprop(x, y, false).1
    }
}

/// Input-quantization defense: rounds the input to a uniform grid before the
/// wrapped classifier sees it. The rounding is piecewise constant, so its
/// backward pass is zero (almost everywhere) when quantization is active.
#[derive(Debug, Clone)]
pub struct DefenseWrapper<M> {
    pub inner: M,
    pub quantization_levels: Option<u32>,
}

impl<M> DefenseWrapper<M> {
    pub fn new(inner: M, quantization_levels: Option<u32>) -> Self {
        if let Some(levels) = quantization_levels {
            assert!(levels > 0, "quantization levels must be positive");
        }
        Self { inner, quantization_levels }
    }

    pub fn quantize(&self, x: &Vector) -> Vector {
        match self.quantization_levels {
            Some(levels) => {
                let l = f64::from(levels);
                x.map(|v| libm::round(v * l) / l)
            }
            None => x.clone(),
        }
    }
}

impl<M: Classifier> Classifier for DefenseWrapper<M> {
    fn input_dim(&self) -> usize {
        self.inner.input_dim()
    }

    fn class_count(&self) -> usize {
        self.inner.class_count()
    }

    fn logits(&self, x: &Vector) -> Vector {
        self.inner.logits(&self.quantize(x))
    }

    fn input_grad(&self, x: &Vector, y: usize) -> Vector {
        match self.quantization_levels {
            Some(_) => {
                assert!(y < self.class_count(), "label out of range");
                Vector::zeros(x.dim())
            }
            None => self.inner.input_grad(x, y),
        }
    }
}

/// Labeled samples partitioned into train/test/auxiliary pools.
///
/// The pools are disjoint by construction; auxiliary samples never appear in
/// training or evaluation sets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub dim: usize,
    pub class_count: usize,
    pub train: Vec<(Vector, usize)>,
    pub test: Vec<(Vector, usize)>,
    pub aux: Vec<(Vector, usize)>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.train.len() + self.test.len() + self.aux.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Indices into the auxiliary pool holding the given class.
    pub fn aux_indices_of_class(&self, class: usize) -> Vec<usize> {
        (0..self.aux.len()).filter(|&i| self.aux[i].1 == class).collect()
    }
}

/// Shape of a synthetic dataset: per-class sample counts for each pool.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub dim: usize,
    pub class_count: usize,
    pub train_per_class: usize,
    pub test_per_class: usize,
    pub aux_per_class: usize,
    pub spread: f64,
}

/// Gaussian blobs around per-class centers, clipped to `[0,1]^dim`.
///
/// Gaussian blobs around distinct class centers, clipped to `[0,1]^dim`.
///
/// Each class is multi-modal: it owns a random ranking of the coordinates
/// with geometrically decaying amplitudes `a_cj = 0.25·0.96^rank` and a base
/// sign pattern, and three mode centers at `0.5 ± a_cj`. The top-ranked
/// coordinates (the class skeleton) keep the base signs in every mode; the
/// remaining salient coordinates get fresh signs per mode. Modes of one class
/// therefore share what makes the class recognizable but differ in how the
/// secondary features are expressed, the way visually distinct instances of
/// one category do. Samples cycle through the modes and add isotropic
/// `spread·N(0, I)` noise. Fully deterministic under the seed.
pub fn make_synthetic(rng: &mut Rng, spec: &SyntheticSpec) -> Dataset {
    assert!(spec.dim >= 2, "dimension must be at least 2");
    assert!(spec.class_count >= 2, "need at least two classes");
    assert!(spec.spread >= 0.0, "spread must be nonnegative");
    const MODES: usize = 3;
    const SKELETON: usize = 8;
    let mode_centers: Vec<Vec<Vector>> = (0..spec.class_count)
        .map(|_| {
            let mut rank: Vec<usize> = (0..spec.dim).collect();
            rng.shuffle(&mut rank);
            let amplitudes: Vec<f64> = (0..spec.dim)
                .map(|j| 0.25 * libm::pow(0.96, rank[j] as f64))
                .collect();
            let base_signs: Vec<f64> = (0..spec.dim)
                .map(|_| if rng.next_f64() < 0.5 { -1.0 } else { 1.0 })
                .collect();
            (0..MODES)
                .map(|_| {
                    Vector::new(
                        (0..spec.dim)
                            .map(|j| {
                                let sign = if rank[j] < SKELETON {
                                    base_signs[j]
                                } else if rng.next_f64() < 0.5 {
                                    -1.0
                                } else {
                                    1.0
                                };
                                0.5 + sign * amplitudes[j]
                            })
                            .collect(),
                    )
                })
                .collect()
        })
        .collect();
    let draw_pool = |count: usize, rng: &mut Rng| {
        let mut pool = Vec::with_capacity(count * spec.class_count);
        for (class, modes) in mode_centers.iter().enumerate() {
            for i in 0..count {
                let center = &modes[i % MODES];
                let noise = rng.normal_vector(spec.dim);
                let sample = center.add_scaled(spec.spread, &noise).map(|v| v.clamp(0.0, 1.0));
                pool.push((sample, class));
            }
        }
        pool
    };
    let train = draw_pool(spec.train_per_class, rng);
    let test = draw_pool(spec.test_per_class, rng);
    let aux = draw_pool(spec.aux_per_class, rng);
    Dataset { dim: spec.dim, class_count: spec.class_count, train, test, aux }
}

/// Result of a training run.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: Mlp,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
}

/// Fraction of samples the model classifies correctly.
pub fn accuracy(model: &impl Classifier, samples: &[(Vector, usize)]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let correct = samples.iter().filter(|(x, y)| model.predict(x) == *y).count();
    correct as f64 / samples.len() as f64
}

/// Minibatch SGD on the cross-entropy loss. Deterministic under the seed; zero
/// epochs returns the model unchanged.
pub fn train(
    model: Mlp,
    data: &Dataset,
    epochs: usize,
    lr: f64,
    batch_size: usize,
    rng: &mut Rng,
) -> Result<TrainOutcome, CoreError> {
    if data.train.is_empty() {
        return Err(CoreError::EmptyDataset);
    }
    assert!(lr > 0.0 && batch_size > 0, "invalid training hyperparameters");
    let mut model = model;
    let mut order: Vec<usize> = (0..data.train.len()).collect();
    for _ in 0..epochs {
        rng.shuffle(&mut order);
        for batch in order.chunks(batch_size) {
            let mut grads: Option<Vec<Layer>> = None;
            for &idx in batch {
                let (x, y) = &data.train[idx];
                let (_, _, sample_grads) = model.backprop(x, *y, true);
                let sample_grads = sample_grads.expect("weight gradients requested");
                match grads.as_mut() {
                    None => grads = Some(sample_grads),
                    Some(acc) => {
                        for (a, g) in acc.iter_mut().zip(sample_grads) {
                            for (w, gw) in a.weights.data.iter_mut().zip(g.weights.data) {
                                *w += gw;
                            }
                            a.bias = a.bias.add(&g.bias);
                        }
                    }
                }
            }
            let grads = grads.expect("non-empty batch");
            let scale = lr / batch.len() as f64;
            for (layer, grad) in model.layers.iter_mut().zip(grads) {
                layer.weights.step_against(&grad.weights, scale);
                layer.bias = layer.bias.add_scaled(-scale, &grad.bias);
            }
        }
    }
    let train_accuracy = accuracy(&model, &data.train);
    let test_accuracy = accuracy(&model, &data.test);
    Ok(TrainOutcome { model, train_accuracy, test_accuracy })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gradcheck::finite_diff_grad;

    fn zero_network(dims: &[usize]) -> Mlp {
        Mlp::from_layers(
            dims.windows(2)
                .map(|w| Layer {
                    weights: Matrix::zeros(w[1], w[0]),
                    bias: Vector::zeros(w[1]),
                })
                .collect(),
        )
    }

    #[test]
    fn zero_network_gives_uniform_probs_and_zero_grad() {
        let model = zero_network(&[3, 5, 4]);
        let x = Vector::new(vec![0.3, 0.7, 0.1]);
        let (logits, probs) = model.forward(&x);
        assert_eq!(logits.as_slice(), &[0.0; 4]);
        for p in probs.iter() {
            assert!((p - 0.25).abs() < 1e-15);
        }
        assert_eq!(model.input_grad(&x, 2).as_slice(), &[0.0; 3]);
    }

    #[test]
    fn identity_layer_equal_logits() {
        let model = Mlp::from_layers(vec![Layer {
            weights: Matrix::from_rows(2, 2, vec![1.0, 0.0, 0.0, 1.0]),
            bias: Vector::zeros(2),
        }]);
        let (_, probs) = model.forward(&Vector::zeros(2));
        assert!((probs[0] - 0.5).abs() < 1e-15);
        assert!((probs[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn softmax_and_loss_reference_values() {
        let logits = Vector::new(vec![2.0, 0.0]);
        let probs = softmax(&logits);
        assert!((probs[0] - 0.8808).abs() < 5e-5);
        assert!((probs[1] - 0.1192).abs() < 5e-5);
        assert!((cross_entropy(&logits, 0) - 0.1269).abs() < 5e-5);
        // loss == -ln(probs[y]) within 1e-12
        assert!((cross_entropy(&logits, 1) - (-libm::log(probs[1]))).abs() < 1e-12);
    }

    #[test]
    fn loss_of_uniform_probs_is_ln_c() {
        let model = zero_network(&[4, 6]);
        let x = Vector::new(vec![0.1, 0.2, 0.3, 0.4]);
        assert!((model.loss(&x, 3) - libm::log(6.0)).abs() < 1e-12);
    }

    #[test]
    fn saturated_loss_is_zero() {
        let logits = Vector::new(vec![60.0, 0.0, 0.0]);
        assert!(cross_entropy(&logits, 0) < 1e-9);
        assert!(cross_entropy(&logits, 0) >= 0.0);
    }

    #[test]
    fn softmax_sums_to_one_and_stays_in_range() {
        let mut rng = Rng::new(21);
        for _ in 0..100 {
            let logits = Vector::new((0..5).map(|_| rng.uniform(-30.0, 30.0)).collect());
            let probs = softmax(&logits);
            let sum: f64 = probs.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
            assert!(probs.iter().all(|p| (0.0..=1.0).contains(p)));
        }
    }

    #[test]
    fn input_grad_matches_finite_differences() {
        let mut rng = Rng::new(77);
        for trial in 0..25 {
            let model = Mlp::init(&[4, 8, 6, 3], &mut rng.split(trial));
            let x = Vector::new((0..4).map(|_| rng.uniform(0.05, 0.95)).collect());
            if model.relu_margin(&x) < 1e-3 {
                continue;
            }
            let y = (trial % 3) as usize;
            let exact = model.input_grad(&x, y);
            let numeric = finite_diff_grad(|p| model.loss(p, y), &x, 1e-5).unwrap();
            let scale = numeric.iter().fold(1e-6f64, |a, b| a.max(b.abs()));
            for i in 0..4 {
                assert!(
                    (exact[i] - numeric[i]).abs() / scale < 1e-4,
                    "trial {trial}: coordinate {i}: {} vs {}",
                    exact[i],
                    numeric[i]
                );
            }
        }
    }

    #[test]
    fn quantization_wrapper_matches_manual_composition() {
        let mut rng = Rng::new(5);
        let model = Mlp::init(&[3, 6, 2], &mut rng);
        let wrapped = DefenseWrapper::new(model.clone(), Some(5));
        let x = Vector::new(vec![0.12, 0.49, 0.83]);
        let quantized = wrapped.quantize(&x);
        assert_eq!(wrapped.logits(&x), model.logits(&quantized));
        // Quantized backward pass is identically zero.
        assert_eq!(wrapped.input_grad(&x, 1).as_slice(), &[0.0; 3]);
        // Without levels the wrapper is transparent.
        let transparent = DefenseWrapper::new(model.clone(), None);
        assert_eq!(transparent.logits(&x), model.logits(&x));
        assert_eq!(transparent.input_grad(&x, 0), model.input_grad(&x, 0));
    }

    #[test]
    fn synthetic_counts_and_determinism() {
        let spec = SyntheticSpec {
            dim: 4,
            class_count: 4,
            train_per_class: 10,
            test_per_class: 0,
            aux_per_class: 0,
            spread: 0.1,
        };
        let a = make_synthetic(&mut Rng::new(3), &spec);
        let b = make_synthetic(&mut Rng::new(3), &spec);
        assert_eq!(a.len(), 40);
        assert_eq!(a, b);
        assert!(a.train.iter().all(|(x, y)| *y < 4 && x.iter().all(|v| (0.0..=1.0).contains(v))));
    }

    #[test]
    fn zero_spread_collapses_to_mode_centers() {
        let spec = SyntheticSpec {
            dim: 3,
            class_count: 2,
            train_per_class: 9,
            test_per_class: 3,
            aux_per_class: 0,
            spread: 0.0,
        };
        let data = make_synthetic(&mut Rng::new(11), &spec);
        for class in 0..2 {
            let mut distinct: Vec<Vector> = Vec::new();
            for (x, y) in data.train.iter().chain(data.test.iter()) {
                if *y == class && !distinct.contains(x) {
                    distinct.push(x.clone());
                }
            }
            // Every sample sits exactly on one of the class's three mode centers.
            assert!(distinct.len() <= 3, "class {class} has {} centers", distinct.len());
        }
    }

    #[test]
    fn training_separable_blobs_reaches_high_accuracy() {
        let spec = SyntheticSpec {
            dim: 6,
            class_count: 2,
            train_per_class: 40,
            test_per_class: 20,
            aux_per_class: 0,
            spread: 0.02,
        };
        let data = make_synthetic(&mut Rng::new(1), &spec);
        let mut rng = Rng::new(2);
        let model = Mlp::init(&[6, 16, 2], &mut rng);
        let outcome = train(model, &data, 50, 0.1, 8, &mut rng).unwrap();
        assert!(outcome.test_accuracy >= 0.95, "accuracy {}", outcome.test_accuracy);
    }

    #[test]
    fn zero_epochs_is_identity_and_training_is_deterministic() {
        let spec = SyntheticSpec {
            dim: 4,
            class_count: 2,
            train_per_class: 10,
            test_per_class: 5,
            aux_per_class: 0,
            spread: 0.05,
        };
        let data = make_synthetic(&mut Rng::new(4), &spec);
        let model = Mlp::init(&[4, 8, 2], &mut Rng::new(9));
        let untouched = train(model.clone(), &data, 0, 0.1, 4, &mut Rng::new(5)).unwrap();
        assert_eq!(untouched.model, model);

        let run1 = train(model.clone(), &data, 7, 0.1, 4, &mut Rng::new(5)).unwrap();
        let run2 = train(model, &data, 7, 0.1, 4, &mut Rng::new(5)).unwrap();
        assert_eq!(run1.model, run2.model);
    }

    #[test]
    fn training_on_empty_data_is_an_error() {
        let data = Dataset { dim: 2, class_count: 2, train: vec![], test: vec![], aux: vec![] };
        let model = Mlp::init(&[2, 2], &mut Rng::new(0));
        assert_eq!(train(model, &data, 1, 0.1, 4, &mut Rng::new(0)).unwrap_err(), CoreError::EmptyDataset);
    }
}
