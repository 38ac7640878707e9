//! Dense feed-forward classifier trained with Adam on sparse categorical
//! cross-entropy.

use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{MlError, Result};

pub const SELU_LAMBDA: f64 = 1.05070098;
pub const SELU_ALPHA: f64 = 1.67326324;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Selu,
    Tanh,
    Softmax,
}

impl std::str::FromStr for Activation {
    type Err = MlError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "relu" => Ok(Self::Relu),
            "selu" => Ok(Self::Selu),
            "tanh" => Ok(Self::Tanh),
            "softmax" => Ok(Self::Softmax),
            other => Err(MlError::Config(format!("unknown activation {other:?}"))),
        }
    }
}

/// Scalar value and derivative; softmax is vector-valued, see [`softmax_rows`].
pub fn activation_scalar(kind: Activation, x: f64) -> (f64, f64) {
    match kind {
        Activation::Relu => {
            if x > 0.0 {
                (x, 1.0)
            } else {
                (0.0, 0.0)
            }
        }
        Activation::Selu => {
            if x > 0.0 {
                (SELU_LAMBDA * x, SELU_LAMBDA)
            } else {
                let e = SELU_LAMBDA * SELU_ALPHA * x.exp();
                (e - SELU_LAMBDA * SELU_ALPHA, e)
            }
        }
        Activation::Tanh => {
            let t = x.tanh();
            (t, 1.0 - t * t)
        }
        Activation::Softmax => panic!("softmax is not elementwise"),
    }
}

/// Row-wise softmax with max-subtraction.
pub fn softmax_rows(z: &Array2<f64>) -> Array2<f64> {
    let mut out = z.clone();
    for mut row in out.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let s = row.sum();
        row /= s;
    }
    out
}

fn apply(kind: Activation, z: &Array2<f64>) -> Array2<f64> {
    match kind {
        Activation::Softmax => softmax_rows(z),
        k => z.mapv(|v| activation_scalar(k, v).0),
    }
}

/// Back-propagate `da` (gradient w.r.t. the activation output `a`) through
/// the activation at pre-activation `z`.
fn activation_backward(
    kind: Activation,
    z: &Array2<f64>,
    a: &Array2<f64>,
    da: &Array2<f64>,
) -> Array2<f64> {
    match kind {
        Activation::Softmax => {
            let dot = (da * a).sum_axis(Axis(1)).insert_axis(Axis(1));
            a * &(da - &dot)
        }
        k => {
            let mut dz = da.clone();
            dz.zip_mut_with(z, |g, &zv| *g *= activation_scalar(k, zv).1);
            dz
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub units: usize,
    pub activation: Activation,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MlpConfig {
    /// Hidden layers; a softmax output layer is always appended.
    pub hidden: Vec<LayerSpec>,
    /// Dropout rate after each hidden layer.
    pub dropout: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
}

impl MlpConfig {
    fn with_hidden(hidden: &[Activation], dropout: f64, batch_size: usize) -> Self {
        Self {
            hidden: hidden
                .iter()
                .map(|&activation| LayerSpec {
                    units: 128,
                    activation,
                })
                .collect(),
            dropout,
            epochs: 1000,
            batch_size,
            learning_rate: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 0,
        }
    }

    /// Three 128-wide layers (SELU, ReLU, tanh), dropout 0.4, batch 200.
    pub fn deep() -> Self {
        Self::with_hidden(
            &[Activation::Selu, Activation::Relu, Activation::Tanh],
            0.4,
            200,
        )
    }

    /// Two 128-wide layers (SELU, ReLU), dropout 0.3, batch 100.
    pub fn shallow() -> Self {
        Self::with_hidden(&[Activation::Selu, Activation::Relu], 0.3, 100)
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(MlError::Config(format!(
                "dropout {} outside [0, 1)",
                self.dropout
            )));
        }
        if self.batch_size == 0 {
            return Err(MlError::Config("batch size must be positive".into()));
        }
        if self.hidden.iter().any(|l| l.units == 0) {
            return Err(MlError::Config("layers need at least one unit".into()));
        }
        Ok(())
    }
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self::deep()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    /// `inputs x outputs`.
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub activation: Activation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Moments {
    w: Array2<f64>,
    b: Array1<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    step: u64,
    first: Vec<Moments>,
    second: Vec<Moments>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: Option<f64>,
    pub val_accuracy: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    /// Input width followed by every layer width.
    pub sizes: Vec<usize>,
    pub layers: Vec<Dense>,
    pub dropout: f64,
    pub seed: u64,
    pub optimizer: AdamState,
    pub history: Vec<EpochStats>,
}

/// Per-layer gradients, in layer order.
pub type Gradients = Vec<(Array2<f64>, Array1<f64>)>;

fn glorot(rng: &mut ChaCha8Rng, inputs: usize, outputs: usize) -> Array2<f64> {
    let limit = (6.0 / (inputs + outputs) as f64).sqrt();
    Array2::from_shape_fn((inputs, outputs), |_| rng.gen_range(-limit..limit))
}

/// First index of the largest value.
fn argmax(row: &[f64]) -> usize {
    row.iter()
        .enumerate()
        .fold(0, |best, (j, &v)| if v > row[best] { j } else { best })
}

fn cross_entropy(probs: &Array2<f64>, labels: &[usize]) -> f64 {
    let n = labels.len() as f64;
    labels
        .iter()
        .enumerate()
        .map(|(i, &l)| -probs[[i, l]].max(f64::MIN_POSITIVE).ln())
        .sum::<f64>()
        / n
}

impl MlpModel {
    /// Fresh network with Glorot-uniform weights and zero biases.
    pub fn new(inputs: usize, classes: usize, cfg: &MlpConfig) -> Result<Self> {
        cfg.validate()?;
        if inputs == 0 || classes < 2 {
            return Err(MlError::Config(format!(
                "need inputs > 0 and at least 2 classes, got {inputs} and {classes}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut sizes = vec![inputs];
        let mut acts = Vec::new();
        for l in &cfg.hidden {
            sizes.push(l.units);
            acts.push(l.activation);
        }
        sizes.push(classes);
        acts.push(Activation::Softmax);
        let layers: Vec<Dense> = sizes
            .windows(2)
            .zip(acts)
            .map(|(w, activation)| Dense {
                weights: glorot(&mut rng, w[0], w[1]),
                bias: Array1::zeros(w[1]),
                activation,
            })
            .collect();
        let zeros = |layers: &[Dense]| {
            layers
                .iter()
                .map(|l| Moments {
                    w: Array2::zeros(l.weights.raw_dim()),
                    b: Array1::zeros(l.bias.len()),
                })
                .collect()
        };
        let optimizer = AdamState {
            step: 0,
            first: zeros(&layers),
            second: zeros(&layers),
        };
        Ok(Self {
            sizes,
            layers,
            dropout: cfg.dropout,
            seed: cfg.seed,
            optimizer,
            history: Vec::new(),
        })
    }

    pub fn classes(&self) -> usize {
        *self.sizes.last().expect("at least one layer")
    }

    fn check_input(&self, x: ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.sizes[0] {
            return Err(MlError::Dimension {
                expected: self.sizes[0],
                actual: x.ncols(),
            });
        }
        Ok(())
    }

    fn check_labels(&self, labels: &[usize], rows: usize) -> Result<()> {
        if labels.len() != rows {
            return Err(MlError::LengthMismatch(rows, labels.len()));
        }
        let k = self.classes();
        match labels.iter().find(|&&l| l >= k) {
            Some(&label) => Err(MlError::LabelOutOfRange { label, classes: k }),
            None => Ok(()),
        }
    }

    /// Class probabilities with dropout disabled.
    pub fn predict_proba(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_input(x)?;
        let mut a = x.to_owned();
        for l in &self.layers {
            a = apply(l.activation, &(a.dot(&l.weights) + &l.bias));
        }
        Ok(a)
    }

    /// Most probable class per row.
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<usize>> {
        let p = self.predict_proba(x)?;
        Ok(p.rows()
            .into_iter()
            .map(|r| argmax(r.as_slice().expect("standard layout")))
            .collect())
    }

    /// Mean cross-entropy and accuracy without dropout.
    pub fn evaluate(&self, x: ArrayView2<f64>, labels: &[usize]) -> Result<(f64, f64)> {
        self.check_labels(labels, x.nrows())?;
        let p = self.predict_proba(x)?;
        let loss = cross_entropy(&p, labels);
        let correct = p
            .rows()
            .into_iter()
            .zip(labels)
            .filter(|(r, &l)| argmax(r.as_slice().expect("standard layout")) == l)
            .count();
        Ok((loss, correct as f64 / labels.len().max(1) as f64))
    }

    /// Loss and gradients on a batch. `masks[i]` multiplies the output of
    /// hidden layer `i` (inverted dropout); `None` disables dropout.
    fn forward_backward(
        &self,
        x: ArrayView2<f64>,
        labels: &[usize],
        masks: Option<&[Array2<f64>]>,
    ) -> (f64, Gradients) {
        let n = labels.len() as f64;
        let mut inputs = vec![x.to_owned()];
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut post = Vec::with_capacity(self.layers.len());
        for (i, l) in self.layers.iter().enumerate() {
            let z = inputs[i].dot(&l.weights) + &l.bias;
            let a = apply(l.activation, &z);
            let next = match masks {
                Some(m) if i + 1 < self.layers.len() => &a * &m[i],
                _ => a.clone(),
            };
            pre.push(z);
            post.push(a);
            inputs.push(next);
        }
        let probs = post.last().expect("output layer");
        let loss = cross_entropy(probs, labels);
        // Softmax + cross-entropy: dL/dz = (p - onehot) / n.
        let mut dz = probs.clone();
        for (i, &l) in labels.iter().enumerate() {
            dz[[i, l]] -= 1.0;
        }
        dz /= n;
        let mut grads = Vec::with_capacity(self.layers.len());
        for i in (0..self.layers.len()).rev() {
            let dw = inputs[i].t().dot(&dz);
            let db = dz.sum_axis(Axis(0));
            if i > 0 {
                let mut da = dz.dot(&self.layers[i].weights.t());
                if let Some(m) = masks {
                    da *= &m[i - 1];
                }
                let prev = &self.layers[i - 1];
                dz = activation_backward(prev.activation, &pre[i - 1], &post[i - 1], &da);
            }
            grads.push((dw, db));
        }
        grads.reverse();
        (loss, grads)
    }

    /// Loss and gradients with dropout disabled.
    pub fn loss_and_gradients(
        &self,
        x: ArrayView2<f64>,
        labels: &[usize],
    ) -> Result<(f64, Gradients)> {
        self.check_input(x)?;
        self.check_labels(labels, x.nrows())?;
        Ok(self.forward_backward(x, labels, None))
    }

    fn adam_step(&mut self, grads: &Gradients, cfg: &MlpConfig) {
        let st = &mut self.optimizer;
        st.step += 1;
        let t = st.step as i32;
        let c1 = 1.0 - cfg.beta1.powi(t);
        let c2 = 1.0 - cfg.beta2.powi(t);
        let (b1, b2, lr, eps) = (cfg.beta1, cfg.beta2, cfg.learning_rate, cfg.epsilon);
        for (k, (gw, gb)) in grads.iter().enumerate() {
            let (m, v, layer) = (&mut st.first[k], &mut st.second[k], &mut self.layers[k]);
            ndarray::Zip::from(&mut layer.weights)
                .and(&mut m.w)
                .and(&mut v.w)
                .and(gw)
                .for_each(|p, m, v, &g| {
                    *m = b1 * *m + (1.0 - b1) * g;
                    *v = b2 * *v + (1.0 - b2) * g * g;
                    *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
                });
            ndarray::Zip::from(&mut layer.bias)
                .and(&mut m.b)
                .and(&mut v.b)
                .and(gb)
                .for_each(|p, m, v, &g| {
                    *m = b1 * *m + (1.0 - b1) * g;
                    *v = b2 * *v + (1.0 - b2) * g * g;
                    *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
                });
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer(f, self)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::io::BufReader::new(std::fs::File::open(path)?);
        Ok(serde_json::from_reader(f)?)
    }
}

/// Training and optional validation data.
pub struct TrainData<'a> {
    pub x: ArrayView2<'a, f64>,
    pub labels: &'a [usize],
    pub validation: Option<(ArrayView2<'a, f64>, &'a [usize])>,
}

/// Train a fresh network for `cfg.epochs` epochs.
pub fn mlp_train(data: &TrainData<'_>, classes: usize, cfg: &MlpConfig) -> Result<MlpModel> {
    let mut model = MlpModel::new(data.x.ncols(), classes, cfg)?;
    model.check_labels(data.labels, data.x.nrows())?;
    if let Some((vx, vl)) = data.validation {
        model.check_input(vx)?;
        model.check_labels(vl, vx.nrows())?;
    }
    // A separate stream from initialization keeps shuffles and masks
    // independent of the architecture.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let n = data.x.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    let keep = 1.0 - cfg.dropout;
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for (batch, idx) in order.chunks(cfg.batch_size).enumerate() {
            let xb = data.x.select(Axis(0), idx);
            let lb: Vec<usize> = idx.iter().map(|&i| data.labels[i]).collect();
            let masks: Option<Vec<Array2<f64>>> = (cfg.dropout > 0.0).then(|| {
                cfg.hidden
                    .iter()
                    .map(|l| {
                        Array2::from_shape_fn((idx.len(), l.units), |_| {
                            if rng.gen::<f64>() < keep {
                                1.0 / keep
                            } else {
                                0.0
                            }
                        })
                    })
                    .collect()
            });
            let (loss, grads) = model.forward_backward(xb.view(), &lb, masks.as_deref());
            if !loss.is_finite()
                || grads
                    .iter()
                    .any(|(w, b)| w.iter().chain(b.iter()).any(|g| !g.is_finite()))
            {
                return Err(MlError::NanLoss { epoch, batch });
            }
            loss_sum += loss * idx.len() as f64;
            model.adam_step(&grads, cfg);
        }
        let mut stats = EpochStats {
            epoch,
            train_loss: loss_sum / n as f64,
            val_loss: None,
            val_accuracy: None,
        };
        if let Some((vx, vl)) = data.validation {
            let (l, a) = model.evaluate(vx, vl)?;
            stats.val_loss = Some(l);
            stats.val_accuracy = Some(a);
        }
        log::info!(
            "epoch {:>5}: loss {:.5} val_loss {} val_acc {}",
            epoch + 1,
            stats.train_loss,
            stats.val_loss.map_or("-".into(), |v| format!("{v:.5}")),
            stats.val_accuracy.map_or("-".into(), |v| format!("{v:.4}"))
        );
        model.history.push(stats);
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn activation_values() {
        assert_eq!(activation_scalar(Activation::Relu, -3.0).0, 0.0);
        assert_eq!(activation_scalar(Activation::Relu, 2.0).0, 2.0);
        assert_eq!(activation_scalar(Activation::Selu, 0.0).0, 0.0);
        let floor = activation_scalar(Activation::Selu, -1e3).0;
        assert!((floor + SELU_LAMBDA * SELU_ALPHA).abs() < 1e-12);
        assert!((floor + 1.7581).abs() < 1e-4);
        let s = softmax_rows(&array![[0.0, 0.0], [1000.0, 1000.0]]);
        assert!(s.iter().all(|&v| (v - 0.5).abs() < 1e-15));
    }

    #[test]
    fn softmax_rows_are_distributions() {
        let s = softmax_rows(&array![[1.0, -2.0, 3.0], [-700.0, 0.0, 700.0]]);
        for r in s.rows() {
            assert!(r.iter().all(|&v| v >= 0.0));
            assert!((r.sum() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = MlpConfig::deep();
        cfg.dropout = 1.0;
        assert!(MlpModel::new(4, 2, &cfg).is_err());
        assert!(MlpModel::new(4, 1, &MlpConfig::deep()).is_err());
        assert!("gelu".parse::<Activation>().is_err());
        assert_eq!("SELU".parse::<Activation>().unwrap(), Activation::Selu);
    }

    #[test]
    fn initialization_is_seeded() {
        let a = MlpModel::new(6, 2, &MlpConfig::shallow()).unwrap();
        let b = MlpModel::new(6, 2, &MlpConfig::shallow()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.sizes, vec![6, 128, 128, 2]);
    }
}
