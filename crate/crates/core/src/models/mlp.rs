//! Small fully connected network with ReLU, dropout and Adam / SGD.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ensemble::{ItemClassifier, Phq8Predictor, ITEM_MAX};
use super::standardize::Standardizer;
use crate::corpus::PHQ8_ITEMS;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::seed::{rng, rng_stream};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Optimizer {
    Adam { lr: f64, beta1: f64, beta2: f64, eps: f64 },
    Sgd { lr: f64 },
}

impl Optimizer {
    pub fn adam() -> Self {
        Optimizer::Adam { lr: 1e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }

    pub fn sgd() -> Self {
        Optimizer::Sgd { lr: 1e-2 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Head {
    /// Softmax over `classes` with cross-entropy loss.
    Classifier { classes: usize },
    /// Linear outputs with mean squared error.
    Regression { outputs: usize },
}

impl Head {
    pub fn width(self) -> usize {
        match self {
            Head::Classifier { classes } => classes,
            Head::Regression { outputs } => outputs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub hidden: Vec<usize>,
    /// Dropout rate after each hidden layer.
    pub dropout: Vec<f64>,
    pub optimizer: Optimizer,
    pub head: Head,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for MlpConfig {
    /// Six dense layers (five hidden plus output), per-item four-way classifier.
    fn default() -> Self {
        Self {
            hidden: vec![128, 64, 32, 16, 8],
            dropout: vec![0.5, 0.4, 0.3, 0.2, 0.2],
            optimizer: Optimizer::adam(),
            head: Head::Classifier { classes: 4 },
            epochs: 500,
            batch_size: 16,
            seed: 0,
        }
    }
}

impl MlpConfig {
    /// Eight linear outputs, one per PHQ-8 item.
    pub fn regression() -> Self {
        Self {
            head: Head::Regression { outputs: PHQ8_ITEMS.len() },
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dropout.len() != self.hidden.len() {
            return Err(Error::invalid("one dropout rate is needed per hidden layer"));
        }
        if self.hidden.contains(&0) || self.head.width() == 0 {
            return Err(Error::invalid("layer widths must be positive"));
        }
        if let Some(p) = self.dropout.iter().find(|p| !(0.0..1.0).contains(*p)) {
            return Err(Error::invalid(format!("dropout rate {p} outside [0, 1)")));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch size must be positive"));
        }
        let lr = match self.optimizer {
            Optimizer::Adam { lr, .. } | Optimizer::Sgd { lr } => lr,
        };
        if !(lr > 0.0) {
            return Err(Error::invalid("learning rate must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Dense<T> {
    /// `inputs × outputs`.
    pub weights: Array2<T>,
    pub bias: Array1<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MlpModel<T> {
    pub config: MlpConfig,
    pub standardizer: Option<Standardizer<T>>,
    pub layers: Vec<Dense<T>>,
}

/// Training targets: class indices for a classifier head, `rows × outputs` values for regression.
#[derive(Clone, Copy, Debug)]
pub enum Targets<'a, T> {
    Classes(&'a [usize]),
    Values(ArrayView2<'a, T>),
}

impl<T> Targets<'_, T> {
    fn len(&self) -> usize {
        match self {
            Targets::Classes(c) => c.len(),
            Targets::Values(v) => v.nrows(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct MlpFit<T> {
    pub model: MlpModel<T>,
    /// Mean training loss per epoch (dropout active).
    pub epoch_loss: Vec<T>,
}

fn softmax_rows<T: Real>(z: &mut Array2<T>) {
    for mut row in z.outer_iter_mut() {
        let max = row.iter().copied().fold(T::neg_infinity(), T::max);
        row.mapv_inplace(|v| (v - max).exp());
        let s = row.sum();
        row.mapv_inplace(|v| v / s);
    }
}

impl<T: Real> MlpModel<T> {
    /// He-uniform weights and zero biases from `config.seed`.
    pub fn new(inputs: usize, config: MlpConfig) -> Result<Self> {
        config.validate()?;
        if inputs == 0 {
            return Err(Error::invalid("MLP needs at least one input"));
        }
        let mut r = rng(config.seed);
        let mut widths = vec![inputs];
        widths.extend(&config.hidden);
        widths.push(config.head.width());
        let layers = widths
            .windows(2)
            .map(|w| {
                let bound = (6.0 / w[0] as f64).sqrt();
                Dense {
                    weights: Array2::from_shape_simple_fn((w[0], w[1]), || {
                        T::lit(r.random_range(-bound..bound))
                    }),
                    bias: Array1::zeros(w[1]),
                }
            })
            .collect();
        Ok(Self {
            config,
            standardizer: None,
            layers,
        })
    }

    pub fn inputs(&self) -> usize {
        self.layers[0].weights.nrows()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// Weights (row-major) then bias, layer by layer.
    pub fn params(&self) -> Vec<T> {
        let mut p = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            p.extend(l.weights.iter());
            p.extend(l.bias.iter());
        }
        p
    }

    pub fn set_params(&mut self, p: &[T]) -> Result<()> {
        if p.len() != self.param_count() {
            return Err(Error::invalid(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                p.len()
            )));
        }
        let mut it = p.iter().copied();
        for l in &mut self.layers {
            l.weights.iter_mut().chain(l.bias.iter_mut()).for_each(|v| {
                *v = it.next().expect("length checked");
            });
        }
        Ok(())
    }

    /// Layer inputs (post-activation, post-dropout) and the output pre-activation.
    fn forward(&self, x: ArrayView2<T>, masks: Option<&[Array2<T>]>) -> (Vec<Array2<T>>, Vec<Array2<T>>) {
        let mut inputs = vec![x.to_owned()];
        let mut pre = Vec::with_capacity(self.layers.len());
        let last = self.layers.len() - 1;
        for (i, l) in self.layers.iter().enumerate() {
            let z = inputs[i].dot(&l.weights) + &l.bias;
            if i < last {
                let mut a = z.mapv(|v| v.max(T::zero()));
                if let Some(m) = masks {
                    a *= &m[i];
                }
                inputs.push(a);
            }
            pre.push(z);
        }
        (inputs, pre)
    }

    fn loss_and_grads(
        &self,
        x: ArrayView2<T>,
        targets: Targets<'_, T>,
        masks: Option<&[Array2<T>]>,
    ) -> Result<(T, Vec<Dense<T>>)> {
        let b = x.nrows();
        if targets.len() != b {
            return Err(Error::invalid("target count does not match rows"));
        }
        let bf = T::from_usize_lossy(b);
        let (inputs, pre) = self.forward(x, masks);
        let out = pre.last().expect("at least one layer");
        let (loss, mut delta) = match (self.config.head, targets) {
            (Head::Classifier { classes }, Targets::Classes(y)) => {
                if let Some(&bad) = y.iter().find(|&&c| c >= classes) {
                    return Err(Error::invalid(format!("class {bad} outside 0..{classes}")));
                }
                let mut p = out.clone();
                softmax_rows(&mut p);
                let loss = -y
                    .iter()
                    .enumerate()
                    .map(|(r, &c)| p[[r, c]].max(T::min_positive_value()).ln())
                    .sum::<T>()
                    / bf;
                for (r, &c) in y.iter().enumerate() {
                    p[[r, c]] -= T::one();
                }
                (loss, p.mapv(|v| v / bf))
            }
            (Head::Regression { outputs }, Targets::Values(t)) => {
                if t.ncols() != outputs {
                    return Err(Error::invalid(format!(
                        "regression targets have {} columns, head has {outputs}",
                        t.ncols()
                    )));
                }
                let diff = out - &t;
                let denom = bf * T::from_usize_lossy(outputs);
                let loss = diff.iter().map(|&d| d * d).sum::<T>() / denom;
                (loss, diff.mapv(|d| T::lit(2.0) * d / denom))
            }
            _ => return Err(Error::invalid("target kind does not match the network head")),
        };
        let mut grads: Vec<Dense<T>> = Vec::with_capacity(self.layers.len());
        for i in (0..self.layers.len()).rev() {
            grads.push(Dense {
                weights: inputs[i].t().dot(&delta),
                bias: delta.sum_axis(Axis(0)),
            });
            if i > 0 {
                let mut back = delta.dot(&self.layers[i].weights.t());
                back.zip_mut_with(&pre[i - 1], |g, &z| {
                    if z <= T::zero() {
                        *g = T::zero();
                    }
                });
                if let Some(m) = masks {
                    back *= &m[i - 1];
                }
                delta = back;
            }
        }
        grads.reverse();
        Ok((loss, grads))
    }

    /// Loss and flat gradient (ordered as [`params`](Self::params)) without dropout
    /// or input standardization.
    pub fn loss_and_gradient(&self, x: ArrayView2<T>, targets: Targets<'_, T>) -> Result<(T, Vec<T>)> {
        let (loss, grads) = self.loss_and_grads(x, targets, None)?;
        let flat = grads
            .iter()
            .flat_map(|g| g.weights.iter().chain(g.bias.iter()).copied())
            .collect();
        Ok((loss, flat))
    }

    /// Softmax probabilities (classifier) or raw outputs (regression).
    pub fn predict_raw(&self, x: ArrayView2<T>) -> Result<Array2<T>> {
        if x.ncols() != self.inputs() {
            return Err(Error::invalid(format!(
                "feature width {} does not match network input {}",
                x.ncols(),
                self.inputs()
            )));
        }
        let z = match &self.standardizer {
            Some(s) => s.transform(x)?,
            None => x.to_owned(),
        };
        let (_, pre) = self.forward(z.view(), None);
        let mut out = pre.into_iter().last().expect("at least one layer");
        if matches!(self.config.head, Head::Classifier { .. }) {
            softmax_rows(&mut out);
        }
        Ok(out)
    }

    /// Argmax class per row; ties go to the smaller class.
    pub fn predict_classes(&self, x: ArrayView2<T>) -> Result<Vec<usize>> {
        if !matches!(self.config.head, Head::Classifier { .. }) {
            return Err(Error::invalid("class prediction needs a classifier head"));
        }
        Ok(self
            .predict_raw(x)?
            .outer_iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .fold((0, T::neg_infinity()), |b, (i, &v)| if v > b.1 { (i, v) } else { b })
                    .0
            })
            .collect())
    }
}

/// Rounds each regression output to the nearest integer and clips it to `0..=3`.
pub fn regression_items<T: Real>(raw: &[T]) -> Vec<u8> {
    raw.iter()
        .map(|&v| {
            let r = v.as_f64().round();
            if r.is_nan() {
                0
            } else {
                r.clamp(0.0, f64::from(ITEM_MAX)) as u8
            }
        })
        .collect()
}

fn dropout_masks<T: Real, R: Rng>(config: &MlpConfig, rows: usize, r: &mut R) -> Vec<Array2<T>> {
    config
        .hidden
        .iter()
        .zip(&config.dropout)
        .map(|(&w, &p)| {
            let keep = T::lit(1.0 / (1.0 - p));
            Array2::from_shape_simple_fn((rows, w), || {
                if p > 0.0 && r.random::<f64>() < p { T::zero() } else { keep }
            })
        })
        .collect()
}

/// Mini-batch training from `config.seed`. Inputs are standardized with
/// statistics stored in the returned model.
pub fn mlp_train<T: Real>(
    x: ArrayView2<T>,
    targets: Targets<'_, T>,
    config: &MlpConfig,
) -> Result<MlpFit<T>> {
    let n = x.nrows();
    if n == 0 || targets.len() != n {
        return Err(Error::invalid("MLP training needs matching, non-empty rows and targets"));
    }
    let standardizer = Standardizer::fit(x)?;
    let z = standardizer.transform(x)?;
    let mut model = MlpModel::new(x.ncols(), config.clone())?;
    model.standardizer = Some(standardizer);

    let mut shuffle_rng = rng_stream(config.seed, 1);
    let mut dropout_rng = rng_stream(config.seed, 2);
    let mut params = model.params();
    let mut m = vec![T::zero(); params.len()];
    let mut v = vec![T::zero(); params.len()];
    let mut step = 0i32;
    let mut order: Vec<usize> = (0..n).collect();
    let mut epoch_loss = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut total = T::zero();
        for (bi, batch) in order.chunks(config.batch_size).enumerate() {
            let xb = z.select(Axis(0), batch);
            let masks = dropout_masks(config, batch.len(), &mut dropout_rng);
            let class_buf: Vec<usize>;
            let value_buf: Array2<T>;
            let tb = match targets {
                Targets::Classes(c) => {
                    class_buf = batch.iter().map(|&i| c[i]).collect();
                    Targets::Classes(&class_buf)
                }
                Targets::Values(t) => {
                    value_buf = t.select(Axis(0), batch);
                    Targets::Values(value_buf.view())
                }
            };
            let (loss, grads) = model.loss_and_grads(xb.view(), tb, Some(&masks))?;
            if !loss.is_finite() {
                return Err(Error::Numeric(format!(
                    "MLP loss became {loss} at epoch {epoch}, batch {bi}"
                )));
            }
            total += loss * T::from_usize_lossy(batch.len());
            let g: Vec<T> = grads
                .iter()
                .flat_map(|g| g.weights.iter().chain(g.bias.iter()).copied())
                .collect();
            step += 1;
            match config.optimizer {
                Optimizer::Sgd { lr } => {
                    let lr = T::lit(lr);
                    params.iter_mut().zip(&g).for_each(|(p, &gi)| *p -= lr * gi);
                }
                Optimizer::Adam { lr, beta1, beta2, eps } => {
                    let (b1, b2) = (T::lit(beta1), T::lit(beta2));
                    let c1 = T::one() - b1.powi(step);
                    let c2 = T::one() - b2.powi(step);
                    let (lr, eps) = (T::lit(lr), T::lit(eps));
                    for i in 0..params.len() {
                        m[i] = b1 * m[i] + (T::one() - b1) * g[i];
                        v[i] = b2 * v[i] + (T::one() - b2) * g[i] * g[i];
                        params[i] -= lr * (m[i] / c1) / ((v[i] / c2).sqrt() + eps);
                    }
                }
            }
            model.set_params(&params)?;
        }
        epoch_loss.push(total / T::from_usize_lossy(n));
    }
    Ok(MlpFit { model, epoch_loss })
}

impl<T: Real> ItemClassifier<T> for MlpModel<T> {
    fn predict_labels(&self, x: ArrayView2<T>) -> Result<Vec<u8>> {
        Ok(self
            .predict_classes(x)?
            .into_iter()
            .map(|c| (c as u8).min(ITEM_MAX))
            .collect())
    }
}

impl<T: Real> Phq8Predictor<T> for MlpModel<T> {
    fn predict_items(&self, x: ArrayView2<T>) -> Result<Vec<[u8; 8]>> {
        if self.config.head != (Head::Regression { outputs: PHQ8_ITEMS.len() }) {
            return Err(Error::invalid("item prediction needs an 8-output regression head"));
        }
        Ok(self
            .predict_raw(x)?
            .outer_iter()
            .map(|row| {
                let items = regression_items(&row.to_vec());
                let mut out = [0u8; 8];
                out.copy_from_slice(&items);
                out
            })
            .collect())
    }
}
