//! Logistic-regression and one-hidden-layer MLP probes with analytic
//! cross-entropy gradients over a flat parameter vector.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{ClassifierKind, ClassifierSpec};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Relu,
    Tanh,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed through the pre-activation and the output.
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
        }
    }
}

/// A probe: its shape and a flat parameter vector.
///
/// Layout: logistic regression stores `W (K x D)` then `b (K)`. The MLP stores
/// `W1 (H x D)`, `b1 (H)`, `W2 (K x H)`, `b2 (K)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    spec: ClassifierSpec,
    activation: Activation,
    params: Vec<f64>,
}

/// Scratch buffers reused across forward/backward passes.
#[derive(Debug, Clone)]
pub struct Scratch {
    pre: Vec<f64>,
    hidden: Vec<f64>,
    logits: Vec<f64>,
    dhidden: Vec<f64>,
}

impl Probe {
    pub fn num_params(spec: &ClassifierSpec) -> usize {
        let (d, k, h) = (spec.input_dim, spec.num_classes, spec.hidden_units);
        match spec.kind {
            ClassifierKind::LogisticRegression => k * d + k,
            ClassifierKind::Mlp => h * d + h + k * h + k,
        }
    }

    /// Uniform `±1/sqrt(fan_in)` initialization.
    pub fn init<R: Rng>(spec: ClassifierSpec, activation: Activation, rng: &mut R) -> Self {
        let (d, k, h) = (spec.input_dim, spec.num_classes, spec.hidden_units);
        let mut params = Vec::with_capacity(Self::num_params(&spec));
        let mut fill = |count: usize, fan_in: usize| {
            let bound = 1.0 / (fan_in.max(1) as f64).sqrt();
            params.extend((0..count).map(|_| rng.random_range(-bound..bound)));
        };
        match spec.kind {
            ClassifierKind::LogisticRegression => {
                fill(k * d + k, d);
            }
            ClassifierKind::Mlp => {
                fill(h * d + h, d);
                fill(k * h + k, h);
            }
        }
        Self {
            spec,
            activation,
            params,
        }
    }

    pub fn from_params(spec: ClassifierSpec, activation: Activation, params: Vec<f64>) -> Self {
        assert_eq!(params.len(), Self::num_params(&spec), "parameter vector length");
        Self {
            spec,
            activation,
            params,
        }
    }

    pub fn spec(&self) -> &ClassifierSpec {
        &self.spec
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn scratch(&self) -> Scratch {
        let h = self.spec.hidden_units;
        Scratch {
            pre: vec![0.0; h],
            hidden: vec![0.0; h],
            logits: vec![0.0; self.spec.num_classes],
            dhidden: vec![0.0; h],
        }
    }

    fn forward(&self, x: &[f64], s: &mut Scratch) {
        let (d, k, h) = (self.spec.input_dim, self.spec.num_classes, self.spec.hidden_units);
        let p = &self.params;
        match self.spec.kind {
            ClassifierKind::LogisticRegression => {
                let (w, b) = p.split_at(k * d);
                for c in 0..k {
                    s.logits[c] = b[c] + dot(&w[c * d..(c + 1) * d], x);
                }
            }
            ClassifierKind::Mlp => {
                let (w1, rest) = p.split_at(h * d);
                let (b1, rest) = rest.split_at(h);
                let (w2, b2) = rest.split_at(k * h);
                for j in 0..h {
                    let z = b1[j] + dot(&w1[j * d..(j + 1) * d], x);
                    s.pre[j] = z;
                    s.hidden[j] = self.activation.apply(z);
                }
                for c in 0..k {
                    s.logits[c] = b2[c] + dot(&w2[c * h..(c + 1) * h], &s.hidden);
                }
            }
        }
    }

    /// Natural-log class probabilities.
    pub fn log_probs(&self, x: &[f64], s: &mut Scratch) -> Vec<f64> {
        self.forward(x, s);
        let lse = log_sum_exp(&s.logits);
        s.logits.iter().map(|&z| z - lse).collect()
    }

    /// `-ln p(y | x)`.
    pub fn nll(&self, x: &[f64], y: usize, s: &mut Scratch) -> f64 {
        self.forward(x, s);
        log_sum_exp(&s.logits) - s.logits[y]
    }

    pub fn predict(&self, x: &[f64], s: &mut Scratch) -> usize {
        self.forward(x, s);
        argmax(&s.logits)
    }

    /// Accumulates `d(-ln p(y|x)) / d params` into `grad` and returns the loss.
    pub fn accumulate_grad(&self, x: &[f64], y: usize, grad: &mut [f64], s: &mut Scratch) -> f64 {
        self.forward(x, s);
        let (d, k, h) = (self.spec.input_dim, self.spec.num_classes, self.spec.hidden_units);
        let lse = log_sum_exp(&s.logits);
        let loss = lse - s.logits[y];
        // dL/dlogit_c = softmax_c - [c == y], stored back into logits.
        for c in 0..k {
            s.logits[c] = (s.logits[c] - lse).exp() - if c == y { 1.0 } else { 0.0 };
        }
        match self.spec.kind {
            ClassifierKind::LogisticRegression => {
                let (gw, gb) = grad.split_at_mut(k * d);
                for c in 0..k {
                    let g = s.logits[c];
                    axpy(g, x, &mut gw[c * d..(c + 1) * d]);
                    gb[c] += g;
                }
            }
            ClassifierKind::Mlp => {
                let w2 = &self.params[h * d + h..h * d + h + k * h];
                let (gw1, rest) = grad.split_at_mut(h * d);
                let (gb1, rest) = rest.split_at_mut(h);
                let (gw2, gb2) = rest.split_at_mut(k * h);
                s.dhidden.iter_mut().for_each(|v| *v = 0.0);
                for c in 0..k {
                    let g = s.logits[c];
                    axpy(g, &s.hidden, &mut gw2[c * h..(c + 1) * h]);
                    gb2[c] += g;
                    axpy(g, &w2[c * h..(c + 1) * h], &mut s.dhidden);
                }
                for j in 0..h {
                    let g = s.dhidden[j] * self.activation.derivative(s.pre[j], s.hidden[j]);
                    if g != 0.0 {
                        axpy(g, x, &mut gw1[j * d..(j + 1) * d]);
                    }
                    gb1[j] += g;
                }
            }
        }
        loss
    }

    /// Mean loss and gradient over `rows` of a row-major matrix.
    pub fn loss_and_grad(&self, xs: &[f64], ys: &[usize], rows: &[usize]) -> (f64, Vec<f64>) {
        let d = self.spec.input_dim;
        let mut grad = vec![0.0; self.params.len()];
        let mut s = self.scratch();
        let mut loss = 0.0;
        for &i in rows {
            loss += self.accumulate_grad(&xs[i * d..(i + 1) * d], ys[i], &mut grad, &mut s);
        }
        let inv = 1.0 / rows.len() as f64;
        grad.iter_mut().for_each(|g| *g *= inv);
        (loss * inv, grad)
    }

    pub fn mean_loss(&self, xs: &[f64], ys: &[usize], rows: &[usize]) -> f64 {
        let d = self.spec.input_dim;
        let mut s = self.scratch();
        rows.iter()
            .map(|&i| self.nll(&xs[i * d..(i + 1) * d], ys[i], &mut s))
            .sum::<f64>()
            / rows.len() as f64
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub(crate) fn log_sum_exp(z: &[f64]) -> f64 {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + z.iter().map(|&v| (v - m).exp()).sum::<f64>().ln()
}

pub(crate) fn argmax(z: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in z.iter().enumerate() {
        if v > z[best] {
            best = i;
        }
    }
    best
}
