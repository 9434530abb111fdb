//! Mini-batch Adam training with a learning-rate x batch-size grid search,
//! early stopping on a validation-loss plateau and best-validation-accuracy
//! epoch selection.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{RepresentationDataset, Split};
use super::model::{Activation, Probe};
use crate::domain::ClassifierSpec;
use crate::error::{domain, Error, Result};
use crate::rng;

const TRAIN_STREAM: u64 = 0x5452_4149;

pub const GRID_LEARNING_RATES: [f64; 5] = [1e-4, 5e-4, 1e-3, 5e-3, 1e-2];
pub const GRID_BATCH_SIZES: [usize; 4] = [8, 16, 32, 64];
pub const MAX_EPOCHS: usize = 50;
pub const PATIENCE: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainerConfig {
    pub learning_rates: Vec<f64>,
    pub batch_sizes: Vec<usize>,
    pub max_epochs: usize,
    /// Epochs without validation-loss improvement before stopping.
    pub patience: usize,
    pub model: ClassifierSpec,
    #[serde(default)]
    pub activation: Activation,
}

impl TrainerConfig {
    /// The full 5 x 4 hyperparameter grid, 50 epochs, patience 5.
    pub fn full_grid(model: ClassifierSpec) -> Self {
        Self {
            learning_rates: GRID_LEARNING_RATES.to_vec(),
            batch_sizes: GRID_BATCH_SIZES.to_vec(),
            max_epochs: MAX_EPOCHS,
            patience: PATIENCE,
            model,
            activation: Activation::default(),
        }
    }

    /// One grid corner (the largest learning rate and batch size) for quick
    /// runs and large sweeps.
    pub fn compact(model: ClassifierSpec) -> Self {
        Self {
            learning_rates: vec![1e-2],
            batch_sizes: vec![64],
            ..Self::full_grid(model)
        }
    }

    pub fn with_model(&self, model: ClassifierSpec) -> Self {
        Self {
            model,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.learning_rates.is_empty() || self.batch_sizes.is_empty() {
            return Err(Error::Empty("hyperparameter grid"));
        }
        if self.learning_rates.iter().any(|&lr| !(lr > 0.0 && lr.is_finite())) {
            return Err(domain("learning rate", "must be positive"));
        }
        if self.batch_sizes.contains(&0) {
            return Err(domain("batch size", "must be at least 1"));
        }
        if self.max_epochs == 0 {
            return Err(domain("max_epochs", "must be at least 1"));
        }
        if self.patience >= self.max_epochs {
            return Err(domain("patience", "must be smaller than max_epochs"));
        }
        Ok(())
    }

    fn candidates(&self) -> Vec<(f64, usize)> {
        self.learning_rates
            .iter()
            .flat_map(|&lr| self.batch_sizes.iter().map(move |&b| (lr, b)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedProbe {
    pub probe: Probe,
    pub history: Vec<EpochRecord>,
    /// 1-based epoch whose weights were kept.
    pub selected_epoch: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub val_accuracy: f64,
    pub test_predictions: Vec<usize>,
    pub test_correct: Vec<bool>,
    pub test_accuracy: f64,
    /// The kept model predicts a single class on every validation item.
    pub degenerate: bool,
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        for (((p, g), m), v) in params.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            *m = Self::BETA1 * *m + (1.0 - Self::BETA1) * g;
            *v = Self::BETA2 * *v + (1.0 - Self::BETA2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + Self::EPS);
        }
    }
}

/// Mean loss, accuracy and predictions over `rows`.
fn evaluate(probe: &Probe, ds: &RepresentationDataset, rows: &[usize]) -> (f64, f64, Vec<usize>) {
    let mut s = probe.scratch();
    let mut loss = 0.0;
    let mut correct = 0usize;
    let mut preds = Vec::with_capacity(rows.len());
    for &i in rows {
        let lp = probe.log_probs(ds.row(i), &mut s);
        let y = ds.labels()[i];
        loss -= lp[y];
        let p = super::model::argmax(&lp);
        correct += (p == y) as usize;
        preds.push(p);
    }
    let n = rows.len() as f64;
    (loss / n, correct as f64 / n, preds)
}

struct Candidate {
    probe: Probe,
    history: Vec<EpochRecord>,
    best_epoch: usize,
    best_acc: f64,
    best_loss: f64,
}

fn train_candidate(
    ds: &RepresentationDataset,
    train: &[usize],
    val: &[usize],
    cfg: &TrainerConfig,
    lr: f64,
    batch: usize,
    stream: &mut rand_chacha::ChaCha8Rng,
) -> Candidate {
    let mut probe = Probe::init(cfg.model, cfg.activation, stream);
    let mut adam = Adam::new(probe.params().len());
    let mut order = train.to_vec();
    let mut grad = vec![0.0; probe.params().len()];
    let mut scratch = probe.scratch();
    let (xs, ys, d) = (ds.vectors(), ds.labels(), ds.dim());

    let mut history = Vec::new();
    let mut best = (probe.clone(), 0usize, f64::NEG_INFINITY, f64::INFINITY);
    let mut plateau_loss = f64::INFINITY;
    let mut stale = 0usize;
    for epoch in 1..=cfg.max_epochs {
        order.shuffle(stream);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(batch) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            for &i in chunk {
                epoch_loss += probe.accumulate_grad(&xs[i * d..(i + 1) * d], ys[i], &mut grad, &mut scratch);
            }
            let inv = 1.0 / chunk.len() as f64;
            grad.iter_mut().for_each(|g| *g *= inv);
            adam.step(probe.params_mut(), &grad, lr);
        }
        let (val_loss, val_accuracy, _) = evaluate(&probe, ds, val);
        history.push(EpochRecord {
            epoch,
            train_loss: epoch_loss / order.len() as f64,
            val_loss,
            val_accuracy,
        });
        if val_accuracy > best.2 {
            best = (probe.clone(), epoch, val_accuracy, val_loss);
        }
        if val_loss < plateau_loss {
            plateau_loss = val_loss;
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                break;
            }
        }
    }
    Candidate {
        probe: best.0,
        history,
        best_epoch: best.1,
        best_acc: best.2,
        best_loss: best.3,
    }
}

/// Trains one probe per grid point and keeps the one with the best
/// validation accuracy (ties: lower validation loss, then grid order).
pub fn train_probe(ds: &RepresentationDataset, cfg: &TrainerConfig, rng_seed: u64) -> Result<TrainedProbe> {
    cfg.validate()?;
    if ds.dim() != cfg.model.input_dim || ds.num_classes() != cfg.model.num_classes {
        return Err(Error::InvalidDataset(format!(
            "dataset is {}-dimensional with {} classes but the model expects {} and {}",
            ds.dim(),
            ds.num_classes(),
            cfg.model.input_dim,
            cfg.model.num_classes
        )));
    }
    let train = ds.indices(Split::Train);
    let val = ds.indices(Split::Val);
    let test = ds.indices(Split::Test);
    for (name, rows) in [("train", &train), ("val", &val), ("test", &test)] {
        if rows.is_empty() {
            return Err(Error::InvalidDataset(format!("{name} split is empty")));
        }
    }
    let candidates = cfg.candidates();
    let results: Vec<(f64, usize, Candidate)> = candidates
        .par_iter()
        .enumerate()
        .map(|(idx, &(lr, batch))| {
            let mut stream = rng::stream(rng_seed, &[TRAIN_STREAM, idx as u64]);
            (lr, batch, train_candidate(ds, &train, &val, cfg, lr, batch, &mut stream))
        })
        .collect();
    let mut best = 0;
    for (i, (_, _, c)) in results.iter().enumerate() {
        let b = &results[best].2;
        if c.best_acc > b.best_acc || (c.best_acc == b.best_acc && c.best_loss < b.best_loss) {
            best = i;
        }
    }
    let (learning_rate, batch_size, chosen) = results.into_iter().nth(best).expect("non-empty grid");
    let (_, _, val_preds) = evaluate(&chosen.probe, ds, &val);
    let degenerate = val_preds.iter().all(|&p| p == val_preds[0]);
    let (_, test_accuracy, test_predictions) = evaluate(&chosen.probe, ds, &test);
    let test_correct = test_predictions
        .iter()
        .zip(&test)
        .map(|(&p, &i)| p == ds.labels()[i])
        .collect();
    Ok(TrainedProbe {
        probe: chosen.probe,
        history: chosen.history,
        selected_epoch: chosen.best_epoch,
        learning_rate,
        batch_size,
        val_accuracy: chosen.best_acc,
        test_predictions,
        test_correct,
        test_accuracy,
        degenerate,
    })
}
