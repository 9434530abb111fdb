//! Description-length scores for probes: prequential (online) coding and the
//! variational aggregate. All codelengths are in bits.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::dataset::{RepresentationDataset, Split};
use super::model::Probe;
use super::train::{train_probe, TrainerConfig};
use crate::bounds;
use crate::error::{domain, Error, Result};
use crate::rng;

const MDL_STREAM: u64 = 0x004d_444c;

/// Anything that assigns a codelength to labelled rows.
pub trait Coder {
    /// `sum -log2 p(y | x)` over `rows`.
    fn codelength_bits(&self, ds: &RepresentationDataset, rows: &[usize]) -> f64;
}

impl Coder for Probe {
    fn codelength_bits(&self, ds: &RepresentationDataset, rows: &[usize]) -> f64 {
        let mut s = self.scratch();
        rows.iter()
            .map(|&i| self.nll(ds.row(i), ds.labels()[i], &mut s))
            .sum::<f64>()
            / std::f64::consts::LN_2
    }
}

/// Uniform code over `K` classes.
#[derive(Debug, Clone, Copy)]
pub struct UniformCoder {
    pub num_classes: usize,
}

impl Coder for UniformCoder {
    fn codelength_bits(&self, _ds: &RepresentationDataset, rows: &[usize]) -> f64 {
        rows.len() as f64 * (self.num_classes as f64).log2()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MdlKind {
    Variational,
    Prequential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PortionCost {
    /// Rows `start..end` of the transmission order.
    pub start: usize,
    pub end: usize,
    pub bits: f64,
    pub uniform_bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdlScore {
    pub kind: MdlKind,
    pub codelength: f64,
    /// Variational: data cost and model cost.
    pub data_cost: Option<f64>,
    pub model_cost: Option<f64>,
    /// Prequential: `t1 · log2 K` for the first portion.
    pub first_portion_bits: Option<f64>,
    pub portions: Vec<PortionCost>,
    /// Prequential total with every portion capped at its uniform cost.
    pub clipped_codelength: Option<f64>,
}

/// `data_cost + model_cost`.
pub fn variational_mdl(data_cost: f64, model_cost: f64) -> Result<MdlScore> {
    for (name, v) in [("data_cost", data_cost), ("model_cost", model_cost)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(domain(name, "must be non-negative"));
        }
    }
    Ok(MdlScore {
        kind: MdlKind::Variational,
        codelength: data_cost + model_cost,
        data_cost: Some(data_cost),
        model_cost: Some(model_cost),
        first_portion_bits: None,
        portions: Vec::new(),
        clipped_codelength: None,
    })
}

/// Portion boundaries `t1, 2·t1, 4·t1, ..., n`.
pub fn portion_schedule(n: usize, t1: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut t = t1.max(1);
    while t < n {
        out.push(t);
        t = t.saturating_mul(2);
    }
    out.push(n);
    out
}

/// Prequential codelength with a caller-supplied learner.
///
/// The training split is put in a seeded transmission order. The first
/// portion is sent with the uniform code; each later portion is coded by a
/// model fitted on everything sent before it. `fit` receives a dataset whose
/// train split is the transmitted prefix, whose val split is the source's
/// val split and whose test split is the portion about to be coded.
pub fn prequential_mdl_with<F>(
    ds: &RepresentationDataset,
    t1_fraction: f64,
    rng_seed: u64,
    mut fit: F,
) -> Result<MdlScore>
where
    F: FnMut(&RepresentationDataset, usize) -> Result<Box<dyn Coder>>,
{
    let mut order = ds.indices(Split::Train);
    if order.is_empty() {
        return Err(Error::InvalidDataset("train split is empty".into()));
    }
    let n = order.len();
    let t1 = if t1_fraction > 0.0 && t1_fraction < 1.0 {
        ((t1_fraction * n as f64).round() as usize).max(1)
    } else {
        // Reuse the bound module's message for out-of-range fractions.
        bounds::first_portion(n as u64, t1_fraction)? as usize
    };
    order.shuffle(&mut rng::stream(rng_seed, &[MDL_STREAM]));

    let val = ds.indices(Split::Val);
    let uniform = UniformCoder {
        num_classes: ds.num_classes(),
    };
    let first_portion_bits = uniform.codelength_bits(ds, &order[..t1]);
    let schedule = portion_schedule(n, t1);

    let mut portions = Vec::with_capacity(schedule.len().saturating_sub(1));
    for (stage, w) in schedule.windows(2).enumerate() {
        let (start, end) = (w[0], w[1]);
        let stage_ds = ds.assemble(&[
            (&order[..start], Split::Train),
            (&val, Split::Val),
            (&order[start..end], Split::Test),
        ]);
        let coder = fit(&stage_ds, stage)?;
        let portion_rows = stage_ds.indices(Split::Test);
        portions.push(PortionCost {
            start,
            end,
            bits: coder.codelength_bits(&stage_ds, &portion_rows),
            uniform_bits: uniform.codelength_bits(&stage_ds, &portion_rows),
        });
    }

    let codelength = first_portion_bits + portions.iter().map(|p| p.bits).sum::<f64>();
    let clipped = first_portion_bits + portions.iter().map(|p| p.bits.min(p.uniform_bits)).sum::<f64>();
    Ok(MdlScore {
        kind: MdlKind::Prequential,
        codelength,
        data_cost: None,
        model_cost: None,
        first_portion_bits: Some(first_portion_bits),
        portions,
        clipped_codelength: Some(clipped),
    })
}

/// Prequential codelength with probes trained by [`train_probe`].
pub fn prequential_mdl(
    ds: &RepresentationDataset,
    cfg: &TrainerConfig,
    t1_fraction: f64,
    rng_seed: u64,
) -> Result<MdlScore> {
    if ds.indices(Split::Val).is_empty() {
        return Err(Error::InvalidDataset("val split is empty".into()));
    }
    prequential_mdl_with(ds, t1_fraction, rng_seed, |stage_ds, stage| {
        let trained = train_probe(stage_ds, cfg, rng::derive_seed(rng_seed, &[MDL_STREAM, stage as u64]))?;
        Ok(Box::new(trained.probe) as Box<dyn Coder>)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ClassifierSpec;
    use crate::lab::dataset::{generate_dataset, stratified_subsample, SyntheticDatasetSpec};

    fn dataset(k: usize, per_class: usize, separation: f64) -> RepresentationDataset {
        let spec = SyntheticDatasetSpec {
            num_classes: k,
            dim: 4.max(k),
            samples_per_class: per_class * 2,
            class_separation: separation,
            noise_floor: 0.5,
            rng_seed: 3,
        };
        stratified_subsample(&generate_dataset(&spec).unwrap(), per_class, 4.0, 3).unwrap()
    }

    #[test]
    fn variational_is_additive() {
        assert_eq!(variational_mdl(350.0, 120.5).unwrap().codelength, 470.5);
        assert_eq!(variational_mdl(42.0, 0.0).unwrap().codelength, 42.0);
        assert_eq!(variational_mdl(0.0, 0.0).unwrap().codelength, 0.0);
        assert!(variational_mdl(-1.0, 0.0).is_err());
        assert!(variational_mdl(1.0, -0.5).is_err());
    }

    #[test]
    fn schedule_doubles() {
        assert_eq!(portion_schedule(1000, 1), vec![1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1000]);
        assert_eq!(portion_schedule(10, 3), vec![3, 6, 10]);
        assert_eq!(portion_schedule(4, 4), vec![4]);
    }

    #[test]
    fn uniform_model_gives_uniform_codelength() {
        let ds = dataset(2, 500, 1.0);
        let score = prequential_mdl_with(&ds, 0.001, 1, |_, _| Ok(Box::new(UniformCoder { num_classes: 2 }))).unwrap();
        assert_eq!(score.codelength, 1000.0);

        for k in [3, 6] {
            let ds = dataset(k, 100, 1.0);
            let n = ds.indices(Split::Train).len() as f64;
            let score =
                prequential_mdl_with(&ds, 0.01, 1, |_, _| Ok(Box::new(UniformCoder { num_classes: k }))).unwrap();
            let want = n * (k as f64).log2();
            assert!(((score.codelength - want) / want).abs() < 1e-9);
            assert_eq!(score.clipped_codelength, Some(score.codelength));
        }
    }

    #[test]
    fn separable_data_compresses() {
        let ds = dataset(2, 256, 6.0);
        let cfg = TrainerConfig::compact(ClassifierSpec::logistic_regression(4, 2).unwrap());
        let score = prequential_mdl(&ds, &cfg, 0.01, 2).unwrap();
        let n = ds.indices(Split::Train).len() as f64;
        assert!(score.codelength < n, "{} vs {n}", score.codelength);
        assert!(score.clipped_codelength.unwrap() <= score.codelength);
        assert_eq!(score.portions.last().unwrap().end, 512);
    }

    #[test]
    fn rejects_bad_fraction() {
        let ds = dataset(2, 50, 1.0);
        let uniform = |_: &RepresentationDataset, _| Ok(Box::new(UniformCoder { num_classes: 2 }) as Box<dyn Coder>);
        assert!(prequential_mdl_with(&ds, 1.0, 0, uniform).is_err());
        assert!(prequential_mdl_with(&ds, 0.0, 0, uniform).is_err());
    }
}
