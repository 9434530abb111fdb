//! Synthetic representation datasets, noise corruption and stratified
//! `η:1:1` subsampling.

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rng;

const GENERATE_STREAM: u64 = 0x0047_454e;
const NOISE_STREAM: u64 = 0x4e4f_4953;
const SUBSAMPLE_STREAM: u64 = 0x5355_4253;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    /// Not yet assigned to a split.
    Pool,
    Train,
    Val,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Pool => "pool",
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "pool" => Split::Pool,
            "train" => Split::Train,
            "val" => Split::Val,
            "test" => Split::Test,
            _ => return None,
        })
    }
}

/// Equidistant class means with isotropic within-class noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticDatasetSpec {
    pub num_classes: usize,
    pub dim: usize,
    pub samples_per_class: usize,
    /// Distance between any two class means.
    pub class_separation: f64,
    /// Within-class standard deviation.
    pub noise_floor: f64,
    pub rng_seed: u64,
}

impl SyntheticDatasetSpec {
    pub fn validate(&self) -> Result<()> {
        if self.num_classes < 2 {
            return Err(domain("num_classes", "must be at least 2"));
        }
        if self.dim < self.num_classes {
            return Err(domain(
                "dim",
                format!("must be at least num_classes ({}) to place equidistant means", self.num_classes),
            ));
        }
        if self.samples_per_class == 0 {
            return Err(domain("samples_per_class", "must be at least 1"));
        }
        if !(self.class_separation >= 0.0 && self.class_separation.is_finite()) {
            return Err(domain("class_separation", "must be non-negative"));
        }
        if !(self.noise_floor > 0.0 && self.noise_floor.is_finite()) {
            return Err(domain("noise_floor", "must be positive"));
        }
        Ok(())
    }

    /// Class means: scaled basis vectors, centered at the origin.
    pub fn class_means(&self) -> Vec<Vec<f64>> {
        let k = self.num_classes;
        let scale = self.class_separation / std::f64::consts::SQRT_2;
        let center = scale / k as f64;
        (0..k)
            .map(|c| {
                let mut m = vec![0.0; self.dim];
                for (j, v) in m.iter_mut().enumerate().take(k) {
                    *v = if j == c { scale - center } else { -center };
                }
                m
            })
            .collect()
    }
}

/// Row-major `N x D` representation matrix with labels and split tags.
#[derive(Debug, Clone, PartialEq)]
pub struct RepresentationDataset {
    dim: usize,
    num_classes: usize,
    vectors: Vec<f64>,
    labels: Vec<usize>,
    splits: Vec<Split>,
}

impl RepresentationDataset {
    pub fn new(
        dim: usize,
        num_classes: usize,
        vectors: Vec<f64>,
        labels: Vec<usize>,
        splits: Vec<Split>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDataset("dimension must be positive".into()));
        }
        if num_classes < 2 {
            return Err(Error::InvalidDataset("need at least 2 classes".into()));
        }
        if vectors.len() != labels.len() * dim || splits.len() != labels.len() {
            return Err(Error::InvalidDataset(format!(
                "{} values, {} labels and {} split tags do not form a {}-column table",
                vectors.len(),
                labels.len(),
                splits.len(),
                dim
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&y| y >= num_classes) {
            return Err(Error::InvalidDataset(format!("label {bad} out of range for {num_classes} classes")));
        }
        Ok(Self {
            dim,
            num_classes,
            vectors,
            labels,
            splits,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vectors(&self) -> &[f64] {
        &self.vectors
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn splits(&self) -> &[Split] {
        &self.splits
    }

    /// Row indices tagged with `split`, in row order.
    pub fn indices(&self, split: Split) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.splits[i] == split).collect()
    }

    /// Per-class row counts within a split.
    pub fn class_counts(&self, split: Split) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for (y, s) in self.labels.iter().zip(&self.splits) {
            if *s == split {
                counts[*y] += 1;
            }
        }
        counts
    }

    /// Copy of the rows at `indices`, relabelled with `split`.
    pub fn select(&self, indices: &[usize], split: Split) -> Self {
        self.assemble(&[(indices, split)])
    }

    /// Concatenates row groups, tagging each group with its split.
    pub fn assemble(&self, parts: &[(&[usize], Split)]) -> Self {
        let total: usize = parts.iter().map(|(rows, _)| rows.len()).sum();
        let mut vectors = Vec::with_capacity(total * self.dim);
        let mut labels = Vec::with_capacity(total);
        let mut splits = Vec::with_capacity(total);
        for &(rows, split) in parts {
            for &i in rows {
                vectors.extend_from_slice(self.row(i));
                labels.push(self.labels[i]);
                splits.push(split);
            }
        }
        Self {
            dim: self.dim,
            num_classes: self.num_classes,
            vectors,
            labels,
            splits,
        }
    }

    /// Copy with the same rows but different vectors (same shape).
    pub(crate) fn with_vectors(&self, vectors: Vec<f64>) -> Self {
        debug_assert_eq!(vectors.len(), self.vectors.len());
        Self {
            vectors,
            ..self.clone()
        }
    }
}

/// Draws the dataset; rows interleave classes (`row i` has label `i mod K`)
/// and are tagged [`Split::Pool`].
pub fn generate_dataset(spec: &SyntheticDatasetSpec) -> Result<RepresentationDataset> {
    spec.validate()?;
    let means = spec.class_means();
    let k = spec.num_classes;
    let n = k * spec.samples_per_class;
    let normal = Normal::new(0.0, spec.noise_floor).expect("positive std");
    let mut r = rng::stream(spec.rng_seed, &[GENERATE_STREAM]);
    let mut vectors = Vec::with_capacity(n * spec.dim);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let y = i % k;
        labels.push(y);
        vectors.extend(means[y].iter().map(|&m| m + normal.sample(&mut r)));
    }
    RepresentationDataset::new(spec.dim, k, vectors, labels, vec![Split::Pool; n])
}

/// Adds i.i.d. `N(0, sigma2)` noise to every coordinate.
pub fn add_gaussian_noise(
    ds: &RepresentationDataset,
    sigma2: f64,
    rng_seed: u64,
) -> Result<RepresentationDataset> {
    if !(sigma2 >= 0.0 && sigma2.is_finite()) {
        return Err(domain("sigma2", "must be non-negative"));
    }
    if sigma2 == 0.0 {
        return Ok(ds.clone());
    }
    let normal = Normal::new(0.0, sigma2.sqrt()).expect("positive std");
    let mut r = rng::stream(rng_seed, &[NOISE_STREAM]);
    let vectors = ds.vectors.iter().map(|&v| v + normal.sample(&mut r)).collect();
    Ok(ds.with_vectors(vectors))
}

/// Split sizes per class for `per_class_train` training rows.
pub fn split_sizes(per_class_train: usize, eta: f64) -> Result<(usize, usize)> {
    crate::domain::SplitSpec::new(eta)?;
    if per_class_train == 0 {
        return Err(domain("per_class_train", "must be at least 1"));
    }
    let eval = (per_class_train as f64 / eta).floor() as usize;
    if eval == 0 {
        return Err(domain(
            "per_class_train",
            format!("{per_class_train} / eta={eta} leaves no validation or test rows"),
        ));
    }
    Ok((per_class_train, eval))
}

/// Stratified `η:1:1` subsample: `per_class_train` training rows and
/// `per_class_train / η` validation and test rows for every class.
///
/// Only labels and the seed decide which rows are drawn, so two datasets with
/// the same label sequence yield row-aligned subsamples.
pub fn stratified_subsample(
    ds: &RepresentationDataset,
    per_class_train: usize,
    eta: f64,
    rng_seed: u64,
) -> Result<RepresentationDataset> {
    let (train, eval) = split_sizes(per_class_train, eta)?;
    let need = train + 2 * eval;
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); ds.num_classes];
    for (i, &y) in ds.labels.iter().enumerate() {
        by_class[y].push(i);
    }
    for (class, rows) in by_class.iter().enumerate() {
        if rows.len() < need {
            return Err(Error::InsufficientData {
                class,
                available: rows.len(),
                required: need,
            });
        }
    }
    let mut r = rng::stream(rng_seed, &[SUBSAMPLE_STREAM]);
    for rows in &mut by_class {
        rows.shuffle(&mut r);
        rows.truncate(need);
    }
    let mut vectors = Vec::with_capacity(need * ds.num_classes * ds.dim);
    let mut labels = Vec::new();
    let mut splits = Vec::new();
    let layout = [(Split::Train, 0, train), (Split::Val, train, eval), (Split::Test, train + eval, eval)];
    for (split, offset, count) in layout {
        // Interleave classes within each split.
        for j in offset..offset + count {
            for rows in &by_class {
                let i = rows[j];
                vectors.extend_from_slice(ds.row(i));
                labels.push(ds.labels[i]);
                splits.push(split);
            }
        }
    }
    RepresentationDataset::new(ds.dim, ds.num_classes, vectors, labels, splits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(per_class: usize) -> SyntheticDatasetSpec {
        SyntheticDatasetSpec {
            num_classes: 2,
            dim: 8,
            samples_per_class: per_class,
            class_separation: 3.0,
            noise_floor: 0.5,
            rng_seed: 5,
        }
    }

    #[test]
    fn means_are_equidistant() {
        let s = SyntheticDatasetSpec {
            num_classes: 5,
            dim: 7,
            class_separation: 2.5,
            ..spec(1)
        };
        let m = s.class_means();
        for a in 0..5 {
            for b in a + 1..5 {
                let d: f64 = m[a].iter().zip(&m[b]).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
                assert!((d - 2.5).abs() < 1e-12);
            }
        }
        let centroid: f64 = (0..5).map(|c| m[c][0]).sum();
        assert!(centroid.abs() < 1e-12);
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_dataset(&spec(50)).unwrap();
        let b = generate_dataset(&spec(50)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 100);
        assert_eq!(a.class_counts(Split::Pool), vec![50, 50]);
        let c = generate_dataset(&SyntheticDatasetSpec { rng_seed: 6, ..spec(50) }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn invalid_specs() {
        assert!(generate_dataset(&SyntheticDatasetSpec { num_classes: 1, ..spec(5) }).is_err());
        assert!(generate_dataset(&SyntheticDatasetSpec { dim: 1, ..spec(5) }).is_err());
        assert!(generate_dataset(&SyntheticDatasetSpec { noise_floor: 0.0, ..spec(5) }).is_err());
    }

    #[test]
    fn zero_noise_is_identity() {
        let ds = generate_dataset(&spec(20)).unwrap();
        assert_eq!(add_gaussian_noise(&ds, 0.0, 3).unwrap(), ds);
        assert!(add_gaussian_noise(&ds, -0.1, 3).is_err());
    }

    #[test]
    fn noise_variance_matches() {
        let ds = generate_dataset(&SyntheticDatasetSpec { dim: 20, ..spec(2500) }).unwrap();
        assert!(ds.vectors().len() >= 100_000);
        for sigma2 in [0.01, 0.3, 3.0] {
            let noisy = add_gaussian_noise(&ds, sigma2, 9).unwrap();
            assert_eq!(noisy.labels(), ds.labels());
            assert_eq!(noisy.splits(), ds.splits());
            let diffs: Vec<f64> = noisy.vectors().iter().zip(ds.vectors()).map(|(a, b)| a - b).collect();
            let n = diffs.len() as f64;
            let mean = diffs.iter().sum::<f64>() / n;
            let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
            assert!((var / sigma2 - 1.0).abs() < 0.05, "sigma2={sigma2} var={var}");
        }
    }

    #[test]
    fn stratified_sizes() {
        let ds = generate_dataset(&spec(200)).unwrap();
        let sub = stratified_subsample(&ds, 128, 4.0, 1).unwrap();
        assert_eq!(sub.indices(Split::Train).len(), 256);
        assert_eq!(sub.indices(Split::Val).len(), 64);
        assert_eq!(sub.indices(Split::Test).len(), 64);
        assert_eq!(sub.class_counts(Split::Train), vec![128, 128]);
        assert_eq!(sub.class_counts(Split::Test), vec![32, 32]);

        let six = generate_dataset(&SyntheticDatasetSpec { num_classes: 6, ..spec(200) }).unwrap();
        let sub = stratified_subsample(&six, 128, 4.0, 1).unwrap();
        assert_eq!(sub.indices(Split::Train).len(), 768);
        assert_eq!(sub.indices(Split::Val).len(), 192);
        assert_eq!(sub.indices(Split::Test).len(), 192);

        let tiny = stratified_subsample(&ds, 4, 4.0, 1).unwrap();
        assert_eq!(tiny.class_counts(Split::Val), vec![1, 1]);
        assert_eq!(tiny.class_counts(Split::Test), vec![1, 1]);
    }

    #[test]
    fn insufficient_data_names_class() {
        let ds = generate_dataset(&spec(100)).unwrap();
        match stratified_subsample(&ds, 128, 4.0, 1) {
            Err(Error::InsufficientData { class: 0, available: 100, required: 192 }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(stratified_subsample(&ds, 2, 4.0, 1).is_err());
    }

    #[test]
    fn subsample_alignment_across_noisy_copies() {
        let ds = generate_dataset(&spec(200)).unwrap();
        let noisy = add_gaussian_noise(&ds, 1.0, 2).unwrap();
        let a = stratified_subsample(&ds, 64, 4.0, 8).unwrap();
        let b = stratified_subsample(&noisy, 64, 4.0, 8).unwrap();
        assert_eq!(a.labels(), b.labels());
        assert_ne!(a.vectors(), b.vectors());
    }
}
