//! End-to-end case studies on synthetic representations.
//!
//! A study draws one pool per encoder, takes nested stratified subsets of it,
//! derives the representation variants under comparison, trains one probe per
//! (subset, variant, seed) cell and condenses the results into margin
//! coverage, power curves, size recommendations and collapse verdicts.

use rayon::prelude::*;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::dataset::{
    add_gaussian_noise, generate_dataset, split_sizes, stratified_subsample, RepresentationDataset,
    SyntheticDatasetSpec,
};
use super::train::{train_probe, TrainedProbe, TrainerConfig};
use crate::bounds::{finite_class_margin, FunctionClassSpec};
use crate::collapse::{detect_collapse, subsample_trials, CollapseReport, CollapseThresholds, DEFAULT_NUM_TRIALS};
use crate::domain::{
    mean_gap_with, ClassifierKind, ClassifierSpec, ComparisonProblem, PairedPredictions, ProbingConfiguration,
};
use crate::error::{domain, Error, Result};
use crate::rng;
use crate::sizer::{recommend, Recommendation, SizerSettings};
use crate::stats::{PowerCurve, PowerEstimate, PowerSettings, SamplingMode, DEFAULT_ALPHA, DEFAULT_NUM_SIMS};

const POOL_STREAM: u64 = 0x504f_4f4c;
const SUBSET_STREAM: u64 = 0x5355_4253;
const VARIANT_STREAM: u64 = 0x5641_5249;
const CELL_STREAM: u64 = 0x4345_4c4c;
const POWER_STREAM: u64 = 0x5057_5231;
const COLLAPSE_STREAM: u64 = 0x434f_4c4c;

/// Subset sizes (training rows per class) swept by default.
pub const DEFAULT_SUBSET_SIZES: [usize; 5] = [1 << 7, 1 << 9, 1 << 11, 1 << 13, 1 << 15];
pub const DEFAULT_NOISE_GRID: [f64; 6] = [0.01, 0.03, 0.1, 0.3, 1.0, 3.0];
pub const DEFAULT_NUM_SEEDS: usize = 5;
pub const DEFAULT_HIDDEN_UNITS: usize = 20;

const TASK_ID: &str = "synthetic";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseStudyKind {
    /// Seed spread of one configuration against its theoretical margin.
    BoundCheck,
    /// Original representations against copies with added Gaussian noise.
    GaussianNoise,
    /// Original representations against a degraded encoder.
    CorruptedEncoder,
    /// Two independently drawn encoders over the same items.
    EncoderComparison,
    /// Two probe architectures on the same representations.
    ClassifierComparison,
}

impl CaseStudyKind {
    pub const ALL: [CaseStudyKind; 5] = [
        CaseStudyKind::BoundCheck,
        CaseStudyKind::GaussianNoise,
        CaseStudyKind::CorruptedEncoder,
        CaseStudyKind::EncoderComparison,
        CaseStudyKind::ClassifierComparison,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CaseStudyKind::BoundCheck => "bound-check",
            CaseStudyKind::GaussianNoise => "gaussian-noise",
            CaseStudyKind::CorruptedEncoder => "corrupted-encoder",
            CaseStudyKind::EncoderComparison => "encoder-comparison",
            CaseStudyKind::ClassifierComparison => "classifier-comparison",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

/// Geometry of a synthetic encoder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncoderParams {
    pub dim: usize,
    pub class_separation: f64,
    pub noise_floor: f64,
}

impl EncoderParams {
    fn dataset_spec(&self, num_classes: usize, samples_per_class: usize, rng_seed: u64) -> SyntheticDatasetSpec {
        SyntheticDatasetSpec {
            num_classes,
            dim: self.dim,
            samples_per_class,
            class_separation: self.class_separation,
            noise_floor: self.noise_floor,
            rng_seed,
        }
    }
}

/// Degraded encoder: class means are pulled toward the origin by
/// `mean_shrink` and i.i.d. noise of variance `added_noise` is added.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Corruption {
    /// Fraction of the class separation that survives, in `[0, 1]`.
    pub mean_shrink: f64,
    pub added_noise: f64,
}

/// Power simulation settings; the rng seed comes from the study seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyPowerSettings {
    pub num_sims_per_seed: usize,
    pub alpha: f64,
    pub sampling: SamplingMode,
}

impl Default for StudyPowerSettings {
    fn default() -> Self {
        Self {
            num_sims_per_seed: DEFAULT_NUM_SIMS,
            alpha: DEFAULT_ALPHA,
            sampling: SamplingMode::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyCollapseSettings {
    pub thresholds: CollapseThresholds,
    pub num_trials: usize,
    /// Each pilot trial draws this fraction of the test split.
    pub trial_fraction: f64,
}

impl Default for StudyCollapseSettings {
    fn default() -> Self {
        Self {
            thresholds: CollapseThresholds::default(),
            num_trials: DEFAULT_NUM_TRIALS,
            trial_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseStudyParams {
    pub num_classes: usize,
    pub encoder: EncoderParams,
    /// Second encoder for [`CaseStudyKind::EncoderComparison`].
    pub encoder_b: EncoderParams,
    pub corruption: Corruption,
    /// Training rows per class for each subset.
    pub subset_sizes: Vec<usize>,
    pub num_seeds: usize,
    pub eta: f64,
    pub noise_grid: Vec<f64>,
    /// Grid and probe for configuration A. Variants on another encoder reuse
    /// the probe kind with that encoder's dimension.
    pub trainer: TrainerConfig,
    /// Probe B for [`CaseStudyKind::ClassifierComparison`].
    pub model_b: ClassifierSpec,
    /// Compare probe A against itself (independent training seeds).
    pub identical: bool,
    pub power: StudyPowerSettings,
    pub sizer: SizerSettings,
    pub collapse: StudyCollapseSettings,
}

impl Default for CaseStudyParams {
    fn default() -> Self {
        let num_classes = 2;
        let encoder = EncoderParams {
            dim: 8,
            class_separation: 1.5,
            noise_floor: 0.3,
        };
        Self {
            num_classes,
            encoder,
            encoder_b: EncoderParams {
                dim: 12,
                class_separation: 1.0,
                noise_floor: 0.3,
            },
            corruption: Corruption {
                mean_shrink: 0.6,
                added_noise: 0.05,
            },
            subset_sizes: DEFAULT_SUBSET_SIZES.to_vec(),
            num_seeds: DEFAULT_NUM_SEEDS,
            eta: crate::domain::SplitSpec::DEFAULT_ETA,
            noise_grid: DEFAULT_NOISE_GRID.to_vec(),
            trainer: TrainerConfig::full_grid(
                ClassifierSpec::logistic_regression(encoder.dim, num_classes).expect("valid default"),
            ),
            model_b: ClassifierSpec::mlp(encoder.dim, DEFAULT_HIDDEN_UNITS, num_classes).expect("valid default"),
            identical: false,
            power: StudyPowerSettings::default(),
            sizer: SizerSettings::default(),
            collapse: StudyCollapseSettings::default(),
        }
    }
}

impl CaseStudyParams {
    pub fn validate(&self) -> Result<()> {
        if self.subset_sizes.is_empty() {
            return Err(Error::Empty("subset_sizes"));
        }
        for &s in &self.subset_sizes {
            split_sizes(s, self.eta)?;
        }
        if self.num_seeds == 0 {
            return Err(domain("num_seeds", "must be at least 1"));
        }
        for &s2 in &self.noise_grid {
            if !(s2 >= 0.0 && s2.is_finite()) {
                return Err(domain("sigma2", "must be non-negative"));
            }
        }
        for enc in [&self.encoder, &self.encoder_b] {
            enc.dataset_spec(self.num_classes, 1, 0).validate()?;
        }
        if !(0.0..=1.0).contains(&self.corruption.mean_shrink) {
            return Err(domain("mean_shrink", "must lie in [0,1]"));
        }
        if !(self.corruption.added_noise >= 0.0 && self.corruption.added_noise.is_finite()) {
            return Err(domain("added_noise", "must be non-negative"));
        }
        self.trainer.validate()?;
        for (name, spec) in [("trainer.model", &self.trainer.model), ("model_b", &self.model_b)] {
            if spec.input_dim != self.encoder.dim || spec.num_classes != self.num_classes {
                return Err(domain(
                    name,
                    format!("must take {}-dimensional inputs over {} classes", self.encoder.dim, self.num_classes),
                ));
            }
        }
        if self.power.num_sims_per_seed == 0 {
            return Err(domain("num_sims_per_seed", "must be at least 1"));
        }
        crate::stats::McNemarTest::new(self.power.alpha)?;
        self.collapse.thresholds.validate()?;
        if self.collapse.num_trials == 0 {
            return Err(domain("collapse num_trials", "must be at least 1"));
        }
        if !(self.collapse.trial_fraction > 0.0 && self.collapse.trial_fraction <= 1.0) {
            return Err(domain("trial_fraction", "must lie in (0,1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum VariantSource {
    Original,
    GaussianNoise { sigma2: f64 },
    Corrupted { mean_shrink: f64, added_noise: f64 },
    SecondEncoder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantInfo {
    pub name: String,
    pub source: VariantSource,
    pub classifier: ClassifierSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyCell {
    pub subset_per_class: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub variant: String,
    pub seed: usize,
    pub test_accuracy: f64,
    pub val_accuracy: f64,
    pub selected_epoch: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub degenerate: bool,
}

/// Seed spread of one variant on one subset, with the bound overlay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginRow {
    pub subset_per_class: usize,
    pub n_train: usize,
    pub variant: String,
    pub mean_accuracy: f64,
    /// Sample standard deviation over seeds; 0 for a single seed.
    pub stdev: f64,
    pub theoretical_margin: f64,
    /// Seeds with `|acc - mean| <= margin`.
    pub seeds_within: usize,
    pub num_seeds: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub within: usize,
    pub total: usize,
}

impl Coverage {
    pub fn fraction(&self) -> f64 {
        if self.total == 0 {
            1.0
        } else {
            self.within as f64 / self.total as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub comparison: String,
    pub variant_a: String,
    pub variant_b: String,
    pub subset_per_class: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub mean_gap: f64,
    pub power: PowerEstimate,
    pub collapse: CollapseReport,
    /// `None` when every seed shows a zero gap.
    pub recommendation: Option<Recommendation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedCurve {
    pub comparison: String,
    pub curve: PowerCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseStudyReport {
    pub kind: CaseStudyKind,
    pub rng_seed: u64,
    pub params: CaseStudyParams,
    pub variants: Vec<VariantInfo>,
    pub accuracies: Vec<AccuracyCell>,
    pub margins: Vec<MarginRow>,
    pub coverage: Coverage,
    pub comparisons: Vec<ComparisonRow>,
    /// Power at each subset's full test split, one curve per comparison.
    pub power_curves: Vec<NamedCurve>,
    pub notes: Vec<String>,
}

impl CaseStudyReport {
    pub fn curve(&self, comparison: &str) -> Option<&PowerCurve> {
        self.power_curves
            .iter()
            .find(|c| c.comparison == comparison)
            .map(|c| &c.curve)
    }

    /// Verdicts of every comparison on the largest subset.
    pub fn final_verdicts(&self) -> Vec<(&str, &CollapseReport)> {
        let largest = self.comparisons.iter().map(|c| c.subset_per_class).max();
        self.comparisons
            .iter()
            .filter(|c| Some(c.subset_per_class) == largest)
            .map(|c| (c.comparison.as_str(), &c.collapse))
            .collect()
    }
}

struct Variant {
    info: VariantInfo,
    trainer: TrainerConfig,
}

struct Plan {
    variants: Vec<Variant>,
    /// `(label, a, b)` indices into `variants`.
    comparisons: Vec<(String, usize, usize)>,
    notes: Vec<String>,
}

fn plan(kind: CaseStudyKind, p: &CaseStudyParams) -> Result<Plan> {
    let original = |name: &str, trainer: TrainerConfig| Variant {
        info: VariantInfo {
            name: name.into(),
            source: VariantSource::Original,
            classifier: trainer.model,
        },
        trainer,
    };
    let on_original = |name: String, source: VariantSource| Variant {
        info: VariantInfo {
            name,
            source,
            classifier: p.trainer.model,
        },
        trainer: p.trainer.clone(),
    };
    let mut notes = Vec::new();
    let (variants, comparisons) = match kind {
        CaseStudyKind::BoundCheck => (vec![original("original", p.trainer.clone())], vec![]),
        CaseStudyKind::GaussianNoise => {
            if p.noise_grid.is_empty() {
                return Err(Error::Empty("noise_grid"));
            }
            let mut v = vec![original("original", p.trainer.clone())];
            let mut c = Vec::new();
            for &sigma2 in &p.noise_grid {
                let name = format!("sigma2={sigma2}");
                v.push(on_original(name.clone(), VariantSource::GaussianNoise { sigma2 }));
                c.push((name, 0, v.len() - 1));
            }
            (v, c)
        }
        CaseStudyKind::CorruptedEncoder => {
            notes.push(format!(
                "the corrupted encoder is a synthetic stand-in: class means shrunk to {} of their separation plus noise of variance {}",
                p.corruption.mean_shrink, p.corruption.added_noise
            ));
            let source = VariantSource::Corrupted {
                mean_shrink: p.corruption.mean_shrink,
                added_noise: p.corruption.added_noise,
            };
            (
                vec![original("original", p.trainer.clone()), on_original("corrupted".into(), source)],
                vec![("original-vs-corrupted".into(), 0, 1)],
            )
        }
        CaseStudyKind::EncoderComparison => {
            let m = p.trainer.model;
            let spec_b = ClassifierSpec::new(m.kind, p.encoder_b.dim, m.hidden_units, m.num_classes)?;
            let b = Variant {
                info: VariantInfo {
                    name: "encoder-b".into(),
                    source: VariantSource::SecondEncoder,
                    classifier: spec_b,
                },
                trainer: p.trainer.with_model(spec_b),
            };
            (
                vec![original("encoder-a", p.trainer.clone()), b],
                vec![("encoder-a-vs-encoder-b".into(), 0, 1)],
            )
        }
        CaseStudyKind::ClassifierComparison => {
            let model_b = if p.identical { p.trainer.model } else { p.model_b };
            if p.identical {
                notes.push("identical configurations: both sides train the same probe with independent seeds".into());
            }
            let name_of = |s: &ClassifierSpec| match s.kind {
                ClassifierKind::LogisticRegression => "logreg".to_string(),
                ClassifierKind::Mlp => format!("mlp{}", s.hidden_units),
            };
            let (na, mut nb) = (name_of(&p.trainer.model), name_of(&model_b));
            if na == nb {
                nb.push_str("-b");
            }
            let label = format!("{na}-vs-{nb}");
            (
                vec![original(&na, p.trainer.clone()), original(&nb, p.trainer.with_model(model_b))],
                vec![(label, 0, 1)],
            )
        }
    };
    Ok(Plan {
        variants,
        comparisons,
        notes,
    })
}

/// Moves each row's class mean toward the origin and adds noise.
fn corrupt(
    ds: &RepresentationDataset,
    means: &[Vec<f64>],
    c: &Corruption,
    rng_seed: u64,
) -> Result<RepresentationDataset> {
    let d = ds.dim();
    let pull = 1.0 - c.mean_shrink;
    let mut v = ds.vectors().to_vec();
    for (i, &y) in ds.labels().iter().enumerate() {
        for (x, m) in v[i * d..(i + 1) * d].iter_mut().zip(&means[y]) {
            *x -= pull * m;
        }
    }
    if c.added_noise > 0.0 {
        let normal = Normal::new(0.0, c.added_noise.sqrt()).expect("positive std");
        let mut r = rng::stream(rng_seed, &[VARIANT_STREAM]);
        for x in &mut v {
            *x += normal.sample(&mut r);
        }
    }
    Ok(ds.with_vectors(v))
}

fn sample_stdev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

struct TrainedStudy {
    plan: Plan,
    /// Ascending, deduplicated.
    subsets: Vec<usize>,
    /// Indexed by `(subset * variants + variant) * seeds + seed`.
    cells: Vec<TrainedProbe>,
    num_seeds: usize,
}

impl TrainedStudy {
    fn cell(&self, si: usize, vi: usize, s: usize) -> &TrainedProbe {
        &self.cells[(si * self.plan.variants.len() + vi) * self.num_seeds + s]
    }

    /// Test-split correctness of comparison `ci` on subset `si`, one row per seed.
    fn paired(&self, ci: usize, si: usize) -> Result<PairedPredictions> {
        let (_, a, b) = &self.plan.comparisons[ci];
        let ns = self.num_seeds;
        let n_test = self.cell(si, *a, 0).test_correct.len();
        PairedPredictions::new(
            (0..n_test).map(|i| i.to_string()).collect(),
            (0..ns).map(|s| s.to_string()).collect(),
            (0..ns).map(|s| self.cell(si, *a, s).test_correct.clone()).collect(),
            (0..ns).map(|s| self.cell(si, *b, s).test_correct.clone()).collect(),
        )
    }
}

fn train_study(kind: CaseStudyKind, params: &CaseStudyParams, rng_seed: u64) -> Result<TrainedStudy> {
    params.validate()?;
    let plan = plan(kind, params)?;
    let k = params.num_classes;
    let mut subsets = params.subset_sizes.clone();
    subsets.sort_unstable();
    subsets.dedup();
    let largest = *subsets.last().expect("validated non-empty");
    let (_, eval) = split_sizes(largest, params.eta)?;
    let pool_per_class = largest + 2 * eval;

    let spec_a = params
        .encoder
        .dataset_spec(k, pool_per_class, rng::derive_seed(rng_seed, &[POOL_STREAM, 0]));
    let pool_a = generate_dataset(&spec_a)?;
    let means_a = spec_a.class_means();
    let needs_b = plan
        .variants
        .iter()
        .any(|v| v.info.source == VariantSource::SecondEncoder);
    let pool_b = if needs_b {
        Some(generate_dataset(&params.encoder_b.dataset_spec(
            k,
            pool_per_class,
            rng::derive_seed(rng_seed, &[POOL_STREAM, 1]),
        ))?)
    } else {
        None
    };

    // Datasets per (subset, variant). Subsample seeds depend on the subset
    // only, so every variant of a subset shares its items.
    let datasets: Vec<Vec<RepresentationDataset>> = subsets
        .par_iter()
        .enumerate()
        .map(|(si, &size)| {
            let sub_seed = rng::derive_seed(rng_seed, &[SUBSET_STREAM, si as u64]);
            let base = stratified_subsample(&pool_a, size, params.eta, sub_seed)?;
            plan.variants
                .iter()
                .enumerate()
                .map(|(vi, v)| {
                    let vseed = rng::derive_seed(rng_seed, &[VARIANT_STREAM, si as u64, vi as u64]);
                    match v.info.source {
                        VariantSource::Original => Ok(base.clone()),
                        VariantSource::GaussianNoise { sigma2 } => add_gaussian_noise(&base, sigma2, vseed),
                        VariantSource::Corrupted { .. } => corrupt(&base, &means_a, &params.corruption, vseed),
                        VariantSource::SecondEncoder => stratified_subsample(
                            pool_b.as_ref().expect("second pool drawn"),
                            size,
                            params.eta,
                            sub_seed,
                        ),
                    }
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let nv = plan.variants.len();
    let ns = params.num_seeds;
    let cells: Vec<(usize, usize, usize)> = (0..subsets.len())
        .flat_map(|si| (0..nv).flat_map(move |vi| (0..ns).map(move |s| (si, vi, s))))
        .collect();
    let trained = cells
        .par_iter()
        .map(|&(si, vi, s)| {
            let seed = rng::derive_seed(rng_seed, &[CELL_STREAM, si as u64, vi as u64, s as u64]);
            train_probe(&datasets[si][vi], &plan.variants[vi].trainer, seed)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrainedStudy {
        plan,
        subsets,
        cells: trained,
        num_seeds: ns,
    })
}

/// Paired test predictions behind each comparison of a study.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonPredictions {
    pub comparison: String,
    pub subset_per_class: usize,
    pub predictions: PairedPredictions,
}

/// Trains a study and returns the raw paired predictions instead of the
/// condensed report, for feeding external tooling.
pub fn comparison_predictions(
    kind: CaseStudyKind,
    params: &CaseStudyParams,
    rng_seed: u64,
) -> Result<Vec<ComparisonPredictions>> {
    let t = train_study(kind, params, rng_seed)?;
    let mut out = Vec::new();
    for (ci, (label, ..)) in t.plan.comparisons.iter().enumerate() {
        for (si, &size) in t.subsets.iter().enumerate() {
            out.push(ComparisonPredictions {
                comparison: label.clone(),
                subset_per_class: size,
                predictions: t.paired(ci, si)?,
            });
        }
    }
    Ok(out)
}

/// Runs a case study. The report is a pure function of `(kind, params,
/// rng_seed)` and does not depend on the thread count.
pub fn run_case_study(kind: CaseStudyKind, params: &CaseStudyParams, rng_seed: u64) -> Result<CaseStudyReport> {
    let study = train_study(kind, params, rng_seed)?;
    let k = params.num_classes;
    let ns = study.num_seeds;
    let subsets = &study.subsets;
    let plan = &study.plan;
    let cell = |si: usize, vi: usize, s: usize| study.cell(si, vi, s);

    let mut accuracies = Vec::with_capacity(study.cells.len());
    let mut margins = Vec::new();
    let mut coverage = Coverage { within: 0, total: 0 };
    let mut degenerate = 0;
    for (si, &size) in subsets.iter().enumerate() {
        let (train, eval) = split_sizes(size, params.eta)?;
        let (n_train, n_test) = (train * k, eval * k);
        for (vi, v) in plan.variants.iter().enumerate() {
            let accs: Vec<f64> = (0..ns).map(|s| cell(si, vi, s).test_accuracy).collect();
            for s in 0..ns {
                let t = cell(si, vi, s);
                degenerate += usize::from(t.degenerate);
                accuracies.push(AccuracyCell {
                    subset_per_class: size,
                    n_train,
                    n_test,
                    variant: v.info.name.clone(),
                    seed: s,
                    test_accuracy: t.test_accuracy,
                    val_accuracy: t.val_accuracy,
                    selected_epoch: t.selected_epoch,
                    learning_rate: t.learning_rate,
                    batch_size: t.batch_size,
                    degenerate: t.degenerate,
                });
            }
            let mean = accs.iter().sum::<f64>() / ns as f64;
            let class_spec = FunctionClassSpec::from_classifier(&v.info.classifier, params.sizer.bits_per_param)?;
            let margin = finite_class_margin(n_train as u64, params.sizer.delta, params.sizer.metric_range, &class_spec)?;
            let within = accs.iter().filter(|&&a| (a - mean).abs() <= margin).count();
            coverage.within += within;
            coverage.total += ns;
            margins.push(MarginRow {
                subset_per_class: size,
                n_train,
                variant: v.info.name.clone(),
                mean_accuracy: mean,
                stdev: sample_stdev(&accs),
                theoretical_margin: margin,
                seeds_within: within,
                num_seeds: ns,
            });
        }
    }

    let jobs: Vec<(usize, usize)> = (0..plan.comparisons.len())
        .flat_map(|ci| (0..subsets.len()).map(move |si| (ci, si)))
        .collect();
    let comparisons = jobs
        .iter()
        .map(|&(ci, si)| {
            let (label, a, b) = &plan.comparisons[ci];
            let size = subsets[si];
            let (train, eval) = split_sizes(size, params.eta)?;
            let n_test = eval * k;
            let pred = study.paired(ci, si)?;
            let power = PowerSettings {
                num_sims_per_seed: params.power.num_sims_per_seed,
                alpha: params.power.alpha,
                sampling: params.power.sampling,
                rng_seed: rng::derive_seed(rng_seed, &[POWER_STREAM, ci as u64, si as u64]),
            }
            .estimate(&pred, n_test)?;
            let trial_size = ((params.collapse.trial_fraction * n_test as f64).round() as usize).clamp(1, n_test);
            let trials = subsample_trials(
                &pred,
                trial_size,
                params.collapse.num_trials,
                params.power.alpha,
                rng::derive_seed(rng_seed, &[COLLAPSE_STREAM, ci as u64, si as u64]),
            )?;
            let collapse = detect_collapse(&trials, &params.collapse.thresholds)?;
            let pilot = pred.accuracy_pairs();
            let mean_gap = mean_gap_with(&pilot, params.sizer.gap_mode)?;
            let va = &plan.variants[*a].info;
            let vb = &plan.variants[*b].info;
            let problem = ComparisonProblem::new(
                ProbingConfiguration::new(TASK_ID, &va.name, va.classifier)?,
                ProbingConfiguration::new(TASK_ID, &vb.name, vb.classifier)?,
            )?;
            let recommendation = match recommend(&pilot, &problem, &params.sizer, Some(&collapse)) {
                Ok(r) => Some(r),
                Err(Error::CollapsedComparison) => None,
                Err(e) => return Err(e),
            };
            Ok(ComparisonRow {
                comparison: label.clone(),
                variant_a: va.name.clone(),
                variant_b: vb.name.clone(),
                subset_per_class: size,
                n_train: train * k,
                n_test,
                mean_gap,
                power,
                collapse,
                recommendation,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let power_curves = plan
        .comparisons
        .iter()
        .map(|(label, _, _)| NamedCurve {
            comparison: label.clone(),
            curve: PowerCurve {
                points: comparisons
                    .iter()
                    .filter(|c| &c.comparison == label)
                    .map(|c| (c.n_test, c.power))
                    .collect(),
            },
        })
        .collect();

    let mut notes = plan.notes.clone();
    if degenerate > 0 {
        notes.push(format!("{degenerate} training runs predicted a single class on validation"));
    }
    Ok(CaseStudyReport {
        kind,
        rng_seed,
        params: params.clone(),
        variants: plan.variants.iter().map(|v| v.info.clone()).collect(),
        accuracies,
        margins,
        coverage,
        comparisons,
        power_curves,
        notes,
    })
}
