//! Shared vocabulary: probing configurations, comparison problems, paired
//! prediction records and split geometry.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassifierKind {
    LogisticRegression,
    Mlp,
}

/// Shape of a probing classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    pub input_dim: usize,
    pub hidden_units: usize,
    pub num_classes: usize,
}

impl ClassifierSpec {
    pub fn new(
        kind: ClassifierKind,
        input_dim: usize,
        hidden_units: usize,
        num_classes: usize,
    ) -> Result<Self> {
        if num_classes < 2 {
            return Err(domain("num_classes", "must be at least 2"));
        }
        match kind {
            ClassifierKind::LogisticRegression if hidden_units != 0 => {
                return Err(domain("hidden_units", "must be 0 for logistic regression"))
            }
            ClassifierKind::Mlp if hidden_units == 0 => {
                return Err(domain("hidden_units", "must be at least 1 for an MLP"))
            }
            _ => {}
        }
        Ok(Self {
            kind,
            input_dim,
            hidden_units,
            num_classes,
        })
    }

    pub fn logistic_regression(input_dim: usize, num_classes: usize) -> Result<Self> {
        Self::new(ClassifierKind::LogisticRegression, input_dim, 0, num_classes)
    }

    pub fn mlp(input_dim: usize, hidden_units: usize, num_classes: usize) -> Result<Self> {
        Self::new(ClassifierKind::Mlp, input_dim, hidden_units, num_classes)
    }

    /// Parameter count used by the function-class bound.
    ///
    /// Logistic regression counts `D + 1` weights and the MLP counts
    /// `(D + 1)H + H + 1`. Neither depends on the number of classes.
    pub fn parameter_count(&self) -> u64 {
        let d = self.input_dim as u64;
        match self.kind {
            ClassifierKind::LogisticRegression => d + 1,
            ClassifierKind::Mlp => {
                let h = self.hidden_units as u64;
                (d + 1) * h + h + 1
            }
        }
    }
}

/// Free-function form of [`ClassifierSpec::parameter_count`].
pub fn parameter_count(spec: &ClassifierSpec) -> u64 {
    spec.parameter_count()
}

/// A (task, encoder, classifier) triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbingConfiguration {
    task_id: String,
    encoder_id: String,
    classifier: ClassifierSpec,
}

impl ProbingConfiguration {
    pub fn new(
        task_id: impl Into<String>,
        encoder_id: impl Into<String>,
        classifier: ClassifierSpec,
    ) -> Result<Self> {
        let task_id = task_id.into();
        if task_id.is_empty() {
            return Err(Error::Empty("task_id"));
        }
        Ok(Self {
            task_id,
            encoder_id: encoder_id.into(),
            classifier,
        })
    }

    pub fn task_id(&self) -> &str {
        &self.task_id
    }

    pub fn encoder_id(&self) -> &str {
        &self.encoder_id
    }

    pub fn classifier(&self) -> &ClassifierSpec {
        &self.classifier
    }
}

/// Two configurations on the same task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonProblem {
    config_a: ProbingConfiguration,
    config_b: ProbingConfiguration,
}

impl ComparisonProblem {
    pub fn new(config_a: ProbingConfiguration, config_b: ProbingConfiguration) -> Result<Self> {
        if config_a.task_id != config_b.task_id {
            return Err(Error::CrossTask {
                a: config_a.task_id,
                b: config_b.task_id,
            });
        }
        Ok(Self { config_a, config_b })
    }

    pub fn config_a(&self) -> &ProbingConfiguration {
        &self.config_a
    }

    pub fn config_b(&self) -> &ProbingConfiguration {
        &self.config_b
    }

    pub fn swapped(&self) -> Self {
        Self {
            config_a: self.config_b.clone(),
            config_b: self.config_a.clone(),
        }
    }
}

/// Per-seed, per-item correctness of two configurations on a shared test set.
///
/// Matrices are stored row-major with one row per seed.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedPredictions {
    item_ids: Vec<String>,
    seeds: Vec<String>,
    correct_a: Vec<bool>,
    correct_b: Vec<bool>,
}

impl PairedPredictions {
    /// Builds the record from one row of correctness flags per seed.
    pub fn new(
        item_ids: Vec<String>,
        seeds: Vec<String>,
        correct_a: Vec<Vec<bool>>,
        correct_b: Vec<Vec<bool>>,
    ) -> Result<Self> {
        if item_ids.is_empty() {
            return Err(Error::InvalidPredictions("at least one item is required".into()));
        }
        if seeds.is_empty() {
            return Err(Error::InvalidPredictions("at least one seed is required".into()));
        }
        let mut seen = HashSet::with_capacity(item_ids.len());
        for id in &item_ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::InvalidPredictions(format!("duplicate item id `{id}`")));
            }
        }
        let mut seen = HashSet::with_capacity(seeds.len());
        for s in &seeds {
            if !seen.insert(s.as_str()) {
                return Err(Error::InvalidPredictions(format!("duplicate seed `{s}`")));
            }
        }
        let flatten = |rows: Vec<Vec<bool>>, which: &str| -> Result<Vec<bool>> {
            if rows.len() != seeds.len() {
                return Err(Error::InvalidPredictions(format!(
                    "correct_{which} has {} rows for {} seeds",
                    rows.len(),
                    seeds.len()
                )));
            }
            let mut flat = Vec::with_capacity(seeds.len() * item_ids.len());
            for (row, seed) in rows.into_iter().zip(&seeds) {
                if row.len() != item_ids.len() {
                    return Err(Error::InvalidPredictions(format!(
                        "correct_{which} row for seed `{seed}` has {} entries for {} items",
                        row.len(),
                        item_ids.len()
                    )));
                }
                flat.extend(row);
            }
            Ok(flat)
        };
        let correct_a = flatten(correct_a, "a")?;
        let correct_b = flatten(correct_b, "b")?;
        Ok(Self {
            item_ids,
            seeds,
            correct_a,
            correct_b,
        })
    }

    pub fn item_ids(&self) -> &[String] {
        &self.item_ids
    }

    pub fn seeds(&self) -> &[String] {
        &self.seeds
    }

    pub fn num_items(&self) -> usize {
        self.item_ids.len()
    }

    pub fn num_seeds(&self) -> usize {
        self.seeds.len()
    }

    pub fn seed_index(&self, seed: &str) -> Option<usize> {
        self.seeds.iter().position(|s| s == seed)
    }

    pub fn row_a(&self, seed_index: usize) -> &[bool] {
        let m = self.num_items();
        &self.correct_a[seed_index * m..(seed_index + 1) * m]
    }

    pub fn row_b(&self, seed_index: usize) -> &[bool] {
        let m = self.num_items();
        &self.correct_b[seed_index * m..(seed_index + 1) * m]
    }

    /// Accuracy of each configuration for one seed, as a performance pair.
    pub fn accuracy_pair(&self, seed_index: usize) -> PerformancePair {
        let m = self.num_items() as f64;
        let acc = |row: &[bool]| row.iter().filter(|&&c| c).count() as f64 / m;
        PerformancePair {
            r1: acc(self.row_a(seed_index)),
            r2: acc(self.row_b(seed_index)),
            metric_kind: MetricKind::Accuracy,
        }
    }

    pub fn accuracy_pairs(&self) -> Vec<PerformancePair> {
        (0..self.num_seeds()).map(|s| self.accuracy_pair(s)).collect()
    }

    /// The same record with configurations A and B exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            item_ids: self.item_ids.clone(),
            seeds: self.seeds.clone(),
            correct_a: self.correct_b.clone(),
            correct_b: self.correct_a.clone(),
        }
    }
}

/// Train:validation:test ratio `η:1:1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SplitSpec {
    eta: f64,
}

impl SplitSpec {
    pub const DEFAULT_ETA: f64 = 4.0;

    pub fn new(eta: f64) -> Result<Self> {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(domain("eta", "must be a positive finite number"));
        }
        Ok(Self { eta })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            eta: Self::DEFAULT_ETA,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    Accuracy,
    ControlTaskGap,
    VariationalMdl,
    PrequentialMdl,
}

impl MetricKind {
    /// Range `B` for bounded metrics; `None` for codelengths, which have no
    /// natural cap.
    pub fn default_range(self) -> Option<f64> {
        match self {
            MetricKind::Accuracy | MetricKind::ControlTaskGap => Some(1.0),
            MetricKind::VariationalMdl | MetricKind::PrequentialMdl => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Accuracy => "accuracy",
            MetricKind::ControlTaskGap => "control-task-gap",
            MetricKind::VariationalMdl => "variational-mdl",
            MetricKind::PrequentialMdl => "prequential-mdl",
        }
    }
}

/// Pilot performances of the two configurations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerformancePair {
    pub r1: f64,
    pub r2: f64,
    pub metric_kind: MetricKind,
}

impl PerformancePair {
    pub fn new(r1: f64, r2: f64, metric_kind: MetricKind) -> Result<Self> {
        if !(r1.is_finite() && r2.is_finite()) {
            return Err(domain("performance", "values must be finite"));
        }
        if let Some(range) = metric_kind.default_range() {
            for v in [r1, r2] {
                if !(0.0..=range).contains(&v) {
                    return Err(domain(
                        "performance",
                        format!("{v} lies outside [0, {range}] for {}", metric_kind.name()),
                    ));
                }
            }
        }
        Ok(Self { r1, r2, metric_kind })
    }

    pub fn accuracy(r1: f64, r2: f64) -> Result<Self> {
        Self::new(r1, r2, MetricKind::Accuracy)
    }

    pub fn abs_gap(&self) -> f64 {
        (self.r1 - self.r2).abs()
    }
}

/// How per-seed pilot results are reduced to one gap.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapMode {
    /// Mean over seeds of `|r1 - r2|`.
    #[default]
    MeanOfGaps,
    /// `|mean(r1) - mean(r2)|`.
    GapOfMeans,
}

/// Mean of per-pair absolute gaps.
pub fn mean_gap(pilot: &[PerformancePair]) -> Result<f64> {
    mean_gap_with(pilot, GapMode::MeanOfGaps)
}

pub fn mean_gap_with(pilot: &[PerformancePair], mode: GapMode) -> Result<f64> {
    if pilot.is_empty() {
        return Err(Error::Empty("pilot"));
    }
    let n = pilot.len() as f64;
    Ok(match mode {
        GapMode::MeanOfGaps => pilot.iter().map(PerformancePair::abs_gap).sum::<f64>() / n,
        GapMode::GapOfMeans => {
            let (s1, s2) = pilot
                .iter()
                .fold((0.0, 0.0), |(a, b), p| (a + p.r1, b + p.r2));
            ((s1 - s2) / n).abs()
        }
    })
}
