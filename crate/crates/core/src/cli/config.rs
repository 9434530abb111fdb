//! Experiment configuration: one flat TOML document holding every tunable
//! default. Command-line flags override file values.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::collapse::{CollapseThresholds, DEFAULT_NUM_TRIALS};
use crate::domain::{GapMode, SplitSpec};
use crate::error::{domain, Error, Result};
use crate::sizer::SizerSettings;
use crate::stats::{McNemarTest, SamplingMode, DEFAULT_ALPHA, DEFAULT_NUM_SIMS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub delta: f64,
    pub eta: f64,
    pub alpha: f64,
    /// Power simulations per classifier seed.
    pub num_sims: usize,
    pub bits_per_param: u32,
    pub metric_range: f64,
    pub collapsed_below: f64,
    pub not_collapsed_at: f64,
    pub collapse_trials: usize,
    pub rng_seed: u64,
    pub prequential_c: f64,
    pub t1_fraction: f64,
    pub gap_mode: GapMode,
    pub sampling: SamplingMode,
    pub predictions: Option<PathBuf>,
    pub pilot: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let t = CollapseThresholds::default();
        Self {
            delta: bounds::DEFAULT_DELTA,
            eta: SplitSpec::DEFAULT_ETA,
            alpha: DEFAULT_ALPHA,
            num_sims: DEFAULT_NUM_SIMS,
            bits_per_param: bounds::DEFAULT_BITS_PER_PARAM,
            metric_range: 1.0,
            collapsed_below: t.collapsed_below,
            not_collapsed_at: t.not_collapsed_at,
            collapse_trials: DEFAULT_NUM_TRIALS,
            rng_seed: 0,
            prequential_c: bounds::DEFAULT_PREQUENTIAL_C,
            t1_fraction: bounds::DEFAULT_T1_FRACTION,
            gap_mode: GapMode::default(),
            sampling: SamplingMode::default(),
            predictions: None,
            pilot: None,
            out: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| domain("config", format!("is invalid: {}", e.message())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(domain("delta", "must lie in (0,1)"));
        }
        SplitSpec::new(self.eta)?;
        McNemarTest::new(self.alpha)?;
        if self.num_sims == 0 {
            return Err(domain("num_sims", "must be at least 1"));
        }
        if self.bits_per_param == 0 {
            return Err(domain("bits_per_param", "must be at least 1"));
        }
        bounds::MetricRange::new(self.metric_range)?;
        self.thresholds().validate()?;
        if self.collapse_trials == 0 {
            return Err(domain("collapse_trials", "must be at least 1"));
        }
        if !(self.prequential_c > 0.0 && self.prequential_c.is_finite()) {
            return Err(domain("prequential_c", "must be positive"));
        }
        if !(self.t1_fraction > 0.0 && self.t1_fraction < 1.0) {
            return Err(domain("t1_fraction", "must lie in (0,1)"));
        }
        Ok(())
    }

    pub fn thresholds(&self) -> CollapseThresholds {
        CollapseThresholds {
            collapsed_below: self.collapsed_below,
            not_collapsed_at: self.not_collapsed_at,
        }
    }

    pub fn sizer_settings(&self) -> SizerSettings {
        SizerSettings {
            delta: self.delta,
            eta: self.eta,
            bits_per_param: self.bits_per_param,
            metric_range: self.metric_range,
            gap_mode: self.gap_mode,
        }
    }
}
