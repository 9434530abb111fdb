//! Collapsed-comparison detection: repeated pilot-style subsampling and
//! cross-validation fold rotation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::PairedPredictions;
use crate::error::{domain, Error, Result};
use crate::rng;
use crate::stats::{discordance, draw_chi2, McNemarTest, SamplingMode};

pub const DEFAULT_NUM_TRIALS: usize = 20;

const TRIAL_STREAM: u64 = 0x434f_4c4c;

/// One run of the fold rotation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub run: usize,
    pub val_fold: usize,
    pub test_fold: usize,
    pub train_folds: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub num_folds: usize,
    pub assignments: Vec<FoldAssignment>,
}

/// Run `i` validates on fold `i`, tests on fold `(i + 1) mod F` and trains
/// on the rest.
pub fn fold_plan(num_folds: usize) -> Result<FoldPlan> {
    if num_folds < 3 {
        return Err(domain("num_folds", "must be at least 3"));
    }
    let assignments = (0..num_folds)
        .map(|i| {
            let test_fold = (i + 1) % num_folds;
            FoldAssignment {
                run: i,
                val_fold: i,
                test_fold,
                train_folds: (0..num_folds).filter(|&f| f != i && f != test_fold).collect(),
            }
        })
        .collect();
    Ok(FoldPlan {
        num_folds,
        assignments,
    })
}

impl FoldPlan {
    pub fn to_table(&self) -> String {
        let mut out = String::from("run\tval\ttest\ttrain\n");
        for a in &self.assignments {
            let train: Vec<String> = a.train_folds.iter().map(usize::to_string).collect();
            out.push_str(&format!("{}\t{}\t{}\t{}\n", a.run, a.val_fold, a.test_fold, train.join(",")));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Collapsed,
    NotCollapsed,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapseThresholds {
    /// Below this significant fraction the comparison is collapsed.
    pub collapsed_below: f64,
    /// At or above this fraction it is not.
    pub not_collapsed_at: f64,
}

impl Default for CollapseThresholds {
    fn default() -> Self {
        Self {
            collapsed_below: 0.2,
            not_collapsed_at: 0.8,
        }
    }
}

impl CollapseThresholds {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v < 1.0;
        if !ok(self.collapsed_below) || !ok(self.not_collapsed_at) {
            return Err(domain("collapse thresholds", "must lie in (0,1)"));
        }
        if self.collapsed_below > self.not_collapsed_at {
            return Err(domain(
                "collapse thresholds",
                "collapsed_below must not exceed not_collapsed_at",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapseReport {
    pub num_trials: usize,
    pub num_significant: usize,
    pub verdict: Verdict,
    pub threshold: f64,
    pub not_collapsed_at: f64,
}

impl CollapseReport {
    pub fn significant_fraction(&self) -> f64 {
        self.num_significant as f64 / self.num_trials as f64
    }
}

pub fn detect_collapse(trials: &[bool], thresholds: &CollapseThresholds) -> Result<CollapseReport> {
    thresholds.validate()?;
    if trials.len() < 2 {
        return Err(domain("trials", "need at least 2 trial results"));
    }
    let num_significant = trials.iter().filter(|&&s| s).count();
    let fraction = num_significant as f64 / trials.len() as f64;
    let verdict = if fraction < thresholds.collapsed_below {
        Verdict::Collapsed
    } else if fraction >= thresholds.not_collapsed_at {
        Verdict::NotCollapsed
    } else {
        Verdict::Inconclusive
    };
    Ok(CollapseReport {
        num_trials: trials.len(),
        num_significant,
        verdict,
        threshold: thresholds.collapsed_below,
        not_collapsed_at: thresholds.not_collapsed_at,
    })
}

/// Same as [`detect_collapse`] but from raw chi-square statistics.
pub fn detect_collapse_chi2(
    chi2: &[f64],
    alpha: f64,
    thresholds: &CollapseThresholds,
) -> Result<CollapseReport> {
    let test = McNemarTest::new(alpha)?;
    let flags: Vec<bool> = chi2.iter().map(|&c| test.is_significant(c)).collect();
    detect_collapse(&flags, thresholds)
}

/// Repeated pilot studies: each trial draws `trial_size` test items and runs
/// McNemar's test. Trials cycle through the classifier seeds.
pub fn subsample_trials(
    pred: &PairedPredictions,
    trial_size: usize,
    num_trials: usize,
    alpha: f64,
    rng_seed: u64,
) -> Result<Vec<bool>> {
    subsample_trials_with(pred, trial_size, num_trials, alpha, SamplingMode::WithoutReplacement, rng_seed)
}

pub fn subsample_trials_with(
    pred: &PairedPredictions,
    trial_size: usize,
    num_trials: usize,
    alpha: f64,
    sampling: SamplingMode,
    rng_seed: u64,
) -> Result<Vec<bool>> {
    let pool = pred.num_items();
    if trial_size == 0 {
        return Err(domain("trial_size", "must be at least 1"));
    }
    if trial_size > pool {
        return Err(Error::SubsampleTooLarge {
            requested: trial_size,
            pool,
        });
    }
    if num_trials == 0 {
        return Err(domain("num_trials", "must be at least 1"));
    }
    let test = McNemarTest::new(alpha)?;
    let replace = match sampling {
        SamplingMode::WithReplacement => true,
        SamplingMode::WithoutReplacement => false,
        SamplingMode::Auto => trial_size >= pool,
    };
    let codes: Vec<Vec<i8>> = (0..pred.num_seeds())
        .map(|s| discordance(pred.row_a(s), pred.row_b(s)))
        .collect();
    Ok((0..num_trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::stream(rng_seed, &[TRIAL_STREAM, trial_size as u64, t as u64]);
            test.is_significant(draw_chi2(&codes[t % codes.len()], trial_size, replace, &mut r))
        })
        .collect())
}
