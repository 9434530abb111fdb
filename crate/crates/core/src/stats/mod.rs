//! Paired significance testing and simulation-based power.
//!
//! Power is estimated the way it is usually done for paired classifier
//! comparisons: repeatedly draw a portion of the test items, run McNemar's
//! test on the draw, and report the fraction of draws that came out
//! significant. Draws are run for every classifier seed and pooled.

pub mod chi2;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::PairedPredictions;
use crate::error::{domain, Error, Result};
use crate::rng;

pub use chi2::ChiSquared;

pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_NUM_SIMS: usize = 1000;
/// Conventional adequacy threshold for power.
pub const ADEQUATE_POWER: f64 = 0.8;

const POWER_STREAM: u64 = 0x504f_5745;

/// Counts of (A incorrect/correct) x (B incorrect/correct).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub n00: u64,
    pub n01: u64,
    pub n10: u64,
    pub n11: u64,
}

impl ContingencyTable {
    pub fn from_rows(a: &[bool], b: &[bool]) -> Self {
        let mut t = Self::default();
        for (&ca, &cb) in a.iter().zip(b) {
            match (ca, cb) {
                (false, false) => t.n00 += 1,
                (false, true) => t.n01 += 1,
                (true, false) => t.n10 += 1,
                (true, true) => t.n11 += 1,
            }
        }
        t
    }

    pub fn total(&self) -> u64 {
        self.n00 + self.n01 + self.n10 + self.n11
    }

    pub fn swapped(&self) -> Self {
        Self {
            n00: self.n00,
            n01: self.n10,
            n10: self.n01,
            n11: self.n11,
        }
    }
}

/// Contingency table for one classifier seed.
pub fn contingency(pred: &PairedPredictions, seed: &str) -> Result<ContingencyTable> {
    let s = pred
        .seed_index(seed)
        .ok_or_else(|| Error::UnknownSeed(seed.to_string()))?;
    Ok(ContingencyTable::from_rows(pred.row_a(s), pred.row_b(s)))
}

fn chi2_from_discordant(n01: u64, n10: u64) -> f64 {
    let disc = n01 + n10;
    if disc == 0 {
        return 0.0;
    }
    let diff = n01 as f64 - n10 as f64;
    diff * diff / disc as f64
}

/// `(n01 - n10)^2 / (n01 + n10)`, or 0 when there are no discordant items.
pub fn mcnemar_chi2(t: &ContingencyTable) -> f64 {
    chi2_from_discordant(t.n01, t.n10)
}

/// McNemar's test at a fixed significance level (1 degree of freedom).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McNemarTest {
    alpha: f64,
    critical: f64,
}

impl McNemarTest {
    pub fn new(alpha: f64) -> Result<Self> {
        let critical = ChiSquared::new(1.0)?.critical_value(alpha)?;
        Ok(Self { alpha, critical })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn critical_value(&self) -> f64 {
        self.critical
    }

    /// Strictly above the critical value.
    pub fn is_significant(&self, chi2: f64) -> bool {
        chi2 > self.critical
    }

    pub fn table_significant(&self, t: &ContingencyTable) -> bool {
        self.is_significant(mcnemar_chi2(t))
    }
}

pub fn is_significant(chi2: f64, alpha: f64) -> Result<bool> {
    if chi2.is_nan() || chi2 < 0.0 {
        return Err(domain("chi2", "must be non-negative"));
    }
    Ok(McNemarTest::new(alpha)?.is_significant(chi2))
}

/// How test items are drawn in each simulation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingMode {
    /// Without replacement below the pool size, bootstrap at the pool size.
    #[default]
    Auto,
    WithoutReplacement,
    WithReplacement,
}

impl SamplingMode {
    fn with_replacement(self, size: usize, pool: usize) -> bool {
        match self {
            SamplingMode::Auto => size >= pool,
            SamplingMode::WithoutReplacement => false,
            SamplingMode::WithReplacement => true,
        }
    }
}

/// Discordance per item: +1 when only B is correct, -1 when only A is.
pub(crate) fn discordance(a: &[bool], b: &[bool]) -> Vec<i8> {
    a.iter()
        .zip(b)
        .map(|(&ca, &cb)| match (ca, cb) {
            (false, true) => 1,
            (true, false) => -1,
            _ => 0,
        })
        .collect()
}

/// One simulated draw: McNemar chi-square of a random subsample.
pub(crate) fn draw_chi2<R: Rng>(
    codes: &[i8],
    size: usize,
    replace: bool,
    rng: &mut R,
) -> f64 {
    let (mut n01, mut n10) = (0u64, 0u64);
    let mut tally = |c: i8| match c {
        1 => n01 += 1,
        -1 => n10 += 1,
        _ => {}
    };
    if replace {
        for _ in 0..size {
            tally(codes[rng.random_range(0..codes.len())]);
        }
    } else {
        for i in index::sample(rng, codes.len(), size) {
            tally(codes[i]);
        }
    }
    chi2_from_discordant(n01, n10)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerEstimate {
    pub power: f64,
    pub num_simulations: usize,
    pub num_significant: usize,
    pub alpha: f64,
    pub subsample_size: usize,
}

/// Settings shared by every point of a power simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSettings {
    pub num_sims_per_seed: usize,
    pub alpha: f64,
    pub sampling: SamplingMode,
    pub rng_seed: u64,
}

impl Default for PowerSettings {
    fn default() -> Self {
        Self {
            num_sims_per_seed: DEFAULT_NUM_SIMS,
            alpha: DEFAULT_ALPHA,
            sampling: SamplingMode::Auto,
            rng_seed: 0,
        }
    }
}

impl PowerSettings {
    /// Power at one subsample size, pooled over all classifier seeds.
    pub fn estimate(&self, pred: &PairedPredictions, subsample_size: usize) -> Result<PowerEstimate> {
        let pool = pred.num_items();
        if subsample_size == 0 {
            return Err(domain("subsample_size", "must be at least 1"));
        }
        if subsample_size > pool {
            return Err(Error::SubsampleTooLarge {
                requested: subsample_size,
                pool,
            });
        }
        if self.num_sims_per_seed == 0 {
            return Err(domain("num_sims_per_seed", "must be at least 1"));
        }
        let test = McNemarTest::new(self.alpha)?;
        let replace = self.sampling.with_replacement(subsample_size, pool);
        let codes: Vec<Vec<i8>> = (0..pred.num_seeds())
            .map(|s| discordance(pred.row_a(s), pred.row_b(s)))
            .collect();
        let sims = self.num_sims_per_seed;
        let total = sims * codes.len();
        let num_significant = (0..total)
            .into_par_iter()
            .filter(|&k| {
                let (seed, draw) = (k / sims, k % sims);
                let mut r = rng::stream(
                    self.rng_seed,
                    &[POWER_STREAM, subsample_size as u64, seed as u64, draw as u64],
                );
                test.is_significant(draw_chi2(&codes[seed], subsample_size, replace, &mut r))
            })
            .count();
        Ok(PowerEstimate {
            power: num_significant as f64 / total as f64,
            num_simulations: total,
            num_significant,
            alpha: self.alpha,
            subsample_size,
        })
    }

    pub fn curve(&self, pred: &PairedPredictions, sizes: &[usize]) -> Result<PowerCurve> {
        if sizes.is_empty() {
            return Err(Error::Empty("sizes"));
        }
        let mut sorted = sizes.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let points = sorted
            .into_iter()
            .map(|n| self.estimate(pred, n).map(|e| (n, e)))
            .collect::<Result<Vec<_>>>()?;
        Ok(PowerCurve { points })
    }
}

pub fn estimate_power(
    pred: &PairedPredictions,
    subsample_size: usize,
    num_sims_per_seed: usize,
    alpha: f64,
    rng_seed: u64,
) -> Result<PowerEstimate> {
    PowerSettings {
        num_sims_per_seed,
        alpha,
        sampling: SamplingMode::Auto,
        rng_seed,
    }
    .estimate(pred, subsample_size)
}

/// Power at each test size, ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerCurve {
    pub points: Vec<(usize, PowerEstimate)>,
}

impl PowerCurve {
    /// Smallest test size whose power reaches `threshold`.
    pub fn smallest_adequate(&self, threshold: f64) -> Option<usize> {
        self.points
            .iter()
            .find(|(_, e)| e.power >= threshold)
            .map(|&(n, _)| n)
    }

    /// CSV with columns `test_size,power,num_sims,alpha`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("test_size,power,num_sims,alpha\n");
        for (n, e) in &self.points {
            out.push_str(&format!("{n},{},{},{}\n", e.power, e.num_simulations, e.alpha));
        }
        out
    }
}

/// Each size gets its own streams, so a single-size curve reproduces
/// [`estimate_power`] exactly.
pub fn power_curve(
    pred: &PairedPredictions,
    sizes: &[usize],
    num_sims_per_seed: usize,
    alpha: f64,
    rng_seed: u64,
) -> Result<PowerCurve> {
    PowerSettings {
        num_sims_per_seed,
        alpha,
        sampling: SamplingMode::Auto,
        rng_seed,
    }
    .curve(pred, sizes)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    #[default]
    HigherIsBetter,
    LowerIsBetter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuboptimalityGap {
    pub best: f64,
    pub per_seed_gaps: Vec<f64>,
}

/// Distance of each seed's result from the best seed, a proxy for how far
/// each run sits from the empirical optimum.
pub fn suboptimality_gap(observed: &[f64], direction: Direction) -> Result<SuboptimalityGap> {
    if observed.is_empty() {
        return Err(Error::Empty("observed risks"));
    }
    let best = match direction {
        Direction::HigherIsBetter => observed.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        Direction::LowerIsBetter => observed.iter().copied().fold(f64::INFINITY, f64::min),
    };
    let per_seed_gaps = observed.iter().map(|&v| (best - v).abs()).collect();
    Ok(SuboptimalityGap {
        best,
        per_seed_gaps,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn predictions(a: Vec<Vec<bool>>, b: Vec<Vec<bool>>) -> PairedPredictions {
        let m = a[0].len();
        let seeds = (0..a.len()).map(|s| s.to_string()).collect();
        let ids = (0..m).map(|i| format!("item{i}")).collect();
        PairedPredictions::new(ids, seeds, a, b).unwrap()
    }

    pub(crate) fn disagreement(m: usize, seeds: usize) -> PairedPredictions {
        predictions(vec![vec![true; m]; seeds], vec![vec![false; m]; seeds])
    }

    pub(crate) fn identical(m: usize, seeds: usize) -> PairedPredictions {
        let row: Vec<bool> = (0..m).map(|i| i % 3 != 0).collect();
        predictions(vec![row.clone(); seeds], vec![row; seeds])
    }

    #[test]
    fn contingency_examples() {
        let p = disagreement(10, 1);
        assert_eq!(
            contingency(&p, "0").unwrap(),
            ContingencyTable { n00: 0, n01: 0, n10: 10, n11: 0 }
        );
        let p = identical(9, 1);
        assert_eq!(
            contingency(&p, "0").unwrap(),
            ContingencyTable { n00: 3, n01: 0, n10: 0, n11: 6 }
        );
        // Items 1..5: A right on {1,2,3}, B right on {3,4}.
        let a = vec![true, true, true, false, false];
        let b = vec![false, false, true, true, false];
        let p = predictions(vec![a], vec![b]);
        assert_eq!(
            contingency(&p, "0").unwrap(),
            ContingencyTable { n00: 1, n01: 1, n10: 2, n11: 1 }
        );
        assert!(matches!(contingency(&p, "9"), Err(Error::UnknownSeed(_))));
    }

    #[test]
    fn chi2_examples() {
        let t = ContingencyTable { n00: 3, n01: 15, n10: 5, n11: 7 };
        assert_eq!(mcnemar_chi2(&t), 5.0);
        assert_eq!(mcnemar_chi2(&t.swapped()), 5.0);
        let t = ContingencyTable { n00: 3, n01: 6, n10: 6, n11: 7 };
        assert_eq!(mcnemar_chi2(&t), 0.0);
        assert_eq!(mcnemar_chi2(&ContingencyTable { n00: 4, ..Default::default() }), 0.0);
    }

    #[test]
    fn significance_examples() {
        assert!(is_significant(5.0, 0.05).unwrap());
        assert!(!is_significant(0.0, 0.05).unwrap());
        assert!(!is_significant(0.0, 0.5).unwrap());
        // At the quantile itself the strict inequality fails.
        let test = McNemarTest::new(0.05).unwrap();
        assert!(!is_significant(test.critical_value(), 0.05).unwrap());
        assert!((test.critical_value() - 3.841_46).abs() < 1e-4);
        assert!(!test.is_significant(test.critical_value()));
        assert!(is_significant(3.8415, 0.05).unwrap());
        assert!(is_significant(1.0, 0.0).is_err());
        assert!(is_significant(1.0, 1.0).is_err());
    }

    #[test]
    fn power_degenerate_inputs() {
        let same = identical(30, 3);
        assert_eq!(estimate_power(&same, 20, 200, 0.05, 1).unwrap().power, 0.0);
        let diff = disagreement(100, 2);
        let e = estimate_power(&diff, 100, 200, 0.05, 1).unwrap();
        assert_eq!(e.power, 1.0);
        assert_eq!(e.num_simulations, 400);
        assert!(matches!(
            estimate_power(&diff, 101, 10, 0.05, 1),
            Err(Error::SubsampleTooLarge { .. })
        ));
    }

    #[test]
    fn power_against_subset_enumeration() {
        // 6 items: 3 where only B is right, 1 where only A is, 2 concordant.
        let a = vec![false, false, false, true, true, false];
        let b = vec![true, true, true, false, true, false];
        let p = predictions(vec![a.clone()], vec![b.clone()]);
        let test = McNemarTest::new(0.05).unwrap();
        let mut sig = 0;
        let mut total = 0;
        for mask in 0u32..64 {
            if mask.count_ones() != 4 {
                continue;
            }
            let pick = |r: &[bool]| (0..6).filter(|i| mask >> i & 1 == 1).map(|i| r[i]).collect::<Vec<_>>();
            let t = ContingencyTable::from_rows(&pick(&a), &pick(&b));
            total += 1;
            sig += test.table_significant(&t) as usize;
        }
        assert_eq!(total, 15);
        let exact = sig as f64 / total as f64;
        let est = estimate_power(&p, 4, 20_000, 0.05, 11).unwrap().power;
        let sigma = (exact * (1.0 - exact) / 20_000.0).sqrt();
        assert!((est - exact).abs() <= 3.0 * sigma, "{est} vs {exact}");
    }

    #[test]
    fn curve_wraps_estimate() {
        let a: Vec<bool> = (0..40).map(|i| i % 2 == 0).collect();
        let b: Vec<bool> = (0..40).map(|i| i % 5 != 0).collect();
        let p = predictions(vec![a.clone(), b.clone()], vec![b, a]);
        let single = power_curve(&p, &[25], 300, 0.05, 3).unwrap();
        assert_eq!(single.points.len(), 1);
        assert_eq!(single.points[0].1, estimate_power(&p, 25, 300, 0.05, 3).unwrap());

        let zero = power_curve(&identical(40, 2), &[5, 10, 40], 100, 0.05, 3).unwrap();
        assert!(zero.points.iter().all(|(_, e)| e.power == 0.0));
        let one = power_curve(&disagreement(100, 2), &[10, 100], 100, 0.05, 3).unwrap();
        assert_eq!(one.points.iter().map(|(_, e)| e.power).collect::<Vec<_>>(), vec![1.0, 1.0]);
        assert!(power_curve(&p, &[], 10, 0.05, 0).is_err());
        assert!(one.to_csv().starts_with("test_size,power,num_sims,alpha\n10,1,200,0.05\n"));
    }

    #[test]
    fn power_independent_of_thread_count() {
        let a: Vec<bool> = (0..64).map(|i| i % 3 == 0).collect();
        let b: Vec<bool> = (0..64).map(|i| i % 4 != 1).collect();
        let p = predictions(vec![a.clone(), b.clone(), a.clone()], vec![b.clone(), a, b]);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| estimate_power(&p, 32, 500, 0.05, 99).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn suboptimality_examples() {
        let g = suboptimality_gap(&[0.9, 0.88, 0.91], Direction::HigherIsBetter).unwrap();
        assert_eq!(g.best, 0.91);
        for (got, want) in g.per_seed_gaps.iter().zip([0.01, 0.03, 0.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert_eq!(suboptimality_gap(&[0.7], Direction::HigherIsBetter).unwrap().per_seed_gaps, vec![0.0]);
        assert_eq!(
            suboptimality_gap(&[0.5, 0.5], Direction::HigherIsBetter).unwrap().per_seed_gaps,
            vec![0.0, 0.0]
        );
        let loss = suboptimality_gap(&[1.2, 1.0], Direction::LowerIsBetter).unwrap();
        assert_eq!(loss.best, 1.0);
        assert!(suboptimality_gap(&[], Direction::HigherIsBetter).is_err());
    }
}
