//! Training-set size recommendations obtained by inverting the
//! finite-class bound at half the observed pilot gap.

use serde::{Deserialize, Serialize};

use crate::bounds::{self, finite_class_margin, FunctionClassSpec};
use crate::collapse::{CollapseReport, Verdict};
use crate::domain::{mean_gap_with, ComparisonProblem, GapMode, PerformancePair, SplitSpec};
use crate::error::{domain, Error, Result};

/// Smallest `n` with `finite_class_margin(n) <= epsilon`.
pub fn required_train_size(
    epsilon: f64,
    delta: f64,
    range: f64,
    class_spec: &FunctionClassSpec,
) -> Result<u64> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(domain("epsilon", "must be positive"));
    }
    if epsilon > range {
        return Err(Error::GapExceedsRange { epsilon, range });
    }
    // Validates delta and range.
    finite_class_margin(1, delta, range, class_spec)?;

    let closed = bounds::complexity_term(delta, class_spec) * range * range / (epsilon * epsilon);
    let mut n = (closed.ceil() as u64).max(1);
    // The closed form can land one off when `closed` sits within an ulp of an
    // integer; settle against the forward evaluation.
    let margin = |k: u64| finite_class_margin(k, delta, range, class_spec);
    while n > 1 && margin(n - 1)? <= epsilon {
        n -= 1;
    }
    while margin(n)? > epsilon {
        n += 1;
    }
    Ok(n)
}

/// `ceil((1 + 2/η) · n_train)`.
pub fn total_size(n_train: u64, eta: f64) -> Result<u64> {
    if n_train == 0 {
        return Err(domain("n_train", "must be at least 1"));
    }
    let split = SplitSpec::new(eta)?;
    // n + ceil(2n/η) equals the ceiling above and keeps the integer part exact.
    Ok(n_train + (2.0 * n_train as f64 / split.eta()).ceil() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizerSettings {
    pub delta: f64,
    pub eta: f64,
    pub bits_per_param: u32,
    pub metric_range: f64,
    pub gap_mode: GapMode,
}

impl Default for SizerSettings {
    fn default() -> Self {
        Self {
            delta: bounds::DEFAULT_DELTA,
            eta: SplitSpec::DEFAULT_ETA,
            bits_per_param: bounds::DEFAULT_BITS_PER_PARAM,
            metric_range: 1.0,
            gap_mode: GapMode::MeanOfGaps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub mean_gap: f64,
    pub epsilon: f64,
    pub n_train: u64,
    pub n_total: u64,
    pub eta: SplitSpec,
    pub class_spec_used: FunctionClassSpec,
    /// Per-configuration requirements; `n_train` is the larger of the two.
    pub n_train_a: u64,
    pub n_train_b: u64,
    /// Set when collapse detection flagged the comparison; the numbers are
    /// then not meaningful.
    pub collapse_warning: bool,
}

/// Recommends `N_train` and the total collection size for a comparison.
///
/// The target margin is half the pilot gap. Each configuration is sized
/// against its own function class and the larger requirement wins.
pub fn recommend(
    pilot: &[PerformancePair],
    problem: &ComparisonProblem,
    settings: &SizerSettings,
    collapse_report: Option<&CollapseReport>,
) -> Result<Recommendation> {
    let gap = mean_gap_with(pilot, settings.gap_mode)?;
    if gap == 0.0 {
        return Err(Error::CollapsedComparison);
    }
    let epsilon = gap / 2.0;
    let spec_a =
        FunctionClassSpec::from_classifier(problem.config_a().classifier(), settings.bits_per_param)?;
    let spec_b =
        FunctionClassSpec::from_classifier(problem.config_b().classifier(), settings.bits_per_param)?;
    let n_a = required_train_size(epsilon, settings.delta, settings.metric_range, &spec_a)?;
    let n_b = required_train_size(epsilon, settings.delta, settings.metric_range, &spec_b)?;
    let (n_train, class_spec_used) =
        if (n_b, spec_b.param_count, spec_b.bits_per_param) > (n_a, spec_a.param_count, spec_a.bits_per_param) {
            (n_b, spec_b)
        } else {
            (n_a, spec_a)
        };
    Ok(Recommendation {
        mean_gap: gap,
        epsilon,
        n_train,
        n_total: total_size(n_train, settings.eta)?,
        eta: SplitSpec::new(settings.eta)?,
        class_spec_used,
        n_train_a: n_a,
        n_train_b: n_b,
        collapse_warning: collapse_report.is_some_and(|r| r.verdict == Verdict::Collapsed),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{ClassifierSpec, ProbingConfiguration};
    use proptest::prelude::*;

    fn spec(p: u64) -> FunctionClassSpec {
        FunctionClassSpec::new(p, 32).unwrap()
    }

    fn problem(a: ClassifierSpec, b: ClassifierSpec) -> ComparisonProblem {
        ComparisonProblem::new(
            ProbingConfiguration::new("task", "enc-a", a).unwrap(),
            ProbingConfiguration::new("task", "enc-b", b).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn forty_thousand_example() {
        // ceil(99.2250959599548635 / 0.0025) = ceil(39690.038...) = 39691
        let n = required_train_size(0.05, 1e-8, 1.0, &spec(4097)).unwrap();
        assert_eq!(n, 39_691);
    }

    #[test]
    fn first_corrupted_encoder_row() {
        // ceil(95.8792573438724 / (0.1313/2)^2) = ceil(22246.17) = 22247
        let n = required_train_size(0.1313 / 2.0, 1e-8, 1.0, &spec(769)).unwrap();
        assert_eq!(n, 22_247);
        assert!((n as f64 / 22_263.0 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn epsilon_validation() {
        assert!(required_train_size(0.0, 1e-8, 1.0, &spec(769)).is_err());
        let err = required_train_size(1.5, 1e-8, 1.0, &spec(769)).unwrap_err();
        assert!(err.to_string().starts_with("comparison gap exceeds metric range"));
    }

    #[test]
    fn total_size_examples() {
        assert_eq!(total_size(22_263, 4.0).unwrap(), 33_395);
        assert_eq!(total_size(100, 2.0).unwrap(), 200);
        assert_eq!(total_size(1000, 1000.0).unwrap(), 1002);
        assert!(total_size(100, 0.0).is_err());
        assert!(total_size(100, -1.0).is_err());
    }

    #[test]
    fn recommend_uses_larger_spec() {
        let bert = ClassifierSpec::logistic_regression(768, 2).unwrap();
        let glove = ClassifierSpec::logistic_regression(300, 2).unwrap();
        let pilot = [PerformancePair::accuracy(0.8344, 0.8).unwrap()];
        let r = recommend(&pilot, &problem(bert, glove), &SizerSettings::default(), None).unwrap();
        assert_eq!(r.class_spec_used.param_count, 769);
        // ceil(95.8792573438724 / 0.0172^2) = ceil(324091.59) = 324092
        assert_eq!(r.n_train, 324_092);
        assert!(r.n_train_b < r.n_train_a);
        assert!((r.n_train as f64 / 324_563.0 - 1.0).abs() < 2e-3);
    }

    #[test]
    fn recommend_table_row_two() {
        let s = ClassifierSpec::logistic_regression(768, 2).unwrap();
        let pilot = [PerformancePair::accuracy(0.9, 0.9 - 0.1281).unwrap()];
        let r = recommend(&pilot, &problem(s, s), &SizerSettings::default(), None).unwrap();
        assert_eq!(r.n_train, 23_372);
        assert_eq!(r.n_total, 23_372 + 11_686);
    }

    #[test]
    fn zero_gap_is_collapsed() {
        let s = ClassifierSpec::logistic_regression(768, 2).unwrap();
        let pilot = [PerformancePair::accuracy(0.7, 0.7).unwrap()];
        let err = recommend(&pilot, &problem(s, s), &SizerSettings::default(), None).unwrap_err();
        assert!(matches!(err, Error::CollapsedComparison));
        assert!(err.to_string().starts_with("collapsed comparison"));
    }

    #[test]
    fn collapse_report_sets_warning() {
        let s = ClassifierSpec::logistic_regression(16, 2).unwrap();
        let pilot = [PerformancePair::accuracy(0.7, 0.69).unwrap()];
        let report = crate::collapse::detect_collapse(
            &[false; 10],
            &crate::collapse::CollapseThresholds::default(),
        )
        .unwrap();
        let r = recommend(&pilot, &problem(s, s), &SizerSettings::default(), Some(&report)).unwrap();
        assert!(r.collapse_warning);
    }

    proptest! {
        #[test]
        fn inversion_round_trip(eps in 0.001f64..1.0, p in 1u64..100_000, delta in 1e-10f64..0.5) {
            let s = spec(p);
            let n = required_train_size(eps, delta, 1.0, &s).unwrap();
            prop_assert!(finite_class_margin(n, delta, 1.0, &s).unwrap() <= eps);
            if n > 1 {
                prop_assert!(finite_class_margin(n - 1, delta, 1.0, &s).unwrap() > eps);
            }
        }

        #[test]
        fn halving_epsilon_quadruples(eps in 0.002f64..1.0, p in 1u64..100_000) {
            let s = spec(p);
            let n = required_train_size(eps, 1e-8, 1.0, &s).unwrap();
            let n2 = required_train_size(eps / 2.0, 1e-8, 1.0, &s).unwrap();
            prop_assert!(n2 <= 4 * n && n2 + 3 >= 4 * n, "n={} n2={}", n, n2);
        }

        #[test]
        fn total_exceeds_train(n in 1u64..10_000_000, eta in 0.01f64..1e6) {
            prop_assert!(total_size(n, eta).unwrap() > n);
        }

        #[test]
        fn recommend_swap_invariant(r1 in 0.0f64..=1.0, r2 in 0.0f64..=1.0, d1 in 1usize..5000, d2 in 1usize..5000) {
            prop_assume!((r1 - r2).abs() > 1e-3);
            let a = ClassifierSpec::logistic_regression(d1, 2).unwrap();
            let b = ClassifierSpec::mlp(d2, 20, 2).unwrap();
            let p = problem(a, b);
            let fwd = recommend(&[PerformancePair::accuracy(r1, r2).unwrap()], &p, &SizerSettings::default(), None).unwrap();
            let rev = recommend(&[PerformancePair::accuracy(r2, r1).unwrap()], &p.swapped(), &SizerSettings::default(), None).unwrap();
            prop_assert_eq!(fwd.n_train, rev.n_train);
            prop_assert_eq!(fwd.n_total, rev.n_total);
            prop_assert_eq!(fwd.class_spec_used, rev.class_spec_used);
        }
    }
}
