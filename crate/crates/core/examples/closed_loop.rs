//! The full planning loop on synthetic encoders: a small pilot, a size
//! recommendation, then a rerun at that size to confirm the comparison has
//! enough power.

use probe_sizer::domain::{ClassifierSpec, ComparisonProblem, ProbingConfiguration};
use probe_sizer::lab::study::{comparison_predictions, CaseStudyKind, CaseStudyParams, EncoderParams};
use probe_sizer::lab::train::TrainerConfig;
use probe_sizer::sizer::recommend;
use probe_sizer::stats::{PowerSettings, ADEQUATE_POWER};

const CAP: u64 = 1 << 16;

fn params(per_class: usize) -> CaseStudyParams {
    let mut p = CaseStudyParams {
        encoder: EncoderParams { dim: 8, class_separation: 0.987, noise_floor: 0.3 },
        encoder_b: EncoderParams { dim: 12, class_separation: 0.622, noise_floor: 0.3 },
        subset_sizes: vec![per_class],
        ..CaseStudyParams::default()
    };
    p.trainer = TrainerConfig::compact(p.trainer.model);
    p
}

fn main() -> probe_sizer::Result<()> {
    let pilot = comparison_predictions(CaseStudyKind::EncoderComparison, &params(128), 21)?;
    let pilot = &pilot[0].predictions;
    let problem = ComparisonProblem::new(
        ProbingConfiguration::new("synthetic", "encoder-a", ClassifierSpec::logistic_regression(8, 2)?)?,
        ProbingConfiguration::new("synthetic", "encoder-b", ClassifierSpec::logistic_regression(12, 2)?)?,
    )?;
    let rec = recommend(&pilot.accuracy_pairs(), &problem, &Default::default(), None)?;
    println!(
        "pilot: {} test items, gap {:.4} -> N_train {} (N_total {})",
        pilot.num_items(),
        rec.mean_gap,
        rec.n_train,
        rec.n_total
    );

    let n_train = rec.n_train.min(CAP) as usize;
    let full = comparison_predictions(CaseStudyKind::EncoderComparison, &params(n_train.div_ceil(2)), 22)?;
    let full = &full[0].predictions;
    let power = PowerSettings::default().estimate(full, full.num_items())?;
    println!(
        "rerun at N_train {n_train}: N_test {}, power {:.3} ({})",
        full.num_items(),
        power.power,
        if power.power >= ADEQUATE_POWER { "adequate" } else { "underpowered" }
    );
    Ok(())
}
