//! Linear probe against a 20-unit MLP on the same representations, with the
//! collapse screen and a training-size recommendation for each subset size.
//! Pass `--identical` to compare two independently trained linear probes.

use probe_sizer::lab::study::{run_case_study, CaseStudyKind, CaseStudyParams};
use probe_sizer::lab::train::TrainerConfig;

fn main() -> probe_sizer::Result<()> {
    let identical = std::env::args().any(|a| a == "--identical");
    let mut params = CaseStudyParams {
        identical,
        subset_sizes: vec![1 << 7, 1 << 9, 1 << 11],
        ..CaseStudyParams::default()
    };
    params.trainer = TrainerConfig::compact(params.trainer.model);

    let report = run_case_study(CaseStudyKind::ClassifierComparison, &params, 5)?;
    for note in &report.notes {
        println!("note: {note}");
    }
    println!(
        "{:>8} {:>8} {:>9} {:>7} {:>6} {:>14} {:>12}",
        "subset", "N_test", "mean gap", "power", "sig", "verdict", "recommended"
    );
    for row in &report.comparisons {
        let rec = match &row.recommendation {
            Some(r) if !r.collapse_warning => r.n_train.to_string(),
            _ => "-".to_string(),
        };
        println!(
            "{:>8} {:>8} {:>9.4} {:>7.3} {:>3}/{:<2} {:>14} {:>12}",
            row.subset_per_class,
            row.n_test,
            row.mean_gap,
            row.power.power,
            row.collapse.num_significant,
            row.collapse.num_trials,
            format!("{:?}", row.collapse.verdict),
            rec
        );
    }
    Ok(())
}
