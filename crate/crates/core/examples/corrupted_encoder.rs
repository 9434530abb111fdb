//! An encoder and a degraded copy of it (class means pulled together, extra
//! noise): per-subset accuracies, power and collapse verdicts.

use probe_sizer::lab::study::{run_case_study, CaseStudyKind, CaseStudyParams};
use probe_sizer::lab::train::TrainerConfig;

fn main() -> probe_sizer::Result<()> {
    let mut params = CaseStudyParams {
        subset_sizes: vec![1 << 5, 1 << 7, 1 << 9, 1 << 11],
        ..CaseStudyParams::default()
    };
    params.trainer = TrainerConfig::compact(params.trainer.model);

    let report = run_case_study(CaseStudyKind::CorruptedEncoder, &params, 3)?;
    for m in &report.margins {
        println!("{:>6}/class {:<12} acc {:.4} ± {:.4}", m.subset_per_class, m.variant, m.mean_accuracy, m.stdev);
    }
    for row in &report.comparisons {
        println!(
            "{:>6}/class gap {:.4} power {:.3} at N_test {} -> {:?}",
            row.subset_per_class, row.mean_gap, row.power.power, row.n_test, row.collapse.verdict
        );
    }
    for (name, r) in report.final_verdicts() {
        println!("final {name}: {:?}", r.verdict);
    }
    Ok(())
}
