//! Repeated probe training on growing subsets: how often does each seed's
//! test accuracy land within the theoretical margin of the cross-seed mean?
//!
//! ```text
//! cargo run --release --example bound_coverage_study [--full] [out_dir]
//! ```

use probe_sizer::lab::report::write_report;
use probe_sizer::lab::study::{run_case_study, CaseStudyKind, CaseStudyParams};
use probe_sizer::lab::train::TrainerConfig;

fn main() -> probe_sizer::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let full = args.iter().any(|a| a == "--full");
    let mut params = CaseStudyParams {
        subset_sizes: (7..=15).map(|e| 1usize << e).collect(),
        ..CaseStudyParams::default()
    };
    if !full {
        params.trainer = TrainerConfig::compact(params.trainer.model);
    }

    let report = run_case_study(CaseStudyKind::BoundCheck, &params, 11)?;
    println!("{:>8} {:>8} {:>9} {:>8} {:>8} {:>7}", "subset", "N_train", "mean acc", "stdev", "margin", "within");
    for m in &report.margins {
        println!(
            "{:>8} {:>8} {:>9.4} {:>8.4} {:>8.4} {:>4}/{}",
            m.subset_per_class, m.n_train, m.mean_accuracy, m.stdev, m.theoretical_margin, m.seeds_within, m.num_seeds
        );
    }
    println!("coverage {}/{} = {:.3}", report.coverage.within, report.coverage.total, report.coverage.fraction());

    if let Some(dir) = args.iter().find(|a| !a.starts_with("--")) {
        write_report(&report, dir.as_ref(), true)?;
        println!("wrote {dir}");
    }
    Ok(())
}
