//! Original representations against noisy copies: how much test data each
//! noise scale needs before McNemar's test reliably separates them.
//!
//! ```text
//! cargo run --release --example gaussian_noise_study [out_dir]
//! ```

use std::time::Instant;

use probe_sizer::lab::report::write_report;
use probe_sizer::lab::study::{run_case_study, CaseStudyKind, CaseStudyParams};
use probe_sizer::lab::train::TrainerConfig;
use probe_sizer::stats::ADEQUATE_POWER;

fn main() -> probe_sizer::Result<()> {
    let mut params = CaseStudyParams::default();
    params.trainer = TrainerConfig::compact(params.trainer.model);

    let start = Instant::now();
    let report = run_case_study(CaseStudyKind::GaussianNoise, &params, 7)?;
    println!("trained {} probes in {:.1?}", report.accuracies.len(), start.elapsed());

    println!("{:>10}  {:>11}  power by N_test", "sigma2", "first >= 0.8");
    for named in &report.power_curves {
        let first = named
            .curve
            .smallest_adequate(ADEQUATE_POWER)
            .map_or_else(|| "-".to_string(), |n| n.to_string());
        let powers: Vec<String> = named
            .curve
            .points
            .iter()
            .map(|(n, e)| format!("{n}:{:.3}", e.power))
            .collect();
        println!("{:>10}  {first:>11}  {}", named.comparison, powers.join(" "));
    }

    if let Some(dir) = std::env::args().nth(1) {
        write_report(&report, dir.as_ref(), true)?;
        println!("wrote {dir}");
    }
    Ok(())
}
