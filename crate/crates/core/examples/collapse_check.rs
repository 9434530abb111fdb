//! Screening a comparison for collapse: repeated small pilot studies, each
//! tested with McNemar's test, then a verdict from the significant fraction.

use probe_sizer::collapse::{detect_collapse, fold_plan, subsample_trials, CollapseThresholds};
use probe_sizer::domain::PairedPredictions;
use probe_sizer::rng;
use rand::Rng;

fn predictions(items: usize, acc_a: f64, acc_b: f64, seed: u64) -> probe_sizer::Result<PairedPredictions> {
    let mut r = rng::stream(seed, &[]);
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for _ in 0..items {
        a.push(r.random::<f64>() < acc_a);
        b.push(r.random::<f64>() < acc_b);
    }
    PairedPredictions::new((0..items).map(|i| i.to_string()).collect(), vec!["0".into()], vec![a], vec![b])
}

fn main() -> probe_sizer::Result<()> {
    println!("{}", fold_plan(6)?.to_table());

    let thresholds = CollapseThresholds::default();
    for (label, acc_a, acc_b) in [("same accuracy", 0.8, 0.8), ("gap 0.03", 0.8, 0.83), ("gap 0.15", 0.8, 0.95)] {
        let pred = predictions(2000, acc_a, acc_b, 4)?;
        let trials = subsample_trials(&pred, 1000, 20, 0.05, 7)?;
        let report = detect_collapse(&trials, &thresholds)?;
        println!(
            "{label:<14} {}/{} significant -> {:?}",
            report.num_significant, report.num_trials, report.verdict
        );
    }
    Ok(())
}
