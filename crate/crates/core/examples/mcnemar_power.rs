//! Power of McNemar's test on a paired-prediction pool, as a function of the
//! test-set size drawn from it.

use probe_sizer::domain::PairedPredictions;
use probe_sizer::rng;
use probe_sizer::stats::{mcnemar_chi2, ContingencyTable, PowerSettings, ADEQUATE_POWER};
use rand::Rng;

/// Two classifiers with accuracies near `acc_a` and `acc_b`; B is right
/// wherever A is, plus extra items.
fn pool(items: usize, seeds: usize, acc_a: f64, acc_b: f64) -> probe_sizer::Result<PairedPredictions> {
    let mut a = Vec::new();
    let mut b = Vec::new();
    for s in 0..seeds {
        let mut r = rng::stream(99, &[s as u64]);
        let (mut ra, mut rb) = (Vec::new(), Vec::new());
        for _ in 0..items {
            let u: f64 = r.random();
            ra.push(u < acc_a);
            rb.push(u < acc_b);
        }
        a.push(ra);
        b.push(rb);
    }
    let ids = (0..items).map(|i| format!("item{i}")).collect();
    let seed_ids = (0..seeds).map(|s| s.to_string()).collect();
    PairedPredictions::new(ids, seed_ids, a, b)
}

fn main() -> probe_sizer::Result<()> {
    let t = ContingencyTable { n00: 40, n01: 15, n10: 5, n11: 40 };
    println!("chi2 for n01=15, n10=5: {}", mcnemar_chi2(&t));

    let settings = PowerSettings {
        num_sims_per_seed: 2000,
        rng_seed: 1,
        ..PowerSettings::default()
    };
    for (acc_a, acc_b) in [(0.80, 0.82), (0.80, 0.85), (0.80, 0.90)] {
        let pred = pool(4096, 3, acc_a, acc_b)?;
        let sizes: Vec<usize> = (4..=12).map(|e| 1 << e).collect();
        let curve = settings.curve(&pred, &sizes)?;
        let first = curve
            .smallest_adequate(ADEQUATE_POWER)
            .map_or_else(|| "none".to_string(), |n| n.to_string());
        let powers: Vec<String> = curve.points.iter().map(|(n, e)| format!("{n}:{:.2}", e.power)).collect();
        println!("{acc_a:.2} vs {acc_b:.2}  first adequate {first:>5}  {}", powers.join(" "));
    }
    Ok(())
}
