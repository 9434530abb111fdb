//! Turning pilot results into a data-collection plan: required training size,
//! then the full train/val/test budget.

use probe_sizer::domain::{ClassifierSpec, ComparisonProblem, PerformancePair, ProbingConfiguration};
use probe_sizer::sizer::{recommend, SizerSettings};

fn problem(a: ClassifierSpec, b: ClassifierSpec) -> probe_sizer::Result<ComparisonProblem> {
    ComparisonProblem::new(
        ProbingConfiguration::new("pos-tagging", "encoder-a", a)?,
        ProbingConfiguration::new("pos-tagging", "encoder-b", b)?,
    )
}

fn main() -> probe_sizer::Result<()> {
    let settings = SizerSettings::default();
    let pilots = [
        ("three seeds", vec![(0.91, 0.78), (0.90, 0.78), (0.92, 0.77)]),
        ("small gap", vec![(0.842, 0.829), (0.851, 0.836)]),
        ("tiny gap", vec![(0.700, 0.695)]),
    ];
    let problems = [
        ("768 vs 768 linear", problem(ClassifierSpec::logistic_regression(768, 2)?, ClassifierSpec::logistic_regression(768, 2)?)?),
        ("768 vs 4096 linear", problem(ClassifierSpec::logistic_regression(768, 2)?, ClassifierSpec::logistic_regression(4096, 2)?)?),
        ("linear vs MLP-100", problem(ClassifierSpec::logistic_regression(768, 2)?, ClassifierSpec::mlp(768, 100, 2)?)?),
    ];

    println!("{:<20} {:<12} {:>8} {:>12} {:>12}", "probes", "pilot", "gap", "N_train", "N_total");
    for (pname, problem) in &problems {
        for (label, pairs) in &pilots {
            let pilot = pairs
                .iter()
                .map(|&(a, b)| PerformancePair::accuracy(a, b))
                .collect::<probe_sizer::Result<Vec<_>>>()?;
            let rec = recommend(&pilot, problem, &settings, None)?;
            println!(
                "{pname:<20} {label:<12} {:>8.4} {:>12} {:>12}",
                rec.mean_gap, rec.n_train, rec.n_total
            );
        }
    }
    println!("split {}:1:1 (train:val:test)", settings.eta);
    Ok(())
}
