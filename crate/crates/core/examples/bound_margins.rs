//! Generalization margins for a 4096-dimensional linear probe as the training
//! set grows, under each bound adapter.

use probe_sizer::bounds::{BoundAdapter, BoundQuery, FunctionClassSpec, DEFAULT_DELTA};
use probe_sizer::domain::ClassifierSpec;

fn main() -> probe_sizer::Result<()> {
    let probe = ClassifierSpec::logistic_regression(4096, 2)?;
    let class_spec = FunctionClassSpec::from_classifier(&probe, 32)?;
    let adapters = [
        ("plain", BoundAdapter::Plain),
        ("control", BoundAdapter::ControlTask { control_delta: None }),
        ("variational", BoundAdapter::VariationalMdl),
        ("prequential", BoundAdapter::Prequential { c: 1.0, t1_fraction: 0.001 }),
    ];

    println!("P = {} parameters, delta = {DEFAULT_DELTA:e}", class_spec.param_count);
    print!("{:>10}", "n");
    for (name, _) in &adapters {
        print!("  {name:>12}");
    }
    println!();
    for exp in [10, 12, 14, 16, 18, 20] {
        let n = 1u64 << exp;
        print!("{n:>10}");
        for (_, adapter) in adapters {
            let r = BoundQuery {
                n,
                delta: DEFAULT_DELTA,
                metric_range: 1.0,
                class_spec,
                adapter,
            }
            .evaluate()?;
            let mark = if r.loose { "*" } else { " " };
            print!("  {:>11.4}{mark}", r.margin);
        }
        println!();
    }
    println!("* loose: the margin is a coarse upper bound");
    Ok(())
}
