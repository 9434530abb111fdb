//! Online (prequential) codelength of labels given representations, for two
//! encoders of different quality, next to the uniform-code baseline. Also
//! shows the dataset CSV export used to hand data to other tools.

use probe_sizer::domain::ClassifierSpec;
use probe_sizer::lab::dataset::{generate_dataset, stratified_subsample, Split, SyntheticDatasetSpec};
use probe_sizer::lab::io::{read_dataset_csv, write_dataset_csv};
use probe_sizer::lab::mdl::prequential_mdl;
use probe_sizer::lab::train::TrainerConfig;

fn main() -> probe_sizer::Result<()> {
    let (k, dim, per_class) = (3, 8, 1024);
    for (label, separation) in [("sharp encoder", 2.0), ("blurry encoder", 0.6)] {
        let pool = generate_dataset(&SyntheticDatasetSpec {
            num_classes: k,
            dim,
            samples_per_class: 2 * per_class,
            class_separation: separation,
            noise_floor: 0.5,
            rng_seed: 17,
        })?;
        let ds = stratified_subsample(&pool, per_class, 4.0, 3)?;
        let cfg = TrainerConfig::compact(ClassifierSpec::logistic_regression(dim, k)?);
        let score = prequential_mdl(&ds, &cfg, 0.01, 1)?;
        let n = ds.indices(Split::Train).len();
        let uniform = n as f64 * (k as f64).log2();
        println!(
            "{label:<15} codelength {:>9.1} bits  uniform {uniform:>8.1}  compression {:.2}x",
            score.codelength,
            uniform / score.codelength
        );
    }

    let small = stratified_subsample(
        &generate_dataset(&SyntheticDatasetSpec {
            num_classes: 2,
            dim: 3,
            samples_per_class: 8,
            class_separation: 1.0,
            noise_floor: 0.5,
            rng_seed: 1,
        })?,
        4,
        4.0,
        0,
    )?;
    let mut csv = Vec::new();
    write_dataset_csv(&small, &mut csv)?;
    assert_eq!(read_dataset_csv(csv.as_slice(), Some(2))?, small);
    print!("{}", String::from_utf8_lossy(&csv));
    Ok(())
}
