//! Synthetic probing laboratory: representation datasets, probes, training,
//! description length and end-to-end case studies.

pub mod dataset;
pub mod io;
pub mod mdl;
pub mod model;
pub mod report;
pub mod study;
pub mod train;

pub use dataset::{generate_dataset, stratified_subsample, RepresentationDataset, Split, SyntheticDatasetSpec};
pub use mdl::{prequential_mdl, variational_mdl, MdlScore};
pub use model::{Activation, Probe};
pub use train::{train_probe, TrainedProbe, TrainerConfig};
pub use report::write_report;
pub use study::{comparison_predictions, run_case_study, CaseStudyKind, CaseStudyParams, CaseStudyReport};
