//! Sample-size planning and power auditing for paired probing-classifier
//! comparisons.
//!
//! The crate covers the whole workflow for deciding how much data a probing
//! comparison needs:
//!
//! - [`bounds`] evaluates the finite-function-class generalization bound
//!   and its control-task and description-length adapters.
//! - [`sizer`] inverts the bound at half the pilot gap to recommend a
//!   training-set size and total collection size.
//! - [`stats`] runs McNemar's test and estimates power by simulation.
//! - [`collapse`] flags comparisons whose configurations are
//!   indistinguishable.
//! - [`lab`] replays case studies end to end on synthetic representations
//!   with small from-scratch probes and MDL scoring.
//! - [`cli`] ties them together behind the `probe-sizer` binary.

pub mod bounds;
pub mod cli;
pub mod collapse;
pub mod domain;
pub mod error;
pub mod lab;
pub mod rng;
pub mod sizer;
pub mod stats;

pub use error::{Error, Result};
