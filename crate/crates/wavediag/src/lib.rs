//! Fault diagnosis for transient multichannel signals.
//!
//! The pipeline: Pearson-correlation feature selection over raw channels,
//! 3-level orthonormal Haar compression (8x), min-max normalization to
//! [-1, 1], a tansig/purelin feedforward network regressing class codes,
//! a rounding decision rule, and a 20-decision windowed verdict protocol
//! for streaming diagnosis. A KNN baseline is included for comparison.
//!
//! Start from the `examples/` directory: each example is a runnable
//! walkthrough of one capability. The `wavediag` binary exposes the same
//! pipeline as subcommands (`synth`, `features`, `compress`, `train`,
//! `eval`, `stream`, `inspect-model`).

pub mod config;
pub mod correlation;
pub mod diagnose;
pub mod dfn;
pub mod error;
pub mod fmt;
pub mod knn;
pub mod pipeline;
pub mod preprocess;
pub mod signal;
pub mod synth;
pub mod wavelet;

pub use error::{Error, Result};
pub use signal::{ClassLabel, LabeledPointSet, Recording};
