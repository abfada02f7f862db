//! Channel-sensing simulator for 5G NR link-level channel models.
//!
//! The pipeline draws TDL/CDL channel realizations, sends a QPSK pilot
//! symbol through them, adds calibrated AWGN, estimates the channel with
//! LS/MMSE estimators and classifies the resulting CSI with PCA followed
//! by a one-vs-one SVM.
//!
//! ```no_run
//! use commsense::harness::{run_experiment, ExperimentConfig};
//!
//! let report = run_experiment(&ExperimentConfig::default()).unwrap();
//! for agg in &report.aggregates {
//!     println!("{} {} dB: {:.3}", agg.family, agg.snr_db, agg.mean_accuracy);
//! }
//! ```

pub mod error;
pub mod estimation;
pub mod grid;
pub mod harness;
pub mod learning;
pub mod link;
pub mod profiles;
pub mod realization;
pub mod rng;

pub use error::{Error, Result};
