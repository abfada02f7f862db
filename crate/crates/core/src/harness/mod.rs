//! Experiment orchestration: configuration, dataset generation, the
//! family x SNR x seed sweep and result export.

pub mod config;
pub mod dataset;
pub mod experiment;
pub mod export;

pub use config::{load_config, ChannelDraw, ConfigOverrides, ExperimentConfig, FamilySelection};
pub use dataset::{generate_dataset, generate_dataset_for_run, write_dataset_csv};
pub use experiment::{run_experiment, Aggregate, CellReport, ExperimentReport, ProjectedPoint};
pub use export::{export_results, ExportFormat};
