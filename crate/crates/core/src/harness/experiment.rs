use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::dataset::{generate_dataset_for_run, run_seed};
use crate::error::{Error, Result};
use crate::estimation::CsiVector;
use crate::learning::{evaluate_accuracy, silhouette_score, svm_train, AccuracyReport, PcaModel};
use crate::profiles::{Family, ProfileName};

pub const REPORT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectedPoint {
    pub label: ProfileName,
    pub sample_id: u64,
    pub pc1: f64,
    pub pc2: f64,
}

/// Result of one (family, SNR, repetition) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub family: Family,
    pub snr_db: f64,
    pub run: usize,
    pub seed: u64,
    pub accuracy: AccuracyReport,
    /// Mean silhouette of all projected samples (train and test).
    pub silhouette: f64,
    pub pca_eigenvalues: [f64; 2],
    /// Test-set projections.
    pub projections: Vec<ProjectedPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub family: Family,
    pub snr_db: f64,
    pub runs: usize,
    pub mean_accuracy: f64,
    pub min_accuracy: f64,
    pub max_accuracy: f64,
    pub mean_silhouette: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub format_version: u32,
    pub generator: String,
    pub config: ExperimentConfig,
    pub cells: Vec<CellReport>,
    pub aggregates: Vec<Aggregate>,
}

impl ExperimentReport {
    pub fn aggregate(&self, family: Family, snr_db: f64) -> Option<&Aggregate> {
        self.aggregates
            .iter()
            .find(|a| a.family == family && a.snr_db == snr_db)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: ExperimentReport = serde_json::from_str(text)?;
        if report.format_version != REPORT_FORMAT_VERSION {
            return Err(Error::invalid(format!(
                "unsupported report format version {}",
                report.format_version
            )));
        }
        Ok(report)
    }
}

/// Splits each class into its first `train_per_class` samples (train) and
/// the rest (test). Samples within a class are i.i.d., so index order is an
/// unbiased split.
pub fn stratified_split(
    data: &[CsiVector],
    train_per_class: usize,
) -> (Vec<&CsiVector>, Vec<&CsiVector>) {
    let mut seen = std::collections::BTreeMap::<ProfileName, usize>::new();
    let mut train = Vec::new();
    let mut test = Vec::new();
    for s in data {
        let n = seen.entry(s.label).or_default();
        if *n < train_per_class {
            train.push(s);
        } else {
            test.push(s);
        }
        *n += 1;
    }
    (train, test)
}

fn run_cell(config: &ExperimentConfig, family: Family, snr_db: f64, run: usize) -> Result<CellReport> {
    let data = generate_dataset_for_run(config, family, snr_db, run)?;
    let (train, test) = stratified_split(&data, config.train_per_class());

    let train_rows: Vec<&[f64]> = train.iter().map(|s| s.features.as_slice()).collect();
    let pca = PcaModel::fit(&train_rows)?;
    let train_points = train
        .iter()
        .map(|s| pca.project(&s.features))
        .collect::<Result<Vec<_>>>()?;
    let train_labels: Vec<String> = train.iter().map(|s| s.label.to_string()).collect();
    let svm = svm_train(&train_points, &train_labels, &config.svm)?;

    let test_owned: Vec<CsiVector> = test.iter().map(|s| (*s).clone()).collect();
    let accuracy = evaluate_accuracy(&svm, &pca, &test_owned)?;

    let mut projections = Vec::with_capacity(test.len());
    for s in &test {
        let z = pca.project(&s.features)?;
        projections.push(ProjectedPoint {
            label: s.label,
            sample_id: s.sample_id,
            pc1: z[0],
            pc2: z[1],
        });
    }
    let all_points: Vec<[f64; 2]> = train_points
        .iter()
        .copied()
        .chain(projections.iter().map(|p| [p.pc1, p.pc2]))
        .collect();
    let all_labels: Vec<usize> = train
        .iter()
        .chain(test.iter())
        .map(|s| s.label.index())
        .collect();

    Ok(CellReport {
        family,
        snr_db,
        run,
        seed: run_seed(config.master_seed, run),
        accuracy,
        silhouette: silhouette_score(&all_points, &all_labels),
        pca_eigenvalues: pca.eigenvalues,
        projections,
    })
}

/// Runs every (family, SNR, repetition) cell and aggregates accuracy.
///
/// Cells run in parallel; each is a pure function of the config and its
/// derived seeds, so the report does not depend on scheduling.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let mut keys = Vec::new();
    for family in config.family.families() {
        for &snr in &config.snr_list_db {
            for run in 0..config.repetitions {
                keys.push((family, snr, run));
            }
        }
    }
    let cells = keys
        .par_iter()
        .map(|&(family, snr, run)| {
            run_cell(config, family, snr, run)
                .map_err(|e| e.context(format!("cell {family} @ {snr} dB, run {run}")))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut aggregates = Vec::new();
    for family in config.family.families() {
        for &snr in &config.snr_list_db {
            let sel: Vec<&CellReport> = cells
                .iter()
                .filter(|c| c.family == family && c.snr_db == snr)
                .collect();
            let acc: Vec<f64> = sel.iter().map(|c| c.accuracy.accuracy).collect();
            let n = acc.len() as f64;
            aggregates.push(Aggregate {
                family,
                snr_db: snr,
                runs: sel.len(),
                mean_accuracy: acc.iter().sum::<f64>() / n,
                min_accuracy: acc.iter().copied().fold(f64::INFINITY, f64::min),
                max_accuracy: acc.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                mean_silhouette: sel.iter().map(|c| c.silhouette).sum::<f64>() / n,
            });
        }
    }

    Ok(ExperimentReport {
        format_version: REPORT_FORMAT_VERSION,
        generator: concat!("commsense ", env!("CARGO_PKG_VERSION")).to_string(),
        config: config.clone(),
        cells,
        aggregates,
    })
}
