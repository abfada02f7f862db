//! Report export: JSON report plus CSV tables ready for external plotting.
//!
//! CSV layout under the output directory:
//! - `accuracy.csv`: one row per cell
//! - `summary.csv`: one row per (family, SNR) aggregate
//! - `confusion/<family>_<snr>dB_run<k>.csv`
//! - `scatter/<family>_<snr>dB_run<k>.csv`: `label, pc1, pc2, snr_db, family`

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::experiment::{CellReport, ExperimentReport};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            other => Err(Error::invalid(format!("unknown export format `{other}`"))),
        }
    }
}

impl ExportFormat {
    /// Parses a comma separated list such as `csv,json`.
    pub fn parse_list(list: &str) -> Result<Vec<ExportFormat>> {
        let formats = list
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>>>()?;
        if formats.is_empty() {
            return Err(Error::invalid("no export format given"));
        }
        Ok(formats)
    }
}

fn cell_stem(cell: &CellReport) -> String {
    format!("{}_{}dB_run{}", cell.family, cell.snr_db, cell.run)
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Writes the requested formats and returns the files produced.
pub fn export_results(
    report: &ExperimentReport,
    out_dir: &Path,
    formats: &[ExportFormat],
) -> Result<Vec<PathBuf>> {
    if report.cells.is_empty() {
        return Err(Error::invalid("report has no cells"));
    }
    create_dir(out_dir)?;
    let mut written = Vec::new();

    if formats.contains(&ExportFormat::Json) {
        let path = out_dir.join("report.json");
        fs::write(&path, report.to_json()?).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }

    if formats.contains(&ExportFormat::Csv) {
        let rows: Vec<Vec<String>> = report
            .cells
            .iter()
            .map(|c| {
                vec![
                    c.family.to_string(),
                    c.snr_db.to_string(),
                    c.run.to_string(),
                    c.seed.to_string(),
                    c.accuracy.accuracy.to_string(),
                    c.silhouette.to_string(),
                ]
            })
            .collect();
        let path = out_dir.join("accuracy.csv");
        write_csv(
            &path,
            &["family", "snr_db", "run", "seed", "accuracy", "silhouette"],
            &rows,
        )?;
        written.push(path);

        let rows: Vec<Vec<String>> = report
            .aggregates
            .iter()
            .map(|a| {
                vec![
                    a.family.to_string(),
                    a.snr_db.to_string(),
                    a.runs.to_string(),
                    a.mean_accuracy.to_string(),
                    a.min_accuracy.to_string(),
                    a.max_accuracy.to_string(),
                    a.mean_silhouette.to_string(),
                ]
            })
            .collect();
        let path = out_dir.join("summary.csv");
        write_csv(
            &path,
            &[
                "family",
                "snr_db",
                "runs",
                "mean_accuracy",
                "min_accuracy",
                "max_accuracy",
                "mean_silhouette",
            ],
            &rows,
        )?;
        written.push(path);

        let confusion_dir = out_dir.join("confusion");
        let scatter_dir = out_dir.join("scatter");
        create_dir(&confusion_dir)?;
        create_dir(&scatter_dir)?;
        for cell in &report.cells {
            let classes = &cell.accuracy.classes;
            let mut header = vec!["true\\predicted"];
            header.extend(classes.iter().map(String::as_str));
            let rows: Vec<Vec<String>> = classes
                .iter()
                .zip(&cell.accuracy.confusion)
                .map(|(name, counts)| {
                    std::iter::once(name.clone())
                        .chain(counts.iter().map(u64::to_string))
                        .collect()
                })
                .collect();
            let path = confusion_dir.join(format!("{}.csv", cell_stem(cell)));
            write_csv(&path, &header, &rows)?;
            written.push(path);

            let rows: Vec<Vec<String>> = cell
                .projections
                .iter()
                .map(|p| {
                    vec![
                        p.label.to_string(),
                        p.pc1.to_string(),
                        p.pc2.to_string(),
                        cell.snr_db.to_string(),
                        cell.family.to_string(),
                    ]
                })
                .collect();
            let path = scatter_dir.join(format!("{}.csv", cell_stem(cell)));
            write_csv(&path, &["label", "pc1", "pc2", "snr_db", "family"], &rows)?;
            written.push(path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{ExperimentConfig, FamilySelection};
    use crate::harness::experiment::run_experiment;

    fn small_report() -> ExperimentReport {
        run_experiment(&ExperimentConfig {
            family: FamilySelection::Cdl,
            subcarrier_count: 64,
            samples_per_class: 8,
            snr_list_db: vec![0.0, 20.0],
            repetitions: 2,
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn csv_and_json_outputs() {
        let report = small_report();
        let dir = tempfile::tempdir().unwrap();
        let files = export_results(&report, dir.path(), &[ExportFormat::Csv, ExportFormat::Json]).unwrap();
        // accuracy + summary + json + 4 cells x (confusion + scatter)
        assert_eq!(files.len(), 11);

        let scatter = fs::read_to_string(dir.path().join("scatter/cdl_20dB_run1.csv")).unwrap();
        let mut lines = scatter.lines();
        assert_eq!(lines.next().unwrap(), "label,pc1,pc2,snr_db,family");
        let rows: Vec<_> = lines.collect();
        assert_eq!(rows.len(), report.cells[0].projections.len());
        assert!(rows.iter().all(|r| r.ends_with(",20,cdl")));

        let json = fs::read_to_string(dir.path().join("report.json")).unwrap();
        assert_eq!(ExperimentReport::from_json(&json).unwrap(), report);
    }

    #[test]
    fn re_export_is_byte_identical() {
        let report = small_report();
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let fa = export_results(&report, a.path(), &[ExportFormat::Csv, ExportFormat::Json]).unwrap();
        export_results(&report, b.path(), &[ExportFormat::Csv, ExportFormat::Json]).unwrap();
        for f in fa {
            let rel = f.strip_prefix(a.path()).unwrap();
            assert_eq!(fs::read(&f).unwrap(), fs::read(b.path().join(rel)).unwrap(), "{rel:?}");
        }
    }

    #[test]
    fn format_parsing() {
        assert_eq!(
            ExportFormat::parse_list("csv,json").unwrap(),
            vec![ExportFormat::Csv, ExportFormat::Json]
        );
        assert!(ExportFormat::parse_list("csv,png").is_err());
        assert!(ExportFormat::parse_list("").is_err());
    }
}
