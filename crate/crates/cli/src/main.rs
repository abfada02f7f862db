//! `commsense` command-line front end.
//!
//! Exit codes: 0 success, 1 configuration error, 2 runtime error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use commsense::harness::{
    export_results, generate_dataset_for_run, load_config, run_experiment, write_dataset_csv,
    ConfigOverrides, ExperimentReport, ExportFormat, FamilySelection,
};
use commsense::profiles::Family;
use commsense::Error;

#[derive(Parser)]
#[command(name = "commsense", version, about = "5G NR channel-sensing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate labeled CSI datasets, one CSV per SNR.
    Generate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        family: Family,
        /// Comma separated SNR list in dB.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        snr_db: Option<Vec<f64>>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the family x SNR x seed sweep and write the report plus CSV tables.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        family: Option<FamilySelection>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        snr_db: Option<Vec<f64>>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        samples_per_class: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-export a saved report.
    Export {
        #[arg(long)]
        report: PathBuf,
        /// Comma separated list of csv, json.
        #[arg(long, default_value = "csv,json")]
        format: String,
        /// Defaults to the directory holding the report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config() {
            Failure::Config(e.into())
        } else {
            Failure::Runtime(e.into())
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn generate(
    config: Option<&Path>,
    family: Family,
    snr_db: Option<Vec<f64>>,
    seed: Option<u64>,
    out: &Path,
) -> Result<(), Failure> {
    let overrides = ConfigOverrides {
        snr_list_db: snr_db,
        master_seed: seed,
        ..Default::default()
    };
    let config = load_config(config, &overrides)?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    for &snr in &config.snr_list_db {
        let data = generate_dataset_for_run(&config, family, snr, 0)?;
        let path = out.join(format!("dataset_{family}_{snr}dB.csv"));
        write_dataset_csv(&path, &data)?;
        println!("{}: {} samples", path.display(), data.len());
    }
    Ok(())
}

fn run(config: Option<&Path>, overrides: ConfigOverrides, out: &Path) -> Result<(), Failure> {
    let config = load_config(config, &overrides)?;
    let report = run_experiment(&config)?;
    export_results(&report, out, &[ExportFormat::Json, ExportFormat::Csv])?;
    println!("family  snr_db  runs  mean_acc  min_acc  max_acc  silhouette");
    for a in &report.aggregates {
        println!(
            "{:<7} {:>6}  {:>4}  {:>8.4}  {:>7.4}  {:>7.4}  {:>10.4}",
            a.family, a.snr_db, a.runs, a.mean_accuracy, a.min_accuracy, a.max_accuracy, a.mean_silhouette
        );
    }
    println!("wrote {}", out.join("report.json").display());
    Ok(())
}

fn export(report: &Path, format: &str, out: Option<&Path>) -> Result<(), Failure> {
    let formats = ExportFormat::parse_list(format).map_err(|e| Failure::Config(e.into()))?;
    let text = std::fs::read_to_string(report)
        .with_context(|| format!("reading {}", report.display()))?;
    let parsed = ExperimentReport::from_json(&text)?;
    let out = match out {
        Some(o) => o.to_path_buf(),
        None => report
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from(".")),
    };
    for path in export_results(&parsed, &out, &formats)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate {
            config,
            family,
            snr_db,
            seed,
            out,
        } => generate(config.as_deref(), family, snr_db, seed, &out),
        Command::Run {
            config,
            family,
            snr_db,
            seed,
            reps,
            samples_per_class,
            out,
        } => run(
            config.as_deref(),
            ConfigOverrides {
                family,
                snr_list_db: snr_db,
                master_seed: seed,
                repetitions: reps,
                samples_per_class,
            },
            &out,
        ),
        Command::Export {
            report,
            format,
            out,
        } => export(&report, &format, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
