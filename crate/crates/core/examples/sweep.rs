//! Prints the seed-averaged accuracy table for a config given on the command line.
//!
//! Run with: cargo run --release --example sweep -- [config.json]

use commsense::harness::{load_config, run_experiment, ConfigOverrides};

fn main() {
    let path = std::env::args().nth(1);
    let config = load_config(path.as_deref().map(std::path::Path::new), &ConfigOverrides::default())
        .expect("valid config");
    let start = std::time::Instant::now();
    let report = run_experiment(&config).expect("experiment runs");
    for a in &report.aggregates {
        println!(
            "{} {:>5} dB  mean {:.4}  min {:.4}  max {:.4}  silhouette {:.4}",
            a.family, a.snr_db, a.mean_accuracy, a.min_accuracy, a.max_accuracy, a.mean_silhouette
        );
    }
    println!("elapsed {:.1} s", start.elapsed().as_secs_f64());
}
