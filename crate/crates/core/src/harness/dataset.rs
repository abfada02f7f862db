//! End-to-end sample generation: realize, transmit pilots, add noise,
//! estimate, flatten.

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::config::{ChannelDraw, ExperimentConfig};
use crate::error::{Error, Result};
use crate::estimation::{
    build_feature_vector, channel_correlation, default_prior_variance, ls_estimate,
    mmse_estimate, mmse_estimate_correlated, CsiVector, EstimatorKind,
};
use crate::link::{add_awgn, apply_channel, generate_pilot_grid};
use crate::profiles::{bundled_profile, ChannelProfile, Family, ProfileName};
use crate::realization::{frequency_response_link, realize, ArrayConfig};
use crate::rng::derive_seed;

const TAG_RUN: u64 = 0x5255_4e;
const TAG_CHANNEL: u64 = 0x4348;
const TAG_PILOT: u64 = 0x5049;
const TAG_NOISE: u64 = 0x4e4f;

/// Seed of repetition `run`.
pub fn run_seed(master_seed: u64, run: usize) -> u64 {
    derive_seed(master_seed, &[TAG_RUN, run as u64])
}

fn family_key(family: Family) -> u64 {
    match family {
        Family::Tdl => 1,
        Family::Cdl => 2,
    }
}

/// Per-sample seeds, derived from (run seed, family, SNR, profile, index).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleSeeds {
    pub channel: u64,
    pub pilot: u64,
    pub noise: u64,
}

pub fn sample_seeds(
    config: &ExperimentConfig,
    run: usize,
    family: Family,
    snr_db: f64,
    profile: ProfileName,
    index: usize,
) -> SampleSeeds {
    let base = run_seed(config.master_seed, run);
    let fam = family_key(family);
    let snr = snr_db.to_bits();
    let prof = profile.index() as u64;
    let idx = index as u64;
    let channel = match config.channel_draw {
        ChannelDraw::PerClass => derive_seed(base, &[TAG_CHANNEL, fam, prof]),
        ChannelDraw::PerSample => derive_seed(base, &[TAG_CHANNEL, fam, snr, prof, idx]),
    };
    SampleSeeds {
        channel,
        pilot: derive_seed(base, &[TAG_PILOT, fam, snr, prof, idx]),
        noise: derive_seed(base, &[TAG_NOISE, fam, snr, prof, idx]),
    }
}

struct PreparedProfile {
    profile: ChannelProfile,
    array: ArrayConfig,
    correlation: Option<DMatrix<Complex64>>,
}

fn prepare(config: &ExperimentConfig, name: ProfileName) -> Result<PreparedProfile> {
    let profile = bundled_profile(name).scale_delays(config.delay_spread)?;
    // TDL models are single-antenna.
    let array = match name.family() {
        Family::Tdl => ArrayConfig::default(),
        Family::Cdl => config.array_config,
    };
    let correlation = match config.estimator {
        EstimatorKind::MatrixMmse => Some(channel_correlation(&profile, &config.grid())?),
        _ => None,
    };
    Ok(PreparedProfile {
        profile,
        array,
        correlation,
    })
}

fn generate_sample(
    config: &ExperimentConfig,
    prepared: &PreparedProfile,
    seeds: SampleSeeds,
    snr_db: f64,
    sample_id: u64,
) -> Result<CsiVector> {
    let grid = config.grid();
    let realization = realize(&prepared.profile, seeds.channel, &prepared.array)?;
    let mut estimate = Vec::with_capacity(grid.subcarrier_count * prepared.array.links());
    let mut link = 0u64;
    for rx in 0..prepared.array.rx_elements {
        for tx in 0..prepared.array.tx_elements {
            let response = frequency_response_link(&realization, &grid, rx, tx)?;
            let pilots = generate_pilot_grid(&grid, derive_seed(seeds.pilot, &[link]))?;
            let clean = apply_channel(&pilots, &response)?;
            let received = add_awgn(&clean, snr_db, derive_seed(seeds.noise, &[link]))?;
            let ls = ls_estimate(&pilots, &received)?;
            let est = match config.estimator {
                EstimatorKind::Ls => ls,
                EstimatorKind::ScalarMmse => {
                    let prior = default_prior_variance(&ls, received.noise_variance);
                    mmse_estimate(&ls, received.noise_variance, prior)?
                }
                EstimatorKind::MatrixMmse => mmse_estimate_correlated(
                    &ls,
                    received.noise_variance,
                    prepared.correlation.as_ref().expect("prepared for matrix MMSE"),
                )?,
            };
            estimate.extend(est);
            link += 1;
        }
    }
    build_feature_vector(&estimate, prepared.profile.name, snr_db, sample_id)
}

/// Dataset of the first repetition.
pub fn generate_dataset(
    config: &ExperimentConfig,
    family: Family,
    snr_db: f64,
) -> Result<Vec<CsiVector>> {
    generate_dataset_for_run(config, family, snr_db, 0)
}

/// `samples_per_class` labeled vectors for each profile of `family`,
/// grouped by profile in name order. Sample ids run consecutively.
pub fn generate_dataset_for_run(
    config: &ExperimentConfig,
    family: Family,
    snr_db: f64,
    run: usize,
) -> Result<Vec<CsiVector>> {
    config.validate()?;
    let profiles: Vec<PreparedProfile> = ProfileName::of_family(family)
        .map(|n| prepare(config, n))
        .collect::<Result<_>>()?;
    let per = config.samples_per_class;
    (0..profiles.len() * per)
        .into_par_iter()
        .map(|k| {
            let prepared = &profiles[k / per];
            let seeds = sample_seeds(config, run, family, snr_db, prepared.profile.name, k % per);
            generate_sample(config, prepared, seeds, snr_db, k as u64)
        })
        .collect()
}

/// Writes `sample_id, label, snr_db, f0_re, f0_im, ...` with a header row.
pub fn write_dataset_csv(path: &Path, samples: &[CsiVector]) -> Result<()> {
    let width = samples.first().map_or(0, |s| s.features.len() / 2);
    if let Some(bad) = samples.iter().find(|s| s.features.len() != 2 * width) {
        return Err(Error::invalid(format!(
            "sample {} has {} features, expected {}",
            bad.sample_id,
            bad.features.len(),
            2 * width
        )));
    }
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let mut header = vec!["sample_id".to_string(), "label".into(), "snr_db".into()];
    for k in 0..width {
        header.push(format!("f{k}_re"));
        header.push(format!("f{k}_im"));
    }
    writer.write_record(&header)?;
    for s in samples {
        let mut row = vec![s.sample_id.to_string(), s.label.to_string(), s.snr_db.to_string()];
        row.extend(s.features.iter().map(|x| x.to_string()));
        writer.write_record(&row)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Reads a dataset written by [`write_dataset_csv`].
pub fn read_dataset_csv(path: &Path) -> Result<Vec<CsiVector>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let field = |i: usize| record.get(i).unwrap_or("");
        let parse = |i: usize| -> Result<f64> {
            field(i)
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("bad number `{}` in {}", field(i), path.display())))
        };
        let sample_id = field(0)
            .parse::<u64>()
            .map_err(|_| Error::invalid(format!("bad sample id `{}`", field(0))))?;
        let features = (3..record.len()).map(parse).collect::<Result<Vec<_>>>()?;
        out.push(CsiVector {
            features,
            label: field(1).parse()?,
            snr_db: parse(2)?,
            sample_id,
        });
    }
    Ok(out)
}
