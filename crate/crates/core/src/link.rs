//! Pilot symbol transmission over a frequency-flat-per-subcarrier channel.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SubcarrierGrid;
use crate::realization::ChannelFrequencyResponse;
use crate::rng::{complex_gaussian, stream};

/// One full OFDM symbol of QPSK pilots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PilotGrid {
    pub symbols: Vec<Complex64>,
    pub grid: SubcarrierGrid,
}

impl PilotGrid {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReceivedGrid {
    pub symbols: Vec<Complex64>,
    /// Per-subcarrier noise power; zero for a noiseless grid.
    pub noise_variance: f64,
    /// `None` until noise has been added.
    pub snr_db: Option<f64>,
}

impl ReceivedGrid {
    pub fn mean_power(&self) -> f64 {
        self.symbols.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.symbols.len() as f64
    }
}

pub fn generate_pilot_grid(grid: &SubcarrierGrid, seed: u64) -> Result<PilotGrid> {
    grid.validate()?;
    let mut rng = stream(seed);
    let symbols = (0..grid.subcarrier_count)
        .map(|_| {
            let bits: u8 = rng.gen_range(0..4);
            let re = if bits & 1 == 0 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
            let im = if bits & 2 == 0 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
            Complex64::new(re, im)
        })
        .collect();
    Ok(PilotGrid {
        symbols,
        grid: *grid,
    })
}

/// Noiseless reception: `y[k] = H[k] x[k]`.
pub fn apply_channel(pilots: &PilotGrid, response: &ChannelFrequencyResponse) -> Result<ReceivedGrid> {
    if pilots.len() != response.len() {
        return Err(Error::LengthMismatch {
            expected: pilots.len(),
            found: response.len(),
        });
    }
    Ok(ReceivedGrid {
        symbols: pilots
            .symbols
            .iter()
            .zip(&response.values)
            .map(|(x, h)| h * x)
            .collect(),
        noise_variance: 0.0,
        snr_db: None,
    })
}

/// Adds complex AWGN at `snr_db` relative to the mean received symbol power.
pub fn add_awgn(received: &ReceivedGrid, snr_db: f64, seed: u64) -> Result<ReceivedGrid> {
    if received.symbols.is_empty() {
        return Err(Error::invalid("cannot add noise to an empty grid"));
    }
    if !snr_db.is_finite() {
        return Err(Error::invalid(format!("SNR must be finite, got {snr_db}")));
    }
    let signal_power = received.mean_power();
    if !(signal_power > 0.0) {
        return Err(Error::invalid(
            "received signal is all zero; SNR is undefined",
        ));
    }
    let noise_variance = signal_power / 10f64.powf(snr_db / 10.0);
    let mut rng = stream(seed);
    let symbols = received
        .symbols
        .iter()
        .map(|y| y + complex_gaussian(&mut rng, noise_variance))
        .collect();
    Ok(ReceivedGrid {
        symbols,
        noise_variance: received.noise_variance + noise_variance,
        snr_db: Some(snr_db),
    })
}
