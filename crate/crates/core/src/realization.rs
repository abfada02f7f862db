//! Stochastic channel realizations and their frequency responses.
//!
//! A realization is a static snapshot: one complex coefficient per tap (or
//! per cluster and antenna pair) at the scaled profile delays. It is a pure
//! function of the profile, the seed and the antenna configuration.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SubcarrierGrid;
use crate::profiles::{ChannelProfile, Entries, Fading, Family, ProfileName, RAYS_PER_CLUSTER};
use crate::rng::{complex_gaussian, stream};

/// Ray offset angles of a 20-ray cluster, in units of the cluster RMS
/// angular spread (TR 38.901 Table 7.5-3).
pub const RAY_OFFSETS: [f64; RAYS_PER_CLUSTER] = [
    0.0447, -0.0447, 0.1413, -0.1413, 0.2492, -0.2492, 0.3715, -0.3715, 0.5129, -0.5129, 0.6797,
    -0.6797, 0.8844, -0.8844, 1.1481, -1.1481, 1.5195, -1.5195, 2.1551, -2.1551,
];

/// Uniform linear arrays with half-wavelength spacing at both link ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayConfig {
    pub tx_elements: usize,
    pub rx_elements: usize,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        ArrayConfig {
            tx_elements: 1,
            rx_elements: 1,
        }
    }
}

impl ArrayConfig {
    pub fn links(&self) -> usize {
        self.tx_elements * self.rx_elements
    }

    pub fn is_siso(&self) -> bool {
        self.links() == 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.tx_elements < 1 || self.rx_elements < 1 {
            return Err(Error::invalid(format!(
                "antenna arrays need at least one element, got {}x{}",
                self.rx_elements, self.tx_elements
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tap {
    /// Seconds.
    pub delay: f64,
    /// One coefficient per antenna pair, indexed `rx * tx_elements + tx`.
    pub coeffs: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    pub profile_name: ProfileName,
    pub seed_used: u64,
    pub array: ArrayConfig,
    pub taps: Vec<Tap>,
}

impl ChannelRealization {
    /// Coefficient of tap `i` on the first antenna pair.
    pub fn coeff(&self, i: usize) -> Complex64 {
        self.taps[i].coeffs[0]
    }

    pub fn delays(&self) -> Vec<f64> {
        self.taps.iter().map(|t| t.delay).collect()
    }

    /// `(delay, coefficient)` pairs for one antenna pair.
    pub fn link(&self, rx: usize, tx: usize) -> Result<Vec<(f64, Complex64)>> {
        if rx >= self.array.rx_elements || tx >= self.array.tx_elements {
            return Err(Error::invalid(format!(
                "antenna pair ({rx}, {tx}) outside {}x{} array",
                self.array.rx_elements, self.array.tx_elements
            )));
        }
        let idx = rx * self.array.tx_elements + tx;
        Ok(self.taps.iter().map(|t| (t.delay, t.coeffs[idx])).collect())
    }

    /// Sum of squared tap magnitudes on the first antenna pair.
    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|t| t.coeffs[0].norm_sqr()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelFrequencyResponse {
    pub values: Vec<Complex64>,
    /// Hz, relative to the carrier.
    pub subcarrier_freqs: Vec<f64>,
}

impl ChannelFrequencyResponse {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Test hooks that pin down otherwise random parts of a draw.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FadingOverrides {
    /// Replaces the LOS K-factor (dB); `f64::INFINITY` makes the LOS tap
    /// fully deterministic.
    pub k_factor_db: Option<f64>,
    /// Forces every CDL ray phase to zero.
    pub zero_ray_phases: bool,
}

fn require_scaled(profile: &ChannelProfile, family: Family) -> Result<()> {
    if profile.family() != family {
        return Err(Error::invalid(format!(
            "{} is not a {} profile",
            profile.name, family
        )));
    }
    if !profile.is_scaled() {
        return Err(Error::invalid(format!(
            "{} still has normalized delays; scale them first",
            profile.name
        )));
    }
    Ok(())
}

/// Splits `power` into (deterministic, diffuse) parts for a linear K-factor.
fn rician_split(power: f64, k_db: f64) -> (f64, f64) {
    if k_db == f64::INFINITY {
        return (power, 0.0);
    }
    let k = 10f64.powf(k_db / 10.0);
    (power * k / (k + 1.0), power / (k + 1.0))
}

pub fn realize_tdl(profile: &ChannelProfile, seed: u64) -> Result<ChannelRealization> {
    realize_tdl_with(profile, seed, &FadingOverrides::default())
}

pub fn realize_tdl_with(
    profile: &ChannelProfile,
    seed: u64,
    overrides: &FadingOverrides,
) -> Result<ChannelRealization> {
    require_scaled(profile, Family::Tdl)?;
    let Entries::Tdl(taps) = &profile.entries else {
        unreachable!("family checked above");
    };
    let weights = profile.normalize_powers();
    let mut rng = stream(seed);
    let taps = taps
        .iter()
        .zip(weights)
        .map(|(tap, w)| {
            // Draw for every tap so the stream layout is independent of K.
            let unit = complex_gaussian(&mut rng, 1.0);
            let coeff = match tap.fading {
                Fading::Rayleigh => unit * w.sqrt(),
                Fading::LosDeterministic => {
                    let k_db = overrides
                        .k_factor_db
                        .or(tap.k_factor_db)
                        .expect("validated LOS tap has a K-factor");
                    let (los, diffuse) = rician_split(w, k_db);
                    Complex64::new(los.sqrt(), 0.0) + unit * diffuse.sqrt()
                }
            };
            Tap {
                delay: tap.delay,
                coeffs: vec![coeff],
            }
        })
        .collect();
    Ok(ChannelRealization {
        profile_name: profile.name,
        seed_used: seed,
        array: ArrayConfig::default(),
        taps,
    })
}

// Half-wavelength ULA along the y axis.
fn ula_phase(element: usize, zenith_deg: f64, azimuth_deg: f64) -> f64 {
    PI * element as f64 * zenith_deg.to_radians().sin() * azimuth_deg.to_radians().sin()
}

fn steering(array: &ArrayConfig, aod: f64, aoa: f64, zod: f64, zoa: f64) -> Vec<Complex64> {
    let mut g = Vec::with_capacity(array.links());
    for rx in 0..array.rx_elements {
        for tx in 0..array.tx_elements {
            g.push(Complex64::cis(ula_phase(rx, zoa, aoa) + ula_phase(tx, zod, aod)));
        }
    }
    g
}

pub fn realize_cdl(
    profile: &ChannelProfile,
    seed: u64,
    array: &ArrayConfig,
) -> Result<ChannelRealization> {
    realize_cdl_with(profile, seed, array, &FadingOverrides::default())
}

pub fn realize_cdl_with(
    profile: &ChannelProfile,
    seed: u64,
    array: &ArrayConfig,
    overrides: &FadingOverrides,
) -> Result<ChannelRealization> {
    require_scaled(profile, Family::Cdl)?;
    array.validate()?;
    let Entries::Cdl { clusters, spread } = &profile.entries else {
        unreachable!("family checked above");
    };
    let weights = profile.normalize_powers();
    let mut rng = stream(seed);
    let siso = array.is_siso();

    let mut taps = Vec::with_capacity(clusters.len());
    for (cluster, w) in clusters.iter().zip(weights) {
        if cluster.has_los_ray {
            let coeffs = if siso {
                vec![Complex64::new(w.sqrt(), 0.0)]
            } else {
                steering(
                    array,
                    cluster.aod_deg,
                    cluster.aoa_deg,
                    cluster.zod_deg,
                    cluster.zoa_deg,
                )
                .into_iter()
                .map(|g| g * w.sqrt())
                .collect()
            };
            taps.push(Tap {
                delay: cluster.delay,
                coeffs,
            });
            continue;
        }

        // Random coupling of ray offsets between the four angle domains.
        let mut coupling: [[usize; RAYS_PER_CLUSTER]; 3] = [std::array::from_fn(|m| m); 3];
        for perm in coupling.iter_mut() {
            perm.shuffle(&mut rng);
        }
        let phases: Vec<f64> = (0..cluster.ray_count)
            .map(|_| rng.gen_range(-PI..PI))
            .collect();

        let amp = (w / cluster.ray_count as f64).sqrt();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); array.links()];
        for m in 0..cluster.ray_count {
            let phase = if overrides.zero_ray_phases { 0.0 } else { phases[m] };
            let ray = Complex64::cis(phase);
            if siso {
                coeffs[0] += ray;
            } else {
                let aod = cluster.aod_deg + spread.asd_deg * RAY_OFFSETS[m];
                let aoa = cluster.aoa_deg + spread.asa_deg * RAY_OFFSETS[coupling[0][m]];
                let zod = cluster.zod_deg + spread.zsd_deg * RAY_OFFSETS[coupling[1][m]];
                let zoa = cluster.zoa_deg + spread.zsa_deg * RAY_OFFSETS[coupling[2][m]];
                for (c, g) in coeffs.iter_mut().zip(steering(array, aod, aoa, zod, zoa)) {
                    *c += ray * g;
                }
            }
        }
        for c in coeffs.iter_mut() {
            *c *= amp;
        }
        taps.push(Tap {
            delay: cluster.delay,
            coeffs,
        });
    }

    Ok(ChannelRealization {
        profile_name: profile.name,
        seed_used: seed,
        array: *array,
        taps,
    })
}

/// Draws a realization of either family. TDL models are single-antenna.
pub fn realize(
    profile: &ChannelProfile,
    seed: u64,
    array: &ArrayConfig,
) -> Result<ChannelRealization> {
    match profile.family() {
        Family::Tdl => {
            if !array.is_siso() {
                return Err(Error::invalid(format!(
                    "{} is a single-antenna model; antenna arrays need a CDL profile",
                    profile.name
                )));
            }
            realize_tdl(profile, seed)
        }
        Family::Cdl => realize_cdl(profile, seed, array),
    }
}

/// `H[k] = sum_i c_i exp(-j 2 pi f_k tau_i)` on the first antenna pair.
pub fn frequency_response(
    realization: &ChannelRealization,
    grid: &SubcarrierGrid,
) -> Result<ChannelFrequencyResponse> {
    frequency_response_link(realization, grid, 0, 0)
}

pub fn frequency_response_link(
    realization: &ChannelRealization,
    grid: &SubcarrierGrid,
    rx: usize,
    tx: usize,
) -> Result<ChannelFrequencyResponse> {
    grid.validate()?;
    let taps = realization.link(rx, tx)?;
    let freqs = grid.offsets();
    let values = freqs
        .iter()
        .map(|&f| {
            taps.iter()
                .map(|&(tau, c)| c * Complex64::cis(-2.0 * PI * f * tau))
                .sum()
        })
        .collect();
    Ok(ChannelFrequencyResponse {
        values,
        subcarrier_freqs: freqs,
    })
}
