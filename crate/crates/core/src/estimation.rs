//! Pilot-based channel estimation and CSI feature vectors.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SubcarrierGrid;
use crate::link::{PilotGrid, ReceivedGrid};
use crate::profiles::{ChannelProfile, ProfileName};

/// Floor applied to the data-driven prior variance.
pub const PRIOR_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Ls,
    /// Per-subcarrier scalar Wiener shrinkage.
    #[default]
    ScalarMmse,
    /// Full frequency-domain Wiener filter built from the true power-delay profile.
    MatrixMmse,
}

/// `H_ls[k] = y[k] / x[k]`.
pub fn ls_estimate(pilots: &PilotGrid, received: &ReceivedGrid) -> Result<Vec<Complex64>> {
    if pilots.len() != received.symbols.len() {
        return Err(Error::LengthMismatch {
            expected: pilots.len(),
            found: received.symbols.len(),
        });
    }
    pilots
        .symbols
        .iter()
        .zip(&received.symbols)
        .enumerate()
        .map(|(k, (x, y))| {
            if x.norm_sqr() == 0.0 {
                Err(Error::invalid(format!("pilot symbol {k} is zero")))
            } else {
                Ok(y / x)
            }
        })
        .collect()
}

/// Prior channel variance estimated from the LS estimate itself:
/// `mean |H_ls|^2 - noise_variance`, floored at [`PRIOR_FLOOR`].
pub fn default_prior_variance(ls: &[Complex64], noise_variance: f64) -> f64 {
    if ls.is_empty() {
        return PRIOR_FLOOR;
    }
    let power = ls.iter().map(|h| h.norm_sqr()).sum::<f64>() / ls.len() as f64;
    (power - noise_variance).max(PRIOR_FLOOR)
}

/// Scalar MMSE: every LS value is shrunk by `prior / (prior + noise)`.
///
/// Pilots have unit modulus, so the per-subcarrier LS noise variance equals
/// `noise_variance`.
pub fn mmse_estimate(
    ls: &[Complex64],
    noise_variance: f64,
    prior_variance: f64,
) -> Result<Vec<Complex64>> {
    if !(noise_variance >= 0.0) {
        return Err(Error::invalid(format!(
            "noise variance must be >= 0, got {noise_variance}"
        )));
    }
    if !(prior_variance > 0.0) {
        return Err(Error::invalid(format!(
            "prior variance must be > 0, got {prior_variance}"
        )));
    }
    let gain = prior_variance / (prior_variance + noise_variance);
    Ok(ls.iter().map(|h| h * gain).collect())
}

/// Frequency-correlation matrix `R[k][l] = sum_i w_i exp(-j 2 pi (f_k - f_l) tau_i)`
/// of a scaled profile.
pub fn channel_correlation(profile: &ChannelProfile, grid: &SubcarrierGrid) -> Result<DMatrix<Complex64>> {
    if !profile.is_scaled() {
        return Err(Error::invalid(format!(
            "{} still has normalized delays",
            profile.name
        )));
    }
    grid.validate()?;
    let weights = profile.normalize_powers();
    let delays = profile.delays();
    let f = grid.offsets();
    let n = f.len();
    Ok(DMatrix::from_fn(n, n, |k, l| {
        delays
            .iter()
            .zip(&weights)
            .map(|(tau, w)| Complex64::cis(-2.0 * PI * (f[k] - f[l]) * tau) * w)
            .sum()
    }))
}

/// Matrix MMSE: `R (R + noise I)^-1 H_ls`.
pub fn mmse_estimate_correlated(
    ls: &[Complex64],
    noise_variance: f64,
    correlation: &DMatrix<Complex64>,
) -> Result<Vec<Complex64>> {
    if !(noise_variance >= 0.0) {
        return Err(Error::invalid(format!(
            "noise variance must be >= 0, got {noise_variance}"
        )));
    }
    if correlation.nrows() != ls.len() || correlation.ncols() != ls.len() {
        return Err(Error::LengthMismatch {
            expected: ls.len(),
            found: correlation.nrows(),
        });
    }
    if noise_variance == 0.0 {
        return Ok(ls.to_vec());
    }
    let n = ls.len();
    let regularized =
        correlation + DMatrix::<Complex64>::identity(n, n) * Complex64::new(noise_variance, 0.0);
    let rhs = DVector::from_column_slice(ls);
    let solved = regularized
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::invalid("singular correlation matrix"))?;
    Ok((correlation * solved).iter().copied().collect())
}

/// Real-valued CSI feature vector, interleaved `[re0, im0, re1, im1, ...]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsiVector {
    pub features: Vec<f64>,
    pub label: ProfileName,
    pub snr_db: f64,
    pub sample_id: u64,
}

impl CsiVector {
    /// Inverse of the interleaving done by [`build_feature_vector`].
    pub fn to_complex(&self) -> Vec<Complex64> {
        self.features
            .chunks_exact(2)
            .map(|c| Complex64::new(c[0], c[1]))
            .collect()
    }
}

pub fn build_feature_vector(
    estimate: &[Complex64],
    label: ProfileName,
    snr_db: f64,
    sample_id: u64,
) -> Result<CsiVector> {
    if estimate.is_empty() {
        return Err(Error::invalid("empty channel estimate"));
    }
    if let Some(k) = estimate.iter().position(|h| !h.re.is_finite() || !h.im.is_finite()) {
        return Err(Error::invalid(format!(
            "channel estimate has a non-finite value at subcarrier {k}"
        )));
    }
    Ok(CsiVector {
        features: estimate.iter().flat_map(|h| [h.re, h.im]).collect(),
        label,
        snr_db,
        sample_id,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::link::{add_awgn, apply_channel, generate_pilot_grid};
    use crate::profiles::bundled_profile;
    use crate::realization::{frequency_response, realize_tdl};
    use crate::rng::{complex_gaussian, stream};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ls_on_noiseless_link_is_exact() {
        let grid = SubcarrierGrid::new(128, 30e3, 4e9).unwrap();
        let p = bundled_profile(ProfileName::TdlB).scale_delays(300e-9).unwrap();
        let h = frequency_response(&realize_tdl(&p, 4).unwrap(), &grid).unwrap();
        let pilots = generate_pilot_grid(&grid, 5).unwrap();
        let y = apply_channel(&pilots, &h).unwrap();
        let est = ls_estimate(&pilots, &y).unwrap();
        for (e, t) in est.iter().zip(&h.values) {
            assert!((e - t).norm() <= 1e-12 * t.norm());
        }
    }

    #[test]
    fn ls_direct_division() {
        let grid = SubcarrierGrid::new(2, 30e3, 4e9).unwrap();
        let pilots = PilotGrid {
            symbols: vec![c(1.0, 0.0), c(1.0, 0.0)],
            grid,
        };
        let y = ReceivedGrid {
            symbols: vec![c(2.0, 0.0), c(0.0, 2.0)],
            noise_variance: 0.0,
            snr_db: None,
        };
        assert_eq!(ls_estimate(&pilots, &y).unwrap(), vec![c(2.0, 0.0), c(0.0, 2.0)]);
    }

    #[test]
    fn ls_matches_division_oracle() {
        let grid = SubcarrierGrid::new(50, 30e3, 4e9).unwrap();
        let pilots = generate_pilot_grid(&grid, 1).unwrap();
        let mut rng = stream(2);
        let y = ReceivedGrid {
            symbols: (0..50).map(|_| complex_gaussian(&mut rng, 3.0)).collect(),
            noise_variance: 0.0,
            snr_db: None,
        };
        let est = ls_estimate(&pilots, &y).unwrap();
        for k in 0..50 {
            let (a, b) = (y.symbols[k], pilots.symbols[k]);
            let den = b.re * b.re + b.im * b.im;
            let oracle = c((a.re * b.re + a.im * b.im) / den, (a.im * b.re - a.re * b.im) / den);
            assert!((est[k] - oracle).norm() < 1e-14);
        }
    }

    #[test]
    fn ls_guards() {
        let grid = SubcarrierGrid::new(2, 30e3, 4e9).unwrap();
        let pilots = PilotGrid {
            symbols: vec![c(1.0, 0.0), c(0.0, 0.0)],
            grid,
        };
        let y = ReceivedGrid {
            symbols: vec![c(1.0, 0.0); 2],
            noise_variance: 0.0,
            snr_db: None,
        };
        assert!(ls_estimate(&pilots, &y).is_err());
        let short = ReceivedGrid {
            symbols: vec![c(1.0, 0.0)],
            ..y
        };
        assert!(matches!(
            ls_estimate(&pilots, &short),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn mmse_limits() {
        let ls = vec![c(1.0, -2.0), c(0.5, 0.25), c(-3.0, 0.0)];
        assert_eq!(mmse_estimate(&ls, 0.0, 0.7).unwrap(), ls);
        let shrunk = mmse_estimate(&ls, 1e12, 1.0).unwrap();
        assert!(shrunk.iter().all(|h| h.norm() < 1e-11));
        let halved = mmse_estimate(&ls, 1.0, 1.0).unwrap();
        for (h, l) in halved.iter().zip(&ls) {
            assert_eq!(*h, c(l.re / 2.0, l.im / 2.0));
        }
        assert!(mmse_estimate(&ls, -1.0, 1.0).is_err());
        assert!(mmse_estimate(&ls, 1.0, 0.0).is_err());
        assert!(mmse_estimate(&ls, 1.0, -2.0).is_err());
    }

    #[test]
    fn default_prior_is_floored() {
        let ls = vec![c(0.1, 0.0); 4];
        assert_eq!(default_prior_variance(&ls, 5.0), PRIOR_FLOOR);
        assert!((default_prior_variance(&ls, 0.001) - 0.009).abs() < 1e-15);
    }

    #[test]
    fn matrix_mmse_beats_scalar_on_frequency_selective_channel() {
        let grid = SubcarrierGrid::new(48, 30e3, 4e9).unwrap();
        let p = bundled_profile(ProfileName::TdlA).scale_delays(300e-9).unwrap();
        let r = channel_correlation(&p, &grid).unwrap();
        // Hermitian with unit diagonal.
        for k in 0..48 {
            assert!((r[(k, k)] - c(1.0, 0.0)).norm() < 1e-12);
            for l in 0..48 {
                assert!((r[(k, l)] - r[(l, k)].conj()).norm() < 1e-12);
            }
        }
        let (mut mse_scalar, mut mse_matrix) = (0.0, 0.0);
        for s in 0..200u64 {
            let h = frequency_response(&realize_tdl(&p, s).unwrap(), &grid).unwrap();
            let pilots = generate_pilot_grid(&grid, s + 10_000).unwrap();
            let y = add_awgn(&apply_channel(&pilots, &h).unwrap(), 0.0, s + 20_000).unwrap();
            let ls = ls_estimate(&pilots, &y).unwrap();
            let scalar = mmse_estimate(&ls, y.noise_variance, 1.0).unwrap();
            let matrix = mmse_estimate_correlated(&ls, y.noise_variance, &r).unwrap();
            for k in 0..48 {
                mse_scalar += (scalar[k] - h.values[k]).norm_sqr();
                mse_matrix += (matrix[k] - h.values[k]).norm_sqr();
            }
        }
        assert!(mse_matrix < mse_scalar, "{mse_matrix} vs {mse_scalar}");
        let ls = vec![c(1.0, 1.0); 48];
        assert_eq!(mmse_estimate_correlated(&ls, 0.0, &r).unwrap(), ls);
        assert!(mmse_estimate_correlated(&ls[..10], 1.0, &r).is_err());
    }

    #[test]
    fn feature_vector_layout() {
        let v = build_feature_vector(&[c(1.0, 2.0)], ProfileName::CdlE, 10.0, 3).unwrap();
        assert_eq!(v.features, vec![1.0, 2.0]);
        assert_eq!(v.label, ProfileName::CdlE);
        assert_eq!(v.sample_id, 3);
        let zeros = build_feature_vector(&[c(0.0, 0.0); 5], ProfileName::TdlA, 0.0, 0).unwrap();
        assert_eq!(zeros.features, vec![0.0; 10]);
        assert!(build_feature_vector(&[], ProfileName::TdlA, 0.0, 0).is_err());
        assert!(build_feature_vector(&[c(f64::NAN, 0.0)], ProfileName::TdlA, 0.0, 0).is_err());
    }

    proptest! {
        #[test]
        fn shrinkage_never_grows_norm(
            vals in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..64),
            noise in 0.0f64..100.0,
            prior in 1e-6f64..100.0,
        ) {
            let ls: Vec<Complex64> = vals.iter().map(|&(a, b)| c(a, b)).collect();
            let out = mmse_estimate(&ls, noise, prior).unwrap();
            let n_in: f64 = ls.iter().map(|h| h.norm_sqr()).sum();
            let n_out: f64 = out.iter().map(|h| h.norm_sqr()).sum();
            prop_assert!(n_out <= n_in);
        }

        #[test]
        fn feature_vector_round_trip(
            vals in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..64),
        ) {
            let est: Vec<Complex64> = vals.iter().map(|&(a, b)| c(a, b)).collect();
            let v = build_feature_vector(&est, ProfileName::TdlC, 20.0, 1).unwrap();
            prop_assert_eq!(v.features.len(), 2 * est.len());
            prop_assert_eq!(v.to_complex(), est);
        }
    }
}
