use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Active subcarriers of one OFDM symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubcarrierGrid {
    pub subcarrier_count: usize,
    /// Hz.
    pub subcarrier_spacing: f64,
    /// Hz.
    pub carrier_freq: f64,
}

impl Default for SubcarrierGrid {
    fn default() -> Self {
        SubcarrierGrid {
            subcarrier_count: 600,
            subcarrier_spacing: 30e3,
            carrier_freq: 4e9,
        }
    }
}

impl SubcarrierGrid {
    pub fn new(subcarrier_count: usize, subcarrier_spacing: f64, carrier_freq: f64) -> Result<Self> {
        let grid = SubcarrierGrid {
            subcarrier_count,
            subcarrier_spacing,
            carrier_freq,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.subcarrier_count == 0 {
            return Err(Error::invalid("subcarrier grid is empty"));
        }
        if !(self.subcarrier_spacing > 0.0 && self.subcarrier_spacing.is_finite()) {
            return Err(Error::invalid(format!(
                "subcarrier spacing must be positive, got {}",
                self.subcarrier_spacing
            )));
        }
        if !(self.carrier_freq > 0.0 && self.carrier_freq.is_finite()) {
            return Err(Error::invalid(format!(
                "carrier frequency must be positive, got {}",
                self.carrier_freq
            )));
        }
        Ok(())
    }

    /// Baseband frequency of subcarrier `k`, centred on the carrier:
    /// `(k - N/2) * spacing`.
    pub fn offset(&self, k: usize) -> f64 {
        (k as f64 - (self.subcarrier_count / 2) as f64) * self.subcarrier_spacing
    }

    pub fn offsets(&self) -> Vec<f64> {
        (0..self.subcarrier_count).map(|k| self.offset(k)).collect()
    }

    pub fn wavelength(&self) -> f64 {
        299_792_458.0 / self.carrier_freq
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_are_centred() {
        let g = SubcarrierGrid::new(4, 15e3, 4e9).unwrap();
        assert_eq!(g.offsets(), vec![-30e3, -15e3, 0.0, 15e3]);
        let one = SubcarrierGrid::new(1, 30e3, 4e9).unwrap();
        assert_eq!(one.offsets(), vec![0.0]);
    }

    #[test]
    fn rejects_empty_and_bad_spacing() {
        assert!(SubcarrierGrid::new(0, 30e3, 4e9).is_err());
        assert!(SubcarrierGrid::new(8, 0.0, 4e9).is_err());
        assert!(SubcarrierGrid::new(8, 30e3, -1.0).is_err());
    }
}
