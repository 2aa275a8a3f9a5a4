//! FMCW waveform configuration and derived radar quantities.
//!
//! Everything downstream (beat frequencies, range/Doppler bin spacing,
//! unambiguous limits) is computed here once so that the simulator and the
//! sanity checks cannot drift apart.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};

/// Exact speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

/// FMCW waveform configuration.
///
/// Defaults follow a 60 GHz indoor sensor: 882.35 MHz sweep over 0.256 ms
/// sampled at 1 MHz (256 samples per chirp), 64 chirps per frame, 10 frames
/// per second.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadarConfig {
    /// Carrier frequency f_c, Hz.
    pub carrier_hz: f64,
    /// Sweep bandwidth B, Hz.
    pub bandwidth_hz: f64,
    /// ADC sampling rate f_s, Hz (real-valued sampling).
    pub sample_rate_hz: f64,
    /// Chirp duration T_c, s.
    pub chirp_duration_s: f64,
    /// Fast-time samples per chirp; must equal round(f_s * T_c).
    pub samples_per_chirp: usize,
    /// Slow-time chirps per frame, transmitted back to back.
    pub chirps_per_frame: usize,
    /// Frame repetition period, s.
    pub frame_period_s: f64,
}

impl Default for RadarConfig {
    fn default() -> Self {
        Self {
            carrier_hz: 60.0e9,
            bandwidth_hz: 882.35e6,
            sample_rate_hz: 1.0e6,
            chirp_duration_s: 0.256e-3,
            samples_per_chirp: 256,
            chirps_per_frame: 64,
            frame_period_s: 0.1,
        }
    }
}

impl RadarConfig {
    /// Checks the structural invariants of the configuration.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("carrier_hz", self.carrier_hz),
            ("bandwidth_hz", self.bandwidth_hz),
            ("sample_rate_hz", self.sample_rate_hz),
            ("chirp_duration_s", self.chirp_duration_s),
            ("frame_period_s", self.frame_period_s),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Config(format!(
                    "{name} must be strictly positive, got {value}"
                )));
            }
        }
        if self.samples_per_chirp == 0 || self.chirps_per_frame == 0 {
            return Err(Error::Config(
                "samples_per_chirp and chirps_per_frame must be >= 1".into(),
            ));
        }
        let expected = (self.sample_rate_hz * self.chirp_duration_s).round() as usize;
        if self.samples_per_chirp != expected {
            return Err(Error::Config(format!(
                "samples_per_chirp {} inconsistent with sample_rate * chirp_duration = {}",
                self.samples_per_chirp, expected
            )));
        }
        let active = self.chirps_per_frame as f64 * self.chirp_duration_s;
        if active > self.frame_period_s {
            return Err(Error::Config(format!(
                "chirps_per_frame * chirp_duration = {active:.6} s exceeds frame_period {} s",
                self.frame_period_s
            )));
        }
        Ok(())
    }

    /// Loads a configuration from a JSON file. Keys must match the field
    /// names exactly; unknown keys are rejected.
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let config: RadarConfig = serde_json::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    /// Convenience wrapper around [`derive_params`].
    pub fn derived(&self) -> Result<DerivedParams> {
        derive_params(self)
    }
}

/// Quantities derived from a [`RadarConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    /// Chirp slope S = B / T_c, Hz/s.
    pub chirp_slope_hz_per_s: f64,
    /// Theoretical range resolution c / (2B), m.
    pub range_resolution_m: f64,
    /// Maximum unambiguous range (f_s / 2) * c / (2S), m.
    ///
    /// Real-valued sampling leaves the usable beat band at [0, f_s/2].
    pub max_range_m: f64,
    /// Range extent of one FFT bin, max_range / (N_s / 2), m.
    pub range_bin_m: f64,
    /// Carrier wavelength c / f_c, m.
    pub wavelength_m: f64,
    /// Pulse repetition frequency 1 / T_c (back-to-back chirps), Hz.
    pub prf_hz: f64,
    /// Doppler extent of one FFT bin, prf / N_c, Hz.
    pub doppler_bin_hz: f64,
    /// Maximum unambiguous radial speed, wavelength * prf / 4, m/s.
    pub max_velocity_m_s: f64,
}

impl DerivedParams {
    /// Number of range rows kept after the one-sided fast-time FFT.
    pub fn range_bins(config: &RadarConfig) -> usize {
        config.samples_per_chirp / 2
    }

    /// Beat frequency for a point target at `range_m`, Hz.
    pub fn beat_frequency_hz(&self, range_m: f64) -> f64 {
        2.0 * range_m * self.chirp_slope_hz_per_s / SPEED_OF_LIGHT_M_S
    }

    /// Doppler frequency for radial velocity `velocity_m_s`, Hz.
    /// Negative velocity (approaching) gives negative Doppler.
    pub fn doppler_frequency_hz(&self, velocity_m_s: f64) -> f64 {
        2.0 * velocity_m_s / self.wavelength_m
    }
}

/// Computes all derived quantities, rejecting invalid configurations.
pub fn derive_params(config: &RadarConfig) -> Result<DerivedParams> {
    config.validate()?;
    let c = SPEED_OF_LIGHT_M_S;
    let slope = config.bandwidth_hz / config.chirp_duration_s;
    let range_resolution = c / (2.0 * config.bandwidth_hz);
    let max_range = (config.sample_rate_hz / 2.0) * c / (2.0 * slope);
    let range_bin = max_range / (config.samples_per_chirp as f64 / 2.0);
    let wavelength = c / config.carrier_hz;
    let prf = 1.0 / config.chirp_duration_s;
    let doppler_bin = prf / config.chirps_per_frame as f64;
    let max_velocity = wavelength * prf / 4.0;
    Ok(DerivedParams {
        chirp_slope_hz_per_s: slope,
        range_resolution_m: range_resolution,
        max_range_m: max_range,
        range_bin_m: range_bin,
        wavelength_m: wavelength,
        prf_hz: prf,
        doppler_bin_hz: doppler_bin,
        max_velocity_m_s: max_velocity,
    })
}
