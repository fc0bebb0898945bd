//! Coherence time from Doppler spread, and the antenna count that puts the
//! eavesdropper in the zero-DoF regime.

use crate::{Error, Result};

/// Speed of light used for the Doppler shift, in m/s.
pub const SPEED_OF_LIGHT: f64 = 3e8;

/// Coherence time rule of thumb: `T_c ≈ 0.423 / f_m` seconds.
pub const COHERENCE_FACTOR: f64 = 0.423;

/// One OFDM symbol in LTE-A, in seconds.
pub const DEFAULT_SYMBOL_DURATION_S: f64 = 72.4e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeploymentParams {
    pub carrier_hz: f64,
    pub speed_mps: f64,
    pub symbol_duration_s: f64,
}

impl DeploymentParams {
    pub fn new(carrier_hz: f64, speed_mps: f64) -> Result<Self> {
        Self::with_symbol_duration(carrier_hz, speed_mps, DEFAULT_SYMBOL_DURATION_S)
    }

    pub fn with_symbol_duration(carrier_hz: f64, speed_mps: f64, symbol_duration_s: f64) -> Result<Self> {
        for (name, v) in [
            ("carrier_hz", carrier_hz),
            ("speed_mps", speed_mps),
            ("symbol_duration_s", symbol_duration_s),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(alloc::format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(Self {
            carrier_hz,
            speed_mps,
            symbol_duration_s,
        })
    }

    /// Maximum Doppler shift `f_m = v f_c / c`.
    pub fn doppler_hz(&self) -> f64 {
        self.speed_mps * self.carrier_hz / SPEED_OF_LIGHT
    }
}

/// Coherence time in symbols, `(0.423 / f_m) / symbol_duration`.
pub fn coherence_symbols(p: &DeploymentParams) -> f64 {
    COHERENCE_FACTOR / p.doppler_hz() / p.symbol_duration_s
}

/// `⌈T⌉`: with `M = K + N_J = T` the non-coherent leakage has zero DoF.
pub fn required_antennas(p: &DeploymentParams) -> usize {
    libm::ceil(coherence_symbols(p)) as usize
}
