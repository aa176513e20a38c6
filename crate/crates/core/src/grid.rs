//! Uniform discretization of the external continuum around the cavity
//! frequency.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Symmetric window [−W, W] of `mode_count` equally spaced modes centred on
/// the cavity frequency. Mode m sits at ω_m = −W + (m + ½)Δω with Δω = 2W/M.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContinuumGrid {
    /// Offset of the window from the cavity frequency; 0 by convention.
    pub center: f64,
    pub half_bandwidth: f64,
    pub mode_count: usize,
}

impl ContinuumGrid {
    pub fn new(half_bandwidth: f64, mode_count: usize) -> Result<Self> {
        if !half_bandwidth.is_finite() || half_bandwidth <= 0.0 {
            return Err(Error::invalid(
                "half_bandwidth",
                format!("must be finite and > 0, got {half_bandwidth}"),
            ));
        }
        if mode_count < 2 {
            return Err(Error::invalid(
                "mode_count",
                format!("need at least 2 modes, got {mode_count}"),
            ));
        }
        Ok(ContinuumGrid {
            center: 0.0,
            half_bandwidth,
            mode_count,
        })
    }

    /// Default sizing for total photon decay `kappa` and pulse duration `t`:
    /// W = max(8κ, 16π/T) and the smallest M with Δω·T ≤ π/2.
    pub fn auto(kappa: f64, t: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::invalid("kappa", format!("must be finite and > 0, got {kappa}")));
        }
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::invalid("duration", format!("must be finite and > 0, got {t}")));
        }
        let w = (8.0 * kappa).max(16.0 * PI / t);
        let m = (4.0 * w * t / PI - 1e-9).ceil().max(2.0) as usize;
        let g = Self::new(w, m)?;
        g.validate(kappa, t)?;
        Ok(g)
    }

    /// Same window with `factor` times as many modes.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.half_bandwidth, self.mode_count * factor.max(1))
    }

    /// Check the recurrence bound Δω·T ≤ π/2 and the bandwidth bound
    /// W ≥ 8·max(κ, 2π/T).
    pub fn validate(&self, kappa: f64, t: f64) -> Result<()> {
        if self.mode_count < 2 {
            return Err(Error::Configuration(format!("mode count {} < 2", self.mode_count)));
        }
        let dwt = self.spacing() * t;
        if dwt > PI / 2.0 * (1.0 + 1e-12) {
            return Err(Error::Configuration(format!(
                "mode spacing {:.6e} MHz times duration {t} us = {dwt:.6} exceeds pi/2; \
                 the continuum would recur within 4T",
                self.spacing()
            )));
        }
        let need = 8.0 * kappa.max(2.0 * PI / t);
        if self.half_bandwidth < need * (1.0 - 1e-12) {
            return Err(Error::Configuration(format!(
                "half bandwidth {} MHz below 8*max(kappa, 2pi/T) = {need}",
                self.half_bandwidth
            )));
        }
        Ok(())
    }

    /// Mode spacing Δω = 2W/M.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_bandwidth / self.mode_count as f64
    }

    /// Detuning of mode m from the cavity frequency.
    pub fn omega(&self, m: usize) -> f64 {
        self.center - self.half_bandwidth + (m as f64 + 0.5) * self.spacing()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.mode_count).map(|m| self.omega(m)).collect()
    }

    /// Weight √Δω turning a spectral density into a discrete mode amplitude.
    pub fn weight(&self) -> f64 {
        self.spacing().sqrt()
    }

    /// Recurrence time 2π/Δω of the discrete continuum.
    pub fn recurrence_time(&self) -> f64 {
        2.0 * PI / self.spacing()
    }
}
