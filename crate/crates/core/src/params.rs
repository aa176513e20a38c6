//! Per-polarization system parameters and the initial atomic superposition.
//!
//! Unit convention throughout the crate: angular frequencies and rates in
//! MHz, times in μs, laser intensities Ω² in MHz². Rate × time products are
//! then dimensionless.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Tolerance on the normalization of [`InitialSuperposition`].
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// One of the two Λ systems, i.e. one cavity polarization.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarizationBranch {
    /// Raman coupling g (MHz).
    pub g: f64,
    /// Common detuning δ from the eliminated excited level (MHz).
    pub delta: f64,
    /// Output-mirror cavity decay k_c (MHz).
    pub k_c: f64,
    /// Decay into the loss channel k_a (MHz).
    pub k_a: f64,
    /// Branch index α.
    pub label: usize,
}

impl PolarizationBranch {
    pub fn new(label: usize, g: f64, delta: f64, k_c: f64, k_a: f64) -> Result<Self> {
        let b = PolarizationBranch {
            g,
            delta,
            k_c,
            k_a,
            label,
        };
        b.validate(false)?;
        Ok(b)
    }

    /// Lossless branch with label 0.
    pub fn lossless(g: f64, delta: f64, k_c: f64) -> Result<Self> {
        Self::new(0, g, delta, k_c, 0.0)
    }

    pub fn with_loss(mut self, k_a: f64) -> Result<Self> {
        self.k_a = k_a;
        self.validate(false)?;
        Ok(self)
    }

    pub fn with_label(mut self, label: usize) -> Self {
        self.label = label;
        self
    }

    /// Check the parameter bounds. With `strict`, also require the large
    /// detuning regime δ ≥ 10·max(g, k_c) in which the excited levels can be
    /// eliminated.
    pub fn validate(&self, strict: bool) -> Result<()> {
        positive("g", self.g)?;
        positive("delta", self.delta)?;
        positive("k_c", self.k_c)?;
        if !self.k_a.is_finite() || self.k_a < 0.0 {
            return Err(Error::invalid(
                "k_a",
                format!("must be finite and >= 0, got {}", self.k_a),
            ));
        }
        if self.label > 1 {
            return Err(Error::invalid(
                "label",
                format!("branch index must be 0 or 1, got {}", self.label),
            ));
        }
        if strict && self.delta < 10.0 * self.g.max(self.k_c) {
            return Err(Error::invalid(
                "delta",
                format!(
                    "large-detuning regime requires delta >= 10*max(g, k_c) = {}, got {}",
                    10.0 * self.g.max(self.k_c),
                    self.delta
                ),
            ));
        }
        Ok(())
    }

    /// Total cavity photon decay rate, k_c + k_a.
    pub fn total_decay(&self) -> f64 {
        self.k_c + self.k_a
    }

    /// Probability that a cavity photon leaves through the output mirror.
    pub fn output_efficiency(&self) -> f64 {
        self.k_c / (self.k_c + self.k_a)
    }

    /// Prefactor g²/(4δ²κ) turning the pulse area into μ.
    pub(crate) fn mu_prefactor(&self, include_loss: bool) -> f64 {
        let kappa = if include_loss { self.total_decay() } else { self.k_c };
        self.g * self.g / (4.0 * self.delta * self.delta * kappa)
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be finite and > 0, got {v}")))
    }
}

/// Initial atomic state c₀|i⟩₀ + c₁|i⟩₁ with all fields in vacuum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitialSuperposition {
    pub c0: C64,
    pub c1: C64,
}

impl InitialSuperposition {
    pub fn new(c0: C64, c1: C64) -> Result<Self> {
        let norm = c0.norm_sqr() + c1.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::invalid(
                "initial",
                format!("|c0|^2 + |c1|^2 must equal 1 within {NORMALIZATION_TOL}, got {norm}"),
            ));
        }
        Ok(InitialSuperposition { c0, c1 })
    }

    /// (|i⟩₀ + |i⟩₁)/√2.
    pub fn balanced() -> Self {
        let a = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        InitialSuperposition { c0: a, c1: a }
    }

    /// Branch weights |c₀|², |c₁|², rescaled to sum to exactly 1.
    pub fn weights(&self) -> [f64; 2] {
        let (a, b) = (self.c0.norm_sqr(), self.c1.norm_sqr());
        let s = a + b;
        [a / s, b / s]
    }

    pub fn amplitude(&self, alpha: usize) -> C64 {
        if alpha == 0 {
            self.c0
        } else {
            self.c1
        }
    }
}
