//! Single-excitation dynamics with quantized centre-of-mass motion along the
//! cavity axis, expanded to second order in the Lamb-Dicke parameters.

mod fidelity;
mod hamiltonian;
mod lamb_dicke;
mod propagate;
mod state;

pub use fidelity::{motion_fidelity, overlap_vectors, target_state, MotionFidelity, TargetState};
pub use hamiltonian::{BathModel, MotionHamiltonian, MotionOptions};
pub use lamb_dicke::{lamb_dicke_coefficients, LambDickeCoefficients};
pub use propagate::{propagate, propagate_with_diagnostics, DiagnosticRow};
pub use state::{excitation_number, SingleExcitationState};

use crate::error::{Error, Result};
use crate::quadrature::pairwise_sum;

/// Largest thermal weight that truncation may discard.
pub const THERMAL_TAIL_TOL: f64 = 1e-6;

/// Upper end of the Lamb-Dicke parameters accepted.
pub const MAX_LAMB_DICKE: f64 = 0.5;

/// Trap and thermal-state parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MotionSpec {
    /// Trap frequency ω₀ (MHz).
    pub omega0: f64,
    pub eta_l: f64,
    pub eta_r: f64,
    /// Mean initial vibrational number N.
    pub thermal_n: f64,
    /// Highest Fock level kept.
    pub n_max: usize,
}

impl MotionSpec {
    /// Motion parameters with the smallest admissible Fock truncation.
    pub fn new(omega0: f64, eta_l: f64, eta_r: f64, thermal_n: f64) -> Result<Self> {
        if !(thermal_n.is_finite() && thermal_n >= 0.0) {
            return Err(Error::invalid(
                "thermal_n",
                format!("must be finite and >= 0, got {thermal_n}"),
            ));
        }
        let s = MotionSpec {
            omega0,
            eta_l,
            eta_r,
            thermal_n,
            n_max: auto_n_max(thermal_n),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_n_max(mut self, n_max: usize) -> Result<Self> {
        self.n_max = n_max;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega0.is_finite() && self.omega0 >= 0.0) {
            return Err(Error::invalid(
                "omega0",
                format!("must be finite and >= 0, got {}", self.omega0),
            ));
        }
        for (name, eta) in [("eta_l", self.eta_l), ("eta_r", self.eta_r)] {
            if !(eta.is_finite() && (0.0..=MAX_LAMB_DICKE).contains(&eta)) {
                return Err(Error::invalid(
                    name,
                    format!("must lie in [0, {MAX_LAMB_DICKE}], got {eta}"),
                ));
            }
        }
        if !(self.thermal_n.is_finite() && self.thermal_n >= 0.0) {
            return Err(Error::invalid(
                "thermal_n",
                format!("must be finite and >= 0, got {}", self.thermal_n),
            ));
        }
        let floor = min_n_max(self.thermal_n);
        if self.n_max < floor {
            return Err(Error::invalid(
                "n_max",
                format!("must be >= ceil(10N + 5) = {floor}, got {}", self.n_max),
            ));
        }
        thermal_tail(self.thermal_n, self.n_max)?;
        Ok(())
    }

    /// Raman correction coefficient (η_L² + η_r²)/2.
    pub fn raman_eta_sq(&self) -> f64 {
        0.5 * (self.eta_l * self.eta_l + self.eta_r * self.eta_r)
    }

    pub fn is_motionless(&self) -> bool {
        self.eta_l == 0.0 && self.eta_r == 0.0
    }
}

fn min_n_max(thermal_n: f64) -> usize {
    (10.0 * thermal_n + 5.0 - 1e-12).ceil() as usize
}

/// Thermal weight beyond level n_max, (N/(1+N))^(n_max+1).
fn thermal_tail(thermal_n: f64, n_max: usize) -> Result<f64> {
    let r = thermal_n / (1.0 + thermal_n);
    let tail = r.powi(n_max as i32 + 1);
    if tail >= THERMAL_TAIL_TOL {
        return Err(Error::Truncation(format!(
            "Fock cutoff {n_max} discards thermal weight {tail:.3e} >= {THERMAL_TAIL_TOL:e} at N = {thermal_n}"
        )));
    }
    Ok(tail)
}

/// Smallest n_max ≥ ceil(10N + 5) whose discarded thermal weight is below
/// [`THERMAL_TAIL_TOL`].
pub fn auto_n_max(thermal_n: f64) -> usize {
    let mut n = min_n_max(thermal_n);
    while thermal_tail(thermal_n, n).is_err() {
        n += 1;
    }
    n
}

/// Bose-Einstein weights p_n = N^n/(1+N)^(n+1) for n = 0..=n_max,
/// renormalized after truncation.
pub fn thermal_weights(thermal_n: f64, n_max: usize) -> Result<Vec<f64>> {
    if !(thermal_n.is_finite() && thermal_n >= 0.0) {
        return Err(Error::invalid(
            "thermal_n",
            format!("must be finite and >= 0, got {thermal_n}"),
        ));
    }
    thermal_tail(thermal_n, n_max)?;
    let r = thermal_n / (1.0 + thermal_n);
    let mut p: Vec<f64> = (0..=n_max).map(|n| r.powi(n as i32) / (1.0 + thermal_n)).collect();
    let total = pairwise_sum(&p);
    for x in &mut p {
        *x /= total;
    }
    Ok(p)
}
